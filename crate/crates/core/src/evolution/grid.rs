use crate::error::{Error, Result};

/// Fixed-step time grid with a monotone subset of steps at which the
/// propagator is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
    sample_steps: Vec<usize>,
}

impl IntegrationGrid {
    /// `samples` evenly spaced records including both end points. The step is
    /// adjusted so that an integer number of steps spans the interval exactly.
    pub fn uniform(t_start: f64, t_end: f64, dt: f64, samples: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {dt}")));
        }
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "empty time interval [{t_start}, {t_end}]"
            )));
        }
        let steps = ((t_end - t_start) / dt).round().max(1.0) as usize;
        if samples < 2 {
            return Err(Error::InvalidGrid("need at least two samples".into()));
        }
        if samples > steps + 1 {
            return Err(Error::InvalidGrid(format!(
                "{samples} samples requested but the grid has only {} points",
                steps + 1
            )));
        }
        let last = (samples - 1) as f64;
        let sample_steps = (0..samples)
            .map(|i| ((i as f64) * steps as f64 / last).round() as usize)
            .collect();
        Self::with_sample_steps(t_start, t_end, steps, sample_steps)
    }

    pub fn with_sample_steps(
        t_start: f64,
        t_end: f64,
        steps: usize,
        sample_steps: Vec<usize>,
    ) -> Result<Self> {
        if steps == 0 || !(t_end > t_start) {
            return Err(Error::InvalidGrid("grid needs at least one step".into()));
        }
        if sample_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("sample steps must increase strictly".into()));
        }
        if sample_steps.last().is_some_and(|&k| k > steps) {
            return Err(Error::InvalidGrid("sample step beyond the grid".into()));
        }
        Ok(Self {
            t_start,
            t_end,
            steps,
            sample_steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Effective step after fitting an integer number of steps.
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time_at(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            self.t_start + step as f64 * self.dt()
        }
    }

    pub fn sample_steps(&self) -> &[usize] {
        &self.sample_steps
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_steps.iter().map(|&k| self.time_at(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_end_points() {
        let g = IntegrationGrid::uniform(0.0, 150.0, 5e-5, 2000).unwrap();
        assert_eq!(g.steps(), 3_000_000);
        let times = g.sample_times();
        assert_eq!(times.len(), 2000);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 150.0);
        for w in times.windows(2) {
            assert!(w[1] > w[0]);
            assert!(((w[1] - w[0]) - 150.0 / 1999.0).abs() < 1e-4);
        }
    }

    #[test]
    fn step_is_refitted() {
        let g = IntegrationGrid::uniform(0.0, 1.0, 0.3, 2).unwrap();
        assert_eq!(g.steps(), 3);
        assert!((g.dt() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_grids() {
        assert!(IntegrationGrid::uniform(0.0, 1.0, 0.0, 10).is_err());
        assert!(IntegrationGrid::uniform(1.0, 1.0, 0.1, 2).is_err());
        assert!(IntegrationGrid::uniform(0.0, 1.0, 0.5, 10).is_err());
        assert!(IntegrationGrid::with_sample_steps(0.0, 1.0, 10, vec![0, 5, 5]).is_err());
        assert!(IntegrationGrid::with_sample_steps(0.0, 1.0, 10, vec![0, 11]).is_err());
    }
}
