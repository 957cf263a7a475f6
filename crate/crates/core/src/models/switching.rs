use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth compactly supported switching `χ(t)`: ramps up on `[0, δ)`, stays at
/// one on `[δ, τ-δ)`, ramps down on `[τ-δ, τ)` and vanishes outside `[0, τ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingProfile {
    ramp: f64,
    duration: f64,
}

impl SwitchingProfile {
    pub fn new(ramp: f64, duration: f64) -> Result<Self> {
        if !(ramp > 0.0 && ramp < 0.5 * duration && duration.is_finite()) {
            return Err(Error::InvalidProfile { ramp, duration });
        }
        Ok(Self { ramp, duration })
    }

    /// Ramp time `δ`.
    pub fn ramp(&self) -> f64 {
        self.ramp
    }

    /// Total interaction time `τ`.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn value(&self, t: f64) -> f64 {
        let (delta, tau) = (self.ramp, self.duration);
        if t < 0.0 || t >= tau {
            0.0
        } else if t < delta {
            0.5 - 0.5 * cot(PI * t / delta).tanh()
        } else if t < tau - delta {
            1.0
        } else {
            0.5 + 0.5 * cot(PI * (t - tau) / delta).tanh()
        }
    }

    /// The switching is fully on for `t` in `[δ, τ-δ]`.
    pub fn plateau(&self) -> (f64, f64) {
        (self.ramp, self.duration - self.ramp)
    }

    /// True when `χ` takes one constant value on all of `[t0, t1]`.
    pub fn is_constant_on(&self, t0: f64, t1: f64) -> bool {
        let (start, end) = self.plateau();
        t1 <= 0.0 || t0 >= self.duration || (t0 >= start && t1 <= end)
    }
}

/// Convenience wrapper for [`SwitchingProfile::value`].
pub fn switching_value(t: f64, profile: &SwitchingProfile) -> f64 {
    profile.value(t)
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> SwitchingProfile {
        SwitchingProfile::new(15.0, 150.0).unwrap()
    }

    #[test]
    fn piecewise_values() {
        let p = fig1();
        assert_eq!(p.value(-1.0), 0.0);
        assert!((p.value(7.5) - 0.5).abs() < 1e-15);
        assert_eq!(p.value(75.0), 1.0);
        assert!((p.value(150.0 - 7.5) - 0.5).abs() < 1e-15);
        assert_eq!(p.value(151.0), 0.0);
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(15.0), 1.0);
        assert_eq!(p.value(135.0), 1.0);
        assert_eq!(p.value(150.0), 0.0);
    }

    #[test]
    fn one_sided_limits_vanish() {
        let p = fig1();
        let h = 1e-3 * p.ramp();
        assert!(p.value(h) < 1e-6);
        assert!((p.value(p.ramp() - h) - 1.0).abs() < 1e-6);
        assert!((p.value(p.duration() - p.ramp() + h) - 1.0).abs() < 1e-6);
        assert!(p.value(p.duration() - h) < 1e-6);
    }

    #[test]
    fn ramp_down_mirrors_ramp_up() {
        let p = fig1();
        for k in 1..100 {
            let t = k as f64 * 0.15;
            assert!((p.value(t) - p.value(p.duration() - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_profiles() {
        assert!(SwitchingProfile::new(0.0, 10.0).is_err());
        assert!(SwitchingProfile::new(5.0, 10.0).is_err());
        assert!(SwitchingProfile::new(-1.0, 10.0).is_err());
        assert!(SwitchingProfile::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn constant_regions() {
        let p = fig1();
        assert!(p.is_constant_on(15.0, 135.0));
        assert!(p.is_constant_on(-3.0, 0.0));
        assert!(p.is_constant_on(150.0, 160.0));
        assert!(!p.is_constant_on(14.9, 20.0));
        assert!(!p.is_constant_on(130.0, 135.1));
    }

    proptest! {
        #[test]
        fn bounded_and_monotone_on_ramp(ramp in 0.1f64..10.0, extra in 0.1f64..100.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let p = SwitchingProfile::new(ramp, 2.0 * ramp + extra).unwrap();
            let t = u * p.duration() * 1.2 - 0.1 * p.duration();
            let x = p.value(t);
            prop_assert!((0.0..=1.0).contains(&x));
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            prop_assert!(p.value(a * ramp) <= p.value(b * ramp) + 1e-15);
        }
    }
}
