use nalgebra::DMatrix;

use super::generator::PhaseSpaceGenerator;
use super::grid::IntegrationGrid;
use crate::error::{Error, Result};
use crate::gaussian::{symplectic_defect, symplectic_project, CovarianceMatrix};
use crate::tolerance;

/// Solution `S(t)` of `dS/dt = Ω F_s(t) S` with `S(t_start) = I`, tagged with
/// its measured defect `max |SᵀΩS - Ω|`.
#[derive(Debug, Clone)]
pub struct SymplecticPropagator {
    pub matrix: DMatrix<f64>,
    pub t: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Integration stops with [`Error::StepSize`] once the defect passes this.
    pub abort_defect: f64,
    /// Apply a first-order symplectic correction at every recorded sample.
    pub project: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            abort_defect: tolerance::DEFECT_ABORT_FACTOR * tolerance::SYMPLECTIC_DEFECT,
            project: false,
        }
    }
}

/// Classical RK4 over the grid, returning the propagator at every sample.
pub fn integrate<G: PhaseSpaceGenerator>(
    generator: &G,
    grid: &IntegrationGrid,
) -> Result<Vec<SymplecticPropagator>> {
    let mut out = Vec::with_capacity(grid.sample_steps().len());
    integrate_with(generator, grid, &IntegratorOptions::default(), |p| {
        out.push(p.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Streaming form of [`integrate`]: `on_sample` sees each recorded
/// propagator in time order.
pub fn integrate_with<G, C>(
    generator: &G,
    grid: &IntegrationGrid,
    options: &IntegratorOptions,
    mut on_sample: C,
) -> Result<()>
where
    G: PhaseSpaceGenerator,
    C: FnMut(&SymplecticPropagator) -> Result<()>,
{
    let dim = 2 * generator.n_modes();
    let h = grid.dt();
    let mut s = CompensatedMatrix::identity(dim);
    let mut work = Rk4Workspace::new(dim);
    let mut powers = StepPowers::default();
    let mut step = 0usize;

    for &target in grid.sample_steps() {
        while step < target {
            let t = grid.time_at(step);
            if generator.is_constant_on(t, grid.time_at(target)) {
                let jump = powers.get(generator, t, h, target - step);
                work.increment.gemm(1.0, jump, &s.value, 0.0);
                s.add(&work.increment);
                step = target;
            } else {
                work.step(generator, t, h, &mut s);
                step += 1;
            }
        }
        let t = grid.time_at(step);
        if s.value.iter().any(|x| !x.is_finite()) {
            return Err(Error::Overflow { t });
        }
        if options.project {
            s = CompensatedMatrix::new(symplectic_project(&s.value));
        }
        let defect = symplectic_defect(&s.value);
        if defect > options.abort_defect {
            return Err(Error::StepSize {
                t,
                defect,
                limit: options.abort_defect,
            });
        }
        on_sample(&SymplecticPropagator {
            matrix: s.value.clone(),
            t,
            defect,
        })?;
    }
    Ok(())
}

/// `S σ Sᵀ`, re-validated against the uncertainty relation.
pub fn evolve_state(
    initial: &CovarianceMatrix,
    propagator: &SymplecticPropagator,
) -> Result<CovarianceMatrix> {
    let s = &propagator.matrix;
    if s.nrows() != initial.dim() {
        return Err(Error::DimensionMismatch {
            expected: initial.dim(),
            got: s.nrows(),
        });
    }
    let moved = s * initial.entries() * s.transpose();
    CovarianceMatrix::new(moved).map_err(|e| {
        Error::NumericalQuality(format!(
            "evolved state at t = {} is not physical: {e}",
            propagator.t
        ))
    })
}

struct Rk4Workspace {
    k1: DMatrix<f64>,
    k2: DMatrix<f64>,
    k3: DMatrix<f64>,
    k4: DMatrix<f64>,
    probe: DMatrix<f64>,
    increment: DMatrix<f64>,
}

/// Running matrix sum with Kahan compensation, so that millions of tiny
/// increments do not lose their low-order bits.
struct CompensatedMatrix {
    value: DMatrix<f64>,
    carry: DMatrix<f64>,
}

impl CompensatedMatrix {
    fn new(value: DMatrix<f64>) -> Self {
        let carry = DMatrix::zeros(value.nrows(), value.ncols());
        Self { value, carry }
    }

    fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim))
    }

    fn add(&mut self, increment: &DMatrix<f64>) {
        for ((v, c), d) in self
            .value
            .as_mut_slice()
            .iter_mut()
            .zip(self.carry.as_mut_slice())
            .zip(increment.as_slice())
        {
            let y = d - *c;
            let sum = *v + y;
            *c = (sum - *v) - y;
            *v = sum;
        }
    }
}

impl Rk4Workspace {
    fn new(dim: usize) -> Self {
        let z = || DMatrix::zeros(dim, dim);
        Self {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            probe: z(),
            increment: z(),
        }
    }

    fn step<G: PhaseSpaceGenerator>(&mut self, g: &G, t: f64, h: f64, state: &mut CompensatedMatrix) {
        let s = &state.value;
        g.apply(t, s, &mut self.k1);
        shifted(&mut self.probe, s, 0.5 * h, &self.k1);
        g.apply(t + 0.5 * h, &self.probe, &mut self.k2);
        shifted(&mut self.probe, s, 0.5 * h, &self.k2);
        g.apply(t + 0.5 * h, &self.probe, &mut self.k3);
        shifted(&mut self.probe, s, h, &self.k3);
        g.apply(t + h, &self.probe, &mut self.k4);

        let (ks, k1, k2, k3, k4) = (
            self.increment.as_mut_slice(),
            self.k1.as_slice(),
            self.k2.as_slice(),
            self.k3.as_slice(),
            self.k4.as_slice(),
        );
        let c = h / 6.0;
        for i in 0..ks.len() {
            ks[i] = c * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        state.add(&self.increment);
    }
}

/// `dst = base + c * k`.
fn shifted(dst: &mut DMatrix<f64>, base: &DMatrix<f64>, c: f64, k: &DMatrix<f64>) {
    for ((d, b), x) in dst
        .as_mut_slice()
        .iter_mut()
        .zip(base.as_slice())
        .zip(k.as_slice())
    {
        *d = b + c * x;
    }
}

/// Powers of the RK4 step matrix for a constant generator. For constant `A`
/// one RK4 step is exactly `I + hA + (hA)²/2 + (hA)³/6 + (hA)⁴/24`, so
/// `m` steps collapse into one matrix power. Everything is held as the
/// increment over the identity, since `I + K` with tiny `K` would round
/// away most of `K`.
#[derive(Default)]
struct StepPowers {
    generator: Option<DMatrix<f64>>,
    increment: Option<DMatrix<f64>>,
    cache: Vec<(usize, DMatrix<f64>)>,
}

impl StepPowers {
    /// `Mᵐ - I` for the step matrix `M` at time `t`.
    fn get<G: PhaseSpaceGenerator>(&mut self, g: &G, t: f64, h: f64, m: usize) -> &DMatrix<f64> {
        let a = g.dense(t);
        if self.generator.as_ref() != Some(&a) {
            let ha = &a * h;
            let mut k = &ha * 0.25;
            k = (&ha + &ha * &k) * (1.0 / 3.0);
            k = (&ha + &ha * &k) * 0.5;
            k = &ha + &ha * &k;
            self.increment = Some(k);
            self.generator = Some(a);
            self.cache.clear();
        }
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == m) {
            return &self.cache[pos].1;
        }
        let power = increment_power(self.increment.as_ref().expect("increment set above"), m);
        self.cache.push((m, power));
        &self.cache.last().expect("just pushed").1
    }
}

/// `(I + X)(I + Y) - I`.
fn compose(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x + y;
    out.gemm(1.0, x, y, 1.0);
    out
}

/// `(I + K)ᵐ - I` by repeated squaring.
fn increment_power(k: &DMatrix<f64>, mut m: usize) -> DMatrix<f64> {
    let mut result = DMatrix::<f64>::zeros(k.nrows(), k.ncols());
    let mut square = k.clone();
    while m > 0 {
        if m & 1 == 1 {
            result = compose(&result, &square);
        }
        m >>= 1;
        if m > 0 {
            square = compose(&square, &square);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::generator::{generator_matrix, HamiltonianFn, SwitchedGenerator};
    use crate::gaussian::QuadraticHamiltonian;
    use crate::models::{CavityModelSpec, ModelSpec, SwitchingProfile};

    // Scaling-and-squaring Taylor exponential, independent of the RK4 path.
    fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
        let norm = a.amax() * a.nrows() as f64;
        let squarings = (norm / 0.25).log2().ceil().max(0.0) as u32;
        let scaled = a / 2f64.powi(squarings as i32);
        let dim = a.nrows();
        let mut term = DMatrix::<f64>::identity(dim, dim);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / k as f64;
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    fn coupled_pair() -> QuadraticHamiltonian {
        let mut f = DMatrix::zeros(4, 4);
        f[(0, 0)] = 1.0;
        f[(1, 1)] = 1.0;
        f[(2, 2)] = 1.3;
        f[(3, 3)] = 1.3;
        f[(0, 2)] = 0.2;
        f[(2, 0)] = 0.2;
        QuadraticHamiltonian::new(f).unwrap()
    }

    #[test]
    fn constant_generator_matches_matrix_exponential() {
        let h = coupled_pair();
        let a = generator_matrix(&h);
        let grid = IntegrationGrid::uniform(0.0, 2.0, 1e-3, 5).unwrap();
        // Plain stepping, without the constant fast path.
        let stepped = integrate(&HamiltonianFn::new(2, |_| h.clone()), &grid).unwrap();
        let powered = integrate(&HamiltonianFn::constant(2, |_| h.clone()), &grid).unwrap();
        for (p, q) in stepped.iter().zip(&powered) {
            let exact = expm(&(&a * p.t));
            assert!((&p.matrix - &exact).amax() < 1e-9, "t = {}", p.t);
            assert!((&q.matrix - &exact).amax() < 1e-9, "t = {}", q.t);
        }
    }

    #[test]
    fn free_mode_rotates_phase_space() {
        let w = 2.5;
        let h = QuadraticHamiltonian::free_modes(&[w]).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 3.0, 1e-3, 4).unwrap();
        for p in integrate(&HamiltonianFn::new(1, |_| h.clone()), &grid).unwrap() {
            let (c, s) = ((w * p.t).cos(), (w * p.t).sin());
            let rot = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
            assert!((&p.matrix - rot).amax() < 1e-10);
            assert!(p.defect < 1e-12);
        }
    }

    fn small_cavity(coupling: f64) -> ModelSpec {
        ModelSpec::Cavity(CavityModelSpec {
            modes: 3,
            length: 1.0,
            detector_frequency: std::f64::consts::PI,
            coupling,
            detector_position: 0.4,
            system_temperature: 0.5,
            bath_temperature: 1.0,
            switching: SwitchingProfile::new(2.0, 10.0).unwrap(),
        })
    }

    #[test]
    fn uncoupled_model_stays_block_diagonal() {
        let model = small_cavity(0.0);
        let gen = SwitchedGenerator::from_model(&model).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 10.0, 1e-3, 11).unwrap();
        for p in integrate(&gen, &grid).unwrap() {
            for i in 0..8 {
                for j in 0..8 {
                    if i / 2 != j / 2 {
                        assert_eq!(p.matrix[(i, j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn switched_model_matches_plain_stepping() {
        // The plateau fast path must reproduce step-by-step RK4.
        let model = small_cavity(0.2);
        let fast = SwitchedGenerator::from_model(&model).unwrap();
        let slow = HamiltonianFn::new(4, |t| model.hamiltonian_at(t).unwrap());
        let grid = IntegrationGrid::uniform(0.0, 10.0, 2e-3, 21).unwrap();
        let a = integrate(&fast, &grid).unwrap();
        let b = integrate(&slow, &grid).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.t, q.t);
            assert!((&p.matrix - &q.matrix).amax() < 1e-11, "t = {}", p.t);
            assert!(p.defect < 1e-8);
        }
    }

    #[test]
    fn evolve_state_identity_and_vacuum_rotation() {
        let sigma = CovarianceMatrix::diagonal(&[2.0, 1.3]).unwrap();
        let id = SymplecticPropagator {
            matrix: DMatrix::identity(4, 4),
            t: 0.0,
            defect: 0.0,
        };
        assert_eq!(evolve_state(&sigma, &id).unwrap(), sigma);

        let h = coupled_pair();
        let grid = IntegrationGrid::uniform(0.0, 1.0, 1e-3, 2).unwrap();
        let p = integrate(&HamiltonianFn::new(2, |_| h.clone()), &grid).unwrap();
        // Passive part only: a beam splitter mixing the two modes.
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let bs = SymplecticPropagator {
            matrix: DMatrix::from_row_slice(
                4,
                4,
                &[c, 0.0, s, 0.0, 0.0, c, 0.0, s, -s, 0.0, c, 0.0, 0.0, -s, 0.0, c],
            ),
            t: 0.0,
            defect: 0.0,
        };
        let vac = CovarianceMatrix::vacuum(2).unwrap();
        let moved = evolve_state(&vac, &bs).unwrap();
        assert!((moved.entries() - vac.entries()).amax() < 1e-15);
        assert!(evolve_state(&CovarianceMatrix::vacuum(1).unwrap(), &p[1]).is_err());
    }

    #[test]
    fn coarse_steps_abort_on_defect() {
        let h = QuadraticHamiltonian::free_modes(&[50.0]).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 20.0, 2e-2, 3).unwrap();
        let err = integrate(&HamiltonianFn::new(1, |_| h.clone()), &grid).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }), "{err}");
    }

    #[test]
    fn runaway_generator_overflows() {
        let mut f = DMatrix::zeros(2, 2);
        f[(0, 1)] = 400.0;
        f[(1, 0)] = 400.0;
        let h = QuadraticHamiltonian::new(f).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 10.0, 1e-3, 2).unwrap();
        let opts = IntegratorOptions {
            abort_defect: f64::INFINITY,
            project: false,
        };
        let err = integrate_with(&HamiltonianFn::new(1, |_| h.clone()), &grid, &opts, |_| Ok(()))
            .unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }), "{err}");
    }

    #[test]
    fn projection_option_keeps_defect_down() {
        let h = QuadraticHamiltonian::free_modes(&[5.0]).unwrap();
        let grid = IntegrationGrid::uniform(0.0, 5.0, 1e-2, 11).unwrap();
        let gen = HamiltonianFn::new(1, |_| h.clone());
        let plain = integrate(&gen, &grid).unwrap();
        let mut projected = Vec::new();
        let opts = IntegratorOptions {
            project: true,
            ..Default::default()
        };
        integrate_with(&gen, &grid, &opts, |p| {
            projected.push(p.defect);
            Ok(())
        })
        .unwrap();
        assert!(projected.last().unwrap() < &(plain.last().unwrap().defect * 1e-2));
    }
}
