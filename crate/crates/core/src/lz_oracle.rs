//! Direct integration of the swept few-level problem.
//!
//! At fixed `ky` the slope `V = gx` acts in momentum space as a uniform drift
//! `kx(t) = kx_start − g t / ħ`. Each momentum component then obeys
//!
//! ```text
//! iħ ∂t a = [cħ kx(t) Sx + m̃c² Sz] a
//! ```
//!
//! which this module integrates with classical fourth-order Runge-Kutta,
//! independently of the closed-form probabilities in [`crate::lz_analytics`].
//!
//! The gap term of the reduced Hamiltonian is `m̃c²·(n_y Sy + n_z Sz)`. A
//! rotation about the x axis commutes with `Sx` and maps that combination
//! onto `Sz` without changing its spectrum, so the populations do not depend on
//! which of the two is integrated. [`GapForm::Literal`] keeps the rotated form
//! for comparison.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lz_analytics::TransitionProbabilities;
use crate::spin_algebra::{Band, BandProjectors, CMatrix, PhysicalParams, Spin, SpinAlgebra};

/// Minimum `cħ|kx| / m̃c²` at both ends of a sweep.
pub const ASYMPTOTIC_FACTOR: f64 = 20.0;

/// Largest population change tolerated when `dt` is halved.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Norm drift allowed over a full sweep.
pub const NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapForm {
    /// `m̃c²·Sz`.
    Reduced,
    /// `cħky·Sy + mc²·Sz` with `ky` fixed by `m̃` and `m`.
    Literal,
}

#[derive(Debug, Clone)]
pub struct SweepProblem {
    algebra: SpinAlgebra,
    params: PhysicalParams,
    mtilde_c2: f64,
    kx_start: f64,
    kx_end: f64,
    initial_band: Band,
    gap_form: GapForm,
}

impl SweepProblem {
    /// Sweep over the default window `±20·max(m̃c², sqrt(ħcg)) / cħ`.
    pub fn new(
        algebra: SpinAlgebra,
        params: PhysicalParams,
        mtilde_c2: f64,
        initial_band: Band,
    ) -> Result<Self> {
        if !(params.g > 0.0) {
            return Err(Error::NoSweep(params.g));
        }
        if !(mtilde_c2 >= params.rest_energy() - 1e-12 * params.rest_energy()) {
            return Err(Error::invalid(
                "mtilde_c2",
                format!(
                    "effective rest energy {mtilde_c2} below the bare rest energy {}",
                    params.rest_energy()
                ),
            ));
        }
        if algebra.spin() == Spin::Half && initial_band == Band::Zero {
            return Err(Error::invalid("initial_band", "spin-1/2 has no flat band"));
        }
        let sweep_scale = (params.hbar * params.c * params.g).sqrt();
        let k = ASYMPTOTIC_FACTOR * mtilde_c2.max(sweep_scale) / (params.c * params.hbar);
        Ok(Self {
            algebra,
            params,
            mtilde_c2,
            kx_start: k,
            kx_end: -k,
            initial_band,
            gap_form: GapForm::Reduced,
        })
    }

    /// Convenience constructor at adiabaticity `ratio` in units `ħ = c = m̃ = 1`.
    pub fn from_ratio(spin: Spin, ratio: f64, initial_band: Band) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::invalid(
                "ratio",
                format!("must be positive, got {ratio}"),
            ));
        }
        let params = PhysicalParams::natural(1.0, 1.0 / ratio)?;
        Self::new(spin.algebra(), params, 1.0, initial_band)
    }

    pub fn with_range(mut self, kx_start: f64, kx_end: f64) -> Result<Self> {
        if !(kx_start > 0.0 && kx_end < 0.0) {
            return Err(Error::invalid(
                "kx range",
                format!("need kx_start > 0 > kx_end, got {kx_start}, {kx_end}"),
            ));
        }
        let floor = ASYMPTOTIC_FACTOR * self.mtilde_c2;
        let chk = self.params.c * self.params.hbar;
        if chk * kx_start.min(-kx_end) < floor {
            return Err(Error::invalid(
                "kx range",
                format!("ends must satisfy c·hbar·|kx| >= {ASYMPTOTIC_FACTOR}·m̃c²"),
            ));
        }
        self.kx_start = kx_start;
        self.kx_end = kx_end;
        Ok(self)
    }

    pub fn with_gap_form(mut self, gap_form: GapForm) -> Self {
        self.gap_form = gap_form;
        self
    }

    pub fn with_initial_band(mut self, band: Band) -> Self {
        self.initial_band = band;
        self
    }

    pub fn range(&self) -> (f64, f64) {
        (self.kx_start, self.kx_end)
    }

    pub fn duration(&self) -> f64 {
        (self.kx_start - self.kx_end) * self.params.hbar / self.params.g
    }

    fn gap_components(&self) -> (f64, f64) {
        match self.gap_form {
            GapForm::Reduced => (0.0, self.mtilde_c2),
            GapForm::Literal => {
                let rest = self.params.rest_energy();
                let transverse = (self.mtilde_c2 * self.mtilde_c2 - rest * rest)
                    .max(0.0)
                    .sqrt();
                (transverse, rest)
            }
        }
    }

    fn hamiltonian(&self, kx: f64) -> CMatrix {
        let [mx, my, mz] = self.algebra.coupling_matrices();
        let (gy, gz) = self.gap_components();
        mx * Complex64::from(self.params.c * self.params.hbar * kx)
            + my * Complex64::from(gy)
            + mz * Complex64::from(gz)
    }

    fn upper_energy(&self, kx: f64) -> f64 {
        (self.params.c * self.params.hbar * kx).hypot(self.mtilde_c2)
    }

    fn projectors(&self, kx: f64) -> Result<BandProjectors> {
        self.algebra
            .projectors_of(&self.hamiltonian(kx), self.upper_energy(kx))
    }

    /// Largest `‖H‖` along the sweep (attained at an endpoint).
    pub fn max_energy(&self) -> f64 {
        self.upper_energy(self.kx_start)
            .max(self.upper_energy(self.kx_end))
    }

    /// A step with `dt·max‖H‖/ħ = 0.01`, small enough for the norm guard.
    pub fn default_dt(&self) -> f64 {
        0.01 * self.params.hbar / self.max_energy()
    }
}

/// Normalized eigenvector of `band` taken from the largest projector column.
fn band_state(projectors: &BandProjectors, band: Band) -> Result<Vec<Complex64>> {
    let p = projectors.get(band);
    let (col, norm) =
        (0..p.ncols())
            .map(|j| (j, p.column(j).norm()))
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
    if norm < 1e-6 {
        return Err(Error::EmptyProjection { norm });
    }
    Ok(p.column(col).iter().map(|z| z / norm).collect())
}

fn apply(h: &CMatrix, v: &[Complex64], scale: Complex64, out: &mut [Complex64]) {
    let d = v.len();
    for i in 0..d {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            acc += h[(i, j)] * v[j];
        }
        out[i] = acc * scale;
    }
}

/// `out = scale·(gap + kx·drive)·v`
fn apply_swept(
    gap: &CMatrix,
    drive: &CMatrix,
    kx: f64,
    v: &[Complex64],
    scale: Complex64,
    out: &mut [Complex64],
) {
    let d = v.len();
    for i in 0..d {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            acc += (gap[(i, j)] + drive[(i, j)] * kx) * v[j];
        }
        out[i] = acc * scale;
    }
}

/// Result of a single fixed-step run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRun {
    pub populations: [f64; 3],
    pub norm_drift: f64,
    pub steps: usize,
}

/// One fixed-step RK4 pass; no convergence check.
pub fn integrate_fixed(problem: &SweepProblem, dt: f64) -> Result<SweepRun> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let stiffness = dt * problem.max_energy() / problem.params.hbar;
    if stiffness >= 0.1 {
        return Err(Error::invalid(
            "dt",
            format!("dt·max|H|/hbar = {stiffness:.3} must stay below 0.1"),
        ));
    }
    let total = problem.duration();
    let steps = (total / dt).ceil().max(1.0) as usize;
    let h_step = total / steps as f64;
    let rate = problem.params.g / problem.params.hbar;
    let factor = Complex64::new(0.0, -h_step / problem.params.hbar);

    let mut state = band_state(&problem.projectors(problem.kx_start)?, problem.initial_band)?;
    let d = state.len();
    let mut k1 = vec![Complex64::default(); d];
    let mut k2 = vec![Complex64::default(); d];
    let mut k3 = vec![Complex64::default(); d];
    let mut k4 = vec![Complex64::default(); d];
    let mut tmp = vec![Complex64::default(); d];

    let gap = problem.hamiltonian(0.0);
    let drive = problem.hamiltonian(1.0) - &gap;

    for n in 0..steps {
        let t = n as f64 * h_step;
        let kx0 = problem.kx_start - rate * t;
        let kx_mid = problem.kx_start - rate * (t + 0.5 * h_step);
        let kx1 = problem.kx_start - rate * (t + h_step);

        apply_swept(&gap, &drive, kx0, &state, factor, &mut k1);
        for i in 0..d {
            tmp[i] = state[i] + k1[i] * 0.5;
        }
        apply_swept(&gap, &drive, kx_mid, &tmp, factor, &mut k2);
        for i in 0..d {
            tmp[i] = state[i] + k2[i] * 0.5;
        }
        apply_swept(&gap, &drive, kx_mid, &tmp, factor, &mut k3);
        for i in 0..d {
            tmp[i] = state[i] + k3[i];
        }
        apply_swept(&gap, &drive, kx1, &tmp, factor, &mut k4);
        for i in 0..d {
            state[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) / 6.0;
        }
    }

    let norm2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    let norm_drift = (norm2 - 1.0).abs();
    if norm_drift > NORM_TOL {
        return Err(Error::NormDrift {
            drift: norm_drift,
            limit: NORM_TOL,
        });
    }

    let projectors = problem.projectors(problem.kx_end)?;
    let mut populations = [0.0; 3];
    for (slot, band) in populations.iter_mut().zip(Band::ALL) {
        let p = projectors.get(band);
        apply(p, &state, Complex64::new(1.0, 0.0), &mut tmp);
        *slot = tmp.iter().map(|z| z.norm_sqr()).sum();
    }
    Ok(SweepRun {
        populations,
        norm_drift,
        steps,
    })
}

/// Final band populations `(+, 0, −)` for the problem's initial band.
///
/// Runs at `dt` and `dt/2` and returns the finer result; fails when the two
/// differ by more than [`CONVERGENCE_TOL`] in any band.
pub fn integrate_sweep(problem: &SweepProblem, dt: f64) -> Result<TransitionProbabilities> {
    let coarse = integrate_fixed(problem, dt)?;
    let fine = integrate_fixed(problem, dt / 2.0)?;
    let delta = coarse
        .populations
        .iter()
        .zip(fine.populations.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if delta > CONVERGENCE_TOL {
        return Err(Error::NotConverged { delta });
    }
    let [plus, zero, minus] = fine.populations;
    Ok(TransitionProbabilities::from_populations(plus, zero, minus))
}

/// Rows: initial band; columns: final band; both ordered `(+, 0, −)`.
///
/// Spin-1/2 problems leave the zero row and column empty.
pub fn transition_matrix(problem: &SweepProblem, dt: f64) -> Result<[[f64; 3]; 3]> {
    let mut matrix = [[0.0; 3]; 3];
    for (row, band) in matrix.iter_mut().zip(Band::ALL) {
        if problem.algebra.spin() == Spin::Half && band == Band::Zero {
            continue;
        }
        let outcome = integrate_sweep(&problem.clone().with_initial_band(band), dt)?;
        *row = outcome.as_array();
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz_analytics::{spin1_from_ratio, spin_half_from_ratio};
    use crate::spin_algebra::{pauli_algebra, spin1_matrices};

    fn run(problem: &SweepProblem) -> TransitionProbabilities {
        integrate_sweep(problem, problem.default_dt()).unwrap()
    }

    #[test]
    fn massless_sweep_crosses_diabatically() {
        let params = PhysicalParams::natural(0.0, 0.7).unwrap();
        let problem = SweepProblem::new(spin1_matrices(), params, 0.0, Band::Plus).unwrap();
        let p = run(&problem);
        assert!((p.gamma_pm - 1.0).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn spin1_matches_closed_form_in_packet_regime() {
        let params = PhysicalParams::natural(0.85, 1.5).unwrap();
        let problem = SweepProblem::new(spin1_matrices(), params, 0.85, Band::Plus).unwrap();
        let got = run(&problem);
        let want = spin1_from_ratio(0.85 * 0.85 / 1.5).unwrap();
        for (g, w) in got.as_array().iter().zip(want.as_array()) {
            assert!((g - w).abs() < 0.01 * w, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn spin_half_matches_two_level_formula() {
        let problem = SweepProblem::from_ratio(Spin::Half, 0.56, Band::Plus).unwrap();
        let got = run(&problem).transmission;
        let want = spin_half_from_ratio(0.56).unwrap().transmission;
        assert!((want - 0.172).abs() < 1e-3);
        assert!((got - want).abs() < 0.01 * want, "{got} vs {want}");
    }

    #[test]
    fn literal_gap_form_agrees_with_reduced() {
        let params = PhysicalParams::natural(0.6, 0.9).unwrap();
        let mtilde = 0.6f64.hypot(0.5);
        let reduced = SweepProblem::new(spin1_matrices(), params, mtilde, Band::Plus).unwrap();
        let literal = reduced.clone().with_gap_form(GapForm::Literal);
        let dt = reduced.default_dt();
        let a = integrate_fixed(&reduced, dt).unwrap().populations;
        let b = integrate_fixed(&literal, dt).unwrap().populations;
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn widening_the_window_changes_little() {
        let problem = SweepProblem::from_ratio(Spin::One, 0.8, Band::Plus).unwrap();
        let (ks, ke) = problem.range();
        let wide = problem.clone().with_range(2.0 * ks, 2.0 * ke).unwrap();
        let a = run(&problem);
        let b = run(&wide);
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            assert!((x - y).abs() < 1e-3);
        }
    }

    #[test]
    fn transition_matrix_is_doubly_stochastic() {
        let problem = SweepProblem::from_ratio(Spin::One, 0.5, Band::Plus).unwrap();
        let m = transition_matrix(&problem, problem.default_dt()).unwrap();
        for i in 0..3 {
            let row: f64 = m[i].iter().sum();
            let col: f64 = (0..3).map(|r| m[r][i]).sum();
            assert!(
                (row - 1.0).abs() < 1e-3 && (col - 1.0).abs() < 1e-3,
                "{m:?}"
            );
        }
    }

    #[test]
    fn norm_is_preserved() {
        let problem = SweepProblem::from_ratio(Spin::One, 3.0, Band::Plus).unwrap();
        let run = integrate_fixed(&problem, problem.default_dt()).unwrap();
        assert!(run.norm_drift < 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = PhysicalParams::natural(1.0, 0.0).unwrap();
        assert!(SweepProblem::new(spin1_matrices(), params, 1.0, Band::Plus).is_err());
        let params = PhysicalParams::natural(1.0, 1.0).unwrap();
        assert!(SweepProblem::new(pauli_algebra(), params, 1.0, Band::Zero).is_err());
        let problem = SweepProblem::new(spin1_matrices(), params, 1.0, Band::Plus).unwrap();
        assert!(problem.clone().with_range(5.0, -30.0).is_err());
        assert!(problem.clone().with_range(-1.0, -30.0).is_err());
        assert!(integrate_fixed(&problem, 1.0).is_err());
    }
}
