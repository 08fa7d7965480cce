//! Fock-space model of the two-ion simulator.
//!
//! Ion 1 carries the spinor in three internal levels `a, b, c`; its motional
//! mode supplies position and momentum through
//!
//! ```text
//! x̂ = Δ(a + a†),    p̂ = (ħ / 2iΔ)(a − a†)
//! ```
//!
//! Ion 2 has two levels `a', b'` and, prepared in the `+1` eigenstate of its
//! `σx`, turns a position coupling into the linear potential. Combining
//! carrier, red- and blue-sideband couplings gives
//!
//! ```text
//! H = √2 η Δ Ω̃₁ Sx p̂ + ħ Ω₁ Sz + ħ η Ω̃₂ (x̂/Δ) σ₂ˣ
//! ```
//!
//! which is the one-dimensional Maxwell Hamiltonian with `c = √2ηΔΩ̃₁`,
//! `mc² = ħΩ₁` and `g = ħηΩ̃₂/Δ`.
//!
//! Units: `ħ = 1`, lengths in units of `Δ` when `delta_spread = 1`,
//! frequencies in rad/ms and times in ms.
//!
//! Basis ordering is `|s⟩ ⊗ |s₂⟩ ⊗ |n⟩` with the Fock index fastest. When
//! `reduce_ion2` is set the ion-2 factor is dropped and `σ₂ˣ → +1`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin_algebra::{Band, CMatrix, PhysicalParams, Spin};
use crate::wavepacket::{BandBasis, BandPopulations, Grid1D, SpinorField};

/// Action quantum in ion units.
pub const HBAR: f64 = 1.0;

/// Weight allowed in the top [`TAIL_LEVELS`] Fock states.
pub const TAIL_TOL: f64 = 1e-6;

pub const TAIL_LEVELS: usize = 4;

/// Lamb-Dicke parameters above this are flagged as outside the regime where
/// the first-order expansion holds.
pub const LAMB_DICKE_WARN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonParams {
    pub eta: f64,
    pub omega1_tilde: f64,
    pub omega1: f64,
    pub omega2_tilde: f64,
    pub delta_spread: f64,
    pub n_fock: usize,
    pub reduce_ion2: bool,
}

impl IonParams {
    pub fn new(
        eta: f64,
        omega1_tilde: f64,
        omega1: f64,
        omega2_tilde: f64,
        n_fock: usize,
    ) -> Result<Self> {
        let p = Self {
            eta,
            omega1_tilde,
            omega1,
            omega2_tilde,
            delta_spread: 1.0,
            n_fock,
            reduce_ion2: true,
        };
        p.validate()?;
        Ok(p)
    }

    /// `η = 0.05`, `Ω̃₁ = 2π×10 kHz`, `Ω₁ = 2π×1 kHz`, `Ω̃₂ = 2π×50 kHz`.
    pub fn feasibility(n_fock: usize) -> Result<Self> {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self::new(0.05, two_pi * 10.0, two_pi * 1.0, two_pi * 50.0, n_fock)
    }

    pub fn with_ion2(mut self) -> Self {
        self.reduce_ion2 = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid(
                "eta",
                format!("must lie in (0, 1), got {}", self.eta),
            ));
        }
        for (name, v) in [
            ("omega1_tilde", self.omega1_tilde),
            ("omega1", self.omega1),
            ("omega2_tilde", self.omega2_tilde),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be non-negative, got {v}"),
                ));
            }
        }
        if !(self.delta_spread > 0.0) {
            return Err(Error::invalid("delta_spread", "must be positive"));
        }
        if self.n_fock < 16 {
            return Err(Error::invalid(
                "n_fock",
                format!("must be at least 16, got {}", self.n_fock),
            ));
        }
        Ok(())
    }

    pub fn outside_lamb_dicke(&self) -> bool {
        self.eta > LAMB_DICKE_WARN
    }

    pub fn layout(&self) -> Layout {
        Layout {
            n_fock: self.n_fock,
            ion2: !self.reduce_ion2,
        }
    }
}

/// Dimensions of the composite Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_fock: usize,
    pub ion2: bool,
}

impl Layout {
    pub fn ion2_levels(&self) -> usize {
        if self.ion2 {
            2
        } else {
            1
        }
    }

    pub fn dimension(&self) -> usize {
        3 * self.ion2_levels() * self.n_fock
    }

    pub fn index(&self, s: usize, s2: usize, n: usize) -> usize {
        (s * self.ion2_levels() + s2) * self.n_fock + n
    }
}

/// Truncated annihilation operator.
pub fn annihilation(n_fock: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n_fock, n_fock);
    for n in 1..n_fock {
        a[(n - 1, n)] = Complex64::from((n as f64).sqrt());
    }
    a
}

/// `(x̂, p̂)` on the first `n_fock` oscillator states.
pub fn quadratures(delta_spread: f64, n_fock: usize) -> Result<(CMatrix, CMatrix)> {
    if n_fock < 2 {
        return Err(Error::invalid("n_fock", "need at least two Fock states"));
    }
    let a = annihilation(n_fock);
    let ad = a.adjoint();
    let x = (&a + &ad) * Complex64::from(delta_spread);
    let p = (&a - &ad) * Complex64::new(0.0, -HBAR / (2.0 * delta_spread));
    Ok((x, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelPair {
    /// Ion 1, `a ↔ b`.
    AB,
    /// Ion 1, `b ↔ c`.
    BC,
    /// Ion 2, `a' ↔ b'`.
    Ion2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    Carrier,
    Red,
    Blue,
}

/// Internal operator `|upper⟩⟨lower|` of a pair, on the internal space.
fn raising(pair: LevelPair, layout: &Layout) -> Result<CMatrix> {
    let d2 = layout.ion2_levels();
    let dim = 3 * d2;
    let mut m = CMatrix::zeros(dim, dim);
    let one = Complex64::new(1.0, 0.0);
    match pair {
        LevelPair::AB | LevelPair::BC => {
            let (upper, lower) = if pair == LevelPair::AB {
                (0, 1)
            } else {
                (1, 2)
            };
            for s2 in 0..d2 {
                m[(upper * d2 + s2, lower * d2 + s2)] = one;
            }
        }
        LevelPair::Ion2 => {
            if !layout.ion2 {
                return Err(Error::invalid(
                    "level_pair",
                    "a'-b' is not part of the reduced space",
                ));
            }
            for s in 0..3 {
                m[(s * 2, s * 2 + 1)] = one;
            }
        }
    }
    Ok(m)
}

/// `A_internal ⊗ B_motion` in the layout's ordering.
fn embed(internal: &CMatrix, motion: &CMatrix) -> CMatrix {
    internal.kronecker(motion)
}

/// Pauli `σz` of a pair, `|upper⟩⟨upper| − |lower⟩⟨lower|`.
fn pair_sigma_z(pair: LevelPair, layout: &Layout) -> Result<CMatrix> {
    let up = raising(pair, layout)?;
    let down = up.adjoint();
    Ok(&up * &down - &down * &up)
}

/// One coupling of the trapped-ion toolbox, embedded in the full space:
///
/// * carrier: `(ħΩ₀/2)(σ⁺e^{iφ} + h.c.)`
/// * red: `(ħΩ₀η/2)(a σ⁺e^{iφ} + h.c.)`
/// * blue: `(ħΩ₀η/2)(a† σ⁺e^{iφ} + h.c.)`
pub fn sideband_toolbox(
    pair: LevelPair,
    kind: Sideband,
    rabi: f64,
    eta: f64,
    phase: f64,
    layout: &Layout,
) -> Result<CMatrix> {
    let up = raising(pair, layout)? * Complex64::from_polar(1.0, phase);
    let n = layout.n_fock;
    let (motion, strength) = match kind {
        Sideband::Carrier => (CMatrix::identity(n, n), HBAR * rabi / 2.0),
        Sideband::Red => (annihilation(n), HBAR * rabi * eta / 2.0),
        Sideband::Blue => (annihilation(n).adjoint(), HBAR * rabi * eta / 2.0),
    };
    let half = embed(&up, &motion);
    Ok((&half + half.adjoint()) * Complex64::from(strength))
}

/// Red sideband at `φ = −π/2` plus blue at `φ = +π/2`: `ηΔΩ₀ σx p̂`.
fn momentum_coupling(
    pair: LevelPair,
    rabi: f64,
    ion: &IonParams,
    layout: &Layout,
) -> Result<CMatrix> {
    let red = sideband_toolbox(pair, Sideband::Red, rabi, ion.eta, -FRAC_PI_2, layout)?;
    let blue = sideband_toolbox(pair, Sideband::Blue, rabi, ion.eta, FRAC_PI_2, layout)?;
    Ok((red + blue) * Complex64::from(ion.delta_spread))
}

/// Red plus blue sideband, both at `φ = 0`: `ħηΩ₀/2 · σx (x̂/Δ)`.
fn position_coupling(
    pair: LevelPair,
    rabi: f64,
    ion: &IonParams,
    layout: &Layout,
) -> Result<CMatrix> {
    let red = sideband_toolbox(pair, Sideband::Red, rabi, ion.eta, 0.0, layout)?;
    let blue = sideband_toolbox(pair, Sideband::Blue, rabi, ion.eta, 0.0, layout)?;
    Ok(red + blue)
}

/// Composite Hamiltonian assembled from the toolbox couplings.
pub fn build_maxwell_hamiltonian(ion: &IonParams) -> Result<CMatrix> {
    ion.validate()?;
    let layout = ion.layout();
    let n = layout.n_fock;
    let mut h = momentum_coupling(LevelPair::AB, ion.omega1_tilde, ion, &layout)?
        + momentum_coupling(LevelPair::BC, ion.omega1_tilde, ion, &layout)?;

    // AC Stark shifts: ħΩ₁(σz^ab + σz^bc).
    let stark = pair_sigma_z(LevelPair::AB, &layout)? + pair_sigma_z(LevelPair::BC, &layout)?;
    h += embed(&stark, &CMatrix::identity(n, n)) * Complex64::from(HBAR * ion.omega1);

    if layout.ion2 {
        h += position_coupling(LevelPair::Ion2, 2.0 * ion.omega2_tilde, ion, &layout)?;
    } else {
        let (x, _) = quadratures(ion.delta_spread, n)?;
        let strength = HBAR * ion.eta * ion.omega2_tilde / ion.delta_spread;
        h += embed(&CMatrix::identity(3, 3), &x) * Complex64::from(strength);
    }
    Ok(h)
}

/// The same Hamiltonian written directly with the spin-1 matrices.
pub fn maxwell_hamiltonian_direct(ion: &IonParams) -> Result<CMatrix> {
    ion.validate()?;
    let layout = ion.layout();
    let n = layout.n_fock;
    let spin = crate::spin_algebra::spin1_matrices();
    let (x, p) = quadratures(ion.delta_spread, n)?;
    let id2 = CMatrix::identity(layout.ion2_levels(), layout.ion2_levels());
    let sigma2x = if layout.ion2 {
        crate::spin_algebra::sigma_x()
    } else {
        CMatrix::identity(1, 1)
    };
    let c = SQRT_2 * ion.eta * ion.delta_spread * ion.omega1_tilde;
    let kinetic = embed(&spin.sx().kronecker(&id2), &p) * Complex64::from(c);
    let mass = embed(&spin.sz().kronecker(&id2), &CMatrix::identity(n, n))
        * Complex64::from(HBAR * ion.omega1);
    let slope = HBAR * ion.eta * ion.omega2_tilde / ion.delta_spread;
    let potential =
        embed(&CMatrix::identity(3, 3).kronecker(&sigma2x), &x) * Complex64::from(slope);
    Ok(kinetic + mass + potential)
}

/// Continuum parameters realized by the ion couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterMap {
    pub physical: PhysicalParams,
    /// `m²c⁴ / ħcg`.
    pub ratio: f64,
}

/// `c = √2ηΔΩ̃₁`, `mc² = ħΩ₁`, `g = ħηΩ̃₂/Δ`.
pub fn map_parameters(ion: &IonParams) -> Result<ParameterMap> {
    ion.validate()?;
    let c = SQRT_2 * ion.eta * ion.delta_spread * ion.omega1_tilde;
    if !(c > 0.0) {
        return Err(Error::invalid(
            "omega1_tilde",
            "must be positive to define c",
        ));
    }
    let rest_energy = HBAR * ion.omega1;
    let g = HBAR * ion.eta * ion.omega2_tilde / ion.delta_spread;
    let physical = PhysicalParams::new(c, rest_energy / (c * c), g, HBAR)?;
    let ratio = if ion.omega2_tilde > 0.0 {
        ion.omega1 * ion.omega1 / (SQRT_2 * ion.eta * ion.eta * ion.omega1_tilde * ion.omega2_tilde)
    } else {
        f64::INFINITY
    };
    Ok(ParameterMap { physical, ratio })
}

/// Composite state of both ions and the shared motional mode.
#[derive(Debug, Clone, PartialEq)]
pub struct IonState {
    layout: Layout,
    amplitudes: DVector<Complex64>,
}

impl IonState {
    pub fn from_amplitudes(layout: Layout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dimension() {
            return Err(Error::invalid(
                "amplitudes",
                format!(
                    "expected {} values, got {}",
                    layout.dimension(),
                    amplitudes.len()
                ),
            ));
        }
        Ok(Self {
            layout,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Occupations of ion-1 levels `(a, b, c)`.
    pub fn internal_populations(&self) -> [f64; 3] {
        let mut pops = [0.0; 3];
        let d2 = self.layout.ion2_levels();
        for (s, pop) in pops.iter_mut().enumerate() {
            for s2 in 0..d2 {
                for n in 0..self.layout.n_fock {
                    *pop += self.amplitudes[self.layout.index(s, s2, n)].norm_sqr();
                }
            }
        }
        pops
    }

    /// Motional number distribution summed over internal states.
    pub fn number_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.layout.n_fock];
        for (i, z) in self.amplitudes.iter().enumerate() {
            dist[i % self.layout.n_fock] += z.norm_sqr();
        }
        dist
    }

    pub fn mean_number(&self) -> f64 {
        self.number_distribution()
            .iter()
            .enumerate()
            .map(|(n, w)| n as f64 * w)
            .sum()
    }

    /// Weight in the top [`TAIL_LEVELS`] Fock states.
    pub fn fock_tail(&self) -> f64 {
        let dist = self.number_distribution();
        dist[dist.len() - TAIL_LEVELS..].iter().sum()
    }

    /// `⟨ψ| 1 ⊗ op |ψ⟩` for a motional operator.
    pub fn motional_expectation(&self, op: &CMatrix) -> Complex64 {
        let n = self.layout.n_fock;
        let mut acc = Complex64::default();
        for block in 0..self.layout.dimension() / n {
            let v = self.amplitudes.rows(block * n, n);
            acc += v.dotc(&(op * v));
        }
        acc
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }
}

/// Grid wide and fine enough to resolve every Fock state below `n_fock`.
///
/// The half-width is `(sqrt(4N + 2) + 8)Δ`, beyond the classical turning point
/// of the highest state; `dx` resolves momenta up to `2.5·sqrt(N)·ħ/Δ`.
pub fn default_grid(ion: &IonParams) -> Result<Grid1D> {
    let n = ion.n_fock as f64;
    let half = ((4.0 * n + 2.0).sqrt() + 8.0) * ion.delta_spread;
    let k_needed = 2.5 * (n + 0.5).sqrt() / ion.delta_spread;
    let points =
        ((2.0 * half * k_needed / std::f64::consts::PI).ceil() as usize).next_power_of_two();
    Grid1D::new(2.0 * half, points.max(256))
}

/// Oscillator eigenfunctions `⟨x|n⟩` for `n < n_fock`, row `n` sampled on
/// the grid.
///
/// The three-term recurrence runs in `ξ = x/(√2Δ)` with a running log scale so
/// high orders neither overflow nor vanish prematurely.
#[allow(clippy::needless_range_loop)]
pub fn hermite_functions(grid: &Grid1D, delta_spread: f64, n_fock: usize) -> Vec<Vec<f64>> {
    let scale = 1.0 / (SQRT_2 * delta_spread);
    let norm = std::f64::consts::PI.powf(-0.25) * scale.sqrt();
    let mut table = vec![vec![0.0; grid.points()]; n_fock];
    const BIG: f64 = 1e100;
    let log_big = BIG.ln();
    for (i, x) in grid.positions().enumerate() {
        let xi = x * scale;
        let mut log_s = -0.5 * xi * xi;
        let mut prev = 0.0;
        let mut cur = 1.0;
        table[0][i] = norm * log_s.exp();
        for n in 1..n_fock {
            let nf = n as f64;
            let next = (2.0 / nf).sqrt() * xi * cur - ((nf - 1.0) / nf).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > BIG {
                cur /= BIG;
                prev /= BIG;
                log_s += log_big;
            }
            table[n][i] = norm * cur * log_s.exp();
        }
    }
    table
}

/// Required grid half-width `(sqrt(2N) + 4)Δ`.
pub fn required_half_width(ion: &IonParams) -> f64 {
    ((2.0 * ion.n_fock as f64).sqrt() + 4.0) * ion.delta_spread
}

/// Fock ↔ position change of basis on a fixed grid.
#[derive(Debug, Clone)]
pub struct PositionBasis {
    grid: Grid1D,
    functions: Vec<Vec<f64>>,
}

impl PositionBasis {
    pub fn new(ion: &IonParams, grid: &Grid1D) -> Result<Self> {
        let required = required_half_width(ion);
        if grid.half_width() < required {
            return Err(Error::GridCoverage {
                half_width: grid.half_width(),
                required,
            });
        }
        Ok(Self {
            grid: *grid,
            functions: hermite_functions(grid, ion.delta_spread, ion.n_fock),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn to_position(&self, fock: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::default());
        for (c, f) in fock.iter().zip(self.functions.iter()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(f.iter()) {
                *o += c * v;
            }
        }
    }

    fn to_fock(&self, position: &[Complex64], out: &mut [Complex64]) {
        let dx = self.grid.dx();
        for (o, f) in out.iter_mut().zip(self.functions.iter()) {
            *o = position
                .iter()
                .zip(f.iter())
                .map(|(z, v)| z * v)
                .sum::<Complex64>()
                * dx;
        }
    }

    /// Ion-1 spinor field for ion-2 branch `branch` (`0`: `σ₂ˣ = +1`,
    /// `1`: `σ₂ˣ = −1`; the reduced layout has only branch 0).
    pub fn branch_field(&self, state: &IonState, branch: usize) -> SpinorField {
        let layout = state.layout;
        let n = layout.n_fock;
        let mut fock = vec![Complex64::default(); n];
        let mut field = SpinorField::zeros(self.grid, Spin::One);
        for s in 0..3 {
            for (k, slot) in fock.iter_mut().enumerate() {
                *slot = if layout.ion2 {
                    let sign = if branch == 0 { 1.0 } else { -1.0 };
                    (state.amplitudes[layout.index(s, 0, k)]
                        + state.amplitudes[layout.index(s, 1, k)] * sign)
                        * std::f64::consts::FRAC_1_SQRT_2
                } else {
                    state.amplitudes[layout.index(s, 0, k)]
                };
            }
            self.to_position(&fock, field.component_mut(s));
        }
        field
    }

    /// Band weights summed over both ion-2 branches.
    pub fn band_populations(&self, state: &IonState, basis: &BandBasis) -> BandPopulations {
        let mut total = BandPopulations::default();
        for branch in 0..state.layout.ion2_levels() {
            let field = self.branch_field(state, branch);
            let w = crate::wavepacket::populations_with(basis, &field);
            total.plus += w.plus;
            total.zero += w.zero;
            total.minus += w.minus;
        }
        total
    }
}

/// Ion-1 wavefunction in position space (the `σ₂ˣ = +1` branch when ion 2 is
/// retained).
pub fn position_wavefunction(
    state: &IonState,
    ion: &IonParams,
    grid: &Grid1D,
) -> Result<SpinorField> {
    Ok(PositionBasis::new(ion, grid)?.branch_field(state, 0))
}

/// Coherent amplitudes `e^{−|α|²/2} αⁿ/√n!`.
pub fn coherent_amplitudes(alpha: Complex64, n_fock: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_fock);
    let mut c = Complex64::from((-0.5 * alpha.norm_sqr()).exp());
    out.push(c);
    for n in 1..n_fock {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Spinor `ξ` times a coherent motional state with `⟨x̂⟩ = 0`, `⟨p̂⟩ = p0`;
/// ion 2 in the `+1` eigenstate of `σ₂ˣ`.
///
/// The coherent state has amplitude width `√2Δ`. With `project_band` the
/// position wavefunction is filtered onto one band in momentum space and
/// mapped back onto the Fock states.
pub fn coherent_initial_state(
    ion: &IonParams,
    p0: f64,
    spinor: [Complex64; 3],
    project_band: Option<Band>,
) -> Result<IonState> {
    ion.validate()?;
    let alpha = Complex64::new(0.0, p0 * ion.delta_spread / HBAR);
    let headroom = alpha.norm_sqr() + 6.0 * alpha.norm();
    if headroom >= ion.n_fock as f64 {
        return Err(Error::invalid(
            "p0",
            format!(
                "|α|² + 6|α| = {headroom:.1} exceeds n_fock = {}; raise n_fock",
                ion.n_fock
            ),
        ));
    }
    let spinor_norm = spinor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if spinor_norm == 0.0 {
        return Err(Error::invalid("spinor", "must be nonzero"));
    }
    let layout = ion.layout();
    let n = layout.n_fock;
    let coherent = coherent_amplitudes(alpha, n);

    let mut ion1 = vec![Complex64::default(); 3 * n];
    for s in 0..3 {
        for k in 0..n {
            ion1[s * n + k] = spinor[s] / spinor_norm * coherent[k];
        }
    }

    if let Some(band) = project_band {
        let map = map_parameters(ion)?;
        let grid = default_grid(ion)?;
        let basis = PositionBasis::new(ion, &grid)?;
        let mut field = SpinorField::zeros(grid, Spin::One);
        for s in 0..3 {
            basis.to_position(&ion1[s * n..(s + 1) * n], field.component_mut(s));
        }
        let bands = BandBasis::new(&grid, Spin::One, &map.physical);
        bands.project_in_place(&mut field, band);
        for s in 0..3 {
            basis.to_fock(field.component(s), &mut ion1[s * n..(s + 1) * n]);
        }
        let norm: f64 = ion1.iter().map(|z| z.norm_sqr()).sum();
        if norm < 1e-6 {
            return Err(Error::EmptyProjection { norm });
        }
        let scale = 1.0 / norm.sqrt();
        ion1.iter_mut().for_each(|z| *z *= scale);
    }

    let mut amplitudes = vec![Complex64::default(); layout.dimension()];
    let plus = std::f64::consts::FRAC_1_SQRT_2;
    for s in 0..3 {
        for k in 0..n {
            let v = ion1[s * n + k];
            if layout.ion2 {
                amplitudes[layout.index(s, 0, k)] = v * plus;
                amplitudes[layout.index(s, 1, k)] = v * plus;
            } else {
                amplitudes[layout.index(s, 0, k)] = v;
            }
        }
    }
    let state = IonState::from_amplitudes(layout, amplitudes)?;
    let tail = state.fock_tail();
    if tail > TAIL_TOL {
        return Err(Error::Truncation { time: 0.0, tail });
    }
    Ok(state)
}

/// Exact propagator of a static Hermitian Hamiltonian via one
/// eigendecomposition.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl SpectralPropagator {
    pub fn new(hamiltonian: CMatrix) -> Self {
        let eig = hamiltonian.symmetric_eigen();
        Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Coefficients of `state` in the eigenbasis.
    pub fn coefficients(&self, state: &DVector<Complex64>) -> DVector<Complex64> {
        self.vectors.adjoint() * state
    }

    /// `exp(−iHt/ħ)` applied to a state given by its eigenbasis coefficients.
    pub fn evolve_coefficients(
        &self,
        coefficients: &DVector<Complex64>,
        t: f64,
    ) -> DVector<Complex64> {
        let phased = DVector::from_iterator(
            coefficients.len(),
            coefficients
                .iter()
                .zip(self.energies.iter())
                .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t / HBAR)),
        );
        &self.vectors * phased
    }

    /// The full unitary `exp(−iHt/ħ)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, e) in self.energies.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -e * t / HBAR);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
        }
        scaled * self.vectors.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonRecord {
    pub t: f64,
    pub internal: [f64; 3],
    pub x_mean: f64,
    pub bands: BandPopulations,
    pub fock_tail: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct IonTrajectory {
    pub records: Vec<IonRecord>,
    pub final_state: IonState,
    pub grid: Grid1D,
}

/// Evolve with the exact propagator of the truncated Hamiltonian, recording
/// at `n_records` uniform times from `0` to `t_final` inclusive.
pub fn evolve_ion(
    state: &IonState,
    ion: &IonParams,
    t_final: f64,
    n_records: usize,
) -> Result<IonTrajectory> {
    let grid = default_grid(ion)?;
    evolve_ion_on(state, ion, t_final, n_records, &grid)
}

pub fn evolve_ion_on(
    state: &IonState,
    ion: &IonParams,
    t_final: f64,
    n_records: usize,
    grid: &Grid1D,
) -> Result<IonTrajectory> {
    if state.layout != ion.layout() {
        return Err(Error::invalid(
            "state",
            "layout differs from the ion parameters",
        ));
    }
    if n_records < 2 {
        return Err(Error::invalid("n_records", "need at least two records"));
    }
    if !(t_final > 0.0) {
        return Err(Error::invalid("t_final", "must be positive"));
    }
    let map = map_parameters(ion)?;
    let hamiltonian = build_maxwell_hamiltonian(ion)?;
    let positions = PositionBasis::new(ion, grid)?;
    let bands = BandBasis::new(grid, Spin::One, &map.physical);
    let (x_op, _) = quadratures(ion.delta_spread, ion.n_fock)?;
    let propagator = SpectralPropagator::new(hamiltonian.clone());
    let coefficients = propagator.coefficients(&state.amplitudes);

    let mut records = Vec::with_capacity(n_records);
    let mut last = state.clone();
    for r in 0..n_records {
        let t = t_final * r as f64 / (n_records - 1) as f64;
        let current = IonState {
            layout: state.layout,
            amplitudes: propagator.evolve_coefficients(&coefficients, t),
        };
        let fock_tail = current.fock_tail();
        if fock_tail > TAIL_TOL {
            return Err(Error::Truncation {
                time: t,
                tail: fock_tail,
            });
        }
        records.push(IonRecord {
            t,
            internal: current.internal_populations(),
            x_mean: current.motional_expectation(&x_op).re,
            bands: positions.band_populations(&current, &bands),
            fock_tail,
            energy: current.expectation(&hamiltonian).re,
        });
        last = current;
    }
    Ok(IonTrajectory {
        records,
        final_state: last,
        grid: *grid,
    })
}
