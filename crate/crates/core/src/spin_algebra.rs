//! Spin matrices, the momentum-space Hamiltonian and its band projectors.
//!
//! The basis is the standard angular-momentum one: `Sz` is diagonal with
//! entries `(1, 0, -1)` for spin 1 and `(1/2, -1/2)` for spin 1/2. At zero
//! momentum the spinor components therefore coincide with the bands.
//!
//! The spin-1/2 Hamiltonian is built from the Pauli matrices themselves (not
//! `sigma / 2`) so that both particle types share the dispersion
//! `E = ±sqrt(c²ħ²k² + m²c⁴)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    One,
    Half,
}

impl Spin {
    pub fn dimension(self) -> usize {
        match self {
            Spin::One => 3,
            Spin::Half => 2,
        }
    }

    pub fn algebra(self) -> SpinAlgebra {
        match self {
            Spin::One => spin1_matrices(),
            Spin::Half => pauli_algebra(),
        }
    }
}

/// Energy branch of the momentum-space Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Band {
    Plus,
    Zero,
    Minus,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Plus, Band::Zero, Band::Minus];

    pub fn label(self) -> &'static str {
        match self {
            Band::Plus => "plus",
            Band::Zero => "zero",
            Band::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+" | "plus" => Ok(Band::Plus),
            "0" | "zero" => Ok(Band::Zero),
            "-" | "minus" => Ok(Band::Minus),
            other => Err(format!(
                "unknown band `{other}` (expected plus, zero or minus)"
            )),
        }
    }
}

/// Effective speed of light, rest mass, potential slope and action quantum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub c: f64,
    pub m: f64,
    pub g: f64,
    pub hbar: f64,
}

impl PhysicalParams {
    pub fn new(c: f64, m: f64, g: f64, hbar: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("c", format!("must be positive, got {c}")));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::invalid(
                "m",
                format!("must be non-negative, got {m}"),
            ));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::invalid(
                "g",
                format!("must be non-negative, got {g}"),
            ));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid(
                "hbar",
                format!("must be positive, got {hbar}"),
            ));
        }
        Ok(Self { c, m, g, hbar })
    }

    /// Natural units, `ħ = c = 1`.
    pub fn natural(m: f64, g: f64) -> Result<Self> {
        Self::new(1.0, m, g, 1.0)
    }

    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    pub fn with_mass(self, m: f64) -> Self {
        Self { m, ..self }
    }

    pub fn with_slope(self, g: f64) -> Self {
        Self { g, ..self }
    }

    /// Upper band energy `E+ = sqrt(c²ħ²(kx² + ky²) + m²c⁴)`.
    pub fn positive_energy(&self, kx: f64, ky: f64) -> f64 {
        let kinetic = self.c * self.hbar * kx.hypot(ky);
        kinetic.hypot(self.rest_energy())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEnergies {
    pub plus: f64,
    pub zero: f64,
    pub minus: f64,
}

impl BandEnergies {
    pub fn get(&self, band: Band) -> f64 {
        match band {
            Band::Plus => self.plus,
            Band::Zero => self.zero,
            Band::Minus => self.minus,
        }
    }
}

pub fn band_energies(kx: f64, ky: f64, params: &PhysicalParams) -> BandEnergies {
    let plus = params.positive_energy(kx, ky);
    BandEnergies {
        plus,
        zero: 0.0,
        minus: -plus,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandProjectors {
    pub plus: CMatrix,
    pub zero: CMatrix,
    pub minus: CMatrix,
}

impl BandProjectors {
    pub fn get(&self, band: Band) -> &CMatrix {
        match band {
            Band::Plus => &self.plus,
            Band::Zero => &self.zero,
            Band::Minus => &self.minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinAlgebra {
    spin: Spin,
    sx: CMatrix,
    sy: CMatrix,
    sz: CMatrix,
    identity: CMatrix,
}

/// Spin-1 matrices in the basis where `Sz = diag(1, 0, -1)`.
pub fn spin1_matrices() -> SpinAlgebra {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sx = CMatrix::from_row_slice(3, 3, &[ZERO, ONE, ZERO, ONE, ZERO, ONE, ZERO, ONE, ZERO])
        * Complex64::from(r);
    let sy = CMatrix::from_row_slice(3, 3, &[ZERO, -I, ZERO, I, ZERO, -I, ZERO, I, ZERO])
        * Complex64::from(r);
    let sz = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ZERO, -ONE]));
    SpinAlgebra {
        spin: Spin::One,
        sx,
        sy,
        sz,
        identity: CMatrix::identity(3, 3),
    }
}

/// Spin-1/2 algebra. The stored components are `sigma / 2`; the Hamiltonian
/// uses the Pauli matrices.
pub fn pauli_algebra() -> SpinAlgebra {
    let half = Complex64::from(0.5);
    SpinAlgebra {
        spin: Spin::Half,
        sx: sigma_x() * half,
        sy: sigma_y() * half,
        sz: sigma_z() * half,
        identity: CMatrix::identity(2, 2),
    }
}

pub(crate) fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub(crate) fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub(crate) fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

impl SpinAlgebra {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn dimension(&self) -> usize {
        self.spin.dimension()
    }

    /// Spin components `(Sx, Sy, Sz)`; `sigma / 2` for spin 1/2.
    pub fn components(&self) -> [&CMatrix; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    pub fn sx(&self) -> &CMatrix {
        &self.sx
    }

    pub fn sy(&self) -> &CMatrix {
        &self.sy
    }

    pub fn sz(&self) -> &CMatrix {
        &self.sz
    }

    pub fn identity(&self) -> &CMatrix {
        &self.identity
    }

    /// Pauli matrices for the spin-1/2 algebra, `None` for spin 1.
    pub fn pauli(&self) -> Option<[CMatrix; 3]> {
        match self.spin {
            Spin::Half => Some([sigma_x(), sigma_y(), sigma_z()]),
            Spin::One => None,
        }
    }

    /// Matrices multiplying `cħkx`, `cħky` and `mc²` in the Hamiltonian.
    pub fn coupling_matrices(&self) -> [CMatrix; 3] {
        match self.spin {
            Spin::One => [self.sx.clone(), self.sy.clone(), self.sz.clone()],
            Spin::Half => [sigma_x(), sigma_y(), sigma_z()],
        }
    }

    /// Kinetic plus mass part `cħkx·Sx + cħky·Sy + mc²·Sz`.
    pub fn bloch_hamiltonian(&self, kx: f64, ky: f64, params: &PhysicalParams) -> CMatrix {
        let [mx, my, mz] = self.coupling_matrices();
        let chk = params.c * params.hbar;
        mx * Complex64::from(chk * kx)
            + my * Complex64::from(chk * ky)
            + mz * Complex64::from(params.rest_energy())
    }

    /// Polynomial band projectors `P± = ½[(H/E+)² ± H/E+]`, `P0 = 1 − (H/E+)²`.
    ///
    /// For spin 1/2 `(H/E+)² = 1`, so the same expressions give `P0 = 0`.
    pub fn band_projectors(
        &self,
        kx: f64,
        ky: f64,
        params: &PhysicalParams,
    ) -> Result<BandProjectors> {
        let e_plus = params.positive_energy(kx, ky);
        self.projectors_of(&self.bloch_hamiltonian(kx, ky, params), e_plus)
    }

    /// Band projectors of any Hamiltonian of the form `a·Sx + b·Sy + e·Sz`
    /// with upper eigenvalue `e_plus`.
    pub fn projectors_of(&self, hamiltonian: &CMatrix, e_plus: f64) -> Result<BandProjectors> {
        if !(e_plus > 0.0) {
            return Err(Error::DegenerateSpectrum);
        }
        let h = hamiltonian / Complex64::from(e_plus);
        let h2 = &h * &h;
        let half = Complex64::from(0.5);
        let plus = (&h2 + &h) * half;
        let minus = (&h2 - &h) * half;
        let zero = match self.spin {
            Spin::One => &self.identity - &h2,
            Spin::Half => CMatrix::zeros(2, 2),
        };
        Ok(BandProjectors { plus, zero, minus })
    }
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
