use num_complex::Complex64;

use super::grid::Grid1D;
use super::spectral::Spectral;
use crate::error::{Error, Result};
use crate::spin_algebra::{Band, PhysicalParams, Spin};

/// Spinor wave function sampled on a [`Grid1D`].
///
/// Components are stored one after another: entry `s * N + i` is component
/// `s` at grid point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid1D,
    spin: Spin,
    amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl SpinorField {
    pub fn zeros(grid: Grid1D, spin: Spin) -> Self {
        Self {
            grid,
            spin,
            amplitudes: vec![Complex64::default(); grid.points() * spin.dimension()],
            time: 0.0,
        }
    }

    pub fn from_amplitudes(grid: Grid1D, spin: Spin, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.points() * spin.dimension() {
            return Err(Error::invalid(
                "amplitudes",
                format!(
                    "expected {} values, got {}",
                    grid.points() * spin.dimension(),
                    amplitudes.len()
                ),
            ));
        }
        Ok(Self {
            grid,
            spin,
            amplitudes,
            time: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn components(&self) -> usize {
        self.spin.dimension()
    }

    pub fn component(&self, s: usize) -> &[Complex64] {
        let n = self.grid.points();
        &self.amplitudes[s * n..(s + 1) * n]
    }

    pub fn component_mut(&mut self, s: usize) -> &mut [Complex64] {
        let n = self.grid.points();
        &mut self.amplitudes[s * n..(s + 1) * n]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Spinor at grid point `i`.
    pub fn spinor_at(&self, i: usize) -> Vec<Complex64> {
        (0..self.components())
            .map(|s| self.component(s)[i])
            .collect()
    }

    /// `Σ_i Σ_s |ψ_s(x_i)|² dx`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let scale = 1.0 / norm.sqrt();
            self.amplitudes.iter_mut().for_each(|z| *z *= scale);
        }
        norm
    }

    /// Total density `Σ_s |ψ_s(x_i)|²` per grid point.
    pub fn density(&self) -> Vec<f64> {
        let n = self.grid.points();
        let mut rho = vec![0.0; n];
        for s in 0..self.components() {
            for (r, z) in rho.iter_mut().zip(self.component(s)) {
                *r += z.norm_sqr();
            }
        }
        rho
    }

    /// `⟨x⟩` normalized by the current norm.
    pub fn mean_position(&self) -> f64 {
        centroid(&self.grid, &self.density())
    }

    /// `⟨p⟩` computed spectrally, normalized by the current norm.
    pub fn mean_momentum(&self, hbar: f64) -> f64 {
        let spectral = Spectral::new(self.grid.points());
        let mut work = self.amplitudes.clone();
        spectral.forward(&mut work, self.components());
        let n = self.grid.points();
        let mut num = 0.0;
        let mut den = 0.0;
        for s in 0..self.components() {
            for j in 0..n {
                let w = work[s * n + j].norm_sqr();
                num += w * self.grid.wavenumber(j);
                den += w;
            }
        }
        hbar * num / den
    }

    /// Inner product `⟨self|other⟩ = Σ ψ̄ φ dx`.
    pub fn overlap(&self, other: &SpinorField) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }
}

pub(crate) fn centroid(grid: &Grid1D, density: &[f64]) -> f64 {
    let total: f64 = density.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    density
        .iter()
        .zip(grid.positions())
        .map(|(r, x)| r * x)
        .sum::<f64>()
        / total
}

/// Parameters of a Gaussian wave packet `e^{i p0 x/ħ} e^{−(x−x0)²/2w²} ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub p0: f64,
    pub width: f64,
    pub center: f64,
    pub spinor: Vec<Complex64>,
    pub project_band: Option<Band>,
}

impl PacketSpec {
    pub fn new(p0: f64, width: f64, spinor: &[f64]) -> Self {
        Self {
            p0,
            width,
            center: 0.0,
            spinor: spinor.iter().map(|&v| Complex64::from(v)).collect(),
            project_band: None,
        }
    }

    pub fn centered_at(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn projected(mut self, band: Band) -> Self {
        self.project_band = Some(band);
        self
    }
}

/// Normalized Gaussian packet, optionally projected onto one band.
pub fn gaussian_packet(
    grid: &Grid1D,
    spec: &PacketSpec,
    params: &PhysicalParams,
) -> Result<SpinorField> {
    let spin = match spec.spinor.len() {
        3 => Spin::One,
        2 => Spin::Half,
        n => {
            return Err(Error::invalid(
                "spinor",
                format!("need 2 or 3 components, got {n}"),
            ))
        }
    };
    if !(spec.width > 4.0 * grid.dx()) {
        return Err(Error::invalid(
            "width",
            format!("{} must exceed 4·dx = {}", spec.width, 4.0 * grid.dx()),
        ));
    }
    if spec.center.abs() + 5.0 * spec.width >= grid.half_width() {
        return Err(Error::invalid(
            "center",
            format!(
                "packet support |center| + 5·width = {} leaves the grid half-width {}",
                spec.center.abs() + 5.0 * spec.width,
                grid.half_width()
            ),
        ));
    }
    let spinor_norm: f64 = spec.spinor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if spinor_norm == 0.0 {
        return Err(Error::invalid("spinor", "must be nonzero"));
    }

    let mut field = SpinorField::zeros(*grid, spin);
    let n = grid.points();
    let k0 = spec.p0 / params.hbar;
    for (i, x) in grid.positions().enumerate() {
        let envelope = (-(x - spec.center).powi(2) / (2.0 * spec.width * spec.width)).exp();
        let wave = Complex64::from_polar(envelope, k0 * x);
        for (s, xi) in spec.spinor.iter().enumerate() {
            field.amplitudes[s * n + i] = wave * xi;
        }
    }
    field.normalize();

    if let Some(band) = spec.project_band {
        let basis = super::BandBasis::new(grid, spin, params);
        basis.project_in_place(&mut field, band);
        let norm = field.norm();
        if norm < 1e-6 {
            return Err(Error::EmptyProjection { norm });
        }
        field.normalize();
    }
    Ok(field)
}
