//! Split-operator propagation of spinor wave packets in one dimension.
//!
//! The Hamiltonian is `cp̂Sx + mc²Sz + gx` at normal incidence. The kinetic
//! part is diagonal in momentum space, where it is exponentiated exactly
//! through the band projectors; the potential is a pointwise phase in
//! position space. Observables resolve the state into the three bands by
//! applying the projectors bin by bin in momentum space.
//!
//! Oblique incidence is handled by replacing `m` with the effective mass
//! `m̃ = sqrt(m²c⁴ + ħ²ky²c²)/c²` (see [`crate::lz_analytics::effective_rest_energy`]).

mod field;
mod grid;
mod observables;
mod propagate;
mod spectral;

use num_complex::Complex64;

pub use field::{gaussian_packet, PacketSpec, SpinorField};
pub use grid::Grid1D;
pub use observables::{
    band_centroids, band_densities, band_populations, classify_scattering, count_peaks,
    weights_settled, BandPopulations, ScatteringBreakdown, RESIDUAL_WARNING,
};
pub use propagate::{
    default_dt, evolve, evolve_with, step, Evolution, Observers, SplitStepper, TraceRow, EDGE_TOL,
    STEP_NORM_TOL,
};

pub(crate) use observables::populations_with;
pub(crate) use spectral::Spectral;

use crate::spin_algebra::{Band, PhysicalParams, Spin};

/// Band projectors for every momentum bin of a grid, stored as flat
/// row-major `d × d` blocks.
#[derive(Debug, Clone)]
pub struct BandBasis {
    spin: Spin,
    points: usize,
    projectors: [Vec<Complex64>; 3],
    energies: Vec<f64>,
    spectral: Spectral,
}

impl BandBasis {
    /// At `k = 0` with `m = 0` the spectrum is degenerate; the projectors there
    /// are taken in the limit `k → 0⁺`.
    pub fn new(grid: &Grid1D, spin: Spin, params: &PhysicalParams) -> Self {
        let algebra = spin.algebra();
        let d = spin.dimension();
        let n = grid.points();
        let mut projectors = [
            Vec::with_capacity(n * d * d),
            Vec::with_capacity(n * d * d),
            Vec::with_capacity(n * d * d),
        ];
        let mut energies = Vec::with_capacity(n);
        let tiny = 1e-9 * grid.dk();
        for k in grid.wavenumbers() {
            let e_plus = params.positive_energy(k, 0.0);
            let pr = if e_plus > 0.0 {
                algebra.band_projectors(k, 0.0, params)
            } else {
                algebra.band_projectors(tiny, 0.0, params)
            }
            .expect("nonzero energy");
            for (slot, band) in projectors.iter_mut().zip(Band::ALL) {
                let p = pr.get(band);
                for r in 0..d {
                    for c in 0..d {
                        slot.push(p[(r, c)]);
                    }
                }
            }
            energies.push(e_plus);
        }
        Self {
            spin,
            points: n,
            projectors,
            energies,
            spectral: Spectral::new(n),
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// `E+(k)` per momentum bin.
    pub fn upper_energies(&self) -> &[f64] {
        &self.energies
    }

    fn band_index(band: Band) -> usize {
        match band {
            Band::Plus => 0,
            Band::Zero => 1,
            Band::Minus => 2,
        }
    }

    pub(crate) fn projector_block(&self, band: Band, j: usize) -> &[Complex64] {
        let d = self.spin.dimension();
        &self.projectors[Self::band_index(band)][j * d * d..(j + 1) * d * d]
    }

    pub(crate) fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Apply `P^band(k)` to a momentum-space buffer in place.
    pub(crate) fn apply_in_momentum(&self, data: &mut [Complex64], band: Band) {
        let d = self.spin.dimension();
        let n = self.points;
        let mut v = [Complex64::default(); 3];
        for j in 0..n {
            let block = self.projector_block(band, j);
            for s in 0..d {
                v[s] = data[s * n + j];
            }
            for r in 0..d {
                let mut acc = Complex64::default();
                for c in 0..d {
                    acc += block[r * d + c] * v[c];
                }
                data[r * n + j] = acc;
            }
        }
    }

    /// Replace `field` by its projection onto `band`.
    pub fn project_in_place(&self, field: &mut SpinorField, band: Band) {
        let d = field.components();
        let data = field.amplitudes_mut();
        self.spectral.forward(data, d);
        self.apply_in_momentum(data, band);
        self.spectral.inverse(data, d);
    }

    /// Band component of `field` as a new field.
    pub fn project(&self, field: &SpinorField, band: Band) -> SpinorField {
        let mut out = field.clone();
        self.project_in_place(&mut out, band);
        out
    }
}
