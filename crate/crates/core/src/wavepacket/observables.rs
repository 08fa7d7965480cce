use super::field::{centroid, SpinorField};
use super::propagate::TraceRow;
use super::BandBasis;
use crate::spin_algebra::{Band, PhysicalParams};

/// Residual weight above which a scattering breakdown is flagged as not yet
/// separated.
pub const RESIDUAL_WARNING: f64 = 0.05;

/// Weights `(w+, w0, w−)` of a state in the three bands.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandPopulations {
    pub plus: f64,
    pub zero: f64,
    pub minus: f64,
}

impl BandPopulations {
    pub fn total(&self) -> f64 {
        self.plus + self.zero + self.minus
    }

    pub fn get(&self, band: Band) -> f64 {
        match band {
            Band::Plus => self.plus,
            Band::Zero => self.zero,
            Band::Minus => self.minus,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.plus, self.zero, self.minus]
    }

    pub fn max_abs_diff(&self, other: &BandPopulations) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Band weights, integrated in momentum space.
pub fn band_populations(field: &SpinorField, params: &PhysicalParams) -> BandPopulations {
    let basis = BandBasis::new(field.grid(), field.spin(), params);
    populations_with(&basis, field)
}

pub(crate) fn populations_with(basis: &BandBasis, field: &SpinorField) -> BandPopulations {
    let n = field.grid().points();
    let d = field.components();
    let mut work = field.amplitudes().to_vec();
    basis.spectral().forward(&mut work, d);
    let mut weights = [0.0; 3];
    let mut v = [num_complex::Complex64::default(); 3];
    for j in 0..n {
        for s in 0..d {
            v[s] = work[s * n + j];
        }
        for (w, band) in weights.iter_mut().zip(Band::ALL) {
            let block = basis.projector_block(band, j);
            for r in 0..d {
                let mut acc = num_complex::Complex64::default();
                for c in 0..d {
                    acc += block[r * d + c] * v[c];
                }
                *w += acc.norm_sqr();
            }
        }
    }
    // Parseval: Σ|ψ|² dx = (dx/N) Σ|ψ̂|².
    let scale = field.grid().dx() / n as f64;
    BandPopulations {
        plus: weights[0] * scale,
        zero: weights[1] * scale,
        minus: weights[2] * scale,
    }
}

/// Position-space density of each band component, `[ρ+, ρ0, ρ−]`.
pub fn band_densities(field: &SpinorField, params: &PhysicalParams) -> [Vec<f64>; 3] {
    let basis = BandBasis::new(field.grid(), field.spin(), params);
    densities_with(&basis, field)
}

pub(crate) fn densities_with(basis: &BandBasis, field: &SpinorField) -> [Vec<f64>; 3] {
    Band::ALL.map(|band| basis.project(field, band).density())
}

/// Centroid `⟨x⟩` of each band component.
pub fn band_centroids(field: &SpinorField, params: &PhysicalParams) -> [f64; 3] {
    let grid = *field.grid();
    band_densities(field, params).map(|rho| centroid(&grid, &rho))
}

/// Band- and region-resolved split of a scattered state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringBreakdown {
    /// Upper-band weight left of `x_c`.
    pub reflected: f64,
    /// Flat-band weight anywhere.
    pub localized: f64,
    /// Lower-band weight right of `x_c`.
    pub transmitted: f64,
    /// Everything else.
    pub residual: f64,
    /// Set when `residual` exceeds [`RESIDUAL_WARNING`].
    pub not_separated: bool,
}

impl ScatteringBreakdown {
    pub fn total(&self) -> f64 {
        self.reflected + self.localized + self.transmitted + self.residual
    }
}

/// Split a final state into reflected, localized and transmitted parts about
/// the point `x_c`.
pub fn classify_scattering(
    field: &SpinorField,
    params: &PhysicalParams,
    x_c: f64,
) -> ScatteringBreakdown {
    let grid = *field.grid();
    let dx = grid.dx();
    let [plus, zero, minus] = band_densities(field, params);
    let region = |rho: &[f64], left: bool| -> f64 {
        rho.iter()
            .zip(grid.positions())
            .filter(|(_, x)| if left { *x < x_c } else { *x >= x_c })
            .map(|(r, _)| r)
            .sum::<f64>()
            * dx
    };
    let reflected = region(&plus, true);
    let transmitted = region(&minus, false);
    let localized = zero.iter().sum::<f64>() * dx;
    let residual = region(&plus, false) + region(&minus, true);
    ScatteringBreakdown {
        reflected,
        localized,
        transmitted,
        residual,
        not_separated: residual > RESIDUAL_WARNING,
    }
}

/// Whether every band weight moved by less than `tol` over the final
/// `window` fraction of a trace.
pub fn weights_settled(trace: &[TraceRow], window: f64, tol: f64) -> bool {
    let Some(last) = trace.last() else {
        return false;
    };
    let t0 = trace[0].t;
    let cutoff = last.t - window * (last.t - t0);
    trace
        .iter()
        .filter(|row| row.t >= cutoff)
        .all(|row| row.bands.max_abs_diff(&last.bands) < tol)
}

/// Number of local maxima whose topographic prominence is at least
/// `min_prominence` times the global maximum.
pub fn count_peaks(values: &[f64], min_prominence: f64) -> usize {
    peak_indices(values, min_prominence).len()
}

pub(crate) fn peak_indices(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = values.len();
    let global = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if n < 3 || !(global > 0.0) {
        return Vec::new();
    }
    let threshold = min_prominence * global;
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // Walk across plateaus.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let height = values[i];
                let mut left_min = height;
                let mut l = i;
                while l > 0 {
                    l -= 1;
                    if values[l] > height {
                        break;
                    }
                    left_min = left_min.min(values[l]);
                }
                let mut right_min = height;
                let mut r = j;
                while r + 1 < n {
                    r += 1;
                    if values[r] > height {
                        break;
                    }
                    right_min = right_min.min(values[r]);
                }
                if height - left_min.max(right_min) >= threshold {
                    peaks.push((i + j) / 2);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}
