use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    points: usize,
}

impl Grid1D {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(
                "length",
                format!("must be positive, got {length}"),
            ));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::invalid(
                "points",
                format!("must be a power of two >= 8, got {points}"),
            ));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.length
    }

    pub fn position(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.dx()
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.position(i))
    }

    /// Wavenumber of FFT bin `j` (standard ordering, `k ∈ [−π/dx, π/dx)`).
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.points as isize;
        let j = j as isize;
        let shifted = if j < n / 2 { j } else { j - n };
        shifted as f64 * self.dk()
    }

    pub fn wavenumbers(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(move |j| self.wavenumber(j))
    }

    /// Nyquist wavenumber `π/dx`.
    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = Grid1D::new(80.0, 4096).unwrap();
        assert_eq!(g.position(0), -40.0);
        assert!((g.position(4095) - (40.0 - g.dx())).abs() < 1e-12);
        assert_eq!(g.wavenumber(0), 0.0);
        assert!((g.wavenumber(2048) + g.k_max()).abs() < 1e-9);
        assert!((g.wavenumber(2047) - (g.k_max() - g.dk())).abs() < 1e-9);
        assert!((g.wavenumber(4095) + g.dk()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid1D::new(10.0, 100).is_err());
        assert!(Grid1D::new(10.0, 4).is_err());
        assert!(Grid1D::new(-1.0, 256).is_err());
    }
}
