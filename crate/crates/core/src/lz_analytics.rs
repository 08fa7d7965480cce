//! Closed-form Landau-Zener band-transition probabilities.
//!
//! A particle incident in the upper band on the slope `V = gx` sees its
//! momentum `kx` swept linearly through the avoided crossing of the bands. The
//! final populations follow from the three-level Landau-Zener result
//!
//! ```text
//! Γ+− = exp(−π m̃²c⁴ / ħcg)
//! Γ+0 = 2 exp(−π m̃²c⁴ / 2ħcg) · [1 − exp(−π m̃²c⁴ / 2ħcg)]
//! Γ++ = 1 − Γ+− − Γ+0
//! ```
//!
//! with the transmission `T = Γ+0 + Γ+−`. Indices read "initial band, final
//! band". The spin-1/2 particle has no flat band and obeys the two-level
//! formula `T = exp(−π m̃²c⁴ / ħcg)`.

use crate::error::{Error, Result};
use crate::spin_algebra::{Band, PhysicalParams, Spin};

/// Final-band populations for a particle starting in the upper band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbabilities {
    /// Stays in the upper band: reflection.
    pub gamma_pp: f64,
    /// Ends in the flat band: localization.
    pub gamma_p0: f64,
    /// Ends in the lower band: transmission proper.
    pub gamma_pm: f64,
    pub transmission: f64,
}

impl TransitionProbabilities {
    pub fn from_populations(plus: f64, zero: f64, minus: f64) -> Self {
        Self {
            gamma_pp: plus,
            gamma_p0: zero,
            gamma_pm: minus,
            transmission: zero + minus,
        }
    }

    pub fn get(&self, band: Band) -> f64 {
        match band {
            Band::Plus => self.gamma_pp,
            Band::Zero => self.gamma_p0,
            Band::Minus => self.gamma_pm,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.gamma_pp, self.gamma_p0, self.gamma_pm]
    }
}

/// How the incident transverse momentum is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Incidence {
    /// Momentum magnitude `p0` at angle `theta = atan(ky0/kx0)`.
    Angle { p0: f64, theta: f64 },
    /// Transverse wavenumber held fixed.
    Transverse { ky: f64 },
}

impl Incidence {
    pub fn transverse_wavenumber(&self, params: &PhysicalParams) -> Result<f64> {
        match *self {
            Incidence::Angle { p0, theta } => {
                check_angle(theta)?;
                Ok(p0 * theta.sin() / params.hbar)
            }
            Incidence::Transverse { ky } => Ok(ky),
        }
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.abs() < std::f64::consts::FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::invalid(
            "theta",
            format!("incident angle {theta} outside (-pi/2, pi/2)"),
        ))
    }
}

/// `m̃c² = sqrt(m²c⁴ + ħ²ky²c²)`: the gap left after fixing `ky`.
pub fn effective_rest_energy(params: &PhysicalParams, ky: f64) -> f64 {
    params.rest_energy().hypot(params.hbar * ky * params.c)
}

/// The dimensionless adiabaticity `m̃²c⁴ / ħcg`.
pub fn adiabaticity(params: &PhysicalParams, mtilde_c2: f64) -> Result<f64> {
    if !(params.g > 0.0) {
        return Err(Error::NoSweep(params.g));
    }
    Ok(mtilde_c2 * mtilde_c2 / (params.hbar * params.c * params.g))
}

fn clamp_probability(value: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&value) {
        return Err(Error::Inconsistent { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Three-level probabilities at adiabaticity `ratio = m̃²c⁴/ħcg`.
pub fn spin1_from_ratio(ratio: f64) -> Result<TransitionProbabilities> {
    let half = (-std::f64::consts::PI * ratio / 2.0).exp();
    let gamma_pm = clamp_probability(half * half)?;
    let gamma_p0 = clamp_probability(2.0 * half * (1.0 - half))?;
    let gamma_pp = clamp_probability(1.0 - gamma_pm - gamma_p0)?;
    Ok(TransitionProbabilities {
        gamma_pp,
        gamma_p0,
        gamma_pm,
        transmission: gamma_p0 + gamma_pm,
    })
}

/// Two-level probabilities at adiabaticity `ratio = m̃²c⁴/ħcg`.
pub fn spin_half_from_ratio(ratio: f64) -> Result<TransitionProbabilities> {
    let transmission = clamp_probability((-std::f64::consts::PI * ratio).exp())?;
    Ok(TransitionProbabilities {
        gamma_pp: 1.0 - transmission,
        gamma_p0: 0.0,
        gamma_pm: transmission,
        transmission,
    })
}

pub fn lz_spin1(params: &PhysicalParams, mtilde_c2: f64) -> Result<TransitionProbabilities> {
    spin1_from_ratio(adiabaticity(params, mtilde_c2)?)
}

pub fn lz_spin_half(params: &PhysicalParams, mtilde_c2: f64) -> Result<TransitionProbabilities> {
    spin_half_from_ratio(adiabaticity(params, mtilde_c2)?)
}

pub fn lz(spin: Spin, params: &PhysicalParams, mtilde_c2: f64) -> Result<TransitionProbabilities> {
    match spin {
        Spin::One => lz_spin1(params, mtilde_c2),
        Spin::Half => lz_spin_half(params, mtilde_c2),
    }
}

/// Probabilities for an incident wave described by `incidence`.
pub fn transition_for(
    spin: Spin,
    params: &PhysicalParams,
    incidence: Incidence,
) -> Result<TransitionProbabilities> {
    let ky = incidence.transverse_wavenumber(params)?;
    lz(spin, params, effective_rest_energy(params, ky))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub probabilities: TransitionProbabilities,
}

/// Transmission versus incident angle at fixed momentum magnitude `p0`.
///
/// The transverse momentum is `p0·sin θ`, so the gap grows away from normal
/// incidence and `T(θ)` is largest at `θ = 0`.
pub fn angle_sweep(
    params: &PhysicalParams,
    spin: Spin,
    p0: f64,
    thetas: &[f64],
) -> Result<Vec<SweepRow>> {
    thetas
        .iter()
        .map(|&theta| {
            let probabilities = transition_for(spin, params, Incidence::Angle { p0, theta })?;
            Ok(SweepRow {
                theta,
                probabilities,
            })
        })
        .collect()
}

/// `n` equally spaced angles from `-theta_max` to `theta_max` inclusive.
pub fn angle_grid(theta_max: f64, n: usize) -> Result<Vec<f64>> {
    check_angle(theta_max)?;
    if n < 2 {
        return Err(Error::invalid("theta_points", "need at least two angles"));
    }
    let step = 2.0 * theta_max / (n - 1) as f64;
    Ok((0..n).map(|i| -theta_max + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn natural(m: f64, g: f64) -> PhysicalParams {
        PhysicalParams::natural(m, g).unwrap()
    }

    #[test]
    fn effective_rest_energy_examples() {
        assert_eq!(effective_rest_energy(&natural(1.0, 1.0), 0.0), 1.0);
        assert!((effective_rest_energy(&natural(1.0, 1.0), 1.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(effective_rest_energy(&natural(0.0, 1.0), 2.0), 2.0);
    }

    #[test]
    fn transmission_at_paper_adiabaticity() {
        let t = spin1_from_ratio(0.56).unwrap().transmission;
        assert!((t - 0.658).abs() < 0.005, "{t}");
    }

    #[test]
    fn massless_limit_transmits_fully() {
        let p = spin1_from_ratio(0.0).unwrap();
        assert_eq!((p.gamma_pm, p.gamma_p0, p.transmission), (1.0, 0.0, 1.0));
        assert_eq!(
            lz_spin_half(&natural(0.0, 2.0), 0.0).unwrap().transmission,
            1.0
        );
    }

    #[test]
    fn wave_packet_regime_values() {
        // m = 0.85, g = 1.5: ratio 0.4817.
        let params = natural(0.85, 1.5);
        let ratio = adiabaticity(&params, 0.85).unwrap();
        assert!((ratio - 0.48167).abs() < 1e-5);
        let p = lz_spin1(&params, 0.85).unwrap();
        assert!((p.gamma_pm - 0.2202).abs() < 1e-4);
        assert!((p.gamma_p0 - 0.4981).abs() < 1e-4);
        assert!((p.gamma_pp - 0.2817).abs() < 1e-4);
        let half = lz_spin_half(&params, 0.85).unwrap();
        assert!((half.transmission - 0.2202).abs() < 1e-4);
        assert_eq!(half.gamma_p0, 0.0);
    }

    #[test]
    fn requires_positive_slope() {
        assert!(matches!(
            lz_spin1(&natural(1.0, 0.0), 1.0),
            Err(Error::NoSweep(_))
        ));
        assert!(lz_spin_half(&natural(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn oblique_incidence_example() {
        // m̃² = 1 + sin²(π/4) = 1.5, exponent π·1.5/5.
        let rows = angle_sweep(&natural(1.0, 5.0), Spin::One, 1.0, &[0.0, FRAC_PI_4]).unwrap();
        assert_eq!(
            rows[0].probabilities,
            lz_spin1(&natural(1.0, 5.0), 1.0).unwrap()
        );
        assert!((rows[1].probabilities.transmission - 0.859).abs() < 1e-3);
    }

    #[test]
    fn sweep_rejects_grazing_angles() {
        assert!(angle_sweep(&natural(1.0, 1.0), Spin::One, 1.0, &[PI / 2.0]).is_err());
        assert!(angle_grid(PI / 2.0, 5).is_err());
    }

    #[test]
    fn transverse_parameterization_is_angle_independent() {
        let params = natural(1.0, 2.0);
        let a = transition_for(Spin::One, &params, Incidence::Transverse { ky: 1.0 }).unwrap();
        let b = lz_spin1(&params, 2f64.sqrt()).unwrap();
        assert!((a.transmission - b.transmission).abs() < 1e-15);
    }

    #[test]
    fn angle_grid_is_symmetric() {
        let g = angle_grid(1.5, 181).unwrap();
        assert_eq!(g.len(), 181);
        assert!(g[90].abs() < 1e-15);
        for i in 0..181 {
            assert!((g[i] + g[180 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn limits_in_slope() {
        let strong = lz_spin1(&natural(1.0, 1e9), 1.0).unwrap();
        assert!(strong.transmission > 1.0 - 1e-8);
        let weak = lz_spin1(&natural(1.0, 1e-3), 1.0).unwrap();
        assert!(weak.transmission < 1e-100);
    }

    proptest! {
        #[test]
        fn closure_and_dominance(ratio in 0.0..20.0f64) {
            let one = spin1_from_ratio(ratio).unwrap();
            let half = spin_half_from_ratio(ratio).unwrap();
            prop_assert!((one.gamma_pp + one.gamma_p0 + one.gamma_pm - 1.0).abs() < 1e-12);
            prop_assert!((one.transmission - one.gamma_p0 - one.gamma_pm).abs() < 1e-15);
            for v in one.as_array() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(one.transmission >= half.transmission);
            if ratio > 1e-6 && ratio < 10.0 {
                prop_assert!(one.transmission > half.transmission);
            }
        }

        #[test]
        fn sweep_symmetric_and_peaked(theta in -1.5..1.5f64, p0 in 0.1..5.0f64, g in 0.2..8.0f64) {
            let params = natural(1.0, g);
            let rows = angle_sweep(&params, Spin::One, p0, &[theta, -theta, 0.0]).unwrap();
            prop_assert_eq!(rows[0].probabilities.transmission, rows[1].probabilities.transmission);
            prop_assert!(rows[2].probabilities.transmission >= rows[0].probabilities.transmission);
            let steeper = angle_sweep(&params.with_slope(2.0 * g), Spin::One, p0, &[theta]).unwrap();
            prop_assert!(steeper[0].probabilities.transmission >= rows[0].probabilities.transmission);
        }
    }
}
