use num_complex::Complex64;

use super::field::SpinorField;
use super::grid::Grid1D;
use super::observables::{populations_with, BandPopulations};
use super::BandBasis;
use crate::error::{Error, Result};
use crate::spin_algebra::{Band, PhysicalParams, Spin};

/// Norm change tolerated in a single step.
pub const STEP_NORM_TOL: f64 = 1e-10;

/// Fraction of the norm allowed within [`EDGE_POINTS`] of either grid edge.
pub const EDGE_TOL: f64 = 1e-6;

const EDGE_POINTS: usize = 3;

/// `0.1·ħ/E+(π/dx)`: a tenth of the fastest phase period on the grid.
pub fn default_dt(grid: &Grid1D, params: &PhysicalParams) -> f64 {
    0.1 * params.hbar / params.positive_energy(grid.k_max(), 0.0)
}

/// Strang-split propagator for one `(grid, params, dt)` combination.
///
/// Each step applies `exp(−igx·dt/2ħ)`, then `Σ_j exp(−iE_j dt/ħ) P^j(k)` in
/// momentum space, then the half potential phase again.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    grid: Grid1D,
    spin: Spin,
    params: PhysicalParams,
    dt: f64,
    basis: BandBasis,
    kinetic: Vec<Complex64>,
    half_phase: Vec<Complex64>,
}

impl SplitStepper {
    pub fn new(grid: &Grid1D, spin: Spin, params: &PhysicalParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        let e_max = params.positive_energy(grid.k_max(), 0.0);
        // Without a potential the kinetic exponential is exact for any dt.
        if params.g > 0.0 {
            let phase = dt * (e_max + params.g * grid.half_width()) / params.hbar;
            if phase >= 0.5 {
                return Err(Error::invalid(
                    "dt",
                    format!("dt·(max E+ + g·L/2)/hbar = {phase:.3} must stay below 0.5"),
                ));
            }
        }
        let basis = BandBasis::new(grid, spin, params);
        let d = spin.dimension();
        let n = grid.points();
        let mut kinetic = Vec::with_capacity(n * d * d);
        for j in 0..n {
            let e = basis.upper_energies()[j];
            let phases = [
                Complex64::from_polar(1.0, -e * dt / params.hbar),
                Complex64::new(1.0, 0.0),
                Complex64::from_polar(1.0, e * dt / params.hbar),
            ];
            let blocks = Band::ALL.map(|b| basis.projector_block(b, j));
            for idx in 0..d * d {
                kinetic.push(
                    blocks
                        .iter()
                        .zip(phases.iter())
                        .map(|(p, ph)| p[idx] * ph)
                        .sum(),
                );
            }
        }
        let half_phase = grid
            .positions()
            .map(|x| Complex64::from_polar(1.0, -params.g * x * dt / (2.0 * params.hbar)))
            .collect();
        Ok(Self {
            grid: *grid,
            spin,
            params: *params,
            dt,
            basis,
            kinetic,
            half_phase,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn basis(&self) -> &BandBasis {
        &self.basis
    }

    fn check_field(&self, field: &SpinorField) -> Result<()> {
        if field.grid() != &self.grid || field.spin() != self.spin {
            return Err(Error::invalid(
                "field",
                "grid or spinor dimension differs from the propagator's",
            ));
        }
        Ok(())
    }

    fn apply_half_potential(&self, field: &mut SpinorField) {
        for s in 0..field.components() {
            for (z, ph) in field
                .component_mut(s)
                .iter_mut()
                .zip(self.half_phase.iter())
            {
                *z *= ph;
            }
        }
    }

    fn apply_kinetic(&self, field: &mut SpinorField) {
        let d = field.components();
        let n = self.grid.points();
        let data = field.amplitudes_mut();
        self.basis.spectral().forward(data, d);
        let mut v = [Complex64::default(); 3];
        for j in 0..n {
            let block = &self.kinetic[j * d * d..(j + 1) * d * d];
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
        self.basis.spectral().inverse(data, d);
    }

    /// Advance `field` by one step, guarding the norm.
    pub fn step(&self, field: &mut SpinorField) -> Result<()> {
        self.check_field(field)?;
        let before = field.norm();
        if self.params.g != 0.0 {
            self.apply_half_potential(field);
        }
        self.apply_kinetic(field);
        if self.params.g != 0.0 {
            self.apply_half_potential(field);
        }
        field.time += self.dt;
        let drift = (field.norm() - before).abs() / before.max(f64::MIN_POSITIVE);
        if drift > STEP_NORM_TOL {
            return Err(Error::NormDrift {
                drift,
                limit: STEP_NORM_TOL,
            });
        }
        Ok(())
    }

    pub fn band_populations(&self, field: &SpinorField) -> BandPopulations {
        populations_with(&self.basis, field)
    }

    fn edge_weight(&self, field: &SpinorField) -> f64 {
        let n = self.grid.points();
        let mut w = 0.0;
        for s in 0..field.components() {
            let c = field.component(s);
            w += c[..EDGE_POINTS].iter().map(|z| z.norm_sqr()).sum::<f64>();
            w += c[n - EDGE_POINTS..]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        }
        w * self.grid.dx()
    }
}

/// One step of length `dt`.
pub fn step(field: &SpinorField, dt: f64, params: &PhysicalParams) -> Result<SpinorField> {
    let stepper = SplitStepper::new(field.grid(), field.spin(), params, dt)?;
    let mut out = field.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// What [`evolve`] records along the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observers {
    /// Steps between trace rows.
    pub stride: usize,
    /// Steps between stored field snapshots, if any.
    pub snapshot_stride: Option<usize>,
}

impl Default for Observers {
    fn default() -> Self {
        Self {
            stride: 100,
            snapshot_stride: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub norm: f64,
    pub x_mean: f64,
    pub bands: BandPopulations,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<SpinorField>,
    pub field: SpinorField,
    pub steps: usize,
}

/// Propagate to `t_final` (relative to the field's current time).
///
/// The step count is `ceil(t_final/dt)` with `dt` shrunk to land exactly on
/// `t_final`. Fails when the packet reaches the grid edge.
pub fn evolve(
    field: SpinorField,
    t_final: f64,
    dt: f64,
    params: &PhysicalParams,
    observers: &Observers,
) -> Result<Evolution> {
    if !(t_final >= 0.0) {
        return Err(Error::invalid(
            "t_final",
            format!("must be non-negative, got {t_final}"),
        ));
    }
    if observers.stride == 0 || observers.snapshot_stride == Some(0) {
        return Err(Error::invalid("stride", "must be positive"));
    }
    let steps = (t_final / dt)
        .ceil()
        .max(if t_final > 0.0 { 1.0 } else { 0.0 }) as usize;
    let dt = if steps > 0 {
        t_final / steps as f64
    } else {
        dt
    };
    let stepper = SplitStepper::new(field.grid(), field.spin(), params, dt)?;
    evolve_with(&stepper, field, steps, observers)
}

/// Run `steps` steps of an existing propagator.
pub fn evolve_with(
    stepper: &SplitStepper,
    mut field: SpinorField,
    steps: usize,
    observers: &Observers,
) -> Result<Evolution> {
    let record = |field: &SpinorField| TraceRow {
        t: field.time,
        norm: field.norm(),
        x_mean: field.mean_position(),
        bands: stepper.band_populations(field),
    };
    let mut trace = vec![record(&field)];
    let mut snapshots = Vec::new();
    if observers.snapshot_stride.is_some() {
        snapshots.push(field.clone());
    }
    for n in 1..=steps {
        stepper.step(&mut field)?;
        let weight = stepper.edge_weight(&field);
        if weight > EDGE_TOL * field.norm() {
            return Err(Error::BoundaryContamination {
                time: field.time,
                weight,
            });
        }
        if n % observers.stride == 0 || n == steps {
            trace.push(record(&field));
        }
        if let Some(s) = observers.snapshot_stride {
            if n % s == 0 || n == steps {
                snapshots.push(field.clone());
            }
        }
    }
    Ok(Evolution {
        trace,
        snapshots,
        field,
        steps,
    })
}
