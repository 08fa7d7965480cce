use maxwell_klein::ion_emulator::{
    coherent_initial_state, default_grid, evolve_ion, map_parameters, position_wavefunction,
    IonParams,
};
use maxwell_klein::wavepacket::{gaussian_packet, PacketSpec};
use maxwell_klein::{Band, Error};
use num_complex::Complex64;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[test]
fn coherent_state_is_the_gaussian_packet() {
    let ion = IonParams::feasibility(96).unwrap();
    let map = map_parameters(&ion).unwrap();
    let grid = default_grid(&ion).unwrap();
    let state = coherent_initial_state(&ion, 3.0, [c(1.0), c(0.0), c(0.0)], None).unwrap();
    let from_ion = position_wavefunction(&state, &ion, &grid).unwrap();
    let spec = PacketSpec::new(3.0, std::f64::consts::SQRT_2, &[1.0, 0.0, 0.0]);
    let packet = gaussian_packet(&grid, &spec, &map.physical).unwrap();
    let overlap = from_ion.overlap(&packet).norm();
    assert!(overlap > 1.0 - 1e-6, "{overlap}");
}

#[test]
fn band_projected_start_sits_in_the_upper_band() {
    let ion = IonParams::feasibility(128).unwrap();
    let state =
        coherent_initial_state(&ion, 5.0, [c(1.0), c(0.0), c(0.0)], Some(Band::Plus)).unwrap();
    assert!((state.norm() - 1.0).abs() < 1e-12);
    let traj = evolve_ion(&state, &ion, 0.01, 2).unwrap();
    assert!((traj.records[0].bands.plus - 1.0).abs() < 1e-6);
}

#[test]
fn without_potential_band_weights_are_constant() {
    let ion = IonParams::new(
        0.05,
        std::f64::consts::TAU * 10.0,
        std::f64::consts::TAU,
        0.0,
        128,
    )
    .unwrap();
    let state =
        coherent_initial_state(&ion, 5.0, [c(1.0), c(0.0), c(0.0)], Some(Band::Plus)).unwrap();
    let traj = evolve_ion(&state, &ion, 0.5, 11).unwrap();
    for r in &traj.records {
        assert!((r.bands.plus - 1.0).abs() < 1e-6, "{:?}", r.bands);
    }
}

#[test]
fn energy_and_norm_are_conserved() {
    let ion = IonParams::feasibility(96).unwrap();
    let state = coherent_initial_state(&ion, 3.0, [c(1.0), c(0.5), c(0.0)], None).unwrap();
    let traj = evolve_ion(&state, &ion, 0.3, 7).unwrap();
    let e0 = traj.records[0].energy;
    for r in &traj.records {
        assert!((r.energy - e0).abs() < 1e-9 * e0.abs().max(1.0));
        assert!((r.internal.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
    assert!((traj.final_state.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn spectator_ion_can_be_eliminated() {
    let reduced = IonParams::feasibility(32).unwrap();
    let full = reduced.with_ion2();
    let spinor = [c(0.6), c(0.0), Complex64::new(0.0, 0.8)];
    let a = coherent_initial_state(&reduced, 1.5, spinor, None).unwrap();
    let b = coherent_initial_state(&full, 1.5, spinor, None).unwrap();
    let ta = evolve_ion(&a, &reduced, 0.1, 5).unwrap();
    let tb = evolve_ion(&b, &full, 0.1, 5).unwrap();
    for (ra, rb) in ta.records.iter().zip(tb.records.iter()) {
        for j in 0..3 {
            assert!((ra.internal[j] - rb.internal[j]).abs() < 1e-10);
        }
        assert!((ra.x_mean - rb.x_mean).abs() < 1e-10);
        assert!(ra.bands.max_abs_diff(&rb.bands) < 1e-10);
    }
}

#[test]
fn accelerating_past_the_cutoff_is_reported() {
    let ion = IonParams::feasibility(32).unwrap();
    let state = coherent_initial_state(&ion, 2.0, [c(1.0), c(0.0), c(0.0)], None).unwrap();
    let err = evolve_ion(&state, &ion, 1.0, 11).unwrap_err();
    assert!(matches!(err, Error::Truncation { .. }));
    assert_eq!(err.kind().exit_code(), 3);
}
