//! On-chip phase calibration: align pairwise fringe extrema to program a
//! target sign pattern, twice to beat thermal crosstalk between the heaters.
//!
//! ```bash
//! cargo run --example phase_calibration
//! ```

use freqbin::binspace::{bell_state, density_from_amplitudes, fidelity, FidelityConvention};
use freqbin::measurement::{
    calibrate_phases, CalibrationOptions, DetectionModel, SourceFringeSimulator,
};
use freqbin::source::{CircuitProgram, IndistinguishabilityMatrix, MultiRingSource, RingSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let rings: Vec<RingSpec> = (0..4)
        .map(|k| {
            RingSpec::device_default(193_400.0 + 15.0 * k as f64, 192_900.0 - 15.0 * k as f64)
        })
        .collect();
    let source = MultiRingSource::new(rings, 0.05).unwrap(); // 5% heater crosstalk
    let indist = IndistinguishabilityMatrix::perfect(4);
    let model = DetectionModel::with_defaults(4).unwrap();

    let target = [1.0, -1.0, -1.0, 1.0]; // the {1,-1,-1,1} ququart pattern
    let target_rho = bell_state(4, &target).unwrap().density();
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let fidelity_for = |ps: &[f64]| {
        let mut program = CircuitProgram::uniform(4, 1.0);
        program.ps_phase_rad = ps.to_vec();
        let state = source.amplitudes(&program).unwrap();
        let rho = density_from_amplitudes(&state, &indist).unwrap();
        fidelity(&rho, &target_rho, FidelityConvention::Overlap).unwrap()
    };

    for trial in 0..5 {
        let init: Vec<f64> = (0..3)
            .map(|_| rng.gen::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        println!(
            "trial {trial}: random start {:?} -> fidelity {:.4}",
            init.iter().map(|p| (p * 100.0).round() / 100.0).collect::<Vec<_>>(),
            fidelity_for(&init)
        );
        for passes in [1usize, 2] {
            let opts = CalibrationOptions {
                max_passes: passes,
                ..Default::default()
            };
            let mut sim =
                SourceFringeSimulator::new(source.clone(), indist.clone(), model.clone());
            match calibrate_phases(&target, &mut sim, &init, &opts) {
                Ok(ps) => println!(
                    "  after {passes} pass(es): fidelity {:.6}",
                    fidelity_for(&ps)
                ),
                Err(e) => println!("  after {passes} pass(es): {e}"),
            }
        }
    }
}
