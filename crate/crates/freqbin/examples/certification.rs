//! State certification: CGLMP Bell parameter, the Z-basis dimension
//! witness, and correlation fidelity on mutually unbiased bases.
//!
//! ```bash
//! cargo run --example certification
//! ```

use freqbin::binspace::{bell_state, density_from_amplitudes, BellPattern, DensityMatrix};
use freqbin::measurement::DetectionModel;
use freqbin::metrics::{
    cglmp_optimized, cglmp_parameter, cglmp_parameter_adapted, dimension_witness,
    mub_correlation, mub_fidelity, CglmpSettings,
};
use freqbin::source::IndistinguishabilityMatrix;
use nalgebra::DMatrix;

fn main() {
    let canon = CglmpSettings::canonical();

    println!("CGLMP parameter for the six programmed patterns (ideal states):");
    println!("  pattern  D  S(adapted)  classical bound 2");
    for pattern in BellPattern::ALL {
        let d = pattern.dimension();
        let rho = pattern.state().density();
        let s = cglmp_parameter_adapted(&rho, d, &canon, &pattern.signs()).unwrap();
        println!("  {:>5}   {d}   {s:.4}", pattern.name());
    }

    let mixed = DensityMatrix::maximally_mixed(3);
    println!(
        "\nmaximally mixed qutrit: S = {:+.2e} (no violation)",
        cglmp_parameter(&mixed, 3, &canon).unwrap()
    );
    let (s_opt, offsets) = cglmp_optimized(&bell_state(2, &[1.0, 1.0]).unwrap().density(), 2)
        .unwrap();
    println!(
        "offset-optimized qubit: S = {s_opt:.6} at alice ({:.3}, {:.3}), bob ({:.3}, {:.3})",
        offsets.alice.0, offsets.alice.1, offsets.bob.0, offsets.bob.1
    );

    // dimension witness from Z-basis coincidences with a little leakage
    println!("\ndimension witness on leaky Z-basis tables:");
    for d in [2usize, 3, 4] {
        let off = (d * d - d) as f64;
        let table = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                0.98 / d as f64
            } else {
                0.02 / off
            }
        });
        let (w, cert) = dimension_witness(&table).unwrap();
        println!("  D = {d}: witness {w:.3} -> certified dimension {cert}");
    }

    // MUB correlations for an imperfect qubit source
    let model = DetectionModel::with_defaults(2).unwrap();
    let rho = density_from_amplitudes(
        &bell_state(2, &[1.0, 1.0]).unwrap(),
        &IndistinguishabilityMatrix::uniform(2, 0.87).unwrap(),
    )
    .unwrap();
    let (c_e, c_t) = mub_correlation(&rho, 2, &model).unwrap();
    println!(
        "\nqubit MUB correlation fidelity at overlap 0.87: {:.4}",
        mub_fidelity(&c_e, &c_t).unwrap()
    );
    println!("simulated correlation matrix (rows: {:?}):", c_e.row_labels);
    for i in 0..c_e.data.nrows() {
        let row: Vec<String> = (0..c_e.data.ncols())
            .map(|j| format!("{:.3}", c_e.data[(i, j)]))
            .collect();
        println!("  {}", row.join("  "));
    }
    println!("(superposition-basis blocks do not sum to one: the projectors are sub-normalized)");
}
