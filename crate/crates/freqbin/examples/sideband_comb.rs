//! Phase-modulator sideband structure and the mutually unbiased bases a
//! single modulator can reach.
//!
//! ```bash
//! cargo run --example sideband_comb
//! ```

use freqbin::bessel::{bessel_j, equal_sideband_index};
use freqbin::binspace::BinGrid;
use freqbin::eom::{
    mub_bases, rf_power_to_index, sideband_matrix, unbiasedness_deviation, ModulatorCalibration,
    ModulatorSetting,
};

fn main() {
    let beta_star = equal_sideband_index();
    println!("equal-sideband index beta* = {beta_star:.6}");
    println!(
        "  J0(beta*) = {:.6}, J1(beta*) = {:.6}",
        bessel_j(0, beta_star).unwrap(),
        bessel_j(1, beta_star).unwrap()
    );

    let signal = ModulatorCalibration::signal_default();
    let idler = ModulatorCalibration::idler_default();
    println!(
        "RF calibration: 22.1 dBm -> beta {:.4} (signal), 24.3 dBm -> beta {:.4} (idler)",
        rf_power_to_index(22.1, &signal).unwrap(),
        rf_power_to_index(24.3, &idler).unwrap()
    );

    // sideband comb seen by one bin at beta*
    println!("\nsideband amplitudes J_n(beta*):");
    for n in -4..=4 {
        let j = bessel_j(n, beta_star).unwrap();
        let bar = "#".repeat((60.0 * j.abs()) as usize);
        println!("  n = {n:>2}: {j:>9.5}  {bar}");
    }

    let grid = BinGrid::with_defaults(3).unwrap();
    let m = sideband_matrix(&ModulatorSetting::equal_sideband(0.0), &grid).unwrap();
    println!(
        "\nwindowed sideband matrix: {} bins, truncation residue {:.2e}",
        grid.window_len(),
        m.truncation_residue()
    );

    for d in [2usize, 3] {
        println!("\nmutually unbiased bases for D = {d}:");
        let bases = mub_bases(d).unwrap();
        for basis in &bases {
            let settings: Vec<String> = basis
                .vectors
                .iter()
                .map(|v| format!("θ = {:.3}, read bin {}", v.setting.theta, v.readout_bin))
                .collect();
            println!("  {}: {}", basis.name, settings.join("; "));
        }
        for i in 0..bases.len() {
            for j in (i + 1)..bases.len() {
                println!(
                    "  |<{} | {}>|² deviation from 1/D: {:.2e}",
                    bases[i].name,
                    bases[j].name,
                    unbiasedness_deviation(&bases[i], &bases[j])
                );
            }
        }
    }
    match mub_bases(4) {
        Err(e) => println!("\nD = 4 MUB request: {e}"),
        Ok(_) => unreachable!(),
    }
}
