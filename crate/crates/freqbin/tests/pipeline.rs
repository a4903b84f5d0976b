//! End-to-end pipeline checks through the command drivers: file schemas
//! round-trip, artifacts are byte-reproducible under a fixed seed, and the
//! documented error paths surface with the right error kinds.

use freqbin::binspace::BellPattern;
use freqbin::cli::{
    run_fringe, run_metrics, run_report, run_simulate, run_tomo, z_basis_table,
};
use freqbin::config::{example_config, ExperimentConfig};
use freqbin::io::{self, FileFormat};
use freqbin::Error;
use tempfile::tempdir;

fn quick_config(pattern: BellPattern) -> ExperimentConfig {
    let mut cfg = example_config(pattern);
    cfg.tomography.particles = 16;
    cfg.tomography.iterations = 150;
    cfg.tomography.refine_sweeps = 150;
    cfg.metrics.resamples = 12;
    cfg
}

fn read_bytes(path: &std::path::Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn simulate_is_byte_reproducible() {
    let cfg = quick_config(BellPattern::Phi1);
    let d1 = tempdir().unwrap();
    let d2 = tempdir().unwrap();
    let a = run_simulate(&cfg, Some(7), d1.path(), FileFormat::Delimited).unwrap();
    let b = run_simulate(&cfg, Some(7), d2.path(), FileFormat::Delimited).unwrap();
    assert_eq!(read_bytes(&a.state_path), read_bytes(&b.state_path));
    assert_eq!(read_bytes(&a.counts_path), read_bytes(&b.counts_path));
    assert_eq!(read_bytes(&a.settings_path), read_bytes(&b.settings_path));

    // a different seed changes the sampled counts
    let d3 = tempdir().unwrap();
    let c = run_simulate(&cfg, Some(8), d3.path(), FileFormat::Delimited).unwrap();
    assert_ne!(read_bytes(&a.counts_path), read_bytes(&c.counts_path));
    assert_eq!(read_bytes(&a.state_path), read_bytes(&c.state_path));
}

#[test]
fn simulate_emits_full_settings_grid() {
    let cfg = quick_config(BellPattern::Phi2);
    let dir = tempdir().unwrap();
    let arts = run_simulate(&cfg, None, dir.path(), FileFormat::Delimited).unwrap();
    // 17 settings × 3² bin combinations
    assert_eq!(arts.records.len(), 153);
    let mut keys: Vec<(u32, usize, usize)> = arts
        .records
        .iter()
        .map(|r| (r.setting_id, r.m, r.n))
        .collect();
    keys.dedup();
    assert_eq!(keys.len(), 153);
    let back = io::read_counts(&arts.counts_path).unwrap();
    assert_eq!(back.len(), 153);
}

#[test]
fn detuned_middle_ring_leaves_its_bin_dark() {
    let mut cfg = quick_config(BellPattern::Phi2);
    // turn the middle of the three programmed rings off
    cfg.source.program.ring_on = Some(vec![true, false, true]);
    let dir = tempdir().unwrap();
    let arts = run_simulate(&cfg, None, dir.path(), FileFormat::Delimited).unwrap();
    // Z-basis rows touching the dark bin see exactly zero expected signal,
    // and a Poisson draw at zero mean is zero
    for r in arts.records.iter().filter(|r| r.setting_id == 17) {
        if r.m == 1 || r.n == 1 {
            assert_eq!(r.expected, 0.0);
            assert_eq!(r.counts, 0);
        }
    }
}

#[test]
fn tomo_roundtrip_and_determinism() {
    let cfg = quick_config(BellPattern::Phi1);
    let dir = tempdir().unwrap();
    let sim = run_simulate(&cfg, Some(5), dir.path(), FileFormat::Delimited).unwrap();

    let out1 = tempdir().unwrap();
    let out2 = tempdir().unwrap();
    let (a1, r1) = run_tomo(
        &sim.counts_path,
        2,
        Some(&cfg),
        Some(5),
        out1.path(),
        FileFormat::Delimited,
    )
    .unwrap();
    let (a2, _) = run_tomo(
        &sim.counts_path,
        2,
        Some(&cfg),
        Some(5),
        out2.path(),
        FileFormat::Delimited,
    )
    .unwrap();
    assert_eq!(read_bytes(&a1.rho_path), read_bytes(&a2.rho_path));
    assert_eq!(read_bytes(&a1.log_path), read_bytes(&a2.log_path));
    assert!(r1.converged);

    // the emitted density matrix re-parses and matches in memory
    let rho = io::read_density_matrix(&a1.rho_path).unwrap();
    assert_eq!(rho.dim(), 4);
    let log = io::read_run_log(&a1.log_path).unwrap();
    assert_eq!(log.seed, 5);
    assert_eq!(log.n_records, 20);
}

#[test]
fn tomo_rejects_truncated_and_inconsistent_counts() {
    let cfg = quick_config(BellPattern::Phi1);
    let dir = tempdir().unwrap();
    let sim = run_simulate(&cfg, Some(5), dir.path(), FileFormat::Delimited).unwrap();
    let records = io::read_counts(&sim.counts_path).unwrap();

    // fewer than D^4 informative rows
    let truncated_path = dir.path().join("truncated.csv");
    io::write_counts(&truncated_path, &records[..10], FileFormat::Delimited).unwrap();
    match run_tomo(
        &truncated_path,
        2,
        Some(&cfg),
        None,
        dir.path(),
        FileFormat::Delimited,
    ) {
        Err(Error::UnderDetermined(_)) => {}
        Err(other) => panic!("expected UnderDetermined, got {other:?}"),
        Ok(_) => panic!("expected UnderDetermined, got success"),
    }

    // bins outside the declared dimension
    let mut bad = records.clone();
    bad[0].m = 3;
    let bad_path = dir.path().join("bad.csv");
    io::write_counts(&bad_path, &bad, FileFormat::Delimited).unwrap();
    match run_tomo(
        &bad_path,
        2,
        Some(&cfg),
        None,
        dir.path(),
        FileFormat::Delimited,
    ) {
        Err(Error::Dimension(_)) => {}
        Err(other) => panic!("expected Dimension error, got {other:?}"),
        Ok(_) => panic!("expected Dimension error, got success"),
    }
}

#[test]
fn metrics_report_fields_and_determinism() {
    let cfg = quick_config(BellPattern::Phi1);
    let dir = tempdir().unwrap();
    let sim = run_simulate(&cfg, Some(11), dir.path(), FileFormat::Delimited).unwrap();

    let out1 = tempdir().unwrap();
    let out2 = tempdir().unwrap();
    let report = run_metrics(
        &sim.state_path,
        BellPattern::Phi1,
        &sim.counts_path,
        Some(&cfg),
        Some(11),
        out1.path(),
    )
    .unwrap();
    run_metrics(
        &sim.state_path,
        BellPattern::Phi1,
        &sim.counts_path,
        Some(&cfg),
        Some(11),
        out2.path(),
    )
    .unwrap();
    assert_eq!(
        read_bytes(&out1.path().join("metrics.json")),
        read_bytes(&out2.path().join("metrics.json"))
    );

    assert_eq!(report.seed, 11);
    assert_eq!(report.resamples, 12);
    assert_eq!(report.dimension, 2);
    assert!(report.fidelity_root.value > 0.9);
    assert!(report.fidelity_root.stderr >= 0.0);
    assert!(report.cglmp_s.value > 2.0);
    assert_eq!(report.certified_dimension, 2);
    assert!(report.mub_fidelity.is_some());

    let parsed = io::read_metrics_report(&out1.path().join("metrics.json")).unwrap();
    assert_eq!(parsed, report);
}

#[test]
fn metrics_rejects_mismatched_target() {
    let cfg = quick_config(BellPattern::Phi1);
    let dir = tempdir().unwrap();
    let sim = run_simulate(&cfg, Some(3), dir.path(), FileFormat::Delimited).unwrap();
    match run_metrics(
        &sim.state_path,
        BellPattern::Phi2,
        &sim.counts_path,
        Some(&cfg),
        None,
        dir.path(),
    ) {
        Err(Error::Dimension(_)) => {}
        other => panic!("expected Dimension error, got {other:?}"),
    }
}

#[test]
fn metrics_on_ideal_state_hits_textbook_values() {
    // an ideal Phi4 state certified against its own pattern
    let target = BellPattern::Phi4;
    let rho = target.state().density();
    let dir = tempdir().unwrap();
    let rho_path = dir.path().join("ideal.json");
    io::write_density_matrix(&rho_path, &rho).unwrap();

    // synthetic Z-basis rows from the ideal populations
    let mut records = Vec::new();
    for m in 0..2 {
        for n in 0..2 {
            let p = rho.populations()[(m, n)];
            records.push(freqbin::measurement::CoincidenceRecord {
                setting_id: 1,
                m,
                n,
                counts: (1e6 * p).round() as u64,
                expected: 0.0,
                integration_s: 1.0,
            });
        }
    }
    let zcounts_path = dir.path().join("zcounts.csv");
    io::write_counts(&zcounts_path, &records, FileFormat::Delimited).unwrap();

    let mut cfg = quick_config(target);
    cfg.metrics.resamples = 10;
    let report = run_metrics(
        &rho_path,
        target,
        &zcounts_path,
        Some(&cfg),
        Some(1),
        dir.path(),
    )
    .unwrap();
    assert!((report.fidelity_root.value - 1.0).abs() < 1e-9);
    assert!((report.cglmp_s.value - 2.8284).abs() < 1e-3);
    assert_eq!(report.certified_dimension, 2);
    assert!(report.witness.value > 1.99);
}

#[test]
fn z_table_extraction_needs_z_rows() {
    let records = vec![freqbin::measurement::CoincidenceRecord {
        setting_id: 2,
        m: 0,
        n: 0,
        counts: 5,
        expected: 0.0,
        integration_s: 1.0,
    }];
    assert!(matches!(z_basis_table(&records, 2), Err(Error::Contract(_))));
}

#[test]
fn fringe_scan_minimums_and_flags() {
    let cfg = quick_config(BellPattern::Phi1);
    let dir = tempdir().unwrap();
    // 8-point minimal scan fits
    let (arts, fit) = run_fringe(
        &cfg,
        None,
        (0, 1),
        8,
        false,
        dir.path(),
        FileFormat::Delimited,
    )
    .unwrap();
    assert!(fit.visibility > 0.8);
    let series = io::read_fringe(&arts.fringe_path).unwrap();
    assert_eq!(series.len(), 8);

    // 4-point scan violates the fit precondition
    match run_fringe(&cfg, None, (0, 1), 4, false, dir.path(), FileFormat::Delimited) {
        Err(Error::Fit(_)) => {}
        Err(other) => panic!("expected Fit error, got {other:?}"),
        Ok(_) => panic!("expected Fit error, got success"),
    }

    // half-spacing path on the Phi1 pair
    let (_, fit_half) = run_fringe(
        &cfg,
        None,
        (0, 1),
        16,
        true,
        dir.path(),
        FileFormat::Delimited,
    )
    .unwrap();
    assert!(fit_half.visibility > 1.0 / 2f64.sqrt());
}

#[test]
fn flex_grid_sweep_visibility_spacing_independent() {
    let mut fits = Vec::new();
    for spacing in [25.0, 50.0, 75.0] {
        let mut cfg = quick_config(BellPattern::Phi1);
        cfg.grid.spacing_ghz = spacing;
        // fixed physical source model: overlaps from the ring lineshapes
        cfg.source.indistinguishability =
            freqbin::config::IndistinguishabilityConfig::FromJsa;
        let dir = tempdir().unwrap();
        let (_, fit) = run_fringe(
            &cfg,
            None,
            (0, 1),
            24,
            true,
            dir.path(),
            FileFormat::Delimited,
        )
        .unwrap();
        fits.push(fit.visibility);
    }
    for v in &fits {
        assert!(*v > 0.95, "visibility {v}");
    }
    let spread = fits.iter().cloned().fold(f64::MIN, f64::max)
        - fits.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-6, "spacing-dependent visibility: {fits:?}");
}

#[test]
fn report_runs_end_to_end_and_reparses() {
    let mut cfg = quick_config(BellPattern::Phi1);
    cfg.metrics.target = Some("Phi1".into());
    let out1 = tempdir().unwrap();
    let out2 = tempdir().unwrap();
    let a = run_report(&cfg, Some(9), out1.path(), FileFormat::Delimited).unwrap();
    let b = run_report(&cfg, Some(9), out2.path(), FileFormat::Delimited).unwrap();
    assert_eq!(
        read_bytes(&a.report_path),
        read_bytes(&b.report_path),
        "report must be byte-reproducible"
    );
    assert!(a.report.reconstruction.fidelity_root_vs_target > 0.9);
    assert_eq!(a.report.counts.records, 20);

    // every artifact re-parses
    io::read_density_matrix(&out1.path().join("state.json")).unwrap();
    io::read_density_matrix(&out1.path().join("rho.json")).unwrap();
    io::read_counts(&out1.path().join("counts.csv")).unwrap();
    io::read_settings(&out1.path().join("settings.csv")).unwrap();
    io::read_run_log(&out1.path().join("tomo_log.json")).unwrap();
    io::read_metrics_report(&out1.path().join("metrics.json")).unwrap();
    let c_e = io::read_correlation(&out1.path().join("mub_correlation_simulated.csv")).unwrap();
    let c_t = io::read_correlation(&out1.path().join("mub_correlation_theory.csv")).unwrap();
    assert_eq!(c_e.row_labels, c_t.row_labels);
    assert_eq!(c_e.data.shape(), (6, 6));
    let text = std::fs::read_to_string(&a.report_path).unwrap();
    let _: freqbin::cli::RunReport = serde_json::from_str(&text).unwrap();
}

#[test]
fn structured_format_variant() {
    let cfg = quick_config(BellPattern::Phi1);
    let dir = tempdir().unwrap();
    let arts = run_simulate(&cfg, None, dir.path(), FileFormat::Structured).unwrap();
    assert!(arts.counts_path.ends_with("counts.json"));
    let records = io::read_counts(&arts.counts_path).unwrap();
    assert_eq!(records.len(), 20);
}
