//! Batch experiment driver behind the `freqbin` binary.
//!
//! Subcommands: `simulate` (synthetic state + counts), `tomo` (counts to
//! density matrix), `metrics` (certification report), `fringe` (two-photon
//! interference scan), and `report` (the full pipeline). Every stochastic
//! step is keyed to the config seed (or `--seed`), so reruns are
//! byte-identical; wall-clock timings go to stderr only.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::binspace::{
    bell_state, density_from_amplitudes, fidelity, purity, BellPattern, DensityMatrix,
    FidelityConvention, TwoPhotonState,
};
use crate::config::{CglmpMode, ExperimentConfig, IndistinguishabilityConfig};
use crate::io::{self, FileFormat, Measured, MetricsReport, RunLog};
use crate::linalg::{hermitian_basis, CMatrix};
use crate::measurement::{
    expected_counts, fit_visibility, fringe_scan, outcome_probability, record_seed, sample_counts,
    CoincidenceRecord, DetectionModel, FringeFit, LossTable,
};
use crate::metrics::{
    cglmp_optimized, cglmp_parameter, cglmp_parameter_adapted, dimension_witness, mub_bases_exist,
    mub_correlation, mub_fidelity, CglmpSettings,
};
use crate::source::IndistinguishabilityMatrix;
use crate::tomography::{
    build_povms, pso_reconstruct, settings_table, PovmSet, ReconstructionResult, TomographyProblem,
};
use crate::{Error, Result};

/// Exit codes: validation failures, under-determined problems, and
/// non-converged reconstructions are distinguishable to batch schedulers.
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_UNDERDETERMINED: i32 = 3;
pub const EXIT_NONCONVERGED: i32 = 4;

#[derive(Parser)]
#[command(
    name = "freqbin",
    version,
    about = "Frequency-bin entangled qudit simulation, tomography, and certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Tabular file encoding: delimited or structured.
    #[arg(long, global = true, default_value = "delimited")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the programmed state and synthetic tomography counts.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Reconstruct a density matrix from a counts file.
    Tomo {
        /// Counts file produced by `simulate` (or laboratory data).
        #[arg(long)]
        counts: PathBuf,
        /// Qudit dimension of the data.
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Certify a density matrix against a named target pattern.
    Metrics {
        /// Density-matrix file.
        #[arg(long)]
        rho: PathBuf,
        /// Target pattern name (Phi1..Phi6).
        #[arg(long)]
        target: String,
        /// Counts file holding computational-basis (modulators off) rows.
        #[arg(long)]
        zcounts: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scan a two-photon interference fringe and fit its visibility.
    Fringe {
        /// Bin pair, e.g. `2,3`.
        #[arg(long)]
        pair: String,
        /// Number of scan points.
        #[arg(long, default_value_t = 24)]
        points: usize,
        /// Drive at half the bin spacing and read the midpoint bin.
        #[arg(long)]
        half_spacing: bool,
        /// Override the config bin spacing (flex-grid sweeps).
        #[arg(long)]
        spacing_ghz: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run simulate, tomo, and metrics end to end and write a run report.
    Report {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Binary entry point: parse, dispatch, map errors to exit codes.
pub fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    };
    if code != 0 {
        std::process::exit(code);
    }
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::UnderDetermined(_) => EXIT_UNDERDETERMINED,
        _ => EXIT_VALIDATION,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { common } => {
            let (cfg, seed, format) = load_common(&common, true)?;
            let arts = run_simulate(&cfg.unwrap(), seed, &common.out_dir, format)?;
            println!("state:  {}", arts.state_path.display());
            println!("counts: {}", arts.counts_path.display());
            Ok(0)
        }
        Command::Tomo { counts, dim, common } => {
            let (cfg, seed, format) = load_common(&common, false)?;
            let (arts, result) = run_tomo(&counts, dim, cfg.as_ref(), seed, &common.out_dir, format)?;
            println!(
                "rho: {} (cost {:.6e}, {})",
                arts.rho_path.display(),
                result.cost,
                if result.converged { "converged" } else { "NOT converged" }
            );
            Ok(if result.converged { 0 } else { EXIT_NONCONVERGED })
        }
        Command::Metrics {
            rho,
            target,
            zcounts,
            common,
        } => {
            let (cfg, seed, _) = load_common(&common, false)?;
            let pattern = BellPattern::from_name(&target)?;
            let report = run_metrics(&rho, pattern, &zcounts, cfg.as_ref(), seed, &common.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("plain data"));
            Ok(0)
        }
        Command::Fringe {
            pair,
            points,
            half_spacing,
            spacing_ghz,
            common,
        } => {
            let (cfg, seed, format) = load_common(&common, true)?;
            let mut cfg = cfg.unwrap();
            if let Some(s) = spacing_ghz {
                cfg.grid.spacing_ghz = s;
                cfg.validate()?;
            }
            let pair = parse_pair(&pair)?;
            let (arts, fit) =
                run_fringe(&cfg, seed, pair, points, half_spacing, &common.out_dir, format)?;
            println!(
                "fringe: {} (V = {:.6} ± {:.6})",
                arts.fringe_path.display(),
                fit.visibility,
                fit.stderr
            );
            Ok(0)
        }
        Command::Report { common } => {
            let (cfg, seed, format) = load_common(&common, true)?;
            let report = run_report(&cfg.unwrap(), seed, &common.out_dir, format)?;
            println!("report: {}", report.report_path.display());
            Ok(0)
        }
    }
}

fn load_common(common: &CommonArgs, config_required: bool) -> Result<(Option<ExperimentConfig>, Option<u64>, FileFormat)> {
    let cfg = match &common.config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None if config_required => {
            return Err(Error::Config("--config is required for this command".into()))
        }
        None => None,
    };
    let format: FileFormat = common.format.parse()?;
    std::fs::create_dir_all(&common.out_dir)?;
    Ok((cfg, common.seed, format))
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::contract(format!("pair '{s}' must be 'j,k'")));
    }
    let j = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::contract(format!("bad bin '{}'", parts[0])))?;
    let k = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::contract(format!("bad bin '{}'", parts[1])))?;
    Ok((j, k))
}

// ---------------------------------------------------------------------------
// simulate

pub struct SimulateArtifacts {
    pub state_path: PathBuf,
    pub counts_path: PathBuf,
    pub settings_path: PathBuf,
    pub rho: DensityMatrix,
    pub records: Vec<CoincidenceRecord>,
}

/// Prepared experiment pieces shared by the commands.
struct Prepared {
    model: DetectionModel,
    state: TwoPhotonState,
    indist: IndistinguishabilityMatrix,
    rho: DensityMatrix,
    loss: LossTable,
    rate_hz: f64,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let d = cfg.grid.dimension;
    let model = DetectionModel {
        grid: cfg.bin_grid()?,
        signal_cal: crate::eom::ModulatorCalibration::signal_default(),
        idler_cal: crate::eom::ModulatorCalibration::idler_default(),
    };
    let source = cfg.multi_ring_source()?;
    let program = cfg.circuit_program();
    let state = source.amplitudes(&program)?;
    let indist = match &cfg.source.indistinguishability {
        IndistinguishabilityConfig::FromJsa => source.indistinguishability_matrix()?,
        IndistinguishabilityConfig::Uniform { value } => {
            IndistinguishabilityMatrix::uniform(d, *value)?
        }
        IndistinguishabilityConfig::Perfect => IndistinguishabilityMatrix::perfect(d),
    };
    let rho = density_from_amplitudes(&state, &indist)?;
    let rate_hz = cfg
        .measurement
        .rate_hz
        .unwrap_or_else(|| source.pair_rate_hz(&program));
    Ok(Prepared {
        model,
        state,
        indist,
        rho,
        loss: cfg.loss_table(),
        rate_hz,
    })
}

/// Simulate the configured experiment: write the effective density matrix
/// and a Poisson-sampled counts file over the dimension's settings table.
/// Everything is computed before anything is written.
pub fn run_simulate(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    out_dir: &Path,
    format: FileFormat,
) -> Result<SimulateArtifacts> {
    let seed = seed_override.unwrap_or(cfg.seed);
    let d = cfg.grid.dimension;
    let prep = prepare(cfg)?;
    let settings = settings_table(d)?;

    let mut records = Vec::with_capacity(settings.len() * d * d);
    for setting in &settings {
        for m in 0..d {
            for n in 0..d {
                let p = outcome_probability(
                    &prep.model,
                    &prep.state,
                    &prep.indist,
                    setting,
                    m as i64,
                    n as i64,
                )?;
                let expected = expected_counts(
                    p,
                    prep.rate_hz,
                    prep.loss.get(m, n),
                    cfg.measurement.integration_s,
                )?;
                let counts = sample_counts(
                    expected,
                    record_seed(seed, setting.id, m as u64, n as u64),
                )?;
                records.push(CoincidenceRecord {
                    setting_id: setting.id,
                    m,
                    n,
                    counts,
                    expected,
                    integration_s: cfg.measurement.integration_s,
                });
            }
        }
    }

    let state_path = out_dir.join("state.json");
    let counts_path = out_dir.join(match format {
        FileFormat::Delimited => "counts.csv",
        FileFormat::Structured => "counts.json",
    });
    let settings_path = out_dir.join(match format {
        FileFormat::Delimited => "settings.csv",
        FileFormat::Structured => "settings.json",
    });
    // stage every payload before the first write: no partial artifact sets
    let state_payload = io::density_matrix_to_string(&prep.rho);
    let counts_payload = io::counts_to_string(&records, format);
    let settings_payload = io::settings_to_string(&settings, format);
    io::write_atomic(&state_path, &state_payload)?;
    io::write_atomic(&counts_path, &counts_payload)?;
    io::write_atomic(&settings_path, &settings_payload)?;
    Ok(SimulateArtifacts {
        state_path,
        counts_path,
        settings_path,
        rho: prep.rho,
        records,
    })
}

// ---------------------------------------------------------------------------
// tomo

pub struct TomoArtifacts {
    pub rho_path: PathBuf,
    pub log_path: PathBuf,
}

/// Reconstruct a density matrix from a counts file.
pub fn run_tomo(
    counts_path: &Path,
    dim: usize,
    cfg: Option<&ExperimentConfig>,
    seed_override: Option<u64>,
    out_dir: &Path,
    format: FileFormat,
) -> Result<(TomoArtifacts, ReconstructionResult)> {
    let _ = format;
    let records = io::read_counts(counts_path)?;
    let settings = settings_table(dim)?;
    let valid_ids: std::collections::BTreeSet<u32> = settings.iter().map(|s| s.id).collect();
    for r in &records {
        if r.m >= dim || r.n >= dim {
            return Err(Error::dimension(format!(
                "record (setting {}, bins {}, {}) is outside dimension {dim}",
                r.setting_id, r.m, r.n
            )));
        }
        if !valid_ids.contains(&r.setting_id) {
            return Err(Error::contract(format!(
                "setting id {} is not in the D={dim} settings table",
                r.setting_id
            )));
        }
    }

    let model = match cfg {
        Some(c) => {
            if c.grid.dimension != dim {
                return Err(Error::dimension(format!(
                    "--dim {dim} conflicts with the config dimension {}",
                    c.grid.dimension
                )));
            }
            DetectionModel {
                grid: c.bin_grid()?,
                signal_cal: crate::eom::ModulatorCalibration::signal_default(),
                idler_cal: crate::eom::ModulatorCalibration::idler_default(),
            }
        }
        None => DetectionModel::with_defaults(dim)?,
    };
    let loss = cfg.map(|c| c.loss_table()).unwrap_or(LossTable::Uniform(0.05));
    let seed = seed_override.or(cfg.map(|c| c.seed)).unwrap_or(0);
    let options = cfg
        .map(|c| c.reconstruction_options(seed))
        .unwrap_or_else(|| crate::tomography::ReconstructionOptions {
            seed,
            ..Default::default()
        });

    let povms = build_povms(&settings, &model)?;
    let problem = TomographyProblem::new(povms, records, loss, options)?;
    let result = pso_reconstruct(&problem)?;

    let rho_path = out_dir.join("rho.json");
    let log_path = out_dir.join("tomo_log.json");
    io::write_density_matrix(&rho_path, &result.rho)?;
    io::write_run_log(
        &log_path,
        &RunLog {
            seed: result.seed,
            iterations: result.iterations,
            final_cost: result.cost,
            converged: result.converged,
            rate_hz: result.rate_hz,
            n_records: problem.n_meas(),
            cost_trace: result.cost_trace.clone(),
        },
    )?;
    Ok((TomoArtifacts { rho_path, log_path }, result))
}

// ---------------------------------------------------------------------------
// metrics

/// Certify a reconstructed state against a named target pattern, with
/// Poisson-resampled error bars (counts are resampled and propagated through
/// a linear-inversion estimator; the witness resamples the Z-basis table).
pub fn run_metrics(
    rho_path: &Path,
    target: BellPattern,
    zcounts_path: &Path,
    cfg: Option<&ExperimentConfig>,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<MetricsReport> {
    let rho = io::read_density_matrix(rho_path)?;
    let d = target.dimension();
    if rho.local_dim() != d {
        return Err(Error::dimension(format!(
            "density matrix is for D={} but target {} has D={d}",
            rho.local_dim(),
            target.name()
        )));
    }
    let records = io::read_counts(zcounts_path)?;
    let z_table = z_basis_table(&records, d)?;

    let seed = seed_override.or(cfg.map(|c| c.seed)).unwrap_or(0);
    let mode = cfg.map(|c| c.metrics.cglmp).unwrap_or(CglmpMode::Adapted);
    let resamples = cfg.map(|c| c.metrics.resamples).unwrap_or(200);
    let model = DetectionModel::with_defaults(d)?;

    let report = metrics_report(&rho, target, &z_table, mode, resamples, seed, &model)?;
    io::write_metrics_report(&out_dir.join("metrics.json"), &report)?;
    // correlation-matrix plot data, when a single-modulator MUB set exists
    if mub_bases_exist(d) {
        let (c_e, c_t) = mub_correlation(&rho, d, &model)?;
        io::write_correlation(&out_dir.join("mub_correlation_simulated.csv"), &c_e)?;
        io::write_correlation(&out_dir.join("mub_correlation_theory.csv"), &c_t)?;
    }
    Ok(report)
}

/// Sum the modulators-off rows of a counts file into the `D x D` Z-basis
/// coincidence table.
pub fn z_basis_table(records: &[CoincidenceRecord], d: usize) -> Result<DMatrix<f64>> {
    let settings = settings_table(d)?;
    let z_ids: Vec<u32> = settings
        .iter()
        .filter(|s| s.p_s_dbm == 0.0 && s.p_i_dbm == 0.0)
        .map(|s| s.id)
        .collect();
    let mut table = DMatrix::zeros(d, d);
    let mut seen = false;
    for r in records {
        if z_ids.contains(&r.setting_id) {
            if r.m >= d || r.n >= d {
                return Err(Error::dimension(format!(
                    "Z-basis record names bin ({}, {}) outside D={d}",
                    r.m, r.n
                )));
            }
            table[(r.m, r.n)] += r.counts as f64;
            seen = true;
        }
    }
    if !seen {
        return Err(Error::contract(
            "counts file has no modulators-off (Z-basis) rows",
        ));
    }
    Ok(table)
}

fn cglmp_by_mode(
    rho: &DensityMatrix,
    d: usize,
    mode: CglmpMode,
    target: BellPattern,
    fixed_settings: Option<&CglmpSettings>,
) -> Result<(f64, CglmpSettings)> {
    let canonical = CglmpSettings::canonical();
    match mode {
        CglmpMode::Adapted => {
            let settings = fixed_settings.copied().unwrap_or(canonical);
            Ok((
                cglmp_parameter_adapted(rho, d, &settings, &target.signs())?,
                settings,
            ))
        }
        CglmpMode::Canonical => {
            let settings = fixed_settings.copied().unwrap_or(canonical);
            Ok((cglmp_parameter(rho, d, &settings)?, settings))
        }
        CglmpMode::Optimized => match fixed_settings {
            Some(s) => Ok((cglmp_parameter(rho, d, s)?, *s)),
            None => cglmp_optimized(rho, d),
        },
    }
}

/// Compute the certification metrics and their Monte-Carlo error bars.
pub fn metrics_report(
    rho: &DensityMatrix,
    target: BellPattern,
    z_table: &DMatrix<f64>,
    mode: CglmpMode,
    resamples: usize,
    seed: u64,
    model: &DetectionModel,
) -> Result<MetricsReport> {
    let d = target.dimension();
    let target_rho = target.state().density();

    // point estimates
    let f_root = fidelity(rho, &target_rho, FidelityConvention::Root)?;
    let f_overlap = fidelity(rho, &target_rho, FidelityConvention::Overlap)?;
    let pur = purity(rho);
    let (s_value, s_settings) = cglmp_by_mode(rho, d, mode, target, None)?;
    let (witness, certified) = dimension_witness(z_table)?;
    let mub_point = if mub_bases_exist(d) {
        let (c_e, c_t) = mub_correlation(rho, d, model)?;
        Some(mub_fidelity(&c_e, &c_t)?)
    } else {
        None
    };

    // Resampling: Poisson draws of predicted counts, propagated through a
    // deterministic linear-inversion estimator (pseudoinverse + eigenvalue
    // clamp); measurement settings stay fixed across resamples.
    let povms = build_povms(&settings_table(d)?, model)?;
    let inverter = LinearInverter::new(&povms, d);
    let budget: f64 = z_table.iter().sum::<f64>().max(1.0);
    let expected: Vec<f64> = povms
        .entries
        .iter()
        .map(|e| budget * e.probability(rho))
        .collect();

    let mut stats = ResampleStats::new(mub_point.is_some());
    for r in 0..resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(record_seed(seed, 0xC0DE, r as u64, 0));
        let mut probs = Vec::with_capacity(expected.len());
        for &e in &expected {
            let c = if e > 0.0 {
                Poisson::new(e)
                    .map_err(|err| Error::contract(format!("invalid Poisson rate: {err}")))?
                    .sample(&mut rng)
            } else {
                0.0
            };
            probs.push(c / budget);
        }
        let rho_r = inverter.reconstruct(&probs)?;
        let f_root_r = fidelity(&rho_r, &target_rho, FidelityConvention::Root)?;
        let f_overlap_r = fidelity(&rho_r, &target_rho, FidelityConvention::Overlap)?;
        let pur_r = purity(&rho_r);
        let (s_r, _) = cglmp_by_mode(&rho_r, d, mode, target, Some(&s_settings))?;
        let mub_r = if mub_point.is_some() {
            let (c_e, c_t) = mub_correlation(&rho_r, d, model)?;
            Some(mub_fidelity(&c_e, &c_t)?)
        } else {
            None
        };
        // witness error bar: resample the observed Z table itself
        let z_r = DMatrix::from_fn(d, d, |i, j| {
            let c = z_table[(i, j)];
            if c > 0.0 {
                Poisson::new(c).expect("positive rate").sample(&mut rng)
            } else {
                0.0
            }
        });
        let (w_r, _) = dimension_witness(&z_r)?;
        stats.push(f_root_r, f_overlap_r, pur_r, s_r, w_r, mub_r);
    }

    Ok(MetricsReport {
        target: target.name().to_string(),
        dimension: d,
        seed,
        resamples,
        cglmp_mode: format!("{mode:?}").to_lowercase(),
        fidelity_root: Measured {
            value: f_root,
            stderr: stats.stderr(0),
        },
        fidelity_overlap: Measured {
            value: f_overlap,
            stderr: stats.stderr(1),
        },
        purity: Measured {
            value: pur,
            stderr: stats.stderr(2),
        },
        cglmp_s: Measured {
            value: s_value,
            stderr: stats.stderr(3),
        },
        witness: Measured {
            value: witness,
            stderr: stats.stderr(4),
        },
        certified_dimension: certified,
        mub_fidelity: mub_point.map(|value| Measured {
            value,
            stderr: stats.stderr(5),
        }),
    })
}

struct ResampleStats {
    samples: [Vec<f64>; 6],
    with_mub: bool,
}

impl ResampleStats {
    fn new(with_mub: bool) -> Self {
        Self {
            samples: Default::default(),
            with_mub,
        }
    }

    fn push(&mut self, a: f64, b: f64, c: f64, d: f64, e: f64, f: Option<f64>) {
        self.samples[0].push(a);
        self.samples[1].push(b);
        self.samples[2].push(c);
        self.samples[3].push(d);
        self.samples[4].push(e);
        if let Some(v) = f {
            debug_assert!(self.with_mub);
            self.samples[5].push(v);
        }
    }

    fn stderr(&self, idx: usize) -> f64 {
        let v = &self.samples[idx];
        if v.len() < 2 {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        var.sqrt()
    }
}

/// Min-norm linear inversion of the measurement map, with a PSD projection:
/// the standard fast estimator for error propagation.
struct LinearInverter {
    basis: Vec<CMatrix>,
    /// pseudoinverse columns: parameter vector per unit probability of each POVM
    pinv: DMatrix<f64>,
    n: usize,
}

impl LinearInverter {
    fn new(povms: &PovmSet, d: usize) -> Self {
        let n = d * d;
        let basis = hermitian_basis(n);
        let rows = povms.len();
        let cols = basis.len();
        let mut a = DMatrix::zeros(rows, cols);
        for (r, entry) in povms.entries.iter().enumerate() {
            let op = entry.operator();
            for (c, h) in basis.iter().enumerate() {
                // Tr(P H): both Hermitian, so the trace is real
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += (op[(i, j)].conj() * h[(i, j)]).re;
                    }
                }
                a[(r, c)] = s;
            }
        }
        // min-norm pseudoinverse through the normal-equation eigensystem
        let ata = a.transpose() * &a;
        let eig = ata.symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let mut inv = DMatrix::zeros(cols, cols);
        for k in 0..cols {
            let lambda = eig.eigenvalues[k];
            if lambda > 1e-10 * max_eig {
                let v = eig.eigenvectors.column(k);
                inv += DMatrix::from_fn(cols, cols, |i, j| v[i] * v[j] / lambda);
            }
        }
        let pinv = inv * a.transpose();
        Self { basis, pinv, n }
    }

    fn reconstruct(&self, probs: &[f64]) -> Result<DensityMatrix> {
        let y = DMatrix::from_column_slice(probs.len(), 1, probs);
        let x = &self.pinv * y;
        let mut h = CMatrix::zeros(self.n, self.n);
        for (b, basis_op) in self.basis.iter().enumerate() {
            h += basis_op.scale(x[(b, 0)]);
        }
        // project onto the state space: clamp the spectrum, renormalize
        let (values, vectors) = crate::linalg::hermitian_eigen(&h);
        let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let weights: Vec<f64> = if total > 1e-12 {
            clamped.iter().map(|v| v / total).collect()
        } else {
            vec![1.0 / self.n as f64; self.n]
        };
        let mut mat = CMatrix::zeros(self.n, self.n);
        for (k, &w) in weights.iter().enumerate() {
            let col = vectors.column(k);
            for i in 0..self.n {
                for j in 0..self.n {
                    mat[(i, j)] += col[i] * col[j].conj() * Complex64::new(w, 0.0);
                }
            }
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        DensityMatrix::try_new(sym)
    }
}

// ---------------------------------------------------------------------------
// fringe

pub struct FringeArtifacts {
    pub fringe_path: PathBuf,
    pub fit_path: PathBuf,
}

/// Fit summary persisted next to the fringe series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FringeSummary {
    pub pair: (usize, usize),
    pub half_spacing: bool,
    pub spacing_ghz: f64,
    pub fit: FringeFit,
    /// Visibility above 1/√2 signals entanglement under color-less noise.
    pub entangled: bool,
}

/// Scan the configured state's two-photon fringe on a bin pair and fit the
/// visibility. The series is emitted in detector rate units.
pub fn run_fringe(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    pair: (usize, usize),
    points: usize,
    half_spacing: bool,
    out_dir: &Path,
    format: FileFormat,
) -> Result<(FringeArtifacts, FringeFit)> {
    let _ = seed_override; // the fringe model is noiseless
    let prep = prepare(cfg)?;
    let thetas: Vec<f64> = (0..points)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / points.max(1) as f64)
        .collect();
    let series = fringe_scan(&prep.model, &prep.state, &prep.indist, pair, &thetas, half_spacing)?;
    let lower = pair.0.min(pair.1);
    let scale = prep.rate_hz * prep.loss.get(lower, lower);
    let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, p)| (t, scale * p)).collect();
    let fit = fit_visibility(&scaled)?;

    let fringe_path = out_dir.join(match format {
        FileFormat::Delimited => "fringe.csv",
        FileFormat::Structured => "fringe.json",
    });
    let fit_path = out_dir.join("fringe_fit.json");
    io::write_fringe(&fringe_path, &scaled, format)?;
    let summary = FringeSummary {
        pair,
        half_spacing,
        spacing_ghz: cfg.grid.spacing_ghz,
        entangled: fit.visibility > 1.0 / 2f64.sqrt(),
        fit: fit.clone(),
    };
    io::write_atomic(
        &fit_path,
        &serde_json::to_string_pretty(&summary).expect("plain data"),
    )?;
    Ok((FringeArtifacts { fringe_path, fit_path }, fit))
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSummary {
    pub dimension: usize,
    pub amplitudes_re: Vec<f64>,
    pub amplitudes_im: Vec<f64>,
    pub purity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsSummary {
    pub settings: usize,
    pub records: usize,
    pub total_counts: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionSummary {
    pub rate_hz: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fidelity_root_vs_target: f64,
}

/// The full-pipeline report: config echo, state, counts, reconstruction, and
/// certification. Stochastic artifacts carry the seed; timings are not
/// persisted (stderr only) so reruns stay byte-identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub state: StateSummary,
    pub counts: CountsSummary,
    pub reconstruction: ReconstructionSummary,
    pub metrics: MetricsReport,
}

pub struct ReportArtifacts {
    pub report_path: PathBuf,
    pub report: RunReport,
}

/// Simulate, reconstruct, certify, and bundle everything into one report.
pub fn run_report(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    out_dir: &Path,
    format: FileFormat,
) -> Result<ReportArtifacts> {
    let seed = seed_override.unwrap_or(cfg.seed);
    let target_name = cfg.metrics.target.as_ref().ok_or_else(|| {
        Error::Config("report runs need metrics.target (Phi1..Phi6) in the config".into())
    })?;
    let target = BellPattern::from_name(target_name)?;
    let d = cfg.grid.dimension;
    if target.dimension() != d {
        return Err(Error::Config(format!(
            "metrics.target {} is a D={} pattern but grid.dimension is {d}",
            target.name(),
            target.dimension()
        )));
    }

    let t0 = std::time::Instant::now();
    let sim = run_simulate(cfg, Some(seed), out_dir, format)?;
    eprintln!("simulate: {:.1?}", t0.elapsed());

    let t1 = std::time::Instant::now();
    let (tomo_arts, tomo) = run_tomo(&sim.counts_path, d, Some(cfg), Some(seed), out_dir, format)?;
    eprintln!("tomo: {:.1?}", t1.elapsed());

    let t2 = std::time::Instant::now();
    let metrics = run_metrics(
        &tomo_arts.rho_path,
        target,
        &sim.counts_path,
        Some(cfg),
        Some(seed),
        out_dir,
    )?;
    eprintln!("metrics: {:.1?}", t2.elapsed());

    let prep = prepare(cfg)?;
    let target_rho = target.state().density();
    let f_root = fidelity(&tomo.rho, &target_rho, FidelityConvention::Root)?;
    let report = RunReport {
        seed,
        config: cfg.clone(),
        state: StateSummary {
            dimension: d,
            amplitudes_re: prep.state.amplitudes().iter().map(|z| z.re).collect(),
            amplitudes_im: prep.state.amplitudes().iter().map(|z| z.im).collect(),
            purity: purity(&prep.rho),
        },
        counts: CountsSummary {
            settings: settings_table(d)?.len(),
            records: sim.records.len(),
            total_counts: sim.records.iter().map(|r| r.counts).sum(),
        },
        reconstruction: ReconstructionSummary {
            rate_hz: tomo.rate_hz,
            final_cost: tomo.cost,
            iterations: tomo.iterations,
            converged: tomo.converged,
            fidelity_root_vs_target: f_root,
        },
        metrics,
    };
    let report_path = out_dir.join("run_report.json");
    io::write_atomic(
        &report_path,
        &serde_json::to_string_pretty(&report).expect("plain data"),
    )?;
    Ok(ReportArtifacts {
        report_path,
        report,
    })
}

// small helpers the driver shares with tests

/// Ideal state for a pattern embedded in its own dimension, as ρ.
pub fn ideal_density(pattern: BellPattern) -> DensityMatrix {
    pattern.state().density()
}

/// Uniform bell state of a dimension (all-plus pattern).
pub fn uniform_bell(d: usize) -> Result<TwoPhotonState> {
    bell_state(d, &vec![1.0; d])
}
