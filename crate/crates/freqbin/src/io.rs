//! File formats shared across the pipeline.
//!
//! Density matrices and reports are structured JSON documents; settings
//! tables, counts, and fringe series are delimited text. Floats are written
//! with Rust's shortest round-trip formatting, so every emitted file
//! re-parses into the exact in-memory value and byte-identical reruns are
//! possible under fixed seeds. Writes go through a temp-file rename so a
//! failed command never leaves a partial artifact behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binspace::DensityMatrix;
use crate::linalg::CMatrix;
use crate::measurement::{CoincidenceRecord, FringePoint, MeasurementSetting};
use crate::{Error, Result};

/// Tabular output encoding selected by the CLI `--format` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    /// Comma-delimited text with a header row.
    Delimited,
    /// A JSON array of row objects.
    Structured,
}

impl std::str::FromStr for FileFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delimited" => Ok(FileFormat::Delimited),
            "structured" => Ok(FileFormat::Structured),
            other => Err(Error::contract(format!(
                "unknown format '{other}' (expected delimited|structured)"
            ))),
        }
    }
}

/// Atomically write `content` to `path` (temp file + rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp: PathBuf = path.with_extension("tmp~");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------------
// density matrix file

#[derive(Serialize, Deserialize)]
struct DensityMatrixFile {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Serialize a density matrix: joint dimension plus row-major real and
/// imaginary parts.
pub fn density_matrix_to_string(rho: &DensityMatrix) -> String {
    let n = rho.dim();
    let mut re = Vec::with_capacity(n * n);
    let mut im = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            re.push(rho.matrix()[(r, c)].re);
            im.push(rho.matrix()[(r, c)].im);
        }
    }
    serde_json::to_string_pretty(&DensityMatrixFile { dim: n, re, im }).expect("plain data")
}

pub fn write_density_matrix(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_atomic(path, &density_matrix_to_string(rho))
}

/// Parse and validate a density-matrix file. Inputs whose Hermiticity
/// deviation exceeds 1e-9 are rejected; smaller deviations are symmetrized
/// away before the full state validation runs.
pub fn read_density_matrix(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    let file: DensityMatrixFile =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    let n = file.dim;
    if file.re.len() != n * n || file.im.len() != n * n {
        return Err(parse_err(
            path,
            format!(
                "dim {} needs {} entries, got re: {}, im: {}",
                n,
                n * n,
                file.re.len(),
                file.im.len()
            ),
        ));
    }
    let mat = CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(file.re[r * n + c], file.im[r * n + c])
    });
    let dev = crate::linalg::hermiticity_deviation(&mat);
    if dev > 1e-9 {
        return Err(parse_err(
            path,
            format!("matrix not Hermitian: deviation {dev:.3e} exceeds 1e-9"),
        ));
    }
    let sym = (&mat + mat.adjoint()).scale(0.5);
    DensityMatrix::try_new(sym)
}

// ---------------------------------------------------------------------------
// measurement-settings table

/// One row per setting: `id, P_s dBm, θ_s rad, P_i dBm, θ_i rad`.
pub fn settings_to_string(settings: &[MeasurementSetting], format: FileFormat) -> String {
    match format {
        FileFormat::Delimited => {
            let mut out = String::from("id,p_s_dbm,theta_s_rad,p_i_dbm,theta_i_rad\n");
            for s in settings {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.id, s.p_s_dbm, s.theta_s_rad, s.p_i_dbm, s.theta_i_rad
                )
                .unwrap();
            }
            out
        }
        FileFormat::Structured => serde_json::to_string_pretty(settings).expect("plain data"),
    }
}

pub fn write_settings(path: &Path, settings: &[MeasurementSetting], format: FileFormat) -> Result<()> {
    write_atomic(path, &settings_to_string(settings, format))
}

pub fn read_settings(path: &Path) -> Result<Vec<MeasurementSetting>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()));
    }
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(path, format!("line {}: expected 5 fields", lineno + 1)));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| parse_err(path, format!("line {}: bad float '{s}'", lineno + 1)))
        };
        out.push(MeasurementSetting::new(
            fields[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(path, format!("line {}: bad id", lineno + 1)))?,
            parse_f(fields[1])?,
            parse_f(fields[2])?,
            parse_f(fields[3])?,
            parse_f(fields[4])?,
        )?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// counts file

#[derive(Serialize, Deserialize)]
struct CountsRow {
    setting_id: u32,
    m: usize,
    n: usize,
    counts: u64,
    integration_s: f64,
}

/// Delimited counts: `setting_id, m, n, counts, integration_s`.
pub fn counts_to_string(records: &[CoincidenceRecord], format: FileFormat) -> String {
    match format {
        FileFormat::Delimited => {
            let mut out = String::from("setting_id,m,n,counts,integration_s\n");
            for r in records {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.setting_id, r.m, r.n, r.counts, r.integration_s
                )
                .unwrap();
            }
            out
        }
        FileFormat::Structured => {
            let rows: Vec<CountsRow> = records
                .iter()
                .map(|r| CountsRow {
                    setting_id: r.setting_id,
                    m: r.m,
                    n: r.n,
                    counts: r.counts,
                    integration_s: r.integration_s,
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("plain data")
        }
    }
}

pub fn write_counts(path: &Path, records: &[CoincidenceRecord], format: FileFormat) -> Result<()> {
    write_atomic(path, &counts_to_string(records, format))
}

pub fn read_counts(path: &Path) -> Result<Vec<CoincidenceRecord>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<CountsRow> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?
    } else {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(parse_err(path, format!("line {}: expected 5 fields", lineno + 1)));
            }
            let bad = |what: &str| parse_err(path, format!("line {}: bad {what}", lineno + 1));
            rows.push(CountsRow {
                setting_id: fields[0].trim().parse().map_err(|_| bad("setting_id"))?,
                m: fields[1].trim().parse().map_err(|_| bad("m"))?,
                n: fields[2].trim().parse().map_err(|_| bad("n"))?,
                counts: fields[3].trim().parse().map_err(|_| bad("counts"))?,
                integration_s: fields[4].trim().parse().map_err(|_| bad("integration_s"))?,
            });
        }
        rows
    };
    Ok(rows
        .into_iter()
        .map(|r| CoincidenceRecord {
            setting_id: r.setting_id,
            m: r.m,
            n: r.n,
            counts: r.counts,
            expected: 0.0,
            integration_s: r.integration_s,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// fringe file

/// Delimited fringe series: `theta_rad, rate_hz`.
pub fn fringe_to_string(series: &[FringePoint], format: FileFormat) -> String {
    match format {
        FileFormat::Delimited => {
            let mut out = String::from("theta_rad,rate_hz\n");
            for (theta, rate) in series {
                writeln!(out, "{theta},{rate}").unwrap();
            }
            out
        }
        FileFormat::Structured => {
            #[derive(Serialize)]
            struct Row {
                theta_rad: f64,
                rate_hz: f64,
            }
            let rows: Vec<Row> = series
                .iter()
                .map(|&(theta_rad, rate_hz)| Row { theta_rad, rate_hz })
                .collect();
            serde_json::to_string_pretty(&rows).expect("plain data")
        }
    }
}

pub fn write_fringe(path: &Path, series: &[FringePoint], format: FileFormat) -> Result<()> {
    write_atomic(path, &fringe_to_string(series, format))
}

pub fn read_fringe(path: &Path) -> Result<Vec<FringePoint>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        #[derive(Deserialize)]
        struct Row {
            theta_rad: f64,
            rate_hz: f64,
        }
        let rows: Vec<Row> =
            serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
        return Ok(rows.into_iter().map(|r| (r.theta_rad, r.rate_hz)).collect());
    }
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(path, format!("line {}: expected 2 fields", lineno + 1)));
        }
        let bad = |what: &str| parse_err(path, format!("line {}: bad {what}", lineno + 1));
        out.push((
            fields[0].trim().parse().map_err(|_| bad("theta_rad"))?,
            fields[1].trim().parse().map_err(|_| bad("rate_hz"))?,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// reports

// ---------------------------------------------------------------------------
// correlation-matrix plot data

/// Delimited correlation matrix: a header of column labels, then one row per
/// Alice outcome.
pub fn correlation_to_string(c: &crate::metrics::CorrelationMatrix) -> String {
    let mut out = String::from("outcome");
    for label in &c.col_labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, label) in c.row_labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..c.data.ncols() {
            write!(out, ",{}", c.data[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_correlation(path: &Path, c: &crate::metrics::CorrelationMatrix) -> Result<()> {
    write_atomic(path, &correlation_to_string(c))
}

pub fn read_correlation(path: &Path) -> Result<crate::metrics::CorrelationMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty correlation file"))?;
    let col_labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut row_labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        row_labels.push(
            fields
                .next()
                .ok_or_else(|| parse_err(path, format!("line {}: missing label", lineno + 2)))?
                .to_string(),
        );
        let values: Vec<f64> = fields
            .map(|f| {
                f.trim()
                    .parse()
                    .map_err(|_| parse_err(path, format!("line {}: bad float '{f}'", lineno + 2)))
            })
            .collect::<Result<_>>()?;
        if values.len() != col_labels.len() {
            return Err(parse_err(path, format!("line {}: ragged row", lineno + 2)));
        }
        rows.push(values);
    }
    let data = nalgebra::DMatrix::from_fn(rows.len(), col_labels.len(), |i, j| rows[i][j]);
    Ok(crate::metrics::CorrelationMatrix {
        row_labels,
        col_labels,
        data,
    })
}

/// A scalar with a Monte-Carlo error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

/// Certification report: fidelities (both conventions), purity, the CGLMP
/// parameter, the dimension witness, and the MUB correlation fidelity, each
/// with Poisson-resampled error bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub target: String,
    pub dimension: usize,
    pub seed: u64,
    pub resamples: usize,
    pub cglmp_mode: String,
    pub fidelity_root: Measured,
    pub fidelity_overlap: Measured,
    pub purity: Measured,
    pub cglmp_s: Measured,
    pub witness: Measured,
    pub certified_dimension: usize,
    /// Present for qubits and qutrits; no single-modulator MUB set exists
    /// beyond that.
    pub mub_fidelity: Option<Measured>,
}

pub fn write_metrics_report(path: &Path, report: &MetricsReport) -> Result<()> {
    write_atomic(
        path,
        &serde_json::to_string_pretty(report).expect("plain data"),
    )
}

pub fn read_metrics_report(path: &Path) -> Result<MetricsReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))
}

/// Reconstruction run log: seed, iteration count, cost trace, and outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub iterations: usize,
    pub final_cost: f64,
    pub converged: bool,
    pub rate_hz: f64,
    pub n_records: usize,
    pub cost_trace: Vec<f64>,
}

pub fn write_run_log(path: &Path, log: &RunLog) -> Result<()> {
    write_atomic(path, &serde_json::to_string_pretty(log).expect("plain data"))
}

pub fn read_run_log(path: &Path) -> Result<RunLog> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binspace::{bell_state, density_from_amplitudes};
    use crate::source::IndistinguishabilityMatrix;
    use tempfile::tempdir;

    #[test]
    fn density_matrix_roundtrip_bitexact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rho.json");
        let rho = density_from_amplitudes(
            &bell_state(3, &[1.0, -1.0, 1.0]).unwrap(),
            &IndistinguishabilityMatrix::uniform(3, 0.87).unwrap(),
        )
        .unwrap();
        write_density_matrix(&path, &rho).unwrap();
        let back = read_density_matrix(&path).unwrap();
        for (a, b) in rho.matrix().iter().zip(back.matrix().iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn non_hermitian_file_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let file = serde_json::json!({
            "dim": 2,
            "re": [0.5, 0.1, 0.0, 0.5],
            "im": [0.0, 0.0, 0.0, 0.0],
        });
        std::fs::write(&path, file.to_string()).unwrap();
        match read_density_matrix(&path) {
            Err(Error::Parse { reason, .. }) => assert!(reason.contains("Hermitian")),
            other => panic!("expected parse rejection, got {other:?}"),
        }
    }

    #[test]
    fn counts_roundtrip_both_formats() {
        let dir = tempdir().unwrap();
        let records: Vec<CoincidenceRecord> = (0..6)
            .map(|k| CoincidenceRecord {
                setting_id: k / 2 + 1,
                m: (k % 2) as usize,
                n: ((k + 1) % 2) as usize,
                counts: 17 * k as u64,
                expected: 0.0,
                integration_s: 0.125 * (k + 1) as f64,
            })
            .collect();
        for format in [FileFormat::Delimited, FileFormat::Structured] {
            let path = dir.path().join(format!("counts_{format:?}.txt"));
            write_counts(&path, &records, format).unwrap();
            let back = read_counts(&path).unwrap();
            assert_eq!(back, records);
        }
    }

    #[test]
    fn settings_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("settings.csv");
        let settings = crate::tomography::settings_table(3).unwrap();
        write_settings(&path, &settings, FileFormat::Delimited).unwrap();
        let back = read_settings(&path).unwrap();
        assert_eq!(back, settings);
    }

    #[test]
    fn fringe_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("fringe.csv");
        let series: Vec<FringePoint> = (0..12)
            .map(|k| (k as f64 * 0.37, (k as f64 * 0.11).sin().abs() * 1e4))
            .collect();
        write_fringe(&path, &series, FileFormat::Delimited).unwrap();
        assert_eq!(read_fringe(&path).unwrap(), series);
    }

    #[test]
    fn malformed_rows_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        std::fs::write(&path, "setting_id,m,n,counts,integration_s\n1,0,0\n").unwrap();
        assert!(matches!(read_counts(&path), Err(Error::Parse { .. })));
    }
}
