//! Forward model of the detection chain: outcome probabilities, loss and
//! Poisson count statistics, fringe scans, visibility fits, and the on-chip
//! phase-calibration procedure.
//!
//! The probability of a coincidence in bins `(m, n)` behind the two phase
//! modulators is
//!
//! ```text
//! p_mn = Σ_{k,k'} α_k α_k'* I_kk' (V^s_km V^i_kn)* V^s_k'm V^i_k'n
//! ```
//!
//! implemented twice on purpose: once as this direct double sum and once by
//! conjugating the window-embedded density matrix with `U = U_s ⊗ U_i` and
//! reading its diagonal. The two routes are cross-checked in tests.


use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::binspace::{BinGrid, TwoPhotonState};
use crate::eom::{
    projector_family, rf_power_to_index, sideband_matrix, ModulatorCalibration, ModulatorSetting,
};
use crate::linalg::{kron_vec, CMatrix};
use crate::source::{CircuitProgram, IndistinguishabilityMatrix, MultiRingSource};
use crate::{Error, Result};

/// Narrowband filter selecting one bin per arm: a box of half-bandwidth `Δ`
/// that must keep bins unresolved inside and non-overlapping between bins
/// (`2Δ < δ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub signal_bin: i64,
    pub idler_bin: i64,
    pub half_bandwidth_ghz: f64,
}

impl FilterSpec {
    pub fn new(signal_bin: i64, idler_bin: i64, half_bandwidth_ghz: f64, grid: &BinGrid) -> Result<Self> {
        if !half_bandwidth_ghz.is_finite() || half_bandwidth_ghz <= 0.0 {
            return Err(Error::contract("filter bandwidth must be positive"));
        }
        if 2.0 * half_bandwidth_ghz >= grid.spacing_ghz() {
            return Err(Error::contract(format!(
                "filter band 2Δ = {} GHz must stay below the bin spacing {} GHz",
                2.0 * half_bandwidth_ghz,
                grid.spacing_ghz()
            )));
        }
        Ok(Self {
            signal_bin,
            idler_bin,
            half_bandwidth_ghz,
        })
    }
}

/// One tomography/fringe measurement setting: RF powers and phases for the
/// signal and idler modulators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub id: u32,
    pub p_s_dbm: f64,
    pub theta_s_rad: f64,
    pub p_i_dbm: f64,
    pub theta_i_rad: f64,
}

impl MeasurementSetting {
    pub fn new(id: u32, p_s_dbm: f64, theta_s_rad: f64, p_i_dbm: f64, theta_i_rad: f64) -> Result<Self> {
        for v in [p_s_dbm, theta_s_rad, p_i_dbm, theta_i_rad] {
            if !v.is_finite() {
                return Err(Error::contract("measurement setting values must be finite"));
            }
        }
        Ok(Self {
            id,
            p_s_dbm,
            theta_s_rad,
            p_i_dbm,
            theta_i_rad,
        })
    }
}

/// One coincidence record: observed and expected counts for a setting and a
/// bin combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub setting_id: u32,
    pub m: usize,
    pub n: usize,
    pub counts: u64,
    pub expected: f64,
    pub integration_s: f64,
}

/// Losses from the modulators to the detectors, per bin combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LossTable {
    Uniform(f64),
    PerBin(Vec<Vec<f64>>),
}

impl LossTable {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            LossTable::Uniform(l) => {
                if !(0.0..=1.0).contains(l) {
                    return Err(Error::contract(format!("loss {l} outside [0, 1]")));
                }
            }
            LossTable::PerBin(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::dimension(format!("loss table must be {d}x{d}")));
                }
                for r in rows {
                    for l in r {
                        if !(0.0..=1.0).contains(l) {
                            return Err(Error::contract(format!("loss {l} outside [0, 1]")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        match self {
            LossTable::Uniform(l) => *l,
            LossTable::PerBin(rows) => rows[m][n],
        }
    }
}

/// Grid plus the two modulator calibrations: everything needed to turn a
/// measurement setting into sideband matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionModel {
    pub grid: BinGrid,
    pub signal_cal: ModulatorCalibration,
    pub idler_cal: ModulatorCalibration,
}

impl DetectionModel {
    pub fn with_defaults(d: usize) -> Result<Self> {
        Ok(Self {
            grid: BinGrid::with_defaults(d)?,
            signal_cal: ModulatorCalibration::signal_default(),
            idler_cal: ModulatorCalibration::idler_default(),
        })
    }

    /// Translate a settings-table row into per-arm modulator settings.
    pub fn modulators(&self, setting: &MeasurementSetting) -> Result<(ModulatorSetting, ModulatorSetting)> {
        let beta_s = rf_power_to_index(setting.p_s_dbm, &self.signal_cal)?;
        let beta_i = rf_power_to_index(setting.p_i_dbm, &self.idler_cal)?;
        Ok((
            ModulatorSetting::new(beta_s, setting.theta_s_rad)?,
            ModulatorSetting::new(beta_i, setting.theta_i_rad)?,
        ))
    }
}

/// Coincidence probability at window bins `(m, n)` — direct double-sum form.
pub fn outcome_probability(
    model: &DetectionModel,
    state: &TwoPhotonState,
    indist: &IndistinguishabilityMatrix,
    setting: &MeasurementSetting,
    m: i64,
    n: i64,
) -> Result<f64> {
    let (ms, mi) = model.modulators(setting)?;
    outcome_probability_with_modulators(model, state, indist, &ms, &mi, m, n)
}

/// [`outcome_probability`] with explicit modulator settings (used by fringe
/// scans that drive at `β*` directly).
pub fn outcome_probability_with_modulators(
    model: &DetectionModel,
    state: &TwoPhotonState,
    indist: &IndistinguishabilityMatrix,
    setting_s: &ModulatorSetting,
    setting_i: &ModulatorSetting,
    m: i64,
    n: i64,
) -> Result<f64> {
    let d = state.dim();
    if indist.dim() != d {
        return Err(Error::dimension(
            "indistinguishability matrix does not match the state dimension",
        ));
    }
    model.grid.window_offset(m)?;
    model.grid.window_offset(n)?;
    let vs = sideband_matrix(setting_s, &model.grid)?;
    let vi = sideband_matrix(setting_i, &model.grid)?;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..d {
        let f_k = vs.entry(k as i64, m) * vi.entry(k as i64, n);
        for kp in 0..d {
            let f_kp = vs.entry(kp as i64, m) * vi.entry(kp as i64, n);
            total += state.amplitude(k)
                * state.amplitude(kp).conj()
                * indist.entry(k, kp)
                * f_k.conj()
                * f_kp;
        }
    }
    Ok(total.re.max(0.0))
}

/// Same probability via the density-matrix route: embed `ρ'` on the window
/// joint space, conjugate with `U = U_s ⊗ U_i`, read the `(m, n)` diagonal.
/// Kept independent of the double-sum form deliberately.
pub fn outcome_probability_matrix_route(
    model: &DetectionModel,
    state: &TwoPhotonState,
    indist: &IndistinguishabilityMatrix,
    setting: &MeasurementSetting,
    m: i64,
    n: i64,
) -> Result<f64> {
    let (ms, mi) = model.modulators(setting)?;
    let d = state.dim();
    let fam = projector_family(&ms, &mi, &model.grid)?;
    let nw = model.grid.window_len();
    let off = model.grid.guard_bins();

    let mut rho = CMatrix::zeros(nw * nw, nw * nw);
    for i in 0..d {
        for k in 0..d {
            let row = (i + off) * nw + (i + off);
            let col = (k + off) * nw + (k + off);
            rho[(row, col)] = indist.entry(i, k) * state.amplitude(i) * state.amplitude(k).conj();
        }
    }
    let phi = kron_vec(&fam.signal.analysis_vector(m), &fam.idler.analysis_vector(n));
    let chi = &rho * &phi;
    Ok(phi.dotc(&chi).re.max(0.0))
}

/// Expected coincidence counts `C = R · L · p · t`.
pub fn expected_counts(p: f64, rate_hz: f64, loss: f64, integration_s: f64) -> Result<f64> {
    if [p, rate_hz, integration_s].iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::contract("counts model inputs must be non-negative"));
    }
    if !(0.0..=1.0).contains(&loss) {
        return Err(Error::contract(format!("loss {loss} outside [0, 1]")));
    }
    Ok(rate_hz * loss * p * integration_s)
}

/// Deterministic per-record seed, keyed by run seed, setting id, and bins so
/// any single record can be regenerated in isolation.
pub fn record_seed(run_seed: u64, setting_id: u32, m: u64, n: u64) -> u64 {
    // splitmix64 over the packed key
    let mut z = run_seed
        ^ (setting_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ m.wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ n.wrapping_mul(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Poisson draw with the given expectation, deterministic in the seed.
pub fn sample_counts(expected: f64, seed: u64) -> Result<u64> {
    if !expected.is_finite() || expected < 0.0 {
        return Err(Error::contract(format!(
            "expected counts must be non-negative and finite, got {expected}"
        )));
    }
    if expected == 0.0 {
        return Ok(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw: f64 = Poisson::new(expected)
        .map_err(|e| Error::contract(format!("invalid Poisson rate: {e}")))?
        .sample(&mut rng);
    Ok(draw.round() as u64)
}

/// One fringe sample: common RF phase and the model count rate.
pub type FringePoint = (f64, f64);

/// Two-photon interference fringe between a bin pair: both modulators at the
/// equal-sideband index, common RF phase `θ̄` scanned, coincidences read at
/// the pair's lower bin (or, for half-spacing drive, at the re-gridded
/// midpoint bin). Rates are probabilities per generated pair.
pub fn fringe_scan(
    model: &DetectionModel,
    state: &TwoPhotonState,
    indist: &IndistinguishabilityMatrix,
    pair: (usize, usize),
    thetas: &[f64],
    half_spacing: bool,
) -> Result<Vec<FringePoint>> {
    let (j, k) = (pair.0.min(pair.1), pair.0.max(pair.1));
    if j == k || k >= state.dim() {
        return Err(Error::contract(format!(
            "fringe pair ({}, {}) must name two distinct bins of the state",
            pair.0, pair.1
        )));
    }
    if half_spacing {
        if k != j + 1 {
            return Err(Error::contract(format!(
                "half-spacing fringes read the midpoint of adjacent bins; ({j}, {k}) are not adjacent"
            )));
        }
        let fine_model = DetectionModel {
            grid: model.grid.half_spacing_grid()?,
            signal_cal: model.signal_cal.clone(),
            idler_cal: model.idler_cal.clone(),
        };
        let fine_state = embed_half_spacing_state(state)?;
        let fine_indist = embed_half_spacing_indist(indist);
        let readout = (2 * j + 1) as i64;
        // Each photon hops one fine bin in both interfering paths, so the
        // fringe runs at twice the drive phase; drive at θ̄/2 and record
        // against the accumulated two-photon phase θ̄ to keep the common
        // 1 + V cos(2θ̄) form.
        let drive: Vec<f64> = thetas.iter().map(|t| t / 2.0).collect();
        let scanned = scan_at(&fine_model, &fine_state, &fine_indist, readout, &drive)?;
        return Ok(thetas
            .iter()
            .zip(scanned)
            .map(|(&t, (_, rate))| (t, rate))
            .collect());
    }
    scan_at(model, state, indist, j as i64, thetas)
}

fn scan_at(
    model: &DetectionModel,
    state: &TwoPhotonState,
    indist: &IndistinguishabilityMatrix,
    readout: i64,
    thetas: &[f64],
) -> Result<Vec<FringePoint>> {
    let mut out = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let setting = ModulatorSetting::equal_sideband(theta);
        let p = outcome_probability_with_modulators(
            model, state, indist, &setting, &setting, readout, readout,
        )?;
        out.push((theta, p));
    }
    Ok(out)
}

fn embed_half_spacing_state(state: &TwoPhotonState) -> Result<TwoPhotonState> {
    let d = state.dim();
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * d - 1];
    for k in 0..d {
        amps[2 * k] = state.amplitude(k);
    }
    TwoPhotonState::new(amps)
}

fn embed_half_spacing_indist(indist: &IndistinguishabilityMatrix) -> IndistinguishabilityMatrix {
    let d = indist.dim();
    let fine = 2 * d - 1;
    let mat = CMatrix::from_fn(fine, fine, |r, c| {
        if r == c {
            Complex64::new(1.0, 0.0)
        } else if r % 2 == 0 && c % 2 == 0 {
            indist.entry(r / 2, c / 2)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    IndistinguishabilityMatrix::try_new(mat).expect("embedding preserves the Gram structure")
}

/// Least-squares fit of `a + b cos(2θ̄ + φ₀)` to a fringe series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub visibility: f64,
    pub offset: f64,
    pub phase: f64,
    pub stderr: f64,
}

/// Fit `rate = a (1 + V cos(2θ̄ + φ₀))` by linear least squares on the
/// regressors `(1, cos 2θ̄, sin 2θ̄)`.
pub fn fit_visibility(series: &[FringePoint]) -> Result<FringeFit> {
    let n = series.len();
    if n < 8 {
        return Err(Error::Fit(format!("need at least 8 fringe points, got {n}")));
    }
    let (tmin, tmax) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
        (acc.0.min(p.0), acc.1.max(p.0))
    });
    if tmax - tmin < std::f64::consts::PI - 1e-9 {
        return Err(Error::Fit(format!(
            "fringe scan must span at least one period (π), got {:.4}",
            tmax - tmin
        )));
    }
    let mean = series.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let var = series.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / n as f64;
    if !(var.is_finite()) || mean.abs() < 1e-300 && var == 0.0 {
        return Err(Error::Fit("degenerate fringe series".into()));
    }

    // normal equations for (a, b, c) with y = a + b cos2θ + c sin2θ
    let mut xtx = [[0.0_f64; 3]; 3];
    let mut xty = [0.0_f64; 3];
    for &(theta, y) in series {
        let row = [1.0, (2.0 * theta).cos(), (2.0 * theta).sin()];
        for i in 0..3 {
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * y;
        }
    }
    let cov = invert3(&xtx).ok_or_else(|| Error::Fit("degenerate fringe design matrix".into()))?;
    let mut beta = [0.0_f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            beta[i] += cov[i][j] * xty[j];
        }
    }
    let (a, b, c) = (beta[0], beta[1], beta[2]);
    if a <= 0.0 {
        return Err(Error::Fit(format!("non-positive fringe offset {a}")));
    }
    let amp = (b * b + c * c).sqrt();
    let visibility = amp / a;
    let phase = (-c).atan2(b);

    // residual variance and the delta-method error on V = sqrt(b²+c²)/a
    let rss: f64 = series
        .iter()
        .map(|&(theta, y)| {
            let fit = a + b * (2.0 * theta).cos() + c * (2.0 * theta).sin();
            (y - fit).powi(2)
        })
        .sum();
    let dof = (n - 3).max(1) as f64;
    let s2 = rss / dof;
    let grad = if amp > 0.0 {
        [-visibility / a, b / (a * amp), c / (a * amp)]
    } else {
        [0.0, 1.0 / a, 1.0 / a]
    };
    let mut var_v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            var_v += grad[i] * s2 * cov[i][j] * grad[j];
        }
    }
    Ok(FringeFit {
        visibility,
        offset: a,
        phase,
        stderr: var_v.max(0.0).sqrt(),
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b, c, d) = (
                m[(j + 1) % 3][(i + 1) % 3],
                m[(j + 2) % 3][(i + 2) % 3],
                m[(j + 1) % 3][(i + 2) % 3],
                m[(j + 2) % 3][(i + 1) % 3],
            );
            inv[i][j] = (a * b - c * d) * inv_det;
        }
    }
    Some(inv)
}

/// Fringe access the calibration loop needs: scan the interference fringe of
/// one adjacent ring pair at given nominal phase-shifter settings.
pub trait FringeSimulator {
    fn rings(&self) -> usize;
    /// Rates over `thetas` for the fringe between rings `pair` and `pair+1`,
    /// pumping only those two rings.
    fn scan_pair(&mut self, ps_phase: &[f64], pair: usize, thetas: &[f64]) -> Result<Vec<FringePoint>>;
}

/// The real-model fringe simulator: a multi-ring source (with its crosstalk)
/// feeding the detection chain.
pub struct SourceFringeSimulator {
    pub source: MultiRingSource,
    pub indist: IndistinguishabilityMatrix,
    pub model: DetectionModel,
    pub pump_power_mw: f64,
}

impl SourceFringeSimulator {
    pub fn new(source: MultiRingSource, indist: IndistinguishabilityMatrix, model: DetectionModel) -> Self {
        Self {
            source,
            indist,
            model,
            pump_power_mw: 1.0,
        }
    }
}

impl FringeSimulator for SourceFringeSimulator {
    fn rings(&self) -> usize {
        self.source.dim()
    }

    fn scan_pair(&mut self, ps_phase: &[f64], pair: usize, thetas: &[f64]) -> Result<Vec<FringePoint>> {
        let n = self.rings();
        let mut program = CircuitProgram::uniform(n, self.pump_power_mw);
        program.ps_phase_rad = ps_phase.to_vec();
        for (k, on) in program.ring_on.iter_mut().enumerate() {
            *on = k == pair || k == pair + 1;
        }
        let state = self.source.amplitudes(&program)?;
        fringe_scan(&self.model, &state, &self.indist, (pair, pair + 1), thetas, false)
    }
}

/// Options for the two-pass phase calibration.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationOptions {
    pub max_passes: usize,
    pub scan_points: usize,
    /// Largest residual fringe-phase misalignment accepted at the end (rad).
    pub residual_tol: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            max_passes: 2,
            scan_points: 16,
            residual_tol: 0.02,
        }
    }
}

/// Align the biphoton emission phases to a target sign pattern by chaining
/// pairwise fringe alignments, repeated to beat thermal crosstalk.
///
/// For equal adjacent signs the pair fringe is pushed to have its maximum at
/// the common reference phase; for opposite signs, its minimum. Returns the
/// nominal phase-shifter settings.
pub fn calibrate_phases(
    target_signs: &[f64],
    sim: &mut dyn FringeSimulator,
    initial_ps: &[f64],
    opts: &CalibrationOptions,
) -> Result<Vec<f64>> {
    let n = sim.rings();
    if target_signs.len() != n {
        return Err(Error::contract(format!(
            "target pattern names {} rings but the source has {n}",
            target_signs.len()
        )));
    }
    if n < 2 {
        return Err(Error::contract("calibration needs at least two rings"));
    }
    if initial_ps.len() != n - 1 {
        return Err(Error::contract(format!(
            "expected {} initial phase-shifter settings",
            n - 1
        )));
    }
    for s in target_signs {
        if (s.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::contract("target signs must be ±1"));
        }
    }
    let thetas: Vec<f64> = (0..opts.scan_points)
        .map(|k| std::f64::consts::PI * k as f64 / (opts.scan_points as f64 - 1.0))
        .collect();
    let mut ps = initial_ps.to_vec();
    for _pass in 0..opts.max_passes {
        for pair in 0..n - 1 {
            let series = sim.scan_pair(&ps, pair, &thetas)?;
            let fit = fit_visibility(&series)?;
            let target = pair_target_phase(target_signs, pair);
            // fringe ∝ 1 + V cos(2θ̄ + φ); move ring pair+1 by (τ - φ)/2
            let delta = wrap_angle(target - fit.phase) / 2.0;
            ps[pair] += delta;
        }
    }
    // verify alignment
    let mut residuals = Vec::with_capacity(n - 1);
    for pair in 0..n - 1 {
        let series = sim.scan_pair(&ps, pair, &thetas)?;
        let fit = fit_visibility(&series)?;
        residuals.push(wrap_angle(pair_target_phase(target_signs, pair) - fit.phase));
    }
    if residuals.iter().any(|r| r.abs() > opts.residual_tol) {
        return Err(Error::CalibrationDiverged {
            passes: opts.max_passes,
            residuals,
        });
    }
    Ok(ps)
}

fn pair_target_phase(signs: &[f64], pair: usize) -> f64 {
    if signs[pair] * signs[pair + 1] > 0.0 {
        0.0
    } else {
        std::f64::consts::PI
    }
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{bessel_j, equal_sideband_index};
    use crate::binspace::{bell_state, density_from_amplitudes, fidelity, FidelityConvention};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn model(d: usize) -> DetectionModel {
        DetectionModel::with_defaults(d).unwrap()
    }

    fn z_setting(id: u32) -> MeasurementSetting {
        MeasurementSetting::new(id, 0.0, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn modulators_off_give_diagonal_populations() {
        let m = model(3);
        let state = bell_state(3, &[1.0, -1.0, 1.0]).unwrap();
        let indist = IndistinguishabilityMatrix::uniform(3, 0.8).unwrap();
        for bin_m in 0..3i64 {
            for bin_n in 0..3i64 {
                let p = outcome_probability(&m, &state, &indist, &z_setting(1), bin_m, bin_n)
                    .unwrap();
                let expect = if bin_m == bin_n { 1.0 / 3.0 } else { 0.0 };
                assert_abs_diff_eq!(p, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fringe_law_constant_and_visibility() {
        // p(θ̄) = J̄⁴ (1 + I cos 2θ̄) for the two-bin state read at the lower bin
        let m = model(2);
        let state = bell_state(2, &[1.0, 1.0]).unwrap();
        let i_val = 0.9;
        let indist = IndistinguishabilityMatrix::uniform(2, i_val).unwrap();
        let jbar = bessel_j(0, equal_sideband_index()).unwrap();
        for theta in [0.0, 0.4, 1.1, std::f64::consts::FRAC_PI_2] {
            let setting = ModulatorSetting::equal_sideband(theta);
            let p = outcome_probability_with_modulators(
                &m, &state, &indist, &setting, &setting, 0, 0,
            )
            .unwrap();
            let expect = jbar.powi(4) * (1.0 + i_val * (2.0 * theta).cos());
            assert_abs_diff_eq!(p, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn probability_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..40 {
            let d = 2 + rng.gen_range(0..3);
            let m = model(d);
            let amps: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let state = TwoPhotonState::new(amps).unwrap();
            let g = CMatrix::from_fn(d, d, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let gram = &g * g.adjoint();
            let diag: Vec<f64> = (0..d).map(|i| gram[(i, i)].re.sqrt()).collect();
            let normed = CMatrix::from_fn(d, d, |i, k| gram[(i, k)] / (diag[i] * diag[k]));
            let indist = IndistinguishabilityMatrix::try_new(normed).unwrap();
            let setting = MeasurementSetting::new(
                1,
                if rng.gen::<bool>() { 22.1 } else { 0.0 },
                rng.gen::<f64>() * 6.0 - 3.0,
                24.3,
                rng.gen::<f64>() * 6.0 - 3.0,
            )
            .unwrap();
            let bin_m = rng.gen_range(-(m.grid.guard_bins() as i64)..=m.grid.window_hi());
            let bin_n = rng.gen_range(-(m.grid.guard_bins() as i64)..=m.grid.window_hi());
            let p1 = outcome_probability(&m, &state, &indist, &setting, bin_m, bin_n).unwrap();
            let p2 = outcome_probability_matrix_route(&m, &state, &indist, &setting, bin_m, bin_n)
                .unwrap();
            assert!((p1 - p2).abs() <= 1e-10, "routes differ: {p1} vs {p2}");
        }
    }

    #[test]
    fn probability_conservation_on_window() {
        let m = model(2);
        let state = bell_state(2, &[1.0, -1.0]).unwrap();
        let indist = IndistinguishabilityMatrix::uniform(2, 0.87).unwrap();
        let setting = MeasurementSetting::new(2, 22.1, 0.3, 24.3, -0.7).unwrap();
        let mut total = 0.0;
        for bin_m in m.grid.window_lo()..=m.grid.window_hi() {
            for bin_n in m.grid.window_lo()..=m.grid.window_hi() {
                total += outcome_probability(&m, &state, &indist, &setting, bin_m, bin_n).unwrap();
            }
        }
        assert!(total <= 1.0 + 1e-9);
        assert!(1.0 - total <= 2.0 * crate::eom::DEFAULT_TRUNCATION, "deficit {}", 1.0 - total);
    }

    #[test]
    fn fringe_symmetry_period_pi() {
        let m = model(2);
        let state = bell_state(2, &[1.0, 1.0]).unwrap();
        let indist = IndistinguishabilityMatrix::uniform(2, 0.87).unwrap();
        let thetas = [0.1, 0.1 + std::f64::consts::PI];
        let series = fringe_scan(&m, &state, &indist, (0, 1), &thetas, false).unwrap();
        assert_abs_diff_eq!(series[0].1, series[1].1, epsilon = 1e-12);
    }

    #[test]
    fn expected_counts_arithmetic() {
        assert_eq!(expected_counts(0.0, 1e5, 0.3, 10.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            expected_counts(0.5, 1e5, 0.01, 10.0).unwrap(),
            5000.0,
            epsilon = 1e-9
        );
        assert!(expected_counts(0.5, 1e5, 1.5, 10.0).is_err());
    }

    #[test]
    fn per_bin_loss_scales_count_ratios() {
        let loss = LossTable::PerBin(vec![vec![0.01, 0.02], vec![0.03, 0.04]]);
        loss.validate(2).unwrap();
        let c00 = expected_counts(0.5, 1e5, loss.get(0, 0), 1.0).unwrap();
        let c11 = expected_counts(0.5, 1e5, loss.get(1, 1), 1.0).unwrap();
        assert_abs_diff_eq!(c11 / c00, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn poisson_sampling_deterministic_and_calibrated() {
        assert_eq!(sample_counts(0.0, 42).unwrap(), 0);
        let a = sample_counts(1e6, 7).unwrap();
        let b = sample_counts(1e6, 7).unwrap();
        assert_eq!(a, b);
        assert!((a as f64 - 1e6).abs() < 5.0 * 1e3); // 5σ

        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for trial in 0..n {
            let seed = record_seed(99, 1, trial as u64, 0);
            let c = sample_counts(100.0, seed).unwrap() as f64;
            sum += c;
            sum2 += c * c;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((mean - 100.0).abs() < 1.0, "mean {mean}");
        assert!((var - 100.0).abs() < 3.0, "var {var}");
    }

    #[test]
    fn record_seeds_distinct() {
        let s1 = record_seed(1, 2, 3, 4);
        let s2 = record_seed(1, 2, 4, 3);
        let s3 = record_seed(1, 3, 3, 4);
        assert_ne!(s1, s2);
        assert_ne!(s1, s3);
    }

    #[test]
    fn visibility_equals_indistinguishability() {
        let m = model(2);
        let thetas: Vec<f64> = (0..36).map(|k| k as f64 * std::f64::consts::PI / 18.0).collect();
        for i_val in [0.5, 0.87, 0.9, 1.0] {
            let state = bell_state(2, &[1.0, 1.0]).unwrap();
            let indist = IndistinguishabilityMatrix::uniform(2, i_val).unwrap();
            let series = fringe_scan(&m, &state, &indist, (0, 1), &thetas, false).unwrap();
            let fit = fit_visibility(&series).unwrap();
            assert_abs_diff_eq!(fit.visibility, i_val, epsilon = 1e-6);
        }
    }

    #[test]
    fn unbalanced_amplitudes_reduce_visibility() {
        // |α_j|² = 0.8, |α_k|² = 0.2 → V = 2|α_j α_k| = 0.8
        let m = model(2);
        let state = TwoPhotonState::new(vec![
            Complex64::new(0.8f64.sqrt(), 0.0),
            Complex64::new(0.2f64.sqrt(), 0.0),
        ])
        .unwrap();
        let indist = IndistinguishabilityMatrix::perfect(2);
        let thetas: Vec<f64> = (0..24).map(|k| k as f64 * std::f64::consts::PI / 12.0).collect();
        let series = fringe_scan(&m, &state, &indist, (0, 1), &thetas, false).unwrap();
        let fit = fit_visibility(&series).unwrap();
        assert_abs_diff_eq!(fit.visibility, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn half_spacing_fringe_visibility() {
        let m = model(4);
        let state = TwoPhotonState::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .unwrap();
        let indist = IndistinguishabilityMatrix::uniform(4, 0.95).unwrap();
        let thetas: Vec<f64> = (0..24).map(|k| k as f64 * std::f64::consts::PI / 12.0).collect();
        let series = fringe_scan(&m, &state, &indist, (2, 3), &thetas, true).unwrap();
        let fit = fit_visibility(&series).unwrap();
        assert_abs_diff_eq!(fit.visibility, 0.95, epsilon = 1e-6);
        assert!(fit.visibility > 1.0 / 2f64.sqrt());

        // non-adjacent pair rejected in half-spacing mode
        assert!(fringe_scan(&m, &state, &indist, (1, 3), &thetas, true).is_err());
    }

    #[test]
    fn synthetic_fit_roundtrip() {
        let thetas: Vec<f64> = (0..36).map(|k| k as f64 * std::f64::consts::PI / 18.0).collect();
        let exact: Vec<FringePoint> = thetas
            .iter()
            .map(|&t| (t, 1.0 + (2.0 * t).cos()))
            .collect();
        let fit = fit_visibility(&exact).unwrap();
        assert_abs_diff_eq!(fit.visibility, 1.0, epsilon = 1e-9);

        let v087: Vec<FringePoint> = thetas
            .iter()
            .map(|&t| (t, 1.0 + 0.87 * (2.0 * t).cos()))
            .collect();
        let fit = fit_visibility(&v087).unwrap();
        assert_abs_diff_eq!(fit.visibility, 0.87, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.phase, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn fit_preconditions() {
        let short: Vec<FringePoint> = (0..4).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(fit_visibility(&short), Err(Error::Fit(_))));
        let narrow: Vec<FringePoint> =
            (0..10).map(|k| (k as f64 * 0.1, 1.0 + k as f64)).collect();
        assert!(matches!(fit_visibility(&narrow), Err(Error::Fit(_))));
        let flat: Vec<FringePoint> = (0..12)
            .map(|k| (k as f64 * std::f64::consts::PI / 6.0, 0.0))
            .collect();
        assert!(matches!(fit_visibility(&flat), Err(Error::Fit(_))));
    }

    #[test]
    fn noisy_fit_within_error_bars() {
        let thetas: Vec<f64> = (0..36).map(|k| k as f64 * std::f64::consts::PI / 18.0).collect();
        let truth = 0.87;
        let mut hits = 0;
        let trials = 100;
        for seed in 0..trials {
            let noisy: Vec<FringePoint> = thetas
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let expect = 1e4 * (1.0 + truth * (2.0 * t).cos());
                    let c = sample_counts(expect, record_seed(seed, 0, i as u64, 0)).unwrap();
                    (t, c as f64)
                })
                .collect();
            let fit = fit_visibility(&noisy).unwrap();
            if (fit.visibility - truth).abs() <= 3.0 * fit.stderr {
                hits += 1;
            }
        }
        assert!(hits >= 99, "only {hits}/{trials} fits within 3σ");
    }

    fn device_source(crosstalk: f64) -> MultiRingSource {
        let rings: Vec<crate::source::RingSpec> = (0..4)
            .map(|k| {
                crate::source::RingSpec::device_default(
                    193_400.0 + 15.0 * k as f64,
                    192_900.0 - 15.0 * k as f64,
                )
            })
            .collect();
        MultiRingSource::new(rings, crosstalk).unwrap()
    }

    #[test]
    fn calibration_zero_crosstalk_single_pass() {
        let source = device_source(0.0);
        let indist = IndistinguishabilityMatrix::perfect(4);
        let mut sim = SourceFringeSimulator::new(source.clone(), indist.clone(), model(4));
        let target = [1.0, 1.0, 1.0, 1.0];
        let opts = CalibrationOptions {
            max_passes: 1,
            ..Default::default()
        };
        let init = [1.3, -0.4, 2.2];
        let ps = calibrate_phases(&target, &mut sim, &init, &opts).unwrap();
        let mut program = CircuitProgram::uniform(4, 1.0);
        program.ps_phase_rad = ps;
        let state = source.amplitudes(&program).unwrap();
        let rho = density_from_amplitudes(&state, &indist).unwrap();
        let target_rho = bell_state(4, &target).unwrap().density();
        let f = fidelity(&rho, &target_rho, FidelityConvention::Overlap).unwrap();
        assert!(f >= 0.9999, "fidelity {f}");
    }

    #[test]
    fn calibration_two_pass_with_crosstalk() {
        let source = device_source(0.05);
        let indist = IndistinguishabilityMatrix::perfect(4);
        for (pattern, name) in [([1.0, 1.0, 1.0, 1.0], "phi5"), ([1.0, -1.0, -1.0, 1.0], "phi6")]
        {
            let mut sim = SourceFringeSimulator::new(source.clone(), indist.clone(), model(4));
            let init = [0.9, 2.8, -1.9];
            let ps =
                calibrate_phases(&pattern, &mut sim, &init, &CalibrationOptions::default())
                    .unwrap();
            let mut program = CircuitProgram::uniform(4, 1.0);
            program.ps_phase_rad = ps;
            let state = source.amplitudes(&program).unwrap();
            let rho = density_from_amplitudes(&state, &indist).unwrap();
            let target_rho = bell_state(4, &pattern).unwrap().density();
            let f = fidelity(&rho, &target_rho, FidelityConvention::Overlap).unwrap();
            assert!(f >= 0.999, "{name}: fidelity {f}");
        }
    }

    #[test]
    fn filter_band_must_fit_between_bins() {
        let grid = BinGrid::with_defaults(2).unwrap();
        assert!(FilterSpec::new(0, 0, 5.0, &grid).is_ok());
        assert!(FilterSpec::new(0, 0, 8.0, &grid).is_err());
    }
}
