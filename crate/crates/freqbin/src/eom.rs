//! Electro-optic phase-modulator model.
//!
//! A modulator driven at the bin spacing scatters bin `m` into bin `r` with
//! amplitude `V_mr = J_{r-m}(β) e^{i(r-m)θ}` — a circulant matrix of Bessel
//! coefficients. The analysis vector behind detection in bin `m` is column
//! `m` of `V`: at the equal-sideband index `β*` (where `J_0 = J_1`) and
//! suitable RF phases this realizes the superposition projectors used for
//! fringes, tomography, and the mutually unbiased bases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, equal_sideband_index};
use crate::binspace::BinGrid;
use crate::linalg::{CMatrix, CVector};
use crate::{Error, Result};

/// Default sideband truncation residue accepted on the window.
pub const DEFAULT_TRUNCATION: f64 = 1e-6;

/// RF drive frequency as a multiple of the bin spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriveMultiple {
    /// Standard scans: drive at the bin spacing `δ`.
    Unit,
    /// Half-spacing fringes: drive at `δ/2` (handled by re-gridding).
    Half,
}

/// One phase modulator's drive: modulation index, RF phase, drive multiple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatorSetting {
    pub beta: f64,
    pub theta: f64,
    pub drive: DriveMultiple,
}

impl ModulatorSetting {
    pub fn new(beta: f64, theta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::contract(format!(
                "modulation index must be non-negative, got {beta}"
            )));
        }
        Ok(Self {
            beta,
            theta,
            drive: DriveMultiple::Unit,
        })
    }

    /// Modulator effectively off.
    pub fn off() -> Self {
        Self {
            beta: 0.0,
            theta: 0.0,
            drive: DriveMultiple::Unit,
        }
    }

    /// Equal-sideband drive (`β*`) at the given RF phase.
    pub fn equal_sideband(theta: f64) -> Self {
        Self {
            beta: equal_sideband_index(),
            theta,
            drive: DriveMultiple::Unit,
        }
    }
}

/// RF power to modulation index calibration: `β = κ √P` with the anchor pair
/// from the measurement-settings table. Rows listing 0 dBm mean "modulator
/// off" (computational-basis measurement), not a point on the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatorCalibration {
    /// Index per √mW.
    pub kappa: f64,
    pub anchor_power_dbm: f64,
    pub anchor_beta: f64,
    /// Interpret a power of exactly 0 dBm as the modulator being off.
    pub off_at_zero_dbm: bool,
}

impl ModulatorCalibration {
    pub fn from_anchor(anchor_power_dbm: f64, anchor_beta: f64) -> Result<Self> {
        if !anchor_beta.is_finite() || anchor_beta <= 0.0 {
            return Err(Error::contract(format!(
                "anchor modulation index must be positive, got {anchor_beta}"
            )));
        }
        let kappa = anchor_beta / 10f64.powf(anchor_power_dbm / 20.0);
        let cal = Self {
            kappa,
            anchor_power_dbm,
            anchor_beta,
            off_at_zero_dbm: true,
        };
        debug_assert!((cal.index_for(anchor_power_dbm) - anchor_beta).abs() < 1e-6);
        Ok(cal)
    }

    /// Signal-arm calibration: 22.1 dBm drives the equal-sideband index.
    pub fn signal_default() -> Self {
        Self::from_anchor(22.1, equal_sideband_index()).unwrap()
    }

    /// Idler-arm calibration: 24.3 dBm for the same index (the idler
    /// modulator is less efficient).
    pub fn idler_default() -> Self {
        Self::from_anchor(24.3, equal_sideband_index()).unwrap()
    }

    fn index_for(&self, power_dbm: f64) -> f64 {
        // β proportional to RF voltage: κ √(10^(P/10)) = κ 10^(P/20)
        self.kappa * 10f64.powf(power_dbm / 20.0)
    }
}

/// Modulation index for an RF power in dBm under a calibration.
pub fn rf_power_to_index(power_dbm: f64, cal: &ModulatorCalibration) -> Result<f64> {
    if !power_dbm.is_finite() {
        return Err(Error::contract(format!(
            "RF power must be finite, got {power_dbm}"
        )));
    }
    if cal.off_at_zero_dbm && power_dbm == 0.0 {
        return Ok(0.0);
    }
    Ok(cal.index_for(power_dbm))
}

/// Windowed circulant sideband matrix `V_mr = J_{r-m}(β) e^{i(r-m)θ}` over
/// the grid's extended bin window.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandMatrix {
    window_lo: i64,
    window_hi: i64,
    v: CMatrix,
    truncation_residue: f64,
}

impl SidebandMatrix {
    pub fn window(&self) -> (i64, i64) {
        (self.window_lo, self.window_hi)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    /// Row-norm deficit `1 - Σ_{|n|<=guard} J_n²` of the truncated lattice.
    pub fn truncation_residue(&self) -> f64 {
        self.truncation_residue
    }

    /// Entry by window bin labels.
    pub fn entry(&self, m: i64, r: i64) -> Complex64 {
        let lo = self.window_lo;
        self.v[((m - lo) as usize, (r - lo) as usize)]
    }

    /// Analysis vector behind detection in window bin `m`: column `m` of `V`
    /// (`U†|m> = Σ_k V_km |k>`).
    pub fn analysis_vector(&self, m: i64) -> CVector {
        let col = (m - self.window_lo) as usize;
        self.v.column(col).into_owned()
    }

    /// Analysis vector restricted to the computational bins `0..d`.
    pub fn analysis_vector_computational(&self, m: i64, d: usize) -> CVector {
        let col = (m - self.window_lo) as usize;
        let off = (-self.window_lo) as usize;
        CVector::from_fn(d, |k, _| self.v[(off + k, col)])
    }
}

/// Build the windowed sideband matrix for a modulator setting on a grid.
///
/// Errors when the guard window cannot hold the sideband content to the
/// default truncation residue; the error names the guard count needed.
pub fn sideband_matrix(setting: &ModulatorSetting, grid: &BinGrid) -> Result<SidebandMatrix> {
    sideband_matrix_with_truncation(setting, grid, DEFAULT_TRUNCATION)
}

/// [`sideband_matrix`] with an explicit truncation budget.
pub fn sideband_matrix_with_truncation(
    setting: &ModulatorSetting,
    grid: &BinGrid,
    eps_trunc: f64,
) -> Result<SidebandMatrix> {
    let guard = grid.guard_bins();
    let captured: f64 = (-(guard as i32)..=guard as i32)
        .map(|n| bessel_j(n, setting.beta).map(|j| j * j))
        .sum::<Result<f64>>()?;
    let residue = (1.0 - captured).max(0.0);
    if residue > eps_trunc {
        let mut needed = guard;
        let mut sum = captured;
        while sum < 1.0 - eps_trunc {
            needed += 1;
            let j = bessel_j(needed as i32, setting.beta)?;
            sum += 2.0 * j * j;
        }
        return Err(Error::WindowTooSmall {
            residue,
            limit: eps_trunc,
            required_guard: needed,
        });
    }

    let n = grid.window_len();
    let mut v = CMatrix::zeros(n, n);
    for m in 0..n {
        for r in 0..n {
            let order = r as i64 - m as i64;
            let j = bessel_j(order as i32, setting.beta)?;
            v[(m, r)] = Complex64::from_polar(1.0, order as f64 * setting.theta).scale(j);
        }
    }
    Ok(SidebandMatrix {
        window_lo: grid.window_lo(),
        window_hi: grid.window_hi(),
        v,
        truncation_residue: residue,
    })
}

/// Joint signal (x) idler transform on the windowed two-photon space.
///
/// The effective projector for outcome `(m, n)` is the tensor product of the
/// two analysis columns; restricted to the computational subspace its norm is
/// at most 1 (sidebands scattered out of the window are loss).
#[derive(Debug, Clone)]
pub struct ProjectorFamily {
    pub signal: SidebandMatrix,
    pub idler: SidebandMatrix,
    dim: usize,
}

impl ProjectorFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Joint analysis vector for outcome `(m, n)` (signal bin `m`, idler bin
    /// `n`), restricted to the computational `D²` subspace.
    pub fn analysis_vector(&self, m: i64, n: i64) -> CVector {
        let ws = self.signal.analysis_vector_computational(m, self.dim);
        let wi = self.idler.analysis_vector_computational(n, self.dim);
        crate::linalg::kron_vec(&ws, &wi)
    }

    /// Full windowed joint matrix `V_s (x) V_i` (the matrix of `U†`).
    pub fn joint_matrix(&self) -> CMatrix {
        crate::linalg::kron(self.signal.matrix(), self.idler.matrix())
    }
}

/// Assemble the joint transform `U = U_s (x) U_i` for a pair of modulator
/// settings on a common grid.
pub fn projector_family(
    setting_s: &ModulatorSetting,
    setting_i: &ModulatorSetting,
    grid: &BinGrid,
) -> Result<ProjectorFamily> {
    Ok(ProjectorFamily {
        signal: sideband_matrix(setting_s, grid)?,
        idler: sideband_matrix(setting_i, grid)?,
        dim: grid.dim(),
    })
}

/// Single sideband coefficient `J_n(β) e^{i n θ}` for a bin shift `n`.
pub fn sideband_coefficient(n: i32, beta: f64, theta: f64) -> Result<Complex64> {
    let j = bessel_j(n, beta)?;
    Ok(Complex64::from_polar(1.0, n as f64 * theta).scale(j))
}

/// One vector of a measurement basis together with the modulator setting
/// that realizes projection onto it.
#[derive(Debug, Clone)]
pub struct MubVector {
    pub vector: CVector,
    pub setting: ModulatorSetting,
    /// Computational bin read out behind the modulator.
    pub readout_bin: usize,
}

/// A named measurement basis with per-vector modulator settings.
#[derive(Debug, Clone)]
pub struct MubBasis {
    pub name: String,
    pub vectors: Vec<MubVector>,
}

impl MubBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// The mutually unbiased bases a single phase modulator can project onto.
///
/// `D = 2`: Z plus the Pauli X and Y eigenbases at `β*`, phases `{0, π}` and
/// `{π/2, 3π/2}` read at the lower bin. `D = 3`: Z plus `I⁻F` (the Fourier
/// basis with a sign flip on the last component, because `J_{-n} = (-1)^n J_n`),
/// phases `{0, 4π/3, 2π/3}` read at the middle bin. Other dimensions are
/// rejected: the remaining qutrit bases need phase patterns that are not
/// monotonic in bin number, beyond a single modulator.
pub fn mub_bases(d: usize) -> Result<Vec<MubBasis>> {
    match d {
        2 => Ok(vec![z_basis(2), qubit_x_basis(), qubit_y_basis()]),
        3 => Ok(vec![z_basis(3), qutrit_if_basis()]),
        other => Err(Error::UnsupportedDimension {
            dim: other,
            reason: "a single phase modulator implements MUB projections only for \
                     D = 2 {Z, X, Y} and D = 3 {Z, I-F}"
                .into(),
        }),
    }
}

fn z_basis(d: usize) -> MubBasis {
    let vectors = (0..d)
        .map(|j| MubVector {
            vector: CVector::from_fn(d, |k, _| {
                Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)
            }),
            setting: ModulatorSetting::off(),
            readout_bin: j,
        })
        .collect();
    MubBasis {
        name: "Z".into(),
        vectors,
    }
}

/// Normalized analysis vector for reading bin `readout` at `β*` with RF phase
/// `theta`, restricted to `0..d`, global phase fixed to the first entry.
fn equal_sideband_analysis(d: usize, readout: usize, theta: f64) -> CVector {
    let jbar = bessel_j(0, equal_sideband_index()).unwrap();
    let mut v = CVector::from_fn(d, |k, _| {
        let order = readout as i64 - k as i64;
        let j = bessel_j(order as i32, equal_sideband_index()).unwrap();
        Complex64::from_polar(1.0, order as f64 * theta).scale(j / jbar)
    });
    let phase = v[0] / v[0].norm();
    v *= phase.conj();
    let norm = v.norm();
    v.unscale_mut(norm);
    v
}

fn qubit_x_basis() -> MubBasis {
    let thetas = [std::f64::consts::PI, 0.0]; // X+ then X-
    MubBasis {
        name: "X".into(),
        vectors: thetas
            .iter()
            .map(|&theta| MubVector {
                vector: equal_sideband_analysis(2, 0, theta),
                setting: ModulatorSetting::equal_sideband(theta),
                readout_bin: 0,
            })
            .collect(),
    }
}

fn qubit_y_basis() -> MubBasis {
    let thetas = [std::f64::consts::FRAC_PI_2, 3.0 * std::f64::consts::FRAC_PI_2]; // Y+ then Y-
    MubBasis {
        name: "Y".into(),
        vectors: thetas
            .iter()
            .map(|&theta| MubVector {
                vector: equal_sideband_analysis(2, 0, theta),
                setting: ModulatorSetting::equal_sideband(theta),
                readout_bin: 0,
            })
            .collect(),
    }
}

fn qutrit_if_basis() -> MubBasis {
    // θ_j = -2πj/3 puts I⁻F vector j behind the middle bin.
    let thetas = [
        0.0,
        4.0 * std::f64::consts::FRAC_PI_3,
        2.0 * std::f64::consts::FRAC_PI_3,
    ];
    MubBasis {
        name: "I-F".into(),
        vectors: thetas
            .iter()
            .map(|&theta| MubVector {
                vector: equal_sideband_analysis(3, 1, theta),
                setting: ModulatorSetting::equal_sideband(theta),
                readout_bin: 1,
            })
            .collect(),
    }
}

/// `max_jk | |<e_j|f_k>|² - 1/D |` over a basis pair.
pub fn unbiasedness_deviation(a: &MubBasis, b: &MubBasis) -> f64 {
    let d = a.dim() as f64;
    let mut worst = 0.0_f64;
    for va in &a.vectors {
        for vb in &b.vectors {
            let overlap = va.vector.dotc(&vb.vector).norm_sqr();
            worst = worst.max((overlap - 1.0 / d).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sideband_coefficient_examples() {
        let c = sideband_coefficient(0, 0.0, 1.23).unwrap();
        assert_abs_diff_eq!(c.re, 1.0, epsilon = 1e-15);
        // parity: J_{-1} = -J_1
        let minus = sideband_coefficient(-1, 1.1, 0.0).unwrap();
        let plus = sideband_coefficient(1, 1.1, 0.0).unwrap();
        assert_abs_diff_eq!(minus.re, -plus.re, epsilon = 1e-14);
        // at β* the first sideband matches the baseband to ~1e-10
        let b = equal_sideband_index();
        let j0 = sideband_coefficient(0, b, 0.0).unwrap().re;
        let j1 = sideband_coefficient(1, b, FRAC_PI_2).unwrap();
        assert!((j1.im - j0).abs() <= 1e-4 && j1.re.abs() < 1e-12);
        // a fixed-argument probe near the root
        let j0p = crate::bessel::bessel_j(0, 1.4347).unwrap();
        let j1p = crate::bessel::bessel_j(1, 1.4347).unwrap();
        assert!((j1p - j0p).abs() <= 1e-4);
    }

    #[test]
    fn calibration_anchors() {
        let cal = ModulatorCalibration::signal_default();
        let b = rf_power_to_index(22.1, &cal).unwrap();
        assert_abs_diff_eq!(b, cal.anchor_beta, epsilon = 1e-6);
        assert!((b - 1.434).abs() <= 1e-3);

        let cal_i = ModulatorCalibration::idler_default();
        let bi = rf_power_to_index(24.3, &cal_i).unwrap();
        assert_abs_diff_eq!(bi, cal_i.anchor_beta, epsilon = 1e-6);
        // higher modulation efficiency of the signal modulator
        assert!(cal.kappa > cal_i.kappa);

        // 0 dBm rows mean "modulator off"
        assert_eq!(rf_power_to_index(0.0, &cal).unwrap(), 0.0);
        let mut curve = cal.clone();
        curve.off_at_zero_dbm = false;
        assert!(rf_power_to_index(0.0, &curve).unwrap() > 0.1);
    }

    #[test]
    fn sideband_matrix_identity_at_zero_drive() {
        let grid = BinGrid::with_defaults(3).unwrap();
        let m = sideband_matrix(&ModulatorSetting::off(), &grid).unwrap();
        let n = grid.window_len();
        assert!((m.matrix() - CMatrix::identity(n, n)).norm() < 1e-15);
        assert_eq!(m.truncation_residue(), 0.0);
    }

    #[test]
    fn sideband_matrix_central_diagonals_at_beta_star() {
        let grid = BinGrid::with_defaults(3).unwrap();
        let setting = ModulatorSetting::equal_sideband(0.0);
        let m = sideband_matrix(&setting, &grid).unwrap();
        let jbar = bessel_j(0, equal_sideband_index()).unwrap();
        // J_{-1} = -J_1: upper diagonal +J̄, main diagonal +J̄, lower -J̄
        assert_abs_diff_eq!(m.entry(0, 0).re, jbar, epsilon = 1e-12);
        assert_abs_diff_eq!(m.entry(0, 1).re, jbar, epsilon = 1e-10);
        assert_abs_diff_eq!(m.entry(1, 0).re, -jbar, epsilon = 1e-10);
    }

    #[test]
    fn circulant_shift_property() {
        let grid = BinGrid::with_defaults(4).unwrap();
        let setting = ModulatorSetting::new(1.1, 0.7).unwrap();
        let m = sideband_matrix(&setting, &grid).unwrap();
        let (lo, hi) = m.window();
        for bin_m in lo..hi {
            for bin_r in lo..hi {
                assert_eq!(m.entry(bin_m, bin_r), m.entry(bin_m + 1, bin_r + 1));
            }
        }
    }

    #[test]
    fn window_too_small_reports_needed_guards() {
        let grid = BinGrid::new(2, 15.0, 193_400.0, 192_900.0, 2, false).unwrap();
        let setting = ModulatorSetting::new(3.0, 0.0).unwrap();
        match sideband_matrix(&setting, &grid) {
            Err(Error::WindowTooSmall { required_guard, .. }) => {
                assert!(required_guard > 2);
                let bigger =
                    BinGrid::new(2, 15.0, 193_400.0, 192_900.0, required_guard, false).unwrap();
                assert!(sideband_matrix(&setting, &bigger).is_ok());
            }
            other => panic!("expected WindowTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn row_norm_unitarity_on_window() {
        let grid = BinGrid::with_defaults(3).unwrap();
        for beta in [0.5, equal_sideband_index(), 3.0] {
            let m = sideband_matrix(&ModulatorSetting::new(beta, 0.3).unwrap(), &grid).unwrap();
            assert!(m.truncation_residue() <= 1e-6);
        }
    }

    #[test]
    fn projector_family_identity_and_fourier_vector() {
        let grid = BinGrid::with_defaults(3).unwrap();
        let fam =
            projector_family(&ModulatorSetting::off(), &ModulatorSetting::off(), &grid).unwrap();
        let v = fam.analysis_vector(1, 2);
        for (idx, z) in v.iter().enumerate() {
            let expect = if idx == 3 + 2 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(z.re, expect, epsilon = 1e-15);
        }

        // at β*: the bin-1 signal projector is J̄√3 times (|0> + |1> - |2>)/√3
        let fam = projector_family(
            &ModulatorSetting::equal_sideband(0.0),
            &ModulatorSetting::off(),
            &grid,
        )
        .unwrap();
        let w = fam.signal.analysis_vector_computational(1, 3);
        let jbar = bessel_j(0, equal_sideband_index()).unwrap();
        let f0 = CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ])
        .unscale(3f64.sqrt());
        let scaled = f0.scale(jbar * 3f64.sqrt());
        assert!((w - &scaled).norm() < 1e-10);
        // projector norm J̄√3 < 1: photons scatter out of the computational space
        assert_abs_diff_eq!(scaled.norm(), jbar * 3f64.sqrt(), epsilon = 1e-12);
        assert!(jbar * 3f64.sqrt() < 1.0);
    }

    #[test]
    fn joint_columns_subnormalized() {
        let grid = BinGrid::with_defaults(2).unwrap();
        let fam = projector_family(
            &ModulatorSetting::equal_sideband(0.4),
            &ModulatorSetting::equal_sideband(-0.9),
            &grid,
        )
        .unwrap();
        let u = fam.joint_matrix();
        for c in 0..u.ncols() {
            assert!(u.column(c).norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn qubit_mub_set() {
        let bases = mub_bases(2).unwrap();
        assert_eq!(bases.len(), 3);
        let [z, x, y] = [&bases[0], &bases[1], &bases[2]];
        assert_eq!(
            (z.name.as_str(), x.name.as_str(), y.name.as_str()),
            ("Z", "X", "Y")
        );
        // |<x0|z0>|² = 1/2 and every other cross pair likewise
        for (a, b) in [(z, x), (z, y), (x, y)] {
            assert!(unbiasedness_deviation(a, b) <= 1e-10);
        }
        // X vectors are the ±1 eigenvectors
        let xp = &x.vectors[0].vector;
        assert_abs_diff_eq!((xp[0] - xp[1]).norm(), 0.0, epsilon = 1e-10);
        let yp = &y.vectors[0].vector;
        assert_abs_diff_eq!((yp[1] / yp[0]).im, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn qutrit_mub_set() {
        let bases = mub_bases(3).unwrap();
        assert_eq!(bases.len(), 2);
        assert!(unbiasedness_deviation(&bases[0], &bases[1]) <= 1e-10);
        // the superposition basis is I⁻F: Fourier phases with a sign flip on
        // the last component
        let f0 = &bases[1].vectors[0].vector;
        assert_abs_diff_eq!(f0[0].re, 1.0 / 3f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(f0[2].re, -1.0 / 3f64.sqrt(), epsilon = 1e-10);
        // RF phases come from the reported F set
        let got: Vec<f64> = bases[1].vectors.iter().map(|v| v.setting.theta).collect();
        assert_abs_diff_eq!(got[1], 4.0 * std::f64::consts::FRAC_PI_3, epsilon = 1e-12);
    }

    #[test]
    fn third_qutrit_basis_rejected() {
        match mub_bases(4) {
            Err(Error::UnsupportedDimension { reason, .. }) => {
                assert!(reason.contains("single phase modulator"));
            }
            other => panic!("expected UnsupportedDimension, got {other:?}"),
        }
    }

    #[test]
    fn mub_vectors_match_modulator_columns() {
        // Each basis vector must be what its modulator setting actually
        // projects onto (up to the J̄√D scale and a global phase).
        let grid = BinGrid::with_defaults(3).unwrap();
        for basis in mub_bases(3).unwrap() {
            for mv in &basis.vectors {
                if mv.setting.beta == 0.0 {
                    continue;
                }
                let sb = sideband_matrix(&mv.setting, &grid).unwrap();
                let col = sb.analysis_vector_computational(mv.readout_bin as i64, 3);
                let overlap = col.dotc(&mv.vector).norm() / col.norm();
                assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn x_phases_match_reported_sets() {
        let bases = mub_bases(2).unwrap();
        let mut xs: Vec<f64> = bases[1].vectors.iter().map(|v| v.setting.theta).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(xs[0], 0.0);
        assert_abs_diff_eq!(xs[1], PI);
    }
}
