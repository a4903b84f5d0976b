//! Bin grids, two-photon states, density matrices, and the Cholesky
//! parameterization used by tomography.
//!
//! A qudit lives on `D` computational frequency bins per photon; the joint
//! signal/idler space has dimension `D^2` with basis `|k>_s |l>_i` at flat
//! index `k*D + l`. Guard bins extend the computational window so modulator
//! sidebands can scatter out of it without wrapping.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix, CVector};
use crate::source::IndistinguishabilityMatrix;
use crate::{Error, Result};

/// Tolerance on Hermiticity for a valid density matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance on unit trace for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a valid density matrix.
pub const PSD_TOL: f64 = -1e-9;

/// Frequency-bin layout: `D` computational bins spaced by `δ`, extended by
/// guard bins on each side for sideband truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    dim: usize,
    spacing_ghz: f64,
    signal_anchor_ghz: f64,
    idler_anchor_ghz: f64,
    guard_bins: usize,
    half_step: bool,
}

impl BinGrid {
    pub fn new(
        dim: usize,
        spacing_ghz: f64,
        signal_anchor_ghz: f64,
        idler_anchor_ghz: f64,
        guard_bins: usize,
        half_step: bool,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::contract(format!("bin grid needs D >= 2, got {dim}")));
        }
        if !spacing_ghz.is_finite() || spacing_ghz <= 0.0 {
            return Err(Error::contract(format!(
                "bin spacing must be positive, got {spacing_ghz} GHz"
            )));
        }
        Ok(Self {
            dim,
            spacing_ghz,
            signal_anchor_ghz,
            idler_anchor_ghz,
            guard_bins,
            half_step,
        })
    }

    /// Grid with the device defaults: 15 GHz spacing and 12 guard bins.
    pub fn with_defaults(dim: usize) -> Result<Self> {
        Self::new(dim, 15.0, 193_400.0, 192_900.0, 12, false)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing_ghz(&self) -> f64 {
        self.spacing_ghz
    }

    pub fn guard_bins(&self) -> usize {
        self.guard_bins
    }

    pub fn half_step(&self) -> bool {
        self.half_step
    }

    /// Lowest window bin index (negative when guard bins are present).
    pub fn window_lo(&self) -> i64 {
        -(self.guard_bins as i64)
    }

    /// Highest window bin index.
    pub fn window_hi(&self) -> i64 {
        (self.dim - 1 + self.guard_bins) as i64
    }

    /// Number of bins in the extended window.
    pub fn window_len(&self) -> usize {
        self.dim + 2 * self.guard_bins
    }

    /// Row/column offset of a window bin inside window-sized matrices.
    pub fn window_offset(&self, bin: i64) -> Result<usize> {
        if bin < self.window_lo() || bin > self.window_hi() {
            return Err(Error::contract(format!(
                "bin {bin} outside window [{}, {}]",
                self.window_lo(),
                self.window_hi()
            )));
        }
        Ok((bin - self.window_lo()) as usize)
    }

    /// Frequency of a signal bin; half-integer indices need `half_step`.
    pub fn signal_frequency_ghz(&self, bin: f64) -> Result<f64> {
        self.check_index(bin)?;
        Ok(self.signal_anchor_ghz + bin * self.spacing_ghz)
    }

    /// Frequency of an idler bin; half-integer indices need `half_step`.
    pub fn idler_frequency_ghz(&self, bin: f64) -> Result<f64> {
        self.check_index(bin)?;
        Ok(self.idler_anchor_ghz + bin * self.spacing_ghz)
    }

    fn check_index(&self, bin: f64) -> Result<()> {
        let doubled = 2.0 * bin;
        if doubled.fract() != 0.0 {
            return Err(Error::contract(format!("bin index {bin} not on the lattice")));
        }
        if bin.fract() != 0.0 && !self.half_step {
            return Err(Error::contract(format!(
                "half-integer bin {bin} needs the half_step flag"
            )));
        }
        Ok(())
    }

    /// Re-grid onto a `δ/2` lattice for half-spacing fringe scans. Old bin `k`
    /// maps to new bin `2k`; midpoints between old bins become integer bins.
    pub fn half_spacing_grid(&self) -> Result<BinGrid> {
        BinGrid::new(
            2 * self.dim - 1,
            self.spacing_ghz / 2.0,
            self.signal_anchor_ghz,
            self.idler_anchor_ghz,
            2 * self.guard_bins,
            false,
        )
    }
}

/// Pure two-photon qudit state `Σ_k α_k |k>_s |k>_i`, stored as the
/// normalized coefficient vector `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    amps: CVector,
}

impl TwoPhotonState {
    /// Normalizes on construction; callers never handle unnormalized states.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::contract(format!(
                "two-photon state needs D >= 2 amplitudes, got {}",
                amps.len()
            )));
        }
        let v = CVector::from_vec(amps);
        let norm = v.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Normalization(
                "amplitude vector has zero or non-finite norm".into(),
            ));
        }
        Ok(Self { amps: v.unscale(norm) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    /// `<other|self>`.
    pub fn inner(&self, other: &TwoPhotonState) -> Complex64 {
        other.amps.dotc(&self.amps)
    }

    /// Joint-space ket `Σ_k α_k |kk>` of length `D^2`.
    pub fn joint_ket(&self) -> CVector {
        let d = self.dim();
        let mut v = CVector::zeros(d * d);
        for k in 0..d {
            v[k * d + k] = self.amps[k];
        }
        v
    }

    /// Projector `|Φ><Φ|` on the joint space, as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let ket = self.joint_ket();
        let mat = CMatrix::from_fn(ket.len(), ket.len(), |i, j| ket[i] * ket[j].conj());
        DensityMatrix {
            mat,
            local_dim: self.dim(),
        }
    }
}

/// Maximally entangled state with per-bin signs: `α_k = s_k / √D`.
///
/// Signs must be unit modulus (±1 for the device's programmed states).
pub fn bell_state(dim: usize, signs: &[f64]) -> Result<TwoPhotonState> {
    if signs.len() != dim {
        return Err(Error::contract(format!(
            "sign vector length {} does not match dimension {dim}",
            signs.len()
        )));
    }
    for (k, s) in signs.iter().enumerate() {
        if (s.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::contract(format!(
                "sign {s} at bin {k} is not unit modulus"
            )));
        }
    }
    TwoPhotonState::new(signs.iter().map(|&s| Complex64::new(s, 0.0)).collect())
}

/// The six programmed target states of the device, by their sign patterns
/// over the four rings R0-R3 (absent rings contribute zero amplitude).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellPattern {
    /// `{0,0,1,1}` - qubit on bins 2,3
    Phi1,
    /// `{0,1,1,1}` - qutrit on bins 1-3
    Phi2,
    /// `{0,1,-1,-1}` - qutrit with a π phase on ring 1
    Phi3,
    /// `{0,1,0,1}` - qubit on bins 1,3
    Phi4,
    /// `{1,1,1,1}` - ququart
    Phi5,
    /// `{1,-1,-1,1}` - ququart with π phases on rings 1,2
    Phi6,
}

impl BellPattern {
    pub const ALL: [BellPattern; 6] = [
        BellPattern::Phi1,
        BellPattern::Phi2,
        BellPattern::Phi3,
        BellPattern::Phi4,
        BellPattern::Phi5,
        BellPattern::Phi6,
    ];

    /// Per-ring coefficients over the 4-bin device, as in the target table.
    pub fn device_coefficients(&self) -> [f64; 4] {
        match self {
            BellPattern::Phi1 => [0.0, 0.0, 1.0, 1.0],
            BellPattern::Phi2 => [0.0, 1.0, 1.0, 1.0],
            BellPattern::Phi3 => [0.0, 1.0, -1.0, -1.0],
            BellPattern::Phi4 => [0.0, 1.0, 0.0, 1.0],
            BellPattern::Phi5 => [1.0, 1.0, 1.0, 1.0],
            BellPattern::Phi6 => [1.0, -1.0, -1.0, 1.0],
        }
    }

    /// Device bins carrying nonzero amplitude.
    pub fn populated_bins(&self) -> Vec<usize> {
        self.device_coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    /// Qudit dimension of the pattern in its own space.
    pub fn dimension(&self) -> usize {
        self.populated_bins().len()
    }

    /// Sign vector restricted to the populated bins.
    pub fn signs(&self) -> Vec<f64> {
        self.device_coefficients()
            .iter()
            .copied()
            .filter(|c| *c != 0.0)
            .collect()
    }

    /// The target state in its own `D`-dimensional space.
    pub fn state(&self) -> TwoPhotonState {
        bell_state(self.dimension(), &self.signs()).expect("pattern signs are valid")
    }

    /// The target state embedded in the full 4-bin device space.
    pub fn state_in_device(&self) -> TwoPhotonState {
        TwoPhotonState::new(
            self.device_coefficients()
                .iter()
                .map(|&c| Complex64::new(c, 0.0))
                .collect(),
        )
        .expect("pattern has at least two populated bins")
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "phi1" => Ok(BellPattern::Phi1),
            "phi2" => Ok(BellPattern::Phi2),
            "phi3" => Ok(BellPattern::Phi3),
            "phi4" => Ok(BellPattern::Phi4),
            "phi5" => Ok(BellPattern::Phi5),
            "phi6" => Ok(BellPattern::Phi6),
            other => Err(Error::contract(format!(
                "unknown target pattern '{other}' (expected Phi1..Phi6)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BellPattern::Phi1 => "Phi1",
            BellPattern::Phi2 => "Phi2",
            BellPattern::Phi3 => "Phi3",
            BellPattern::Phi4 => "Phi4",
            BellPattern::Phi5 => "Phi5",
            BellPattern::Phi6 => "Phi6",
        }
    }
}

impl std::str::FromStr for BellPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BellPattern::from_name(s)
    }
}

/// Joint `D^2 x D^2` density matrix over the bin basis: Hermitian, unit
/// trace, positive semidefinite (smallest eigenvalue >= -1e-9; matrices
/// failing that are rejected rather than projected).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    local_dim: usize,
}

impl DensityMatrix {
    pub fn try_new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::dimension(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let n = mat.nrows();
        let local_dim = (n as f64).sqrt().round() as usize;
        if local_dim * local_dim != n {
            return Err(Error::dimension(format!(
                "joint dimension {n} is not a perfect square"
            )));
        }
        let dev = linalg::hermiticity_deviation(&mat);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: HERMITICITY_TOL,
            });
        }
        let tr = linalg::trace_re(&mat);
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Normalization(format!(
                "trace {tr} deviates from 1 beyond {TRACE_TOL:.0e}"
            )));
        }
        let min_eig = linalg::min_eigenvalue(&mat);
        if min_eig < PSD_TOL {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: min_eig });
        }
        Ok(Self { mat, local_dim })
    }

    /// Maximally mixed state on a `D^2`-dimensional joint space.
    pub fn maximally_mixed(local_dim: usize) -> Self {
        let n = local_dim * local_dim;
        Self {
            mat: CMatrix::identity(n, n).unscale(n as f64),
            local_dim,
        }
    }

    /// Joint dimension `D^2`.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Local qudit dimension `D`.
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// `<kl| ρ |mn>` with joint indices `k*D + l`, `m*D + n`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// Z-basis populations `<kl| ρ |kl>` as a `D x D` real table.
    pub fn populations(&self) -> nalgebra::DMatrix<f64> {
        let d = self.local_dim;
        nalgebra::DMatrix::from_fn(d, d, |k, l| self.mat[(k * d + l, k * d + l)].re)
    }
}

/// `Tr(ρ^2)`, in `[1/D^2, 1]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // For Hermitian ρ, Tr(ρ²) equals the squared Frobenius norm, which is
    // real by construction.
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Fidelity conventions: the main-text root fidelity, and the pure-target
/// overlap that reproduces the simulated purity/fidelity tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityConvention {
    /// `Tr sqrt(sqrt(ρ_t) ρ_r sqrt(ρ_t))`
    Root,
    /// `Tr(ρ_t ρ_r)`; equals root-fidelity squared for pure targets.
    Overlap,
}

/// Fidelity of `rho_r` against the target `rho_t` under the given convention.
pub fn fidelity(
    rho_r: &DensityMatrix,
    rho_t: &DensityMatrix,
    convention: FidelityConvention,
) -> Result<f64> {
    if rho_r.dim() != rho_t.dim() {
        return Err(Error::dimension(format!(
            "fidelity needs equal dimensions, got {} vs {}",
            rho_r.dim(),
            rho_t.dim()
        )));
    }
    match convention {
        FidelityConvention::Overlap => {
            Ok((rho_t.matrix() * rho_r.matrix()).diagonal().iter().map(|z| z.re).sum())
        }
        FidelityConvention::Root => {
            // Tr sqrt(sqrt(ρ_t) ρ_r sqrt(ρ_t)) = || sqrt(ρ_t) sqrt(ρ_r) ||_1
            let root_t = linalg::sqrtm_psd(rho_t.matrix());
            let root_r = linalg::sqrtm_psd(rho_r.matrix());
            Ok(linalg::trace_norm(&(&root_t * &root_r)))
        }
    }
}

/// Effective density matrix of the multi-source state: coherences between
/// bins `i` and `k` are damped by the source indistinguishability,
/// `<ii| ρ' |kk> = I_ik α_i α_k^*`, all other entries zero.
pub fn density_from_amplitudes(
    state: &TwoPhotonState,
    indist: &IndistinguishabilityMatrix,
) -> Result<DensityMatrix> {
    let d = state.dim();
    if indist.dim() != d {
        return Err(Error::dimension(format!(
            "indistinguishability matrix is {}x{} but the state has {d} bins",
            indist.dim(),
            indist.dim()
        )));
    }
    let n = d * d;
    let mut mat = CMatrix::zeros(n, n);
    for i in 0..d {
        for k in 0..d {
            mat[(i * d + i, k * d + k)] =
                indist.entry(i, k) * state.amplitude(i) * state.amplitude(k).conj();
        }
    }
    DensityMatrix::try_new(mat)
}

/// Real parameter vector for the Cholesky factorization `ρ(t) = T T† / Tr(T T†)`,
/// with `T` lower triangular and real on the diagonal.
///
/// Layout for an `n x n` factor (`n = D^2`, so `t.len() = D^4`): the first `n`
/// entries are the diagonal, followed by `(re, im)` pairs for the strictly
/// lower triangle in row-major order `(1,0), (2,0), (2,1), (3,0), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyParams {
    t: Vec<f64>,
}

impl CholeskyParams {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("Cholesky parameters must be finite"));
        }
        let n = (t.len() as f64).sqrt().round() as usize;
        if n * n != t.len() {
            return Err(Error::contract(format!(
                "parameter length {} is not a perfect square (expected D^4)",
                t.len()
            )));
        }
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::contract(format!(
                "parameter length {} is not a fourth power (expected D^4)",
                t.len()
            )));
        }
        Ok(Self { t })
    }

    /// All-zero parameters for an `n x n` factor (`n = D^2`).
    pub fn zeros(matrix_dim: usize) -> Result<Self> {
        Self::new(vec![0.0; matrix_dim * matrix_dim])
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }

    /// Side length of the induced factor `T`.
    pub fn matrix_dim(&self) -> usize {
        (self.t.len() as f64).sqrt().round() as usize
    }

    /// The induced lower-triangular factor `T(t)`.
    pub fn factor(&self) -> CMatrix {
        let n = self.matrix_dim();
        let mut t_mat = CMatrix::zeros(n, n);
        for j in 0..n {
            t_mat[(j, j)] = Complex64::new(self.t[j], 0.0);
        }
        let mut pos = n;
        for i in 1..n {
            for j in 0..i {
                t_mat[(i, j)] = Complex64::new(self.t[pos], self.t[pos + 1]);
                pos += 2;
            }
        }
        t_mat
    }

    /// Parameters reproducing a given density matrix, via a lower-triangular
    /// factorization (LQ of the eigenvalue square root, so semidefinite
    /// inputs work too).
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.dim();
        let lower = match linalg::cholesky_lower(rho.matrix()) {
            Some(l) => l,
            None => {
                // Rank-deficient: factor through eigenvectors and re-triangularize.
                let b = linalg::sqrtm_psd(rho.matrix());
                let qr = b.adjoint().qr();
                let mut l = qr.r().adjoint();
                for j in 0..n {
                    let diag = l[(j, j)];
                    if diag.norm() > 0.0 {
                        let phase = diag / diag.norm();
                        for i in 0..n {
                            l[(i, j)] *= phase.conj();
                        }
                    }
                }
                l
            }
        };
        let mut t = vec![0.0; n * n];
        for j in 0..n {
            t[j] = lower[(j, j)].re;
        }
        let mut pos = n;
        for i in 1..n {
            for j in 0..i {
                t[pos] = lower[(i, j)].re;
                t[pos + 1] = lower[(i, j)].im;
                pos += 2;
            }
        }
        Self::new(t)
    }
}

/// `ρ(t) = T T† / Tr(T T†)`; valid for any finite nonzero parameter vector.
pub fn density_from_cholesky(params: &CholeskyParams) -> Result<DensityMatrix> {
    let t_mat = params.factor();
    let gram = &t_mat * t_mat.adjoint();
    let tr = linalg::trace_re(&gram);
    if tr <= 1e-300 {
        return Err(Error::Normalization(
            "all-zero Cholesky parameters give a degenerate normalization".into(),
        ));
    }
    let mat = gram.unscale(tr);
    let local_dim = (mat.nrows() as f64).sqrt().round() as usize;
    Ok(DensityMatrix { mat, local_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_indist(d: usize, value: f64) -> IndistinguishabilityMatrix {
        IndistinguishabilityMatrix::uniform(d, value).unwrap()
    }

    #[test]
    fn bell_state_examples() {
        let s = bell_state(2, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.amplitude(0).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(1).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        let s3 = bell_state(3, &[1.0, -1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(s3.amplitude(1).re, -1.0 / 3f64.sqrt(), epsilon = 1e-15);

        let plus = bell_state(2, &[1.0, 1.0]).unwrap();
        let minus = bell_state(2, &[1.0, -1.0]).unwrap();
        assert!(plus.inner(&minus).norm() < 1e-15);

        assert!(bell_state(3, &[1.0, 1.0]).is_err());
        assert!(bell_state(2, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn normalization_applied_on_construction() {
        let s = TwoPhotonState::new(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 4.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(s.amplitudes().norm(), 1.0, epsilon = 1e-12);
        assert!(TwoPhotonState::new(vec![Complex64::default(); 3]).is_err());
    }

    #[test]
    fn rho_prime_perfect_indistinguishability_is_pure() {
        let state = bell_state(2, &[1.0, 1.0]).unwrap();
        let rho = density_from_amplitudes(&state, &uniform_indist(2, 1.0)).unwrap();
        assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-12);
        let target = state.density();
        assert!((rho.matrix() - target.matrix()).norm() < 1e-12);
    }

    #[test]
    fn rho_prime_purity_closed_form() {
        // Tr(ρ'^2) = (1 + (D-1) I^2) / D for uniform |α| and uniform I.
        for d in [2usize, 3, 4] {
            for i_val in [0.0, 0.5, 0.87, 1.0] {
                let state = bell_state(d, &vec![1.0; d]).unwrap();
                let rho = density_from_amplitudes(&state, &uniform_indist(d, i_val)).unwrap();
                let expect = (1.0 + (d as f64 - 1.0) * i_val * i_val) / d as f64;
                assert_abs_diff_eq!(purity(&rho), expect, epsilon = 1e-12);
            }
        }
        let state = bell_state(3, &[1.0, 1.0, 1.0]).unwrap();
        let rho = density_from_amplitudes(&state, &uniform_indist(3, 0.87)).unwrap();
        assert_abs_diff_eq!(purity(&rho), (1.0 + 2.0 * 0.87 * 0.87) / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn rho_prime_distinguishable_limit_is_mixed() {
        let state = bell_state(3, &[1.0, 1.0, 1.0]).unwrap();
        let rho = density_from_amplitudes(&state, &uniform_indist(3, 0.0)).unwrap();
        assert_abs_diff_eq!(purity(&rho), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn non_psd_indistinguishability_rejected() {
        // Uniform off-diagonal below -1/(D-1) is not a valid Gram matrix.
        let err = IndistinguishabilityMatrix::uniform(3, -0.9).unwrap_err();
        assert!(matches!(err, Error::NotPositiveSemidefinite { .. }));
        let err = IndistinguishabilityMatrix::uniform(2, 1.5).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn purity_examples() {
        let pure = bell_state(2, &[1.0, 1.0]).unwrap().density();
        assert_abs_diff_eq!(purity(&pure), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(purity(&DensityMatrix::maximally_mixed(2)), 0.25, epsilon = 1e-12);
        let state = bell_state(3, &[1.0, 1.0, 1.0]).unwrap();
        let rho = density_from_amplitudes(&state, &uniform_indist(3, 0.8)).unwrap();
        assert_abs_diff_eq!(purity(&rho), 0.76, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let phi = bell_state(2, &[1.0, 1.0]).unwrap().density();
        assert_abs_diff_eq!(
            fidelity(&phi, &phi, FidelityConvention::Root).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            fidelity(&phi, &phi, FidelityConvention::Overlap).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // root fidelity of the maximally mixed state against a pure target
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(
            fidelity(&mixed, &phi, FidelityConvention::Root).unwrap(),
            0.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn overlap_fidelity_closed_form_band() {
        // <Φ|ρ'|Φ> = (1 + (D-1) I) / D over the simulated indistinguishability band.
        let target = bell_state(3, &[1.0, 1.0, 1.0]).unwrap();
        for i_val in [0.80, 0.85, 0.94] {
            let rho = density_from_amplitudes(&target, &uniform_indist(3, i_val)).unwrap();
            let f = fidelity(&rho, &target.density(), FidelityConvention::Overlap).unwrap();
            assert_abs_diff_eq!(f, (1.0 + 2.0 * i_val) / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn root_fidelity_squares_to_overlap_for_pure_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let target = bell_state(2, &[1.0, -1.0]).unwrap().density();
        for _ in 0..20 {
            let t: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() - 0.5).collect();
            let rho = density_from_cholesky(&CholeskyParams::new(t).unwrap()).unwrap();
            let root = fidelity(&rho, &target, FidelityConvention::Root).unwrap();
            let overlap = fidelity(&rho, &target, FidelityConvention::Overlap).unwrap();
            assert_abs_diff_eq!(root * root, overlap, epsilon = 1e-10);
        }
    }

    #[test]
    fn cholesky_identity_pattern_gives_maximally_mixed() {
        let mut t = vec![0.0; 16];
        t[..4].fill(1.0);
        let rho = density_from_cholesky(&CholeskyParams::new(t).unwrap()).unwrap();
        assert!((rho.matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() < 1e-14);
    }

    #[test]
    fn cholesky_bell_column_gives_pure_state() {
        // T with first column equal to the Bell amplitudes: T T† = |Φ><Φ|.
        let phi = bell_state(2, &[1.0, 1.0]).unwrap();
        let ket = phi.joint_ket();
        let mut t = vec![0.0; 16];
        t[0] = ket[0].re;
        // strictly-lower entries (i,0) live at positions 4, 8, 12 (re parts)
        t[4] = ket[1].re;
        t[6] = ket[2].re;
        t[10] = ket[3].re;
        let rho = density_from_cholesky(&CholeskyParams::new(t).unwrap()).unwrap();
        assert!((rho.matrix() - phi.density().matrix()).norm() < 1e-12);
    }

    #[test]
    fn cholesky_zero_rejected() {
        let params = CholeskyParams::zeros(4).unwrap();
        assert!(matches!(
            density_from_cholesky(&params),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn cholesky_parameterization_surjective() {
        // 100 random valid ρ are reproduced from their factor parameters.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..100 {
            let n = 4 + 5 * (trial % 2); // joint dims 4 and 9
            let a = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let gram = &a * a.adjoint();
            let rho = DensityMatrix::try_new(gram.unscale(linalg::trace_re(&gram))).unwrap();
            let params = CholeskyParams::from_density(&rho).unwrap();
            let rebuilt = density_from_cholesky(&params).unwrap();
            let worst = (rho.matrix() - rebuilt.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-9, "max entry error {worst:e}");
        }
    }

    #[test]
    fn cholesky_factor_roundtrip_for_pure_state() {
        let rho = BellPattern::Phi6.state().density();
        let params = CholeskyParams::from_density(&rho).unwrap();
        let rebuilt = density_from_cholesky(&params).unwrap();
        let worst = (rho.matrix() - rebuilt.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9);
    }

    #[test]
    fn density_matrix_validation() {
        let mut bad = CMatrix::identity(4, 4).unscale(4.0);
        bad[(0, 1)] = Complex64::new(0.0, 1e-6);
        assert!(matches!(
            DensityMatrix::try_new(bad),
            Err(Error::NotHermitian { .. })
        ));

        let mut neg = CMatrix::zeros(4, 4);
        neg[(0, 0)] = Complex64::new(1.5, 0.0);
        neg[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(
            DensityMatrix::try_new(neg),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn grid_indexing_and_half_spacing() {
        let grid = BinGrid::new(3, 15.0, 193_400.0, 192_900.0, 2, false).unwrap();
        assert_eq!(grid.window_lo(), -2);
        assert_eq!(grid.window_hi(), 4);
        assert_eq!(grid.window_len(), 7);
        assert_eq!(grid.window_offset(-2).unwrap(), 0);
        assert!(grid.window_offset(5).is_err());
        assert_abs_diff_eq!(grid.signal_frequency_ghz(2.0).unwrap(), 193_430.0);
        assert!(grid.signal_frequency_ghz(0.5).is_err());

        let fine = grid.half_spacing_grid().unwrap();
        assert_eq!(fine.dim(), 5);
        assert_abs_diff_eq!(fine.spacing_ghz(), 7.5);
        // old bin 1 sits at fine bin 2
        assert_abs_diff_eq!(
            fine.signal_frequency_ghz(2.0).unwrap(),
            grid.signal_frequency_ghz(1.0).unwrap()
        );
    }

    #[test]
    fn bell_patterns_match_target_table() {
        assert_eq!(BellPattern::Phi4.populated_bins(), vec![1, 3]);
        assert_eq!(BellPattern::Phi4.dimension(), 2);
        assert_eq!(BellPattern::Phi3.signs(), vec![1.0, -1.0, -1.0]);
        assert_eq!(BellPattern::Phi6.dimension(), 4);
        assert_eq!("phi5".parse::<BellPattern>().unwrap(), BellPattern::Phi5);
        assert!("phi9".parse::<BellPattern>().is_err());
        for p in BellPattern::ALL {
            assert_abs_diff_eq!(purity(&p.state().density()), 1.0, epsilon = 1e-12);
        }
    }
}
