//! Ring-resonator SFWM source model.
//!
//! Each computational bin pair is fed by its own ring. A ring's biphoton
//! joint spectral amplitude is modeled as a separable product of complex
//! Lorentzians whose widths come from the loaded quality factors; pairwise
//! overlaps of these amplitudes give the indistinguishability matrix that
//! damps the coherences of the effective density matrix. The module also
//! carries the circuit-program-to-amplitude law and the brightness/geometry
//! arithmetic of the flex-grid trade-off.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binspace::TwoPhotonState;
use crate::linalg::{self, CMatrix};
use crate::{Error, Result};

/// Relative norm coverage a quadrature grid must reach (against the JSA's
/// own ±10-linewidth window) before an overlap is trusted.
pub const COVERAGE_FLOOR: f64 = 1.0 - 1e-3;

/// Linewidths of coverage on each side of a JSA's center in its own grid.
pub const GRID_SPAN_LINEWIDTHS: f64 = 10.0;

/// Minimum quadrature points per axis.
pub const MIN_GRID_POINTS: usize = 801;

/// One ring resonator: loaded quality factors at the signal and idler
/// resonances, the resonance frequencies, a detuning offset of the whole
/// comb, and whether the ring is tuned onto resonance at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub q_signal: f64,
    pub q_idler: f64,
    pub signal_freq_ghz: f64,
    pub idler_freq_ghz: f64,
    /// Offset of the ring's resonances from their nominal bin centers (GHz).
    pub detune_ghz: f64,
    /// Off-resonance rings contribute zero amplitude.
    pub enabled: bool,
}

impl RingSpec {
    pub fn new(
        q_signal: f64,
        q_idler: f64,
        signal_freq_ghz: f64,
        idler_freq_ghz: f64,
    ) -> Result<Self> {
        if [q_signal, q_idler].iter().any(|q| !q.is_finite() || *q <= 0.0) {
            return Err(Error::contract(format!(
                "quality factors must be positive, got Q_s={q_signal}, Q_i={q_idler}"
            )));
        }
        Ok(Self {
            q_signal,
            q_idler,
            signal_freq_ghz,
            idler_freq_ghz,
            detune_ghz: 0.0,
            enabled: true,
        })
    }

    /// Device-typical ring: loaded Q of 5.7e4 (signal) / 7.8e4 (idler) near
    /// 193 THz.
    pub fn device_default(signal_freq_ghz: f64, idler_freq_ghz: f64) -> Self {
        Self::new(5.7e4, 7.8e4, signal_freq_ghz, idler_freq_ghz).unwrap()
    }

    /// Signal linewidth `f/Q` in GHz.
    pub fn signal_linewidth_ghz(&self) -> f64 {
        self.signal_freq_ghz / self.q_signal
    }

    /// Idler linewidth `f/Q` in GHz.
    pub fn idler_linewidth_ghz(&self) -> f64 {
        self.idler_freq_ghz / self.q_idler
    }
}

/// Separable Lorentzian joint spectral amplitude
/// `φ(Ω₁,Ω₂) ∝ L_s(Ω₁) L_i(Ω₂)`, expressed in local offsets from the ring's
/// nominal bin centers. Detuning shifts both factors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    pub signal_linewidth_ghz: f64,
    pub idler_linewidth_ghz: f64,
    pub signal_center_ghz: f64,
    pub idler_center_ghz: f64,
}

/// JSA of a ring: Lorentzian factors with full width `f/Q`, centered at the
/// ring's detuning offset.
pub fn lorentzian_jsa(ring: &RingSpec) -> JointSpectralAmplitude {
    JointSpectralAmplitude {
        signal_linewidth_ghz: ring.signal_linewidth_ghz(),
        idler_linewidth_ghz: ring.idler_linewidth_ghz(),
        signal_center_ghz: ring.detune_ghz,
        idler_center_ghz: ring.detune_ghz,
    }
}

impl JointSpectralAmplitude {
    /// Unnormalized complex Lorentzian amplitude at local offsets (GHz).
    pub fn amplitude(&self, omega_s: f64, omega_i: f64) -> Complex64 {
        lorentzian(omega_s, self.signal_center_ghz, self.signal_linewidth_ghz)
            * lorentzian(omega_i, self.idler_center_ghz, self.idler_linewidth_ghz)
    }

    /// The JSA's own evaluation grid: ±10 linewidths around each center.
    pub fn own_grid(&self) -> QuadratureGrid {
        QuadratureGrid::covering(std::slice::from_ref(self))
    }

    fn axis_window(&self, axis: Axis) -> (f64, f64) {
        let (c, g) = self.axis_params(axis);
        (c - GRID_SPAN_LINEWIDTHS * g, c + GRID_SPAN_LINEWIDTHS * g)
    }

    fn axis_params(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::Signal => (self.signal_center_ghz, self.signal_linewidth_ghz),
            Axis::Idler => (self.idler_center_ghz, self.idler_linewidth_ghz),
        }
    }

    /// Analytic fraction of `|φ|²` mass inside `[lo, hi]` on one axis.
    fn axis_mass(&self, axis: Axis, lo: f64, hi: f64) -> f64 {
        let (c, g) = self.axis_params(axis);
        let at = |x: f64| (2.0 * (x - c) / g).atan() / std::f64::consts::PI;
        at(hi) - at(lo)
    }
}

fn lorentzian(omega: f64, center: f64, width: f64) -> Complex64 {
    (width / (2.0 * std::f64::consts::PI)).sqrt()
        / Complex64::new(omega - center, 0.5 * width)
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Signal,
    Idler,
}

/// Uniform tensor-product quadrature grid with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
}

impl QuadratureGrid {
    /// Grid covering ±10 linewidths of every supplied JSA, with at least 801
    /// points per axis and steps fine relative to the narrowest linewidth.
    pub fn covering(jsas: &[JointSpectralAmplitude]) -> QuadratureGrid {
        QuadratureGrid {
            signal: Self::axis_covering(jsas, Axis::Signal),
            idler: Self::axis_covering(jsas, Axis::Idler),
        }
    }

    fn axis_covering(jsas: &[JointSpectralAmplitude], axis: Axis) -> Vec<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut min_width = f64::INFINITY;
        for jsa in jsas {
            let (a, b) = jsa.axis_window(axis);
            lo = lo.min(a);
            hi = hi.max(b);
            min_width = min_width.min(jsa.axis_params(axis).1);
        }
        let step_target = min_width / 20.0;
        let n = MIN_GRID_POINTS.max(((hi - lo) / step_target).ceil() as usize + 1);
        let n = if n.is_multiple_of(2) { n + 1 } else { n };
        linspace(lo, hi, n)
    }

    fn weights(points: &[f64]) -> Vec<f64> {
        let n = points.len();
        let h = (points[n - 1] - points[0]) / (n as f64 - 1.0);
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        w
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n as f64 - 1.0))
        .collect()
}

/// Grid-quadrature inner product `∬ φ_a φ_b^* dΩ₁ dΩ₂` of the two grid-
/// normalized amplitudes (so `I_aa = 1` exactly and `|I| <= 1` by
/// Cauchy-Schwarz). Errors when the grid covers too little of either JSA.
pub fn indistinguishability_on(
    grid: &QuadratureGrid,
    a: &JointSpectralAmplitude,
    b: &JointSpectralAmplitude,
) -> Result<Complex64> {
    for jsa in [a, b] {
        let mut covered = 1.0;
        let mut reference = 1.0;
        for axis in [Axis::Signal, Axis::Idler] {
            let pts = match axis {
                Axis::Signal => &grid.signal,
                Axis::Idler => &grid.idler,
            };
            covered *= jsa.axis_mass(axis, pts[0], *pts.last().unwrap());
            let (own_lo, own_hi) = jsa.axis_window(axis);
            reference *= jsa.axis_mass(axis, own_lo, own_hi);
        }
        let coverage = covered / reference;
        if coverage < COVERAGE_FLOOR {
            return Err(Error::GridTooSmall {
                coverage,
                required: COVERAGE_FLOOR,
            });
        }
    }

    // Full tensor-grid trapezoid sums.
    let ws = QuadratureGrid::weights(&grid.signal);
    let wi = QuadratureGrid::weights(&grid.idler);
    let mut dot = Complex64::new(0.0, 0.0);
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (s, &os) in grid.signal.iter().enumerate() {
        for (i, &oi) in grid.idler.iter().enumerate() {
            let w = ws[s] * wi[i];
            let va = a.amplitude(os, oi);
            let vb = b.amplitude(os, oi);
            dot += w * va * vb.conj();
            norm_a += w * va.norm_sqr();
            norm_b += w * vb.norm_sqr();
        }
    }
    Ok(dot / (norm_a * norm_b).sqrt())
}

/// Pairwise indistinguishability `I_ab = ∬ φ_a φ_b^* dΩ₁ dΩ₂` on a grid
/// covering both amplitudes.
pub fn indistinguishability(
    a: &JointSpectralAmplitude,
    b: &JointSpectralAmplitude,
) -> Result<Complex64> {
    let grid = QuadratureGrid::covering(&[a.clone(), b.clone()]);
    indistinguishability_on(&grid, a, b)
}

/// Hermitian, unit-diagonal, PSD matrix of pairwise source overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct IndistinguishabilityMatrix {
    mat: CMatrix,
}

impl IndistinguishabilityMatrix {
    pub fn try_new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::dimension(format!(
                "indistinguishability matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dev = linalg::hermiticity_deviation(&mat);
        if dev > 1e-9 {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: 1e-9,
            });
        }
        for i in 0..mat.nrows() {
            if (mat[(i, i)].re - 1.0).abs() > 1e-6 || mat[(i, i)].im.abs() > 1e-9 {
                return Err(Error::contract(format!(
                    "indistinguishability diagonal entry {i} is {}, expected 1",
                    mat[(i, i)]
                )));
            }
            for k in 0..mat.ncols() {
                if mat[(i, k)].norm() > 1.0 + 1e-9 {
                    return Err(Error::contract(format!(
                        "|I_{i}{k}| = {} exceeds 1",
                        mat[(i, k)].norm()
                    )));
                }
            }
        }
        let min_eig = linalg::min_eigenvalue(&mat);
        if min_eig < -1e-9 {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: min_eig });
        }
        Ok(Self { mat })
    }

    /// All pairwise overlaps equal to `value` (unit diagonal).
    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        if value.abs() > 1.0 {
            return Err(Error::contract(format!(
                "|I_jk| = {} exceeds 1",
                value.abs()
            )));
        }
        let mat = CMatrix::from_fn(dim, dim, |i, k| {
            Complex64::new(if i == k { 1.0 } else { value }, 0.0)
        });
        Self::try_new(mat)
    }

    /// Perfectly indistinguishable sources.
    pub fn perfect(dim: usize) -> Self {
        Self::uniform(dim, 1.0).expect("all-ones Gram matrix is PSD")
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.mat[(j, k)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Per-ring pump powers, phase-shifter settings, splitter ratios, and
/// conversion efficiencies programming the emitted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitProgram {
    /// Pump power per ring (mW).
    pub pump_power_mw: Vec<f64>,
    /// Phase-shifter settings PS1..PS(N-1); ring 0 is the phase reference.
    pub ps_phase_rad: Vec<f64>,
    /// Mach-Zehnder power splitting fractions (tree of three for four rings).
    pub mz_split: Vec<f64>,
    /// Per-ring conversion efficiency.
    pub eta: Vec<f64>,
    /// Rings toggled on by the program (off rings emit nothing).
    pub ring_on: Vec<bool>,
}

impl CircuitProgram {
    /// Equal pumping of every ring with flat phases.
    pub fn uniform(rings: usize, power_mw: f64) -> Self {
        Self {
            pump_power_mw: vec![power_mw; rings],
            ps_phase_rad: vec![0.0; rings.saturating_sub(1)],
            mz_split: vec![0.5; 3],
            eta: vec![1.0; rings],
            ring_on: vec![true; rings],
        }
    }

    pub fn rings(&self) -> usize {
        self.pump_power_mw.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.rings();
        if self.eta.len() != n || self.ring_on.len() != n {
            return Err(Error::contract(
                "per-ring program fields must all have the same length",
            ));
        }
        if self.ps_phase_rad.len() != n.saturating_sub(1) {
            return Err(Error::contract(format!(
                "expected {} phase-shifter settings for {n} rings, got {}",
                n - 1,
                self.ps_phase_rad.len()
            )));
        }
        if self.pump_power_mw.iter().any(|p| *p < 0.0) {
            return Err(Error::contract("pump powers must be non-negative"));
        }
        if self.mz_split.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::contract("splitting fractions must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Power fraction reaching each ring through the splitter tree
    /// (MZ1 feeds MZ2/MZ3 for a four-ring device; other sizes split evenly).
    pub fn tree_fractions(&self) -> Vec<f64> {
        let n = self.rings();
        if n == 4 && self.mz_split.len() == 3 {
            let (s1, s2, s3) = (self.mz_split[0], self.mz_split[1], self.mz_split[2]);
            vec![
                s1 * s2,
                s1 * (1.0 - s2),
                (1.0 - s1) * s3,
                (1.0 - s1) * (1.0 - s3),
            ]
        } else {
            vec![1.0 / n as f64; n]
        }
    }
}

/// Nearest-neighbor thermal crosstalk matrix for `n` phase shifters.
pub fn nearest_neighbor_crosstalk(n: usize, coupling: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i.abs_diff(j) == 1 {
            coupling
        } else {
            0.0
        }
    })
}

/// The programmable multi-ring source: ring set, phase-shifter crosstalk,
/// and the per-ring brightness constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiRingSource {
    pub rings: Vec<RingSpec>,
    /// Linear map from nominal PS settings to realized path phases.
    pub crosstalk: DMatrix<f64>,
    /// Measured per-ring brightness (MHz per mW²).
    pub brightness_mhz_per_mw2: f64,
}

impl MultiRingSource {
    pub fn new(rings: Vec<RingSpec>, crosstalk_coupling: f64) -> Result<Self> {
        if rings.len() < 2 {
            return Err(Error::contract("a source needs at least two rings"));
        }
        let n_ps = rings.len() - 1;
        Ok(Self {
            rings,
            crosstalk: nearest_neighbor_crosstalk(n_ps, crosstalk_coupling),
            brightness_mhz_per_mw2: 0.63,
        })
    }

    pub fn dim(&self) -> usize {
        self.rings.len()
    }

    /// Realized path phase per ring: ring 0 is the reference, rings `k >= 1`
    /// see the crosstalk-mixed phase-shifter settings.
    pub fn path_phases(&self, program: &CircuitProgram) -> Vec<f64> {
        let mixed = &self.crosstalk * DMatrix::from_column_slice(
            program.ps_phase_rad.len(),
            1,
            &program.ps_phase_rad,
        );
        let mut phases = vec![0.0; self.dim()];
        for k in 1..self.dim() {
            phases[k] = mixed[(k - 1, 0)];
        }
        phases
    }

    /// Program-to-state law: `α_k ∝ η_k P_k e^{i 2 θ_k}` (the biphoton phase
    /// doubles the pump path phase), zero for rings that are off.
    pub fn amplitudes(&self, program: &CircuitProgram) -> Result<TwoPhotonState> {
        program.validate()?;
        if program.rings() != self.dim() {
            return Err(Error::dimension(format!(
                "program addresses {} rings but the source has {}",
                program.rings(),
                self.dim()
            )));
        }
        let phases = self.path_phases(program);
        let fractions = program.tree_fractions();
        let mut amps = Vec::with_capacity(self.dim());
        let mut any_on = false;
        for k in 0..self.dim() {
            let on = program.ring_on[k] && self.rings[k].enabled;
            if on {
                any_on = true;
                let p_eff = program.pump_power_mw[k] * fractions[k];
                let a = Complex64::from_polar(program.eta[k] * p_eff, 2.0 * phases[k]);
                amps.push(a);
            } else {
                amps.push(Complex64::new(0.0, 0.0));
            }
        }
        if !any_on {
            return Err(Error::contract("all rings are off"));
        }
        TwoPhotonState::new(amps)
    }

    /// Photon-pair rate at the modulators: brightness × Σ P_k² over live rings.
    pub fn pair_rate_hz(&self, program: &CircuitProgram) -> f64 {
        let fractions = program.tree_fractions();
        let sum_p2: f64 = (0..self.dim())
            .filter(|&k| program.ring_on[k] && self.rings[k].enabled)
            .map(|k| (program.pump_power_mw[k] * fractions[k]).powi(2))
            .sum();
        self.brightness_mhz_per_mw2 * 1e6 * sum_p2
    }

    /// Gram matrix of the rings' grid-normalized joint spectral amplitudes,
    /// evaluated on one shared quadrature grid (so positivity is structural).
    pub fn indistinguishability_matrix(&self) -> Result<IndistinguishabilityMatrix> {
        let jsas: Vec<JointSpectralAmplitude> =
            self.rings.iter().map(lorentzian_jsa).collect();
        let grid = QuadratureGrid::covering(&jsas);
        // Separable amplitudes: the 2D overlap factorizes into per-axis 1D
        // Gram matrices combined entrywise (Schur product keeps PSD exact).
        let n = jsas.len();
        let ws = QuadratureGrid::weights(&grid.signal);
        let wi = QuadratureGrid::weights(&grid.idler);
        let mut mat = CMatrix::identity(n, n);
        for jsa in &jsas {
            indistinguishability_on_check(&grid, jsa)?;
        }
        let axis_gram = |pts: &[f64], w: &[f64], f: &dyn Fn(&JointSpectralAmplitude, f64) -> Complex64| {
            let mut vals = vec![vec![Complex64::default(); pts.len()]; n];
            for (k, jsa) in jsas.iter().enumerate() {
                for (i, &x) in pts.iter().enumerate() {
                    vals[k][i] = f(jsa, x);
                }
            }
            let mut gram = CMatrix::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let mut dot = Complex64::default();
                    for i in 0..pts.len() {
                        dot += w[i] * vals[a][i] * vals[b][i].conj();
                    }
                    gram[(a, b)] = dot;
                }
            }
            gram
        };
        let gs = axis_gram(&grid.signal, &ws, &|jsa, x| {
            lorentzian(x, jsa.signal_center_ghz, jsa.signal_linewidth_ghz)
        });
        let gi = axis_gram(&grid.idler, &wi, &|jsa, x| {
            lorentzian(x, jsa.idler_center_ghz, jsa.idler_linewidth_ghz)
        });
        for a in 0..n {
            for b in 0..n {
                let denom = (gs[(a, a)].re * gs[(b, b)].re * gi[(a, a)].re * gi[(b, b)].re).sqrt();
                mat[(a, b)] = gs[(a, b)] * gi[(a, b)] / denom;
            }
        }
        IndistinguishabilityMatrix::try_new(mat)
    }
}

fn indistinguishability_on_check(grid: &QuadratureGrid, jsa: &JointSpectralAmplitude) -> Result<()> {
    let mut covered = 1.0;
    let mut reference = 1.0;
    for axis in [Axis::Signal, Axis::Idler] {
        let pts = match axis {
            Axis::Signal => &grid.signal,
            Axis::Idler => &grid.idler,
        };
        covered *= jsa.axis_mass(axis, pts[0], *pts.last().unwrap());
        let (own_lo, own_hi) = jsa.axis_window(axis);
        reference *= jsa.axis_mass(axis, own_lo, own_hi);
    }
    let coverage = covered / reference;
    if coverage < COVERAGE_FLOOR {
        return Err(Error::GridTooSmall {
            coverage,
            required: COVERAGE_FLOOR,
        });
    }
    Ok(())
}

/// Brightness ratio of a single-ring source at two bin spacings, `(δ₁/δ₂)²`.
pub fn brightness_ratio_single_ring(delta1_ghz: f64, delta2_ghz: f64) -> Result<f64> {
    if [delta1_ghz, delta2_ghz].iter().any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(Error::contract("bin spacings must be positive"));
    }
    Ok((delta1_ghz / delta2_ghz).powi(2))
}

/// Ring radius realizing a free spectral range `δ`: `R = v_g / (2π δ)`,
/// returned in µm for `v_g` in m/s and `δ` in GHz.
pub fn ring_radius_for_spacing(v_g_m_per_s: f64, delta_ghz: f64) -> Result<f64> {
    if [v_g_m_per_s, delta_ghz].iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::contract(
            "group velocity and spacing must be positive",
        ));
    }
    let radius_m = v_g_m_per_s / (2.0 * std::f64::consts::PI * delta_ghz * 1e9);
    Ok(radius_m * 1e6)
}

/// Vacuum speed of light (m/s), for group-velocity arithmetic.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
