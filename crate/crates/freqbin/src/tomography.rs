//! Maximum-likelihood quantum state tomography.
//!
//! The measurement settings table drives POVM assembly
//! (`𝒫 = U†|q><q|U` restricted to the computational space), predicted counts
//! follow `C = R · L · p · t`, and the cost
//!
//! ```text
//! f_cost = (1/n_meas) Σ (C_theo - C_exp)² / (2 C_theo)
//! ```
//!
//! is minimized over `(R, t)` by particle swarm, where `t` parameterizes
//! `ρ(t) = T T† / Tr(T T†)`. A deterministic coordinate refinement follows
//! the swarm so round-trip fidelities are limited by the data, not the
//! optimizer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binspace::{density_from_cholesky, CholeskyParams, DensityMatrix};
use crate::linalg::{CMatrix, CVector};
use crate::measurement::{CoincidenceRecord, DetectionModel, LossTable, MeasurementSetting};
use crate::pso;
use crate::{Error, Result};

/// Floor on predicted counts inside the cost denominator; records with no
/// observed counts and a prediction below it contribute nothing.
pub const COST_FLOOR: f64 = 1e-3;

/// The measurement settings used for state tomography: 5 settings for
/// qubits, 17 for qutrits and ququarts (redundant on purpose — the extra
/// settings speed up convergence).
pub fn settings_table(d: usize) -> Result<Vec<MeasurementSetting>> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
    let on_s = 22.1;
    let on_i = 24.3;
    match d {
        2 => Ok(vec![
            MeasurementSetting::new(1, 0.0, 0.0, 0.0, 0.0)?,
            MeasurementSetting::new(2, on_s, 0.0, on_i, 0.0)?,
            MeasurementSetting::new(3, on_s, FRAC_PI_2, on_i, -FRAC_PI_2)?,
            MeasurementSetting::new(4, on_s, 0.0, 0.0, 0.0)?,
            MeasurementSetting::new(5, 0.0, 0.0, on_i, 0.0)?,
        ]),
        3 | 4 => {
            let phases = [0.0, 4.0 * FRAC_PI_3, -4.0 * FRAC_PI_3, 2.0 * FRAC_PI_3];
            let mut out = Vec::with_capacity(17);
            let mut id = 1;
            for &ts in &phases {
                for &ti in &phases {
                    out.push(MeasurementSetting::new(id, on_s, ts, on_i, ti)?);
                    id += 1;
                }
            }
            out.push(MeasurementSetting::new(17, 0.0, 0.0, 0.0, 0.0)?);
            Ok(out)
        }
        other => Err(Error::UnsupportedDimension {
            dim: other,
            reason: "tomography settings are tabulated for D in {2, 3, 4}".into(),
        }),
    }
}

/// One POVM element: the (sub-normalized) analysis vector behind outcome
/// `(m, n)` of a measurement setting, restricted to the computational space.
#[derive(Debug, Clone)]
pub struct PovmEntry {
    pub setting_id: u32,
    pub m: usize,
    pub n: usize,
    vector: CVector,
}

impl PovmEntry {
    /// The positive operator `|φ><φ|`.
    pub fn operator(&self) -> CMatrix {
        let n = self.vector.len();
        CMatrix::from_fn(n, n, |i, j| self.vector[i] * self.vector[j].conj())
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    /// `Tr(ρ 𝒫) = <φ|ρ|φ>`.
    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        let chi = rho.matrix() * &self.vector;
        self.vector.dotc(&chi).re.max(0.0)
    }
}

/// All POVM elements of a settings table on one detection model.
#[derive(Debug, Clone)]
pub struct PovmSet {
    pub d: usize,
    pub entries: Vec<PovmEntry>,
}

impl PovmSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, setting_id: u32, m: usize, n: usize) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.setting_id == setting_id && e.m == m && e.n == n)
    }
}

/// Assemble the POVM set `𝒫_jq = U†(γ_j)|q><q|U(γ_j)` for every setting and
/// computational outcome pair.
pub fn build_povms(settings: &[MeasurementSetting], model: &DetectionModel) -> Result<PovmSet> {
    let d = model.grid.dim();
    let mut entries = Vec::with_capacity(settings.len() * d * d);
    for setting in settings {
        let (ms, mi) = model.modulators(setting)?;
        let fam = crate::eom::projector_family(&ms, &mi, &model.grid)?;
        for m in 0..d {
            for n in 0..d {
                entries.push(PovmEntry {
                    setting_id: setting.id,
                    m,
                    n,
                    vector: fam.analysis_vector(m as i64, n as i64),
                });
            }
        }
    }
    Ok(PovmSet { d, entries })
}

/// Optimizer controls for a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Bound on each Cholesky parameter.
    pub param_bound: f64,
    /// Rate search bounds as multiples of the count-derived estimate.
    pub rate_bounds: (f64, f64),
    /// Compass-search sweeps after the swarm.
    pub refine_sweeps: usize,
    /// Final cost at or below which the run counts as converged.
    pub convergence_cost: f64,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            particles: 60,
            iterations: 2000,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            seed: 0,
            param_bound: 1.0,
            rate_bounds: (0.1, 10.0),
            refine_sweeps: 400,
            convergence_cost: 10.0,
        }
    }
}

/// A fully specified reconstruction problem: POVMs, observed counts, losses,
/// and optimizer options. Records are canonicalized on construction so the
/// outcome is independent of their input order.
#[derive(Debug, Clone)]
pub struct TomographyProblem {
    pub d: usize,
    pub povms: PovmSet,
    records: Vec<CoincidenceRecord>,
    record_povm: Vec<usize>,
    pub loss: LossTable,
    pub options: ReconstructionOptions,
}

impl TomographyProblem {
    pub fn new(
        povms: PovmSet,
        mut records: Vec<CoincidenceRecord>,
        loss: LossTable,
        options: ReconstructionOptions,
    ) -> Result<Self> {
        let d = povms.d;
        loss.validate(d)?;
        if records.len() < d * d * d * d {
            return Err(Error::UnderDetermined(format!(
                "{} records cannot determine a D={d} state (need at least D^4 = {})",
                records.len(),
                d * d * d * d
            )));
        }
        records.sort_by_key(|r| (r.setting_id, r.m, r.n));
        let mut record_povm = Vec::with_capacity(records.len());
        for r in &records {
            let idx = povms.find(r.setting_id, r.m, r.n).ok_or_else(|| {
                Error::contract(format!(
                    "record (setting {}, bins {}, {}) has no POVM in the set",
                    r.setting_id, r.m, r.n
                ))
            })?;
            record_povm.push(idx);
        }
        Ok(Self {
            d,
            povms,
            records,
            record_povm,
            loss,
            options,
        })
    }

    pub fn records(&self) -> &[CoincidenceRecord] {
        &self.records
    }

    pub fn n_meas(&self) -> usize {
        self.records.len()
    }

    /// Scale-free rate estimate: total observed counts against what the
    /// maximally mixed state would predict at unit rate.
    pub fn rate_estimate(&self) -> f64 {
        let total: f64 = self.records.iter().map(|r| r.counts as f64).sum();
        let joint = (self.d * self.d) as f64;
        let mixed: f64 = self
            .records
            .iter()
            .zip(&self.record_povm)
            .map(|(r, &idx)| {
                let p = self.povms.entries[idx].vector.norm_squared() / joint;
                self.loss.get(r.m, r.n) * p * r.integration_s
            })
            .sum();
        if mixed <= 0.0 {
            return 1.0;
        }
        (total / mixed).max(f64::MIN_POSITIVE)
    }

    fn evaluator(&self) -> CostEvaluator<'_> {
        CostEvaluator::new(self)
    }
}

/// Flattened hot path for the cost: analysis vectors and the triangular
/// factor as plain slices.
struct CostEvaluator<'a> {
    problem: &'a TomographyProblem,
    n: usize,
    /// per record: analysis vector (length n), loss × integration factor,
    /// observed counts
    vectors: Vec<Vec<Complex64>>,
    factors: Vec<f64>,
    observed: Vec<f64>,
}

impl<'a> CostEvaluator<'a> {
    fn new(problem: &'a TomographyProblem) -> Self {
        let n = problem.d * problem.d;
        let mut vectors = Vec::with_capacity(problem.records.len());
        let mut factors = Vec::with_capacity(problem.records.len());
        let mut observed = Vec::with_capacity(problem.records.len());
        for (r, &idx) in problem.records.iter().zip(&problem.record_povm) {
            vectors.push(problem.povms.entries[idx].vector.iter().copied().collect());
            factors.push(problem.loss.get(r.m, r.n) * r.integration_s);
            observed.push(r.counts as f64);
        }
        Self {
            problem,
            n,
            vectors,
            factors,
            observed,
        }
    }

    /// `x = [t..., rate]`
    fn cost(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let t = &x[..n * n];
        let rate = x[n * n];
        // lower-triangular T from the parameter layout
        let mut tm = vec![Complex64::new(0.0, 0.0); n * n];
        let mut trace = 0.0;
        for j in 0..n {
            tm[j * n + j] = Complex64::new(t[j], 0.0);
            trace += t[j] * t[j];
        }
        let mut pos = n;
        for i in 1..n {
            for j in 0..i {
                let z = Complex64::new(t[pos], t[pos + 1]);
                tm[i * n + j] = z;
                trace += z.norm_sqr();
                pos += 2;
            }
        }
        if trace <= 1e-300 {
            return f64::MAX;
        }
        let mut total = 0.0;
        for (rec, (phi, (&factor, &c_exp))) in self
            .vectors
            .iter()
            .zip(self.factors.iter().zip(self.observed.iter()))
            .enumerate()
        {
            let _ = rec;
            let (phi, (factor, c_exp)) = (phi, (factor, c_exp));
            // p = ||T† φ||² / Tr(TT†); (T†φ)_j = Σ_{k>=j} conj(T_kj) φ_k
            let mut norm2 = 0.0;
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in j..n {
                    let tkj = tm[k * n + j];
                    if tkj.re != 0.0 || tkj.im != 0.0 {
                        acc += tkj.conj() * phi[k];
                    }
                }
                norm2 += acc.norm_sqr();
            }
            let p = norm2 / trace;
            let c_theo = rate * factor * p;
            if c_theo < COST_FLOOR {
                if c_exp == 0.0 {
                    continue;
                }
                total += (c_theo - c_exp).powi(2) / (2.0 * COST_FLOOR);
            } else {
                total += (c_theo - c_exp).powi(2) / (2.0 * c_theo);
            }
        }
        total / self.problem.records.len() as f64
    }
}

/// Likelihood cost of a candidate `(t, R)` against the problem's records.
pub fn cost(params: &CholeskyParams, rate: f64, problem: &TomographyProblem) -> Result<f64> {
    let n = problem.d * problem.d;
    if params.matrix_dim() != n {
        return Err(Error::dimension(format!(
            "parameter vector is for an {}x{} factor, problem needs {n}x{n}",
            params.matrix_dim(),
            params.matrix_dim()
        )));
    }
    if !rate.is_finite() || params.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("cost inputs must be finite"));
    }
    let mut x = params.values().to_vec();
    x.push(rate);
    Ok(problem.evaluator().cost(&x))
}

/// Reconstruction output: the recovered state, rate, diagnostics, and the
/// seed that reproduces the run.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub rate_hz: f64,
    pub cost: f64,
    pub iterations: usize,
    /// Per-record `C_theo - C_exp`, in canonical record order.
    pub residuals: Vec<f64>,
    pub seed: u64,
    pub converged: bool,
    /// Global-best cost per swarm iteration.
    pub cost_trace: Vec<f64>,
}

/// Minimize the cost over `(R, t)` with the swarm, refine, and map the best
/// parameters through the Cholesky factorization.
pub fn pso_reconstruct(problem: &TomographyProblem) -> Result<ReconstructionResult> {
    let n = problem.d * problem.d;
    let opts = &problem.options;
    let evaluator = problem.evaluator();
    let r0 = problem.rate_estimate();
    let mut bounds = vec![(-opts.param_bound, opts.param_bound); n * n];
    bounds.push((opts.rate_bounds.0 * r0, opts.rate_bounds.1 * r0));

    let pso_opts = pso::PsoOptions {
        particles: opts.particles,
        iterations: opts.iterations,
        inertia: opts.inertia,
        cognitive: opts.cognitive,
        social: opts.social,
        seed: opts.seed,
        target_cost: 1e-14,
    };
    let swarm = pso::minimize(|x| evaluator.cost(x), &bounds, &pso_opts);
    let (best, final_cost) = pso::coordinate_refine(
        |x| evaluator.cost(x),
        &bounds,
        &swarm.best,
        opts.refine_sweeps,
        1e-14,
    );

    let params = CholeskyParams::new(best[..n * n].to_vec())?;
    let rate = best[n * n];
    let rho = density_from_cholesky(&params)?;

    let residuals: Vec<f64> = problem
        .records
        .iter()
        .zip(&problem.record_povm)
        .map(|(r, &idx)| {
            let p = problem.povms.entries[idx].probability(&rho);
            rate * problem.loss.get(r.m, r.n) * p * r.integration_s - r.counts as f64
        })
        .collect();

    Ok(ReconstructionResult {
        rho,
        rate_hz: rate,
        cost: final_cost,
        iterations: swarm.iterations,
        residuals,
        seed: opts.seed,
        converged: final_cost <= opts.convergence_cost,
        cost_trace: swarm.trace,
    })
}

/// Predicted records for a state at a rate: the forward model tomography
/// inverts. Counts are left at zero; the caller fills observed counts
/// (noiseless rounding or Poisson draws).
pub fn predict_expected(
    povms: &PovmSet,
    rho: &DensityMatrix,
    rate_hz: f64,
    loss: &LossTable,
    integration_s: f64,
) -> Vec<CoincidenceRecord> {
    povms
        .entries
        .iter()
        .map(|e| {
            let p = e.probability(rho);
            CoincidenceRecord {
                setting_id: e.setting_id,
                m: e.m,
                n: e.n,
                counts: 0,
                expected: rate_hz * loss.get(e.m, e.n) * p * integration_s,
                integration_s,
            }
        })
        .collect()
}
