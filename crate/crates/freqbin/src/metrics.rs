//! State certification: CGLMP Bell parameter, dimension witness, and
//! correlation matrices on mutually unbiased bases.
//!
//! CGLMP measurements are Fourier bases with per-setting phase offsets
//! (canonical offsets `(0, 1/2; 1/4, -1/4)`); the correlator is the signed
//! sum over outcome-difference probabilities with weights `1 - 2k/(D-1)`.
//! Programmed sign patterns are absorbed into the analysis frame as a local
//! diagonal unitary, matching how the certified states are evaluated. The
//! idler side uses complex-conjugated analysis vectors throughout.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binspace::DensityMatrix;
use crate::eom::{mub_bases, sideband_matrix, ModulatorSetting};
use crate::linalg::{kron_vec, CVector};
use crate::measurement::DetectionModel;
use crate::{Error, Result};

/// Fourier phase offsets (in index units of `2π/D`) for the two measurement
/// settings of each party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CglmpSettings {
    pub alice: (f64, f64),
    pub bob: (f64, f64),
}

impl CglmpSettings {
    /// The standard offsets that maximize the ideal-state violation.
    pub fn canonical() -> Self {
        Self {
            alice: (0.0, 0.5),
            bob: (0.25, -0.25),
        }
    }
}

fn alice_vector(d: usize, offset: f64, outcome: usize) -> CVector {
    let norm = (d as f64).sqrt();
    CVector::from_fn(d, |j, _| {
        Complex64::from_polar(
            1.0 / norm,
            2.0 * std::f64::consts::PI * j as f64 * (outcome as f64 + offset) / d as f64,
        )
    })
}

fn bob_vector(d: usize, offset: f64, outcome: usize) -> CVector {
    let norm = (d as f64).sqrt();
    CVector::from_fn(d, |j, _| {
        Complex64::from_polar(
            1.0 / norm,
            2.0 * std::f64::consts::PI * j as f64 * (offset - outcome as f64) / d as f64,
        )
    })
}

/// Joint outcome probabilities for one (Alice, Bob) setting pair.
fn joint_table(rho: &DensityMatrix, d: usize, a_off: f64, b_off: f64, signs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |k, l| {
        let mut a = alice_vector(d, a_off, k);
        for (j, s) in signs.iter().enumerate() {
            a[j] *= Complex64::new(*s, 0.0);
        }
        let b = bob_vector(d, b_off, l);
        let v = kron_vec(&a, &b);
        let chi = rho.matrix() * &v;
        v.dotc(&chi).re.max(0.0)
    })
}

fn prob_a_eq_b_plus(table: &DMatrix<f64>, shift: i64) -> f64 {
    let d = table.nrows() as i64;
    (0..d)
        .map(|j| table[(((j + shift).rem_euclid(d)) as usize, j as usize)])
        .sum()
}

fn prob_b_eq_a_plus(table: &DMatrix<f64>, shift: i64) -> f64 {
    let d = table.nrows() as i64;
    (0..d)
        .map(|j| table[(j as usize, ((j + shift).rem_euclid(d)) as usize)])
        .sum()
}

fn validate_cglmp_inputs(rho: &DensityMatrix, d: usize, signs: &[f64]) -> Result<()> {
    if !(2..=4).contains(&d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "CGLMP correlator is evaluated for D in {2, 3, 4}".into(),
        });
    }
    if rho.dim() != d * d {
        return Err(Error::dimension(format!(
            "CGLMP for D={d} needs a {0}x{0} joint matrix, got {1}x{1}",
            d * d,
            rho.dim()
        )));
    }
    if signs.len() != d {
        return Err(Error::dimension(format!(
            "sign pattern length {} does not match D={d}",
            signs.len()
        )));
    }
    Ok(())
}

fn cglmp_from_tables(tables: &[DMatrix<f64>; 4], d: usize) -> f64 {
    // tables: [A1B1, A1B2, A2B1, A2B2]
    let (a1b1, a1b2, a2b1, a2b2) = (&tables[0], &tables[1], &tables[2], &tables[3]);
    let mut s = 0.0;
    for k in 0..(d / 2) as i64 {
        let w = 1.0 - 2.0 * k as f64 / (d as f64 - 1.0);
        let plus = prob_a_eq_b_plus(a1b1, k)
            + prob_b_eq_a_plus(a2b1, k + 1)
            + prob_a_eq_b_plus(a2b2, k)
            + prob_b_eq_a_plus(a1b2, k);
        let minus = prob_a_eq_b_plus(a1b1, -(k + 1))
            + prob_b_eq_a_plus(a2b1, -k)
            + prob_a_eq_b_plus(a2b2, -(k + 1))
            + prob_b_eq_a_plus(a1b2, -(k + 1));
        s += w * (plus - minus);
    }
    s
}

/// CGLMP parameter `S` for Fourier measurements at the given offsets.
/// Classically `S <= 2`; the maximally entangled values at canonical offsets
/// are 2.8284 (D=2), 2.8729 (D=3), 2.8962 (D=4).
pub fn cglmp_parameter(rho: &DensityMatrix, d: usize, settings: &CglmpSettings) -> Result<f64> {
    cglmp_parameter_adapted(rho, d, settings, &vec![1.0; d])
}

/// CGLMP parameter with the analysis frame adapted to a programmed sign
/// pattern (the pattern multiplies Alice's analysis vectors, equivalently a
/// local diagonal unitary on the state). With an all-ones pattern this is
/// exactly [`cglmp_parameter`].
pub fn cglmp_parameter_adapted(
    rho: &DensityMatrix,
    d: usize,
    settings: &CglmpSettings,
    target_signs: &[f64],
) -> Result<f64> {
    validate_cglmp_inputs(rho, d, target_signs)?;
    let tables = [
        joint_table(rho, d, settings.alice.0, settings.bob.0, target_signs),
        joint_table(rho, d, settings.alice.0, settings.bob.1, target_signs),
        joint_table(rho, d, settings.alice.1, settings.bob.0, target_signs),
        joint_table(rho, d, settings.alice.1, settings.bob.1, target_signs),
    ];
    Ok(cglmp_from_tables(&tables, d))
}

/// Numerically maximize `S` over the four phase offsets (deterministic
/// Nelder-Mead from a fixed set of starts).
pub fn cglmp_optimized(rho: &DensityMatrix, d: usize) -> Result<(f64, CglmpSettings)> {
    validate_cglmp_inputs(rho, d, &vec![1.0; d])?;
    let objective = |x: &[f64; 4]| {
        let settings = CglmpSettings {
            alice: (x[0], x[1]),
            bob: (x[2], x[3]),
        };
        cglmp_parameter(rho, d, &settings).unwrap_or(f64::NEG_INFINITY)
    };
    let canon = CglmpSettings::canonical();
    let starts = [
        [canon.alice.0, canon.alice.1, canon.bob.0, canon.bob.1],
        [0.1, 0.6, 0.35, -0.15],
        [0.5, 0.0, -0.25, 0.25],
        [0.25, 0.75, 0.5, 0.0],
    ];
    let mut best = (f64::NEG_INFINITY, starts[0]);
    for start in starts {
        let (x, v) = nelder_mead_max(&objective, start, 0.2, 400);
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok((
        best.0,
        CglmpSettings {
            alice: (best.1[0], best.1[1]),
            bob: (best.1[2], best.1[3]),
        },
    ))
}

/// Deterministic Nelder-Mead maximization in four dimensions.
fn nelder_mead_max(f: &dyn Fn(&[f64; 4]) -> f64, start: [f64; 4], scale: f64, iters: usize) -> ([f64; 4], f64) {
    const N: usize = 4;
    let mut simplex: Vec<[f64; 4]> = vec![start];
    for i in 0..N {
        let mut v = start;
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(&f).collect();
    for _ in 0..iters {
        // sort descending (maximization)
        let mut order: Vec<usize> = (0..=N).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        let simplex_sorted: Vec<[f64; 4]> = order.iter().map(|&i| simplex[i]).collect();
        let values_sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = simplex_sorted;
        values = values_sorted;

        if (values[0] - values[N]).abs() < 1e-12 {
            break;
        }
        let mut centroid = [0.0; 4];
        for v in simplex.iter().take(N) {
            for i in 0..N {
                centroid[i] += v[i] / N as f64;
            }
        }
        let worst = simplex[N];
        let mut reflect = [0.0; 4];
        for i in 0..N {
            reflect[i] = centroid[i] + (centroid[i] - worst[i]);
        }
        let fr = f(&reflect);
        if fr > values[0] {
            let mut expand = [0.0; 4];
            for i in 0..N {
                expand[i] = centroid[i] + 2.0 * (centroid[i] - worst[i]);
            }
            let fe = f(&expand);
            if fe > fr {
                simplex[N] = expand;
                values[N] = fe;
            } else {
                simplex[N] = reflect;
                values[N] = fr;
            }
        } else if fr > values[N - 1] {
            simplex[N] = reflect;
            values[N] = fr;
        } else {
            let mut contract = [0.0; 4];
            for i in 0..N {
                contract[i] = centroid[i] + 0.5 * (worst[i] - centroid[i]);
            }
            let fc = f(&contract);
            if fc > values[N] {
                simplex[N] = contract;
                values[N] = fc;
            } else {
                let best = simplex[0];
                for v in simplex.iter_mut().skip(1) {
                    for i in 0..N {
                        v[i] = best[i] + 0.5 * (v[i] - best[i]);
                    }
                }
                for (v, val) in simplex.iter().zip(values.iter_mut()).skip(1) {
                    *val = f(v);
                }
            }
        }
    }
    let mut best_idx = 0;
    for i in 1..=N {
        if values[i] > values[best_idx] {
            best_idx = i;
        }
    }
    (simplex[best_idx], values[best_idx])
}

/// Dimension witness from Z-basis coincidences: normalize the table to
/// `q_mn`, then `𝒟 = (Σ_k √q_kk)²`. Returns `𝒟` and the certified dimension
/// `⌈𝒟⌉`.
pub fn dimension_witness(z_counts: &DMatrix<f64>) -> Result<(f64, usize)> {
    if z_counts.nrows() != z_counts.ncols() {
        return Err(Error::dimension(format!(
            "Z-basis table must be square, got {}x{}",
            z_counts.nrows(),
            z_counts.ncols()
        )));
    }
    if z_counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::contract("counts must be non-negative and finite"));
    }
    let total: f64 = z_counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::contract("Z-basis table has zero total counts"));
    }
    let root_sum: f64 = (0..z_counts.nrows())
        .map(|k| (z_counts[(k, k)] / total).sqrt())
        .sum();
    let witness = root_sum * root_sum;
    // guard the ceiling against floating-point dust just above an integer
    let certified = (witness - 1e-9).ceil().max(1.0) as usize;
    Ok((witness, certified))
}

/// Correlation matrix over MUB projections: rows are Alice's outcomes across
/// bases, columns Bob's. Same-basis blocks of superposition bases are
/// sub-normalized (the `J̄√D` projector scale), which biases nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub data: DMatrix<f64>,
}

impl CorrelationMatrix {
    fn validate(&self) -> Result<()> {
        if self.data.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) {
            return Err(Error::contract(
                "correlation entries must be probabilities in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Simulated (`C_e`) and theoretical (`C_t`) MUB correlation matrices.
///
/// `C_e` runs the state through the windowed modulator model (Bob's side at
/// the negated RF phase: projection onto conjugated vectors). `C_t` uses
/// exact basis vectors with the analytic `J̄√D` scaling against the ideal
/// maximally entangled state.
pub fn mub_correlation(
    rho: &DensityMatrix,
    d: usize,
    model: &DetectionModel,
) -> Result<(CorrelationMatrix, CorrelationMatrix)> {
    if rho.dim() != d * d {
        return Err(Error::dimension(format!(
            "state dimension {} does not match D={d}",
            rho.dim()
        )));
    }
    let bases = mub_bases(d)?;
    let jbar = crate::bessel::bessel_j(0, crate::bessel::equal_sideband_index())?;
    let scale = jbar * (d as f64).sqrt();
    let ideal = crate::binspace::bell_state(d, &vec![1.0; d])?.density();

    let mut labels = Vec::new();
    // Analysis vectors are state-independent; build them once per side.
    let mut signal_vecs = Vec::new(); // simulated, through the sideband model
    let mut idler_vecs = Vec::new(); // simulated, conjugated (negated RF phase)
    let mut exact_signal = Vec::new();
    let mut exact_idler = Vec::new();
    for basis in &bases {
        for (j, mv) in basis.vectors.iter().enumerate() {
            labels.push(format!("{}{}", basis.name, j));
            if mv.setting.beta == 0.0 {
                signal_vecs.push(unit_vector(d, mv.readout_bin));
                idler_vecs.push(unit_vector(d, mv.readout_bin));
            } else {
                signal_vecs.push(
                    sideband_matrix(&mv.setting, &model.grid)?
                        .analysis_vector_computational(mv.readout_bin as i64, d),
                );
                let conj_setting = ModulatorSetting::new(mv.setting.beta, -mv.setting.theta)?;
                idler_vecs.push(
                    sideband_matrix(&conj_setting, &model.grid)?
                        .analysis_vector_computational(mv.readout_bin as i64, d),
                );
            }
            let exact = scaled_exact(&mv.vector, mv.setting.beta, scale);
            exact_idler.push(exact.map(|z| z.conj()));
            exact_signal.push(exact);
        }
    }

    let total = labels.len();
    let mut c_e = DMatrix::zeros(total, total);
    let mut c_t = DMatrix::zeros(total, total);
    for row in 0..total {
        for col in 0..total {
            let v = kron_vec(&signal_vecs[row], &idler_vecs[col]);
            let chi = rho.matrix() * &v;
            c_e[(row, col)] = v.dotc(&chi).re.max(0.0);

            let vt = kron_vec(&exact_signal[row], &exact_idler[col]);
            let chit = ideal.matrix() * &vt;
            c_t[(row, col)] = vt.dotc(&chit).re.max(0.0);
        }
    }

    let c_e = CorrelationMatrix {
        row_labels: labels.clone(),
        col_labels: labels.clone(),
        data: c_e,
    };
    let c_t = CorrelationMatrix {
        row_labels: labels.clone(),
        col_labels: labels,
        data: c_t,
    };
    c_e.validate()?;
    c_t.validate()?;
    Ok((c_e, c_t))
}

fn unit_vector(d: usize, k: usize) -> CVector {
    CVector::from_fn(d, |i, _| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0))
}

fn scaled_exact(v: &CVector, beta: f64, scale: f64) -> CVector {
    if beta == 0.0 {
        v.clone()
    } else {
        v.scale(scale)
    }
}

/// Whether a single-modulator MUB set exists for a dimension.
pub fn mub_bases_exist(d: usize) -> bool {
    matches!(d, 2 | 3)
}

/// Correlation fidelity
/// `ℱ = Tr(C_e' C_t) Tr(C_t' C_e) / (Tr(C_e' C_e) Tr(C_t' C_t))`,
/// scale-invariant in each argument.
pub fn mub_fidelity(c_e: &CorrelationMatrix, c_t: &CorrelationMatrix) -> Result<f64> {
    if c_e.data.shape() != c_t.data.shape() {
        return Err(Error::dimension(format!(
            "correlation matrices differ in shape: {:?} vs {:?}",
            c_e.data.shape(),
            c_t.data.shape()
        )));
    }
    let dot = |a: &DMatrix<f64>, b: &DMatrix<f64>| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
    };
    let ee = dot(&c_e.data, &c_e.data);
    let tt = dot(&c_t.data, &c_t.data);
    if ee <= 0.0 || tt <= 0.0 {
        return Err(Error::Normalization(
            "correlation matrices must have nonzero norm".into(),
        ));
    }
    let et = dot(&c_e.data, &c_t.data);
    Ok(et * et / (ee * tt))
}
