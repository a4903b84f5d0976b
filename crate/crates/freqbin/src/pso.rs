//! Particle swarm optimization with a deterministic coordinate refinement.
//!
//! Global-best PSO over box bounds, seeded and fully deterministic: particle
//! updates draw from one counter-based stream, and the global best breaks
//! cost ties by particle index. The swarm gets a solution into the right
//! basin; the compass-search refinement then sharpens it to the precision
//! the reconstruction thresholds need.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Swarm size, iteration budget, update weights, and stopping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoOptions {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Stop early once the global best drops below this cost.
    pub target_cost: f64,
}

impl Default for PsoOptions {
    fn default() -> Self {
        Self {
            particles: 60,
            iterations: 2000,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            seed: 0,
            target_cost: 1e-12,
        }
    }
}

/// Outcome of a swarm run.
#[derive(Debug, Clone)]
pub struct PsoResult {
    pub best: Vec<f64>,
    pub cost: f64,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Global-best cost after each iteration (index 0 = initialization).
    pub trace: Vec<f64>,
}

/// Minimize `f` over the box `bounds`.
///
/// The global-best cost is non-increasing by construction; this is asserted
/// in debug builds.
pub fn minimize<F>(f: F, bounds: &[(f64, f64)], opts: &PsoOptions) -> PsoResult
where
    F: Fn(&[f64]) -> f64,
{
    let dim = bounds.len();
    assert!(dim > 0, "empty search space");
    assert!(opts.particles > 0, "empty swarm");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut pos = vec![vec![0.0; dim]; opts.particles];
    let mut vel = vec![vec![0.0; dim]; opts.particles];
    for p in 0..opts.particles {
        for d in 0..dim {
            let (lo, hi) = bounds[d];
            pos[p][d] = lo + (hi - lo) * rng.gen::<f64>();
            vel[p][d] = (hi - lo) * (rng.gen::<f64>() - 0.5) * 0.1;
        }
    }

    let mut pbest = pos.clone();
    let mut pbest_cost: Vec<f64> = pos.iter().map(|x| f(x)).collect();
    let (mut gbest_idx, mut gbest_cost) = argmin(&pbest_cost);
    let mut gbest = pbest[gbest_idx].clone();
    let mut trace = Vec::with_capacity(opts.iterations + 1);
    trace.push(gbest_cost);

    let mut iterations = 0;
    for _ in 0..opts.iterations {
        if gbest_cost <= opts.target_cost {
            break;
        }
        iterations += 1;
        for p in 0..opts.particles {
            for d in 0..dim {
                let (lo, hi) = bounds[d];
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                vel[p][d] = opts.inertia * vel[p][d]
                    + opts.cognitive * r1 * (pbest[p][d] - pos[p][d])
                    + opts.social * r2 * (gbest[d] - pos[p][d]);
                pos[p][d] += vel[p][d];
                if pos[p][d] < lo {
                    pos[p][d] = lo;
                    vel[p][d] = 0.0;
                } else if pos[p][d] > hi {
                    pos[p][d] = hi;
                    vel[p][d] = 0.0;
                }
            }
            let c = f(&pos[p]);
            if c < pbest_cost[p] {
                pbest_cost[p] = c;
                pbest[p].copy_from_slice(&pos[p]);
                if c < gbest_cost {
                    gbest_cost = c;
                    gbest_idx = p;
                    gbest.copy_from_slice(&pos[p]);
                }
            }
        }
        debug_assert!(trace.last().is_none_or(|&prev| gbest_cost <= prev));
        trace.push(gbest_cost);
    }
    let _ = gbest_idx;

    PsoResult {
        best: gbest,
        cost: gbest_cost,
        iterations,
        trace,
    }
}

fn argmin(costs: &[f64]) -> (usize, f64) {
    let mut idx = 0;
    let mut best = costs[0];
    for (i, &c) in costs.iter().enumerate().skip(1) {
        if c < best {
            best = c;
            idx = i;
        }
    }
    (idx, best)
}

/// Deterministic compass-search refinement: per-coordinate probes with a
/// per-coordinate step that doubles while it keeps helping and halves when
/// it stops. Stays inside the box.
pub fn coordinate_refine<F>(
    f: F,
    bounds: &[(f64, f64)],
    start: &[f64],
    max_sweeps: usize,
    target_cost: f64,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = bounds.len();
    let mut x = start.to_vec();
    let mut cost = f(&x);
    let mut steps: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.05 * (hi - lo)).collect();
    for _ in 0..max_sweeps {
        if cost <= target_cost {
            break;
        }
        let mut improved = false;
        for d in 0..dim {
            if steps[d] < 1e-14 {
                continue;
            }
            let (lo, hi) = bounds[d];
            let base = x[d];
            let mut best_val = base;
            let mut best_cost = cost;
            for dir in [1.0, -1.0] {
                let cand = (base + dir * steps[d]).clamp(lo, hi);
                if cand == base {
                    continue;
                }
                x[d] = cand;
                let c = f(&x);
                if c < best_cost {
                    best_cost = c;
                    best_val = cand;
                }
            }
            x[d] = best_val;
            if best_cost < cost {
                cost = best_cost;
                improved = true;
                // keep walking in the winning direction while it pays off
                let dir = (best_val - base).signum();
                loop {
                    let cand = (x[d] + dir * steps[d]).clamp(lo, hi);
                    if cand == x[d] {
                        break;
                    }
                    let prev = x[d];
                    x[d] = cand;
                    let c = f(&x);
                    if c < cost {
                        cost = c;
                    } else {
                        x[d] = prev;
                        break;
                    }
                }
                steps[d] = (steps[d] * 2.0).min(0.25 * (hi - lo));
            } else {
                steps[d] *= 0.5;
            }
        }
        if !improved && steps.iter().all(|&s| s < 1e-12) {
            break;
        }
    }
    (x, cost)
}
