//! Counterexample search: when the algebraic criterion says a body is not
//! invariant, hunt for initial data that demonstrably exit it.
//!
//! Candidates are tangential bumps anchored at boundary points whose normals
//! failed the alignment test. The bump coefficients are biased by the sign
//! pattern of `(tau, A^T nu)` so the normal component of the solution grows
//! at the bump center; for curved boundaries the whole field is pulled
//! inward first and the bump is rescaled until grid membership holds.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bodies::ConvexBody;
use crate::criterion::{check_theorem, SampleGrid, VerdictStatus};
use crate::error::{Error, Result};
use crate::system::Coefficients;

use super::field::SolutionField;
use super::init::{counterexample_init, BumpSpec};
use super::{run_monitored_inner, SimConfig, ViolationTrace};

/// A found counterexample: the initial data, its violation trace and the
/// first time the trace exceeded the exit threshold.
#[derive(Debug, Clone)]
pub struct FalsifyWitness {
    pub candidate: usize,
    pub normal: DVector<f64>,
    pub initial: SolutionField,
    pub trace: ViolationTrace,
    pub first_exit: f64,
    pub exit_margin: f64,
}

#[derive(Debug, Clone)]
pub struct FalsifyReport {
    pub witness: Option<FalsifyWitness>,
    pub candidates_tried: usize,
    /// Exit threshold relative to which the witness was accepted
    /// (10x the solver tolerance of the winning run).
    pub threshold: f64,
}

fn orthonormal_to(nu: &DVector<f64>, rng: &mut ChaCha8Rng) -> Option<DVector<f64>> {
    let m = nu.len();
    for _ in 0..32 {
        let w = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0f64));
        let w = &w - nu * w.dot(nu);
        if w.norm() > 1e-6 {
            return Some(w.normalize());
        }
    }
    None
}

/// Misalignment directions `A^T nu - mu nu` of the coefficient matrices at
/// the origin; these are orthogonal to `nu` and mark where mass leaks.
fn leak_directions(system: &Coefficients, nu: &DVector<f64>) -> Vec<DVector<f64>> {
    let set = system.evaluate(&vec![0.0; system.space_dim()], 0.0);
    let mut out = Vec::new();
    for (_, mat) in set.iter_labeled() {
        let w = mat.transpose() * nu;
        let resid = &w - nu * w.dot(nu);
        if resid.norm() > 1e-12 {
            out.push(resid.normalize());
        }
    }
    out
}

/// Bump coefficients whose sign pattern maximizes the initial growth rate
/// `sum (a_jk + a_kj)(tau, A_jk^T nu) + sum b_j (tau, A_j^T nu)`.
fn biased_coefficients(
    system: &Coefficients,
    nu: &DVector<f64>,
    tau: &DVector<f64>,
    flip: f64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = system.space_dim();
    let set = system.evaluate(&vec![0.0; n], 0.0);
    let mut alpha = vec![vec![0.0; n]; n];
    let mut beta = vec![0.0; n];
    let signum = |c: f64| {
        if c > 1e-14 {
            1.0
        } else if c < -1e-14 {
            -1.0
        } else {
            0.0
        }
    };
    for j in 0..n {
        for (k, slot) in alpha[j].iter_mut().enumerate() {
            *slot = flip * signum(tau.dot(&(set.second_order(j, k).transpose() * nu)));
        }
        beta[j] = flip * signum(tau.dot(&(set.first_order(j).transpose() * nu)));
    }
    (alpha, beta)
}

struct Candidate {
    nu: DVector<f64>,
    tau: DVector<f64>,
    amplitude: f64,
    inward: f64,
    flip: f64,
    radius_frac: f64,
}

fn plan_candidate(
    index: usize,
    seed: u64,
    system: &Coefficients,
    normals: &[DVector<f64>],
) -> Option<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    // Mixed-radix sweep so every normal meets every inward offset and sign.
    // The inward offsets trade membership room against the transient leak,
    // which favors small pulls on curved boundaries.
    let flip = if index % 2 == 0 { 1.0 } else { -1.0 };
    let inward = [0.0, 0.002, 0.01, 0.05, 0.2][(index / 2) % 5];
    let nu = normals[(index / 10) % normals.len()].clone();
    let lap = index / (10 * normals.len());
    let amplitude = [1.0, 2.0, 0.5, 4.0][lap % 4];
    let radius_frac = [0.4, 0.25, 0.45, 0.15][(lap / 4) % 4];
    let leaks = leak_directions(system, &nu);
    // Early laps follow the leak directions, later ones roam randomly.
    let tau = if !leaks.is_empty() && lap < 8 {
        leaks[lap % leaks.len()].clone()
    } else {
        orthonormal_to(&nu, &mut rng)?
    };
    Some(Candidate {
        nu,
        tau,
        amplitude,
        inward,
        flip,
        radius_frac,
    })
}

/// Searches for initial data exiting the body by more than ten times the
/// solver tolerance. Requires a prior NotInvariant/NecessaryViolated
/// verdict; returns `Ok` with no witness when the budget is exhausted.
pub fn falsify(
    system: &Coefficients,
    body: &ConvexBody,
    config: &SimConfig,
    budget: usize,
    seed: u64,
) -> Result<FalsifyReport> {
    config.validate()?;
    let n = system.space_dim();
    // Constant systems need one sample point; otherwise judge alignment on a
    // coarse subgrid of the simulation box.
    let grid = if system.space_dependent() || system.time_dependent() {
        let mut xs = vec![Vec::new()];
        for a in 0..n {
            let mut next = Vec::new();
            for x in &xs {
                for i in 0..5 {
                    let mut q = x.clone();
                    q.push(config.grid.lengths[a] * i as f64 / 5.0);
                    next.push(q);
                }
            }
            xs = next;
        }
        let ts = if system.time_dependent() {
            vec![0.0, config.horizon / 2.0, config.horizon]
        } else {
            vec![0.0]
        };
        SampleGrid::new(xs, ts)
    } else {
        SampleGrid::for_constant(n)
    };
    let verdict = check_theorem(system, body, &grid, crate::DEFAULT_TOL)?;
    match verdict.status {
        VerdictStatus::NotInvariant | VerdictStatus::NecessaryViolated => {}
        other => {
            return Err(Error::input(format!(
                "falsification needs a NotInvariant or NecessaryViolated verdict, got {other:?}"
            )))
        }
    }

    // Prefer the normals that failed alignment, worst residual first.
    let mut failed: Vec<(f64, DVector<f64>)> = Vec::new();
    for w in &verdict.witnesses {
        if !w.alignment.aligned {
            let nu = DVector::from_row_slice(&w.normal);
            if failed.iter().all(|(_, u)| (u - &nu).norm() > 1e-9) {
                failed.push((w.alignment.residual, nu));
            }
        }
    }
    failed.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut normals: Vec<DVector<f64>> = failed.into_iter().map(|(_, nu)| nu).take(8).collect();
    if normals.is_empty() {
        normals = body.normal_set(32)?.iter_all().cloned().collect();
    }
    if normals.is_empty() {
        return Err(Error::geometry("body has no usable normals"));
    }

    let min_len = config.grid.lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    let y: Vec<f64> = config.grid.lengths.iter().map(|l| l / 2.0).collect();

    let run_candidate = |index: usize| -> Option<FalsifyWitness> {
        let cand = plan_candidate(index, seed, system, &normals)?;
        let r = cand.radius_frac * min_len;
        let a = body.boundary_point(&cand.nu)?;
        let (mut alpha, mut beta) = biased_coefficients(system, &cand.nu, &cand.tau, cand.flip);
        let degenerate = alpha.iter().flatten().all(|v| *v == 0.0) && beta.iter().all(|v| *v == 0.0);
        if degenerate {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((index as u64).wrapping_mul(0x4C95_7F2D)) ^ 0xA5);
            for row in alpha.iter_mut() {
                for v in row.iter_mut() {
                    *v = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                }
            }
            for v in beta.iter_mut() {
                *v = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            }
        }
        for row in alpha.iter_mut() {
            for v in row.iter_mut() {
                *v *= cand.amplitude;
            }
        }
        for v in beta.iter_mut() {
            *v *= cand.amplitude;
        }
        let spec = BumpSpec {
            alpha,
            beta,
            y: y.clone(),
            r,
        };
        let raw = counterexample_init(body, &a, &cand.nu, &cand.tau, &spec, &config.grid).ok()?;

        // Pull inward and shrink the bump until the grid membership holds.
        let base = &a - &cand.nu * cand.inward;
        let mut scale = 1.0f64;
        for _ in 0..16 {
            let mut psi = raw.clone();
            for node in 0..psi.node_count() {
                let v = &base + (raw.value(node) - &a) * scale;
                psi.set_value(node, &v);
            }
            if psi.max_violation(body) <= 0.0 {
                let threshold = 10.0 * config.solver_tolerance(psi.max_abs());
                let out =
                    run_monitored_inner(system, &psi, body, config, Some(threshold)).ok()?;
                let exceeded = out
                    .trace
                    .times
                    .iter()
                    .zip(&out.trace.max_violation)
                    .find(|(_, &v)| v > threshold);
                if let Some((&t, &v)) = exceeded {
                    return Some(FalsifyWitness {
                        candidate: index,
                        normal: cand.nu.clone(),
                        initial: psi,
                        trace: out.trace,
                        first_exit: t,
                        exit_margin: v,
                    });
                }
                return None;
            }
            scale *= 0.5;
        }
        None
    };

    let witness = (0..budget)
        .into_par_iter()
        .find_map_first(run_candidate);

    let threshold = witness
        .as_ref()
        .map(|w| 10.0 * config.solver_tolerance(w.initial.max_abs()))
        .unwrap_or(0.0);
    Ok(FalsifyReport {
        candidates_tried: budget,
        witness,
        threshold,
    })
}
