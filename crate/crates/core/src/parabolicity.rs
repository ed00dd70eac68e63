//! Second-order symbol assembly and estimation of the uniform Petrovskii
//! parabolicity margin.
//!
//! The system is parabolic when every eigenvalue of the symbol
//! `M(sigma) = sum A_jk sigma_j sigma_k` has real part at least
//! `delta |sigma|^2` for some `delta > 0`; by homogeneity it suffices to
//! sample `sigma` on the unit sphere. The estimator reports a sampled
//! minimum, never a proof.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{CoefficientSet, Coefficients};

/// Second-order principal symbol `M(sigma) = sum_{j,k} A_jk sigma_j sigma_k`.
///
/// The lambda-roots of `det(M(sigma) + lambda I) = 0` are the negatives of
/// the eigenvalues of this matrix.
pub fn symbol_matrix(set: &CoefficientSet, sigma: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = set.space_dim();
    if sigma.len() != n {
        return Err(Error::input(format!(
            "sigma has dimension {}, system has n = {n}",
            sigma.len()
        )));
    }
    let m = set.order();
    let mut out = DMatrix::zeros(m, m);
    for j in 0..n {
        for k in 0..n {
            let w = sigma[j] * sigma[k];
            if w != 0.0 {
                out += set.second_order(j, k) * w;
            }
        }
    }
    Ok(out)
}

/// First-order symbol `B(sigma) = sum_j A_j sigma_j`.
pub fn first_symbol(set: &CoefficientSet, sigma: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = set.space_dim();
    if sigma.len() != n {
        return Err(Error::input(format!(
            "sigma has dimension {}, system has n = {n}",
            sigma.len()
        )));
    }
    let m = set.order();
    let mut out = DMatrix::zeros(m, m);
    for j in 0..n {
        if sigma[j] != 0.0 {
            out += set.first_order(j) * sigma[j];
        }
    }
    Ok(out)
}

/// Smallest real part among the eigenvalues of a (generally nonsymmetric)
/// real matrix.
pub fn min_real_eig(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = m.clone().complex_eigenvalues();
    let mut min = f64::INFINITY;
    for e in eigs.iter() {
        if !e.re.is_finite() {
            return Err(Error::numeric("eigenvalue iteration produced non-finite values"));
        }
        min = min.min(e.re);
    }
    Ok(min)
}

/// Largest eigenvalue modulus of a real matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let eigs = m.clone().complex_eigenvalues();
    let mut max = 0.0f64;
    for e in eigs.iter() {
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::numeric("eigenvalue iteration produced non-finite values"));
        }
        max = max.max(e.norm());
    }
    Ok(max)
}

/// Default number of unit-sphere samples per spatial dimension.
pub fn default_sigma_resolution(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 4096,
        _ => 2048,
    }
}

/// Deterministic unit-sphere sample set: `{-1, 1}` for n = 1, uniform angles
/// for n = 2, a Fibonacci lattice for n = 3 and seeded uniform directions
/// beyond that.
pub fn sphere_samples(n: usize, resolution: usize) -> Vec<DVector<f64>> {
    let count = resolution.max(1);
    match n {
        0 => Vec::new(),
        1 => vec![DVector::from_row_slice(&[1.0]), DVector::from_row_slice(&[-1.0])],
        2 => (0..count)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                DVector::from_row_slice(&[theta.cos(), theta.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    DVector::from_row_slice(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
            (0..count)
                .map(|_| {
                    // Box-Muller pairs give an isotropic Gaussian to normalize.
                    let mut v = DVector::zeros(n);
                    for i in 0..n {
                        let u1: f64 = rng.random_range(1e-12..1.0);
                        let u2: f64 = rng.random_range(0.0..1.0);
                        v[i] = (-2.0 * u1.ln()).sqrt()
                            * (2.0 * std::f64::consts::PI * u2).cos();
                    }
                    let norm = v.norm();
                    v / norm
                })
                .collect()
        }
    }
}

/// Where the sampled minimum was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginWitness {
    pub x: Vec<f64>,
    pub t: f64,
    pub sigma: Vec<f64>,
}

/// Sampled estimate of the Petrovskii margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicityReport {
    /// Sampled minimum of `min Re eig(M(sigma))` over unit `sigma` and the
    /// (x, t) samples.
    pub margin: f64,
    pub parabolic: bool,
    pub witness: MarginWitness,
    pub sigma_samples: usize,
    pub xt_samples: usize,
}

/// Sampling plan for the margin estimate.
#[derive(Debug, Clone)]
pub struct MarginSampling {
    /// Unit-sphere resolution; 0 selects the per-dimension default.
    pub sigma_resolution: usize,
    /// Spatial sample points; a single origin for constant coefficients.
    pub x_points: Vec<Vec<f64>>,
    /// Time samples.
    pub t_points: Vec<f64>,
    /// Pattern-search refinement rounds around the sampled minimizer.
    pub refine_rounds: usize,
}

impl MarginSampling {
    /// One-point (x, t) plan suitable for constant coefficients.
    pub fn for_constant(n: usize) -> MarginSampling {
        MarginSampling {
            sigma_resolution: 0,
            x_points: vec![vec![0.0; n]],
            t_points: vec![0.0],
            refine_rounds: 6,
        }
    }
}

/// Minimum of `min Re eig(M(sigma))` over the given samples only (no
/// refinement). Returns the margin and the attaining sample.
pub fn sampled_margin(
    system: &Coefficients,
    sigmas: &[DVector<f64>],
    xt_points: &[(Vec<f64>, f64)],
) -> Result<(f64, MarginWitness)> {
    if sigmas.is_empty() || xt_points.is_empty() {
        return Err(Error::input("margin sampling plan is empty"));
    }
    let evals: Vec<Result<f64>> = xt_points
        .par_iter()
        .flat_map_iter(|(x, t)| {
            let set = system.evaluate(x, *t);
            sigmas.iter().map(move |sigma| {
                let sym = symbol_matrix(&set, sigma)?;
                min_real_eig(&sym).map_err(|_| {
                    Error::numeric(format!(
                        "eigenvalue iteration failed at sigma = {:?}",
                        sigma.as_slice()
                    ))
                })
            })
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut best_idx = 0;
    for (idx, v) in evals.iter().enumerate() {
        let v = v.clone()?;
        if v < best {
            best = v;
            best_idx = idx;
        }
    }
    let (x, t) = &xt_points[best_idx / sigmas.len()];
    let sigma = &sigmas[best_idx % sigmas.len()];
    Ok((
        best,
        MarginWitness {
            x: x.clone(),
            t: *t,
            sigma: sigma.as_slice().to_vec(),
        },
    ))
}

/// Estimates the uniform parabolicity margin by sphere sampling plus a
/// deterministic pattern-search refinement around the sampled minimizer.
pub fn petrovskii_margin(system: &Coefficients, sampling: &MarginSampling) -> Result<ParabolicityReport> {
    let n = system.space_dim();
    let resolution = if sampling.sigma_resolution == 0 {
        default_sigma_resolution(n)
    } else {
        sampling.sigma_resolution
    };
    let sigmas = sphere_samples(n, resolution);
    let xt: Vec<(Vec<f64>, f64)> = sampling
        .x_points
        .iter()
        .flat_map(|x| sampling.t_points.iter().map(move |&t| (x.clone(), t)))
        .collect();
    for x in &sampling.x_points {
        if x.len() != n {
            return Err(Error::input(format!(
                "sample point has dimension {}, system has n = {n}",
                x.len()
            )));
        }
    }
    let (mut margin, mut witness) = sampled_margin(system, &sigmas, &xt)?;

    // Pattern search on the sphere around the coarse minimizer; only ever
    // lowers the estimate, keeping the sampled minimum monotone.
    if n > 1 {
        let set = system.evaluate(&witness.x, witness.t);
        let mut center = DVector::from_row_slice(&witness.sigma);
        let mut step = 2.0 * std::f64::consts::PI / resolution as f64;
        for _ in 0..sampling.refine_rounds {
            let mut improved = false;
            for axis in 0..n {
                for dir in [-1.0, 1.0] {
                    let mut cand = center.clone();
                    cand[axis] += dir * step;
                    let norm = cand.norm();
                    if norm == 0.0 {
                        continue;
                    }
                    cand /= norm;
                    let v = min_real_eig(&symbol_matrix(&set, &cand)?)?;
                    if v < margin {
                        margin = v;
                        center = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        witness.sigma = center.as_slice().to_vec();
    }

    Ok(ParabolicityReport {
        margin,
        parabolic: margin > 0.0,
        witness,
        sigma_samples: sigmas.len(),
        xt_samples: xt.len(),
    })
}
