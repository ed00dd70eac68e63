//! Exact constant-coefficient solver in Fourier space, and the propagator
//! alignment check.
//!
//! Per discrete frequency the solution evolves as
//! `u_hat(t, sigma) = exp(t (-M(sigma) + i B(sigma))) u_hat(0, sigma)`,
//! which is exact in time and spectrally accurate in space for smooth
//! periodic data. The Fourier multiplier `G_hat(t, sigma)` is the shadow of
//! the fundamental matrix: when the body normal is an eigenvector of every
//! transposed coefficient matrix, `G_hat* nu` stays parallel to `nu`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::matrix_exponential;
use crate::parabolicity::{first_symbol, symbol_matrix};
use crate::system::{CoefficientSet, Coefficients};

use super::field::{Grid, SolutionField};

/// In-place FFT along every axis of node-major data.
fn fft_nd(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let n = grid.dim();
    for axis in 0..n {
        let len = grid.points[axis];
        let stride: usize = grid.points[axis + 1..].iter().product();
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let lines = grid.node_count() / len;
        for l in 0..lines {
            // Base index of the l-th line along this axis.
            let block = l / stride;
            let offset = l % stride;
            let base = block * stride * len + offset;
            for i in 0..len {
                line[i] = data[base + i * stride];
            }
            fft.process(&mut line);
            for i in 0..len {
                data[base + i * stride] = line[i];
            }
        }
    }
    if inverse {
        let scale = 1.0 / grid.node_count() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Signed integer frequency of a grid index.
fn signed_mode(idx: usize, len: usize) -> i64 {
    if idx <= len / 2 {
        idx as i64
    } else {
        idx as i64 - len as i64
    }
}

/// Angular frequency vector of a node.
fn node_sigma(grid: &Grid, node: usize) -> DVector<f64> {
    let multi = grid.multi_index(node);
    DVector::from_fn(grid.dim(), |a, _| {
        2.0 * std::f64::consts::PI * signed_mode(multi[a], grid.points[a]) as f64
            / grid.lengths[a]
    })
}

fn require_constant(system: &Coefficients) -> Result<CoefficientSet> {
    if system.time_dependent() || system.space_dependent() {
        return Err(Error::input(
            "the spectral solver applies to constant coefficients only",
        ));
    }
    Ok(system.evaluate(&vec![0.0; system.space_dim()], 0.0))
}

/// The Fourier multiplier `G_hat(t, sigma) = exp(t(-M(sigma) + i B(sigma)))`.
#[derive(Debug, Clone)]
pub struct PropagatorSample {
    pub sigma: DVector<f64>,
    pub g_hat: DMatrix<Complex64>,
}

/// Propagator at one frequency for a constant-coefficient system.
pub fn propagator(system: &Coefficients, t: f64, sigma: &DVector<f64>) -> Result<PropagatorSample> {
    let set = require_constant(system)?;
    Ok(PropagatorSample {
        sigma: sigma.clone(),
        g_hat: propagator_from_set(&set, t, sigma)?,
    })
}

fn propagator_from_set(
    set: &CoefficientSet,
    t: f64,
    sigma: &DVector<f64>,
) -> Result<DMatrix<Complex64>> {
    let msym = symbol_matrix(set, sigma)?;
    let bsym = first_symbol(set, sigma)?;
    let m = set.order();
    let h = DMatrix::from_fn(m, m, |i, j| Complex64::new(-msym[(i, j)] * t, bsym[(i, j)] * t));
    matrix_exponential(&h)
}

/// Evolves `psi` to time `t` (from `psi.time`) with the exact Fourier
/// propagator. Constant coefficients only.
pub fn spectral_run(system: &Coefficients, psi: &SolutionField, t: f64) -> Result<SolutionField> {
    let set = require_constant(system)?;
    if set.order() != psi.m || set.space_dim() != psi.grid.dim() {
        return Err(Error::input("system dimensions do not match the field"));
    }
    let dt = t - psi.time;
    let nodes = psi.node_count();
    let m = psi.m;

    let mut spectra: Vec<Vec<Complex64>> = (0..m)
        .map(|c| {
            let mut buf: Vec<Complex64> = (0..nodes)
                .map(|node| Complex64::new(psi.value_slice(node)[c], 0.0))
                .collect();
            fft_nd(&psi.grid, &mut buf, false);
            buf
        })
        .collect();

    for node in 0..nodes {
        let sigma = node_sigma(&psi.grid, node);
        let e = propagator_from_set(&set, dt, &sigma)?;
        let u = DVector::from_fn(m, |c, _| spectra[c][node]);
        let v = &e * u;
        for c in 0..m {
            spectra[c][node] = v[c];
        }
    }

    let mut out = psi.clone();
    out.time = t;
    for (c, buf) in spectra.iter_mut().enumerate() {
        fft_nd(&psi.grid, buf, true);
        for node in 0..nodes {
            out.data[node * m + c] = buf[node].re;
        }
    }
    if !out.is_finite() {
        return Err(Error::numeric("spectral propagation overflowed"));
    }
    Ok(out)
}

/// Spectral integrator with a fixed monitor hop: the per-frequency
/// multipliers are computed once and reused, and the state stays in Fourier
/// space between snapshots.
pub struct SpectralStepper {
    grid: Grid,
    m: usize,
    hop: f64,
    time: f64,
    multipliers: Vec<DMatrix<Complex64>>,
    spectra: Vec<Vec<Complex64>>,
}

impl SpectralStepper {
    pub fn new(system: &Coefficients, psi: &SolutionField, hop: f64) -> Result<SpectralStepper> {
        let set = require_constant(system)?;
        if set.order() != psi.m || set.space_dim() != psi.grid.dim() {
            return Err(Error::input("system dimensions do not match the field"));
        }
        let nodes = psi.node_count();
        let multipliers = (0..nodes)
            .map(|node| propagator_from_set(&set, hop, &node_sigma(&psi.grid, node)))
            .collect::<Result<Vec<_>>>()?;
        let spectra = (0..psi.m)
            .map(|c| {
                let mut buf: Vec<Complex64> = (0..nodes)
                    .map(|node| Complex64::new(psi.value_slice(node)[c], 0.0))
                    .collect();
                fft_nd(&psi.grid, &mut buf, false);
                buf
            })
            .collect();
        Ok(SpectralStepper {
            grid: psi.grid.clone(),
            m: psi.m,
            hop,
            time: psi.time,
            multipliers,
            spectra,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn hop(&self) -> f64 {
        self.hop
    }

    /// Advances one full hop using the cached multipliers.
    pub fn advance_hop(&mut self) {
        for node in 0..self.grid.node_count() {
            let e = &self.multipliers[node];
            let u = DVector::from_fn(self.m, |c, _| self.spectra[c][node]);
            let v = e * u;
            for c in 0..self.m {
                self.spectra[c][node] = v[c];
            }
        }
        self.time += self.hop;
    }

    /// Advances a partial step (used for the final fragment of a horizon).
    pub fn advance_by(&mut self, system: &Coefficients, dt: f64) -> Result<()> {
        let set = require_constant(system)?;
        for node in 0..self.grid.node_count() {
            let e = propagator_from_set(&set, dt, &node_sigma(&self.grid, node))?;
            let u = DVector::from_fn(self.m, |c, _| self.spectra[c][node]);
            let v = e * u;
            for c in 0..self.m {
                self.spectra[c][node] = v[c];
            }
        }
        self.time += dt;
        Ok(())
    }

    /// Inverse transform of the current state.
    pub fn snapshot(&self) -> Result<SolutionField> {
        let nodes = self.grid.node_count();
        let mut out = SolutionField::constant(self.grid.clone(), &DVector::zeros(self.m));
        out.time = self.time;
        for c in 0..self.m {
            let mut buf = self.spectra[c].clone();
            fft_nd(&self.grid, &mut buf, true);
            for node in 0..nodes {
                out.data[node * self.m + c] = buf[node].re;
            }
        }
        if !out.is_finite() {
            return Err(Error::numeric("spectral propagation overflowed"));
        }
        Ok(out)
    }
}

/// Worst orthogonal residual of `G_hat*(t, sigma) nu` against `span{nu}`.
#[derive(Debug, Clone)]
pub struct PropagatorAlignment {
    pub max_residual: f64,
    pub worst_sigma: DVector<f64>,
    pub within_tol: bool,
}

/// Checks the fundamental-matrix alignment in Fourier form: applies the
/// conjugate transpose of the propagator to `nu` at each sample frequency
/// and reports the largest orthogonal residual.
pub fn propagator_alignment(
    system: &Coefficients,
    nu: &DVector<f64>,
    t: f64,
    sigmas: &[DVector<f64>],
    tol: f64,
) -> Result<PropagatorAlignment> {
    let set = require_constant(system)?;
    let m = set.order();
    if nu.len() != m {
        return Err(Error::input("normal length does not match system order"));
    }
    if (nu.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::input("normal must be unit"));
    }
    if sigmas.is_empty() {
        return Err(Error::input("no frequency samples supplied"));
    }
    let nu_c = nu.map(|v| Complex64::new(v, 0.0));
    let mut max_residual = 0.0;
    let mut worst = sigmas[0].clone();
    for sigma in sigmas {
        let g = propagator_from_set(&set, t, sigma)?;
        let w = g.adjoint() * &nu_c;
        let coeff: Complex64 = w
            .iter()
            .zip(nu.iter())
            .map(|(wi, &ni)| wi * ni)
            .sum();
        let residual = (&w - &nu_c * coeff).norm();
        if residual > max_residual {
            max_residual = residual;
            worst = sigma.clone();
        }
    }
    Ok(PropagatorAlignment {
        max_residual,
        worst_sigma: worst,
        within_tol: max_residual <= tol,
    })
}

/// Deterministic lattice of frequency samples in `[-max_freq, max_freq]^n`
/// with at least `count` points.
pub fn frequency_samples(n: usize, count: usize, max_freq: f64) -> Vec<DVector<f64>> {
    let per_axis = (count as f64).powf(1.0 / n as f64).ceil() as usize;
    let per_axis = per_axis.max(2);
    let mut out = Vec::new();
    let total = per_axis.pow(n as u32);
    for flat in 0..total {
        let mut rest = flat;
        let mut sigma = DVector::zeros(n);
        for a in 0..n {
            let i = rest % per_axis;
            rest /= per_axis;
            sigma[a] = -max_freq + 2.0 * max_freq * i as f64 / (per_axis - 1) as f64;
        }
        out.push(sigma);
        if out.len() == count.max(total.min(count)) && out.len() >= count {
            break;
        }
    }
    out
}
