//! Periodic-box Cauchy solvers used to corroborate or falsify verdicts:
//! an explicit central-difference scheme behind a hard stability gate, the
//! exact constant-coefficient spectral propagator, invariance monitoring and
//! the counterexample search.

pub mod explicit;
pub mod falsify;
pub mod field;
pub mod init;
pub mod spectral;

pub use explicit::step_explicit;
pub use falsify::{falsify, FalsifyReport, FalsifyWitness};
pub use field::{Grid, SolutionField};
pub use init::{bump_profile, counterexample_init, random_in_body, BumpSpec};
pub use spectral::{
    SpectralStepper,
    frequency_samples, propagator, propagator_alignment, spectral_run, PropagatorAlignment,
    PropagatorSample,
};

use serde::{Deserialize, Serialize};

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::parabolicity::{sphere_samples, spectral_radius, symbol_matrix};
use crate::system::Coefficients;

/// Time integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitCentral,
    SpectralExact,
}

/// Simulation parameters: periodic box, step size, horizon and monitoring
/// stride.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: Grid,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub monitor_stride: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::input("dt and horizon must be positive"));
        }
        if self.monitor_stride == 0 {
            return Err(Error::input("monitor stride must be at least 1"));
        }
        Ok(())
    }

    /// Discretization-error scale used for invariance monitoring:
    /// `10 (dx^2 + dt) * field_scale` for the explicit scheme. The spectral
    /// scheme is exact in time, so only the spatial term enters.
    pub fn solver_tolerance(&self, field_scale: f64) -> f64 {
        let dx = self.grid.min_spacing();
        let dt_term = match self.scheme {
            Scheme::ExplicitCentral => self.dt,
            Scheme::SpectralExact => 0.0,
        };
        10.0 * (dx * dx + dt_term) * field_scale.max(1.0)
    }
}

/// Stability gate for the explicit scheme: `dt <= dx^2 / (2 n Lambda)` with
/// `Lambda` the sampled spectral-radius bound of `M(sigma)` on the unit
/// sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub lambda: f64,
    pub dx_min: f64,
    pub dt_limit: f64,
    pub ok: bool,
}

pub fn stability_gate(system: &Coefficients, config: &SimConfig) -> Result<GateReport> {
    let n = system.space_dim();
    let sigmas = sphere_samples(n, 64);
    // Constant coefficients need one sample point; otherwise probe a coarse
    // subgrid of the box across the horizon.
    let mut points: Vec<(Vec<f64>, f64)> = Vec::new();
    if system.space_dependent() || system.time_dependent() {
        let per_axis = 4usize;
        let mut xs = vec![Vec::new()];
        for a in 0..n {
            let mut next = Vec::new();
            for x in &xs {
                for i in 0..per_axis {
                    let mut q = x.clone();
                    q.push(config.grid.lengths[a] * i as f64 / per_axis as f64);
                    next.push(q);
                }
            }
            xs = next;
        }
        for x in xs {
            for t in [0.0, config.horizon / 2.0, config.horizon] {
                points.push((x.clone(), t));
            }
        }
    } else {
        points.push((vec![0.0; n], 0.0));
    }
    let mut lambda = 0.0f64;
    for (x, t) in &points {
        let set = system.evaluate(x, *t);
        for sigma in &sigmas {
            lambda = lambda.max(spectral_radius(&symbol_matrix(&set, sigma)?)?);
        }
    }
    let dx_min = config.grid.min_spacing();
    let dt_limit = if lambda > 0.0 {
        dx_min * dx_min / (2.0 * n as f64 * lambda)
    } else {
        f64::INFINITY
    };
    Ok(GateReport {
        lambda,
        dx_min,
        dt_limit,
        ok: config.dt <= dt_limit,
    })
}

/// Time series of the worst body violation over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationTrace {
    pub times: Vec<f64>,
    pub max_violation: Vec<f64>,
}

/// Result of a monitored run.
#[derive(Debug, Clone)]
pub struct MonitorOutcome {
    pub trace: ViolationTrace,
    /// Worst violation over the whole run.
    pub max_violation: f64,
    pub solver_tolerance: f64,
    pub final_field: SolutionField,
    pub gate: GateReport,
}

/// Integrates the system from `psi` to the horizon, recording the worst
/// violation at every monitor stride. `psi` must start inside the body.
pub fn run_monitored(
    system: &Coefficients,
    psi: &SolutionField,
    body: &ConvexBody,
    config: &SimConfig,
) -> Result<MonitorOutcome> {
    run_monitored_inner(system, psi, body, config, None)
}

pub(crate) fn run_monitored_inner(
    system: &Coefficients,
    psi: &SolutionField,
    body: &ConvexBody,
    config: &SimConfig,
    stop_above: Option<f64>,
) -> Result<MonitorOutcome> {
    config.validate()?;
    if psi.grid != config.grid {
        return Err(Error::input("initial field does not live on the configured grid"));
    }
    if body.dim() != psi.m {
        return Err(Error::input("body dimension does not match the field"));
    }
    let scale = psi.max_abs();
    let initial_violation = psi.max_violation(body);
    if initial_violation > 1e-12 * (1.0 + scale) {
        return Err(Error::input(format!(
            "initial data leaves the body already (violation {initial_violation:.3e})"
        )));
    }
    let gate = stability_gate(system, config)?;
    if config.scheme == Scheme::ExplicitCentral && !gate.ok {
        return Err(Error::input(format!(
            "stability gate rejected dt = {:.3e}: with Lambda = {:.3e} and dx = {:.3e} \
             the explicit scheme needs dt <= {:.3e}",
            config.dt, gate.lambda, gate.dx_min, gate.dt_limit
        )));
    }
    let tolerance = config.solver_tolerance(scale);

    let mut trace = ViolationTrace {
        times: vec![psi.time],
        max_violation: vec![initial_violation],
    };
    let mut worst = initial_violation;
    let mut field = psi.clone();
    let t_end = psi.time + config.horizon;

    match config.scheme {
        Scheme::ExplicitCentral => {
            let mut step_index = 0usize;
            while field.time < t_end - 1e-15 {
                let dt = config.dt.min(t_end - field.time);
                field = step_explicit(&field, system, dt)?;
                step_index += 1;
                let monitor = step_index % config.monitor_stride == 0 || field.time >= t_end - 1e-15;
                if monitor {
                    if !field.is_finite() {
                        return Err(Error::divergence(format!(
                            "solution blew up at t = {:.4e}; stability gate: Lambda = {:.3e}, \
                             dt limit = {:.3e}, dt = {:.3e}",
                            field.time, gate.lambda, gate.dt_limit, config.dt
                        )));
                    }
                    let v = field.max_violation(body);
                    worst = worst.max(v);
                    trace.times.push(field.time);
                    trace.max_violation.push(v);
                    if let Some(threshold) = stop_above {
                        if v > threshold {
                            break;
                        }
                    }
                }
            }
        }
        Scheme::SpectralExact => {
            let hop = config.dt * config.monitor_stride as f64;
            let mut stepper = spectral::SpectralStepper::new(system, &field, hop)?;
            while stepper.time() < t_end - 1e-15 {
                let remaining = t_end - stepper.time();
                if remaining >= hop - 1e-15 {
                    stepper.advance_hop();
                } else {
                    stepper.advance_by(system, remaining)?;
                }
                field = stepper.snapshot()?;
                let v = field.max_violation(body);
                worst = worst.max(v);
                trace.times.push(field.time);
                trace.max_violation.push(v);
                if let Some(threshold) = stop_above {
                    if v > threshold {
                        break;
                    }
                }
            }
        }
    }

    Ok(MonitorOutcome {
        trace,
        max_violation: worst,
        solver_tolerance: tolerance,
        final_field: field,
        gate,
    })
}
