//! Machine-readable reports. Every report names its schema and echoes the
//! config document byte-identically for provenance.

use serde::{Deserialize, Serialize};

use parinv_core::criterion::Verdict;
use parinv_core::parabolicity::ParabolicityReport;
use parinv_core::simulate::GateReport;

#[derive(Debug, Serialize, Deserialize)]
pub struct ParabolicityOut {
    pub schema: String,
    pub margin: f64,
    pub parabolic: bool,
    pub report: ParabolicityReport,
    pub config_echo: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckOut {
    pub schema: String,
    pub status: String,
    pub generic: Verdict,
    /// Structural shortcut verdict, when the body family has one.
    pub structural: Option<Verdict>,
    /// Set when both paths ran; false marks an internal error.
    pub paths_agree: Option<bool>,
    /// For-all-layers verdict, reported for t-dependent coefficients.
    pub layer: Option<Verdict>,
    pub parabolicity_margin: f64,
    /// Present when the parabolicity assumption fails.
    pub warning: Option<String>,
    pub config_echo: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulateOut {
    pub schema: String,
    pub max_violation: f64,
    pub solver_tolerance: f64,
    pub within_tolerance: bool,
    pub gate: GateReport,
    pub runtime_s: f64,
    pub trace_path: String,
    pub config_echo: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FalsifyOut {
    pub schema: String,
    pub found: bool,
    pub candidate: Option<usize>,
    pub first_exit: Option<f64>,
    pub exit_margin: Option<f64>,
    pub threshold: f64,
    pub candidates_tried: usize,
    pub runtime_s: f64,
    pub trace_path: Option<String>,
    pub witness_paths: Option<(String, String)>,
    pub config_echo: String,
}
