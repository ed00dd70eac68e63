//! Invariance verdicts.
//!
//! Generic path: a convex body is invariant for a t-independent system if
//! and only if every unit outward normal of its boundary is an eigenvector
//! of every transposed coefficient matrix; for t-dependent coefficients the
//! all-(x,t) alignment is sufficient and the t = 0 alignment is necessary,
//! leaving a gap that is reported as `Inconclusive` rather than guessed.
//!
//! Structural shortcuts specialize the same criterion for axis-aligned body
//! families: zero off-diagonal rows for polyhedral angles and cylinders,
//! additionally equal diagonals for spherical cylinders, diagonalizability
//! across the normal matrix for m-facet cones and outright scalarity for
//! cones with more than m facets or a smooth guide.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{cone_normal_matrix, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{eigen_align, is_scalar, rows_structure, similarity_diagonalize, AlignmentResult};
use crate::system::{Coefficients, MatrixId};

/// Verdict statuses. `Invariant`/`NotInvariant` are exhaustive for
/// t-independent coefficients; `SufficientHolds`, `NecessaryViolated` and
/// `Inconclusive` cover the t-dependent cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    Invariant,
    NotInvariant,
    SufficientHolds,
    NecessaryViolated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

/// One alignment evaluation attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub matrix: MatrixId,
    pub location: SamplePoint,
    pub normal: Vec<f64>,
    pub alignment: AlignmentResult,
}

/// Sampling metadata recorded with every verdict: the criterion quantifies
/// over all x (and t), the tool can only check samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub x_points: usize,
    pub t_points: usize,
    pub exact_normals: usize,
    pub sampled_normals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// Failing alignments (plus, for `Inconclusive`, the passing t = 0
    /// evaluation they contrast with). Truncated to a fixed cap.
    pub witnesses: Vec<Witness>,
    /// Name of the structural shortcut that produced the verdict, when one
    /// did.
    pub structural_path: Option<String>,
    /// Worst alignment residual seen per coefficient matrix.
    pub residual_max: Vec<(MatrixId, f64)>,
    pub tol: f64,
    pub grid: GridMeta,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            VerdictStatus::Invariant | VerdictStatus::SufficientHolds => 0,
            VerdictStatus::NotInvariant | VerdictStatus::NecessaryViolated => 2,
            VerdictStatus::Inconclusive => 3,
        }
    }
}

/// (x, t) samples for a verdict, plus the sample count for curved normal
/// sets.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub x_points: Vec<Vec<f64>>,
    pub t_points: Vec<f64>,
    pub smooth_normals: usize,
}

impl SampleGrid {
    /// Single-point grid, adequate for constant coefficients.
    pub fn for_constant(n: usize) -> SampleGrid {
        SampleGrid {
            x_points: vec![vec![0.0; n]],
            t_points: vec![0.0],
            smooth_normals: 64,
        }
    }

    pub fn new(x_points: Vec<Vec<f64>>, t_points: Vec<f64>) -> SampleGrid {
        SampleGrid {
            x_points,
            t_points,
            smooth_normals: 64,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.x_points.is_empty() || self.t_points.is_empty() {
            return Err(Error::input("sample grid is empty"));
        }
        for x in &self.x_points {
            if x.len() != n {
                return Err(Error::input(format!(
                    "sample point has dimension {}, system has n = {n}",
                    x.len()
                )));
            }
        }
        Ok(())
    }
}

const WITNESS_CAP: usize = 32;

struct Sweep {
    all_aligned: bool,
    failures: Vec<Witness>,
    /// Highest-residual passing evaluation, kept for Inconclusive reports.
    best_pass: Option<Witness>,
    residual_max: Vec<(MatrixId, f64)>,
}

/// Evaluates every (matrix, sample point, normal) triple. Parallel over
/// sample points; results are merged in sample order so reports are
/// reproducible.
fn sweep_alignment(
    system: &Coefficients,
    normals: &[DVector<f64>],
    xt: &[(Vec<f64>, f64)],
    tol: f64,
) -> Result<Sweep> {
    let per_point: Vec<Result<Vec<Witness>>> = xt
        .par_iter()
        .map(|(x, t)| {
            let set = system.evaluate(x, *t);
            let mut out = Vec::new();
            for (id, mat) in set.iter_labeled() {
                for nu in normals {
                    let alignment = eigen_align(mat, nu, tol)?;
                    out.push(Witness {
                        matrix: id,
                        location: SamplePoint { x: x.clone(), t: *t },
                        normal: nu.as_slice().to_vec(),
                        alignment,
                    });
                }
            }
            Ok(out)
        })
        .collect();

    let mut sweep = Sweep {
        all_aligned: true,
        failures: Vec::new(),
        best_pass: None,
        residual_max: Vec::new(),
    };
    for point in per_point {
        for w in point? {
            match sweep.residual_max.iter_mut().find(|(id, _)| *id == w.matrix) {
                Some((_, r)) => *r = r.max(w.alignment.residual),
                None => sweep.residual_max.push((w.matrix, w.alignment.residual)),
            }
            if w.alignment.aligned {
                let better = sweep
                    .best_pass
                    .as_ref()
                    .is_none_or(|b| w.alignment.residual > b.alignment.residual);
                if better {
                    sweep.best_pass = Some(w);
                }
            } else {
                sweep.all_aligned = false;
                if sweep.failures.len() < WITNESS_CAP {
                    sweep.failures.push(w);
                }
            }
        }
    }
    Ok(sweep)
}

fn grid_meta(grid: &SampleGrid, exact: usize, sampled: usize) -> GridMeta {
    GridMeta {
        x_points: grid.x_points.len(),
        t_points: grid.t_points.len(),
        exact_normals: exact,
        sampled_normals: sampled,
    }
}

/// The generic eigen-alignment verdict over the body's normal set.
///
/// For t-independent coefficients the answer is exhaustive
/// (Invariant/NotInvariant). For t-dependent coefficients: alignment at all
/// sampled (x, t) gives `SufficientHolds`, misalignment at t = 0 gives
/// `NecessaryViolated`, and alignment at t = 0 with misalignment later gives
/// `Inconclusive`. The t = 0 slice is always evaluated.
pub fn check_theorem(
    system: &Coefficients,
    body: &ConvexBody,
    grid: &SampleGrid,
    tol: f64,
) -> Result<Verdict> {
    let n = system.space_dim();
    grid.validate(n)?;
    if body.dim() != system.order() {
        return Err(Error::input(format!(
            "body dimension {} does not match system order {}",
            body.dim(),
            system.order()
        )));
    }
    let ns = body.normal_set(grid.smooth_normals)?;
    let normals: Vec<DVector<f64>> = ns.iter_all().cloned().collect();
    let meta = grid_meta(grid, ns.exact.len(), ns.sampled.len());

    if !system.time_dependent() {
        let xt: Vec<(Vec<f64>, f64)> = grid.x_points.iter().map(|x| (x.clone(), 0.0)).collect();
        let sweep = sweep_alignment(system, &normals, &xt, tol)?;
        return Ok(Verdict {
            status: if sweep.all_aligned {
                VerdictStatus::Invariant
            } else {
                VerdictStatus::NotInvariant
            },
            witnesses: sweep.failures,
            structural_path: None,
            residual_max: sweep.residual_max,
            tol,
            grid: meta,
        });
    }

    // t-dependent: the t = 0 slice carries the necessary condition.
    let xt_zero: Vec<(Vec<f64>, f64)> = grid.x_points.iter().map(|x| (x.clone(), 0.0)).collect();
    let zero = sweep_alignment(system, &normals, &xt_zero, tol)?;
    let xt_later: Vec<(Vec<f64>, f64)> = grid
        .x_points
        .iter()
        .flat_map(|x| {
            grid.t_points
                .iter()
                .filter(|&&t| t != 0.0)
                .map(move |&t| (x.clone(), t))
        })
        .collect();
    let later = if xt_later.is_empty() {
        None
    } else {
        Some(sweep_alignment(system, &normals, &xt_later, tol)?)
    };

    let mut residual_max = zero.residual_max.clone();
    if let Some(l) = &later {
        for (id, r) in &l.residual_max {
            match residual_max.iter_mut().find(|(i, _)| i == id) {
                Some((_, cur)) => *cur = cur.max(*r),
                None => residual_max.push((*id, *r)),
            }
        }
    }

    let later_aligned = later.as_ref().map(|l| l.all_aligned).unwrap_or(true);
    let (status, witnesses) = if !zero.all_aligned {
        (VerdictStatus::NecessaryViolated, zero.failures)
    } else if later_aligned {
        (VerdictStatus::SufficientHolds, Vec::new())
    } else {
        // Aligned initially, misaligned later: attach the passing t = 0
        // evaluation together with the failing t > 0 ones.
        let mut w = Vec::new();
        if let Some(p) = zero.best_pass {
            w.push(p);
        }
        w.extend(later.map(|l| l.failures).unwrap_or_default());
        w.truncate(WITNESS_CAP);
        (VerdictStatus::Inconclusive, w)
    };
    Ok(Verdict {
        status,
        witnesses,
        structural_path: None,
        residual_max,
        tol,
        grid: meta,
    })
}

/// The for-all-layers criterion: invariance in every sub-layer `(tau, T]`
/// simultaneously holds exactly when alignment holds at every sampled
/// (x, t). Valid for t-dependent coefficients.
pub fn layer_criterion(
    system: &Coefficients,
    body: &ConvexBody,
    grid: &SampleGrid,
    tol: f64,
) -> Result<Verdict> {
    let n = system.space_dim();
    grid.validate(n)?;
    if body.dim() != system.order() {
        return Err(Error::input(format!(
            "body dimension {} does not match system order {}",
            body.dim(),
            system.order()
        )));
    }
    let ns = body.normal_set(grid.smooth_normals)?;
    let normals: Vec<DVector<f64>> = ns.iter_all().cloned().collect();
    let xt: Vec<(Vec<f64>, f64)> = grid
        .x_points
        .iter()
        .flat_map(|x| grid.t_points.iter().map(move |&t| (x.clone(), t)))
        .collect();
    let sweep = sweep_alignment(system, &normals, &xt, tol)?;
    Ok(Verdict {
        status: if sweep.all_aligned {
            VerdictStatus::Invariant
        } else {
            VerdictStatus::NotInvariant
        },
        witnesses: sweep.failures,
        structural_path: Some("layer".to_string()),
        residual_max: sweep.residual_max,
        tol,
        grid: grid_meta(grid, ns.exact.len(), ns.sampled.len()),
    })
}

fn require_t_independent(system: &Coefficients, what: &str) -> Result<()> {
    if system.time_dependent() {
        return Err(Error::input(format!(
            "{what} applies to t-independent coefficients; use the generic or layer criterion"
        )));
    }
    Ok(())
}

fn axis_normal(m: usize, i: usize, sign: f64) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    v[i] = sign;
    v
}

/// Re-runs `eigen_align` on candidate normals and returns every failure, so
/// structural verdicts carry witnesses that reproduce under the generic
/// test.
fn structural_witnesses(
    system: &Coefficients,
    candidates: &[DVector<f64>],
    x: &[f64],
    tol: f64,
    out: &mut Vec<Witness>,
) -> Result<()> {
    let set = system.evaluate(x, 0.0);
    for (id, mat) in set.iter_labeled() {
        for nu in candidates {
            let alignment = eigen_align(mat, nu, tol)?;
            if !alignment.aligned && out.len() < WITNESS_CAP {
                out.push(Witness {
                    matrix: id,
                    location: SamplePoint { x: x.to_vec(), t: 0.0 },
                    normal: nu.as_slice().to_vec(),
                    alignment,
                });
            }
        }
    }
    Ok(())
}

fn structural_verdict(
    status_ok: bool,
    witnesses: Vec<Witness>,
    path: &str,
    residual_max: Vec<(MatrixId, f64)>,
    tol: f64,
    grid: GridMeta,
) -> Verdict {
    Verdict {
        status: if status_ok {
            VerdictStatus::Invariant
        } else {
            VerdictStatus::NotInvariant
        },
        witnesses,
        structural_path: Some(path.to_string()),
        residual_max,
        tol,
        grid,
    }
}

/// Polyhedral angle `{u_i >= alpha_i, i in rows}`: invariant iff every
/// selected row of every coefficient matrix has zero off-diagonal entries.
pub fn check_polyhedral_angle(
    system: &Coefficients,
    rows: &[usize],
    grid: &SampleGrid,
    tol: f64,
) -> Result<Verdict> {
    structural_rows_check(system, rows, grid, tol, "polyhedral_angle", false)
}

/// Polyhedral cylinder: the invariance conditions coincide with the
/// polyhedral angle's (both half-space families share the axis normals).
pub fn check_cylinder(
    system: &Coefficients,
    rows: &[usize],
    grid: &SampleGrid,
    tol: f64,
) -> Result<Verdict> {
    structural_rows_check(system, rows, grid, tol, "cylinder", false)
}

/// Spherical cylinder over the coordinates in `rows`: additionally requires
/// the selected diagonal entries to agree within each single matrix.
pub fn check_spherical_cylinder(
    system: &Coefficients,
    rows: &[usize],
    grid: &SampleGrid,
    tol: f64,
) -> Result<Verdict> {
    structural_rows_check(system, rows, grid, tol, "spherical_cylinder", true)
}

fn structural_rows_check(
    system: &Coefficients,
    rows: &[usize],
    grid: &SampleGrid,
    tol: f64,
    path: &str,
    need_equal_diagonal: bool,
) -> Result<Verdict> {
    require_t_independent(system, path)?;
    grid.validate(system.space_dim())?;
    let m = system.order();
    if rows.is_empty() {
        return Err(Error::input("row index set is empty"));
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= m) {
        return Err(Error::input(format!(
            "row index {} out of range for order {m}",
            bad + 1
        )));
    }

    let mut ok = true;
    let mut witnesses = Vec::new();
    let mut residual_max: Vec<(MatrixId, f64)> = Vec::new();
    for x in &grid.x_points {
        let set = system.evaluate(x, 0.0);
        for (id, mat) in set.iter_labeled() {
            let structure = rows_structure(mat, rows, tol)?;
            let mut candidates: Vec<DVector<f64>> = Vec::new();
            if !structure.offdiag_zero {
                ok = false;
                candidates.extend(rows.iter().map(|&i| axis_normal(m, i, -1.0)));
            }
            if need_equal_diagonal && !structure.equal_diagonal {
                ok = false;
                // The pair of extreme diagonal entries exposes the
                // misaligned direction (e_i + e_j)/sqrt(2).
                let (&imin, _) = rows
                    .iter()
                    .map(|i| (i, mat[(*i, *i)]))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("nonempty rows");
                let (&imax, _) = rows
                    .iter()
                    .map(|i| (i, mat[(*i, *i)]))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("nonempty rows");
                let mut nu = DVector::zeros(m);
                nu[imin] = 1.0 / 2.0f64.sqrt();
                nu[imax] = 1.0 / 2.0f64.sqrt();
                candidates.push(nu);
            }
            if !candidates.is_empty() {
                structural_witnesses(system, &candidates, x, tol, &mut witnesses)?;
            }
            // Track the worst axis-normal residual per matrix for the report.
            let mut worst = 0.0f64;
            for &i in rows {
                let a = eigen_align(mat, &axis_normal(m, i, -1.0), tol)?;
                worst = worst.max(a.residual);
            }
            match residual_max.iter_mut().find(|(mid, _)| *mid == id) {
                Some((_, r)) => *r = r.max(worst),
                None => residual_max.push((id, worst)),
            }
        }
    }
    let meta = grid_meta(grid, rows.len() * if path == "polyhedral_angle" { 1 } else { 2 }, 0);
    Ok(structural_verdict(ok, witnesses, path, residual_max, tol, meta))
}

/// Cone criterion. For an m-facet polyhedral cone every coefficient matrix
/// must diagonalize across the stacked normal matrix; for more than m facets
/// or a smooth guide every coefficient matrix must be scalar.
pub fn check_cone(
    system: &Coefficients,
    cone: &ConvexBody,
    grid: &SampleGrid,
    tol: f64,
) -> Result<Verdict> {
    require_t_independent(system, "cone criterion")?;
    grid.validate(system.space_dim())?;
    let m = system.order();
    if cone.dim() != m {
        return Err(Error::input(format!(
            "cone dimension {} does not match system order {m}",
            cone.dim()
        )));
    }
    match cone {
        ConvexBody::PolyhedralCone { normals, .. } if normals.len() == m => {
            let n_mat = cone_normal_matrix(cone)?;
            let mut ok = true;
            let mut witnesses = Vec::new();
            let mut residual_max: Vec<(MatrixId, f64)> = Vec::new();
            for x in &grid.x_points {
                let set = system.evaluate(x, 0.0);
                for (id, mat) in set.iter_labeled() {
                    if similarity_diagonalize(mat, &n_mat, tol)?.is_none() {
                        ok = false;
                        structural_witnesses(system, normals, x, tol, &mut witnesses)?;
                    }
                    let mut worst = 0.0f64;
                    for nu in normals {
                        worst = worst.max(eigen_align(mat, nu, tol)?.residual);
                    }
                    match residual_max.iter_mut().find(|(mid, _)| *mid == id) {
                        Some((_, r)) => *r = r.max(worst),
                        None => residual_max.push((id, worst)),
                    }
                }
            }
            let meta = grid_meta(grid, m, 0);
            Ok(structural_verdict(ok, witnesses, "cone_diagonalize", residual_max, tol, meta))
        }
        ConvexBody::PolyhedralCone { .. } | ConvexBody::SmoothCone { .. } => {
            let ns = cone.normal_set(grid.smooth_normals.max(64))?;
            let probe: Vec<DVector<f64>> = ns.iter_all().cloned().collect();
            let mut ok = true;
            let mut witnesses = Vec::new();
            let mut residual_max: Vec<(MatrixId, f64)> = Vec::new();
            for x in &grid.x_points {
                let set = system.evaluate(x, 0.0);
                for (id, mat) in set.iter_labeled() {
                    if is_scalar(mat, tol)?.is_none() {
                        ok = false;
                        structural_witnesses(system, &probe, x, tol, &mut witnesses)?;
                        if witnesses.is_empty() {
                            // Non-scalar but every probe normal aligned:
                            // scan the normal directions more finely.
                            let fine = cone.normal_set(4096)?;
                            let fine: Vec<DVector<f64>> = fine.iter_all().cloned().collect();
                            structural_witnesses(system, &fine, x, tol, &mut witnesses)?;
                        }
                    }
                    let mut worst = 0.0f64;
                    for nu in &probe {
                        worst = worst.max(eigen_align(mat, nu, tol)?.residual);
                    }
                    match residual_max.iter_mut().find(|(mid, _)| *mid == id) {
                        Some((_, r)) => *r = r.max(worst),
                        None => residual_max.push((id, worst)),
                    }
                }
            }
            let meta = grid_meta(grid, ns.exact.len(), ns.sampled.len());
            Ok(structural_verdict(ok, witnesses, "cone_scalar", residual_max, tol, meta))
        }
        _ => Err(Error::input("check_cone expects a polyhedral or smooth cone")),
    }
}

/// The structural shortcut matching a body family, when one exists.
pub fn structural_check(
    system: &Coefficients,
    body: &ConvexBody,
    grid: &SampleGrid,
    tol: f64,
) -> Result<Option<Verdict>> {
    match body {
        ConvexBody::PolyhedralAngle { bounds, .. } => {
            let rows: Vec<usize> = bounds.iter().map(|b| b.0).collect();
            check_polyhedral_angle(system, &rows, grid, tol).map(Some)
        }
        ConvexBody::PolyhedralCylinder { slabs, .. } => {
            let rows: Vec<usize> = slabs.iter().map(|s| s.0).collect();
            check_cylinder(system, &rows, grid, tol).map(Some)
        }
        ConvexBody::SphericalCylinder { coords, .. } => {
            check_spherical_cylinder(system, coords, grid, tol).map(Some)
        }
        ConvexBody::Ball { .. } => {
            // A ball constrains every coordinate spherically.
            let coords: Vec<usize> = (0..body.dim()).collect();
            check_spherical_cylinder(system, &coords, grid, tol).map(Some)
        }
        ConvexBody::PolyhedralCone { .. } | ConvexBody::SmoothCone { .. } => {
            check_cone(system, body, grid, tol).map(Some)
        }
        _ => Ok(None),
    }
}
