//! Problem description ingested from a single JSON document.
//!
//! Matrices are row-major nested arrays whose entries are numbers or small
//! arithmetic expressions over `x1..xn` and `t`. All coordinate and matrix
//! indices in the document are 1-based, matching the usual `A_jk`, `u_i`
//! notation; they are converted to 0-based indices on load.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::Value;

use parinv_core::bodies::ConvexBody;
use parinv_core::criterion::SampleGrid;
use parinv_core::error::{Error, Result};
use parinv_core::expr::Expr;
use parinv_core::simulate::{Grid, Scheme, SimConfig};
use parinv_core::system::{Coefficients, ExprMatrix};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub n: usize,
    pub m: usize,
    pub coefficients: CoefficientsDoc,
    #[serde(default)]
    pub body: Option<BodyDoc>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sampling: Option<SamplingDoc>,
    #[serde(default)]
    pub sim: Option<SimDoc>,
    #[serde(default)]
    pub initial: Option<InitialDoc>,
    #[serde(default)]
    pub falsify: Option<FalsifyDoc>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsDoc {
    #[serde(default)]
    pub second_order: Vec<SecondOrderDoc>,
    #[serde(default)]
    pub first_order: Vec<FirstOrderDoc>,
    /// Grid-sampled alternative to the inline/expression matrices.
    #[serde(default)]
    pub tabulated: Option<TabulatedDoc>,
}

/// Coefficients sampled on a rectangular (x, t) grid; each entry lists one
/// m x m matrix per node in row-major (t, x1, ..., xn) order.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedDoc {
    pub x_axes: Vec<Vec<f64>>,
    pub t_axis: Vec<f64>,
    #[serde(default)]
    pub second_order: Vec<TabulatedSecondDoc>,
    #[serde(default)]
    pub first_order: Vec<TabulatedFirstDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSecondDoc {
    pub j: usize,
    pub k: usize,
    pub values: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedFirstDoc {
    pub j: usize,
    pub values: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondOrderDoc {
    pub j: usize,
    pub k: usize,
    pub matrix: Vec<Vec<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderDoc {
    pub j: usize,
    pub matrix: Vec<Vec<Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyDoc {
    HalfSpace {
        normal: Vec<f64>,
        point: Vec<f64>,
    },
    HPolytope {
        faces: Vec<FaceDoc>,
    },
    PolyhedralAngle {
        bounds: Vec<BoundDoc>,
    },
    PolyhedralCylinder {
        slabs: Vec<SlabDoc>,
    },
    SphericalCylinder {
        coords: Vec<usize>,
        radius: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    PolyhedralCone {
        vertex: Vec<f64>,
        normals: Vec<Vec<f64>>,
    },
    SmoothCone {},
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceDoc {
    pub normal: Vec<f64>,
    pub point: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundDoc {
    pub index: usize,
    pub lower: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabDoc {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingDoc {
    #[serde(default)]
    pub sigma_resolution: usize,
    #[serde(default)]
    pub x_grid: Vec<Vec<f64>>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub smooth_normals: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    pub lengths: Vec<f64>,
    pub points: Vec<usize>,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub monitor_stride: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDoc {
    Constant {
        value: Vec<f64>,
    },
    Bump {
        a: Vec<f64>,
        nu: Vec<f64>,
        tau: Vec<f64>,
        alpha: Vec<Vec<f64>>,
        beta: Vec<f64>,
        y: Vec<f64>,
        r: f64,
    },
    RandomInBody {
        #[serde(default)]
        modes: Option<usize>,
        #[serde(default)]
        amplitude: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FalsifyDoc {
    #[serde(default)]
    pub budget: Option<usize>,
}

/// Fully validated problem: core-ready values plus the raw document text
/// echoed into reports.
pub struct Problem {
    pub system: Coefficients,
    pub body: Option<ConvexBody>,
    pub tolerance: f64,
    pub seed: u64,
    pub grid: SampleGrid,
    pub sigma_resolution: usize,
    pub sim: Option<SimConfig>,
    pub initial: Option<InitialDoc>,
    pub falsify_budget: usize,
    pub raw: String,
}

fn one_based(idx: usize, limit: usize, what: &str) -> Result<usize> {
    if idx == 0 || idx > limit {
        return Err(Error::input(format!(
            "{what} index {idx} out of range 1..={limit}"
        )));
    }
    Ok(idx - 1)
}

/// A matrix entry is either a plain number or an expression string.
fn entry_to_expr(v: &Value, n: usize) -> Result<Expr> {
    match v {
        Value::Number(num) => num
            .as_f64()
            .map(Expr::constant)
            .ok_or_else(|| Error::input(format!("non-finite numeric entry {num}"))),
        Value::String(s) => Expr::parse(s, n),
        other => Err(Error::input(format!(
            "matrix entries must be numbers or expression strings, got {other}"
        ))),
    }
}

fn matrix_doc_to_expr(rows: &[Vec<Value>], n: usize, m: usize, what: &str) -> Result<ExprMatrix> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::input(format!("{what} must be an {m}x{m} array")));
    }
    let mut entries = Vec::with_capacity(m * m);
    for row in rows {
        for v in row {
            entries.push(entry_to_expr(v, n)?);
        }
    }
    ExprMatrix::new(m, entries)
}

fn matrix_doc_to_constant(rows: &[Vec<Value>], m: usize, what: &str) -> Result<Option<DMatrix<f64>>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::input(format!("{what} must be an {m}x{m} array")));
    }
    let mut entries = Vec::with_capacity(m * m);
    for row in rows {
        for v in row {
            match v {
                Value::Number(num) => match num.as_f64() {
                    Some(x) => entries.push(x),
                    None => return Err(Error::input(format!("non-finite entry in {what}"))),
                },
                _ => return Ok(None),
            }
        }
    }
    Ok(Some(DMatrix::from_row_slice(m, m, &entries)))
}

fn sampled_matrices(values: &[Vec<Vec<f64>>], m: usize, what: &str) -> Result<Vec<DMatrix<f64>>> {
    values
        .iter()
        .map(|rows| {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(Error::input(format!("{what} sample is not {m}x{m}")));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Ok(DMatrix::from_row_slice(m, m, &flat))
        })
        .collect()
}

fn build_system(doc: &ProblemDoc) -> Result<Coefficients> {
    let (n, m) = (doc.n, doc.m);
    if let Some(tab) = &doc.coefficients.tabulated {
        if !doc.coefficients.second_order.is_empty() || !doc.coefficients.first_order.is_empty() {
            return Err(Error::input(
                "use either inline matrices or the tabulated form, not both",
            ));
        }
        let mut second = Vec::new();
        for s in &tab.second_order {
            let j = one_based(s.j, n, "second-order j")?;
            let k = one_based(s.k, n, "second-order k")?;
            second.push(((j, k), sampled_matrices(&s.values, m, "second-order coefficient")?));
        }
        let mut first = Vec::new();
        for f in &tab.first_order {
            let j = one_based(f.j, n, "first-order j")?;
            first.push((j, sampled_matrices(&f.values, m, "first-order coefficient")?));
        }
        return Coefficients::tabulated(n, m, tab.x_axes.clone(), tab.t_axis.clone(), second, first);
    }
    let all_constant = doc
        .coefficients
        .second_order
        .iter()
        .map(|s| &s.matrix)
        .chain(doc.coefficients.first_order.iter().map(|f| &f.matrix))
        .all(|rows| {
            rows.iter()
                .flatten()
                .all(|v| matches!(v, Value::Number(_)))
        });

    if all_constant {
        let mut second = Vec::new();
        for s in &doc.coefficients.second_order {
            let j = one_based(s.j, n, "second-order j")?;
            let k = one_based(s.k, n, "second-order k")?;
            let mat = matrix_doc_to_constant(&s.matrix, m, "second-order matrix")?
                .expect("checked numeric");
            second.push(((j, k), mat));
        }
        let mut first = Vec::new();
        for f in &doc.coefficients.first_order {
            let j = one_based(f.j, n, "first-order j")?;
            let mat = matrix_doc_to_constant(&f.matrix, m, "first-order matrix")?
                .expect("checked numeric");
            first.push((j, mat));
        }
        Coefficients::constant(n, m, second, first)
    } else {
        let mut second = Vec::new();
        for s in &doc.coefficients.second_order {
            let j = one_based(s.j, n, "second-order j")?;
            let k = one_based(s.k, n, "second-order k")?;
            second.push(((j, k), matrix_doc_to_expr(&s.matrix, n, m, "second-order matrix")?));
        }
        let mut first = Vec::new();
        for f in &doc.coefficients.first_order {
            let j = one_based(f.j, n, "first-order j")?;
            first.push((j, matrix_doc_to_expr(&f.matrix, n, m, "first-order matrix")?));
        }
        Coefficients::from_expressions(n, m, second, first)
    }
}

fn build_body(doc: &BodyDoc, m: usize) -> Result<ConvexBody> {
    let vec_of = |v: &[f64], what: &str| -> Result<DVector<f64>> {
        if v.len() != m {
            return Err(Error::input(format!("{what} must have length m = {m}")));
        }
        Ok(DVector::from_row_slice(v))
    };
    match doc {
        BodyDoc::HalfSpace { normal, point } => {
            ConvexBody::half_space(vec_of(normal, "normal")?, vec_of(point, "point")?)
        }
        BodyDoc::HPolytope { faces } => {
            let faces = faces
                .iter()
                .map(|f| Ok((vec_of(&f.normal, "face normal")?, vec_of(&f.point, "face point")?)))
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::h_polytope(faces)
        }
        BodyDoc::PolyhedralAngle { bounds } => {
            let bounds = bounds
                .iter()
                .map(|b| Ok((one_based(b.index, m, "bound")?, b.lower)))
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::polyhedral_angle(m, bounds)
        }
        BodyDoc::PolyhedralCylinder { slabs } => {
            let slabs = slabs
                .iter()
                .map(|s| Ok((one_based(s.index, m, "slab")?, s.lower, s.upper)))
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::polyhedral_cylinder(m, slabs)
        }
        BodyDoc::SphericalCylinder { coords, radius } => {
            let coords = coords
                .iter()
                .map(|&c| one_based(c, m, "coordinate"))
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::spherical_cylinder(m, coords, *radius)
        }
        BodyDoc::Ball { center, radius } => ConvexBody::ball(vec_of(center, "center")?, *radius),
        BodyDoc::PolyhedralCone { vertex, normals } => {
            let normals = normals
                .iter()
                .map(|nu| vec_of(nu, "cone normal"))
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::polyhedral_cone(vec_of(vertex, "vertex")?, normals)
        }
        BodyDoc::SmoothCone {} => ConvexBody::smooth_cone(m),
    }
}

impl Problem {
    pub fn parse(raw: &str) -> Result<Problem> {
        let doc: ProblemDoc = serde_json::from_str(raw)
            .map_err(|e| Error::input(format!("config parse error: {e}")))?;
        let system = build_system(&doc)?;
        let body = doc.body.as_ref().map(|b| build_body(b, doc.m)).transpose()?;

        let sampling = doc.sampling.unwrap_or_default();
        let mut x_points = sampling.x_grid.clone();
        if x_points.is_empty() {
            if system.space_dependent() {
                return Err(Error::input(
                    "space-dependent coefficients need sampling.x_grid points",
                ));
            }
            x_points.push(vec![0.0; doc.n]);
        }
        let mut t_points = sampling.t_grid.clone();
        if t_points.is_empty() {
            if system.time_dependent() {
                return Err(Error::input(
                    "time-dependent coefficients need sampling.t_grid points",
                ));
            }
            t_points.push(0.0);
        }
        let mut grid = SampleGrid::new(x_points, t_points);
        if let Some(s) = sampling.smooth_normals {
            grid.smooth_normals = s.max(1);
        }

        let sim = doc
            .sim
            .as_ref()
            .map(|s| -> Result<SimConfig> {
                Ok(SimConfig {
                    grid: Grid::new(s.lengths.clone(), s.points.clone())?,
                    dt: s.dt,
                    horizon: s.horizon,
                    scheme: s.scheme.unwrap_or(Scheme::ExplicitCentral),
                    monitor_stride: s.monitor_stride.unwrap_or(10),
                })
            })
            .transpose()?;

        Ok(Problem {
            system,
            body,
            tolerance: doc.tolerance.unwrap_or(parinv_core::DEFAULT_TOL),
            seed: doc.seed.unwrap_or(0),
            grid,
            sigma_resolution: sampling.sigma_resolution,
            sim,
            initial: doc.initial,
            falsify_budget: doc.falsify.and_then(|f| f.budget).unwrap_or(200),
            raw: raw.to_string(),
        })
    }

    pub fn require_body(&self) -> Result<&ConvexBody> {
        self.body
            .as_ref()
            .ok_or_else(|| Error::input("this command needs a 'body' section in the config"))
    }

    pub fn require_sim(&self) -> Result<&SimConfig> {
        self.sim
            .as_ref()
            .ok_or_else(|| Error::input("this command needs a 'sim' section in the config"))
    }
}
