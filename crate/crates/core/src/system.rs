//! Coefficient fields of the parabolic system: the matrices `A_jk(x,t)` of
//! the second-order part and `A_j(x,t)` of the first-order part, either
//! constant, expression-backed, or sampled on a rectangular (x,t) grid.
//!
//! The index symmetry `A_jk = A_kj` is enforced at construction and only the
//! canonical `j <= k` representative is stored.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Label of one coefficient matrix. Indices are 1-based, matching the
/// conventional `A_jk`, `A_j` notation used in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixId {
    SecondOrder { j: usize, k: usize },
    FirstOrder { j: usize },
}

impl std::fmt::Display for MatrixId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixId::SecondOrder { j, k } => write!(f, "A[{j},{k}]"),
            MatrixId::FirstOrder { j } => write!(f, "A[{j}]"),
        }
    }
}

/// Index of the canonical pair (j, k), j <= k, within the packed upper
/// triangle of an n x n symmetric arrangement.
fn pair_index(n: usize, j: usize, k: usize) -> usize {
    let (j, k) = if j <= k { (j, k) } else { (k, j) };
    j * n - j * (j + 1) / 2 + k
}

fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// All coefficient matrices evaluated at one point (x, t).
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    n: usize,
    m: usize,
    second: Vec<DMatrix<f64>>,
    first: Vec<DMatrix<f64>>,
}

impl CoefficientSet {
    pub fn space_dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// `A_jk` for 0-based axis indices; symmetric in (j, k).
    pub fn second_order(&self, j: usize, k: usize) -> &DMatrix<f64> {
        &self.second[pair_index(self.n, j, k)]
    }

    /// `A_j` for a 0-based axis index.
    pub fn first_order(&self, j: usize) -> &DMatrix<f64> {
        &self.first[j]
    }

    /// Iterates all stored matrices with their 1-based labels, second-order
    /// pairs (j <= k) first.
    pub fn iter_labeled(&self) -> impl Iterator<Item = (MatrixId, &DMatrix<f64>)> {
        let n = self.n;
        let seconds = (0..n).flat_map(move |j| (j..n).map(move |k| (j, k))).map(move |(j, k)| {
            (
                MatrixId::SecondOrder { j: j + 1, k: k + 1 },
                &self.second[pair_index(n, j, k)],
            )
        });
        let firsts = self
            .first
            .iter()
            .enumerate()
            .map(|(j, m)| (MatrixId::FirstOrder { j: j + 1 }, m));
        seconds.chain(firsts)
    }
}

/// An m x m matrix of expressions.
#[derive(Debug, Clone)]
pub struct ExprMatrix {
    m: usize,
    entries: Vec<Expr>,
}

impl ExprMatrix {
    pub fn new(m: usize, entries: Vec<Expr>) -> Result<ExprMatrix> {
        if entries.len() != m * m {
            return Err(Error::input(format!(
                "expression matrix needs {} entries, got {}",
                m * m,
                entries.len()
            )));
        }
        Ok(ExprMatrix { m, entries })
    }

    fn eval(&self, x: &[f64], t: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, j| self.entries[i * self.m + j].eval(x, t))
    }

    fn mentions_t(&self) -> bool {
        self.entries.iter().any(Expr::mentions_t)
    }

    fn mentions_x(&self) -> bool {
        self.entries.iter().any(Expr::mentions_x)
    }
}

/// Coefficients sampled on a rectangular (x, t) grid; evaluation snaps to the
/// nearest sample per axis.
#[derive(Debug, Clone)]
pub struct Tabulated {
    x_axes: Vec<Vec<f64>>,
    t_axis: Vec<f64>,
    /// values[pair or axis][t_idx * n_space + x_flat]
    second: Vec<Vec<DMatrix<f64>>>,
    first: Vec<Vec<DMatrix<f64>>>,
}

impl Tabulated {
    fn space_points(&self) -> usize {
        self.x_axes.iter().map(Vec::len).product()
    }

    fn nearest(axis: &[f64], v: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &a) in axis.iter().enumerate() {
            let d = (a - v).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }

    fn flat_index(&self, x: &[f64], t: f64) -> usize {
        let mut x_flat = 0;
        for (axis, &xi) in self.x_axes.iter().zip(x) {
            x_flat = x_flat * axis.len() + Self::nearest(axis, xi);
        }
        Self::nearest(&self.t_axis, t) * self.space_points() + x_flat
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Constant {
        second: Vec<DMatrix<f64>>,
        first: Vec<DMatrix<f64>>,
    },
    Expr {
        second: Vec<ExprMatrix>,
        first: Vec<ExprMatrix>,
    },
    Tabulated(Box<Tabulated>),
}

/// The coefficient field of a parabolic system with `n` spatial variables
/// and `m` solution components.
#[derive(Debug, Clone)]
pub struct Coefficients {
    n: usize,
    m: usize,
    kind: Kind,
}

fn checked_matrix(m: usize, mat: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if mat.nrows() != m || mat.ncols() != m {
        return Err(Error::input(format!(
            "{what} must be {m}x{m}, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(format!("{what} contains non-finite entries")));
    }
    Ok(mat)
}

/// Places entries keyed by (0-based j, k) into the packed pair layout,
/// verifying `A_jk = A_kj` when both orders are supplied.
fn pack_second<T: Clone + PartialEq>(
    n: usize,
    entries: Vec<((usize, usize), T)>,
    zero: impl Fn() -> T,
    what: &str,
) -> Result<Vec<T>> {
    let mut packed: Vec<Option<T>> = vec![None; pair_count(n)];
    for ((j, k), v) in entries {
        if j >= n || k >= n {
            return Err(Error::input(format!(
                "{what} index ({}, {}) out of range for n = {n}",
                j + 1,
                k + 1
            )));
        }
        let idx = pair_index(n, j, k);
        match &packed[idx] {
            None => packed[idx] = Some(v),
            Some(prev) if *prev == v => {}
            Some(_) => {
                return Err(Error::input(format!(
                    "{what} violates A_jk = A_kj at ({}, {})",
                    j + 1,
                    k + 1
                )))
            }
        }
    }
    Ok(packed.into_iter().map(|v| v.unwrap_or_else(&zero)).collect())
}

fn pack_first<T: Clone>(
    n: usize,
    entries: Vec<(usize, T)>,
    zero: impl Fn() -> T,
    what: &str,
) -> Result<Vec<T>> {
    let mut packed: Vec<Option<T>> = vec![None; n];
    for (j, v) in entries {
        if j >= n {
            return Err(Error::input(format!(
                "{what} index {} out of range for n = {n}",
                j + 1
            )));
        }
        packed[j] = Some(v);
    }
    Ok(packed.into_iter().map(|v| v.unwrap_or_else(&zero)).collect())
}

impl Coefficients {
    /// Constant-coefficient system. Missing (j, k) or j entries default to
    /// the zero matrix.
    pub fn constant(
        n: usize,
        m: usize,
        second: Vec<((usize, usize), DMatrix<f64>)>,
        first: Vec<(usize, DMatrix<f64>)>,
    ) -> Result<Coefficients> {
        if n == 0 || m == 0 {
            return Err(Error::input("dimensions n and m must be positive"));
        }
        let second = second
            .into_iter()
            .map(|(jk, mat)| Ok((jk, checked_matrix(m, mat, "second-order coefficient")?)))
            .collect::<Result<Vec<_>>>()?;
        let first = first
            .into_iter()
            .map(|(j, mat)| Ok((j, checked_matrix(m, mat, "first-order coefficient")?)))
            .collect::<Result<Vec<_>>>()?;
        let zero = || DMatrix::zeros(m, m);
        Ok(Coefficients {
            n,
            m,
            kind: Kind::Constant {
                second: pack_second(n, second, zero, "second-order coefficient")?,
                first: pack_first(n, first, zero, "first-order coefficient")?,
            },
        })
    }

    /// Expression-backed coefficients: entries are functions of `x1..xn, t`.
    pub fn from_expressions(
        n: usize,
        m: usize,
        second: Vec<((usize, usize), ExprMatrix)>,
        first: Vec<(usize, ExprMatrix)>,
    ) -> Result<Coefficients> {
        if n == 0 || m == 0 {
            return Err(Error::input("dimensions n and m must be positive"));
        }
        if second.iter().map(|(_, e)| e).chain(first.iter().map(|(_, e)| e)).any(|e| e.m != m) {
            return Err(Error::input("expression matrix order mismatch"));
        }
        // Expression equality for the A_jk = A_kj check compares source text.
        let second_keyed: Vec<((usize, usize), Vec<String>)> = second
            .iter()
            .map(|((j, k), e)| ((*j, *k), e.entries.iter().map(|x| x.source().to_string()).collect()))
            .collect();
        pack_second(n, second_keyed, Vec::new, "second-order coefficient")?;
        let zero_expr = || ExprMatrix {
            m,
            entries: vec![Expr::constant(0.0); m * m],
        };
        let mut packed_second: Vec<Option<ExprMatrix>> = vec![None; pair_count(n)];
        for ((j, k), e) in second {
            packed_second[pair_index(n, j, k)] = Some(e);
        }
        let packed_second = packed_second
            .into_iter()
            .map(|v| v.unwrap_or_else(zero_expr))
            .collect();
        Ok(Coefficients {
            n,
            m,
            kind: Kind::Expr {
                second: packed_second,
                first: pack_first(n, first, zero_expr, "first-order coefficient")?,
            },
        })
    }

    /// Grid-sampled coefficients. `second[i].1` and `first[i].1` list one
    /// matrix per grid node in row-major (t, x1, ..., xn) order.
    pub fn tabulated(
        n: usize,
        m: usize,
        x_axes: Vec<Vec<f64>>,
        t_axis: Vec<f64>,
        second: Vec<((usize, usize), Vec<DMatrix<f64>>)>,
        first: Vec<(usize, Vec<DMatrix<f64>>)>,
    ) -> Result<Coefficients> {
        if n == 0 || m == 0 {
            return Err(Error::input("dimensions n and m must be positive"));
        }
        if x_axes.len() != n {
            return Err(Error::input(format!(
                "expected {n} spatial axes, got {}",
                x_axes.len()
            )));
        }
        if t_axis.is_empty() || x_axes.iter().any(Vec::is_empty) {
            return Err(Error::input("sample axes must be nonempty"));
        }
        let nodes = t_axis.len() * x_axes.iter().map(Vec::len).product::<usize>();
        let check_values = |values: &[DMatrix<f64>], what: &str| -> Result<()> {
            if values.len() != nodes {
                return Err(Error::input(format!(
                    "{what} needs {nodes} samples, got {}",
                    values.len()
                )));
            }
            for v in values {
                if v.nrows() != m || v.ncols() != m {
                    return Err(Error::input(format!("{what} sample is not {m}x{m}")));
                }
            }
            Ok(())
        };
        for ((_, _), v) in &second {
            check_values(v, "second-order coefficient")?;
        }
        for (_, v) in &first {
            check_values(v, "first-order coefficient")?;
        }
        let zero = || vec![DMatrix::zeros(m, m); nodes];
        let tab = Tabulated {
            x_axes,
            t_axis,
            second: pack_second(n, second, zero, "second-order coefficient")?,
            first: pack_first(n, first, zero, "first-order coefficient")?,
        };
        Ok(Coefficients {
            n,
            m,
            kind: Kind::Tabulated(Box::new(tab)),
        })
    }

    /// Convenience constructor for the scalar heat system `du/dt = laplace u`.
    pub fn heat(n: usize, m: usize) -> Coefficients {
        let second = (0..n)
            .map(|j| ((j, j), DMatrix::identity(m, m)))
            .collect();
        Coefficients::constant(n, m, second, Vec::new()).expect("heat system is valid")
    }

    pub fn space_dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant { .. })
    }

    pub fn time_dependent(&self) -> bool {
        match &self.kind {
            Kind::Constant { .. } => false,
            Kind::Expr { second, first } => {
                second.iter().any(ExprMatrix::mentions_t) || first.iter().any(ExprMatrix::mentions_t)
            }
            Kind::Tabulated(t) => t.t_axis.len() > 1,
        }
    }

    pub fn space_dependent(&self) -> bool {
        match &self.kind {
            Kind::Constant { .. } => false,
            Kind::Expr { second, first } => {
                second.iter().any(ExprMatrix::mentions_x) || first.iter().any(ExprMatrix::mentions_x)
            }
            Kind::Tabulated(t) => t.x_axes.iter().any(|a| a.len() > 1),
        }
    }

    /// All coefficient matrices at the point (x, t).
    pub fn evaluate(&self, x: &[f64], t: f64) -> CoefficientSet {
        assert_eq!(x.len(), self.n, "coordinate dimension mismatch");
        let (second, first) = match &self.kind {
            Kind::Constant { second, first } => (second.clone(), first.clone()),
            Kind::Expr { second, first } => (
                second.iter().map(|e| e.eval(x, t)).collect(),
                first.iter().map(|e| e.eval(x, t)).collect(),
            ),
            Kind::Tabulated(tab) => {
                let idx = tab.flat_index(x, t);
                (
                    tab.second.iter().map(|v| v[idx].clone()).collect(),
                    tab.first.iter().map(|v| v[idx].clone()).collect(),
                )
            }
        };
        CoefficientSet {
            n: self.n,
            m: self.m,
            second,
            first,
        }
    }

    /// The (x, t) sample points intrinsic to a grid-sampled field, if any.
    pub fn natural_grid(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
        match &self.kind {
            Kind::Tabulated(tab) => {
                let mut points = vec![Vec::new()];
                for axis in &tab.x_axes {
                    let mut next = Vec::with_capacity(points.len() * axis.len());
                    for p in &points {
                        for &v in axis {
                            let mut q = p.clone();
                            q.push(v);
                            next.push(q);
                        }
                    }
                    points = next;
                }
                Some((points, tab.t_axis.clone()))
            }
            _ => None,
        }
    }
}
