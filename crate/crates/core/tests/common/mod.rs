//! Shared generators for the integration suites: random cones with a common
//! interior ray, and random coefficient systems conforming (or not) to the
//! structural criteria.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use parinv_core::bodies::ConvexBody;
use parinv_core::system::Coefficients;

/// Rejection-samples a valid cone with `p` facets sharing an interior ray.
/// For p = m the normal matrix is kept well-conditioned so similarity
/// transforms stay accurate.
pub fn random_cone(rng: &mut ChaCha8Rng, m: usize, p: usize) -> ConvexBody {
    loop {
        let d = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0f64));
        if d.norm() < 1e-3 {
            continue;
        }
        let d = d.normalize();
        let normals: Vec<DVector<f64>> = (0..p)
            .map(|_| {
                let w = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0f64));
                let w_perp = &w - &d * w.dot(&d);
                let gamma = rng.random_range(0.3..1.5);
                (w_perp - &d * gamma).normalize()
            })
            .collect();
        let mut ok = true;
        'pairs: for i in 0..p {
            for j in i + 1..p {
                if normals[i].dot(&normals[j]).abs() > 0.9 {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        if !ok {
            continue;
        }
        if p == m {
            let mut n_mat = DMatrix::zeros(m, m);
            for (c, nu) in normals.iter().enumerate() {
                n_mat.set_column(c, nu);
            }
            if n_mat.determinant().abs() < 0.1 {
                continue;
            }
        }
        match ConvexBody::polyhedral_cone(DVector::zeros(m), normals) {
            Ok(c) => return c,
            Err(_) => continue,
        }
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |_, _| rng.random_range(-scale..scale))
}

/// How the random system should relate to a structural criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conformance {
    /// Rows in the index set get exactly zero off-diagonals.
    ZeroRows,
    /// Zero off-diagonals plus equal diagonal entries on the index set.
    ZeroRowsEqualDiag,
    /// Matrices diagonalized across a given cone normal matrix.
    ConeDiagonal,
    /// Scalar matrices.
    Scalar,
    /// Unconstrained random matrices.
    Generic,
}

/// Builds one random matrix obeying `conformance` with respect to `rows`
/// (for the row criteria) or `n_mat` (for the cone criterion).
pub fn conforming_matrix(
    rng: &mut ChaCha8Rng,
    m: usize,
    conformance: Conformance,
    rows: &[usize],
    n_mat: Option<&DMatrix<f64>>,
) -> DMatrix<f64> {
    match conformance {
        Conformance::Generic => random_matrix(rng, m, 2.0),
        Conformance::Scalar => DMatrix::identity(m, m) * rng.random_range(0.5..3.0),
        Conformance::ZeroRows | Conformance::ZeroRowsEqualDiag => {
            let mut a = random_matrix(rng, m, 2.0);
            for &i in rows {
                for j in 0..m {
                    if j != i {
                        a[(i, j)] = 0.0;
                    }
                }
            }
            if conformance == Conformance::ZeroRowsEqualDiag {
                let shared = rng.random_range(0.5..3.0);
                for &i in rows {
                    a[(i, i)] = shared;
                }
            }
            a
        }
        Conformance::ConeDiagonal => {
            let nt = n_mat.expect("cone criterion needs the normal matrix").transpose();
            let nt_inv = nt.clone().try_inverse().expect("well-conditioned cone");
            let d = DMatrix::from_diagonal(&DVector::from_fn(m, |_, _| {
                rng.random_range(0.5..3.0)
            }));
            &nt_inv * d * &nt
        }
    }
}

/// Random constant system with every coefficient matrix built by
/// `conforming_matrix`. Second-order diagonal blocks get an identity boost
/// so the principal part is not degenerate.
pub fn random_system(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    conformance: Conformance,
    rows: &[usize],
    n_mat: Option<&DMatrix<f64>>,
) -> Coefficients {
    let mut second = Vec::new();
    for j in 0..n {
        for k in j..n {
            let mut a = conforming_matrix(rng, m, conformance, rows, n_mat);
            if j == k {
                // Keep the diagonal-in-sigma part dominant.
                a += DMatrix::identity(m, m) * 4.0;
            } else {
                a *= 0.2;
            }
            second.push(((j, k), a));
        }
    }
    let first = (0..n)
        .map(|j| (j, conforming_matrix(rng, m, conformance, rows, n_mat)))
        .collect();
    Coefficients::constant(n, m, second, first).expect("valid random system")
}
