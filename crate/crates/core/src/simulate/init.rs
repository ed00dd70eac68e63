//! Initial-data constructors: the tangential quadratic bump used to drive
//! falsification, and random smooth in-body fields for corroboration runs.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};

use super::field::{Grid, SolutionField};

/// Smooth compactly supported radial profile: 1 for `s <= r/2`, 0 for
/// `s >= r`, monotone in between (the standard exp(-1/z) glue).
pub fn bump_profile(s: f64, r: f64) -> f64 {
    if s <= r / 2.0 {
        return 1.0;
    }
    if s >= r {
        return 0.0;
    }
    let z = (r - s) / (r / 2.0);
    let f = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    f(z) / (f(z) + f(1.0 - z))
}

/// Parameters of the tangential bump `psi(x) = a + q(x) tau` with
/// `q(x) = (sum alpha_jk d_j d_k + sum beta_j d_j) zeta_r(|d|)`, `d = x - y`
/// taken in the minimal periodic image.
#[derive(Debug, Clone)]
pub struct BumpSpec {
    /// Quadratic coefficients, an n x n array (row-major).
    pub alpha: Vec<Vec<f64>>,
    /// Linear coefficients, length n.
    pub beta: Vec<f64>,
    /// Bump center.
    pub y: Vec<f64>,
    /// Cutoff radius; the profile is 1 inside r/2 and 0 beyond r.
    pub r: f64,
}

/// Builds the boundary-anchored initial data on the grid.
///
/// `a` must lie on the body boundary, `tau` must be a unit vector orthogonal
/// to the outward normal `nu`. Away from the bump support the field equals
/// `a` exactly.
pub fn counterexample_init(
    body: &ConvexBody,
    a: &DVector<f64>,
    nu: &DVector<f64>,
    tau: &DVector<f64>,
    spec: &BumpSpec,
    grid: &Grid,
) -> Result<SolutionField> {
    let m = body.dim();
    let n = grid.dim();
    if a.len() != m || nu.len() != m || tau.len() != m {
        return Err(Error::input("vector dimensions do not match the body"));
    }
    if (tau.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::input("tau must be unit"));
    }
    if tau.dot(nu).abs() > 1e-12 {
        return Err(Error::input(format!(
            "tau must be orthogonal to nu (inner product {:.3e})",
            tau.dot(nu)
        )));
    }
    let boundary_gap = body.violation(a).abs();
    if boundary_gap > 1e-9 * (1.0 + a.norm()) {
        return Err(Error::input(format!(
            "base point is not on the boundary (violation {boundary_gap:.3e})"
        )));
    }
    if spec.alpha.len() != n || spec.alpha.iter().any(|row| row.len() != n) {
        return Err(Error::input("alpha must be an n x n array"));
    }
    if spec.beta.len() != n || spec.y.len() != n {
        return Err(Error::input("beta and y must have length n"));
    }
    let half_box = grid.lengths.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
    if !(spec.r > 0.0) || spec.r >= half_box {
        return Err(Error::input(format!(
            "bump radius must lie in (0, {half_box}) so the support fits the box"
        )));
    }

    Ok(SolutionField::from_fn(grid.clone(), m, |x| {
        let d = grid.minimal_image(x, &spec.y);
        let s: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let zeta = bump_profile(s, spec.r);
        if zeta == 0.0 {
            return a.clone();
        }
        let mut q = 0.0;
        for j in 0..n {
            q += spec.beta[j] * d[j];
            for k in 0..n {
                q += spec.alpha[j][k] * d[j] * d[k];
            }
        }
        a + tau * (q * zeta)
    }))
}

/// Random smooth periodic field pulled into the body: a trigonometric
/// polynomial around an interior anchor, shrunk toward the anchor until the
/// grid membership holds.
pub fn random_in_body(
    body: &ConvexBody,
    grid: &Grid,
    rng: &mut ChaCha8Rng,
    modes: usize,
    amplitude: f64,
) -> Result<SolutionField> {
    let m = body.dim();
    let n = grid.dim();
    let anchor = body.interior_point()?;
    let mut waves = Vec::new();
    for _ in 0..modes.max(1) {
        let k: Vec<f64> = (0..n).map(|_| rng.random_range(-3i32..=3) as f64).collect();
        let phase: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let dir = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0f64));
        let dir = if dir.norm() > 1e-9 {
            dir.normalize()
        } else {
            DVector::from_fn(m, |i, _| if i == 0 { 1.0 } else { 0.0 })
        };
        let amp = amplitude * rng.random_range(0.2..1.0);
        waves.push((k, phase, dir, amp));
    }
    let lengths = grid.lengths.clone();
    let ripple = move |x: &[f64]| {
        let mut v = DVector::zeros(m);
        for (k, phase, dir, amp) in &waves {
            let arg: f64 = (0..n)
                .map(|a| 2.0 * std::f64::consts::PI * k[a] * x[a] / lengths[a])
                .sum::<f64>()
                + phase;
            v += dir * (*amp * arg.cos());
        }
        v
    };

    let mut scale = 1.0;
    for _ in 0..40 {
        let field = SolutionField::from_fn(grid.clone(), m, |x| &anchor + ripple(x) * scale);
        if field.max_violation(body) <= 0.0 {
            return Ok(field);
        }
        scale *= 0.5;
    }
    // The anchor itself is strictly interior, so this is unreachable for
    // sane amplitudes; fall back to the constant field.
    Ok(SolutionField::constant(grid.clone(), &anchor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn half_plane() -> ConvexBody {
        ConvexBody::polyhedral_angle(2, vec![(1, 0.0)]).unwrap()
    }

    fn default_spec() -> BumpSpec {
        BumpSpec {
            alpha: vec![vec![0.7]],
            beta: vec![-0.4],
            y: vec![3.0],
            r: 1.2,
        }
    }

    #[test]
    fn bump_profile_shape() {
        let r = 2.0;
        assert_abs_diff_eq!(bump_profile(0.0, r), 1.0);
        assert_abs_diff_eq!(bump_profile(1.0, r), 1.0);
        assert_abs_diff_eq!(bump_profile(2.0, r), 0.0);
        assert_abs_diff_eq!(bump_profile(5.0, r), 0.0);
        let mut prev = 1.0;
        for i in 0..100 {
            let s = 1.0 + i as f64 / 100.0;
            let v = bump_profile(s, r);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn field_equals_anchor_at_center_and_outside() {
        let grid = Grid::new(vec![2.0 * std::f64::consts::PI], vec![128]).unwrap();
        let a = DVector::from_row_slice(&[0.3, 0.0]);
        let nu = DVector::from_row_slice(&[0.0, -1.0]);
        let tau = DVector::from_row_slice(&[1.0, 0.0]);
        let spec = default_spec();
        let psi = counterexample_init(&half_plane(), &a, &nu, &tau, &spec, &grid).unwrap();
        for node in 0..psi.node_count() {
            let x = grid.coords(node);
            let d = grid.minimal_image(&x, &spec.y);
            let dist = d[0].abs();
            if dist >= spec.r {
                assert_eq!(psi.value_slice(node), a.as_slice());
            }
            if dist < 1e-12 {
                assert_abs_diff_eq!(psi.value(node)[0], a[0], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_at_center_match_coefficients() {
        // FD check of d psi/dx_j = beta_j tau and d2 psi = (a_jk + a_kj) tau.
        let grid = Grid::new(vec![4.0, 4.0], vec![128, 128]).unwrap();
        let a = DVector::from_row_slice(&[0.0, 0.0]);
        let nu = DVector::from_row_slice(&[0.0, -1.0]);
        let tau = DVector::from_row_slice(&[1.0, 0.0]);
        let spec = BumpSpec {
            alpha: vec![vec![0.5, 0.2], vec![-0.3, 0.8]],
            beta: vec![0.6, -0.9],
            y: vec![2.0, 2.0],
            r: 1.5,
        };
        let psi = counterexample_init(&half_plane(), &a, &nu, &tau, &spec, &grid).unwrap();
        let h = grid.spacing(0);
        let center = grid.flat_index(&[64, 64]);
        for j in 0..2 {
            let p = psi.value(grid.neighbor(center, j, 1));
            let m_ = psi.value(grid.neighbor(center, j, -1));
            let d1 = (&p - &m_)[0] / (2.0 * h);
            assert_abs_diff_eq!(d1, spec.beta[j], epsilon = h * h * 10.0);
        }
        for j in 0..2 {
            for k in 0..2 {
                let d2 = if j == k {
                    let p = psi.value(grid.neighbor(center, j, 1));
                    let c = psi.value(center);
                    let m_ = psi.value(grid.neighbor(center, j, -1));
                    (&p - &c * 2.0 + &m_)[0] / (h * h)
                } else {
                    let pp = psi.value(grid.neighbor(grid.neighbor(center, j, 1), k, 1));
                    let pm = psi.value(grid.neighbor(grid.neighbor(center, j, 1), k, -1));
                    let mp = psi.value(grid.neighbor(grid.neighbor(center, j, -1), k, 1));
                    let mm = psi.value(grid.neighbor(grid.neighbor(center, j, -1), k, -1));
                    (pp - pm - mp + mm)[0] / (4.0 * h * h)
                };
                let expected = spec.alpha[j][k] + spec.alpha[k][j];
                assert_abs_diff_eq!(d2, expected, epsilon = h * h * 50.0);
            }
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let grid = Grid::new(vec![6.0], vec![64]).unwrap();
        let body = half_plane();
        let a = DVector::from_row_slice(&[0.3, 0.0]);
        let nu = DVector::from_row_slice(&[0.0, -1.0]);
        let spec = default_spec();

        // tau not orthogonal to nu.
        let skew = DVector::from_row_slice(&[0.8, -0.6]);
        assert!(counterexample_init(&body, &a, &nu, &skew, &spec, &grid).is_err());

        // base point off the boundary.
        let interior = DVector::from_row_slice(&[0.3, 1.0]);
        let tau = DVector::from_row_slice(&[1.0, 0.0]);
        assert!(counterexample_init(&body, &interior, &nu, &tau, &spec, &grid).is_err());

        // bump radius too large for the box.
        let wide = BumpSpec { r: 3.5, ..default_spec() };
        assert!(counterexample_init(&body, &a, &nu, &tau, &wide, &grid).is_err());
    }

    #[test]
    fn random_fields_are_in_body() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = Grid::new(vec![2.0 * std::f64::consts::PI], vec![48]).unwrap();
        let bodies = [
            ConvexBody::ball(DVector::zeros(2), 1.0).unwrap(),
            ConvexBody::polyhedral_cylinder(2, vec![(0, -1.0, 1.0), (1, -2.0, 0.5)]).unwrap(),
            half_plane(),
        ];
        for body in &bodies {
            for _ in 0..5 {
                let f = random_in_body(body, &grid, &mut rng, 3, 0.8).unwrap();
                assert!(f.max_violation(body) <= 0.0);
            }
        }
    }
}
