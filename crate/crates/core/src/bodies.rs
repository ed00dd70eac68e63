//! Convex body families and their normal-set descriptions: half-spaces,
//! H-polytopes, axis-aligned polyhedral angles and cylinders, spherical
//! cylinders, balls, polyhedral cones and the marker for a cone with a
//! smooth guide.
//!
//! Every body exposes a continuous violation functional that is <= 0 exactly
//! on the body; discrete solutions are monitored through it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::parabolicity::sphere_samples;

const UNIT_TOL: f64 = 1e-12;

fn normalized(v: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::input(format!("{what} has non-finite entries")));
    }
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::input(format!("{what} must be nonzero")));
    }
    Ok(v / n)
}

/// Unit axis vector `e_i`, optionally negated.
fn axis(m: usize, i: usize, sign: f64) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    v[i] = sign;
    v
}

/// Agmon-Motzkin relaxation: find `d` with `nu_i . d <= -margin` for all i,
/// certifying that the half-spaces admit a common interior direction.
fn feasible_direction(normals: &[DVector<f64>], margin: f64) -> Option<DVector<f64>> {
    let m = normals[0].len();
    let mut d = DVector::zeros(m);
    for nu in normals {
        d -= nu;
    }
    if d.norm() > 0.0 {
        d = d.normalize() * 2.0 * margin;
    }
    for _ in 0..20_000 {
        let mut worst = None;
        let mut worst_gap = 0.0;
        for (i, nu) in normals.iter().enumerate() {
            let gap = nu.dot(&d) + margin;
            if gap > worst_gap {
                worst_gap = gap;
                worst = Some(i);
            }
        }
        match worst {
            None => return Some(d),
            Some(i) => {
                let nu = &normals[i];
                let gap = nu.dot(&d) + margin;
                d -= nu * gap;
            }
        }
    }
    None
}

/// The supported convex body families.
///
/// Axis-aligned variants store 0-based coordinate indices. Construct through
/// the checked constructors; invariants (unit normals, ordered bounds,
/// nonempty interior) are enforced there.
#[derive(Debug, Clone)]
pub enum ConvexBody {
    /// `{u : (u - point) . normal <= 0}`.
    HalfSpace {
        normal: DVector<f64>,
        point: DVector<f64>,
    },
    /// Intersection of finitely many half-spaces.
    HPolytope {
        faces: Vec<(DVector<f64>, DVector<f64>)>,
    },
    /// `{u : u_i >= lower_i for i in the index set}`.
    PolyhedralAngle {
        dim: usize,
        bounds: Vec<(usize, f64)>,
    },
    /// `{u : lower_i <= u_i <= upper_i for i in the index set}`.
    PolyhedralCylinder {
        dim: usize,
        slabs: Vec<(usize, f64, f64)>,
    },
    /// `{u : || (u_i)_{i in coords} || <= radius}`.
    SphericalCylinder {
        dim: usize,
        coords: Vec<usize>,
        radius: f64,
    },
    Ball {
        center: DVector<f64>,
        radius: f64,
    },
    /// `{u : (u - vertex) . nu_i <= 0}` with p >= m facet normals.
    PolyhedralCone {
        vertex: DVector<f64>,
        normals: Vec<DVector<f64>>,
    },
    /// Marker for a convex cone with a smooth guide, realized as the right
    /// circular cone `{u : ||u'|| <= -u_m}` (apex at the origin). Its exact
    /// invariance criterion is matrix scalarity, so only sampled monitoring
    /// normals are attached to it.
    SmoothCone { dim: usize },
}

/// Finite normal description of a body boundary: the exact normals of flat
/// faces plus, for curved pieces, a deterministic sample of the normal
/// directions.
#[derive(Debug, Clone)]
pub struct NormalSet {
    pub exact: Vec<DVector<f64>>,
    pub sampled: Vec<DVector<f64>>,
}

impl NormalSet {
    pub fn iter_all(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.exact.iter().chain(self.sampled.iter())
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.sampled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ConvexBody {
    pub fn half_space(normal: DVector<f64>, point: DVector<f64>) -> Result<ConvexBody> {
        if normal.len() != point.len() {
            return Err(Error::input("normal and point dimensions differ"));
        }
        Ok(ConvexBody::HalfSpace {
            normal: normalized(normal, "half-space normal")?,
            point,
        })
    }

    pub fn h_polytope(faces: Vec<(DVector<f64>, DVector<f64>)>) -> Result<ConvexBody> {
        if faces.is_empty() {
            return Err(Error::geometry("polytope needs at least one face"));
        }
        let dim = faces[0].0.len();
        let faces = faces
            .into_iter()
            .map(|(nu, a)| {
                if nu.len() != dim || a.len() != dim {
                    return Err(Error::input("inconsistent face dimensions"));
                }
                Ok((normalized(nu, "face normal")?, a))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvexBody::HPolytope { faces })
    }

    pub fn polyhedral_angle(dim: usize, bounds: Vec<(usize, f64)>) -> Result<ConvexBody> {
        validate_indices(dim, bounds.iter().map(|b| b.0), "polyhedral angle")?;
        Ok(ConvexBody::PolyhedralAngle { dim, bounds })
    }

    pub fn polyhedral_cylinder(dim: usize, slabs: Vec<(usize, f64, f64)>) -> Result<ConvexBody> {
        validate_indices(dim, slabs.iter().map(|s| s.0), "polyhedral cylinder")?;
        for &(i, lo, hi) in &slabs {
            if lo >= hi {
                return Err(Error::geometry(format!(
                    "cylinder slab {} needs lower < upper, got [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(ConvexBody::PolyhedralCylinder { dim, slabs })
    }

    pub fn spherical_cylinder(dim: usize, coords: Vec<usize>, radius: f64) -> Result<ConvexBody> {
        validate_indices(dim, coords.iter().copied(), "spherical cylinder")?;
        if radius <= 0.0 {
            return Err(Error::geometry("spherical cylinder needs radius > 0"));
        }
        Ok(ConvexBody::SphericalCylinder { dim, coords, radius })
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<ConvexBody> {
        if radius <= 0.0 {
            return Err(Error::geometry("ball needs radius > 0"));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    /// A polyhedral cone with `p >= m` facets. Normals are normalized and
    /// must admit a common interior direction; exact duplicates are
    /// rejected.
    pub fn polyhedral_cone(vertex: DVector<f64>, normals: Vec<DVector<f64>>) -> Result<ConvexBody> {
        let m = vertex.len();
        if normals.len() < m {
            return Err(Error::geometry(format!(
                "cone in dimension {m} needs at least {m} facet normals, got {}",
                normals.len()
            )));
        }
        let normals = normals
            .into_iter()
            .map(|nu| {
                if nu.len() != m {
                    return Err(Error::input("cone normal dimension mismatch"));
                }
                normalized(nu, "cone normal")
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..normals.len() {
            for j in i + 1..normals.len() {
                if (&normals[i] - &normals[j]).norm() <= UNIT_TOL {
                    return Err(Error::geometry(format!(
                        "duplicate cone normals at positions {} and {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if feasible_direction(&normals, 1e-6).is_none() {
            return Err(Error::geometry(
                "cone normals admit no common interior direction (empty interior)",
            ));
        }
        Ok(ConvexBody::PolyhedralCone { vertex, normals })
    }

    pub fn smooth_cone(dim: usize) -> Result<ConvexBody> {
        if dim < 3 {
            return Err(Error::geometry(
                "a cone with a smooth guide needs ambient dimension >= 3",
            ));
        }
        Ok(ConvexBody::SmoothCone { dim })
    }

    /// Ambient dimension m.
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::HalfSpace { normal, .. } => normal.len(),
            ConvexBody::HPolytope { faces } => faces[0].0.len(),
            ConvexBody::PolyhedralAngle { dim, .. } => *dim,
            ConvexBody::PolyhedralCylinder { dim, .. } => *dim,
            ConvexBody::SphericalCylinder { dim, .. } => *dim,
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::PolyhedralCone { vertex, .. } => vertex.len(),
            ConvexBody::SmoothCone { dim } => *dim,
        }
    }

    /// Signed violation: <= 0 iff `u` belongs to the body, continuous in `u`.
    /// Half-space families report the worst constraint residual, spherical
    /// parts the radial excess.
    pub fn violation(&self, u: &DVector<f64>) -> f64 {
        match self {
            ConvexBody::HalfSpace { normal, point } => (u - point).dot(normal),
            ConvexBody::HPolytope { faces } => faces
                .iter()
                .map(|(nu, a)| (u - a).dot(nu))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::PolyhedralAngle { bounds, .. } => bounds
                .iter()
                .map(|&(i, lo)| lo - u[i])
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::PolyhedralCylinder { slabs, .. } => slabs
                .iter()
                .map(|&(i, lo, hi)| (lo - u[i]).max(u[i] - hi))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::SphericalCylinder { coords, radius, .. } => {
                let norm_sq: f64 = coords.iter().map(|&i| u[i] * u[i]).sum();
                norm_sq.sqrt() - radius
            }
            ConvexBody::Ball { center, radius } => (u - center).norm() - radius,
            ConvexBody::PolyhedralCone { vertex, normals } => normals
                .iter()
                .map(|nu| (u - vertex).dot(nu))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::SmoothCone { dim } => {
                let lateral: f64 = u.rows(0, dim - 1).norm();
                (lateral + u[dim - 1]) / 2.0f64.sqrt()
            }
        }
    }

    pub fn membership(&self, u: &DVector<f64>) -> bool {
        self.violation(u) <= 0.0
    }

    /// The normals of the boundary: exact for flat faces, `smooth_samples`
    /// deterministic directions for curved pieces. Structural criteria do not
    /// depend on the sample count; sampled normals serve cross-validation and
    /// falsification only.
    pub fn normal_set(&self, smooth_samples: usize) -> Result<NormalSet> {
        let m = self.dim();
        let mut exact = Vec::new();
        let mut sampled = Vec::new();
        match self {
            ConvexBody::HalfSpace { normal, .. } => exact.push(normal.clone()),
            ConvexBody::HPolytope { faces } => {
                exact.extend(faces.iter().map(|(nu, _)| nu.clone()));
            }
            ConvexBody::PolyhedralAngle { bounds, .. } => {
                exact.extend(bounds.iter().map(|&(i, _)| axis(m, i, -1.0)));
            }
            ConvexBody::PolyhedralCylinder { slabs, .. } => {
                for &(i, _, _) in slabs {
                    exact.push(axis(m, i, -1.0));
                    exact.push(axis(m, i, 1.0));
                }
            }
            ConvexBody::SphericalCylinder { coords, .. } => {
                if coords.len() == 1 {
                    exact.push(axis(m, coords[0], -1.0));
                    exact.push(axis(m, coords[0], 1.0));
                } else {
                    for omega in sphere_samples(coords.len(), smooth_samples) {
                        let mut nu = DVector::zeros(m);
                        for (slot, &i) in coords.iter().enumerate() {
                            nu[i] = omega[slot];
                        }
                        sampled.push(nu);
                    }
                }
            }
            ConvexBody::Ball { .. } => {
                if m == 1 {
                    exact.push(axis(1, 0, -1.0));
                    exact.push(axis(1, 0, 1.0));
                } else {
                    sampled.extend(sphere_samples(m, smooth_samples));
                }
            }
            ConvexBody::PolyhedralCone { normals, .. } => exact.extend(normals.iter().cloned()),
            ConvexBody::SmoothCone { dim } => {
                let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
                for omega in sphere_samples(dim - 1, smooth_samples) {
                    let mut nu = DVector::zeros(*dim);
                    for i in 0..dim - 1 {
                        nu[i] = omega[i] * inv_sqrt2;
                    }
                    nu[dim - 1] = inv_sqrt2;
                    sampled.push(nu);
                }
            }
        }
        for v in exact.iter().chain(sampled.iter()) {
            debug_assert!((v.norm() - 1.0).abs() <= UNIT_TOL);
        }
        Ok(NormalSet { exact, sampled })
    }

    /// A point strictly inside the body.
    pub fn interior_point(&self) -> Result<DVector<f64>> {
        let m = self.dim();
        match self {
            ConvexBody::HalfSpace { normal, point } => Ok(point - normal),
            ConvexBody::HPolytope { faces } => {
                let normals: Vec<DVector<f64>> = faces.iter().map(|(nu, _)| nu.clone()).collect();
                // Seed at the mean face anchor, then relax into the interior.
                let mut p = DVector::zeros(m);
                for (_, a) in faces {
                    p += a;
                }
                p /= faces.len() as f64;
                for _ in 0..20_000 {
                    let mut worst = None;
                    let mut worst_gap = 0.0;
                    for (i, (nu, a)) in faces.iter().enumerate() {
                        let gap = (&p - a).dot(nu) + 1e-6;
                        if gap > worst_gap {
                            worst_gap = gap;
                            worst = Some(i);
                        }
                    }
                    match worst {
                        None => return Ok(p),
                        Some(i) => p -= &normals[i] * worst_gap,
                    }
                }
                Err(Error::geometry("polytope appears to have empty interior"))
            }
            ConvexBody::PolyhedralAngle { bounds, .. } => {
                let mut p = DVector::zeros(m);
                for &(i, lo) in bounds {
                    p[i] = lo + 1.0;
                }
                Ok(p)
            }
            ConvexBody::PolyhedralCylinder { slabs, .. } => {
                let mut p = DVector::zeros(m);
                for &(i, lo, hi) in slabs {
                    p[i] = 0.5 * (lo + hi);
                }
                Ok(p)
            }
            ConvexBody::SphericalCylinder { .. } => Ok(DVector::zeros(m)),
            ConvexBody::Ball { center, .. } => Ok(center.clone()),
            ConvexBody::PolyhedralCone { vertex, normals } => {
                let d = feasible_direction(normals, 1e-6)
                    .ok_or_else(|| Error::geometry("cone has empty interior"))?;
                Ok(vertex + d.normalize())
            }
            ConvexBody::SmoothCone { dim } => Ok(axis(*dim, dim - 1, -1.0)),
        }
    }

    /// A boundary point whose outward normal is `nu`, when the family admits
    /// one in closed form.
    pub fn boundary_point(&self, nu: &DVector<f64>) -> Option<DVector<f64>> {
        let m = self.dim();
        let matches = |a: &DVector<f64>, b: &DVector<f64>| (a - b).norm() <= 1e-9;
        match self {
            ConvexBody::HalfSpace { normal, point } => matches(nu, normal).then(|| point.clone()),
            ConvexBody::HPolytope { faces } => {
                let (face_nu, a) = faces.iter().find(|(fnu, _)| matches(nu, fnu))?;
                // Project an interior point onto the face plane and keep it
                // only if it still satisfies the other constraints.
                let p = self.interior_point().ok()?;
                let cand = &p + face_nu * (a - &p).dot(face_nu);
                (self.violation(&cand) <= 1e-9).then_some(cand)
            }
            ConvexBody::PolyhedralAngle { bounds, .. } => {
                for &(i, lo) in bounds {
                    if matches(nu, &axis(m, i, -1.0)) {
                        let mut p = self.interior_point().ok()?;
                        p[i] = lo;
                        return Some(p);
                    }
                }
                None
            }
            ConvexBody::PolyhedralCylinder { slabs, .. } => {
                for &(i, lo, hi) in slabs {
                    if matches(nu, &axis(m, i, -1.0)) {
                        let mut p = self.interior_point().ok()?;
                        p[i] = lo;
                        return Some(p);
                    }
                    if matches(nu, &axis(m, i, 1.0)) {
                        let mut p = self.interior_point().ok()?;
                        p[i] = hi;
                        return Some(p);
                    }
                }
                None
            }
            ConvexBody::SphericalCylinder { coords, radius, .. } => {
                let mut p = DVector::zeros(m);
                let mut lateral_sq = 0.0;
                for &i in coords {
                    p[i] = radius * nu[i];
                    lateral_sq += nu[i] * nu[i];
                }
                // nu must be supported on the curved coordinates.
                ((lateral_sq - 1.0).abs() <= 1e-9).then_some(p)
            }
            ConvexBody::Ball { center, radius } => Some(center + nu * *radius),
            ConvexBody::PolyhedralCone { vertex, normals } => {
                let face_nu = normals.iter().find(|fnu| matches(nu, fnu))?;
                let p = self.interior_point().ok()?;
                let v = &p - vertex;
                let cand = vertex + (&v - face_nu * v.dot(face_nu));
                (self.violation(&cand) <= 1e-9).then_some(cand)
            }
            ConvexBody::SmoothCone { dim } => {
                let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
                if (nu[dim - 1] - inv_sqrt2).abs() > 1e-9 {
                    return None;
                }
                let mut p = DVector::zeros(*dim);
                for i in 0..dim - 1 {
                    p[i] = nu[i] / inv_sqrt2;
                }
                p[dim - 1] = -1.0;
                Some(p)
            }
        }
    }
}

fn validate_indices(
    dim: usize,
    indices: impl Iterator<Item = usize>,
    what: &str,
) -> Result<()> {
    let mut seen = vec![false; dim];
    let mut any = false;
    for i in indices {
        any = true;
        if i >= dim {
            return Err(Error::input(format!(
                "{what} coordinate index {} out of range for m = {dim}",
                i + 1
            )));
        }
        if seen[i] {
            return Err(Error::input(format!(
                "{what} repeats coordinate index {}",
                i + 1
            )));
        }
        seen[i] = true;
    }
    if !any {
        return Err(Error::geometry(format!("{what} needs a nonempty index set")));
    }
    Ok(())
}

/// Stacks the facet normals of an m-facet cone into the matrix
/// `N = [nu_1, ..., nu_m]` and certifies `|det N^T| > 1e-10`. Failure marks
/// an invalid cone: the normals of a genuine convex cone with nonempty
/// interior are linearly independent.
pub fn cone_normal_matrix(cone: &ConvexBody) -> Result<DMatrix<f64>> {
    let ConvexBody::PolyhedralCone { vertex, normals } = cone else {
        return Err(Error::input("cone_normal_matrix expects a polyhedral cone"));
    };
    let m = vertex.len();
    if normals.len() != m {
        return Err(Error::input(format!(
            "expected exactly m = {m} facets, got {}",
            normals.len()
        )));
    }
    let mut n_mat = DMatrix::zeros(m, m);
    for (c, nu) in normals.iter().enumerate() {
        n_mat.set_column(c, nu);
    }
    let det = n_mat.clone().lu().determinant();
    if det.abs() <= 1e-10 {
        return Err(Error::geometry(format!(
            "cone normal matrix is numerically singular (|det| = {:.3e})",
            det.abs()
        )));
    }
    Ok(n_mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_row_slice(&[a, b])
    }

    #[test]
    fn half_space_normal_set_and_violation() {
        let body = ConvexBody::half_space(vec2(0.0, 1.0), vec2(0.0, 2.0)).unwrap();
        let ns = body.normal_set(0).unwrap();
        assert_eq!(ns.exact.len(), 1);
        assert_abs_diff_eq!(body.violation(&vec2(5.0, 3.0)), 1.0);
        assert!(body.membership(&vec2(5.0, 2.0)));
    }

    #[test]
    fn strip_normals() {
        let body = ConvexBody::polyhedral_cylinder(2, vec![(1, -1.0, 1.0)]).unwrap();
        let ns = body.normal_set(0).unwrap();
        assert_eq!(ns.exact.len(), 2);
        assert!(ns.exact.contains(&vec2(0.0, -1.0)));
        assert!(ns.exact.contains(&vec2(0.0, 1.0)));
    }

    #[test]
    fn spherical_cylinder_normals_and_violation() {
        let body = ConvexBody::spherical_cylinder(4, vec![2, 3], 2.0).unwrap();
        let ns = body.normal_set(4).unwrap();
        assert_eq!(ns.sampled.len(), 4);
        for nu in &ns.sampled {
            assert_abs_diff_eq!(nu.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(nu[0], 0.0);
            assert_abs_diff_eq!(nu[1], 0.0);
        }
        let u = DVector::from_row_slice(&[9.0, 9.0, 3.0, 4.0]);
        assert_abs_diff_eq!(body.violation(&u), 3.0);
    }

    #[test]
    fn ball_membership_cases() {
        let body = ConvexBody::ball(DVector::zeros(3), 1.0).unwrap();
        assert_abs_diff_eq!(body.violation(&DVector::zeros(3)), -1.0);
        assert!(body.membership(&DVector::from_row_slice(&[1.0, 0.0, 0.0])));
        assert!(!body.membership(&DVector::from_row_slice(&[1.0 + 1e-6, 0.0, 0.0])));
    }

    #[test]
    fn cone_normal_matrix_orthant_and_duplicates() {
        let orthant = ConvexBody::polyhedral_cone(
            DVector::zeros(3),
            (0..3).map(|i| axis(3, i, -1.0)).collect(),
        )
        .unwrap();
        let n = cone_normal_matrix(&orthant).unwrap();
        assert_abs_diff_eq!(n.determinant().abs(), 1.0, epsilon = 1e-14);

        let dup = ConvexBody::polyhedral_cone(
            DVector::zeros(2),
            vec![vec2(-1.0, 0.0), vec2(-1.0, 0.0)],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn cone_needs_interior() {
        // Opposing normals leave no interior direction.
        let res = ConvexBody::polyhedral_cone(
            DVector::zeros(2),
            vec![vec2(1.0, 0.0), vec2(-1.0, 0.0)],
        );
        assert!(res.is_err());
    }

    #[test]
    fn random_cones_are_never_singular() {
        // Lemma-style check: normals sharing an interior ray are independent.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let m = rng.random_range(2..=6);
            let cone = random_cone(&mut rng, m, m);
            assert!(cone_normal_matrix(&cone).is_ok());
        }
    }

    // Rejection-samples a valid cone with p facets sharing an interior ray.
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
                    if normals[i].dot(&normals[j]).abs() > 0.95 {
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
                if n_mat.determinant().abs() < 0.05 {
                    continue;
                }
            }
            match ConvexBody::polyhedral_cone(DVector::zeros(m), normals) {
                Ok(c) => return c,
                Err(_) => continue,
            }
        }
    }

    #[test]
    fn violation_is_convex_on_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let bodies: Vec<ConvexBody> = vec![
            ConvexBody::half_space(vec2(0.4, -0.6), vec2(1.0, 1.0)).unwrap(),
            ConvexBody::polyhedral_angle(3, vec![(1, 0.0), (2, -1.0)]).unwrap(),
            ConvexBody::polyhedral_cylinder(3, vec![(0, -1.0, 2.0)]).unwrap(),
            ConvexBody::spherical_cylinder(3, vec![1, 2], 1.5).unwrap(),
            ConvexBody::ball(DVector::zeros(3), 2.0).unwrap(),
            random_cone(&mut rng, 3, 4),
            ConvexBody::smooth_cone(3).unwrap(),
        ];
        for body in &bodies {
            let m = body.dim();
            for _ in 0..200 {
                let a = DVector::from_fn(m, |_, _| rng.random_range(-3.0..3.0f64));
                let b = DVector::from_fn(m, |_, _| rng.random_range(-3.0..3.0f64));
                let mid = (&a + &b) * 0.5;
                let worst = body.violation(&a).max(body.violation(&b));
                assert!(body.violation(&mid) <= worst + 1e-12);
            }
        }
    }

    #[test]
    fn normals_point_outward() {
        let bodies: Vec<ConvexBody> = vec![
            ConvexBody::half_space(vec2(0.0, -1.0), vec2(0.0, 0.5)).unwrap(),
            ConvexBody::polyhedral_angle(3, vec![(1, 0.0), (2, -1.0)]).unwrap(),
            ConvexBody::polyhedral_cylinder(2, vec![(1, -1.0, 1.0)]).unwrap(),
            ConvexBody::ball(DVector::zeros(2), 1.0).unwrap(),
            ConvexBody::spherical_cylinder(3, vec![1, 2], 1.0).unwrap(),
            ConvexBody::smooth_cone(3).unwrap(),
        ];
        let eps = 1e-6;
        for body in &bodies {
            let ns = body.normal_set(8).unwrap();
            for nu in ns.iter_all() {
                let a = body
                    .boundary_point(nu)
                    .unwrap_or_else(|| panic!("no boundary point for {nu:?}"));
                assert!(body.violation(&(&a + nu * eps)) > 0.0);
                assert!(body.violation(&(&a - nu * eps)) < 0.0);
            }
        }
    }

    #[test]
    fn interior_points_are_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let bodies: Vec<ConvexBody> = vec![
            ConvexBody::half_space(vec2(0.0, -1.0), vec2(0.0, 0.5)).unwrap(),
            ConvexBody::h_polytope(vec![
                (vec2(0.0, 1.0), vec2(0.0, 1.0)),
                (vec2(0.0, -1.0), vec2(0.0, -1.0)),
                (vec2(1.0, 0.0), vec2(1.0, 0.0)),
                (vec2(-1.0, 0.0), vec2(-1.0, 0.0)),
            ])
            .unwrap(),
            ConvexBody::polyhedral_angle(2, vec![(1, 0.0)]).unwrap(),
            ConvexBody::polyhedral_cylinder(2, vec![(1, -1.0, 1.0)]).unwrap(),
            ConvexBody::spherical_cylinder(3, vec![2], 1.0).unwrap(),
            ConvexBody::ball(DVector::zeros(2), 1.0).unwrap(),
            random_cone(&mut rng, 3, 5),
            ConvexBody::smooth_cone(4).unwrap(),
        ];
        for body in &bodies {
            let p = body.interior_point().unwrap();
            assert!(body.violation(&p) < 0.0, "violation {}", body.violation(&p));
        }
    }
}
