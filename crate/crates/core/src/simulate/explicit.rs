//! Explicit time stepping with second-order central differences on the
//! periodic grid. Coefficients are frozen within each step; the hard
//! stability gate lives in the parent module.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::system::Coefficients;

use super::field::SolutionField;

/// One explicit step: `u += dt (sum A_jk D2_jk u + sum A_j D_j u)`.
///
/// Constant fields are reproduced bit-identically: every central difference
/// of equal values is exactly zero, so the increment vanishes exactly.
pub fn step_explicit(u: &SolutionField, system: &Coefficients, dt: f64) -> Result<SolutionField> {
    let n = u.grid.dim();
    let m = u.m;
    if system.space_dim() != n || system.order() != m {
        return Err(Error::input("system dimensions do not match the field"));
    }
    let t = u.time;
    let constant_set = if system.space_dependent() {
        None
    } else {
        Some(system.evaluate(&vec![0.0; n], t))
    };
    let inv_h: Vec<f64> = (0..n).map(|a| 1.0 / u.grid.spacing(a)).collect();

    let mut out = u.clone();
    out.time = t + dt;
    out.data
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(node, chunk)| {
            let local;
            let set = match &constant_set {
                Some(s) => s,
                None => {
                    local = system.evaluate(&u.grid.coords(node), t);
                    &local
                }
            };
            let center = u.value(node);
            let mut increment = DVector::zeros(m);
            for j in 0..n {
                let plus = u.value(u.grid.neighbor(node, j, 1));
                let minus = u.value(u.grid.neighbor(node, j, -1));
                // D2_jj and D_j share the gathered neighbors.
                let second = (&plus - &center * 2.0 + &minus) * (inv_h[j] * inv_h[j]);
                increment += set.second_order(j, j) * second;
                let first = (&plus - &minus) * (0.5 * inv_h[j]);
                increment += set.first_order(j) * first;
                for k in j + 1..n {
                    let pp = u.value(u.grid.neighbor(u.grid.neighbor(node, j, 1), k, 1));
                    let pm = u.value(u.grid.neighbor(u.grid.neighbor(node, j, 1), k, -1));
                    let mp = u.value(u.grid.neighbor(u.grid.neighbor(node, j, -1), k, 1));
                    let mm = u.value(u.grid.neighbor(u.grid.neighbor(node, j, -1), k, -1));
                    let cross = (pp - pm - mp + mm) * (0.25 * inv_h[j] * inv_h[k]);
                    // A_jk acts on both (j,k) and (k,j) cross terms.
                    increment += set.second_order(j, k) * cross * 2.0;
                }
            }
            for c in 0..m {
                chunk[c] += dt * increment[c];
            }
        });
    Ok(out)
}
