//! Periodic space-time grid and the discrete solution field living on it.
//!
//! The periodic box stands in for the whole space: periodic continuous
//! initial data are bounded continuous, and the unique bounded solution
//! inherits the periodicity, so no artificial boundary condition enters.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};

/// Uniform periodic grid over the box `[0, L_1) x ... x [0, L_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lengths: Vec<f64>,
    pub points: Vec<usize>,
}

impl Grid {
    pub fn new(lengths: Vec<f64>, points: Vec<usize>) -> Result<Grid> {
        if lengths.is_empty() || lengths.len() != points.len() {
            return Err(Error::input("grid needs matching lengths and point counts"));
        }
        if lengths.iter().any(|&l| !(l > 0.0)) || points.iter().any(|&n| n < 4) {
            return Err(Error::input(
                "grid needs positive box lengths and at least 4 points per axis",
            ));
        }
        Ok(Grid { lengths, points })
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn node_count(&self) -> usize {
        self.points.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Multi-index of a flat node index (row-major, axis 0 slowest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.points[a];
            flat /= self.points[a];
        }
        idx
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        for (a, &i) in multi.iter().enumerate() {
            flat = flat * self.points[a] + i;
        }
        flat
    }

    /// Physical coordinates of a node.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| i as f64 * self.spacing(a))
            .collect()
    }

    /// Flat index of the periodic neighbor `offset` cells along `axis`.
    pub fn neighbor(&self, flat: usize, axis: usize, offset: isize) -> usize {
        let mut multi = self.multi_index(flat);
        let n = self.points[axis] as isize;
        multi[axis] = (multi[axis] as isize + offset).rem_euclid(n) as usize;
        self.flat_index(&multi)
    }

    /// Difference `x - y` wrapped into `[-L/2, L/2)` per axis.
    pub fn minimal_image(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| {
                let l = self.lengths[a];
                let mut d = (x[a] - y[a]) % l;
                if d < -l / 2.0 {
                    d += l;
                }
                if d >= l / 2.0 {
                    d -= l;
                }
                d
            })
            .collect()
    }
}

/// Discrete m-component field on a periodic grid. Values are stored
/// node-major, component-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub grid: Grid,
    pub m: usize,
    pub time: f64,
    pub(crate) data: Vec<f64>,
}

impl SolutionField {
    pub fn constant(grid: Grid, value: &DVector<f64>) -> SolutionField {
        let m = value.len();
        let nodes = grid.node_count();
        let mut data = Vec::with_capacity(nodes * m);
        for _ in 0..nodes {
            data.extend_from_slice(value.as_slice());
        }
        SolutionField {
            grid,
            m,
            time: 0.0,
            data,
        }
    }

    pub fn from_fn(grid: Grid, m: usize, f: impl Fn(&[f64]) -> DVector<f64>) -> SolutionField {
        let nodes = grid.node_count();
        let mut data = Vec::with_capacity(nodes * m);
        for node in 0..nodes {
            let v = f(&grid.coords(node));
            assert_eq!(v.len(), m);
            data.extend_from_slice(v.as_slice());
        }
        SolutionField {
            grid,
            m,
            time: 0.0,
            data,
        }
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn value(&self, node: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.data[node * self.m..(node + 1) * self.m])
    }

    pub fn value_slice(&self, node: usize) -> &[f64] {
        &self.data[node * self.m..(node + 1) * self.m]
    }

    pub fn set_value(&mut self, node: usize, v: &DVector<f64>) {
        self.data[node * self.m..(node + 1) * self.m].copy_from_slice(v.as_slice());
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Worst body violation over the grid.
    pub fn max_violation(&self, body: &ConvexBody) -> f64 {
        (0..self.node_count())
            .map(|node| body.violation(&self.value(node)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf_diff(&self, other: &SolutionField) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Field translated by `cells` grid cells along `axis` (periodic).
    pub fn translated(&self, axis: usize, cells: isize) -> SolutionField {
        let mut out = self.clone();
        for node in 0..self.node_count() {
            let src = self.grid.neighbor(node, axis, -cells);
            let v = self.value(src);
            out.set_value(node, &v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_indexing_roundtrip() {
        let g = Grid::new(vec![1.0, 2.0], vec![4, 8]).unwrap();
        for flat in 0..g.node_count() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.neighbor(0, 0, -1), g.flat_index(&[3, 0]));
        assert_eq!(g.neighbor(0, 1, -1), g.flat_index(&[0, 7]));
    }

    #[test]
    fn minimal_image_wraps() {
        let g = Grid::new(vec![2.0], vec![8]).unwrap();
        let d = g.minimal_image(&[1.9], &[0.1]);
        assert!((d[0] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn translation_is_exact() {
        let g = Grid::new(vec![1.0], vec![8]).unwrap();
        let f = SolutionField::from_fn(g, 1, |x| DVector::from_row_slice(&[x[0] * 7.0]));
        let shifted = f.translated(0, 3);
        for node in 0..f.node_count() {
            let src = f.grid.neighbor(node, 0, -3);
            assert_eq!(shifted.value(node)[0], f.value(src)[0]);
        }
    }
}
