//! Periodic 2D grid, sampled fields, spectral calculus and norms.
//!
//! The physical problem lives on the whole plane with data decaying at
//! infinity. Here it is posed on the torus `[-L/2, L/2)^2`, with data
//! concentrated near the origin. Node `(i, j)` sits at
//! `(-L/2 + i h, -L/2 + j h)` and is stored row-major at `j * n + i`, so
//! `i` runs along `x1`.

pub(crate) mod norms;
mod snapshot;
mod spectral;

pub use norms::{norm, seminorm_tensor_sup, FieldComponents, NormSpec};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};
pub use spectral::{
    dealias, differentiate, divergence, gradient, laplacian, partial, sym_gradient, velocity_gradient, vorticity,
    Derivative, Field, Spectrum,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
    box_length: f64,
}

impl Grid2D {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length = {box_length} must be positive and finite"
            )));
        }
        Ok(Self { n, box_length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.box_length * self.box_length
    }

    /// Number of nodes, `n^2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.box_length + i as f64 * self.spacing()
    }

    /// Physical position of flat index `idx`.
    #[inline]
    pub fn position(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx % self.n), self.coord(idx / self.n))
    }

    /// Grid-index distance from node `idx` to the nearest box edge.
    pub fn seam_distance(&self, idx: usize) -> usize {
        let (i, j) = (idx % self.n, idx / self.n);
        let d = |k: usize| k.min(self.n - 1 - k);
        d(i).min(d(j))
    }

    pub(crate) fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "n = {} / L = {} vs n = {} / L = {}",
                self.n, self.box_length, other.n, other.box_length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wraps node values, rejecting wrong length or non-finite entries.
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.n(),
                grid.n()
            )));
        }
        let field = Self { grid, values };
        field.ensure_finite("field")?;
        Ok(field)
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.position(idx);
                f(x1, x2)
            })
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n() + i]
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                what: what.to_string(),
                index,
            }),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    /// Riemann sum `sum f h^2`, exact for trigonometric polynomials.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest magnitude within `cells` grid cells of the box edges.
    pub fn seam_sup(&self, cells: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.grid.seam_distance(*idx) < cells)
            .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 2],
}

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField) -> Result<Self> {
        c1.grid().check_same(&c2.grid())?;
        Ok(Self { comps: [c1, c2] })
    }

    pub(crate) fn from_parts(c1: ScalarField, c2: ScalarField) -> Self {
        debug_assert_eq!(c1.grid(), c2.grid());
        Self { comps: [c1, c2] }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::from_parts(ScalarField::zeros(grid), ScalarField::zeros(grid))
    }

    pub fn constant(grid: Grid2D, c: (f64, f64)) -> Self {
        Self::from_parts(ScalarField::constant(grid, c.0), ScalarField::constant(grid, c.1))
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self::from_parts(
            ScalarField::from_fn(grid, |x1, x2| f(x1, x2).0),
            ScalarField::from_fn(grid, |x1, x2| f(x1, x2).1),
        )
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.comps[0].grid()
    }

    #[inline]
    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    #[inline]
    pub fn comp_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.comps[i]
    }

    pub fn comps(&self) -> &[ScalarField; 2] {
        &self.comps
    }

    pub fn into_comps(self) -> [ScalarField; 2] {
        self.comps
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        self.comps[0].ensure_finite(what)?;
        self.comps[1].ensure_finite(what)
    }

    pub fn map_comps(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self::from_parts(f(&self.comps[0]), f(&self.comps[1]))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        Self::from_parts(self.comps[0].add(&other.comps[0]), self.comps[1].add(&other.comps[1]))
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        Self::from_parts(self.comps[0].sub(&other.comps[0]), self.comps[1].sub(&other.comps[1]))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_comps(|f| f.scale(c))
    }

    pub fn axpy(&mut self, c: f64, other: &VectorField) {
        self.comps[0].axpy(c, &other.comps[0]);
        self.comps[1].axpy(c, &other.comps[1]);
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.comps[0].zip_map(&self.comps[1], f64::hypot)
    }

    /// Pointwise `a . b`.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let mut out = self.comps[0].mul(&other.comps[0]);
        for ((o, &a), &b) in out
            .values_mut()
            .iter_mut()
            .zip(self.comps[1].values())
            .zip(other.comps[1].values())
        {
            *o += a * b;
        }
        out
    }

    pub fn sup_abs(&self) -> f64 {
        self.magnitude().sup_abs()
    }
}

/// 2x2 tensor field; entry `(i, j)` is stored at `comps[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    comps: [[ScalarField; 2]; 2],
}

impl TensorField {
    pub fn new(comps: [[ScalarField; 2]; 2]) -> Result<Self> {
        let g = comps[0][0].grid();
        for row in &comps {
            for c in row {
                g.check_same(&c.grid())?;
            }
        }
        Ok(Self { comps })
    }

    pub(crate) fn from_parts(comps: [[ScalarField; 2]; 2]) -> Self {
        Self { comps }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let z = ScalarField::zeros(grid);
        Self::from_parts([[z.clone(), z.clone()], [z.clone(), z]])
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.comps[0][0].grid()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i][j]
    }

    pub fn transpose(&self) -> Self {
        let c = &self.comps;
        Self::from_parts([[c[0][0].clone(), c[1][0].clone()], [c[0][1].clone(), c[1][1].clone()]])
    }

    pub fn sub(&self, other: &TensorField) -> Self {
        let e = |i: usize, j: usize| self.comps[i][j].sub(&other.comps[i][j]);
        Self::from_parts([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    /// Pointwise spectral (operator 2-) norm.
    pub fn operator_norm(&self) -> ScalarField {
        let g = self.grid();
        let c = &self.comps;
        let values = (0..g.len())
            .map(|k| {
                mat2_operator_norm([
                    [c[0][0].values()[k], c[0][1].values()[k]],
                    [c[1][0].values()[k], c[1][1].values()[k]],
                ])
            })
            .collect();
        ScalarField::from_vec_unchecked(g, values)
    }

    /// Pointwise Frobenius norm.
    pub fn frobenius(&self) -> ScalarField {
        let g = self.grid();
        let c = &self.comps;
        let values = (0..g.len())
            .map(|k| {
                (0..2)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .map(|(i, j)| c[i][j].values()[k].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::from_vec_unchecked(g, values)
    }
}

/// Largest singular value of a 2x2 matrix.
pub fn mat2_operator_norm(m: [[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = m;
    let fro2 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    // sigma_max^2 = (F + sqrt(F^2 - 4 det^2)) / 2
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    (0.5 * (fro2 + disc.sqrt())).sqrt()
}
