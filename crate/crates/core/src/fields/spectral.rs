//! Fourier-multiplier calculus on the periodic grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{Grid2D, ScalarField, TensorField, VectorField};
use crate::error::{Error, Result};

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed integer wave index per FFT slot; the Nyquist slot maps to 0.
    wave_index: Vec<f64>,
}

fn plan(n: usize) -> Arc<Plan> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(Default::default);
    let mut guard = plans.lock().expect("FFT plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let wave_index = (0..n)
                .map(|j| match j.cmp(&(n / 2)) {
                    std::cmp::Ordering::Less => j as f64,
                    std::cmp::Ordering::Equal => 0.0,
                    std::cmp::Ordering::Greater => j as f64 - n as f64,
                })
                .collect();
            Arc::new(Plan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                wave_index,
            })
        })
        .clone()
}

/// In-place transpose of a square row-major block.
fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        let (top, rest) = data.split_at_mut((j + 1) * n);
        let row = &mut top[j * n..];
        for (i, cell) in row.iter_mut().enumerate().skip(j + 1) {
            std::mem::swap(cell, &mut rest[(i - j - 1) * n + j]);
        }
    }
}

fn fft2(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    // rustfft treats a multiple-of-n buffer as a batch sharing one scratch
    let rows = n.div_ceil(rayon::current_num_threads()).max(1);
    data.par_chunks_mut(rows * n).for_each(|block| fft.process(block));
    transpose(data, n);
    data.par_chunks_mut(rows * n).for_each(|block| fft.process(block));
    transpose(data, n);
}

/// Unnormalized 2D DFT of a field, together with its wave vectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn forward(f: &ScalarField) -> Self {
        let n = f.grid().n();
        let p = plan(n);
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut coeffs, n, &p.forward);
        Self { grid: f.grid(), coeffs }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Inverse transform; the imaginary part (roundoff for real data) is dropped.
    pub fn inverse(&self) -> ScalarField {
        let n = self.grid.n();
        let p = plan(n);
        let mut data = self.coeffs.clone();
        fft2(&mut data, n, &p.inverse);
        let scale = 1.0 / (n * n) as f64;
        ScalarField::from_vec_unchecked(self.grid, data.iter().map(|c| c.re * scale).collect())
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Physical wave vector of every slot, row-major like the field.
    pub fn wavevectors(grid: Grid2D) -> Vec<(f64, f64)> {
        let n = grid.n();
        let p = plan(n);
        let base = 2.0 * PI / grid.box_length();
        (0..n * n)
            .map(|idx| (base * p.wave_index[idx % n], base * p.wave_index[idx / n]))
            .collect()
    }

    /// Signed integer wave indices of every slot (Nyquist slots report 0).
    pub fn wave_indices(grid: Grid2D) -> Vec<(f64, f64)> {
        let n = grid.n();
        let p = plan(n);
        (0..n * n)
            .map(|idx| (p.wave_index[idx % n], p.wave_index[idx / n]))
            .collect()
    }

    /// New spectrum `m(k) * self(k)`.
    pub fn multiply(&self, m: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = self.grid.n();
        let p = plan(n);
        let base = 2.0 * PI / self.grid.box_length();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (row, k2) in self.coeffs.chunks_exact(n).zip(&p.wave_index) {
            let k2 = base * k2;
            for (c, k1) in row.iter().zip(&p.wave_index) {
                coeffs.push(c * m(base * k1, k2));
            }
        }
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Applies the 2/3-rule truncation in place.
    pub fn truncate_two_thirds(&mut self) {
        let n = self.grid.n();
        let cutoff = n as f64 / 3.0;
        let idx = Self::wave_indices(self.grid);
        let nyq = n / 2;
        for (slot, (c, &(j1, j2))) in self.coeffs.iter_mut().zip(&idx).enumerate() {
            let nyquist = slot % n == nyq || slot / n == nyq;
            if nyquist || j1.abs() > cutoff || j2.abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `sum |c|^2 h^2 / n^2`, the spectral side of Parseval.
    pub fn l2_norm(&self) -> f64 {
        let n2 = self.grid.len() as f64;
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_area() / n2).sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &Spectrum) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }
}

#[inline]
fn ik_pow(k: f64, p: u32) -> Complex64 {
    Complex64::new(0.0, k).powu(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Gradient,
    Divergence,
    Laplacian,
    /// `d1^a d2^b` with `a + b <= 4`.
    Partial(u32, u32),
}

/// A field of any rank; the result type of [`differentiate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
    Tensor(TensorField),
}

/// Rank-aware spectral differentiation. Gradient of a vector field is the
/// tensor with entry `(i, j) = d_i u_j`.
pub fn differentiate(input: &Field, request: Derivative) -> Result<Field> {
    match input {
        Field::Scalar(f) => f.ensure_finite("differentiate input")?,
        Field::Vector(v) => v.ensure_finite("differentiate input")?,
        Field::Tensor(t) => {
            for i in 0..2 {
                for j in 0..2 {
                    t.entry(i, j).ensure_finite("differentiate input")?;
                }
            }
        }
    }
    if let Derivative::Partial(a, b) = request {
        if a + b > 4 {
            return Err(Error::param("derivative order", format!("order {} exceeds 4", a + b)));
        }
    }
    let unsupported = || Error::param("derivative", format!("{request:?} is not defined for this field rank"));
    Ok(match (input, request) {
        (Field::Scalar(f), Derivative::Gradient) => Field::Vector(gradient(f)),
        (Field::Scalar(f), Derivative::Laplacian) => Field::Scalar(laplacian(f)),
        (Field::Scalar(f), Derivative::Partial(a, b)) => Field::Scalar(partial(f, a, b)),
        (Field::Vector(v), Derivative::Gradient) => Field::Tensor(velocity_gradient(v)),
        (Field::Vector(v), Derivative::Divergence) => Field::Scalar(divergence(v)),
        (Field::Vector(v), Derivative::Laplacian) => Field::Vector(v.map_comps(laplacian)),
        (Field::Vector(v), Derivative::Partial(a, b)) => Field::Vector(v.map_comps(|f| partial(f, a, b))),
        (Field::Tensor(t), Derivative::Divergence) => {
            // row-wise divergence: (div T)_j = sum_i d_i T_ij
            let c = |j: usize| {
                let s = Spectrum::forward(t.entry(0, j))
                    .multiply(|k1, _| ik_pow(k1, 1))
                    .inverse();
                let r = Spectrum::forward(t.entry(1, j))
                    .multiply(|_, k2| ik_pow(k2, 1))
                    .inverse();
                s.add(&r)
            };
            Field::Vector(VectorField::from_parts(c(0), c(1)))
        }
        _ => return Err(unsupported()),
    })
}

pub fn partial(f: &ScalarField, a: u32, b: u32) -> ScalarField {
    Spectrum::forward(f)
        .multiply(|k1, k2| ik_pow(k1, a) * ik_pow(k2, b))
        .inverse()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = Spectrum::forward(f);
    VectorField::from_parts(
        s.multiply(|k1, _| ik_pow(k1, 1)).inverse(),
        s.multiply(|_, k2| ik_pow(k2, 1)).inverse(),
    )
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let mut s = Spectrum::forward(u.comp(0)).multiply(|k1, _| ik_pow(k1, 1));
    s.axpy(1.0, &Spectrum::forward(u.comp(1)).multiply(|_, k2| ik_pow(k2, 1)));
    s.inverse()
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    Spectrum::forward(f)
        .multiply(|k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
        .inverse()
}

/// Tensor with entry `(i, j) = d_i u_j`.
pub fn velocity_gradient(u: &VectorField) -> TensorField {
    let s = [Spectrum::forward(u.comp(0)), Spectrum::forward(u.comp(1))];
    let d = |i: usize, j: usize| {
        s[j].multiply(|k1, k2| ik_pow(if i == 0 { k1 } else { k2 }, 1))
            .inverse()
    };
    TensorField::from_parts([[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]])
}

/// Deformation tensor `D(u) = (grad u + grad u^T) / 2`, symmetric by construction.
pub fn sym_gradient(u: &VectorField) -> TensorField {
    let g = velocity_gradient(u);
    let off = g.entry(0, 1).zip_map(g.entry(1, 0), |a, b| 0.5 * (a + b));
    TensorField::from_parts([[g.entry(0, 0).clone(), off.clone()], [off, g.entry(1, 1).clone()]])
}

/// `d1 u2 - d2 u1`
pub fn vorticity(u: &VectorField) -> ScalarField {
    let mut s = Spectrum::forward(u.comp(1)).multiply(|k1, _| ik_pow(k1, 1));
    s.axpy(-1.0, &Spectrum::forward(u.comp(0)).multiply(|_, k2| ik_pow(k2, 1)));
    s.inverse()
}

/// 2/3-rule truncation of a sampled field.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut s = Spectrum::forward(f);
    s.truncate_two_thirds();
    s.inverse()
}
