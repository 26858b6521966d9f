//! Fourier-symbol solves for `L u = -alpha lap u - (alpha + beta) grad div u`.
//!
//! The symbol `alpha |k|^2 I + (alpha + beta) k k^T` has eigenvalue
//! `(2 alpha + beta) |k|^2` along `k` and `alpha |k|^2` across it, so every
//! solve reduces to scaling the longitudinal and transverse parts of each
//! coefficient pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Spectrum, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImplicitEuler,
    #[default]
    CrankNicolson,
}

impl Scheme {
    /// Implicit weight of the time discretization.
    pub fn implicitness(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }
}

fn check_coefficients(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha + beta >= 0.0) || !beta.is_finite() || !alpha.is_finite() {
        return Err(Error::param(
            "alpha",
            format!("Lamé coefficients need alpha>0, alpha+beta>=0 (got {alpha}, {beta})"),
        ));
    }
    Ok(())
}

/// `((2 alpha + beta) |k|^2, alpha |k|^2)`: the eigenvalues along and across `k`.
pub fn lame_symbol_eigen(k: (f64, f64), alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let kk = k.0 * k.0 + k.1 * k.1;
    if kk == 0.0 {
        return Err(Error::param("k", "the zero wavevector is the mean mode"));
    }
    Ok(((2.0 * alpha + beta) * kk, alpha * kk))
}

/// Splits `w` into its parts along and across `k` and scales them by `par`
/// and `perp`.
#[inline]
fn scale_parts(k: (f64, f64), w: [Complex64; 2], par: f64, perp: f64) -> [Complex64; 2] {
    let kk = k.0 * k.0 + k.1 * k.1;
    if kk == 0.0 {
        return [w[0] * perp, w[1] * perp];
    }
    let proj = (w[0] * k.0 + w[1] * k.1) / kk;
    let p = [proj * k.0, proj * k.1];
    [p[0] * par + (w[0] - p[0]) * perp, p[1] * par + (w[1] - p[1]) * perp]
}

/// Zero-mean `u` with `L u = F`.
pub fn lame_elliptic_solve(f: &VectorField, alpha: f64, beta: f64) -> Result<VectorField> {
    check_coefficients(alpha, beta)?;
    f.ensure_finite("F")?;
    let scale = f.sup_abs().max(f64::MIN_POSITIVE);
    for c in 0..2 {
        let mean = f.comp(c).mean();
        if mean.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::NonZeroMean { component: c, mean });
        }
    }
    let g = f.grid();
    let s = [Spectrum::forward(f.comp(0)), Spectrum::forward(f.comp(1))];
    let mut out = [Spectrum::zeros(g), Spectrum::zeros(g)];
    for (idx, &k) in Spectrum::wavevectors(g).iter().enumerate() {
        let kk = k.0 * k.0 + k.1 * k.1;
        if kk == 0.0 {
            continue;
        }
        let par = 1.0 / ((2.0 * alpha + beta) * kk);
        let perp = 1.0 / (alpha * kk);
        let r = scale_parts(k, [s[0].coeffs()[idx], s[1].coeffs()[idx]], par, perp);
        out[0].coeffs_mut()[idx] = r[0];
        out[1].coeffs_mut()[idx] = r[1];
    }
    Ok(VectorField::from_parts(out[0].inverse(), out[1].inverse()))
}

/// One step of `u_t + L u = rhs` on spectra: `(I + w dt S) u' = (I - (1-w) dt S) u + dt rhs`.
pub fn parabolic_step_spectral(
    u: &[Spectrum; 2],
    rhs: &[Spectrum; 2],
    dt: f64,
    scheme: Scheme,
    alpha: f64,
    beta: f64,
) -> [Spectrum; 2] {
    let g = u[0].grid();
    let w = scheme.implicitness();
    let mut out = [Spectrum::zeros(g), Spectrum::zeros(g)];
    for (idx, &k) in Spectrum::wavevectors(g).iter().enumerate() {
        let kk = k.0 * k.0 + k.1 * k.1;
        let (lp, lt) = ((2.0 * alpha + beta) * kk, alpha * kk);
        let un = [u[0].coeffs()[idx], u[1].coeffs()[idx]];
        let explicit = scale_parts(k, un, 1.0 - (1.0 - w) * dt * lp, 1.0 - (1.0 - w) * dt * lt);
        let b = [
            explicit[0] + rhs[0].coeffs()[idx] * dt,
            explicit[1] + rhs[1].coeffs()[idx] * dt,
        ];
        let r = scale_parts(k, b, 1.0 / (1.0 + w * dt * lp), 1.0 / (1.0 + w * dt * lt));
        out[0].coeffs_mut()[idx] = r[0];
        out[1].coeffs_mut()[idx] = r[1];
    }
    out
}

/// Advances `u_t + L u = rhs` by `dt` with `rhs` frozen. The mean mode
/// follows `du/dt = mean(rhs)`.
pub fn parabolic_step(
    u_n: &VectorField,
    rhs: &VectorField,
    dt: f64,
    scheme: Scheme,
    alpha: f64,
    beta: f64,
) -> Result<VectorField> {
    check_coefficients(alpha, beta)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "time step must be positive"));
    }
    u_n.grid().check_same(&rhs.grid())?;
    let fwd = |v: &VectorField| [Spectrum::forward(v.comp(0)), Spectrum::forward(v.comp(1))];
    let [a, b] = parabolic_step_spectral(&fwd(u_n), &fwd(rhs), dt, scheme, alpha, beta);
    Ok(VectorField::from_parts(a.inverse(), b.inverse()))
}

/// `e^{t lap} u0` sampled exactly.
pub fn heat_semigroup(u0: &VectorField, t: f64) -> VectorField {
    u0.map_comps(|c| {
        Spectrum::forward(c)
            .multiply(|k1, k2| Complex64::new((-(k1 * k1 + k2 * k2) * t).exp(), 0.0))
            .inverse()
    })
}

/// The dense symbol matrix at `k`.
pub fn symbol_matrix(k: (f64, f64), alpha: f64, beta: f64) -> [[f64; 2]; 2] {
    let kk = k.0 * k.0 + k.1 * k.1;
    let ab = alpha + beta;
    [
        [alpha * kk + ab * k.0 * k.0, ab * k.0 * k.1],
        [ab * k.0 * k.1, alpha * kk + ab * k.1 * k.1],
    ]
}
