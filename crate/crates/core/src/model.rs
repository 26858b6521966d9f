//! Equation of state, viscous-model variants, the `(rho) <-> (phi, psi)`
//! reformulation and the Lamé / `Q` operators.
//!
//! With `phi = rho^((gamma-1)/2)` and `psi = grad rho / rho` the momentum
//! equation reads
//!
//! ```text
//! u_t + u.grad u + 2 theta phi grad phi + L u = psi . Q(u),   theta = A gamma / (gamma - 1)
//! L u  = -alpha lap u - (alpha + beta) grad div u
//! Q(u) = alpha (grad u + grad u^T) + beta div u I
//! ```
//!
//! Matrices of first derivatives use `(grad u)_ij = d_i u_j`, and `psi . M`
//! is the row vector `(psi . M)_j = sum_i psi_i M_ij`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{gradient, velocity_gradient, ScalarField, Spectrum, VectorField};

/// Values with magnitude below this are treated as rounding noise at vacuum.
pub const VACUUM_NOISE: f64 = 1e-14;

/// Default relative vacuum floor: `eps_vac = EPS_VAC_REL * max phi_0`.
pub const EPS_VAC_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// General stress `mu = alpha rho`, `lambda = beta rho`.
    FullQ,
    /// `div(h D(U))`: alpha = 1/2, beta = 0, gamma = 2.
    Gent,
    /// `div(2h D(U) + 2h div U I)`: alpha = 1, beta = 2, gamma = 2.
    MarcheBN,
    /// Viscous Saint-Venant `div(h grad U)`: `Q(U) = grad U`, gamma = 2.
    SaintVenant,
    /// `h lap U`: `Q = 0`, gamma = 2; vacuum allowed in the data.
    LaplacianOnly,
}

/// Default Lamé coefficients `(alpha, beta)` for the shallow-water models
/// whose viscous term divided by `h` is `lap U` plus a `psi`-term:
/// `-L = lap` means `alpha = 1, alpha + beta = 0`.
pub const LAPLACIAN_LAME: (f64, f64) = (1.0, -1.0);

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::FullQ,
        Variant::Gent,
        Variant::MarcheBN,
        Variant::SaintVenant,
        Variant::LaplacianOnly,
    ];

    /// Adiabatic exponent fixed by the model, if any.
    pub fn forced_gamma(self) -> Option<f64> {
        match self {
            Variant::FullQ => None,
            _ => Some(2.0),
        }
    }

    /// `(alpha, beta)` fixed by the model, if any.
    pub fn forced_lame(self) -> Option<(f64, f64)> {
        match self {
            Variant::Gent => Some((0.5, 0.0)),
            Variant::MarcheBN => Some((1.0, 2.0)),
            _ => None,
        }
    }

    /// `(alpha, beta)` used when a config leaves them unset.
    pub fn default_lame(self) -> (f64, f64) {
        match self {
            Variant::FullQ => (1.0, 0.0),
            Variant::SaintVenant | Variant::LaplacianOnly => LAPLACIAN_LAME,
            v => v.forced_lame().expect("forced"),
        }
    }

    /// Whether `psi` is part of the solution. The Laplacian-only model needs no
    /// control of `grad h / h` and its `Q` vanishes.
    pub fn tracks_psi(self) -> bool {
        self != Variant::LaplacianOnly
    }

    /// Whether the blow-up functionals use `grad U` instead of `D(U)`.
    pub fn uses_full_gradient(self) -> bool {
        self == Variant::SaintVenant
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::FullQ => "FullQ",
            Variant::Gent => "Gent",
            Variant::MarcheBN => "MarcheBN",
            Variant::SaintVenant => "SaintVenant",
            Variant::LaplacianOnly => "LaplacianOnly",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s))
    }
}

/// Immutable model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    gamma: f64,
    a: f64,
    alpha: f64,
    beta: f64,
    variant: Variant,
}

impl ModelSpec {
    /// Validates `gamma > 1`, `A > 0`, `alpha > 0`, `alpha + beta >= 0` and
    /// any values the variant fixes.
    pub fn new(gamma: f64, a: f64, alpha: f64, beta: f64, variant: Variant) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::param("gamma", "adiabatic exponent must satisfy gamma > 1"));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param("A", "pressure constant must satisfy A > 0"));
        }
        let mut forced = Vec::new();
        if let Some(g) = variant.forced_gamma() {
            forced.push(("gamma", gamma, g));
        }
        if let Some((al, be)) = variant.forced_lame() {
            forced.push(("alpha", alpha, al));
            forced.push(("beta", beta, be));
        }
        for (name, got, want) in forced {
            if got != want {
                return Err(Error::param(
                    name,
                    format!("variant {} requires {name} = {want}, got {got}", variant.name()),
                ));
            }
        }
        if !(alpha.is_finite() && beta.is_finite()) || alpha <= 0.0 || alpha + beta < 0.0 {
            return Err(Error::param(
                "alpha",
                format!(
                    "viscosity coefficients must satisfy alpha>0, alpha+beta>=0 (got alpha = {alpha}, beta = {beta})"
                ),
            ));
        }
        Ok(Self {
            gamma,
            a,
            alpha,
            beta,
            variant,
        })
    }

    /// Shallow-water variant with `gamma = 2` and its default `(alpha, beta)`.
    pub fn shallow_water(variant: Variant, a: f64) -> Result<Self> {
        let g = variant
            .forced_gamma()
            .ok_or_else(|| Error::param("variant", "FullQ has no fixed coefficients; use ModelSpec::new"))?;
        let (al, be) = variant.default_lame();
        Self::new(g, a, al, be, variant)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `theta = A gamma / (gamma - 1)`
    pub fn theta(&self) -> f64 {
        self.a * self.gamma / (self.gamma - 1.0)
    }

    /// `(gamma - 1) / 2`, the exponent linking `phi` and `rho`.
    pub fn half_gamma_minus_one(&self) -> f64 {
        0.5 * (self.gamma - 1.0)
    }
}

/// `theta = A gamma / (gamma - 1)` for raw parameters.
pub fn theta(a: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::param("gamma", "theta requires gamma > 1"));
    }
    Ok(a * gamma / (gamma - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// Vacuum lift added to `phi_0`.
    pub delta: f64,
    /// Floor used in every division by `phi`.
    pub eps_vac: f64,
}

impl RegularizationParams {
    pub fn new(delta: f64, eps_vac: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::param("delta", "vacuum lift must satisfy delta >= 0"));
        }
        if !(eps_vac.is_finite() && eps_vac > 0.0) {
            return Err(Error::param("eps_vac", "vacuum floor must satisfy eps_vac > 0"));
        }
        Ok(Self { delta, eps_vac })
    }

    /// `eps_vac = EPS_VAC_REL * max phi_0`.
    pub fn for_initial(phi0: &ScalarField, delta: f64) -> Result<Self> {
        let scale = phi0.max().max(0.0);
        let eps = if scale > 0.0 { EPS_VAC_REL * scale } else { EPS_VAC_REL };
        Self::new(delta, eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    RhoToPhi,
    PhiToRho,
    RhoToPressure,
}

/// Pointwise power laws between density, `phi` and pressure.
pub fn convert(field: &ScalarField, direction: Conversion, spec: &ModelSpec) -> Result<ScalarField> {
    let what = match direction {
        Conversion::RhoToPhi | Conversion::RhoToPressure => "density",
        Conversion::PhiToRho => "phi",
    };
    if let Some((index, &value)) = field
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| **v < -VACUUM_NOISE || v.is_nan())
    {
        return Err(Error::NegativeInput { what, value, index });
    }
    let k = spec.half_gamma_minus_one();
    let exponent = match direction {
        Conversion::RhoToPhi => k,
        Conversion::PhiToRho => 1.0 / k,
        Conversion::RhoToPressure => spec.gamma(),
    };
    let scale = if direction == Conversion::RhoToPressure {
        spec.a()
    } else {
        1.0
    };
    Ok(field.map(|v| scale * v.max(0.0).powf(exponent)))
}

/// `psi = (2/(gamma-1)) grad phi / phi`, taken as the spectral gradient of
/// `(2/(gamma-1)) log max(phi, eps_vac)` so that it is curl-free on the grid.
pub fn psi_from_phi(phi: &ScalarField, spec: &ModelSpec, reg: &RegularizationParams) -> VectorField {
    let c = 1.0 / spec.half_gamma_minus_one();
    let eps = reg.eps_vac;
    gradient(&phi.map(|p| c * p.max(eps).ln()))
}

/// Lamé symbol applied to one Fourier coefficient pair.
#[inline]
pub(crate) fn lame_symbol_apply(k: (f64, f64), alpha: f64, beta: f64, u: [Complex64; 2]) -> [Complex64; 2] {
    let (k1, k2) = k;
    let kk = k1 * k1 + k2 * k2;
    let kdotu = u[0] * k1 + u[1] * k2;
    let ab = alpha + beta;
    [
        u[0] * (alpha * kk) + kdotu * (ab * k1),
        u[1] * (alpha * kk) + kdotu * (ab * k2),
    ]
}

/// `L u = -alpha lap u - (alpha + beta) grad div u`, evaluated spectrally.
pub fn lame_apply(u: &VectorField, alpha: f64, beta: f64) -> VectorField {
    let g = u.grid();
    let s = [Spectrum::forward(u.comp(0)), Spectrum::forward(u.comp(1))];
    let ks = Spectrum::wavevectors(g);
    let mut out = [Spectrum::zeros(g), Spectrum::zeros(g)];
    for (idx, &k) in ks.iter().enumerate() {
        let r = lame_symbol_apply(k, alpha, beta, [s[0].coeffs()[idx], s[1].coeffs()[idx]]);
        out[0].coeffs_mut()[idx] = r[0];
        out[1].coeffs_mut()[idx] = r[1];
    }
    VectorField::from_parts(out[0].inverse(), out[1].inverse())
}

/// `L u` with the coefficients carried by `spec`.
pub fn lame_apply_spec(u: &VectorField, spec: &ModelSpec) -> VectorField {
    lame_apply(u, spec.alpha(), spec.beta())
}

/// `psi . Q(v)` for the variant in `spec`.
pub fn q_apply(psi: &VectorField, v: &VectorField, spec: &ModelSpec) -> VectorField {
    let g = v.grid();
    if spec.variant() == Variant::LaplacianOnly {
        return VectorField::zeros(g);
    }
    let m = velocity_gradient(v);
    q_contract(psi, &m, spec)
}

/// `psi . Q` from a precomputed velocity gradient `m_ij = d_i v_j`.
pub(crate) fn q_contract(psi: &VectorField, m: &crate::fields::TensorField, spec: &ModelSpec) -> VectorField {
    let g = psi.grid();
    if spec.variant() == Variant::LaplacianOnly {
        return VectorField::zeros(g);
    }
    let (p1, p2) = (psi.comp(0).values(), psi.comp(1).values());
    let e = |i: usize, j: usize| m.entry(i, j).values();
    let (m11, m12, m21, m22) = (e(0, 0), e(0, 1), e(1, 0), e(1, 1));
    let mut o1 = vec![0.0; g.len()];
    let mut o2 = vec![0.0; g.len()];
    match spec.variant() {
        Variant::SaintVenant => {
            for k in 0..g.len() {
                o1[k] = p1[k] * m11[k] + p2[k] * m21[k];
                o2[k] = p1[k] * m12[k] + p2[k] * m22[k];
            }
        }
        _ => {
            let (alpha, beta) = (spec.alpha(), spec.beta());
            for k in 0..g.len() {
                let div = m11[k] + m22[k];
                let q11 = 2.0 * alpha * m11[k] + beta * div;
                let q22 = 2.0 * alpha * m22[k] + beta * div;
                let q12 = alpha * (m12[k] + m21[k]);
                o1[k] = p1[k] * q11 + p2[k] * q12;
                o2[k] = p1[k] * q12 + p2[k] * q22;
            }
        }
    }
    VectorField::from_parts(
        ScalarField::from_vec_unchecked(g, o1),
        ScalarField::from_vec_unchecked(g, o2),
    )
}

/// Solution snapshot `(phi, psi, u)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub phi: ScalarField,
    pub psi: VectorField,
    pub u: VectorField,
    pub t: f64,
}

impl State {
    pub fn new(phi: ScalarField, psi: VectorField, u: VectorField, t: f64) -> Result<Self> {
        phi.grid().check_same(&psi.grid())?;
        phi.grid().check_same(&u.grid())?;
        phi.ensure_finite("phi")?;
        psi.ensure_finite("psi")?;
        u.ensure_finite("u")?;
        Ok(Self { phi, psi, u, t })
    }

    /// Initial state from `phi_0`, with `psi_0` derived from it (zero when the
    /// variant does not track `psi`).
    pub fn from_phi(phi0: ScalarField, u0: VectorField, spec: &ModelSpec, reg: &RegularizationParams) -> Result<Self> {
        if let Some((index, &value)) = phi0.values().iter().enumerate().find(|(_, v)| **v < -VACUUM_NOISE) {
            return Err(Error::NegativeInput {
                what: "phi",
                value,
                index,
            });
        }
        let phi0 = phi0.map(|v| v.max(0.0));
        if spec.variant().tracks_psi() && phi0.min() <= 0.0 {
            return Err(Error::param(
                "phi0",
                format!("variant {} needs phi_0 > 0 everywhere", spec.variant().name()),
            ));
        }
        let psi = if spec.variant().tracks_psi() {
            psi_from_phi(&phi0, spec, reg)
        } else {
            VectorField::zeros(phi0.grid())
        };
        Self::new(phi0, psi, u0, 0.0)
    }

    pub fn grid(&self) -> crate::fields::Grid2D {
        self.phi.grid()
    }

    /// Grid sup of `|d1 psi_2 - d2 psi_1|`.
    pub fn curl_defect(&self) -> f64 {
        curl_defect(&self.psi)
    }
}

pub fn curl_defect(psi: &VectorField) -> f64 {
    crate::fields::vorticity(psi).sup_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sym_gradient, Grid2D};
    use std::f64::consts::TAU;

    fn g(n: usize) -> Grid2D {
        Grid2D::new(n, TAU).unwrap()
    }

    fn max_err(a: &ScalarField, b: &ScalarField) -> f64 {
        a.sub(b).sup_abs()
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(1.0, 2.0).unwrap(), 2.0);
        assert_eq!(theta(1.0, 3.0).unwrap(), 1.5);
        assert_eq!(theta(2.0, 2.0).unwrap(), 4.0);
        assert!(theta(1.0, 1.0).is_err());
        assert!(theta(1.0, 0.5).is_err());
        let s = ModelSpec::new(3.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        assert_eq!(s.theta(), 1.5);
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::new(2.0, 1.0, 0.0, 0.0, Variant::FullQ).is_err());
        assert!(ModelSpec::new(2.0, 1.0, 1.0, -1.5, Variant::FullQ).is_err());
        assert!(ModelSpec::new(2.0, 1.0, 1.0, -1.0, Variant::FullQ).is_ok());
        assert!(ModelSpec::new(1.0, 1.0, 1.0, 0.0, Variant::FullQ).is_err());
        assert!(ModelSpec::new(2.0, 0.0, 1.0, 0.0, Variant::FullQ).is_err());
        assert!(ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::Gent).is_err());
        let gent = ModelSpec::shallow_water(Variant::Gent, 1.0).unwrap();
        assert_eq!((gent.alpha(), gent.beta(), gent.gamma()), (0.5, 0.0, 2.0));
        let mbn = ModelSpec::shallow_water(Variant::MarcheBN, 1.0).unwrap();
        assert_eq!((mbn.alpha(), mbn.beta(), mbn.gamma()), (1.0, 2.0, 2.0));
        assert!(ModelSpec::new(3.0, 1.0, 1.0, -1.0, Variant::SaintVenant).is_err());
        assert!(ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::SaintVenant).is_ok());
        let sv = ModelSpec::shallow_water(Variant::SaintVenant, 1.0).unwrap();
        assert_eq!((sv.alpha(), sv.beta()), LAPLACIAN_LAME);
        assert!(ModelSpec::shallow_water(Variant::FullQ, 1.0).is_err());
        assert_eq!(Variant::parse("marchebn"), Some(Variant::MarcheBN));
    }

    #[test]
    fn conversions() {
        let grid = g(8);
        let s3 = ModelSpec::new(3.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        let rho = ScalarField::from_fn(grid, |x, y| 1.5 + x.sin() * y.cos());
        assert_eq!(convert(&rho, Conversion::RhoToPhi, &s3).unwrap(), rho);

        let s2 = ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        let four = ScalarField::constant(grid, 4.0);
        assert_eq!(convert(&four, Conversion::RhoToPhi, &s2).unwrap().values()[0], 2.0);
        let three = ScalarField::constant(grid, 3.0);
        assert_eq!(
            convert(&three, Conversion::RhoToPressure, &s2).unwrap().values()[0],
            9.0
        );

        let mut neg = ScalarField::constant(grid, 1.0);
        neg.values_mut()[7] = -1e-3;
        assert!(matches!(
            convert(&neg, Conversion::RhoToPhi, &s2),
            Err(Error::NegativeInput { index: 7, .. })
        ));
        neg.values_mut()[7] = -1e-16;
        assert_eq!(convert(&neg, Conversion::RhoToPhi, &s2).unwrap().values()[7], 0.0);
    }

    #[test]
    fn psi_examples() {
        let grid = g(64);
        let s2 = ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        let reg = RegularizationParams::new(0.0, 1e-10).unwrap();
        let psi = psi_from_phi(&ScalarField::constant(grid, 0.7), &s2, &reg);
        assert!(psi.sup_abs() < 1e-14);

        let phi = ScalarField::from_fn(grid, |x, _| 2.0 + x.sin());
        let psi = psi_from_phi(&phi, &s2, &reg);
        let expect = ScalarField::from_fn(grid, |x, _| 2.0 * x.cos() / (2.0 + x.sin()));
        assert!(max_err(psi.comp(0), &expect) < 1e-12);
        assert!(psi.comp(1).sup_abs() < 1e-12);

        let phi = ScalarField::from_fn(grid, |x, y| 1.5 + 0.4 * (x + 2.0 * y).sin() * y.cos());
        assert!(curl_defect(&psi_from_phi(&phi, &s2, &reg)) < 1e-8);
    }

    #[test]
    fn lame_examples() {
        let grid = g(32);
        let u = VectorField::from_fn(grid, |x, y| (y.sin(), x.sin()));
        let lu = lame_apply(&u, 1.0, 0.0);
        assert!(lu.sub(&u).sup_abs() < 1e-12);

        let u = VectorField::from_fn(grid, |x, _| (x.sin(), 0.0));
        let lu = lame_apply(&u, 1.0, 1.0);
        let expect = VectorField::from_fn(grid, |x, _| (3.0 * x.sin(), 0.0));
        assert!(lu.sub(&expect).sup_abs() < 1e-12);

        assert_eq!(lame_apply(&VectorField::zeros(grid), 2.0, 1.0).sup_abs(), 0.0);
    }

    #[test]
    fn q_examples() {
        let grid = g(32);
        let v = VectorField::from_fn(grid, |x, y| (x.sin() * y.cos(), (2.0 * y).sin()));
        let psi = VectorField::from_fn(grid, |x, y| (x.cos(), 0.5 + y.sin()));
        for variant in Variant::ALL {
            let spec = match variant.forced_gamma() {
                Some(_) => ModelSpec::shallow_water(variant, 1.0).unwrap(),
                None => ModelSpec::new(1.4, 1.0, 0.7, 0.2, variant).unwrap(),
            };
            assert_eq!(q_apply(&VectorField::zeros(grid), &v, &spec).sup_abs(), 0.0);
        }
        let lap = ModelSpec::shallow_water(Variant::LaplacianOnly, 1.0).unwrap();
        assert_eq!(q_apply(&psi, &v, &lap).sup_abs(), 0.0);

        let mbn = ModelSpec::shallow_water(Variant::MarcheBN, 1.0).unwrap();
        let full = ModelSpec::new(2.0, 1.0, 1.0, 2.0, Variant::FullQ).unwrap();
        assert_eq!(q_apply(&psi, &v, &mbn), q_apply(&psi, &v, &full));
    }

    #[test]
    fn q_full_gradient_versus_deformation() {
        // psi . grad v equals psi . (alpha (grad v + grad v^T)) with alpha = 1/2
        // exactly when grad v is symmetric; beta drops out when div v = 0.
        let grid = g(32);
        let sv = ModelSpec::shallow_water(Variant::SaintVenant, 1.0).unwrap();
        let half = ModelSpec::new(2.0, 1.0, 0.5, 0.0, Variant::FullQ).unwrap();
        let unit = ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        let psi = VectorField::from_fn(grid, |x, y| (1.0 + x.cos(), y.sin()));

        // symmetric gradient: v = grad(sin x1 sin x2)
        let v_sym = VectorField::from_fn(grid, |x, y| (x.cos() * y.sin(), x.sin() * y.cos()));
        assert!(q_apply(&psi, &v_sym, &sv).sub(&q_apply(&psi, &v_sym, &half)).sup_abs() < 1e-12);
        assert!(q_apply(&psi, &v_sym, &sv).sub(&q_apply(&psi, &v_sym, &unit)).sup_abs() > 0.1);

        // symmetric and divergence-free (shear along a diagonal is not periodic,
        // so use a constant-gradient-free check via beta on the same sample)
        let d = sym_gradient(&v_sym);
        assert!(d.entry(0, 1).sub(d.entry(1, 0)).sup_abs() == 0.0);

        // rotational counterexample
        let v_rot = VectorField::from_fn(grid, |x, y| (-y.sin(), x.sin()));
        assert!(q_apply(&psi, &v_rot, &sv).sub(&q_apply(&psi, &v_rot, &half)).sup_abs() > 0.1);
    }

    #[test]
    fn state_requires_positive_phi_when_psi_is_tracked() {
        let grid = g(16);
        let full = ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        let lap = ModelSpec::shallow_water(Variant::LaplacianOnly, 1.0).unwrap();
        let reg = RegularizationParams::new(0.0, 1e-10).unwrap();
        let phi = ScalarField::from_fn(grid, |x, _| x.sin().max(0.0));
        let u = VectorField::zeros(grid);
        assert!(State::from_phi(phi.clone(), u.clone(), &full, &reg).is_err());
        let s = State::from_phi(phi, u, &lap, &reg).unwrap();
        assert_eq!(s.psi.sup_abs(), 0.0);
    }
}
