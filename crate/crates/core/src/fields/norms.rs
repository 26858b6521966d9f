use num_complex::Complex64;

use super::{Grid2D, ScalarField, Spectrum, TensorField, VectorField};
use crate::error::{Error, Result};

/// Which norm to take. Exponents may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    /// `|f|_p`
    Lebesgue(f64),
    /// `|f|_{D^{k,r}} = |grad^k f|_r`
    Seminorm { k: u32, r: f64 },
    /// `||f||_s`, integer order.
    Sobolev(u32),
    /// Grid supremum of the pointwise magnitude.
    Sup,
}

impl NormSpec {
    fn validate(self) -> Result<Self> {
        let check = |name: &str, p: f64| {
            if p.is_nan() || p < 1.0 {
                Err(Error::param(name, format!("exponent {p} must lie in [1, inf]")))
            } else {
                Ok(())
            }
        };
        match self {
            NormSpec::Lebesgue(p) => check("p", p)?,
            NormSpec::Seminorm { r, .. } => check("r", r)?,
            NormSpec::Sobolev(_) | NormSpec::Sup => {}
        }
        Ok(self)
    }
}

/// Anything whose pointwise magnitude is the Frobenius norm of its components.
pub trait FieldComponents {
    fn grid(&self) -> Grid2D;
    fn components(&self) -> Vec<&ScalarField>;
}

impl FieldComponents for ScalarField {
    fn grid(&self) -> Grid2D {
        ScalarField::grid(self)
    }
    fn components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
}

impl FieldComponents for VectorField {
    fn grid(&self) -> Grid2D {
        VectorField::grid(self)
    }
    fn components(&self) -> Vec<&ScalarField> {
        self.comps().iter().collect()
    }
}

impl FieldComponents for TensorField {
    fn grid(&self) -> Grid2D {
        TensorField::grid(self)
    }
    fn components(&self) -> Vec<&ScalarField> {
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| self.entry(i, j))
            .collect()
    }
}

pub(crate) fn binomial(k: u32, a: u32) -> f64 {
    (0..a).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Pointwise squared magnitude of the order-`k` derivative tensor of all
/// components; mixed partials are counted with their tensor multiplicity.
pub(crate) fn derivative_magnitude_sq(comps: &[&ScalarField], k: u32) -> Vec<f64> {
    let g = comps[0].grid();
    let mut acc = vec![0.0; g.len()];
    for c in comps {
        if k == 0 {
            for (a, v) in acc.iter_mut().zip(c.values()) {
                *a += v * v;
            }
            continue;
        }
        let s = Spectrum::forward(c);
        for a in 0..=k {
            let b = k - a;
            let w = binomial(k, a);
            let d = s
                .multiply(|k1, k2| Complex64::new(0.0, k1).powu(a) * Complex64::new(0.0, k2).powu(b))
                .inverse();
            for (acc, v) in acc.iter_mut().zip(d.values()) {
                *acc += w * v * v;
            }
        }
    }
    acc
}

pub(crate) fn lebesgue_from_sq(mag_sq: &[f64], p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        return mag_sq.iter().fold(0.0_f64, |m, &v| m.max(v)).sqrt();
    }
    if p == 2.0 {
        return (mag_sq.iter().sum::<f64>() * cell_area).sqrt();
    }
    let s: f64 = mag_sq.iter().map(|&v| v.sqrt().powf(p)).sum();
    (s * cell_area).powf(1.0 / p)
}

/// Discrete norms: Riemann sums for integrals, spectral derivatives for
/// seminorms. `Sup` and `p = inf` are grid-sup approximations.
pub fn norm<F: FieldComponents + ?Sized>(f: &F, spec: NormSpec) -> Result<f64> {
    let spec = spec.validate()?;
    let comps = f.components();
    let area = f.grid().cell_area();
    Ok(match spec {
        NormSpec::Sup => lebesgue_from_sq(&derivative_magnitude_sq(&comps, 0), f64::INFINITY, area),
        NormSpec::Lebesgue(p) => lebesgue_from_sq(&derivative_magnitude_sq(&comps, 0), p, area),
        NormSpec::Seminorm { k, r } => lebesgue_from_sq(&derivative_magnitude_sq(&comps, k), r, area),
        NormSpec::Sobolev(s) => (0..=s)
            .map(|k| {
                let v = lebesgue_from_sq(&derivative_magnitude_sq(&comps, k), 2.0, area);
                v * v
            })
            .sum::<f64>()
            .sqrt(),
    })
}

/// Grid sup of the pointwise operator norm, the matrix magnitude used by the
/// deformation-tensor monitors.
pub fn seminorm_tensor_sup(t: &TensorField) -> f64 {
    t.operator_norm().sup_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn constant_on_unit_box() {
        let g = Grid2D::new(16, 1.0).unwrap();
        let f = ScalarField::constant(g, -3.0);
        assert!((norm(&f, NormSpec::Lebesgue(2.0)).unwrap() - 3.0).abs() < 1e-14);
        assert!((norm(&f, NormSpec::Sup).unwrap() - 3.0).abs() < 1e-14);
        assert!((norm(&f, NormSpec::Lebesgue(1.0)).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn sine_norms_match_closed_form() {
        // int_{[0,2pi]^2} sin^2 x1 = 2 pi^2
        let g = Grid2D::new(64, TAU).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x.sin());
        let expect = PI * 2f64.sqrt();
        assert!((norm(&f, NormSpec::Lebesgue(2.0)).unwrap() - expect).abs() < 1e-10);
        let d1 = norm(&f, NormSpec::Seminorm { k: 1, r: 2.0 }).unwrap();
        assert!((d1 - expect).abs() < 1e-10);
    }

    #[test]
    fn degenerate_specs_coincide() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x * 0.5 * PI).sin() * (1.0 + 0.3 * y.cos()));
        let l2 = norm(&f, NormSpec::Lebesgue(2.0)).unwrap();
        assert_eq!(norm(&f, NormSpec::Sobolev(0)).unwrap(), l2);
        for r in [1.0, 3.0, 6.0, f64::INFINITY] {
            assert_eq!(
                norm(&f, NormSpec::Seminorm { k: 0, r }).unwrap(),
                norm(&f, NormSpec::Lebesgue(r)).unwrap()
            );
        }
        assert_eq!(
            norm(&f, NormSpec::Lebesgue(f64::INFINITY)).unwrap(),
            norm(&f, NormSpec::Sup).unwrap()
        );
    }

    #[test]
    fn rejects_sub_unit_exponents() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let f = ScalarField::zeros(g);
        assert!(norm(&f, NormSpec::Lebesgue(0.5)).is_err());
        assert!(norm(&f, NormSpec::Seminorm { k: 1, r: f64::NAN }).is_err());
    }

    #[test]
    fn second_seminorm_counts_mixed_partials_twice() {
        // f = sin x1 sin x2: grad^2 f has entries (-f, c c; c c, -f)
        let g = Grid2D::new(32, TAU).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x.sin() * y.sin());
        let got = norm(&f, NormSpec::Seminorm { k: 2, r: 2.0 }).unwrap();
        // int 2 sin^2 sin^2 + 2 cos^2 cos^2 = 4 * pi^2
        assert!((got - 2.0 * PI).abs() < 1e-10);
    }
}
