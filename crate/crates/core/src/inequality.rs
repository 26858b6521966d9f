//! Empirical constants for the interpolation, commutator and Lamé
//! regularity inequalities, measured on seeded random band-limited fields.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::norms::{binomial, derivative_magnitude_sq, lebesgue_from_sq};
use crate::fields::{norm, partial, Grid2D, NormSpec, ScalarField, Spectrum, VectorField};
use crate::lame::lame_elliptic_solve;

/// Lebesgue exponent: an exact rational in `[1, inf)` or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Finite(Rational64),
    Infinite,
}

impl Exponent {
    pub fn int(p: i64) -> Self {
        Exponent::Finite(Rational64::from_integer(p))
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> Rational64 {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinite => Rational64::from_integer(0),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => *p.numer() as f64 / *p.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    fn check(self, name: &str) -> Result<Self> {
        match self {
            Exponent::Finite(p) if p < Rational64::from_integer(1) => {
                Err(Error::param(name, format!("exponent {p} must lie in [1, inf]")))
            }
            _ => Ok(self),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        // larger exponent means smaller reciprocal
        Some(other.reciprocal().cmp(&self.reciprocal()))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "Inf" | "INF") {
            return Ok(Exponent::Infinite);
        }
        let bad = || Error::param("exponent", format!("cannot parse `{s}`"));
        let r = match t.split_once('/') {
            Some((a, b)) => {
                let d: i64 = b.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Rational64::new(a.trim().parse().map_err(|_| bad())?, d)
            }
            None => Rational64::from_integer(t.parse().map_err(|_| bad())?),
        };
        Exponent::Finite(r).check("exponent")
    }
}

/// Interpolation exponent in `|h|_q <= C |grad h|_p^theta |h|_r^(1-theta)` on
/// the plane, after checking the admissible range of `q` for the given `p`, `r`.
pub fn gn_theta(p: Exponent, q: Exponent, r: Exponent) -> Result<Rational64> {
    let (p, q, r) = (p.check("p")?, q.check("q")?, r.check("r")?);
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    let half = Rational64::new(1, 2);
    let r_val = match r {
        Exponent::Finite(r) if r > one => r,
        _ => return Err(Error::Inadmissible(format!("r = {r} must lie in (1, inf)"))),
    };
    let within = |lo: Exponent, hi: Exponent| lo <= q && q <= hi;
    match p {
        Exponent::Finite(pv) if pv < two => {
            let crit = Exponent::Finite(two * pv / (two - pv));
            let (lo, hi) = if r < crit { (r, crit) } else { (crit, r) };
            if !within(lo, hi) {
                return Err(Error::Inadmissible(format!(
                    "p = {p} < 2 requires q in [{lo}, {hi}], got q = {q}"
                )));
            }
        }
        Exponent::Finite(pv) if pv == two => {
            if !(r <= q && q != Exponent::Infinite) {
                return Err(Error::Inadmissible(format!(
                    "p = 2 requires q in [{r}, inf), got q = {q}"
                )));
            }
        }
        _ => {
            if q < Exponent::Finite(r_val) {
                return Err(Error::Inadmissible(format!(
                    "p = {p} > 2 requires q in [{r}, inf], got q = {q}"
                )));
            }
        }
    }
    let num = r.reciprocal() - q.reciprocal();
    if num == Rational64::from_integer(0) {
        return Ok(num);
    }
    let den = r.reciprocal() - p.reciprocal() + half;
    Ok(num / den)
}

/// 64-bit linear congruential generator (Knuth's MMIX constants); the
/// normal variates come from Box–Muller on the top 53 bits.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
    spare: Option<f64>,
}

impl Lcg64 {
    pub const A: u64 = 6364136223846793005;
    pub const C: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::A).wrapping_add(Self::C);
        self.state
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (u1, u2) = (self.uniform(), self.uniform());
        let rad = (-2.0 * u1.ln()).sqrt();
        let ang = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(rad * ang.sin());
        rad * ang.cos()
    }
}

/// Generator for sample `id` of a batch seeded with `seed`.
fn sample_rng(seed: u64, id: usize) -> Lcg64 {
    let mut rng = Lcg64::new(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.next_u64();
    rng
}

/// Zero-mean random field: Gaussian Fourier coefficients on wave indices
/// `0 < |k| < n/4`, amplitude `|k|^-2`.
pub fn random_field(grid: Grid2D, rng: &mut Lcg64) -> ScalarField {
    let cutoff = grid.n() as f64 / 4.0;
    let scale = grid.len() as f64;
    let mut s = Spectrum::zeros(grid);
    for (c, &(k1, k2)) in s.coeffs_mut().iter_mut().zip(&Spectrum::wave_indices(grid)) {
        let kk = (k1 * k1 + k2 * k2).sqrt();
        if kk == 0.0 || kk >= cutoff {
            continue;
        }
        let amp = scale / (kk * kk);
        *c = Complex64::new(rng.normal(), rng.normal()) * amp;
    }
    // real part of the inverse is the inverse of the Hermitian part
    s.inverse()
}

/// One measured sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRow {
    pub sample_id: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub name: String,
    pub rows: Vec<SampleRow>,
    /// Samples with both sides zero, left out of `rows`.
    pub skipped: usize,
}

impl InequalityReport {
    fn collect(name: String, pairs: Vec<(usize, f64, f64)>) -> Self {
        let mut rows = Vec::with_capacity(pairs.len());
        let mut skipped = 0;
        for (sample_id, lhs, rhs) in pairs {
            if rhs == 0.0 {
                skipped += 1;
                continue;
            }
            rows.push(SampleRow {
                sample_id,
                lhs,
                rhs,
                ratio: lhs / rhs,
            });
        }
        Self { name, rows, skipped }
    }

    /// Largest ratio, the empirical constant.
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["sample_id", "lhs", "rhs", "ratio"])?;
        for r in &self.rows {
            w.write_record([
                r.sample_id.to_string(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                format!("{:e}", r.ratio),
            ])?;
        }
        w.write_record(["max_ratio", "", "", &format!("{:e}", self.max_ratio())])?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Batch size, grid and seed shared by the verify drivers.
#[derive(Debug, Clone, Copy)]
pub struct LabOptions {
    pub grid: Grid2D,
    pub samples: usize,
    pub seed: u64,
}

fn run_batch<F>(opts: &LabOptions, eval: F) -> Result<Vec<(usize, f64, f64)>>
where
    F: Fn(&mut Lcg64) -> Result<(f64, f64)> + Sync,
{
    (0..opts.samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = sample_rng(opts.seed, id);
            eval(&mut rng).map(|(l, r)| (id, l, r))
        })
        .collect()
}

/// Both sides of the interpolation inequality for one field.
pub fn gn_sides(h: &ScalarField, p: Exponent, q: Exponent, r: Exponent) -> Result<(f64, f64)> {
    let theta = gn_theta(p, q, r)?;
    let theta = *theta.numer() as f64 / *theta.denom() as f64;
    let lhs = norm(h, NormSpec::Lebesgue(q.to_f64()))?;
    let grad = norm(h, NormSpec::Seminorm { k: 1, r: p.to_f64() })?;
    let low = norm(h, NormSpec::Lebesgue(r.to_f64()))?;
    Ok((lhs, grad.powf(theta) * low.powf(1.0 - theta)))
}

pub fn gn_verify(opts: &LabOptions, p: Exponent, q: Exponent, r: Exponent) -> Result<InequalityReport> {
    gn_theta(p, q, r)?;
    let pairs = run_batch(opts, |rng| gn_sides(&random_field(opts.grid, rng), p, q, r))?;
    Ok(InequalityReport::collect(format!("gn_p{p}_q{q}_r{r}"), pairs))
}

/// Which factor carries which exponent on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorForm {
    /// `|grad f|_a |D^(s-1) g|_b + |D^s f|_b |g|_a`
    Crossed,
    /// `|grad f|_a |D^(s-1) g|_b + |D^s f|_a |g|_b`
    Aligned,
}

impl CommutatorForm {
    pub fn name(self) -> &'static str {
        match self {
            CommutatorForm::Crossed => "crossed",
            CommutatorForm::Aligned => "aligned",
        }
    }
}

/// Exponents `(r, a, b)` with `1/r = 1/a + 1/b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HolderTriple {
    pub r: Exponent,
    pub a: Exponent,
    pub b: Exponent,
}

impl HolderTriple {
    pub const STANDARD: [(i64, i64, i64); 3] = [(2, 2, 0), (2, 0, 2), (2, 3, 6)];

    pub fn new(r: Exponent, a: Exponent, b: Exponent) -> Result<Self> {
        let (r, a, b) = (r.check("r")?, a.check("a")?, b.check("b")?);
        if r.reciprocal() != a.reciprocal() + b.reciprocal() {
            return Err(Error::Inadmissible(format!(
                "Hölder relation 1/r = 1/a + 1/b fails for (r, a, b) = ({r}, {a}, {b})"
            )));
        }
        Ok(Self { r, a, b })
    }

    /// The three exponent choices used by the drivers; `0` encodes infinity.
    pub fn standard() -> Vec<Self> {
        let e = |v: i64| if v == 0 { Exponent::Infinite } else { Exponent::int(v) };
        Self::STANDARD
            .iter()
            .map(|&(r, a, b)| Self::new(e(r), e(a), e(b)).expect("standard triples are valid"))
            .collect()
    }
}

/// `|D^s(fg) - f D^s g|_r`, the order-`s` derivative tensor taken spectrally.
pub fn commutator_lhs(f: &ScalarField, g: &ScalarField, s: u32, r: Exponent) -> Result<f64> {
    if !(1..=2).contains(&s) {
        return Err(Error::param("s", "derivative order must be 1 or 2"));
    }
    let fg = f.mul(g);
    let mut acc = vec![0.0; f.grid().len()];
    for a in 0..=s {
        let w = binomial(s, a);
        let c = partial(&fg, a, s - a).sub(&f.mul(&partial(g, a, s - a)));
        for (acc, v) in acc.iter_mut().zip(c.values()) {
            *acc += w * v * v;
        }
    }
    Ok(lebesgue_from_sq(&acc, r.to_f64(), f.grid().cell_area()))
}

fn seminorm(f: &ScalarField, k: u32, r: Exponent) -> f64 {
    lebesgue_from_sq(&derivative_magnitude_sq(&[f], k), r.to_f64(), f.grid().cell_area())
}

/// Right-hand side of the commutator bound without its constant.
pub fn commutator_rhs(f: &ScalarField, g: &ScalarField, s: u32, form: CommutatorForm, t: HolderTriple) -> f64 {
    let first = seminorm(f, 1, t.a) * seminorm(g, s - 1, t.b);
    let second = match form {
        CommutatorForm::Crossed => seminorm(f, s, t.b) * seminorm(g, 0, t.a),
        CommutatorForm::Aligned => seminorm(f, s, t.a) * seminorm(g, 0, t.b),
    };
    first + second
}

pub fn commutator_verify(
    opts: &LabOptions,
    s: u32,
    form: CommutatorForm,
    triple: HolderTriple,
) -> Result<InequalityReport> {
    let pairs = run_batch(opts, |rng| {
        let f = random_field(opts.grid, rng);
        let g = random_field(opts.grid, rng);
        let lhs = commutator_lhs(&f, &g, s, triple.r)?;
        Ok((lhs, commutator_rhs(&f, &g, s, form, triple)))
    })?;
    let name = format!(
        "commutator_s{s}_{}_r{}_a{}_b{}",
        form.name(),
        triple.r,
        triple.a,
        triple.b
    );
    Ok(InequalityReport::collect(name, pairs))
}

/// `|u|_{D^{k+2,q}}` and `|F|_{D^{k,q}}` for `L u = F`.
pub fn lame_regularity_sides(f: &VectorField, k: u32, q: f64, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let u = lame_elliptic_solve(f, alpha, beta)?;
    let lhs = norm(&u, NormSpec::Seminorm { k: k + 2, r: q })?;
    let rhs = norm(f, NormSpec::Seminorm { k, r: q })?;
    Ok((lhs, rhs))
}

pub fn lame_regularity_verify(opts: &LabOptions, k: u32, q: u32, alpha: f64, beta: f64) -> Result<InequalityReport> {
    if k > 1 {
        return Err(Error::param("k", "derivative order must be 0 or 1"));
    }
    if q != 2 && q != 6 {
        return Err(Error::param("q", "exponent must be 2 or 6"));
    }
    let pairs = run_batch(opts, |rng| {
        let f1 = random_field(opts.grid, rng);
        let f2 = random_field(opts.grid, rng);
        let f = VectorField::new(f1, f2)?;
        lame_regularity_sides(&f, k, q as f64, alpha, beta)
    })?;
    Ok(InequalityReport::collect(format!("lame_k{k}_q{q}"), pairs))
}
