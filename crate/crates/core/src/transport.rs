//! Characteristics and the semi-Lagrangian updates of `phi` and `psi`.
//!
//! For a known velocity `v` the flow map solves `dW/dtau = v(tau, W)` with
//! `W(t, t, x) = x`. Along it
//!
//! ```text
//! phi(t, x) = phi(s, W(s)) exp(-(gamma-1)/2 int_s^t div v(tau, W(tau)) dtau)
//! d psi/dtau = -B psi - grad div v,   B_ij = d_i v_j
//! ```
//!
//! Positions are traced backwards with classical RK4; `v` is linear in time
//! between stored levels and bicubic (4-point Lagrange) in space.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{divergence, velocity_gradient, Grid2D, ScalarField, Spectrum, TensorField, VectorField};
use crate::model::ModelSpec;

/// Time-indexed velocity levels, borrowed from a trajectory.
#[derive(Debug, Clone)]
pub struct VelocityHistory<'a> {
    times: Vec<f64>,
    fields: Vec<&'a VectorField>,
}

impl<'a> VelocityHistory<'a> {
    pub fn new(times: Vec<f64>, fields: Vec<&'a VectorField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::param(
                "v_history",
                format!("{} times for {} fields", times.len(), fields.len()),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("v_history", "times must be strictly increasing"));
        }
        let g = fields[0].grid();
        for f in &fields[1..] {
            g.check_same(&f.grid())?;
        }
        Ok(Self { times, fields })
    }

    /// A velocity held fixed over `[s, t]`.
    pub fn steady(v: &'a VectorField, s: f64, t: f64) -> Result<Self> {
        Self::new(vec![s, t], vec![v, v])
    }

    pub fn grid(&self) -> Grid2D {
        self.fields[0].grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn level(&self, i: usize) -> &'a VectorField {
        self.fields[i]
    }

    fn covers(&self, s: f64, t: f64) -> Result<()> {
        let (start, end) = (self.times[0], *self.times.last().expect("nonempty"));
        if s < start || t > end || s > t {
            return Err(Error::HistoryCoverage {
                from: s,
                to: t,
                start,
                end,
            });
        }
        Ok(())
    }

    /// Index `j` with `times[j] <= tau <= times[j + 1]`.
    fn interval(&self, tau: f64) -> usize {
        let last = self.times.len().saturating_sub(2);
        self.times.partition_point(|&x| x <= tau).saturating_sub(1).min(last)
    }
}

/// Coefficients of the `psi` system derived from one velocity snapshot.
#[derive(Debug, Clone)]
pub struct PsiSystemCoeffs {
    /// Diagonal entries of the symmetric advection matrices: `v` itself.
    pub a_diag: VectorField,
    /// `B_ij = d_i v_j`.
    pub b: TensorField,
    pub forcing: VectorField,
    pub div: ScalarField,
}

impl PsiSystemCoeffs {
    pub fn from_velocity(v: &VectorField) -> Self {
        let ik = |k: f64| Complex64::new(0.0, k);
        let s = [Spectrum::forward(v.comp(0)), Spectrum::forward(v.comp(1))];
        let d = |i: usize, j: usize| s[j].multiply(|k1, k2| ik(if i == 0 { k1 } else { k2 }));
        let mut div = d(0, 0);
        div.axpy(1.0, &d(1, 1));
        let forcing = VectorField::from_parts(
            div.multiply(|k1, _| ik(k1)).inverse(),
            div.multiply(|_, k2| ik(k2)).inverse(),
        );
        Self {
            a_diag: v.clone(),
            b: velocity_gradient(v),
            forcing,
            div: div.inverse(),
        }
    }
}

/// Departure points `W(s, t, x)` for every arrival node `x`, wrapped into the box.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub grid: Grid2D,
    pub departure: VectorField,
    pub span: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    /// RK4 substeps per call.
    pub substeps: usize,
    /// Allowed `max|v| dt / spacing`.
    pub cfl_max: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            substeps: 1,
            cfl_max: 1.0,
        }
    }
}

/// Tensor-product 4-point Lagrange stencil at one off-grid point.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    ix: [usize; 4],
    iy: [usize; 4],
    wx: [f64; 4],
    wy: [f64; 4],
}

#[inline]
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

impl Stencil {
    #[inline]
    fn new(g: &Grid2D, p: [f64; 2]) -> Self {
        let n = g.n();
        let h = g.spacing();
        let half = 0.5 * g.box_length();
        let axis = |x: f64| {
            let xi = (x + half) / h;
            // truncating cast, corrected to a floor for negative xi
            let mut i0 = xi as i64;
            if (i0 as f64) > xi {
                i0 -= 1;
            }
            let s = xi - i0 as f64;
            if !(0..n as i64).contains(&i0) {
                i0 = i0.rem_euclid(n as i64);
            }
            let i0 = i0 as usize;
            let step = |i: usize| if i + 1 == n { 0 } else { i + 1 };
            let (i1, i2) = (step(i0), step(step(i0)));
            let idx = [if i0 == 0 { n - 1 } else { i0 - 1 }, i0, i1, i2];
            (idx, cubic_weights(s))
        };
        let (ix, wx) = axis(p[0]);
        let (iy, wy) = axis(p[1]);
        Self { ix, iy, wx, wy }
    }

    #[inline]
    fn apply(&self, n: usize, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for b in 0..4 {
            let row = &values[self.iy[b] * n..];
            let mut r = 0.0;
            for a in 0..4 {
                r += self.wx[a] * row[self.ix[a]];
            }
            acc += self.wy[b] * r;
        }
        acc
    }

    /// `apply` on `K` consecutive columns of an interleaved array.
    #[inline]
    fn gather<const K: usize>(&self, n: usize, data: &[f64], stride: usize, off: usize) -> [f64; K] {
        let mut acc = [0.0; K];
        for b in 0..4 {
            let row = self.iy[b] * n;
            let mut r = [0.0; K];
            for a in 0..4 {
                let base = (row + self.ix[a]) * stride + off;
                let cell = &data[base..base + K];
                for c in 0..K {
                    r[c] += self.wx[a] * cell[c];
                }
            }
            for c in 0..K {
                acc[c] += self.wy[b] * r[c];
            }
        }
        acc
    }
}

/// Bicubic periodic interpolation of `f` at an arbitrary point.
pub fn interpolate(f: &ScalarField, p: [f64; 2]) -> f64 {
    let g = f.grid();
    Stencil::new(&g, p).apply(g.n(), f.values())
}

/// Maps `x` into `[-L/2, L/2)`.
#[inline]
fn wrap(x: f64, l: f64) -> f64 {
    let half = 0.5 * l;
    if (-half..half).contains(&x) {
        x
    } else {
        let y = (x + half).rem_euclid(l) - half;
        if y >= half {
            y - l
        } else {
            y
        }
    }
}

/// One velocity level, interleaved per node as `v1, v2, div` and, when `psi`
/// is requested, `b00, b01, b10, b11, f1, f2` with `b[i][j] = d_i v_j`.
pub(crate) struct Level {
    data: Vec<f64>,
}

const VEL: usize = 3;
const WITH_PSI: usize = 9;

impl Level {
    pub(crate) fn new(v: &VectorField, with_psi: bool) -> Self {
        let mut cols: Vec<ScalarField> = vec![v.comp(0).clone(), v.comp(1).clone()];
        if with_psi {
            let c = PsiSystemCoeffs::from_velocity(v);
            cols.push(c.div);
            for i in 0..2 {
                for j in 0..2 {
                    cols.push(c.b.entry(i, j).clone());
                }
            }
            let [f1, f2] = c.forcing.into_comps();
            cols.extend([f1, f2]);
        } else {
            cols.push(divergence(v));
        }
        let stride = cols.len();
        let mut data = vec![0.0; stride * v.grid().len()];
        for (c, col) in cols.iter().enumerate() {
            for (k, &x) in col.values().iter().enumerate() {
                data[k * stride + c] = x;
            }
        }
        Self { data }
    }
}

/// Samples the history at `(tau, x)` with levels prepared for `[s, t]`.
struct Sampler<'h> {
    grid: Grid2D,
    times: &'h [f64],
    first: usize,
    stride: usize,
    levels: Vec<Arc<Level>>,
}

impl<'h> Sampler<'h> {
    fn new(history: &'h VelocityHistory<'_>, s: f64, t: f64, with_psi: bool) -> Self {
        let first = history.interval(s);
        let last = (history.interval(t) + 1).min(history.len() - 1);
        let levels = (first..=last)
            .into_par_iter()
            .map(|j| Arc::new(Level::new(history.level(j), with_psi)))
            .collect();
        Self {
            grid: history.grid(),
            times: history.times(),
            first,
            stride: if with_psi { WITH_PSI } else { VEL },
            levels,
        }
    }

    /// Local level index pair and the weight of the upper level.
    #[inline]
    fn locate(&self, tau: f64) -> (usize, f64) {
        if self.levels.len() == 1 {
            return (0, 0.0);
        }
        let j = self.times[self.first..self.first + self.levels.len()]
            .partition_point(|&x| x <= tau)
            .saturating_sub(1)
            .min(self.levels.len() - 2);
        let (t0, t1) = (self.times[self.first + j], self.times[self.first + j + 1]);
        (j, ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0))
    }

    /// The history blended to time `tau`.
    fn level_at(&self, tau: f64) -> Level {
        let (j, w) = self.locate(tau);
        let a = &self.levels[j].data;
        if w == 0.0 {
            return Level { data: a.clone() };
        }
        let b = &self.levels[j + 1].data;
        if w == 1.0 {
            return Level { data: b.clone() };
        }
        Level {
            data: a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect(),
        }
    }

    fn max_speed(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.data.chunks_exact(self.stride))
            .fold(0.0_f64, |m, c| m.max(c[0].hypot(c[1])))
    }
}

/// Velocity levels at the stage times `t - m dt/2`, `m = 0..=2 substeps`.
struct Stages {
    grid: Grid2D,
    stride: usize,
    levels: Vec<Level>,
}

impl Stages {
    fn new(sm: &Sampler<'_>, t: f64, dt: f64, substeps: usize) -> Self {
        let levels = (0..=2 * substeps)
            .into_par_iter()
            .map(|m| sm.level_at(t - m as f64 * 0.5 * dt))
            .collect();
        Self {
            grid: sm.grid,
            stride: sm.stride,
            levels,
        }
    }

    #[inline]
    fn sample<const K: usize>(&self, m: usize, p: [f64; 2], off: usize) -> [f64; K] {
        Stencil::new(&self.grid, p).gather::<K>(self.grid.n(), &self.levels[m].data, self.stride, off)
    }

    #[inline]
    fn velocity_div(&self, m: usize, p: [f64; 2]) -> ([f64; 2], f64) {
        let [v1, v2, d] = self.sample::<3>(m, p, 0);
        ([v1, v2], d)
    }

    #[inline]
    fn psi_coeffs(&self, m: usize, p: [f64; 2]) -> ([[f64; 2]; 2], [f64; 2]) {
        let [b00, b01, b10, b11, f1, f2] = self.sample::<6>(m, p, VEL);
        ([[b00, b01], [b10, b11]], [f1, f2])
    }
}

/// Result of tracing one arrival node back to time `s`.
struct Trace {
    /// Positions at the substep boundaries, arrival first, unwrapped.
    path: Vec<[f64; 2]>,
    div_integral: f64,
}

fn trace_node(st: &Stages, x: [f64; 2], dt: f64, substeps: usize, keep_path: bool) -> Trace {
    let mut path = Vec::with_capacity(if keep_path { substeps + 1 } else { 1 });
    let mut p = x;
    let mut integral = 0.0;
    if keep_path {
        path.push(p);
    }
    for step in 0..substeps {
        let half = 0.5 * dt;
        let m = 2 * step;
        let (k1, d1) = st.velocity_div(m, p);
        let (k2, d2) = st.velocity_div(m + 1, [p[0] - half * k1[0], p[1] - half * k1[1]]);
        let (k3, d3) = st.velocity_div(m + 1, [p[0] - half * k2[0], p[1] - half * k2[1]]);
        let (k4, d4) = st.velocity_div(m + 2, [p[0] - dt * k3[0], p[1] - dt * k3[1]]);
        for c in 0..2 {
            p[c] -= dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        integral += dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        if keep_path {
            path.push(p);
        }
    }
    if !keep_path {
        path.push(p);
    }
    Trace {
        path,
        div_integral: integral,
    }
}

type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mat_vec(a: &Mat2, x: [f64; 2]) -> [f64; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

/// `(exp(Z), phi_1(Z))` with `phi_1(Z) = int_0^1 exp(sZ) ds`, by Taylor
/// series after scaling and `phi_1(2Z) = (exp(Z) + I) phi_1(Z) / 2`.
pub(crate) fn expm_phi1(z: Mat2) -> (Mat2, Mat2) {
    let norm = z.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())) * 2.0;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let zs = z.map(|r| r.map(|v| v * scale));
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let mut e = id;
    let mut p = id;
    let mut term = id;
    for k in 1..=14 {
        term = mat_mul(&term, &zs).map(|r| r.map(|v| v / k as f64));
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] += term[i][j];
                p[i][j] += term[i][j] / (k + 1) as f64;
            }
        }
        if term.iter().flatten().all(|v| v.abs() < 1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        let mut ei = e;
        ei[0][0] += 1.0;
        ei[1][1] += 1.0;
        p = mat_mul(&ei, &p).map(|r| r.map(|v| 0.5 * v));
        e = mat_mul(&e, &e);
    }
    (e, p)
}

/// Output of a combined transport step.
#[derive(Debug, Clone)]
pub struct TransportResult {
    pub flow: FlowMap,
    pub phi: Option<ScalarField>,
    pub psi: Option<VectorField>,
}

/// Backtraces every node over `[s, t]` and, when given, updates `phi` and
/// `psi` along the same characteristics.
pub fn transport(
    history: &VelocityHistory<'_>,
    s: f64,
    t: f64,
    phi_s: Option<&ScalarField>,
    psi_s: Option<&VectorField>,
    spec: &ModelSpec,
    opts: TransportOptions,
) -> Result<TransportResult> {
    history.covers(s, t)?;
    let g = history.grid();
    if let Some(phi) = phi_s {
        g.check_same(&phi.grid())?;
        phi.ensure_finite("phi")?;
    }
    if let Some(psi) = psi_s {
        g.check_same(&psi.grid())?;
        psi.ensure_finite("psi")?;
    }
    if opts.substeps == 0 {
        return Err(Error::param("substeps", "must be at least 1"));
    }
    let with_psi = psi_s.is_some();
    let sm = Sampler::new(history, s, t, with_psi);
    run_transport(&sm, s, t, phi_s, psi_s, spec, opts)
}

/// `transport` over one interval with already prepared end levels, which
/// must have been built with `psi` columns when `psi_s` is given.
pub(crate) fn transport_levels(
    grid: Grid2D,
    (s, t): (f64, f64),
    levels: [Arc<Level>; 2],
    phi_s: Option<&ScalarField>,
    psi_s: Option<&VectorField>,
    spec: &ModelSpec,
    opts: TransportOptions,
) -> Result<TransportResult> {
    let with_psi = psi_s.is_some();
    let times = [s, t];
    let sm = Sampler {
        grid,
        times: &times,
        first: 0,
        stride: if with_psi { WITH_PSI } else { VEL },
        levels: levels.to_vec(),
    };
    if levels.iter().any(|l| l.data.len() != sm.stride * grid.len()) {
        return Err(Error::param(
            "levels",
            "prepared levels do not match the requested fields",
        ));
    }
    run_transport(&sm, s, t, phi_s, psi_s, spec, opts)
}

fn run_transport(
    sm: &Sampler<'_>,
    s: f64,
    t: f64,
    phi_s: Option<&ScalarField>,
    psi_s: Option<&VectorField>,
    spec: &ModelSpec,
    opts: TransportOptions,
) -> Result<TransportResult> {
    if opts.substeps == 0 {
        return Err(Error::param("substeps", "must be at least 1"));
    }
    let g = sm.grid;
    let with_psi = psi_s.is_some();
    let dt = (t - s) / opts.substeps as f64;
    let vmax = sm.max_speed();
    let h = g.spacing();
    if vmax * dt > h * opts.cfl_max {
        return Err(Error::Cfl {
            max_speed: vmax,
            dt,
            advisory_dt: h * opts.cfl_max / vmax,
        });
    }

    let stages = Stages::new(sm, t, dt, opts.substeps);
    let k = spec.half_gamma_minus_one();
    let l = g.box_length();
    let n = g.n();
    let nodes: Vec<([f64; 2], f64, [f64; 2])> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = g.position(idx);
            let tr = trace_node(&stages, [x1, x2], dt, opts.substeps, with_psi);
            let foot = *tr.path.last().expect("path");
            let phi = phi_s.map_or(0.0, |f| {
                let st = Stencil::new(&g, foot);
                st.apply(n, f.values()).max(0.0) * (-k * tr.div_integral).exp()
            });
            let psi = psi_s.map_or([0.0; 2], |f| {
                let st = Stencil::new(&g, foot);
                let mut y = [st.apply(n, f.comp(0).values()), st.apply(n, f.comp(1).values())];
                // forward along the path, foot to arrival
                for step in (0..opts.substeps).rev() {
                    let (a, b) = (tr.path[step + 1], tr.path[step]);
                    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                    let (bm, f) = stages.psi_coeffs(2 * step + 1, mid);
                    let z = bm.map(|r| r.map(|v| -v * dt));
                    let (e, p) = expm_phi1(z);
                    let ey = mat_vec(&e, y);
                    let pf = mat_vec(&p, f);
                    y = [ey[0] - dt * pf[0], ey[1] - dt * pf[1]];
                }
                y
            });
            ([wrap(foot[0], l), wrap(foot[1], l)], phi, psi)
        })
        .collect();

    type Node = ([f64; 2], f64, [f64; 2]);
    let column = |f: &dyn Fn(&Node) -> f64| -> ScalarField {
        ScalarField::from_vec_unchecked(g, nodes.iter().map(f).collect())
    };
    let departure = VectorField::from_parts(column(&|r| r.0[0]), column(&|r| r.0[1]));
    let phi = phi_s.map(|_| column(&|r| r.1));
    let psi = psi_s.map(|_| VectorField::from_parts(column(&|r| r.2[0]), column(&|r| r.2[1])));
    if let Some(p) = &phi {
        p.ensure_finite("advanced phi")?;
    }
    if let Some(p) = &psi {
        p.ensure_finite("advanced psi")?;
    }
    Ok(TransportResult {
        flow: FlowMap {
            grid: g,
            departure,
            span: (s, t),
        },
        phi,
        psi,
    })
}

/// Departure points `W(s, t, x)`.
pub fn backtrace(history: &VelocityHistory<'_>, t: f64, s: f64, substeps: usize) -> Result<FlowMap> {
    backtrace_with(
        history,
        t,
        s,
        TransportOptions {
            substeps,
            ..Default::default()
        },
    )
}

pub fn backtrace_with(history: &VelocityHistory<'_>, t: f64, s: f64, opts: TransportOptions) -> Result<FlowMap> {
    // The model only scales the Jacobian factor, which is not computed here.
    let spec = ModelSpec::new(2.0, 1.0, 1.0, 0.0, crate::model::Variant::FullQ).expect("valid");
    Ok(transport(history, s, t, None, None, &spec, opts)?.flow)
}

/// `phi(t)` from `phi(s)` by the characteristics representation.
pub fn advance_phi(
    phi_s: &ScalarField,
    history: &VelocityHistory<'_>,
    s: f64,
    t: f64,
    spec: &ModelSpec,
    opts: TransportOptions,
) -> Result<ScalarField> {
    if let Some((index, &value)) = phi_s.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeInput {
            what: "phi",
            value,
            index,
        });
    }
    Ok(transport(history, s, t, Some(phi_s), None, spec, opts)?
        .phi
        .expect("phi requested"))
}

/// `psi(t)` from `psi(s)` by integrating the symmetric system along characteristics.
pub fn advance_psi(
    psi_s: &VectorField,
    history: &VelocityHistory<'_>,
    s: f64,
    t: f64,
    spec: &ModelSpec,
    opts: TransportOptions,
) -> Result<VectorField> {
    Ok(transport(history, s, t, None, Some(psi_s), spec, opts)?
        .psi
        .expect("psi requested"))
}
