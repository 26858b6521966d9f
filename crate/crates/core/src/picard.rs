//! Fixed-point construction of solutions.
//!
//! Each sweep freezes the previous velocity iterate `v`, transports `phi`
//! and `psi` along its characteristics and advances
//!
//! ```text
//! u_t + L u = -v.grad v - theta grad(phi^2) + psi . Q(v)
//! ```
//!
//! implicitly in `L`. Sweep 0 is the heat flow of `u_0`. Sweeps stop when the
//! distance `Gamma` between consecutive iterates drops below `tol`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use num_complex::Complex64;

use crate::fields::{gradient, velocity_gradient, Grid2D, ScalarField, Spectrum, TensorField, VectorField};
use crate::lame::{heat_semigroup, parabolic_step_spectral, Scheme};
use crate::model::{lame_symbol_apply, psi_from_phi, q_contract, ModelSpec, RegularizationParams, State};
use crate::transport::{transport_levels, Level, TransportOptions, VelocityHistory};

/// States at uniformly spaced times `t_i = t_0 + i dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn new(states: Vec<State>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::TrajectoryMismatch("empty trajectory".into()))?;
        let g = first.grid();
        for s in &states[1..] {
            g.check_same(&s.grid())?;
        }
        if states.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::TrajectoryMismatch("times must increase".into()));
        }
        Ok(Self { states })
    }

    pub fn grid(&self) -> Grid2D {
        self.states[0].grid()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("nonempty")
    }

    pub fn velocity_history(&self) -> VelocityHistory<'_> {
        VelocityHistory::new(self.times(), self.states.iter().map(|s| &s.u).collect())
            .expect("trajectory times increase")
    }

    /// States in reverse order, relabelled with the original time levels.
    pub fn reversed(&self) -> Trajectory {
        let times = self.times();
        Trajectory {
            states: self
                .states
                .iter()
                .rev()
                .zip(times)
                .map(|(s, t)| State { t, ..s.clone() })
                .collect(),
        }
    }

    fn check_matches(&self, other: &Trajectory) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::TrajectoryMismatch(format!(
                "{} levels versus {}",
                self.len(),
                other.len()
            )));
        }
        self.grid().check_same(&other.grid())?;
        for (a, b) in self.states.iter().zip(&other.states) {
            if (a.t - b.t).abs() > 1e-12 * (1.0 + a.t.abs()) {
                return Err(Error::TrajectoryMismatch(format!(
                    "time levels differ: {} versus {}",
                    a.t, b.t
                )));
            }
        }
        Ok(())
    }
}

/// `t_i = i dt` for `i = 0..=round(horizon / dt)`.
pub fn step_times(horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "time step must be positive"));
    }
    if !(horizon >= dt && horizon.is_finite()) {
        return Err(Error::param("horizon", "horizon must be at least one time step"));
    }
    let steps = (horizon / dt).round() as usize;
    if ((steps as f64) * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::param(
            "horizon",
            format!("horizon {horizon} is not a whole number of steps dt = {dt}"),
        ));
    }
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

/// Samples of `e^{t lap} u0` at the step times.
pub fn heat_initialize(u0: &VectorField, horizon: f64, dt: f64) -> Result<Vec<VectorField>> {
    u0.ensure_finite("u0")?;
    Ok(step_times(horizon, dt)?
        .into_iter()
        .map(|t| if t == 0.0 { u0.clone() } else { heat_semigroup(u0, t) })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    pub scheme: Scheme,
    pub substeps: usize,
    pub cfl_max: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::CrankNicolson,
            substeps: 1,
            cfl_max: 1.0,
        }
    }
}

impl StepOptions {
    fn transport(&self) -> TransportOptions {
        TransportOptions {
            substeps: self.substeps,
            cfl_max: self.cfl_max,
        }
    }
}

/// Data of one linearized problem: a frozen velocity and the initial state.
#[derive(Debug, Clone)]
pub struct LinearizedInput<'a> {
    pub v: VelocityHistory<'a>,
    pub initial: &'a State,
    pub spec: ModelSpec,
    pub reg: RegularizationParams,
}

fn spectra(v: &VectorField) -> [Spectrum; 2] {
    [Spectrum::forward(v.comp(0)), Spectrum::forward(v.comp(1))]
}

/// `-v.grad v - theta grad(phi^2) + psi . Q(v)` in Fourier space, with the
/// 2/3 rule applied to every product.
pub fn momentum_rhs(v: &VectorField, phi: &ScalarField, psi: &VectorField, spec: &ModelSpec) -> [Spectrum; 2] {
    momentum_rhs_with(v, &velocity_gradient(v), phi, psi, spec)
}

fn momentum_rhs_with(
    v: &VectorField,
    m: &TensorField,
    phi: &ScalarField,
    psi: &VectorField,
    spec: &ModelSpec,
) -> [Spectrum; 2] {
    let g = v.grid();
    let (v1, v2) = (v.comp(0).values(), v.comp(1).values());
    let e = |i: usize, j: usize| m.entry(i, j).values();
    let mut f = [vec![0.0; g.len()], vec![0.0; g.len()]];
    for (j, fj) in f.iter_mut().enumerate() {
        let (d1, d2) = (e(0, j), e(1, j));
        for k in 0..g.len() {
            fj[k] = -(v1[k] * d1[k] + v2[k] * d2[k]);
        }
    }
    if spec.variant().tracks_psi() {
        let q = q_contract(psi, m, spec);
        for (j, fj) in f.iter_mut().enumerate() {
            for (a, b) in fj.iter_mut().zip(q.comp(j).values()) {
                *a += b;
            }
        }
    }
    let [f1, f2] = f;
    let mut out = [
        Spectrum::forward(&ScalarField::from_vec_unchecked(g, f1)),
        Spectrum::forward(&ScalarField::from_vec_unchecked(g, f2)),
    ];
    let mut p2 = Spectrum::forward(&phi.mul(phi));
    p2.truncate_two_thirds();
    let theta = spec.theta();
    let (k1s, k2s): (Vec<f64>, Vec<f64>) = Spectrum::wavevectors(g).into_iter().unzip();
    for (c, ks) in out.iter_mut().zip([&k1s, &k2s]) {
        c.truncate_two_thirds();
        for ((coef, p), k) in c.coeffs_mut().iter_mut().zip(p2.coeffs()).zip(ks.iter()) {
            *coef -= p * Complex64::new(0.0, theta * k);
        }
    }
    out
}

/// One linearized problem over `[0, horizon]`.
pub fn linearized_solve(input: &LinearizedInput<'_>, horizon: f64, dt: f64, opts: StepOptions) -> Result<Trajectory> {
    let times = step_times(horizon, dt)?;
    let spec = &input.spec;
    let g = input.initial.grid();
    input.v.grid().check_same(&g)?;
    let vt = input.v.times();
    if vt.len() != times.len() || vt.iter().zip(&times).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::HistoryCoverage {
            from: 0.0,
            to: horizon,
            start: vt[0],
            end: *vt.last().expect("nonempty"),
        });
    }
    let tracks_psi = spec.variant().tracks_psi();
    let (alpha, beta) = (spec.alpha(), spec.beta());

    let mut states = Vec::with_capacity(times.len());
    let mut current = State {
        t: 0.0,
        ..input.initial.clone()
    };
    let mut u_hat = spectra(&current.u);
    let mut rhs_prev = momentum_rhs(input.v.level(0), &current.phi, &current.psi, spec);
    states.push(current.clone());
    // each velocity level serves two consecutive steps
    let mut lower = Arc::new(Level::new(input.v.level(0), tracks_psi));
    for n in 0..times.len() - 1 {
        let (s, t) = (times[n], times[n + 1]);
        let upper = Arc::new(Level::new(input.v.level(n + 1), tracks_psi));
        let moved = transport_levels(
            g,
            (s, t),
            [lower, upper.clone()],
            Some(&current.phi),
            tracks_psi.then_some(&current.psi),
            spec,
            opts.transport(),
        )
        .map_err(|e| match e {
            Error::NonFinite { what, .. } => Error::Diverged { step: n + 1, what },
            e => e,
        })?;
        let phi = moved.phi.expect("phi requested");
        let psi = moved.psi.unwrap_or_else(|| VectorField::zeros(g));
        let rhs_next = momentum_rhs(input.v.level(n + 1), &phi, &psi, spec);
        let mut rhs_mid = rhs_prev.clone();
        for (m, r) in rhs_mid.iter_mut().zip(&rhs_next) {
            for (a, b) in m.coeffs_mut().iter_mut().zip(r.coeffs()) {
                *a = 0.5 * (*a + b);
            }
        }
        u_hat = parabolic_step_spectral(&u_hat, &rhs_mid, dt, opts.scheme, alpha, beta);
        let u = VectorField::from_parts(u_hat[0].inverse(), u_hat[1].inverse());
        for (what, ok) in [
            ("phi", phi.values().iter().all(|v| v.is_finite())),
            (
                "psi",
                psi.comps().iter().all(|c| c.values().iter().all(|v| v.is_finite())),
            ),
            ("u", u.comps().iter().all(|c| c.values().iter().all(|v| v.is_finite()))),
        ] {
            if !ok {
                return Err(Error::Diverged {
                    step: n + 1,
                    what: what.into(),
                });
            }
        }
        current = State { phi, psi, u, t };
        states.push(current.clone());
        rhs_prev = rhs_next;
        lower = upper;
    }
    Trajectory::new(states)
}

/// `||f||_1^2` by Parseval, consistent with the spectral derivatives.
fn h1_sq(f: &ScalarField) -> f64 {
    let g = f.grid();
    let s = Spectrum::forward(f);
    let w = g.cell_area() / g.len() as f64;
    Spectrum::wavevectors(g)
        .iter()
        .zip(s.coeffs())
        .map(|(k, c)| (1.0 + k.0 * k.0 + k.1 * k.1) * c.norm_sqr())
        .sum::<f64>()
        * w
}

fn l2_sq(f: &ScalarField) -> f64 {
    f.values().iter().map(|v| v * v).sum::<f64>() * f.grid().cell_area()
}

/// `sup_t ( ||phi_a - phi_b||_1^2 + |psi_a - psi_b|_2^2 + ||u_a - u_b||_1^2 )`.
pub fn gamma_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    a.check_matches(b)?;
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            let dphi = x.phi.sub(&y.phi);
            let dpsi = x.psi.sub(&y.psi);
            let du = x.u.sub(&y.u);
            h1_sq(&dphi) + l2_sq(dpsi.comp(0)) + l2_sq(dpsi.comp(1)) + h1_sq(du.comp(0)) + h1_sq(du.comp(1))
        })
        .fold(0.0, f64::max))
}

/// Per-equation residual norms of the nonlinear system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub phi: f64,
    pub psi: f64,
    pub u: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.phi.max(self.psi).max(self.u)
    }
}

/// Centered time differences plus spectral space terms with `v = u`,
/// `L^2` norms, maximum over the interior levels.
pub fn nonlinear_residual(traj: &Trajectory, spec: &ModelSpec) -> Result<Residuals> {
    if traj.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: traj.len(),
        });
    }
    let k = spec.half_gamma_minus_one();
    let g = traj.grid();
    let ks = Spectrum::wavevectors(g);
    let ik = |k: f64| Complex64::new(0.0, k);
    let per_level: Vec<Residuals> = (1..traj.len() - 1)
        .map(|n| {
            let (prev, cur, next) = (&traj.states[n - 1], &traj.states[n], &traj.states[n + 1]);
            let inv = 1.0 / (next.t - prev.t);
            let u = &cur.u;
            // every space term of u comes from one pair of spectra
            let su = spectra(u);
            let d = |i: usize, j: usize| su[j].multiply(|k1, k2| ik(if i == 0 { k1 } else { k2 }));
            let mut div_hat = d(0, 0);
            div_hat.axpy(1.0, &d(1, 1));
            let div = div_hat.inverse();
            let m = TensorField::from_parts([
                [d(0, 0).inverse(), d(0, 1).inverse()],
                [d(1, 0).inverse(), d(1, 1).inverse()],
            ]);

            let gphi = gradient(&cur.phi);
            let mut r_phi = next.phi.sub(&prev.phi).scale(inv);
            r_phi = r_phi.add(&u.dot(&gphi));
            r_phi = r_phi.add(&cur.phi.mul(&div).scale(k));

            let psi_res = if spec.variant().tracks_psi() {
                // psi_t + u.grad psi + B psi + grad div u, B_ij = d_i u_j
                let mut total = 0.0;
                for i in 0..2 {
                    let gp = gradient(cur.psi.comp(i));
                    let gdiv = div_hat.multiply(|k1, k2| ik(if i == 0 { k1 } else { k2 })).inverse();
                    let mut r = next.psi.comp(i).sub(prev.psi.comp(i)).scale(inv);
                    r = r.add(&u.dot(&gp));
                    r = r.add(&m.entry(i, 0).mul(cur.psi.comp(0)));
                    r = r.add(&m.entry(i, 1).mul(cur.psi.comp(1)));
                    r = r.add(&gdiv);
                    total += l2_sq(&r);
                }
                total.sqrt()
            } else {
                0.0
            };

            // u_t + L u - rhs, all but u_t in Fourier space
            let mut rhs = momentum_rhs_with(u, &m, &cur.phi, &cur.psi, spec);
            for (idx, &kv) in ks.iter().enumerate() {
                let lu = lame_symbol_apply(
                    kv,
                    spec.alpha(),
                    spec.beta(),
                    [su[0].coeffs()[idx], su[1].coeffs()[idx]],
                );
                for c in 0..2 {
                    let r = &mut rhs[c].coeffs_mut()[idx];
                    *r = lu[c] - *r;
                }
            }
            let mut total = 0.0;
            for (i, space) in rhs.iter().enumerate() {
                let r = next.u.comp(i).sub(prev.u.comp(i)).scale(inv).add(&space.inverse());
                total += l2_sq(&r);
            }
            Residuals {
                phi: l2_sq(&r_phi).sqrt(),
                psi: psi_res,
                u: total.sqrt(),
            }
        })
        .collect();
    Ok(per_level.iter().fold(Residuals::default(), |acc, r| Residuals {
        phi: acc.phi.max(r.phi),
        psi: acc.psi.max(r.psi),
        u: acc.u.max(r.u),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub gamma_distance: f64,
    pub residual_phi: f64,
    pub residual_psi: f64,
    pub residual_u: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub sweeps: Vec<SweepRecord>,
    pub converged: bool,
    pub t_star_used: f64,
}

impl IterationTrace {
    pub fn last_gamma(&self) -> Option<f64> {
        self.sweeps.last().map(|s| s.gamma_distance)
    }

    /// `Gamma_{k} / Gamma_{k-1}` for consecutive sweeps.
    pub fn ratios(&self) -> Vec<(usize, f64)> {
        self.sweeps
            .windows(2)
            .map(|w| (w[1].k, w[1].gamma_distance / w[0].gamma_distance))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "k",
            "gamma_distance",
            "residual_phi",
            "residual_psi",
            "residual_u",
            "wall_time_s",
        ])?;
        for s in &self.sweeps {
            w.write_record([
                s.k.to_string(),
                s.gamma_distance.to_string(),
                s.residual_phi.to_string(),
                s.residual_psi.to_string(),
                s.residual_u.to_string(),
                s.wall_time_s.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
        let mut r = csv::Reader::from_path(path)?;
        r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub step: StepOptions,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            horizon: 0.5,
            dt: 1e-3,
            tol: 1e-8,
            max_sweeps: 30,
            step: StepOptions::default(),
        }
    }
}

fn check_initial(initial: &State, spec: &ModelSpec) -> Result<()> {
    initial.phi.ensure_finite("phi0")?;
    initial.psi.ensure_finite("psi0")?;
    initial.u.ensure_finite("u0")?;
    let min = initial.phi.min();
    if spec.variant().tracks_psi() && min <= 0.0 {
        return Err(Error::param(
            "phi0",
            format!("variant {} needs phi_0 > 0 (min is {min:e})", spec.variant().name()),
        ));
    }
    if min < 0.0 {
        return Err(Error::param("phi0", "phi_0 must be nonnegative"));
    }
    Ok(())
}

/// Iterate `u^{k+1} = S(u^k)` from the heat-flow iterate until `Gamma < tol`.
pub fn picard_solve(
    initial: &State,
    spec: &ModelSpec,
    reg: &RegularizationParams,
    opts: &PicardOptions,
) -> Result<(Trajectory, IterationTrace)> {
    check_initial(initial, spec)?;
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    if opts.max_sweeps == 0 {
        return Err(Error::param("max_sweeps", "at least one sweep is required"));
    }
    let times = step_times(opts.horizon, opts.dt)?;
    let heat = heat_initialize(&initial.u, opts.horizon, opts.dt)?;
    let mut prev = Trajectory::new(
        heat.into_iter()
            .zip(&times)
            .map(|(u, &t)| State {
                phi: initial.phi.clone(),
                psi: initial.psi.clone(),
                u,
                t,
            })
            .collect(),
    )?;

    let mut trace = IterationTrace {
        sweeps: Vec::new(),
        converged: false,
        t_star_used: opts.horizon,
    };
    for k in 1..=opts.max_sweeps {
        let clock = Instant::now();
        let input = LinearizedInput {
            v: prev.velocity_history(),
            initial,
            spec: *spec,
            reg: *reg,
        };
        let next = linearized_solve(&input, opts.horizon, opts.dt, opts.step)?;
        let gamma = gamma_distance(&next, &prev)?;
        let res = if next.len() >= 3 {
            nonlinear_residual(&next, spec)?
        } else {
            Residuals::default()
        };
        let rec = SweepRecord {
            k,
            gamma_distance: gamma,
            residual_phi: res.phi,
            residual_psi: res.psi,
            residual_u: res.u,
            wall_time_s: clock.elapsed().as_secs_f64(),
        };
        debug!("sweep {k}: gamma = {gamma:e}, residuals = {res:?}");
        trace.sweeps.push(rec);
        prev = next;
        if !gamma.is_finite() {
            break;
        }
        if gamma < opts.tol {
            trace.converged = true;
            break;
        }
    }
    info!(
        "picard: {} sweeps, converged = {}, last gamma = {:e}",
        trace.sweeps.len(),
        trace.converged,
        trace.last_gamma().unwrap_or(0.0)
    );
    Ok((prev, trace))
}

/// `picard_solve`, halving the horizon after each non-convergent attempt.
pub fn picard_solve_with_retries(
    initial: &State,
    spec: &ModelSpec,
    reg: &RegularizationParams,
    opts: &PicardOptions,
    max_retries: usize,
) -> Result<(Trajectory, IterationTrace)> {
    let mut o = *opts;
    let mut attempt = 0;
    loop {
        let outcome = picard_solve(initial, spec, reg, &o);
        let retry = match &outcome {
            Ok((_, trace)) => !trace.converged,
            Err(Error::Diverged { .. }) | Err(Error::Cfl { .. }) => true,
            Err(_) => false,
        };
        let halved = 0.5 * o.horizon;
        let whole = (halved / o.dt).round() * o.dt;
        if !retry || attempt >= max_retries || whole < 2.0 * o.dt {
            return outcome;
        }
        warn!("no convergence at horizon {}; retrying with {}", o.horizon, whole);
        o.horizon = whole;
        attempt += 1;
    }
}

/// Lifted datum `phi_0 + delta` with its `psi`.
pub fn lift(
    phi0: &ScalarField,
    u0: &VectorField,
    delta: f64,
    spec: &ModelSpec,
    reg: &RegularizationParams,
) -> Result<State> {
    let lifted = phi0.map(|v| v.max(0.0) + delta);
    let psi = if spec.variant().tracks_psi() {
        psi_from_phi(&lifted, spec, reg)
    } else {
        VectorField::zeros(phi0.grid())
    };
    State::new(lifted, psi, u0.clone(), 0.0)
}

#[derive(Debug, Clone)]
pub struct ContinuationMember {
    pub delta: f64,
    pub trajectory: Option<Trajectory>,
    pub trace: Option<IterationTrace>,
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub members: Vec<ContinuationMember>,
    /// `Gamma` between consecutive members.
    pub distances: Vec<f64>,
    pub complete: bool,
}

impl ContinuationReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.complete && self.distances.windows(2).all(|w| w[1] < w[0])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["delta", "converged", "sweeps", "distance_to_previous"])?;
        for (i, m) in self.members.iter().enumerate() {
            let d = if i == 0 {
                String::new()
            } else {
                self.distances.get(i - 1).map(|d| d.to_string()).unwrap_or_default()
            };
            w.write_record([
                m.delta.to_string(),
                m.trace.as_ref().is_some_and(|t| t.converged).to_string(),
                m.trace.as_ref().map_or(0, |t| t.sweeps.len()).to_string(),
                d,
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Solves for each lifted datum `phi_0 + delta` and measures the distance
/// between consecutive solutions.
pub fn delta_continuation(
    phi0: &ScalarField,
    u0: &VectorField,
    spec: &ModelSpec,
    reg: &RegularizationParams,
    deltas: &[f64],
    opts: &PicardOptions,
) -> Result<ContinuationReport> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::param("deltas", "need a nonempty list of positive deltas"));
    }
    if deltas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::param("deltas", "deltas must be nonincreasing"));
    }
    let mut members: Vec<ContinuationMember> = Vec::new();
    let mut distances = Vec::new();
    let mut complete = true;
    for &delta in deltas {
        let initial = lift(phi0, u0, delta, spec, reg)?;
        match picard_solve(&initial, spec, reg, opts) {
            Ok((traj, trace)) => {
                let ok = trace.converged;
                if let Some(prev) = members.last().and_then(|m| m.trajectory.as_ref()) {
                    distances.push(gamma_distance(prev, &traj)?);
                }
                members.push(ContinuationMember {
                    delta,
                    trajectory: Some(traj),
                    trace: Some(trace),
                });
                if !ok {
                    complete = false;
                    break;
                }
            }
            Err(e) if matches!(e, Error::Diverged { .. } | Error::Cfl { .. }) => {
                warn!("delta = {delta}: {e}");
                members.push(ContinuationMember {
                    delta,
                    trajectory: None,
                    trace: None,
                });
                complete = false;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ContinuationReport {
        members,
        distances,
        complete,
    })
}

/// Writes one line per sweep to `out` in a compact human-readable form.
pub fn print_trace(trace: &IterationTrace, mut out: impl Write) -> std::io::Result<()> {
    for s in &trace.sweeps {
        writeln!(
            out,
            "k={:>2}  gamma={:.3e}  res=({:.2e}, {:.2e}, {:.2e})",
            s.k, s.gamma_distance, s.residual_phi, s.residual_psi, s.residual_u
        )?;
    }
    writeln!(out, "converged: {}  horizon: {}", trace.converged, trace.t_star_used)
}
