//! Diagnostics evaluated along a trajectory: blow-up functionals,
//! conservation defects and the norm ladder with its implied constants.
//!
//! Time derivatives are reconstructed from the stored levels by centered
//! differences; the two end levels use one-sided differences and are less
//! accurate. `L^inf` quantities are grid maxima.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    norm, seminorm_tensor_sup, sym_gradient, velocity_gradient, NormSpec, ScalarField, Spectrum, VectorField,
};
use crate::model::{convert, curl_defect, psi_from_phi, Conversion, ModelSpec, RegularizationParams};
use crate::picard::Trajectory;

/// Default ceiling above which a functional is flagged.
pub const DEFAULT_CEILING: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub times: Vec<f64>,
    pub psi_l6: Vec<f64>,
    /// `sup |D(u)|`, or `sup |grad u|` for the Saint-Venant model.
    pub sup_gradient: Vec<f64>,
    pub cum_du_inf: Vec<f64>,
    pub cum_du_inf_d16: Vec<f64>,
    pub uses_full_gradient: bool,
    pub ceiling: f64,
    /// First time any functional exceeds the ceiling.
    pub flagged_at: Option<f64>,
}

impl BlowupReport {
    pub fn is_nondecreasing(&self) -> bool {
        let mono = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
        mono(&self.cum_du_inf) && mono(&self.cum_du_inf_d16)
    }

    pub fn max_value(&self) -> f64 {
        self.psi_l6
            .iter()
            .chain(&self.cum_du_inf_d16)
            .fold(0.0, |m, v| f64::max(m, *v))
    }
}

fn cumulative_trapezoid(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..f.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (f[i] + f[i - 1]);
        out.push(acc);
    }
    out
}

/// `|psi|_6`, `int sup|D(u)|` and `int (sup|D(u)| + |D(u)|_{D^{1,6}})`.
pub fn blowup_functionals(traj: &Trajectory, spec: &ModelSpec, ceiling: f64) -> Result<BlowupReport> {
    let full = spec.variant().uses_full_gradient();
    let times = traj.times();
    let mut psi_l6 = Vec::with_capacity(traj.len());
    let mut sup = Vec::with_capacity(traj.len());
    let mut d16 = Vec::with_capacity(traj.len());
    for s in &traj.states {
        let t = if full {
            velocity_gradient(&s.u)
        } else {
            sym_gradient(&s.u)
        };
        psi_l6.push(norm(&s.psi, NormSpec::Lebesgue(6.0))?);
        let m = seminorm_tensor_sup(&t);
        sup.push(m);
        d16.push(m + norm(&t, NormSpec::Seminorm { k: 1, r: 6.0 })?);
    }
    let cum_du_inf = cumulative_trapezoid(&times, &sup);
    let cum_du_inf_d16 = cumulative_trapezoid(&times, &d16);
    let flagged_at = (0..times.len())
        .find(|&i| psi_l6[i] > ceiling || cum_du_inf_d16[i] > ceiling || !psi_l6[i].is_finite())
        .map(|i| times[i]);
    Ok(BlowupReport {
        times,
        psi_l6,
        sup_gradient: sup,
        cum_du_inf,
        cum_du_inf_d16,
        uses_full_gradient: full,
        ceiling,
        flagged_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    /// `|int rho(t) - int rho(0)| / int rho(0)` per level.
    pub mass_drift_series: Vec<f64>,
    pub curl_defect_series: Vec<f64>,
    pub consistency_series: Vec<f64>,
    pub min_phi_series: Vec<f64>,
    pub mass_drift: f64,
    pub psi_curl_defect: f64,
    pub psi_phi_consistency: f64,
    pub positivity_min: f64,
}

impl ConservationReport {
    /// Final mass drift divided by the elapsed time.
    pub fn mass_drift_rate(&self) -> f64 {
        let span = self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0);
        if span > 0.0 {
            self.mass_drift / span
        } else {
            0.0
        }
    }
}

/// Mass drift, curl defect of `psi`, `|psi - psi(phi)|_2` and `min phi`.
/// Models without a `psi` equation report zero for the two `psi` entries.
pub fn conservation_checks(
    traj: &Trajectory,
    spec: &ModelSpec,
    reg: &RegularizationParams,
) -> Result<ConservationReport> {
    let tracks = spec.variant().tracks_psi();
    let mass = |phi: &ScalarField| -> Result<f64> { Ok(convert(phi, Conversion::PhiToRho, spec)?.integral()) };
    let m0 = mass(&traj.first().phi)?;
    let mut out = ConservationReport {
        times: traj.times(),
        mass_drift_series: Vec::new(),
        curl_defect_series: Vec::new(),
        consistency_series: Vec::new(),
        min_phi_series: Vec::new(),
        mass_drift: 0.0,
        psi_curl_defect: 0.0,
        psi_phi_consistency: 0.0,
        positivity_min: f64::INFINITY,
    };
    for s in &traj.states {
        let drift = if m0 > 0.0 { (mass(&s.phi)? - m0).abs() / m0 } else { 0.0 };
        let (curl, cons) = if tracks {
            let want = psi_from_phi(&s.phi, spec, reg);
            (curl_defect(&s.psi), norm(&s.psi.sub(&want), NormSpec::Lebesgue(2.0))?)
        } else {
            (0.0, 0.0)
        };
        let min = s.phi.min();
        out.mass_drift_series.push(drift);
        out.curl_defect_series.push(curl);
        out.consistency_series.push(cons);
        out.min_phi_series.push(min);
        out.mass_drift = out.mass_drift.max(drift);
        out.psi_curl_defect = out.psi_curl_defect.max(curl);
        out.psi_phi_consistency = out.psi_phi_consistency.max(cons);
        out.positivity_min = out.positivity_min.min(min);
    }
    Ok(out)
}

pub fn write_monitor_csv(path: &Path, blowup: &BlowupReport, cons: &ConservationReport) -> Result<()> {
    if blowup.times.len() != cons.times.len() {
        return Err(Error::TrajectoryMismatch("monitor series lengths differ".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t",
        "psi_l6",
        "cum_Du_inf",
        "cum_Du_inf_d16",
        "mass_drift",
        "curl_defect",
        "consistency",
        "min_phi",
    ])?;
    for i in 0..blowup.times.len() {
        w.write_record(
            [
                blowup.times[i],
                blowup.psi_l6[i],
                blowup.cum_du_inf[i],
                blowup.cum_du_inf_d16[i],
                cons.mass_drift_series[i],
                cons.curl_defect_series[i],
                cons.consistency_series[i],
                cons.min_phi_series[i],
            ]
            .map(|v| v.to_string()),
        )?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One line of the norm ladder: `sup_t (...) + int_0^T (...)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LadderGroup {
    pub sup_part: f64,
    pub integral_part: f64,
}

impl LadderGroup {
    pub fn total(&self) -> f64 {
        self.sup_part + self.integral_part
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CLadderReport {
    /// Six groups: three `u` energy levels, the time-weighted `u` group, `phi`, `psi`.
    pub groups: [LadderGroup; 6],
    pub c0: f64,
    /// Smallest `c_1..c_4` for which each line holds with `c_0 <= c_1 <= ...`.
    pub c: [f64; 4],
    /// Generic constants `C >= 1` implied by `c_1 = C^{1/2} c_0`,
    /// `c_2 = C^2 c_0^{5/2}`, `c_3 = C^{23/4} c_0^{25/4}`, `c_4 = C^{71/4} c_0^{75/4}`.
    pub implied_generic: [f64; 4],
    /// `(power of C, power of c_0)` for `c_1..c_4`.
    pub exponent_chain: [(f64, f64); 4],
    pub t_star: f64,
    pub phi_inf: f64,
    /// Whether the end levels used one-sided time differences.
    pub endpoint_one_sided: bool,
}

impl CLadderReport {
    pub fn is_finite(&self) -> bool {
        self.groups.iter().all(|g| g.total().is_finite())
            && self.c0.is_finite()
            && self.c.iter().all(|v| v.is_finite())
            && self.implied_generic.iter().all(|v| v.is_finite())
    }
}

/// Squared seminorms `|f|_{D^k}^2` for `k = 0..=max_k` by Parseval.
fn seminorms_sq(f: &ScalarField, max_k: usize) -> Vec<f64> {
    let g = f.grid();
    let s = Spectrum::forward(f);
    let w = g.cell_area() / g.len() as f64;
    let mut out = vec![0.0; max_k + 1];
    for (k, c) in Spectrum::wavevectors(g).iter().zip(s.coeffs()) {
        let kk = k.0 * k.0 + k.1 * k.1;
        let a = c.norm_sqr();
        let mut p = 1.0;
        for o in out.iter_mut() {
            *o += p * a;
            p *= kk;
        }
    }
    out.iter_mut().for_each(|v| *v *= w);
    out
}

fn vec_seminorms_sq(v: &VectorField, max_k: usize) -> Vec<f64> {
    let a = seminorms_sq(v.comp(0), max_k);
    let b = seminorms_sq(v.comp(1), max_k);
    a.iter().zip(&b).map(|(x, y)| x + y).collect()
}

/// `||f||_s^2` from the seminorm list.
fn sobolev_sq(semi: &[f64], s: usize) -> f64 {
    semi[..=s].iter().sum()
}

trait Levels: Sized {
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, c: f64) -> Self;
}

impl Levels for ScalarField {
    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn times(&self, c: f64) -> Self {
        self.scale(c)
    }
}

impl Levels for VectorField {
    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn times(&self, c: f64) -> Self {
        self.scale(c)
    }
}

/// First difference on uniformly spaced levels.
fn time_derivative<T: Levels>(levels: &[&T], dt: f64, i: usize) -> T {
    let last = levels.len() - 1;
    let (a, b) = match i {
        0 => (0, 1),
        i if i == last => (last - 1, last),
        i => (i - 1, i + 1),
    };
    levels[b].minus(levels[a]).times(1.0 / ((b - a) as f64 * dt))
}

/// Second difference; the end levels reuse their neighbour's stencil.
fn second_derivative<T: Levels>(levels: &[&T], dt: f64, i: usize) -> T {
    let last = levels.len() - 1;
    let c = i.clamp(1, last - 1);
    let d = levels[c + 1].minus(levels[c]).minus(&levels[c].minus(levels[c - 1]));
    d.times(1.0 / (dt * dt))
}

/// `2 + phi_inf + |phi_0|_inf + ||phi_0 - phi_inf||_3 + |psi_0|_{L6+D1+D2} + ||u_0||_3`.
pub fn datum_constant(traj: &Trajectory, phi_inf: f64) -> Result<f64> {
    let s = traj.first();
    let dphi = s.phi.map(|v| v - phi_inf);
    let psi_mixed = norm(&s.psi, NormSpec::Lebesgue(6.0))?
        + norm(&s.psi, NormSpec::Seminorm { k: 1, r: 2.0 })?
        + norm(&s.psi, NormSpec::Seminorm { k: 2, r: 2.0 })?;
    Ok(2.0
        + phi_inf
        + s.phi.sup_abs()
        + sobolev_sq(&seminorms_sq(&dphi, 3), 3).sqrt()
        + psi_mixed
        + sobolev_sq(&vec_seminorms_sq(&s.u, 3), 3).sqrt())
}

/// Evaluates every functional of the norm ladder along `traj`.
pub fn c_ladder_report(traj: &Trajectory, _spec: &ModelSpec, phi_inf: f64) -> Result<CLadderReport> {
    if traj.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: traj.len(),
        });
    }
    let times = traj.times();
    let us: Vec<&VectorField> = traj.states.iter().map(|s| &s.u).collect();
    let phis: Vec<&ScalarField> = traj.states.iter().map(|s| &s.phi).collect();
    let psis: Vec<&VectorField> = traj.states.iter().map(|s| &s.psi).collect();

    // integrands and sup-terms per level
    let n = traj.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mut sup = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    let mut integ = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    for i in 0..n {
        let t = times[i] - times[0];
        let u = vec_seminorms_sq(us[i], 4);
        let ut_f = time_derivative(&us, dt, i);
        let utt_f = second_derivative(&us, dt, i);
        let ut = vec_seminorms_sq(&ut_f, 3);
        let utt = vec_seminorms_sq(&utt_f, 1);

        sup[0][i] = sobolev_sq(&u, 1);
        integ[0][i] = u[1] + u[2] + ut[0];
        sup[1][i] = u[2] + ut[0];
        integ[1][i] = u[3] + ut[1];
        sup[2][i] = u[3] + ut[1];
        integ[2][i] = u[4] + ut[2] + utt[0];
        sup[3][i] = t * ut[2] + t * u[4] + t * utt[0];
        integ[3][i] = t * utt[1] + t * ut[3];

        let phi = phis[i];
        let dphi = phi.map(|v| v - phi_inf);
        let phit = time_derivative(&phis, dt, i);
        let phitt = second_derivative(&phis, dt, i);
        let pt = seminorms_sq(&phit, 2);
        let ptt = seminorms_sq(&phitt, 1);
        sup[4][i] = phi.sup_abs().powi(2) + sobolev_sq(&seminorms_sq(&dphi, 3), 3) + sobolev_sq(&pt, 2) + ptt[0];
        integ[4][i] = sobolev_sq(&ptt, 1);

        let psi = psis[i];
        let psit = time_derivative(&psis, dt, i);
        let psitt = second_derivative(&psis, dt, i);
        let ps = vec_seminorms_sq(psi, 2);
        let mixed = norm(psi, NormSpec::Lebesgue(6.0))? + ps[1].sqrt() + ps[2].sqrt();
        sup[5][i] = psi.magnitude().sup_abs().powi(2) + mixed * mixed + sobolev_sq(&vec_seminorms_sq(&psit, 1), 1);
        integ[5][i] = vec_seminorms_sq(&psitt, 0)[0];
    }

    let mut groups = [LadderGroup::default(); 6];
    for g in 0..6 {
        groups[g] = LadderGroup {
            sup_part: sup[g].iter().fold(0.0, |m, v| f64::max(m, *v)),
            integral_part: *cumulative_trapezoid(&times, &integ[g]).last().expect("nonempty"),
        };
    }

    let c0 = datum_constant(traj, phi_inf)?;
    let g4max = groups[3].total().max(groups[4].total()).max(groups[5].total());
    let c1 = c0.max(groups[0].total().sqrt());
    let c2 = c1.max(groups[1].total().sqrt());
    let c3 = c2.max(groups[2].total().sqrt());
    let c4 = c3.max(g4max.sqrt());
    let chain = [
        (0.5, 1.0),
        (2.0, 2.5),
        (23.0 / 4.0, 25.0 / 4.0),
        (71.0 / 4.0, 75.0 / 4.0),
    ];
    let needs = [groups[0].total(), groups[1].total(), groups[2].total(), g4max];
    let mut implied = [1.0; 4];
    for i in 0..4 {
        let (pc, p0) = chain[i];
        implied[i] = (needs[i].sqrt() / c0.powf(p0)).powf(1.0 / pc).max(1.0);
    }
    let horizon = times[n - 1] - times[0];
    Ok(CLadderReport {
        groups,
        c0,
        c: [c1, c2, c3, c4],
        implied_generic: implied,
        exponent_chain: chain,
        t_star: horizon.min((1.0 + c3).powi(-8)),
        phi_inf,
        endpoint_one_sided: true,
    })
}

impl CLadderReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["quantity", "value"])?;
        for (i, g) in self.groups.iter().enumerate() {
            w.write_record([format!("G{}_sup", i + 1), g.sup_part.to_string()])?;
            w.write_record([format!("G{}_integral", i + 1), g.integral_part.to_string()])?;
        }
        w.write_record(["c0".to_string(), self.c0.to_string()])?;
        for (i, c) in self.c.iter().enumerate() {
            w.write_record([format!("c{}", i + 1), c.to_string()])?;
        }
        for (i, c) in self.implied_generic.iter().enumerate() {
            w.write_record([format!("C_from_c{}", i + 1), c.to_string()])?;
        }
        w.write_record(["t_star".to_string(), self.t_star.to_string()])?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Largest magnitude of `rho` and `u` within `cells` grid cells of the seam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarfieldReport {
    pub rho_seam: f64,
    pub u_seam: f64,
    pub tol: f64,
    pub within_tol: bool,
}

pub fn farfield_report(
    phi: &ScalarField,
    u: &VectorField,
    spec: &ModelSpec,
    cells: usize,
    tol: f64,
) -> Result<FarfieldReport> {
    let rho = convert(phi, Conversion::PhiToRho, spec)?;
    let rho_seam = rho.seam_sup(cells);
    let u_seam = u.magnitude().seam_sup(cells);
    Ok(FarfieldReport {
        rho_seam,
        u_seam,
        tol,
        within_tol: rho_seam <= tol && u_seam <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid2D;
    use crate::model::{State, Variant};
    use std::f64::consts::TAU;

    fn traj_of(n: usize, dt: f64, f: impl Fn(f64) -> State) -> Trajectory {
        Trajectory::new(
            (0..n)
                .map(|i| State {
                    t: i as f64 * dt,
                    ..f(i as f64 * dt)
                })
                .collect(),
        )
        .unwrap()
    }

    fn fullq() -> ModelSpec {
        ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ).unwrap()
    }

    #[test]
    fn zero_solution_has_zero_functionals() {
        let g = Grid2D::new(16, TAU).unwrap();
        let z = |_t: f64| State::new(ScalarField::zeros(g), VectorField::zeros(g), VectorField::zeros(g), 0.0).unwrap();
        let traj = traj_of(5, 0.1, z);
        let rep = blowup_functionals(&traj, &fullq(), DEFAULT_CEILING).unwrap();
        assert!(rep.cum_du_inf_d16.iter().chain(&rep.psi_l6).all(|v| *v == 0.0));
        let lad = c_ladder_report(&traj, &fullq(), 0.0).unwrap();
        assert!(lad.groups.iter().all(|g| g.total() == 0.0));
        assert_eq!(lad.c0, 2.0);
    }

    #[test]
    fn steady_shear_integrates_half() {
        let g = Grid2D::new(32, TAU).unwrap();
        let s = |_t: f64| {
            State::new(
                ScalarField::constant(g, 1.0),
                VectorField::zeros(g),
                VectorField::from_fn(g, |_, y| (y.sin(), 0.0)),
                0.0,
            )
            .unwrap()
        };
        let traj = traj_of(11, 0.05, s);
        let rep = blowup_functionals(&traj, &fullq(), DEFAULT_CEILING).unwrap();
        for (t, c) in rep.times.iter().zip(&rep.cum_du_inf) {
            assert!((c - 0.5 * t).abs() < 1e-12);
        }
        assert!(rep.is_nondecreasing());
        assert!(rep.flagged_at.is_none());
    }

    #[test]
    fn full_gradient_exceeds_deformation_on_rotation() {
        // Gaussian vortex: grad u is a pure rotation at the core
        let g = Grid2D::new(128, 16.0).unwrap();
        let u = VectorField::from_fn(g, |x, y| {
            let e = (-(x * x + y * y) / 2.0).exp();
            (-y * e, x * e)
        });
        let s = |_t: f64| State::new(ScalarField::constant(g, 1.0), VectorField::zeros(g), u.clone(), 0.0).unwrap();
        let traj = traj_of(3, 0.1, s);
        let sv = ModelSpec::shallow_water(Variant::SaintVenant, 1.0).unwrap();
        let a = blowup_functionals(&traj, &sv, DEFAULT_CEILING).unwrap();
        let b = blowup_functionals(&traj, &fullq(), DEFAULT_CEILING).unwrap();
        assert!(a.uses_full_gradient && !b.uses_full_gradient);
        assert!((a.sup_gradient[0] - 1.0).abs() < 1e-6);
        assert!(b.sup_gradient[0] < 0.5 * a.sup_gradient[0]);
        assert!(b.cum_du_inf[2] < a.cum_du_inf[2]);
    }

    #[test]
    fn ceiling_flags_without_failing() {
        let g = Grid2D::new(16, TAU).unwrap();
        let s = |_t: f64| {
            State::new(
                ScalarField::constant(g, 1.0),
                VectorField::zeros(g),
                VectorField::from_fn(g, |_, y| (50.0 * y.sin(), 0.0)),
                0.0,
            )
            .unwrap()
        };
        let traj = traj_of(5, 0.5, s);
        let rep = blowup_functionals(&traj, &fullq(), 10.0).unwrap();
        assert!(rep.flagged_at.is_some());
    }

    #[test]
    fn constant_phi_group_matches_hand_computation() {
        let g = Grid2D::new(16, 2.0).unwrap();
        let s = |_t: f64| {
            State::new(
                ScalarField::constant(g, 0.5),
                VectorField::zeros(g),
                VectorField::zeros(g),
                0.0,
            )
            .unwrap()
        };
        let traj = traj_of(4, 0.1, s);
        let lad = c_ladder_report(&traj, &fullq(), 0.0).unwrap();
        // |phi|_inf^2 + ||phi||_3^2 = 0.25 + 0.25 * area
        let want = 0.25 + 0.25 * 4.0;
        assert!((lad.groups[4].sup_part - want).abs() < 1e-12);
        assert_eq!(lad.groups[4].integral_part, 0.0);
        // c0 = 2 + 0.5 + ||phi||_3 = 2 + 0.5 + 0.5 * 2
        assert!((lad.c0 - 3.5).abs() < 1e-12);
    }

    #[test]
    fn ladder_sup_parts_ignore_time_order() {
        let g = Grid2D::new(16, TAU).unwrap();
        let s = |t: f64| {
            State::new(
                ScalarField::from_fn(g, |x, _| 1.0 + 0.1 * (x + t).sin()),
                VectorField::from_fn(g, |x, y| (0.2 * (y - t).cos(), 0.1 * x.sin() * (1.0 + t * t))),
                VectorField::from_fn(g, |x, y| ((x + 2.0 * t).sin(), (y * 2.0).cos() * (1.0 - t))),
                0.0,
            )
            .unwrap()
        };
        let traj = traj_of(7, 0.05, s);
        let a = c_ladder_report(&traj, &fullq(), 0.0).unwrap();
        let b = c_ladder_report(&traj.reversed(), &fullq(), 0.0).unwrap();
        for gi in [0, 1, 2, 4, 5] {
            assert_eq!(a.groups[gi].sup_part, b.groups[gi].sup_part, "group {}", gi + 1);
        }
    }

    #[test]
    fn static_run_conserves_everything() {
        let g = Grid2D::new(32, TAU).unwrap();
        let spec = fullq();
        let reg = RegularizationParams::new(0.0, 1e-10).unwrap();
        let phi = ScalarField::from_fn(g, |x, y| 1.0 + 0.3 * x.cos() * y.sin());
        let psi = psi_from_phi(&phi, &spec, &reg);
        let s = |_t: f64| State::new(phi.clone(), psi.clone(), VectorField::zeros(g), 0.0).unwrap();
        let traj = traj_of(4, 0.1, s);
        let c = conservation_checks(&traj, &spec, &reg).unwrap();
        assert_eq!(c.mass_drift, 0.0);
        assert!(c.psi_curl_defect < 1e-8);
        assert!(c.psi_phi_consistency == 0.0);
        assert!(c.positivity_min > 0.6);
    }

    #[test]
    fn monitor_csv_has_expected_columns() {
        let g = Grid2D::new(16, TAU).unwrap();
        let s = |_t: f64| {
            State::new(
                ScalarField::constant(g, 1.0),
                VectorField::zeros(g),
                VectorField::zeros(g),
                0.0,
            )
            .unwrap()
        };
        let traj = traj_of(3, 0.1, s);
        let spec = fullq();
        let reg = RegularizationParams::new(0.0, 1e-10).unwrap();
        let b = blowup_functionals(&traj, &spec, DEFAULT_CEILING).unwrap();
        let c = conservation_checks(&traj, &spec, &reg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_monitor_csv(&p, &b, &c).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t,psi_l6,cum_Du_inf,cum_Du_inf_d16,mass_drift,curl_defect,consistency,min_phi\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
