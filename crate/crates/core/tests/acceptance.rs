//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Runs with a custom main so the verdict lines always reach the test log.

use std::f64::consts::TAU;
use std::fs;
use std::time::Instant;

use num_rational::Rational64;
use swe_core::app::stability::stability_experiment;
use swe_core::app::{preset_scenario, verify_driver, RunConfig, ScenarioParams, StabilityReport};
use swe_core::fields::{gradient, laplacian, partial, Spectrum};
use swe_core::inequality::{gn_theta, random_field, Exponent, Lcg64};
use swe_core::lame::lame_elliptic_solve;
use swe_core::model::{lame_apply, psi_from_phi, RegularizationParams};
use swe_core::monitors::{blowup_functionals, conservation_checks, BlowupReport, ConservationReport, DEFAULT_CEILING};
use swe_core::picard::{delta_continuation, picard_solve, IterationTrace, PicardOptions, Trajectory};
use swe_core::transport::{advance_phi, TransportOptions, VelocityHistory};
use swe_core::{Grid2D, ModelSpec, Result, ScalarField, State, Variant, VectorField};

type Verdict = Result<(bool, String)>;

struct Run {
    traj: Trajectory,
    trace: IterationTrace,
    cons: ConservationReport,
}

fn solve(p: &ScenarioParams, opts: &PicardOptions) -> Result<Run> {
    let (s0, reg) = p.initial_state()?;
    let (traj, trace) = picard_solve(&s0, &p.spec, &reg, opts)?;
    let cons = conservation_checks(&traj, &p.spec, &reg)?;
    Ok(Run { traj, trace, cons })
}

fn options(p: &ScenarioParams, dt: f64) -> PicardOptions {
    PicardOptions {
        horizon: p.time.horizon,
        dt,
        tol: 1e-8,
        max_sweeps: 10,
        ..Default::default()
    }
}

/// Blow-up reports from every run of the suite, with whether the run is a
/// healthy preset that must stay below the ceiling.
#[derive(Default)]
struct Monitors {
    reports: Vec<(String, BlowupReport, bool)>,
}

impl Monitors {
    fn add(&mut self, name: &str, traj: &Trajectory, spec: &ModelSpec, healthy: bool) -> Result<()> {
        let r = blowup_functionals(traj, spec, DEFAULT_CEILING)?;
        self.reports.push((name.to_string(), r, healthy));
        Ok(())
    }
}

// 1 ------------------------------------------------------------------------

fn gn_exponents() -> Verdict {
    let e = Exponent::int;
    let a = gn_theta(e(2), e(3), e(2))?;
    let b = gn_theta(e(2), e(6), e(2))?;
    let ok = a == Rational64::new(1, 3) && b == Rational64::new(2, 3);
    Ok((ok, format!("theta(2,3,2) = {a}, theta(2,6,2) = {b}")))
}

// 2 ------------------------------------------------------------------------

fn spectral_fidelity() -> Verdict {
    let g = Grid2D::new(64, TAU)?;
    let f = ScalarField::from_fn(g, |x, y| x.sin().exp() * (2.0 * y).cos());
    let fx = ScalarField::from_fn(g, |x, y| x.cos() * x.sin().exp() * (2.0 * y).cos());
    let fy = ScalarField::from_fn(g, |x, y| -2.0 * x.sin().exp() * (2.0 * y).sin());
    let fxx = ScalarField::from_fn(g, |x, y| (x.cos().powi(2) - x.sin()) * x.sin().exp() * (2.0 * y).cos());
    let fxxy = ScalarField::from_fn(g, |x, y| {
        -2.0 * (x.cos().powi(2) - x.sin()) * x.sin().exp() * (2.0 * y).sin()
    });
    let lap = fxx.sub(&f.scale(4.0));
    let grad = gradient(&f);
    let err = [
        grad.comp(0).sub(&fx).sup_abs(),
        grad.comp(1).sub(&fy).sup_abs(),
        laplacian(&f).sub(&lap).sup_abs(),
        partial(&f, 2, 1).sub(&fxxy).sup_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let physical = (f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_area()).sqrt();
    let spectral = Spectrum::forward(&f).l2_norm();
    let parseval = (physical - spectral).abs() / physical;
    Ok((
        err < 1e-10 && parseval < 1e-10,
        format!("max derivative error {err:.2e} (< 1e-10), Parseval relative gap {parseval:.2e} (< 1e-10)"),
    ))
}

// 3 ------------------------------------------------------------------------

fn lame_solver() -> Verdict {
    let g = Grid2D::new(64, TAU)?;
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = Lcg64::new(0xACCE_u64.wrapping_add(i));
        let u = VectorField::new(random_field(g, &mut rng), random_field(g, &mut rng))?;
        let (alpha, beta) = if i % 2 == 0 { (1.0, 0.5) } else { (1.0, -1.0) };
        let back = lame_elliptic_solve(&lame_apply(&u, alpha, beta), alpha, beta)?;
        worst = worst.max(back.sub(&u).sup_abs() / u.sup_abs());
    }
    let u = VectorField::from_fn(g, |x, y| (y.sin(), x.sin()));
    let rec = lame_elliptic_solve(&u, 1.0, 0.0)?.sub(&u).sup_abs();
    Ok((
        worst < 1e-10 && rec < 1e-8,
        format!("round trip on 50 fields {worst:.2e} (< 1e-10), manufactured recovery {rec:.2e} (< 1e-8)"),
    ))
}

// 4 ------------------------------------------------------------------------

fn translation_error(n: usize, dt: f64) -> Result<f64> {
    let g = Grid2D::new(n, TAU)?;
    let c = (1.0, 0.5);
    let v = VectorField::constant(g, c);
    let spec = ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ)?;
    let profile = |x: f64, y: f64| x.sin().exp() * (2.0 + y.cos());
    let mut phi = ScalarField::from_fn(g, profile);
    let horizon = 0.5;
    let steps = (horizon / dt).round() as usize;
    for k in 0..steps {
        let (s, t) = (k as f64 * dt, (k + 1) as f64 * dt);
        let h = VelocityHistory::steady(&v, s, t)?;
        phi = advance_phi(&phi, &h, s, t, &spec, TransportOptions::default())?;
    }
    let exact = ScalarField::from_fn(g, |x, y| profile(x - c.0 * horizon, y - c.1 * horizon));
    Ok(phi.sub(&exact).sup_abs())
}

fn transport_accuracy() -> Verdict {
    let coarse = translation_error(128, 1e-3)?;
    let fine = translation_error(256, 5e-4)?;
    let drop = coarse / fine;
    Ok((
        coarse < 1e-3 && drop >= 4.0,
        format!("L-inf error {coarse:.2e} (< 1e-3), refined {fine:.2e}, drop {drop:.1}x (>= 4)"),
    ))
}

// 5, 6, 7 --------------------------------------------------------------------

fn psi_discipline(run: &Run) -> Verdict {
    let c = &run.cons;
    Ok((
        c.psi_curl_defect < 1e-4 && c.psi_phi_consistency < 5e-3,
        format!(
            "curl defect {:.2e} (< 1e-4), psi-phi consistency {:.2e} (< 5e-3) over t in [0, {}]",
            c.psi_curl_defect,
            c.psi_phi_consistency,
            run.traj.last().t
        ),
    ))
}

fn last_residual(trace: &IterationTrace) -> f64 {
    trace
        .sweeps
        .last()
        .map(|s| s.residual_phi.max(s.residual_psi).max(s.residual_u))
        .unwrap_or(f64::NAN)
}

fn picard_contraction(run: &Run, refined: &Run, tol: f64) -> Verdict {
    let ratios = run.trace.ratios();
    let worst = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let sweeps = run.trace.sweeps.len();
    let res = last_residual(&run.trace);
    let floor = last_residual(&refined.trace);
    let agree = floor / res;
    let ok = run.trace.converged
        && sweeps <= 10
        && worst <= 0.5
        && refined.trace.converged
        && res < 10.0 * tol + 2.0 * floor
        && (0.5..=2.0).contains(&agree);
    Ok((
        ok,
        format!(
            "{sweeps} sweeps, max ratio {worst:.3} (<= 0.5), residual {res:.3e} vs dt/2 floor {floor:.3e} (ratio {agree:.3}, within 2x)"
        ),
    ))
}

fn conservation(run: &Run) -> Verdict {
    let rate = run.cons.mass_drift_rate();
    Ok((rate < 1e-6, format!("mass drift {rate:.3e} per unit time (< 1e-6)")))
}

// 8 ------------------------------------------------------------------------

fn continuation(mon: &mut Monitors) -> Verdict {
    let p = preset_scenario("near-vacuum")?;
    let phi0 = p.phi0()?;
    let reg = p.regularization(&phi0)?;
    let deltas = [1e-2, 5e-3, 2.5e-3];
    let rep = delta_continuation(&phi0, &p.u0()?, &p.spec, &reg, &deltas, &options(&p, p.time.dt))?;
    for m in &rep.members {
        if let Some(t) = &m.trajectory {
            mon.add(&format!("near-vacuum delta={}", m.delta), t, &p.spec, true)?;
        }
    }
    Ok((
        rep.strictly_decreasing(),
        format!(
            "distances {:?}, complete = {}",
            rep.distances.iter().map(|d| format!("{d:.4e}")).collect::<Vec<_>>(),
            rep.complete
        ),
    ))
}

// 9 ------------------------------------------------------------------------

fn model_equivalence(mon: &mut Monitors) -> Verdict {
    let mut p = preset_scenario("smooth-small")?;
    p.grid.n = 64;
    p.time.horizon = 0.1;
    let a = p.spec.a();
    let opts = options(&p, p.time.dt);
    p.spec = ModelSpec::shallow_water(Variant::MarcheBN, a)?;
    let marche = solve(&p, &opts)?;
    p.spec = ModelSpec::new(2.0, a, 1.0, 2.0, Variant::FullQ)?;
    let full = solve(&p, &opts)?;
    let same = marche.traj == full.traj;
    mon.add(
        "MarcheBN",
        &marche.traj,
        &ModelSpec::shallow_water(Variant::MarcheBN, a)?,
        true,
    )?;

    let v = preset_scenario("vacuum-laplacian")?;
    let h0_min = v.profile.density(v.grid()?).min();
    let lap = solve(&v, &options(&v, v.time.dt))?;
    mon.add("vacuum-laplacian", &lap.traj, &v.spec, true)?;
    let pos = lap.cons.positivity_min;
    Ok((
        same && h0_min == 0.0 && lap.trace.converged && pos >= 0.0,
        format!(
            "MarcheBN == FullQ(1, 2, 2) bit-exact: {same}; LaplacianOnly with min h0 = {h0_min} converged = {}, positivity_min = {pos:.3e}",
            lap.trace.converged
        ),
    ))
}

// 10 -----------------------------------------------------------------------

fn stability(mon: &mut Monitors) -> Verdict {
    let p = preset_scenario("stability-pair")?;
    let eps = p.perturbation;
    let run = |eps: f64, dt: f64| -> Result<StabilityReport> {
        let (a, b, reg) = p.perturbed_pair(eps)?;
        stability_experiment((&a, &b), &p.spec, &reg, &options(&p, dt))
    };
    let full = run(eps, p.time.dt)?;
    let half = run(0.5 * eps, p.time.dt)?;
    let refined = run(eps, 0.5 * p.time.dt)?;
    {
        let (a, _, reg) = p.perturbed_pair(eps)?;
        let (traj, _) = picard_solve(&a, &p.spec, &reg, &options(&p, p.time.dt))?;
        mon.add("stability-pair", &traj, &p.spec, true)?;
    }
    let scale = full.final_distance() / half.final_distance();
    let c = full.final_c_meas();
    let c_ref = refined.final_c_meas();
    let drift = (c_ref - c).abs() / c;
    let complete = !(full.partial || half.partial || refined.partial);
    Ok((
        complete && (scale - 2.0).abs() <= 0.4 && c.is_finite() && drift <= 0.2,
        format!("distance ratio eps/(eps/2) = {scale:.4} (2.0 +- 0.4), C_meas {c:.5} vs dt/2 {c_ref:.5} (change {:.2}% <= 20%)", 100.0 * drift),
    ))
}

// 11 -----------------------------------------------------------------------

fn blowup_monitors(mon: &mut Monitors) -> Verdict {
    // A steady Gaussian vortex has a rotational velocity gradient at its core.
    let g = Grid2D::new(64, 16.0)?;
    let vortex = VectorField::from_fn(g, |x, y| {
        let e = (-(x * x + y * y) / 2.0).exp();
        (-y * e, x * e)
    });
    let sv = ModelSpec::shallow_water(Variant::SaintVenant, 1.0)?;
    let phi = ScalarField::constant(g, 1.0);
    let reg = RegularizationParams::for_initial(&phi, 0.0)?;
    let s0 = State::new(phi.clone(), psi_from_phi(&phi, &sv, &reg), vortex, 0.0)?;
    let opts = PicardOptions {
        horizon: 0.05,
        dt: 1e-3,
        tol: 1e-8,
        max_sweeps: 10,
        ..Default::default()
    };
    let (traj, _) = picard_solve(&s0, &sv, &reg, &opts)?;
    let grad_u = blowup_functionals(&traj, &sv, DEFAULT_CEILING)?;
    let deformation = blowup_functionals(
        &traj,
        &ModelSpec::new(2.0, 1.0, 1.0, 0.0, Variant::FullQ)?,
        DEFAULT_CEILING,
    )?;
    let gap = 1.0 - deformation.sup_gradient[0] / grad_u.sup_gradient[0];
    mon.add("SaintVenant vortex", &traj, &sv, true)?;

    let mut lines = Vec::new();
    let mut ok = grad_u.uses_full_gradient && !deformation.uses_full_gradient && gap > 0.1;
    for (name, r, healthy) in &mon.reports {
        let mono = r.is_nondecreasing();
        let bounded = !healthy || (r.flagged_at.is_none() && r.max_value().is_finite());
        ok &= mono && bounded;
        if !mono || !bounded {
            lines.push(format!("{name}: nondecreasing {mono}, bounded {bounded}"));
        }
    }
    Ok((
        ok,
        format!(
            "{} runs monotone and bounded{}; SaintVenant sup|grad U| {:.4} vs sup|D(U)| {:.4} (gap {:.0}%)",
            mon.reports.len(),
            if lines.is_empty() {
                String::new()
            } else {
                format!(" except {}", lines.join("; "))
            },
            grad_u.sup_gradient[0],
            deformation.sup_gradient[0],
            100.0 * gap
        ),
    ))
}

// 12 -----------------------------------------------------------------------

fn inequality_lab() -> Verdict {
    let mut cfg = RunConfig::from_preset("smooth-small")?;
    cfg.seed = 12;
    cfg.lab.samples = 100;
    let dir = tempfile::tempdir().expect("temp dir");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = verify_driver(&cfg, &a)?;
    verify_driver(&cfg, &b)?;
    let mut same = true;
    for f in ["gn.csv", "commutator.csv", "lame.csv"] {
        same &= fs::read(a.join(f)).ok() == fs::read(b.join(f)).ok();
    }
    let reps = [&first.gn, &first.commutator, &first.lame];
    let finite = reps
        .iter()
        .all(|r| r.all_finite() && r.max_ratio().is_finite() && r.rows.len() + r.skipped == 100);
    Ok((
        finite && same,
        format!(
            "max ratios {}; bit-identical rerun: {same}",
            reps.iter()
                .map(|r| format!("{} {:.4e}", r.name, r.max_ratio()))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}

// --------------------------------------------------------------------------

fn report(id: usize, name: &str, clock: Instant, v: Verdict, failures: &mut Vec<usize>) {
    let (ok, detail) = match v {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if !ok {
        failures.push(id);
    }
    println!(
        "{} criterion {id:>2} {name:<22} [{:>6.1}s] {detail}",
        if ok { "PASS" } else { "FAIL" },
        clock.elapsed().as_secs_f64()
    );
}

fn main() {
    // `cargo test -- --list` and filters are not supported; everything runs.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failures = Vec::new();
    let mut mon = Monitors::default();
    let suite = Instant::now();

    let t = Instant::now();
    report(1, "gn-exponents", t, gn_exponents(), &mut failures);
    let t = Instant::now();
    report(2, "spectral-fidelity", t, spectral_fidelity(), &mut failures);
    let t = Instant::now();
    report(3, "lame-solver", t, lame_solver(), &mut failures);
    let t = Instant::now();
    report(4, "transport", t, transport_accuracy(), &mut failures);

    let t = Instant::now();
    let p = preset_scenario("smooth-small").expect("preset");
    let main_run = solve(&p, &options(&p, p.time.dt));
    let refined = solve(&p, &options(&p, 0.5 * p.time.dt));
    if let Ok(r) = &main_run {
        if let Err(e) = mon.add("smooth-small", &r.traj, &p.spec, true) {
            println!("note: monitors on smooth-small failed: {e}");
        }
    }
    let shared = |f: &dyn Fn(&Run) -> Verdict| match &main_run {
        Ok(r) => f(r),
        Err(e) => Err(swe_core::Error::TrajectoryMismatch(format!(
            "smooth-small run failed: {e}"
        ))),
    };
    report(5, "psi-discipline", t, shared(&psi_discipline), &mut failures);
    let t = Instant::now();
    let contraction = match (&main_run, &refined) {
        (Ok(a), Ok(b)) => picard_contraction(a, b, 1e-8),
        (Err(e), _) | (_, Err(e)) => Err(swe_core::Error::TrajectoryMismatch(format!(
            "smooth-small run failed: {e}"
        ))),
    };
    report(6, "picard-contraction", t, contraction, &mut failures);
    let t = Instant::now();
    report(7, "conservation", t, shared(&conservation), &mut failures);
    drop(refined);

    let t = Instant::now();
    report(8, "delta-continuation", t, continuation(&mut mon), &mut failures);
    let t = Instant::now();
    report(9, "model-equivalence", t, model_equivalence(&mut mon), &mut failures);
    let t = Instant::now();
    report(10, "stability", t, stability(&mut mon), &mut failures);
    let t = Instant::now();
    report(11, "blowup-monitors", t, blowup_monitors(&mut mon), &mut failures);
    let t = Instant::now();
    report(12, "inequality-lab", t, inequality_lab(), &mut failures);

    println!(
        "acceptance: {} of 12 criteria passed in {:.0}s",
        12 - failures.len(),
        suite.elapsed().as_secs_f64()
    );
    if !failures.is_empty() {
        println!("failed: {failures:?}");
        std::process::exit(1);
    }
}
