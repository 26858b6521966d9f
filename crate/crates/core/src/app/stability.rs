//! Continuous dependence on the data, measured on a pair of runs.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{norm, NormSpec};
use crate::model::{ModelSpec, RegularizationParams, State};
use crate::picard::{picard_solve, PicardOptions, Trajectory};

/// Distance between two runs over time and its growth relative to `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `||phi_bar||_2 + |psi_bar|_{L6 n D1} + ||u_bar||_2 + int_0^t |grad u_bar|_2^2`
    pub distance: Vec<f64>,
    /// `distance(t) / distance(0)`
    pub c_meas: Vec<f64>,
    pub converged: [bool; 2],
    /// Set when either run failed or did not converge.
    pub partial: bool,
}

impl StabilityReport {
    pub fn initial_distance(&self) -> f64 {
        self.distance.first().copied().unwrap_or(f64::NAN)
    }

    pub fn final_distance(&self) -> f64 {
        self.distance.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_c_meas(&self) -> f64 {
        self.c_meas.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max_c_meas(&self) -> f64 {
        self.c_meas.iter().copied().fold(f64::NAN, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "distance", "c_meas"])?;
        for ((t, d), c) in self.times.iter().zip(&self.distance).zip(&self.c_meas) {
            w.write_record([t.to_string(), d.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Pointwise-in-time parts of the distance; the dissipation integrand last.
fn level_terms(a: &State, b: &State) -> Result<(f64, f64)> {
    let phi = b.phi.sub(&a.phi);
    let psi = b.psi.sub(&a.psi);
    let u = b.u.sub(&a.u);
    let d = norm(&phi, NormSpec::Sobolev(2))?
        + norm(&psi, NormSpec::Lebesgue(6.0))?
        + norm(&psi, NormSpec::Seminorm { k: 1, r: 2.0 })?
        + norm(&u, NormSpec::Sobolev(2))?;
    let g = norm(&u, NormSpec::Seminorm { k: 1, r: 2.0 })?;
    Ok((d, g * g))
}

/// Distance series of two trajectories on the same time levels.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.len().min(b.len());
    let times: Vec<f64> = a.times()[..n].to_vec();
    if b.times()[..n] != times[..] {
        return Err(Error::TrajectoryMismatch("runs use different time levels".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut integral = 0.0;
    let mut prev_g = 0.0;
    for i in 0..n {
        let (d, g) = level_terms(&a.states[i], &b.states[i])?;
        if i > 0 {
            integral += 0.5 * (times[i] - times[i - 1]) * (g + prev_g);
        }
        prev_g = g;
        out.push(d + integral);
    }
    Ok((times, out))
}

fn solve(s: &State, spec: &ModelSpec, reg: &RegularizationParams, opts: &PicardOptions) -> Option<(Trajectory, bool)> {
    match picard_solve(s, spec, reg, opts) {
        Ok((traj, trace)) => Some((traj, trace.converged)),
        Err(e) => {
            warn!("stability run failed: {e}");
            None
        }
    }
}

/// Solves from both states and compares the runs level by level.
pub fn stability_experiment(
    pair: (&State, &State),
    spec: &ModelSpec,
    reg: &RegularizationParams,
    opts: &PicardOptions,
) -> Result<StabilityReport> {
    let (a, b) = pair;
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("stability pair lives on different grids".into()));
    }
    let ra = solve(a, spec, reg, opts);
    let rb = if a == b { ra.clone() } else { solve(b, spec, reg, opts) };
    let converged = [ra.as_ref().is_some_and(|r| r.1), rb.as_ref().is_some_and(|r| r.1)];
    let partial = !(converged[0] && converged[1]);
    let (times, distance) = match (&ra, &rb) {
        (Some((ta, _)), Some((tb, _))) => trajectory_distance(ta, tb)?,
        _ => {
            let (d, _) = level_terms(a, b)?;
            (vec![a.t], vec![d])
        }
    };
    let d0 = distance[0];
    let c_meas = distance
        .iter()
        .map(|d| {
            if d0 > 0.0 {
                d / d0
            } else if *d == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(StabilityReport {
        times,
        distance,
        c_meas,
        converged,
        partial,
    })
}
