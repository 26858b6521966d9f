//! Fixtures shared by the kernel benchmarks.

use swe_core::app::{preset_scenario, ScenarioParams};
use swe_core::inequality::{random_field, Lcg64};
use swe_core::model::RegularizationParams;
use swe_core::picard::PicardOptions;
use swe_core::{Grid2D, Result, ScalarField, State, VectorField};

/// Grid sizes the benchmarks sweep over.
pub const SIZES: [usize; 3] = [32, 64, 128];

pub fn smooth_scalar(n: usize) -> Result<ScalarField> {
    let g = Grid2D::new(n, std::f64::consts::TAU)?;
    Ok(ScalarField::from_fn(g, |x, y| x.sin().exp() * (2.0 * y).cos()))
}

pub fn random_vector(n: usize, seed: u64) -> Result<VectorField> {
    let g = Grid2D::new(n, std::f64::consts::TAU)?;
    let mut rng = Lcg64::new(seed);
    VectorField::new(random_field(g, &mut rng), random_field(g, &mut rng))
}

/// The smooth-small scenario on an `n`-grid over a short horizon.
pub fn short_scenario(n: usize, horizon: f64) -> Result<(ScenarioParams, State, RegularizationParams, PicardOptions)> {
    let mut p = preset_scenario("smooth-small")?;
    p.grid.n = n;
    p.time.horizon = horizon;
    let (s0, reg) = p.initial_state()?;
    let opts = PicardOptions {
        horizon,
        dt: p.time.dt,
        tol: 1e-8,
        max_sweeps: 10,
        ..Default::default()
    };
    Ok((p, s0, reg, opts))
}
