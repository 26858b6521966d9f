//! Initial data and the named presets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid2D, ScalarField, VectorField};
use crate::model::{convert, Conversion, ModelSpec, RegularizationParams, State, Variant};

/// Density profile `rho_0` (the surface height for shallow water).
///
/// Radial profiles are evaluated at the folded coordinates
/// `(L/pi) sin(pi x / L)`, which agree with `x` near the origin and make the
/// datum smooth across the seam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// `amplitude / (1 + |x|^{2 sigma})`
    Remark12 {
        sigma: f64,
        amplitude: f64,
    },
    /// `amplitude * exp(-|x|^2 / (2 width^2))`
    Gaussian {
        width: f64,
        amplitude: f64,
    },
    Constant {
        level: f64,
    },
    /// `amplitude * b(|x| / radius)` with the standard `C^inf` bump `b`;
    /// exactly zero outside the radius.
    Bump {
        radius: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VelocityProfile {
    Zero,
    /// `amplitude * (sin(2 pi k2 x2 / L), sin(2 pi k1 x1 / L))`
    SingleMode {
        k: [i32; 2],
        amplitude: f64,
    },
    /// `amplitude * b(|x - center| / radius) * (1, 1) / sqrt 2`
    CompactBump {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub n: usize,
    pub box_length: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            n: 128,
            box_length: 8.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSettings {
    pub horizon: f64,
    pub dt: f64,
}

impl Default for TimeSettings {
    fn default() -> Self {
        Self { horizon: 0.5, dt: 1e-3 }
    }
}

/// Regularization as configured; `eps_vac = None` means relative to `max phi_0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegSettings {
    pub delta: f64,
    pub eps_vac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub profile: Profile,
    pub u0: VelocityProfile,
    pub grid: GridSettings,
    pub time: TimeSettings,
    pub spec: ModelSpec,
    pub reg: RegSettings,
    /// Amplitude of the `phi` perturbation used by stability experiments.
    pub perturbation: f64,
}

pub const PRESETS: [&str; 4] = ["smooth-small", "near-vacuum", "vacuum-laplacian", "stability-pair"];

/// `exp(1 - 1 / (1 - s^2))` on `|s| < 1`, zero elsewhere; `b(0) = 1`.
pub fn bump(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

fn folded(l: f64) -> impl Fn(f64) -> f64 {
    move |x| (l / PI) * (PI * x / l).sin()
}

impl Profile {
    /// Density on the grid.
    pub fn density(&self, grid: Grid2D) -> ScalarField {
        let fold = folded(grid.box_length());
        let r2 = move |x: f64, y: f64| fold(x).powi(2) + fold(y).powi(2);
        match *self {
            Profile::Remark12 { sigma, amplitude } => {
                ScalarField::from_fn(grid, |x, y| amplitude / (1.0 + r2(x, y).powf(sigma)))
            }
            Profile::Gaussian { width, amplitude } => {
                ScalarField::from_fn(grid, |x, y| amplitude * (-r2(x, y) / (2.0 * width * width)).exp())
            }
            Profile::Constant { level } => ScalarField::constant(grid, level),
            Profile::Bump { radius, amplitude } => {
                ScalarField::from_fn(grid, |x, y| amplitude * bump(r2(x, y).sqrt() / radius))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Remark12 { .. } => "remark12",
            Profile::Gaussian { .. } => "gaussian",
            Profile::Constant { .. } => "constant",
            Profile::Bump { .. } => "bump",
        }
    }

    /// Far-field value of `phi`.
    pub fn phi_inf(&self, spec: &ModelSpec) -> f64 {
        match *self {
            Profile::Constant { level } => level.max(0.0).powf(spec.half_gamma_minus_one()),
            _ => 0.0,
        }
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            Profile::Remark12 { sigma, amplitude } => {
                let bound = 1f64.max(1.0 / (spec.gamma() - 1.0));
                if !(sigma > bound) {
                    return Err(Error::param(
                        "profile.sigma",
                        format!(
                            "σ>max{{1, 1/(γ−1)}} is required; got σ = {sigma} with γ = {}",
                            spec.gamma()
                        ),
                    ));
                }
                positive("profile.amplitude", amplitude)
            }
            Profile::Gaussian { width, amplitude } => {
                positive("profile.width", width)?;
                positive("profile.amplitude", amplitude)
            }
            Profile::Constant { level } => positive("profile.level", level),
            Profile::Bump { radius, amplitude } => {
                positive("profile.radius", radius)?;
                positive("profile.amplitude", amplitude)
            }
        }
    }
}

impl VelocityProfile {
    pub fn field(&self, grid: Grid2D) -> VectorField {
        let l = grid.box_length();
        match *self {
            VelocityProfile::Zero => VectorField::zeros(grid),
            VelocityProfile::SingleMode { k, amplitude } => {
                let (k1, k2) = (2.0 * PI * k[0] as f64 / l, 2.0 * PI * k[1] as f64 / l);
                VectorField::from_fn(grid, |x, y| (amplitude * (k2 * y).sin(), amplitude * (k1 * x).sin()))
            }
            VelocityProfile::CompactBump {
                center,
                radius,
                amplitude,
            } => {
                let fold = folded(l);
                let c = amplitude * std::f64::consts::FRAC_1_SQRT_2;
                VectorField::from_fn(grid, |x, y| {
                    let r = (fold(x - center[0]).powi(2) + fold(y - center[1]).powi(2)).sqrt();
                    let b = c * bump(r / radius);
                    (b, b)
                })
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, "must be finite"))
            }
        };
        match *self {
            VelocityProfile::Zero => Ok(()),
            VelocityProfile::SingleMode { amplitude, .. } => finite("u0.amplitude", amplitude),
            VelocityProfile::CompactBump {
                center,
                radius,
                amplitude,
            } => {
                finite("u0.center", center[0])?;
                finite("u0.center", center[1])?;
                finite("u0.amplitude", amplitude)?;
                if radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("u0.radius", format!("must be positive, got {radius}")))
                }
            }
        }
    }
}

impl ScenarioParams {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.grid.n, self.grid.box_length)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid.box_length > 0.0) || !self.grid.box_length.is_finite() {
            return Err(Error::param(
                "grid.box_length",
                "box length must be positive and finite",
            ));
        }
        self.grid().map_err(|e| Error::param("grid.n", e.to_string()))?;
        if !(self.time.dt > 0.0) || !self.time.dt.is_finite() {
            return Err(Error::param(
                "time.dt",
                format!("dt > 0 is required, got {}", self.time.dt),
            ));
        }
        if !(self.time.horizon >= self.time.dt) || !self.time.horizon.is_finite() {
            return Err(Error::param(
                "time.horizon",
                format!(
                    "horizon ≥ dt is required, got horizon = {} and dt = {}",
                    self.time.horizon, self.time.dt
                ),
            ));
        }
        self.profile.validate(&self.spec)?;
        self.u0.validate()?;
        if !(self.reg.delta >= 0.0) || !self.reg.delta.is_finite() {
            return Err(Error::param(
                "regularization.delta",
                "delta must be finite and nonnegative",
            ));
        }
        if let Some(e) = self.reg.eps_vac {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::param("regularization.eps_vac", "eps_vac must be positive"));
            }
        }
        if !(self.perturbation >= 0.0) || !self.perturbation.is_finite() {
            return Err(Error::param(
                "stability.epsilon",
                "perturbation amplitude must be finite and nonnegative",
            ));
        }
        Ok(())
    }

    /// `phi_0` before any lift.
    pub fn phi0(&self) -> Result<ScalarField> {
        let rho = self.profile.density(self.grid()?);
        convert(&rho, Conversion::RhoToPhi, &self.spec)
    }

    pub fn u0(&self) -> Result<VectorField> {
        Ok(self.u0.field(self.grid()?))
    }

    pub fn regularization(&self, phi0: &ScalarField) -> Result<RegularizationParams> {
        match self.reg.eps_vac {
            Some(e) => RegularizationParams::new(self.reg.delta, e),
            None => RegularizationParams::for_initial(phi0, self.reg.delta),
        }
    }

    /// Initial state, lifted by `delta` when it is positive.
    pub fn initial_state(&self) -> Result<(State, RegularizationParams)> {
        let phi0 = self.phi0()?;
        let reg = self.regularization(&phi0)?;
        let phi = phi0.map(|v| v + self.reg.delta);
        Ok((State::from_phi(phi, self.u0()?, &self.spec, &reg)?, reg))
    }

    /// The initial state and a copy whose `phi` carries
    /// `epsilon cos(2 pi x1 / L) cos(2 pi x2 / L)`.
    pub fn perturbed_pair(&self, epsilon: f64) -> Result<(State, State, RegularizationParams)> {
        let (base, reg) = self.initial_state()?;
        let g = base.grid();
        let k = 2.0 * PI / g.box_length();
        let bump = ScalarField::from_fn(g, |x, y| epsilon * (k * x).cos() * (k * y).cos());
        let phi = base.phi.add(&bump);
        let other = State::from_phi(phi, base.u.clone(), &self.spec, &reg)?;
        Ok((base, other, reg))
    }
}

/// The named scenario presets.
pub fn preset_scenario(name: &str) -> Result<ScenarioParams> {
    let remark = Profile::Remark12 {
        sigma: 2.0,
        amplitude: 1.0,
    };
    let small_shear = VelocityProfile::SingleMode {
        k: [1, 1],
        amplitude: 0.005,
    };
    let full_q = ModelSpec::new(2.0, 0.002, 1.0, 0.0, Variant::FullQ)?;
    let coarse = GridSettings {
        n: 64,
        ..GridSettings::default()
    };
    let p = match name {
        "smooth-small" => ScenarioParams {
            profile: remark,
            u0: small_shear,
            grid: GridSettings::default(),
            time: TimeSettings::default(),
            spec: full_q,
            reg: RegSettings::default(),
            perturbation: 1e-3,
        },
        "near-vacuum" => ScenarioParams {
            profile: remark,
            u0: small_shear,
            grid: coarse,
            time: TimeSettings {
                horizon: 0.25,
                dt: 1e-3,
            },
            spec: full_q,
            reg: RegSettings::default(),
            perturbation: 1e-3,
        },
        "vacuum-laplacian" => ScenarioParams {
            profile: Profile::Bump {
                radius: 8.0,
                amplitude: 1.0,
            },
            u0: VelocityProfile::Zero,
            grid: coarse,
            time: TimeSettings { horizon: 0.1, dt: 1e-3 },
            spec: ModelSpec::shallow_water(Variant::LaplacianOnly, 0.1)?,
            reg: RegSettings::default(),
            perturbation: 1e-3,
        },
        "stability-pair" => ScenarioParams {
            profile: remark,
            u0: small_shear,
            grid: coarse,
            time: TimeSettings {
                horizon: 0.25,
                dt: 1e-3,
            },
            spec: full_q,
            reg: RegSettings::default(),
            perturbation: 1e-3,
        },
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.join(", "),
            })
        }
    };
    Ok(p)
}
