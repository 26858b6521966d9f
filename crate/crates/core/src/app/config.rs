//! TOML run configuration.
//!
//! A file names an optional `preset` and overrides any subset of its values.
//! Without a preset the base is `smooth-small`, whose grid and time settings
//! are the defaults (`n = 128`, `L = 8 pi`, `dt = 1e-3`, `horizon = 0.5`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::{
    preset_scenario, GridSettings, Profile, RegSettings, ScenarioParams, TimeSettings, VelocityProfile,
};
use crate::error::{Error, Result};
use crate::inequality::{CommutatorForm, Exponent, HolderTriple};
use crate::lame::Scheme;
use crate::model::{ModelSpec, Variant};
use crate::monitors::DEFAULT_CEILING;
use crate::picard::{PicardOptions, StepOptions};

pub const DEFAULT_PRESET: &str = "smooth-small";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSettings {
    pub ceiling: f64,
    pub farfield_tol: f64,
    pub farfield_cells: usize,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self {
            ceiling: DEFAULT_CEILING,
            farfield_tol: 1e-2,
            farfield_cells: 2,
        }
    }
}

/// Settings for `verify-inequalities`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabSettings {
    pub samples: usize,
    pub n: usize,
    pub box_length: f64,
    /// `(p, q, r)`
    pub gn: [Exponent; 3],
    pub commutator_s: u32,
    pub commutator_form: CommutatorForm,
    pub holder: HolderTriple,
    pub lame_k: u32,
    pub lame_q: u32,
}

impl Default for LabSettings {
    fn default() -> Self {
        Self {
            samples: 100,
            n: 64,
            box_length: 2.0 * std::f64::consts::PI,
            gn: [Exponent::int(2), Exponent::int(6), Exponent::int(2)],
            commutator_s: 1,
            commutator_form: CommutatorForm::Crossed,
            holder: HolderTriple::new(Exponent::int(2), Exponent::int(3), Exponent::int(6)).expect("valid triple"),
            lame_k: 0,
            lame_q: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioParams,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Horizon halvings allowed after a non-convergent attempt.
    pub max_retries: usize,
    pub step: StepOptions,
    pub output: PathBuf,
    pub monitors: MonitorSettings,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub lab: LabSettings,
}

impl RunConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        Ok(Self {
            scenario: preset_scenario(name)?,
            tol: 1e-8,
            max_sweeps: 10,
            max_retries: 4,
            step: StepOptions::default(),
            output: PathBuf::from("out"),
            monitors: MonitorSettings::default(),
            seed: 0,
            deltas: vec![1e-2, 5e-3, 2.5e-3],
            lab: LabSettings::default(),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.scenario.time.horizon
    }

    pub fn dt(&self) -> f64 {
        self.scenario.time.dt
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            horizon: self.horizon(),
            dt: self.dt(),
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            step: self.step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.seed > i64::MAX as u64 {
            return Err(Error::param("seed", format!("seed must not exceed {}", i64::MAX)));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::param("time.tol", "tolerance must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::param("time.max_sweeps", "at least one sweep is required"));
        }
        if self.step.substeps == 0 {
            return Err(Error::param("time.substeps", "at least one substep is required"));
        }
        if !(self.step.cfl_max > 0.0) {
            return Err(Error::param("time.cfl_max", "CFL limit must be positive"));
        }
        if !(self.monitors.ceiling > 0.0) {
            return Err(Error::param("monitors.ceiling", "ceiling must be positive"));
        }
        if !(self.monitors.farfield_tol > 0.0) {
            return Err(Error::param("monitors.farfield_tol", "tolerance must be positive"));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::param(
                "continuation.deltas",
                "need a nonempty list of positive deltas",
            ));
        }
        if self.deltas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("continuation.deltas", "deltas must be nonincreasing"));
        }
        let lab = &self.lab;
        if lab.samples == 0 {
            return Err(Error::param("inequalities.samples", "need at least one sample"));
        }
        crate::fields::Grid2D::new(lab.n, lab.box_length).map_err(|e| Error::param("inequalities.n", e.to_string()))?;
        crate::inequality::gn_theta(lab.gn[0], lab.gn[1], lab.gn[2])
            .map_err(|e| Error::param("inequalities.gn", e.to_string()))?;
        if !(1..=2).contains(&lab.commutator_s) {
            return Err(Error::param("inequalities.commutator_s", "order must be 1 or 2"));
        }
        if lab.lame_k > 1 {
            return Err(Error::param("inequalities.lame_k", "derivative order must be 0 or 1"));
        }
        if lab.lame_q != 2 && lab.lame_q != 6 {
            return Err(Error::param("inequalities.lame_q", "exponent must be 2 or 6"));
        }
        Ok(())
    }

    /// Full TOML text; loading it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from_config(self)).expect("config serializes")
    }

    /// Applies one override given as a dotted key (`model.gamma`) or a bare
    /// key that is unique across tables (`gamma`).
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        if key == "kind" || key.ends_with(".kind") {
            return Err(Error::param(
                key,
                "kinds cannot be overridden; write one config per kind",
            ));
        }
        let mut doc: toml::Table = toml::from_str(&self.to_toml()).expect("own output parses");
        let (table, field) = resolve_key(&doc, key)?;
        let parsed = parse_value(value);
        match table {
            Some(t) => {
                doc.get_mut(&t)
                    .and_then(|v| v.as_table_mut())
                    .expect("table exists")
                    .insert(field, parsed);
            }
            None => {
                doc.insert(field, parsed);
            }
        }
        parse_config(&toml::to_string(&doc).expect("table serializes"))
    }
}

fn parse_value(s: &str) -> toml::Value {
    let t = s.trim();
    if let Ok(i) = t.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = t.parse::<f64>() {
        return toml::Value::Float(f);
    }
    match t {
        "true" => toml::Value::Boolean(true),
        "false" => toml::Value::Boolean(false),
        _ => toml::Value::String(t.to_string()),
    }
}

const TABLES: [&str; 9] = [
    "grid",
    "time",
    "model",
    "regularization",
    "profile",
    "u0",
    "monitors",
    "stability",
    "inequalities",
];

fn resolve_key(doc: &toml::Table, key: &str) -> Result<(Option<String>, String)> {
    if let Some((t, f)) = key.split_once('.') {
        let table = doc
            .get(t)
            .and_then(|v| v.as_table())
            .ok_or_else(|| Error::param(key, format!("unknown table `{t}`")))?;
        if !table.contains_key(f) && !known_optional(t, f) {
            return Err(Error::param(key, format!("unknown key `{f}` in table `{t}`")));
        }
        return Ok((Some(t.to_string()), f.to_string()));
    }
    if doc.get(key).is_some_and(|v| !v.is_table()) {
        return Ok((None, key.to_string()));
    }
    let hits: Vec<&str> = TABLES
        .iter()
        .copied()
        .filter(|t| {
            doc.get(*t)
                .and_then(|v| v.as_table())
                .is_some_and(|tb| tb.contains_key(key))
        })
        .collect();
    match hits.as_slice() {
        [t] => Ok((Some(t.to_string()), key.to_string())),
        [] => Err(Error::param(key, "unknown parameter")),
        many => Err(Error::param(
            key,
            format!(
                "ambiguous; qualify it as one of {}",
                many.iter().map(|t| format!("{t}.{key}")).collect::<Vec<_>>().join(", ")
            ),
        )),
    }
}

fn known_optional(table: &str, field: &str) -> bool {
    matches!((table, field), ("regularization", "eps_vac"))
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let cfg = file.resolve()?;
    cfg.validate()?;
    Ok(cfg)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

// ---------------------------------------------------------------------------
// File layout. Every key is optional; missing keys keep the base value.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    grid: Option<GridTable>,
    time: Option<TimeTable>,
    model: Option<ModelTable>,
    regularization: Option<RegTable>,
    profile: Option<KindTable>,
    u0: Option<KindTable>,
    monitors: Option<MonitorTable>,
    stability: Option<StabilityTable>,
    continuation: Option<ContinuationTable>,
    inequalities: Option<LabTable>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridTable {
    n: Option<usize>,
    box_length: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeTable {
    horizon: Option<f64>,
    dt: Option<f64>,
    tol: Option<f64>,
    max_sweeps: Option<usize>,
    max_retries: Option<usize>,
    scheme: Option<Scheme>,
    substeps: Option<usize>,
    cfl_max: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelTable {
    variant: Option<String>,
    gamma: Option<f64>,
    #[serde(rename = "A")]
    a: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegTable {
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_vac: Option<f64>,
}

/// `[profile]` and `[u0]`: a `kind` plus the parameters that kind uses.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KindTable {
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<[i32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<[f64; 2]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonitorTable {
    ceiling: Option<f64>,
    farfield_tol: Option<f64>,
    farfield_cells: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityTable {
    epsilon: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContinuationTable {
    deltas: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabTable {
    samples: Option<usize>,
    n: Option<usize>,
    box_length: Option<f64>,
    /// `["p", "q", "r"]`, each an integer, `a/b` or `inf`.
    gn: Option<[String; 3]>,
    commutator_s: Option<u32>,
    commutator_form: Option<String>,
    /// `["r", "a", "b"]` with `1/r = 1/a + 1/b`.
    holder: Option<[String; 3]>,
    lame_k: Option<u32>,
    lame_q: Option<u32>,
}

fn exponent(field: &str, s: &str) -> Result<Exponent> {
    s.parse().map_err(|e: Error| Error::param(field, e.to_string()))
}

/// Rejects keys that do not belong to the chosen kind.
fn only(table: &KindTable, section: &str, kind: &str, allowed: &[&str]) -> Result<()> {
    let present = [
        ("sigma", table.sigma.is_some()),
        ("amplitude", table.amplitude.is_some()),
        ("width", table.width.is_some()),
        ("level", table.level.is_some()),
        ("radius", table.radius.is_some()),
        ("k", table.k.is_some()),
        ("center", table.center.is_some()),
    ];
    for (name, set) in present {
        if set && !allowed.contains(&name) {
            return Err(Error::param(
                format!("{section}.{name}"),
                format!("not a parameter of kind `{kind}`"),
            ));
        }
    }
    Ok(())
}

impl KindTable {
    fn profile(&self, base: Profile) -> Result<Profile> {
        let kind = self.kind.clone().unwrap_or_else(|| base.name().to_string());
        let same = kind == base.name();
        let p = match kind.as_str() {
            "remark12" => {
                only(self, "profile", &kind, &["sigma", "amplitude"])?;
                let (s0, a0) = match base {
                    Profile::Remark12 { sigma, amplitude } if same => (sigma, amplitude),
                    _ => (2.0, 1.0),
                };
                Profile::Remark12 {
                    sigma: self.sigma.unwrap_or(s0),
                    amplitude: self.amplitude.unwrap_or(a0),
                }
            }
            "gaussian" => {
                only(self, "profile", &kind, &["width", "amplitude"])?;
                let (w0, a0) = match base {
                    Profile::Gaussian { width, amplitude } if same => (width, amplitude),
                    _ => (1.0, 1.0),
                };
                Profile::Gaussian {
                    width: self.width.unwrap_or(w0),
                    amplitude: self.amplitude.unwrap_or(a0),
                }
            }
            "constant" => {
                only(self, "profile", &kind, &["level"])?;
                let l0 = match base {
                    Profile::Constant { level } if same => level,
                    _ => 1.0,
                };
                Profile::Constant {
                    level: self.level.unwrap_or(l0),
                }
            }
            "bump" => {
                only(self, "profile", &kind, &["radius", "amplitude"])?;
                let (r0, a0) = match base {
                    Profile::Bump { radius, amplitude } if same => (radius, amplitude),
                    _ => (8.0, 1.0),
                };
                Profile::Bump {
                    radius: self.radius.unwrap_or(r0),
                    amplitude: self.amplitude.unwrap_or(a0),
                }
            }
            other => {
                return Err(Error::param(
                    "profile.kind",
                    format!("unknown profile `{other}`; expected remark12, gaussian, constant or bump"),
                ))
            }
        };
        Ok(p)
    }

    fn velocity(&self, base: VelocityProfile) -> Result<VelocityProfile> {
        let base_kind = match base {
            VelocityProfile::Zero => "zero",
            VelocityProfile::SingleMode { .. } => "single-mode",
            VelocityProfile::CompactBump { .. } => "compact-bump",
        };
        let kind = self.kind.clone().unwrap_or_else(|| base_kind.to_string());
        let same = kind == base_kind;
        let v = match kind.as_str() {
            "zero" => {
                only(self, "u0", &kind, &[])?;
                VelocityProfile::Zero
            }
            "single-mode" => {
                only(self, "u0", &kind, &["k", "amplitude"])?;
                let (k0, a0) = match base {
                    VelocityProfile::SingleMode { k, amplitude } if same => (k, amplitude),
                    _ => ([1, 1], 0.005),
                };
                VelocityProfile::SingleMode {
                    k: self.k.unwrap_or(k0),
                    amplitude: self.amplitude.unwrap_or(a0),
                }
            }
            "compact-bump" => {
                only(self, "u0", &kind, &["center", "radius", "amplitude"])?;
                let (c0, r0, a0) = match base {
                    VelocityProfile::CompactBump {
                        center,
                        radius,
                        amplitude,
                    } if same => (center, radius, amplitude),
                    _ => ([0.0, 0.0], 4.0, 0.005),
                };
                VelocityProfile::CompactBump {
                    center: self.center.unwrap_or(c0),
                    radius: self.radius.unwrap_or(r0),
                    amplitude: self.amplitude.unwrap_or(a0),
                }
            }
            other => {
                return Err(Error::param(
                    "u0.kind",
                    format!("unknown velocity `{other}`; expected zero, single-mode or compact-bump"),
                ))
            }
        };
        Ok(v)
    }

    fn from_profile(p: &Profile) -> Self {
        let mut t = KindTable {
            kind: Some(p.name().to_string()),
            ..Default::default()
        };
        match *p {
            Profile::Remark12 { sigma, amplitude } => {
                t.sigma = Some(sigma);
                t.amplitude = Some(amplitude);
            }
            Profile::Gaussian { width, amplitude } => {
                t.width = Some(width);
                t.amplitude = Some(amplitude);
            }
            Profile::Constant { level } => t.level = Some(level),
            Profile::Bump { radius, amplitude } => {
                t.radius = Some(radius);
                t.amplitude = Some(amplitude);
            }
        }
        t
    }

    fn from_velocity(v: &VelocityProfile) -> Self {
        match *v {
            VelocityProfile::Zero => KindTable {
                kind: Some("zero".into()),
                ..Default::default()
            },
            VelocityProfile::SingleMode { k, amplitude } => KindTable {
                kind: Some("single-mode".into()),
                k: Some(k),
                amplitude: Some(amplitude),
                ..Default::default()
            },
            VelocityProfile::CompactBump {
                center,
                radius,
                amplitude,
            } => KindTable {
                kind: Some("compact-bump".into()),
                center: Some(center),
                radius: Some(radius),
                amplitude: Some(amplitude),
                ..Default::default()
            },
        }
    }
}

fn model_spec(table: Option<&ModelTable>, base: &ModelSpec) -> Result<ModelSpec> {
    let Some(m) = table else {
        return Ok(*base);
    };
    let variant = match &m.variant {
        Some(s) => Variant::parse(s).ok_or_else(|| {
            let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
            Error::param(
                "model.variant",
                format!("unknown variant `{s}`; expected one of {}", names.join(", ")),
            )
        })?,
        None => base.variant(),
    };
    let (g0, a0, b0) = if variant == base.variant() {
        (base.gamma(), base.alpha(), base.beta())
    } else {
        let (al, be) = variant.default_lame();
        (variant.forced_gamma().unwrap_or(base.gamma()), al, be)
    };
    let gamma = m.gamma.unwrap_or(g0);
    let alpha = m.alpha.unwrap_or(a0);
    let beta = m.beta.unwrap_or(b0);
    if !(alpha > 0.0 && alpha + beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
        let field = if alpha > 0.0 { "model.beta" } else { "model.alpha" };
        return Err(Error::param(
            field,
            format!("α>0, α+β≥0 is required for an elliptic Lamé operator; got α = {alpha}, β = {beta}"),
        ));
    }
    ModelSpec::new(gamma, m.a.unwrap_or(base.a()), alpha, beta, variant).map_err(|e| match e {
        Error::InvalidParameter { field, rule } => Error::InvalidParameter {
            field: format!("model.{field}"),
            rule,
        },
        e => e,
    })
}

impl ConfigFile {
    fn resolve(self) -> Result<RunConfig> {
        let preset = self.preset.as_deref().unwrap_or(DEFAULT_PRESET);
        let mut cfg = RunConfig::from_preset(preset)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.output {
            cfg.output = o;
        }
        let sc = &mut cfg.scenario;
        if let Some(g) = self.grid {
            sc.grid = GridSettings {
                n: g.n.unwrap_or(sc.grid.n),
                box_length: g.box_length.unwrap_or(sc.grid.box_length),
            };
        }
        if let Some(t) = self.time {
            sc.time = TimeSettings {
                horizon: t.horizon.unwrap_or(sc.time.horizon),
                dt: t.dt.unwrap_or(sc.time.dt),
            };
            cfg.tol = t.tol.unwrap_or(cfg.tol);
            cfg.max_sweeps = t.max_sweeps.unwrap_or(cfg.max_sweeps);
            cfg.max_retries = t.max_retries.unwrap_or(cfg.max_retries);
            cfg.step = StepOptions {
                scheme: t.scheme.unwrap_or(cfg.step.scheme),
                substeps: t.substeps.unwrap_or(cfg.step.substeps),
                cfl_max: t.cfl_max.unwrap_or(cfg.step.cfl_max),
            };
        }
        sc.spec = model_spec(self.model.as_ref(), &sc.spec)?;
        if let Some(r) = self.regularization {
            sc.reg = RegSettings {
                delta: r.delta.unwrap_or(sc.reg.delta),
                eps_vac: r.eps_vac.or(sc.reg.eps_vac),
            };
        }
        if let Some(p) = &self.profile {
            sc.profile = p.profile(sc.profile)?;
        }
        if let Some(u) = &self.u0 {
            sc.u0 = u.velocity(sc.u0)?;
        }
        if let Some(s) = self.stability {
            sc.perturbation = s.epsilon.unwrap_or(sc.perturbation);
        }
        if let Some(m) = self.monitors {
            cfg.monitors = MonitorSettings {
                ceiling: m.ceiling.unwrap_or(cfg.monitors.ceiling),
                farfield_tol: m.farfield_tol.unwrap_or(cfg.monitors.farfield_tol),
                farfield_cells: m.farfield_cells.unwrap_or(cfg.monitors.farfield_cells),
            };
        }
        if let Some(c) = self.continuation {
            if let Some(d) = c.deltas {
                cfg.deltas = d;
            }
        }
        if let Some(l) = self.inequalities {
            let lab = &mut cfg.lab;
            lab.samples = l.samples.unwrap_or(lab.samples);
            lab.n = l.n.unwrap_or(lab.n);
            lab.box_length = l.box_length.unwrap_or(lab.box_length);
            if let Some([p, q, r]) = &l.gn {
                lab.gn = [
                    exponent("inequalities.gn", p)?,
                    exponent("inequalities.gn", q)?,
                    exponent("inequalities.gn", r)?,
                ];
            }
            lab.commutator_s = l.commutator_s.unwrap_or(lab.commutator_s);
            if let Some(f) = &l.commutator_form {
                lab.commutator_form = match f.as_str() {
                    "crossed" => CommutatorForm::Crossed,
                    "aligned" => CommutatorForm::Aligned,
                    other => {
                        return Err(Error::param(
                            "inequalities.commutator_form",
                            format!("unknown form `{other}`; expected crossed or aligned"),
                        ))
                    }
                };
            }
            if let Some([r, a, b]) = &l.holder {
                lab.holder = HolderTriple::new(
                    exponent("inequalities.holder", r)?,
                    exponent("inequalities.holder", a)?,
                    exponent("inequalities.holder", b)?,
                )
                .map_err(|e| Error::param("inequalities.holder", e.to_string()))?;
            }
            lab.lame_k = l.lame_k.unwrap_or(lab.lame_k);
            lab.lame_q = l.lame_q.unwrap_or(lab.lame_q);
        }
        Ok(cfg)
    }

    fn from_config(c: &RunConfig) -> Self {
        let sc = &c.scenario;
        let spec = &sc.spec;
        let lab = &c.lab;
        ConfigFile {
            preset: None,
            seed: Some(c.seed),
            output: Some(c.output.clone()),
            grid: Some(GridTable {
                n: Some(sc.grid.n),
                box_length: Some(sc.grid.box_length),
            }),
            time: Some(TimeTable {
                horizon: Some(sc.time.horizon),
                dt: Some(sc.time.dt),
                tol: Some(c.tol),
                max_sweeps: Some(c.max_sweeps),
                max_retries: Some(c.max_retries),
                scheme: Some(c.step.scheme),
                substeps: Some(c.step.substeps),
                cfl_max: Some(c.step.cfl_max),
            }),
            model: Some(ModelTable {
                variant: Some(spec.variant().name().to_string()),
                gamma: Some(spec.gamma()),
                a: Some(spec.a()),
                alpha: Some(spec.alpha()),
                beta: Some(spec.beta()),
            }),
            regularization: Some(RegTable {
                delta: Some(sc.reg.delta),
                eps_vac: sc.reg.eps_vac,
            }),
            profile: Some(KindTable::from_profile(&sc.profile)),
            u0: Some(KindTable::from_velocity(&sc.u0)),
            monitors: Some(MonitorTable {
                ceiling: Some(c.monitors.ceiling),
                farfield_tol: Some(c.monitors.farfield_tol),
                farfield_cells: Some(c.monitors.farfield_cells),
            }),
            stability: Some(StabilityTable {
                epsilon: Some(sc.perturbation),
            }),
            continuation: Some(ContinuationTable {
                deltas: Some(c.deltas.clone()),
            }),
            inequalities: Some(LabTable {
                samples: Some(lab.samples),
                n: Some(lab.n),
                box_length: Some(lab.box_length),
                gn: Some(lab.gn.map(|e| e.to_string())),
                commutator_s: Some(lab.commutator_s),
                commutator_form: Some(lab.commutator_form.name().to_string()),
                holder: Some([lab.holder.r, lab.holder.a, lab.holder.b].map(|e| e.to_string())),
                lame_k: Some(lab.lame_k),
                lame_q: Some(lab.lame_q),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field_of(e: &Error) -> &str {
        match e {
            Error::InvalidParameter { field, .. } => field,
            other => panic!("expected a parameter error, got {other}"),
        }
    }

    #[test]
    fn empty_file_gives_documented_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.scenario.grid.n, 128);
        assert_eq!(c.scenario.grid.box_length, 8.0 * std::f64::consts::PI);
        assert_eq!(c.dt(), 1e-3);
        assert_eq!(c.horizon(), 0.5);
        assert_eq!(c, RunConfig::from_preset(DEFAULT_PRESET).unwrap());
    }

    #[test]
    fn sigma_below_bound_is_rejected() {
        let e = parse_config("[model]\ngamma = 2.0\n[profile]\nkind = \"remark12\"\nsigma = 1.0\n").unwrap_err();
        assert_eq!(field_of(&e), "profile.sigma");
        assert!(e.to_string().contains("σ>max{1, 1/(γ−1)}"), "{e}");
    }

    #[test]
    fn zero_alpha_is_rejected() {
        let e = parse_config("[model]\nvariant = \"FullQ\"\nalpha = 0.0\n").unwrap_err();
        assert_eq!(field_of(&e), "model.alpha");
        assert!(e.to_string().contains("α>0, α+β≥0"), "{e}");
        let e = parse_config("[model]\nalpha = 1.0\nbeta = -2.0\n").unwrap_err();
        assert_eq!(field_of(&e), "model.beta");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_config("seed = 1\n\n[grid]\nn = \"many\"\n").unwrap_err();
        match e {
            Error::ConfigParse { line, .. } => assert_eq!(line, Some(4)),
            other => panic!("{other}"),
        }
        let e = parse_config("[grid]\nn = 64\nwidth = 3\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: Some(3), .. }), "{e}");
        let e = parse_config("[grid\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: Some(1), .. }), "{e}");
    }

    #[test]
    fn time_invariants() {
        let e = parse_config("[time]\ndt = 0.0\n").unwrap_err();
        assert_eq!(field_of(&e), "time.dt");
        let e = parse_config("[time]\ndt = 0.1\nhorizon = 0.05\n").unwrap_err();
        assert_eq!(field_of(&e), "time.horizon");
    }

    #[test]
    fn preset_with_overrides() {
        let c = parse_config("preset = \"vacuum-laplacian\"\n[grid]\nn = 32\n").unwrap();
        assert_eq!(c.scenario.spec.variant(), Variant::LaplacianOnly);
        assert_eq!(c.scenario.grid.n, 32);
        let e = parse_config("preset = \"nope\"\n").unwrap_err();
        assert!(matches!(e, Error::UnknownPreset { .. }));
    }

    #[test]
    fn changing_variant_picks_its_coefficients() {
        let c = parse_config("[model]\nvariant = \"MarcheBN\"\n").unwrap();
        let s = c.scenario.spec;
        assert_eq!((s.gamma(), s.alpha(), s.beta()), (2.0, 1.0, 2.0));
        let e = parse_config("[model]\nvariant = \"Gent\"\nalpha = 1.0\n").unwrap_err();
        assert_eq!(field_of(&e), "model.alpha");
    }

    #[test]
    fn foreign_kind_keys_are_rejected() {
        let e = parse_config("[profile]\nkind = \"constant\"\nsigma = 3.0\n").unwrap_err();
        assert_eq!(field_of(&e), "profile.sigma");
    }

    #[test]
    fn every_preset_round_trips() {
        for name in super::super::scenario::PRESETS {
            let c = RunConfig::from_preset(name).unwrap();
            assert_eq!(parse_config(&c.to_toml()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn overrides_resolve_bare_and_dotted_keys() {
        let c = RunConfig::from_preset("smooth-small").unwrap();
        let g = c.with_override("gamma", "3").unwrap();
        assert_eq!(g.scenario.spec.gamma(), 3.0);
        let g = c.with_override("grid.n", "32").unwrap();
        assert_eq!(g.scenario.grid.n, 32);
        assert!(c.with_override("amplitude", "1").is_err());
        assert!(c.with_override("colour", "1").is_err());
        let e = c.with_override("gamma", "1.5").unwrap_err();
        assert_eq!(field_of(&e), "profile.sigma");
    }

    proptest! {
        #[test]
        fn round_trip(
            log_n in 3u32..9,
            l in 0.5f64..100.0,
            dt in 1e-5f64..1e-2,
            steps in 1usize..1000,
            gamma in 1.05f64..4.0,
            a in 1e-4f64..10.0,
            alpha in 0.01f64..5.0,
            beta_frac in -1.0f64..3.0,
            sigma_extra in 1e-3f64..3.0,
            amp in 1e-3f64..5.0,
            seed in 0..=i64::MAX as u64,
            k in prop::array::uniform2(-4i32..5),
            delta in 0.0f64..0.1,
        ) {
            let mut c = RunConfig::from_preset("smooth-small").unwrap();
            c.scenario.grid = GridSettings { n: 1 << log_n, box_length: l };
            c.scenario.time = TimeSettings { horizon: dt * steps as f64, dt };
            c.scenario.spec = ModelSpec::new(gamma, a, alpha, alpha * beta_frac, Variant::FullQ).unwrap();
            let bound = 1f64.max(1.0 / (gamma - 1.0));
            c.scenario.profile = Profile::Remark12 { sigma: bound + sigma_extra, amplitude: amp };
            c.scenario.u0 = VelocityProfile::SingleMode { k, amplitude: amp };
            c.scenario.reg = RegSettings { delta, eps_vac: Some(1e-9) };
            c.seed = seed;
            c.validate().unwrap();
            prop_assert_eq!(parse_config(&c.to_toml()).unwrap(), c);
        }
    }
}
