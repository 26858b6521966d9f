//! Configuration, presets and the experiment drivers behind the CLI.

pub mod config;
pub mod drivers;
pub mod scenario;
pub mod stability;

pub use config::{load_config, parse_config, LabSettings, MonitorSettings, RunConfig};
pub use drivers::{continuation_driver, run_driver, stability_driver, sweep_driver, verify_driver};
pub use scenario::{preset_scenario, Profile, ScenarioParams, VelocityProfile, PRESETS};
pub use stability::{stability_experiment, StabilityReport};
