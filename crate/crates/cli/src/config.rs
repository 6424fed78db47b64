//! Run configuration: JSON file plus `--set key=value` overrides.
//!
//! Every field has a default; `{}` is the sodium-23 working point at 7 T and
//! 100 mK with a 200 kHz quadrupole splitting. Angles are in degrees and
//! frequencies in kHz or MHz; conversion to radians and rad/s happens in
//! [`RunConfig::resolve`].

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use squeezeprobe::dynamics::{RelaxationSpec, RelaxationTarget};
use squeezeprobe::hamiltonian::{omega_q_from_nu_q, EulerAngles, HamiltonianSpec};
use squeezeprobe::spin::Spin;
use squeezeprobe::states::{CssParams, EnvironmentSpec};
use squeezeprobe::sweeps::ThermalHamiltonian;

use crate::error::ConfigError;

/// A duration given either in units of `1/omega_Q` or in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum Duration {
    #[serde(rename = "omegaQ_inv")]
    OmegaQInv(f64),
    #[serde(rename = "seconds")]
    Seconds(f64),
}

impl Duration {
    pub fn seconds(self, omega_q: f64) -> f64 {
        match self {
            Duration::OmegaQInv(x) => x / omega_q,
            Duration::Seconds(s) => s,
        }
    }

    fn value(self) -> f64 {
        match self {
            Duration::OmegaQInv(x) | Duration::Seconds(x) => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    Css { theta0_deg: f64, phi0_deg: f64 },
    Thermal,
    Rtes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameChoice {
    /// Bare quadrupole coupling, no Zeeman term, no truncation.
    Quadrupole,
    /// Rotating frame with the effective Hamiltonian of `--order`.
    Rotating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetChoice {
    Mixed,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThermalChoice {
    Full,
    Quadrupole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub isotope: String,
    #[serde(rename = "gamma_n_MHz_T")]
    pub gamma_n_mhz_t: f64,
    #[serde(rename = "two_I")]
    pub two_i: u32,
    #[serde(rename = "B0_T")]
    pub b0_t: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    #[serde(rename = "nuQ_kHz")]
    pub nu_q_khz: f64,
    pub eta: f64,
    /// `[alpha_Q, beta_Q, gamma_Q]`.
    pub euler_deg: [f64; 3],
    #[serde(rename = "T1")]
    pub t1: Option<Duration>,
    #[serde(rename = "T2")]
    pub t2: Option<Duration>,
    pub initial_state: InitialState,
    pub frame: FrameChoice,
    pub relaxation_target: TargetChoice,
    pub thermal_hamiltonian: ThermalChoice,
    /// Squeezing window length in units of `1/nu_Q`.
    pub time_window_periods: f64,
    pub time_samples: usize,
    pub eta_values: Vec<f64>,
    /// Transverse decay applied to the FID.
    #[serde(rename = "fid_T2")]
    pub fid_t2: Duration,
    /// Acquisition length in units of `fid_T2`.
    #[serde(rename = "fid_acquisition_T2")]
    pub fid_acquisition_t2: f64,
    pub zero_fill: usize,
    #[serde(rename = "husimi_time_omegaQ_inv")]
    pub husimi_time_omega_q_inv: f64,
    pub husimi_range: f64,
    pub husimi_points: usize,
    #[serde(rename = "map_B_T")]
    pub map_b_t: [f64; 2],
    #[serde(rename = "map_B_points")]
    pub map_b_points: usize,
    #[serde(rename = "map_T_K")]
    pub map_t_k: [f64; 2],
    #[serde(rename = "map_T_points")]
    pub map_t_points: usize,
    pub grid_beta_deg: [f64; 2],
    pub grid_beta_points: usize,
    pub grid_eta: [f64; 2],
    pub grid_eta_points: usize,
    pub grid_window_periods: f64,
    pub grid_samples: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            isotope: "23Na".into(),
            gamma_n_mhz_t: 11.26,
            two_i: 3,
            b0_t: 7.0,
            temperature_k: 0.1,
            nu_q_khz: 200.0,
            eta: 0.0,
            euler_deg: [0.0; 3],
            t1: None,
            t2: None,
            initial_state: InitialState::Css {
                theta0_deg: 90.0,
                phi0_deg: 180.0,
            },
            frame: FrameChoice::Quadrupole,
            relaxation_target: TargetChoice::Mixed,
            thermal_hamiltonian: ThermalChoice::Full,
            time_window_periods: 1.0,
            time_samples: 2000,
            eta_values: vec![0.0, 1.0],
            fid_t2: Duration::OmegaQInv(20.0),
            fid_acquisition_t2: 8.0,
            zero_fill: 2,
            husimi_time_omega_q_inv: 0.5,
            husimi_range: 2.0,
            husimi_points: 101,
            map_b_t: [0.0, 9.0],
            map_b_points: 60,
            map_t_k: [1e-5, 10.0],
            map_t_points: 60,
            grid_beta_deg: [0.0, 90.0],
            grid_beta_points: 91,
            grid_eta: [0.0, 1.0],
            grid_eta_points: 21,
            grid_window_periods: 2.0,
            grid_samples: 2000,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Physical quantities derived from a validated [`RunConfig`], SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub spin: Spin,
    pub spec: HamiltonianSpec,
    pub env: EnvironmentSpec,
    pub relax: RelaxationSpec,
    pub initial: InitialKind,
    pub target: RelaxationTarget,
    pub thermal: ThermalHamiltonian,
}

/// Initial state with angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    Css(CssParams),
    Thermal,
    Rtes,
}

impl RunConfig {
    /// Parses a JSON file and applies `key=value` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                    path: ".".into(),
                    message: e.to_string(),
                })?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config = RunConfig::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: ".".into(),
            message: e.to_string(),
        })?;
        let config = RunConfig::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    fn from_value(value: Value) -> Result<Self, ConfigError> {
        serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn omega_q(&self) -> f64 {
        omega_q_from_nu_q(self.nu_q_khz * 1e3)
    }

    pub fn nu_q_hz(&self) -> f64 {
        self.nu_q_khz * 1e3
    }

    pub fn gamma_n_hz_t(&self) -> f64 {
        self.gamma_n_mhz_t * 1e6
    }

    pub fn omega0(&self) -> f64 {
        TAU * self.gamma_n_hz_t() * self.b0_t
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::range(key, format!("{v} must be > 0")))
            }
        };
        let at_least = |key: &str, v: usize, min: usize| {
            if v >= min {
                Ok(())
            } else {
                Err(ConfigError::range(key, format!("{v} must be >= {min}")))
            }
        };
        let unit = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::range(key, format!("{v} not in [0, 1]")))
            }
        };
        positive("gamma_n_MHz_T", self.gamma_n_mhz_t)?;
        if self.two_i == 0 {
            return Err(ConfigError::range("two_I", "must be >= 1"));
        }
        if !(self.b0_t >= 0.0 && self.b0_t.is_finite()) {
            return Err(ConfigError::range("B0_T", format!("{} must be >= 0", self.b0_t)));
        }
        positive("temperature_K", self.temperature_k)?;
        positive("nuQ_kHz", self.nu_q_khz)?;
        unit("eta", self.eta)?;
        if self.euler_deg.iter().any(|a| !a.is_finite()) {
            return Err(ConfigError::range("euler_deg", "angles must be finite"));
        }
        if let Some(d) = self.t1 {
            positive("T1", d.value())?;
        }
        if let Some(d) = self.t2 {
            positive("T2", d.value())?;
        }
        if let (Some(t1), Some(t2)) = (self.t1, self.t2) {
            let (s1, s2) = (t1.seconds(self.omega_q()), t2.seconds(self.omega_q()));
            if s2 > 2.0 * s1 {
                return Err(ConfigError::range("T2", "must not exceed 2 T1"));
            }
        }
        if let InitialState::Css {
            theta0_deg,
            phi0_deg,
        } = self.initial_state
        {
            if !(0.0..=180.0).contains(&theta0_deg) {
                return Err(ConfigError::range(
                    "initial_state.css.theta0_deg",
                    format!("{theta0_deg} not in [0, 180]"),
                ));
            }
            if !(0.0..360.0).contains(&phi0_deg) {
                return Err(ConfigError::range(
                    "initial_state.css.phi0_deg",
                    format!("{phi0_deg} not in [0, 360)"),
                ));
            }
        }
        positive("time_window_periods", self.time_window_periods)?;
        at_least("time_samples", self.time_samples, 2)?;
        for (k, &eta) in self.eta_values.iter().enumerate() {
            unit(&format!("eta_values[{k}]"), eta)?;
        }
        positive("fid_T2", self.fid_t2.value())?;
        positive("fid_acquisition_T2", self.fid_acquisition_t2)?;
        at_least("zero_fill", self.zero_fill, 1)?;
        if !(self.husimi_time_omega_q_inv >= 0.0) {
            return Err(ConfigError::range("husimi_time_omegaQ_inv", "must be >= 0"));
        }
        positive("husimi_range", self.husimi_range)?;
        at_least("husimi_points", self.husimi_points, 2)?;
        if !(self.map_b_t[0] >= 0.0 && self.map_b_t[1] >= self.map_b_t[0]) {
            return Err(ConfigError::range("map_B_T", "need 0 <= min <= max"));
        }
        at_least("map_B_points", self.map_b_points, 1)?;
        if !(self.map_t_k[0] > 0.0 && self.map_t_k[1] >= self.map_t_k[0]) {
            return Err(ConfigError::range("map_T_K", "need 0 < min <= max"));
        }
        at_least("map_T_points", self.map_t_points, 1)?;
        if !(self.grid_beta_deg[1] >= self.grid_beta_deg[0]) {
            return Err(ConfigError::range("grid_beta_deg", "need min <= max"));
        }
        at_least("grid_beta_points", self.grid_beta_points, 1)?;
        unit("grid_eta", self.grid_eta[0])?;
        unit("grid_eta", self.grid_eta[1])?;
        at_least("grid_eta_points", self.grid_eta_points, 1)?;
        positive("grid_window_periods", self.grid_window_periods)?;
        at_least("grid_samples", self.grid_samples, 3)?;
        Ok(())
    }

    /// Converts to simulation types (radians, rad/s, seconds).
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let key_err = |key: &'static str| move |e: squeezeprobe::Error| ConfigError::range(key, e.to_string());
        let spin = Spin::new(self.two_i).map_err(key_err("two_I"))?;
        let [a, b, g] = self.euler_deg;
        let spec = HamiltonianSpec::new(
            self.omega0(),
            self.omega_q(),
            self.eta,
            EulerAngles::from_degrees(a, b, g),
        )
        .map_err(key_err("eta"))?;
        let env = EnvironmentSpec::new(self.b0_t, self.temperature_k, self.gamma_n_hz_t())
            .map_err(key_err("temperature_K"))?;
        let omega_q = self.omega_q();
        let relax = RelaxationSpec::new(
            self.t1.map(|d| d.seconds(omega_q)),
            self.t2.map(|d| d.seconds(omega_q)),
        )
        .map_err(key_err("T2"))?;
        let initial = match self.initial_state {
            InitialState::Css {
                theta0_deg,
                phi0_deg,
            } => InitialKind::Css(
                CssParams::new(theta0_deg.to_radians(), phi0_deg.to_radians())
                    .map_err(key_err("initial_state"))?,
            ),
            InitialState::Thermal => InitialKind::Thermal,
            InitialState::Rtes => InitialKind::Rtes,
        };
        Ok(Resolved {
            spin,
            spec,
            env,
            relax,
            initial,
            target: match self.relaxation_target {
                TargetChoice::Mixed => RelaxationTarget::MaximallyMixed,
                TargetChoice::Thermal => RelaxationTarget::Thermal,
            },
            thermal: match self.thermal_hamiltonian {
                ThermalChoice::Full => ThermalHamiltonian::Full,
                ThermalChoice::Quadrupole => ThermalHamiltonian::Quadrupole,
            },
        })
    }
}

/// Applies `a.b.c=value`; the value is parsed as JSON, falling back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .filter(|(k, _)| !k.trim().is_empty())
        .ok_or_else(|| ConfigError::BadOverride(assignment.to_string()))?;
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.trim().split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        let map = node.as_object_mut().expect("just made an object");
        if k == parts.len() - 1 {
            map.insert((*part).to_string(), value);
            return Ok(());
        }
        node = map
            .entry((*part).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
