//! Experiment configuration: a flat JSON document selecting one command and
//! the physical/numerical parameters of the run.  Unknown keys are rejected
//! everywhere; omitted sections fall back to documented defaults
//! (h = 0.01, detection threshold 1e8, quadrature tolerance 1e-8).

use std::path::PathBuf;

use critwave_core::modulus::ModulusSpec;
use critwave_core::radial_wave::{CharacteristicGrid, InitialData, Profile};
use serde::de::Error as DeError;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Solve,
    Functional,
    Iterate,
    Verify,
}

/// Named radial profile.  Wire form: `{"profile": "bump", "amplitude": 2.0}`;
/// fields that do not belong to the named profile are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileConfig(pub Profile);

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig(Profile::Zero)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    profile: String,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    amplitude: Option<f64>,
    #[serde(default)]
    decay: Option<f64>,
}

impl<'de> Deserialize<'de> for ProfileConfig {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawProfile::deserialize(de)?;
        let reject = |cond: bool, field: &str| {
            if cond {
                Err(DeError::custom(format!(
                    "field `{field}` does not apply to profile `{}`",
                    raw.profile
                )))
            } else {
                Ok(())
            }
        };
        let profile = match raw.profile.as_str() {
            "zero" => {
                reject(raw.value.is_some(), "value")?;
                reject(raw.amplitude.is_some(), "amplitude")?;
                reject(raw.decay.is_some(), "decay")?;
                Profile::Zero
            }
            "const" => {
                reject(raw.amplitude.is_some(), "amplitude")?;
                reject(raw.decay.is_some(), "decay")?;
                Profile::Const(raw.value.ok_or_else(|| DeError::missing_field("value"))?)
            }
            "bump" => {
                reject(raw.value.is_some(), "value")?;
                reject(raw.decay.is_some(), "decay")?;
                Profile::Bump {
                    amplitude: raw
                        .amplitude
                        .ok_or_else(|| DeError::missing_field("amplitude"))?,
                }
            }
            "poly_bump" => {
                reject(raw.value.is_some(), "value")?;
                reject(raw.decay.is_some(), "decay")?;
                Profile::PolyBump {
                    amplitude: raw
                        .amplitude
                        .ok_or_else(|| DeError::missing_field("amplitude"))?,
                }
            }
            "gaussian" => {
                reject(raw.value.is_some(), "value")?;
                reject(raw.amplitude.is_some(), "amplitude")?;
                Profile::Gaussian {
                    decay: raw.decay.ok_or_else(|| DeError::missing_field("decay"))?,
                }
            }
            other => {
                return Err(DeError::custom(format!(
                    "unknown profile `{other}` (expected zero, const, bump, poly_bump, or gaussian)"
                )))
            }
        };
        Ok(ProfileConfig(profile))
    }
}

impl Serialize for ProfileConfig {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let fields = match self.0 {
            Profile::Zero => 1,
            _ => 2,
        };
        let mut st = ser.serialize_struct("ProfileConfig", fields)?;
        match self.0 {
            Profile::Zero => st.serialize_field("profile", "zero")?,
            Profile::Const(v) => {
                st.serialize_field("profile", "const")?;
                st.serialize_field("value", &v)?;
            }
            Profile::Bump { amplitude } => {
                st.serialize_field("profile", "bump")?;
                st.serialize_field("amplitude", &amplitude)?;
            }
            Profile::PolyBump { amplitude } => {
                st.serialize_field("profile", "poly_bump")?;
                st.serialize_field("amplitude", &amplitude)?;
            }
            Profile::Gaussian { decay } => {
                st.serialize_field("profile", "gaussian")?;
                st.serialize_field("decay", &decay)?;
            }
        }
        st.end()
    }
}

fn default_u1() -> ProfileConfig {
    ProfileConfig(Profile::Bump { amplitude: 1.0 })
}

fn one() -> f64 {
    1.0
}

/// Initial data: position and velocity profiles, common support radius, and
/// the amplitude factor ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub u0: ProfileConfig,
    #[serde(default = "default_u1")]
    pub u1: ProfileConfig,
    #[serde(default = "one")]
    pub support_radius: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            u0: ProfileConfig::default(),
            u1: default_u1(),
            support_radius: 1.0,
            epsilon: 1.0,
        }
    }
}

fn default_h() -> f64 {
    0.01
}

fn default_t_max() -> f64 {
    6.0
}

fn default_u_max() -> f64 {
    1e8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Defaults to t_max + 1.5, which contains both the light cone of
    /// unit-support data and the integration ball B(1+t).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Blow-up detection threshold on |u|.
    #[serde(default = "default_u_max")]
    pub u_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            h: default_h(),
            t_max: default_t_max(),
            r_max: None,
            u_max: default_u_max(),
        }
    }
}

impl GridConfig {
    pub fn resolved_r_max(&self) -> f64 {
        self.r_max.unwrap_or(self.t_max + 1.5)
    }
}

fn default_k() -> u32 {
    1
}

fn default_quad_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestfuncConfig {
    /// Log depth of the bracket weight; must match the modulus for the
    /// iterate pipeline.
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
}

impl Default for TestfuncConfig {
    fn default() -> Self {
        TestfuncConfig {
            k: default_k(),
            quad_tol: default_quad_tol(),
        }
    }
}

/// Right-hand side of the solve pipeline: the critical nonlinearity, or pure
/// linear propagation for convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingConfig {
    #[default]
    Critical,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub modulus: ModulusSpec,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub testfunc: TestfuncConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let g = &self.grid;
        if !(g.h > 0.0 && g.h.is_finite()) {
            return Err(format!("grid.h must be positive and finite, got {}", g.h));
        }
        if !(g.t_max > 0.0 && g.t_max.is_finite()) {
            return Err(format!("grid.t_max must be positive and finite, got {}", g.t_max));
        }
        if !(g.u_max > 0.0) {
            return Err(format!("grid.u_max must be positive, got {}", g.u_max));
        }
        let r_max = g.resolved_r_max();
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(format!("grid.r_max must be positive and finite, got {r_max}"));
        }
        let d = &self.data;
        if !(d.support_radius > 0.0 && d.support_radius.is_finite()) {
            return Err(format!(
                "data.support_radius must be positive and finite, got {}",
                d.support_radius
            ));
        }
        if !d.epsilon.is_finite() {
            return Err(format!("data.epsilon must be finite, got {}", d.epsilon));
        }
        let tf = &self.testfunc;
        if !(1..=3).contains(&tf.k) {
            return Err(format!("testfunc.k must lie in 1..=3, got {}", tf.k));
        }
        if !(tf.quad_tol > 0.0 && tf.quad_tol.is_finite()) {
            return Err(format!(
                "testfunc.quad_tol must be positive and finite, got {}",
                tf.quad_tol
            ));
        }
        match self.command {
            Command::Solve | Command::Functional | Command::Iterate => {
                if r_max < d.support_radius + g.t_max {
                    return Err(format!(
                        "grid.r_max = {r_max} does not contain the light cone: need at least support_radius + t_max = {}",
                        d.support_radius + g.t_max
                    ));
                }
            }
            Command::Classify | Command::Verify => {}
        }
        if self.command == Command::Iterate {
            if self.forcing == ForcingConfig::None {
                return Err("the iterate pipeline needs the critical forcing".to_string());
            }
            match self.modulus.log_depth() {
                Some(depth) if depth == tf.k => {}
                Some(depth) => {
                    return Err(format!(
                        "testfunc.k = {} must match the modulus log depth {depth} for the \
                         iterate pipeline",
                        tf.k
                    ));
                }
                None => {
                    return Err(
                        "the iterate pipeline needs an iterated-log modulus".to_string()
                    );
                }
            }
        }
        match self.command {
            Command::Functional | Command::Iterate => {
                if d.u0.0 != Profile::Zero {
                    return Err(
                        "data.u0 must be the zero profile for the functional and iterate pipelines \
                         (the weighted identity is formulated for velocity-only data)"
                            .to_string(),
                    );
                }
                if d.support_radius > 1.0 {
                    return Err(format!(
                        "data.support_radius must be at most 1 for the functional and iterate \
                         pipelines (the integration ball is B(1+t)), got {}",
                        d.support_radius
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn initial_data(&self) -> critwave_core::Result<InitialData> {
        InitialData::new(
            self.data.u0.0,
            self.data.u1.0,
            self.data.support_radius,
            self.data.epsilon,
        )
    }

    pub fn characteristic_grid(&self) -> critwave_core::Result<CharacteristicGrid> {
        CharacteristicGrid::new(self.grid.h, self.grid.t_max, self.grid.resolved_r_max())
    }
}
