//! Flat JSON wire shape for [`ModulusSpec`]:
//!
//! ```json
//! {"family": "iterated_log", "k": 2, "lambda_max": 0.135335, "extension": "clamp"}
//! ```
//!
//! Payload fields are per family (`gamma`/`c_l`, `k`, `exponents`, `table`);
//! fields that do not belong to the named family are rejected, as are unknown
//! ones.  `lambda_max` is optional and defaults to the family's calibrated
//! domain end.  Serialization emits fields in a fixed order so the output is
//! canonical.

use serde::de::Error as DeError;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Family, ModulusSpec};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulus {
    family: String,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    c_l: Option<f64>,
    #[serde(default)]
    k: Option<u32>,
    #[serde(default)]
    exponents: Option<Vec<f64>>,
    #[serde(default)]
    table: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    lambda_max: Option<f64>,
    #[serde(default)]
    extension: Option<String>,
}

impl<'de> Deserialize<'de> for ModulusSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawModulus::deserialize(de)?;
        let reject = |cond: bool, field: &str| {
            if cond {
                Err(DeError::custom(format!(
                    "field `{field}` does not apply to family `{}`",
                    raw.family
                )))
            } else {
                Ok(())
            }
        };
        let family = match raw.family.as_str() {
            "power_log" => {
                reject(raw.k.is_some(), "k")?;
                reject(raw.exponents.is_some(), "exponents")?;
                reject(raw.table.is_some(), "table")?;
                Family::PowerLog {
                    gamma: raw.gamma.ok_or_else(|| DeError::missing_field("gamma"))?,
                    c_l: raw.c_l.ok_or_else(|| DeError::missing_field("c_l"))?,
                }
            }
            "iterated_log" => {
                reject(raw.gamma.is_some(), "gamma")?;
                reject(raw.c_l.is_some(), "c_l")?;
                reject(raw.exponents.is_some(), "exponents")?;
                reject(raw.table.is_some(), "table")?;
                Family::IteratedLog {
                    k: raw.k.ok_or_else(|| DeError::missing_field("k"))?,
                }
            }
            "log_product" => {
                reject(raw.gamma.is_some(), "gamma")?;
                reject(raw.c_l.is_some(), "c_l")?;
                reject(raw.k.is_some(), "k")?;
                reject(raw.table.is_some(), "table")?;
                Family::LogProduct {
                    exponents: raw
                        .exponents
                        .ok_or_else(|| DeError::missing_field("exponents"))?,
                }
            }
            "custom" => {
                reject(raw.gamma.is_some(), "gamma")?;
                reject(raw.c_l.is_some(), "c_l")?;
                reject(raw.k.is_some(), "k")?;
                reject(raw.exponents.is_some(), "exponents")?;
                Family::Custom {
                    table: raw.table.ok_or_else(|| DeError::missing_field("table"))?,
                }
            }
            other => {
                return Err(DeError::custom(format!(
                    "unknown modulus family `{other}` (expected power_log, iterated_log, log_product, or custom)"
                )))
            }
        };
        if let Some(ext) = &raw.extension {
            if ext != "clamp" {
                return Err(DeError::custom(format!(
                    "unknown extension `{ext}` (expected `clamp`)"
                )));
            }
        }
        ModulusSpec::with_family(family, raw.lambda_max).map_err(DeError::custom)
    }
}

impl Serialize for ModulusSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let payload_fields = match self.family() {
            Family::PowerLog { .. } => 2,
            Family::IteratedLog { .. } => 1,
            Family::LogProduct { .. } => 1,
            Family::Custom { .. } => 1,
        };
        let mut st = ser.serialize_struct("ModulusSpec", payload_fields + 3)?;
        match self.family() {
            Family::PowerLog { gamma, c_l } => {
                st.serialize_field("family", "power_log")?;
                st.serialize_field("gamma", gamma)?;
                st.serialize_field("c_l", c_l)?;
            }
            Family::IteratedLog { k } => {
                st.serialize_field("family", "iterated_log")?;
                st.serialize_field("k", k)?;
            }
            Family::LogProduct { exponents } => {
                st.serialize_field("family", "log_product")?;
                st.serialize_field("exponents", exponents)?;
            }
            Family::Custom { table } => {
                st.serialize_field("family", "custom")?;
                st.serialize_field("table", table)?;
            }
        }
        st.serialize_field("lambda_max", &self.lambda_max())?;
        st.serialize_field("extension", "clamp")?;
        st.end()
    }
}
