//! Experiment configuration, parsed from JSON with unknown fields rejected.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use phasecover::cover::Profile;
use phasecover::group::Group;
use phasecover::weight::Weight;

use crate::CliError;

/// Mixed into the config hash so outputs from different releases never collide.
pub const VERSION: &str = concat!("phasecover ", env!("CARGO_PKG_VERSION"));

/// An exponent in `[1, ∞]`; JSON spells infinity as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent(p)),
            Raw::Word(w) if w == "inf" => Ok(Exponent(f64::INFINITY)),
            Raw::Word(w) => Err(de::Error::custom(format!("exponent must be a number or \"inf\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierFamily {
    Lattice,
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub kind: CarrierFamily,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<i64>,
    /// Radius of the box neighborhood `V`.
    #[serde(default = "one")]
    pub neighborhood_radius: i64,
}

fn one() -> i64 {
    1
}

impl CarrierSpec {
    pub fn group(&self) -> Result<Group, CliError> {
        let g = match (self.kind, self.modulus) {
            (CarrierFamily::Lattice, None) => Group::lattice(self.dim),
            (CarrierFamily::Cyclic, Some(n)) => Group::cyclic(self.dim, n),
            (CarrierFamily::Lattice, Some(_)) => {
                return Err(CliError::validation("carrier.modulus", "a lattice carrier takes no modulus"))
            }
            (CarrierFamily::Cyclic, None) => {
                return Err(CliError::validation("carrier.modulus", "a cyclic carrier needs a modulus"))
            }
        };
        g.map_err(|e| CliError::validation("carrier", e.to_string()))
    }
}

/// One `ℓ^{p,q}_v` entry; `q` defaults to `p` and `v` to the shared weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceEntry {
    pub p: Exponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Weight>,
}

impl SpaceEntry {
    pub fn l2() -> Self {
        SpaceEntry {
            p: Exponent(2.0),
            q: None,
            weight: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Gabor atoms on the time-frequency plane `ℤ_N × ℤ_N`.
    Gabor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<usize>,
        /// Width of the Gaussian window; defaults to `√(N/2π)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    /// Exponentially perturbed Riesz basis on `−radius..=radius`, seen on
    /// its coefficient window.
    LocalizedFrame {
        radius: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strength: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<f64>,
    },
    /// Point masses at every element of the carrier (finite carriers only).
    Delta,
    /// Normalized block indicators of the given width on `ℤ_N`.
    Block { width: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSpec {
    Constant { value: f64 },
    HalfPlane,
    Cosine { offset: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub profile: Profile,
    /// Centers on `spacing·ℤ^d`.
    pub spacing: i64,
    pub width: f64,
    /// Symbol `m`; when present, `θ_γ = m η_γ` rows and the `M_m` sweep use it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exhaustion {
    pub initial_radius: i64,
    pub doublings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub carrier: CarrierSpec,
    pub weight: Weight,
    pub spaces: Vec<SpaceEntry>,
    /// The local space `B`; `ℓ^2` when absent.
    #[serde(default = "SpaceEntry::l2")]
    pub coefficient_space: SpaceEntry,
    pub system: SystemSpec,
    pub partition: PartitionSpec,
    pub exhaustion: Exhaustion,
    pub trials: usize,
    pub probes: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Validation {
            field: "config".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = self.carrier.group()?;
        if self.carrier.neighborhood_radius < 0 {
            return Err(CliError::validation("carrier.neighborhood_radius", "must be nonnegative"));
        }
        if self.spaces.is_empty() {
            return Err(CliError::validation("spaces", "at least one space is required"));
        }
        for (k, s) in self.spaces.iter().enumerate() {
            check_entry(&format!("spaces[{k}]"), s)?;
        }
        check_entry("coefficient_space", &self.coefficient_space)?;
        match &self.system {
            SystemSpec::Gabor { a, b, sigma } => {
                if g.dim() != 2 || g.modulus().is_none() {
                    return Err(CliError::validation("system", "gabor needs a cyclic carrier of dimension 2"));
                }
                let n = g.modulus().expect("cyclic") as usize;
                for (name, v) in [("system.a", a), ("system.b", b)] {
                    if let Some(v) = v {
                        if *v == 0 || n % v != 0 {
                            return Err(CliError::validation(name, format!("{v} does not divide {n}")));
                        }
                    }
                }
                if let Some(s) = sigma {
                    if !(*s > 0.0) {
                        return Err(CliError::validation("system.sigma", "must be positive"));
                    }
                }
            }
            SystemSpec::LocalizedFrame { radius, strength, decay } => {
                if g.dim() != 1 || g.is_finite() {
                    return Err(CliError::validation("system", "localized_frame needs the lattice of dimension 1"));
                }
                if *radius < 1 {
                    return Err(CliError::validation("system.radius", "must be positive"));
                }
                if strength.is_some_and(|s| !(s >= 0.0)) {
                    return Err(CliError::validation("system.strength", "must be nonnegative"));
                }
                if decay.is_some_and(|d| !(d > 0.0)) {
                    return Err(CliError::validation("system.decay", "must be positive"));
                }
            }
            SystemSpec::Delta => {
                if !g.is_finite() {
                    return Err(CliError::validation("system", "delta needs a cyclic carrier"));
                }
            }
            SystemSpec::Block { width } => {
                let n = g.modulus().unwrap_or(0);
                if g.dim() != 1 || n == 0 {
                    return Err(CliError::validation("system", "block needs a cyclic carrier of dimension 1"));
                }
                if *width < 1 || n % width != 0 {
                    return Err(CliError::validation("system.width", format!("{width} does not divide {n}")));
                }
            }
        }
        if self.partition.spacing < 1 {
            return Err(CliError::validation("partition.spacing", "must be positive"));
        }
        if let Some(n) = g.modulus() {
            if n % self.partition.spacing != 0 {
                return Err(CliError::validation(
                    "partition.spacing",
                    format!("{} does not divide {n}", self.partition.spacing),
                ));
            }
        }
        if !(self.partition.width > 0.0) {
            return Err(CliError::validation("partition.width", "must be positive"));
        }
        if let Some(MaskSpec::Cosine { offset, amplitude }) = &self.partition.mask {
            if !(offset.is_finite() && amplitude.is_finite()) {
                return Err(CliError::validation("partition.mask", "coefficients must be finite"));
            }
        }
        if self.exhaustion.initial_radius < 1 {
            return Err(CliError::validation("exhaustion.initial_radius", "must be positive"));
        }
        if self.exhaustion.doublings > 16 {
            return Err(CliError::validation("exhaustion.doublings", "at most 16"));
        }
        if self.trials == 0 {
            return Err(CliError::validation("trials", "must be positive"));
        }
        Ok(())
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON and [`VERSION`].
    pub fn hash(&self) -> String {
        // serde_json::Value keeps object keys sorted
        let canonical = serde_json::to_value(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.to_string().as_bytes());
        h.update(b"\n");
        h.update(VERSION.as_bytes());
        hex::encode(h.finalize())[..16].to_string()
    }
}

fn check_entry(path: &str, s: &SpaceEntry) -> Result<(), CliError> {
    for (name, e) in [("p", Some(s.p)), ("q", s.q)] {
        if let Some(Exponent(v)) = e {
            if v.is_nan() || v < 1.0 {
                return Err(CliError::validation(format!("{path}.{name}"), format!("exponent {v} outside [1, inf]")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_spelling() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.0.is_infinite());
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"inf\"");
        let e: Exponent = serde_json::from_str("1.5").unwrap();
        assert_eq!(e.0, 1.5);
        assert!(serde_json::from_str::<Exponent>("\"infinity\"").is_err());
    }
}
