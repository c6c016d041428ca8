//! JSON experiment configuration: parsing, validation with messages that
//! name the offending field, and construction of the domain objects.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::body::{Body, ConeSpec, Shape};
use crate::grid::VoxelBody;
use crate::potentials::{KernelSpec, KernelVariant};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config validation error: {0}")]
    Validation(String),
}

/// A scalar that may be infinite, written as the string "inf" in JSON so
/// configs round-trip bytewise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaybeInf(pub f64);

impl Serialize for MaybeInf {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for MaybeInf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(MaybeInf(v)),
            Raw::Str(s) if s == "inf" || s == "+inf" || s == "infinity" => {
                Ok(MaybeInf(f64::INFINITY))
            }
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeConfig {
    pub kappa: f64,
    pub delta: MaybeInf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ShapeConfig {
    Ball { dim: usize, center: Vec<f64>, radius: f64 },
    Annulus { dim: usize, center: Vec<f64>, r_in: f64, r_out: f64 },
    Dumbbell { epsilon: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Voxel { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyConfig {
    #[serde(flatten)]
    pub shape: ShapeConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelConfig {
    Riesz { alpha: f64 },
    Renormalized { alpha: f64 },
    Poisson { h: f64 },
    Heat { t: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeboundConfig {
    pub alpha: f64,
    pub kappa: f64,
    pub delta: MaybeInf,
    pub d: f64,
    pub r0: f64,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conebound: Option<ConeboundConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization is infallible")
    }

    /// Build and validate the body, naming fields in error messages.
    pub fn build_body(&self) -> Result<Body, ConfigError> {
        let bc = self
            .body
            .as_ref()
            .ok_or_else(|| ConfigError::Validation("missing required field: body".into()))?;
        let (dim, shape) = match &bc.shape {
            ShapeConfig::Ball { dim, center, radius } => (
                *dim,
                Shape::Ball { center: center.clone(), radius: *radius },
            ),
            ShapeConfig::Annulus { dim, center, r_in, r_out } => (
                *dim,
                Shape::Annulus { center: center.clone(), r_in: *r_in, r_out: *r_out },
            ),
            ShapeConfig::Dumbbell { epsilon } => (2, Shape::Dumbbell { epsilon: *epsilon }),
            ShapeConfig::Polygon { vertices } => (2, Shape::Polygon { vertices: vertices.clone() }),
            ShapeConfig::Voxel { path } => {
                let grid = VoxelBody::read_from(std::path::Path::new(path))
                    .map_err(|e| ConfigError::Validation(format!("body.path: {e}")))?;
                (grid.dim, Shape::Voxel(grid))
            }
        };
        let mut builder = Body::builder(dim, shape);
        if let Some(cone) = &bc.cone {
            let spec = ConeSpec::new(cone.kappa, cone.delta.0)
                .map_err(|e| ConfigError::Validation(e.to_string()))?;
            builder = builder.cone(spec);
        }
        if let Some(res) = bc.grid_resolution {
            if res < 16 {
                return Err(ConfigError::Validation(format!(
                    "body.grid_resolution must be at least 16, got {res}"
                )));
            }
            builder = builder.grid_resolution(res);
        }
        builder
            .build()
            .map_err(|e| ConfigError::Validation(e.to_string()))
    }

    pub fn build_kernel(&self, dim: usize) -> Result<KernelSpec, ConfigError> {
        let kc = self
            .kernel
            .as_ref()
            .ok_or_else(|| ConfigError::Validation("missing required field: kernel".into()))?;
        let variant = match kc {
            KernelConfig::Riesz { alpha } => {
                if !(*alpha > 0.0 && *alpha < dim as f64) {
                    return Err(ConfigError::Validation(format!(
                        "kernel.alpha = {alpha} out of range (0, m) for riesz with m = {dim}"
                    )));
                }
                KernelVariant::Riesz { alpha: *alpha }
            }
            KernelConfig::Renormalized { alpha } => {
                if *alpha > 0.0 {
                    return Err(ConfigError::Validation(format!(
                        "kernel.alpha = {alpha} must be <= 0 for renormalized"
                    )));
                }
                KernelVariant::Renormalized { alpha: *alpha }
            }
            KernelConfig::Poisson { h } => {
                if *h <= 0.0 {
                    return Err(ConfigError::Validation(format!(
                        "kernel.h = {h} must be positive"
                    )));
                }
                KernelVariant::Poisson { h: *h }
            }
            KernelConfig::Heat { t } => {
                if *t <= 0.0 {
                    return Err(ConfigError::Validation(format!(
                        "kernel.t = {t} must be positive"
                    )));
                }
                KernelVariant::Heat { t: *t }
            }
        };
        Ok(KernelSpec { dim, variant })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_build_round_trip() {
        let text = r#"{
            "experiment": "centers.find",
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0},
            "kernel": {"variant": "poisson", "h": 0.5},
            "resolution": 0.05
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let body = cfg.build_body().unwrap();
        assert_eq!(body.dim, 2);
        cfg.build_kernel(2).unwrap();
        let json = cfg.to_json();
        let cfg2 = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(json, cfg2.to_json());
    }

    #[test]
    fn inf_delta_round_trips() {
        let text = r#"{
            "body": {"shape": "dumbbell", "epsilon": 0.2,
                     "cone": {"kappa": 1.5707963267948966, "delta": "inf"}}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(cfg.body.as_ref().unwrap().cone.as_ref().unwrap().delta.0.is_infinite());
        let json = cfg.to_json();
        assert!(json.contains("\"inf\""));
        assert_eq!(json, ExperimentConfig::from_json(&json).unwrap().to_json());
    }

    #[test]
    fn bad_kappa_names_the_field() {
        let text = r#"{
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0,
                     "cone": {"kappa": 6.283185307179586, "delta": 1.0}}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let err = cfg.build_body().unwrap_err();
        assert!(err.to_string().contains("ConeSpec.kappa"), "{err}");
    }

    #[test]
    fn bad_kernel_parameter_rejected() {
        let text = r#"{
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0},
            "kernel": {"variant": "riesz", "alpha": 2.5}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(cfg.build_kernel(2).is_err());
    }
}
