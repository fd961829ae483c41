//! Domains as a single value, and the JSON domain-description format.
//!
//! ```json
//! {"type": "ball", "a": "1/1"}
//! {"type": "ellipsoid", "a": "1/1", "b": "2/1"}
//! {"type": "profile", "vertices": [["0/1", "2/1"], ["1/1", "0/1"]]}
//! {"type": "weights", "weights": [["1/8", "4096"]]}
//! {"type": "quasiflat", "params": ["64", "4096"], "padding": {"count": 10, "bound": "1/1000000"}}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacity::{ball_result, ellipsoid_result, multiset_capacity, CapacityConfig, CapacityResult};
use crate::error::{EchError, Result};
use crate::geometry::{Ellipsoid, MomentProfile, ScaleFactor};
use crate::quasiflat::{build_weights, Padding, ParameterVector};
use crate::scalar::Scalar;
use crate::weights::{ellipsoid_weights, realize_with, weight_expansion_with, WeightConfig, WeightMultiset};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        a: Scalar,
    },
    Ellipsoid {
        a: Scalar,
        b: Scalar,
    },
    Profile {
        vertices: MomentProfile,
    },
    Weights {
        weights: WeightMultiset,
    },
    Quasiflat {
        params: ParameterVector,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        padding: Option<Padding>,
    },
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| EchError::InvalidDomain(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| EchError::InvalidDomain(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| EchError::InvalidDomain(format!("{}: {e}", path.display())))
    }
}

/// A toric domain whose capacities we can compute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Ball(Scalar),
    Ellipsoid(Ellipsoid),
    /// Concave toric domain, by weights; the profile is kept when known.
    Concave {
        weights: WeightMultiset,
        profile: Option<MomentProfile>,
    },
}

impl Domain {
    pub fn from_spec(spec: &DomainSpec, cfg: &WeightConfig) -> Result<Domain> {
        Ok(match spec {
            DomainSpec::Ball { a } => {
                Ellipsoid::ball(a.clone())?;
                Domain::Ball(a.clone())
            }
            DomainSpec::Ellipsoid { a, b } => Domain::Ellipsoid(Ellipsoid::new(a.clone(), b.clone())?),
            DomainSpec::Profile { vertices } => Domain::from_profile(vertices.clone(), cfg)?,
            DomainSpec::Weights { weights } => Domain::from_weights(weights.clone())?,
            DomainSpec::Quasiflat { params, padding } => {
                Domain::from_weights(build_weights(params, padding.as_ref())?)?
            }
        })
    }

    pub fn from_profile(p: MomentProfile, cfg: &WeightConfig) -> Result<Domain> {
        let (weights, _) = weight_expansion_with(&p, cfg)?;
        Ok(Domain::Concave { weights, profile: Some(p) })
    }

    pub fn from_weights(w: WeightMultiset) -> Result<Domain> {
        if w.is_empty() {
            return Err(EchError::InvalidDomain("empty weight multiset".into()));
        }
        Ok(Domain::Concave { weights: w, profile: None })
    }

    pub fn area(&self) -> Scalar {
        match self {
            Domain::Ball(a) => &(a * a) / &Scalar::from_integer(2),
            Domain::Ellipsoid(e) => e.area(),
            Domain::Concave { weights, .. } => weights.area(),
        }
    }

    pub fn weights(&self) -> WeightMultiset {
        match self {
            Domain::Ball(a) => WeightMultiset::ball(a.clone()).expect("positive radius"),
            Domain::Ellipsoid(e) => ellipsoid_weights(e),
            Domain::Concave { weights, .. } => weights.clone(),
        }
    }

    /// Moment profile; concave domains without one are realized from their
    /// weights, subject to the realization limit.
    pub fn profile(&self, cfg: &WeightConfig) -> Result<MomentProfile> {
        match self {
            Domain::Ball(a) => Ok(MomentProfile::triangle(a.clone(), a.clone())),
            Domain::Ellipsoid(e) => Ok(e.profile()),
            Domain::Concave { profile: Some(p), .. } => Ok(p.clone()),
            Domain::Concave { weights, profile: None } => realize_with(weights, cfg),
        }
    }

    pub fn scale(&self, t: &ScaleFactor) -> Domain {
        match self {
            Domain::Ball(a) => Domain::Ball(a * t.value()),
            Domain::Ellipsoid(e) => Domain::Ellipsoid(e.scale(t)),
            Domain::Concave { weights, profile } => {
                Domain::Concave { weights: weights.scale(t), profile: profile.as_ref().map(|p| p.scale(t)) }
            }
        }
    }

    /// `c_k`, exact or as a certified interval.
    pub fn capacity(&self, k: u64, cfg: &CapacityConfig) -> Result<CapacityResult> {
        match self {
            Domain::Ball(a) => Ok(ball_result(a, k)),
            Domain::Ellipsoid(e) => ellipsoid_result(e, k, cfg),
            Domain::Concave { weights, .. } => multiset_capacity(weights, k, cfg),
        }
    }
}
