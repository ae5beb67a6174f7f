//! Run configuration shared by all subcommands.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::green::Domain;
use crate::lattice::{Direction, Site};
use crate::model::{ModelDoc, ModelSpec};

/// Every key any subcommand reads. Keys a command does not use are ignored by
/// it, unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_replicates: Option<u64>,
    /// `"exact"` or `"monte-carlo"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_lo: Option<Vec<i32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_hi: Option<Vec<i32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<i32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma2_gammas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Half weights `s(±e_i)` of a symmetric kernel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Directions such as `"+1"` or `"-2"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Resolves the model from, in order: the fixture name, the inline model, the model file.
    pub fn resolve_model(&self) -> Result<ModelSpec> {
        if let Some(name) = &self.fixture {
            return fixtures::fixture(name);
        }
        if let Some(doc) = &self.model {
            return ModelSpec::from_doc(doc);
        }
        if let Some(path) = &self.model_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read model file {}: {e}", path.display())))?;
            return ModelSpec::from_json(&text);
        }
        Err(Error::Config("no model: give a fixture, an inline model or a model_file".into()))
    }

    /// Replaces the model source by the inline document so the header is self-contained.
    pub fn with_inline_model(mut self, model: &ModelSpec) -> Self {
        self.model = Some(model.to_doc());
        self.model_file = None;
        self
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.master_seed.ok_or_else(|| Error::Config("master_seed is required for this command".into()))
    }

    pub fn require_gamma(&self) -> Result<f64> {
        self.gamma.ok_or_else(|| Error::Config("gamma is required for this command".into()))
    }

    /// `gammas`, or the single `gamma`.
    pub fn gamma_list(&self) -> Result<Vec<f64>> {
        match (&self.gammas, self.gamma) {
            (Some(g), _) if !g.is_empty() => Ok(g.clone()),
            (_, Some(g)) => Ok(vec![g]),
            _ => Err(Error::Config("gamma or gammas is required for this command".into())),
        }
    }

    /// The box `domain_lo..=domain_hi`, by default `{-1,0,1}^d`.
    pub fn domain(&self, d: usize) -> Result<Domain> {
        match (&self.domain_lo, &self.domain_hi) {
            (Some(lo), Some(hi)) => {
                if lo.len() != d || hi.len() != d {
                    return Err(Error::Config(format!("domain bounds must have {d} coordinates")));
                }
                Domain::rect(lo, hi)
            }
            (None, None) => Domain::cube(d, 1),
            _ => Err(Error::Config("give both domain_lo and domain_hi".into())),
        }
    }

    pub fn start(&self) -> Result<Site> {
        self.z0.as_deref().map_or(Ok(Site::ORIGIN), Site::from_coords)
    }

    pub fn direction_list(&self, d: usize) -> Result<Vec<Direction>> {
        match &self.directions {
            Some(list) => list.iter().map(|s| s.parse()).collect(),
            None => (1..=d).map(|axis| Direction::new(axis, 1)).collect(),
        }
    }
}
