//! Model definitions: single-site specification kernels with data-dependent
//! contexts, plus composition of multi-site kernels from single-site ones.

mod baseline;
mod compose;
mod renewal;
pub(crate) mod polygon;

pub use baseline::{IidModel, Markov1Model};
pub use compose::{compose_specification, compose_specification_with_order, ComposedKernel};
pub use polygon::{
    polygon_context, polygon_energy, polygon_gamma0, polygon_region, PolygonModel, PolygonParams,
    RegionOutcome,
};
pub use renewal::{
    exact_sample, renewal_boundary_scan, renewal_gamma0, string_prob, RenewalModel, RenewalParams,
    ScanResult,
};

use crate::lattice::{max_norm, Alphabet, Configuration};
use crate::{Error, Result, Site};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Uniform lower bound on single-site conditional probabilities.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QMin {
    pub value: f64,
    /// True when the value is a numerical estimate (finite scan) rather than
    /// a rigorous bound.
    pub estimated: bool,
}

/// Context of a site: the offsets (relative coordinates) whose symbols
/// determine the single-site kernel there, and whether a range truncation
/// was active while computing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextResult {
    pub offsets: Vec<[i64; 2]>,
    pub truncated: bool,
}

impl ContextResult {
    /// Radius of the smallest centered ball containing the context.
    /// An empty context (i.i.d. site) reports radius 1: radius zero is not
    /// distinguishable by the estimator and is folded into 1 by convention.
    pub fn radius(&self) -> usize {
        self.offsets.iter().map(|&o| max_norm(o) as usize).max().unwrap_or(1).max(1)
    }

    /// Resolve offsets around `site` to linear indices where possible.
    pub fn sites(&self, config: &Configuration, site: Site) -> Result<Vec<Site>> {
        let w = config.window();
        let c = w.coords(site);
        let mut out = Vec::with_capacity(self.offsets.len());
        for &o in &self.offsets {
            match w.resolve([c[0] + o[0], c[1] + o[1]], config.boundary()) {
                crate::lattice::Resolved::In(s) => out.push(s),
                _ => return Err(Error::ContextExceedsWindow(site)),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// A translation-covariant single-site specification kernel.
///
/// Implementations only ever address the lattice through offsets relative to
/// the queried site, which is what makes them translation covariant.
pub trait SpecificationModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn alphabet(&self) -> Alphabet;

    /// Dependence radius `D`: the kernel at a site reads symbols only inside
    /// the punctured ball of radius `D`. `None` means unbounded (the renewal
    /// model scans as far as the data requires).
    fn dependence_radius(&self) -> Option<usize>;

    fn q_min(&self) -> QMin;

    /// Conditional law of the symbol at `site` given the rest, as a
    /// probability vector indexed by symbol.
    fn gamma0(&self, config: &Configuration, site: Site) -> Result<Vec<f64>>;

    /// The (data-dependent) context of `site`.
    fn context(&self, config: &Configuration, site: Site) -> Result<ContextResult>;

    /// Radius of the context at `site`.
    fn radius(&self, config: &Configuration, site: Site) -> Result<usize> {
        Ok(self.context(config, site)?.radius())
    }
}

/// On-disk model description.
///
/// ```json
/// { "model": "renewal",
///   "params": { "rho1": 0.5, "rho2": 0.25, "c1": 0.5, "c2": 1.5 },
///   "seedless": true }
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: String,
    pub params: serde_json::Value,
    #[serde(default = "default_true")]
    pub seedless: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IidParams {
    pub probs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Markov1Params {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
}

pub fn build_model(spec: &ModelSpec) -> Result<Box<dyn SpecificationModel>> {
    match spec.model.as_str() {
        "renewal" => {
            let p: RenewalParams = serde_json::from_value(spec.params.clone())?;
            Ok(Box::new(RenewalModel::new(p)?))
        }
        "polygon" => {
            let p: PolygonParams = serde_json::from_value(spec.params.clone())?;
            Ok(Box::new(PolygonModel::new(p)?))
        }
        "iid" => {
            let p: IidParams = serde_json::from_value(spec.params.clone())?;
            Ok(Box::new(IidModel::new(p.probs)?))
        }
        "markov1" => {
            let p: Markov1Params = serde_json::from_value(spec.params.clone())?;
            match (p.dim, p.beta, p.transition) {
                (1, None, Some(t)) => Ok(Box::new(Markov1Model::chain(t)?)),
                (1, Some(b), None) => Ok(Box::new(Markov1Model::ising_chain(b)?)),
                (2, Some(b), None) => Ok(Box::new(Markov1Model::ising_plane(b)?)),
                _ => Err(Error::InvalidParameter(
                    "markov1 takes either dim=1 with a transition matrix, or dim=1|2 with beta"
                        .into(),
                )),
            }
        }
        other => Err(Error::Parse(format!("unknown model '{other}'"))),
    }
}

/// Lattice dimension a model spec lives on.
///
/// The i.i.d. kernel is dimension-free; it reports 1 by convention (runs on a
/// line unless a caller embeds it elsewhere).
pub fn model_dim(spec: &ModelSpec) -> Result<usize> {
    match spec.model.as_str() {
        "renewal" | "iid" => Ok(1),
        "polygon" => Ok(2),
        "markov1" => {
            let p: Markov1Params = serde_json::from_value(spec.params.clone())?;
            if p.dim == 1 || p.dim == 2 {
                Ok(p.dim)
            } else {
                Err(Error::InvalidParameter(format!("markov1 dim must be 1 or 2, got {}", p.dim)))
            }
        }
        other => Err(Error::Parse(format!("unknown model '{other}'"))),
    }
}

pub fn load_model_spec(path: impl AsRef<Path>) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)?;
    let spec: ModelSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("model file: {e}")))?;
    Ok(spec)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Box<dyn SpecificationModel>> {
    build_model(&load_model_spec(path)?)
}
