//! Monte-Carlo experiment harness: samples fields of growing size,
//! estimates per-site context radii, and reports over/under-estimation
//! frequencies against the shapes of the consistency bounds.

use crate::estimator::{estimate_all, EstimateConfig, PenaltyConfig};
use crate::lattice::{Boundary, Window};
use crate::models::{
    build_model, model_dim, ModelSpec, QMin, RenewalParams, SpecificationModel,
};
use crate::sampler::{renewal_exact_field, sample_field, SamplerOptions};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;

static THREADS: OnceLock<usize> = OnceLock::new();

/// Applies the `VNRF_THREADS` cap to the global thread pool once per
/// process and returns the resulting parallelism.
pub fn init_threads() -> usize {
    *THREADS.get_or_init(|| {
        let cap = std::env::var("VNRF_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        if let Some(n) = cap {
            // A pool built earlier in the process keeps its size; the cap
            // then reports whatever is actually in effect.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        rayon::current_num_threads()
    })
}

/// Penalty strength selection: exactly one of the three modes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PenaltySettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Pick delta just above the consistency threshold for the model's
    /// conditional lower bound.
    #[serde(default)]
    pub auto: bool,
}

/// A full experiment description, loadable from JSON (`"schema": 1`).
///
/// `sizes` are line lengths in dimension 1 and square sides in dimension 2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub schema: u32,
    pub model: ModelSpec,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    /// Heat-bath settings for models sampled by Gibbs sweeps; the renewal
    /// model is sampled exactly and ignores this section.
    #[serde(default)]
    pub sampler: SamplerOptions,
    pub penalty: PenaltySettings,
    /// Radius-range override. Values past the data-driven range leave the
    /// regime the consistency guarantees cover; reports label this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<usize>,
    /// Volume exponent for the reported bound shapes, default 0.5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub seed: u64,
    /// Report destination, recorded for provenance; the caller writes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Parse(format!(
                "unsupported experiment schema {} (expected 1)",
                self.schema
            )));
        }
        if self.sizes.is_empty() {
            return Err(Error::InvalidParameter("experiment needs at least one size".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "experiment sizes must be strictly increasing".into(),
            ));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidParameter(
                "experiment needs at least one replicate".into(),
            ));
        }
        let modes = [self.penalty.delta.is_some(), self.penalty.kappa.is_some(), self.penalty.auto];
        if modes.iter().filter(|&&m| m).count() != 1 {
            return Err(Error::InvalidParameter(
                "penalty settings need exactly one of delta, kappa, auto".into(),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must lie in (0, 1), got {eps}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: ExperimentSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// One outcome class: pooled count, fraction of classified sites, and the
/// binomial standard error of that fraction.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Frac {
    pub count: usize,
    pub fraction: f64,
    pub se: f64,
}

impl Frac {
    fn from_counts(count: usize, total: usize) -> Self {
        let p = count as f64 / total as f64;
        Frac { count, fraction: p, se: (p * (1.0 - p) / total as f64).sqrt() }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct MatchCount {
    pub matched: usize,
    pub total: usize,
}

/// Pooled outcome for one window size.
///
/// Classified sites are those whose true radius is readable and at most the
/// tested range; their over/under/match/unreachable fractions partition 1.
/// Sites whose true radius is not readable inside the window are counted as
/// `unresolved`, outside the partition.
#[derive(Clone, Debug, Serialize)]
pub struct SizeReport {
    pub size: usize,
    pub window_len: usize,
    pub region_len: usize,
    pub r_n: usize,
    pub replicates_ok: usize,
    pub replicates_failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
    pub classified: usize,
    pub unresolved: usize,
    pub unresolved_fraction: f64,
    pub over: Frac,
    pub under: Frac,
    pub matched: Frac,
    pub unreachable: Frac,
    /// Match statistics keyed by the true radius, classified sites only.
    pub match_by_true: BTreeMap<usize, MatchCount>,
}

/// Inputs of the consistency-bound shapes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TheoremBoundParams {
    pub d: usize,
    pub alphabet_size: usize,
    pub delta: f64,
    pub q_min: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TheoremBoundRow {
    pub region_len: usize,
    pub overestimation: f64,
    pub underestimation: f64,
}

/// Bound shapes per region size, constants fixed to one and labeled.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremBounds {
    pub params: TheoremBoundParams,
    pub c_delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    /// Always true: every undetermined leading constant is set to one.
    pub shape_only: bool,
    pub rows: Vec<TheoremBoundRow>,
}

/// Exponent coefficient of the overestimation bound:
/// `(2/3) (2 q_min δ / e) - 2^d log |A|`. Positive exactly when δ clears
/// the consistency threshold.
pub fn c_delta(d: usize, alphabet_size: usize, delta: f64, q_min: f64) -> f64 {
    let e = std::f64::consts::E;
    (2.0 / 3.0) * (2.0 * q_min * delta / e)
        - 2f64.powi(d as i32) * (alphabet_size as f64).ln()
}

/// Evaluates the over/under-estimation bound shapes for the given region
/// sizes: overestimation decays stretched-exponentially in `log m` plus a
/// volume term `exp(-m^(1-ε))`; underestimation is the volume term alone.
pub fn theorem_bound_shapes(
    params: &TheoremBoundParams,
    region_lens: &[usize],
) -> Result<TheoremBounds> {
    if params.d != 1 && params.d != 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be 1 or 2, got {}",
            params.d
        )));
    }
    if params.alphabet_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "alphabet needs at least 2 symbols, got {}",
            params.alphabet_size
        )));
    }
    if !(params.delta > 0.0) || !(params.q_min > 0.0 && params.q_min < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need delta > 0 and q_min in (0, 1), got {} and {}",
            params.delta, params.q_min
        )));
    }
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {}",
            params.epsilon
        )));
    }
    if region_lens.iter().any(|&m| m < 2) {
        return Err(Error::InvalidParameter(
            "bound shapes need region sizes of at least 2".into(),
        ));
    }
    let c = c_delta(params.d, params.alphabet_size, params.delta, params.q_min);
    let rows = region_lens
        .iter()
        .map(|&m| {
            let mf = m as f64;
            let logm = mf.ln();
            let volume = (-mf.powf(1.0 - params.epsilon)).exp();
            let exponent = (params.d + 1) as f64 / (2.0 * params.d as f64);
            TheoremBoundRow {
                region_len: m,
                overestimation: logm.powf(exponent) * (-c * logm.sqrt()).exp() + volume,
                underestimation: volume,
            }
        })
        .collect();
    Ok(TheoremBounds {
        params: *params,
        c_delta: c,
        warning: (c <= 0.0).then(|| "outside consistency regime".into()),
        shape_only: true,
        rows,
    })
}

/// Full experiment output: the resolved inputs, pooled per-size outcomes,
/// and the matching bound shapes.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub schema: u32,
    pub spec: ExperimentSpec,
    pub d: usize,
    pub alphabet_size: usize,
    pub q_min: QMin,
    pub delta: f64,
    pub kappa: f64,
    /// Set when the model's conditional bound shows delta at or below the
    /// consistency threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub below_threshold: Option<bool>,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_radius_note: Option<String>,
    pub sizes: Vec<SizeReport>,
    pub bounds: TheoremBounds,
}

#[derive(Clone, Debug, Default)]
struct ReplicateTally {
    region_len: usize,
    r_n: usize,
    over: usize,
    under: usize,
    matched: usize,
    unreachable: usize,
    unresolved: usize,
    match_by_true: BTreeMap<usize, MatchCount>,
}

fn resolve_penalty(
    settings: &PenaltySettings,
    d: usize,
    alphabet_size: usize,
    q: QMin,
) -> Result<PenaltyConfig> {
    match (settings.delta, settings.kappa, settings.auto) {
        (Some(delta), None, false) => {
            PenaltyConfig::from_delta(d, alphabet_size, delta, Some(q.value))
        }
        (None, Some(kappa), false) => {
            PenaltyConfig::from_kappa(d, alphabet_size, kappa, Some(q.value))
        }
        (None, None, true) => PenaltyConfig::auto(d, alphabet_size, q.value),
        _ => Err(Error::InvalidParameter(
            "penalty settings need exactly one of delta, kappa, auto".into(),
        )),
    }
}

fn experiment_window(d: usize, size: usize) -> Result<Window> {
    if d == 1 {
        Window::line(size)
    } else {
        Window::rect(size, size)
    }
}

fn sample_for(
    spec: &ExperimentSpec,
    model: &dyn SpecificationModel,
    d: usize,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<crate::lattice::Configuration> {
    if spec.model.model == "renewal" {
        let params: RenewalParams = serde_json::from_value(spec.model.params.clone())?;
        return renewal_exact_field(&params, size, rng);
    }
    let window = experiment_window(d, size)?;
    // Radius-0 kernels sample on a free window; everything else needs its
    // neighborhoods complete, hence periodic.
    let boundary = if model.dependence_radius() == Some(0) {
        Boundary::Free
    } else {
        Boundary::Periodic
    };
    sample_field(model, window, boundary, spec.sampler, rng)
}

fn run_replicate(
    spec: &ExperimentSpec,
    model: &dyn SpecificationModel,
    d: usize,
    size: usize,
    penalty: PenaltyConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ReplicateTally> {
    let config = sample_for(spec, model, d, size, rng)?;
    let batch = estimate_all(
        &config,
        &EstimateConfig { penalty, margin: None, max_radius: spec.max_radius },
    )?;
    let mut tally = ReplicateTally {
        region_len: batch.region_len,
        r_n: batch.r_n,
        ..ReplicateTally::default()
    };
    for est in &batch.estimates {
        match model.radius(&config, est.site) {
            Err(_) => tally.unresolved += 1,
            Ok(l_true) => {
                if l_true > batch.r_n {
                    tally.unreachable += 1;
                    continue;
                }
                match est.l_hat.cmp(&l_true) {
                    std::cmp::Ordering::Greater => tally.over += 1,
                    std::cmp::Ordering::Less => tally.under += 1,
                    std::cmp::Ordering::Equal => tally.matched += 1,
                }
                let mc = tally.match_by_true.entry(l_true).or_default();
                mc.total += 1;
                if est.l_hat == l_true {
                    mc.matched += 1;
                }
            }
        }
    }
    Ok(tally)
}

/// Runs the experiment: for every size, `replicates` independent
/// sample-and-estimate pipelines on split RNG streams, pooled into
/// per-size outcome fractions. Deterministic given the spec's seed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ErrorReport> {
    spec.validate()?;
    let threads = init_threads();
    let model = build_model(&spec.model)?;
    let d = model_dim(&spec.model)?;
    let alphabet_size = model.alphabet().size();
    let q = model.q_min();
    let penalty = resolve_penalty(&spec.penalty, d, alphabet_size, q)?;
    let mut sizes_out = Vec::with_capacity(spec.sizes.len());
    let mut region_lens = Vec::with_capacity(spec.sizes.len());
    for (i, &size) in spec.sizes.iter().enumerate() {
        let results: Vec<Result<ReplicateTally>> = (0..spec.replicates)
            .into_par_iter()
            .map(|rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(((i as u64) << 32) | rep as u64);
                run_replicate(spec, model.as_ref(), d, size, penalty, &mut rng)
            })
            .collect();
        let mut merged = ReplicateTally::default();
        let mut ok = 0usize;
        let mut first_error = None;
        for r in results {
            match r {
                Err(e) => {
                    if first_error.is_none() {
                        first_error = Some(e.to_string());
                    }
                }
                Ok(t) => {
                    if ok == 0 {
                        merged.region_len = t.region_len;
                        merged.r_n = t.r_n;
                    } else {
                        debug_assert_eq!(merged.region_len, t.region_len);
                        debug_assert_eq!(merged.r_n, t.r_n);
                    }
                    ok += 1;
                    merged.over += t.over;
                    merged.under += t.under;
                    merged.matched += t.matched;
                    merged.unreachable += t.unreachable;
                    merged.unresolved += t.unresolved;
                    for (k, v) in t.match_by_true {
                        let mc = merged.match_by_true.entry(k).or_default();
                        mc.matched += v.matched;
                        mc.total += v.total;
                    }
                }
            }
        }
        if ok == 0 {
            return Err(Error::Unsupported(format!(
                "size {size}: all {} replicates failed: {}",
                spec.replicates,
                first_error.unwrap_or_else(|| "unknown error".into())
            )));
        }
        let classified = merged.over + merged.under + merged.matched + merged.unreachable;
        if classified == 0 {
            return Err(Error::Unsupported(format!(
                "size {size}: no site had a readable true radius"
            )));
        }
        let region_sites = merged.region_len * ok;
        debug_assert_eq!(classified + merged.unresolved, region_sites);
        region_lens.push(merged.region_len);
        sizes_out.push(SizeReport {
            size,
            window_len: if d == 1 { size } else { size * size },
            region_len: merged.region_len,
            r_n: merged.r_n,
            replicates_ok: ok,
            replicates_failed: spec.replicates - ok,
            first_error,
            classified,
            unresolved: merged.unresolved,
            unresolved_fraction: merged.unresolved as f64 / region_sites as f64,
            over: Frac::from_counts(merged.over, classified),
            under: Frac::from_counts(merged.under, classified),
            matched: Frac::from_counts(merged.matched, classified),
            unreachable: Frac::from_counts(merged.unreachable, classified),
            match_by_true: merged.match_by_true,
        });
    }
    let bounds = theorem_bound_shapes(
        &TheoremBoundParams {
            d,
            alphabet_size,
            delta: penalty.delta,
            q_min: q.value,
            epsilon: spec.epsilon.unwrap_or(0.5),
        },
        &region_lens,
    )?;
    Ok(ErrorReport {
        schema: 1,
        spec: spec.clone(),
        d,
        alphabet_size,
        q_min: q,
        delta: penalty.delta,
        kappa: penalty.kappa,
        below_threshold: penalty.below_threshold,
        threads,
        max_radius_note: spec
            .max_radius
            .map(|r| format!("max radius override {r}: outside the guaranteed regime")),
        sizes: sizes_out,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::delta_threshold;
    use crate::sampler::Schedule;

    fn renewal_model() -> ModelSpec {
        ModelSpec {
            model: "renewal".into(),
            params: serde_json::json!({ "rho1": 0.5, "rho2": 0.25, "c1": 0.5, "c2": 1.5 }),
            seedless: true,
        }
    }

    fn base_spec(model: ModelSpec, sizes: Vec<usize>, replicates: usize) -> ExperimentSpec {
        ExperimentSpec {
            schema: 1,
            model,
            sizes,
            replicates,
            sampler: SamplerOptions { sweeps: 1, schedule: Schedule::Raster },
            penalty: PenaltySettings { delta: None, kappa: None, auto: true },
            max_radius: None,
            epsilon: None,
            seed: 11,
            out: None,
        }
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        let good = base_spec(renewal_model(), vec![1_000, 2_000], 2);
        assert!(good.validate().is_ok());
        let mut bad = good.clone();
        bad.schema = 2;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.sizes = vec![2_000, 1_000];
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.sizes.clear();
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.replicates = 0;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.penalty = PenaltySettings { delta: Some(12.0), kappa: None, auto: true };
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.epsilon = Some(1.5);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bound_shapes_match_frozen_arithmetic() {
        let params = TheoremBoundParams {
            d: 1,
            alphabet_size: 2,
            delta: 12.0,
            q_min: 0.25,
            epsilon: 0.5,
        };
        let b = theorem_bound_shapes(&params, &[10_000]).unwrap();
        // Volume term at m = 10^4, epsilon = 1/2: exp(-100).
        let want = (-100.0f64).exp();
        assert!((b.rows[0].underestimation - want).abs() <= 1e-12 * want);
        assert!(b.rows[0].overestimation > b.rows[0].underestimation);
        assert!(b.shape_only);
        // The threshold for these parameters is 2 log2 * 3e, about 11.3; the
        // coefficient changes sign exactly there.
        let thr = delta_threshold(1, 2, 0.25);
        assert!((thr - 2.0 * 2f64.ln() * 3.0 * std::f64::consts::E).abs() < 1e-12);
        assert!(c_delta(1, 2, 1.01 * thr, 0.25) > 0.0);
        assert!(c_delta(1, 2, 0.99 * thr, 0.25) < 0.0);
        assert!(theorem_bound_shapes(
            &TheoremBoundParams { delta: 0.99 * thr, ..params },
            &[10_000]
        )
        .unwrap()
        .warning
        .is_some());
        assert!(b.warning.is_none());
    }

    #[test]
    fn bound_shapes_validate_inputs() {
        let ok = TheoremBoundParams {
            d: 1,
            alphabet_size: 2,
            delta: 12.0,
            q_min: 0.25,
            epsilon: 0.5,
        };
        assert!(theorem_bound_shapes(&TheoremBoundParams { d: 3, ..ok }, &[100]).is_err());
        assert!(
            theorem_bound_shapes(&TheoremBoundParams { alphabet_size: 1, ..ok }, &[100])
                .is_err()
        );
        assert!(theorem_bound_shapes(&TheoremBoundParams { delta: 0.0, ..ok }, &[100]).is_err());
        assert!(theorem_bound_shapes(&TheoremBoundParams { q_min: 1.0, ..ok }, &[100]).is_err());
        assert!(
            theorem_bound_shapes(&TheoremBoundParams { epsilon: 1.0, ..ok }, &[100]).is_err()
        );
        assert!(theorem_bound_shapes(&ok, &[1]).is_err());
    }

    fn check_partition(report: &ErrorReport) {
        for s in &report.sizes {
            let total = s.over.fraction + s.under.fraction + s.matched.fraction
                + s.unreachable.fraction;
            assert!((total - 1.0).abs() < 1e-12, "partition sums to {total}");
            assert_eq!(
                s.over.count + s.under.count + s.matched.count + s.unreachable.count,
                s.classified
            );
        }
    }

    #[test]
    fn iid_experiment_finds_radius_one() {
        let model = ModelSpec {
            model: "iid".into(),
            params: serde_json::json!({ "probs": [0.5, 0.5] }),
            seedless: true,
        };
        let spec = base_spec(model, vec![1_000, 4_000], 3);
        let report = run_experiment(&spec).unwrap();
        check_partition(&report);
        assert_eq!(report.d, 1);
        assert_eq!(report.sizes.len(), 2);
        for s in &report.sizes {
            // True radius is 1 everywhere: unreachable and unresolved empty.
            assert_eq!(s.unreachable.count, 0);
            assert_eq!(s.unresolved, 0);
            assert_eq!(s.under.count, 0);
            assert!(s.matched.fraction >= 0.9, "match {}", s.matched.fraction);
        }
        let (a, b) = (&report.sizes[0], &report.sizes[1]);
        let pooled = (a.over.se.powi(2) + b.over.se.powi(2)).sqrt();
        assert!(b.over.fraction <= a.over.fraction + 2.0 * pooled);
    }

    #[test]
    fn renewal_experiment_reports_trend_data() {
        let spec = base_spec(renewal_model(), vec![3_000, 20_000], 4);
        let report = run_experiment(&spec).unwrap();
        check_partition(&report);
        for s in &report.sizes {
            assert!(s.replicates_ok == 4 && s.replicates_failed == 0);
            // Scans fail only near the window ends, well under the margin.
            assert!(s.unresolved_fraction < 0.05, "unresolved {}", s.unresolved_fraction);
            let two = s.match_by_true.get(&2).expect("radius-2 sites exist");
            assert!(two.total > 0);
        }
        let frac = |s: &SizeReport| {
            let mc = s.match_by_true[&2];
            (mc.matched as f64 / mc.total as f64, mc.total)
        };
        let (p_small, n_small) = frac(&report.sizes[0]);
        let (p_big, n_big) = frac(&report.sizes[1]);
        let pooled = (p_small * (1.0 - p_small) / n_small as f64
            + p_big * (1.0 - p_big) / n_big as f64)
            .sqrt();
        assert!(
            p_big + 2.0 * pooled >= p_small,
            "match among radius-2 sites fell from {p_small} to {p_big}"
        );
    }

    #[test]
    fn markov1_experiment_matches_at_scale() {
        let model = ModelSpec {
            model: "markov1".into(),
            params: serde_json::json!({ "dim": 1, "beta": 0.3 }),
            seedless: true,
        };
        let mut spec = base_spec(model, vec![20_000], 2);
        spec.sampler.sweeps = 300;
        let report = run_experiment(&spec).unwrap();
        check_partition(&report);
        let s = &report.sizes[0];
        assert!(s.matched.fraction >= 0.95, "match {}", s.matched.fraction);
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = base_spec(renewal_model(), vec![2_000], 3);
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn max_radius_override_is_labeled() {
        let mut spec = base_spec(renewal_model(), vec![2_000], 2);
        spec.max_radius = Some(2);
        let report = run_experiment(&spec).unwrap();
        assert!(report.max_radius_note.is_some());
        assert_eq!(report.sizes[0].r_n, 2);
    }
}
