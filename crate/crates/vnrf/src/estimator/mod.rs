//! Penalized estimation of per-site context radii.
//!
//! The pipeline: count punctured-ball patterns of every radius up to the
//! data-driven range over the security region, form the likelihood-ratio
//! statistic between adjacent radii, and pick at each site the smallest
//! radius whose every larger rival fails to beat its penalty.

mod counts;
mod stats;

pub use counts::{count_patterns, CountTable, Counts};
pub use stats::{
    kl_divergence, log_likelihood_by_coarse, log_likelihood_mpl_form, log_likelihood_site_sum,
    KlValue,
};

use crate::lattice::{
    extract_pattern, key_at, pattern_key, punctured_offsets, security_region,
    security_region_with_margin, shell_size, Boundary, Configuration, Pattern, PatternKey,
};
use crate::{Error, Result, Site};
use std::collections::HashMap;

/// Penalty constant as a function of the deviation scale `δ`.
pub fn kappa_from_delta(d: usize, delta: f64) -> f64 {
    5.0f64.powi(d as i32) * 1.5f64.sqrt() * delta
}

/// Inverse of [`kappa_from_delta`].
pub fn delta_from_kappa(d: usize, kappa: f64) -> f64 {
    kappa / (5.0f64.powi(d as i32) * 1.5f64.sqrt())
}

/// Smallest deviation scale with a consistency guarantee for a field whose
/// one-point conditionals are bounded below by `q_min`: the guarantee needs
/// `δ` strictly above this value.
pub fn delta_threshold(d: usize, alphabet_size: usize, q_min: f64) -> f64 {
    2.0f64.powi(d as i32) * (alphabet_size as f64).ln() * 3.0 * std::f64::consts::E
        / (4.0 * q_min)
}

/// Penalty strength, kept in both of its equivalent parameterizations.
#[derive(Clone, Copy, Debug)]
pub struct PenaltyConfig {
    pub d: usize,
    pub alphabet_size: usize,
    pub delta: f64,
    pub kappa: f64,
    /// Lower bound on the model's conditional probabilities, when known.
    pub q_min_hint: Option<f64>,
    /// Set when the hint shows `delta` at or below the guarantee threshold.
    /// Estimation still runs; the flag is for reporting.
    pub below_threshold: Option<bool>,
}

impl PenaltyConfig {
    pub fn from_delta(
        d: usize,
        alphabet_size: usize,
        delta: f64,
        q_min_hint: Option<f64>,
    ) -> Result<Self> {
        check_dims(d, alphabet_size)?;
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "deviation scale delta must be positive, got {delta}"
            )));
        }
        if let Some(q) = q_min_hint {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "conditional lower bound must lie in (0, 1), got {q}"
                )));
            }
        }
        let below_threshold =
            q_min_hint.map(|q| !(delta > delta_threshold(d, alphabet_size, q)));
        Ok(PenaltyConfig {
            d,
            alphabet_size,
            delta,
            kappa: kappa_from_delta(d, delta),
            q_min_hint,
            below_threshold,
        })
    }

    pub fn from_kappa(
        d: usize,
        alphabet_size: usize,
        kappa: f64,
        q_min_hint: Option<f64>,
    ) -> Result<Self> {
        Self::from_delta(d, alphabet_size, delta_from_kappa(d, kappa), q_min_hint)
    }

    /// Default choice just above the guarantee threshold for a known `q_min`.
    pub fn auto(d: usize, alphabet_size: usize, q_min: f64) -> Result<Self> {
        let delta = 1.01 * delta_threshold(d, alphabet_size, q_min);
        Self::from_delta(d, alphabet_size, delta, Some(q_min))
    }

    /// Whether the stored pair (delta, kappa) satisfies the defining relation.
    pub fn consistent(&self) -> bool {
        let want = kappa_from_delta(self.d, self.delta);
        (self.kappa - want).abs() <= 1e-12 * want.abs().max(1.0)
    }
}

fn check_dims(d: usize, alphabet_size: usize) -> Result<()> {
    if d != 1 && d != 2 {
        return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {d}")));
    }
    if alphabet_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "alphabet needs at least 2 symbols, got {alphabet_size}"
        )));
    }
    Ok(())
}

/// Penalty against radius-`ℓ` contexts in a window of `window_len` sites.
#[derive(Clone, Copy, Debug)]
pub struct Penalty {
    pub value: f64,
    /// The alphabet power overflowed the float range; `value` is infinite.
    pub saturated: bool,
}

/// `pen(ℓ, n) = κ |A|^(1 + shell(ℓ)) log n` with `n` the window volume.
///
/// In one dimension the shell has 2 sites at every radius, so the penalty
/// does not grow with `ℓ`; in two dimensions it grows geometrically and
/// saturates to infinity once the power leaves the `f64` range.
pub fn penalty(cfg: &PenaltyConfig, ell: usize, window_len: usize) -> Penalty {
    let exponent = 1 + shell_size(cfg.d, ell);
    let log_pow = exponent as f64 * (cfg.alphabet_size as f64).ln();
    if log_pow >= f64::MAX.ln() {
        return Penalty { value: f64::INFINITY, saturated: true };
    }
    let value = cfg.kappa * log_pow.exp() * (window_len as f64).ln();
    Penalty { value, saturated: !value.is_finite() }
}

/// Largest radius the data volume lets the estimator test.
#[derive(Clone, Copy, Debug)]
pub struct MaxRadius {
    pub value: usize,
    /// The growth formula gave 0 and the value was raised to 1.
    pub clamped: bool,
}

/// `R = floor((log m)^(1/(2d)))` for a security region of `m` sites,
/// clamped below at 1.
pub fn max_radius(region_len: usize, d: usize) -> MaxRadius {
    assert!(region_len >= 1);
    let raw = (region_len as f64).ln().powf(1.0 / (2.0 * d as f64)).floor() as usize;
    if raw < 1 {
        MaxRadius { value: 1, clamped: true }
    } else {
        MaxRadius { value: raw, clamped: false }
    }
}

/// Options for a whole-window estimation pass.
#[derive(Clone, Debug)]
pub struct EstimateConfig {
    pub penalty: PenaltyConfig,
    /// Security margin override; `None` uses the margin formula for the
    /// window volume.
    pub margin: Option<usize>,
    /// Radius-range override; a value differing from the data-driven range
    /// flags the batch so reports can label it.
    pub max_radius: Option<usize>,
}

/// One radius tested at a site: the statistic against its penalty.
#[derive(Clone, Copy, Debug)]
pub struct RadiusStat {
    pub radius: usize,
    pub log_likelihood: f64,
    pub penalty: f64,
}

/// Estimate at one site.
#[derive(Clone, Debug)]
pub struct SiteEstimate {
    pub site: Site,
    pub l_hat: usize,
    /// The observed pattern on the punctured ball of radius `l_hat`.
    pub context: Pattern,
    /// Empirical center law given that pattern; sums to 1 because the
    /// pattern was observed at this very site.
    pub gamma_hat: Vec<f64>,
    /// Statistic and penalty for every tested radius `2..=R`, kept for audit.
    pub stats: Vec<RadiusStat>,
}

/// Estimates for every security-region site, with the run's bookkeeping.
#[derive(Clone, Debug)]
pub struct EstimateBatch {
    /// Radius range actually tested.
    pub r_n: usize,
    pub r_n_clamped: bool,
    /// The range is 1, so nothing was tested and every site reports 1.
    pub radius_range_trivial: bool,
    /// An override replaced the data-driven range.
    pub max_radius_overridden: bool,
    pub margin: usize,
    pub region_len: usize,
    pub window_len: usize,
    pub penalty: PenaltyConfig,
    pub estimates: Vec<SiteEstimate>,
}

/// The radius picked by the qualifying-set rule from one site's statistics.
///
/// `stats` must hold radii `2..=r_n` in order. A candidate `ℓ` qualifies
/// when every larger radius fails to beat its penalty; the estimate is the
/// smallest qualifying candidate in `1..r_n`, or `r_n` when none qualifies.
pub fn select_radius(stats: &[RadiusStat], r_n: usize) -> usize {
    debug_assert_eq!(stats.len() + 1, r_n.max(1));
    'candidate: for ell in 1..r_n {
        for s in &stats[ell - 1..] {
            if s.log_likelihood > s.penalty {
                continue 'candidate;
            }
        }
        return ell;
    }
    r_n
}

/// Run the estimator at every security-region site of `config`.
pub fn estimate_all(config: &Configuration, opts: &EstimateConfig) -> Result<EstimateBatch> {
    let window = config.window();
    let d = window.d();
    let alphabet = config.alphabet();
    if opts.penalty.d != d || opts.penalty.alphabet_size != alphabet.size() {
        return Err(Error::InvalidParameter(format!(
            "penalty configured for d={} |A|={}, data has d={} |A|={}",
            opts.penalty.d,
            opts.penalty.alphabet_size,
            d,
            alphabet.size()
        )));
    }
    let boundary = config.boundary();
    let region = match opts.margin {
        Some(m) => security_region_with_margin(window, boundary, m)?,
        None => security_region(window, boundary)?,
    };
    let data_driven = max_radius(region.len(), d);
    let (r_n, max_radius_overridden) = match opts.max_radius {
        Some(0) => {
            return Err(Error::InvalidParameter("radius range must be at least 1".into()))
        }
        Some(r) => (r, r != data_driven.value),
        None => (data_driven.value, false),
    };
    // Pattern reads reach r_n sites out; without periodic wraparound the
    // margin must cover that distance for every region site at once.
    if !matches!(boundary, Boundary::Periodic) && region.margin() < r_n {
        return Err(Error::InvalidParameter(format!(
            "security margin {} cannot accommodate radius range {}",
            region.margin(),
            r_n
        )));
    }

    let tables: Vec<CountTable> =
        (1..=r_n).map(|ell| count_patterns(config, &region, ell)).collect::<Result<_>>()?;
    let window_len = window.len();
    let pens: Vec<Penalty> =
        (2..=r_n).map(|k| penalty(&opts.penalty, k, window_len)).collect();
    let grouped: Vec<HashMap<PatternKey, f64>> = (2..=r_n)
        .map(|k| log_likelihood_by_coarse(&tables[k - 1], &tables[k - 2]))
        .collect::<Result<_>>()?;
    let coarse_offsets: Vec<Vec<[i64; 2]>> =
        (1..r_n.max(1)).map(|ell| punctured_offsets(d, ell)).collect();

    let mut estimates = Vec::with_capacity(region.len());
    for site in region.sites() {
        let mut site_stats = Vec::with_capacity(pens.len());
        for k in 2..=r_n {
            let ckey = key_at(config, site, &coarse_offsets[k - 2], &alphabet)?;
            let log_likelihood = *grouped[k - 2]
                .get(&ckey)
                .expect("coarse pattern at a region site was counted");
            site_stats.push(RadiusStat {
                radius: k,
                log_likelihood,
                penalty: pens[k - 2].value,
            });
        }
        let l_hat = select_radius(&site_stats, r_n);
        let context = extract_pattern(config, site, l_hat)?;
        let gamma_hat = tables[l_hat - 1].conditional_law(&pattern_key(&context, &alphabet));
        debug_assert!((gamma_hat.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        estimates.push(SiteEstimate { site, l_hat, context, gamma_hat, stats: site_stats });
    }

    Ok(EstimateBatch {
        r_n,
        r_n_clamped: data_driven.clamped && !max_radius_overridden,
        radius_range_trivial: r_n < 2,
        max_radius_overridden,
        margin: region.margin(),
        region_len: region.len(),
        window_len,
        penalty: opts.penalty,
        estimates,
    })
}
