//! Brute-force reference computations on small windows.
//!
//! Everything here recomputes quantities from first principles (full state
//! enumeration, closed-form weights) rather than reusing the estimator or
//! sampler code paths, so the two can be checked against each other.

mod deviation;
mod dobrushin;
mod identity;

pub use deviation::{
    bound_shapes, concentration_scaling, tail_report, BoundShapes, ConcentrationScaling,
    TailEntry, TailReport,
};
pub use dobrushin::{dobrushin_report, DobrushinOptions, DobrushinReport};
pub use identity::{identity_checks, IdentityCheck};

use crate::estimator::CountTable;
use crate::lattice::{
    key_at, punctured_offsets, Alphabet, Boundary, Configuration, PatternKey, Window,
};
use crate::models::{IidParams, Markov1Params, ModelSpec, PolygonParams, RenewalParams};
use crate::models::{polygon_energy, string_prob};
use crate::{Error, Result, Site, Sym};
use std::collections::BTreeMap;

/// Largest state count the exact constructions will enumerate.
pub const MEASURE_GATE: u128 = 1 << 20;

/// An exact probability measure on the configurations of a small window,
/// stored as one probability per state.
///
/// States are indexed by reading the configuration as a base-`|A|` number
/// with site 0 as the most significant digit.
#[derive(Clone, Debug)]
pub struct ExactMeasure {
    template: Configuration,
    probs: Vec<f64>,
}

impl ExactMeasure {
    pub fn window(&self) -> &Window {
        self.template.window()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.template.alphabet()
    }

    pub fn boundary(&self) -> Boundary {
        self.template.boundary()
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Writes state `idx` into `config` (same window and alphabet assumed).
    pub fn fill(&self, idx: usize, config: &mut Configuration) {
        let a = self.alphabet().size();
        let n = self.window().len();
        let mut rest = idx;
        // Least significant digit is the last site; walk backwards.
        for site in (0..n).rev() {
            config.set(site, (rest % a) as Sym);
            rest /= a;
        }
        debug_assert_eq!(rest, 0);
    }

    pub fn config_for(&self, idx: usize) -> Configuration {
        let mut c = self.template.clone();
        self.fill(idx, &mut c);
        c
    }

    /// Visits every state in index order with its configuration.
    pub fn for_each<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(usize, &Configuration) -> Result<()>,
    {
        let mut scratch = self.template.clone();
        for idx in 0..self.probs.len() {
            self.fill(idx, &mut scratch);
            f(idx, &scratch)?;
        }
        Ok(())
    }

    /// Expectation of a configuration functional, accumulated in state order.
    pub fn expectation<F>(&self, f: F) -> f64
    where
        F: Fn(&Configuration) -> f64,
    {
        let mut scratch = self.template.clone();
        let mut acc = 0.0;
        for (idx, &p) in self.probs.iter().enumerate() {
            self.fill(idx, &mut scratch);
            acc += p * f(&scratch);
        }
        acc
    }

    /// Marginal law of the symbol at one site.
    pub fn marginal(&self, site: Site) -> Vec<f64> {
        let a = self.alphabet().size();
        let mut out = vec![0.0; a];
        let mut scratch = self.template.clone();
        for (idx, &p) in self.probs.iter().enumerate() {
            self.fill(idx, &mut scratch);
            out[scratch.get(site) as usize] += p;
        }
        out
    }
}

fn state_count(alphabet_size: usize, sites: usize) -> Result<usize> {
    let total = (alphabet_size as u128)
        .checked_pow(sites as u32)
        .filter(|&t| t <= MEASURE_GATE)
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "exact enumeration of {alphabet_size}^{sites} states exceeds the 2^20 gate"
            ))
        })?;
    Ok(total as usize)
}

/// Builds a measure from per-state log weights by stable normalization.
fn measure_from_log_weights<F>(template: Configuration, mut log_w: F) -> Result<ExactMeasure>
where
    F: FnMut(&Configuration) -> Result<f64>,
{
    let total = state_count(template.alphabet().size(), template.window().len())?;
    let mut scratch = template.clone();
    let filler = ExactMeasure { template: template.clone(), probs: vec![0.0; total] };
    let mut logs = Vec::with_capacity(total);
    for idx in 0..total {
        filler.fill(idx, &mut scratch);
        logs.push(log_w(&scratch)?);
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::PositivityViolated("all state weights vanish or diverge".into()));
    }
    let z: f64 = logs.iter().map(|&l| (l - m).exp()).sum();
    let probs: Vec<f64> = logs.iter().map(|&l| (l - m).exp() / z).collect();
    finish_measure(template, probs)
}

fn finish_measure(template: Configuration, probs: Vec<f64>) -> Result<ExactMeasure> {
    if let Some(idx) = probs.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::PositivityViolated(format!(
            "state {idx} has probability {} in the exact measure",
            probs[idx]
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::PositivityViolated(format!(
            "exact measure sums to {sum}, expected 1 within 1e-10"
        )));
    }
    Ok(ExactMeasure { template, probs })
}

/// Builds the exact finite-window reference measure for a model spec.
///
/// The construction fixes the boundary per model: product law on a free
/// window for `iid`, a ring (d=1) or torus (d=2) for `markov1`, a torus for
/// `polygon`, and the exact stationary law on a free line for `renewal`.
/// The renewal probabilities are taken as-is from the closed-form string
/// law, not renormalized; their sum is checked instead.
pub fn exact_measure(spec: &ModelSpec, window: &Window) -> Result<ExactMeasure> {
    match spec.model.as_str() {
        "iid" => {
            let p: IidParams = serde_json::from_value(spec.params.clone())?;
            let a = Alphabet::new(p.probs.len())?;
            check_prob_vec(&p.probs)?;
            let template = Configuration::filled(window.clone(), a, Boundary::Free, 0)?;
            measure_from_log_weights(template, |c| {
                Ok(c.data().iter().map(|&s| p.probs[s as usize].ln()).sum())
            })
        }
        "markov1" => {
            let p: Markov1Params = serde_json::from_value(spec.params.clone())?;
            markov1_measure(&p, window)
        }
        "polygon" => {
            let p: PolygonParams = serde_json::from_value(spec.params.clone())?;
            if window.d() != 2 {
                return Err(Error::InvalidParameter("polygon needs a 2-d window".into()));
            }
            let a = Alphabet::new(2)?;
            let template = Configuration::filled(window.clone(), a, Boundary::Periodic, 0)?;
            let all: Vec<Site> = (0..window.len()).collect();
            let beta = p.beta;
            measure_from_log_weights(template, move |c| {
                Ok(-beta * polygon_energy(c, &all, &p)?)
            })
        }
        "renewal" => {
            let p: RenewalParams = serde_json::from_value(spec.params.clone())?;
            p.validate()?;
            if window.d() != 1 {
                return Err(Error::InvalidParameter("renewal needs a 1-d window".into()));
            }
            let a = Alphabet::new(2)?;
            let template = Configuration::filled(window.clone(), a, Boundary::Free, 0)?;
            let total = state_count(2, window.len())?;
            let filler = ExactMeasure { template: template.clone(), probs: vec![0.0; total] };
            let mut scratch = template.clone();
            let mut probs = Vec::with_capacity(total);
            for idx in 0..total {
                filler.fill(idx, &mut scratch);
                probs.push(string_prob(&p, scratch.data()));
            }
            finish_measure(template, probs)
        }
        other => Err(Error::Parse(format!("unknown model '{other}'"))),
    }
}

fn check_prob_vec(probs: &[f64]) -> Result<()> {
    if probs.len() < 2 || probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "probability vector needs >= 2 strictly positive entries".into(),
        ));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("probabilities sum to {sum}, expected 1")));
    }
    Ok(())
}

fn markov1_measure(p: &Markov1Params, window: &Window) -> Result<ExactMeasure> {
    match (p.dim, p.beta, &p.transition) {
        (1, beta, t) => {
            if window.d() != 1 {
                return Err(Error::InvalidParameter("markov1 dim=1 needs a 1-d window".into()));
            }
            let trans: Vec<Vec<f64>> = match (beta, t) {
                (Some(b), None) => {
                    // Two-state chain with P(x,y) = exp(b s_x s_y) / (2 cosh b).
                    let z = 2.0 * b.cosh();
                    let same = b.exp() / z;
                    let diff = (-b).exp() / z;
                    vec![vec![same, diff], vec![diff, same]]
                }
                (None, Some(t)) => {
                    check_transition(t)?;
                    t.clone()
                }
                _ => {
                    return Err(Error::InvalidParameter(
                        "markov1 dim=1 takes either beta or a transition matrix".into(),
                    ))
                }
            };
            let a = Alphabet::new(trans.len())?;
            let template = Configuration::filled(window.clone(), a, Boundary::Periodic, 0)?;
            let n = window.len();
            // Ring weight: product of transition entries over all n bonds.
            measure_from_log_weights(template, move |c| {
                let d = c.data();
                let mut acc = 0.0;
                for i in 0..n {
                    acc += trans[d[i] as usize][d[(i + 1) % n] as usize].ln();
                }
                Ok(acc)
            })
        }
        (2, Some(b), None) => {
            if window.d() != 2 {
                return Err(Error::InvalidParameter("markov1 dim=2 needs a 2-d window".into()));
            }
            let a = Alphabet::new(2)?;
            let template = Configuration::filled(window.clone(), a, Boundary::Periodic, 0)?;
            let w = window.clone();
            // Torus weight: exp(b * sum of spin products over all bonds),
            // one right and one down bond per site.
            measure_from_log_weights(template, move |c| {
                let mut acc = 0.0;
                for site in 0..w.len() {
                    let s = spin(c.get(site));
                    let coords = w.coords(site);
                    for dv in [[0, 1], [1, 0]] {
                        let nb = c
                            .at_coords([coords[0] + dv[0], coords[1] + dv[1]])
                            .expect("periodic neighbor resolves");
                        acc += b * s * spin(nb);
                    }
                }
                Ok(acc)
            })
        }
        _ => Err(Error::InvalidParameter(
            "markov1 takes either dim=1 with beta or a transition matrix, or dim=2 with beta"
                .into(),
        )),
    }
}

fn check_transition(t: &[Vec<f64>]) -> Result<()> {
    let a = t.len();
    if a < 2 {
        return Err(Error::InvalidParameter("transition matrix needs >= 2 states".into()));
    }
    for row in t {
        if row.len() != a {
            return Err(Error::InvalidParameter("transition matrix must be square".into()));
        }
        if row.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::PositivityViolated("transition entries must be > 0".into()));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "transition row sums to {sum}, expected 1"
            )));
        }
    }
    Ok(())
}

fn spin(s: Sym) -> f64 {
    if s == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Site at the integer middle of the window.
pub fn center_site(window: &Window) -> Site {
    let e = window.extents();
    let c = if window.d() == 1 {
        [(e[0] / 2) as i64, 0]
    } else {
        [(e[0] / 2) as i64, (e[1] / 2) as i64]
    };
    window.index(c).expect("window middle is inside the window")
}

/// Exact law of one outer pattern together with the center symbol.
#[derive(Clone, Debug)]
pub struct PatternProb {
    /// Probability of seeing this pattern on the punctured ball.
    pub prob: f64,
    /// Joint probability of the pattern and each center symbol.
    pub joint: Vec<f64>,
    /// Conditional law of the center symbol given the pattern.
    pub conditional: Vec<f64>,
}

/// Exact pattern and conditional probabilities at the window center.
#[derive(Clone, Debug)]
pub struct PatternProbs {
    pub d: usize,
    pub radius: usize,
    pub center: Site,
    pub alphabet_size: usize,
    pub entries: BTreeMap<PatternKey, PatternProb>,
}

/// Exact distribution of the punctured-ball pattern of the given radius
/// observed around the window's center site, via full state enumeration.
pub fn exact_pattern_probs(measure: &ExactMeasure, radius: usize) -> Result<PatternProbs> {
    let w = measure.window();
    let center = center_site(w);
    if radius == 0 || 2 * radius + 1 > w.min_extent() {
        return Err(Error::PatternExceedsWindow { site: center, radius });
    }
    let d = w.d();
    let a = measure.alphabet();
    let offsets = punctured_offsets(d, radius);
    let mut entries: BTreeMap<PatternKey, PatternProb> = BTreeMap::new();
    measure.for_each(|idx, config| {
        let key = key_at(config, center, &offsets, &a)?;
        let e = entries.entry(key).or_insert_with(|| PatternProb {
            prob: 0.0,
            joint: vec![0.0; a.size()],
            conditional: vec![0.0; a.size()],
        });
        e.joint[config.get(center) as usize] += measure.prob(idx);
        Ok(())
    })?;
    let mut total = 0.0;
    for e in entries.values_mut() {
        e.prob = e.joint.iter().sum();
        total += e.prob;
        for (c, &j) in e.conditional.iter_mut().zip(e.joint.iter()) {
            *c = j / e.prob;
        }
    }
    debug_assert!((total - 1.0).abs() < 1e-9, "pattern probabilities sum to {total}");
    Ok(PatternProbs { d, radius, center, alphabet_size: a.size(), entries })
}

/// Smallest pattern or conditional probability over radii `1..=l_max`.
///
/// Every cylinder on `m` sites has probability at least `q_min^m` under a
/// positive specification, so this is bounded below by `q_min` to the
/// punctured-ball size of the largest radius.
pub fn alpha0(measure: &ExactMeasure, l_max: usize) -> Result<f64> {
    let mut a0 = f64::INFINITY;
    for ell in 1..=l_max {
        let probs = exact_pattern_probs(measure, ell)?;
        for e in probs.entries.values() {
            a0 = a0.min(e.prob);
            for &c in &e.conditional {
                a0 = a0.min(c);
            }
        }
    }
    Ok(a0)
}

/// Per-pattern deviation statistic: the empirical conditional log-likelihood
/// of the center symbol minus its exact-law counterpart, both weighted the
/// way the penalized criterion weights them.
///
/// Terms with a zero count contribute zero, matching the `0 * ln 0 = 0`
/// convention used by the estimator's statistics.
pub fn delta_n(table: &CountTable, probs: &PatternProbs, key: &PatternKey) -> Result<f64> {
    if table.d != probs.d
        || table.radius != probs.radius
        || table.alphabet.size() != probs.alphabet_size
    {
        return Err(Error::InvalidParameter(
            "count table and pattern law disagree on dimension, radius or alphabet".into(),
        ));
    }
    let entry = probs
        .entries
        .get(key)
        .ok_or_else(|| Error::InvalidParameter("pattern absent from the exact law".into()))?;
    let m = table.region_len as f64;
    let mut acc = 0.0;
    for a in 0..probs.alphabet_size {
        let n_a = table.count_with_symbol(key, a as Sym);
        if n_a > 0 {
            acc += (n_a as f64 / m) * table.conditional(key, a as Sym).ln();
        }
        acc -= entry.joint[a] * entry.conditional[a].ln();
    }
    Ok(acc)
}
