//! Algebraic identity checks: each one recomputes both sides of an
//! equality claimed elsewhere in the crate through independent routes and
//! reports disagreements with a witness instead of panicking.

use crate::estimator::{
    count_patterns, log_likelihood_by_coarse, log_likelihood_mpl_form, log_likelihood_site_sum,
};
use crate::lattice::{
    ball_offsets, security_region, Alphabet, Boundary, Configuration, Resolved, Window,
};
use crate::models::{
    build_model, compose_specification, exact_sample, polygon_context, polygon_energy,
    polygon_region, ComposedKernel, ModelSpec, PolygonParams, RenewalParams,
};
use crate::{Error, Result, Site, Sym};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Outcome of one identity check over its configured trials.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Trials abandoned because a side could not be evaluated (enumeration
    /// budget, unresolved context); these count toward neither outcome.
    pub skipped: usize,
    pub max_error: f64,
    /// Description of the first failing instance, when any.
    pub witness: Option<String>,
}

impl IdentityCheck {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            failures: 0,
            skipped: 0,
            max_error: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, err: f64, tol: f64, witness: impl FnOnce() -> String) {
        self.max_error = self.max_error.max(err);
        if err > tol {
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
            self.failures += 1;
        }
    }

    fn record_mismatch(&mut self, mismatch: bool, witness: impl FnOnce() -> String) {
        if mismatch {
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
            self.failures += 1;
        }
    }
}

/// Runs every identity check with sub-seeds derived from `seed`.
pub fn identity_checks(seed: u64) -> Result<Vec<IdentityCheck>> {
    Ok(vec![
        region_formula_check(seed ^ 0x01)?,
        region_subset_oracle_check(seed ^ 0x02)?,
        region_monotonicity_check(seed ^ 0x03)?,
        range1_energy_check()?,
        loglik_forms_check(seed ^ 0x04)?,
        compose_gibbs_check(seed ^ 0x05)?,
        consistency_ratio_check(seed ^ 0x06)?,
        support_sufficiency_check(seed ^ 0x07)?,
    ])
}

fn polygon_params(range: usize) -> PolygonParams {
    let len = crate::lattice::ball_size(2, range) + 1;
    let mut couplings = vec![0.0; len];
    couplings[len - 1] = 1.0;
    PolygonParams { beta: 0.05, range, couplings }
}

fn random_config(
    window: Window,
    boundary: Boundary,
    ones_prob: f64,
    rng: &mut ChaCha8Rng,
) -> Configuration {
    let data: Vec<Sym> =
        (0..window.len()).map(|_| u8::from(rng.gen::<f64>() < ones_prob)).collect();
    Configuration::from_data(window, Alphabet::new(2).unwrap(), boundary, data)
        .expect("binary data fits the window")
}

fn abs_sites(
    config: &Configuration,
    site: Site,
    offsets: &[[i64; 2]],
) -> Result<BTreeSet<Site>> {
    let w = config.window();
    let c = w.coords(site);
    offsets
        .iter()
        .map(|&o| match w.resolve([c[0] + o[0], c[1] + o[1]], config.boundary()) {
            Resolved::In(s) => Ok(s),
            _ => Err(Error::ContextExceedsWindow(site)),
        })
        .collect()
}

/// Union of the regions of all sites whose region contains `i`. Only sites
/// within `range` of `i` can contribute: regions are clipped to that ball.
fn region_union_over_neighbors(
    config: &Configuration,
    i: Site,
    params: &PolygonParams,
) -> Result<BTreeSet<Site>> {
    let w = config.window();
    let ci = w.coords(i);
    let mut union = BTreeSet::new();
    for jo in ball_offsets(2, params.range) {
        let j = match w.resolve([ci[0] + jo[0], ci[1] + jo[1]], config.boundary()) {
            Resolved::In(s) => s,
            _ => return Err(Error::ContextExceedsWindow(i)),
        };
        let region = polygon_region(config, j, params)?;
        let sites = region.sites(config, j)?;
        if sites.binary_search(&i).is_ok() {
            union.extend(sites);
        }
    }
    Ok(union)
}

/// The context of a site against the union, over the configuration and its
/// center flip, of the regions containing that site.
fn region_formula_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("context-vs-region-union");
    let params = polygon_params(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = Window::rect(9, 9)?;
    let i = window.index([4, 4]).unwrap();
    for trial in 0..100 {
        let config = random_config(window.clone(), Boundary::Periodic, 0.5, &mut rng);
        check.trials += 1;
        let outcome = (|| -> Result<(BTreeSet<Site>, BTreeSet<Site>)> {
            let ctx = polygon_context(&config, i, &params)?;
            let lhs = abs_sites(&config, i, &ctx.offsets)?;
            let mut rhs = region_union_over_neighbors(&config, i, &params)?;
            let mut flipped = config.clone();
            flipped.set(i, 1 - config.get(i));
            rhs.extend(region_union_over_neighbors(&flipped, i, &params)?);
            rhs.remove(&i);
            Ok((lhs, rhs))
        })();
        match outcome {
            Err(_) => check.skipped += 1,
            Ok((lhs, rhs)) => {
                check.record_mismatch(lhs != rhs, || {
                    let only_l: Vec<_> = lhs.difference(&rhs).collect();
                    let only_r: Vec<_> = rhs.difference(&lhs).collect();
                    format!(
                        "trial {trial}: context has {} sites, union {}; \
                         context-only {only_l:?}, union-only {only_r:?}",
                        lhs.len(),
                        rhs.len()
                    )
                });
            }
        }
    }
    Ok(check)
}

/// Independent range-1 region oracle on a 5 by 5 patch, by exhausting all
/// 2^16 candidate fills that strictly surround the center.
///
/// A candidate is the filled set of a qualifying polygon when its 8-neighbor
/// boundary consists of symbol-1 cells forming one simple 4-cycle (every
/// boundary cell with exactly two 4-neighbors on the boundary, all boundary
/// cells 4-connected), the filled set has no holes, and the interior is
/// nonempty. Returns the clipped intersection as offsets plus the
/// truncation flag, mirroring the region contract.
fn subset_oracle_region(ones: u32) -> (Vec<[i64; 2]>, bool) {
    const SIDE: i64 = 5;
    const CENTER: usize = 12;
    let cell = |u: i64, v: i64| (u * SIDE + v) as usize;
    let mut nbr4 = [0u32; 25];
    let mut nbr8 = [0u32; 25];
    for u in 0..SIDE {
        for v in 0..SIDE {
            for du in -1..=1i64 {
                for dv in -1..=1i64 {
                    if du == 0 && dv == 0 {
                        continue;
                    }
                    let (nu, nv) = (u + du, v + dv);
                    if nu < 0 || nu >= SIDE || nv < 0 || nv >= SIDE {
                        continue;
                    }
                    nbr8[cell(u, v)] |= 1 << cell(nu, nv);
                    if du.abs() + dv.abs() == 1 {
                        nbr4[cell(u, v)] |= 1 << cell(nu, nv);
                    }
                }
            }
        }
    }
    let ball1: u32 = {
        let mut m = 0u32;
        for u in 1..=3i64 {
            for v in 1..=3i64 {
                m |= 1 << cell(u, v);
            }
        }
        m
    };
    let free: Vec<usize> = (0..25).filter(|c| ball1 & (1 << c) == 0).collect();
    let edge: Vec<usize> = (0..25)
        .filter(|&c| {
            let (u, v) = (c as i64 / SIDE, c as i64 % SIDE);
            u == 0 || u == SIDE - 1 || v == 0 || v == SIDE - 1
        })
        .collect();
    let mut intersection: Option<u32> = None;
    for bits in 0u32..(1 << free.len()) {
        let mut mask = ball1;
        for (t, &c) in free.iter().enumerate() {
            if bits >> t & 1 == 1 {
                mask |= 1 << c;
            }
        }
        // Boundary: mask cells with an 8-neighbor (or the patch exterior)
        // outside the mask. Edge cells always have exterior neighbors.
        let mut boundary = 0u32;
        for c in 0..25usize {
            if mask >> c & 1 == 0 {
                continue;
            }
            let full_interior = mask & nbr8[c] == nbr8[c] && nbr8[c].count_ones() == 8;
            if !full_interior {
                boundary |= 1 << c;
            }
        }
        if boundary & !ones != 0 || boundary >> CENTER & 1 == 1 {
            continue;
        }
        // Every boundary cell on a single simple 4-cycle.
        let mut ok = true;
        for c in 0..25usize {
            if boundary >> c & 1 == 1 && (boundary & nbr4[c]).count_ones() != 2 {
                ok = false;
                break;
            }
        }
        if !ok || boundary == 0 {
            continue;
        }
        let start = boundary.trailing_zeros() as usize;
        let mut reach = 1u32 << start;
        loop {
            let mut grown = reach;
            for c in 0..25usize {
                if reach >> c & 1 == 1 {
                    grown |= boundary & nbr4[c];
                }
            }
            if grown == reach {
                break;
            }
            reach = grown;
        }
        if reach != boundary {
            continue;
        }
        if mask & !boundary == 0 {
            continue;
        }
        // No holes: the complement must flood from the patch edge.
        let mut outside = 0u32;
        for &c in &edge {
            if mask >> c & 1 == 0 {
                outside |= 1 << c;
            }
        }
        loop {
            let mut grown = outside;
            for c in 0..25usize {
                if outside >> c & 1 == 1 {
                    grown |= !mask & nbr4[c];
                }
            }
            if grown == outside {
                break;
            }
            outside = grown;
        }
        if outside | mask != (1 << 25) - 1 {
            continue;
        }
        intersection = Some(match intersection {
            None => mask,
            Some(acc) => acc & mask,
        });
    }
    match intersection {
        None => (ball_offsets(2, 1), true),
        Some(mask) => {
            let mut offsets = Vec::new();
            let mut outside_clip = false;
            for c in 0..25usize {
                if mask >> c & 1 == 0 {
                    continue;
                }
                let (du, dv) = (c as i64 / SIDE - 2, c as i64 % SIDE - 2);
                if du.abs() <= 1 && dv.abs() <= 1 {
                    offsets.push([du, dv]);
                } else {
                    outside_clip = true;
                }
            }
            (offsets, outside_clip)
        }
    }
}

fn patch_ones(config: &Configuration) -> u32 {
    let mut ones = 0u32;
    for (c, &s) in config.data().iter().enumerate() {
        if s == 1 {
            ones |= 1 << c;
        }
    }
    ones
}

fn region_subset_oracle_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("range1-region-vs-subset-oracle");
    let params = polygon_params(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = Window::rect(5, 5)?;
    let center = window.index([2, 2]).unwrap();
    for &density in &[0.5f64, 0.7, 0.85] {
        for trial in 0..70 {
            let config = random_config(window.clone(), Boundary::Free, density, &mut rng);
            check.trials += 1;
            let got = match polygon_region(&config, center, &params) {
                Ok(r) => r,
                Err(_) => {
                    check.skipped += 1;
                    continue;
                }
            };
            let (mut want_offsets, want_trunc) = subset_oracle_region(patch_ones(&config));
            let mut got_offsets = got.offsets.clone();
            got_offsets.sort_unstable();
            want_offsets.sort_unstable();
            check.record_mismatch(
                got_offsets != want_offsets || got.truncated != want_trunc,
                || {
                    format!(
                        "density {density} trial {trial}: region {:?} truncated {} \
                         vs oracle {:?} truncated {}",
                        got_offsets, got.truncated, want_offsets, want_trunc
                    )
                },
            );
        }
    }
    Ok(check)
}

/// Turning one 0 into a 1 can only enlarge the polygon family, so the
/// region intersection can only shrink or stay.
fn region_monotonicity_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("range1-region-monotone-in-ones");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = Window::rect(5, 5)?;
    for trial in 0..120 {
        let config = random_config(window.clone(), Boundary::Free, 0.7, &mut rng);
        let ones = patch_ones(&config);
        let zeros: Vec<usize> = (0..25).filter(|c| ones >> c & 1 == 0).collect();
        if zeros.is_empty() {
            continue;
        }
        check.trials += 1;
        let flip = zeros[rng.gen_range(0..zeros.len())];
        let before = subset_oracle_region(ones);
        let after = subset_oracle_region(ones | 1 << flip);
        let before_set: BTreeSet<[i64; 2]> = before.0.iter().cloned().collect();
        let after_set: BTreeSet<[i64; 2]> = after.0.iter().cloned().collect();
        check.record_mismatch(!after_set.is_subset(&before_set), || {
            format!(
                "trial {trial}: flipping cell {flip} grew the region from {:?} to {:?}",
                before.0, after.0
            )
        });
    }
    Ok(check)
}

/// On the all-ones patch every term around the center is a product of nine
/// plus-spins, so the one-site energy is minus nine times the top coupling.
fn range1_energy_check() -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("range1-energy-all-ones");
    let params = polygon_params(1);
    let config = Configuration::filled(
        Window::rect(5, 5)?,
        Alphabet::new(2)?,
        Boundary::Free,
        1,
    )?;
    let center = config.window().index([2, 2]).unwrap();
    check.trials = 2;
    let h = polygon_energy(&config, &[center], &params)?;
    let expect = -9.0 * params.couplings[9];
    check.record((h - expect).abs(), 1e-12, || format!("energy {h}, expected {expect}"));
    let (offsets, truncated) = subset_oracle_region(patch_ones(&config));
    check.record_mismatch(truncated || offsets != ball_offsets(2, 1), || {
        format!("all-ones oracle region {offsets:?} truncated {truncated}")
    });
    Ok(check)
}

/// The grouped count-weighted divergence, the per-site sum, and the
/// pseudo-likelihood difference are three forms of one statistic.
fn loglik_forms_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("loglik-three-forms");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 500;
    for trial in 0..50 {
        let config = random_config(Window::line(n)?, Boundary::Periodic, 0.5, &mut rng);
        check.trials += 1;
        let region = security_region(config.window(), config.boundary())?;
        let fine = count_patterns(&config, &region, 2)?;
        let coarse = count_patterns(&config, &region, 1)?;
        let grouped = log_likelihood_by_coarse(&fine, &coarse)?;
        let mut keys: Vec<_> = grouped.keys().cloned().collect();
        keys.sort_unstable();
        for key in keys {
            let v1 = grouped[&key];
            let v2 = log_likelihood_site_sum(&config, &region, &fine, &coarse, &key)?;
            let v3 = log_likelihood_mpl_form(&config, &region, &fine, &coarse, &key)?;
            let scale = v1.abs().max(v2.abs()).max(v3.abs()).max(1.0);
            let err = ((v1 - v2).abs().max((v1 - v3).abs())) / scale;
            check.record(err, 1e-10, || {
                format!("trial {trial}: forms {v1}, {v2}, {v3} for one coarse pattern")
            });
        }
    }
    Ok(check)
}

fn ising_spec(beta: f64) -> ModelSpec {
    ModelSpec {
        model: "markov1".into(),
        params: serde_json::json!({ "dim": 1, "beta": beta }),
        seedless: true,
    }
}

/// Probability of one assignment in a composed kernel's canonical table.
fn kernel_prob(kernel: &ComposedKernel, asize: usize, values: &[(Site, Sym)]) -> f64 {
    let mut idx = 0usize;
    for &site in &kernel.sites {
        let v = values
            .iter()
            .find(|&&(s, _)| s == site)
            .map(|&(_, v)| v)
            .expect("assignment covers every kernel site");
        idx = idx * asize + v as usize;
    }
    kernel.probs[idx]
}

/// Direct Gibbs table for a site set of the nearest-neighbor chain on a
/// ring: weights from the bonds touching the set, normalized by brute
/// force. Independent of the composed-kernel recursion.
fn direct_gibbs_ring(
    config: &Configuration,
    beta: f64,
    sites: &[Site],
) -> Vec<f64> {
    let n = config.window().len();
    let spin = |s: Sym| 2.0 * f64::from(s) - 1.0;
    let mut scratch = config.clone();
    let count = 1usize << sites.len();
    let mut weights = Vec::with_capacity(count);
    for idx in 0..count {
        for (t, &site) in sites.iter().enumerate() {
            scratch.set(site, (idx >> (sites.len() - 1 - t) & 1) as Sym);
        }
        let mut h = 0.0;
        for &site in sites {
            for nb in [(site + n - 1) % n, (site + 1) % n] {
                let bond = beta * spin(scratch.get(site)) * spin(scratch.get(nb));
                // Bonds inside the set are counted once from each endpoint.
                if sites.contains(&nb) {
                    h += bond / 2.0;
                } else {
                    h += bond;
                }
            }
        }
        weights.push(h.exp());
    }
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

fn compose_gibbs_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("compose-vs-direct-gibbs");
    let beta = 0.3;
    let model = build_model(&ising_spec(beta))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..20 {
        let config = random_config(Window::line(12)?, Boundary::Periodic, 0.5, &mut rng);
        for sites in [vec![3usize, 4], vec![3, 4, 5]] {
            check.trials += 1;
            let composed = compose_specification(model.as_ref(), &config, &sites)?;
            let direct = direct_gibbs_ring(&config, beta, &sites);
            let mut err = 0.0f64;
            for (a, b) in composed.probs.iter().zip(&direct) {
                err = err.max((a - b).abs());
            }
            check.record(err, 1e-10, || {
                format!("trial {trial}, {} sites: worst probability gap {err}", sites.len())
            });
        }
    }
    Ok(check)
}

/// Nested-set ratio consistency: for any two assignments of the inner set
/// on a shared background, the outer kernel and the inner kernel give the
/// same odds.
fn consistency_ratio_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("compose-consistency-ratios");
    let model = build_model(&ising_spec(0.3))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = [3usize, 4, 5];
    for trial in 0..20 {
        let config = random_config(Window::line(12)?, Boundary::Periodic, 0.5, &mut rng);
        let outer = compose_specification(model.as_ref(), &config, &delta)?;
        for lambda in [vec![4usize], vec![3, 4]] {
            check.trials += 1;
            let inner = compose_specification(model.as_ref(), &config, &lambda)?;
            let rest: Vec<Site> = delta.iter().copied().filter(|s| !lambda.contains(s)).collect();
            let background: Vec<(Site, Sym)> =
                rest.iter().map(|&s| (s, config.get(s))).collect();
            let count = 1usize << lambda.len();
            let mut err = 0.0f64;
            for wi in 0..count {
                for ei in 0..count {
                    let assign = |idx: usize| -> Vec<(Site, Sym)> {
                        let mut v: Vec<(Site, Sym)> = lambda
                            .iter()
                            .enumerate()
                            .map(|(t, &s)| (s, (idx >> (lambda.len() - 1 - t) & 1) as Sym))
                            .collect();
                        v.extend(background.iter().copied());
                        v
                    };
                    let lhs = kernel_prob(&outer, 2, &assign(wi))
                        * kernel_prob(&inner, 2, &assign(ei));
                    let rhs = kernel_prob(&outer, 2, &assign(ei))
                        * kernel_prob(&inner, 2, &assign(wi));
                    err = err.max((lhs - rhs).abs());
                }
            }
            check.record(err, 1e-10, || {
                format!("trial {trial}, inner set of {}: worst ratio gap {err}", lambda.len())
            });
        }
    }
    Ok(check)
}

/// Symbols outside a composed kernel's reported support (and outside the
/// set itself) are irrelevant: resampling them leaves the table unchanged.
fn support_sufficiency_check(seed: u64) -> Result<IdentityCheck> {
    let mut check = IdentityCheck::new("compose-support-sufficiency");
    let params = RenewalParams { rho1: 0.5, rho2: 0.25, c1: 0.5, c2: 1.5 };
    let spec = ModelSpec {
        model: "renewal".into(),
        params: serde_json::to_value(&params)?,
        seedless: true,
    };
    let model = build_model(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 40;
    let sites = [19usize, 20];
    for trial in 0..15 {
        let data = exact_sample(&params, n, &mut rng);
        let config = Configuration::from_data(
            Window::line(n)?,
            Alphabet::new(2)?,
            Boundary::Free,
            data,
        )?;
        check.trials += 1;
        let base = match compose_specification(model.as_ref(), &config, &sites) {
            Ok(k) => k,
            Err(_) => {
                check.skipped += 1;
                continue;
            }
        };
        let keep: BTreeSet<Site> =
            base.support.iter().copied().chain(sites.iter().copied()).collect();
        let mut shuffled = config.clone();
        for site in 0..n {
            if !keep.contains(&site) {
                shuffled.set(site, rng.gen_range(0..2) as Sym);
            }
        }
        match compose_specification(model.as_ref(), &shuffled, &sites) {
            Err(_) => check.skipped += 1,
            Ok(re) => {
                let mut err = 0.0f64;
                for (a, b) in base.probs.iter().zip(&re.probs) {
                    err = err.max((a - b).abs());
                }
                let support_changed = base.support != re.support;
                check.record(err, 1e-12, || {
                    format!("trial {trial}: table moved by {err} after outside resampling")
                });
                check.record_mismatch(support_changed, || {
                    format!(
                        "trial {trial}: support changed from {:?} to {:?}",
                        base.support, re.support
                    )
                });
            }
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_oracle_handles_canonical_patches() {
        // All ones: the tight ring qualifies, so the intersection is the
        // radius-1 ball and nothing is clipped away.
        let (offsets, truncated) = subset_oracle_region((1 << 25) - 1);
        assert_eq!(offsets, ball_offsets(2, 1));
        assert!(!truncated);
        // All zeros: no boundary can carry ones, the family is vacuous.
        let (offsets, truncated) = subset_oracle_region(0);
        assert_eq!(offsets, ball_offsets(2, 1));
        assert!(truncated);
        // Exactly the tight ring of ones around the center.
        let mut ring = 0u32;
        for u in 1..=3i64 {
            for v in 1..=3i64 {
                if !(u == 2 && v == 2) {
                    ring |= 1 << (u * 5 + v);
                }
            }
        }
        let (offsets, truncated) = subset_oracle_region(ring);
        assert_eq!(offsets, ball_offsets(2, 1));
        assert!(!truncated);
    }

    #[test]
    fn direct_gibbs_tables_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let config = random_config(Window::line(12).unwrap(), Boundary::Periodic, 0.5, &mut rng);
        let t = direct_gibbs_ring(&config, 0.3, &[3, 4, 5]);
        assert_eq!(t.len(), 8);
        let sum: f64 = t.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(t.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn report_covers_every_check_and_true_identities_hold() {
        let checks = identity_checks(41).unwrap();
        let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "context-vs-region-union",
                "range1-region-vs-subset-oracle",
                "range1-region-monotone-in-ones",
                "range1-energy-all-ones",
                "loglik-three-forms",
                "compose-vs-direct-gibbs",
                "compose-consistency-ratios",
                "compose-support-sufficiency",
            ]
        );
        for c in &checks {
            assert!(c.trials > 0, "{} ran no trials", c.name);
            assert!(c.failures + c.skipped <= c.trials, "{} overcounts", c.name);
            assert!(c.skipped < c.trials, "{} skipped everything", c.name);
        }
        // Every check except the region-formula comparison is a true
        // identity of the implementation; those must hold exactly.
        for c in &checks[1..] {
            assert_eq!(
                c.failures, 0,
                "{} failed: {:?} (max error {})",
                c.name, c.witness, c.max_error
            );
        }
    }
}
