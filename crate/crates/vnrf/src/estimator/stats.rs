//! Divergences and the penalized log-likelihood statistic, in three
//! independently computed forms.

use super::counts::CountTable;
use crate::lattice::{
    key_at, pattern_key, punctured_offsets, restriction_indices, decode_key, PatternKey,
    SecurityRegion,
};
use crate::lattice::Configuration;
use crate::{Error, Result};
use std::collections::HashMap;

/// Kullback-Leibler divergence with the 0 log 0 = 0 convention. `infinite`
/// is set when some symbol has positive mass under `p` but none under `q`.
#[derive(Clone, Copy, Debug)]
pub struct KlValue {
    pub value: f64,
    pub infinite: bool,
}

pub fn kl_divergence(p: &[f64], q: &[f64]) -> KlValue {
    debug_assert_eq!(p.len(), q.len());
    let mut v = 0.0;
    for (&pa, &qa) in p.iter().zip(q) {
        if pa == 0.0 {
            continue;
        }
        if qa == 0.0 {
            return KlValue { value: f64::INFINITY, infinite: true };
        }
        v += pa * (pa / qa).ln();
    }
    KlValue { value: v, infinite: false }
}

/// The likelihood-ratio statistic for every coarse pattern at once, in its
/// count-weighted divergence form: for each outer pattern of the fine
/// radius, its occurrence count times the divergence of its empirical
/// center law from that of its restriction.
///
/// Infinite divergences cannot occur here: a symbol seen together with a
/// fine pattern was also seen with the coarse restriction of that pattern.
/// This is asserted, not handled.
pub fn log_likelihood_by_coarse(
    fine: &CountTable,
    coarse: &CountTable,
) -> Result<HashMap<PatternKey, f64>> {
    if fine.radius != coarse.radius + 1 || fine.d != coarse.d {
        return Err(Error::InvalidParameter(format!(
            "likelihood statistic needs tables of adjacent radii, got {} and {}",
            fine.radius, coarse.radius
        )));
    }
    let idx = restriction_indices(fine.d, fine.radius);
    let mut out: HashMap<PatternKey, f64> = HashMap::new();
    // Sorted fine keys give a deterministic float accumulation order.
    for key in fine.sorted_keys() {
        let fine_counts = &fine.map[&key];
        let pattern = decode_key(&key, fine.d, fine.radius, &fine.alphabet);
        let coarse_values: Vec<_> = idx.iter().map(|&i| pattern.values()[i]).collect();
        let coarse_key = pattern_key(
            &crate::lattice::Pattern::new(fine.d, coarse.radius, coarse_values)?,
            &fine.alphabet,
        );
        let p_fine = fine.conditional_law(&key);
        let p_coarse = coarse.conditional_law(&coarse_key);
        let kl = kl_divergence(&p_fine, &p_coarse);
        assert!(
            !kl.infinite,
            "infinite divergence between empirical laws of nested patterns; \
             count tables are inconsistent"
        );
        *out.entry(coarse_key).or_insert(0.0) += fine_counts.total as f64 * kl.value;
    }
    Ok(out)
}

/// Same statistic for one coarse pattern, summed site by site: each region
/// site carrying the pattern contributes its fine pattern's average
/// center-symbol log-ratio.
pub fn log_likelihood_site_sum(
    config: &Configuration,
    region: &SecurityRegion,
    fine: &CountTable,
    coarse: &CountTable,
    target: &PatternKey,
) -> Result<f64> {
    let fine_offsets = punctured_offsets(fine.d, fine.radius);
    let coarse_offsets = punctured_offsets(coarse.d, coarse.radius);
    let a = fine.alphabet;
    let mut total = 0.0;
    for site in region.sites() {
        let ckey = key_at(config, site, &coarse_offsets, &a)?;
        if ckey != *target {
            continue;
        }
        let fkey = key_at(config, site, &fine_offsets, &a)?;
        let n_fine = fine.count(&fkey);
        debug_assert!(n_fine > 0);
        let mut term = 0.0;
        for sym in 0..a.size() {
            let n_a = fine.count_with_symbol(&fkey, sym as crate::Sym);
            if n_a == 0 {
                continue;
            }
            let p_f = fine.conditional(&fkey, sym as crate::Sym);
            let p_c = coarse.conditional(&ckey, sym as crate::Sym);
            assert!(p_c > 0.0, "symbol seen at fine pattern but not at its restriction");
            term += n_a as f64 * (p_f / p_c).ln();
        }
        total += term / n_fine as f64;
    }
    Ok(total)
}

/// Same statistic once more, as a difference of two maximized
/// pseudo-likelihoods: the per-site average of the fine-pattern value
/// minus the coarse-pattern value.
pub fn log_likelihood_mpl_form(
    config: &Configuration,
    region: &SecurityRegion,
    fine: &CountTable,
    coarse: &CountTable,
    target: &PatternKey,
) -> Result<f64> {
    let fine_offsets = punctured_offsets(fine.d, fine.radius);
    let coarse_offsets = punctured_offsets(coarse.d, coarse.radius);
    let a = fine.alphabet;
    let mpl = |table: &CountTable, key: &PatternKey| -> f64 {
        let mut v = 0.0;
        for sym in 0..a.size() {
            let n_a = table.count_with_symbol(key, sym as crate::Sym);
            if n_a > 0 {
                v += n_a as f64 * table.conditional(key, sym as crate::Sym).ln();
            }
        }
        v
    };
    let mut fine_part = 0.0;
    for site in region.sites() {
        let ckey = key_at(config, site, &coarse_offsets, &a)?;
        if ckey != *target {
            continue;
        }
        let fkey = key_at(config, site, &fine_offsets, &a)?;
        fine_part += mpl(fine, &fkey) / fine.count(&fkey) as f64;
    }
    Ok(fine_part - mpl(coarse, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{security_region_with_margin, Alphabet, Boundary, Window};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_frozen_values_and_conventions() {
        let kl = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]);
        assert!(!kl.infinite);
        assert_relative_eq!(kl.value, 0.5 * (4.0f64 / 3.0).ln(), max_relative = 1e-14);
        // 0 log 0 contributes nothing.
        let kl2 = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]);
        assert!(!kl2.infinite);
        assert_relative_eq!(kl2.value, 2.0f64.ln(), max_relative = 1e-14);
        // Mass under p where q has none: flagged infinite.
        let kl3 = kl_divergence(&[0.5, 0.5], &[1.0, 0.0]);
        assert!(kl3.infinite);
        assert!(kl3.value.is_infinite());
        // Identical laws: exactly zero.
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).value, 0.0);
    }

    #[test]
    fn kl_dominates_squared_total_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let mut p = [rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)];
            let mut q = [rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)];
            let sp: f64 = p.iter().sum();
            let sq: f64 = q.iter().sum();
            for x in &mut p {
                *x /= sp;
            }
            for x in &mut q {
                *x /= sq;
            }
            let kl = kl_divergence(&p, &q);
            let l1: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
            assert!(
                kl.value + 1e-15 >= 0.5 * l1 * l1,
                "divergence {} below half the squared distance {}",
                kl.value,
                0.5 * l1 * l1
            );
        }
    }

    #[test]
    fn three_statistic_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // A correlated binary sequence so the statistic is nontrivial.
        let n = 600;
        let mut data = vec![0u8; n];
        for i in 1..n {
            let stay = if data[i - 1] == 1 { 0.7 } else { 0.45 };
            data[i] = if rng.gen_bool(stay) { data[i - 1] } else { 1 - data[i - 1] };
        }
        let cfg = Configuration::from_data(
            Window::line(n).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Periodic,
            data,
        )
        .unwrap();
        let region = security_region_with_margin(cfg.window(), Boundary::Periodic, 3).unwrap();
        let fine = super::super::counts::count_patterns(&cfg, &region, 2).unwrap();
        let coarse = super::super::counts::count_patterns(&cfg, &region, 1).unwrap();
        let grouped = log_likelihood_by_coarse(&fine, &coarse).unwrap();
        assert!(!grouped.is_empty());
        for (key, &value) in &grouped {
            let by_site =
                log_likelihood_site_sum(&cfg, &region, &fine, &coarse, key).unwrap();
            let by_mpl =
                log_likelihood_mpl_form(&cfg, &region, &fine, &coarse, key).unwrap();
            let scale = value.abs().max(by_site.abs()).max(1.0);
            assert!(
                (value - by_site).abs() <= 1e-10 * scale,
                "grouped {value} vs site-sum {by_site}"
            );
            assert!(
                (value - by_mpl).abs() <= 1e-10 * scale,
                "grouped {value} vs mpl {by_mpl}"
            );
            assert!(value >= -1e-12, "statistic must be nonnegative, got {value}");
        }
    }

    #[test]
    fn mismatched_radii_are_rejected() {
        let cfg = Configuration::filled(
            Window::line(50).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Periodic,
            0,
        )
        .unwrap();
        let region = security_region_with_margin(cfg.window(), Boundary::Periodic, 3).unwrap();
        let t1 = super::super::counts::count_patterns(&cfg, &region, 1).unwrap();
        let t3 = super::super::counts::count_patterns(&cfg, &region, 3).unwrap();
        assert!(log_likelihood_by_coarse(&t3, &t1).is_err());
    }
}
