//! Composition of multi-site kernels from the single-site specification.
//!
//! The kernel on a finite set is built one site at a time: with the first
//! site split off, the multi-site probability is the single-site one
//! divided by a normalizing sum that interleaves the two kernels. The
//! result does not depend on the site order, which is exercised by tests.

use super::SpecificationModel;
use crate::lattice::Configuration;
use crate::{Error, Result, Site};
use std::collections::BTreeSet;

/// Kernel on a finite site set given everything outside it.
#[derive(Clone, Debug)]
pub struct ComposedKernel {
    /// The sites, in ascending order.
    pub sites: Vec<Site>,
    /// Probability of each joint assignment. Assignments are indexed with
    /// the first (lowest) site as the most significant base-|A| digit.
    pub probs: Vec<f64>,
    /// Union of the single-site contexts over all sites and assignments,
    /// minus the set itself.
    pub support: Vec<Site>,
}

const TABLE_GATE: usize = 1 << 20;
const COMPOSE_SUM_TOL: f64 = 1e-10;

fn check_value(x: f64, what: &str) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::PositivityViolated(format!("{what} evaluated to {x}")));
    }
    Ok(x)
}

/// One multi-site probability at the current assignment of `order` in
/// `config`, by recursive site exhaustion in the given order.
fn rho_rec(
    model: &dyn SpecificationModel,
    config: &mut Configuration,
    order: &[Site],
) -> Result<f64> {
    let first = order[0];
    let g = model.gamma0(config, first)?;
    let cur = config.get(first);
    let rho1 = check_value(g[cur as usize], "single-site kernel")?;
    if order.len() == 1 {
        return Ok(rho1);
    }
    let rest = &order[1..];
    let mut denom = 0.0;
    for s in 0..model.alphabet().size() {
        config.set(first, s as crate::Sym);
        let num = check_value(
            model.gamma0(config, first)?[s],
            "single-site kernel",
        )?;
        let den = check_value(rho_rec(model, config, rest)?, "partial composed kernel")?;
        denom += num / den;
    }
    config.set(first, cur);
    check_value(rho1 / denom, "composed kernel")
}

/// Composed kernel on `sites` (any order, deduplicated), conditioned on
/// the symbols outside them in `config`.
pub fn compose_specification(
    model: &dyn SpecificationModel,
    config: &Configuration,
    sites: &[Site],
) -> Result<ComposedKernel> {
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    compose_specification_with_order(model, config, &sorted)
}

/// Same kernel, but with the recursion exhausting sites in the order
/// given. Exposed so tests can verify order independence; the assignment
/// table layout is always canonical (ascending sites).
pub fn compose_specification_with_order(
    model: &dyn SpecificationModel,
    config: &Configuration,
    order: &[Site],
) -> Result<ComposedKernel> {
    if order.is_empty() {
        return Err(Error::InvalidParameter("compose needs at least one site".into()));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != order.len() {
        return Err(Error::InvalidParameter("compose sites must be distinct".into()));
    }
    let n = config.window().len();
    if let Some(&bad) = order.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutsideWindow(bad));
    }
    let a = model.alphabet().size();
    let k = sorted.len();
    let table = a
        .checked_pow(k as u32)
        .filter(|&t| t <= TABLE_GATE)
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "composed kernel table |A|^|sites| = {a}^{k} exceeds the enumeration gate"
            ))
        })?;

    let mut scratch = config.clone();
    let saved: Vec<crate::Sym> = sorted.iter().map(|&s| scratch.get(s)).collect();
    let mut probs = Vec::with_capacity(table);
    let mut support = BTreeSet::new();
    for idx in 0..table {
        let mut rem = idx;
        for pos in (0..k).rev() {
            scratch.set(sorted[pos], (rem % a) as crate::Sym);
            rem /= a;
        }
        probs.push(rho_rec(model, &mut scratch, order)?);
        for &i in &sorted {
            let ctx = model.context(&scratch, i)?;
            for s in ctx.sites(&scratch, i)? {
                support.insert(s);
            }
        }
    }
    for (s, &v) in sorted.iter().zip(&saved) {
        scratch.set(*s, v);
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > COMPOSE_SUM_TOL {
        return Err(Error::PositivityViolated(format!(
            "composed kernel sums to {sum}, expected 1 within {COMPOSE_SUM_TOL}"
        )));
    }
    for &s in &sorted {
        support.remove(&s);
    }
    Ok(ComposedKernel { sites: sorted, probs, support: support.into_iter().collect() })
}
