//! Binary renewal field on the line.
//!
//! Runs of equal symbols have i.i.d. lengths drawn from a two-term geometric
//! mixture `P[T = j] = c1 rho1^j + c2 rho2^j`, symbols alternate between
//! runs, and the field is the stationary two-sided version of that process.
//! The single-site kernel has an unbounded but almost-surely finite context:
//! the interval between the nearest symbol changes on each side.

use super::{ContextResult, QMin, SpecificationModel};
use crate::lattice::{Alphabet, Configuration};
use crate::{Error, Result, Site, Sym};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RenewalParams {
    pub rho1: f64,
    pub rho2: f64,
    pub c1: f64,
    pub c2: f64,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl RenewalParams {
    /// Validates `0 < rho2 < rho1 < 1`, nonnegative weights, and that the
    /// run-length law sums to one.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho2 > 0.0 && self.rho1 > self.rho2 && self.rho1 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "renewal rates must satisfy 0 < rho2 < rho1 < 1, got rho1={}, rho2={}",
                self.rho1, self.rho2
            )));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "renewal weights must be nonnegative, got c1={}, c2={}",
                self.c1, self.c2
            )));
        }
        let s = self.mass();
        if (s - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "renewal run-length law must sum to 1 within {NORMALIZATION_TOL}, got {s}"
            )));
        }
        Ok(())
    }

    /// Total mass `sum_j P[T = j] = c1 rho1/(1-rho1) + c2 rho2/(1-rho2)`.
    pub fn mass(&self) -> f64 {
        self.c1 * self.rho1 / (1.0 - self.rho1) + self.c2 * self.rho2 / (1.0 - self.rho2)
    }

    /// Mean run length `c1 rho1/(1-rho1)^2 + c2 rho2/(1-rho2)^2`.
    pub fn mean_run(&self) -> f64 {
        self.c1 * self.rho1 / (1.0 - self.rho1).powi(2)
            + self.c2 * self.rho2 / (1.0 - self.rho2).powi(2)
    }

    /// `P[T = j] = c1 rho1^j + c2 rho2^j` for `j >= 1`.
    pub fn pt(&self, j: u32) -> f64 {
        self.c1 * self.rho1.powi(j as i32) + self.c2 * self.rho2.powi(j as i32)
    }

    /// `P[T >= r] = c1 rho1^r/(1-rho1) + c2 rho2^r/(1-rho2)` for `r >= 1`.
    pub fn tail(&self, r: u32) -> f64 {
        self.c1 * self.rho1.powi(r as i32) / (1.0 - self.rho1)
            + self.c2 * self.rho2.powi(r as i32) / (1.0 - self.rho2)
    }

    /// `sum_{r >= n} P[T >= r] = c1 rho1^n/(1-rho1)^2 + c2 rho2^n/(1-rho2)^2`.
    pub fn cover(&self, n: u32) -> f64 {
        self.c1 * self.rho1.powi(n as i32) / (1.0 - self.rho1).powi(2)
            + self.c2 * self.rho2.powi(n as i32) / (1.0 - self.rho2).powi(2)
    }
}

/// Nearest symbol changes around a site: `k` sites to the change on the
/// left, `l` to the change on the right (both at least 2 by construction),
/// with the immediate neighbor symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanResult {
    pub k: usize,
    pub l: usize,
    pub left: Sym,
    pub right: Sym,
}

/// Locates the nearest symbol change strictly beyond each immediate
/// neighbor of `site`. Fails with a context error when a change is not
/// visible inside the window.
pub fn renewal_boundary_scan(config: &Configuration, site: Site) -> Result<ScanResult> {
    let n = config.window().len() as i64;
    if config.window().d() != 1 {
        return Err(Error::Unsupported("renewal scan requires a 1-d window".into()));
    }
    let left = config
        .at_offset(site, [-1, 0])
        .ok_or(Error::ContextExceedsWindow(site))?;
    let right = config
        .at_offset(site, [1, 0])
        .ok_or(Error::ContextExceedsWindow(site))?;
    // Walk outward until the symbol changes; cap the walk at the window
    // length so a periodic all-equal ring terminates with an error.
    let mut l = None;
    for step in 2..=n {
        match config.at_offset(site, [step, 0]) {
            Some(s) if s != right => {
                l = Some(step as usize);
                break;
            }
            Some(_) => {}
            None => break,
        }
    }
    let mut k = None;
    for step in 2..=n {
        match config.at_offset(site, [-step, 0]) {
            Some(s) if s != left => {
                k = Some(step as usize);
                break;
            }
            Some(_) => {}
            None => break,
        }
    }
    match (k, l) {
        (Some(k), Some(l)) => Ok(ScanResult { k, l, left, right }),
        _ => Err(Error::ContextExceedsWindow(site)),
    }
}

/// Conditional probability of symbol 1 at the center given run distances
/// `k`, `l` and the immediate neighbor symbols.
///
/// Closed forms exist for neighbor pairs `(1,1)` and `(1,0)`; the other two
/// follow by symbol complementation, which is an exact symmetry of the law.
pub fn renewal_gamma0(
    params: &RenewalParams,
    k: usize,
    l: usize,
    left: Sym,
    right: Sym,
) -> Result<f64> {
    if k < 2 || l < 2 {
        return Err(Error::InvalidRunDistance { k: k as i64, l: l as i64 });
    }
    match (left, right) {
        (1, 1) => gamma_same(params, k, l),
        (0, 0) => Ok(1.0 - gamma_same(params, k, l)?),
        (1, 0) => gamma_mixed(params, k, l),
        (0, 1) => Ok(1.0 - gamma_mixed(params, k, l)?),
        _ => Err(Error::InvalidParameter(format!(
            "renewal symbols must be 0 or 1, got left={left}, right={right}"
        ))),
    }
}

/// Neighbors both 1: the center is 1 exactly when no run ends at it.
fn gamma_same(params: &RenewalParams, k: usize, l: usize) -> Result<f64> {
    let f = |j: usize| params.pt(j as u32);
    let s = params.mass();
    let num = f(k + l - 1);
    let den = num + f(k - 1) * f(l - 1) * f(1) / (s * s);
    Ok(num / den)
}

/// Left neighbor 1, right neighbor 0: the run boundary sits at the center
/// or just before it.
fn gamma_mixed(params: &RenewalParams, k: usize, l: usize) -> Result<f64> {
    let f = |j: usize| params.pt(j as u32);
    let num = f(k) * f(l - 1);
    let den = num + f(k - 1) * f(l);
    Ok(num / den)
}

/// Exact probability of observing `symbols` as a window of the stationary
/// field (free boundary). Used as an independent reference law in tests and
/// oracle reports.
pub fn string_prob(params: &RenewalParams, symbols: &[Sym]) -> f64 {
    assert!(!symbols.is_empty(), "string_prob needs a nonempty string");
    let mu = params.mean_run();
    let mut runs = Vec::new();
    let mut len = 1u32;
    for w in symbols.windows(2) {
        if w[1] == w[0] {
            len += 1;
        } else {
            runs.push(len);
            len = 1;
        }
    }
    runs.push(len);
    if runs.len() == 1 {
        // No change visible: the covering run extends past both ends.
        return 0.5 * params.cover(runs[0]) / mu;
    }
    let mut p = 0.5 * params.tail(runs[0]) / mu;
    for &r in &runs[1..runs.len() - 1] {
        p *= params.pt(r);
    }
    p * params.tail(runs[runs.len() - 1])
}

/// Draws `T` from the run-length law: mixture component, then a geometric.
fn draw_run<R: Rng>(params: &RenewalParams, rng: &mut R) -> u32 {
    let w1 = params.c1 * params.rho1 / (1.0 - params.rho1);
    let rho = if rng.gen::<f64>() * params.mass() < w1 { params.rho1 } else { params.rho2 };
    geometric_ge1(rho, rng)
}

/// Geometric on {1, 2, ...} with success probability `1 - rho`.
fn geometric_ge1<R: Rng>(rho: f64, rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let g = ((1.0 - u).ln() / rho.ln()).floor();
    1 + (g.max(0.0).min(u32::MAX as f64 - 2.0) as u32)
}

/// Exact sample of `n` sites of the stationary field.
///
/// The run covering the window start is drawn length-biased with a uniform
/// phase, subsequent runs i.i.d. from the run-length law.
pub fn exact_sample<R: Rng>(params: &RenewalParams, n: usize, rng: &mut R) -> Vec<Sym> {
    let mu = params.mean_run();
    // Length-biased component pick: component k has biased mass
    // c_k rho_k/(1-rho_k)^2 out of mu.
    let m1 = params.c1 * params.rho1 / (1.0 - params.rho1).powi(2);
    let rho = if rng.gen::<f64>() * mu < m1 { params.rho1 } else { params.rho2 };
    // J length-biased within the component: sum of two geometrics minus 1.
    let j = geometric_ge1(rho, rng) + geometric_ge1(rho, rng) - 1;
    let phase = rng.gen_range(0..j);
    let mut sym: Sym = if rng.gen::<bool>() { 1 } else { 0 };
    let mut remaining_in_run = (j - phase) as usize;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let take = remaining_in_run.min(n - out.len());
        out.extend(std::iter::repeat(sym).take(take));
        sym = 1 - sym;
        remaining_in_run = draw_run(params, rng) as usize;
    }
    out
}

pub struct RenewalModel {
    params: RenewalParams,
    q_min: f64,
}

impl RenewalModel {
    pub fn new(params: RenewalParams) -> Result<Self> {
        params.validate()?;
        // Numerical lower bound on the kernel: scan run distances up to a
        // horizon well past where the geometric tails have stabilized.
        let mut q = f64::INFINITY;
        for k in 2..=80 {
            for l in 2..=80 {
                let a = gamma_same(&params, k, l)?;
                let b = gamma_mixed(&params, k, l)?;
                for v in [a, 1.0 - a, b, 1.0 - b] {
                    q = q.min(v);
                }
            }
        }
        Ok(Self { params, q_min: q })
    }

    pub fn params(&self) -> &RenewalParams {
        &self.params
    }
}

impl SpecificationModel for RenewalModel {
    fn name(&self) -> &'static str {
        "renewal"
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::new(2).expect("binary alphabet")
    }

    fn dependence_radius(&self) -> Option<usize> {
        None
    }

    fn q_min(&self) -> QMin {
        QMin { value: self.q_min, estimated: true }
    }

    fn gamma0(&self, config: &Configuration, site: Site) -> Result<Vec<f64>> {
        let scan = renewal_boundary_scan(config, site)?;
        let p1 = renewal_gamma0(&self.params, scan.k, scan.l, scan.left, scan.right)?;
        Ok(vec![1.0 - p1, p1])
    }

    fn context(&self, config: &Configuration, site: Site) -> Result<ContextResult> {
        let scan = renewal_boundary_scan(config, site)?;
        let mut offsets = Vec::with_capacity(scan.k + scan.l);
        for o in -(scan.k as i64)..=-1 {
            offsets.push([o, 0]);
        }
        for o in 1..=(scan.l as i64) {
            offsets.push([o, 0]);
        }
        Ok(ContextResult { offsets, truncated: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, Window};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn test_params() -> RenewalParams {
        RenewalParams { rho1: 0.5, rho2: 0.25, c1: 0.5, c2: 1.5 }
    }

    #[test]
    fn parameter_validation() {
        assert!(test_params().validate().is_ok());
        let bad_order = RenewalParams { rho1: 0.25, rho2: 0.5, c1: 0.5, c2: 1.5 };
        assert!(bad_order.validate().is_err());
        let bad_mass = RenewalParams { rho1: 0.5, rho2: 0.25, c1: 0.5, c2: 1.0 };
        let err = bad_mass.validate().unwrap_err().to_string();
        assert!(err.contains("sum to 1"), "{err}");
        let bad_weight = RenewalParams { rho1: 0.5, rho2: 0.25, c1: -0.5, c2: 1.5 };
        assert!(bad_weight.validate().is_err());
    }

    #[test]
    fn run_law_frozen_values() {
        let p = test_params();
        assert_relative_eq!(p.pt(1), 0.625, max_relative = 1e-15);
        assert_relative_eq!(p.pt(2), 0.21875, max_relative = 1e-15);
        assert_relative_eq!(p.pt(3), 0.0859375, max_relative = 1e-15);
        assert_relative_eq!(p.mass(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(p.mean_run(), 5.0 / 3.0, max_relative = 1e-14);
        // cover(1) counts every run position once, so it equals the mean.
        assert_relative_eq!(p.cover(1), p.mean_run(), max_relative = 1e-14);
    }

    #[test]
    fn gamma_frozen_values() {
        let p = test_params();
        assert_relative_eq!(renewal_gamma0(&p, 2, 2, 1, 1).unwrap(), 44.0 / 169.0, max_relative = 1e-13);
        assert_relative_eq!(renewal_gamma0(&p, 2, 3, 1, 1).unwrap(), 76.0 / 251.0, max_relative = 1e-13);
        assert_relative_eq!(renewal_gamma0(&p, 2, 2, 1, 0).unwrap(), 0.5, max_relative = 1e-13);
        assert_relative_eq!(renewal_gamma0(&p, 2, 3, 1, 0).unwrap(), 49.0 / 104.0, max_relative = 1e-13);
    }

    #[test]
    fn complement_and_mirror_identities() {
        let p = test_params();
        for k in 2..7 {
            for l in 2..7 {
                let g11 = renewal_gamma0(&p, k, l, 1, 1).unwrap();
                let g00 = renewal_gamma0(&p, k, l, 0, 0).unwrap();
                // Complementation swaps the center symbol along with the
                // neighbors, so these two sum to one.
                assert_relative_eq!(g11 + g00, 1.0, max_relative = 1e-14);
                // Reversing the line swaps k and l along with the neighbor
                // pair and leaves the kernel unchanged.
                let g10 = renewal_gamma0(&p, k, l, 1, 0).unwrap();
                let rev = renewal_gamma0(&p, l, k, 0, 1).unwrap();
                assert_relative_eq!(g10, rev, max_relative = 1e-14);
                // Complementing the neighbors at the same distances swaps
                // the center symbol, so this pair sums to one.
                let g01 = renewal_gamma0(&p, k, l, 0, 1).unwrap();
                assert_relative_eq!(g10 + g01, 1.0, max_relative = 1e-14);
            }
        }
        let err = renewal_gamma0(&p, 1, 3, 1, 1).unwrap_err().to_string();
        assert!(err.contains("invalid run distance"), "{err}");
    }

    #[test]
    fn boundary_scan_explicit() {
        let w = Window::line(6).unwrap();
        let cfg = Configuration::from_data(
            w,
            Alphabet::new(2).unwrap(),
            Boundary::Free,
            vec![1, 0, 0, 1, 1, 0],
        )
        .unwrap();
        let scan = renewal_boundary_scan(&cfg, 3).unwrap();
        assert_eq!(scan, ScanResult { k: 3, l: 2, left: 0, right: 1 });

        // Site 1's left scan exits the window before finding a change.
        let err = renewal_boundary_scan(&cfg, 1).unwrap_err().to_string();
        assert!(err.contains("context exceeds window"), "{err}");
    }

    #[test]
    fn scan_periodic_wraps_and_detects_constant_ring() {
        let w = Window::line(8).unwrap();
        let cfg = Configuration::from_data(
            w,
            Alphabet::new(2).unwrap(),
            Boundary::Periodic,
            vec![0, 1, 1, 1, 1, 1, 1, 1],
        )
        .unwrap();
        let scan = renewal_boundary_scan(&cfg, 4).unwrap();
        assert_eq!(scan.k, 4);
        assert_eq!(scan.l, 4);

        let constant = Configuration::filled(
            Window::line(8).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Periodic,
            1,
        )
        .unwrap();
        assert!(renewal_boundary_scan(&constant, 4).is_err());
    }

    #[test]
    fn context_matches_scan() {
        let w = Window::line(9).unwrap();
        let cfg = Configuration::from_data(
            w,
            Alphabet::new(2).unwrap(),
            Boundary::Free,
            vec![1, 0, 0, 0, 1, 1, 0, 1, 1],
        )
        .unwrap();
        let model = RenewalModel::new(test_params()).unwrap();
        // Site 4: the left-neighbor run of zeros extends to site 1, with the
        // change at site 0 (k = 4); the right change sits at site 6 (l = 2).
        let ctx = model.context(&cfg, 4).unwrap();
        assert_eq!(
            ctx.offsets,
            vec![[-4, 0], [-3, 0], [-2, 0], [-1, 0], [1, 0], [2, 0]]
        );
        assert!(!ctx.truncated);
        assert_eq!(ctx.radius(), 4);
        assert_eq!(model.radius(&cfg, 4).unwrap(), 4);
    }

    #[test]
    fn string_law_is_a_probability() {
        let p = test_params();
        assert_relative_eq!(string_prob(&p, &[0]), 0.5, max_relative = 1e-14);
        let n = 8;
        let mut total = 0.0;
        for bits in 0u32..(1 << n) {
            let s: Vec<Sym> = (0..n).map(|i| ((bits >> i) & 1) as Sym).collect();
            total += string_prob(&p, &s);
        }
        assert!((total - 1.0).abs() < 1e-10, "string law sums to {total}");
    }

    #[test]
    fn exact_sampler_matches_string_law() {
        let p = test_params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let data = exact_sample(&p, n, &mut rng);
        assert_eq!(data.len(), n);
        let ones = data.iter().filter(|&&s| s == 1).count() as f64 / n as f64;
        assert!((ones - 0.5).abs() < 0.02, "symbol density {ones}");
        // Probability that two adjacent sites agree, from the string law:
        // cover(2)/mean = (2/3)/(5/3) = 0.4.
        let equal_pairs =
            data.windows(2).filter(|w| w[0] == w[1]).count() as f64 / (n - 1) as f64;
        assert!((equal_pairs - 0.4).abs() < 0.012, "adjacent agreement {equal_pairs}");
    }

    #[test]
    fn sampled_conditionals_match_gamma() {
        let p = test_params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = exact_sample(&p, 300_000, &mut rng);
        let cfg = Configuration::from_data(
            Window::line(data.len()).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Free,
            data,
        )
        .unwrap();
        let mut hits = 0u64;
        let mut ones = 0u64;
        for i in 8..cfg.window().len() - 8 {
            if let Ok(scan) = renewal_boundary_scan(&cfg, i) {
                if scan.k == 2 && scan.l == 2 && scan.left == 1 && scan.right == 1 {
                    hits += 1;
                    if cfg.get(i) == 1 {
                        ones += 1;
                    }
                }
            }
        }
        assert!(hits > 2_000, "too few qualifying sites: {hits}");
        let freq = ones as f64 / hits as f64;
        let target = 44.0 / 169.0;
        let se = (target * (1.0 - target) / hits as f64).sqrt();
        assert!(
            (freq - target).abs() < 4.0 * se,
            "conditional frequency {freq} vs {target} (se {se}, hits {hits})"
        );
    }

    #[test]
    fn model_kernel_is_normalized() {
        let model = RenewalModel::new(test_params()).unwrap();
        let cfg = Configuration::from_data(
            Window::line(7).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Free,
            vec![1, 0, 0, 1, 0, 0, 1],
        )
        .unwrap();
        let g = model.gamma0(&cfg, 3).unwrap();
        assert_eq!(g.len(), 2);
        assert_relative_eq!(g[0] + g[1], 1.0, max_relative = 1e-14);
        let q = model.q_min();
        assert!(q.value > 0.0 && q.value < 0.5);
        assert!(q.estimated);
    }
}
