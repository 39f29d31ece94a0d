//! Dobrushin interdependence coefficients of single-site kernels.
//!
//! `r(0,j)` is the worst-case total-variation sensitivity of the kernel at
//! the origin to a change at offset `j`; their sum `r` below 1 is the
//! contraction condition guaranteeing a unique consistent measure.

use super::center_site;
use crate::lattice::{
    ball_offsets, max_norm, punctured_offsets, Boundary, Configuration, Window,
};
use crate::models::{build_model, model_dim, ModelSpec, PolygonParams, SpecificationModel};
use crate::{Result, Site, Sym};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Largest state count the exact sensitivity sup will enumerate per model.
const ENUM_GATE: u128 = 1 << 20;

#[derive(Clone, Copy, Debug)]
pub struct DobrushinOptions {
    /// Largest offset norm reported; defaults to the model's dependence
    /// radius, or 6 for models with unbounded contexts.
    pub horizon: Option<usize>,
    /// Random perturbation trials on the sampled path.
    pub samples: usize,
    pub seed: u64,
    /// Forces the sampled path even where enumeration is feasible; used to
    /// validate the sampled estimator against exact values.
    pub force_sampled: bool,
}

impl Default for DobrushinOptions {
    fn default() -> Self {
        Self { horizon: None, samples: 2000, seed: 1, force_sampled: false }
    }
}

/// Single-site sensitivity coefficients with their tail sums.
#[derive(Clone, Debug, Serialize)]
pub struct DobrushinReport {
    /// Largest offset norm covered by `r_site`.
    pub horizon: usize,
    /// `(offset, r(0, offset))` in lexicographic offset order.
    pub r_site: Vec<([i64; 2], f64)>,
    /// Sum of `r(0,j)` over all listed offsets.
    pub r_total: f64,
    /// `beta_tail[l]` sums `r(0,k)` over offsets with norm `> l`.
    pub beta_tail: Vec<f64>,
    /// Whether `r_total < 1`.
    pub contraction: bool,
    /// Set when the sup was sampled rather than enumerated, so every
    /// reported coefficient is only a lower bound.
    pub lower_bound_only: bool,
}

fn assemble(horizon: usize, r_site: Vec<([i64; 2], f64)>, lower_bound_only: bool) -> DobrushinReport {
    // Folded from +0.0: the empty-sum identity of `Sum<f64>` is -0.0, which
    // would leak a negative zero into the serialized report.
    let r_total: f64 = r_site.iter().map(|&(_, r)| r).fold(0.0, |a, b| a + b);
    let beta_tail: Vec<f64> = (0..=horizon)
        .map(|ell| {
            r_site
                .iter()
                .filter(|&&(o, _)| max_norm(o) > ell as i64)
                .map(|&(_, r)| r)
                .fold(0.0, |a, b| a + b)
        })
        .collect();
    DobrushinReport {
        horizon,
        r_site,
        r_total,
        beta_tail,
        contraction: r_total < 1.0,
        lower_bound_only,
    }
}

/// Computes `r(0,j)`, `r`, and the tail sums `beta(l)` for a model.
///
/// Dispatch: kernels with dependence radius 0 are free; the range-1 polygon
/// model has a closed-form exact path; other bounded kernels are enumerated
/// exhaustively when the neighborhood state space fits the gate; everything
/// else falls back to sampled perturbations flagged as lower bounds.
pub fn dobrushin_report(spec: &ModelSpec, opts: &DobrushinOptions) -> Result<DobrushinReport> {
    let model = build_model(spec)?;
    let d = model_dim(spec)?;
    let dep = model.dependence_radius();
    if dep == Some(0) {
        let h = opts.horizon.unwrap_or(0);
        let r_site: Vec<_> = punctured_offsets(d, h).into_iter().map(|o| (o, 0.0)).collect();
        return Ok(assemble(h, r_site, false));
    }
    if spec.model == "polygon" && !opts.force_sampled {
        let p: PolygonParams = serde_json::from_value(spec.params.clone())?;
        if p.range == 1 && opts.horizon.map_or(true, |h| h == 2) {
            return Ok(polygon_range1_exact(&p));
        }
    }
    match dep {
        Some(dr) => {
            let h = opts.horizon.unwrap_or(dr);
            let states = (model.alphabet().size() as u128)
                .checked_pow(punctured_offsets(d, dr).len() as u32);
            match states {
                Some(s) if s <= ENUM_GATE && h >= dr && !opts.force_sampled => {
                    enumerated(model.as_ref(), d, dr, h)
                }
                _ => sampled(model.as_ref(), d, dr.max(h), h, opts),
            }
        }
        None => {
            let h = opts.horizon.unwrap_or(6);
            sampled(model.as_ref(), d, h, h, opts)
        }
    }
}

fn mini_window(d: usize, radius: usize) -> Result<Window> {
    let extent = 2 * radius + 1;
    if d == 1 {
        Window::line(extent)
    } else {
        Window::rect(extent, extent)
    }
}

fn offset_sites(window: &Window, center: Site, offsets: &[[i64; 2]]) -> Vec<Site> {
    let c = window.coords(center);
    offsets
        .iter()
        .map(|o| window.index([c[0] + o[0], c[1] + o[1]]).expect("offset inside mini window"))
        .collect()
}

fn pairwise_tv_max(laws: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..laws.len() {
        for y in x + 1..laws.len() {
            let tv =
                0.5 * laws[x].iter().zip(&laws[y]).map(|(p, q)| (p - q).abs()).sum::<f64>();
            worst = worst.max(tv);
        }
    }
    worst
}

/// Exhaustive sup over every assignment of the punctured dependence ball.
fn enumerated(
    model: &dyn SpecificationModel,
    d: usize,
    dep_radius: usize,
    horizon: usize,
) -> Result<DobrushinReport> {
    let a = model.alphabet();
    let asize = a.size();
    let window = mini_window(d, dep_radius)?;
    let center = center_site(&window);
    let vary = punctured_offsets(d, dep_radius);
    let sites = offset_sites(&window, center, &vary);
    let m = vary.len();
    let states = asize.pow(m as u32);
    // Digit t of a state indexes the symbol at vary[t]; digit 0 is the most
    // significant, matching the state convention of the exact measures.
    let pows: Vec<usize> = (0..m).map(|t| asize.pow((m - 1 - t) as u32)).collect();
    let r_inner: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|b| -> Result<f64> {
            let mut config = Configuration::filled(window.clone(), a, Boundary::Free, 0)?;
            let mut worst = 0.0f64;
            let mut laws: Vec<Vec<f64>> = Vec::with_capacity(asize);
            for idx in 0..states {
                if idx / pows[b] % asize != 0 {
                    continue;
                }
                for (t, &site) in sites.iter().enumerate() {
                    config.set(site, (idx / pows[t] % asize) as Sym);
                }
                laws.clear();
                for v in 0..asize {
                    config.set(sites[b], v as Sym);
                    laws.push(model.gamma0(&config, center)?);
                }
                worst = worst.max(pairwise_tv_max(&laws));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let inner: HashMap<[i64; 2], f64> = vary.into_iter().zip(r_inner).collect();
    let r_site: Vec<_> = punctured_offsets(d, horizon)
        .into_iter()
        .map(|o| (o, inner.get(&o).copied().unwrap_or(0.0)))
        .collect();
    Ok(assemble(horizon, r_site, false))
}

/// Sampled sup: random environments, all symbol values at one offset.
/// Environments where the kernel is undefined (an unresolved context) are
/// skipped, which keeps the result a lower bound in every case.
fn sampled(
    model: &dyn SpecificationModel,
    d: usize,
    build_radius: usize,
    horizon: usize,
    opts: &DobrushinOptions,
) -> Result<DobrushinReport> {
    let a = model.alphabet();
    let asize = a.size();
    let window = mini_window(d, build_radius)?;
    let center = center_site(&window);
    let offsets = punctured_offsets(d, horizon);
    let sites = offset_sites(&window, center, &offsets);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut config = Configuration::filled(window.clone(), a, Boundary::Free, 0)?;
    let mut r = vec![0.0f64; offsets.len()];
    let mut laws: Vec<Vec<f64>> = Vec::with_capacity(asize);
    for _ in 0..opts.samples {
        for site in 0..window.len() {
            config.set(site, rng.gen_range(0..asize) as Sym);
        }
        for (b, &site_b) in sites.iter().enumerate() {
            let orig = config.get(site_b);
            laws.clear();
            for v in 0..asize {
                config.set(site_b, v as Sym);
                if let Ok(law) = model.gamma0(&config, center) {
                    laws.push(law);
                }
            }
            config.set(site_b, orig);
            r[b] = r[b].max(pairwise_tv_max(&laws));
        }
    }
    let r_site: Vec<_> = offsets.into_iter().zip(r).collect();
    Ok(assemble(horizon, r_site, true))
}

/// Bit masks for the range-1 polygon energy: mask `j` selects, among the 24
/// punctured radius-2 offsets, the 8 sites other than the origin entering
/// the spin product of the term centered at the j-th radius-1 ball offset.
pub(crate) fn range1_masks() -> [u32; 9] {
    let offsets = punctured_offsets(2, 2);
    let mut masks = [0u32; 9];
    for (mi, j) in ball_offsets(2, 1).iter().enumerate() {
        let mut mask = 0u32;
        for (bi, o) in offsets.iter().enumerate() {
            if max_norm([o[0] - j[0], o[1] - j[1]]) <= 1 {
                mask |= 1 << bi;
            }
        }
        debug_assert_eq!(mask.count_ones(), 8);
        masks[mi] = mask;
    }
    masks
}

/// Sum of the 9 spin products around the origin, center spin factored out.
/// Bit `i` of `idx` is the symbol at the i-th punctured radius-2 offset;
/// each product has 8 factors, so the center-free product over a mask is
/// `(-1)^popcount` regardless of spin sign convention.
pub(crate) fn range1_s(idx: u32, masks: &[u32; 9]) -> i8 {
    let mut s = 0i8;
    for &mask in masks {
        s += 1 - 2 * ((idx & mask).count_ones() & 1) as i8;
    }
    s
}

/// Kernel value for symbol 1 at the origin given the neighborhood sum `s`:
/// flipping the center changes the energy by `2 * c9 * s`, hence a logistic
/// law in `2 * beta * c9 * s`.
fn range1_sigmoid_table(beta: f64, c9: f64) -> [f64; 19] {
    let mut sig = [0.0f64; 19];
    for (i, slot) in sig.iter_mut().enumerate() {
        let s = i as f64 - 9.0;
        *slot = 1.0 / (1.0 + (-2.0 * beta * c9 * s).exp());
    }
    sig
}

/// Exact coefficients for the range-1 polygon model.
///
/// At range 1 every energy term touching the origin is the full spin
/// product over a radius-1 ball, so the kernel depends on the radius-2
/// punctured configuration only through the integer sum `s` of 9 products.
/// The sup over single-site perturbations is taken exhaustively by tabling
/// `s` over all 2^24 neighborhoods and collecting, per flipped bit, the
/// reachable `(s_before, s_after)` pairs.
fn polygon_range1_exact(params: &PolygonParams) -> DobrushinReport {
    let masks = range1_masks();
    let n_states = 1usize << 24;
    let mut s_table = vec![0i8; n_states];
    s_table.par_chunks_mut(1 << 16).enumerate().for_each(|(chunk_i, chunk)| {
        let base = (chunk_i << 16) as u32;
        for (t, slot) in chunk.iter_mut().enumerate() {
            *slot = range1_s(base + t as u32, &masks);
        }
    });
    let sig = range1_sigmoid_table(params.beta, params.couplings[9]);
    let r_bits: Vec<f64> = (0..24usize)
        .into_par_iter()
        .map(|b| {
            let bit = 1u32 << b;
            let mut seen = [[false; 19]; 19];
            for idx in 0..n_states as u32 {
                if idx & bit != 0 {
                    continue;
                }
                let s0 = s_table[idx as usize];
                let s1 = s_table[(idx | bit) as usize];
                seen[(s0 + 9) as usize][(s1 + 9) as usize] = true;
            }
            let mut worst = 0.0f64;
            for (i0, row) in seen.iter().enumerate() {
                for (i1, &hit) in row.iter().enumerate() {
                    if hit {
                        worst = worst.max((sig[i1] - sig[i0]).abs());
                    }
                }
            }
            worst
        })
        .collect();
    let r_site: Vec<_> = punctured_offsets(2, 2).into_iter().zip(r_bits).collect();
    assemble(2, r_site, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Alphabet;
    use crate::models::polygon_gamma0;

    fn spec(model: &str, params: serde_json::Value) -> ModelSpec {
        ModelSpec { model: model.into(), params, seedless: true }
    }

    fn polygon_spec(beta: f64) -> ModelSpec {
        spec(
            "polygon",
            serde_json::json!({
                "beta": beta,
                "range": 1,
                "couplings": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
            }),
        )
    }

    #[test]
    fn iid_has_zero_interdependence() {
        let s = spec("iid", serde_json::json!({ "probs": [0.4, 0.6] }));
        let rep = dobrushin_report(&s, &DobrushinOptions::default()).unwrap();
        assert_eq!(rep.r_total, 0.0);
        assert!(rep.contraction);
        assert!(rep.r_site.is_empty());
        assert!(!rep.lower_bound_only);
    }

    #[test]
    fn ising_chain_matches_closed_form() {
        // Flipping one neighbor moves the kernel from sigma(0) to
        // sigma(4 beta), so r(0, +-1) = sigma(4 beta) - 1/2 exactly.
        let beta = 0.2f64;
        let s = spec("markov1", serde_json::json!({ "dim": 1, "beta": beta }));
        let opts = DobrushinOptions { horizon: Some(2), ..Default::default() };
        let rep = dobrushin_report(&s, &opts).unwrap();
        let expect = 2.0 / (1.0 + (-4.0 * beta).exp()) - 1.0;
        assert!((rep.r_total - expect).abs() < 1e-12, "{} vs {expect}", rep.r_total);
        assert!(rep.contraction);
        assert!(!rep.lower_bound_only);
        for &(o, r) in &rep.r_site {
            if max_norm(o) > 1 {
                assert_eq!(r, 0.0, "r(0,{o:?}) must vanish beyond the range");
            } else {
                assert!((r - expect / 2.0).abs() < 1e-12);
            }
        }
        assert!((rep.beta_tail[0] - rep.r_total).abs() < 1e-15);
        assert_eq!(rep.beta_tail[1], 0.0);
        assert_eq!(rep.beta_tail[2], 0.0);
    }

    #[test]
    fn plane_symmetry_and_beta_monotonicity() {
        let rep = |b: f64| {
            let s = spec("markov1", serde_json::json!({ "dim": 2, "beta": b }));
            dobrushin_report(&s, &DobrushinOptions::default()).unwrap()
        };
        let r1 = rep(0.1);
        let by_offset: HashMap<[i64; 2], f64> = r1.r_site.iter().cloned().collect();
        let axis = by_offset[&[0, 1]];
        assert!(axis > 0.0);
        for o in [[0, -1], [-1, 0], [1, 0]] {
            assert!((by_offset[&o] - axis).abs() < 1e-14, "axis symmetry at {o:?}");
        }
        for o in [[-1, -1], [-1, 1], [1, -1], [1, 1]] {
            assert_eq!(by_offset[&o], 0.0, "diagonals are outside the kernel's reach");
        }
        let r2 = rep(0.2);
        assert!(r2.r_total > r1.r_total);
    }

    #[test]
    fn sampled_path_recovers_enumerated_value() {
        let s = spec("markov1", serde_json::json!({ "dim": 1, "beta": 0.3 }));
        let exact = dobrushin_report(&s, &DobrushinOptions::default()).unwrap();
        let opts = DobrushinOptions { samples: 500, force_sampled: true, ..Default::default() };
        let samp = dobrushin_report(&s, &opts).unwrap();
        assert!(samp.lower_bound_only);
        // Two binary neighbors: 500 uniform draws visit every environment,
        // so the sampled sup coincides with the enumerated one.
        assert!((samp.r_total - exact.r_total).abs() < 1e-12);
        assert!(samp.r_total <= exact.r_total + 1e-12);
    }

    #[test]
    fn renewal_is_sampled_and_flagged() {
        let s = spec(
            "renewal",
            serde_json::json!({ "rho1": 0.5, "rho2": 0.25, "c1": 0.5, "c2": 1.5 }),
        );
        let opts = DobrushinOptions { samples: 300, ..Default::default() };
        let rep = dobrushin_report(&s, &opts).unwrap();
        assert!(rep.lower_bound_only);
        assert_eq!(rep.horizon, 6);
        assert!(rep.r_total > 0.0);
        for w in rep.beta_tail.windows(2) {
            assert!(w[0] >= w[1] - 1e-15, "tail sums must be nonincreasing");
        }
        assert_eq!(*rep.beta_tail.last().unwrap(), 0.0);
    }

    #[test]
    fn polygon_fast_path_is_exact_and_contracts_at_small_beta() {
        let rep = dobrushin_report(&polygon_spec(0.005), &DobrushinOptions::default()).unwrap();
        assert!(!rep.lower_bound_only);
        assert_eq!(rep.horizon, 2);
        assert_eq!(rep.r_site.len(), 24);
        assert!(rep.r_total > 0.0);
        assert!(rep.contraction, "r = {}", rep.r_total);
        let hotter = dobrushin_report(&polygon_spec(0.01), &DobrushinOptions::default()).unwrap();
        assert!(hotter.r_total > rep.r_total);
        // Lattice symmetry: the four axis offsets at distance 1 agree.
        let by_offset: HashMap<[i64; 2], f64> = rep.r_site.iter().cloned().collect();
        let axis = by_offset[&[0, 1]];
        for o in [[0, -1], [-1, 0], [1, 0]] {
            assert!((by_offset[&o] - axis).abs() < 1e-14);
        }
    }

    #[test]
    fn range1_table_matches_polygon_kernel() {
        // Dual route: the mask/sum algebra against the generic mini-window
        // energy evaluation, on random radius-2 neighborhoods.
        let beta = 0.04;
        let params: PolygonParams =
            serde_json::from_value(polygon_spec(beta).params).unwrap();
        let masks = range1_masks();
        let sig = range1_sigmoid_table(beta, 1.0);
        let offsets = punctured_offsets(2, 2);
        let window = Window::rect(5, 5).unwrap();
        let center = center_site(&window);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let idx: u32 = rng.gen_range(0..1u32 << 24);
            let mut config = Configuration::filled(
                window.clone(),
                Alphabet::new(2).unwrap(),
                Boundary::Free,
                0,
            )
            .unwrap();
            config.set(center, rng.gen_range(0..2) as Sym);
            let c = window.coords(center);
            for (bi, o) in offsets.iter().enumerate() {
                let site = window.index([c[0] + o[0], c[1] + o[1]]).unwrap();
                config.set(site, ((idx >> bi) & 1) as Sym);
            }
            let g = polygon_gamma0(&config, center, &params).unwrap();
            let table = sig[(range1_s(idx, &masks) + 9) as usize];
            assert!((g[1] - table).abs() < 1e-12, "idx {idx}: {} vs {table}", g[1]);
        }
    }

    #[test]
    fn sampled_polygon_stays_below_exact() {
        let exact = dobrushin_report(&polygon_spec(0.02), &DobrushinOptions::default()).unwrap();
        let opts = DobrushinOptions { samples: 100, force_sampled: true, ..Default::default() };
        let samp = dobrushin_report(&polygon_spec(0.02), &opts).unwrap();
        assert!(samp.lower_bound_only);
        assert!(samp.r_total <= exact.r_total + 1e-12);
        assert!(samp.r_total > 0.0);
    }
}
