//! Two-dimensional contour model with data-dependent interaction regions.
//!
//! A region around a site is carved out by the innermost simple lattice
//! polygon whose boundary carries symbol 1 and whose interior contains the
//! site. Symbols are {0,1}, read as spins {-1,+1} in the energy. The
//! single-site kernel is a finite-volume Gibbs kernel for an energy whose
//! terms couple all spins of a region, with a coupling constant depending
//! on the region's cardinality.
//!
//! A subset of the lattice counts as a polygon region when its 8-neighbor
//! boundary forms a single closed 4-connected cycle with no repeated
//! vertices and the remaining interior is nonempty. Unit lattice segments
//! can only meet at lattice points, so such a cycle is automatically
//! non-crossing.

use super::{ContextResult, QMin, SpecificationModel};
use crate::lattice::{ball_offsets, ball_size, punctured_offsets, Alphabet, Boundary, Configuration, Resolved, Window};
use crate::{Error, Result, Site, Sym};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolygonParams {
    pub beta: f64,
    /// Interaction range `L`: regions are truncated to the ball of radius
    /// `L`, contexts to the ball of radius `2L`.
    pub range: usize,
    /// Coupling by region cardinality: entry `m` multiplies the spin
    /// product of a region of `m` sites. Length must be `|V(L)| + 1`;
    /// entry 0 is never used.
    pub couplings: Vec<f64>,
}

impl PolygonParams {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "polygon beta must be finite and nonnegative, got {}",
                self.beta
            )));
        }
        if self.range < 1 {
            return Err(Error::InvalidParameter("polygon range must be at least 1".into()));
        }
        let need = ball_size(2, self.range) + 1;
        if self.couplings.len() != need {
            return Err(Error::InvalidParameter(format!(
                "polygon couplings must have one entry per region cardinality 0..=|V(range)| \
                 ({need} entries for range {}), got {}",
                self.range,
                self.couplings.len()
            )));
        }
        if self.couplings.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("polygon couplings must be finite".into()));
        }
        Ok(())
    }

    fn j_max(&self) -> f64 {
        self.couplings.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Region of a site: offsets relative to it, plus whether the range
/// truncation was active (the untruncated region exceeded the ball).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionOutcome {
    pub offsets: Vec<[i64; 2]>,
    pub truncated: bool,
}

impl RegionOutcome {
    pub fn sites(&self, config: &Configuration, site: Site) -> Result<Vec<Site>> {
        let w = config.window();
        let c = w.coords(site);
        let mut out = Vec::with_capacity(self.offsets.len());
        for &o in &self.offsets {
            match w.resolve([c[0] + o[0], c[1] + o[1]], config.boundary()) {
                Resolved::In(s) => out.push(s),
                _ => return Err(Error::ContextExceedsWindow(site)),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

fn spin(s: Sym) -> f64 {
    2.0 * s as f64 - 1.0
}

/// Local square view of the ones around a site.
struct Patch {
    r: i64,
    side: i64,
    ones: Vec<bool>,
}

impl Patch {
    fn from_config(config: &Configuration, site: Site, r: i64) -> Result<Self> {
        let side = 2 * r + 1;
        let mut ones = vec![false; (side * side) as usize];
        for u in 0..side {
            for v in 0..side {
                let s = config
                    .at_offset(site, [u - r, v - r])
                    .ok_or(Error::ContextExceedsWindow(site))?;
                ones[(u * side + v) as usize] = s == 1;
            }
        }
        Ok(Self { r, side, ones })
    }

    fn idx(&self, u: i64, v: i64) -> usize {
        (u * self.side + v) as usize
    }

    fn in_bounds(&self, u: i64, v: i64) -> bool {
        u >= 0 && u < self.side && v >= 0 && v < self.side
    }

    fn center(&self) -> usize {
        self.idx(self.r, self.r)
    }

    /// Mask of the ball of radius `rad` around the patch center.
    fn ball_mask(&self, rad: i64) -> Vec<bool> {
        let mut m = vec![false; self.ones.len()];
        for u in (self.r - rad).max(0)..=(self.r + rad).min(self.side - 1) {
            for v in (self.r - rad).max(0)..=(self.r + rad).min(self.side - 1) {
                m[self.idx(u, v)] = true;
            }
        }
        m
    }
}

/// 8-neighbor boundary of a mask: set sites with some neighbor (or the
/// outside of the patch) not in the mask.
fn boundary_of(side: i64, mask: &[bool]) -> Vec<bool> {
    let mut b = vec![false; mask.len()];
    for u in 0..side {
        'site: for v in 0..side {
            let i = (u * side + v) as usize;
            if !mask[i] {
                continue;
            }
            for du in -1..=1i64 {
                for dv in -1..=1i64 {
                    if du == 0 && dv == 0 {
                        continue;
                    }
                    let (nu, nv) = (u + du, v + dv);
                    let outside =
                        nu < 0 || nu >= side || nv < 0 || nv >= side || !mask[(nu * side + nv) as usize];
                    if outside {
                        b[i] = true;
                        continue 'site;
                    }
                }
            }
        }
    }
    b
}

/// Sites of the patch enclosed by the cycle or lying on it, by even-odd
/// crossing counting along rows.
fn fill_cycle(side: i64, path: &[usize]) -> Vec<bool> {
    let coord = |i: usize| ((i as i64) / side, (i as i64) % side);
    let mut fill = vec![false; (side * side) as usize];
    let (mut u0, mut u1, mut v0, mut v1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &p in path {
        let (u, v) = coord(p);
        fill[p] = true;
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    for u in u0..=u1 {
        for v in v0..=v1 {
            let i = (u * side + v) as usize;
            if fill[i] {
                continue;
            }
            // Ray toward increasing v at fixed u. Only edges along the u
            // axis can cross it; the half-open rule at min-u makes vertex
            // hits unambiguous.
            let mut crossings = 0u32;
            for e in 0..path.len() {
                let (au, av) = coord(path[e]);
                let (bu, bv) = coord(path[(e + 1) % path.len()]);
                if av == bv && au.min(bu) == u && av > v {
                    crossings += 1;
                }
            }
            if crossings % 2 == 1 {
                fill[i] = true;
            }
        }
    }
    fill
}

const DFS_DIRS: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

struct FamilySearch<'a> {
    patch: &'a Patch,
    budget: &'a mut u64,
    min_mask: Vec<bool>,
    acc: Option<Vec<bool>>,
    done: bool,
    start: usize,
    max_len: usize,
    path: Vec<usize>,
    on_path: Vec<bool>,
}

impl FamilySearch<'_> {
    fn extend(&mut self, u: i64, v: i64) -> Result<()> {
        if self.done {
            return Ok(());
        }
        if *self.budget == 0 {
            return Err(Error::Unsupported(
                "polygon enumeration budget exceeded; the configuration is too dense for \
                 exhaustive contour search"
                    .into(),
            ));
        }
        *self.budget -= 1;
        let cur = self.patch.idx(u, v);
        // Close the cycle when the start is adjacent, the walk is long
        // enough to enclose anything, and the orientation is canonical
        // (second vertex smaller than last).
        let (su, sv) = ((self.start as i64) / self.patch.side, (self.start as i64) % self.patch.side);
        if self.path.len() >= 8
            && (su - u).abs() + (sv - v).abs() == 1
            && self.path[1] < cur
        {
            self.process_cycle()?;
            if self.done {
                return Ok(());
            }
        }
        if self.path.len() >= self.max_len {
            return Ok(());
        }
        for (du, dv) in DFS_DIRS {
            let (nu, nv) = (u + du, v + dv);
            if !self.patch.in_bounds(nu, nv) {
                continue;
            }
            let ni = self.patch.idx(nu, nv);
            if ni <= self.start || !self.patch.ones[ni] || self.on_path[ni] {
                continue;
            }
            self.path.push(ni);
            self.on_path[ni] = true;
            self.extend(nu, nv)?;
            self.on_path[ni] = false;
            self.path.pop();
            if self.done {
                return Ok(());
            }
        }
        Ok(())
    }

    fn process_cycle(&mut self) -> Result<()> {
        let side = self.patch.side;
        let fill = fill_cycle(side, &self.path);
        let boundary = boundary_of(side, &fill);
        // The cycle must be exactly the boundary of its own fill, with a
        // nonempty interior; this re-derivation guards the fill routine.
        let mut on_cycle = vec![false; fill.len()];
        for &p in &self.path {
            on_cycle[p] = true;
        }
        if boundary != on_cycle {
            return Ok(());
        }
        let c = self.patch.center();
        if !fill[c] || boundary[c] {
            return Ok(());
        }
        let interior_nonempty = fill.iter().zip(&boundary).any(|(&f, &b)| f && !b);
        if !interior_nonempty {
            return Ok(());
        }
        match &mut self.acc {
            None => self.acc = Some(fill),
            Some(acc) => {
                for (a, f) in acc.iter_mut().zip(&fill) {
                    *a = *a && *f;
                }
            }
        }
        // Every qualifying region contains the 8-neighborhood of the
        // center, so the intersection cannot shrink below that ball.
        if self.acc.as_ref() == Some(&self.min_mask) {
            self.done = true;
        }
        Ok(())
    }
}

/// Intersection of the fills of all qualifying polygons around the patch
/// center: boundary all ones, center strictly interior. `None` when no
/// polygon qualifies, in which case the family is vacuous and the region
/// is truncated at full range.
///
/// Cycles are enumerated shortest first (iterative deepening) so that in
/// dense configurations the intersection reaches its lower bound early and
/// the search stops without exploring long contours.
fn family_intersection(patch: &Patch, budget: &mut u64) -> Result<Option<Vec<bool>>> {
    let ones_count = patch.ones.iter().filter(|&&b| b).count();
    if ones_count < 8 {
        return Ok(None);
    }
    let mut acc: Option<Vec<bool>> = None;
    let min_mask = patch.ball_mask(1);
    let mut max_len = 8;
    while max_len <= ones_count {
        let mut search = FamilySearch {
            patch,
            budget: &mut *budget,
            min_mask: min_mask.clone(),
            acc: acc.take(),
            done: false,
            start: 0,
            max_len,
            path: Vec::new(),
            on_path: vec![false; patch.ones.len()],
        };
        for s in 0..patch.ones.len() {
            if !patch.ones[s] {
                continue;
            }
            search.start = s;
            search.path.clear();
            search.path.push(s);
            for p in search.on_path.iter_mut() {
                *p = false;
            }
            search.on_path[s] = true;
            let (u, v) = ((s as i64) / patch.side, (s as i64) % patch.side);
            search.extend(u, v)?;
            if search.done {
                return Ok(search.acc);
            }
        }
        acc = search.acc;
        max_len += 2;
    }
    Ok(acc)
}

const DEFAULT_ENUM_BUDGET: u64 = 50_000_000;

fn mask_to_offsets(patch: &Patch, mask: &[bool], clip: i64) -> (Vec<[i64; 2]>, bool) {
    let mut offsets = Vec::new();
    let mut outside = false;
    for u in 0..patch.side {
        for v in 0..patch.side {
            if !mask[patch.idx(u, v)] {
                continue;
            }
            let (du, dv) = (u - patch.r, v - patch.r);
            if du.abs() <= clip && dv.abs() <= clip {
                offsets.push([du, dv]);
            } else {
                outside = true;
            }
        }
    }
    (offsets, outside)
}

fn check_polygon_inputs(config: &Configuration, params: &PolygonParams) -> Result<()> {
    params.validate()?;
    if config.window().d() != 2 {
        return Err(Error::Unsupported("polygon model expects a 2-d window".into()));
    }
    if config.alphabet().size() != 2 {
        return Err(Error::Unsupported("polygon model expects a binary alphabet".into()));
    }
    Ok(())
}

/// Region of `site`: the ball of radius `range` intersected with the
/// family intersection computed in the box of radius `range + 1`.
pub fn polygon_region(
    config: &Configuration,
    site: Site,
    params: &PolygonParams,
) -> Result<RegionOutcome> {
    check_polygon_inputs(config, params)?;
    if site >= config.window().len() {
        return Err(Error::SiteOutsideWindow(site));
    }
    let l = params.range as i64;
    let patch = Patch::from_config(config, site, l + 1)?;
    let mut budget = DEFAULT_ENUM_BUDGET;
    match family_intersection(&patch, &mut budget)? {
        None => Ok(RegionOutcome { offsets: ball_offsets(2, params.range), truncated: true }),
        Some(mask) => {
            let (offsets, outside) = mask_to_offsets(&patch, &mask, l);
            Ok(RegionOutcome { offsets, truncated: outside })
        }
    }
}

/// Context of `site`: the family intersection computed in the box of
/// radius `2*range + 1`, clipped to the ball of radius `2*range`, minus
/// the site itself. A vacuous family yields the full punctured ball.
pub fn polygon_context(
    config: &Configuration,
    site: Site,
    params: &PolygonParams,
) -> Result<ContextResult> {
    check_polygon_inputs(config, params)?;
    if site >= config.window().len() {
        return Err(Error::SiteOutsideWindow(site));
    }
    let l2 = 2 * params.range as i64;
    let patch = Patch::from_config(config, site, l2 + 1)?;
    let mut budget = DEFAULT_ENUM_BUDGET;
    match family_intersection(&patch, &mut budget)? {
        None => Ok(ContextResult {
            offsets: punctured_offsets(2, 2 * params.range),
            truncated: true,
        }),
        Some(mask) => {
            let (mut offsets, outside) = mask_to_offsets(&patch, &mask, l2);
            offsets.retain(|&o| o != [0, 0]);
            Ok(ContextResult { offsets, truncated: outside })
        }
    }
}

/// Region used by the energy at range 1.
///
/// At range 1 the region is constant: any qualifying polygon contains the
/// full 8-neighborhood of its interior sites, so the clipped intersection
/// is always exactly the radius-1 ball, whether or not the family is
/// vacuous. This avoids contour enumeration in the energy inner loop.
fn region_offsets_for_energy(
    config: &Configuration,
    site: Site,
    params: &PolygonParams,
) -> Result<Vec<[i64; 2]>> {
    if params.range == 1 {
        Ok(ball_offsets(2, 1))
    } else {
        Ok(polygon_region(config, site, params)?.offsets)
    }
}

/// Energy of the terms whose region intersects `lambda`: minus the sum of
/// coupling-weighted spin products over the regions of all sites within
/// `range` of `lambda`.
pub fn polygon_energy(
    config: &Configuration,
    lambda: &[Site],
    params: &PolygonParams,
) -> Result<f64> {
    check_polygon_inputs(config, params)?;
    if matches!(config.boundary(), Boundary::Fixed(_)) {
        return Err(Error::Unsupported(
            "polygon energy does not support fixed boundaries".into(),
        ));
    }
    let w = config.window();
    let mut candidates = BTreeSet::new();
    for &s in lambda {
        if s >= w.len() {
            return Err(Error::SiteOutsideWindow(s));
        }
        let c = w.coords(s);
        for o in ball_offsets(2, params.range) {
            match w.resolve([c[0] + o[0], c[1] + o[1]], config.boundary()) {
                Resolved::In(j) => {
                    candidates.insert(j);
                }
                _ => return Err(Error::ContextExceedsWindow(s)),
            }
        }
    }
    let mut h = 0.0;
    for &j in &candidates {
        let offsets = region_offsets_for_energy(config, j, params)?;
        let mut prod = 1.0;
        for &o in &offsets {
            let s = config.at_offset(j, o).ok_or(Error::ContextExceedsWindow(j))?;
            prod *= spin(s);
        }
        h -= params.couplings[offsets.len()] * prod;
    }
    Ok(h)
}

/// Single-site Gibbs kernel: relative weights `exp(-beta H)` of the two
/// center symbols, all other symbols frozen.
pub fn polygon_gamma0(
    config: &Configuration,
    site: Site,
    params: &PolygonParams,
) -> Result<Vec<f64>> {
    check_polygon_inputs(config, params)?;
    if site >= config.window().len() {
        return Err(Error::SiteOutsideWindow(site));
    }
    // Copy the dependence box into a standalone free window; both center
    // values are evaluated on that local picture. At range 1 the constant
    // region keeps the box at radius 2, otherwise radius 2*range + 1.
    let br = if params.range == 1 { 2 } else { 2 * params.range as i64 + 1 };
    let side = 2 * br + 1;
    let mut data = vec![0; (side * side) as usize];
    for u in 0..side {
        for v in 0..side {
            data[(u * side + v) as usize] = config
                .at_offset(site, [u - br, v - br])
                .ok_or(Error::ContextExceedsWindow(site))?;
        }
    }
    let mini_w = Window::rect(side as usize, side as usize)?;
    let mut mini = Configuration::from_data(mini_w, Alphabet::new(2)?, Boundary::Free, data)?;
    let center = (br * side + br) as usize;
    let mut logw = [0.0f64; 2];
    for a in 0..2usize {
        mini.set(center, a as Sym);
        logw[a] = -params.beta * polygon_energy(&mini, &[center], params)?;
    }
    let m = logw[0].max(logw[1]);
    let w0 = (logw[0] - m).exp();
    let w1 = (logw[1] - m).exp();
    Ok(vec![w0 / (w0 + w1), w1 / (w0 + w1)])
}

pub struct PolygonModel {
    params: PolygonParams,
}

impl PolygonModel {
    pub fn new(params: PolygonParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &PolygonParams {
        &self.params
    }

    pub fn region(&self, config: &Configuration, site: Site) -> Result<RegionOutcome> {
        polygon_region(config, site, &self.params)
    }
}

impl SpecificationModel for PolygonModel {
    fn name(&self) -> &'static str {
        "polygon"
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::new(2).expect("binary alphabet")
    }

    fn dependence_radius(&self) -> Option<usize> {
        if self.params.range == 1 {
            Some(2)
        } else {
            Some(2 * self.params.range + 1)
        }
    }

    fn q_min(&self) -> QMin {
        // Flipping the center changes each contributing energy term by at
        // most twice the largest coupling; the number of such terms is
        // bounded by the ball used in the context construction.
        let n_terms = ball_size(2, 2 * self.params.range) as f64;
        let value = 1.0 / (1.0 + (2.0 * self.params.beta * self.params.j_max() * n_terms).exp());
        QMin { value, estimated: false }
    }

    fn gamma0(&self, config: &Configuration, site: Site) -> Result<Vec<f64>> {
        polygon_gamma0(config, site, &self.params)
    }

    fn context(&self, config: &Configuration, site: Site) -> Result<ContextResult> {
        polygon_context(config, site, &self.params)
    }
}
