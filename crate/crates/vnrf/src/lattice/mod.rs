//! Lattice geometry: windows, configurations, max-norm balls, and the
//! security region on which all counting statistics are collected.
//!
//! Coordinates are `[i64; 2]`; in dimension 1 the second component is always
//! zero. Sites inside a window are addressed by their row-major linear index.

mod grid_io;
mod pattern;

pub use grid_io::{read_grid, read_grid_file, write_grid, write_grid_file};
pub use pattern::{
    decode_key, extend_pattern, extract_pattern, key_at, pattern_key, restrict_pattern,
    restriction_indices, shell_assignments, Pattern, PatternKey,
};

use crate::{Error, Result, Site, Sym};
use serde::{Deserialize, Serialize};

/// Finite alphabet `{0, .., size-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 || size > 256 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size must be in 2..=256, got {size}"
            )));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Sym) -> bool {
        (s as usize) < self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> {
        (0..self.size).map(|s| s as Sym)
    }
}

/// Out-of-window behavior when reading a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Reads outside the window fail.
    Free,
    /// Coordinates wrap modulo the extents.
    Periodic,
    /// Reads outside the window return a fixed symbol.
    Fixed(Sym),
}

/// Finite rectangular observation window in `Z^d`, `d` = 1 or 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    d: usize,
    extents: [usize; 2],
}

impl Window {
    pub fn line(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("empty window".into()));
        }
        Ok(Window { d: 1, extents: [n, 1] })
    }

    pub fn rect(e1: usize, e2: usize) -> Result<Self> {
        if e1 == 0 || e2 == 0 {
            return Err(Error::InvalidParameter("empty window".into()));
        }
        Ok(Window { d: 2, extents: [e1, e2] })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.d]
    }

    pub fn min_extent(&self) -> usize {
        *self.extents().iter().min().unwrap()
    }

    /// Number of sites `|Λ|`.
    pub fn len(&self) -> usize {
        self.extents[..self.d].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major linear index of in-window coordinates.
    pub fn index(&self, c: [i64; 2]) -> Option<Site> {
        for a in 0..self.d {
            if c[a] < 0 || c[a] >= self.extents[a] as i64 {
                return None;
            }
        }
        if self.d == 1 {
            Some(c[0] as usize)
        } else {
            Some(c[0] as usize * self.extents[1] + c[1] as usize)
        }
    }

    pub fn coords(&self, site: Site) -> [i64; 2] {
        debug_assert!(site < self.len());
        if self.d == 1 {
            [site as i64, 0]
        } else {
            [(site / self.extents[1]) as i64, (site % self.extents[1]) as i64]
        }
    }

    /// Resolve possibly out-of-window coordinates under a boundary mode.
    pub fn resolve(&self, c: [i64; 2], boundary: Boundary) -> Resolved {
        if let Some(s) = self.index(c) {
            return Resolved::In(s);
        }
        match boundary {
            Boundary::Free => Resolved::Outside,
            Boundary::Fixed(sym) => Resolved::Fixed(sym),
            Boundary::Periodic => {
                let mut w = c;
                for a in 0..self.d {
                    w[a] = w[a].rem_euclid(self.extents[a] as i64);
                }
                Resolved::In(self.index(w).unwrap())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolved {
    In(Site),
    Fixed(Sym),
    Outside,
}

/// A symbol assignment on a window plus its boundary mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    window: Window,
    alphabet: Alphabet,
    boundary: Boundary,
    data: Vec<Sym>,
}

impl Configuration {
    pub fn filled(window: Window, alphabet: Alphabet, boundary: Boundary, fill: Sym) -> Result<Self> {
        if !alphabet.contains(fill) {
            return Err(Error::InvalidParameter(format!("fill symbol {fill} not in alphabet")));
        }
        let n = window.len();
        Ok(Configuration { window, alphabet, boundary, data: vec![fill; n] })
    }

    pub fn from_data(
        window: Window,
        alphabet: Alphabet,
        boundary: Boundary,
        data: Vec<Sym>,
    ) -> Result<Self> {
        if data.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "data length {} does not match window size {}",
                data.len(),
                window.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|s| !alphabet.contains(**s)) {
            return Err(Error::InvalidParameter(format!("symbol {bad} not in alphabet")));
        }
        Ok(Configuration { window, alphabet, boundary, data })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn data(&self) -> &[Sym] {
        &self.data
    }

    pub fn get(&self, site: Site) -> Sym {
        self.data[site]
    }

    pub fn set(&mut self, site: Site, s: Sym) {
        debug_assert!(self.alphabet.contains(s));
        self.data[site] = s;
    }

    /// Read the symbol at `site + dv`, or `None` if unresolvable (free boundary).
    pub fn at_offset(&self, site: Site, dv: [i64; 2]) -> Option<Sym> {
        let c = self.window.coords(site);
        match self.window.resolve([c[0] + dv[0], c[1] + dv[1]], self.boundary) {
            Resolved::In(s) => Some(self.data[s]),
            Resolved::Fixed(sym) => Some(sym),
            Resolved::Outside => None,
        }
    }

    /// Read at absolute coordinates (which may lie outside the window).
    pub fn at_coords(&self, c: [i64; 2]) -> Option<Sym> {
        match self.window.resolve(c, self.boundary) {
            Resolved::In(s) => Some(self.data[s]),
            Resolved::Fixed(sym) => Some(sym),
            Resolved::Outside => None,
        }
    }
}

/// `(2ℓ+1)^d`: number of sites in the closed max-norm ball `V_0(ℓ)`.
pub fn ball_size(d: usize, ell: usize) -> usize {
    (2 * ell + 1).pow(d as u32)
}

/// `(2ℓ+1)^d - 1`: the punctured ball `V_0^0(ℓ)`.
pub fn punctured_size(d: usize, ell: usize) -> usize {
    ball_size(d, ell) - 1
}

/// `(2ℓ+1)^d - (2ℓ-1)^d`: the shell `∂V_0(ℓ)` of sites at max-norm exactly `ℓ`.
pub fn shell_size(d: usize, ell: usize) -> usize {
    assert!(ell >= 1, "shell of radius 0 is the origin");
    ball_size(d, ell) - (2 * ell - 1).pow(d as u32)
}

fn offsets_filtered(d: usize, ell: usize, keep: impl Fn(&[i64; 2]) -> bool) -> Vec<[i64; 2]> {
    let r = ell as i64;
    let mut out = Vec::new();
    match d {
        1 => {
            for v in -r..=r {
                let o = [v, 0];
                if keep(&o) {
                    out.push(o);
                }
            }
        }
        2 => {
            for v1 in -r..=r {
                for v2 in -r..=r {
                    let o = [v1, v2];
                    if keep(&o) {
                        out.push(o);
                    }
                }
            }
        }
        _ => panic!("dimension must be 1 or 2"),
    }
    out
}

/// Offsets of `V_0(ℓ)` in lexicographic order.
pub fn ball_offsets(d: usize, ell: usize) -> Vec<[i64; 2]> {
    offsets_filtered(d, ell, |_| true)
}

/// Offsets of `V_0^0(ℓ)` (origin removed), lexicographic.
pub fn punctured_offsets(d: usize, ell: usize) -> Vec<[i64; 2]> {
    offsets_filtered(d, ell, |o| *o != [0, 0])
}

/// Offsets of the shell `∂V_0(ℓ)`, lexicographic.
pub fn shell_offsets(d: usize, ell: usize) -> Vec<[i64; 2]> {
    assert!(ell >= 1);
    let r = ell as i64;
    offsets_filtered(d, ell, |o| o[0].abs().max(o[1].abs()) == r)
}

pub fn max_norm(v: [i64; 2]) -> i64 {
    v[0].abs().max(v[1].abs())
}

/// Security margin `m = ceil(k(n))` with `k(n) = (log n)^(1/(2d))` (natural log).
pub fn margin_for(n: usize, d: usize) -> usize {
    assert!(n >= 1);
    let k = (n as f64).ln().powf(1.0 / (2.0 * d as f64));
    k.ceil() as usize
}

/// The set of sites whose margin-ball stays inside the window.
///
/// Under a free (or fixed) boundary this is the centered sub-box obtained by
/// trimming `margin` sites from every face; under a periodic boundary every
/// site qualifies. The region is never empty: construction fails instead.
#[derive(Clone, Debug)]
pub struct SecurityRegion {
    window: Window,
    margin: usize,
    periodic: bool,
    lo: [i64; 2],
    hi: [i64; 2], // inclusive
}

impl SecurityRegion {
    pub fn margin(&self) -> usize {
        self.margin
    }

    /// True when a periodic boundary made every window site qualify.
    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        let mut n = 1usize;
        for a in 0..self.window.d() {
            n *= (self.hi[a] - self.lo[a] + 1) as usize;
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: Site) -> bool {
        let c = self.window.coords(site);
        (0..self.window.d()).all(|a| c[a] >= self.lo[a] && c[a] <= self.hi[a])
    }

    /// Sites in ascending linear-index order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let d = self.window.d();
        let (lo, hi) = (self.lo, self.hi);
        let window = self.window.clone();
        let row_len = (hi[1] - lo[1] + 1) as usize;
        let n = self.len();
        (0..n).map(move |k| {
            let c = if d == 1 {
                [lo[0] + k as i64, 0]
            } else {
                [lo[0] + (k / row_len) as i64, lo[1] + (k % row_len) as i64]
            };
            window.index(c).unwrap()
        })
    }

    /// Split the site list into `chunks` contiguous spans (for parallel counting).
    pub fn site_chunks(&self, chunks: usize) -> Vec<Vec<Site>> {
        let all: Vec<Site> = self.sites().collect();
        let chunks = chunks.max(1).min(all.len().max(1));
        let per = (all.len() + chunks - 1) / chunks;
        all.chunks(per.max(1)).map(|c| c.to_vec()).collect()
    }
}

/// Security region with the default margin `ceil(k(n))`.
pub fn security_region(window: &Window, boundary: Boundary) -> Result<SecurityRegion> {
    let m = margin_for(window.len(), window.d());
    security_region_with_margin(window, boundary, m)
}

/// Security region with an explicit margin.
pub fn security_region_with_margin(
    window: &Window,
    boundary: Boundary,
    margin: usize,
) -> Result<SecurityRegion> {
    let periodic = matches!(boundary, Boundary::Periodic);
    if periodic {
        let mut hi = [0i64; 2];
        for a in 0..window.d() {
            hi[a] = window.extents()[a] as i64 - 1;
        }
        return Ok(SecurityRegion { window: window.clone(), margin, periodic, lo: [0, 0], hi });
    }
    // Free/fixed boundary: the region is empty exactly when some extent <= 2*margin.
    let min_ext = window.min_extent();
    if min_ext <= 2 * margin {
        return Err(Error::WindowTooSmallForMargin { extent: min_ext, margin });
    }
    let mut lo = [0i64; 2];
    let mut hi = [0i64; 2];
    for a in 0..window.d() {
        lo[a] = margin as i64;
        hi[a] = window.extents()[a] as i64 - 1 - margin as i64;
    }
    Ok(SecurityRegion { window: window.clone(), margin, periodic, lo, hi })
}
