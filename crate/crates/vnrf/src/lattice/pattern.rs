//! Punctured-ball patterns and their injective integer keys.
//!
//! A pattern of radius `ℓ` at site `i` is the restriction of a configuration
//! to `V_i^0(ℓ)`, stored in the fixed lexicographic offset order of
//! [`punctured_offsets`]. The center symbol is never part of a pattern.

use super::{max_norm, punctured_offsets, Alphabet, Configuration};
use crate::{Error, Result, Site, Sym};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    d: usize,
    radius: usize,
    values: Vec<Sym>,
}

impl Pattern {
    pub fn new(d: usize, radius: usize, values: Vec<Sym>) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter("pattern radius must be >= 1".into()));
        }
        let want = super::punctured_size(d, radius);
        if values.len() != want {
            return Err(Error::InvalidParameter(format!(
                "pattern of radius {radius} in d={d} needs {want} symbols, got {}",
                values.len()
            )));
        }
        Ok(Pattern { d, radius, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Symbols in lexicographic offset order.
    pub fn values(&self) -> &[Sym] {
        &self.values
    }

    /// Offsets this pattern's symbols refer to, in storage order.
    pub fn offsets(&self) -> Vec<[i64; 2]> {
        punctured_offsets(self.d, self.radius)
    }
}

/// Read the radius-`ℓ` pattern around `site`.
pub fn extract_pattern(config: &Configuration, site: Site, radius: usize) -> Result<Pattern> {
    let w = config.window();
    if site >= w.len() {
        return Err(Error::SiteOutsideWindow(site));
    }
    let offs = punctured_offsets(w.d(), radius);
    let mut values = Vec::with_capacity(offs.len());
    for &o in &offs {
        match config.at_offset(site, o) {
            Some(s) => values.push(s),
            None => return Err(Error::PatternExceedsWindow { site, radius }),
        }
    }
    Pattern::new(w.d(), radius, values)
}

/// Injective key for a pattern under a fixed `(d, radius, |A|)`.
///
/// The key is the base-`|A|` number whose most significant digit is the first
/// stored symbol. When `|A|^len` exceeds the `u128` range the digit string
/// itself is kept, which stays collision-free at any size.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKey {
    Small(u128),
    Wide(Box<[Sym]>),
}

fn fits_u128(alphabet_size: usize, len: usize) -> bool {
    // The largest key is a^len - 1, not a^len: build it digit by digit so
    // the boundary case a^len = 2^128 still counts as representable.
    let a = alphabet_size as u128;
    let mut max_key: u128 = 0;
    for _ in 0..len {
        max_key = match max_key.checked_mul(a).and_then(|m| m.checked_add(a - 1)) {
            Some(m) => m,
            None => return false,
        };
    }
    true
}

pub fn pattern_key(p: &Pattern, alphabet: &Alphabet) -> PatternKey {
    let a = alphabet.size() as u128;
    if fits_u128(alphabet.size(), p.values.len()) {
        let mut k: u128 = 0;
        for &v in &p.values {
            k = k * a + v as u128;
        }
        PatternKey::Small(k)
    } else {
        PatternKey::Wide(p.values.clone().into_boxed_slice())
    }
}

/// Inverse of [`pattern_key`] for the same `(d, radius, |A|)`.
pub fn decode_key(key: &PatternKey, d: usize, radius: usize, alphabet: &Alphabet) -> Pattern {
    let len = super::punctured_size(d, radius);
    let values = match key {
        PatternKey::Wide(v) => v.to_vec(),
        PatternKey::Small(k) => {
            let a = alphabet.size() as u128;
            let mut v = vec![0 as Sym; len];
            let mut rest = *k;
            for slot in v.iter_mut().rev() {
                *slot = (rest % a) as Sym;
                rest /= a;
            }
            debug_assert_eq!(rest, 0);
            v
        }
    };
    Pattern::new(d, radius, values).expect("decoded pattern has canonical length")
}

/// Key of the radius-`ℓ` pattern at `site` without allocating a `Pattern`.
///
/// `offsets` must be `punctured_offsets(d, radius)`; passing them in lets a
/// counting loop reuse one precomputed list.
pub fn key_at(
    config: &Configuration,
    site: Site,
    offsets: &[[i64; 2]],
    alphabet: &Alphabet,
) -> Result<PatternKey> {
    let a = alphabet.size() as u128;
    if fits_u128(alphabet.size(), offsets.len()) {
        let mut k: u128 = 0;
        for &o in offsets {
            match config.at_offset(site, o) {
                Some(s) => k = k * a + s as u128,
                None => {
                    return Err(Error::PatternExceedsWindow {
                        site,
                        radius: offsets.iter().map(|&v| max_norm(v)).max().unwrap_or(0) as usize,
                    })
                }
            }
        }
        Ok(PatternKey::Small(k))
    } else {
        let mut v = Vec::with_capacity(offsets.len());
        for &o in offsets {
            match config.at_offset(site, o) {
                Some(s) => v.push(s),
                None => {
                    return Err(Error::PatternExceedsWindow {
                        site,
                        radius: offsets.iter().map(|&v| max_norm(v)).max().unwrap_or(0) as usize,
                    })
                }
            }
        }
        Ok(PatternKey::Wide(v.into_boxed_slice()))
    }
}

/// Extend a radius-`(ℓ-1)` pattern by shell values `v` on `∂V_0(ℓ)`
/// (in lexicographic shell order) to the radius-`ℓ` pattern.
pub fn extend_pattern(p: &Pattern, shell: &[Sym]) -> Result<Pattern> {
    let ell = p.radius + 1;
    let want = super::shell_size(p.d, ell);
    if shell.len() != want {
        return Err(Error::InvalidParameter(format!(
            "shell of radius {ell} in d={} needs {want} symbols, got {}",
            p.d,
            shell.len()
        )));
    }
    // Both the inner offsets and the shell offsets are subsequences of the
    // lexicographic order on V_0^0(ℓ), so a single merge pass suffices.
    let offs = punctured_offsets(p.d, ell);
    let mut values = Vec::with_capacity(offs.len());
    let (mut inner, mut outer) = (0usize, 0usize);
    let r = ell as i64;
    for &o in &offs {
        if max_norm(o) < r {
            values.push(p.values[inner]);
            inner += 1;
        } else {
            values.push(shell[outer]);
            outer += 1;
        }
    }
    Pattern::new(p.d, ell, values)
}

/// Restrict a pattern to a smaller radius.
pub fn restrict_pattern(p: &Pattern, radius: usize) -> Result<Pattern> {
    if radius == 0 || radius > p.radius {
        return Err(Error::InvalidParameter(format!(
            "cannot restrict radius-{} pattern to radius {radius}",
            p.radius
        )));
    }
    if radius == p.radius {
        return Ok(p.clone());
    }
    let r = radius as i64;
    let offs = punctured_offsets(p.d, p.radius);
    let values = offs
        .iter()
        .zip(&p.values)
        .filter(|(o, _)| max_norm(**o) <= r)
        .map(|(_, &v)| v)
        .collect();
    Pattern::new(p.d, radius, values)
}

/// Positions of the radius-`(ℓ-1)` offsets inside the radius-`ℓ` offset list.
///
/// `restrict` of a stored digit string is then a gather over these indices,
/// which the counting tables use to group fine patterns under coarse ones.
pub fn restriction_indices(d: usize, ell: usize) -> Vec<usize> {
    assert!(ell >= 2);
    let r = (ell - 1) as i64;
    punctured_offsets(d, ell)
        .iter()
        .enumerate()
        .filter(|(_, o)| max_norm(**o) <= r)
        .map(|(i, _)| i)
        .collect()
}

/// Enumerate all shell assignments of radius `ℓ` (lexicographic digit order).
pub fn shell_assignments(d: usize, ell: usize, alphabet: &Alphabet) -> Vec<Vec<Sym>> {
    let len = super::shell_size(d, ell);
    let a = alphabet.size();
    let total = a.checked_pow(len as u32).expect("shell assignment space too large");
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0 as Sym; len];
    loop {
        out.push(cur.clone());
        // increment base-a counter, most significant digit first
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (cur[pos] as usize) + 1 < a {
                cur[pos] += 1;
                for v in cur[pos + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}
