//! Baseline models with constant contexts: independent sites and
//! one-step Markov fields.

use super::{ContextResult, QMin, SpecificationModel};
use crate::lattice::{Alphabet, Configuration};
use crate::{Error, Result, Site};

/// Independent sites with a common marginal law.
pub struct IidModel {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl IidModel {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(probs.len())?;
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "iid site law must be strictly positive".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "iid site law must sum to 1 within 1e-12, got {sum}"
            )));
        }
        Ok(Self { alphabet, probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl SpecificationModel for IidModel {
    fn name(&self) -> &'static str {
        "iid"
    }

    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn dependence_radius(&self) -> Option<usize> {
        Some(0)
    }

    fn q_min(&self) -> QMin {
        let q = self.probs.iter().cloned().fold(f64::INFINITY, f64::min);
        QMin { value: q, estimated: false }
    }

    fn gamma0(&self, config: &Configuration, site: Site) -> Result<Vec<f64>> {
        if site >= config.window().len() {
            return Err(Error::SiteOutsideWindow(site));
        }
        Ok(self.probs.clone())
    }

    fn context(&self, config: &Configuration, site: Site) -> Result<ContextResult> {
        if site >= config.window().len() {
            return Err(Error::SiteOutsideWindow(site));
        }
        Ok(ContextResult { offsets: Vec::new(), truncated: false })
    }
}

enum Markov1Inner {
    /// One-dimensional chain with an explicit transition matrix.
    Chain { p: Vec<Vec<f64>> },
    /// Two-dimensional nearest-neighbor Ising field at inverse
    /// temperature beta, symbols {0,1} mapped to spins {-1,+1}.
    IsingPlane { beta: f64 },
}

/// Nearest-neighbor Markov field: a stationary chain in one dimension or an
/// Ising field in two. The context is the constant nearest-neighbor set.
pub struct Markov1Model {
    alphabet: Alphabet,
    inner: Markov1Inner,
    q_min: f64,
}

fn spin(s: crate::Sym) -> f64 {
    2.0 * s as f64 - 1.0
}

impl Markov1Model {
    pub fn chain(p: Vec<Vec<f64>>) -> Result<Self> {
        let n = p.len();
        let alphabet = Alphabet::new(n)?;
        for row in &p {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "transition matrix must be square, got a row of length {} in a {}-state chain",
                    row.len(),
                    n
                )));
            }
            if row.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter(
                    "degenerate transition: all entries must be strictly positive".into(),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "transition rows must sum to 1 within 1e-12, got {sum}"
                )));
            }
        }
        // Exact minimum of the conditional law over the finitely many
        // neighbor pairs.
        let mut q = f64::INFINITY;
        for l in 0..n {
            for r in 0..n {
                let z: f64 = (0..n).map(|a| p[l][a] * p[a][r]).sum();
                for a in 0..n {
                    q = q.min(p[l][a] * p[a][r] / z);
                }
            }
        }
        Ok(Self { alphabet, inner: Markov1Inner::Chain { p }, q_min: q })
    }

    /// Symmetric binary chain written in Ising form: transition
    /// `P(x,y) = exp(beta s_x s_y) / (2 cosh beta)`.
    pub fn ising_chain(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
        }
        let z = 2.0 * beta.cosh();
        let mut p = vec![vec![0.0; 2]; 2];
        for x in 0..2usize {
            for y in 0..2usize {
                p[x][y] = (beta * spin(x as crate::Sym) * spin(y as crate::Sym)).exp() / z;
            }
        }
        Self::chain(p)
    }

    pub fn ising_plane(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
        }
        // Worst case: all four neighbor spins aligned against the symbol.
        let q = 1.0 / (1.0 + (8.0 * beta.abs()).exp());
        Ok(Self {
            alphabet: Alphabet::new(2)?,
            inner: Markov1Inner::IsingPlane { beta },
            q_min: q,
        })
    }

    fn offsets(&self) -> &'static [[i64; 2]] {
        match self.inner {
            Markov1Inner::Chain { .. } => &[[-1, 0], [1, 0]],
            Markov1Inner::IsingPlane { .. } => &[[-1, 0], [0, -1], [0, 1], [1, 0]],
        }
    }

    fn expected_d(&self) -> usize {
        match self.inner {
            Markov1Inner::Chain { .. } => 1,
            Markov1Inner::IsingPlane { .. } => 2,
        }
    }
}

impl SpecificationModel for Markov1Model {
    fn name(&self) -> &'static str {
        match self.inner {
            Markov1Inner::Chain { .. } => "markov1",
            Markov1Inner::IsingPlane { .. } => "markov1-ising",
        }
    }

    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn dependence_radius(&self) -> Option<usize> {
        Some(1)
    }

    fn q_min(&self) -> QMin {
        QMin { value: self.q_min, estimated: false }
    }

    fn gamma0(&self, config: &Configuration, site: Site) -> Result<Vec<f64>> {
        if site >= config.window().len() {
            return Err(Error::SiteOutsideWindow(site));
        }
        if config.window().d() != self.expected_d() {
            return Err(Error::Unsupported(format!(
                "{} expects a {}-d window",
                self.name(),
                self.expected_d()
            )));
        }
        match &self.inner {
            Markov1Inner::Chain { p } => {
                let l = config
                    .at_offset(site, [-1, 0])
                    .ok_or(Error::ContextExceedsWindow(site))? as usize;
                let r = config
                    .at_offset(site, [1, 0])
                    .ok_or(Error::ContextExceedsWindow(site))? as usize;
                let n = self.alphabet.size();
                let mut g: Vec<f64> = (0..n).map(|a| p[l][a] * p[a][r]).collect();
                let z: f64 = g.iter().sum();
                for x in &mut g {
                    *x /= z;
                }
                Ok(g)
            }
            Markov1Inner::IsingPlane { beta } => {
                let mut field = 0.0;
                for &o in self.offsets() {
                    let s = config
                        .at_offset(site, o)
                        .ok_or(Error::ContextExceedsWindow(site))?;
                    field += spin(s);
                }
                let up = (beta * field).exp();
                let down = (-beta * field).exp();
                Ok(vec![down / (down + up), up / (down + up)])
            }
        }
    }

    fn context(&self, config: &Configuration, site: Site) -> Result<ContextResult> {
        if site >= config.window().len() {
            return Err(Error::SiteOutsideWindow(site));
        }
        Ok(ContextResult { offsets: self.offsets().to_vec(), truncated: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, Window};
    use approx::assert_relative_eq;

    #[test]
    fn iid_validation_and_kernel() {
        assert!(IidModel::new(vec![0.5, 0.5]).is_ok());
        assert!(IidModel::new(vec![1.0, 0.0]).is_err());
        assert!(IidModel::new(vec![0.6, 0.6]).is_err());
        let m = IidModel::new(vec![0.25, 0.75]).unwrap();
        let cfg = Configuration::filled(
            Window::line(5).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Free,
            0,
        )
        .unwrap();
        assert_eq!(m.gamma0(&cfg, 2).unwrap(), vec![0.25, 0.75]);
        let ctx = m.context(&cfg, 2).unwrap();
        assert!(ctx.offsets.is_empty());
        assert_eq!(ctx.radius(), 1);
        assert_relative_eq!(m.q_min().value, 0.25);
        assert!(m.gamma0(&cfg, 9).is_err());
    }

    #[test]
    fn chain_validation() {
        assert!(Markov1Model::chain(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).is_ok());
        let err = match Markov1Model::chain(vec![vec![1.0, 0.0], vec![0.4, 0.6]]) {
            Err(e) => e.to_string(),
            Ok(_) => panic!("degenerate chain was accepted"),
        };
        assert!(err.contains("degenerate transition"), "{err}");
        assert!(Markov1Model::chain(vec![vec![0.7, 0.3]]).is_err());
        assert!(Markov1Model::chain(vec![vec![0.7, 0.2], vec![0.4, 0.6]]).is_err());
    }

    #[test]
    fn chain_kernel_matches_hand_computation() {
        let p = vec![vec![0.7, 0.3], vec![0.4, 0.6]];
        let m = Markov1Model::chain(p.clone()).unwrap();
        let cfg = Configuration::from_data(
            Window::line(3).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Free,
            vec![0, 0, 1],
        )
        .unwrap();
        // Neighbors (0, 1): gamma(a) prop to P(0,a) P(a,1).
        let w0 = p[0][0] * p[0][1];
        let w1 = p[0][1] * p[1][1];
        let g = m.gamma0(&cfg, 1).unwrap();
        assert_relative_eq!(g[0], w0 / (w0 + w1), max_relative = 1e-14);
        assert_relative_eq!(g[1], w1 / (w0 + w1), max_relative = 1e-14);
        // Free boundary: the edge site has no left neighbor.
        let err = m.gamma0(&cfg, 0).unwrap_err().to_string();
        assert!(err.contains("context exceeds window"), "{err}");
    }

    #[test]
    fn ising_chain_matches_direct_form() {
        let beta = 0.3;
        let m = Markov1Model::ising_chain(beta).unwrap();
        let cfg = Configuration::from_data(
            Window::line(3).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Periodic,
            vec![1, 0, 1],
        )
        .unwrap();
        // Neighbors of site 1 are both 1, spin field +2.
        let g = m.gamma0(&cfg, 1).unwrap();
        let expect1 = (2.0 * beta).exp() / ((2.0 * beta).exp() + (-2.0 * beta).exp());
        assert_relative_eq!(g[1], expect1, max_relative = 1e-13);
        assert_relative_eq!(m.q_min().value, 1.0 / (1.0 + (4.0_f64 * beta).exp()), max_relative = 1e-13);
    }

    #[test]
    fn ising_plane_kernel_and_context() {
        let beta = 0.2;
        let m = Markov1Model::ising_plane(beta).unwrap();
        let w = Window::rect(3, 3).unwrap();
        let mut cfg =
            Configuration::filled(w, Alphabet::new(2).unwrap(), Boundary::Periodic, 1).unwrap();
        cfg.set(1, 0); // north neighbor of the center flips to spin -1
        let center = 4;
        let g = m.gamma0(&cfg, center).unwrap();
        // Field is +1 -1 +1 +1 = 2.
        let expect1 = (2.0 * beta).exp() / ((2.0 * beta).exp() + (-2.0 * beta).exp());
        assert_relative_eq!(g[1], expect1, max_relative = 1e-13);
        let ctx = m.context(&cfg, center).unwrap();
        assert_eq!(ctx.offsets, vec![[-1, 0], [0, -1], [0, 1], [1, 0]]);
        assert_eq!(ctx.radius(), 1);
        assert_relative_eq!(m.q_min().value, 1.0 / (1.0 + (1.6_f64).exp()), max_relative = 1e-13);
        // Dimension mismatch is rejected.
        let line = Configuration::filled(
            Window::line(4).unwrap(),
            Alphabet::new(2).unwrap(),
            Boundary::Periodic,
            1,
        )
        .unwrap();
        assert!(m.gamma0(&line, 0).is_err());
    }
}
