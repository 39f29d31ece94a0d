//! Heat-bath (Gibbs) sampling driven by a model's single-site kernel, plus
//! the exact construction for the renewal field.

use crate::lattice::{Alphabet, Boundary, Configuration, Window};
use crate::models::{exact_sample, RenewalParams, SpecificationModel};
use crate::{Error, Result, Site, Sym};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Visit every site once per sweep in linear-index order.
    Raster,
    /// Draw as many uniformly random sites per sweep as there are sites.
    RandomSite,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Raster
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raster" => Ok(Schedule::Raster),
            "random-site" => Ok(Schedule::RandomSite),
            other => Err(Error::Parse(format!(
                "unknown schedule '{other}' (expected raster or random-site)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplerOptions {
    /// Burn-in sweeps before the configuration is considered a sample.
    pub sweeps: usize,
    #[serde(default)]
    pub schedule: Schedule,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        // Default burn-in: a thousand sweeps.
        Self { sweeps: 1000, schedule: Schedule::Raster }
    }
}

/// Draws a symbol from a probability vector by inverse transform.
pub fn draw_symbol<R: Rng>(probs: &[f64], rng: &mut R) -> Sym {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (a, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return a as Sym;
        }
    }
    (probs.len() - 1) as Sym
}

/// One heat-bath update at `site`: resample it from the single-site kernel
/// given the rest of the configuration.
pub fn heat_bath_update<R: Rng>(
    config: &mut Configuration,
    model: &dyn SpecificationModel,
    site: Site,
    rng: &mut R,
) -> Result<()> {
    let g = model.gamma0(config, site)?;
    let s = draw_symbol(&g, rng);
    config.set(site, s);
    Ok(())
}

/// One sweep of single-site updates under the given schedule.
pub fn heat_bath_sweep<R: Rng>(
    config: &mut Configuration,
    model: &dyn SpecificationModel,
    schedule: Schedule,
    rng: &mut R,
) -> Result<()> {
    let n = config.window().len();
    match schedule {
        Schedule::Raster => {
            for site in 0..n {
                heat_bath_update(config, model, site, rng)?;
            }
        }
        Schedule::RandomSite => {
            for _ in 0..n {
                let site = rng.gen_range(0..n);
                heat_bath_update(config, model, site, rng)?;
            }
        }
    }
    Ok(())
}

/// Samples a field by heat-bath from a uniform random start.
///
/// Models that read neighbors need every site's neighborhood defined, so a
/// free boundary is only accepted for models with dependence radius zero.
pub fn sample_field<R: Rng>(
    model: &dyn SpecificationModel,
    window: Window,
    boundary: Boundary,
    opts: SamplerOptions,
    rng: &mut R,
) -> Result<Configuration> {
    if matches!(boundary, Boundary::Free) && model.dependence_radius() != Some(0) {
        return Err(Error::Unsupported(
            "heat-bath sampling with a free boundary needs a model with dependence radius 0; \
             use a periodic or fixed boundary"
                .into(),
        ));
    }
    let a = model.alphabet();
    let data: Vec<Sym> = (0..window.len()).map(|_| rng.gen_range(0..a.size()) as Sym).collect();
    let mut config = Configuration::from_data(window, a, boundary, data)?;
    for _ in 0..opts.sweeps {
        heat_bath_sweep(&mut config, model, opts.schedule, rng)?;
    }
    Ok(config)
}

/// Exact sample of the stationary renewal field on a free line.
pub fn renewal_exact_field<R: Rng>(
    params: &RenewalParams,
    n: usize,
    rng: &mut R,
) -> Result<Configuration> {
    params.validate()?;
    let data = exact_sample(params, n, rng);
    Configuration::from_data(Window::line(n)?, Alphabet::new(2)?, Boundary::Free, data)
}
