//! `vnrf` command line: simulate fields, estimate per-site context radii,
//! run Monte-Carlo experiments, and query the brute-force oracles.
//!
//! All output is deterministic for a fixed command line: randomness comes
//! only from `--seed` (or the experiment config seed), and no timestamps or
//! machine identifiers are printed.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use vnrf::estimator::{estimate_all, EstimateBatch, EstimateConfig, PenaltyConfig};
use vnrf::harness::{init_threads, run_experiment, ExperimentSpec};
use vnrf::lattice::{decode_key, read_grid_file, write_grid_file, Boundary, Configuration, Window};
use vnrf::models::{
    build_model, compose_specification, load_model, load_model_spec, model_dim, RenewalParams,
    SpecificationModel,
};
use vnrf::oracle::{
    dobrushin_report, exact_measure, exact_pattern_probs, identity_checks, DobrushinOptions,
};
use vnrf::sampler::{renewal_exact_field, sample_field, SamplerOptions, Schedule};
use vnrf::Site;

const USAGE: &str = "\
vnrf - variable-neighborhood random field toolkit

USAGE:
  vnrf <command> [flags]
  vnrf --help

COMMANDS:
  simulate    Sample a field and write a VNRF1 grid file
    --model <file>      model JSON file (required)
    --size <n|n1xn2>    line length, or two extents for a rectangle (required)
    --sweeps <int>      heat-bath burn-in sweeps (default 1000)
    --schedule <s>      raster | random-site (default raster)
    --boundary <b>      periodic | free (default periodic)
    --seed <int>        RNG seed (default 0)
    --out <file>        grid output path (required)
    The renewal model is drawn from its exact free-line law; --sweeps,
    --schedule, and --boundary are ignored for it.

  estimate    Estimate per-site context radii from a grid file
    --in <file>         VNRF1 grid input (required)
    --delta <float>     penalty from the deviation scale delta
    --kappa <float>     penalty from kappa directly
    --auto              penalty from the model's q_min (needs --model)
                        (exactly one of --delta, --kappa, --auto)
    --max-radius <int>  radius-range override
    --margin <int>      security-margin override
    --model <file>      model JSON; fills the l_true column from the model
    --seed <int>        accepted for uniformity; estimation is deterministic
    --out <file>        CSV output path (required)

  experiment  Monte-Carlo radius-recovery study driven by a JSON config
    --config <file>     experiment JSON, schema 1 (required)
    --seed <int>        override the config seed
    --out <file>        report path (default: the config's \"out\", else stdout)

  oracle      Brute-force references; JSON output
    exact-measure  --model <file> --size <n|n1xn2> [--out <file>]
    pattern-probs  --model <file> --size <n|n1xn2> --radius <int> [--out <file>]
    dobrushin      --model <file> [--horizon <int>] [--samples <int>]
                   [--force-sampled] [--seed <int>] [--out <file>]
    identities     [--seed <int>] [--out <file>]

  compose     Joint kernel of a site set, composed from one-site kernels
    --model <file>      model JSON (required)
    --in <file>         VNRF1 grid giving the surrounding configuration (required)
    --sites <list>      comma-separated site indices, e.g. 3,4,5 (required)
    --out <file>        JSON output path (default stdout)

EXIT CODES: 0 success, 1 usage error, 2 runtime error.
";

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<vnrf::Error> for CliError {
    fn from(e: vnrf::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `vnrf --help` for usage");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(args: &[String]) -> CliResult<()> {
    let Some(cmd) = args.first() else {
        return Err(CliError::Usage("missing command".into()));
    };
    if args.iter().any(|a| a == "--help") || cmd == "help" {
        print!("{USAGE}");
        return Ok(());
    }
    init_threads();
    let rest = &args[1..];
    match cmd.as_str() {
        "simulate" => cmd_simulate(rest),
        "estimate" => cmd_estimate(rest),
        "experiment" => cmd_experiment(rest),
        "oracle" => cmd_oracle(rest),
        "compose" => cmd_compose(rest),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

struct Flags {
    values: BTreeMap<&'static str, String>,
    switches: Vec<&'static str>,
}

impl Flags {
    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn has(&self, name: &str) -> bool {
        self.switches.iter().any(|s| *s == name)
    }

    fn required(&self, name: &'static str) -> CliResult<&str> {
        self.get(name).ok_or_else(|| CliError::Usage(format!("missing required flag {name}")))
    }

    fn parsed<T: FromStr>(&self, name: &'static str) -> CliResult<Option<T>> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value '{v}' for {name}"))),
        }
    }

    fn parsed_or<T: FromStr>(&self, name: &'static str, default: T) -> CliResult<T> {
        Ok(self.parsed(name)?.unwrap_or(default))
    }
}

fn parse_flags(
    args: &[String],
    value_flags: &[&'static str],
    switch_flags: &[&'static str],
) -> CliResult<Flags> {
    let mut flags = Flags { values: BTreeMap::new(), switches: Vec::new() };
    let mut i = 0;
    while i < args.len() {
        let arg = args[i].as_str();
        if let Some(&name) = value_flags.iter().find(|f| **f == arg) {
            let value = args
                .get(i + 1)
                .ok_or_else(|| CliError::Usage(format!("flag {name} needs a value")))?;
            if flags.values.insert(name, value.clone()).is_some() {
                return Err(CliError::Usage(format!("duplicate flag {name}")));
            }
            i += 2;
        } else if let Some(&name) = switch_flags.iter().find(|f| **f == arg) {
            if !flags.has(name) {
                flags.switches.push(name);
            }
            i += 1;
        } else {
            return Err(CliError::Usage(format!("unknown argument '{arg}'")));
        }
    }
    Ok(flags)
}

fn parse_window(s: &str) -> CliResult<Window> {
    let extent = |t: &str| {
        t.parse::<usize>().map_err(|_| CliError::Usage(format!("invalid size '{s}'")))
    };
    let window = match s.split_once('x') {
        Some((a, b)) => Window::rect(extent(a)?, extent(b)?),
        None => Window::line(extent(s)?),
    };
    window.map_err(CliError::from)
}

fn parse_boundary(s: &str) -> CliResult<Boundary> {
    match s {
        "periodic" => Ok(Boundary::Periodic),
        "free" => Ok(Boundary::Free),
        other => {
            Err(CliError::Usage(format!("unknown boundary '{other}' (expected periodic or free)")))
        }
    }
}

fn parse_sites(s: &str) -> CliResult<Vec<Site>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Site>()
                .map_err(|_| CliError::Usage(format!("invalid site '{t}' in --sites")))
        })
        .collect()
}

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Free => "free",
        Boundary::Periodic => "periodic",
        Boundary::Fixed(_) => "fixed",
    }
}

/// Writes pretty JSON to `--out` with a one-line summary on stdout, or dumps
/// the JSON itself to stdout when no path was given.
fn emit(out: Option<&str>, value: &serde_json::Value, summary: &str) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Runtime(format!("writing {path}: {e}")))?;
            println!("{summary} -> {path}");
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_simulate(args: &[String]) -> CliResult<()> {
    let f = parse_flags(
        args,
        &["--model", "--size", "--sweeps", "--schedule", "--boundary", "--seed", "--out"],
        &[],
    )?;
    let spec = load_model_spec(f.required("--model")?)?;
    let window = parse_window(f.required("--size")?)?;
    let out = f.required("--out")?;
    let seed: u64 = f.parsed_or("--seed", 0)?;
    let d = model_dim(&spec)?;
    if d != window.d() {
        return Err(CliError::Runtime(format!(
            "model '{}' lives in dimension {d}, but --size describes dimension {}",
            spec.model,
            window.d()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = if spec.model == "renewal" {
        let params: RenewalParams =
            serde_json::from_value(spec.params.clone()).map_err(vnrf::Error::from)?;
        renewal_exact_field(&params, window.len(), &mut rng)?
    } else {
        let model = build_model(&spec)?;
        let boundary = parse_boundary(f.get("--boundary").unwrap_or("periodic"))?;
        let opts = SamplerOptions {
            sweeps: f.parsed_or("--sweeps", SamplerOptions::default().sweeps)?,
            schedule: f.parsed_or("--schedule", Schedule::Raster)?,
        };
        sample_field(model.as_ref(), window, boundary, opts, &mut rng)?
    };
    write_grid_file(&config, out)?;
    println!("simulate: model {} ({} sites) -> {out}", spec.model, config.window().len());
    Ok(())
}

fn cmd_estimate(args: &[String]) -> CliResult<()> {
    let f = parse_flags(
        args,
        &["--in", "--delta", "--kappa", "--max-radius", "--margin", "--model", "--seed", "--out"],
        &["--auto"],
    )?;
    let config = read_grid_file(f.required("--in")?)?;
    let out = f.required("--out")?;
    let model: Option<Box<dyn SpecificationModel>> = match f.get("--model") {
        Some(path) => Some(load_model(path)?),
        None => None,
    };
    if let Some(m) = &model {
        if m.alphabet().size() != config.alphabet().size() {
            return Err(CliError::Runtime(format!(
                "model alphabet has {} symbols, grid has {}",
                m.alphabet().size(),
                config.alphabet().size()
            )));
        }
    }
    let d = config.window().d();
    let asize = config.alphabet().size();
    let delta = f.parsed::<f64>("--delta")?;
    let kappa = f.parsed::<f64>("--kappa")?;
    let auto = f.has("--auto");
    if delta.is_some() as u8 + kappa.is_some() as u8 + auto as u8 != 1 {
        return Err(CliError::Usage("pick exactly one of --delta, --kappa, --auto".into()));
    }
    let hint = model.as_ref().map(|m| m.q_min().value);
    let penalty = if let Some(v) = delta {
        PenaltyConfig::from_delta(d, asize, v, hint)?
    } else if let Some(v) = kappa {
        PenaltyConfig::from_kappa(d, asize, v, hint)?
    } else {
        let q = hint
            .ok_or_else(|| CliError::Usage("--auto needs --model to supply q_min".into()))?;
        PenaltyConfig::auto(d, asize, q)?
    };
    let opts = EstimateConfig {
        penalty,
        margin: f.parsed("--margin")?,
        max_radius: f.parsed("--max-radius")?,
    };
    let batch = estimate_all(&config, &opts)?;
    let csv = render_estimates(&config, model.as_deref(), &batch);
    fs::write(out, csv).map_err(|e| CliError::Runtime(format!("writing {out}: {e}")))?;
    println!(
        "estimate: {} sites, radii up to {}, margin {} -> {out}",
        batch.estimates.len(),
        batch.r_n,
        batch.margin
    );
    Ok(())
}

fn render_estimates(
    config: &Configuration,
    model: Option<&dyn SpecificationModel>,
    batch: &EstimateBatch,
) -> String {
    let mut s = String::from("site,l_true,l_hat,r_n");
    for k in 2..=batch.r_n {
        s.push_str(&format!(",logL_{k},pen_{k}"));
    }
    s.push('\n');
    for est in &batch.estimates {
        // An absent model, or a scan the window cannot resolve, leaves the
        // true-radius cell blank rather than guessing.
        match model.and_then(|m| m.radius(config, est.site).ok()) {
            Some(l_true) => s.push_str(&format!("{},{l_true},{},{}", est.site, est.l_hat, batch.r_n)),
            None => s.push_str(&format!("{},,{},{}", est.site, est.l_hat, batch.r_n)),
        }
        for stat in &est.stats {
            s.push_str(&format!(",{:.12e},{:.12e}", stat.log_likelihood, stat.penalty));
        }
        s.push('\n');
    }
    s
}

fn cmd_experiment(args: &[String]) -> CliResult<()> {
    let f = parse_flags(args, &["--config", "--seed", "--out"], &[])?;
    let mut spec = ExperimentSpec::from_path(f.required("--config")?)?;
    if let Some(seed) = f.parsed::<u64>("--seed")? {
        spec.seed = seed;
    }
    let out = f.get("--out").map(str::to_owned).or_else(|| spec.out.clone());
    let report = run_experiment(&spec)?;
    let value = serde_json::to_value(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(
        out.as_deref(),
        &value,
        &format!("experiment: {} sizes x {} replicates", spec.sizes.len(), spec.replicates),
    )
}

fn cmd_oracle(args: &[String]) -> CliResult<()> {
    let Some(sub) = args.first() else {
        return Err(CliError::Usage(
            "oracle needs a subcommand: exact-measure, pattern-probs, dobrushin, identities".into(),
        ));
    };
    let rest = &args[1..];
    match sub.as_str() {
        "exact-measure" => oracle_exact_measure(rest),
        "pattern-probs" => oracle_pattern_probs(rest),
        "dobrushin" => oracle_dobrushin(rest),
        "identities" => oracle_identities(rest),
        other => Err(CliError::Usage(format!("unknown oracle subcommand '{other}'"))),
    }
}

fn oracle_exact_measure(args: &[String]) -> CliResult<()> {
    let f = parse_flags(args, &["--model", "--size", "--out"], &[])?;
    let spec = load_model_spec(f.required("--model")?)?;
    let window = parse_window(f.required("--size")?)?;
    let measure = exact_measure(&spec, &window)?;
    let value = json!({
        "model": spec.model,
        "d": measure.window().d(),
        "extents": measure.window().extents(),
        "boundary": boundary_name(measure.boundary()),
        "states": measure.len(),
        "probs": measure.probs(),
    });
    emit(f.get("--out"), &value, &format!("oracle exact-measure: {} states", measure.len()))
}

fn oracle_pattern_probs(args: &[String]) -> CliResult<()> {
    let f = parse_flags(args, &["--model", "--size", "--radius", "--out"], &[])?;
    let spec = load_model_spec(f.required("--model")?)?;
    let window = parse_window(f.required("--size")?)?;
    let radius: usize = f
        .parsed("--radius")?
        .ok_or_else(|| CliError::Usage("missing required flag --radius".into()))?;
    let measure = exact_measure(&spec, &window)?;
    let probs = exact_pattern_probs(&measure, radius)?;
    let alphabet = measure.alphabet();
    let entries: Vec<serde_json::Value> = probs
        .entries
        .iter()
        .map(|(key, entry)| {
            json!({
                "pattern": decode_key(key, probs.d, probs.radius, &alphabet).values(),
                "prob": entry.prob,
                "joint": entry.joint,
                "conditional": entry.conditional,
            })
        })
        .collect();
    let count = entries.len();
    let value = json!({
        "model": spec.model,
        "d": probs.d,
        "radius": probs.radius,
        "center": probs.center,
        "alphabet_size": probs.alphabet_size,
        "entries": entries,
    });
    emit(f.get("--out"), &value, &format!("oracle pattern-probs: {count} patterns"))
}

fn oracle_dobrushin(args: &[String]) -> CliResult<()> {
    let f = parse_flags(
        args,
        &["--model", "--horizon", "--samples", "--seed", "--out"],
        &["--force-sampled"],
    )?;
    let spec = load_model_spec(f.required("--model")?)?;
    let defaults = DobrushinOptions::default();
    let opts = DobrushinOptions {
        horizon: f.parsed("--horizon")?,
        samples: f.parsed_or("--samples", defaults.samples)?,
        seed: f.parsed_or("--seed", defaults.seed)?,
        force_sampled: f.has("--force-sampled"),
    };
    let report = dobrushin_report(&spec, &opts)?;
    let value = serde_json::to_value(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(f.get("--out"), &value, &format!("oracle dobrushin: r_total {:.6}", report.r_total))
}

fn oracle_identities(args: &[String]) -> CliResult<()> {
    let f = parse_flags(args, &["--seed", "--out"], &[])?;
    let seed: u64 = f.parsed_or("--seed", 0)?;
    let checks = identity_checks(seed)?;
    let failing: usize = checks.iter().map(|c| c.failures).sum();
    let value = serde_json::to_value(&checks).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(
        f.get("--out"),
        &value,
        &format!("oracle identities: {} checks, {failing} failing trials", checks.len()),
    )
}

fn cmd_compose(args: &[String]) -> CliResult<()> {
    let f = parse_flags(args, &["--model", "--in", "--sites", "--out"], &[])?;
    let model = load_model(f.required("--model")?)?;
    let config = read_grid_file(f.required("--in")?)?;
    let sites = parse_sites(f.required("--sites")?)?;
    let kernel = compose_specification(model.as_ref(), &config, &sites)?;
    let value = json!({
        "sites": kernel.sites,
        "probs": kernel.probs,
        "support": kernel.support,
    });
    emit(
        f.get("--out"),
        &value,
        &format!("compose: {} sites, {} outcomes", kernel.sites.len(), kernel.probs.len()),
    )
}
