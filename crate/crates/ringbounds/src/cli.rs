//! Command-line surface: one subcommand per verified bound, flat
//! key = value configuration files with per-subcommand sections, JSON
//! reports and CSV plot data.
//!
//! Exit codes: 0 verdict pass / computation success, 1 usage or
//! configuration error, 2 hypothesis violated or verification failed,
//! 3 numerical non-convergence.

use crate::bounds::{self, GrowthHypothesis, Psi};
use crate::error::{Error, Result};
use crate::expr::RadialExpr;
use crate::geometry::{Params, Regime, SphericalCondenser, SphericalRing};
use crate::maps::RadialMap;
use crate::modcap;
use crate::report::{Report, Table, Verdict};
use crate::weights::{self, WeightField};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Default RNG seed; overridden by RINGBOUNDS_SEED, then by --seed.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(
    name = "ringbounds",
    version,
    about = "Moduli, capacities and distortion bounds for weighted ring mappings",
    after_help = "Weight specs: constant:K | power:SCALE,EXP | log | oracle:A | expr:EXPRESSION\n\
                  Config file: flat key = value lines under [subcommand] sections; flags override."
)]
struct Cli {
    /// Configuration file merged under each subcommand's section
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (flag beats RINGBOUNDS_SEED beats 42)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report to this path (stdout otherwise)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the tables as CSV plot data
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact ring modulus and its brute-force discrete oracle
    Modulus(ModulusArgs),
    /// Capacity bound sandwich on a spherical condenser (unit weight)
    Capacity(CapacityArgs),
    /// Spherical/ball means of a weight and the ball-mean table
    Qmean(QmeanArgs),
    /// The weighted radial integral I and the capacity upper bound
    IntegralI(IntegralIArgs),
    /// Extremal-density verification on a ring
    Extremal(ExtremalArgs),
    /// Image-measure bound against the true stretch image measure
    MeasureBound(MeasureBoundArgs),
    /// Schwarz-type liminf ratio scan for the stretch family
    Schwarz(SchwarzArgs),
    /// Ball-mean growth pipeline: Q0 table, explicit constant, bound
    Theorem1(Theorem1Args),
    /// Log-Hoelder envelope fit for the stretch family
    Hoelder(HoelderArgs),
    /// Finite-mean-oscillation table and verdict
    Fmo(FmoArgs),
    /// Ring-mapping definition check for a stretch map and weight
    VerifyDefinition(VerifyDefinitionArgs),
    /// Bundled sharpness scans (critical exponent stretch family)
    Sharpness(SharpnessArgs),
}

impl Command {
    fn section(&self) -> &'static str {
        match self {
            Command::Modulus(_) => "modulus",
            Command::Capacity(_) => "capacity",
            Command::Qmean(_) => "qmean",
            Command::IntegralI(_) => "integral-i",
            Command::Extremal(_) => "extremal",
            Command::MeasureBound(_) => "measure-bound",
            Command::Schwarz(_) => "schwarz",
            Command::Theorem1(_) => "theorem1",
            Command::Hoelder(_) => "hoelder",
            Command::Fmo(_) => "fmo",
            Command::VerifyDefinition(_) => "verify-definition",
            Command::Sharpness(_) => "sharpness",
        }
    }
}

#[derive(Args, Debug, Default)]
struct ModulusArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    /// Discrete oracle grid size; 0 skips the oracle
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct CapacityArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    /// Constant of the diameter lower bound
    #[arg(long)]
    c1: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct QmeanArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    weight: Option<String>,
    /// Single radius for a spherical mean
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct IntegralIArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ExtremalArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct MeasureBoundArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Stretch exponent of the test map
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Growth constant; the minimal feasible one is fitted when absent
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_name = "R")]
    r_max: Option<f64>,
    #[arg(long, value_name = "R")]
    r_min: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SchwarzArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_name = "R")]
    r_max: Option<f64>,
    #[arg(long, value_name = "R")]
    r_min: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct Theorem1Args {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Constant weight level (identity-map scenario)
    #[arg(long)]
    k: Option<f64>,
    /// Stretch exponent (oracle-weight scenario); excludes --k
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct HoelderArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Stretch exponent; 1 is the identity
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Number of decades below eps0/10 to probe
    #[arg(long)]
    decades: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct FmoArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    /// Also scan the canonical-kernel growth ratio
    #[arg(long)]
    psi_check: bool,
}

#[derive(Args, Debug, Default)]
struct VerifyDefinitionArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Scale factor applied to the oracle weight
    #[arg(long)]
    scale: Option<f64>,
    /// Weight spec overriding the scaled oracle
    #[arg(long)]
    weight: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SharpnessArgs {
    /// Scenario; only "stretch" is defined
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_name = "R")]
    r_max: Option<f64>,
    #[arg(long, value_name = "R")]
    r_min: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

/// Known configuration keys per section; anything else is rejected.
fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "modulus" => &["n", "p", "r1", "r2", "grid"],
        "capacity" => &["n", "p", "r1", "r2", "c1"],
        "qmean" => &["n", "weight", "r", "eps0", "levels", "factor", "budget"],
        "integral-i" => &["n", "p", "r1", "r2", "weight", "budget"],
        "extremal" => &["n", "p", "r1", "r2", "weight", "grid", "trials"],
        "measure-bound" => &["n", "p", "a", "alpha", "c", "r-max", "r-min", "points"],
        "schwarz" => &["n", "p", "a", "alpha", "c", "r-max", "r-min", "points"],
        "theorem1" => &["n", "p", "k", "a", "eps0", "levels"],
        "hoelder" => &["n", "p", "a", "eps0", "points", "decades"],
        "fmo" => &["n", "weight", "eps0", "levels", "factor", "budget", "psi-check"],
        "verify-definition" => &["n", "p", "a", "r1", "r2", "trials", "grid", "scale", "weight"],
        "sharpness" => &["case", "a", "n", "r-max", "r-min", "points"],
        _ => &[],
    }
}

const SECTIONS: [&str; 12] = [
    "modulus",
    "capacity",
    "qmean",
    "integral-i",
    "extremal",
    "measure-bound",
    "schwarz",
    "theorem1",
    "hoelder",
    "fmo",
    "verify-definition",
    "sharpness",
];

/// Parsed configuration file: section -> key -> (value, line number).
#[derive(Debug, Default)]
struct FileConfig {
    path: String,
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl FileConfig {
    fn parse(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            location: path.display().to_string(),
            message: format!("cannot read config file: {e}"),
        })?;
        let mut config = FileConfig {
            path: path.display().to_string(),
            sections: BTreeMap::new(),
        };
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Config {
                        location: format!("{} line {line_no}", config.path),
                        message: format!("unknown section '[{name}]'"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    location: format!("{} line {line_no}", config.path),
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let Some(current) = &section else {
                return Err(Error::Config {
                    location: format!("{} line {line_no}", config.path),
                    message: format!("key '{key}' appears before any [section] header"),
                });
            };
            if !known_keys(current).contains(&key.as_str()) {
                return Err(Error::Config {
                    location: format!("{} line {line_no}", config.path),
                    message: format!("unknown key '{key}' in section '[{current}]'"),
                });
            }
            config
                .sections
                .entry(current.clone())
                .or_default()
                .insert(key, (value, line_no));
        }
        Ok(config)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }
}

/// Merges a flag value with the config-file section, with field-precise
/// parse errors.
struct Resolver<'a> {
    file: Option<&'a FileConfig>,
    section: &'a str,
}

impl<'a> Resolver<'a> {
    fn lookup<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        let Some(file) = self.file else {
            return Ok(None);
        };
        match file.raw(self.section, key) {
            None => Ok(None),
            Some((text, line)) => text.parse::<T>().map(Some).map_err(|_| Error::Config {
                location: format!("{} line {line}", file.path),
                message: format!("invalid value '{text}' for key '{key}'"),
            }),
        }
    }

    fn require<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: Option<T>,
    ) -> Result<T> {
        if let Some(v) = self.lookup(flag, key)? {
            return Ok(v);
        }
        default.ok_or_else(|| Error::Config {
            location: format!("--{key}"),
            message: format!("missing required parameter '{key}'"),
        })
    }
}

/// Builds a weight from its spec string:
/// constant:K | power:SCALE,EXP | log | oracle:A | expr:EXPRESSION.
pub fn parse_weight(spec: &str, params: Option<Params>) -> Result<WeightField> {
    let bad = |message: String| Error::Config {
        location: format!("weight spec '{spec}'"),
        message,
    };
    if spec == "log" {
        return Ok(WeightField::radial_log());
    }
    let Some((kind, rest)) = spec.split_once(':') else {
        return Err(bad("expected kind:parameters or 'log'".into()));
    };
    match kind {
        "constant" => {
            let k: f64 = rest
                .parse()
                .map_err(|_| bad(format!("invalid constant '{rest}'")))?;
            if !(k >= 0.0) {
                return Err(bad("weights must be nonnegative".into()));
            }
            Ok(WeightField::constant(k))
        }
        "power" => {
            let (scale, exponent) = rest
                .split_once(',')
                .ok_or_else(|| bad("power needs SCALE,EXP".into()))?;
            let scale: f64 = scale
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid scale '{scale}'")))?;
            let exponent: f64 = exponent
                .trim()
                .parse()
                .map_err(|_| bad(format!("invalid exponent '{exponent}'")))?;
            if !(scale >= 0.0) {
                return Err(bad("weights must be nonnegative".into()));
            }
            Ok(WeightField::radial_power(scale, exponent))
        }
        "oracle" => {
            let a: f64 = rest
                .parse()
                .map_err(|_| bad(format!("invalid stretch exponent '{rest}'")))?;
            let params = params
                .ok_or_else(|| bad("oracle weight needs n and p in scope".into()))?;
            RadialMap::new(a, params.n())?.oracle_weight(params)
        }
        "expr" => Ok(WeightField::from_expression(RadialExpr::parse(rest)?)),
        other => Err(bad(format!("unknown weight kind '{other}'"))),
    }
}

fn geometric_scan(r_max: f64, r_min: f64, points: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && points >= 2) {
        return Err(Error::Domain(format!(
            "scan needs 0 < r-min < r-max and at least 2 points, got [{r_min}, {r_max}] x {points}"
        )));
    }
    let ratio = (r_min / r_max).powf(1.0 / (points - 1) as f64);
    Ok((0..points).map(|k| r_max * ratio.powi(k as i32)).collect())
}

fn params_from(n: usize, p: f64) -> Result<Params> {
    Params::new(n, p)
}

// ---------------------------------------------------------------------
// subcommand handlers
// ---------------------------------------------------------------------

fn run_modulus(args: &ModulusArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let r1 = resolver.require(args.r1, "r1", None)?;
    let r2 = resolver.require(args.r2, "r2", None)?;
    let grid = resolver.require(args.grid, "grid", Some(1024usize))?;
    let params = params_from(n, p)?;

    let mut report = Report::new("modulus", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("r1", r1);
    report.config_num("r2", r2);
    report.config_num("grid", grid as f64);
    report.set_dim_constants(params.omega(), params.ball_volume());

    let exact = modcap::ring_modulus_exact(params, r1, r2)?;
    report.value("exact", exact, "eq:1.4.1");
    if grid > 0 {
        let discrete = modcap::discrete_ring_modulus(params, r1, r2, grid)?;
        let rel = (discrete.value - exact) / exact;
        report.value("discrete", discrete.value, "eq:2**");
        report.value("rel_diff", rel, "eq:2**");
        if !discrete.converged {
            report.diagnostic("discrete oracle did not converge");
        }
        report.verdict = if rel.abs() <= 0.02 && discrete.converged {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
    Ok(report)
}

fn run_capacity(args: &CapacityArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let r1 = resolver.require(args.r1, "r1", None)?;
    let r2 = resolver.require(args.r2, "r2", None)?;
    let c1 = resolver.require(args.c1, "c1", Some(1.0))?;
    let params = params_from(n, p)?;
    let condenser = SphericalCondenser::new(vec![0.0; n], r1, r2)?;

    let mut report = Report::new("capacity", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("r1", r1);
    report.config_num("r2", r2);
    report.config_num("c1", c1);
    report.set_dim_constants(params.omega(), params.ball_volume());

    let sandwich = modcap::capacity_sandwich(params, &condenser, c1)?;
    for (name, value) in &sandwich.lower_bounds {
        let tag = match name.as_str() {
            "isoperimetric" => "eq:2.8",
            "measure" => "eq:maz",
            _ => "eq:16",
        };
        report.value(&format!("lower_{name}"), *value, tag);
    }
    report.value("exact", sandwich.exact_or_oracle.unwrap_or(f64::NAN), "eq:1.4.1");
    report.value("upper_lemma1", sandwich.upper_bound, "eq:2A");
    report.verdict = if sandwich.consistent {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

fn run_qmean(args: &QmeanArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let weight_spec = resolver.require(args.weight.clone(), "weight", None)?;
    let r = resolver.lookup(args.r, "r")?;
    let eps0 = resolver.require(args.eps0, "eps0", Some(0.5))?;
    let levels = resolver.require(args.levels, "levels", Some(21usize))?;
    let factor = resolver.require(args.factor, "factor", Some(0.5))?;
    let budget = resolver.require(args.budget, "budget", Some(weights::DEFAULT_BUDGET))?;
    if !(2..=crate::geometry::MAX_DIM).contains(&n) {
        return Err(Error::InvalidDimension {
            n: n as i64,
            reason: "n must lie in [2, 16]",
        });
    }
    let q = parse_weight(&weight_spec, None)?;
    let x0 = vec![0.0; n];

    let mut report = Report::new("qmean", seed);
    report.config_num("n", n as f64);
    report.config_str("weight", &weight_spec);
    report.config_num("eps0", eps0);
    report.config_num("levels", levels as f64);
    report.config_num("factor", factor);
    report.config_num("budget", budget as f64);

    if let Some(r) = r {
        report.config_num("r", r);
        let mean = weights::spherical_mean(&q, &x0, r, budget, seed)?;
        report.value("spherical_mean", mean.value, "def:q_x0");
        report.value("spherical_mean_std_error", mean.std_error, "def:q_x0");
    }
    let grid = weights::geometric_grid(eps0, factor, levels);
    let q0 = weights::q0_estimate(&q, &x0, &grid, budget, seed)?;
    let mut table = Table::new("ball_means", "def:Q0");
    for &(eps, mean) in &q0.table {
        table.push(eps, mean, mean);
    }
    report.tables.push(table);
    report.value("q0_proxy", q0.liminf_proxy, "def:Q0");
    if q0.diverging {
        report.diagnostic("ball means increase without bound over the probe range");
    }
    report.verdict = Verdict::Ok;
    Ok(report)
}

fn run_integral_i(args: &IntegralIArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let r1 = resolver.require(args.r1, "r1", None)?;
    let r2 = resolver.require(args.r2, "r2", None)?;
    let weight_spec = resolver.require(
        args.weight.clone(),
        "weight",
        Some("constant:1".to_string()),
    )?;
    let budget = resolver.require(args.budget, "budget", Some(weights::DEFAULT_BUDGET))?;
    let params = params_from(n, p)?;
    let q = parse_weight(&weight_spec, Some(params))?;

    let mut report = Report::new("integral-i", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("r1", r1);
    report.config_num("r2", r2);
    report.config_str("weight", &weight_spec);
    report.set_dim_constants(params.omega(), params.ball_volume());

    let i = bounds::integral_i_with(params, &q, &vec![0.0; n], r1, r2, budget, seed)?;
    report.value("i_value", i.value, "eq:9");
    if let Some(d) = &i.diagnostic {
        report.diagnostic(d.clone());
    }
    if !i.converged {
        report.diagnostic("radial integral did not converge");
    }
    let upper = modcap::cap_upper_bound(params, &q, &vec![0.0; n], r1, r2)?;
    report.value("cap_upper", upper.value, "eq:2A");
    report.verdict = Verdict::Ok;
    Ok(report)
}

fn run_extremal(args: &ExtremalArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let r1 = resolver.require(args.r1, "r1", None)?;
    let r2 = resolver.require(args.r2, "r2", None)?;
    let weight_spec = resolver.require(
        args.weight.clone(),
        "weight",
        Some("constant:1".to_string()),
    )?;
    let grid = resolver.require(args.grid, "grid", Some(1024usize))?;
    let trials = resolver.require(args.trials, "trials", Some(100usize))?;
    let params = params_from(n, p)?;
    let q = parse_weight(&weight_spec, Some(params))?;

    let mut report = Report::new("extremal", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("r1", r1);
    report.config_num("r2", r2);
    report.config_str("weight", &weight_spec);
    report.config_num("grid", grid as f64);
    report.config_num("trials", trials as f64);
    report.set_dim_constants(params.omega(), params.ball_volume());

    let outcome =
        modcap::verify_extremality(params, &q, &vec![0.0; n], r1, r2, trials, seed, grid)?;
    report.value("closed_form", outcome.closed_form, "eq:2A");
    report.value("f_eta0", outcome.f_eta0, "eq:10");
    report.value("pg_minimum", outcome.pg_minimum, "eq:10");
    report.value("min_random", outcome.min_random, "eq:10");
    report.value("worst_violation", outcome.worst_violation, "eq:10");
    if !outcome.pg_converged {
        report.diagnostic("projected gradient did not converge");
    }
    let pg_close = (outcome.pg_minimum - outcome.closed_form).abs()
        <= 0.01 * outcome.closed_form;
    report.verdict = if outcome.attained_by_eta0 && pg_close && outcome.worst_violation < 1e-6 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Shared scaffolding for the stretch-scenario bound scans: builds the
/// map, its oracle weight, and the fitted growth constant when none is
/// supplied.
struct StretchScan {
    params: Params,
    map: RadialMap,
    constant: f64,
    fitted: bool,
}

#[allow(clippy::too_many_arguments)]
fn stretch_scan(
    n: usize,
    p: f64,
    a: f64,
    alpha: f64,
    c: Option<f64>,
    grid: &[f64],
    budget: usize,
    seed: u64,
) -> Result<StretchScan> {
    let params = params_from(n, p)?;
    let map = RadialMap::new(a, n)?;
    let q = map.oracle_weight(params)?;
    let constant = match c {
        Some(c) => c,
        None => {
            let hyp = GrowthHypothesis::primitive_power(params, Psi::reciprocal(), alpha, 1.0)?;
            let check = bounds::check_growth_condition(params, &q, &hyp, grid, budget, seed)?;
            check.min_feasible_c
        }
    };
    Ok(StretchScan {
        params,
        map,
        constant,
        fitted: c.is_none(),
    })
}

fn run_measure_bound(args: &MeasureBoundArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let a = resolver.require(args.a, "a", Some(1.0))?;
    let alpha = resolver.require(args.alpha, "alpha", Some(1.0))?;
    let c = resolver.lookup(args.c, "c")?;
    let r_max = resolver.require(args.r_max, "r-max", Some(1e-1))?;
    let r_min = resolver.require(args.r_min, "r-min", Some(1e-5))?;
    let points = resolver.require(args.points, "points", Some(12usize))?;
    let grid = geometric_scan(r_max, r_min, points)?;
    let scan = stretch_scan(n, p, a, alpha, c, &grid, weights::DEFAULT_BUDGET, seed)?;
    let params = scan.params;

    let mut report = Report::new("measure-bound", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("a", a);
    report.config_num("alpha", alpha);
    report.config_num("c", scan.constant);
    report.config_num("r-max", r_max);
    report.config_num("r-min", r_min);
    report.config_num("points", points as f64);
    report.set_dim_constants(params.omega(), params.ball_volume());
    if scan.fitted {
        report.diagnostic("growth constant fitted as the minimal feasible one on the grid");
    }

    let tag = match params.regime() {
        Regime::AtDim => "eq:eqks**",
        _ => "eq:eqks*",
    };
    match params.regime() {
        Regime::AtDim => {
            report.constants.gamma =
                Some(bounds::gamma_constant(params, scan.constant)?.into());
        }
        _ => {
            report.constants.beta =
                Some(bounds::beta_constant(params, scan.constant)?.into());
        }
    }

    let mut table = Table::new("image_measure", tag);
    let mut pass = true;
    for &r in &grid {
        let j = (1.0 / r).ln();
        let bound = bounds::measure_bound(params, alpha, scan.constant, j)?;
        let measured = scan.map.image_ball_measure(r)?;
        if measured > bound * (1.0 + 1e-9) {
            pass = false;
        }
        table.push(r, bound, measured);
    }
    report.tables.push(table);
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

fn run_schwarz(args: &SchwarzArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let a = resolver.require(args.a, "a", Some(1.0))?;
    let alpha = resolver.require(args.alpha, "alpha", Some(1.0))?;
    let c = resolver.lookup(args.c, "c")?;
    let r_max = resolver.require(args.r_max, "r-max", Some(1e-1))?;
    let r_min = resolver.require(args.r_min, "r-min", Some(1e-5))?;
    let points = resolver.require(args.points, "points", Some(12usize))?;
    let grid = geometric_scan(r_max, r_min, points)?;
    let scan = stretch_scan(n, p, a, alpha, c, &grid, weights::DEFAULT_BUDGET, seed)?;
    let params = scan.params;

    let mut report = Report::new("schwarz", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("a", a);
    report.config_num("alpha", alpha);
    report.config_num("c", scan.constant);
    report.config_num("r-max", r_max);
    report.config_num("r-min", r_min);
    report.config_num("points", points as f64);
    report.set_dim_constants(params.omega(), params.ball_volume());
    if scan.fitted {
        report.diagnostic("growth constant fitted as the minimal feasible one on the grid");
    }

    let map = scan.map;
    let outcome = bounds::schwarz_ratio_scan(
        |r| map.min_modulus(r).unwrap_or(f64::NAN),
        params,
        alpha,
        scan.constant,
        &Psi::reciprocal(),
        &grid,
    )?;
    let tag = match params.regime() {
        Regime::AtDim => "eq:eqks1.22A",
        _ => "eq:eqks1.21AA",
    };
    let mut table = Table::new("schwarz_ratio", tag);
    for row in &outcome.rows {
        table.push(row.r, row.bound, row.measured);
    }
    report.tables.push(table);
    if let Some(beta) = outcome.constants.beta {
        report.constants.beta = Some(beta.into());
    }
    if let Some(gamma) = outcome.constants.gamma {
        report.constants.gamma = Some(gamma.into());
    }
    if let Some(gamma0) = outcome.constants.gamma0 {
        report.constants.gamma0 = Some(gamma0.into());
        report.value("gamma0", gamma0, "eq:eqks1.22A");
    }
    for note in &outcome.notes {
        report.diagnostic(note.clone());
    }
    report.verdict = if outcome.pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

fn run_theorem1(args: &Theorem1Args, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let k = resolver.lookup(args.k, "k")?;
    let a = resolver.lookup(args.a, "a")?;
    let eps0 = resolver.require(args.eps0, "eps0", Some(0.25))?;
    let levels = resolver.require(args.levels, "levels", Some(21usize))?;
    let params = params_from(n, p)?;

    let (label, map, q) = match (k, a) {
        (Some(_), Some(_)) => {
            return Err(Error::Config {
                location: "--k/--a".into(),
                message: "choose either a constant weight (k) or a stretch oracle (a)".into(),
            })
        }
        (Some(k), None) => (
            format!("constant:{k}"),
            RadialMap::identity(n)?,
            WeightField::constant(k),
        ),
        (None, Some(a)) => {
            let map = RadialMap::new(a, n)?;
            let q = map.oracle_weight(params)?;
            (format!("oracle:{a}"), map, q)
        }
        (None, None) => (
            "constant:1".to_string(),
            RadialMap::identity(n)?,
            WeightField::constant(1.0),
        ),
    };

    let mut report = Report::new("theorem1", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_str("weight", &label);
    report.config_num("eps0", eps0);
    report.config_num("levels", levels as f64);
    report.set_dim_constants(params.omega(), params.ball_volume());

    let grid = weights::geometric_grid(eps0, 0.5, levels);
    let q0 = weights::q0_estimate(&q, &vec![0.0; n], &grid, weights::DEFAULT_BUDGET, seed)?;
    let mut table = Table::new("ball_means", "def:Q0");
    for &(eps, mean) in &q0.table {
        table.push(eps, mean, mean);
    }
    report.tables.push(table);
    report.value("q0_proxy", q0.liminf_proxy, "def:Q0");

    let c0 = bounds::growth_c0(params)?;
    report.constants.c0 = Some(c0.into());
    let bound = bounds::theorem_growth_bound(params, q0.liminf_proxy)?;
    report.value("bound", bound, "eq:eqks1.21");

    let mut ratio_table = Table::new("radial_ratio", "eq:eqks1.21");
    let mut min_ratio = f64::INFINITY;
    for &eps in &grid {
        let ratio = map.min_modulus(eps)? / eps;
        min_ratio = min_ratio.min(ratio);
        ratio_table.push(eps, bound, ratio);
    }
    report.tables.push(ratio_table);
    report.value("min_ratio", min_ratio, "eq:eqks1.200");

    // liminf conclusion on a finite grid: either the bound already
    // dominates the smallest probed ratio, or both the ball means and
    // the ratios are falling toward zero together
    let q0_values: Vec<f64> = q0.table.iter().map(|&(_, v)| v).collect();
    let first = q0_values[0];
    let last = q0_values[q0_values.len() - 1];
    let trend = last <= first / 4.0
        && min_ratio < map.min_modulus(grid[0])? / grid[0];
    let pass = min_ratio <= bound * (1.0 + 1e-9) || trend;
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

fn run_hoelder(args: &HoelderArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let a = resolver.require(args.a, "a", Some(1.0))?;
    let eps0 = resolver.require(args.eps0, "eps0", Some(0.25))?;
    let points = resolver.require(args.points, "points", Some(13usize))?;
    let decades = resolver.require(args.decades, "decades", Some(3.0))?;
    let params = params_from(n, p)?;
    let map = RadialMap::new(a, n)?;
    let q = map.oracle_weight(params)?;

    let mut report = Report::new("hoelder", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("a", a);
    report.config_num("eps0", eps0);
    report.config_num("points", points as f64);
    report.config_num("decades", decades);
    report.set_dim_constants(params.omega(), params.ball_volume());

    // probes span `decades` decades below eps0/10; the weighted radial
    // integral grows without bound there, giving the envelope its scale
    let top = eps0 / 10.0;
    let mut probes = Vec::with_capacity(points);
    for k in 0..points {
        let eps = top * 10f64.powf(-decades * k as f64 / (points - 1) as f64);
        let i = bounds::integral_i_with(
            params,
            &q,
            &vec![0.0; n],
            eps,
            eps0,
            weights::DEFAULT_BUDGET,
            seed,
        )?;
        let delta = map.min_modulus(eps)?;
        probes.push((eps, i.value, delta));
    }
    let envelope = bounds::holder_envelope(params, &probes, 1.0)?;
    let mut table = Table::new("envelope", "eq:3.7A");
    for row in &envelope.rows {
        table.push(row.eps, row.n_local, row.delta_f);
    }
    report.tables.push(table);
    report.value("exponent", envelope.exponent, "eq:20A");
    report.value(
        "fmo_exponent",
        bounds::fmo_envelope_exponent(params),
        "eq:19",
    );
    report.value("n_fitted", envelope.n_fitted, "eq:3.7A");
    report.value("n_first_decade", envelope.n_first_decade, "eq:3.7A");
    report.verdict = if envelope.stable {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

fn run_fmo(args: &FmoArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let weight_spec = resolver.require(args.weight.clone(), "weight", None)?;
    let eps0 = resolver.require(args.eps0, "eps0", Some(0.1))?;
    let levels = resolver.require(args.levels, "levels", Some(6usize))?;
    let factor = resolver.require(args.factor, "factor", Some(0.1))?;
    let budget = resolver.require(args.budget, "budget", Some(weights::DEFAULT_BUDGET))?;
    let psi_check = args.psi_check
        || resolver
            .lookup(None::<bool>, "psi-check")?
            .unwrap_or(false);
    if !(2..=crate::geometry::MAX_DIM).contains(&n) {
        return Err(Error::InvalidDimension {
            n: n as i64,
            reason: "n must lie in [2, 16]",
        });
    }
    let q = parse_weight(&weight_spec, None)?;
    let x0 = vec![0.0; n];

    let mut report = Report::new("fmo", seed);
    report.config_num("n", n as f64);
    report.config_str("weight", &weight_spec);
    report.config_num("eps0", eps0);
    report.config_num("levels", levels as f64);
    report.config_num("factor", factor);
    report.config_num("budget", budget as f64);
    report.config_str("psi-check", if psi_check { "true" } else { "false" });

    let grid = weights::geometric_grid(eps0, factor, levels);
    let fmo = weights::fmo_verdict(&q, &x0, &grid, budget, seed)?;
    let mut table = Table::new("oscillation", "def:FMO");
    for &(eps, osc) in &fmo.table {
        table.push(eps, osc, osc);
    }
    report.tables.push(table);
    report.value("limsup_proxy", fmo.limsup_proxy, "def:FMO");
    report.verdict = Verdict::Label(fmo.verdict.to_string());

    if psi_check {
        // growth of the canonical-kernel mass against log log(1/eps);
        // the kernel's p-th power is (t log(1/t))^{-n} for every p, so
        // any exponent in (n-1, n) probes the same left side
        let pr = params_from(n, n as f64 - 0.2)?;
        let kernel = bounds::fmo_psi(pr, (0.3f64).min(eps0.max(0.05)))?;
        let hyp = GrowthHypothesis::integral_power(
            pr,
            kernel.psi.clone(),
            1.0,
            1.0,
            kernel.eps0,
            kernel.eps0 * 0.99,
        )?;
        let scan_grid: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|&e| e < kernel.eps0 * 0.99)
            .collect();
        if scan_grid.len() >= 2 {
            let check =
                bounds::check_growth_condition(pr, &q, &hyp, &scan_grid, budget, seed)?;
            let mut psi_table = Table::new("psi_growth", "eq:3.7A");
            let mut ratios = Vec::new();
            for row in &check.rows {
                let loglog = (1.0 / row.r).ln().ln();
                psi_table.push(row.r, loglog, row.lhs);
                ratios.push(row.lhs / loglog);
            }
            report.tables.push(psi_table);
            let max_ratio = ratios.iter().fold(0.0f64, |m, &v| m.max(v));
            report.value("psi_growth_max_ratio", max_ratio, "eq:3.7A");
        }
    }
    Ok(report)
}

fn run_verify_definition(
    args: &VerifyDefinitionArgs,
    resolver: &Resolver,
    seed: u64,
) -> Result<Report> {
    let n = resolver.require(args.n, "n", None)?;
    let p = resolver.require(args.p, "p", None)?;
    let a = resolver.require(args.a, "a", Some(1.0))?;
    let r1 = resolver.require(args.r1, "r1", Some(0.5))?;
    let r2 = resolver.require(args.r2, "r2", Some(1.0))?;
    let trials = resolver.require(args.trials, "trials", Some(50usize))?;
    let grid = resolver.require(args.grid, "grid", Some(512usize))?;
    let scale = resolver.require(args.scale, "scale", Some(1.0))?;
    let weight_spec = resolver.lookup(args.weight.clone(), "weight")?;
    let params = params_from(n, p)?;
    let map = RadialMap::new(a, n)?;
    let q = match &weight_spec {
        Some(spec) => parse_weight(spec, Some(params))?,
        None => {
            let oracle = map.oracle_weight(params)?;
            if scale == 1.0 {
                oracle
            } else {
                WeightField::from_profile(format!("scaled-oracle({scale})"), move |r| {
                    scale * oracle.profile(r).unwrap()
                })
            }
        }
    };

    let mut report = Report::new("verify-definition", seed);
    report.config_num("n", n as f64);
    report.config_num("p", p);
    report.config_num("a", a);
    report.config_num("r1", r1);
    report.config_num("r2", r2);
    report.config_num("trials", trials as f64);
    report.config_num("grid", grid as f64);
    report.config_num("scale", scale);
    report.config_str(
        "weight",
        weight_spec.as_deref().unwrap_or("oracle (derived)"),
    );
    report.set_dim_constants(params.omega(), params.ball_volume());

    let ring = SphericalRing::centered_at_origin(n, r1, r2)?;
    let outcome =
        crate::maps::verify_ring_definition(&map, &q, params, &ring, trials, seed, grid)?;
    report.value("image_modulus", outcome.image_modulus, "eq:3*!");
    report.value("rhs_extremal", outcome.rhs_extremal, "eq:10");
    report.value("rhs_random_min", outcome.rhs_random_min, "eq:3*!");
    report.value("worst_ratio", outcome.worst_ratio, "eq:3*!");
    report.verdict = if outcome.pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

fn run_sharpness(args: &SharpnessArgs, resolver: &Resolver, seed: u64) -> Result<Report> {
    let case = resolver.require(args.case.clone(), "case", Some("stretch".to_string()))?;
    if case != "stretch" {
        return Err(Error::Config {
            location: "--case".into(),
            message: format!("unknown sharpness case '{case}'; only 'stretch' is defined"),
        });
    }
    let a = resolver.require(args.a, "a", Some(2.0))?;
    let n = resolver.require(args.n, "n", None)?;
    let r_max = resolver.require(args.r_max, "r-max", Some(1e-1))?;
    let r_min = resolver.require(args.r_min, "r-min", Some(1e-5))?;
    let points = resolver.require(args.points, "points", Some(12usize))?;
    // the sharp family lives at the critical exponent p = n
    let params = params_from(n, n as f64)?;
    let map = RadialMap::new(a, n)?;
    let c = params.omega() * a.powf(1.0 - params.nf());
    let grid = geometric_scan(r_max, r_min, points)?;

    let mut report = Report::new("sharpness", seed);
    report.config_str("case", &case);
    report.config_num("a", a);
    report.config_num("n", n as f64);
    report.config_num("p", params.p());
    report.config_num("c", c);
    report.config_num("r-max", r_max);
    report.config_num("r-min", r_min);
    report.config_num("points", points as f64);
    report.set_dim_constants(params.omega(), params.ball_volume());

    let gamma0 = bounds::gamma0_constant(params, c)?;
    report.constants.gamma0 = Some(gamma0.into());
    report.value("gamma0", gamma0, "eq:eqks1.22A");

    let mut max_drift = 0.0f64;
    let mut ratio_table = Table::new("schwarz_ratio", "eq:eqks1.22A");
    for &r in &grid {
        let measured = map.min_modulus(r)?;
        let comparison = r.powf(gamma0);
        max_drift = max_drift.max((measured / comparison - 1.0).abs());
        ratio_table.push(r, comparison, measured);
    }
    report.tables.push(ratio_table);

    let mut measure_table = Table::new("image_measure", "eq:eqks**");
    for &r in &grid {
        let j = (1.0 / r).ln();
        let bound = bounds::measure_bound(params, 1.0, c, j)?;
        let measured = map.image_ball_measure(r)?;
        max_drift = max_drift.max(((measured - bound) / bound).abs());
        measure_table.push(r, bound, measured);
    }
    report.tables.push(measure_table);
    report.value("max_abs_ratio_minus_1", max_drift, "eq:eqks1.22A");
    report.verdict = if max_drift <= 1e-12 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

fn dispatch(cli: &Cli, seed: u64) -> Result<Report> {
    let file = match &cli.config {
        Some(path) => Some(FileConfig::parse(path)?),
        None => None,
    };
    let resolver = Resolver {
        file: file.as_ref(),
        section: cli.command.section(),
    };
    match &cli.command {
        Command::Modulus(args) => run_modulus(args, &resolver, seed),
        Command::Capacity(args) => run_capacity(args, &resolver, seed),
        Command::Qmean(args) => run_qmean(args, &resolver, seed),
        Command::IntegralI(args) => run_integral_i(args, &resolver, seed),
        Command::Extremal(args) => run_extremal(args, &resolver, seed),
        Command::MeasureBound(args) => run_measure_bound(args, &resolver, seed),
        Command::Schwarz(args) => run_schwarz(args, &resolver, seed),
        Command::Theorem1(args) => run_theorem1(args, &resolver, seed),
        Command::Hoelder(args) => run_hoelder(args, &resolver, seed),
        Command::Fmo(args) => run_fmo(args, &resolver, seed),
        Command::VerifyDefinition(args) => run_verify_definition(args, &resolver, seed),
        Command::Sharpness(args) => run_sharpness(args, &resolver, seed),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("RINGBOUNDS_SEED") {
        Ok(text) => text.parse().map_err(|_| Error::Config {
            location: "RINGBOUNDS_SEED".into(),
            message: format!("invalid seed '{text}'"),
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Entry point: parses arguments, runs the requested command, writes the
/// report, and returns the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return 0;
            }
            let first = err.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("ringbounds: error: usage: {first}");
            return 1;
        }
    };
    let seed = match resolve_seed(cli.seed) {
        Ok(seed) => seed,
        Err(err) => {
            eprintln!("ringbounds: error: {err}");
            return err.exit_code();
        }
    };
    match dispatch(&cli, seed) {
        Ok(report) => {
            if let Err(err) =
                report.write_files(cli.out.as_deref(), cli.csv.as_deref())
            {
                eprintln!("ringbounds: error: {err}");
                return err.exit_code();
            }
            if cli.out.is_none() {
                println!("{}", report.to_json());
            }
            report.exit_code()
        }
        Err(err) => {
            eprintln!("ringbounds: error: {err}");
            err.exit_code()
        }
    }
}
