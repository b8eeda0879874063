//! Command-line and config-file parsing into a validated [`RunConfig`].
//!
//! A config file holds `key=value` lines using the long flag names without
//! the leading dashes; `#` starts a comment. Flags given on the command line
//! override file values.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fsl_core::Domain;

#[derive(Parser, Debug)]
#[command(name = "fsl", version, about = "Dirichlet spectra of the killed symmetric stable process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Assemble one operator and write it in the binary FSL1 format.
    Assemble(AssembleArgs),
    /// Extrapolated eigenvalues over a range of stability indices.
    Sweep(SweepArgs),
    /// Check the spectral inequalities on a sweep table.
    Verify(VerifyArgs),
    /// Monte Carlo survival curve of the process started at one point.
    Simulate(SimulateArgs),
    /// Relative error of the discrete symbol on plane waves.
    SymbolCheck(SymbolArgs),
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// File of key=value lines supplying defaults for the other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: FSL_THREADS, else all cores).
    #[arg(long)]
    pub threads: Option<String>,
    /// Output path (stdout when omitted, where allowed).
    #[arg(long)]
    pub out: Option<String>,
    /// Tabular output format: csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug)]
pub struct AssembleArgs {
    /// interval:a,b | box:x0,y0,x1,y1 | ball:cx,cy,r | raster:path.pgm,h
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub domain: Option<String>,
    /// a0:a1:step or a comma list.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Eigenvalues per index.
    #[arg(long)]
    pub k: Option<String>,
    /// Comma list of at least three grid spacings, each half the last.
    #[arg(long)]
    pub h: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Sweep table written by `fsl sweep`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// all, or a comma list of power, upper, sandwich, continuity.
    #[arg(long)]
    pub laws: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Start point, comma-separated coordinates.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub paths: Option<String>,
    /// Time step (default 1e-3 times the inner radius to the power α).
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub tmax: Option<String>,
    /// Spacing of the reported time grid (default tmax/100).
    #[arg(long)]
    pub tstep: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SymbolArgs {
    /// 1 or 2.
    #[arg(long)]
    pub dim: Option<String>,
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    /// Comma list of frequencies.
    #[arg(long)]
    pub xi: Option<String>,
    /// Truncation radius in 1D.
    #[arg(long)]
    pub truncation: Option<String>,
    /// Lattice half-width in 2D.
    #[arg(long = "half-width")]
    pub half_width: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Law {
    Power,
    Upper,
    Sandwich,
    Continuity,
}

#[derive(Debug, Clone)]
pub enum Job {
    Assemble { domain: Domain, alpha: f64, h: f64, out: PathBuf },
    Sweep { domain: Domain, alphas: Vec<f64>, k: usize, h: Vec<f64>, out: Option<PathBuf> },
    Verify { sweep: PathBuf, laws: Vec<Law>, tol: f64, out: Option<PathBuf> },
    Simulate { domain: Domain, alpha: f64, x: Vec<f64>, paths: usize, dt: f64, t_grid: Vec<f64>, seed: u64, out: Option<PathBuf> },
    SymbolCheck { dim: usize, alphas: Vec<f64>, h: f64, xi: Vec<f64>, truncation: f64, half_width: usize, tol: f64, out: Option<PathBuf> },
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub job: Job,
    pub format: Format,
    pub threads: Option<usize>,
    /// Merged raw settings, recorded in the manifest.
    pub settings: BTreeMap<String, String>,
}

type Pairs = Vec<(&'static str, Option<String>)>;

fn common_pairs(c: &Common) -> Pairs {
    vec![("threads", c.threads.clone()), ("out", c.out.clone()), ("format", c.format.clone())]
}

impl Command {
    fn parts(&self) -> (&'static str, &Common, Pairs) {
        match self {
            Command::Assemble(a) => {
                ("assemble", &a.common, vec![("domain", a.domain.clone()), ("alpha", a.alpha.clone()), ("h", a.h.clone())])
            }
            Command::Sweep(a) => (
                "sweep",
                &a.common,
                vec![("domain", a.domain.clone()), ("alphas", a.alphas.clone()), ("k", a.k.clone()), ("h", a.h.clone())],
            ),
            Command::Verify(a) => ("verify", &a.common, vec![("sweep", a.sweep.clone()), ("laws", a.laws.clone()), ("tol", a.tol.clone())]),
            Command::Simulate(a) => (
                "simulate",
                &a.common,
                vec![
                    ("domain", a.domain.clone()),
                    ("alpha", a.alpha.clone()),
                    ("x", a.x.clone()),
                    ("paths", a.paths.clone()),
                    ("dt", a.dt.clone()),
                    ("tmax", a.tmax.clone()),
                    ("tstep", a.tstep.clone()),
                    ("seed", a.seed.clone()),
                ],
            ),
            Command::SymbolCheck(a) => (
                "symbol-check",
                &a.common,
                vec![
                    ("dim", a.dim.clone()),
                    ("alphas", a.alphas.clone()),
                    ("h", a.h.clone()),
                    ("xi", a.xi.clone()),
                    ("truncation", a.truncation.clone()),
                    ("half-width", a.half_width.clone()),
                    ("tol", a.tol.clone()),
                ],
            ),
        }
    }
}

/// Parses `key=value` lines, rejecting keys outside `allowed`.
pub fn parse_config_file(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key=value, got {line:?}", n + 1))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            bail!("line {}: unknown key {k:?}", n + 1);
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Merges the config file (if any) with the flags and validates the result.
pub fn parse_config(cli: &Cli) -> Result<RunConfig> {
    let (command, common, mut pairs) = cli.command.parts();
    pairs.extend(common_pairs(common));
    let allowed: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let mut settings = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            parse_config_file(&text, &allowed).with_context(|| format!("in config {}", path.display()))?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in pairs {
        if let Some(v) = v {
            settings.insert(k.to_string(), v);
        }
    }
    validate(command, settings)
}

struct Settings(BTreeMap<String, String>);

impl Settings {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| anyhow!("missing required field --{key}"))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| number(key, v)).transpose()
    }

    fn f64(&self, key: &str) -> Result<f64> {
        number(key, self.required(key)?)
    }

    fn int_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|v| v.trim().parse::<T>().map_err(|_| anyhow!("malformed integer {v:?} for --{key}"))).transpose()
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        number_list(key, self.required(key)?)
    }

    fn domain(&self) -> Result<Domain> {
        let spec = self.required("domain")?;
        spec.parse::<Domain>().map_err(|e| anyhow!("bad --domain {spec:?}: {e}"))
    }

    fn out(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| anyhow!("malformed number {v:?} for --{key}"))?;
    if !x.is_finite() {
        bail!("non-finite value {v:?} for --{key}");
    }
    Ok(x)
}

fn number_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| number(key, t)).collect()
}

/// `a0:a1:step` (inclusive) or a comma list, each strictly inside (0, 2).
pub fn parse_alphas(v: &str) -> Result<Vec<f64>> {
    let alphas = if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            bail!("malformed range {v:?} for --alphas, expected a0:a1:step");
        }
        let (a0, a1, step) = (number("alphas", parts[0])?, number("alphas", parts[1])?, number("alphas", parts[2])?);
        if !(step > 0.0) || a1 < a0 {
            bail!("range {v:?} for --alphas needs a0 <= a1 and step > 0");
        }
        let n = ((a1 - a0) / step + 1e-9).floor() as usize;
        // rounding keeps 0.4 + 3·0.2 printing as 1, not 1.0000000000000002
        (0..=n).map(|j| ((a0 + j as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        number_list("alphas", v)?
    };
    for &a in &alphas {
        if !(a > 0.0 && a < 2.0) {
            bail!("alpha {a} in --alphas {v:?} is outside the open interval (0, 2)");
        }
    }
    if alphas.windows(2).any(|w| !(w[0] < w[1])) {
        bail!("--alphas {v:?} must be strictly ascending");
    }
    Ok(alphas)
}

fn check_alpha(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 2.0) {
        bail!("--alpha {a} is outside the open interval (0, 2)");
    }
    Ok(a)
}

fn check_spacing(h: f64, domain: &Domain) -> Result<f64> {
    if !(h > 0.0) {
        bail!("grid spacing {h} must be positive");
    }
    if h >= domain.diameter() {
        bail!("grid spacing {h} is not below the domain diameter {}", domain.diameter());
    }
    Ok(h)
}

fn validate(command: &'static str, map: BTreeMap<String, String>) -> Result<RunConfig> {
    let s = Settings(map);
    let default_format = if command == "verify" { "jsonl" } else { "csv" };
    let format = match s.raw("format").unwrap_or(default_format) {
        "csv" => Format::Csv,
        "jsonl" => Format::Jsonl,
        f => bail!("unknown --format {f:?}, expected csv or jsonl"),
    };
    let threads = match s.int_opt::<usize>("threads")? {
        Some(0) => bail!("--threads must be at least 1"),
        t => t,
    };
    let job = match command {
        "assemble" => {
            let domain = s.domain()?;
            let alpha = check_alpha(s.f64("alpha")?)?;
            let h = check_spacing(s.f64("h")?, &domain)?;
            let out = s.out().ok_or_else(|| anyhow!("missing required field --out"))?;
            Job::Assemble { domain, alpha, h, out }
        }
        "sweep" => {
            let domain = s.domain()?;
            let alphas = parse_alphas(s.required("alphas")?)?;
            let k = s.int_opt::<usize>("k")?.unwrap_or(1);
            if k == 0 {
                bail!("--k must be at least 1");
            }
            let h = s.list("h")?;
            if h.len() < 3 {
                bail!("--h needs at least three spacings, got {}", h.len());
            }
            for w in h.windows(2) {
                if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
                    bail!("--h spacings {} and {} are not successive halvings", w[0], w[1]);
                }
            }
            for &x in &h {
                check_spacing(x, &domain)?;
            }
            Job::Sweep { domain, alphas, k, h, out: s.out() }
        }
        "verify" => {
            let sweep = PathBuf::from(s.required("sweep")?);
            let laws = parse_laws(s.raw("laws").unwrap_or("all"))?;
            let tol = s.f64_opt("tol")?.unwrap_or(5e-3);
            if !(tol >= 0.0) {
                bail!("--tol {tol} must be nonnegative");
            }
            Job::Verify { sweep, laws, tol, out: s.out() }
        }
        "simulate" => {
            let domain = s.domain()?;
            let alpha = check_alpha(s.f64("alpha")?)?;
            let x = s.list("x")?;
            if x.len() != domain.dim() {
                bail!("--x has {} coordinates but the domain is {}-dimensional", x.len(), domain.dim());
            }
            if !domain.contains(&x) {
                bail!("start point {x:?} is not inside {domain}");
            }
            let paths = s.int_opt::<usize>("paths")?.unwrap_or(10_000);
            if paths < 10_000 {
                bail!("--paths {paths} is below the minimum of 10000");
            }
            let dt = s.f64_opt("dt")?.unwrap_or(1e-3 * domain.inner_radius().powf(alpha));
            if !(dt > 0.0) {
                bail!("--dt {dt} must be positive");
            }
            let tmax = s.f64("tmax")?;
            if !(tmax > 0.0) {
                bail!("--tmax {tmax} must be positive");
            }
            let tstep = s.f64_opt("tstep")?.unwrap_or(tmax / 100.0);
            if !(tstep > 0.0 && tstep <= tmax) {
                bail!("--tstep {tstep} must lie in (0, tmax]");
            }
            let n = (tmax / tstep + 1e-9).floor() as usize;
            let t_grid = (0..=n).map(|j| j as f64 * tstep).collect();
            let seed = s.int_opt::<u64>("seed")?.unwrap_or(0);
            Job::Simulate { domain, alpha, x, paths, dt, t_grid, seed, out: s.out() }
        }
        "symbol-check" => {
            let dim = s.int_opt::<usize>("dim")?.unwrap_or(1);
            if !(1..=2).contains(&dim) {
                bail!("--dim {dim} must be 1 or 2");
            }
            let alphas = parse_alphas(s.raw("alphas").unwrap_or("0.5,1,1.5"))?;
            let default_h = if dim == 1 { 2f64.powi(-9) } else { 2f64.powi(-4) };
            let h = s.f64_opt("h")?.unwrap_or(default_h);
            if !(h > 0.0) {
                bail!("--h {h} must be positive");
            }
            let xi = match s.raw("xi") {
                Some(v) => number_list("xi", v)?,
                None => vec![1.0, 2.0],
            };
            let truncation = s.f64_opt("truncation")?.unwrap_or(64.0);
            if dim == 1 && !(truncation > h) {
                bail!("--truncation {truncation} must exceed h");
            }
            let half_width = s.int_opt::<usize>("half-width")?.unwrap_or(256);
            if half_width == 0 {
                bail!("--half-width must be at least 1");
            }
            let tol = s.f64_opt("tol")?.unwrap_or(if dim == 1 { 0.02 } else { 0.04 });
            Job::SymbolCheck { dim, alphas, h, xi, truncation, half_width, tol, out: s.out() }
        }
        _ => unreachable!("commands come from the clap enum"),
    };
    Ok(RunConfig { command, job, format, threads, settings: s.0 })
}

fn parse_laws(v: &str) -> Result<Vec<Law>> {
    if v == "all" {
        return Ok(vec![Law::Power, Law::Upper, Law::Sandwich, Law::Continuity]);
    }
    v.split(',')
        .map(|t| match t.trim() {
            "power" => Ok(Law::Power),
            "upper" => Ok(Law::Upper),
            "sandwich" => Ok(Law::Sandwich),
            "continuity" => Ok(Law::Continuity),
            other => Err(anyhow!("unknown law {other:?} in --laws")),
        })
        .collect()
}
