use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use serde_json::json;
use sha2::{Digest, Sha256};

use fsl_core::assembly::{assemble, symbol_error, symbol_error_2d};
use fsl_core::io::{fmt_g17, read_sweep_csv, write_operator, write_survival_csv, write_sweep_csv};
use fsl_core::laws::{self, alpha_sweep, AlphaSweep, LawReport};
use fsl_core::paths::{fit_lambda1, survival_curve};
use fsl_core::Shape;

use crate::config::{Format, Job, Law, RunConfig};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    LawFailed = 1,
    Error = 2,
}

struct Output {
    path: Option<PathBuf>,
    bytes: Vec<u8>,
}

/// Sizes the global worker pool; `FSL_THREADS` is the fallback.
pub fn init_threads(requested: Option<usize>) -> Result<()> {
    let n = match requested {
        Some(n) => Some(n),
        None => match std::env::var("FSL_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| anyhow!("bad FSL_THREADS value {v:?}"))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the worker pool")?;
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<Status> {
    let start = Instant::now();
    let (status, output) = match &config.job {
        Job::Assemble { domain, alpha, h, out } => {
            let grid = domain.rasterize(*h)?;
            let op = assemble(&grid, *alpha)?;
            let mut bytes = Vec::new();
            write_operator(&op, &mut bytes)?;
            eprintln!("assembled {} cells for {domain} at h = {h}, alpha = {alpha}", op.n());
            (Status::Success, Output { path: Some(out.clone()), bytes })
        }
        Job::Sweep { domain, alphas, k, h, out } => {
            let sweep = alpha_sweep(domain, alphas, *k, h)?;
            let unreliable = sweep.values.iter().flatten().filter(|v| !v.reliable).count();
            if unreliable > 0 {
                eprintln!("warning: {unreliable} extrapolations fell back to the finest grid");
            }
            let bytes = match config.format {
                Format::Csv => {
                    let mut b = Vec::new();
                    write_sweep_csv(&sweep, &mut b)?;
                    b
                }
                Format::Jsonl => sweep_jsonl(&sweep),
            };
            (Status::Success, Output { path: out.clone(), bytes })
        }
        Job::Verify { sweep, laws, tol, out } => {
            let file = File::open(sweep).with_context(|| format!("opening {}", sweep.display()))?;
            let table = read_sweep_csv(BufReader::new(file)).with_context(|| format!("reading {}", sweep.display()))?;
            let explicit = config.settings.get("laws").is_some_and(|v| v != "all");
            let reports = verify(&table, laws, *tol, explicit)?;
            for r in &reports {
                eprintln!("{r}");
            }
            let failed = reports.iter().any(|r| !r.pass());
            let bytes = match config.format {
                Format::Jsonl => reports.iter().map(LawReport::to_json_lines).collect::<String>().into_bytes(),
                Format::Csv => reports_csv(&reports),
            };
            (if failed { Status::LawFailed } else { Status::Success }, Output { path: out.clone(), bytes })
        }
        Job::Simulate { domain, alpha, x, paths, dt, t_grid, seed, out } => {
            let est = survival_curve(domain, x, *alpha, *paths, t_grid, *dt, *seed)?;
            match fit_lambda1(&est, 0.5) {
                Ok(f) => eprintln!("fitted decay rate {:.5} (95% CI {:.5} to {:.5})", f.rate, f.ci.0, f.ci.1),
                Err(e) => eprintln!("no decay rate: {e}"),
            }
            let bytes = match config.format {
                Format::Csv => {
                    let mut b = Vec::new();
                    write_survival_csv(&est, &mut b)?;
                    b
                }
                Format::Jsonl => (0..est.t.len())
                    .map(|j| {
                        json!({"t": est.t[j], "p_hat": est.p_hat[j], "se": est.se[j], "alive": est.alive[j], "censored": est.censored})
                            .to_string()
                            + "\n"
                    })
                    .collect::<String>()
                    .into_bytes(),
            };
            (Status::Success, Output { path: out.clone(), bytes })
        }
        Job::SymbolCheck { dim, alphas, h, xi, truncation, half_width, tol, out } => {
            let mut rows = Vec::new();
            for &a in alphas {
                for &k in xi {
                    let err = if *dim == 1 { symbol_error(a, *h, k, *truncation)? } else { symbol_error_2d(a, *h, [k, 0.0], *half_width)? };
                    rows.push((a, k, err, err <= *tol));
                }
            }
            let failed = rows.iter().any(|r| !r.3);
            eprintln!("{} symbol checks, worst error {:.3e}", rows.len(), rows.iter().map(|r| r.2).fold(0.0, f64::max));
            let bytes = match config.format {
                Format::Csv => {
                    let mut s = String::from("dim,alpha,xi,h,error,pass\n");
                    for (a, k, e, p) in &rows {
                        s.push_str(&format!("{dim},{},{},{},{},{p}\n", fmt_g17(*a), fmt_g17(*k), fmt_g17(*h), fmt_g17(*e)));
                    }
                    s.into_bytes()
                }
                Format::Jsonl => rows
                    .iter()
                    .map(|(a, k, e, p)| json!({"dim": dim, "alpha": a, "xi": k, "h": h, "error": e, "pass": p}).to_string() + "\n")
                    .collect::<String>()
                    .into_bytes(),
            };
            (if failed { Status::LawFailed } else { Status::Success }, Output { path: out.clone(), bytes })
        }
    };
    emit(config, &output, start.elapsed().as_secs_f64())?;
    Ok(status)
}

fn verify(table: &AlphaSweep, which: &[Law], tol: f64, explicit: bool) -> Result<Vec<LawReport>> {
    let closed_form = !matches!(table.domain.shape(), Shape::Raster(_));
    let mut out = Vec::new();
    for law in which {
        match law {
            Law::Power => out.push(laws::check_power_monotonicity(table, tol)),
            Law::Upper | Law::Sandwich if !closed_form && !explicit => {
                eprintln!("skipping {law:?}: no closed-form Laplacian spectrum for {}", table.domain);
            }
            Law::Upper => {
                let mu = laws::exact_laplacian_eigs(&table.domain, table.k)?;
                out.push(laws::check_upper_bound(table, &mu, tol)?);
            }
            Law::Sandwich => out.push(laws::check_sandwich(table, tol)?),
            Law::Continuity => out.push(laws::check_continuity(table)?),
        }
    }
    Ok(out)
}

fn reports_csv(reports: &[LawReport]) -> Vec<u8> {
    let mut s = String::from("law,alpha,beta,i,domain,lhs,rhs,margin,pass\n");
    for r in reports {
        for x in &r.instances {
            let beta = x.beta.map(fmt_g17).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{beta},{},\"{}\",{},{},{},{}\n",
                r.law,
                fmt_g17(x.alpha),
                x.i,
                x.domain.replace('"', "\"\""),
                fmt_g17(x.lhs),
                fmt_g17(x.rhs),
                fmt_g17(x.margin),
                x.pass
            ));
        }
    }
    s.into_bytes()
}

fn sweep_jsonl(s: &AlphaSweep) -> Vec<u8> {
    let mut out = String::new();
    for (a, &alpha) in s.alphas.iter().enumerate() {
        for (i, v) in s.values[a].iter().enumerate() {
            let row = json!({
                "domain": s.domain.to_string(),
                "alpha": alpha,
                "i": i + 1,
                "lambda": v.value,
                "order": if v.observed_order.is_finite() { json!(v.observed_order) } else { json!(null) },
                "reliable": v.reliable,
                "h": v.inputs.iter().map(|p| p.0).collect::<Vec<_>>(),
                "raw": v.inputs.iter().map(|p| p.1).collect::<Vec<_>>(),
            });
            out.push_str(&row.to_string());
            out.push('\n');
        }
    }
    out.into_bytes()
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| anyhow!("renaming into {}: {}", path.display(), e.error))?;
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Sends the output to its file (plus `manifest.json` beside it) or stdout.
fn emit(config: &RunConfig, output: &Output, wall: f64) -> Result<()> {
    let Some(path) = &output.path else {
        io::stdout().write_all(&output.bytes)?;
        return Ok(());
    };
    write_atomic(path, &output.bytes)?;
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "config": config.settings,
        "wall_time_s": wall,
        "outputs": [{
            "path": path.file_name().map(|n| n.to_string_lossy().into_owned()),
            "sha256": sha256_hex(&output.bytes),
            "bytes": output.bytes.len(),
        }],
    });
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_atomic(&dir.join("manifest.json"), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
