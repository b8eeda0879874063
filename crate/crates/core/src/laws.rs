//! Executable forms of the spectral inequalities, plus the sweep table
//! they consume.
//!
//! Every check compares an extrapolated left-hand side against a right-hand
//! side and reports the relative margin `1 - lhs/rhs`. An instance passes
//! when `lhs <= rhs * (1 + tol)`, i.e. when the margin is at least `-tol`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, check_alpha};
use crate::domain::{Domain, Shape};
use crate::eigen::{eigenvalues, richardson, ExtrapolatedValue, Spectrum};
use crate::error::{Error, Result};
use crate::par;
use crate::special::{bessel_j_zeros, gamma};

/// Extrapolated eigenvalues `λ_i^α` for one domain over a list of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweep {
    pub domain: Domain,
    pub alphas: Vec<f64>,
    pub k: usize,
    /// `values[a][i]` is the extrapolation of `λ_{i+1}` at `alphas[a]`.
    pub values: Vec<Vec<ExtrapolatedValue>>,
    pub h_schedule: Vec<f64>,
}

impl AlphaSweep {
    /// A table built from known values, each marked reliable. Useful for
    /// synthetic checks and for tables read back from disk without raw data.
    pub fn from_values(domain: Domain, alphas: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != alphas.len() {
            return Err(Error::DimensionMismatch { expected: alphas.len(), got: values.len() });
        }
        let k = values.first().map_or(0, Vec::len);
        if values.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidParameter("ragged sweep table".into()));
        }
        let values = values
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| ExtrapolatedValue { value: v, observed_order: f64::NAN, reliable: true, inputs: Vec::new() })
                    .collect()
            })
            .collect();
        Ok(AlphaSweep { domain, alphas, k, values, h_schedule: Vec::new() })
    }

    pub fn value(&self, a: usize, i: usize) -> f64 {
        self.values[a][i].value
    }

    /// The `k` values at `alphas[a]`.
    pub fn row(&self, a: usize) -> Vec<f64> {
        self.values[a].iter().map(|v| v.value).collect()
    }

    /// Values of `λ_{i+1}` across all α.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[i].value).collect()
    }

    /// True when every entry was extrapolated with a trusted order.
    pub fn all_reliable(&self) -> bool {
        self.values.iter().flatten().all(|v| v.reliable)
    }
}

/// Extrapolated low spectrum of `domain` for each α.
///
/// Every `(α, h)` pair is an independent job. Values at each α are sorted,
/// since extrapolating the members of a degenerate pair separately may swap
/// them by a rounding error.
pub fn alpha_sweep(domain: &Domain, alphas: &[f64], k: usize, h_schedule: &[f64]) -> Result<AlphaSweep> {
    for w in alphas.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParameter("alphas must be strictly ascending".into()));
        }
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    if h_schedule.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 grids, got {}", h_schedule.len())));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let grids = h_schedule.iter().map(|&h| domain.rasterize(h)).collect::<Result<Vec<_>>>()?;
    if let Some(g) = grids.iter().find(|g| g.len() < k) {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds the {} cells at h = {}", g.len(), g.h)));
    }
    let nh = h_schedule.len();
    let raw = par::map_range(alphas.len() * nh, |job| {
        let (a, j) = (alphas[job / nh], job % nh);
        let g = &grids[j];
        assemble(g, a)
            .and_then(|op| eigenvalues(&op))
            .map(|mut v| {
                v.truncate(k);
                v
            })
            .map_err(|e| Error::Sweep { alpha: a, h: g.h, source: Box::new(e) })
    });
    let raw = raw.into_iter().collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(alphas.len());
    for (ai, &a) in alphas.iter().enumerate() {
        let mut row = (0..k)
            .map(|i| {
                let pts: Vec<(f64, f64)> = (0..nh).map(|j| (h_schedule[j], raw[ai * nh + j][i])).collect();
                richardson(&pts).map_err(|e| Error::Sweep { alpha: a, h: h_schedule[nh - 1], source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        row.sort_by(|x, y| x.value.total_cmp(&y.value));
        values.push(row);
    }
    Ok(AlphaSweep { domain: domain.clone(), alphas: alphas.to_vec(), k, values, h_schedule: h_schedule.to_vec() })
}

/// One compared pair, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawInstance {
    pub alpha: f64,
    pub beta: Option<f64>,
    /// One-based eigenvalue index.
    pub i: usize,
    pub domain: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl LawInstance {
    fn new(alpha: f64, beta: Option<f64>, i: usize, domain: &Domain, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = 1.0 - lhs / rhs;
        LawInstance { alpha, beta, i, domain: domain.to_string(), lhs, rhs, margin, pass: margin >= -tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub tol: f64,
    pub instances: Vec<LawInstance>,
}

impl LawReport {
    fn new(law: &str, tol: f64, instances: Vec<LawInstance>) -> Self {
        LawReport { law: law.to_string(), tol, instances }
    }

    /// Smallest margin over all instances; `None` when vacuous.
    pub fn worst_margin(&self) -> Option<f64> {
        self.instances.iter().map(|x| x.margin).min_by(f64::total_cmp)
    }

    pub fn pass(&self) -> bool {
        self.instances.iter().all(|x| x.pass)
    }

    /// One JSON object per instance: `{law, instance, margin, pass}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for x in &self.instances {
            let line = serde_json::json!({
                "law": self.law,
                "instance": { "alpha": x.alpha, "beta": x.beta, "i": x.i, "domain": x.domain, "lhs": x.lhs, "rhs": x.rhs },
                "margin": x.margin,
                "pass": x.pass,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        match self.worst_margin() {
            Some(m) => write!(f, "{verdict} {}: {} instances, worst margin {m:.3e} (tol {:.1e})", self.law, self.instances.len(), self.tol),
            None => write!(f, "{verdict} {}: vacuous", self.law),
        }
    }
}

/// `(λ_i^α)^{1/α} <= (λ_i^β)^{1/β}` for every sampled `α < β`.
pub fn check_power_monotonicity(sweep: &AlphaSweep, tol: f64) -> LawReport {
    let mut out = Vec::new();
    for (a, &alpha) in sweep.alphas.iter().enumerate() {
        for (b, &beta) in sweep.alphas.iter().enumerate().skip(a + 1) {
            for i in 0..sweep.k {
                let lhs = sweep.value(a, i).powf(1.0 / alpha);
                let rhs = sweep.value(b, i).powf(1.0 / beta);
                out.push(LawInstance::new(alpha, Some(beta), i + 1, &sweep.domain, lhs, rhs, tol));
            }
        }
    }
    LawReport::new("power_monotonicity", tol, out)
}

/// `λ_i^α <= μ_i^{α/2}` with `μ` the Dirichlet Laplacian eigenvalues.
pub fn check_upper_bound(sweep: &AlphaSweep, mu: &[f64], tol: f64) -> Result<LawReport> {
    if mu.len() < sweep.k {
        return Err(Error::InsufficientData(format!("{} Laplacian eigenvalues for k = {}", mu.len(), sweep.k)));
    }
    let mut out = Vec::new();
    for (a, &alpha) in sweep.alphas.iter().enumerate() {
        for (i, m) in mu.iter().take(sweep.k).enumerate() {
            let rhs = m.powf(0.5 * alpha);
            out.push(LawInstance::new(alpha, Some(2.0), i + 1, &sweep.domain, sweep.value(a, i), rhs, tol));
        }
    }
    Ok(LawReport::new("laplacian_upper_bound", tol, out))
}

/// Lower bound on `λ_1^α` for a convex domain of inner radius `r`.
pub fn convex_lower_bound(alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("inner radius {r} must be positive")));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(2f64.powf(alpha) * gamma(1.0 + 0.5 * alpha) * gamma(0.5 * (1.0 + alpha)) / (gamma(0.5) * r.powf(alpha)))
}

/// Both sides of the first-eigenvalue sandwich for convex primitive domains:
/// the convex lower bound below and `μ_1^{α/2}` above.
pub fn check_sandwich(sweep: &AlphaSweep, tol: f64) -> Result<LawReport> {
    if matches!(sweep.domain.shape(), Shape::Raster(_)) {
        return Err(Error::Unsupported("sandwich bounds need a convex primitive domain".into()));
    }
    let mu = exact_laplacian_eigs(&sweep.domain, 1)?[0];
    let r = sweep.domain.inner_radius();
    let mut out = Vec::new();
    for (a, &alpha) in sweep.alphas.iter().enumerate() {
        let lam = sweep.value(a, 0);
        out.push(LawInstance::new(alpha, None, 1, &sweep.domain, convex_lower_bound(alpha, r)?, lam, tol));
        out.push(LawInstance::new(alpha, Some(2.0), 1, &sweep.domain, lam, mu.powf(0.5 * alpha), tol));
    }
    Ok(LawReport::new("sandwich", tol, out))
}

/// The lowest `k` Dirichlet eigenvalues of `-Δ`, in ascending order.
pub fn exact_laplacian_eigs(domain: &Domain, k: usize) -> Result<Vec<f64>> {
    let mut mu = match domain.shape() {
        Shape::Interval { a, b } => return Ok((1..=k).map(|i| (i as f64 * PI / (b - a)).powi(2)).collect()),
        Shape::Box { lo, hi } if lo.len() == 1 => {
            return Ok((1..=k).map(|i| (i as f64 * PI / (hi[0] - lo[0])).powi(2)).collect());
        }
        Shape::Ball { center, radius } if center.len() == 1 => {
            return Ok((1..=k).map(|i| (i as f64 * PI / (2.0 * radius)).powi(2)).collect());
        }
        Shape::Box { lo, hi } => {
            let (l1, l2) = (hi[0] - lo[0], hi[1] - lo[1]);
            let mut v = Vec::with_capacity(k * k);
            for m in 1..=k {
                for n in 1..=k {
                    v.push(PI * PI * ((m * m) as f64 / (l1 * l1) + (n * n) as f64 / (l2 * l2)));
                }
            }
            v
        }
        Shape::Ball { radius, .. } => {
            // j_{ν,s} for ν ≥ 1 belongs to two eigenfunctions (cos and sin)
            let mut v = Vec::with_capacity(2 * k * k);
            for nu in 0..=k {
                for z in bessel_j_zeros(nu as u32, k) {
                    let m = (z / radius).powi(2);
                    v.push(m);
                    if nu > 0 {
                        v.push(m);
                    }
                }
            }
            v
        }
        Shape::Raster(_) => return Err(Error::Unsupported("no closed-form spectrum for raster domains".into())),
    };
    mu.sort_by(f64::total_cmp);
    mu.truncate(k);
    Ok(mu)
}

fn extrapolated_lambda1(domain: &Domain, alpha: f64, h_schedule: &[f64]) -> Result<f64> {
    Ok(alpha_sweep(domain, &[alpha], 1, h_schedule)?.value(0, 0))
}

/// `λ_1^α(D*) <= λ_1^α(D)` with `D*` the centered ball of equal measure.
pub fn check_faber_krahn(domain: &Domain, alpha: f64, h_schedule: &[f64], tol: f64) -> Result<LawReport> {
    let ball = domain.schwarz_ball();
    let rhs = extrapolated_lambda1(domain, alpha, h_schedule)?;
    let lhs = if matches!(domain.shape(), Shape::Ball { .. }) { rhs } else { extrapolated_lambda1(&ball, alpha, h_schedule)? };
    let mut x = LawInstance::new(alpha, None, 1, domain, lhs, rhs, tol);
    x.domain = format!("{ball} vs {domain}");
    Ok(LawReport::new("faber_krahn", tol, vec![x]))
}

/// Interlacing at the matrix level: `λ_k(outer) <= λ_k(inner)` for
/// `k <= 10` when the inner cells are a subset of the outer ones.
pub fn check_domain_monotonicity(inner: &Domain, outer: &Domain, alpha: f64, h: f64) -> Result<LawReport> {
    const TOL: f64 = 1e-10;
    let gi = inner.rasterize(h)?;
    let go = outer.rasterize(h)?;
    if gi.embedding_into(&go).is_none() {
        return Err(Error::InvalidParameter(format!("cells of {inner} are not a subset of those of {outer} at h = {h}")));
    }
    let li = eigenvalues(&assemble(&gi, alpha)?)?;
    let lo = eigenvalues(&assemble(&go, alpha)?)?;
    let out = (0..li.len().min(10))
        .map(|k| {
            let mut x = LawInstance::new(alpha, None, k + 1, inner, lo[k], li[k], TOL);
            x.domain = format!("{outer} contains {inner}");
            x
        })
        .collect();
    Ok(LawReport::new("domain_monotonicity", TOL, out))
}

/// Increments of `λ_i` between consecutive α for one index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub i: usize,
    pub increments: Vec<f64>,
    pub max_increment: f64,
    pub median_increment: f64,
    pub increasing: bool,
    /// Set when some increment exceeds five times the median.
    pub jump: bool,
}

/// Smoothness heuristic for the curves `α ↦ λ_i^α`.
pub fn continuity_profile(sweep: &AlphaSweep) -> Result<Vec<ContinuityRow>> {
    continuity_of(&sweep.alphas, &sweep.values.iter().map(|r| r.iter().map(|v| v.value).collect()).collect::<Vec<_>>())
}

/// Same as [`continuity_profile`] on a bare table `values[a][i]`.
pub fn continuity_of(alphas: &[f64], values: &[Vec<f64>]) -> Result<Vec<ContinuityRow>> {
    if alphas.len() < 2 {
        return Ok(Vec::new());
    }
    let step = alphas[1] - alphas[0];
    if alphas.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0)) {
        return Err(Error::InvalidParameter("alphas must be equally spaced".into()));
    }
    let k = values.first().map_or(0, Vec::len);
    Ok((0..k)
        .map(|i| {
            let increments: Vec<f64> = values.windows(2).map(|w| w[1][i] - w[0][i]).collect();
            let mut sorted: Vec<f64> = increments.iter().map(|x| x.abs()).collect();
            sorted.sort_by(f64::total_cmp);
            let m = sorted.len();
            let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
            let max = sorted[m - 1];
            ContinuityRow {
                i: i + 1,
                increasing: increments.iter().all(|&d| d > 0.0),
                jump: max > 5.0 * median,
                max_increment: max,
                median_increment: median,
                increments,
            }
        })
        .collect())
}

/// [`continuity_profile`] as a report: one instance per index comparing the
/// largest increment against five times the median, failing on any jump or
/// on a curve that is not strictly increasing.
pub fn check_continuity(sweep: &AlphaSweep) -> Result<LawReport> {
    let rows = continuity_profile(sweep)?;
    let (first, last) = match (sweep.alphas.first(), sweep.alphas.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Ok(LawReport::new("continuity", 0.0, Vec::new())),
    };
    let out = rows
        .iter()
        .map(|r| {
            let mut x = LawInstance::new(first, Some(last), r.i, &sweep.domain, r.max_increment, 5.0 * r.median_increment, 0.0);
            x.pass = x.pass && r.increasing && !r.jump;
            x
        })
        .collect();
    Ok(LawReport::new("continuity", 0.0, out))
}

/// Spectrum of `(H_β)^{α/β}` from that of `H_β`.
pub fn subordination_spectrum(values: &[f64], alpha: f64, beta: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= beta && beta <= 2.0) {
        return Err(Error::InvalidParameter(format!("need 0 < α <= β <= 2, got α = {alpha}, β = {beta}")));
    }
    if let Some(v) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(format!("eigenvalue {v} is not positive")));
    }
    Ok(values.iter().map(|v| v.powf(alpha / beta)).collect())
}

/// Growth exponent of the counting function, fitted as the least-squares
/// slope of `log N(λ)` against `log λ` over the middle third of `spectrum`.
pub fn weyl_fit(spectrum: &Spectrum) -> Result<f64> {
    weyl_fit_values(&spectrum.eigenvalues)
}

pub fn weyl_fit_values(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 30 {
        return Err(Error::InsufficientData(format!("Weyl fit needs 30 eigenvalues, got {n}")));
    }
    let pts: Vec<(f64, f64)> = (n / 3..2 * n / 3).map(|i| (values[i].ln(), ((i + 1) as f64).ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate spectrum in Weyl fit".into()));
    }
    Ok(sxy / sxx)
}
