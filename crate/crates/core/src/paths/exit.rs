use serde::Serialize;

use super::stable::increment;
use super::RngStream;
use crate::assembly::check_alpha;
use crate::domain::{Domain, Shape};
use crate::error::{Error, Result};
use crate::par;

/// Outcome of one path started at `start`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitSample {
    pub start: Vec<f64>,
    /// First grid time with the path outside the domain, or the time at
    /// which tracking stopped when censored.
    pub time: f64,
    pub position: Vec<f64>,
    pub steps: u64,
    pub censored: bool,
}

fn check_start(domain: &Domain, x: &[f64], alpha: f64, dt: f64) -> Result<()> {
    check_alpha(alpha)?;
    if x.len() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: x.len() });
    }
    if !domain.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
    }
    Ok(())
}

fn max_steps(dt: f64, t_max: f64) -> u64 {
    ((t_max / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64
}

/// Runs one path; assumes validated inputs.
fn run(domain: &Domain, x: &[f64], alpha: f64, dt: f64, limit: u64, rng: &mut RngStream) -> (u64, [f64; 2], bool) {
    let dim = x.len();
    let scale = dt.powf(2.0 / alpha);
    let mut pos = [0.0; 2];
    pos[..dim].copy_from_slice(x);
    let mut dx = [0.0; 2];
    for step in 1..=limit {
        increment(alpha, scale, dim, rng, &mut dx);
        pos[0] += dx[0];
        pos[1] += dx[1];
        if !domain.contains(&pos[..dim]) {
            return (step, pos, false);
        }
    }
    (limit, pos, true)
}

/// Walks from `x` until the path leaves `domain` or time passes `t_max`.
pub fn simulate_exit(domain: &Domain, x: &[f64], alpha: f64, dt: f64, t_max: f64, rng: &mut RngStream) -> Result<ExitSample> {
    check_start(domain, x, alpha, dt)?;
    let (steps, pos, censored) = run(domain, x, alpha, dt, max_steps(dt, t_max), rng);
    Ok(ExitSample { start: x.to_vec(), time: steps as f64 * dt, position: pos[..x.len()].to_vec(), steps, censored })
}

/// Exit step counts of paths `first..first + paths`; `None` marks censoring.
#[allow(clippy::too_many_arguments)]
fn exit_steps(domain: &Domain, x: &[f64], alpha: f64, dt: f64, limit: u64, seed: u64, first: u64, paths: usize) -> Vec<Option<u64>> {
    par::map_range(paths, |i| {
        let mut rng = RngStream::new(seed, first + i as u64);
        let (steps, _, censored) = run(domain, x, alpha, dt, limit, &mut rng);
        (!censored).then_some(steps)
    })
}

/// Empirical `P_x(τ > t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub domain: String,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub se: Vec<f64>,
    /// Paths alive at each `t`.
    pub alive: Vec<u64>,
    /// Paths still inside at the last grid time.
    pub censored: u64,
    pub paths: u64,
    pub dt: f64,
}

impl SurvivalEstimate {
    /// An estimate with the given survival fractions, for testing fits.
    pub fn from_fractions(t: Vec<f64>, p_hat: Vec<f64>, paths: u64) -> Self {
        let se = p_hat.iter().map(|p| (p * (1.0 - p) / paths as f64).sqrt()).collect();
        let alive = p_hat.iter().map(|p| (p * paths as f64).round() as u64).collect();
        let censored = p_hat.last().map_or(0, |p| (p * paths as f64).round() as u64);
        SurvivalEstimate { domain: String::new(), alpha: f64::NAN, x: Vec::new(), t, p_hat, se, alive, censored, paths, dt: f64::NAN }
    }
}

/// Fraction of `paths` paths from `x` still inside at each time of `t_grid`.
pub fn survival_curve(
    domain: &Domain,
    x: &[f64],
    alpha: f64,
    paths: usize,
    t_grid: &[f64],
    dt: f64,
    seed: u64,
) -> Result<SurvivalEstimate> {
    check_start(domain, x, alpha, dt)?;
    if paths < 10_000 {
        return Err(Error::InvalidParameter(format!("survival estimates need at least 10^4 paths, got {paths}")));
    }
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("time grid must be nonnegative and strictly increasing".into()));
    }
    let t_max = *t_grid.last().expect("nonempty");
    let limit = max_steps(dt, t_max);
    let exits = exit_steps(domain, x, alpha, dt, limit, seed, 0, paths);
    let mut alive = vec![0u64; t_grid.len()];
    for e in &exits {
        // the path is alive at t iff its exit time exceeds t
        let tau = e.map_or(f64::INFINITY, |s| s as f64 * dt);
        for (a, &t) in alive.iter_mut().zip(t_grid) {
            if tau > t {
                *a += 1;
            } else {
                break;
            }
        }
    }
    let n = paths as f64;
    let p_hat: Vec<f64> = alive.iter().map(|&a| a as f64 / n).collect();
    let se = p_hat.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(SurvivalEstimate {
        domain: domain.to_string(),
        alpha,
        x: x.to_vec(),
        t: t_grid.to_vec(),
        p_hat,
        se,
        alive,
        censored: exits.iter().filter(|e| e.is_none()).count() as u64,
        paths: paths as u64,
        dt,
    })
}

/// Exponential decay rate of a survival curve with a 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub se: f64,
    pub ci: (f64, f64),
    /// Grid points used.
    pub points: usize,
}

/// Weighted least-squares slope of `-log p̂` against `t` over the last
/// `tail_fraction` of the grid. Weights are the inverse delta-method
/// variances `n p̂ / (1 - p̂)`; points with `p̂ <= 10/n` or `p̂ = 1` are dropped.
pub fn fit_lambda1(estimate: &SurvivalEstimate, tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("tail fraction {tail_fraction} must lie in (0, 1]")));
    }
    let n = estimate.paths as f64;
    let m = estimate.t.len();
    let start = ((1.0 - tail_fraction) * m as f64).floor() as usize;
    let pts: Vec<(f64, f64, f64)> = (start..m)
        .filter_map(|j| {
            let p = estimate.p_hat[j];
            (p > 10.0 / n && p < 1.0).then(|| (estimate.t[j], -p.ln(), n * p / (1.0 - p)))
        })
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!("{} usable tail points, need 4", pts.len())));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let tm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - tm) * (p.1 - ym)).sum();
    let rate = sxy / sxx;
    let se = sxx.recip().sqrt();
    Ok(RateFit { rate, se, ci: (rate - 1.96 * se, rate + 1.96 * se), points: pts.len() })
}

/// Monte Carlo mean exit time from one start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanExit {
    pub mean: f64,
    pub se: f64,
    pub paths: u64,
    pub censored_fraction: f64,
}

const MAX_CENSORED: f64 = 0.01;

#[allow(clippy::too_many_arguments)]
fn mean_exit_from(domain: &Domain, x: &[f64], alpha: f64, paths: usize, dt: f64, t_max: f64, seed: u64, first: u64) -> Result<MeanExit> {
    check_start(domain, x, alpha, dt)?;
    if paths < 2 {
        return Err(Error::InvalidParameter("mean exit needs at least 2 paths".into()));
    }
    let exits = exit_steps(domain, x, alpha, dt, max_steps(dt, t_max), seed, first, paths);
    let times: Vec<f64> = exits.iter().flatten().map(|&s| s as f64 * dt).collect();
    let censored_fraction = 1.0 - times.len() as f64 / paths as f64;
    if censored_fraction > MAX_CENSORED || times.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "{:.2}% of paths from {x:?} were still inside at t_max = {t_max}",
            100.0 * censored_fraction
        )));
    }
    let k = times.len() as f64;
    let mean = times.iter().sum::<f64>() / k;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(MeanExit { mean, se: (var / k).sqrt(), paths: paths as u64, censored_fraction })
}

/// Mean of the exit time over uncensored paths. Runs where more than 1% of
/// paths outlive `t_max` are rejected rather than silently biased.
pub fn mean_exit(domain: &Domain, x: &[f64], alpha: f64, paths: usize, dt: f64, t_max: f64, seed: u64) -> Result<MeanExit> {
    mean_exit_from(domain, x, alpha, paths, dt, t_max, seed, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub delta: f64,
    pub x: Vec<f64>,
    pub mean: f64,
    pub se: f64,
}

/// Mean exit times along a ladder approaching the boundary, with the fitted
/// exponent of `E_x τ ~ δ^β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub rows: Vec<DecayRow>,
    pub exponent: f64,
}

const LADDER: u32 = 6;

/// Starts at distance `δ = R 2^{-k}`, `k = 1..=6`, from the boundary along
/// the shortest axis through the incenter (`R` the inner radius). Each rung
/// uses its own block of stream ids.
pub fn boundary_decay_profile(domain: &Domain, alpha: f64, paths: usize, dt: f64, seed: u64) -> Result<DecayProfile> {
    let axis = match domain.shape() {
        Shape::Raster(_) => return Err(Error::Unsupported("boundary ladder needs a primitive domain".into())),
        Shape::Box { lo, hi } => (0..lo.len()).min_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0),
        _ => 0,
    };
    let r = domain.inner_radius();
    // survival decays at least like exp(-t / r^α) up to a constant, so this
    // horizon leaves a negligible censored fraction
    let t_max = 25.0 * r.powf(alpha);
    let mut rows = Vec::with_capacity(LADDER as usize);
    for k in 1..=LADDER {
        let delta = r * 0.5f64.powi(k as i32);
        let mut x = domain.incenter();
        x[axis] -= r - delta;
        let m = mean_exit_from(domain, &x, alpha, paths, dt, t_max, seed, u64::from(k) << 32)?;
        rows.push(DecayRow { delta: domain.boundary_distance(&x)?, x, mean: m.mean, se: m.se });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta.ln(), r.mean.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(DecayProfile { rows, exponent: sxy / sxx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn interval() -> Domain {
        Domain::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn start_outside_is_rejected() {
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(simulate_exit(&interval(), &[1.5], 1.0, 1e-3, 1.0, &mut rng), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn exit_lands_outside() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..50 {
            let s = simulate_exit(&interval(), &[0.3], 1.0, 1e-3, 100.0, &mut rng).unwrap();
            assert!(!s.censored);
            assert!(s.position[0].abs() >= 1.0);
            assert_relative_eq!(s.time, s.steps as f64 * 1e-3);
        }
    }

    #[test]
    fn censoring_at_horizon() {
        let mut rng = RngStream::new(3, 0);
        let s = simulate_exit(&Domain::interval(-100.0, 100.0).unwrap(), &[0.0], 1.0, 1e-2, 0.05, &mut rng).unwrap();
        assert!(s.censored);
        assert_eq!(s.steps, 5);
    }

    #[test]
    fn survival_starts_at_one_and_decreases() {
        let t: Vec<f64> = (0..=10).map(|j| 0.1 * j as f64).collect();
        let s = survival_curve(&interval(), &[0.0], 1.0, 10_000, &t, 1e-2, 4).unwrap();
        assert_eq!(s.p_hat[0], 1.0);
        assert!(s.p_hat.windows(2).all(|w| w[0] >= w[1]));
        for (p, e) in s.p_hat.iter().zip(&s.se) {
            assert!((0.0..=1.0).contains(p));
            assert_relative_eq!(*e, (p * (1.0 - p) / 1e4).sqrt());
        }
        assert!(survival_curve(&interval(), &[0.0], 1.0, 9_999, &t, 1e-2, 4).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let t: Vec<f64> = (1..=20).map(|j| 0.1 * j as f64).collect();
        let p = t.iter().map(|t| (-2.0 * t).exp()).collect();
        let f = fit_lambda1(&SurvivalEstimate::from_fractions(t, p, 100_000), 1.0).unwrap();
        assert_relative_eq!(f.rate, 2.0, max_relative = 1e-12);
        assert!(f.ci.0 < 2.0 && f.ci.1 > 2.0);
    }

    #[test]
    fn mixture_tail_fit() {
        let t: Vec<f64> = (0..=60).map(|j| 0.1 * j as f64).collect();
        let p = t.iter().map(|t| ((-t).exp() + 0.5 * (-3.0 * t).exp()) / 1.5).collect();
        let f = fit_lambda1(&SurvivalEstimate::from_fractions(t, p, 10_000_000), 0.5).unwrap();
        assert!((f.rate - 1.0).abs() < 0.05, "{}", f.rate);
    }

    #[test]
    fn all_censored_fit_fails() {
        let t: Vec<f64> = (0..10).map(|j| j as f64).collect();
        let est = SurvivalEstimate::from_fractions(t, vec![1.0; 10], 10_000);
        assert!(matches!(fit_lambda1(&est, 1.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn heavy_censoring_is_rejected() {
        assert!(mean_exit(&interval(), &[0.0], 1.0, 200, 1e-2, 0.05, 1).is_err());
    }

    #[test]
    fn raster_ladder_is_unsupported() {
        let r = crate::domain::Raster::new(0.1, [0.0, 0.0], 2, 2, vec![true; 4]).unwrap();
        let d = Domain::new(Shape::Raster(r)).unwrap();
        assert!(matches!(boundary_decay_profile(&d, 1.0, 10, 1e-2, 0), Err(Error::Unsupported(_))));
    }
}
