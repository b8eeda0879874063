use std::f64::consts::PI;

use super::RngStream;
use crate::error::{Error, Result};

/// One draw of the standard positive ρ-stable law, `E[exp(-sσ)] = exp(-s^ρ)`.
///
/// Kanter's representation, evaluated in log space so that small ρ does not
/// overflow the intermediate powers.
pub fn sample_positive_stable(rho: f64, rng: &mut RngStream) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("subordinator index {rho} must lie in (0, 1)")));
    }
    Ok(positive_stable(rho, rng))
}

#[inline]
pub(crate) fn positive_stable(rho: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform();
    let e = rng.exponential();
    let ln = (rho * PI * u).sin().ln() - (PI * u).sin().ln() / rho + (1.0 - rho) / rho * (((1.0 - rho) * PI * u).sin().ln() - e.ln());
    ln.exp()
}

/// Displacement of the process over time `dt` in dimension `dim`:
/// `sqrt(2σ)·N` with `σ = dt^{2/α}·S` and `S` standard positive (α/2)-stable,
/// so that `E[exp(iξ·ΔX)] = exp(-dt|ξ|^α)`.
pub fn sample_stable_increment(alpha: f64, dt: f64, dim: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    crate::assembly::check_alpha(alpha)?;
    if !(dt > 0.0) || !(1..=2).contains(&dim) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and dimension 1 or 2, got dt = {dt}, d = {dim}")));
    }
    let mut out = [0.0; 2];
    increment(alpha, dt.powf(2.0 / alpha), dim, rng, &mut out);
    Ok(out[..dim].to_vec())
}

/// Writes one increment into `out[..dim]`; `time_scale` is `dt^{2/α}`.
#[inline]
pub(crate) fn increment(alpha: f64, time_scale: f64, dim: usize, rng: &mut RngStream, out: &mut [f64; 2]) {
    let sigma = time_scale * positive_stable(0.5 * alpha, rng);
    let s = (2.0 * sigma).sqrt();
    for v in out.iter_mut().take(dim) {
        *v = s * rng.normal();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_z(rho: f64, s: f64, n: usize, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 0);
        let xs: Vec<f64> = (0..n).map(|_| (-s * sample_positive_stable(rho, &mut rng).unwrap()).exp()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m - (-s.powf(rho)).exp()) / (var / n as f64).sqrt()
    }

    #[test]
    fn laplace_transform_at_one() {
        assert!(laplace_z(0.5, 1.0, 200_000, 11).abs() < 4.0);
        assert!(laplace_z(0.75, 2.0, 200_000, 12).abs() < 4.0);
    }

    #[test]
    fn draws_are_positive() {
        let mut rng = RngStream::new(3, 1);
        for rho in [0.05, 0.25, 0.5, 0.95] {
            assert!((0..20_000).all(|_| sample_positive_stable(rho, &mut rng).unwrap() > 0.0));
        }
        assert!(sample_positive_stable(1.0, &mut rng).is_err());
    }

    #[test]
    fn cauchy_tail() {
        let n = 400_000;
        let mut rng = RngStream::new(5, 0);
        let hits = (0..n).filter(|_| sample_stable_increment(1.0, 1.0, 1, &mut rng).unwrap()[0].abs() > 10.0).count();
        let p = 1.0 - 2.0 / PI * 10f64.atan();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn characteristic_function_near_brownian() {
        let (n, dt) = (200_000, 0.5);
        let mut rng = RngStream::new(9, 2);
        let xs: Vec<f64> = (0..n).map(|_| sample_stable_increment(1.95, dt, 1, &mut rng).unwrap()[0].cos()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((m - (-dt).exp()).abs() < 4.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn increments_are_centered() {
        let n = 100_000;
        let mut rng = RngStream::new(10, 0);
        // the variance is infinite, so test symmetry through the sign
        let pos = (0..n).filter(|_| sample_stable_increment(1.5, 1.0, 2, &mut rng).unwrap()[1] > 0.0).count();
        let se = (0.25 / n as f64).sqrt();
        assert!((pos as f64 / n as f64 - 0.5).abs() < 4.0 * se);
    }
}
