//! Special functions used by the kernel constants, lattice sums and the
//! analytic Laplacian spectra.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Sums `Σ_{k≥0} (-1)^k a(k)` with the Cohen–Rodriguez Villegas–Zagier
/// acceleration. Accurate to about `5.8^{-terms}` for totally monotone `a`.
fn alternating_sum(a: impl Fn(f64) -> f64, terms: usize) -> f64 {
    let n = terms as f64;
    let mut d = (3.0 + 8f64.sqrt()).powf(n);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..terms {
        let kf = k as f64;
        c = b - c;
        s += c * a(kf);
        b *= (kf + n) * (kf - n) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Riemann zeta for real `s > 0`, `s != 1`.
pub fn zeta(s: f64) -> f64 {
    debug_assert!(s > 0.0 && s != 1.0);
    let eta = alternating_sum(|k| (k + 1.0).powf(-s), 40);
    // 1 - 2^{1-s}, kept accurate near s = 1
    let denom = -((1.0 - s) * std::f64::consts::LN_2).exp_m1();
    eta / denom
}

/// Dirichlet beta `Σ (-1)^k (2k+1)^{-s}` for real `s > 0`.
pub fn dirichlet_beta(s: f64) -> f64 {
    debug_assert!(s > 0.0);
    alternating_sum(|k| (2.0 * k + 1.0).powf(-s), 40)
}

/// Epstein zeta of the square lattice, `Σ_{(m,n)≠0} (m²+n²)^{-s}`, through
/// `4 ζ(s) β(s)`. For `0 < s < 1` this is the analytic continuation.
pub fn square_lattice_zeta(s: f64) -> f64 {
    4.0 * zeta(s) * dirichlet_beta(s)
}

/// Bessel function of the first kind of integer order, from the integral
/// `J_n(x) = (1/π) ∫_0^π cos(nτ − x sin τ) dτ` with the trapezoidal rule,
/// which converges geometrically for this periodic integrand.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let m = (x.abs() + nf).ceil() as usize + 48;
    let step = PI / m as f64;
    let f = |t: f64| (nf * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        s += f(k as f64 * step);
    }
    s * step / PI
}

/// The first `count` positive zeros of `J_n`, located by a sign scan and
/// refined by bisection.
pub fn bessel_j_zeros(n: u32, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = 0.5 * n as f64 + step;
    let mut fa = bessel_j(n, a);
    while zeros.len() < count {
        let b = a + step;
        let fb = bessel_j(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = bessel_j(n, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}

const GAUSS8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// `∫_x^∞ t^{-a} cos t dt` for `x > 0`, `a > 0`. Gauss–Legendre panels up to
/// `t = 30`, then the asymptotic series from repeated integration by parts.
pub fn cos_power_tail(a: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0 && a > 0.0);
    const SWITCH: f64 = 30.0;
    let f = |t: f64| t.powf(-a) * t.cos();
    let mut s = 0.0;
    let mut t = x;
    while t < SWITCH {
        let b = (t + (0.5 * t).min(0.5)).min(SWITCH);
        let (m, r) = (0.5 * (t + b), 0.5 * (b - t));
        for &(node, w) in &GAUSS8 {
            s += w * r * (f(m - r * node) + f(m + r * node));
        }
        t = b;
    }
    // ∫_X^∞ t^{-a} e^{it} dt = i e^{iX} X^{-a} Σ_k (a)_k (-i/X)^k
    let mut term = (1.0f64, 0.0f64);
    let (mut re, mut im) = term;
    let mut prev = f64::INFINITY;
    for k in 0..40 {
        let scale = (a + k as f64) / t;
        // multiply by -i·scale
        term = (term.1 * scale, -term.0 * scale);
        let size = term.0.hypot(term.1);
        if size >= prev || size < 1e-18 {
            break;
        }
        prev = size;
        re += term.0;
        im += term.1;
    }
    let (c, sn) = (t.cos(), t.sin());
    // real part of i (c + i sn)(re + i im)
    s + t.powf(-a) * -(sn * re + c * im)
}
