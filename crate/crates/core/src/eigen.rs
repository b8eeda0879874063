//! Dense symmetric eigensolver and Richardson extrapolation.
//!
//! The decomposition is the classical two-stage one: Householder reduction
//! to tridiagonal form followed by the implicitly shifted QL iteration. The
//! eigenvalue-only path works on a packed lower triangle and never forms the
//! orthogonal factor.

use serde::{Deserialize, Serialize};

use crate::assembly::{dot, GridOperator};
use crate::domain::Domain;
use crate::{Error, Result};

/// Maximum QL sweeps spent on one eigenvalue.
const MAX_SWEEPS: usize = 50;

/// Packed lower triangle: row `i` occupies `i(i+1)/2 .. i(i+1)/2 + i + 1`.
fn pack_lower(a: &[f64], n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        p.extend_from_slice(&a[i * n..i * n + i + 1]);
    }
    p
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Householder reduction of a packed symmetric matrix. Returns the diagonal,
/// the subdiagonal (`e[i]` couples `i-1` and `i`, `e[0] = 0`) and, when
/// requested, the reflectors `(u, H)` needed to rebuild the orthogonal factor.
type Reflectors = Vec<(Vec<f64>, f64)>;

fn tridiagonalize(mut a: Vec<f64>, n: usize, keep: bool) -> (Vec<f64>, Vec<f64>, Reflectors) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::new();
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let ri = row_start(i);
        let scale: f64 = a[ri..ri + i].iter().map(|x| x.abs()).sum();
        if l == 0 || scale == 0.0 {
            e[i] = a[ri + l];
            if keep {
                reflectors.push((Vec::new(), 0.0));
            }
            d[i] = a[ri + i];
            continue;
        }
        let mut u: Vec<f64> = a[ri..ri + i].iter().map(|x| x / scale).collect();
        let mut hh: f64 = u.iter().map(|x| x * x).sum();
        let f = u[l];
        let g = if f >= 0.0 { -hh.sqrt() } else { hh.sqrt() };
        e[i] = scale * g;
        hh -= f * g;
        u[l] = f - g;
        // p = A u / H over the leading i×i block, reading the packed lower
        // triangle row by row
        p[..i].iter_mut().for_each(|x| *x = 0.0);
        for j in 0..i {
            let rj = row_start(j);
            let row = &a[rj..rj + j + 1];
            let uj = u[j];
            p[j] += dot(row, &u[..=j]);
            for (pk, &x) in p[..j].iter_mut().zip(&row[..j]) {
                *pk += x * uj;
            }
        }
        let inv_h = 1.0 / hh;
        p[..i].iter_mut().for_each(|x| *x *= inv_h);
        let k = 0.5 * inv_h * dot(&u, &p[..i]);
        let q: Vec<f64> = p[..i].iter().zip(&u).map(|(pj, uj)| pj - k * uj).collect();
        for j in 0..i {
            let rj = row_start(j);
            let (uj, qj) = (u[j], q[j]);
            let row = &mut a[rj..rj + j + 1];
            for ((x, &uk), &qk) in row.iter_mut().zip(&u[..=j]).zip(&q[..=j]) {
                *x -= uj * qk + qj * uk;
            }
        }
        d[i] = a[ri + i];
        if keep {
            reflectors.push((u, hh));
        }
    }
    d[0] = a[0];
    e[0] = 0.0;
    if keep {
        reflectors.reverse();
    }
    (d, e, reflectors)
}

/// Rebuilds `Qᵀ` from the reflectors; row `r` of the result is column `r` of
/// `Q`.
fn accumulate(reflectors: &[(Vec<f64>, f64)], n: usize) -> Vec<f64> {
    let mut qt = vec![0.0; n * n];
    for i in 0..n {
        qt[i * n + i] = 1.0;
    }
    // reflectors[k] acts on coordinates 0..=k, built at step i = k + 1
    for (u, hh) in reflectors {
        if u.is_empty() {
            continue;
        }
        let m = u.len();
        let inv_h = 1.0 / hh;
        for r in 0..m {
            let row = &mut qt[r * n..r * n + m];
            let s = dot(row, u) * inv_h;
            for (x, &uk) in row.iter_mut().zip(u) {
                *x -= s * uk;
            }
        }
    }
    qt
}

/// Implicit QL on a symmetric tridiagonal matrix. `z`, when given, holds
/// eigenvector rows that are rotated along.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenNoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigendecomposition of a dense symmetric row-major matrix. Returns the
/// ascending eigenvalues and, when asked, unit eigenvectors as rows.
pub fn symmetric_eigen(a: &[f64], n: usize, vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    if n == 0 {
        return Ok((Vec::new(), vectors.then(Vec::new)));
    }
    let (mut d, mut e, reflectors) = tridiagonalize(pack_lower(a, n), n, vectors);
    let mut z = vectors.then(|| accumulate(&reflectors, n));
    tridiagonal_ql(&mut d, &mut e, z.as_deref_mut())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let vecs = z.map(|z| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            out.extend_from_slice(&z[i * n..(i + 1) * n]);
        }
        out
    });
    Ok((values, vecs))
}

/// Leading part of the spectrum of an operator, eigenvectors normalized so
/// that `⟨φ_i, φ_j⟩ h^d = δ_ij`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub alpha: f64,
    pub domain: Domain,
    pub h: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Grid inner product `Σ u_i v_i h^d`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, v) * self.h.powi(self.domain.dim() as i32)
    }
}

/// Full decomposition of `op`, reporting the lowest `k` pairs. Each
/// eigenvector has its first nonzero component positive.
pub fn eigendecompose(op: &GridOperator, k: usize) -> Result<Spectrum> {
    let n = op.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("requested {k} eigenpairs of a {n}-cell operator")));
    }
    let (values, vecs) = symmetric_eigen(op.entries(), n, true)?;
    let vecs = vecs.expect("vectors requested");
    let dim = op.grid.dim() as i32;
    let norm = op.h().powf(-0.5 * dim as f64);
    let eigenvectors = (0..k)
        .map(|i| {
            let v = &vecs[i * n..(i + 1) * n];
            let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = v.iter().find(|x| x.abs() > 1e-10 * big).copied().unwrap_or(1.0);
            let sign = if first < 0.0 { -1.0 } else { 1.0 };
            v.iter().map(|x| sign * norm * x).collect()
        })
        .collect();
    Ok(Spectrum { alpha: op.alpha, domain: op.grid.domain().clone(), h: op.h(), eigenvalues: values[..k].to_vec(), eigenvectors })
}

/// All eigenvalues of `op`, ascending.
pub fn eigenvalues(op: &GridOperator) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(op.entries(), op.n(), false)?.0)
}

/// `⟨Hu, u⟩ / ⟨u, u⟩`.
pub fn rayleigh_quotient(op: &GridOperator, u: &[f64]) -> Result<f64> {
    let uu = dot(u, u);
    if uu == 0.0 {
        return Err(Error::InvalidParameter("Rayleigh quotient of the zero vector".into()));
    }
    let hu = op.apply(u)?;
    Ok(dot(&hu, u) / uu)
}

/// Limit estimate `λ(h) = λ∞ + c h^γ` from the three finest grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolatedValue {
    pub value: f64,
    /// Observed order `γ`; NaN when the differences do not determine it.
    pub observed_order: f64,
    pub reliable: bool,
    /// The `(h, λ(h))` points supplied, coarse to fine.
    pub inputs: Vec<(f64, f64)>,
}

/// Richardson extrapolation over grids refined by a factor of two.
///
/// When the successive differences vanish or change sign, or the observed
/// order falls outside `(0.2, 3)`, the finest value is returned and the
/// result is flagged unreliable.
pub fn richardson(points: &[(f64, f64)]) -> Result<ExtrapolatedValue> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("Richardson needs 3 grids, got {}", points.len())));
    }
    for w in points.windows(2) {
        let ratio = w[0].0 / w[1].0;
        if !((ratio - 2.0).abs() <= 1e-9 * 2.0) {
            return Err(Error::InvalidParameter(format!("grid spacings {} -> {} are not halved", w[0].0, w[1].0)));
        }
    }
    if points.iter().any(|p| !p.1.is_finite() || !p.0.is_finite()) {
        return Err(Error::InvalidParameter("non-finite Richardson input".into()));
    }
    let n = points.len();
    let (l0, l1, l2) = (points[n - 3].1, points[n - 2].1, points[n - 1].1);
    let (d1, d2) = (l0 - l1, l1 - l2);
    let flagged = |order: f64| ExtrapolatedValue { value: l2, observed_order: order, reliable: false, inputs: points.to_vec() };
    if d1 == 0.0 || d2 == 0.0 || (d1 > 0.0) != (d2 > 0.0) {
        return Ok(flagged(f64::NAN));
    }
    let order = (d1 / d2).log2();
    if !(order > 0.2 && order < 3.0) {
        return Ok(flagged(order));
    }
    let value = l2 - d2 / (2f64.powf(order) - 1.0);
    Ok(ExtrapolatedValue { value, observed_order: order, reliable: true, inputs: points.to_vec() })
}
