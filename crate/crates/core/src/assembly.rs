//! Dense discretization of `(-Δ)^{α/2}` with the exterior Dirichlet
//! condition on a cell-centered lattice.
//!
//! Both dimensions split the jump integral into a near field, where the
//! second difference of `u` is integrated against the kernel exactly for a
//! quadratic profile, and a far field with nonnegative lattice weights. The
//! diagonal is the total jump rate of the free-space lattice kernel, which
//! does not depend on the domain: the operator of a subdomain is therefore
//! an exact principal submatrix, and `H·1` is the rate of jumps that leave
//! `D`.
//!
//! Every weight is `C(d,α)·h^{-α}` times a dimensionless number that depends
//! only on the lattice offset, so scaling `D` and `h` by `c` scales the matrix
//! by exactly `c^{-α}`.

use std::f64::consts::PI;

use crate::domain::Grid;
use crate::special::{cos_power_tail, gamma, square_lattice_zeta};
use crate::{par, Error, Result};

/// Largest grid accepted by the dense assembly.
pub const MAX_CELLS: usize = 5000;

/// Below this distance from 1 the 1D weights switch to the logarithmic
/// potential.
const LOG_BRANCH: f64 = 1e-9;

/// Normalizing constant of the jump kernel, chosen so that the Fourier
/// symbol of the form is exactly `|ξ|^α`:
/// `C(d,α) = α 2^{α-1} Γ((d+α)/2) / (π^{d/2} Γ(1-α/2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstant {
    pub d: usize,
    pub alpha: f64,
    pub value: f64,
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

pub fn kernel_constant(d: usize, alpha: f64) -> Result<KernelConstant> {
    check_alpha(alpha)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let df = d as f64;
    let value = alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (df + alpha)) / (PI.powf(0.5 * df) * gamma(1.0 - 0.5 * alpha));
    Ok(KernelConstant { d, alpha, value })
}

/// Dimensionless 1D weights. `w[m]` multiplies `u_{i±m}`; `w[0]` is the
/// diagonal `2(1/(2-α) + 1/α)`.
///
/// The near field `|y| ≤ h` integrates `g_1 (y/h)^2` exactly, giving
/// `1/(2-α)`. Beyond `h` the symmetric difference is interpolated with hat
/// functions, whose integrals against `y^{-1-α}` are second differences of
/// the convex potential `Ψ` with `Ψ'' = y^{-1-α}`.
#[derive(Debug, Clone)]
pub struct Weights1d {
    pub alpha: f64,
    pub diagonal: f64,
    pub near: f64,
    far: Vec<f64>,
}

impl Weights1d {
    pub fn new(alpha: f64, max_offset: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let near = 1.0 / (2.0 - alpha);
        let mut far = vec![0.0; max_offset.max(1) + 1];
        far[1] = psi(2.0, alpha) - psi(1.0, alpha) - dpsi(1.0, alpha);
        for (m, w) in far.iter_mut().enumerate().skip(2) {
            *w = psi_second_difference(m, alpha);
        }
        Ok(Self { alpha, diagonal: 2.0 * (near + 1.0 / alpha), near, far })
    }

    /// Off-diagonal weight at lattice distance `m ≥ 1`.
    pub fn offset(&self, m: usize) -> f64 {
        match m {
            0 => self.diagonal,
            1 => self.near + self.far[1],
            _ => self.far[m],
        }
    }

    pub fn max_offset(&self) -> usize {
        self.far.len() - 1
    }

    /// Jump rate beyond lattice distance `m` on one side,
    /// `Σ_{k>m} w_k = Ψ(m) − Ψ(m+1)` for `m ≥ 1`.
    pub fn tail(&self, m: usize) -> f64 {
        match m {
            0 => 0.5 * self.diagonal,
            _ => potential_step(m as f64, self.alpha),
        }
    }
}

/// `Ψ(r)` normalized with `Ψ(1) = 0`.
fn psi(r: f64, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < LOG_BRANCH {
        -r.ln()
    } else {
        ((1.0 - alpha) * r.ln()).exp_m1() / (alpha * (alpha - 1.0))
    }
}

fn dpsi(r: f64, alpha: f64) -> f64 {
    -r.powf(-alpha) / alpha
}

/// `Ψ(m) − Ψ(m+1) = ∫_m^{m+1} y^{-α}/α dy` without cancellation.
fn potential_step(m: f64, alpha: f64) -> f64 {
    let l = (1.0 / m).ln_1p();
    if (alpha - 1.0).abs() < LOG_BRANCH {
        l
    } else {
        let a = 1.0 - alpha;
        m.powf(a) * (a * l).exp_m1() / (a * alpha)
    }
}

/// `Ψ(m+1) − 2Ψ(m) + Ψ(m−1)` for `m ≥ 2`. Large `m` uses the even Taylor
/// series `2 Σ_k Ψ^{(2k)}(m)/(2k)!` to avoid cancellation.
fn psi_second_difference(m: usize, alpha: f64) -> f64 {
    let mf = m as f64;
    if m < 8 {
        return psi(mf + 1.0, alpha) - 2.0 * psi(mf, alpha) + psi(mf - 1.0, alpha);
    }
    let inv2 = 1.0 / (mf * mf);
    let mut sum = 0.0;
    // coefficient of the k-th term: (1+α)_{2k-2} / (2k)!, times m^{-(2k-2)}
    let mut coef = 0.5;
    let mut power = 1.0;
    for k in 1..=12 {
        sum += coef * power;
        let kf = k as f64;
        coef *= (2.0 * kf - 1.0 + alpha) * (2.0 * kf + alpha) / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        power *= inv2;
    }
    2.0 * mf.powf(-1.0 - alpha) * sum
}

/// Dimensionless 2D weights on the square lattice.
///
/// The far field uses midpoint weights `|j|^{-2-α}` for every offset with
/// `|j| > 1`. The four nearest neighbours carry the 5-point near-field
/// coefficient, chosen so that the `|ξ|²` term of the discrete symbol cancels
/// exactly: `1 − Z(α/2)/4`, with `Z` the (continued) Epstein zeta of `Z²`.
/// The diagonal is the full lattice sum `4 ν + Z(1+α/2) − 4`.
#[derive(Debug, Clone)]
pub struct Weights2d {
    pub alpha: f64,
    pub diagonal: f64,
    pub near: f64,
}

impl Weights2d {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let near = 1.0 - 0.25 * square_lattice_zeta(0.5 * alpha);
        let far_total = square_lattice_zeta(1.0 + 0.5 * alpha) - 4.0;
        Ok(Self { alpha, diagonal: 4.0 * near + far_total, near })
    }

    pub fn offset(&self, dx: i64, dy: i64) -> f64 {
        let q = dx * dx + dy * dy;
        match q {
            0 => self.diagonal,
            1 => self.near,
            _ => (q as f64).powf(-1.0 - 0.5 * self.alpha),
        }
    }
}

/// Symmetric positive-definite discretization of `H_α` on a grid.
#[derive(Debug, Clone)]
pub struct GridOperator {
    pub grid: Grid,
    pub alpha: f64,
    pub constant: KernelConstant,
    n: usize,
    entries: Vec<f64>,
    /// Row sums: the rate of jumps from each cell to the exterior.
    pub killing: Vec<f64>,
}

impl GridOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Row-major `n × n` entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `max |H_ij − H_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Matrix-vector product.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: u.len() });
        }
        Ok(par::map_range(self.n, |i| dot(self.row(i), u)))
    }

    /// The principal submatrix on the given cells, in the given order.
    pub fn principal_submatrix(&self, cells: &[usize]) -> Vec<f64> {
        let m = cells.len();
        let mut out = vec![0.0; m * m];
        for (a, &i) in cells.iter().enumerate() {
            for (b, &j) in cells.iter().enumerate() {
                out[a * m + b] = self.get(i, j);
            }
        }
        out
    }
}

/// Dot product with a fixed eight-lane accumulation order.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

fn check_size(grid: &Grid) -> Result<()> {
    let n = grid.len();
    if n == 0 {
        return Err(Error::EmptyGrid { h: grid.h });
    }
    if n > MAX_CELLS {
        return Err(Error::TooManyCells { n, max: MAX_CELLS });
    }
    Ok(())
}

/// Fills the off-diagonal entries from `offset_weight(i, j)` (dimensionless,
/// nonnegative), sets the common diagonal and derives the killing rates as
/// row sums.
fn build(grid: &Grid, alpha: f64, diagonal: f64, offset_weight: impl Fn(usize, usize) -> f64 + Sync + Send) -> Result<GridOperator> {
    let n = grid.len();
    let constant = kernel_constant(grid.dim(), alpha)?;
    let scale = constant.value * grid.h.powf(-alpha);
    let diag = scale * diagonal;
    let mut entries = vec![0.0; n * n];
    par::for_each_row(&mut entries, n, |i, row| {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { diag } else { -scale * offset_weight(i, j) };
        }
    });
    let killing = par::map_range(n, |i| {
        let row = &entries[i * n..(i + 1) * n];
        let mut s = 0.0;
        for &x in row {
            s += x;
        }
        s
    });
    Ok(GridOperator { grid: grid.clone(), alpha, constant, n, entries, killing })
}

/// Assembles the 1D operator.
pub fn assemble_1d(grid: &Grid, alpha: f64) -> Result<GridOperator> {
    check_alpha(alpha)?;
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: grid.dim() });
    }
    check_size(grid)?;
    let span = grid.extent()[0];
    let w = Weights1d::new(alpha, span)?;
    let table: Vec<f64> = (0..=span).map(|m| w.offset(m)).collect();
    let lat = grid.lattice_coords();
    build(grid, alpha, w.diagonal, |i, j| table[(lat[i][0] - lat[j][0]).unsigned_abs() as usize])
}

/// Assembles the 2D operator.
pub fn assemble_2d(grid: &Grid, alpha: f64) -> Result<GridOperator> {
    check_alpha(alpha)?;
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: grid.dim() });
    }
    check_size(grid)?;
    let w = Weights2d::new(alpha)?;
    let [ex, ey] = grid.extent();
    let mut table = vec![0.0; ex * ey];
    for dx in 0..ex {
        for dy in 0..ey {
            table[dx * ey + dy] = w.offset(dx as i64, dy as i64);
        }
    }
    let lat = grid.lattice_coords();
    build(grid, alpha, w.diagonal, |i, j| {
        let dx = (lat[i][0] - lat[j][0]).unsigned_abs() as usize;
        let dy = (lat[i][1] - lat[j][1]).unsigned_abs() as usize;
        table[dx * ey + dy]
    })
}

/// Assembles the operator for the grid's dimension.
pub fn assemble(grid: &Grid, alpha: f64) -> Result<GridOperator> {
    match grid.dim() {
        1 => assemble_1d(grid, alpha),
        2 => assemble_2d(grid, alpha),
        d => Err(Error::Unsupported(format!("dimension {d}"))),
    }
}

/// Relative error of the free-space 1D operator on `cos(ξx)` at a lattice
/// point. The lattice sum is taken exactly out to `truncation` and replaced
/// by its continuum integral beyond, so the result measures discretization
/// error rather than the cut.
///
/// For `ξ = 0` the exact answer is zero and the absolute output is returned.
pub fn symbol_error(alpha: f64, h: f64, xi: f64, truncation: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(h > 0.0) || !(truncation > h) {
        return Err(Error::InvalidParameter(format!("need 0 < h < truncation, got h = {h}, truncation = {truncation}")));
    }
    let c = kernel_constant(1, alpha)?.value;
    let m_max = (truncation / h).round() as usize;
    let w = Weights1d::new(alpha, m_max)?;
    let mut acc = 0.0;
    for m in 1..=m_max {
        acc += w.offset(m) * 2.0 * (xi * m as f64 * h).cos();
    }
    // beyond M the hat weights integrate y^{-1-α} against the interpolant of
    // cos; on [M, M+1] only the rising half of the hat at M+1 contributes
    let m = m_max as f64;
    let outer = (m + 1.0).powf(-alpha) / alpha;
    let ramp = w.tail(m_max) - outer;
    let far = if xi == 0.0 {
        outer
    } else {
        let k = xi.abs() * h;
        k.powf(alpha) * cos_power_tail(1.0 + alpha, k * (m + 1.0))
    };
    acc += 2.0 * (ramp * (xi * (m + 1.0) * h).cos() + far);
    let value = c * h.powf(-alpha) * (w.diagonal - acc);
    if xi == 0.0 {
        return Ok(value.abs());
    }
    Ok((value / xi.abs().powf(alpha) - 1.0).abs())
}

/// Relative error of the free-space 2D operator on `cos(ξ·x)` at the center
/// of a `(2n+1)²` lattice, with `u` zero outside it.
pub fn symbol_error_2d(alpha: f64, h: f64, xi: [f64; 2], half_width: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if !(h > 0.0) || half_width == 0 {
        return Err(Error::InvalidParameter("need h > 0 and a nonempty lattice".into()));
    }
    let c = kernel_constant(2, alpha)?.value;
    let w = Weights2d::new(alpha)?;
    let n = half_width as i64;
    let rows = par::map_range(2 * half_width + 1, |a| {
        let dx = a as i64 - n;
        let mut s = 0.0;
        for dy in -n..=n {
            if dx == 0 && dy == 0 {
                continue;
            }
            s += w.offset(dx, dy) * (h * (xi[0] * dx as f64 + xi[1] * dy as f64)).cos();
        }
        s
    });
    let acc: f64 = rows.iter().sum();
    let value = c * h.powf(-alpha) * (w.diagonal - acc);
    let k = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    if k == 0.0 {
        return Ok(value.abs());
    }
    Ok((value / k.powf(alpha) - 1.0).abs())
}

/// Dense Cholesky factor `H = L Lᵀ`, stored row-major lower triangle.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let s = a[i * n + j] - dot(ri, rj);
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let yi = y[i] / self.l[i * n + i];
            y[i] = yi;
            for (yk, l) in y[..i].iter_mut().zip(&self.l[i * n..i * n + i]) {
                *yk -= l * yi;
            }
        }
        y
    }
}

/// Solves `H u = rhs` (the discrete 0-resolvent) by Cholesky with iterative
/// refinement to a relative residual of `1e-10`.
pub fn solve_linear(op: &GridOperator, rhs: &[f64]) -> Result<Vec<f64>> {
    let factor = Cholesky::factor(op.entries(), op.n())?;
    solve_with(op, &factor, rhs)
}

pub fn solve_with(op: &GridOperator, factor: &Cholesky, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != op.n() {
        return Err(Error::DimensionMismatch { expected: op.n(), got: rhs.len() });
    }
    let norm_b = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; op.n()]);
    }
    let mut u = factor.solve(rhs);
    let mut residual = f64::INFINITY;
    for _ in 0..4 {
        let hu = op.apply(&u)?;
        let r: Vec<f64> = rhs.iter().zip(&hu).map(|(b, x)| b - x).collect();
        residual = r.iter().map(|x| x * x).sum::<f64>().sqrt() / norm_b;
        if residual <= 1e-12 {
            return Ok(u);
        }
        let du = factor.solve(&r);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
    }
    if residual <= 1e-10 {
        Ok(u)
    } else {
        Err(Error::SolveDidNotConverge { residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use approx::assert_relative_eq;

    /// Symbol oracle: `C ∫ (1 − cos ξy) |y|^{-1-α} dy` over the real line by
    /// substitution and composite Gauss–Legendre panels.
    fn symbol_quadrature_1d(alpha: f64, c: f64, xi: f64) -> f64 {
        // ∫_0^∞ (1−cos t) t^{-1-α} dt, panels on [0,1] in t = s^k to tame the
        // endpoint, then oscillatory panels of width π with a tail estimate
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189),
            (-0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.0, 0.568_888_888_888_889),
            (0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.906_179_845_938_664, 0.236_926_885_056_189),
        ];
        let f = |t: f64| (2.0 * (0.5 * t).sin().powi(2)) * t.powf(-1.0 - alpha);
        let panel = |a: f64, b: f64, g: &dyn Fn(f64) -> f64| {
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            nodes.iter().map(|(x, w)| w * g(m + r * x)).sum::<f64>() * r
        };
        let mut total = 0.0;
        // geometric panels towards zero
        let mut b = 1.0;
        for _ in 0..200 {
            let a = b * 0.7;
            total += panel(a, b, &f);
            b = a;
        }
        total += b.powf(2.0 - alpha) / (2.0 * (2.0 - alpha));
        let upper = 4000.0 * PI;
        let mut a = 1.0;
        while a < upper {
            let b = (a + 0.25).min(upper);
            total += panel(a, b, &f);
            a = b;
        }
        total += upper.powf(-alpha) / alpha;
        2.0 * c * total * xi.abs().powf(alpha)
    }

    #[test]
    fn kernel_constant_reproduces_symbol() {
        let c11 = kernel_constant(1, 1.0).unwrap().value;
        assert_relative_eq!(c11, 1.0 / PI, max_relative = 1e-14);
        for &alpha in &[0.5, 1.0, 1.5] {
            let c = kernel_constant(1, alpha).unwrap().value;
            let s = symbol_quadrature_1d(alpha, c, 1.0);
            assert_relative_eq!(s, 1.0, max_relative = 2e-5);
        }
        let c21 = kernel_constant(2, 1.0).unwrap().value;
        assert_relative_eq!(c21, 1.0 / (2.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(c21, gamma(1.5) / PI.powf(1.5), max_relative = 1e-14);
    }

    #[test]
    fn kernel_constant_near_endpoints() {
        for &a in &[0.001, 1.999] {
            let v = kernel_constant(1, a).unwrap().value;
            assert!(v.is_finite() && v > 0.0);
        }
        assert!(kernel_constant(1, 0.0).is_err());
        assert!(kernel_constant(1, 2.0).is_err());
    }

    #[test]
    fn one_d_weights_are_nonnegative_and_sum_to_the_diagonal() {
        for &alpha in &[0.1, 0.5, 1.0 - 1e-10, 1.0, 1.0 + 1e-6, 1.5, 1.95] {
            let w = Weights1d::new(alpha, 2000).unwrap();
            assert!((1..=2000).all(|m| w.offset(m) > 0.0), "alpha {alpha}");
            let sum: f64 = (1..=2000).map(|m| w.offset(m)).sum::<f64>() + w.tail(2000);
            // the log branch is exact only at α = 1 itself
            let tol = if (alpha - 1.0f64).abs() < 1e-6 { 1e-9 } else { 1e-12 };
            assert_relative_eq!(2.0 * sum, w.diagonal, max_relative = tol);
        }
    }

    #[test]
    fn second_difference_series_matches_direct_formula() {
        for &alpha in &[0.3, 1.0, 1.7] {
            for m in 8..12 {
                let mf = m as f64;
                let direct = psi(mf + 1.0, alpha) - 2.0 * psi(mf, alpha) + psi(mf - 1.0, alpha);
                assert_relative_eq!(psi_second_difference(m, alpha), direct, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn weights_are_continuous_through_the_log_branch() {
        let a = Weights1d::new(1.0, 50).unwrap();
        let b = Weights1d::new(1.0 + 2e-9, 50).unwrap();
        for m in 1..=50 {
            assert_relative_eq!(a.offset(m), b.offset(m), max_relative = 1e-7);
        }
    }

    #[test]
    fn single_cell_operator_is_its_killing_rate() {
        let pixel = crate::domain::Raster::new(0.5, [0.0, 0.0], 1, 1, vec![true]).unwrap();
        let grid = Domain::new(crate::domain::Shape::Raster(pixel)).unwrap().rasterize(0.5).unwrap();
        assert_eq!(grid.len(), 1);
        let op = assemble_2d(&grid, 1.0).unwrap();
        assert_eq!(op.n(), 1);
        assert_relative_eq!(op.get(0, 0), op.killing[0]);
        let w = Weights2d::new(1.0).unwrap();
        let expected = op.constant.value * grid.h.powf(-1.0) * w.diagonal;
        assert_relative_eq!(op.killing[0], expected, max_relative = 1e-15);
    }

    #[test]
    fn apply_checks_dimensions() {
        let grid = Domain::interval(0.0, 1.0).unwrap().rasterize(0.1).unwrap();
        let op = assemble_1d(&grid, 0.7).unwrap();
        assert!(op.apply(&[1.0]).is_err());
        assert!(op.apply(&vec![0.0; op.n()]).unwrap().iter().all(|&x| x == 0.0));
        let ones = op.apply(&vec![1.0; op.n()]).unwrap();
        for (a, b) in ones.iter().zip(&op.killing) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn sixteen_cell_square_structure() {
        let grid = Domain::rect([0.0, 0.0], [1.0, 1.0]).unwrap().rasterize(0.25).unwrap();
        assert_eq!(grid.len(), 16);
        let op = assemble_2d(&grid, 1.2).unwrap();
        assert_eq!(op.asymmetry(), 0.0);
        for i in 0..16 {
            assert!(op.get(i, i) > 0.0);
            assert!(op.killing[i] > 0.0);
            for j in 0..16 {
                if i != j {
                    assert!(op.get(i, j) < 0.0);
                }
            }
        }
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let g1 = Domain::interval(0.0, 1.0).unwrap().rasterize(0.1).unwrap();
        assert!(assemble_2d(&g1, 1.0).is_err());
        assert!(assemble_1d(&g1, 2.0).is_err());
    }

    #[test]
    fn solve_recovers_ones_from_killing() {
        let grid = Domain::disk([0.0, 0.0], 1.0).unwrap().rasterize(0.15).unwrap();
        let op = assemble_2d(&grid, 0.8).unwrap();
        let u = solve_linear(&op, &op.killing).unwrap();
        assert!(u.iter().all(|x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert!(matches!(Cholesky::factor(&a, 2), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn constants_are_annihilated() {
        for alpha in [0.3, 1.0, 1.7] {
            let e = symbol_error(alpha, 1.0 / 64.0, 0.0, 16.0).unwrap();
            assert!(e < 1e-8 * 64f64.powf(alpha), "alpha {alpha}: {e}");
        }
    }

    #[test]
    fn symbol_converges_at_order_two_minus_alpha() {
        for alpha in [0.5, 1.0, 1.5] {
            for xi in [1.0, 2.0] {
                let e = |k: i32| symbol_error(alpha, 2f64.powi(-k), xi, 64.0).unwrap();
                let ratio = e(8) / e(9);
                assert!(ratio >= 0.95 * 2f64.powf(2.0 - alpha), "alpha {alpha}, xi {xi}: {ratio}");
            }
        }
    }

    #[test]
    fn truncation_radius_does_not_matter() {
        let a = symbol_error(0.5, 1.0 / 64.0, 1.0, 8.0).unwrap();
        let b = symbol_error(0.5, 1.0 / 64.0, 1.0, 64.0).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}
