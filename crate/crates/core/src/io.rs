//! Binary operator files and CSV tables.
//!
//! Operator layout, all little-endian: magic `FSL1`, `d: u32`, `α: f64`,
//! `N: u64`, `h: f64`, then the lower triangle row by row (`N(N+1)/2`
//! values), then the `N` killing rates.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::assembly::GridOperator;
use crate::domain::Domain;
use crate::eigen::{ExtrapolatedValue, Spectrum};
use crate::error::{Error, Result};
use crate::laws::AlphaSweep;
use crate::paths::SurvivalEstimate;

const MAGIC: &[u8; 4] = b"FSL1";

/// Formats like C's `%.17g`: enough digits to round-trip any `f64`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// An operator read back from disk. The file does not carry the domain, so
/// this holds the matrix and its metadata only.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredOperator {
    pub dim: u32,
    pub alpha: f64,
    pub h: f64,
    pub n: usize,
    /// Row-major lower triangle.
    pub lower: Vec<f64>,
    pub killing: Vec<f64>,
}

impl StoredOperator {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.lower[r * (r + 1) / 2 + c]
    }

    /// Full symmetric matrix, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.get(i, j);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }
}

pub fn write_operator<W: Write>(op: &GridOperator, mut w: W) -> Result<()> {
    let n = op.n();
    w.write_all(MAGIC)?;
    w.write_all(&(op.grid.dim() as u32).to_le_bytes())?;
    w.write_all(&op.alpha.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&op.h().to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * n);
    for i in 0..n {
        buf.clear();
        for &v in &op.row(i)[..=i] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    buf.clear();
    for &v in &op.killing {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn read_array<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("operator file is truncated".into()),
        _ => Error::Io(e),
    })?;
    Ok(b)
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; 8 * count];
    r.read_exact(&mut bytes).map_err(|_| Error::Format("operator file is truncated".into()))?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

pub fn read_operator<R: Read>(mut r: R) -> Result<StoredOperator> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Format("not an FSL1 operator file".into()));
    }
    let dim = u32::from_le_bytes(read_array(&mut r)?);
    let alpha = f64::from_le_bytes(read_array(&mut r)?);
    let n = u64::from_le_bytes(read_array(&mut r)?);
    let h = f64::from_le_bytes(read_array(&mut r)?);
    if !(1..=2).contains(&dim) || n > crate::assembly::MAX_CELLS as u64 {
        return Err(Error::Format(format!("implausible header: d = {dim}, N = {n}")));
    }
    let n = n as usize;
    let lower = read_f64s(&mut r, n * (n + 1) / 2)?;
    let killing = read_f64s(&mut r, n)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after operator".into()));
    }
    Ok(StoredOperator { dim, alpha, h, n, lower, killing })
}

/// Columns `i,lambda,h,alpha,domain`, with `i` one-based.
pub fn write_spectrum_csv<W: Write>(s: &Spectrum, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "lambda", "h", "alpha", "domain"])?;
    let domain = s.domain.to_string();
    for (i, &l) in s.eigenvalues.iter().enumerate() {
        out.write_record([(i + 1).to_string(), fmt_g17(l), fmt_g17(s.h), fmt_g17(s.alpha), domain.clone()])?;
    }
    out.flush()?;
    Ok(())
}

fn join(xs: impl Iterator<Item = f64>) -> String {
    xs.map(fmt_g17).collect::<Vec<_>>().join(";")
}

fn split(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|t| t.parse().map_err(|_| Error::Format(format!("bad number {t:?}")))).collect()
}

/// One row per `(α, i)`: `domain,alpha,i,lambda,order,reliable,h,raw`, where
/// `h` and `raw` list the grid spacings and finite-h values, `;`-separated.
pub fn write_sweep_csv<W: Write>(s: &AlphaSweep, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["domain", "alpha", "i", "lambda", "order", "reliable", "h", "raw"])?;
    let domain = s.domain.to_string();
    for (a, &alpha) in s.alphas.iter().enumerate() {
        for (i, v) in s.values[a].iter().enumerate() {
            out.write_record([
                domain.clone(),
                fmt_g17(alpha),
                (i + 1).to_string(),
                fmt_g17(v.value),
                fmt_g17(v.observed_order),
                v.reliable.to_string(),
                join(v.inputs.iter().map(|p| p.0)),
                join(v.inputs.iter().map(|p| p.1)),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct SweepRow {
    domain: String,
    alpha: f64,
    i: usize,
    lambda: f64,
    order: f64,
    reliable: bool,
    h: String,
    raw: String,
}

/// Reads a table written by [`write_sweep_csv`]. Rows must be grouped by α
/// (ascending) with `i = 1..k` inside each group.
pub fn read_sweep_csv<R: Read>(r: R) -> Result<AlphaSweep> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(r).deserialize() {
        let row: SweepRow = rec?;
        rows.push(row);
    }
    let first = rows.first().ok_or_else(|| Error::Format("sweep table has no rows".into()))?;
    let domain: Domain = first.domain.parse()?;
    let dname = first.domain.clone();
    let mut alphas: Vec<f64> = Vec::new();
    let mut values: Vec<Vec<ExtrapolatedValue>> = Vec::new();
    let mut h_schedule = Vec::new();
    for row in rows {
        if row.domain != dname {
            return Err(Error::Format(format!("mixed domains {dname:?} and {:?}", row.domain)));
        }
        if alphas.last() != Some(&row.alpha) {
            if alphas.last().is_some_and(|&a| a >= row.alpha) {
                return Err(Error::Format("alphas are not ascending".into()));
            }
            alphas.push(row.alpha);
            values.push(Vec::new());
        }
        let group = values.last_mut().expect("pushed above");
        if row.i != group.len() + 1 {
            return Err(Error::Format(format!("row for alpha = {} has i = {}, expected {}", row.alpha, row.i, group.len() + 1)));
        }
        let hs = split(&row.h)?;
        let raw = split(&row.raw)?;
        if hs.len() != raw.len() {
            return Err(Error::Format("h and raw lists differ in length".into()));
        }
        if h_schedule.is_empty() {
            h_schedule = hs.clone();
        }
        group.push(ExtrapolatedValue {
            value: row.lambda,
            observed_order: row.order,
            reliable: row.reliable,
            inputs: hs.into_iter().zip(raw).collect(),
        });
    }
    let k = values[0].len();
    if values.iter().any(|g| g.len() != k) {
        return Err(Error::Format("alphas carry different numbers of eigenvalues".into()));
    }
    Ok(AlphaSweep { domain, alphas, k, values, h_schedule })
}

/// Columns `t,p_hat,se,alive,censored`; `censored` repeats the number of
/// paths still inside at the final time.
pub fn write_survival_csv<W: Write>(s: &SurvivalEstimate, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "p_hat", "se", "alive", "censored"])?;
    for j in 0..s.t.len() {
        out.write_record([fmt_g17(s.t[j]), fmt_g17(s.p_hat[j]), fmt_g17(s.se[j]), s.alive[j].to_string(), s.censored.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
