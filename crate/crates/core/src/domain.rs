//! Finite-measure domains and their cell-centered lattices.
//!
//! A cell belongs to a [`Grid`] when its center lies strictly inside the
//! domain, so the union of cells is an inner approximation of `D`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// Boolean image on a square pixel lattice, origin at the lower-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub h: f64,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    /// Row-major with `y` as the slow index; `inside[iy * nx + ix]`.
    pub inside: Vec<bool>,
    /// Source path, kept only for display.
    pub source: String,
    /// Distance from each inside pixel center to the nearest outside pixel
    /// center, minus half a pixel diagonal. Zero for outside pixels.
    clearance: Vec<f64>,
}

impl Raster {
    pub fn new(h: f64, origin: [f64; 2], nx: usize, ny: usize, inside: Vec<bool>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidDomain(format!("raster cell size {h} must be positive")));
        }
        if nx == 0 || ny == 0 || inside.len() != nx * ny {
            return Err(Error::InvalidDomain(format!("raster of {nx}x{ny} pixels with {} flags", inside.len())));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::InvalidDomain("raster has no inside pixel".into()));
        }
        let clearance = clearance_map(nx, ny, &inside, h);
        Ok(Self { h, origin, nx, ny, inside, source: String::new(), clearance })
    }

    /// Reads a binary PGM (P5). Nonzero pixels are inside; the first image
    /// row is the top of the domain.
    pub fn from_pgm(path: &Path, h: f64) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let (nx, ny, pixels) = parse_pgm(&bytes)?;
        let mut inside = vec![false; nx * ny];
        for row in 0..ny {
            let iy = ny - 1 - row;
            for ix in 0..nx {
                inside[iy * nx + ix] = pixels[row * nx + ix] != 0;
            }
        }
        let mut raster = Self::new(h, [0.0, 0.0], nx, ny, inside)?;
        raster.source = path.display().to_string();
        Ok(raster)
    }

    fn pixel_of(&self, x: &[f64]) -> Option<usize> {
        let fx = (x[0] - self.origin[0]) / self.h;
        let fy = (x[1] - self.origin[1]) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        (ix < self.nx && iy < self.ny).then_some(iy * self.nx + ix)
    }

    fn count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}

pub(crate) fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>)> {
    let bad = |m: &str| Error::Format(format!("PGM: {m}"));
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos]).ok().and_then(|s| s.parse().ok()).ok_or_else(|| bad("malformed header number"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let [nx, ny, maxval] = fields;
    if nx == 0 || ny == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("invalid dimensions or maxval"));
    }
    let wide = maxval > 255;
    let need = nx * ny * if wide { 2 } else { 1 };
    let data = bytes.get(pos..pos + need).ok_or_else(|| bad("truncated pixel data"))?;
    let pixels = if wide {
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        data.iter().map(|&b| b as u16).collect()
    };
    Ok((nx, ny, pixels))
}

/// Squared Euclidean distance transform of a 1D sampled function
/// (Felzenszwalb–Huttenlocher lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

fn clearance_map(nx: usize, ny: usize, inside: &[bool], h: f64) -> Vec<f64> {
    // pad by one outside ring so the image border counts as exterior
    let (px, py) = (nx + 2, ny + 2);
    let big = ((px * px + py * py) as f64) * 4.0;
    let mut grid = vec![0.0; px * py];
    for iy in 0..ny {
        for ix in 0..nx {
            if inside[iy * nx + ix] {
                grid[(iy + 1) * px + ix + 1] = big;
            }
        }
    }
    let mut col = vec![0.0; py];
    let mut tmp = vec![0.0; py.max(px)];
    for ix in 0..px {
        for iy in 0..py {
            col[iy] = grid[iy * px + ix];
        }
        edt_1d(&col, &mut tmp[..py]);
        for iy in 0..py {
            grid[iy * px + ix] = tmp[iy];
        }
    }
    for iy in 0..py {
        let row = grid[iy * px..(iy + 1) * px].to_vec();
        edt_1d(&row, &mut tmp[..px]);
        grid[iy * px..(iy + 1) * px].copy_from_slice(&tmp[..px]);
    }
    let half_diag = 0.5 * std::f64::consts::SQRT_2;
    let mut out = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            if inside[iy * nx + ix] {
                let d = grid[(iy + 1) * px + ix + 1].sqrt();
                out[iy * nx + ix] = (d - half_diag).max(0.0) * h;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Interval { a: f64, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Raster(Raster),
}

/// A validated domain of finite, positive Lebesgue measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match &shape {
            Shape::Interval { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidDomain(format!("interval ({a}, {b}) is degenerate")));
                }
            }
            Shape::Box { lo, hi } => {
                if lo.len() != hi.len() || !(1..=2).contains(&lo.len()) {
                    return Err(Error::InvalidDomain("box corners must both have 1 or 2 coordinates".into()));
                }
                if !finite(lo) || !finite(hi) || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::InvalidDomain(format!("box {lo:?}..{hi:?} is degenerate")));
                }
            }
            Shape::Ball { center, radius } => {
                if !(1..=2).contains(&center.len()) || !finite(center) {
                    return Err(Error::InvalidDomain("ball center must have 1 or 2 finite coordinates".into()));
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidDomain(format!("ball radius {radius} must be positive")));
                }
            }
            Shape::Raster(_) => {}
        }
        Ok(Self { shape })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Interval { a, b })
    }

    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::new(Shape::Box { lo: lo.to_vec(), hi: hi.to_vec() })
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center: center.to_vec(), radius })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Interval { .. } => 1,
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::Raster(_) => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => b - a,
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Shape::Ball { center, radius } => match center.len() {
                1 => 2.0 * radius,
                _ => PI * radius * radius,
            },
            Shape::Raster(r) => r.count_inside() as f64 * r.h * r.h,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::Interval { a, b } => (vec![*a], vec![*b]),
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Ball { center, radius } => (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect()),
            Shape::Raster(r) => (r.origin.to_vec(), vec![r.origin[0] + r.nx as f64 * r.h, r.origin[1] + r.ny as f64 * r.h]),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => 2.0 * radius,
            _ => {
                let (lo, hi) = self.bounding_box();
                lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
            }
        }
    }

    /// Radius of the largest inscribed ball. Exact for the primitive shapes;
    /// a lower bound for rasters.
    pub fn inner_radius(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => 0.5 * (b - a),
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).fold(f64::INFINITY, f64::min),
            Shape::Ball { radius, .. } => *radius,
            Shape::Raster(r) => r.clearance.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Center of the largest inscribed ball (for rasters, of the pixel with
    /// the greatest clearance).
    pub fn incenter(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Interval { a, b } => vec![0.5 * (a + b)],
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            Shape::Ball { center, .. } => center.clone(),
            Shape::Raster(r) => {
                let best = (0..r.clearance.len()).max_by(|&i, &j| r.clearance[i].total_cmp(&r.clearance[j]).then(j.cmp(&i))).unwrap_or(0);
                let (ix, iy) = (best % r.nx, best / r.nx);
                vec![r.origin[0] + (ix as f64 + 0.5) * r.h, r.origin[1] + (iy as f64 + 0.5) * r.h]
            }
        }
    }

    /// Strict membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Interval { a, b } => *a < x[0] && x[0] < *b,
            Shape::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l < v && v < h),
            Shape::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum();
                r2 < radius * radius
            }
            Shape::Raster(r) => r.pixel_of(x).is_some_and(|p| r.inside[p]),
        }
    }

    /// Euclidean distance from an interior point to the boundary. Exact for
    /// the primitive shapes; the pixel clearance for rasters.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(match &self.shape {
            Shape::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Shape::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| (v - l).min(h - v)).fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => radius - x.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum::<f64>().sqrt(),
            Shape::Raster(r) => r.clearance[r.pixel_of(x).expect("contained point has a pixel")],
        })
    }

    /// The ball (an interval in 1D) centered at the origin with the same
    /// measure.
    pub fn schwarz_ball(&self) -> Domain {
        let m = self.measure();
        let shape = match self.dim() {
            1 => Shape::Interval { a: -0.5 * m, b: 0.5 * m },
            _ => match &self.shape {
                Shape::Ball { radius, .. } => Shape::Ball { center: vec![0.0, 0.0], radius: *radius },
                _ => Shape::Ball { center: vec![0.0, 0.0], radius: (m / PI).sqrt() },
            },
        };
        Domain { shape }
    }

    /// The image of the domain under `x -> c x`.
    pub fn scaled(&self, c: f64) -> Result<Domain> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor {c} must be positive")));
        }
        let scale = |v: &[f64]| v.iter().map(|x| c * x).collect::<Vec<_>>();
        let shape = match &self.shape {
            Shape::Interval { a, b } => Shape::Interval { a: c * a, b: c * b },
            Shape::Box { lo, hi } => Shape::Box { lo: scale(lo), hi: scale(hi) },
            Shape::Ball { center, radius } => Shape::Ball { center: scale(center), radius: c * radius },
            Shape::Raster(r) => {
                let mut s = r.clone();
                s.h *= c;
                s.origin = [c * r.origin[0], c * r.origin[1]];
                s.clearance.iter_mut().for_each(|d| *d *= c);
                Shape::Raster(s)
            }
        };
        Domain::new(shape)
    }

    /// Lays a lattice of spacing `h` over the bounding box and keeps the
    /// cells whose centers are inside. Primitive shapes get the smallest even
    /// number of cells per axis that covers the box, centered; rasters start
    /// at the image corner.
    pub fn rasterize(&self, h: f64) -> Result<Grid> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("grid spacing {h} must be positive")));
        }
        if h >= self.diameter() {
            return Err(Error::EmptyGrid { h });
        }
        let d = self.dim();
        let (lo, hi) = self.bounding_box();
        let mut origin = [0.0; 2];
        let mut extent = [1usize; 2];
        let raster = matches!(self.shape, Shape::Raster(_));
        for k in 0..d {
            let span = hi[k] - lo[k];
            if raster {
                // anchored at the image corner so the native pixels come back
                extent[k] = ((span / h) + 1e-9).floor() as usize;
                origin[k] = lo[k];
            } else {
                // an even count keeps the midpoint on a cell corner, so the
                // lattice at h/2 splits every cell at h into 2^d children
                let n = 2 * ((0.5 * span / h) - 1e-9).ceil().max(1.0) as usize;
                extent[k] = n;
                origin[k] = 0.5 * (lo[k] + hi[k]) - 0.5 * n as f64 * h;
            }
        }
        let mut lattice = Vec::new();
        let mut centers = Vec::new();
        let mut slots = vec![u32::MAX; extent[0] * extent[1]];
        let mut p = [0.0; 2];
        for i in 0..extent[0] {
            for j in 0..extent[1] {
                p[0] = origin[0] + (i as f64 + 0.5) * h;
                p[1] = origin[1] + (j as f64 + 0.5) * h;
                if self.contains(&p[..d]) {
                    slots[i * extent[1] + j] = lattice.len() as u32;
                    lattice.push([i as i64, j as i64]);
                    centers.extend_from_slice(&p[..d]);
                }
            }
        }
        if lattice.is_empty() {
            return Err(Error::EmptyGrid { h });
        }
        Ok(Grid { h, dim: d, origin, extent, lattice, centers, slots, domain: self.clone() })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Interval { a, b } => write!(f, "interval:{a},{b}"),
            Shape::Box { lo, hi } => {
                let v: Vec<String> = lo.iter().chain(hi).map(|x| x.to_string()).collect();
                write!(f, "box:{}", v.join(","))
            }
            Shape::Ball { center, radius } => {
                let v: Vec<String> = center.iter().chain(std::iter::once(radius)).map(|x| x.to_string()).collect();
                write!(f, "ball:{}", v.join(","))
            }
            Shape::Raster(r) => write!(f, "raster:{},{}", r.source, r.h),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    /// Parses `interval:a,b`, `box:x0,y0,x1,y1`, `ball:cx,cy,r` (or `ball:c,r`
    /// in 1D) and `raster:path.pgm,h`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::InvalidDomain(format!("`{s}`: expected kind:params")))?;
        let nums = |rest: &str| -> Result<Vec<f64>> {
            rest.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidDomain(format!("`{s}`: malformed number `{t}`"))))
                .collect()
        };
        match kind.trim() {
            "interval" => match nums(rest)?[..] {
                [a, b] => Domain::interval(a, b),
                _ => Err(Error::InvalidDomain(format!("`{s}`: interval takes a,b"))),
            },
            "box" => match nums(rest)?[..] {
                [x0, y0, x1, y1] => Domain::rect([x0, y0], [x1, y1]),
                [a, b] => Domain::new(Shape::Box { lo: vec![a], hi: vec![b] }),
                _ => Err(Error::InvalidDomain(format!("`{s}`: box takes x0,y0,x1,y1"))),
            },
            "ball" => match nums(rest)?[..] {
                [cx, cy, r] => Domain::disk([cx, cy], r),
                [c, r] => Domain::new(Shape::Ball { center: vec![c], radius: r }),
                _ => Err(Error::InvalidDomain(format!("`{s}`: ball takes cx,cy,r"))),
            },
            "raster" => {
                let (path, h) = rest.rsplit_once(',').ok_or_else(|| Error::InvalidDomain(format!("`{s}`: raster takes path,h")))?;
                let h: f64 = h.trim().parse().map_err(|_| Error::InvalidDomain(format!("`{s}`: malformed number `{h}`")))?;
                let mut raster = Raster::from_pgm(Path::new(path), h)?;
                raster.source = path.to_string();
                Domain::new(Shape::Raster(raster))
            }
            other => Err(Error::InvalidDomain(format!("unknown domain kind `{other}`"))),
        }
    }
}

/// Interior cells of a domain on a cell-centered lattice of spacing `h`.
///
/// Cells are ordered lexicographically by lattice coordinate, first axis
/// slowest.
#[derive(Debug, Clone)]
pub struct Grid {
    pub h: f64,
    dim: usize,
    origin: [f64; 2],
    extent: [usize; 2],
    lattice: Vec<[i64; 2]>,
    centers: Vec<f64>,
    slots: Vec<u32>,
    domain: Domain,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Lattice extent per axis (1 for the unused second axis in 1D).
    pub fn extent(&self) -> [usize; 2] {
        self.extent
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn lattice(&self, i: usize) -> [i64; 2] {
        self.lattice[i]
    }

    pub fn lattice_coords(&self) -> &[[i64; 2]] {
        &self.lattice
    }

    /// Ordinal of the cell at lattice coordinate `k`, if it is interior.
    pub fn ordinal(&self, k: [i64; 2]) -> Option<usize> {
        if k[0] < 0 || k[1] < 0 || k[0] as usize >= self.extent[0] || k[1] as usize >= self.extent[1] {
            return None;
        }
        let s = self.slots[k[0] as usize * self.extent[1] + k[1] as usize];
        (s != u32::MAX).then_some(s as usize)
    }

    /// Ordinal of the cell whose center is `x`, matching to a small fraction
    /// of `h`.
    pub fn ordinal_of_center(&self, x: &[f64]) -> Option<usize> {
        let mut k = [0i64; 2];
        for a in 0..self.dim {
            let f = (x[a] - self.origin[a]) / self.h - 0.5;
            let r = f.round();
            if (f - r).abs() > 1e-6 {
                return None;
            }
            k[a] = r as i64;
        }
        self.ordinal(k)
    }

    /// For each cell of `self`, the ordinal of the cell with the same center
    /// in `outer`; `None` unless every cell has a match.
    pub fn embedding_into(&self, outer: &Grid) -> Option<Vec<usize>> {
        if self.dim != outer.dim || (self.h - outer.h).abs() > 1e-12 * self.h {
            return None;
        }
        (0..self.len()).map(|i| outer.ordinal_of_center(self.center(i))).collect()
    }

    /// Index of the interior cell nearest to `x` (linear scan).
    pub fn nearest_cell(&self, x: &[f64]) -> usize {
        (0..self.len())
            .min_by(|&i, &j| {
                let di: f64 = self.center(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                let dj: f64 = self.center(j).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                di.total_cmp(&dj)
            })
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_basics() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(d.measure(), 2.0);
        assert_eq!(d.inner_radius(), 1.0);
        assert_eq!(d.boundary_distance(&[0.5]).unwrap(), 0.5);
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::interval(2.0, 1.0).is_err());
    }

    #[test]
    fn box_basics() {
        let d = Domain::rect([0.0, 0.0], [PI, PI]).unwrap();
        assert_relative_eq!(d.measure(), PI * PI);
        assert_relative_eq!(d.inner_radius(), PI / 2.0);
        assert_eq!(d.boundary_distance(&[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(Domain::rect([0.0, 0.0], [2.0, 4.0]).unwrap().inner_radius(), 1.0);
        assert!(Domain::rect([0.0, 0.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn ball_basics() {
        let d = Domain::disk([0.0, 0.0], 2.0).unwrap();
        assert_eq!(d.inner_radius(), 2.0);
        assert_relative_eq!(d.boundary_distance(&[0.0, 1.5]).unwrap(), 0.5);
        assert!(d.boundary_distance(&[0.0, 2.5]).is_err());
        assert!(Domain::disk([0.0, 0.0], 0.0).is_err());
        assert!(Domain::disk([0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn rasterize_unit_interval() {
        let g = Domain::interval(0.0, 1.0).unwrap().rasterize(0.25).unwrap();
        let c: Vec<f64> = (0..g.len()).map(|i| g.center(i)[0]).collect();
        assert_eq!(c, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn rasterize_unit_disk_counts_twelve() {
        // brute-force enumeration of the half-lattice centers in the disk
        let mut expected = 0;
        for i in 0..4 {
            for j in 0..4 {
                let (x, y) = (-0.75 + 0.5 * i as f64, -0.75 + 0.5 * j as f64);
                if x * x + y * y < 1.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 12);
        let g = Domain::disk([0.0, 0.0], 1.0).unwrap().rasterize(0.5).unwrap();
        assert_eq!(g.len(), expected);
    }

    #[test]
    fn rasterize_too_coarse_fails() {
        assert!(matches!(Domain::interval(0.0, 1.0).unwrap().rasterize(2.0), Err(Error::EmptyGrid { .. })));
    }

    #[test]
    fn grid_index_is_a_bijection() {
        let g = Domain::disk([0.3, -0.2], 1.0).unwrap().rasterize(0.1).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.ordinal(g.lattice(i)), Some(i));
            assert!(g.domain().contains(g.center(i)));
        }
        let mut sorted = g.lattice_coords().to_vec();
        sorted.sort();
        assert_eq!(sorted, g.lattice_coords());
    }

    #[test]
    fn schwarz_ball_examples() {
        let b = Domain::rect([0.0, 0.0], [2.0, 2.0]).unwrap().schwarz_ball();
        match b.shape() {
            Shape::Ball { radius, .. } => assert_relative_eq!(*radius, 2.0 / PI.sqrt(), max_relative = 1e-15),
            s => panic!("{s:?}"),
        }
        assert_relative_eq!(b.measure(), 4.0, max_relative = 1e-12);
        let i = Domain::interval(0.0, 2.0).unwrap().schwarz_ball();
        assert_eq!(i, Domain::interval(-1.0, 1.0).unwrap());
        let same = Domain::disk([0.0, 0.0], 3.0).unwrap();
        assert_eq!(same.schwarz_ball(), same);
    }

    #[test]
    fn nested_grids_embed() {
        let outer = Domain::interval(-1.0, 1.0).unwrap().rasterize(0.125).unwrap();
        let inner = Domain::interval(-0.5, 0.5).unwrap().rasterize(0.125).unwrap();
        let map = inner.embedding_into(&outer).unwrap();
        assert_eq!(map.len(), 8);
        assert_eq!(map[0], 4);
        assert!(outer.embedding_into(&inner).is_none());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["interval:-1,1", "box:0,0,2,3", "ball:0,0,1.5", "ball:0.5,2"] {
            let d: Domain = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("circle:0,0,1".parse::<Domain>().is_err());
        assert!("interval:a,1".parse::<Domain>().is_err());
    }

    fn write_pgm(rows: &[&str]) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "P5\n# test\n{} {}\n255\n", rows[0].len(), rows.len()).unwrap();
        for r in rows {
            let bytes: Vec<u8> = r.bytes().map(|c| if c == b'#' { 255 } else { 0 }).collect();
            f.write_all(&bytes).unwrap();
        }
        f.flush().unwrap();
        f
    }

    #[test]
    fn raster_from_pgm() {
        let f = write_pgm(&[".....", ".###.", ".###.", ".###.", "....."]);
        let spec = format!("raster:{},0.1", f.path().display());
        let d: Domain = spec.parse().unwrap();
        assert_relative_eq!(d.measure(), 9.0 * 0.01, max_relative = 1e-12);
        // center pixel is two pixels from the exterior: (2 - √2/2)·h
        assert_relative_eq!(d.inner_radius(), (2.0 - 0.5 * 2f64.sqrt()) * 0.1, max_relative = 1e-12);
        assert!(d.inner_radius() <= 0.15);
        let g = d.rasterize(0.1).unwrap();
        assert_eq!(g.len(), 9);
        // nearest-neighbor resampling at half the pixel size
        assert_eq!(d.rasterize(0.05).unwrap().len(), 36);
    }

    #[test]
    fn pgm_rejects_garbage() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x01").is_err());
    }
}
