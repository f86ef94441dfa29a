//! Weighted point sets and the geometric primitives built on them.
//!
//! Points are stored row-major in one flat buffer so that per-point slices
//! are contiguous. The text format is
//!
//! ```text
//! n d
//! w x1 x2 ... xd      (n lines)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{AlignError, Result};

/// `n` points in `R^d` with nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    total_weight: f64,
}

impl WeightedPointSet {
    /// Builds a set from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(AlignError::InvalidInput("dimension must be at least 1".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(AlignError::InvalidInput(format!(
                "{} coordinates do not form {} points of dimension {}",
                coords.len(),
                weights.len(),
                dim
            )));
        }
        if weights.is_empty() {
            return Err(AlignError::InvalidInput("point set is empty".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(AlignError::InvalidInput(format!("non-finite coordinate {c}")));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(AlignError::InvalidInput(format!("invalid weight {w}")));
        }
        let total_weight: f64 = weights.iter().sum();
        if total_weight <= 0.0 {
            return Err(AlignError::InvalidInput("total weight must be positive".into()));
        }
        Ok(Self { dim, coords, weights, total_weight })
    }

    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.len() != weights.len() {
            return Err(AlignError::InvalidInput(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(AlignError::DimensionMismatch { expected: dim, found: p.len() });
        }
        Self::from_flat(dim, points.concat(), weights)
    }

    /// Every point gets weight 1.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Same points, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.dim, self.coords.clone(), weights)
    }

    /// Weighted centroid. Falls back to the plain mean if all weights vanish.
    pub fn centroid(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for (p, &w) in self.points().zip(&self.weights) {
            for (m, &x) in mean.iter_mut().zip(p) {
                *m += w * x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.total_weight);
        mean
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(AlignError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// Parses the canonical text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(AlignError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(hline, "header must be `n d`"));
        }
        let n: usize = fields[0].parse().map_err(|_| parse_err(hline, "bad point count"))?;
        let dim: usize = fields[1].parse().map_err(|_| parse_err(hline, "bad dimension"))?;
        if n == 0 || dim == 0 {
            return Err(parse_err(hline, "n and d must be positive"));
        }

        let mut coords = Vec::with_capacity(n * dim);
        let mut weights = Vec::with_capacity(n);
        for (line, row) in lines.by_ref().take(n) {
            let mut values = row.split_whitespace().map(|tok| {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(line, &format!("cannot parse `{tok}`")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(line, "NaN or infinite value"))
                }
            });
            let w = values.next().ok_or_else(|| parse_err(line, "empty row"))??;
            if w < 0.0 {
                return Err(parse_err(line, "negative weight"));
            }
            weights.push(w);
            let before = coords.len();
            for v in values {
                coords.push(v?);
            }
            if coords.len() - before != dim {
                return Err(parse_err(
                    line,
                    &format!("expected {} coordinates, found {}", dim, coords.len() - before),
                ));
            }
        }
        if weights.len() != n {
            return Err(parse_err(hline, &format!("header announces {n} points, found {}", weights.len())));
        }
        if let Some((line, _)) = lines.next() {
            return Err(parse_err(line, "trailing data after the last point"));
        }
        Self::from_flat(dim, coords, weights).map_err(|e| match e {
            AlignError::InvalidInput(m) => parse_err(hline, &m),
            other => other,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (p, w) in self.points().zip(&self.weights) {
            write!(out, "{w}").unwrap();
            for x in p {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| AlignError::File { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| AlignError::File { path: path.into(), source })
    }
}

fn parse_err(line: usize, message: &str) -> AlignError {
    AlignError::Parse { line, message: message.to_string() }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Dense row-major `rows x cols` matrix of ground costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl CostMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

/// Squared Euclidean distances between every point of `a` and every point of `b`.
///
/// Rows are filled in parallel; each entry is computed independently, so the
/// result does not depend on the thread count.
pub fn cost_matrix(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<CostMatrix> {
    a.check_dim(b)?;
    let cols = b.len();
    let mut data = vec![0.0; a.len() * cols];
    data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
        let p = a.point(i);
        for (j, c) in row.iter_mut().enumerate() {
            *c = squared_distance(p, b.point(j));
        }
    });
    Ok(CostMatrix { rows: a.len(), cols, data })
}

/// Distance from the first point to its farthest point.
///
/// Lies within `[diam/2, diam]` of the true diameter and costs one pass.
pub fn diameter_estimate(p: &WeightedPointSet) -> f64 {
    let anchor = p.point(0);
    p.points().map(|q| squared_distance(anchor, q)).fold(0.0, f64::max).sqrt()
}

/// Exact diameter by exhaustive pairwise comparison, `O(n^2 d)`.
pub fn exact_diameter(p: &WeightedPointSet) -> f64 {
    let n = p.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(squared_distance(p.point(i), p.point(j)));
        }
    }
    best.sqrt()
}
