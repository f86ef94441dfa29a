//! Compression of weighted point sets into a small set of weighted centers.
//!
//! Every method returns a [`CompressionResult`] whose centers carry the
//! aggregated weight of the points assigned to them (random sampling is the
//! exception: each sample gets an equal share of the total).

mod kcenter;
mod kmeans;
mod random;

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AlignError, Result};
use crate::pointset::{squared_distance, WeightedPointSet};

pub use kcenter::{gonzalez_adaptive, gonzalez_adaptive_from, gonzalez_kcenter, gonzalez_kcenter_from, kcenter_plus, refine_to_means};
pub use kmeans::{kmeans_compress, kmeans_trace, KMeansTrace};
pub use random::{random_compress, random_plus_compress};

pub const DEFAULT_KMEANS_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    KCenter,
    KCenterPlus,
    KMeans,
    Random,
    RandomPlus,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::KCenter, Method::KCenterPlus, Method::KMeans, Method::Random, Method::RandomPlus];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::KCenter => "kcenter",
            Method::KCenterPlus => "kcenter+",
            Method::KMeans => "kmeans",
            Method::Random => "random",
            Method::RandomPlus => "random+",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = AlignError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| AlignError::InvalidInput(format!("unknown compression method `{s}`")))
    }
}

/// How large the compressed set should be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Exactly `k` centers (fewer only when `k >= n`).
    Centers(usize),
    /// Grow k-center until the radius drops to `epsilon` times the estimated
    /// diameter, stopping at `cap` centers.
    Radius { epsilon: f64, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult {
    pub centers: WeightedPointSet,
    /// Center ordinal for every original point.
    pub assignment: Vec<usize>,
    /// Largest distance from a point to its assigned center.
    pub radius: f64,
    /// Radius against the ball centers before any mean refinement; equals
    /// `radius` for methods without refinement.
    pub ball_radius: f64,
    pub method: Method,
    pub seed: u64,
    /// Set when the adaptive variant hit its center cap before reaching the
    /// requested radius.
    pub truncated: bool,
}

impl CompressionResult {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Every point is its own center.
    pub(crate) fn identity(p: &WeightedPointSet, method: Method, seed: u64) -> Self {
        Self {
            centers: p.clone(),
            assignment: (0..p.len()).collect(),
            radius: 0.0,
            ball_radius: 0.0,
            method,
            seed,
            truncated: false,
        }
    }

    /// Builds centers at `coords` with the summed weight of their clusters.
    pub(crate) fn aggregate(
        p: &WeightedPointSet,
        coords: Vec<f64>,
        assignment: Vec<usize>,
        method: Method,
        seed: u64,
    ) -> Result<Self> {
        let k = coords.len() / p.dim();
        let mut weights = vec![0.0; k];
        for (i, &c) in assignment.iter().enumerate() {
            weights[c] += p.weight(i);
        }
        let centers = WeightedPointSet::from_flat(p.dim(), coords, weights)?;
        let radius = assignment_radius(p, &centers, &assignment);
        Ok(Self { centers, assignment, radius, ball_radius: radius, method, seed, truncated: false })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.k(), self.radius, self.method, self.seed);
        for (c, x) in self.centers.points().enumerate() {
            write!(s, "{} {}", c, self.centers.weight(c)).unwrap();
            for v in x {
                write!(s, " {v}").unwrap();
            }
            s.push('\n');
        }
        for (i, c) in self.assignment.iter().enumerate() {
            writeln!(s, "{i} {c}").unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: &str| AlignError::Parse { line, message: message.into() };
        let (hl, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(bad(hl, "header must be `k radius method seed`"));
        }
        let k: usize = h[0].parse().map_err(|_| bad(hl, "bad k"))?;
        let radius: f64 = h[1].parse().map_err(|_| bad(hl, "bad radius"))?;
        let method: Method = h[2].parse().map_err(|_| bad(hl, "bad method"))?;
        let seed: u64 = h[3].parse().map_err(|_| bad(hl, "bad seed"))?;

        let mut dim = 0;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for c in 0..k {
            let (ln, l) = lines.next().ok_or_else(|| bad(hl, "too few center lines"))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if c == 0 {
                dim = t.len().saturating_sub(2);
            }
            if dim == 0 || t.len() != dim + 2 {
                return Err(bad(ln, "center line must be `index w x1 .. xd`"));
            }
            if t[0].parse::<usize>().ok() != Some(c) {
                return Err(bad(ln, "center indices must be consecutive from 0"));
            }
            let nums = t[1..].iter().map(|v| v.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
            let nums = nums.map_err(|_| bad(ln, "bad number"))?;
            weights.push(nums[0]);
            coords.extend_from_slice(&nums[1..]);
        }
        let centers = WeightedPointSet::from_flat(dim, coords, weights).map_err(|e| bad(hl, &e.to_string()))?;
        let mut assignment = Vec::new();
        for (ln, l) in lines {
            let t: Vec<usize> = l
                .split_whitespace()
                .map(|v| v.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "bad assignment"))?;
            if t.len() != 2 || t[0] != assignment.len() || t[1] >= k {
                return Err(bad(ln, "assignment line must be `index center` in order"));
            }
            assignment.push(t[1]);
        }
        Ok(Self { centers, assignment, radius, ball_radius: radius, method, seed, truncated: false })
    }
}

/// `max_i |p_i - center(assignment(i))|`.
pub fn assignment_radius(p: &WeightedPointSet, centers: &WeightedPointSet, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| squared_distance(p.point(i), centers.point(c)))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Index of the nearest row of `centers` (flat, row-major), lowest index on ties.
pub(crate) fn nearest(x: &[f64], centers: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, y) in centers.chunks_exact(dim).enumerate() {
        let d = squared_distance(x, y);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// First k-center center drawn uniformly from the seed.
pub(crate) fn seeded_first(n: usize, seed: u64) -> usize {
    rng_for(seed).random_range(0..n)
}

/// Compresses `p` with any of the supported methods.
///
/// A radius budget is only meaningful for the k-center variants; the other
/// methods reject it.
pub fn compress(p: &WeightedPointSet, method: Method, budget: Budget, seed: u64) -> Result<CompressionResult> {
    match (method, budget) {
        (Method::KCenter, Budget::Centers(k)) => gonzalez_kcenter(p, k, seed),
        (Method::KCenterPlus, Budget::Centers(k)) => kcenter_plus(p, k, seed),
        (Method::KMeans, Budget::Centers(k)) => kmeans_compress(p, k, seed, DEFAULT_KMEANS_ITERS),
        (Method::Random, Budget::Centers(k)) => random_compress(p, k.min(p.len()), seed),
        (Method::RandomPlus, Budget::Centers(k)) => random_plus_compress(p, k.min(p.len()), seed),
        (Method::KCenter, Budget::Radius { epsilon, cap }) => gonzalez_adaptive(p, epsilon, cap, seed),
        (Method::KCenterPlus, Budget::Radius { epsilon, cap }) => {
            refine_to_means(p, gonzalez_adaptive(p, epsilon, cap, seed)?)
        }
        (m, Budget::Radius { .. }) => {
            Err(AlignError::InvalidInput(format!("method {m} needs a center count, not a radius target")))
        }
    }
}
