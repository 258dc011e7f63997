//! Reproducible i.i.d. point sequences on open connected domains.
//!
//! Every random stream is a ChaCha generator seeded from a 64-bit value;
//! [`derive_seed`] splits a master seed into independent per-trial seeds so
//! a Monte Carlo run gives the same points regardless of scheduling.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::distance_sq;

/// Default number of proposals allowed per accepted point.
pub const DEFAULT_ATTEMPT_BUDGET: usize = 100_000;

/// Relative distance (to the domain diameter) under which two points count
/// as a degenerate, coincident draw.
pub const DISTINCTNESS_TOLERANCE: f64 = 1e-12;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`. A pure function of both inputs.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// An open connected region of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Open axis-aligned box `prod (lower_i, upper_i)`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Open outer box with a closed inner box removed. Requires `d >= 2`
    /// and the inner box strictly inside the outer one, which keeps the
    /// region connected.
    BoxMinusBox {
        outer_lower: Vec<f64>,
        outer_upper: Vec<f64>,
        inner_lower: Vec<f64>,
        inner_upper: Vec<f64>,
    },
}

impl Domain {
    pub fn unit_box(dim: usize) -> Self {
        Domain::Box {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lower, .. } => lower.len(),
            Domain::Ball { center, .. } => center.len(),
            Domain::BoxMinusBox { outer_lower, .. } => outer_lower.len(),
        }
    }

    /// Checks nonempty interior and, for the annular kind, connectedness.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let check_box = |lo: &[f64], hi: &[f64], what: &str| -> Result<()> {
            if lo.is_empty() || lo.len() != hi.len() {
                return bad(format!(
                    "{what}: bounds must be nonempty and of equal length"
                ));
            }
            if lo
                .iter()
                .zip(hi)
                .any(|(a, b)| !(a.is_finite() && b.is_finite() && b > a))
            {
                return bad(format!("{what}: every width must be positive and finite"));
            }
            Ok(())
        };
        match self {
            Domain::Box { lower, upper } => check_box(lower, upper, "box"),
            Domain::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return bad("ball: center must be a finite point".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("ball: radius must be positive, got {radius}"));
                }
                Ok(())
            }
            Domain::BoxMinusBox {
                outer_lower,
                outer_upper,
                inner_lower,
                inner_upper,
            } => {
                check_box(outer_lower, outer_upper, "outer box")?;
                check_box(inner_lower, inner_upper, "inner box")?;
                if outer_lower.len() != inner_lower.len() {
                    return bad("box-minus-box: inner and outer dimensions differ".into());
                }
                if outer_lower.len() < 2 {
                    return bad("box-minus-box: d = 1 would disconnect the region".into());
                }
                let inside = (0..outer_lower.len())
                    .all(|i| outer_lower[i] < inner_lower[i] && inner_upper[i] < outer_upper[i]);
                if !inside {
                    return bad(
                        "box-minus-box: inner box must lie strictly inside the outer box".into(),
                    );
                }
                Ok(())
            }
        }
    }

    /// Strict membership in the open set.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Box { lower, upper } => in_open_box(x, lower, upper),
            Domain::Ball { center, radius } => distance_sq(x, center) < radius * radius,
            Domain::BoxMinusBox {
                outer_lower,
                outer_upper,
                inner_lower,
                inner_upper,
            } => {
                in_open_box(x, outer_lower, outer_upper)
                    && x.iter()
                        .zip(inner_lower.iter().zip(inner_upper))
                        .any(|(v, (lo, hi))| v < lo || v > hi)
            }
        }
    }

    /// Smallest box containing the domain, used as the proposal region.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lower, upper } => (lower.clone(), upper.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Domain::BoxMinusBox {
                outer_lower,
                outer_upper,
                ..
            } => (outer_lower.clone(), outer_upper.clone()),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => 2.0 * radius,
            _ => {
                let (lo, hi) = self.bounding_box();
                distance_sq(&lo, &hi).sqrt()
            }
        }
    }
}

fn in_open_box(x: &[f64], lower: &[f64], upper: &[f64]) -> bool {
    x.iter()
        .zip(lower.iter().zip(upper))
        .all(|(v, (lo, hi))| lo < v && v < hi)
}

/// A piecewise-constant density on `[0, 1]` split into equal-width bins,
/// mapped onto each axis of the bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PiecewiseConstant {
    /// Normalizes nonnegative bin weights to probabilities.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "bin weights must be nonempty, finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("bin weights sum to zero".into()));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            weights,
            cumulative,
        })
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    /// Normalized bin probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.weights
    }

    /// Density on `[0, 1]` (integrates to one).
    pub fn pdf(&self, s: f64) -> f64 {
        if !(0.0..1.0).contains(&s) {
            return 0.0;
        }
        let bin = ((s * self.bins() as f64) as usize).min(self.bins() - 1);
        self.weights[bin] * self.bins() as f64
    }

    /// A draw in `[0, 1)` by inverse transform over bins.
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let bin = self
            .cumulative
            .partition_point(|c| *c <= u)
            .min(self.bins() - 1);
        let v: f64 = rng.random();
        (bin as f64 + v) / self.bins() as f64
    }
}

/// Nonnegative weight function for rejection sampling.
pub type WeightFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The sampling density on the domain.
#[derive(Clone)]
pub enum Density {
    Uniform,
    /// Independent piecewise-constant marginals, one per axis of the
    /// bounding box, conditioned on the domain.
    Piecewise(Vec<PiecewiseConstant>),
    /// Density proportional to `weight`, which must satisfy
    /// `0 <= weight(x) <= bound` on the domain.
    Weighted {
        weight: WeightFn,
        bound: f64,
    },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Uniform => f.write_str("Uniform"),
            Density::Piecewise(m) => f.debug_tuple("Piecewise").field(m).finish(),
            Density::Weighted { bound, .. } => f
                .debug_struct("Weighted")
                .field("bound", bound)
                .finish_non_exhaustive(),
        }
    }
}

impl Density {
    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            Density::Uniform => "uniform".into(),
            Density::Piecewise(m) => format!("piecewise({} axes)", m.len()),
            Density::Weighted { bound, .. } => format!("weighted(bound={bound})"),
        }
    }
}

/// Where a point set came from.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub domain: Domain,
    pub density: Density,
}

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    seed: u64,
    provenance: Option<Provenance>,
}

impl PointSet {
    /// Wraps explicit coordinates (`coords.len()` must be a multiple of `dim`).
    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("points need dimension >= 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("coordinates must be finite".into()));
        }
        Ok(Self {
            dim,
            coords,
            seed: 0,
            provenance: None,
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_coords(dim, coords)
    }

    /// Tensor grid with `per_axis` equispaced nodes on each axis of `[lo, hi]`,
    /// endpoints included.
    pub fn grid(lower: &[f64], upper: &[f64], per_axis: usize) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || per_axis < 2 {
            return Err(Error::InvalidParameter(
                "grid needs matching bounds and >= 2 nodes per axis".into(),
            ));
        }
        let dim = lower.len();
        let total = per_axis.pow(dim as u32);
        let mut coords = Vec::with_capacity(total * dim);
        for mut idx in 0..total {
            for a in 0..dim {
                let i = idx % per_axis;
                idx /= per_axis;
                let t = i as f64 / (per_axis - 1) as f64;
                coords.push(lower[a] + t * (upper[a] - lower[a]));
            }
        }
        Self::from_coords(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points, keeping seed and provenance.
    pub fn prefix(&self, n: usize) -> PointSet {
        let n = n.min(self.len());
        PointSet {
            dim: self.dim,
            coords: self.coords[..n * self.dim].to_vec(),
            seed: self.seed,
            provenance: self.provenance.clone(),
        }
    }

    /// Same points in a new order: `order[i]` is the old index of new point `i`.
    pub fn permuted(&self, order: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in order {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            coords,
            ..self.clone()
        }
    }

    /// Centroid and largest pairwise distance.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for p in self.iter() {
            for (a, v) in c.iter_mut().zip(p) {
                *a += v;
            }
        }
        let n = self.len().max(1) as f64;
        c.iter_mut().for_each(|a| *a /= n);
        c
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.max(distance_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// Writes the CSV exchange format: a `# dim=..,n=..,seed=..` comment line,
    /// then one point per row with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# dim={},n={},seed={}\n", self.dim, self.len(), self.seed);
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|v| format_f64(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`PointSet::to_csv`]. Comment lines other
    /// than the header are ignored; the header is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, u64)> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if header.is_none() && rows.is_empty() {
                    header = parse_header(comment.trim());
                }
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}: {f:?}", lineno + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let mut ps = PointSet::from_points(&rows)?;
        if let Some((dim, n, seed)) = header {
            if dim != ps.dim && !rows.is_empty() {
                return Err(Error::Parse(format!(
                    "header dim={dim}, rows have {}",
                    ps.dim
                )));
            }
            if n != ps.len() {
                return Err(Error::Parse(format!(
                    "header n={n}, found {} rows",
                    ps.len()
                )));
            }
            ps.seed = seed;
        }
        Ok(ps)
    }
}

fn parse_header(s: &str) -> Option<(usize, usize, u64)> {
    let (mut dim, mut n, mut seed) = (None, None, None);
    for field in s.split(',') {
        let (key, value) = field.split_once('=')?;
        match key.trim() {
            "dim" => dim = value.trim().parse().ok(),
            "n" => n = value.trim().parse().ok(),
            "seed" => seed = value.trim().parse().ok(),
            _ => return None,
        }
    }
    Some((dim?, n?, seed?))
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Draws `n` i.i.d. points from `density` restricted to `domain`.
///
/// Deterministic in `seed`. Proposals on the boundary or outside the open
/// domain are redrawn; more than `DEFAULT_ATTEMPT_BUDGET` proposals for one
/// point is an error.
pub fn sample_points(domain: &Domain, density: &Density, n: usize, seed: u64) -> Result<PointSet> {
    sample_points_with_budget(domain, density, n, seed, DEFAULT_ATTEMPT_BUDGET)
}

pub fn sample_points_with_budget(
    domain: &Domain,
    density: &Density,
    n: usize,
    seed: u64,
    budget: usize,
) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one point".into()));
    }
    domain.validate()?;
    let dim = domain.dim();
    match density {
        Density::Piecewise(marginals) if marginals.len() != dim => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: marginals.len(),
            })
        }
        Density::Weighted { bound, .. } if !(bound.is_finite() && *bound > 0.0) => {
            return Err(Error::InvalidParameter(format!(
                "weight bound must be positive, got {bound}"
            )))
        }
        _ => {}
    }

    let (lower, upper) = domain.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * dim);
    let mut x = vec![0.0; dim];
    for _ in 0..n {
        let mut attempts = 0;
        loop {
            if attempts == budget {
                return Err(Error::RejectionBudget { attempts });
            }
            attempts += 1;
            for a in 0..dim {
                let s = match density {
                    Density::Piecewise(m) => m[a].sample(&mut rng),
                    _ => rng.random::<f64>(),
                };
                x[a] = lower[a] + s * (upper[a] - lower[a]);
            }
            if !domain.contains(&x) {
                continue;
            }
            if let Density::Weighted { weight, bound } = density {
                let w = weight(&x);
                if !(w >= 0.0 && w <= *bound) {
                    return Err(Error::InvalidParameter(format!(
                        "weight {w} outside [0, {bound}] at {x:?}"
                    )));
                }
                if rng.random::<f64>() * bound >= w {
                    continue;
                }
            }
            break;
        }
        coords.extend_from_slice(&x);
    }
    Ok(PointSet {
        dim,
        coords,
        seed,
        provenance: Some(Provenance {
            domain: domain.clone(),
            density: density.clone(),
        }),
    })
}

/// Smallest distance between two points of the set, with the pair.
pub fn closest_pair(ps: &PointSet) -> Result<(usize, usize, f64)> {
    if ps.len() < 2 {
        return Err(Error::Domain(format!(
            "pairwise distance needs at least two points, got {}",
            ps.len()
        )));
    }
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let d2 = distance_sq(ps.point(i), ps.point(j));
            if d2 < best.2 {
                best = (i, j, d2);
            }
        }
    }
    Ok((best.0, best.1, best.2.sqrt()))
}

/// `min_{i<j} ||x_i - x_j||_2`.
pub fn min_pairwise_distance(ps: &PointSet) -> Result<f64> {
    closest_pair(ps).map(|(_, _, d)| d)
}

/// Distinctness threshold for a set: `DISTINCTNESS_TOLERANCE` times the
/// domain diameter when provenance is known, else the set's own diameter.
pub fn distinctness_threshold(ps: &PointSet) -> f64 {
    let scale = match ps.provenance() {
        Some(p) => p.domain.diameter(),
        None => ps.diameter(),
    };
    DISTINCTNESS_TOLERANCE * scale
}
