//! Points in the unit cube, ℓ_p norms and the connectivity scale.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// An ℓ_p norm with `p > 1`. `p = ∞` is the max-coordinate norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norm {
    p: f64,
}

impl Default for Norm {
    fn default() -> Self {
        Norm::EUCLIDEAN
    }
}

impl Norm {
    pub const EUCLIDEAN: Norm = Norm { p: 2.0 };
    pub const MAX: Norm = Norm { p: f64::INFINITY };

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 1.0 {
            return Err(Error::invalid("p_norm", format!("need p > 1, got {p}")));
        }
        Ok(Norm { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Distance between two coordinate slices of equal length.
    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        if self.p == 2.0 {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        } else if self.p.is_infinite() {
            a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
        } else {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs().powf(self.p))
                .sum::<f64>()
                .powf(1.0 / self.p)
        }
    }

    /// Monotone surrogate of [`Norm::dist`] that skips the final root;
    /// `from_proxy(proxy(a, b)) == dist(a, b)` exactly.
    #[inline]
    pub fn proxy(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.p == 2.0 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        } else if self.p.is_infinite() {
            a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
        } else {
            a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(self.p)).sum()
        }
    }

    #[inline]
    pub fn from_proxy(&self, s: f64) -> f64 {
        if self.p == 2.0 {
            s.sqrt()
        } else if self.p.is_infinite() {
            s
        } else {
            s.powf(1.0 / self.p)
        }
    }

    /// `d^{1/p}`: the norm of the all-ones vector, which bounds
    /// `‖v‖_p / ‖v‖_∞` in dimension `d`.
    pub fn cube_factor(&self, d: usize) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else {
            (d as f64).powf(1.0 / self.p)
        }
    }

    /// Diameter of the unit cube under this norm.
    pub fn cube_diameter(&self, d: usize) -> f64 {
        self.cube_factor(d)
    }
}

/// `n` points of `[0,1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    dim: usize,
    seed: Option<u64>,
}

impl PointSet {
    /// Builds a point set from explicit rows. Every coordinate must lie in `[0,1]`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("n", "point set must be nonempty"));
        };
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::invalid(
                    "coords",
                    format!("coordinate {x} outside [0,1]"),
                ));
            }
            coords.extend_from_slice(row);
        }
        Ok(PointSet {
            coords,
            dim,
            seed: None,
        })
    }

    /// One-dimensional convenience constructor.
    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        Self::from_rows(&rows)
    }

    pub(crate) fn from_flat(coords: Vec<f64>, dim: usize, seed: Option<u64>) -> Self {
        debug_assert!(dim > 0 && coords.len().is_multiple_of(dim) && !coords.is_empty());
        PointSet { coords, dim, seed }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Seed the set was sampled with, if it was sampled.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Draws `n` i.i.d. uniform points in `[0,1]^d`; deterministic in `(n, d, seed)`.
pub fn sample_uniform(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    check_shape(n, d)?;
    let mut rng = rng::stream(seed, 0, rng::lane::POINTS);
    let mut ps = sample_with(n, d, &mut rng);
    ps.seed = Some(seed);
    Ok(ps)
}

/// Uniform sample drawn from an existing stream.
pub fn sample_with(n: usize, d: usize, rng: &mut StreamRng) -> PointSet {
    assert!(n >= 1 && d >= 1, "sample_with needs n >= 1 and d >= 1");
    let coords = (0..n * d).map(|_| rng.random::<f64>()).collect();
    PointSet::from_flat(coords, d, None)
}

pub(crate) fn check_shape(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one point"));
    }
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    Ok(())
}

/// ℓ_p distance with a dimension check.
pub fn distance(a: &[f64], b: &[f64], norm: Norm) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(norm.dist(a, b))
}

/// Volume of the Euclidean unit ball in `d` dimensions, `π^{d/2}/Γ(d/2+1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1, "unit_ball_volume needs d >= 1");
    // V_d = 2π/d · V_{d-2}, V_0 = 1, V_1 = 2
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// The connectivity scale `(ln n / (π_d n))^{1/d}`.
pub fn critical_radius(n: usize, d: usize) -> Result<f64> {
    if n <= 1 {
        return Err(Error::invalid("n", format!("critical radius needs n >= 2, got {n}")));
    }
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    let n = n as f64;
    Ok((n.ln() / (unit_ball_volume(d) * n)).powf(1.0 / d as f64))
}
