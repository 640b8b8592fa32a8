//! Increasing graph properties and their per-sample critical radii.
//!
//! For a fixed point set `X`, `G(X; r)` only changes at pairwise distances,
//! so an increasing property has an exact entry radius `r*(X)`: the
//! smallest pairwise distance at which the predicate turns true.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{self, Norm, PointSet};
use crate::graphs::{build_geometric, Adjacency, GeometricGraph};
use crate::rng;

/// How [`critical_radius_sample`] computes `r*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalMethod {
    /// Longest edge of the minimum spanning tree.
    MstLongestEdge,
    /// Largest distance from a point to its `⌈n/4⌉`-th nearest neighbor.
    KnnQuarter,
    /// Largest pairwise distance.
    Diameter,
    /// Binary search over sorted pairwise distances using the predicate.
    GenericSearch,
}

/// A named increasing predicate on geometric graphs.
#[derive(Clone, Copy)]
pub struct MonotoneProperty {
    name: &'static str,
    predicate: fn(&GeometricGraph) -> bool,
    method: CriticalMethod,
}

impl fmt::Debug for MonotoneProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneProperty")
            .field("name", &self.name)
            .field("method", &self.method)
            .finish()
    }
}

impl MonotoneProperty {
    pub const CONNECTIVITY: MonotoneProperty = MonotoneProperty {
        name: "connectivity",
        predicate: is_connected,
        method: CriticalMethod::MstLongestEdge,
    };
    pub const MIN_DEGREE_QUARTER: MonotoneProperty = MonotoneProperty {
        name: "mindeg-quarter",
        predicate: min_degree_quarter,
        method: CriticalMethod::KnnQuarter,
    };
    pub const COMPLETE: MonotoneProperty = MonotoneProperty {
        name: "complete",
        predicate: is_complete,
        method: CriticalMethod::Diameter,
    };

    pub const REGISTRY: [MonotoneProperty; 3] = [
        Self::CONNECTIVITY,
        Self::MIN_DEGREE_QUARTER,
        Self::COMPLETE,
    ];

    /// A property evaluated by the generic search. Monotonicity is the
    /// caller's promise; [`assert_monotone`] checks it.
    pub fn custom(name: &'static str, predicate: fn(&GeometricGraph) -> bool) -> Self {
        MonotoneProperty {
            name,
            predicate,
            method: CriticalMethod::GenericSearch,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::REGISTRY
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| {
                Error::invalid(
                    "property",
                    format!("unknown property {name:?} (expected connectivity, mindeg-quarter or complete)"),
                )
            })
    }

    /// Same predicate, critical radius via the generic search.
    pub fn with_generic_search(self) -> Self {
        MonotoneProperty {
            method: CriticalMethod::GenericSearch,
            ..self
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn method(&self) -> CriticalMethod {
        self.method
    }

    pub fn holds(&self, graph: &GeometricGraph) -> bool {
        (self.predicate)(graph)
    }
}

/// Single connected component, by breadth-first traversal from vertex 0.
pub fn is_connected(graph: &GeometricGraph) -> bool {
    let n = graph.vertex_count();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in graph.neighbor_slice(v) {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    reached == n
}

/// Degree threshold `⌈n/4⌉`, the integer form of `deg(u) ≥ n/4`.
pub fn quarter_degree(n: usize) -> usize {
    n.div_ceil(4)
}

/// Every vertex has degree at least `n/4`.
pub fn min_degree_quarter(graph: &GeometricGraph) -> bool {
    graph.min_degree() >= quarter_degree(graph.vertex_count())
}

pub fn is_complete(graph: &GeometricGraph) -> bool {
    let n = graph.vertex_count();
    graph.edge_count() == n * (n - 1) / 2
}

/// Smallest radius `r*` with `prop` true on `G(points; r*)`.
pub fn critical_radius_sample(prop: &MonotoneProperty, points: &PointSet, norm: Norm) -> f64 {
    match prop.method {
        CriticalMethod::MstLongestEdge => mst_longest_edge(points, norm),
        CriticalMethod::KnnQuarter => knn_radius(points, norm, quarter_degree(points.len())),
        CriticalMethod::Diameter => diameter(points, norm),
        CriticalMethod::GenericSearch => generic_critical_radius(prop, points, norm),
    }
}

/// Longest edge of the minimum spanning tree (dense Prim).
pub fn mst_longest_edge(points: &PointSet, norm: Norm) -> f64 {
    let n = points.len();
    if n <= 1 {
        return 0.0;
    }
    // dense Prim over the vertices not yet in the tree, kept compact
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = vec![f64::INFINITY; n - 1];
    let mut longest = 0.0f64;
    let mut current = 0usize;
    while !rest.is_empty() {
        let pc = points.point(current);
        let mut pick = 0;
        for (k, &v) in rest.iter().enumerate() {
            let dv = norm.proxy(pc, points.point(v));
            if dv < best[k] {
                best[k] = dv;
            }
            if best[k] < best[pick] {
                pick = k;
            }
        }
        longest = longest.max(best[pick]);
        current = rest.swap_remove(pick);
        best.swap_remove(pick);
    }
    norm.from_proxy(longest)
}

/// `max_u` of the distance from `u` to its `k`-th nearest neighbor.
/// Zero when `k = 0`, infinite when `k ≥ n` (no such neighbor exists).
pub fn knn_radius(points: &PointSet, norm: Norm, k: usize) -> f64 {
    let n = points.len();
    if k == 0 {
        return 0.0;
    }
    if k >= n {
        return f64::INFINITY;
    }
    if points.dim() == 1 {
        return knn_radius_line(points, k);
    }
    let mut row = Vec::with_capacity(n - 1);
    (0..n)
        .map(|u| {
            let pu = points.point(u);
            row.clear();
            row.extend((0..n).filter(|&v| v != u).map(|v| norm.dist(pu, points.point(v))));
            *row.select_nth_unstable_by(k - 1, f64::total_cmp).1
        })
        .fold(0.0, f64::max)
}

/// On the line the `k` nearest neighbors of a point form a window of `k+1`
/// consecutive order statistics containing it; the best window start is
/// found by bisection since one side's reach falls and the other's grows.
fn knn_radius_line(points: &PointSet, k: usize) -> f64 {
    let mut xs = points.coords().to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    let reach = |i: usize, lo: usize| (xs[i] - xs[lo]).max(xs[lo + k] - xs[i]);
    (0..n)
        .map(|i| {
            let (mut lo, mut hi) = (i.saturating_sub(k), i.min(n - 1 - k));
            // first window start where the right side dominates
            while lo < hi {
                let mid = (lo + hi) / 2;
                if xs[mid + k] - xs[i] >= xs[i] - xs[mid] {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let mut r = reach(i, lo);
            if lo > i.saturating_sub(k) {
                r = r.min(reach(i, lo - 1));
            }
            r
        })
        .fold(0.0, f64::max)
}

pub fn diameter(points: &PointSet, norm: Norm) -> f64 {
    let n = points.len();
    let mut best = 0.0f64;
    for i in 0..n {
        let pi = points.point(i);
        for j in i + 1..n {
            best = best.max(norm.dist(pi, points.point(j)));
        }
    }
    best
}

/// All pairwise distances, sorted and deduplicated.
fn sorted_pair_distances(points: &PointSet, norm: Norm) -> Vec<f64> {
    let n = points.len();
    let mut ds: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| norm.dist(points.point(i), points.point(j)))
        .collect();
    ds.sort_unstable_by(f64::total_cmp);
    ds.dedup();
    ds
}

/// Binary search of the predicate over the sorted pairwise distances.
pub fn generic_critical_radius(prop: &MonotoneProperty, points: &PointSet, norm: Norm) -> f64 {
    let holds_at = |r: f64| prop.holds(&build_geometric(points, r, norm).expect("r >= 0"));
    if holds_at(0.0) {
        return 0.0;
    }
    let ds = sorted_pair_distances(points, norm);
    let (mut lo, mut hi) = (0usize, ds.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if holds_at(ds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // an increasing property holds on the complete graph unless it never holds
    ds.get(lo).copied().unwrap_or(f64::INFINITY)
}

/// A monotonicity or critical-radius violation found by [`assert_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub property: &'static str,
    pub trial: usize,
    pub n: usize,
    pub d: usize,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated in trial {} (n={}, d={}): {}",
            self.property, self.trial, self.n, self.d, self.detail
        )
    }
}

/// Randomized check of the increasing-property contract.
///
/// Each trial draws `n ∈ [2, 12]`, `d ∈ [1, 3]` and a point set, then
/// (a) probes random radius pairs `r < r'` for a true-then-false flip and
/// (b) sweeps every pairwise distance and the midpoints between them,
/// requiring the predicate to be false below `r*` and true from `r*` on.
pub fn assert_monotone(
    prop: &MonotoneProperty,
    trials: usize,
    seed: u64,
) -> std::result::Result<(), Counterexample> {
    let norm = Norm::EUCLIDEAN;
    for trial in 0..trials {
        let mut rng = rng::stream(seed, trial as u64, rng::lane::RADII);
        let n = rng.random_range(2..=12usize);
        let d = rng.random_range(1..=3usize);
        let points = geom::sample_with(n, d, &mut rng::stream(seed, trial as u64, rng::lane::POINTS));
        let fail = |detail: String| Counterexample {
            property: prop.name,
            trial,
            n,
            d,
            detail,
        };
        let holds_at = |r: f64| prop.holds(&build_geometric(&points, r, norm).expect("r >= 0"));
        let diam = norm.cube_diameter(d);

        for _ in 0..8 {
            let a = rng.random::<f64>() * diam;
            let b = rng.random::<f64>() * diam;
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if holds_at(lo) && !holds_at(hi) {
                return Err(fail(format!("holds at r={lo} but not at r={hi}")));
            }
        }

        let r_star = critical_radius_sample(prop, &points, norm);
        let ds = sorted_pair_distances(&points, norm);
        let mut sweep = vec![0.0];
        for (i, &x) in ds.iter().enumerate() {
            let prev = if i == 0 { 0.0 } else { ds[i - 1] };
            sweep.push(0.5 * (prev + x));
            sweep.push(x);
        }
        sweep.push(diam);
        let mut first_true = None;
        for &r in &sweep {
            let h = holds_at(r);
            match first_true {
                Some(t) if !h => {
                    return Err(fail(format!("holds at r={t} but not at r={r}")));
                }
                None if h => first_true = Some(r),
                _ => {}
            }
        }
        match first_true {
            Some(r) if r == r_star => {}
            Some(r) => {
                return Err(fail(format!("sweep enters at r={r}, critical radius says {r_star}")))
            }
            None => return Err(fail("never holds, even on the complete graph".into())),
        }
    }
    Ok(())
}
