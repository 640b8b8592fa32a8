//! Bottleneck bipartite matching between two equal-size point sets.
//!
//! Four solvers share the [`Matching`] type:
//! - [`brute_force_bottleneck`] enumerates all bijections (`n ≤ 8`), the oracle;
//! - [`exact_bottleneck`] binary-searches the sorted pairwise distances with a
//!   Hopcroft–Karp feasibility test;
//! - [`sorted_bottleneck_1d`] pairs order statistics on the line;
//! - [`constructive_matching`] matches inside the boxes of a rank-based
//!   recursive subdivision and records how far every point was moved.

mod hopcroft_karp;
mod subdivision;

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::geom::{self, Norm, PointSet};
use crate::rng;

pub use subdivision::{
    beta_schedule_1d, gamma_schedule, halving_transform, recursive_subdivide, shift_constant,
    steps_schedule, HalvingSplit, ShiftTrace, Subdivision,
};

/// Largest instance accepted by [`brute_force_bottleneck`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Red set `S_1`, blue set `S_2` and the norm measuring edge lengths.
#[derive(Debug, Clone)]
pub struct BipartiteInstance {
    red: PointSet,
    blue: PointSet,
    norm: Norm,
}

impl BipartiteInstance {
    pub fn new(red: PointSet, blue: PointSet, norm: Norm) -> Result<Self> {
        if red.len() != blue.len() {
            return Err(Error::SizeMismatch {
                red: red.len(),
                blue: blue.len(),
            });
        }
        if red.dim() != blue.dim() {
            return Err(Error::DimensionMismatch {
                left: red.dim(),
                right: blue.dim(),
            });
        }
        Ok(BipartiteInstance { red, blue, norm })
    }

    /// Two independent uniform sets for trial `trial` of run `seed`.
    pub fn sample(n: usize, d: usize, norm: Norm, seed: u64, trial: u64) -> Result<Self> {
        geom::check_shape(n, d)?;
        let red = geom::sample_with(n, d, &mut rng::stream(seed, trial, rng::lane::RED));
        let blue = geom::sample_with(n, d, &mut rng::stream(seed, trial, rng::lane::BLUE));
        Self::new(red, blue, norm)
    }

    pub fn red(&self) -> &PointSet {
        &self.red
    }

    pub fn blue(&self) -> &PointSet {
        &self.blue
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.red.len()
    }

    pub fn is_empty(&self) -> bool {
        self.red.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.red.dim()
    }

    #[inline]
    pub fn dist(&self, r: usize, b: usize) -> f64 {
        self.norm.dist(self.red.point(r), self.blue.point(b))
    }
}

/// A perfect matching `red[i] ↔ blue[phi[i]]` and its bottleneck weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    phi: Vec<usize>,
    weight: f64,
}

impl Matching {
    /// Validates `phi` as a permutation and computes the weight.
    pub fn from_phi(inst: &BipartiteInstance, phi: Vec<usize>) -> Result<Self> {
        if phi.len() != inst.len() {
            return Err(Error::SizeMismatch {
                red: inst.len(),
                blue: phi.len(),
            });
        }
        if !is_permutation(&phi) {
            return Err(Error::invalid("phi", "not a permutation"));
        }
        Ok(Self::new_unchecked(inst, phi))
    }

    fn new_unchecked(inst: &BipartiteInstance, phi: Vec<usize>) -> Self {
        let weight = bottleneck_of(inst, &phi);
        Matching { phi, weight }
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Writes header `n d p_norm weight`, then `red_index blue_index distance` rows.
    pub fn write_dump<W: Write>(&self, inst: &BipartiteInstance, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "{} {} {} {}",
            inst.len(),
            inst.dim(),
            fmt_num(inst.norm().p()),
            fmt_num(self.weight)
        )?;
        for (r, &b) in self.phi.iter().enumerate() {
            writeln!(out, "{r} {b} {}", fmt_num(inst.dist(r, b)))?;
        }
        Ok(())
    }
}

pub fn is_permutation(phi: &[usize]) -> bool {
    let mut seen = vec![false; phi.len()];
    phi.iter()
        .all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
}

fn bottleneck_of(inst: &BipartiteInstance, phi: &[usize]) -> f64 {
    phi.iter()
        .enumerate()
        .map(|(r, &b)| inst.dist(r, b))
        .fold(0.0, f64::max)
}

/// Exhaustive search over all `n!` bijections in lexicographic order; the
/// first bijection reaching the optimum wins ties.
pub fn brute_force_bottleneck(inst: &BipartiteInstance) -> Result<Matching> {
    let n = inst.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::invalid(
            "n",
            format!("brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"),
        ));
    }
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|b| inst.dist(r, b)).collect())
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_w = f64::INFINITY;
    loop {
        let w = perm
            .iter()
            .enumerate()
            .map(|(r, &b)| dist[r][b])
            .fold(0.0, f64::max);
        if w < best_w {
            best_w = w;
            best.clone_from(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(Matching::new_unchecked(inst, best))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A perfect matching using only edges of length `≤ t`, if one exists.
pub fn max_matching_at_threshold(inst: &BipartiteInstance, t: f64) -> Option<Matching> {
    let n = inst.len();
    let adj: Vec<Vec<u32>> = (0..n)
        .map(|r| {
            (0..n as u32)
                .filter(|&b| inst.dist(r, b as usize) <= t)
                .collect()
        })
        .collect();
    let refs: Vec<&[u32]> = adj.iter().map(Vec::as_slice).collect();
    perfect_matching(inst, &refs)
}

fn perfect_matching(inst: &BipartiteInstance, adj: &[&[u32]]) -> Option<Matching> {
    let mate = hopcroft_karp::maximum_matching(adj, inst.len());
    let phi: Option<Vec<usize>> = mate.into_iter().map(|m| m.map(|b| b as usize)).collect();
    phi.map(|phi| Matching::new_unchecked(inst, phi))
}

/// Optimal bottleneck matching plus the certificate of optimality.
#[derive(Debug, Clone)]
pub struct CertifiedMatching {
    pub matching: Matching,
    /// Largest pairwise distance strictly below the optimum, at which no
    /// perfect matching exists. `None` when the optimum is the smallest
    /// pairwise distance.
    pub infeasible_below: Option<f64>,
}

/// Minimum-bottleneck perfect matching.
///
/// The optimum is one of the `n²` red–blue distances. Candidates are
/// restricted to `[lower, upper]`, where `lower` is the largest
/// nearest-neighbor distance from either side (no perfect matching can do
/// better) and `upper` is the weight of the constructive matching; the
/// smallest feasible candidate is found by binary search.
pub fn exact_bottleneck(inst: &BipartiteInstance) -> Matching {
    exact_search(inst)
}

/// [`exact_bottleneck`] together with its infeasibility certificate.
pub fn exact_bottleneck_certified(inst: &BipartiteInstance) -> CertifiedMatching {
    let matching = exact_search(inst);
    let w = matching.weight();
    let n = inst.len();
    let below = (0..n)
        .flat_map(|r| (0..n).map(move |b| (r, b)))
        .map(|(r, b)| inst.dist(r, b))
        .filter(|&x| x < w)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    CertifiedMatching {
        matching,
        infeasible_below: below,
    }
}

fn exact_search(inst: &BipartiteInstance) -> Matching {
    let n = inst.len();
    let mut col_min = vec![f64::INFINITY; n];
    let mut lower = 0.0f64;
    for r in 0..n {
        let mut row_min = f64::INFINITY;
        for (b, cm) in col_min.iter_mut().enumerate() {
            let x = inst.dist(r, b);
            row_min = row_min.min(x);
            *cm = cm.min(x);
        }
        lower = lower.max(row_min);
    }
    lower = col_min.into_iter().fold(lower, f64::max);

    let upper_matching = if inst.dim() == 1 {
        sorted_pairing(inst)
    } else {
        constructive_matching_with(inst, InBoxPairing::FirstCoordinateRank)
            .expect("instance sizes already validated")
            .matching
    };
    let upper = upper_matching.weight();
    if upper <= lower {
        return upper_matching;
    }

    // per-red candidate lists within `upper`, sorted by distance
    let mut dists: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut blues: Vec<Vec<u32>> = Vec::with_capacity(n);
    let mut candidates = Vec::new();
    let mut row = Vec::new();
    for r in 0..n {
        row.clear();
        row.extend(
            (0..n as u32)
                .map(|b| (inst.dist(r, b as usize), b))
                .filter(|&(x, _)| x <= upper),
        );
        row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        candidates.extend(row.iter().map(|&(x, _)| x).filter(|&x| x >= lower));
        dists.push(row.iter().map(|&(x, _)| x).collect());
        blues.push(row.iter().map(|&(_, b)| b).collect());
    }
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();

    let probe = |t: f64| {
        let adj: Vec<&[u32]> = dists
            .iter()
            .zip(&blues)
            .map(|(ds, bs)| &bs[..ds.partition_point(|&x| x <= t)])
            .collect();
        perfect_matching(inst, &adj)
    };

    // candidates[hi] = upper is feasible; find the first feasible index
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = upper_matching;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match probe(candidates[mid]) {
            Some(m) => {
                hi = mid;
                best = m;
            }
            None => lo = mid + 1,
        }
    }
    if best.weight() > candidates[lo] {
        best = probe(candidates[lo]).expect("smallest feasible candidate");
    }
    best
}

fn sorted_pairing(inst: &BipartiteInstance) -> Matching {
    let order = |ps: &PointSet| {
        let mut idx: Vec<usize> = (0..ps.len()).collect();
        idx.sort_unstable_by(|&a, &b| ps.point(a)[0].total_cmp(&ps.point(b)[0]).then(a.cmp(&b)));
        idx
    };
    let red = order(inst.red());
    let blue = order(inst.blue());
    let mut phi = vec![0; inst.len()];
    for (&r, &b) in red.iter().zip(&blue) {
        phi[r] = b;
    }
    Matching::new_unchecked(inst, phi)
}

/// Pairs the i-th smallest red point with the i-th smallest blue point,
/// which is optimal on the line.
pub fn sorted_bottleneck_1d(inst: &BipartiteInstance) -> Result<Matching> {
    if inst.dim() != 1 {
        return Err(Error::invalid(
            "d",
            format!("sorted matching needs d = 1, got {}", inst.dim()),
        ));
    }
    Ok(sorted_pairing(inst))
}

/// How red and blue points sharing a final box are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InBoxPairing {
    /// Optimal bottleneck matching inside each box.
    #[default]
    Bottleneck,
    /// i-th red with i-th blue in order of the first coordinate.
    FirstCoordinateRank,
}

/// Output of [`constructive_matching`].
#[derive(Debug, Clone)]
pub struct ConstructiveMatching {
    pub matching: Matching,
    pub red_trace: ShiftTrace,
    pub blue_trace: ShiftTrace,
}

impl ConstructiveMatching {
    /// `d^{1/p}·(Δ + Δ' + 2^{-j})`: matched points sit in a common box of
    /// side `2^{-j}` after moving at most `Δ` (resp. `Δ'`) per coordinate.
    /// Holds for any pairing inside the boxes.
    pub fn shift_bound(&self, norm: Norm, d: usize) -> f64 {
        norm.cube_factor(d)
            * (self.red_trace.total_max_shift
                + self.blue_trace.total_max_shift
                + self.red_trace.box_side)
    }
}

/// Subdivides both colors with `j = steps_schedule(n, d)` steps and pairs
/// red with blue inside every box optimally.
pub fn constructive_matching(inst: &BipartiteInstance) -> Result<ConstructiveMatching> {
    constructive_matching_with(inst, InBoxPairing::Bottleneck)
}

pub fn constructive_matching_with(
    inst: &BipartiteInstance,
    pairing: InBoxPairing,
) -> Result<ConstructiveMatching> {
    let n = inst.len();
    let d = inst.dim();
    let j = steps_schedule(n, d);
    let red = recursive_subdivide(inst.red(), j);
    let blue = recursive_subdivide(inst.blue(), j);

    let order = |sub: &Subdivision, ps: &PointSet| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_unstable_by(|&a, &b| {
            sub.cell(a)
                .cmp(sub.cell(b))
                .then(ps.point(a)[0].total_cmp(&ps.point(b)[0]))
                .then(a.cmp(&b))
        });
        idx
    };
    let red_order = order(&red, inst.red());
    let blue_order = order(&blue, inst.blue());

    let mut phi = vec![0; n];
    let mut start = 0;
    while start < n {
        let cell = red.cell(red_order[start]);
        let end = start
            + red_order[start..]
                .iter()
                .take_while(|&&r| red.cell(r) == cell)
                .count();
        let reds = &red_order[start..end];
        let blues = &blue_order[start..end];
        if blues.iter().any(|&b| blue.cell(b) != cell) {
            return Err(Error::Degenerate("red and blue box counts diverged".into()));
        }
        match pairing {
            InBoxPairing::FirstCoordinateRank => {
                for (&r, &b) in reds.iter().zip(blues) {
                    phi[r] = b;
                }
            }
            InBoxPairing::Bottleneck if reds.len() == 1 => phi[reds[0]] = blues[0],
            InBoxPairing::Bottleneck => {
                let local = BipartiteInstance {
                    red: subset(inst.red(), reds),
                    blue: subset(inst.blue(), blues),
                    norm: inst.norm(),
                };
                // the bound inside `exact_search` comes from rank pairing,
                // so this does not recurse
                for (k, &b) in exact_search(&local).phi().iter().enumerate() {
                    phi[reds[k]] = blues[b];
                }
            }
        }
        start = end;
    }
    Ok(ConstructiveMatching {
        matching: Matching::new_unchecked(inst, phi),
        red_trace: red.trace,
        blue_trace: blue.trace,
    })
}

fn subset(ps: &PointSet, idx: &[usize]) -> PointSet {
    let coords = idx.iter().flat_map(|&i| ps.point(i).iter().copied()).collect();
    PointSet::from_flat(coords, ps.dim(), None)
}
