//! Geometric graphs `G(X; r)` and Bernoulli graphs `G(n, p)`.

use std::collections::HashMap;
use std::io::{self, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::geom::{Norm, PointSet};
use crate::rng::{self, StreamRng};

/// Read access shared by both graph families.
pub trait Adjacency {
    fn vertex_count(&self) -> usize;

    /// Sorted neighbor list of `v`, unchecked.
    fn neighbor_slice(&self, v: usize) -> &[usize];

    fn neighbors(&self, v: usize) -> Result<&[usize]> {
        let n = self.vertex_count();
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        Ok(self.neighbor_slice(v))
    }

    fn degree(&self, v: usize) -> Result<usize> {
        self.neighbors(v).map(<[usize]>::len)
    }

    fn edge_count(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.neighbor_slice(v).len())
            .sum::<usize>()
            / 2
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbor_slice(u).binary_search(&v).is_ok()
    }

    fn min_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.neighbor_slice(v).len())
            .min()
            .unwrap_or(0)
    }

    /// Unordered edges `(i, j)` with `i < j`, in lexicographic order.
    fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|i| {
                self.neighbor_slice(i)
                    .iter()
                    .filter(move |&&j| j > i)
                    .map(move |&j| (i, j))
            })
            .collect()
    }
}

/// `G(X; r)`: vertices are the points, edges join pairs at distance `≤ r`.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    points: PointSet,
    radius: f64,
    norm: Norm,
    adj: Vec<Vec<usize>>,
}

impl GeometricGraph {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// Writes the edge list: header `n d r p_norm seed`, then one `i j` per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        let seed = self
            .points
            .seed()
            .map_or_else(|| "-".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{} {} {} {} {}",
            self.points.len(),
            self.points.dim(),
            fmt_num(self.radius),
            fmt_num(self.norm.p()),
            seed
        )?;
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }
}

impl Adjacency for GeometricGraph {
    fn vertex_count(&self) -> usize {
        self.points.len()
    }

    fn neighbor_slice(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::invalid("r", format!("radius must be nonnegative, got {r}")));
    }
    Ok(())
}

/// Reference construction testing all `n(n-1)/2` pairs.
pub fn build_geometric(points: &PointSet, r: f64, norm: Norm) -> Result<GeometricGraph> {
    check_radius(r)?;
    let n = points.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        let pi = points.point(i);
        for j in i + 1..n {
            if norm.dist(pi, points.point(j)) <= r {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    // i-loop pushes to adj[j] in increasing i, so lists are already sorted
    Ok(GeometricGraph {
        points: points.clone(),
        radius: r,
        norm,
        adj,
    })
}

/// Cell-grid construction: cells of side `r`, candidates from the `3^d` block
/// around each cell. Produces exactly the edges of [`build_geometric`].
pub fn build_geometric_grid(points: &PointSet, r: f64, norm: Norm) -> Result<GeometricGraph> {
    check_radius(r)?;
    let n = points.len();
    let d = points.dim();
    if r == 0.0 {
        return Ok(GeometricGraph {
            points: points.clone(),
            radius: r,
            norm,
            adj: vec![Vec::new(); n],
        });
    }
    let per_axis = ((1.0 / r).ceil() as u64).max(1);
    let cell_of = |x: f64| ((x / r).floor() as u64).min(per_axis - 1) as i64;

    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let key: Vec<i64> = p.iter().map(|&x| cell_of(x)).collect();
        cells.entry(key).or_default().push(i);
    }

    let offsets = neighborhood_offsets(d);
    let mut adj = vec![Vec::new(); n];
    let mut probe = vec![0i64; d];
    for (key, members) in &cells {
        for off in &offsets {
            for k in 0..d {
                probe[k] = key[k] + off[k];
            }
            let Some(others) = cells.get(&probe) else {
                continue;
            };
            for &i in members {
                let pi = points.point(i);
                for &j in others {
                    if j > i && norm.dist(pi, points.point(j)) <= r {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
    }
    adj.iter_mut().for_each(|l| l.sort_unstable());
    Ok(GeometricGraph {
        points: points.clone(),
        radius: r,
        norm,
        adj,
    })
}

/// All vectors in `{-1, 0, 1}^d`.
fn neighborhood_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

/// `G(n, p)`: each unordered pair is an edge independently with probability `p`.
#[derive(Debug, Clone)]
pub struct BernoulliGraph {
    p: f64,
    seed: Option<u64>,
    adj: Vec<Vec<usize>>,
}

impl BernoulliGraph {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

impl Adjacency for BernoulliGraph {
    fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbor_slice(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }
}

pub(crate) fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(field, format!("probability must lie in [0,1], got {p}")));
    }
    Ok(())
}

pub fn build_bernoulli(n: usize, p: f64, seed: u64) -> Result<BernoulliGraph> {
    check_probability("p", p)?;
    let mut g = sample_bernoulli(n, p, &mut rng::stream(seed, 0, rng::lane::PRIMARY));
    g.seed = Some(seed);
    Ok(g)
}

/// `G(n, p)` drawn from an existing stream. Pairs are visited in
/// lexicographic order, one Bernoulli draw each.
pub fn sample_bernoulli(n: usize, p: f64, rng: &mut StreamRng) -> BernoulliGraph {
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    BernoulliGraph { p, seed: None, adj }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::sample_uniform;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::from_1d(xs).unwrap()
    }

    #[test]
    fn zero_radius_is_empty() {
        let ps = sample_uniform(30, 2, 1).unwrap();
        assert_eq!(build_geometric(&ps, 0.0, Norm::EUCLIDEAN).unwrap().edge_count(), 0);
        assert_eq!(build_geometric_grid(&ps, 0.0, Norm::EUCLIDEAN).unwrap().edge_count(), 0);
    }

    #[test]
    fn cube_diameter_gives_complete_graph() {
        for d in 1..=3 {
            let ps = sample_uniform(25, d, 3).unwrap();
            let r = (d as f64).sqrt();
            for g in [
                build_geometric(&ps, r, Norm::EUCLIDEAN).unwrap(),
                build_geometric_grid(&ps, r, Norm::EUCLIDEAN).unwrap(),
            ] {
                assert_eq!(g.edge_count(), 25 * 24 / 2);
                assert!((0..25).all(|v| g.degree(v).unwrap() == 24));
            }
        }
    }

    #[test]
    fn three_point_line() {
        let g = build_geometric(&line(&[0.1, 0.3, 0.9]), 0.25, Norm::EUCLIDEAN).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        let degs: Vec<usize> = (0..3).map(|v| g.degree(v).unwrap()).collect();
        assert_eq!(degs, vec![1, 1, 0]);
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert!(matches!(g.degree(3), Err(Error::VertexOutOfRange { vertex: 3, n: 3 })));
    }

    #[test]
    fn negative_radius_rejected() {
        let ps = line(&[0.5]);
        assert!(build_geometric(&ps, -0.1, Norm::EUCLIDEAN).is_err());
        assert!(build_geometric_grid(&ps, -0.1, Norm::EUCLIDEAN).is_err());
    }

    #[test]
    fn grid_matches_naive_on_large_instance() {
        let ps = sample_uniform(2000, 2, 99).unwrap();
        let a = build_geometric(&ps, 0.05, Norm::EUCLIDEAN).unwrap();
        let b = build_geometric_grid(&ps, 0.05, Norm::EUCLIDEAN).unwrap();
        assert_eq!(a.edge_count(), b.edge_count());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn grid_matches_naive_for_other_norms() {
        for (k, p) in [1.5, 3.0, f64::INFINITY].into_iter().enumerate() {
            let norm = Norm::new(p).unwrap();
            let ps = sample_uniform(300, 3, k as u64).unwrap();
            let a = build_geometric(&ps, 0.2, norm).unwrap();
            let b = build_geometric_grid(&ps, 0.2, norm).unwrap();
            assert_eq!(a.edges(), b.edges());
        }
    }

    #[test]
    fn handshake_and_monotone_edges() {
        let ps = sample_uniform(200, 2, 4).unwrap();
        let mut prev: Option<Vec<(usize, usize)>> = None;
        for k in 0..=10 {
            let g = build_geometric_grid(&ps, 0.03 * k as f64, Norm::EUCLIDEAN).unwrap();
            let deg_sum: usize = (0..200).map(|v| g.degree(v).unwrap()).sum();
            assert_eq!(deg_sum, 2 * g.edge_count());
            let edges = g.edges();
            if let Some(p) = &prev {
                assert!(p.iter().all(|e| edges.binary_search(e).is_ok()));
            }
            prev = Some(edges);
        }
    }

    #[test]
    fn bernoulli_extremes_and_errors() {
        assert_eq!(build_bernoulli(20, 0.0, 1).unwrap().edge_count(), 0);
        let full = build_bernoulli(20, 1.0, 1).unwrap();
        assert_eq!(full.edge_count(), 190);
        assert!((0..20).all(|v| full.degree(v).unwrap() == 19));
        assert!(build_bernoulli(5, 1.5, 1).is_err());
        assert!(build_bernoulli(5, -0.1, 1).is_err());
        assert_eq!(build_bernoulli(30, 0.4, 8).unwrap().edges(), build_bernoulli(30, 0.4, 8).unwrap().edges());
    }

    #[test]
    fn bernoulli_mean_edge_count() {
        let seeds = 10_000u64;
        let total: usize = (0..seeds).map(|s| build_bernoulli(100, 0.3, s).unwrap().edge_count()).sum();
        let mean = total as f64 / seeds as f64;
        let sigma = (4950.0f64 * 0.3 * 0.7).sqrt();
        assert!((mean - 1485.0).abs() < 3.0 * sigma, "mean {mean}");
        // standard error of the mean
        assert!((mean - 1485.0).abs() < 3.0 * sigma / (seeds as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn edge_list_dump() {
        let g = build_geometric(&line(&[0.1, 0.3, 0.9]), 0.25, Norm::EUCLIDEAN).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "3 1 0.25 2 -\n0 1\n");
    }
}
