//! Rank-based recursive halving of a point set into `2^{dj}` equal boxes.
//!
//! Each split sorts the points of a box along one axis, gives the lower
//! `⌈n'/2⌉` to the lower half-box and stretches both halves affinely so the
//! order statistic just across the cut lands on the midpoint. Conditional on
//! the cut, each half stays i.i.d. uniform on its half-interval, which is
//! what lets the displacement of every split be bounded by a Chernoff tail.

use crate::error::{Error, Result};
use crate::geom::{unit_ball_volume, PointSet};

/// Result of splitting one sorted interval sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HalvingSplit {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// `u^{(k+1)} - 1/2` on the rescaled interval, `k = ⌈n'/2⌉`.
    pub delta_left: f64,
    /// `1/2 - u^{(k)}` on the rescaled interval.
    pub delta_right: f64,
}

impl HalvingSplit {
    /// `max(|δ_l|, |δ_r|)`, unitless.
    pub fn max_delta(&self) -> f64 {
        self.delta_left.abs().max(self.delta_right.abs())
    }
}

/// Affine maps for one split of a sorted unit-interval sample.
#[derive(Debug, Clone, Copy)]
struct HalvingMap {
    lower: usize,
    delta_left: f64,
    delta_right: f64,
}

impl HalvingMap {
    /// `u` sorted in `[0,1]`, nonempty. With a single point the missing
    /// upper order statistic is taken to be the interval end.
    fn new(u: &[f64]) -> Self {
        let n = u.len();
        let lower = n.div_ceil(2);
        let above = if lower < n { u[lower] } else { 1.0 };
        let below = u[lower - 1];
        HalvingMap {
            lower,
            delta_left: above - 0.5,
            delta_right: 0.5 - below,
        }
    }

    #[inline]
    fn left(&self, u: f64) -> f64 {
        let denom = 0.5 + self.delta_left;
        let v = if denom > 0.0 { u * 0.5 / denom } else { 0.0 };
        v.clamp(0.0, 0.5)
    }

    #[inline]
    fn right(&self, u: f64) -> f64 {
        let denom = 0.5 + self.delta_right;
        let v = if denom > 0.0 { 1.0 - (1.0 - u) * 0.5 / denom } else { 1.0 };
        v.clamp(0.5, 1.0)
    }
}

/// Splits the sorted `values` of the interval `[a, b]` at rank `⌈n'/2⌉` and
/// maps the lower part into `[a, (a+b)/2]`, the upper into `[(a+b)/2, b]`.
pub fn halving_transform(values: &[f64], a: f64, b: f64) -> Result<HalvingSplit> {
    if values.len() < 2 {
        return Err(Error::invalid(
            "values",
            format!("a split needs at least two points, got {}", values.len()),
        ));
    }
    if !(a < b) {
        return Err(Error::invalid("interval", format!("empty interval [{a}, {b}]")));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("values", "values must be sorted ascending"));
    }
    if values.iter().any(|&x| x < a || x > b) {
        return Err(Error::invalid("values", format!("values must lie in [{a}, {b}]")));
    }
    let len = b - a;
    let u: Vec<f64> = values.iter().map(|&x| ((x - a) / len).clamp(0.0, 1.0)).collect();
    let map = HalvingMap::new(&u);
    let (lo, hi) = u.split_at(map.lower);
    Ok(HalvingSplit {
        left: lo.iter().map(|&v| a + len * map.left(v)).collect(),
        right: hi.iter().map(|&v| a + len * map.right(v)).collect(),
        delta_left: map.delta_left,
        delta_right: map.delta_right,
    })
}

/// Number of full subdivision steps: `⌈log₂ n⌉` for `d ≤ 2`, otherwise
/// `⌈log₂(n / ln n) / d⌉`. Zero for `n ≤ 1`.
pub fn steps_schedule(n: usize, d: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let nf = n as f64;
    let raw = if d <= 2 {
        nf.log2()
    } else {
        (nf / nf.ln()).log2() / d as f64
    };
    raw.ceil().max(0.0) as usize
}

/// Displacement record of one subdivision.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTrace {
    /// Largest displacement of any point in each axis split, in order
    /// (step 1 axis 0, step 1 axis 1, ...).
    pub per_split_max_shift: Vec<f64>,
    /// Largest net displacement of any point along any coordinate.
    pub total_max_shift: f64,
    pub steps: usize,
    pub box_side: f64,
}

impl ShiftTrace {
    /// Sum of the per-split maxima; bounds `total_max_shift`.
    pub fn shift_budget(&self) -> f64 {
        self.per_split_max_shift.iter().sum()
    }

    /// Maxima grouped per step (max over the axes split in that step).
    pub fn per_step_max_shift(&self, d: usize) -> Vec<f64> {
        self.per_split_max_shift
            .chunks(d.max(1))
            .map(|c| c.iter().copied().fold(0.0, f64::max))
            .collect()
    }
}

/// Outcome of [`recursive_subdivide`].
#[derive(Debug, Clone)]
pub struct Subdivision {
    dim: usize,
    /// Box multi-index per point, row-major `n × d`.
    cells: Vec<u32>,
    /// Transformed positions, row-major `n × d`.
    positions: Vec<f64>,
    pub trace: ShiftTrace,
}

impl Subdivision {
    pub fn cell(&self, i: usize) -> &[u32] {
        &self.cells[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.cells.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Point count per occupied box, keyed by multi-index, in lexicographic order.
    pub fn box_counts(&self) -> Vec<(Vec<u32>, usize)> {
        let mut keys: Vec<&[u32]> = (0..self.len()).map(|i| self.cell(i)).collect();
        keys.sort_unstable();
        let mut out: Vec<(Vec<u32>, usize)> = Vec::new();
        for k in keys {
            match out.last_mut() {
                Some((last, c)) if last.as_slice() == k => *c += 1,
                _ => out.push((k.to_vec(), 1)),
            }
        }
        out
    }
}

/// Runs `j` full steps of axis-cycling halving splits inside every box.
pub fn recursive_subdivide(points: &PointSet, j: usize) -> Subdivision {
    let d = points.dim();
    let n = points.len();
    let original = points.coords();
    let mut positions = original.to_vec();
    let mut cells = vec![0u32; n * d];
    let mut per_split = Vec::with_capacity(j * d);

    // boxes as (multi-index, members)
    let mut boxes: Vec<(Vec<u32>, Vec<u32>)> = vec![(vec![0; d], (0..n as u32).collect())];
    let mut unit = Vec::new();
    for step in 0..j {
        let side = 0.5f64.powi(step as i32);
        for axis in 0..d {
            let mut next = Vec::with_capacity(boxes.len() * 2);
            let mut pass_max = 0.0f64;
            for (cell, mut members) in boxes {
                let a = cell[axis] as f64 * side;
                members.sort_unstable_by(|&p, &q| {
                    positions[p as usize * d + axis]
                        .total_cmp(&positions[q as usize * d + axis])
                        .then(p.cmp(&q))
                });
                unit.clear();
                unit.extend(
                    members
                        .iter()
                        .map(|&m| ((positions[m as usize * d + axis] - a) / side).clamp(0.0, 1.0)),
                );
                let map = HalvingMap::new(&unit);
                for (rank, &m) in members.iter().enumerate() {
                    let slot = m as usize * d + axis;
                    let mapped = if rank < map.lower {
                        map.left(unit[rank])
                    } else {
                        map.right(unit[rank])
                    };
                    let x = a + side * mapped;
                    pass_max = pass_max.max((x - positions[slot]).abs());
                    positions[slot] = x;
                    cells[slot] = 2 * cell[axis] + u32::from(rank >= map.lower);
                }
                let upper = members.split_off(map.lower);
                let mut lo_cell = cell.clone();
                lo_cell[axis] *= 2;
                let mut hi_cell = cell;
                hi_cell[axis] = 2 * hi_cell[axis] + 1;
                next.push((lo_cell, members));
                if !upper.is_empty() {
                    next.push((hi_cell, upper));
                }
            }
            per_split.push(pass_max);
            boxes = next;
        }
    }

    let total = positions
        .iter()
        .zip(original)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Subdivision {
        dim: d,
        cells,
        positions,
        trace: ShiftTrace {
            per_split_max_shift: per_split,
            total_max_shift: total,
            steps: j,
            box_side: 0.5f64.powi(j as i32),
        },
    }
}

/// Per-step shift allowance `γ_i` with `γ_i² n / 2^{(i-1)(d-2)} = β² ln n`,
/// `i = 1..=steps`. Diagnostic only.
pub fn gamma_schedule(n: usize, d: usize, beta: f64, steps: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..=steps)
        .map(|i| {
            let growth = 2f64.powf((i as f64 - 1.0) * (d as f64 - 2.0));
            beta * (nf.ln() * growth / nf).sqrt()
        })
        .collect()
}

/// One-dimensional allowances `β_i` with `2^i β_i² = β₀² + i`. The shift
/// allowance in step `i` is `β_i / √n`. Diagnostic only.
pub fn beta_schedule_1d(beta0: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|i| ((beta0 * beta0 + i as f64) / 2f64.powi(i as i32)).sqrt())
        .collect()
}

/// `√d + 2√d·π_d^{1/d}`: the constant above which `M_n ≤ c·β·r_c` w.h.p. for `d ≥ 3`.
pub fn shift_constant(d: usize) -> f64 {
    let s = (d as f64).sqrt();
    s + 2.0 * s * unit_ball_volume(d).powf(1.0 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::sample_uniform;
    use crate::rng;
    use crate::stats::{ks_statistic_uniform, median, sort_f64};
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-5)
    }

    #[test]
    fn halving_worked_example() {
        let s = halving_transform(&[0.1, 0.2, 0.3, 0.8], 0.0, 1.0).unwrap();
        assert!((s.delta_left + 0.2).abs() < 1e-12);
        assert!((s.delta_right - 0.3).abs() < 1e-12);
        assert!(close(&s.left, &[0.16667, 0.33333]), "{:?}", s.left);
        assert!(close(&s.right, &[0.5625, 0.875]), "{:?}", s.right);
    }

    #[test]
    fn halving_two_points() {
        let s = halving_transform(&[0.25, 0.75], 0.0, 1.0).unwrap();
        assert!((s.delta_left - 0.25).abs() < 1e-12);
        assert!((s.delta_right - 0.25).abs() < 1e-12);
        assert!(close(&s.left, &[0.16667]));
        assert!(close(&s.right, &[0.83333]));
    }

    #[test]
    fn halving_symmetric_input_mirrors() {
        let xs = [0.1, 0.3, 0.45, 0.55, 0.7, 0.9];
        let s = halving_transform(&xs, 0.0, 1.0).unwrap();
        // both cut offsets measure the same gap to the midpoint
        assert!((s.delta_left - s.delta_right).abs() < 1e-12);
        assert!((s.delta_left - 0.05).abs() < 1e-12);
        for (l, r) in s.left.iter().zip(s.right.iter().rev()) {
            assert!((l + r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn halving_on_subinterval_scales() {
        // same sample as the worked example, placed in [0.5, 0.75]
        let xs: Vec<f64> = [0.1, 0.2, 0.3, 0.8].iter().map(|x| 0.5 + 0.25 * x).collect();
        let s = halving_transform(&xs, 0.5, 0.75).unwrap();
        assert!((s.delta_left + 0.2).abs() < 1e-12);
        let want: Vec<f64> = [0.16667, 0.33333].iter().map(|x| 0.5 + 0.25 * x).collect();
        assert!(close(&s.left, &want));
    }

    #[test]
    fn halving_odd_count_gives_lower_half_the_extra_point() {
        let s = halving_transform(&[0.1, 0.4, 0.6], 0.0, 1.0).unwrap();
        assert_eq!(s.left.len(), 2);
        assert_eq!(s.right.len(), 1);
        assert!((s.delta_left - 0.1).abs() < 1e-12);
        assert!((s.delta_right - 0.1).abs() < 1e-12);
    }

    #[test]
    fn halving_rejects_bad_input() {
        assert!(halving_transform(&[0.3], 0.0, 1.0).is_err());
        assert!(halving_transform(&[], 0.0, 1.0).is_err());
        assert!(halving_transform(&[0.5, 0.2], 0.0, 1.0).is_err());
        assert!(halving_transform(&[0.2, 1.5], 0.0, 1.0).is_err());
        assert!(halving_transform(&[0.2, 0.3], 1.0, 1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(steps_schedule(1024, 3), 3);
        assert_eq!(steps_schedule(1024, 1), 10);
        assert_eq!(steps_schedule(1024, 2), 10);
        assert_eq!(steps_schedule(4096, 4), 3);
        assert_eq!(steps_schedule(1000, 1), 10);
        assert_eq!(steps_schedule(1, 3), 0);
    }

    #[test]
    fn zero_steps_is_identity() {
        let ps = sample_uniform(40, 3, 1).unwrap();
        let sub = recursive_subdivide(&ps, 0);
        assert_eq!(sub.trace.total_max_shift, 0.0);
        assert!(sub.trace.per_split_max_shift.is_empty());
        assert_eq!(sub.trace.box_side, 1.0);
        assert_eq!(sub.box_counts(), vec![(vec![0, 0, 0], 40)]);
    }

    #[test]
    fn full_schedule_gives_one_point_per_box() {
        for (d, j) in [(1usize, 6usize), (2, 4), (2, 5)] {
            let n = 1usize << (d * j);
            let ps = sample_uniform(n, d, j as u64).unwrap();
            let sub = recursive_subdivide(&ps, j);
            let counts = sub.box_counts();
            assert_eq!(counts.len(), n);
            assert!(counts.iter().all(|(_, c)| *c == 1));
        }
    }

    #[test]
    fn equal_counts_in_three_dimensions() {
        let ps = sample_uniform(4096, 3, 5).unwrap();
        let sub = recursive_subdivide(&ps, 3);
        let counts = sub.box_counts();
        assert_eq!(counts.len(), 512);
        assert!(counts.iter().all(|(_, c)| *c == 8));
        assert_eq!(sub.trace.per_split_max_shift.len(), 9);
        assert_eq!(sub.trace.per_step_max_shift(3).len(), 3);
        assert_eq!(sub.trace.box_side, 0.125);
    }

    #[test]
    fn positions_land_in_their_boxes() {
        let ps = sample_uniform(777, 3, 9).unwrap();
        let sub = recursive_subdivide(&ps, 2);
        let side = sub.trace.box_side;
        for i in 0..sub.len() {
            for (x, &c) in sub.position(i).iter().zip(sub.cell(i)) {
                assert!(*x >= c as f64 * side - 1e-12 && *x <= (c + 1) as f64 * side + 1e-12);
            }
        }
        assert!(sub.trace.total_max_shift <= sub.trace.shift_budget() + 1e-12);
    }

    #[test]
    fn rank_split_matches_between_equal_sizes() {
        for n in [1usize, 2, 3, 5, 17, 100, 333] {
            let a = recursive_subdivide(&sample_uniform(n, 2, 1).unwrap(), 3);
            let b = recursive_subdivide(&sample_uniform(n, 2, 2).unwrap(), 3);
            assert_eq!(a.box_counts(), b.box_counts(), "n={n}");
        }
    }

    #[test]
    fn schedules() {
        let g = gamma_schedule(1 << 12, 3, 1.0, 3);
        assert_eq!(g.len(), 3);
        // grows by √2 per step when d = 3
        assert!((g[1] / g[0] - 2f64.sqrt()).abs() < 1e-12);
        let b = beta_schedule_1d(1.0, 4);
        for (i, bi) in b.iter().enumerate() {
            let i = (i + 1) as f64;
            assert!((2f64.powf(i) * bi * bi - (1.0 + i)).abs() < 1e-12);
        }
        assert!((shift_constant(3) - (3f64.sqrt() * (1.0 + 2.0 * (4.0 * std::f64::consts::PI / 3.0).cbrt()))).abs() < 1e-12);
    }

    /// Left half of a split of `n'` uniform points, rescaled to `[0,1]`, is
    /// indistinguishable from a fresh uniform sample of the same size: the
    /// median KS distance sits at the Kolmogorov null median for 128 points,
    /// 0.071885 (and a biased transform would push it well above).
    #[test]
    fn left_half_stays_uniform() {
        let ks: Vec<f64> = (0..500u64)
            .map(|t| {
                let mut rng = rng::stream(31, t, rng::lane::POINTS);
                let mut xs: Vec<f64> = (0..256).map(|_| rng.random::<f64>()).collect();
                sort_f64(&mut xs);
                let s = halving_transform(&xs, 0.0, 1.0).unwrap();
                ks_statistic_uniform(s.left.iter().map(|x| 2.0 * x).collect())
            })
            .collect();
        let med = median(&ks);
        assert!((med - 0.071_885).abs() < 0.004, "median KS {med}");
    }

    /// Frequency of a large split offset stays under the Chernoff tail.
    #[test]
    fn split_offset_tail() {
        let trials = 2000u64;
        let deltas: Vec<f64> = (0..trials)
            .map(|t| {
                let mut rng = rng::stream(77, t, rng::lane::POINTS);
                let mut xs: Vec<f64> = (0..1024).map(|_| rng.random::<f64>()).collect();
                sort_f64(&mut xs);
                halving_transform(&xs, 0.0, 1.0).unwrap().max_delta()
            })
            .collect();
        for gamma in [0.02, 0.04] {
            let freq = deltas.iter().filter(|&&x| x > gamma).count() as f64 / trials as f64;
            let bound = 2.5 * (-1024.0 * gamma * gamma).exp();
            assert!(freq <= bound, "γ={gamma}: {freq} > {bound}");
        }
    }

    proptest! {
        #[test]
        fn halving_invariants(mut xs in prop::collection::vec(0.0f64..=1.0, 2..60),
                              a in 0.0f64..0.5, w in 0.01f64..0.5) {
            let b = a + w;
            for x in xs.iter_mut() {
                *x = a + w * *x;
            }
            sort_f64(&mut xs);
            let xs: Vec<f64> = xs.iter().map(|x| x.clamp(a, b)).collect();
            let s = halving_transform(&xs, a, b).unwrap();
            let mid = 0.5 * (a + b);
            prop_assert_eq!(s.left.len(), xs.len().div_ceil(2));
            prop_assert!(s.left.iter().all(|&x| x >= a - 1e-12 && x <= mid + 1e-12));
            prop_assert!(s.right.iter().all(|&x| x >= mid - 1e-12 && x <= b + 1e-12));
            let out: Vec<f64> = s.left.iter().chain(&s.right).copied().collect();
            prop_assert!(out.windows(2).all(|p| p[0] <= p[1]));
            let bound = s.max_delta() * w;
            for (x, y) in xs.iter().zip(&out) {
                prop_assert!((x - y).abs() <= bound + 1e-12);
            }
        }
    }
}
