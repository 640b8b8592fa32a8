//! Monte Carlo threshold estimation and scaling experiments.
//!
//! For an increasing property, `P{G(X_n; r) ∈ A} = P{r*(X_n) ≤ r}`, so the
//! threshold `r(n, ε)` is the `ε`-quantile of the per-sample critical radius.
//! Every experiment draws independent trials keyed by `(seed, trial)` and
//! reduces them in trial order, so results do not depend on the worker pool.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{self, critical_radius, Norm};
use crate::graphs::{build_geometric_grid, check_probability, sample_bernoulli, Adjacency};
use crate::matching::{
    constructive_matching, exact_bottleneck, sorted_bottleneck_1d, BipartiteInstance,
};
use crate::properties::{critical_radius_sample, MonotoneProperty};
use crate::rng;
use crate::stats::{loglog_slope, lower_quantile, quantile_rank, sort_f64};

/// Trial key separating the streams of different sizes within one run.
fn trial_key(n: usize, trial: usize) -> u64 {
    ((n as u64) << 32) | trial as u64
}

/// Empirical threshold location and width for one `(property, n, d, ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub property: &'static str,
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub trials: usize,
    /// `r̂(n, ε)`.
    pub r_lo: f64,
    /// `r̂(n, 1-ε)`.
    pub r_hi: f64,
    /// `r̂(n, 1/2)`.
    pub r_median: f64,
    /// `r_hi - r_lo`.
    pub width: f64,
    /// `width / r_median`; zero when the median is zero.
    pub ratio: f64,
    /// 1-based order-statistic ranks used for `r_lo`, `r_median`, `r_hi`.
    pub ranks: [usize; 3],
}

impl ThresholdEstimate {
    /// Builds the estimate from per-sample critical radii.
    pub fn from_samples(
        property: &'static str,
        n: usize,
        d: usize,
        epsilon: f64,
        mut samples: Vec<f64>,
    ) -> Result<Self> {
        check_epsilon(epsilon, samples.len())?;
        let m = samples.len();
        sort_f64(&mut samples);
        let ranks = [
            quantile_rank(epsilon, m),
            quantile_rank(0.5, m),
            quantile_rank(1.0 - epsilon, m),
        ];
        let r_lo = lower_quantile(&samples, epsilon);
        let r_median = lower_quantile(&samples, 0.5);
        let r_hi = lower_quantile(&samples, 1.0 - epsilon);
        let width = r_hi - r_lo;
        Ok(ThresholdEstimate {
            property,
            n,
            d,
            epsilon,
            trials: m,
            r_lo,
            r_hi,
            r_median,
            width,
            ratio: if r_median > 0.0 { width / r_median } else { 0.0 },
            ranks,
        })
    }
}

fn check_epsilon(epsilon: f64, trials: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid("eps", format!("need 0 < eps < 1/2, got {epsilon}")));
    }
    let need = (2.0 / epsilon).ceil() as usize;
    if trials < need {
        return Err(Error::invalid(
            "trials",
            format!("eps={epsilon} needs at least {need} trials, got {trials}"),
        ));
    }
    Ok(())
}

/// Per-sample critical radii of `trials` independent uniform point sets.
pub fn critical_radius_samples(
    prop: &MonotoneProperty,
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
    norm: Norm,
) -> Result<Vec<f64>> {
    geom::check_shape(n, d)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let ps = geom::sample_with(n, d, &mut rng::stream(seed, trial_key(n, t), rng::lane::POINTS));
            critical_radius_sample(prop, &ps, norm)
        })
        .collect())
}

/// `r̂(n, ε)`, `r̂(n, 1-ε)` and the width from `trials` samples.
pub fn estimate_threshold(
    prop: &MonotoneProperty,
    n: usize,
    d: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    norm: Norm,
) -> Result<ThresholdEstimate> {
    if n < 2 {
        return Err(Error::invalid("n", format!("threshold estimation needs n >= 2, got {n}")));
    }
    check_epsilon(epsilon, trials)?;
    let samples = critical_radius_samples(prop, n, d, trials, seed, norm)?;
    ThresholdEstimate::from_samples(prop.name(), n, d, epsilon, samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthRow {
    pub estimate: ThresholdEstimate,
    pub r_c: f64,
    pub width_over_rc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthScaling {
    pub rows: Vec<WidthRow>,
    /// Least-squares slope of `ln width` against `ln n`.
    pub slope: f64,
}

fn check_n_list(n_list: &[usize], min_len: usize) -> Result<()> {
    if n_list.len() < min_len {
        return Err(Error::invalid(
            "n_list",
            format!("need at least {min_len} sizes for a slope, got {}", n_list.len()),
        ));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_list", "sizes must be strictly ascending"));
    }
    Ok(())
}

/// One threshold estimate per size plus the log-log width slope.
pub fn width_scaling(
    prop: &MonotoneProperty,
    n_list: &[usize],
    d: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    norm: Norm,
) -> Result<WidthScaling> {
    check_n_list(n_list, 3)?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let estimate = estimate_threshold(prop, n, d, epsilon, trials, seed, norm)?;
            let r_c = critical_radius(n, d)?;
            Ok(WidthRow {
                width_over_rc: estimate.width / r_c,
                estimate,
                r_c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.estimate.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate.width).collect();
    let slope = loglog_slope(&xs, &ys)?;
    Ok(WidthScaling { rows, slope })
}

/// Solver used by the matching experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingMethod {
    /// Exact optimum; the sorted pairing when `d = 1`.
    Exact,
    /// Recursive-subdivision matching.
    Constructive,
}

impl MatchingMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(MatchingMethod::Exact),
            "constructive" => Ok(MatchingMethod::Constructive),
            other => Err(Error::invalid(
                "method",
                format!("unknown method {other:?} (expected exact or constructive)"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MatchingMethod::Exact => "exact",
            MatchingMethod::Constructive => "constructive",
        }
    }
}

/// Largest `n` accepted by the exact solver in `d ≥ 2`.
pub const EXACT_MAX_N: usize = 1 << 11;

/// Bottleneck weight of one instance under `method`.
pub fn bottleneck_weight(inst: &BipartiteInstance, method: MatchingMethod) -> Result<f64> {
    Ok(match method {
        MatchingMethod::Exact if inst.dim() == 1 => sorted_bottleneck_1d(inst)?.weight(),
        MatchingMethod::Exact => exact_bottleneck(inst).weight(),
        MatchingMethod::Constructive => constructive_matching(inst)?.matching.weight(),
    })
}

/// Bottleneck weights of `trials` independent instances of size `n`.
/// Instance `t` is the same for every method.
pub fn matching_weights(
    n: usize,
    d: usize,
    trials: usize,
    method: MatchingMethod,
    seed: u64,
    norm: Norm,
) -> Result<Vec<f64>> {
    geom::check_shape(n, d)?;
    if method == MatchingMethod::Exact && d >= 2 && n > EXACT_MAX_N {
        return Err(Error::invalid(
            "n",
            format!("exact matching is limited to n <= {EXACT_MAX_N} when d >= 2, got {n}"),
        ));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = BipartiteInstance::sample(n, d, norm, seed, trial_key(n, t))?;
            bottleneck_weight(&inst, method)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingRow {
    pub n: usize,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub r_c: f64,
    pub median_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingScaling {
    pub d: usize,
    pub method: MatchingMethod,
    pub trials: usize,
    pub rows: Vec<MatchingRow>,
    /// Least-squares slope of `ln median` against `ln n`.
    pub slope: f64,
}

pub fn matching_scaling(
    n_list: &[usize],
    d: usize,
    trials: usize,
    method: MatchingMethod,
    seed: u64,
    norm: Norm,
) -> Result<MatchingScaling> {
    check_n_list(n_list, 2)?;
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    if n_list[0] < 2 {
        return Err(Error::invalid("n_list", "sizes must be at least 2"));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            let mut w = matching_weights(n, d, trials, method, seed, norm)?;
            sort_f64(&mut w);
            let r_c = critical_radius(n, d)?;
            let median = lower_quantile(&w, 0.5);
            Ok(MatchingRow {
                n,
                median,
                q10: lower_quantile(&w, 0.1),
                q90: lower_quantile(&w, 0.9),
                r_c,
                median_ratio: median / r_c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median).collect();
    let slope = loglog_slope(&xs, &ys)?;
    Ok(MatchingScaling {
        d,
        method,
        trials,
        rows,
        slope,
    })
}

/// Outcome of [`containment_trial`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub n: usize,
    pub d: usize,
    pub r: f64,
    pub gamma: f64,
    pub trials: usize,
    /// Trials with bottleneck weight `M_n ≤ γ`.
    pub matching_ok: usize,
    /// Trials with `M_n ≤ γ` whose matching embedded every edge of `G` into `G'`.
    pub embedding_verified: usize,
    /// Bottleneck weight of every trial, in trial order.
    pub weights: Vec<f64>,
}

impl ContainmentReport {
    /// Trials where `M_n ≤ γ` but some edge failed to embed.
    pub fn embedding_failures(&self) -> usize {
        self.matching_ok - self.embedding_verified
    }
}

fn check_nonnegative(field: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::invalid(field, format!("must be nonnegative, got {x}")));
    }
    Ok(())
}

/// Embeds `G(V; r)` into an independent `G(V'; r + 2γ)` through the exact
/// bottleneck matching between `V` and `V'`, whenever its weight is `≤ γ`.
pub fn containment_trial(
    n: usize,
    d: usize,
    r: f64,
    gamma: f64,
    trials: usize,
    seed: u64,
    norm: Norm,
) -> Result<ContainmentReport> {
    check_nonnegative("r", r)?;
    check_nonnegative("gamma", gamma)?;
    geom::check_shape(n, d)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = BipartiteInstance::sample(n, d, norm, seed, trial_key(n, t))?;
            let m = exact_bottleneck(&inst);
            if m.weight() > gamma {
                return Ok((m.weight(), false, false));
            }
            let g = build_geometric_grid(inst.red(), r, norm)?;
            let g2 = build_geometric_grid(inst.blue(), r + 2.0 * gamma, norm)?;
            let phi = m.phi();
            let embeds = g.edges().into_iter().all(|(u, v)| g2.has_edge(phi[u], phi[v]));
            Ok((m.weight(), true, embeds))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContainmentReport {
        n,
        d,
        r,
        gamma,
        trials,
        matching_ok: outcomes.iter().filter(|o| o.1).count(),
        embedding_verified: outcomes.iter().filter(|o| o.1 && o.2).count(),
        weights: outcomes.into_iter().map(|o| o.0).collect(),
    })
}

/// Empirical `q`-quantile of the exact bottleneck weight from a pilot run
/// whose streams are disjoint from those of the same `seed`'s main run.
pub fn pilot_gamma(n: usize, d: usize, q: f64, trials: usize, seed: u64, norm: Norm) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid("gamma_quantile", format!("need 0 < q <= 1, got {q}")));
    }
    if trials == 0 {
        return Err(Error::invalid("pilot_trials", "need at least one trial"));
    }
    let mut w = matching_weights(n, d, trials, MatchingMethod::Exact, pilot_seed(seed), norm)?;
    sort_f64(&mut w);
    Ok(lower_quantile(&w, q))
}

pub fn pilot_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// `(1 - p(1-P))^{C(n,2)}`: probability that a fixed vertex bijection embeds
/// `G(n, p)` into an independent `G(n, P)`.
pub fn bernoulli_fixed_matching_prob(n: usize, p: f64, big_p: f64) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("P", big_p)?;
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    Ok((1.0 - p * (1.0 - big_p)).powf(pairs))
}

/// Union bound `n!·(1 - p(1-P))^{C(n,2)}` over all bijections, unclamped.
pub fn bernoulli_union_bound(n: usize, p: f64, big_p: f64) -> Result<f64> {
    let fixed = bernoulli_fixed_matching_prob(n, p, big_p)?;
    let log_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    Ok((log_fact + fixed.ln()).exp())
}

/// Fraction of trials in which `E(G) ⊆ E(G')` under the identity map, for
/// independent `G ~ G(n, p)` and `G' ~ G(n, P)`.
pub fn bernoulli_containment_mc(n: usize, p: f64, big_p: f64, trials: usize, seed: u64) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("P", big_p)?;
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = sample_bernoulli(n, p, &mut rng::stream(seed, t as u64, rng::lane::PRIMARY));
            let g2 = sample_bernoulli(n, big_p, &mut rng::stream(seed, t as u64, rng::lane::SECONDARY));
            usize::from(g.edges().into_iter().all(|(u, v)| g2.has_edge(u, v)))
        })
        .sum();
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_two_point_diameter() {
        // |U1 - U2| has CDF 2t - t², median 1 - √½
        let est = estimate_threshold(&MonotoneProperty::COMPLETE, 2, 1, 0.1, 10_000, 3, Norm::EUCLIDEAN)
            .unwrap();
        assert!((est.r_median - (1.0 - 0.5f64.sqrt())).abs() < 0.02, "{}", est.r_median);
    }

    #[test]
    fn identical_samples_have_zero_width() {
        let est = ThresholdEstimate::from_samples("complete", 5, 2, 0.1, vec![0.3; 50]).unwrap();
        assert_eq!(est.width, 0.0);
        assert_eq!(est.r_lo, est.r_hi);
        assert_eq!(est.ranks, [5, 25, 45]);
    }

    #[test]
    fn epsilon_and_trial_validation() {
        let p = MonotoneProperty::CONNECTIVITY;
        let e = Norm::EUCLIDEAN;
        assert!(matches!(estimate_threshold(&p, 10, 2, 0.5, 100, 1, e), Err(Error::InvalidConfig { field: "eps", .. })));
        assert!(matches!(estimate_threshold(&p, 10, 2, 0.0, 100, 1, e), Err(Error::InvalidConfig { field: "eps", .. })));
        assert!(matches!(estimate_threshold(&p, 10, 2, 0.1, 19, 1, e), Err(Error::InvalidConfig { field: "trials", .. })));
        assert!(estimate_threshold(&p, 10, 2, 0.1, 20, 1, e).is_ok());
        assert!(matches!(estimate_threshold(&p, 1, 2, 0.1, 20, 1, e), Err(Error::InvalidConfig { field: "n", .. })));
    }

    #[test]
    fn connectivity_width_is_sane() {
        let est = estimate_threshold(&MonotoneProperty::CONNECTIVITY, 1 << 12, 2, 0.1, 400, 7, Norm::EUCLIDEAN)
            .unwrap();
        assert!(est.width > 0.0);
        assert!(est.width < est.r_median);
        assert!(est.r_lo <= est.r_median && est.r_median <= est.r_hi);
        assert!(est.r_hi <= 2f64.sqrt());
    }

    #[test]
    fn scaling_rejects_short_lists() {
        let p = MonotoneProperty::COMPLETE;
        assert!(width_scaling(&p, &[64], 2, 0.1, 100, 1, Norm::EUCLIDEAN).is_err());
        assert!(width_scaling(&p, &[64, 128], 2, 0.1, 100, 1, Norm::EUCLIDEAN).is_err());
        assert!(width_scaling(&p, &[128, 64, 256], 2, 0.1, 100, 1, Norm::EUCLIDEAN).is_err());
        assert!(matching_scaling(&[64], 1, 10, MatchingMethod::Exact, 1, Norm::EUCLIDEAN).is_err());
        assert!(matching_scaling(&[64, 8192], 2, 1, MatchingMethod::Exact, 1, Norm::EUCLIDEAN).is_err());
    }

    #[test]
    fn method_names() {
        assert_eq!(MatchingMethod::parse("exact").unwrap(), MatchingMethod::Exact);
        assert_eq!(MatchingMethod::parse("constructive").unwrap().name(), "constructive");
        assert!(MatchingMethod::parse("greedy").is_err());
    }

    #[test]
    fn containment_degenerate_cases() {
        let big = containment_trial(20, 2, 0.1, 2f64.sqrt(), 30, 5, Norm::EUCLIDEAN).unwrap();
        assert_eq!(big.matching_ok, 30);
        assert_eq!(big.embedding_verified, 30);
        let empty = containment_trial(20, 2, 0.0, 0.2, 30, 5, Norm::EUCLIDEAN).unwrap();
        assert_eq!(empty.embedding_failures(), 0);
        assert_eq!(empty.weights.len(), 30);
        assert!(containment_trial(20, 2, -1.0, 0.2, 3, 5, Norm::EUCLIDEAN).is_err());
    }

    #[test]
    fn pilot_quantile_calibrates_gamma() {
        let n = 64;
        let r = critical_radius(n, 2).unwrap();
        let gamma = pilot_gamma(n, 2, 0.9, 400, 11, Norm::EUCLIDEAN).unwrap();
        let trials = 400;
        let rep = containment_trial(n, 2, r, gamma, trials, 11, Norm::EUCLIDEAN).unwrap();
        let frac = rep.matching_ok as f64 / trials as f64;
        // pilot quantile is itself noisy: combine both binomial spreads
        let sigma = (0.9 * 0.1 / trials as f64).sqrt() * 2f64.sqrt();
        assert!((frac - 0.9).abs() <= 3.0 * sigma, "frac {frac}");
        assert_eq!(rep.embedding_failures(), 0);
    }

    #[test]
    fn bernoulli_closed_form() {
        assert_eq!(bernoulli_fixed_matching_prob(8, 0.3, 1.0).unwrap(), 1.0);
        assert_eq!(bernoulli_fixed_matching_prob(8, 0.0, 0.2).unwrap(), 1.0);
        let v = bernoulli_fixed_matching_prob(8, 0.25, 0.75).unwrap();
        assert!((v - (15.0f64 / 16.0).powi(28)).abs() < 1e-15);
        assert!((v - 0.16413).abs() < 5e-6);
        assert!(bernoulli_fixed_matching_prob(8, 1.2, 0.5).is_err());
        let ub = bernoulli_union_bound(8, 0.25, 0.75).unwrap();
        assert!((ub / (40320.0 * v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_monte_carlo() {
        assert_eq!(bernoulli_containment_mc(8, 0.0, 0.3, 1000, 1).unwrap(), 1.0);
        let est = bernoulli_containment_mc(3, 0.5, 0.5, 100_000, 2).unwrap();
        assert!((est - 0.421_875).abs() <= 3.0 * 0.001_56, "{est}");
    }
}
