use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use rgg_lab_core::format::fmt_num;
use rgg_lab_core::geom::{critical_radius, sample_uniform};
use rgg_lab_core::graphs::build_geometric_grid;
use rgg_lab_core::matching::{
    beta_schedule_1d, brute_force_bottleneck, constructive_matching, exact_bottleneck,
    gamma_schedule, sorted_bottleneck_1d, BipartiteInstance, Matching,
};
use rgg_lab_core::properties::MonotoneProperty;
use rgg_lab_core::thresholds::{
    bernoulli_containment_mc, bernoulli_fixed_matching_prob, bernoulli_union_bound,
    containment_trial, estimate_threshold, matching_scaling, pilot_gamma, width_scaling,
    MatchingMethod,
};
use rgg_lab_core::{Error, Norm};

use crate::output::{emit_csv, write_atomic, Csv};
use crate::svg::{Plot, Series};

#[derive(Debug, Parser)]
#[command(name = "rgg-lab", version, about = "Sharp-threshold experiments for random geometric graphs")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "RGG_LAB_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one bottleneck matching instance.
    Bottleneck(BottleneckArgs),
    /// Estimate r(n,eps), r(n,1-eps) and the threshold width.
    Threshold(ThresholdArgs),
    /// Scaling of matching weights or threshold widths with n.
    Scaling(ScalingArgs),
    /// Embed G(V;r) into G(V';r+2 gamma) through the bottleneck matching.
    Containment(ContainmentArgs),
    /// Containment of G(n,p) in G(n,P) under a fixed bijection.
    Bernoulli(BernoulliArgs),
    /// Write the edge list of one geometric graph.
    DumpGraph(DumpGraphArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Exponent p of the l_p norm (p > 1; "inf" for max norm).
    #[arg(long = "p-norm", default_value_t = 2.0)]
    pub p_norm: f64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Exact,
    Constructive,
    Brute,
    Sorted,
}

#[derive(Debug, Args)]
pub struct BottleneckArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: SolverArg,
    /// Write the matching as `red blue distance` rows.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Print observed and theoretical per-step shifts (constructive only).
    #[arg(long)]
    pub trace: bool,
    /// Scale of the theoretical shift schedule (beta, or beta_0 when d = 1).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub property: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Experiment {
    Matching,
    Width,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    #[arg(long)]
    pub d: usize,
    /// Comma-separated ascending sizes.
    #[arg(long = "n-list", value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long)]
    pub trials: usize,
    /// Matching solver: exact or constructive.
    #[arg(long, default_value = "exact")]
    pub method: String,
    /// Property for width scaling.
    #[arg(long, default_value = "connectivity")]
    pub property: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Log-log axes in the SVG.
    #[arg(long)]
    pub loglog: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ContainmentArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Radius of G.
    #[arg(long, conflicts_with = "r_rc")]
    pub r: Option<f64>,
    /// Radius of G as a multiple of r_c.
    #[arg(long = "r-rc")]
    pub r_rc: Option<f64>,
    #[arg(long, conflicts_with = "gamma_quantile")]
    pub gamma: Option<f64>,
    /// Take gamma as this quantile of M_n from a pilot run.
    #[arg(long = "gamma-quantile")]
    pub gamma_quantile: Option<f64>,
    /// Pilot trials; defaults to --trials.
    #[arg(long = "pilot-trials")]
    pub pilot_trials: Option<usize>,
    #[arg(long)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BernoulliArgs {
    #[arg(long)]
    pub n: usize,
    /// Edge probability of G.
    #[arg(long)]
    pub p: f64,
    /// Edge probability of G'.
    #[arg(long = "big-p")]
    pub big_p: f64,
    #[arg(long)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpGraphArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "p-norm", default_value_t = 2.0)]
    pub p_norm: f64,
    /// Destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration; exit status 2.
    Invalid(String),
    /// Failure while running; exit status 1.
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig { .. } | Error::DimensionMismatch { .. } | Error::SizeMismatch { .. } => {
                CliError::Invalid(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("invalid {field}: {reason}"))
}

fn check_dim(d: usize) -> CliResult<()> {
    if d == 0 {
        return Err(invalid("--d", "dimension must be at least 1"));
    }
    Ok(())
}

fn check_trials(trials: usize) -> CliResult<()> {
    if trials == 0 {
        return Err(invalid("--trials", "need at least one trial"));
    }
    Ok(())
}

fn check_eps(eps: f64) -> CliResult<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("--eps", format!("need 0 < eps < 1/2, got {eps}")));
    }
    Ok(())
}

fn check_prob(field: &str, p: f64) -> CliResult<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(field, format!("probability must lie in [0,1], got {p}")));
    }
    Ok(())
}

fn norm_of(p: f64) -> CliResult<Norm> {
    Norm::new(p).map_err(|_| invalid("--p-norm", format!("need p > 1, got {p}")))
}

/// Runs the command on a pool of `--jobs` workers and returns the summary line.
pub fn run(cli: Cli) -> CliResult<String> {
    let jobs = match cli.jobs {
        Some(0) => return Err(invalid("--jobs", "need at least one worker")),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Bottleneck(a) => bottleneck(a),
        Command::Threshold(a) => threshold(a),
        Command::Scaling(a) => scaling(a),
        Command::Containment(a) => containment(a),
        Command::Bernoulli(a) => bernoulli(a),
        Command::DumpGraph(a) => dump_graph(a),
    })
}

fn bottleneck(a: BottleneckArgs) -> CliResult<String> {
    check_dim(a.d)?;
    if a.n == 0 {
        return Err(invalid("--n", "need at least one point"));
    }
    let norm = norm_of(a.common.p_norm)?;
    let inst = BipartiteInstance::sample(a.n, a.d, norm, a.common.seed, 0)?;
    let mut csv = Csv::new("n,d,p_norm,seed,method,weight,steps,shift_red,shift_blue,shift_bound");
    let head = [
        a.n.to_string(),
        a.d.to_string(),
        fmt_num(norm.p()),
        a.common.seed.to_string(),
    ];
    let mut trace_text = String::new();
    let (name, matching): (&str, Matching) = match a.method {
        SolverArg::Exact => ("exact", exact_bottleneck(&inst)),
        SolverArg::Brute => ("brute", brute_force_bottleneck(&inst)?),
        SolverArg::Sorted => ("sorted", sorted_bottleneck_1d(&inst)?),
        SolverArg::Constructive => {
            let c = constructive_matching(&inst)?;
            let bound = c.shift_bound(norm, a.d);
            csv.row(head.iter().cloned().chain([
                "constructive".to_string(),
                fmt_num(c.matching.weight()),
                c.red_trace.steps.to_string(),
                fmt_num(c.red_trace.total_max_shift),
                fmt_num(c.blue_trace.total_max_shift),
                fmt_num(bound),
            ]));
            if a.trace {
                let steps = c.red_trace.steps;
                let theory: Vec<f64> = if a.d == 1 {
                    let root_n = (a.n as f64).sqrt();
                    beta_schedule_1d(a.beta, steps).into_iter().map(|b| b / root_n).collect()
                } else {
                    gamma_schedule(a.n, a.d, a.beta, steps)
                };
                let red = c.red_trace.per_step_max_shift(a.d);
                let blue = c.blue_trace.per_step_max_shift(a.d);
                for i in 0..steps {
                    let _ = writeln!(
                        trace_text,
                        "step {}: observed red {} blue {} theoretical {}",
                        i + 1,
                        fmt_num(red[i]),
                        fmt_num(blue[i]),
                        fmt_num(theory[i])
                    );
                }
            }
            ("constructive", c.matching)
        }
    };
    if !matches!(a.method, SolverArg::Constructive) {
        csv.row(head.iter().cloned().chain([
            name.to_string(),
            fmt_num(matching.weight()),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]));
    }
    emit_csv(&csv, a.common.csv.as_deref())?;
    if let Some(path) = &a.dump {
        let mut buf = Vec::new();
        matching.write_dump(&inst, &mut buf)?;
        write_atomic(path, &buf)?;
    }
    eprint!("{trace_text}");
    let r_c = if a.n >= 2 { critical_radius(a.n, a.d)? } else { f64::NAN };
    Ok(format!(
        "bottleneck {name}: n={} d={} M_n={} M_n/r_c={}",
        a.n,
        a.d,
        fmt_num(matching.weight()),
        fmt_num(matching.weight() / r_c)
    ))
}

const WIDTH_HEADER: &str = "n,d,property,eps,trials,seed,r_lo,r_hi,width,r_median,r_c,width_over_rc";

fn width_row(
    csv: &mut Csv,
    est: &rgg_lab_core::thresholds::ThresholdEstimate,
    seed: u64,
    r_c: f64,
) {
    csv.row([
        est.n.to_string(),
        est.d.to_string(),
        est.property.to_string(),
        fmt_num(est.epsilon),
        est.trials.to_string(),
        seed.to_string(),
        fmt_num(est.r_lo),
        fmt_num(est.r_hi),
        fmt_num(est.width),
        fmt_num(est.r_median),
        fmt_num(r_c),
        fmt_num(est.width / r_c),
    ]);
}

fn threshold(a: ThresholdArgs) -> CliResult<String> {
    check_dim(a.d)?;
    check_eps(a.eps)?;
    check_trials(a.trials)?;
    let prop = MonotoneProperty::by_name(&a.property).map_err(|_| {
        invalid("--property", format!("unknown property {:?} (connectivity, mindeg-quarter, complete)", a.property))
    })?;
    let norm = norm_of(a.common.p_norm)?;
    let est = estimate_threshold(&prop, a.n, a.d, a.eps, a.trials, a.common.seed, norm)?;
    let r_c = critical_radius(a.n, a.d)?;
    let mut csv = Csv::new(WIDTH_HEADER);
    width_row(&mut csv, &est, a.common.seed, r_c);
    emit_csv(&csv, a.common.csv.as_deref())?;
    Ok(format!(
        "threshold {}: n={} d={} r_lo={} r_hi={} width={} width/r_median={}",
        prop.name(),
        a.n,
        a.d,
        fmt_num(est.r_lo),
        fmt_num(est.r_hi),
        fmt_num(est.width),
        fmt_num(est.ratio)
    ))
}

fn scaling(a: ScalingArgs) -> CliResult<String> {
    check_dim(a.d)?;
    check_trials(a.trials)?;
    let norm = norm_of(a.common.p_norm)?;
    let seed = a.common.seed;
    let (csv, plot, summary) = match a.experiment {
        Experiment::Matching => {
            let method = MatchingMethod::parse(&a.method)
                .map_err(|_| invalid("--method", format!("unknown method {:?} (exact, constructive)", a.method)))?;
            let res = matching_scaling(&a.n_list, a.d, a.trials, method, seed, norm)?;
            let mut csv = Csv::new("n,d,p_norm,method,trials,seed,median_Mn,q10_Mn,q90_Mn,r_c,median_ratio");
            for r in &res.rows {
                csv.row([
                    r.n.to_string(),
                    a.d.to_string(),
                    fmt_num(norm.p()),
                    method.name().to_string(),
                    a.trials.to_string(),
                    seed.to_string(),
                    fmt_num(r.median),
                    fmt_num(r.q10),
                    fmt_num(r.q90),
                    fmt_num(r.r_c),
                    fmt_num(r.median_ratio),
                ]);
            }
            let plot = Plot {
                title: format!("bottleneck matching, d={}, {}", a.d, method.name()),
                x_label: "n".into(),
                y_label: "M_n".into(),
                log_log: a.loglog,
                series: vec![
                    Series {
                        label: "median M_n".into(),
                        points: res.rows.iter().map(|r| (r.n as f64, r.median)).collect(),
                    },
                    Series {
                        label: "r_c".into(),
                        points: res.rows.iter().map(|r| (r.n as f64, r.r_c)).collect(),
                    },
                ],
            };
            let summary = format!(
                "scaling matching: d={} method={} slope={}",
                a.d,
                method.name(),
                fmt_num(res.slope)
            );
            (csv, plot, summary)
        }
        Experiment::Width => {
            check_eps(a.eps)?;
            let prop = MonotoneProperty::by_name(&a.property).map_err(|_| {
                invalid("--property", format!("unknown property {:?} (connectivity, mindeg-quarter, complete)", a.property))
            })?;
            let res = width_scaling(&prop, &a.n_list, a.d, a.eps, a.trials, seed, norm)?;
            let mut csv = Csv::new(WIDTH_HEADER);
            for r in &res.rows {
                width_row(&mut csv, &r.estimate, seed, r.r_c);
            }
            let plot = Plot {
                title: format!("threshold width, {}, d={}, eps={}", prop.name(), a.d, fmt_num(a.eps)),
                x_label: "n".into(),
                y_label: "width".into(),
                log_log: a.loglog,
                series: vec![
                    Series {
                        label: "width".into(),
                        points: res.rows.iter().map(|r| (r.estimate.n as f64, r.estimate.width)).collect(),
                    },
                    Series {
                        label: "r_c".into(),
                        points: res.rows.iter().map(|r| (r.estimate.n as f64, r.r_c)).collect(),
                    },
                ],
            };
            let summary = format!(
                "scaling width: property={} d={} eps={} slope={}",
                prop.name(),
                a.d,
                fmt_num(a.eps),
                fmt_num(res.slope)
            );
            (csv, plot, summary)
        }
    };
    emit_csv(&csv, a.common.csv.as_deref())?;
    if let Some(path) = &a.svg {
        write_atomic(path, plot.render().as_bytes())?;
    }
    Ok(summary)
}

fn containment(a: ContainmentArgs) -> CliResult<String> {
    check_dim(a.d)?;
    check_trials(a.trials)?;
    if a.n < 2 {
        return Err(invalid("--n", "need n >= 2"));
    }
    let norm = norm_of(a.common.p_norm)?;
    let seed = a.common.seed;
    let r = match (a.r, a.r_rc) {
        (Some(r), None) => r,
        (None, Some(k)) => k * critical_radius(a.n, a.d)?,
        (None, None) => critical_radius(a.n, a.d)?,
        (Some(_), Some(_)) => return Err(invalid("--r", "give either --r or --r-rc")),
    };
    if !(r >= 0.0) {
        return Err(invalid("--r", format!("radius must be nonnegative, got {r}")));
    }
    let gamma = match (a.gamma, a.gamma_quantile) {
        (Some(g), None) => g,
        (None, Some(q)) => {
            if !(q > 0.0 && q <= 1.0) {
                return Err(invalid("--gamma-quantile", format!("need 0 < q <= 1, got {q}")));
            }
            pilot_gamma(a.n, a.d, q, a.pilot_trials.unwrap_or(a.trials), seed, norm)?
        }
        _ => return Err(invalid("--gamma", "give exactly one of --gamma or --gamma-quantile")),
    };
    if !(gamma >= 0.0) {
        return Err(invalid("--gamma", format!("must be nonnegative, got {gamma}")));
    }
    let rep = containment_trial(a.n, a.d, r, gamma, a.trials, seed, norm)?;
    let frac_ok = rep.matching_ok as f64 / rep.trials as f64;
    let frac_embed = rep.embedding_verified as f64 / rep.trials as f64;
    let mut csv = Csv::new("n,d,r,gamma,trials,seed,frac_Mn_le_gamma,frac_embedding_ok");
    csv.row([
        a.n.to_string(),
        a.d.to_string(),
        fmt_num(r),
        fmt_num(gamma),
        a.trials.to_string(),
        seed.to_string(),
        fmt_num(frac_ok),
        fmt_num(frac_embed),
    ]);
    emit_csv(&csv, a.common.csv.as_deref())?;
    let summary = format!(
        "containment: n={} d={} r={} gamma={} M_n<=gamma in {}/{} trials, embedding failures {}",
        a.n,
        a.d,
        fmt_num(r),
        fmt_num(gamma),
        rep.matching_ok,
        rep.trials,
        rep.embedding_failures()
    );
    if rep.embedding_failures() > 0 {
        return Err(CliError::Runtime(summary));
    }
    Ok(summary)
}

fn bernoulli(a: BernoulliArgs) -> CliResult<String> {
    check_prob("--p", a.p)?;
    check_prob("--big-p", a.big_p)?;
    check_trials(a.trials)?;
    let mc = bernoulli_containment_mc(a.n, a.p, a.big_p, a.trials, a.seed)?;
    let exact = bernoulli_fixed_matching_prob(a.n, a.p, a.big_p)?;
    let three_sigma = 3.0 * (exact * (1.0 - exact) / a.trials as f64).sqrt();
    let mut csv = Csv::new("n,p,P,trials,seed,mc_estimate,closed_form,abs_error,three_sigma");
    csv.row([
        a.n.to_string(),
        fmt_num(a.p),
        fmt_num(a.big_p),
        a.trials.to_string(),
        a.seed.to_string(),
        fmt_num(mc),
        fmt_num(exact),
        fmt_num((mc - exact).abs()),
        fmt_num(three_sigma),
    ]);
    emit_csv(&csv, a.csv.as_deref())?;
    Ok(format!(
        "bernoulli: n={} estimate={} closed_form={} union_bound={}",
        a.n,
        fmt_num(mc),
        fmt_num(exact),
        fmt_num(bernoulli_union_bound(a.n, a.p, a.big_p)?)
    ))
}

fn dump_graph(a: DumpGraphArgs) -> CliResult<String> {
    check_dim(a.d)?;
    let norm = norm_of(a.p_norm)?;
    let points = sample_uniform(a.n, a.d, a.seed)?;
    let g = build_geometric_grid(&points, a.r, norm)?;
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    write_to(a.out.as_deref(), &buf)?;
    Ok(format!(
        "dump-graph: n={} d={} r={} edges={}",
        a.n,
        a.d,
        fmt_num(a.r),
        rgg_lab_core::graphs::Adjacency::edge_count(&g)
    ))
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(bytes)?;
        }
    }
    Ok(())
}
