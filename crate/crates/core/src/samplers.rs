//! Sampling-based maximizers and their exact baselines.
//!
//! * [`sampling_optimize`]: draw `N` inputs, read off each one's activation
//!   pattern, and keep the best optimum of the corresponding region LP.
//! * [`enhanced_optimize`]: the same loop, but whenever a region optimum is
//!   within `gap` (relative) of the incumbent, climb from it through
//!   neighbouring regions by solving small MIPs that free only the neurons
//!   sitting on their switching hyperplane.
//! * [`full_mip_optimize`]: branch-and-bound on the whole big-M model,
//!   optionally seeded with a sampling result.
//! * [`brute_force_oracle`]: every activation pattern's LP, for small nets.
//!
//! Iteration `i` always draws from the RNG substream `(seed, i)`, so results
//! do not depend on thread count or on whether rayon is enabled. Region LPs
//! for a batch are solved in parallel; the incumbent is reduced in
//! iteration order, keeping the earliest iteration on ties.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{build_full_mip, compute_bounds, ReluMipFormulation};
use crate::linprog::{solve_lp, LpOutcome};
use crate::mipsolver::{solve_mip, MipOptions, MipStatus};
use crate::network::{iteration_rng, ActivationPattern, ReluNetwork, DEFAULT_EPS_BOUNDARY};
use crate::par;
use crate::polytope::Polytope;

/// Largest hidden-neuron count the exhaustive oracle accepts.
pub const ORACLE_MAX_NEURONS: usize = 20;
pub const DEFAULT_GAP: f64 = 2.0 / 3.0;
/// Relative gap used for the restricted MIPs of local search and for the
/// full model.
const EXACT_GAP_TOL: f64 = 1e-9;
/// Iterations per batch when a time budget has to be polled.
const BUDGET_BATCH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub gap: f64,
    pub eps_boundary: f64,
    pub seed: u64,
    pub time_budget: Option<Duration>,
    pub dedupe: bool,
    pub parallel: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            gap: DEFAULT_GAP,
            eps_boundary: DEFAULT_EPS_BOUNDARY,
            seed: 0,
            time_budget: None,
            dedupe: true,
            parallel: par::parallel_available(),
        }
    }
}

impl SamplerConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Input("n_samples must be at least 1".into()));
        }
        if !(self.gap >= 0.0) {
            return Err(Error::Input(format!("gap must be >= 0, got {}", self.gap)));
        }
        if !(self.eps_boundary >= 0.0) {
            return Err(Error::Input(format!("eps_boundary must be >= 0, got {}", self.eps_boundary)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    TimeBudget,
}

/// One iteration: the region optimum it produced (if its LP was feasible)
/// and the incumbent afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub value: Option<f64>,
    pub best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub objective: f64,
    pub x_max: Vec<f64>,
    pub iterations: usize,
    pub lp_solves: usize,
    pub mip_solves: usize,
    #[serde(default)]
    pub local_search_rounds: usize,
    #[serde(default)]
    pub skipped_duplicates: usize,
    #[serde(default)]
    pub skipped_infeasible: usize,
    pub trace: Vec<TracePoint>,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default)]
    pub method: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl OptimizeResult {
    pub fn trace_is_monotone(&self) -> bool {
        let bests: Vec<f64> = self.trace.iter().filter_map(|t| t.best).collect();
        bests.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Where iteration `i` gets its input point.
#[derive(Clone, Copy)]
enum Source<'a> {
    Seeded { seed: u64, n: usize },
    Explicit(&'a [Vec<f64>]),
}

impl Source<'_> {
    fn len(&self) -> usize {
        match self {
            Source::Seeded { n, .. } => *n,
            Source::Explicit(xs) => xs.len(),
        }
    }

    fn point(&self, p: &Polytope, i: usize) -> Result<Vec<f64>> {
        match self {
            Source::Seeded { seed, .. } => p.sample(&mut iteration_rng(*seed, i as u64)),
            Source::Explicit(xs) => Ok(xs[i].clone()),
        }
    }
}

/// Region optimum: input point and objective.
type Region = Option<(Vec<f64>, f64)>;

/// Outcome of one sampled iteration before any reduction.
struct Evaluated {
    region: Region,
    duplicate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearch {
    pub x: Vec<f64>,
    pub value: f64,
    /// Number of moves to a strictly better neighbouring region.
    pub rounds: usize,
    pub mip_solves: usize,
}

/// A network and domain with bounds and the big-M model prepared once.
#[derive(Debug, Clone)]
pub struct ReluProblem {
    polytope: Polytope,
    formulation: ReluMipFormulation,
}

impl ReluProblem {
    pub fn new(net: &ReluNetwork, p: &Polytope) -> Result<Self> {
        let bounds = compute_bounds(net, p)?;
        let formulation = build_full_mip(net, p, &bounds)?;
        Ok(Self { polytope: p.clone(), formulation })
    }

    pub fn network(&self) -> &ReluNetwork {
        self.formulation.network()
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn formulation(&self) -> &ReluMipFormulation {
        &self.formulation
    }

    /// Optimum of the fixed-pattern LP, or `None` if the region is empty.
    pub fn solve_region(&self, pat: &ActivationPattern) -> Result<Region> {
        let lp = self.formulation.fix_pattern_lp(pat)?;
        match solve_lp(&lp)? {
            LpOutcome::Optimal(sol) => Ok(Some((self.formulation.input_of(&sol.x), sol.objective))),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Optimization("a region LP over a bounded domain is unbounded".into())),
        }
    }

    /// Samples, patterns and region LPs for iterations `range`, reusing
    /// `cache` for patterns already seen when deduplication is on.
    fn evaluate_batch(
        &self,
        source: Source,
        range: std::ops::Range<usize>,
        cfg: &SamplerConfig,
        cache: &mut HashMap<Vec<u64>, Region>,
        lp_solves: &mut usize,
    ) -> Result<Vec<Evaluated>> {
        let net = self.network();
        let patterns: Vec<ActivationPattern> = par::map_range(range.clone(), cfg.parallel, |i| {
            let x = source.point(&self.polytope, i)?;
            net.activation_pattern(&x, cfg.eps_boundary)
        })
        .into_iter()
        .collect::<Result<_>>()?;

        let keys: Vec<Vec<u64>> = patterns.iter().map(ActivationPattern::key).collect();
        let mut duplicate = vec![false; patterns.len()];
        let mut to_solve = Vec::new();
        if cfg.dedupe {
            let mut pending: HashMap<&[u64], ()> = HashMap::new();
            for (j, key) in keys.iter().enumerate() {
                if cache.contains_key(key) || pending.insert(key, ()).is_some() {
                    duplicate[j] = true;
                } else {
                    to_solve.push(j);
                }
            }
        } else {
            to_solve.extend(0..patterns.len());
        }

        let solved: Vec<Result<Region>> = par::map_slice(&to_solve, cfg.parallel, |&j| self.solve_region(&patterns[j]));
        *lp_solves += to_solve.len();
        let mut own: HashMap<usize, Region> = HashMap::new();
        for (&j, region) in to_solve.iter().zip(solved) {
            let region = region?;
            if cfg.dedupe {
                cache.insert(keys[j].clone(), region.clone());
            }
            own.insert(j, region);
        }
        Ok((0..patterns.len())
            .map(|j| Evaluated {
                region: own.remove(&j).unwrap_or_else(|| cache[&keys[j]].clone()),
                duplicate: duplicate[j],
            })
            .collect())
    }

    fn run(&self, source: Source, cfg: &SamplerConfig, enhanced: bool) -> Result<OptimizeResult> {
        cfg.validate()?;
        let started = Instant::now();
        let over_budget = || cfg.time_budget.is_some_and(|b| started.elapsed() >= b);
        let n = source.len();
        let batch = if cfg.time_budget.is_some() { BUDGET_BATCH } else { n.max(1) };

        let mut cache = HashMap::new();
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut result = OptimizeResult {
            objective: f64::NEG_INFINITY,
            x_max: Vec::new(),
            iterations: 0,
            lp_solves: 0,
            mip_solves: 0,
            local_search_rounds: 0,
            skipped_duplicates: 0,
            skipped_infeasible: 0,
            trace: Vec::with_capacity(n),
            seed: cfg.seed,
            status: RunStatus::Completed,
            method: if enhanced { "enhanced" } else { "sampling" }.to_string(),
            notes: Vec::new(),
        };

        'batches: for start in (0..n).step_by(batch) {
            if start > 0 && over_budget() {
                result.status = RunStatus::TimeBudget;
                break;
            }
            let end = (start + batch).min(n);
            let evaluated = self.evaluate_batch(source, start..end, cfg, &mut cache, &mut result.lp_solves)?;
            for (offset, ev) in evaluated.into_iter().enumerate() {
                if enhanced && start + offset > 0 && over_budget() {
                    result.status = RunStatus::TimeBudget;
                    break 'batches;
                }
                result.iterations += 1;
                if ev.duplicate {
                    result.skipped_duplicates += 1;
                }
                let Some((x_lp, v_lp)) = ev.region else {
                    result.skipped_infeasible += 1;
                    result.trace.push(TracePoint { value: None, best: best.as_ref().map(|b| b.1) });
                    continue;
                };
                if best.as_ref().is_none_or(|(_, v)| v_lp > *v) {
                    best = Some((x_lp.clone(), v_lp));
                }
                // A repeated pattern reproduces an earlier LP optimum, whose
                // local search (if any) has already run against an incumbent
                // no better than today's.
                if enhanced && !ev.duplicate {
                    let incumbent = best.as_ref().expect("set above").1;
                    if relative_gap(incumbent, v_lp) < cfg.gap {
                        let ls = self.local_search(&x_lp, v_lp, cfg)?;
                        result.mip_solves += ls.mip_solves;
                        result.local_search_rounds += ls.rounds;
                        if ls.value > incumbent {
                            best = Some((ls.x, ls.value));
                        }
                    }
                }
                result.trace.push(TracePoint { value: Some(v_lp), best: best.as_ref().map(|b| b.1) });
            }
        }

        let Some((x, v)) = best else {
            return Err(Error::Optimization(format!(
                "none of the {} region LPs was feasible ({} skipped as infeasible)",
                result.iterations, result.skipped_infeasible
            )));
        };
        result.x_max = x;
        result.objective = v;
        Ok(result)
    }

    pub fn sampling(&self, cfg: &SamplerConfig) -> Result<OptimizeResult> {
        self.run(Source::Seeded { seed: cfg.seed, n: cfg.n_samples }, cfg, false)
    }

    pub fn enhanced(&self, cfg: &SamplerConfig) -> Result<OptimizeResult> {
        self.run(Source::Seeded { seed: cfg.seed, n: cfg.n_samples }, cfg, true)
    }

    /// Sampling loop over caller-supplied points instead of random draws.
    pub fn sampling_from(&self, points: &[Vec<f64>], cfg: &SamplerConfig) -> Result<OptimizeResult> {
        self.check_points(points)?;
        self.run(Source::Explicit(points), cfg, false)
    }

    pub fn enhanced_from(&self, points: &[Vec<f64>], cfg: &SamplerConfig) -> Result<OptimizeResult> {
        self.check_points(points)?;
        self.run(Source::Explicit(points), cfg, true)
    }

    fn check_points(&self, points: &[Vec<f64>]) -> Result<()> {
        if points.is_empty() {
            return Err(Error::Input("no sample points given".into()));
        }
        match points.iter().position(|x| !self.polytope.contains(x, 1e-9)) {
            Some(i) => Err(Error::Input(format!("sample point {i} lies outside the polytope"))),
            None => Ok(()),
        }
    }

    /// Climbs from a region optimum through neighbouring regions until no
    /// restricted MIP strictly improves the value.
    pub fn local_search(&self, start_x: &[f64], start_value: f64, cfg: &SamplerConfig) -> Result<LocalSearch> {
        let cap = 10 * self.network().total_hidden();
        let mut x = start_x.to_vec();
        let mut value = start_value;
        let mut rounds = 0;
        let mut mip_solves = 0;
        while rounds < cap {
            let pat = self.network().activation_pattern(&x, cfg.eps_boundary)?;
            if pat.num_boundary() == 0 {
                break;
            }
            let (next_x, next_value) = self.restricted_optimum(&x, &pat)?;
            mip_solves += 1;
            if next_value > value {
                x = next_x;
                value = next_value;
                rounds += 1;
            } else {
                break;
            }
        }
        Ok(LocalSearch { x, value, rounds, mip_solves })
    }

    /// Best point and value of the restricted MIP at `x`.
    pub fn restricted_optimum(&self, x: &[f64], pat: &ActivationPattern) -> Result<(Vec<f64>, f64)> {
        let mip = self.formulation.restricted_mip(x, pat)?;
        let out = solve_mip(&mip, None, MipOptions { time_limit: None, gap_tol: EXACT_GAP_TOL })?;
        match (out.status, out.incumbent) {
            (MipStatus::Optimal, Some(sol)) => Ok((self.formulation.input_of(&sol), out.incumbent_value)),
            (status, _) => Err(Error::Optimization(format!(
                "restricted MIP at {x:?} ended with status {status:?}; the current point should be feasible"
            ))),
        }
    }

    /// Branch-and-bound on the whole model. A warm start is translated into a
    /// full assignment and validated; the returned objective never falls below
    /// the warm start's.
    pub fn full_mip(&self, warm: Option<&OptimizeResult>, time_limit: Option<Duration>) -> Result<OptimizeResult> {
        let mut notes = Vec::new();
        let warm_assignment = match warm {
            Some(w) => match self.formulation.assignment(&w.x_max) {
                Ok(a) if self.polytope.contains(&w.x_max, 1e-7) => Some(a),
                Ok(_) => {
                    notes.push("warm start lies outside the polytope; ignored".to_string());
                    None
                }
                Err(e) => {
                    notes.push(format!("warm start ignored: {e}"));
                    None
                }
            },
            None => None,
        };
        let out = solve_mip(
            &self.formulation.mip,
            warm_assignment.as_deref(),
            MipOptions { time_limit, gap_tol: EXACT_GAP_TOL },
        )?;
        let mut warm_ok = warm_assignment.is_some();
        if let Some(reason) = out.warm_start_rejection {
            notes.push(reason);
            warm_ok = false;
        }
        let status = match out.status {
            MipStatus::Optimal => RunStatus::Completed,
            MipStatus::Feasible => RunStatus::TimeBudget,
            MipStatus::NoSolution => {
                return Err(Error::Optimization("time limit reached before any feasible point was found".into()))
            }
            other => return Err(Error::Optimization(format!("full model ended with status {other:?}"))),
        };
        let incumbent = out.incumbent.expect("optimal or feasible outcome carries an incumbent");
        let (mut x_max, mut objective) = (self.formulation.input_of(&incumbent), out.incumbent_value);
        if let (Some(w), true) = (warm, warm_ok) {
            if w.objective >= objective {
                x_max = w.x_max.clone();
                objective = w.objective;
            }
        }
        Ok(OptimizeResult {
            objective,
            x_max,
            iterations: out.nodes,
            lp_solves: out.nodes,
            mip_solves: 1,
            local_search_rounds: 0,
            skipped_duplicates: 0,
            skipped_infeasible: 0,
            trace: Vec::new(),
            seed: warm.map_or(0, |w| w.seed),
            status,
            method: if warm_ok { "mip_warm" } else { "mip" }.to_string(),
            notes,
        })
    }

    /// Solves the region LP of every activation pattern.
    pub fn brute_force(&self, parallel: bool) -> Result<OptimizeResult> {
        let widths = self.network().hidden_widths();
        let total: usize = widths.iter().sum();
        if total > ORACLE_MAX_NEURONS {
            return Err(Error::Refused(format!(
                "{total} hidden neurons exceed the oracle limit of {ORACLE_MAX_NEURONS}"
            )));
        }
        let count = 1usize << total;
        let regions = par::map_range(0..count, parallel, |mask| {
            let mut bit = 0;
            let bits = widths
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| {
                            bit += 1;
                            (mask >> (bit - 1)) & 1 == 1
                        })
                        .collect()
                })
                .collect();
            let pat = ActivationPattern { bits, boundary: vec![Vec::new(); widths.len()] };
            self.solve_region(&pat)
        });
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut infeasible = 0;
        for region in regions {
            match region? {
                Some((x, v)) => {
                    if best.as_ref().is_none_or(|(_, b)| v > *b) {
                        best = Some((x, v));
                    }
                }
                None => infeasible += 1,
            }
        }
        let (x_max, objective) = best.ok_or_else(|| Error::Optimization("every pattern LP is infeasible".into()))?;
        Ok(OptimizeResult {
            objective,
            x_max,
            iterations: count,
            lp_solves: count,
            mip_solves: 0,
            local_search_rounds: 0,
            skipped_duplicates: 0,
            skipped_infeasible: infeasible,
            trace: Vec::new(),
            seed: 0,
            status: RunStatus::Completed,
            method: "oracle".to_string(),
            notes: Vec::new(),
        })
    }

    /// Per-iteration region optima `X_1..X_n` of the sampling loop, without
    /// max-reduction.
    pub fn region_values(&self, n: usize, seed: u64, parallel: bool) -> Result<Vec<f64>> {
        let cfg = SamplerConfig { n_samples: n, seed, parallel, ..SamplerConfig::default() };
        cfg.validate()?;
        let mut cache = HashMap::new();
        let mut solves = 0;
        let evaluated =
            self.evaluate_batch(Source::Seeded { seed, n }, 0..n, &cfg, &mut cache, &mut solves)?;
        Ok(evaluated.into_iter().filter_map(|e| e.region.map(|r| r.1)).collect())
    }
}

/// `|incumbent - candidate| / max(|incumbent|, 1e-9)`.
pub fn relative_gap(incumbent: f64, candidate: f64) -> f64 {
    (incumbent - candidate).abs() / incumbent.abs().max(1e-9)
}

pub fn sampling_optimize(net: &ReluNetwork, p: &Polytope, cfg: &SamplerConfig) -> Result<OptimizeResult> {
    ReluProblem::new(net, p)?.sampling(cfg)
}

pub fn enhanced_optimize(net: &ReluNetwork, p: &Polytope, cfg: &SamplerConfig) -> Result<OptimizeResult> {
    ReluProblem::new(net, p)?.enhanced(cfg)
}

pub fn local_search(
    problem: &ReluProblem,
    start_x: &[f64],
    start_value: f64,
    cfg: &SamplerConfig,
) -> Result<LocalSearch> {
    problem.local_search(start_x, start_value, cfg)
}

pub fn full_mip_optimize(
    net: &ReluNetwork,
    p: &Polytope,
    warm: Option<&OptimizeResult>,
    time_limit: Option<Duration>,
) -> Result<OptimizeResult> {
    ReluProblem::new(net, p)?.full_mip(warm, time_limit)
}

pub fn brute_force_oracle(net: &ReluNetwork, p: &Polytope) -> Result<OptimizeResult> {
    ReluProblem::new(net, p)?.brute_force(par::parallel_available())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{xavier_init, Layer};

    fn one_hidden(w: Vec<Vec<f64>>, b: Vec<f64>, a: Vec<f64>) -> ReluNetwork {
        ReluNetwork::new(vec![Layer { weights: w, b }], a).unwrap()
    }

    fn relu_x() -> ReluNetwork {
        one_hidden(vec![vec![1.0]], vec![0.0], vec![1.0])
    }

    fn vee() -> ReluNetwork {
        one_hidden(vec![vec![1.0], vec![-1.0]], vec![-0.5, 0.5], vec![1.0, 1.0])
    }

    fn staircase() -> ReluNetwork {
        one_hidden(vec![vec![1.0], vec![1.0]], vec![0.0, -0.5], vec![1.0, 1.0])
    }

    fn problem(net: &ReluNetwork) -> ReluProblem {
        ReluProblem::new(net, &Polytope::unit_box(net.input_dim()).unwrap()).unwrap()
    }

    #[test]
    fn single_region() {
        let r = problem(&relu_x()).sampling(&SamplerConfig::new(1, 3)).unwrap();
        assert!((r.objective - 1.0).abs() < 1e-9);
        assert!((r.x_max[0] - 1.0).abs() < 1e-9);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn vee_any_sample() {
        for seed in 0..5 {
            let r = problem(&vee()).sampling(&SamplerConfig::new(1, seed)).unwrap();
            assert!((r.objective - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn staircase_climb() {
        let prob = problem(&staircase());
        let cfg = SamplerConfig::new(1, 0);
        let plain = prob.sampling_from(&[vec![0.1]], &cfg).unwrap();
        assert!((plain.objective - 0.5).abs() < 1e-9);
        let enhanced = prob.enhanced_from(&[vec![0.1]], &cfg).unwrap();
        assert!((enhanced.objective - 1.5).abs() < 1e-9);
        assert!((enhanced.x_max[0] - 1.0).abs() < 1e-9);
        assert_eq!(enhanced.local_search_rounds, 1);
    }

    #[test]
    fn local_search_cases() {
        let cfg = SamplerConfig::default();
        let prob = problem(&staircase());
        let ls = prob.local_search(&[0.5], 0.5, &cfg).unwrap();
        assert_eq!(ls.rounds, 1);
        assert!((ls.value - 1.5).abs() < 1e-9 && (ls.x[0] - 1.0).abs() < 1e-9);

        let ls = prob.local_search(&[1.0], 1.5, &cfg).unwrap();
        assert_eq!((ls.rounds, ls.mip_solves), (0, 0));
        assert_eq!(ls.value, 1.5);

        let prob = problem(&vee());
        let ls = prob.local_search(&[0.0], 0.5, &cfg).unwrap();
        assert_eq!(ls.rounds, 0);
        assert_eq!(ls.value, 0.5);
    }

    #[test]
    fn gap_rule() {
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
        assert!((relative_gap(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((relative_gap(-2.0, -3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dedupe_counts_without_resolving() {
        let prob = problem(&relu_x());
        let r = prob.sampling(&SamplerConfig::new(50, 1)).unwrap();
        assert_eq!(r.iterations, 50);
        assert_eq!(r.lp_solves, 1);
        assert_eq!(r.skipped_duplicates, 49);
        let cfg = SamplerConfig { dedupe: false, ..SamplerConfig::new(50, 1) };
        let r2 = prob.sampling(&cfg).unwrap();
        assert_eq!(r2.lp_solves, 50);
        assert_eq!(r.objective, r2.objective);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let net = xavier_init(&[2, 4, 4, 1], 9).unwrap();
        let prob = problem(&net);
        for enhanced in [false, true] {
            let seq = SamplerConfig { parallel: false, ..SamplerConfig::new(200, 4) };
            let par = SamplerConfig { parallel: true, ..SamplerConfig::new(200, 4) };
            let (a, b) = if enhanced {
                (prob.enhanced(&seq).unwrap(), prob.enhanced(&par).unwrap())
            } else {
                (prob.sampling(&seq).unwrap(), prob.sampling(&par).unwrap())
            };
            assert_eq!(a, b);
        }
    }

    #[test]
    fn time_budget_stops_early() {
        let net = xavier_init(&[3, 8, 8, 1], 2).unwrap();
        let cfg = SamplerConfig { time_budget: Some(Duration::ZERO), ..SamplerConfig::new(10_000, 1) };
        let r = problem(&net).sampling(&cfg).unwrap();
        assert_eq!(r.status, RunStatus::TimeBudget);
        assert_eq!(r.iterations, BUDGET_BATCH);
    }

    #[test]
    fn full_mip_with_warm_start() {
        let prob = problem(&relu_x());
        let warm = OptimizeResult {
            objective: 1.0,
            x_max: vec![1.0],
            iterations: 1,
            lp_solves: 1,
            mip_solves: 0,
            local_search_rounds: 0,
            skipped_duplicates: 0,
            skipped_infeasible: 0,
            trace: vec![],
            seed: 0,
            status: RunStatus::Completed,
            method: "sampling".into(),
            notes: vec![],
        };
        let r = prob.full_mip(Some(&warm), None).unwrap();
        assert_eq!(r.objective, 1.0);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.method, "mip_warm");

        let r = prob.full_mip(Some(&warm), Some(Duration::ZERO)).unwrap();
        assert_eq!(r.status, RunStatus::TimeBudget);
        assert!(r.objective >= warm.objective);

        let mut outside = warm.clone();
        outside.x_max = vec![3.0];
        let r = prob.full_mip(Some(&outside), None).unwrap();
        assert!(!r.notes.is_empty());
        assert!((r.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_small_cases() {
        assert!((problem(&vee()).brute_force(true).unwrap().objective - 0.5).abs() < 1e-9);
        assert!((problem(&staircase()).brute_force(false).unwrap().objective - 1.5).abs() < 1e-9);
        let big = xavier_init(&[2, 21, 1], 1).unwrap();
        assert!(matches!(problem(&big).brute_force(true), Err(Error::Refused(_))));
    }

    #[test]
    fn region_values_have_no_reduction() {
        let vals = problem(&vee()).region_values(100, 3, true).unwrap();
        assert_eq!(vals.len(), 100);
        assert!(vals.iter().all(|v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn config_validation() {
        let net = relu_x();
        let p = Polytope::unit_box(1).unwrap();
        assert!(sampling_optimize(&net, &p, &SamplerConfig::new(0, 1)).is_err());
        let cfg = SamplerConfig { gap: -1.0, ..SamplerConfig::new(1, 1) };
        assert!(enhanced_optimize(&net, &p, &cfg).is_err());
    }

    #[test]
    fn result_json_schema() {
        let r = problem(&vee()).sampling(&SamplerConfig::new(3, 1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["objective", "x_max", "iterations", "lp_solves", "mip_solves", "trace", "seed", "status"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["status"], "completed");
        let back: OptimizeResult = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
