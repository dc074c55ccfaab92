//! Best-bound branch-and-bound for LPs with binary columns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::linprog::{self, LinearProgram, LpOutcome, BOUND_TOL, FEAS_TOL};
use crate::par;

pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
/// Largest binary count [`enumerate_binary_oracle`] accepts.
pub const ORACLE_MAX_BINARIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerProgram {
    pub base: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MixedIntegerProgram {
    pub fn new(base: LinearProgram, binaries: Vec<usize>) -> Result<Self> {
        let mip = Self { base, binaries };
        mip.validate()?;
        Ok(mip)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for &b in &self.binaries {
            if b >= self.base.num_vars() {
                return Err(Error::Input(format!("binary index {b} out of range")));
            }
            if self.base.lower[b] < 0.0 || self.base.upper[b] > 1.0 {
                return Err(Error::Input(format!(
                    "binary x{b} has bounds [{}, {}] outside [0, 1]",
                    self.base.lower[b], self.base.upper[b]
                )));
            }
        }
        Ok(())
    }

    /// Checks rows, bounds and integrality of a candidate assignment.
    pub fn check_feasible(&self, x: &[f64]) -> std::result::Result<(), String> {
        if x.len() != self.base.num_vars() {
            return Err(format!("assignment has {} entries, expected {}", x.len(), self.base.num_vars()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err("assignment has a non-finite entry".into());
        }
        let (rows, bounds) = self.base.infeasibility(x);
        if rows > FEAS_TOL {
            return Err(format!("row violation {rows:e}"));
        }
        if bounds > FEAS_TOL {
            return Err(format!("bound violation {bounds:e}"));
        }
        if let Some(&b) = self.binaries.iter().find(|&&b| fractionality(x[b]) > INTEGRALITY_TOL) {
            return Err(format!("binary x{b} = {} is not integral", x[b]));
        }
        Ok(())
    }
}

fn fractionality(v: f64) -> f64 {
    (v - v.round()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Search finished within the requested gap.
    Optimal,
    /// Stopped by the time limit with an incumbent in hand.
    Feasible,
    /// No integral assignment exists.
    Infeasible,
    /// Stopped by the time limit before any incumbent was found.
    NoSolution,
    /// The LP relaxation is unbounded.
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct MipOutcome {
    pub status: MipStatus,
    pub incumbent: Option<Vec<f64>>,
    pub incumbent_value: f64,
    pub best_bound: f64,
    pub nodes: usize,
    /// Global best bound after each processed node.
    pub bound_trace: Vec<f64>,
    /// Why a supplied warm start was rejected, if it was.
    pub warm_start_rejection: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct MipOptions {
    pub time_limit: Option<Duration>,
    pub gap_tol: f64,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self { time_limit: None, gap_tol: DEFAULT_GAP_TOL }
    }
}

struct Node {
    bound: f64,
    id: usize,
    fixings: Vec<(usize, f64)>,
    branch_col: usize,
    branch_value: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap on bound; among equal bounds the older node first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    mip: &'a MixedIntegerProgram,
    gap_tol: f64,
    incumbent: Option<Vec<f64>>,
    incumbent_value: f64,
    nodes: usize,
    next_id: usize,
}

enum Processed {
    Pruned,
    Open(Node),
    Unbounded,
}

impl Search<'_> {
    fn gap_allowance(&self) -> f64 {
        self.gap_tol * self.incumbent_value.abs().max(1.0)
    }

    fn offer(&mut self, x: Vec<f64>, value: f64) {
        if self.incumbent.is_none() || value > self.incumbent_value {
            self.incumbent = Some(x);
            self.incumbent_value = value;
        }
    }

    /// Rounds the binaries of an integral LP point and re-solves with them
    /// pinned, so the stored incumbent is exactly integral.
    fn polish(&self, x: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
        let fixings: Vec<(usize, f64)> = self.mip.binaries.iter().map(|&b| (b, x[b].round())).collect();
        Ok(linprog::solve_lp_fixed(&self.mip.base, &fixings)?
            .solution()
            .map(|s| (s.x.clone(), s.objective)))
    }

    fn process(&mut self, fixings: Vec<(usize, f64)>, parent_bound: f64) -> Result<Processed> {
        self.nodes += 1;
        let sol = match linprog::solve_lp_fixed(&self.mip.base, &fixings)? {
            LpOutcome::Optimal(sol) => sol,
            LpOutcome::Infeasible => return Ok(Processed::Pruned),
            LpOutcome::Unbounded => return Ok(Processed::Unbounded),
        };
        let bound = sol.objective.min(parent_bound);
        if self.incumbent.is_some() && bound <= self.incumbent_value + self.gap_allowance() {
            return Ok(Processed::Pruned);
        }
        // Most fractional binary, ties to the lowest index.
        let mut branch: Option<(usize, f64)> = None;
        for &b in &self.mip.binaries {
            let frac = fractionality(sol.x[b]);
            if frac > INTEGRALITY_TOL && branch.is_none_or(|(c, f)| frac > f || (frac == f && b < c)) {
                branch = Some((b, frac));
            }
        }
        match branch {
            None => {
                let (x, value) = self.polish(&sol.x)?.unwrap_or((sol.x, sol.objective));
                self.offer(x, value);
                Ok(Processed::Pruned)
            }
            Some((col, _)) => {
                self.next_id += 1;
                Ok(Processed::Open(Node {
                    bound,
                    id: self.next_id,
                    fixings,
                    branch_col: col,
                    branch_value: sol.x[col],
                }))
            }
        }
    }
}

/// Branch-and-bound with best-bound node selection and most-fractional
/// branching. A warm start is validated before it becomes the incumbent.
pub fn solve_mip(mip: &MixedIntegerProgram, warm_start: Option<&[f64]>, options: MipOptions) -> Result<MipOutcome> {
    mip.validate()?;
    if !(options.gap_tol >= 0.0) {
        return Err(Error::Input(format!("gap_tol must be >= 0, got {}", options.gap_tol)));
    }
    let started = Instant::now();
    let out_of_time = || options.time_limit.is_some_and(|limit| started.elapsed() >= limit);

    let mut search = Search {
        mip,
        gap_tol: options.gap_tol,
        incumbent: None,
        incumbent_value: f64::NEG_INFINITY,
        nodes: 0,
        next_id: 0,
    };
    let mut warm_start_rejection = None;
    if let Some(w) = warm_start {
        match mip.check_feasible(w) {
            Ok(()) => {
                let x: Vec<f64> = w
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v.clamp(mip.base.lower[j], mip.base.upper[j]))
                    .collect();
                let value = mip.base.objective_value(&x);
                search.offer(x, value);
            }
            Err(reason) => warm_start_rejection = Some(format!("warm start rejected: {reason}")),
        }
    }

    let finish = |search: Search, status: MipStatus, best_bound: f64, bound_trace: Vec<f64>, rejection| MipOutcome {
        status,
        best_bound,
        nodes: search.nodes,
        incumbent_value: search.incumbent_value,
        incumbent: search.incumbent,
        bound_trace,
        warm_start_rejection: rejection,
    };
    let timed_out = |search: Search, bound: f64, trace: Vec<f64>, rejection| {
        let status = if search.incumbent.is_some() { MipStatus::Feasible } else { MipStatus::NoSolution };
        finish(search, status, bound, trace, rejection)
    };

    let mut bound_trace = Vec::new();
    if out_of_time() {
        return Ok(timed_out(search, f64::INFINITY, bound_trace, warm_start_rejection));
    }

    let mut heap = BinaryHeap::new();
    match search.process(Vec::new(), f64::INFINITY)? {
        Processed::Unbounded => {
            return Ok(finish(search, MipStatus::Unbounded, f64::INFINITY, bound_trace, warm_start_rejection))
        }
        Processed::Open(node) => heap.push(node),
        Processed::Pruned => {}
    }
    let global_bound =
        |heap: &BinaryHeap<Node>, s: &Search| heap.peek().map_or(s.incumbent_value, |n| n.bound.max(s.incumbent_value));
    bound_trace.push(global_bound(&heap, &search));

    while let Some(top) = heap.peek() {
        if search.incumbent.is_some() && top.bound <= search.incumbent_value + search.gap_allowance() {
            break;
        }
        if out_of_time() {
            let bound = global_bound(&heap, &search);
            return Ok(timed_out(search, bound, bound_trace, warm_start_rejection));
        }
        let node = heap.pop().expect("peeked");
        let (down, up) = (node.branch_value.floor().max(0.0), node.branch_value.ceil().min(1.0));
        for value in [down, up] {
            let mut fixings = node.fixings.clone();
            fixings.push((node.branch_col, value));
            match search.process(fixings, node.bound)? {
                Processed::Open(child) => heap.push(child),
                Processed::Pruned => {}
                Processed::Unbounded => {
                    return Err(Error::Optimization("unbounded relaxation below a bounded parent".into()))
                }
            }
        }
        bound_trace.push(global_bound(&heap, &search));
    }

    if search.incumbent.is_none() {
        return Ok(finish(search, MipStatus::Infeasible, f64::NEG_INFINITY, bound_trace, warm_start_rejection));
    }
    let best_bound = global_bound(&heap, &search);
    Ok(finish(search, MipStatus::Optimal, best_bound, bound_trace, warm_start_rejection))
}

/// Exact optimum by solving the LP for every binary assignment.
pub fn enumerate_binary_oracle(mip: &MixedIntegerProgram, parallel: bool) -> Result<MipOutcome> {
    mip.validate()?;
    let nb = mip.binaries.len();
    if nb > ORACLE_MAX_BINARIES {
        return Err(Error::Refused(format!(
            "{nb} binaries exceed the enumeration limit of {ORACLE_MAX_BINARIES}"
        )));
    }
    let count = 1usize << nb;
    let outcomes = par::map_range(0..count, parallel, |mask| {
        let fixings: Vec<(usize, f64)> = mip
            .binaries
            .iter()
            .enumerate()
            .map(|(k, &b)| (b, ((mask >> k) & 1) as f64))
            .collect();
        // Assignments outside a binary's bounds are simply infeasible.
        if fixings.iter().any(|&(b, v)| v < mip.base.lower[b] - BOUND_TOL || v > mip.base.upper[b] + BOUND_TOL) {
            return Ok(LpOutcome::Infeasible);
        }
        linprog::solve_lp_fixed(&mip.base, &fixings)
    });
    let mut best: Option<(Vec<f64>, f64)> = None;
    for outcome in outcomes {
        match outcome? {
            LpOutcome::Optimal(sol) => {
                if best.as_ref().is_none_or(|(_, v)| sol.objective > *v) {
                    best = Some((sol.x, sol.objective));
                }
            }
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => {
                return Ok(MipOutcome {
                    status: MipStatus::Unbounded,
                    incumbent: None,
                    incumbent_value: f64::INFINITY,
                    best_bound: f64::INFINITY,
                    nodes: count,
                    bound_trace: Vec::new(),
                    warm_start_rejection: None,
                })
            }
        }
    }
    Ok(match best {
        Some((x, v)) => MipOutcome {
            status: MipStatus::Optimal,
            incumbent: Some(x),
            incumbent_value: v,
            best_bound: v,
            nodes: count,
            bound_trace: vec![v],
            warm_start_rejection: None,
        },
        None => MipOutcome {
            status: MipStatus::Infeasible,
            incumbent: None,
            incumbent_value: f64::NEG_INFINITY,
            best_bound: f64::NEG_INFINITY,
            nodes: count,
            bound_trace: Vec::new(),
            warm_start_rejection: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linprog::Sense;

    fn binaries_lp(objective: Vec<f64>) -> LinearProgram {
        let n = objective.len();
        let mut lp = LinearProgram::new(n);
        lp.objective = objective;
        for j in 0..n {
            lp.set_bounds(j, 0.0, 1.0);
        }
        lp
    }

    fn knapsack() -> MixedIntegerProgram {
        let mut lp = binaries_lp(vec![5.0, 4.0, 3.0, 2.0]);
        lp.add_row(vec![4.0, 3.0, 2.0, 1.0], Sense::Le, 6.0);
        MixedIntegerProgram::new(lp, vec![0, 1, 2, 3]).unwrap()
    }

    #[test]
    fn pick_one_of_two() {
        let mut lp = binaries_lp(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Le, 1.0);
        let mip = MixedIntegerProgram::new(lp, vec![0, 1]).unwrap();
        let out = solve_mip(&mip, None, MipOptions::default()).unwrap();
        assert_eq!(out.status, MipStatus::Optimal);
        assert!((out.incumbent_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn integral_relaxation_solves_at_root() {
        let mut lp = binaries_lp(vec![1.0, -1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0, 0.0], Sense::Le, 1.0);
        let mip = MixedIntegerProgram::new(lp, vec![0, 1, 2]).unwrap();
        let out = solve_mip(&mip, None, MipOptions::default()).unwrap();
        assert_eq!(out.nodes, 1);
        assert!((out.incumbent_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn knapsack_matches_brute_force() {
        // Brute force over the 16 assignments, written out independently.
        let (values, weights) = ([5.0, 4.0, 3.0, 2.0], [4.0, 3.0, 2.0, 1.0]);
        let mut brute = f64::NEG_INFINITY;
        for mask in 0..16u32 {
            let pick = |k: usize| ((mask >> k) & 1) as f64;
            let w: f64 = (0..4).map(|k| weights[k] * pick(k)).sum();
            if w <= 6.0 {
                brute = brute.max((0..4).map(|k| values[k] * pick(k)).sum());
            }
        }
        assert_eq!(brute, 9.0);
        let mip = knapsack();
        let bb = solve_mip(&mip, None, MipOptions::default()).unwrap();
        let oracle = enumerate_binary_oracle(&mip, false).unwrap();
        assert!((bb.incumbent_value - brute).abs() < 1e-9);
        assert!((oracle.incumbent_value - brute).abs() < 1e-9);
        assert!(bb.best_bound >= bb.incumbent_value - 1e-6);
        mip.check_feasible(bb.incumbent.as_ref().unwrap()).unwrap();
        assert!(bb.bound_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn warm_start_is_validated() {
        let mip = knapsack();
        let good = [1.0, 0.0, 1.0, 0.0]; // value 8
        let out = solve_mip(&mip, Some(&good), MipOptions::default()).unwrap();
        assert!(out.warm_start_rejection.is_none());
        assert!(out.incumbent_value >= 8.0);

        let bad = [1.0, 1.0, 1.0, 1.0];
        let out = solve_mip(&mip, Some(&bad), MipOptions::default()).unwrap();
        assert!(out.warm_start_rejection.unwrap().contains("row violation"));
        assert!((out.incumbent_value - 9.0).abs() < 1e-9);

        let fractional = [0.5, 0.0, 0.0, 0.0];
        let out = solve_mip(&mip, Some(&fractional), MipOptions::default()).unwrap();
        assert!(out.warm_start_rejection.unwrap().contains("integral"));
    }

    #[test]
    fn zero_time_limit_keeps_warm_start() {
        let mip = knapsack();
        let good = [1.0, 0.0, 1.0, 0.0];
        let options = MipOptions { time_limit: Some(Duration::ZERO), ..Default::default() };
        let out = solve_mip(&mip, Some(&good), options).unwrap();
        assert_eq!(out.status, MipStatus::Feasible);
        assert_eq!(out.incumbent_value, 8.0);
        let out = solve_mip(&mip, None, options).unwrap();
        assert_eq!(out.status, MipStatus::NoSolution);
    }

    #[test]
    fn infeasible_everywhere() {
        let mut lp = binaries_lp(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Eq, 1.5);
        let mip = MixedIntegerProgram::new(lp, vec![0, 1]).unwrap();
        assert_eq!(solve_mip(&mip, None, MipOptions::default()).unwrap().status, MipStatus::Infeasible);
        assert_eq!(enumerate_binary_oracle(&mip, true).unwrap().status, MipStatus::Infeasible);
    }

    #[test]
    fn zero_binaries_is_plain_lp() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![2.0];
        lp.set_bounds(0, 0.0, 1.5);
        let mip = MixedIntegerProgram::new(lp, vec![]).unwrap();
        let out = enumerate_binary_oracle(&mip, false).unwrap();
        assert_eq!(out.incumbent_value, 3.0);
    }

    #[test]
    fn oracle_refuses_large() {
        let lp = binaries_lp(vec![1.0; 21]);
        let mip = MixedIntegerProgram::new(lp, (0..21).collect()).unwrap();
        assert!(matches!(enumerate_binary_oracle(&mip, false), Err(Error::Refused(_))));
    }

    #[test]
    fn binary_bounds_checked() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 0.0, 2.0);
        assert!(MixedIntegerProgram::new(lp, vec![0]).is_err());
    }
}
