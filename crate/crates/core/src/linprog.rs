//! Dense bounded-variable primal simplex.
//!
//! Problems are stated as maximization over column bounds (which may be
//! infinite) and linear rows with `<=`, `>=` or `=` sense. Internally each row
//! `a·x ? b` becomes `a·x - r = 0` with a row-activity variable `r` carrying
//! the row's bounds, so every constraint is a plain variable bound and
//! equality rows need no special treatment. Rows whose activity is out of
//! range at the starting point receive an artificial variable, and phase one
//! drives the artificials to zero.
//!
//! Pricing is Dantzig's rule. After too many degenerate pivots the solver
//! switches to Bland's rule for the rest of the phase. The ratio test is
//! Harris's two-pass variant, and the tableau is rebuilt from the starting
//! rows every [`REINVERT_EVERY`] pivots and before optimality is accepted.
//! Rows with a single unfixed column become bounds, and fixed columns are
//! substituted out before the tableau is built.

use std::fmt;

use crate::error::{Error, Result};

/// Primal feasibility tolerance on rows.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost tolerance for optimality.
pub const OPT_TOL: f64 = 1e-7;
/// Smallest tableau entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-9;
/// Tolerance on column bounds for reported solutions.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A maximization problem `max c·x` subject to column bounds and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    /// `n` free columns, zero objective, no rows.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Input(format!(
                "bound vectors have lengths {}/{} but there are {n} columns",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("objective has a non-finite coefficient".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Input(format!("column {j} has bounds [{l}, {u}]")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Input(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|a| a.is_nan()) || !row.rhs.is_finite() {
                return Err(Error::Input(format!("row {i} has NaN coefficients or non-finite rhs")));
            }
        }
        Ok(())
    }

    /// Largest row violation and largest bound violation of `x`.
    pub fn infeasibility(&self, x: &[f64]) -> (f64, f64) {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max);
        (rows, bounds)
    }

    /// Plain-text listing for failure reports.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let terms = |coeffs: &[f64]| {
            let parts: Vec<String> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| format!("{a:+} x{j}"))
                .collect();
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" ")
            }
        };
        out.push_str(&format!("maximize {}\n", terms(&self.objective)));
        out.push_str("subject to\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("  r{i}: {} {} {}\n", terms(&row.coeffs), row.sense, row.rhs));
        }
        out.push_str("bounds\n");
        for j in 0..self.num_vars() {
            out.push_str(&format!("  {} <= x{j} <= {}\n", self.lower[j], self.upper[j]));
        }
        out
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal(_))
    }

    pub fn solution(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn objective(&self) -> Option<f64> {
        self.solution().map(|s| s.objective)
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    solve_validated(lp)
}

/// Solves `lp` with the listed columns pinned to the given values.
pub fn solve_lp_fixed(lp: &LinearProgram, fixings: &[(usize, f64)]) -> Result<LpOutcome> {
    lp.validate()?;
    let mut pinned = lp.clone();
    for &(col, value) in fixings {
        if col >= lp.num_vars() {
            return Err(Error::Input(format!("fixing refers to column {col} of {}", lp.num_vars())));
        }
        if !value.is_finite() || value < lp.lower[col] - BOUND_TOL || value > lp.upper[col] + BOUND_TOL {
            return Err(Error::Input(format!(
                "fixing x{col} = {value} lies outside [{}, {}]",
                lp.lower[col], lp.upper[col]
            )));
        }
        pinned.lower[col] = value;
        pinned.upper[col] = value;
    }
    solve_validated(&pinned)
}

/// Turns rows with a single unfixed column into bounds, repeatedly, and
/// returns the tightened bounds with the rows still needed. `None` means the
/// bounds crossed, so the LP is infeasible.
fn presolve(lp: &LinearProgram) -> Option<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut keep = vec![true; lp.rows.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for (i, row) in lp.rows.iter().enumerate() {
            if !keep[i] {
                continue;
            }
            let mut single = None;
            let mut count = 0;
            let mut shift = 0.0;
            for (j, &a) in row.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                if lower[j] == upper[j] {
                    shift += a * lower[j];
                } else {
                    count += 1;
                    single = Some((j, a));
                }
            }
            if count != 1 {
                continue;
            }
            let (j, a) = single.expect("one unfixed column");
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs - shift),
                Sense::Ge => (row.rhs - shift, f64::INFINITY),
                Sense::Eq => (row.rhs - shift, row.rhs - shift),
            };
            let (lo, hi) = if a > 0.0 { (lo / a, hi / a) } else { (hi / a, lo / a) };
            lower[j] = lower[j].max(lo);
            upper[j] = upper[j].min(hi);
            if lower[j] > upper[j] {
                if lower[j] > upper[j] + FEAS_TOL {
                    return None;
                }
                let mid = 0.5 * (lower[j] + upper[j]);
                lower[j] = mid;
                upper[j] = mid;
            }
            keep[i] = false;
            changed = true;
        }
    }
    Some((lower, upper, keep))
}

fn solve_validated(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars();
    let Some((tight_lower, tight_upper, keep)) = presolve(lp) else {
        return Ok(LpOutcome::Infeasible);
    };
    // Substitute out fixed columns.
    let free: Vec<usize> = (0..n).filter(|&j| tight_lower[j] != tight_upper[j]).collect();
    let fixed_value = |j: usize| if tight_lower[j] == tight_upper[j] { tight_lower[j] } else { 0.0 };

    let mut rows = Vec::with_capacity(lp.rows.len());
    for row in lp.rows.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| r) {
        let shift: f64 = (0..n).map(|j| row.coeffs[j] * fixed_value(j)).sum();
        let coeffs: Vec<f64> = free.iter().map(|&j| row.coeffs[j]).collect();
        let (lo, hi) = match row.sense {
            Sense::Le => (f64::NEG_INFINITY, row.rhs - shift),
            Sense::Ge => (row.rhs - shift, f64::INFINITY),
            Sense::Eq => (row.rhs - shift, row.rhs - shift),
        };
        if coeffs.iter().all(|&a| a == 0.0) {
            if lo > FEAS_TOL || hi < -FEAS_TOL {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        rows.push((coeffs, lo, hi));
    }

    let objective: Vec<f64> = free.iter().map(|&j| lp.objective[j]).collect();
    let lower: Vec<f64> = free.iter().map(|&j| tight_lower[j]).collect();
    let upper: Vec<f64> = free.iter().map(|&j| tight_upper[j]).collect();

    let mut simplex = Simplex::new(&objective, &lower, &upper, &rows);
    let status = simplex.run()?;
    match status {
        Phase::Infeasible => Ok(LpOutcome::Infeasible),
        Phase::Unbounded => Ok(LpOutcome::Unbounded),
        Phase::Optimal => {
            let reduced = simplex.structural_values();
            let mut x: Vec<f64> = (0..n).map(|j| fixed_value(j).clamp(lp.lower[j], lp.upper[j])).collect();
            for (k, &j) in free.iter().enumerate() {
                x[j] = reduced[k].clamp(lp.lower[j], lp.upper[j]);
            }
            let (row_viol, _) = lp.infeasibility(&x);
            if row_viol > FEAS_TOL {
                return Err(Error::Solver {
                    message: format!("optimal basis violates a row by {row_viol:e}"),
                    basis: simplex.basis.clone(),
                });
            }
            Ok(LpOutcome::Optimal(LpSolution {
                objective: lp.objective_value(&x),
                x,
                iterations: simplex.iterations,
            }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column resting at zero.
    Free,
}

enum Phase {
    Optimal,
    Infeasible,
    Unbounded,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

struct Simplex {
    /// Rows of the canonical tableau, `m × ncols`, row-major.
    tableau: Vec<f64>,
    m: usize,
    ncols: usize,
    n_struct: usize,
    n_rows_vars: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    structural_cost: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
    degenerate: usize,
    bland: bool,
    /// The starting tableau, an equivalent form of the constraints used to
    /// rebuild the current one from scratch.
    original: Vec<f64>,
    since_reinvert: usize,
}

/// Pivots between two rebuilds of the tableau.
pub const REINVERT_EVERY: usize = 100;
/// Bound slack allowed by the first pass of the ratio test.
const HARRIS_TOL: f64 = 1e-9;

impl Simplex {
    fn new(objective: &[f64], lower: &[f64], upper: &[f64], rows: &[(Vec<f64>, f64, f64)]) -> Self {
        let n = objective.len();
        let m = rows.len();

        let mut lo: Vec<f64> = lower.to_vec();
        let mut hi: Vec<f64> = upper.to_vec();
        let mut value = Vec::with_capacity(n + m);
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            if lo[j].is_finite() {
                value.push(lo[j]);
                state.push(State::AtLower);
            } else if hi[j].is_finite() {
                value.push(hi[j]);
                state.push(State::AtUpper);
            } else {
                value.push(0.0);
                state.push(State::Free);
            }
        }

        // Decide which rows need an artificial at the starting point.
        let mut artificial_rows = Vec::new();
        let mut row_start = Vec::with_capacity(m);
        for (i, (coeffs, rlo, rhi)) in rows.iter().enumerate() {
            let act: f64 = coeffs.iter().zip(&value).map(|(a, v)| a * v).sum();
            lo.push(*rlo);
            hi.push(*rhi);
            if act < *rlo {
                row_start.push((*rlo, State::AtLower));
                artificial_rows.push((i, 1.0, rlo - act));
            } else if act > *rhi {
                row_start.push((*rhi, State::AtUpper));
                artificial_rows.push((i, -1.0, act - rhi));
            } else {
                row_start.push((act, State::Basic));
            }
        }
        let n_art = artificial_rows.len();
        let ncols = n + m + n_art;
        for &(v, s) in &row_start {
            value.push(v);
            state.push(s);
        }

        let mut basis = vec![usize::MAX; m];
        let mut tableau = vec![0.0; m * ncols];
        for (i, (coeffs, _, _)) in rows.iter().enumerate() {
            let row = &mut tableau[i * ncols..(i + 1) * ncols];
            if row_start[i].1 == State::Basic {
                // -a·x + r = 0
                for j in 0..n {
                    row[j] = -coeffs[j];
                }
                row[n + i] = 1.0;
                basis[i] = n + i;
            }
        }
        let mut cost = vec![0.0; ncols];
        for (k, &(i, sigma, amount)) in artificial_rows.iter().enumerate() {
            let col = n + m + k;
            let row = &mut tableau[i * ncols..(i + 1) * ncols];
            // (a·x - r)/sigma + t = 0
            for j in 0..n {
                row[j] = rows[i].0[j] / sigma;
            }
            row[n + i] = -1.0 / sigma;
            row[col] = 1.0;
            basis[i] = col;
            lo.push(0.0);
            hi.push(f64::INFINITY);
            value.push(amount);
            state.push(State::Basic);
            cost[col] = -1.0;
        }

        let mut s = Self {
            original: tableau.clone(),
            since_reinvert: 0,
            tableau,
            m,
            ncols,
            n_struct: n,
            n_rows_vars: m,
            lower: lo,
            upper: hi,
            value,
            state,
            basis,
            cost,
            structural_cost: objective.to_vec(),
            reduced: vec![0.0; ncols],
            iterations: 0,
            degenerate: 0,
            bland: false,
        };
        s.recompute_reduced();
        s
    }

    fn n_artificial(&self) -> usize {
        self.ncols - self.n_struct - self.n_rows_vars
    }

    fn run_phase_objective(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.degenerate = 0;
        self.bland = false;
        self.recompute_reduced();
    }

    fn run(&mut self) -> Result<Phase> {
        let limit = 50 * (self.m + self.ncols) + 1000;
        // Phase one: maximize -(sum of artificials).
        if self.n_artificial() > 0 {
            let mut c1 = vec![0.0; self.ncols];
            for c in c1.iter_mut().skip(self.n_struct + self.n_rows_vars) {
                *c = -1.0;
            }
            self.run_phase_objective(c1);
            if let Step::Unbounded = self.iterate(limit, "phase one")? {
                return Err(self.breakdown("phase one reported unbounded"));
            }
            let infeasibility: f64 = (self.n_struct + self.n_rows_vars..self.ncols).map(|j| self.value[j]).sum();
            if infeasibility > FEAS_TOL {
                return Ok(Phase::Infeasible);
            }
            for j in self.n_struct + self.n_rows_vars..self.ncols {
                self.upper[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.state[j] = State::AtLower;
                    self.value[j] = 0.0;
                }
            }
        }
        let mut c2 = vec![0.0; self.ncols];
        c2[..self.n_struct].copy_from_slice(&self.structural_cost);
        self.run_phase_objective(c2);
        match self.iterate(limit, "phase two")? {
            Step::Unbounded => Ok(Phase::Unbounded),
            _ => Ok(Phase::Optimal),
        }
    }

    /// Pivots until optimal or unbounded. Optimality is only accepted on a
    /// freshly rebuilt tableau.
    fn iterate(&mut self, limit: usize, phase: &str) -> Result<Step> {
        loop {
            if self.iterations > limit {
                return Err(self.breakdown(&format!("iteration limit reached in {phase}")));
            }
            match self.step()? {
                Step::Moved => {
                    if self.since_reinvert >= REINVERT_EVERY {
                        self.reinvert()?;
                    }
                }
                Step::Unbounded => return Ok(Step::Unbounded),
                Step::Optimal => {
                    if self.since_reinvert == 0 {
                        self.refresh_values();
                        return Ok(Step::Optimal);
                    }
                    self.reinvert()?;
                }
            }
        }
    }

    /// Rebuilds the tableau as `B^-1 M` from the starting rows by
    /// Gauss-Jordan elimination with partial pivoting, then refreshes basic
    /// values and reduced costs.
    fn reinvert(&mut self) -> Result<()> {
        let (m, nc) = (self.m, self.ncols);
        let mut t = self.original.clone();
        for k in 0..m {
            let c = self.basis[k];
            let (best, mag) = (k..m)
                .map(|i| (i, t[i * nc + c].abs()))
                .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if mag < 1e-12 {
                return Err(self.breakdown("basis became numerically singular"));
            }
            if best != k {
                for j in 0..nc {
                    t.swap(k * nc + j, best * nc + j);
                }
            }
            let piv = t[k * nc + c];
            for v in &mut t[k * nc..(k + 1) * nc] {
                *v /= piv;
            }
            let pivot_row: Vec<f64> = t[k * nc..(k + 1) * nc].to_vec();
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = t[i * nc + c];
                if f != 0.0 {
                    for (v, p) in t[i * nc..(i + 1) * nc].iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                    t[i * nc + c] = 0.0;
                }
            }
        }
        self.tableau = t;
        self.since_reinvert = 0;
        self.refresh_values();
        self.recompute_reduced();
        Ok(())
    }

    fn breakdown(&self, message: &str) -> Error {
        Error::Solver { message: message.to_string(), basis: self.basis.clone() }
    }

    fn recompute_reduced(&mut self) {
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tableau[i * self.ncols..(i + 1) * self.ncols];
                // Row i reads x_B + sum T_ij x_j = 0, so x_B = -sum T_ij x_j.
                for (dj, t) in d.iter_mut().zip(row) {
                    *dj -= cb * t;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.reduced = d;
    }

    fn entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            let st = self.state[j];
            if st == State::Basic || self.upper[j] - self.lower[j] == 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let dir = match st {
                State::AtLower if d > OPT_TOL => 1.0,
                State::AtUpper if d < -OPT_TOL => -1.0,
                State::Free if d.abs() > OPT_TOL => d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, mag)| d.abs() > mag) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn step(&mut self) -> Result<Step> {
        let Some((q, dir)) = self.entering() else {
            return Ok(Step::Optimal);
        };
        let nc = self.ncols;

        // Harris ratio test. Moving x_q by dir*theta moves x_B(i) by
        // rate_i*theta. Pass one finds the step allowed when every bound is
        // relaxed by HARRIS_TOL; pass two picks, among rows blocking within
        // that step, the one with the largest pivot.
        let span = self.upper[q] - self.lower[q];
        let mut relaxed = f64::INFINITY;
        let mut tiny_limit = false;
        let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
        for i in 0..self.m {
            let rate = -self.tableau[i * nc + q] * dir;
            let b = self.basis[i];
            let limit = if rate > 0.0 {
                self.upper[b]
            } else if rate < 0.0 {
                self.lower[b]
            } else {
                continue;
            };
            if !limit.is_finite() {
                continue;
            }
            if rate.abs() <= PIVOT_TOL {
                tiny_limit = true;
                continue;
            }
            let slack = (limit - self.value[b]) / rate;
            relaxed = relaxed.min((slack + HARRIS_TOL / rate.abs()).max(0.0));
            candidates.push((i, rate, slack.max(0.0)));
        }
        let mut theta = f64::INFINITY;
        let mut leave: Option<usize> = None;
        if span.is_finite() && span <= relaxed {
            theta = span;
        } else if relaxed.is_finite() {
            let eligible = candidates.iter().filter(|c| c.2 <= relaxed);
            let best_rate = eligible.clone().map(|c| c.1.abs()).fold(0.0, f64::max);
            let chosen = if self.bland {
                eligible
                    .filter(|c| c.1.abs() >= 1e-3 * best_rate)
                    .min_by_key(|c| self.basis[c.0])
            } else {
                eligible.max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            };
            if let Some(&(i, _, t)) = chosen {
                theta = t;
                leave = Some(i);
            }
        }
        if theta == f64::INFINITY {
            if tiny_limit {
                return Err(self.breakdown("only sub-threshold pivots limit the entering column"));
            }
            return Ok(Step::Unbounded);
        }

        self.iterations += 1;
        if theta <= 1e-12 {
            self.degenerate += 1;
            if !self.bland && self.degenerate > 10 * (self.m + self.ncols) {
                self.bland = true;
            }
        }

        for i in 0..self.m {
            let rate = -self.tableau[i * nc + q] * dir;
            if rate != 0.0 {
                let b = self.basis[i];
                self.value[b] += rate * theta;
            }
        }
        self.value[q] += dir * theta;

        match leave {
            None => {
                // Bound flip.
                if dir > 0.0 {
                    self.value[q] = self.upper[q];
                    self.state[q] = State::AtUpper;
                } else {
                    self.value[q] = self.lower[q];
                    self.state[q] = State::AtLower;
                }
            }
            Some(r) => {
                let p = self.basis[r];
                let rate = -self.tableau[r * nc + q] * dir;
                if rate > 0.0 {
                    self.value[p] = self.upper[p];
                    self.state[p] = State::AtUpper;
                } else {
                    self.value[p] = self.lower[p];
                    self.state[p] = State::AtLower;
                }
                if self.lower[p] == self.upper[p] {
                    self.state[p] = State::AtLower;
                }
                self.pivot(r, q);
                self.state[q] = State::Basic;
                self.basis[r] = q;
                self.since_reinvert += 1;
            }
        }
        Ok(Step::Moved)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.tableau[r * nc + q];
        {
            let row = &mut self.tableau[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = self.tableau[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tableau[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tableau[i * nc..(i + 1) * nc];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[q] = 0.0;
        }
        // Reduced costs: d_j -= d_q * (pivot row in "x_B = -T x_N" form).
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *d += dq * -p;
            }
            self.reduced[q] = 0.0;
        }
    }

    /// Recomputes basic values from the nonbasic ones through the tableau.
    fn refresh_values(&mut self) {
        let nc = self.ncols;
        for i in 0..self.m {
            let row = &self.tableau[i * nc..(i + 1) * nc];
            let mut acc = 0.0;
            for j in 0..nc {
                if self.state[j] != State::Basic && row[j] != 0.0 {
                    acc -= row[j] * self.value[j];
                }
            }
            self.value[self.basis[i]] = acc;
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        self.value[..self.n_struct].to_vec()
    }
}
