//! Big-M mixed-integer model of a ReLU network over a polytope.
//!
//! Columns are laid out as the input `x_1`, then for every hidden layer its
//! post-activations `x_k` followed by its indicators `z_k`. Each hidden
//! neuron contributes three rows,
//!
//! ```text
//! x_k,i <= w·x_{k-1} + b - l (1 - z)
//! x_k,i <= u z
//! x_k,i >= w·x_{k-1} + b
//! ```
//!
//! and the fourth family, `x_k,i >= 0`, is the column's lower bound. The
//! objective is the head `a` over the last hidden layer.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linprog::{LinearProgram, Sense};
use crate::mipsolver::MixedIntegerProgram;
use crate::network::{ActivationPattern, ReluNetwork};
use crate::polytope::Polytope;

/// Pre-activation ranges per hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronBounds {
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

impl NeuronBounds {
    pub fn validate(&self, net: &ReluNetwork) -> Result<()> {
        let widths = net.hidden_widths();
        let shapes_ok = self.lower.len() == widths.len()
            && self.upper.len() == widths.len()
            && widths
                .iter()
                .enumerate()
                .all(|(k, &n)| self.lower[k].len() == n && self.upper[k].len() == n);
        if !shapes_ok {
            return Err(Error::Invariant("bounds do not match the network's hidden widths".into()));
        }
        for (k, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            for (i, (l, u)) in lo.iter().zip(hi).enumerate() {
                if !l.is_finite() || !u.is_finite() || l > u {
                    return Err(Error::Invariant(format!("layer {k} neuron {i}: bounds [{l}, {u}]")));
                }
            }
        }
        Ok(())
    }
}

/// Sequential pre-activation bounds. The first hidden layer is bounded by
/// two LPs per neuron over `p`; deeper layers by interval arithmetic over
/// the post-activation box `[relu(l), relu(u)]` of the previous layer.
pub fn compute_bounds(net: &ReluNetwork, p: &Polytope) -> Result<NeuronBounds> {
    if p.dim() != net.input_dim() {
        return Err(Error::Input(format!(
            "polytope has dimension {}, network input {}",
            p.dim(),
            net.input_dim()
        )));
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let first = &net.layers()[0];
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for (row, b) in first.weights.iter().zip(&first.b) {
        lo.push(p.extreme(row, false)? + b);
        hi.push(p.extreme(row, true)? + b);
    }
    lower.push(lo);
    upper.push(hi);

    for layer in &net.layers()[1..] {
        let prev_lo: Vec<f64> = lower.last().unwrap().iter().map(|v: &f64| v.max(0.0)).collect();
        let prev_hi: Vec<f64> = upper.last().unwrap().iter().map(|v: &f64| v.max(0.0)).collect();
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for (row, b) in layer.weights.iter().zip(&layer.b) {
            let (mut l, mut u) = (*b, *b);
            for ((w, a), c) in row.iter().zip(&prev_lo).zip(&prev_hi) {
                let (x, y) = (w * a, w * c);
                l += x.min(y);
                u += x.max(y);
            }
            lo.push(l);
            hi.push(u);
        }
        lower.push(lo);
        upper.push(hi);
    }
    let bounds = NeuronBounds { lower, upper };
    bounds.validate(net)?;
    Ok(bounds)
}

/// Column positions of the model's variables.
#[derive(Debug, Clone, PartialEq)]
pub struct VarMap {
    pub input: Range<usize>,
    /// Post-activation columns per hidden layer.
    pub hidden: Vec<Range<usize>>,
    /// Indicator columns per hidden layer.
    pub indicator: Vec<Range<usize>>,
}

impl VarMap {
    pub fn num_cols(&self) -> usize {
        self.indicator.last().map_or(self.input.end, |r| r.end)
    }

    pub fn hidden_col(&self, layer: usize, neuron: usize) -> usize {
        self.hidden[layer].start + neuron
    }

    pub fn indicator_col(&self, layer: usize, neuron: usize) -> usize {
        self.indicator[layer].start + neuron
    }

    pub fn all_indicators(&self) -> Vec<usize> {
        self.indicator.iter().flat_map(Clone::clone).collect()
    }
}

/// What a model row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `x <= pre - l (1 - z)`
    UpperPreact { layer: usize, neuron: usize },
    /// `x <= u z`
    UpperBigM { layer: usize, neuron: usize },
    /// `x >= pre`
    LowerPreact { layer: usize, neuron: usize },
    /// One of the polytope's general inequalities.
    Domain(usize),
}

#[derive(Debug, Clone)]
pub struct ReluMipFormulation {
    pub mip: MixedIntegerProgram,
    pub var_map: VarMap,
    pub row_kinds: Vec<RowKind>,
    pub bounds: NeuronBounds,
    network: ReluNetwork,
}

pub fn build_full_mip(net: &ReluNetwork, p: &Polytope, bounds: &NeuronBounds) -> Result<ReluMipFormulation> {
    bounds.validate(net)?;
    if p.dim() != net.input_dim() {
        return Err(Error::Input("polytope and network dimensions differ".into()));
    }
    let d = net.input_dim();
    let mut hidden = Vec::new();
    let mut indicator = Vec::new();
    let mut next = d;
    for n in net.hidden_widths() {
        hidden.push(next..next + n);
        indicator.push(next + n..next + 2 * n);
        next += 2 * n;
    }
    let var_map = VarMap { input: 0..d, hidden, indicator };
    let ncols = var_map.num_cols();

    let mut lp = LinearProgram::new(ncols);
    for j in 0..d {
        lp.set_bounds(j, p.lower()[j], p.upper()[j]);
    }
    let mut row_kinds = Vec::new();
    for (i, h) in p.general().iter().enumerate() {
        let mut coeffs = vec![0.0; ncols];
        coeffs[..d].copy_from_slice(&h.row);
        lp.add_row(coeffs, Sense::Le, h.rhs);
        row_kinds.push(RowKind::Domain(i));
    }

    for (k, layer) in net.layers().iter().enumerate() {
        let prev = if k == 0 { var_map.input.clone() } else { var_map.hidden[k - 1].clone() };
        for (i, (w, &b)) in layer.weights.iter().zip(&layer.b).enumerate() {
            let (l, u) = (bounds.lower[k][i], bounds.upper[k][i]);
            let xc = var_map.hidden_col(k, i);
            let zc = var_map.indicator_col(k, i);
            lp.set_bounds(xc, 0.0, f64::INFINITY);
            lp.set_bounds(zc, 0.0, 1.0);

            // x - w·prev - l z <= b - l
            let mut row = vec![0.0; ncols];
            row[xc] = 1.0;
            for (c, wv) in prev.clone().zip(w) {
                row[c] = -wv;
            }
            row[zc] = -l;
            lp.add_row(row, Sense::Le, b - l);
            row_kinds.push(RowKind::UpperPreact { layer: k, neuron: i });

            // x - u z <= 0
            let mut row = vec![0.0; ncols];
            row[xc] = 1.0;
            row[zc] = -u;
            lp.add_row(row, Sense::Le, 0.0);
            row_kinds.push(RowKind::UpperBigM { layer: k, neuron: i });

            // x - w·prev >= b
            let mut row = vec![0.0; ncols];
            row[xc] = 1.0;
            for (c, wv) in prev.clone().zip(w) {
                row[c] = -wv;
            }
            lp.add_row(row, Sense::Ge, b);
            row_kinds.push(RowKind::LowerPreact { layer: k, neuron: i });
        }
    }
    let last = var_map.hidden.last().expect("at least one hidden layer").clone();
    for (c, a) in last.zip(net.head()) {
        lp.objective[c] = *a;
    }
    let mip = MixedIntegerProgram::new(lp, var_map.all_indicators())?;
    Ok(ReluMipFormulation { mip, var_map, row_kinds, bounds: bounds.clone(), network: net.clone() })
}

impl ReluMipFormulation {
    pub fn network(&self) -> &ReluNetwork {
        &self.network
    }

    fn check_pattern(&self, pat: &ActivationPattern) -> Result<()> {
        let widths = self.network.hidden_widths();
        let ok = pat.bits.len() == widths.len()
            && pat.boundary.len() == widths.len()
            && widths.iter().enumerate().all(|(k, &n)| {
                pat.bits[k].len() == n && pat.boundary[k].iter().all(|&i| i < n)
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Input("activation pattern does not match the network's hidden widths".into()))
        }
    }

    fn pin(&self, lp: &mut LinearProgram, k: usize, i: usize, on: bool) {
        let zc = self.var_map.indicator_col(k, i);
        let v = if on { 1.0 } else { 0.0 };
        lp.set_bounds(zc, v, v);
    }

    /// The model with every indicator pinned to `pat.bits`: its feasible set
    /// is the closure of that pattern's linear region.
    pub fn fix_pattern_lp(&self, pat: &ActivationPattern) -> Result<LinearProgram> {
        self.check_pattern(pat)?;
        let mut lp = self.mip.base.clone();
        for (k, layer) in pat.bits.iter().enumerate() {
            for (i, &on) in layer.iter().enumerate() {
                self.pin(&mut lp, k, i, on);
            }
        }
        Ok(lp)
    }

    /// The model with only the boundary neurons' indicators left free.
    pub fn restricted_mip(&self, x_star: &[f64], pat: &ActivationPattern) -> Result<MixedIntegerProgram> {
        self.check_pattern(pat)?;
        if x_star.len() != self.network.input_dim() {
            return Err(Error::Input("x_star has the wrong dimension".into()));
        }
        let mut lp = self.mip.base.clone();
        let mut free = Vec::new();
        for (k, layer) in pat.bits.iter().enumerate() {
            for (i, &on) in layer.iter().enumerate() {
                if pat.boundary[k].contains(&i) {
                    free.push(self.var_map.indicator_col(k, i));
                } else {
                    self.pin(&mut lp, k, i, on);
                }
            }
        }
        free.sort_unstable();
        MixedIntegerProgram::new(lp, free)
    }

    /// Full model assignment induced by an input point: post-activations
    /// from the forward pass and indicators from the pattern.
    pub fn assignment(&self, x: &[f64]) -> Result<Vec<f64>> {
        let fwd = self.network.forward(x)?;
        let mut out = vec![0.0; self.var_map.num_cols()];
        out[self.var_map.input.clone()].copy_from_slice(x);
        for (k, pre) in fwd.preacts.iter().enumerate() {
            for (i, &v) in pre.iter().enumerate() {
                out[self.var_map.hidden_col(k, i)] = v.max(0.0);
                out[self.var_map.indicator_col(k, i)] = if v > 0.0 { 1.0 } else { 0.0 };
            }
        }
        Ok(out)
    }

    /// Input coordinates of a model assignment.
    pub fn input_of(&self, assignment: &[f64]) -> Vec<f64> {
        assignment[self.var_map.input.clone()].to_vec()
    }
}
