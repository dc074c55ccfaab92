//! Extreme-value analysis of per-sample region optima.
//!
//! Each sampling iteration yields one value `X_i` (the optimum of the region
//! it landed in). Since the network is bounded on a polytope, the law of
//! `X_i` has a finite right endpoint and its extreme value index `γ` is
//! negative. Two estimators are provided: the moment estimator of Dekkers,
//! Einmahl and de Haan, and a beta fit by the method of moments. The
//! estimate feeds [`required_samples`].

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::network::ReluNetwork;
use crate::polytope::Polytope;
use crate::samplers::ReluProblem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub net: String,
    pub seed: u64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxSampleSet {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl MaxSampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("sample set is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("sample {i} is not finite ({})", values[i])));
        }
        Ok(Self { values, provenance: None })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvtMethod {
    Moment,
    BetaMom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvtEstimate {
    pub gamma: f64,
    pub method: EvtMethod,
    /// Upper order statistics used (moment method); sample size for the beta fit.
    pub k: usize,
    /// Moment method: the shift added before taking logs. Beta fit: KS
    /// distance between the rescaled data and the fitted CDF.
    pub diagnostic: f64,
}

/// `⌊√n⌋`.
pub fn default_k(n: usize) -> usize {
    (n as f64).sqrt().floor() as usize
}

/// Moment estimator over the top `k` order statistics.
pub fn moment_estimator(s: &MaxSampleSet, k: usize) -> Result<EvtEstimate> {
    let n = s.len();
    if k < 2 || k >= n {
        return Err(Error::Input(format!("k must satisfy 2 <= k < n, got k={k}, n={n}")));
    }
    let (lo, hi) = (s.min(), s.max());
    if lo == hi {
        return Err(Error::Estimation(format!("all {n} samples equal {lo}")));
    }
    let shift = if lo <= 0.0 { 1.0 - lo } else { 0.0 };
    let mut sorted: Vec<f64> = s.values().iter().map(|v| v + shift).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k].ln();
    let (mut m1, mut m2) = (0.0, 0.0);
    for v in &sorted[..k] {
        let d = v.ln() - threshold;
        m1 += d;
        m2 += d * d;
    }
    m1 /= k as f64;
    m2 /= k as f64;
    if m2 <= 0.0 {
        return Err(Error::Estimation(format!("the top {} samples are all equal", k + 1)));
    }
    let gamma = m1 + 1.0 - 0.5 / (1.0 - m1 * m1 / m2);
    if !gamma.is_finite() {
        return Err(Error::Estimation(format!("moment estimate is not finite (M1={m1}, M2={m2})")));
    }
    Ok(EvtEstimate { gamma, method: EvtMethod::Moment, k, diagnostic: shift })
}

/// Beta parameters matching mean `m` and variance `v` on `[0, 1]`.
pub fn beta_moments_to_params(m: f64, v: f64) -> Result<(f64, f64)> {
    if !(v > 0.0) {
        return Err(Error::Estimation(format!("variance {v} is not positive")));
    }
    let common = m * (1.0 - m) / v - 1.0;
    let (alpha, beta) = (m * common, (1.0 - m) * common);
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(Error::Fit(format!("moments m={m}, v={v} give alpha={alpha}, beta={beta}")));
    }
    Ok((alpha, beta))
}

/// Beta fit by moments after rescaling to `[0, 1]`; `γ = -1/α`.
pub fn beta_fit_gamma(s: &MaxSampleSet) -> Result<EvtEstimate> {
    let n = s.len();
    if n < 10 {
        return Err(Error::Input(format!("beta fit needs at least 10 samples, got {n}")));
    }
    let (lo, hi) = (s.min(), s.max());
    if lo == hi {
        return Err(Error::Estimation(format!("all {n} samples equal {lo}")));
    }
    let mut scaled: Vec<f64> = s.values().iter().map(|v| (v - lo) / (hi - lo)).collect();
    let mean = scaled.iter().sum::<f64>() / n as f64;
    let var = scaled.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / n as f64;
    let (alpha, beta) = beta_moments_to_params(mean, var)?;
    let dist = Beta::new(alpha, beta).map_err(|e| Error::Fit(e.to_string()))?;
    scaled.sort_by(f64::total_cmp);
    let ks = scaled
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let f = dist.cdf(u);
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(EvtEstimate { gamma: -1.0 / alpha, method: EvtMethod::BetaMom, k: n, diagnostic: ks })
}

/// Samples needed so that, with probability at least `1 - delta`, the best
/// of them is within `eps` of the maximum: `⌈ln(1/δ) / ε^(-1/γ)⌉`.
pub fn required_samples(gamma: f64, eps: f64, delta: f64) -> Result<u64> {
    if !(gamma < 0.0) {
        return Err(Error::Domain(format!(
            "gamma = {gamma}: the bound needs gamma < 0, i.e. a law with a finite right endpoint"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be positive and finite, got {eps}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let n = ((1.0 / delta).ln() / eps.powf(-1.0 / gamma)).ceil();
    if !n.is_finite() || n > u64::MAX as f64 {
        return Err(Error::Domain(format!("required sample count overflows (gamma={gamma}, eps={eps})")));
    }
    Ok(n as u64)
}

/// Runs the per-iteration LP step `n` times and keeps every region optimum.
pub fn collect_max_samples(net: &ReluNetwork, p: &Polytope, n: usize, seed: u64) -> Result<MaxSampleSet> {
    let values = ReluProblem::new(net, p)?.region_values(n, seed, crate::par::parallel_available())?;
    Ok(MaxSampleSet::new(values)?.with_provenance(Provenance { net: net.fingerprint(), seed, n }))
}
