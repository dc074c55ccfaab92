//! Desk-scale comparison harness: one random network per (input dimension,
//! seed) cell, every requested method run on it, results tabulated as CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::xavier_init;
use crate::par;
use crate::polytope::Polytope;
use crate::samplers::{ReluProblem, SamplerConfig, ORACLE_MAX_NEURONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    Sampling,
    Enhanced,
    Mip,
    MipWarm,
    Oracle,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Sampling => "sampling",
            BenchMethod::Enhanced => "enhanced",
            BenchMethod::Mip => "mip",
            BenchMethod::MipWarm => "mip_warm",
            BenchMethod::Oracle => "oracle",
        }
    }
}

fn default_budget() -> f64 {
    60.0
}

fn default_samples() -> usize {
    1000
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub dims: Vec<usize>,
    /// Hidden layer widths; the output layer is appended.
    pub widths: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<BenchMethod>,
    /// Seconds per method per cell.
    #[serde(default = "default_budget")]
    pub per_method_budget: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_samples")]
    pub warm_iters: usize,
    /// Emit `<method>_seconds` columns. Wall-clock times make the CSV
    /// nondeterministic, so comparisons of two runs turn this off.
    #[serde(default = "default_true")]
    pub timing: bool,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Input("bench spec lists no methods".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Input(format!("method {} listed twice", m.name())));
            }
        }
        if !(self.per_method_budget > 0.0) || !self.per_method_budget.is_finite() {
            return Err(Error::Input(format!("per_method_budget must be > 0, got {}", self.per_method_budget)));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Input("dims must be a nonempty list of positive sizes".into()));
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return Err(Error::Input("widths must be a nonempty list of positive sizes".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Input("bench spec lists no seeds".into()));
        }
        if self.n_samples == 0 || self.warm_iters == 0 {
            return Err(Error::Input("n_samples and warm_iters must be at least 1".into()));
        }
        let hidden: usize = self.widths.iter().sum();
        if self.methods.contains(&BenchMethod::Oracle) && hidden > ORACLE_MAX_NEURONS {
            return Err(Error::Input(format!(
                "oracle requested for {hidden} hidden neurons (limit {ORACLE_MAX_NEURONS})"
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Input(format!("bench spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str::<Self>(&text)
            .map_err(|source| Error::Parse { path: path.to_path_buf(), source })
            .and_then(|s| s.validate().map(|_| s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub d: usize,
    pub seed: u64,
    /// One entry per method in spec order; `None` when the method produced
    /// no value (for instance a MIP that found nothing within its budget).
    pub values: Vec<Option<f64>>,
    pub seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub methods: Vec<BenchMethod>,
    pub timing: bool,
    pub rows: Vec<BenchCell>,
}

impl BenchTable {
    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["d".to_string(), "seed".to_string()];
        cols.extend(self.methods.iter().map(|m| m.name().to_string()));
        if self.timing {
            cols.extend(self.methods.iter().map(|m| format!("{}_seconds", m.name())));
        }
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.d, row.seed);
            for v in &row.values {
                out.push(',');
                out.push_str(&v.map_or_else(|| "NA".to_string(), format_sig6));
            }
            if self.timing {
                for s in &row.seconds {
                    out.push(',');
                    out.push_str(&format_sig6(*s));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Six significant digits, '.' decimal, no exponent for moderate magnitudes.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        return format!("{v:.5e}");
    }
    let s = format!("{:.*}", (5 - mag).max(0) as usize, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn run_method(problem: &ReluProblem, method: BenchMethod, spec: &BenchSpec, seed: u64) -> Option<f64> {
    let budget = Duration::from_secs_f64(spec.per_method_budget);
    let cfg = SamplerConfig {
        n_samples: spec.n_samples,
        seed,
        time_budget: Some(budget),
        parallel: false,
        ..SamplerConfig::default()
    };
    let result = match method {
        BenchMethod::Sampling => problem.sampling(&cfg),
        BenchMethod::Enhanced => problem.enhanced(&cfg),
        BenchMethod::Mip => problem.full_mip(None, Some(budget)),
        BenchMethod::MipWarm => {
            let warm_cfg = SamplerConfig { n_samples: spec.warm_iters, ..cfg };
            problem.sampling(&warm_cfg).and_then(|w| problem.full_mip(Some(&w), Some(budget)))
        }
        BenchMethod::Oracle => problem.brute_force(false),
    };
    result.ok().map(|r| r.objective)
}

/// Runs every cell. Cells may run concurrently; each is sequential inside
/// and rows come back in spec order (dims outer, seeds inner).
pub fn run_bench(spec: &BenchSpec, parallel: bool) -> Result<BenchTable> {
    spec.validate()?;
    let cells: Vec<(usize, u64)> =
        spec.dims.iter().flat_map(|&d| spec.seeds.iter().map(move |&s| (d, s))).collect();
    let rows = par::map_slice(&cells, parallel, |&(d, seed)| -> Result<BenchCell> {
        let mut widths = vec![d];
        widths.extend(&spec.widths);
        widths.push(1);
        let net = xavier_init(&widths, seed)?;
        let problem = ReluProblem::new(&net, &Polytope::unit_box(d)?)?;
        let mut values = Vec::with_capacity(spec.methods.len());
        let mut seconds = Vec::with_capacity(spec.methods.len());
        for &m in &spec.methods {
            let started = Instant::now();
            values.push(run_method(&problem, m, spec, seed));
            seconds.push(started.elapsed().as_secs_f64());
        }
        Ok(BenchCell { d, seed, values, seconds })
    });
    Ok(BenchTable { methods: spec.methods.clone(), timing: spec.timing, rows: rows.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(methods: Vec<BenchMethod>) -> BenchSpec {
        BenchSpec {
            dims: vec![2],
            widths: vec![4],
            seeds: vec![1, 2],
            methods,
            per_method_budget: 30.0,
            n_samples: 50,
            warm_iters: 20,
            timing: false,
        }
    }

    #[test]
    fn sig6() {
        assert_eq!(format_sig6(0.5), "0.5");
        assert_eq!(format_sig6(1.23456789), "1.23457");
        assert_eq!(format_sig6(-1234.5678), "-1234.57");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.5e-7), "1.50000e-7");
    }

    #[test]
    fn validation() {
        assert!(spec(vec![]).validate().is_err());
        let mut s = spec(vec![BenchMethod::Sampling]);
        s.per_method_budget = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec(vec![BenchMethod::Oracle]);
        s.widths = vec![21];
        assert!(s.validate().is_err());
        assert!(spec(vec![BenchMethod::Mip, BenchMethod::Mip]).validate().is_err());
        assert!(BenchSpec::from_json(r#"{"dims":[2],"widths":[3],"seeds":[1],"methods":["sampling"]}"#).is_ok());
        assert!(BenchSpec::from_json(r#"{"dims":[2],"widths":[3],"seeds":[1],"methods":["simplex"]}"#).is_err());
    }

    #[test]
    fn table_layout_and_determinism() {
        let s = spec(vec![BenchMethod::Sampling, BenchMethod::Enhanced, BenchMethod::Oracle]);
        let a = run_bench(&s, true).unwrap();
        let b = run_bench(&s, false).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let csv = a.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "d,seed,sampling,enhanced,oracle");
        assert_eq!(csv.lines().count(), 3);
        let mut timed = s.clone();
        timed.timing = true;
        let t = run_bench(&timed, true).unwrap();
        assert!(t.header().contains(&"oracle_seconds".to_string()));
    }
}
