//! Bounded input domains: a box, optionally cut by linear inequalities.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linprog::{self, LinearProgram, LpOutcome, Sense};
use crate::network::JsonLoadError;

/// Rejection attempts allowed per draw for polytopes with general rows.
pub const REJECTION_BUDGET: usize = 1_000_000;

/// `row · x <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub row: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polytope {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    general: Vec<Halfspace>,
}

#[derive(Deserialize)]
struct PolytopeFile {
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default)]
    general: Vec<Halfspace>,
}

impl Polytope {
    /// Builds and checks a polytope. Nonemptiness is certified with one LP.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, general: Vec<Halfspace>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Invariant(format!(
                "box has {} lower and {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l > u {
                return Err(Error::Invariant(format!("coordinate {j} has bounds [{l}, {u}]")));
            }
        }
        for (i, h) in general.iter().enumerate() {
            if h.row.len() != lower.len() || h.row.iter().any(|v| !v.is_finite()) || !h.rhs.is_finite() {
                return Err(Error::Invariant(format!("inequality {i} is malformed")));
            }
        }
        let p = Self { lower, upper, general };
        if !p.general.is_empty() && !p.as_lp().map(|lp| linprog::solve_lp(&lp))??.is_optimal() {
            return Err(Error::Domain("the polytope is empty".into()));
        }
        Ok(p)
    }

    /// The box `[lower, upper]` with no extra rows.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(lower, upper, Vec::new())
    }

    pub fn unit_box(dim: usize) -> Result<Self> {
        Self::boxed(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn general(&self) -> &[Halfspace] {
        &self.general
    }

    pub fn is_box(&self) -> bool {
        self.general.is_empty()
    }

    /// Feasibility LP over the polytope with a zero objective.
    fn as_lp(&self) -> Result<LinearProgram> {
        let mut lp = LinearProgram::new(self.dim());
        for j in 0..self.dim() {
            lp.set_bounds(j, self.lower[j], self.upper[j]);
        }
        for h in &self.general {
            lp.add_row(h.row.clone(), Sense::Le, h.rhs);
        }
        Ok(lp)
    }

    /// Optimizes `w·x` over the polytope in the given direction.
    pub fn extreme(&self, w: &[f64], maximize: bool) -> Result<f64> {
        let mut lp = self.as_lp()?;
        lp.objective = w.iter().map(|v| if maximize { *v } else { -v }).collect();
        match linprog::solve_lp(&lp)? {
            LpOutcome::Optimal(sol) => Ok(if maximize { sol.objective } else { -sol.objective }),
            LpOutcome::Infeasible => Err(Error::Domain("the polytope is empty".into())),
            LpOutcome::Unbounded => Err(Error::Domain("the polytope is unbounded".into())),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let in_box = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol);
        in_box
            && self
                .general
                .iter()
                .all(|h| h.row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= h.rhs + tol)
    }

    /// Uniform draw from the polytope: per-coordinate uniform on a box,
    /// rejection from the bounding box otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let draw = |rng: &mut R| -> Vec<f64> {
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(&l, &u)| if l == u { l } else { rng.random_range(l..=u) })
                .collect()
        };
        if self.is_box() {
            return Ok(draw(rng));
        }
        for _ in 0..REJECTION_BUDGET {
            let x = draw(rng);
            if self.contains(&x, 0.0) {
                return Ok(x);
            }
        }
        Err(Error::Sampling(format!(
            "rejection sampling exhausted {REJECTION_BUDGET} draws on polytope {}",
            self.describe()
        )))
    }

    fn describe(&self) -> String {
        format!("box {:?}..{:?} with {} inequalities", self.lower, self.upper, self.general.len())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polytope serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, JsonLoadError> {
        let file: PolytopeFile = serde_json::from_str(text).map_err(JsonLoadError::Parse)?;
        Self::new(file.lower, file.upper, file.general).map_err(JsonLoadError::Invalid)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| e.at(path))
    }
}

/// Module-level alias matching [`Polytope::contains`].
pub fn contains(p: &Polytope, x: &[f64], tol: f64) -> bool {
    p.contains(x, tol)
}

/// Module-level alias matching [`Polytope::sample`].
pub fn sample_input<R: Rng + ?Sized>(p: &Polytope, rng: &mut R) -> Result<Vec<f64>> {
    p.sample(rng)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn containment() {
        let p = Polytope::unit_box(1).unwrap();
        assert!(p.contains(&[0.5], 0.0));
        assert!(p.contains(&[1.0 + 1e-12], 1e-9));
        assert!(!p.contains(&[1.1], 1e-9));
        assert!(!p.contains(&[0.5, 0.5], 1e-9));
    }

    #[test]
    fn box_samples_stay_inside() {
        let p = Polytope::unit_box(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = p.sample(&mut rng).unwrap();
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn box_sample_mean() {
        // Uniform[0,1] has sd 1/sqrt(12).
        let p = Polytope::unit_box(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mean = (0..n).map(|_| p.sample(&mut rng).unwrap()[0]).sum::<f64>() / n as f64;
        let se = (1.0f64 / 12.0).sqrt() / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn rejection_respects_rows() {
        let p = Polytope::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![Halfspace { row: vec![1.0, 1.0], rhs: 0.1 }],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let x = p.sample(&mut rng).unwrap();
            assert!(x[0] + x[1] <= 0.1);
        }
    }

    #[test]
    fn rejection_budget_exhaustion() {
        // Nonempty but measure zero: x1 + x2 <= 0 on the unit square.
        let p = Polytope::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![Halfspace { row: vec![1.0, 1.0], rhs: 0.0 }],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        match p.sample(&mut rng) {
            Err(Error::Sampling(msg)) => assert!(msg.contains("polytope")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(Polytope::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(Polytope::boxed(vec![0.0], vec![f64::INFINITY]).is_err());
        let empty = Polytope::new(vec![0.0], vec![1.0], vec![Halfspace { row: vec![1.0], rhs: -1.0 }]);
        assert!(matches!(empty, Err(Error::Domain(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = Polytope::new(vec![0.0, -1.0], vec![1.0, 2.0], vec![Halfspace { row: vec![1.0, 1.0], rhs: 0.5 }])
            .unwrap();
        assert_eq!(Polytope::from_json(&p.to_json()).unwrap(), p);
        let b = Polytope::from_json(r#"{"lower":[0],"upper":[1]}"#).unwrap();
        assert!(b.is_box());
    }
}
