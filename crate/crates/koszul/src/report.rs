//! Check reports: named identities, sampled residuals, verdicts.

use serde::Serialize;

use crate::chart::Point;
use crate::expr::Expr;

/// Symbolic-exact identities only accumulate float rounding.
pub const TOL_IDENTITY: f64 = 1e-9;
/// Finite-difference cross-checks live in a coarser error regime.
pub const TOL_FINITE_DIFF: f64 = 1e-5;
/// Default sample count and seed used by the CLI and the fixtures.
pub const DEFAULT_POINTS: usize = 20;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    PreconditionsFailed,
    TheoremViolated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::PreconditionsFailed => "preconditions-failed",
            Verdict::TheoremViolated => "theorem-violated",
        };
        write!(f, "{s}")
    }
}

impl Verdict {
    pub fn parse(s: &str) -> Option<Verdict> {
        match s {
            "pass" => Some(Verdict::Pass),
            "fail" => Some(Verdict::Fail),
            "preconditions-failed" => Some(Verdict::PreconditionsFailed),
            "theorem-violated" => Some(Verdict::TheoremViolated),
            _ => None,
        }
    }
}

/// Outcome of one named identity check over a set of sample points.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    /// Stable identity name, e.g. `jacobi.schouten`.
    pub name: String,
    /// The identity being measured, written as a formula.
    pub anchor: String,
    pub seed: u64,
    pub points: usize,
    /// Max absolute residual per sample point (empty for structural checks).
    pub per_point: Vec<f64>,
    /// Max residual over all components and points.
    pub residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Evaluates symbolic residual components at sample points and assembles
/// reports. The residual norm is the maximum absolute component value.
pub struct ResidualContext {
    pub points: Vec<Point>,
    pub seed: u64,
    pub tol: f64,
}

impl ResidualContext {
    pub fn new(points: Vec<Point>, seed: u64, tol: f64) -> Self {
        ResidualContext { points, seed, tol }
    }

    /// Max |component| over the sample points; evaluation failures surface as
    /// +inf so a singular check can never silently pass.
    pub fn max_residual(&self, components: &[Expr]) -> (Vec<f64>, f64) {
        let simplified: Vec<Expr> = components.iter().map(|c| c.simplify()).collect();
        let mut per_point = Vec::with_capacity(self.points.len());
        let mut overall: f64 = 0.0;
        for p in &self.points {
            let mut here: f64 = 0.0;
            for comp in &simplified {
                let v = match comp.eval(p) {
                    Ok(v) => v.abs(),
                    Err(_) => f64::INFINITY,
                };
                here = here.max(v);
            }
            per_point.push(here);
            overall = overall.max(here);
        }
        (per_point, overall)
    }

    pub fn check(&self, name: &str, anchor: &str, components: &[Expr]) -> CheckReport {
        self.check_with_tol(name, anchor, components, self.tol)
    }

    pub fn check_with_tol(
        &self,
        name: &str,
        anchor: &str,
        components: &[Expr],
        tol: f64,
    ) -> CheckReport {
        let (per_point, residual) = self.max_residual(components);
        CheckReport {
            name: name.into(),
            anchor: anchor.into(),
            seed: self.seed,
            points: self.points.len(),
            per_point,
            residual,
            tol,
            verdict: if residual < tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        }
    }

    /// A report whose verdict was decided structurally (no sampling).
    pub fn structural(
        &self,
        name: &str,
        anchor: &str,
        verdict: Verdict,
        residual: f64,
    ) -> CheckReport {
        CheckReport {
            name: name.into(),
            anchor: anchor.into(),
            seed: self.seed,
            points: self.points.len(),
            per_point: Vec::new(),
            residual,
            tol: self.tol,
            verdict,
        }
    }
}
