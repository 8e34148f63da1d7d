//! Mixed-integer linear programming toolkit.
//!
//! [`MilpModel`] describes a model independently of any solver. It can be
//! solved as a linear relaxation with [`solve_lp`], exactly with the
//! depth-first branch-and-bound in [`solve_bb`], or written to (and read back
//! from) CPLEX LP format for cross-checking with external solvers.

mod bb;
mod lpfile;
mod factor;
mod model;
mod simplex;

use std::fmt;
use std::time::{Duration, Instant};

pub use bb::{solve_bb, solve_bb_with, BbOptions, ChildOrder};
pub use lpfile::{export_lp, parse_lp};
pub use model::{Constraint, LinExpr, MilpModel, Objective, Relation, Sense, VarId, Variable};

use simplex::{LpOutcome, Simplex};

/// Feasibility tolerance used by the simplex code.
pub const FEASIBILITY_TOL: f64 = simplex::PRIMAL_TOL;

#[derive(Debug, thiserror::Error)]
pub enum MilpError {
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("expression references undeclared variable index {0}")]
    UnknownVariable(usize),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("integer variable `{0}` needs finite bounds for branch-and-bound")]
    UnboundedInteger(String),
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("LP file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// Time limit hit with an incumbent available.
    FeasibleTimeLimit,
    /// Time limit hit before any feasible point was found.
    TimeLimit,
    Infeasible,
    Unbounded,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::FeasibleTimeLimit => "feasible_time_limit",
            Status::TimeLimit => "time_limit",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::FeasibleTimeLimit)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of an LP or MILP solve. Values are in the model's own sense.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    pub objective: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub best_bound: Option<f64>,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub time_ms: f64,
}

impl SolveReport {
    fn empty(status: Status, started: Instant) -> Self {
        SolveReport {
            status,
            objective: None,
            values: None,
            best_bound: None,
            nodes: 0,
            lp_iterations: 0,
            time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }

    /// Relative gap between incumbent and bound, in percent (minimisation view).
    pub fn gap_pct(&self) -> Option<f64> {
        Some(gap(self.objective?, self.best_bound?))
    }
}

/// Integer programming gap `100 (f* - f_LR) / |f*|`.
///
/// When `f*` is zero the gap is 0 if the bound is also zero and 100 otherwise.
pub fn gap(opt_or_incumbent: f64, lp_value: f64) -> f64 {
    if opt_or_incumbent.abs() < 1e-9 {
        if lp_value.abs() < 1e-9 {
            0.0
        } else {
            100.0
        }
    } else {
        100.0 * (opt_or_incumbent - lp_value) / opt_or_incumbent.abs()
    }
}

/// Values within 1e-9 of an integer are reported as that integer.
fn snap(v: f64) -> f64 {
    if (v - v.round()).abs() <= 1e-9 {
        v.round()
    } else {
        v
    }
}

fn iteration_budget(model: &MilpModel) -> u64 {
    50 * (model.num_vars() + model.num_constraints()) as u64 + 10_000
}

fn check_model(model: &MilpModel) -> Result<(), MilpError> {
    for v in model.variables() {
        if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
            return Err(MilpError::InvalidBounds { name: v.name.clone(), lower: v.lower, upper: v.upper });
        }
    }
    Ok(())
}

/// Which simplex variant [`solve_lp_with`] starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpAlgorithm {
    /// Dual simplex when the slack basis is dual feasible, primal otherwise.
    #[default]
    Auto,
    Primal,
}

/// Solve the linear relaxation of `model` (integrality flags are ignored).
pub fn solve_lp(model: &MilpModel) -> Result<SolveReport, MilpError> {
    solve_lp_with(model, LpAlgorithm::Auto, None)
}

pub fn solve_lp_with(
    model: &MilpModel,
    algorithm: LpAlgorithm,
    time_limit: Option<Duration>,
) -> Result<SolveReport, MilpError> {
    check_model(model)?;
    let started = Instant::now();
    let deadline = time_limit.map(|d| started + d);
    let mut lp = Simplex::from_model(model);
    let budget = iteration_budget(model);
    let outcome = match algorithm {
        LpAlgorithm::Auto => lp.solve(deadline, budget),
        LpAlgorithm::Primal => lp.solve_primal_only(deadline, budget),
    };
    let flip = sense_flip(model);
    let mut report = match outcome {
        LpOutcome::Optimal => {
            let obj = snap(flip * lp.objective());
            SolveReport {
                status: Status::Optimal,
                objective: Some(obj),
                values: Some(lp.values().to_vec()),
                best_bound: Some(obj),
                nodes: 1,
                lp_iterations: 0,
                time_ms: 0.0,
            }
        }
        LpOutcome::Infeasible => SolveReport::empty(Status::Infeasible, started),
        LpOutcome::Unbounded => SolveReport::empty(Status::Unbounded, started),
        LpOutcome::TimeLimit => SolveReport::empty(Status::TimeLimit, started),
        LpOutcome::IterationLimit => return Err(MilpError::IterationLimit),
    };
    report.lp_iterations = lp.iterations;
    report.time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn sense_flip(model: &MilpModel) -> f64 {
    match model.objective().sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_lower_bound() {
        // min x s.t. x >= 3, x in [0, 10]
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint("c", [(x, 1.0)], Relation::Ge, 3.0).unwrap();
        m.set_objective(Sense::Minimize, [(x, 1.0)]).unwrap();
        for alg in [LpAlgorithm::Auto, LpAlgorithm::Primal] {
            let r = solve_lp_with(&m, alg, None).unwrap();
            assert_eq!(r.status, Status::Optimal);
            assert!((r.objective.unwrap() - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.add_constraint("c", [(x, 1.0)], Relation::Ge, 2.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, Status::Infeasible);

        let mut m = MilpModel::new(Sense::Maximize);
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
        m.add_constraint("c", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0).unwrap();
        m.set_objective(Sense::Maximize, [(x, 1.0)]).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn gap_convention() {
        assert_eq!(gap(2.0, 0.0), 100.0);
        assert_eq!(gap(2.0, 2.0), 0.0);
        assert_eq!(gap(0.0, 0.0), 0.0);
        assert_eq!(gap(0.0, -1.0), 100.0);
    }
}
