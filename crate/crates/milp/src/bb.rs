//! Depth-first branch-and-bound on top of the dual simplex.
//!
//! Nodes only store the bound changes relative to the root; the simplex
//! basis is shared across the whole search and re-optimised with the dual
//! simplex after each bound change.

use std::time::{Duration, Instant};

use crate::model::{MilpModel, Relation};
use crate::simplex::{LpOutcome, Simplex};
use crate::{check_model, iteration_budget, sense_flip, MilpError, SolveReport, Status};

/// Which child of a branching is explored first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChildOrder {
    /// `x >= ceil(v)` first.
    #[default]
    UpFirst,
    DownFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// A value within this distance of an integer counts as integral.
    pub integrality_tol: f64,
    pub child_order: ChildOrder,
}

impl Default for BbOptions {
    fn default() -> Self {
        BbOptions { time_limit: None, node_limit: None, integrality_tol: 1e-6, child_order: ChildOrder::UpFirst }
    }
}

#[derive(Debug, Clone)]
struct Node {
    /// (variable, lower, upper) overrides relative to the root bounds.
    bounds: Vec<(usize, f64, f64)>,
    /// LP value of the parent, a valid lower bound for this subtree.
    parent_bound: f64,
}

/// Exact solve with an optional wall-clock limit.
pub fn solve_bb(model: &MilpModel, time_limit: Option<Duration>) -> Result<SolveReport, MilpError> {
    solve_bb_with(model, &BbOptions { time_limit, ..BbOptions::default() })
}

pub fn solve_bb_with(model: &MilpModel, opts: &BbOptions) -> Result<SolveReport, MilpError> {
    check_model(model)?;
    for v in model.variables() {
        if v.integer && !(v.lower.is_finite() && v.upper.is_finite()) {
            return Err(MilpError::UnboundedInteger(v.name.clone()));
        }
    }
    let started = Instant::now();
    let deadline = opts.time_limit.map(|d| started + d);
    let flip = sense_flip(model);
    let integral_objective = objective_is_integral(model);
    let int_vars: Vec<usize> = (0..model.num_vars()).filter(|&j| model.variables()[j].integer).collect();
    let root_bounds: Vec<(f64, f64)> = model.variables().iter().map(|v| (v.lower, v.upper)).collect();

    let mut lp = Simplex::from_model(model);
    let budget = iteration_budget(model);
    let mut current = root_bounds.clone();

    let mut stack = vec![Node { bounds: Vec::new(), parent_bound: f64::NEG_INFINITY }];
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0u64;
    let mut stopped = false;
    let mut unbounded = false;

    let can_prune = |bound: f64, inc: &Option<(f64, Vec<f64>)>| -> bool {
        match inc {
            None => false,
            Some((z, _)) => {
                if integral_objective {
                    bound > z - 1.0 + 1e-6
                } else {
                    bound >= z - 1e-9 * z.abs().max(1.0)
                }
            }
        }
    };

    while let Some(node) = stack.pop() {
        if can_prune(node.parent_bound, &incumbent) {
            continue;
        }
        let out_of_time = deadline.is_some_and(|dl| Instant::now() >= dl);
        let out_of_nodes = opts.node_limit.is_some_and(|lim| nodes >= lim);
        if out_of_time || out_of_nodes {
            stack.push(node);
            stopped = true;
            break;
        }
        // install this node's bounds
        let mut target = root_bounds.clone();
        for &(j, lo, hi) in &node.bounds {
            target[j] = (lo, hi);
        }
        for &j in &int_vars {
            if current[j] != target[j] {
                lp.set_bounds(j, target[j].0, target[j].1);
                current[j] = target[j];
            }
        }
        nodes += 1;
        match lp.solve(deadline, budget) {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                unbounded = true;
                break;
            }
            LpOutcome::TimeLimit => {
                stack.push(node);
                stopped = true;
                break;
            }
            LpOutcome::IterationLimit => return Err(MilpError::IterationLimit),
        }
        let value = lp.objective();
        if can_prune(value, &incumbent) {
            continue;
        }
        let x = lp.values();
        let mut branch: Option<(usize, f64)> = None;
        let mut best_score = opts.integrality_tol;
        for &j in &int_vars {
            let v = x[j];
            let frac = v - v.floor();
            let score = frac.min(1.0 - frac);
            if score > best_score {
                best_score = score;
                branch = Some((j, v));
            }
        }
        match branch {
            None => {
                let mut values = x.to_vec();
                for &j in &int_vars {
                    values[j] = values[j].round();
                }
                let better = incumbent.as_ref().is_none_or(|(z, _)| value < *z - 1e-9);
                if better {
                    let value = if integral_objective && (value - value.round()).abs() < 1e-6 { value.round() } else { value };
                    incumbent = Some((value, values));
                }
            }
            Some((j, v)) => {
                let (lo, hi) = current[j];
                let mut down = node.bounds.clone();
                set_override(&mut down, j, lo, v.floor());
                let mut up = node.bounds;
                set_override(&mut up, j, v.ceil(), hi);
                let down = Node { bounds: down, parent_bound: value };
                let up = Node { bounds: up, parent_bound: value };
                match opts.child_order {
                    ChildOrder::UpFirst => {
                        stack.push(down);
                        stack.push(up);
                    }
                    ChildOrder::DownFirst => {
                        stack.push(up);
                        stack.push(down);
                    }
                }
            }
        }
    }

    let time_ms = started.elapsed().as_secs_f64() * 1e3;
    let lp_iterations = lp.iterations;
    if unbounded {
        return Ok(SolveReport {
            status: Status::Unbounded,
            objective: None,
            values: None,
            best_bound: None,
            nodes,
            lp_iterations,
            time_ms,
        });
    }
    let open_bound = stack.iter().map(|n| n.parent_bound).fold(f64::INFINITY, f64::min);
    let report = match (incumbent, stopped) {
        (Some((z, values)), false) => SolveReport {
            status: Status::Optimal,
            objective: Some(flip * z),
            values: Some(values),
            best_bound: Some(flip * z),
            nodes,
            lp_iterations,
            time_ms,
        },
        (Some((z, values)), true) => {
            let mut bound = open_bound.min(z);
            if integral_objective && bound.is_finite() {
                bound = (bound - 1e-6).ceil().min(z);
            }
            SolveReport {
                status: Status::FeasibleTimeLimit,
                objective: Some(flip * z),
                values: Some(values),
                best_bound: bound.is_finite().then_some(flip * bound),
                nodes,
                lp_iterations,
                time_ms,
            }
        }
        (None, false) => SolveReport {
            status: Status::Infeasible,
            objective: None,
            values: None,
            best_bound: None,
            nodes,
            lp_iterations,
            time_ms,
        },
        (None, true) => SolveReport {
            status: Status::TimeLimit,
            objective: None,
            values: None,
            best_bound: open_bound.is_finite().then_some(flip * open_bound),
            nodes,
            lp_iterations,
            time_ms,
        },
    };
    Ok(report)
}

fn set_override(bounds: &mut Vec<(usize, f64, f64)>, j: usize, lo: f64, hi: f64) {
    match bounds.iter_mut().find(|b| b.0 == j) {
        Some(b) => {
            b.1 = lo;
            b.2 = hi;
        }
        None => bounds.push((j, lo, hi)),
    }
}

fn is_int(v: f64) -> bool {
    v.is_finite() && v == v.round()
}

/// True when every optimal completion of an integer assignment has an
/// integral objective, so that bounds can be rounded up during pruning.
///
/// Objective terms must have integral coefficients and act on integer
/// variables or on continuous variables implied integral, either by an
/// equality with integral data or, when minimised, by lower-bounding rows
/// with integral data.
pub(crate) fn objective_is_integral(model: &MilpModel) -> bool {
    let vars = model.variables();
    let cons = model.constraints();
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
    for (i, c) in cons.iter().enumerate() {
        for &(v, _) in c.expr.terms() {
            rows_of[v.0].push(i);
        }
    }
    let flip = sense_flip(model);
    let others_integral = |row: usize, j: usize| -> bool {
        let c = &cons[row];
        is_int(c.rhs)
            && c.expr.terms().iter().all(|&(v, a)| v.0 == j || (vars[v.0].integer && is_int(a)))
    };
    model.objective().expr.terms().iter().all(|&(v, coef)| {
        let j = v.0;
        if !is_int(coef) {
            return false;
        }
        if vars[j].integer {
            return true;
        }
        let unit = |row: usize| {
            cons[row].expr.terms().iter().any(|&(w, a)| w.0 == j && a.abs() == 1.0)
        };
        let by_equality = rows_of[j]
            .iter()
            .any(|&r| cons[r].relation == Relation::Eq && unit(r) && others_integral(r, j));
        if by_equality {
            return true;
        }
        let lower_ok = vars[j].lower == f64::NEG_INFINITY || is_int(vars[j].lower);
        let minimised = flip * coef > 0.0;
        minimised
            && lower_ok
            && vars[j].upper == f64::INFINITY
            && rows_of[j].iter().all(|&r| {
                let a = cons[r].expr.terms().iter().find(|t| t.0 .0 == j).map(|t| t.1).unwrap_or(0.0);
                let lower_bounding = match cons[r].relation {
                    Relation::Ge => a > 0.0,
                    Relation::Le => a < 0.0,
                    Relation::Eq => false,
                };
                lower_bounding && a.abs() == 1.0 && others_integral(r, j)
            })
    })
}
