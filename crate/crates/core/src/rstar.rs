//! The smallest achievable maximum per-arc usage over K routable paths.

use kdp_milp::{solve_lp, MilpError, Status};

use crate::formulations::{build_minmax, FormulationError};
use crate::graph::{max_flow, max_unit_flow, DirectedNetwork};

#[derive(Debug, thiserror::Error)]
pub enum RstarError {
    #[error("target unreachable from source")]
    Unreachable,
    #[error("K must be positive")]
    ZeroK,
    #[error("min-max relaxation ended with status {0}")]
    Lp(Status),
    #[error("flow at capacity {r} carries {flow} < {k} units")]
    FlowCheck { r: usize, flow: u64, k: usize },
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// `ceil(K / F)` with F the number of arc-disjoint paths, confirmed by a
/// max-flow with every capacity set to the result.
pub fn rstar_flow(net: &DirectedNetwork, k: usize) -> Result<usize, RstarError> {
    if k == 0 {
        return Err(RstarError::ZeroK);
    }
    let f = max_unit_flow(net);
    if f == 0 {
        return Err(RstarError::Unreachable);
    }
    let r = k.div_ceil(f);
    let flow = max_flow(net, &vec![r as u64; net.m()], Some(k as u64));
    if flow < k as u64 {
        return Err(RstarError::FlowCheck { r, flow, k });
    }
    Ok(r)
}

/// Ceiling of the min-max LP relaxation value (minus 1e-6).
pub fn rstar_lp(net: &DirectedNetwork, k: usize) -> Result<usize, RstarError> {
    if k == 0 {
        return Err(RstarError::ZeroK);
    }
    let pm = build_minmax(net, k)?;
    let rep = solve_lp(&pm.model)?;
    match rep.status {
        Status::Optimal => Ok((rep.objective.unwrap() - 1e-6).ceil().max(0.0) as usize),
        Status::Infeasible => Err(RstarError::Unreachable),
        other => Err(RstarError::Lp(other)),
    }
}
