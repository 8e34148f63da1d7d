//! Turning a flow-balanced, possibly cyclic K-path solution into K simple paths.

use crate::graph::{bfs_shortest_path, DirectedNetwork, PathSeq};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LoopError {
    #[error("support graph disconnected after extracting {found} of {wanted} paths")]
    Disconnected { found: usize, wanted: usize },
    #[error("arc {0} does not exist")]
    BadArc(usize),
}

/// Repeatedly take a fewest-arcs s-t path in the support of the solution,
/// with arc capacities equal to their usage, and consume it. Output paths
/// are in extraction order and use each arc no more often than the input.
pub fn remove_loops(arc_sets: &[Vec<usize>], net: &DirectedNetwork) -> Result<Vec<PathSeq>, LoopError> {
    let mut capacity = vec![0usize; net.m()];
    for set in arc_sets {
        for &a in set {
            *capacity.get_mut(a).ok_or(LoopError::BadArc(a))? += 1;
        }
    }
    let mut allowed: Vec<bool> = capacity.iter().map(|&c| c > 0).collect();
    let wanted = arc_sets.len();
    let mut out = Vec::with_capacity(wanted);
    for found in 0..wanted {
        let path = bfs_shortest_path(net, &allowed).ok_or(LoopError::Disconnected { found, wanted })?;
        for &a in path.arcs() {
            capacity[a] -= 1;
            if capacity[a] == 0 {
                allowed[a] = false;
            }
        }
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ArcUsage;

    /// Two walks from 1 to 6 that wind through the cycle 3 -> 4 -> 5 -> 3.
    fn looped() -> (DirectedNetwork, Vec<Vec<usize>>) {
        let arcs = vec![(1, 2), (2, 3), (3, 4), (4, 5), (5, 3), (3, 6), (1, 3), (2, 6)];
        let g = DirectedNetwork::new(6, arcs, 1, 6).unwrap();
        // walk 1: 1-2-3-4-5-3-6, walk 2: 1-3-6
        (g, vec![vec![0, 1, 2, 3, 4, 5], vec![6, 5]])
    }

    #[test]
    fn loops_are_removed() {
        let (g, raw) = looped();
        let before: usize = raw.iter().map(Vec::len).sum();
        let paths = remove_loops(&raw, &g).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths.iter().all(PathSeq::is_simple));
        let after: usize = paths.iter().map(PathSeq::len).sum();
        assert!(after < before);
        let (u_in, u_out) = (ArcUsage::from_arc_lists(raw.iter().map(Vec::as_slice)), ArcUsage::from_paths(&paths));
        for (&a, &c) in u_out.counts() {
            assert!(c <= u_in.count(a));
        }
    }

    #[test]
    fn loopless_input_is_fully_consumed() {
        let (g, _) = looped();
        let raw = vec![vec![0, 7], vec![6, 5], vec![0, 7]];
        let paths = remove_loops(&raw, &g).unwrap();
        let u_in = ArcUsage::from_arc_lists(raw.iter().map(Vec::as_slice));
        assert_eq!(ArcUsage::from_paths(&paths), u_in);
    }

    #[test]
    fn unbalanced_input_is_reported() {
        let (g, _) = looped();
        assert_eq!(remove_loops(&[vec![0]], &g), Err(LoopError::Disconnected { found: 0, wanted: 1 }));
        assert_eq!(remove_loops(&[vec![99]], &g), Err(LoopError::BadArc(99)));
    }
}
