//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use kdp_core::formulations::{build, decode, FormulationKind};
use kdp_core::graph::{DirectedNetwork, PathSeq};
use kdp_core::instance::{gen_grid, gen_random, SplitMix64};
use kdp_core::loops::remove_loops;
use kdp_milp::{solve_bb, SolveReport, Status};

/// `s -> u_c -> i -> j -> w_c -> t` for `c` in `0..width`, plus the routes
/// of each extra bundle sharing `s` and `t`. Every bundle is a copy of the
/// same shape with its own bridge arc. Returns the network and, per
/// bundle, the node lists of its `width` routes.
pub fn bridge_net(widths: &[usize]) -> (DirectedNetwork, Vec<Vec<Vec<usize>>>) {
    let mut arcs = Vec::new();
    let mut next = 2;
    let mut routes = Vec::new();
    let total: usize = widths.iter().map(|w| 2 * w + 2).sum::<usize>() + 2;
    let t = total;
    for &w in widths {
        let ups: Vec<usize> = (0..w).map(|c| next + c).collect();
        let i = next + w;
        let j = i + 1;
        let downs: Vec<usize> = (0..w).map(|c| j + 1 + c).collect();
        next = j + 1 + w;
        for c in 0..w {
            arcs.push((1, ups[c]));
            arcs.push((ups[c], i));
            arcs.push((j, downs[c]));
            arcs.push((downs[c], t));
        }
        arcs.push((i, j));
        routes.push((0..w).map(|c| vec![1, ups[c], i, j, downs[c], t]).collect());
    }
    (DirectedNetwork::new(t, arcs, 1, t).unwrap(), routes)
}

/// Four routes through one bridge arc.
pub fn fig1a() -> (DirectedNetwork, Vec<PathSeq>) {
    let (g, routes) = bridge_net(&[4]);
    let paths = routes[0].iter().map(|r| PathSeq::from_nodes(&g, r).unwrap()).collect();
    (g, paths)
}

/// Two bridges, each taken by two of the four routes.
pub fn fig1b() -> (DirectedNetwork, Vec<PathSeq>) {
    let (g, routes) = bridge_net(&[2, 2]);
    let paths = routes.iter().flatten().map(|r| PathSeq::from_nodes(&g, r).unwrap()).collect();
    (g, paths)
}

/// Three routes through one bridge arc.
pub fn fig4a() -> (DirectedNetwork, Vec<PathSeq>) {
    let (g, routes) = bridge_net(&[3]);
    let paths = routes[0].iter().map(|r| PathSeq::from_nodes(&g, r).unwrap()).collect();
    (g, paths)
}

/// Two routes through a bridge and a third, arc-disjoint route of the same length.
pub fn fig4b() -> (DirectedNetwork, Vec<PathSeq>) {
    let (g, routes) = bridge_net(&[2, 1]);
    let paths = routes.iter().flatten().map(|r| PathSeq::from_nodes(&g, r).unwrap()).collect();
    (g, paths)
}

/// The oracle-sized instance suite: small grids plus five random networks on 12 nodes.
pub fn oracle_suite() -> Vec<(String, DirectedNetwork)> {
    let mut out: Vec<(String, DirectedNetwork)> =
        [(2, 2), (3, 3), (3, 4), (6, 6), (3, 12)].iter().map(|&(p, q)| (format!("G_{p}_{q}"), gen_grid(p, q))).collect();
    for seed in 1..=5 {
        out.push((format!("R_12_30_{seed}"), gen_random(12, 30, seed).unwrap()));
    }
    out
}

pub struct Solved {
    pub report: SolveReport,
    pub objective: f64,
    pub paths: Vec<PathSeq>,
    pub raw: Vec<Vec<usize>>,
}

/// Solve to optimality, decode and remove loops. Panics unless optimal.
pub fn solve_exact(net: &DirectedNetwork, k: usize, kind: &FormulationKind) -> Solved {
    let pm = build(net, k, kind).unwrap();
    let report = solve_bb(&pm.model, None).unwrap();
    assert_eq!(report.status, Status::Optimal, "{} K={k}", kind.label());
    let values = report.values.clone().unwrap();
    let raw = decode(&values, &pm, net).unwrap();
    let paths = remove_loops(&raw.arc_sets, net).unwrap();
    Solved { objective: report.objective.unwrap(), report, paths, raw: raw.arc_sets }
}

/// A uniformly chosen index in `0..n`.
pub fn pick(rng: &mut SplitMix64, n: usize) -> usize {
    rng.below(n as u64) as usize
}

/// Arcs of a shortest `from -> to` path using only arcs where `allowed` holds.
pub fn bfs_between(net: &DirectedNetwork, from: usize, to: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    let mut pred = vec![usize::MAX; net.n() + 1];
    let mut seen = vec![false; net.n() + 1];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut arcs = Vec::new();
            let mut v = to;
            while v != from {
                let a = pred[v];
                arcs.push(a);
                v = net.tail(a);
            }
            arcs.reverse();
            return Some(arcs);
        }
        for &a in net.out_arcs(u) {
            let h = net.head(a);
            if allowed[a] && !seen[h] {
                seen[h] = true;
                pred[h] = a;
                queue.push_back(h);
            }
        }
    }
    None
}

/// Add up to `count` random cycles arc-disjoint from `arcs`, keeping it flow balanced.
/// Returns how many were planted.
pub fn plant_cycles(net: &DirectedNetwork, arcs: &mut Vec<usize>, count: usize, rng: &mut SplitMix64) -> usize {
    let mut planted = 0;
    for _ in 0..count * 4 {
        if planted == count {
            break;
        }
        let mut allowed = vec![true; net.m()];
        for &a in arcs.iter() {
            allowed[a] = false;
        }
        let a = pick(rng, net.m());
        if !allowed[a] {
            continue;
        }
        allowed[a] = false;
        let (u, v) = net.arc(a);
        if let Some(back) = bfs_between(net, v, u, &allowed) {
            arcs.push(a);
            arcs.extend(back);
            planted += 1;
        }
    }
    arcs.sort_unstable();
    planted
}
