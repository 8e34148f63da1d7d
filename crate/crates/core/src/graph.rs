//! Directed networks with a designated source and target, and the basic
//! path and flow algorithms on them.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Rational64;
use num_traits::Zero;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("source and target must differ (both {0})")]
    SourceIsTarget(usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("parallel arc {0} -> {1}")]
    ParallelArc(usize, usize),
    #[error("network needs at least two nodes")]
    TooFewNodes,
    #[error("arc sequence is not a contiguous s-t walk: {0}")]
    NotAWalk(String),
    #[error("negative cost {cost} on arc {arc}")]
    NegativeCost { arc: usize, cost: Rational64 },
    #[error("expected {expected} costs, got {got}")]
    CostLength { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A directed network on nodes `1..=n` with stable arc indices `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedNetwork {
    n: usize,
    arcs: Vec<(usize, usize)>,
    s: usize,
    t: usize,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl DirectedNetwork {
    pub fn new(n: usize, arcs: Vec<(usize, usize)>, s: usize, t: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes);
        }
        for v in [s, t] {
            if v == 0 || v > n {
                return Err(GraphError::NodeOutOfRange { node: v, n });
            }
        }
        if s == t {
            return Err(GraphError::SourceIsTarget(s));
        }
        let mut out = vec![Vec::new(); n + 1];
        let mut inc = vec![Vec::new(); n + 1];
        let mut seen = std::collections::HashSet::with_capacity(arcs.len());
        for (a, &(u, v)) in arcs.iter().enumerate() {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(GraphError::NodeOutOfRange { node: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::ParallelArc(u, v));
            }
            out[u].push(a);
            inc[v].push(a);
        }
        Ok(DirectedNetwork { n, arcs, s, t, out, inc })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.arcs.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn arc(&self, a: usize) -> (usize, usize) {
        self.arcs[a]
    }

    pub fn tail(&self, a: usize) -> usize {
        self.arcs[a].0
    }

    pub fn head(&self, a: usize) -> usize {
        self.arcs[a].1
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// Outgoing arc indices of `v`, ascending.
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Incoming arc indices of `v`, ascending.
    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn find_arc(&self, u: usize, v: usize) -> Option<usize> {
        self.out.get(u)?.iter().copied().find(|&a| self.arcs[a].1 == v)
    }

    /// Parse the `p n m s t` / `a tail head` text format.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut header: Option<(usize, usize, usize, usize)> = None;
        let mut arcs = Vec::new();
        let perr = |line: usize, msg: &str| GraphError::Parse { line, msg: msg.to_string() };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let mut it = raw.split_whitespace();
            let Some(tag) = it.next() else { continue };
            let nums: Vec<usize> = it
                .map(|f| f.parse::<usize>().map_err(|_| perr(line, &format!("bad integer `{f}`"))))
                .collect::<Result<_, _>>()?;
            match tag {
                "c" => {}
                "p" => {
                    if header.is_some() {
                        return Err(perr(line, "duplicate `p` line"));
                    }
                    match nums[..] {
                        [n, m, s, t] => header = Some((n, m, s, t)),
                        _ => return Err(perr(line, "expected `p <n> <m> <s> <t>`")),
                    }
                }
                "a" => {
                    if header.is_none() {
                        return Err(perr(line, "arc before `p` line"));
                    }
                    match nums[..] {
                        [u, v] => arcs.push((u, v, line)),
                        _ => return Err(perr(line, "expected `a <tail> <head>`")),
                    }
                }
                other => return Err(perr(line, &format!("unknown line type `{other}`"))),
            }
        }
        let (n, m, s, t) = header.ok_or_else(|| perr(1, "missing `p` line"))?;
        if arcs.len() != m {
            return Err(perr(text.lines().count(), &format!("header declares {m} arcs, found {}", arcs.len())));
        }
        // validate arc by arc so errors carry the line number
        let mut seen = std::collections::HashSet::new();
        for &(u, v, line) in &arcs {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(perr(line, &format!("node out of range 1..={n}")));
            }
            if u == v {
                return Err(perr(line, "self-loop"));
            }
            if !seen.insert((u, v)) {
                return Err(perr(line, "duplicate arc"));
            }
        }
        DirectedNetwork::new(n, arcs.into_iter().map(|(u, v, _)| (u, v)).collect(), s, t)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p {} {} {} {}\n", self.n, self.m(), self.s, self.t);
        for &(u, v) in &self.arcs {
            let _ = writeln!(out, "a {u} {v}");
        }
        out
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// An s-t walk given by its arc indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathSeq {
    arcs: Vec<usize>,
    simple: bool,
}

impl PathSeq {
    /// Validates contiguity and endpoints.
    pub fn new(net: &DirectedNetwork, arcs: Vec<usize>) -> Result<Self, GraphError> {
        let Some(&first) = arcs.first() else {
            return Err(GraphError::NotAWalk("empty".into()));
        };
        if let Some(&bad) = arcs.iter().find(|&&a| a >= net.m()) {
            return Err(GraphError::NotAWalk(format!("arc {bad} does not exist")));
        }
        if net.tail(first) != net.s() {
            return Err(GraphError::NotAWalk(format!("starts at node {}", net.tail(first))));
        }
        for w in arcs.windows(2) {
            if net.head(w[0]) != net.tail(w[1]) {
                return Err(GraphError::NotAWalk(format!("arcs {} and {} do not meet", w[0], w[1])));
            }
        }
        let last = *arcs.last().unwrap();
        if net.head(last) != net.t() {
            return Err(GraphError::NotAWalk(format!("ends at node {}", net.head(last))));
        }
        let mut visited = vec![false; net.n() + 1];
        visited[net.s()] = true;
        let mut simple = true;
        for &a in &arcs {
            let h = net.head(a);
            if visited[h] {
                simple = false;
            }
            visited[h] = true;
        }
        Ok(PathSeq { arcs, simple })
    }

    pub fn from_nodes(net: &DirectedNetwork, nodes: &[usize]) -> Result<Self, GraphError> {
        let arcs = nodes
            .windows(2)
            .map(|w| {
                net.find_arc(w[0], w[1]).ok_or_else(|| GraphError::NotAWalk(format!("no arc {} -> {}", w[0], w[1])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PathSeq::new(net, arcs)
    }

    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    /// Arc count L(p).
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn nodes(&self, net: &DirectedNetwork) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.arcs.len() + 1);
        v.push(net.s());
        v.extend(self.arcs.iter().map(|&a| net.head(a)));
        v
    }

    /// Sorted, deduplicated arc indices.
    pub fn arc_set(&self) -> Vec<usize> {
        let mut s = self.arcs.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}

fn trace_back(net: &DirectedNetwork, parent: &[Option<usize>], v: usize) -> Vec<usize> {
    let mut arcs = Vec::new();
    let mut cur = v;
    while let Some(a) = parent[cur] {
        arcs.push(a);
        cur = net.tail(a);
    }
    arcs.reverse();
    arcs
}

/// Fewest-arcs s-t path over arcs with `allowed[a]`. Each node's parent is the
/// lowest-index allowed arc from the previous BFS layer.
pub fn bfs_shortest_path(net: &DirectedNetwork, allowed: &[bool]) -> Option<PathSeq> {
    let mut dist = vec![usize::MAX; net.n() + 1];
    dist[net.s()] = 0;
    let mut queue = VecDeque::from([net.s()]);
    while let Some(u) = queue.pop_front() {
        if u == net.t() {
            break;
        }
        for &a in net.out_arcs(u) {
            let v = net.head(a);
            if allowed[a] && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if dist[net.t()] == usize::MAX {
        return None;
    }
    let mut arcs = Vec::with_capacity(dist[net.t()]);
    let mut v = net.t();
    while v != net.s() {
        let a = net
            .in_arcs(v)
            .iter()
            .copied()
            .find(|&a| allowed[a] && dist[net.tail(a)] != usize::MAX && dist[net.tail(a)] + 1 == dist[v])
            .expect("bfs layer has a parent");
        arcs.push(a);
        v = net.tail(a);
    }
    arcs.reverse();
    Some(PathSeq::new(net, arcs).expect("bfs path is a valid walk"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HeapKey {
    cost: Rational64,
    hops: usize,
    node: usize,
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other.cost.cmp(&self.cost).then(other.hops.cmp(&self.hops)).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost s-t path with exact rational costs. Ties go to fewer arcs,
/// then to the lexicographically smallest arc-index sequence.
pub fn dijkstra(net: &DirectedNetwork, costs: &[Rational64]) -> Result<Option<PathSeq>, GraphError> {
    if costs.len() != net.m() {
        return Err(GraphError::CostLength { expected: net.m(), got: costs.len() });
    }
    if let Some((arc, &cost)) = costs.iter().enumerate().find(|(_, c)| **c < Rational64::zero()) {
        return Err(GraphError::NegativeCost { arc, cost });
    }
    let n = net.n();
    let mut best: Vec<Option<(Rational64, usize)>> = vec![None; n + 1];
    let mut parent: Vec<Option<usize>> = vec![None; n + 1];
    let mut done = vec![false; n + 1];
    let mut heap = BinaryHeap::new();
    best[net.s()] = Some((Rational64::zero(), 0));
    heap.push(HeapKey { cost: Rational64::zero(), hops: 0, node: net.s() });
    while let Some(HeapKey { cost, hops, node: u }) = heap.pop() {
        if done[u] || best[u] != Some((cost, hops)) {
            continue;
        }
        done[u] = true;
        if u == net.t() {
            break;
        }
        for &a in net.out_arcs(u) {
            let v = net.head(a);
            if done[v] {
                continue;
            }
            let cand = (cost + costs[a], hops + 1);
            let better = match &best[v] {
                None => true,
                Some(cur) => match cand.0.cmp(&cur.0).then(cand.1.cmp(&cur.1)) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let mut via = trace_back(net, &parent, u);
                        via.push(a);
                        via < trace_back(net, &parent, v)
                    }
                },
            };
            if better {
                best[v] = Some(cand);
                parent[v] = Some(a);
                heap.push(HeapKey { cost: cand.0, hops: cand.1, node: v });
            }
        }
    }
    if best[net.t()].is_none() {
        return Ok(None);
    }
    let arcs = trace_back(net, &parent, net.t());
    Ok(Some(PathSeq::new(net, arcs).expect("dijkstra path is a valid walk")))
}

/// Maximum s-t flow with per-arc capacities, stopping once `limit` is reached.
pub fn max_flow(net: &DirectedNetwork, capacity: &[u64], limit: Option<u64>) -> u64 {
    let m = net.m();
    let mut flow = vec![0u64; m];
    let mut total = 0u64;
    let limit = limit.unwrap_or(u64::MAX);
    // residual edge: (arc, forward?)
    let mut pred: Vec<Option<(usize, bool)>> = vec![None; net.n() + 1];
    while total < limit {
        pred.iter_mut().for_each(|p| *p = None);
        let mut seen = vec![false; net.n() + 1];
        seen[net.s()] = true;
        let mut queue = VecDeque::from([net.s()]);
        while let Some(u) = queue.pop_front() {
            if u == net.t() {
                break;
            }
            for &a in net.out_arcs(u) {
                let v = net.head(a);
                if !seen[v] && flow[a] < capacity[a] {
                    seen[v] = true;
                    pred[v] = Some((a, true));
                    queue.push_back(v);
                }
            }
            for &a in net.in_arcs(u) {
                let v = net.tail(a);
                if !seen[v] && flow[a] > 0 {
                    seen[v] = true;
                    pred[v] = Some((a, false));
                    queue.push_back(v);
                }
            }
        }
        if !seen[net.t()] {
            break;
        }
        let mut bottleneck = limit - total;
        let mut v = net.t();
        while let Some((a, fwd)) = pred[v] {
            bottleneck = bottleneck.min(if fwd { capacity[a] - flow[a] } else { flow[a] });
            v = if fwd { net.tail(a) } else { net.head(a) };
        }
        let mut v = net.t();
        while let Some((a, fwd)) = pred[v] {
            if fwd {
                flow[a] += bottleneck;
                v = net.tail(a);
            } else {
                flow[a] -= bottleneck;
                v = net.head(a);
            }
        }
        total += bottleneck;
    }
    total
}

/// Maximum number of pairwise arc-disjoint s-t paths.
pub fn max_unit_flow(net: &DirectedNetwork) -> usize {
    max_flow(net, &vec![1; net.m()], None) as usize
}

pub fn has_k_disjoint(net: &DirectedNetwork, k: usize) -> bool {
    max_flow(net, &vec![1; net.m()], Some(k as u64)) >= k as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_grid;

    fn two_node() -> DirectedNetwork {
        DirectedNetwork::new(2, vec![(1, 2)], 1, 2).unwrap()
    }

    #[test]
    fn rejects_bad_structure() {
        assert!(matches!(DirectedNetwork::new(3, vec![(1, 1)], 1, 3), Err(GraphError::SelfLoop(1))));
        assert!(matches!(DirectedNetwork::new(3, vec![(1, 2), (1, 2)], 1, 3), Err(GraphError::ParallelArc(1, 2))));
        assert!(matches!(DirectedNetwork::new(3, vec![], 2, 2), Err(GraphError::SourceIsTarget(2))));
        assert!(matches!(DirectedNetwork::new(3, vec![(1, 4)], 1, 3), Err(GraphError::NodeOutOfRange { .. })));
        // antiparallel arcs are fine
        assert!(DirectedNetwork::new(3, vec![(1, 2), (2, 1)], 1, 3).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let g = gen_grid(3, 4);
        let back = DirectedNetwork::parse(&g.to_text()).unwrap();
        assert_eq!(back, g);
        assert!(g.to_text().starts_with("p 12 17 1 12\n"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = DirectedNetwork::parse("p 3 2 1 3\na 1 2\na 1 2\n").unwrap_err();
        assert!(matches!(e, GraphError::Parse { line: 3, .. }), "{e}");
        let e = DirectedNetwork::parse("p 3 1 1 3\na 2 2\n").unwrap_err();
        assert!(matches!(e, GraphError::Parse { line: 2, .. }), "{e}");
        assert!(DirectedNetwork::parse("p 3 2 1 3\na 1 2\n").is_err());
        assert!(DirectedNetwork::parse("a 1 2\n").is_err());
    }

    #[test]
    fn path_validation() {
        let g = gen_grid(2, 2);
        // arcs: 0: 1->2, 1: 3->4, 2: 1->3, 3: 2->4
        let p = PathSeq::new(&g, vec![0, 3]).unwrap();
        assert!(p.is_simple());
        assert_eq!(p.nodes(&g), vec![1, 2, 4]);
        assert!(PathSeq::new(&g, vec![3, 0]).is_err());
        assert!(PathSeq::new(&g, vec![0]).is_err());
        assert!(PathSeq::new(&g, vec![]).is_err());
        assert_eq!(PathSeq::from_nodes(&g, &[1, 3, 4]).unwrap().arcs(), &[2, 1]);
    }

    #[test]
    fn loopy_walk_is_not_simple() {
        let g = DirectedNetwork::new(4, vec![(1, 2), (2, 3), (3, 2), (2, 4)], 1, 4).unwrap();
        let p = PathSeq::new(&g, vec![0, 1, 2, 3]).unwrap();
        assert!(!p.is_simple());
    }

    #[test]
    fn bfs_examples() {
        let g = two_node();
        assert_eq!(bfs_shortest_path(&g, &[true]).unwrap().arcs(), &[0]);
        let g66 = gen_grid(6, 6);
        assert_eq!(bfs_shortest_path(&g66, &vec![true; g66.m()]).unwrap().len(), 10);
        let g33 = gen_grid(3, 3);
        let mut allowed = vec![true; g33.m()];
        for &a in g33.out_arcs(g33.s()) {
            allowed[a] = false;
        }
        assert!(bfs_shortest_path(&g33, &allowed).is_none());
    }

    #[test]
    fn bfs_prefers_lowest_parent_arc() {
        // two equal-length routes 1-2-4 and 1-3-4; arc 1->3 is listed before 1->2
        let g = DirectedNetwork::new(4, vec![(1, 3), (1, 2), (3, 4), (2, 4)], 1, 4).unwrap();
        let p = bfs_shortest_path(&g, &[true; 4]).unwrap();
        assert_eq!(p.nodes(&g), vec![1, 3, 4]);
    }

    #[test]
    fn dijkstra_examples() {
        let g = two_node();
        let p = dijkstra(&g, &[Rational64::from(7)]).unwrap().unwrap();
        assert_eq!(p.arcs(), &[0]);
        let g66 = gen_grid(6, 6);
        let ones = vec![Rational64::from(1); g66.m()];
        assert_eq!(dijkstra(&g66, &ones).unwrap().unwrap().len(), 10);
        let zeros = vec![Rational64::from(0); g66.m()];
        assert_eq!(dijkstra(&g66, &zeros).unwrap().unwrap().len(), 10);
        assert!(matches!(
            dijkstra(&g, &[Rational64::from(-1)]),
            Err(GraphError::NegativeCost { arc: 0, .. })
        ));
    }

    #[test]
    fn dijkstra_ties_prefer_fewer_arcs_then_lexicographic() {
        // 1->4 direct costs 2; 1->2->4 costs 1+1; 1->3->4 costs 1+1
        let g = DirectedNetwork::new(4, vec![(1, 3), (1, 2), (3, 4), (2, 4), (1, 4)], 1, 4).unwrap();
        let c = |v: &[i64]| v.iter().map(|&x| Rational64::from(x)).collect::<Vec<_>>();
        let p = dijkstra(&g, &c(&[1, 1, 1, 1, 2])).unwrap().unwrap();
        assert_eq!(p.arcs(), &[4]);
        let p = dijkstra(&g, &c(&[1, 1, 1, 1, 3])).unwrap().unwrap();
        assert_eq!(p.arcs(), &[0, 2]);
    }

    #[test]
    fn flow_examples() {
        assert_eq!(max_unit_flow(&two_node()), 1);
        let cut = DirectedNetwork::new(3, vec![(1, 2)], 1, 3).unwrap();
        assert_eq!(max_unit_flow(&cut), 0);
        for (p, q) in [(2, 2), (3, 3), (6, 6), (3, 12), (4, 7)] {
            assert_eq!(max_unit_flow(&gen_grid(p, q)), 2);
        }
        let g66 = gen_grid(6, 6);
        assert!(has_k_disjoint(&g66, 2));
        assert!(!has_k_disjoint(&g66, 3));
        assert!(has_k_disjoint(&two_node(), 1));
    }
}
