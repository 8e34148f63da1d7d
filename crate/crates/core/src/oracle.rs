//! Exhaustive ground truth for small instances: all simple s-t paths, and
//! the best K-multiset of them for each objective.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;

use crate::formulations::Tag;
use crate::graph::{DirectedNetwork, PathSeq};
use crate::metrics::sorted_intersection;
use crate::par::{self, Exec};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("more than {0} simple paths")]
    TooManyPaths(usize),
    #[error("{count} multisets exceed the limit of {limit}")]
    TooManyMultisets { count: u128, limit: u128 },
    #[error("no simple s-t path")]
    NoPath,
    #[error("K must be at least {0} for this objective")]
    KTooSmall(usize),
    #[error("no multiset satisfies the presence bound")]
    Infeasible,
}

pub const DEFAULT_PATH_CAP: usize = 5_000;
pub const DEFAULT_MULTISET_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleObjective {
    /// Σ_{i<j} OL(p_i, p_j).
    Overlaps,
    RepeatedArcs,
    RepeatedOccurrences,
    ArcRepetitions,
    /// Maximise mean pairwise D1.
    D1Sum,
}

impl OracleObjective {
    pub const NAMES: [(&'static str, OracleObjective); 5] = [
        ("ol", OracleObjective::Overlaps),
        ("repeated", OracleObjective::RepeatedArcs),
        ("ro", OracleObjective::RepeatedOccurrences),
        ("rep", OracleObjective::ArcRepetitions),
        ("d1", OracleObjective::D1Sum),
    ];

    /// The quantity a formulation minimises; MinMax has no oracle counterpart.
    pub fn for_tag(tag: Tag) -> Option<Self> {
        match tag {
            Tag::Mao => Some(OracleObjective::Overlaps),
            Tag::Mra => Some(OracleObjective::RepeatedArcs),
            Tag::Mro => Some(OracleObjective::RepeatedOccurrences),
            Tag::Mar => Some(OracleObjective::ArcRepetitions),
            Tag::MinMax => None,
        }
    }

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, o)| *o == self).map(|(n, _)| *n).unwrap_or("?")
    }
}

impl std::str::FromStr for OracleObjective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(s))
            .map(|(_, o)| *o)
            .ok_or_else(|| format!("unknown objective `{s}` (expected ol, repeated, ro, rep or d1)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub path_cap: usize,
    pub multiset_limit: u128,
    pub presence_bound: Option<usize>,
    pub exec: Exec,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            path_cap: DEFAULT_PATH_CAP,
            multiset_limit: DEFAULT_MULTISET_LIMIT,
            presence_bound: None,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Objective value: a count, or the mean D1 for [`OracleObjective::D1Sum`].
    pub value: BigRational,
    /// Minimum pairwise D1 of the chosen multiset (D1 objective only).
    pub midi: Option<BigRational>,
    /// Non-decreasing indices into the enumerated path list.
    pub indices: Vec<usize>,
    pub paths: Vec<PathSeq>,
}

/// All simple s-t paths in DFS order (out-arcs by ascending index).
pub fn enumerate_simple_paths(net: &DirectedNetwork, cap: usize) -> Result<Vec<PathSeq>, OracleError> {
    let mut out = Vec::new();
    let mut on_path = vec![false; net.n() + 1];
    let mut arcs = Vec::new();
    // explicit stack of (node, next out-arc position)
    let mut stack = vec![(net.s(), 0usize)];
    on_path[net.s()] = true;
    while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
        if v == net.t() {
            if out.len() == cap {
                return Err(OracleError::TooManyPaths(cap));
            }
            out.push(PathSeq::new(net, arcs.clone()).expect("dfs builds valid walks"));
            on_path[v] = false;
            stack.pop();
            arcs.pop();
            continue;
        }
        let outs = net.out_arcs(v);
        if *pos < outs.len() {
            let a = outs[*pos];
            *pos += 1;
            let h = net.head(a);
            if !on_path[h] {
                on_path[h] = true;
                arcs.push(a);
                stack.push((h, 0));
            }
        } else {
            on_path[v] = false;
            stack.pop();
            arcs.pop();
        }
    }
    Ok(out)
}

/// C(p + k - 1, k), saturating.
pub fn multiset_count(p: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c.saturating_mul(p as u128 + i) / (i + 1);
    }
    c
}

/// Minimised lexicographically; D1 values are negated scaled sums.
type Key = (i64, i64);

struct Ctx<'a> {
    sets: &'a [Vec<usize>],
    k: usize,
    objective: OracleObjective,
    bound: Option<usize>,
    /// Pairwise overlaps and per-path weights `scale / L`, D1 only.
    overlap: Vec<u16>,
    weight: Vec<i64>,
    scale: i64,
    with_midi: bool,
}

impl Ctx<'_> {
    fn pair_value(&self, i: usize, j: usize) -> i64 {
        let o = self.overlap[i * self.sets.len() + j] as i64;
        2 * self.scale - o * (self.weight[i] + self.weight[j])
    }
}

struct Search<'a> {
    ctx: &'a Ctx<'a>,
    counts: Vec<u32>,
    chosen: Vec<usize>,
    best: Option<(Key, Vec<usize>)>,
}

impl Search<'_> {
    fn pairs_left(&self, depth: usize) -> i64 {
        let k = self.ctx.k as i64;
        let d = depth as i64;
        k * (k - 1) / 2 - d * (d - 1) / 2
    }

    fn rec(&mut self, start: usize, primary: i64, min_pair: i64) {
        let ctx = self.ctx;
        let depth = self.chosen.len();
        if depth == ctx.k {
            let key = (primary, if ctx.with_midi { -min_pair } else { 0 });
            if self.best.as_ref().is_none_or(|(b, _)| key < *b) {
                self.best = Some((key, self.chosen.clone()));
            }
            return;
        }
        for j in start..ctx.sets.len() {
            let mut delta = 0i64;
            let mut over = false;
            for &a in &ctx.sets[j] {
                let c = self.counts[a];
                delta += match ctx.objective {
                    OracleObjective::Overlaps => c as i64,
                    OracleObjective::RepeatedArcs => (c == 1) as i64,
                    OracleObjective::RepeatedOccurrences => match c {
                        0 => 0,
                        1 => 2,
                        _ => 1,
                    },
                    OracleObjective::ArcRepetitions => (c >= 1) as i64,
                    OracleObjective::D1Sum => 0,
                };
                if let Some(b) = ctx.bound {
                    over |= c as usize + 1 > b;
                }
            }
            if over {
                continue;
            }
            let mut new_min = min_pair;
            if ctx.objective == OracleObjective::D1Sum {
                for &i in &self.chosen {
                    let v = ctx.pair_value(i, j);
                    delta -= v;
                    new_min = new_min.min(v);
                }
            }
            let next = primary + delta;
            if let Some(((bp, _), _)) = &self.best {
                let prune = match ctx.objective {
                    OracleObjective::D1Sum => next - self.pairs_left(depth + 1) * 2 * ctx.scale > *bp,
                    _ => next >= *bp,
                };
                if prune {
                    continue;
                }
            }
            for &a in &ctx.sets[j] {
                self.counts[a] += 1;
            }
            self.chosen.push(j);
            self.rec(j, next, new_min);
            self.chosen.pop();
            for &a in &ctx.sets[j] {
                self.counts[a] -= 1;
            }
        }
    }
}

/// Exhaustive optimum over K-multisets of the given simple paths. Ties go to
/// the lexicographically smallest index tuple.
pub fn brute_force_over(
    net: &DirectedNetwork,
    paths: &[PathSeq],
    k: usize,
    objective: OracleObjective,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    search(net, paths, k, objective, opts, false)
}

fn search(
    net: &DirectedNetwork,
    paths: &[PathSeq],
    k: usize,
    objective: OracleObjective,
    opts: &OracleOptions,
    with_midi: bool,
) -> Result<OracleResult, OracleError> {
    if objective == OracleObjective::D1Sum && k < 2 {
        return Err(OracleError::KTooSmall(2));
    }
    if paths.is_empty() {
        return Err(OracleError::NoPath);
    }
    let count = multiset_count(paths.len(), k);
    if count > opts.multiset_limit {
        return Err(OracleError::TooManyMultisets { count, limit: opts.multiset_limit });
    }
    let sets: Vec<Vec<usize>> = paths.iter().map(|p| p.arc_set()).collect();
    let mut ctx = Ctx {
        sets: &sets,
        k,
        objective,
        bound: opts.presence_bound,
        overlap: Vec::new(),
        weight: Vec::new(),
        scale: 1,
        with_midi,
    };
    if objective == OracleObjective::D1Sum {
        let p = sets.len();
        let lcm = sets.iter().fold(1i64, |acc, s| acc.lcm(&(s.len() as i64)));
        ctx.scale = lcm;
        ctx.weight = sets.iter().map(|s| lcm / s.len() as i64).collect();
        ctx.overlap = vec![0u16; p * p];
        for i in 0..p {
            for j in i..p {
                let o = sorted_intersection(&sets[i], &sets[j]) as u16;
                ctx.overlap[i * p + j] = o;
                ctx.overlap[j * p + i] = o;
            }
        }
    }
    if k == 0 {
        return Ok(OracleResult { value: BigRational::from_integer(0.into()), midi: None, indices: vec![], paths: vec![] });
    }
    let firsts: Vec<usize> = (0..sets.len()).collect();
    let ctx = &ctx;
    let m = net.m();
    let partial = par::map(opts.exec, &firsts, |&first| {
        let mut s = Search { ctx, counts: vec![0; m], chosen: Vec::with_capacity(k), best: None };
        // seed with the first path fixed
        if let Some(b) = ctx.bound {
            if b == 0 {
                return None;
            }
        }
        for &a in &ctx.sets[first] {
            s.counts[a] += 1;
        }
        s.chosen.push(first);
        s.rec(first, 0, i64::MAX);
        s.best
    });
    let (key, indices) = partial.into_iter().flatten().min().ok_or(OracleError::Infeasible)?;
    let value = match objective {
        OracleObjective::D1Sum => {
            let pairs = (k * (k - 1) / 2) as i64;
            BigRational::new(BigInt::from(-key.0), BigInt::from(2 * ctx.scale * pairs))
        }
        _ => BigRational::from_integer(key.0.into()),
    };
    let midi = (objective == OracleObjective::D1Sum).then(|| {
        let mut min = i64::MAX;
        for x in 0..indices.len() {
            for y in x + 1..indices.len() {
                min = min.min(ctx.pair_value(indices[x], indices[y]));
            }
        }
        BigRational::new(BigInt::from(min), BigInt::from(2 * ctx.scale))
    });
    let chosen = indices.iter().map(|&i| paths[i].clone()).collect();
    Ok(OracleResult { value, midi, indices, paths: chosen })
}

/// Enumerate simple paths, then search all K-multisets.
pub fn brute_force_optimum(
    net: &DirectedNetwork,
    k: usize,
    objective: OracleObjective,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    let paths = enumerate_simple_paths(net, opts.path_cap)?;
    brute_force_over(net, &paths, k, objective, opts)
}

/// Among multisets with the largest mean D1, the one with the largest
/// minimum pairwise D1. `value` is the mean, `midi` the minimum.
pub fn best_midi_among_optimal_avdi(
    net: &DirectedNetwork,
    k: usize,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    let paths = enumerate_simple_paths(net, opts.path_cap)?;
    search(net, &paths, k, OracleObjective::D1Sum, opts, true)
}
