//! Similarity and dissimilarity indices between paths, and solution-level
//! scores. Everything is exact; conversion to floats happens at the edges.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::graph::PathSeq;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("dissimilarity index must be 1..=4, got {0}")]
    BadIndex(u8),
    #[error("path has no arcs")]
    EmptyPath,
}

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Number of common arcs of two sorted, deduplicated arc lists.
pub fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// OL(p, q) = |arcs(p) ∩ arcs(q)|.
pub fn overlap_length(p: &PathSeq, q: &PathSeq) -> usize {
    sorted_intersection(&p.arc_set(), &q.arc_set())
}

/// A dissimilarity value. The second index involves a square root, which
/// is kept symbolic as `1 - sqrt(r)` unless `r` is a rational square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dissimilarity {
    Exact(BigRational),
    OneMinusSqrt(BigRational),
}

impl Dissimilarity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Dissimilarity::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Dissimilarity::OneMinusSqrt(r) => 1.0 - r.to_f64().unwrap_or(f64::NAN).sqrt(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Dissimilarity::Exact(r) => r.is_zero(),
            Dissimilarity::OneMinusSqrt(r) => r.is_one(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Dissimilarity::Exact(r) => r.is_one(),
            Dissimilarity::OneMinusSqrt(r) => r.is_zero(),
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Dissimilarity::Exact(r) => Some(r),
            Dissimilarity::OneMinusSqrt(_) => None,
        }
    }
}

impl fmt::Display for Dissimilarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dissimilarity::Exact(r) => write!(f, "{r}"),
            Dissimilarity::OneMinusSqrt(r) => write!(f, "1 - sqrt({r})"),
        }
    }
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

/// D_i(p, q) = 1 - S_i(p, q) over arc sets.
pub fn dissimilarity(index: u8, p: &PathSeq, q: &PathSeq) -> Result<Dissimilarity, MetricError> {
    let (a, b) = (p.arc_set(), q.arc_set());
    dissimilarity_sets(index, &a, &b)
}

/// As [`dissimilarity`], for sorted deduplicated arc sets.
pub fn dissimilarity_sets(index: u8, a: &[usize], b: &[usize]) -> Result<Dissimilarity, MetricError> {
    if !(1..=4).contains(&index) {
        return Err(MetricError::BadIndex(index));
    }
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyPath);
    }
    let o = sorted_intersection(a, b);
    let (lp, lq) = (a.len(), b.len());
    let one = BigRational::one();
    Ok(match index {
        1 => Dissimilarity::Exact(one - (ratio(o, lp) + ratio(o, lq)) / BigRational::from_integer(2.into())),
        2 => {
            let r = ratio(o * o, lp * lq);
            match exact_sqrt(&r) {
                Some(s) => Dissimilarity::Exact(one - s),
                None => Dissimilarity::OneMinusSqrt(r),
            }
        }
        3 => Dissimilarity::Exact(one - ratio(o, lp.max(lq))),
        _ => Dissimilarity::Exact(one - ratio(o, lp + lq - o)),
    })
}

/// D1 between two sorted arc sets.
pub fn d1_sets(a: &[usize], b: &[usize]) -> BigRational {
    let o = sorted_intersection(a, b);
    BigRational::one() - (ratio(o, a.len()) + ratio(o, b.len())) / BigRational::from_integer(2.into())
}

/// Per-arc usage counts over a collection of arc sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArcUsage {
    counts: BTreeMap<usize, usize>,
}

impl ArcUsage {
    /// Each inner list counts once per distinct arc.
    pub fn from_arc_lists<'a>(lists: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut counts = BTreeMap::new();
        for list in lists {
            let mut set = list.to_vec();
            set.sort_unstable();
            set.dedup();
            for a in set {
                *counts.entry(a).or_insert(0) += 1;
            }
        }
        ArcUsage { counts }
    }

    pub fn from_paths(paths: &[PathSeq]) -> Self {
        Self::from_arc_lists(paths.iter().map(|p| p.arcs()))
    }

    pub fn count(&self, arc: usize) -> usize {
        self.counts.get(&arc).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn max_count(&self) -> usize {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// Σ_a C(c_a, 2).
    pub fn pairwise_overlaps(&self) -> usize {
        self.counts.values().map(|&c| c * (c.saturating_sub(1)) / 2).sum()
    }

    /// |{a : c_a >= 2}|.
    pub fn repeated_arcs(&self) -> usize {
        self.counts.values().filter(|&&c| c >= 2).count()
    }

    /// Σ_{c_a >= 2} c_a.
    pub fn repeated_occurrences(&self) -> usize {
        self.counts.values().filter(|&&c| c >= 2).sum()
    }

    /// Σ_{c_a >= 2} (c_a - 1).
    pub fn arc_repetitions(&self) -> usize {
        self.counts.values().filter(|&&c| c >= 2).map(|&c| c - 1).sum()
    }
}

/// Σ_{i<j} OL(p_i, p_j), computed pair by pair.
pub fn total_pairwise_overlaps(paths: &[PathSeq]) -> usize {
    let sets: Vec<Vec<usize>> = paths.iter().map(|p| p.arc_set()).collect();
    let mut total = 0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            total += sorted_intersection(&sets[i], &sets[j]);
        }
    }
    total
}

pub fn repeated_arc_count(paths: &[PathSeq]) -> usize {
    ArcUsage::from_paths(paths).repeated_arcs()
}

pub fn repeated_occurrences(paths: &[PathSeq]) -> usize {
    ArcUsage::from_paths(paths).repeated_occurrences()
}

pub fn arc_repetitions(paths: &[PathSeq]) -> usize {
    ArcUsage::from_paths(paths).arc_repetitions()
}

fn pairwise_d1(paths: &[PathSeq]) -> Vec<BigRational> {
    let sets: Vec<Vec<usize>> = paths.iter().map(|p| p.arc_set()).collect();
    let mut out = Vec::new();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            out.push(d1_sets(&sets[i], &sets[j]));
        }
    }
    out
}

/// Mean pairwise D1; `None` for fewer than two paths.
pub fn avdi(paths: &[PathSeq]) -> Option<BigRational> {
    let d = pairwise_d1(paths);
    if d.is_empty() {
        return None;
    }
    let n = d.len();
    Some(d.into_iter().fold(BigRational::zero(), |acc, x| acc + x) / BigRational::from_integer(n.into()))
}

/// Minimum pairwise D1; `None` for fewer than two paths.
pub fn midi(paths: &[PathSeq]) -> Option<BigRational> {
    pairwise_d1(paths).into_iter().min()
}

/// Round half away from zero to `places` decimals (half-up for the
/// non-negative values used here).
pub fn round_half_up(r: &BigRational, places: u32) -> BigRational {
    let scale = BigRational::from_integer(BigInt::from(10u32).pow(places));
    let scaled = r * &scale;
    let half = BigRational::new(1.into(), 2.into());
    let rounded = if scaled.is_negative() { -((-scaled) + half).floor() } else { (scaled + half).floor() };
    rounded / scale
}

/// `r` rounded to three decimals, as f64.
pub fn to_3dp(r: &BigRational) -> f64 {
    round_half_up(r, 3).to_f64().unwrap_or(f64::NAN)
}
