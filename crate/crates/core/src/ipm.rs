//! Iterative penalty method: K shortest paths with additive penalties on
//! arcs already chosen.

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::graph::{dijkstra, DirectedNetwork, GraphError, PathSeq};

#[derive(Debug, thiserror::Error)]
pub enum IpmError {
    #[error("target unreachable from source")]
    Unreachable,
    #[error("penalty must be non-negative (got {0})")]
    NegativeAlpha(Rational64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Start from unit costs; after each shortest path, add `alpha` to the cost
/// of every arc on it. Penalties accumulate across iterations.
pub fn ipm(net: &DirectedNetwork, k: usize, alpha: Rational64) -> Result<Vec<PathSeq>, IpmError> {
    if alpha < Rational64::zero() {
        return Err(IpmError::NegativeAlpha(alpha));
    }
    let mut costs = vec![Rational64::one(); net.m()];
    let mut paths = Vec::with_capacity(k);
    for _ in 0..k {
        let p = dijkstra(net, &costs)?.ok_or(IpmError::Unreachable)?;
        for &a in p.arcs() {
            costs[a] += alpha;
        }
        paths.push(p);
    }
    Ok(paths)
}

/// Parse a decimal such as `1`, `0.25` or `3/4` into an exact rational.
pub fn parse_alpha(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let (n, d) = (n.trim().parse::<i64>().ok()?, d.trim().parse::<i64>().ok()?);
        return (d != 0).then(|| Rational64::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let negative = int.starts_with('-');
    let int_val: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
    let scale = 10i64.pow(frac.len() as u32);
    let frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let frac_signed = if negative { -frac_val } else { frac_val };
    Some(Rational64::new(int_val * scale + frac_signed, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_grid;
    use crate::metrics::avdi;

    #[test]
    fn zero_penalty_repeats_the_same_path() {
        let g = gen_grid(4, 5);
        let paths = ipm(&g, 4, Rational64::zero()).unwrap();
        assert!(paths.windows(2).all(|w| w[0] == w[1]));
        assert!(avdi(&paths).unwrap().is_zero());
    }

    #[test]
    fn penalty_rotates_over_disjoint_routes() {
        // three disjoint length-2 routes
        let g = DirectedNetwork::new(5, vec![(1, 2), (2, 5), (1, 3), (3, 5), (1, 4), (4, 5)], 1, 5).unwrap();
        let paths = ipm(&g, 3, Rational64::new(1, 2)).unwrap();
        assert_eq!(avdi(&paths).unwrap(), num_rational::BigRational::from_integer(1.into()));
    }

    #[test]
    fn errors() {
        let g = DirectedNetwork::new(3, vec![(1, 2)], 1, 3).unwrap();
        assert!(matches!(ipm(&g, 1, Rational64::one()), Err(IpmError::Unreachable)));
        assert!(matches!(ipm(&g, 1, Rational64::new(-1, 2)), Err(IpmError::NegativeAlpha(_))));
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha("1"), Some(Rational64::one()));
        assert_eq!(parse_alpha("1.00"), Some(Rational64::one()));
        assert_eq!(parse_alpha("0.25"), Some(Rational64::new(1, 4)));
        assert_eq!(parse_alpha(".5"), Some(Rational64::new(1, 2)));
        assert_eq!(parse_alpha("3/4"), Some(Rational64::new(3, 4)));
        assert_eq!(parse_alpha("-0.5"), Some(Rational64::new(-1, 2)));
        assert_eq!(parse_alpha("abc"), None);
        assert_eq!(parse_alpha("1/0"), None);
    }
}
