//! Random small models checked against exhaustive oracles.

use kdp_milp::{
    export_lp, parse_lp, solve_bb, solve_lp, solve_lp_with, LpAlgorithm, MilpModel, Relation, Sense, Status,
    VarId,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Spec {
    sense: Sense,
    bounds: Vec<(i32, i32)>,
    integer: Vec<bool>,
    rows: Vec<(Vec<i32>, Relation, i32)>,
    cost: Vec<i32>,
}

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)]
}

fn spec(max_vars: usize, max_rows: usize) -> impl Strategy<Value = Spec> {
    (1..=max_vars, 0..=max_rows).prop_flat_map(|(n, m)| {
        (
            prop_oneof![Just(Sense::Minimize), Just(Sense::Maximize)],
            prop::collection::vec((-3i32..=1, 0i32..=3).prop_map(|(lo, w)| (lo, lo + w)), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec((prop::collection::vec(-3i32..=3, n), relation(), -4i32..=6), m),
            prop::collection::vec(-4i32..=4, n),
        )
            .prop_map(|(sense, bounds, integer, rows, cost)| Spec { sense, bounds, integer, rows, cost })
    })
}

fn build(s: &Spec, integral: bool) -> MilpModel {
    let mut m = MilpModel::new(s.sense);
    let vars: Vec<VarId> = s
        .bounds
        .iter()
        .enumerate()
        .map(|(j, &(lo, hi))| m.add_var(format!("v{j}"), lo as f64, hi as f64, integral && s.integer[j]).unwrap())
        .collect();
    for (i, (coefs, rel, rhs)) in s.rows.iter().enumerate() {
        let terms: Vec<(VarId, f64)> = vars.iter().zip(coefs).map(|(&v, &c)| (v, c as f64)).collect();
        m.add_constraint(format!("r{i}"), terms, *rel, *rhs as f64).unwrap();
    }
    let obj: Vec<(VarId, f64)> = vars.iter().zip(&s.cost).map(|(&v, &c)| (v, c as f64)).collect();
    m.set_objective(s.sense, obj).unwrap();
    m
}

/// Solve a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Optimal value of a bounded LP by enumerating vertices; `None` if infeasible.
fn vertex_oracle(model: &MilpModel) -> Option<f64> {
    let n = model.num_vars();
    // hyperplanes: bounds then rows
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (j, v) in model.variables().iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), v.lower));
        planes.push((e, v.upper));
    }
    for c in model.constraints() {
        let mut a = vec![0.0; n];
        for &(v, coef) in c.expr.terms() {
            a[v.0] = coef;
        }
        planes.push((a, c.rhs));
    }
    let sign = if model.objective().sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut best: Option<f64> = None;
    for set in subsets(planes.len(), n) {
        let a: Vec<Vec<f64>> = set.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = set.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if model.max_violation(&x) <= 1e-7 {
                let z = sign * model.objective_value(&x);
                best = Some(best.map_or(z, |bz: f64| bz.min(z)));
            }
        }
    }
    best.map(|z| sign * z)
}

/// Optimum with integrality by enumerating integer parts and solving the rest with the vertex oracle.
fn integer_oracle(model: &MilpModel) -> Option<f64> {
    let ints: Vec<usize> = (0..model.num_vars()).filter(|&j| model.variables()[j].integer).collect();
    let sign = if model.objective().sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut best: Option<f64> = None;
    let mut assignment: Vec<i64> = ints.iter().map(|&j| model.variables()[j].lower as i64).collect();
    loop {
        let mut fixed = MilpModel::new(model.objective().sense);
        for (j, v) in model.variables().iter().enumerate() {
            let (lo, hi) = match ints.iter().position(|&i| i == j) {
                Some(p) => (assignment[p] as f64, assignment[p] as f64),
                None => (v.lower, v.upper),
            };
            fixed.add_var(v.name.clone(), lo, hi, false).unwrap();
        }
        for c in model.constraints() {
            fixed.add_constraint(c.name.clone(), c.expr.clone(), c.relation, c.rhs).unwrap();
        }
        fixed.set_objective(model.objective().sense, model.objective().expr.clone()).unwrap();
        if let Some(z) = vertex_oracle(&fixed) {
            let z = sign * z;
            best = Some(best.map_or(z, |bz: f64| bz.min(z)));
        }
        // odometer increment
        let mut p = 0;
        loop {
            if p == ints.len() {
                return best.map(|z| sign * z);
            }
            let hi = model.variables()[ints[p]].upper as i64;
            if assignment[p] < hi {
                assignment[p] += 1;
                break;
            }
            assignment[p] = model.variables()[ints[p]].lower as i64;
            p += 1;
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn lp_matches_vertex_enumeration(s in spec(3, 4)) {
        let model = build(&s, false);
        let expected = vertex_oracle(&model);
        for alg in [LpAlgorithm::Auto, LpAlgorithm::Primal] {
            let r = solve_lp_with(&model, alg, None).unwrap();
            match expected {
                None => prop_assert_eq!(r.status, Status::Infeasible),
                Some(z) => {
                    prop_assert_eq!(r.status, Status::Optimal);
                    let got = r.objective.unwrap();
                    prop_assert!(close(got, z), "{:?}: got {} want {}", alg, got, z);
                    let x = r.values.unwrap();
                    prop_assert!(model.max_violation(&x) <= 1e-6);
                    prop_assert!(close(model.objective_value(&x), got));
                }
            }
        }
    }

    #[test]
    fn bb_matches_integer_enumeration(s in spec(3, 3)) {
        let model = build(&s, true);
        let expected = integer_oracle(&model);
        let r = solve_bb(&model, None).unwrap();
        match expected {
            None => prop_assert_eq!(r.status, Status::Infeasible),
            Some(z) => {
                prop_assert_eq!(r.status, Status::Optimal);
                let got = r.objective.unwrap();
                prop_assert!(close(got, z), "got {} want {}", got, z);
                let x = r.values.unwrap();
                prop_assert!(model.max_violation(&x) <= 1e-6);
                for (v, &xv) in model.variables().iter().zip(&x) {
                    if v.integer {
                        prop_assert_eq!(xv, xv.round());
                    }
                }
                // weak duality against the relaxation
                let lp = solve_lp(&model).unwrap().objective.unwrap();
                match model.objective().sense {
                    Sense::Minimize => prop_assert!(lp <= got + 1e-6),
                    Sense::Maximize => prop_assert!(lp >= got - 1e-6),
                }
            }
        }
    }

    #[test]
    fn lp_file_round_trip_keeps_value(s in spec(4, 5)) {
        let model = build(&s, true);
        let back = parse_lp(&export_lp(&model)).unwrap();
        prop_assert_eq!(back.num_integer(), model.num_integer());
        let a = solve_lp(&model).unwrap();
        let b = solve_lp(&back).unwrap();
        prop_assert_eq!(a.status, b.status);
        if let (Some(x), Some(y)) = (a.objective, b.objective) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }
}

fn cover_model(n: usize) -> MilpModel {
    let mut m = MilpModel::new(Sense::Minimize);
    let vars: Vec<VarId> = (0..n).map(|j| m.add_binary(format!("x{j}")).unwrap()).collect();
    let w: Vec<f64> = (0..n).map(|j| (7 + (j * 13) % 17) as f64).collect();
    let need = w.iter().sum::<f64>() / 2.0 + 0.5;
    m.add_constraint("cover", vars.iter().zip(&w).map(|(&v, &c)| (v, c)).collect::<Vec<_>>(), Relation::Ge, need)
        .unwrap();
    m.set_objective(Sense::Minimize, vars.iter().zip(&w).map(|(&v, &c)| (v, c + 0.5)).collect::<Vec<_>>())
        .unwrap();
    m
}

#[test]
fn time_limited_search_reports_bound_below_incumbent() {
    let m = cover_model(30);
    for ms in [0, 30] {
        let r = solve_bb(&m, Some(std::time::Duration::from_millis(ms))).unwrap();
        assert!(matches!(r.status, Status::TimeLimit | Status::FeasibleTimeLimit), "{:?}", r.status);
        if let (Some(z), Some(b)) = (r.objective, r.best_bound) {
            assert!(b <= z + 1e-9);
        }
    }
    let small = cover_model(10);
    let full = solve_bb(&small, None).unwrap();
    assert_eq!(full.status, Status::Optimal);
    assert_eq!(full.best_bound, full.objective);
    let best = (0u32..1 << 10)
        .map(|mask| (0..10).map(|j| ((mask >> j) & 1) as f64).collect::<Vec<_>>())
        .filter(|x| small.max_violation(x) <= 1e-9)
        .map(|x| small.objective_value(&x))
        .fold(f64::INFINITY, f64::min);
    assert!(close(full.objective.unwrap(), best));
}
