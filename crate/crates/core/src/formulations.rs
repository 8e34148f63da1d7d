//! MILP models for choosing K paths, and decoding of their solutions.
//!
//! Column order is fixed: path variables `x_k_a` (k-major, arc-minor), then
//! the formulation's auxiliary variables in the order listed per builder.

use std::fmt;
use std::str::FromStr;

use kdp_milp::{LinExpr, MilpError, MilpModel, Relation, Sense, VarId};

use crate::graph::DirectedNetwork;

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("K must be at least {min} for {tag} (got {k})")]
    KTooSmall { tag: Tag, k: usize, min: usize },
    #[error("option `{option}` does not apply to {tag}")]
    InvalidOption { tag: Tag, option: &'static str },
    #[error("unknown formulation `{0}`")]
    UnknownTag(String),
    #[error("model has no variable `{0}`")]
    MissingVariable(String),
    #[error("path {k}: x value {value} on arc {arc} is not integral")]
    Fractional { k: usize, arc: usize, value: f64 },
    #[error("path {k}: flow balance violated at node {node} (net outflow {net})")]
    Unbalanced { k: usize, node: usize, net: i64 },
    #[error("assignment has {got} values, model needs {need}")]
    WrongLength { got: usize, need: usize },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Mao,
    Mra,
    Mro,
    Mar,
    MinMax,
}

impl Tag {
    pub const ALL: [Tag; 5] = [Tag::Mao, Tag::Mra, Tag::Mro, Tag::Mar, Tag::MinMax];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Mao => "mao",
            Tag::Mra => "mra",
            Tag::Mro => "mro",
            Tag::Mar => "mar",
            Tag::MinMax => "minmax",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for Tag {
    type Err = FormulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| FormulationError::UnknownTag(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Options {
    /// MAO: drop `z <= x^k`, `z <= x^l`. MRA: drop `y <= Σx`.
    pub drop_redundant: bool,
    /// MAR: one `Σ_k x <= K w` row per arc instead of K rows `x <= w`.
    pub aggregate_linking: bool,
    /// MRA/MRO/MAR: `Σ_k x <= R*` per arc.
    pub presence_bound: Option<usize>,
}

/// A formulation together with its variant options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormulationKind {
    pub tag: Tag,
    pub options: Options,
}

impl FormulationKind {
    /// The default variant of each formulation (MAR uses aggregated linking).
    pub fn new(tag: Tag) -> Self {
        let options = Options { aggregate_linking: tag == Tag::Mar, ..Options::default() };
        FormulationKind { tag, options }
    }

    pub fn validate(&self) -> Result<(), FormulationError> {
        let tag = self.tag;
        if self.options.drop_redundant && !matches!(tag, Tag::Mao | Tag::Mra) {
            return Err(FormulationError::InvalidOption { tag, option: "drop_redundant" });
        }
        if self.options.aggregate_linking && tag != Tag::Mar {
            return Err(FormulationError::InvalidOption { tag, option: "aggregate_linking" });
        }
        if self.options.presence_bound.is_some() && !matches!(tag, Tag::Mra | Tag::Mro | Tag::Mar) {
            return Err(FormulationError::InvalidOption { tag, option: "presence_bound" });
        }
        Ok(())
    }

    /// Method label, e.g. `mar`, `mraa` for the presence-bounded MRA.
    pub fn label(&self) -> String {
        let mut s = self.tag.as_str().to_string();
        if self.options.presence_bound.is_some() {
            s.push('a');
        }
        s
    }
}

/// A built model plus the index of every path variable.
#[derive(Debug, Clone)]
pub struct PathModel {
    pub model: MilpModel,
    pub k: usize,
    /// `x[k][a]`, 0-based path index.
    pub x: Vec<Vec<VarId>>,
}

pub fn x_name(k: usize, a: usize) -> String {
    format!("x_{}_{}", k + 1, a)
}

fn with_paths(net: &DirectedNetwork, k: usize) -> Result<PathModel, FormulationError> {
    let mut model = MilpModel::new(Sense::Minimize);
    let mut x = Vec::with_capacity(k);
    for p in 0..k {
        let row = (0..net.m()).map(|a| model.add_binary(x_name(p, a))).collect::<Result<Vec<_>, _>>()?;
        x.push(row);
    }
    Ok(PathModel { model, k, x })
}

fn add_flow_rows(pm: &mut PathModel, net: &DirectedNetwork) -> Result<(), FormulationError> {
    for p in 0..pm.k {
        for v in 1..=net.n() {
            let mut e = LinExpr::new();
            for &a in net.out_arcs(v) {
                e.add(pm.x[p][a], 1.0);
            }
            for &a in net.in_arcs(v) {
                e.add(pm.x[p][a], -1.0);
            }
            let rhs = if v == net.s() {
                1.0
            } else if v == net.t() {
                -1.0
            } else {
                0.0
            };
            pm.model.add_constraint(format!("flow_{}_{}", p + 1, v), e, Relation::Eq, rhs)?;
        }
    }
    Ok(())
}

fn usage(pm: &PathModel, a: usize) -> LinExpr {
    LinExpr::from((0..pm.k).map(|p| (pm.x[p][a], 1.0)))
}

fn check_k(tag: Tag, k: usize, min: usize) -> Result<(), FormulationError> {
    if k < min {
        return Err(FormulationError::KTooSmall { tag, k, min });
    }
    Ok(())
}

/// Minimise total pairwise arc overlaps. Columns: x, z (pairs in
/// lexicographic order), v.
pub fn build_mao(net: &DirectedNetwork, k: usize, drop_redundant: bool) -> Result<PathModel, FormulationError> {
    check_k(Tag::Mao, k, 2)?;
    let mut pm = with_paths(net, k)?;
    let mut z = Vec::new();
    for p in 0..k {
        for l in p + 1..k {
            let row = (0..net.m())
                .map(|a| pm.model.add_binary(format!("z_{}_{}_{}", p + 1, l + 1, a)))
                .collect::<Result<Vec<_>, _>>()?;
            z.push((p, l, row));
        }
    }
    let v = (0..net.m())
        .map(|a| pm.model.add_continuous(format!("v_{a}"), 0.0, f64::INFINITY))
        .collect::<Result<Vec<_>, _>>()?;
    add_flow_rows(&mut pm, net)?;
    for (p, l, row) in &z {
        for a in 0..net.m() {
            let (xk, xl, za) = (pm.x[*p][a], pm.x[*l][a], row[a]);
            let tag = format!("{}_{}_{}", p + 1, l + 1, a);
            if !drop_redundant {
                pm.model.add_constraint(format!("zk_{tag}"), [(za, 1.0), (xk, -1.0)], Relation::Le, 0.0)?;
                pm.model.add_constraint(format!("zl_{tag}"), [(za, 1.0), (xl, -1.0)], Relation::Le, 0.0)?;
            }
            pm.model.add_constraint(format!("zkl_{tag}"), [(za, 1.0), (xk, -1.0), (xl, -1.0)], Relation::Ge, -1.0)?;
        }
    }
    for a in 0..net.m() {
        let mut e = LinExpr::new().with(v[a], 1.0);
        for (_, _, row) in &z {
            e.add(row[a], -1.0);
        }
        pm.model.add_constraint(format!("v_{a}"), e, Relation::Eq, 0.0)?;
    }
    pm.model.set_objective(Sense::Minimize, v.iter().map(|&id| (id, 1.0)))?;
    Ok(pm)
}

fn add_y(pm: &mut PathModel, net: &DirectedNetwork) -> Result<Vec<VarId>, FormulationError> {
    (0..net.m()).map(|a| pm.model.add_binary(format!("y_{a}")).map_err(Into::into)).collect()
}

/// `(K-1) y_a >= Σ_k x_a - 1`.
fn add_repeat_rows(pm: &mut PathModel, y: &[VarId]) -> Result<(), FormulationError> {
    let k = pm.k as f64;
    for (a, &ya) in y.iter().enumerate() {
        let mut e = LinExpr::new().with(ya, k - 1.0);
        for p in 0..pm.k {
            e.add(pm.x[p][a], -1.0);
        }
        pm.model.add_constraint(format!("rep_{a}"), e, Relation::Ge, -1.0)?;
    }
    Ok(())
}

/// Minimise the number of arcs used by more than one path. Columns: x, y.
pub fn build_mra(net: &DirectedNetwork, k: usize, drop_redundant: bool) -> Result<PathModel, FormulationError> {
    check_k(Tag::Mra, k, 2)?;
    let mut pm = with_paths(net, k)?;
    let y = add_y(&mut pm, net)?;
    add_flow_rows(&mut pm, net)?;
    if !drop_redundant {
        for (a, &ya) in y.iter().enumerate() {
            // y <= Σx
            let mut e = LinExpr::new().with(ya, 1.0);
            for p in 0..k {
                e.add(pm.x[p][a], -1.0);
            }
            pm.model.add_constraint(format!("ylink_{a}"), e, Relation::Le, 0.0)?;
        }
    }
    add_repeat_rows(&mut pm, &y)?;
    pm.model.set_objective(Sense::Minimize, y.iter().map(|&id| (id, 1.0)))?;
    Ok(pm)
}

/// Minimise repeated arc occurrences. Columns: x, y, u.
pub fn build_mro(net: &DirectedNetwork, k: usize) -> Result<PathModel, FormulationError> {
    check_k(Tag::Mro, k, 2)?;
    let mut pm = with_paths(net, k)?;
    let y = add_y(&mut pm, net)?;
    let u = (0..net.m())
        .map(|a| pm.model.add_continuous(format!("u_{a}"), 0.0, f64::INFINITY))
        .collect::<Result<Vec<_>, _>>()?;
    add_flow_rows(&mut pm, net)?;
    add_repeat_rows(&mut pm, &y)?;
    for a in 0..net.m() {
        // u >= y + Σx - 1
        let mut e = LinExpr::new().with(u[a], 1.0).with(y[a], -1.0);
        for p in 0..k {
            e.add(pm.x[p][a], -1.0);
        }
        pm.model.add_constraint(format!("occ_{a}"), e, Relation::Ge, -1.0)?;
    }
    pm.model.set_objective(Sense::Minimize, u.iter().map(|&id| (id, 1.0)))?;
    Ok(pm)
}

/// Minimise arc repetitions beyond first use. Columns: x, w, u.
pub fn build_mar(net: &DirectedNetwork, k: usize, aggregate_linking: bool) -> Result<PathModel, FormulationError> {
    check_k(Tag::Mar, k, 2)?;
    let mut pm = with_paths(net, k)?;
    let w = (0..net.m()).map(|a| pm.model.add_binary(format!("w_{a}"))).collect::<Result<Vec<_>, _>>()?;
    let u = (0..net.m())
        .map(|a| pm.model.add_continuous(format!("u_{a}"), 0.0, f64::INFINITY))
        .collect::<Result<Vec<_>, _>>()?;
    add_flow_rows(&mut pm, net)?;
    for a in 0..net.m() {
        if aggregate_linking {
            let mut e = LinExpr::new().with(w[a], -(k as f64));
            for p in 0..k {
                e.add(pm.x[p][a], 1.0);
            }
            pm.model.add_constraint(format!("wlink_{a}"), e, Relation::Le, 0.0)?;
        } else {
            for p in 0..k {
                pm.model.add_constraint(
                    format!("wlink_{}_{a}", p + 1),
                    [(pm.x[p][a], 1.0), (w[a], -1.0)],
                    Relation::Le,
                    0.0,
                )?;
            }
        }
        // u = Σx - w
        let mut e = LinExpr::new().with(u[a], 1.0).with(w[a], 1.0);
        for p in 0..k {
            e.add(pm.x[p][a], -1.0);
        }
        pm.model.add_constraint(format!("u_{a}"), e, Relation::Eq, 0.0)?;
    }
    pm.model.set_objective(Sense::Minimize, u.iter().map(|&id| (id, 1.0)))?;
    Ok(pm)
}

/// Minimise the largest per-arc usage. Columns: x, r.
pub fn build_minmax(net: &DirectedNetwork, k: usize) -> Result<PathModel, FormulationError> {
    check_k(Tag::MinMax, k, 1)?;
    let mut pm = with_paths(net, k)?;
    let r = pm.model.add_continuous("r", 0.0, f64::INFINITY)?;
    add_flow_rows(&mut pm, net)?;
    for a in 0..net.m() {
        let e = usage(&pm, a).with(r, -1.0);
        pm.model.add_constraint(format!("cap_{a}"), e, Relation::Le, 0.0)?;
    }
    pm.model.set_objective(Sense::Minimize, [(r, 1.0)])?;
    Ok(pm)
}

/// Add `Σ_k x_k_a <= bound` for every arc, finding path variables by name.
pub fn apply_presence_bound(
    model: &mut MilpModel,
    net: &DirectedNetwork,
    k: usize,
    bound: usize,
) -> Result<(), FormulationError> {
    for a in 0..net.m() {
        let mut e = LinExpr::new();
        for p in 0..k {
            let name = x_name(p, a);
            let id = model.var_by_name(&name).ok_or(FormulationError::MissingVariable(name))?;
            e.add(id, 1.0);
        }
        model.add_constraint(format!("presence_{a}"), e, Relation::Le, bound as f64)?;
    }
    Ok(())
}

/// Build any formulation variant.
pub fn build(net: &DirectedNetwork, k: usize, kind: &FormulationKind) -> Result<PathModel, FormulationError> {
    kind.validate()?;
    let o = kind.options;
    let mut pm = match kind.tag {
        Tag::Mao => build_mao(net, k, o.drop_redundant)?,
        Tag::Mra => build_mra(net, k, o.drop_redundant)?,
        Tag::Mro => build_mro(net, k)?,
        Tag::Mar => build_mar(net, k, o.aggregate_linking)?,
        Tag::MinMax => build_minmax(net, k)?,
    };
    if let Some(bound) = o.presence_bound {
        apply_presence_bound(&mut pm.model, net, k, bound)?;
    }
    Ok(pm)
}

/// Per-path arc sets read off an integer assignment. Sets may contain cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub arc_sets: Vec<Vec<usize>>,
    pub objective: f64,
}

/// Collect arcs with `x >= 1 - 1e-6` per path and check flow balance.
pub fn decode(values: &[f64], pm: &PathModel, net: &DirectedNetwork) -> Result<RawSolution, FormulationError> {
    if values.len() != pm.model.num_vars() {
        return Err(FormulationError::WrongLength { got: values.len(), need: pm.model.num_vars() });
    }
    let mut arc_sets = Vec::with_capacity(pm.k);
    for p in 0..pm.k {
        let mut arcs = Vec::new();
        for a in 0..net.m() {
            let v = values[pm.x[p][a].index()];
            if v >= 1.0 - 1e-6 {
                arcs.push(a);
            } else if v > 1e-6 {
                return Err(FormulationError::Fractional { k: p + 1, arc: a, value: v });
            }
        }
        check_balance(net, &arcs).map_err(|(node, bal)| FormulationError::Unbalanced { k: p + 1, node, net: bal })?;
        arc_sets.push(arcs);
    }
    Ok(RawSolution { arc_sets, objective: pm.model.objective_value(values) })
}

/// Unit s-t flow balance of an arc set; on failure returns (node, net outflow).
pub fn check_balance(net: &DirectedNetwork, arcs: &[usize]) -> Result<(), (usize, i64)> {
    let mut bal = vec![0i64; net.n() + 1];
    for &a in arcs {
        bal[net.tail(a)] += 1;
        bal[net.head(a)] -= 1;
    }
    for v in 1..=net.n() {
        let want = if v == net.s() {
            1
        } else if v == net.t() {
            -1
        } else {
            0
        };
        if bal[v] != want {
            return Err((v, bal[v]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_grid;
    use kdp_milp::{solve_bb, solve_lp, Status};

    fn count_rows(m: &MilpModel, prefix: &str) -> usize {
        m.constraints().iter().filter(|c| c.name.starts_with(prefix)).count()
    }

    #[test]
    fn mao_sizes_on_small_grid() {
        let g = gen_grid(2, 2);
        let pm = build_mao(&g, 2, false).unwrap();
        assert_eq!(pm.model.num_vars(), 16);
        assert_eq!(count_rows(&pm.model, "flow_"), 8);
        assert_eq!(count_rows(&pm.model, "z"), 12);
        assert_eq!(count_rows(&pm.model, "v_"), 4);
        assert_eq!(pm.model.num_constraints(), 24);
        let lean = build_mao(&g, 2, true).unwrap();
        assert_eq!(lean.model.num_constraints(), 16);
    }

    #[test]
    fn mra_sizes_on_small_grid() {
        let g = gen_grid(2, 2);
        assert_eq!(build_mra(&g, 2, false).unwrap().model.num_vars(), 12);
        assert_eq!(build_mro(&g, 2).unwrap().model.num_vars(), 16);
        assert_eq!(build_mar(&g, 2, true).unwrap().model.num_vars(), 16);
        assert_eq!(build_minmax(&g, 2).unwrap().model.num_vars(), 9);
    }

    #[test]
    fn column_names_and_order() {
        let g = gen_grid(2, 2);
        let pm = build_mao(&g, 3, false).unwrap();
        let names: Vec<&str> = pm.model.variables().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names[0], "x_1_0");
        assert_eq!(names[4], "x_2_0");
        assert_eq!(names[12], "z_1_2_0");
        assert_eq!(names[16], "z_1_3_0");
        assert_eq!(names[20], "z_2_3_0");
        assert_eq!(names[24], "v_0");
        assert!(pm.model.variables()[24].lower == 0.0 && !pm.model.variables()[24].integer);
    }

    #[test]
    fn invalid_options_and_k() {
        let g = gen_grid(2, 2);
        let mut kind = FormulationKind::new(Tag::Mro);
        kind.options.drop_redundant = true;
        assert!(matches!(build(&g, 2, &kind), Err(FormulationError::InvalidOption { .. })));
        let mut kind = FormulationKind::new(Tag::Mao);
        kind.options.presence_bound = Some(2);
        assert!(matches!(build(&g, 2, &kind), Err(FormulationError::InvalidOption { .. })));
        assert!(matches!(build_mao(&g, 1, false), Err(FormulationError::KTooSmall { .. })));
        assert_eq!("MaR".parse::<Tag>().unwrap(), Tag::Mar);
        assert!("xyz".parse::<Tag>().is_err());
    }

    #[test]
    fn small_grid_mao_decodes_to_simple_paths() {
        let g = gen_grid(2, 2);
        let pm = build_mao(&g, 2, false).unwrap();
        let r = solve_bb(&pm.model, None).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.objective, Some(0.0));
        let raw = decode(r.values.as_ref().unwrap(), &pm, &g).unwrap();
        assert_eq!(raw.arc_sets.len(), 2);
        assert!(raw.arc_sets.iter().all(|s| s.len() == 2));
        assert_ne!(raw.arc_sets[0], raw.arc_sets[1]);
    }

    #[test]
    fn decode_rejects_bad_assignments() {
        let g = gen_grid(2, 2);
        let pm = build_mra(&g, 2, false).unwrap();
        let zeros = vec![0.0; pm.model.num_vars()];
        assert!(matches!(decode(&zeros, &pm, &g), Err(FormulationError::Unbalanced { k: 1, node: 1, .. })));
        let mut half = zeros.clone();
        half[0] = 0.5;
        assert!(matches!(decode(&half, &pm, &g), Err(FormulationError::Fractional { k: 1, arc: 0, .. })));
        assert!(matches!(decode(&zeros[1..], &pm, &g), Err(FormulationError::WrongLength { .. })));
    }

    #[test]
    fn decode_keeps_cycles() {
        // s=1 -> 2 -> 4=t with a 2-3-2 detour available
        let g = DirectedNetwork::new(4, vec![(1, 2), (2, 3), (3, 2), (2, 4)], 1, 4).unwrap();
        let pm = build_mra(&g, 2, false).unwrap();
        let mut vals = vec![0.0; pm.model.num_vars()];
        for a in 0..4 {
            vals[pm.x[0][a].index()] = 1.0;
        }
        for a in [0, 3] {
            vals[pm.x[1][a].index()] = 1.0;
        }
        let raw = decode(&vals, &pm, &g).unwrap();
        assert_eq!(raw.arc_sets[0], vec![0, 1, 2, 3]);
        assert_eq!(raw.arc_sets[1], vec![0, 3]);
    }

    #[test]
    fn lp_values_on_six_by_six() {
        let g = gen_grid(6, 6);
        let mao = build_mao(&g, 3, false).unwrap();
        assert!(solve_lp(&mao.model).unwrap().objective.unwrap().abs() < 1e-9);
        let mar = build(&g, 3, &FormulationKind::new(Tag::Mar)).unwrap();
        assert!((solve_lp(&mar.model).unwrap().objective.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn presence_bound_adds_one_row_per_arc() {
        let g = gen_grid(3, 3);
        let mut kind = FormulationKind::new(Tag::Mar);
        kind.options.presence_bound = Some(2);
        let pm = build(&g, 3, &kind).unwrap();
        assert_eq!(count_rows(&pm.model, "presence_"), g.m());
        assert_eq!(kind.label(), "mara");
        let mut bare = MilpModel::new(Sense::Minimize);
        assert!(matches!(apply_presence_bound(&mut bare, &g, 2, 1), Err(FormulationError::MissingVariable(_))));
    }
}
