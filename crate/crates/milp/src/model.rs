//! Solver-agnostic mixed-integer linear model.

use std::collections::BTreeMap;
use std::fmt;

use crate::MilpError;

/// Index of a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Variable {
    /// Integer variable with bounds `[0, 1]`.
    pub fn is_binary(&self) -> bool {
        self.integer && self.lower == 0.0 && self.upper == 1.0
    }
}

/// A sparse linear expression. Terms are kept sorted by variable and merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(VarId, f64)>,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, var: VarId, coef: f64) -> &mut Self {
        match self.terms.binary_search_by_key(&var, |t| t.0) {
            Ok(pos) => self.terms[pos].1 += coef,
            Err(pos) => self.terms.insert(pos, (var, coef)),
        }
        self
    }

    pub fn with(mut self, var: VarId, coef: f64) -> Self {
        self.add(var, coef);
        self
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn prune_zeros(&mut self) {
        self.terms.retain(|&(_, c)| c != 0.0);
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

impl<I: IntoIterator<Item = (VarId, f64)>> From<I> for LinExpr {
    fn from(iter: I) -> Self {
        let mut e = LinExpr::new();
        for (v, c) in iter {
            e.add(v, c);
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub expr: LinExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    variables: Vec<Variable>,
    names: BTreeMap<String, VarId>,
    constraints: Vec<Constraint>,
    objective: Objective,
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new(Sense::Minimize)
    }
}

impl MilpModel {
    pub fn new(sense: Sense) -> Self {
        MilpModel {
            variables: Vec::new(),
            names: BTreeMap::new(),
            constraints: Vec::new(),
            objective: Objective { sense, expr: LinExpr::new() },
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(MilpError::InvalidBounds { name, lower, upper });
        }
        if self.names.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        let id = VarId(self.variables.len());
        self.names.insert(name.clone(), id);
        self.variables.push(Variable { name, lower, upper, integer });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_var(name, 0.0, 1.0, true)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        self.add_var(name, lower, upper, false)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: impl Into<LinExpr>,
        relation: Relation,
        rhs: f64,
    ) -> Result<usize, MilpError> {
        let mut expr = expr.into();
        expr.prune_zeros();
        self.check_expr(&expr)?;
        if !rhs.is_finite() {
            return Err(MilpError::NonFinite("constraint right-hand side"));
        }
        self.constraints.push(Constraint { name: name.into(), expr, relation, rhs });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, sense: Sense, expr: impl Into<LinExpr>) -> Result<(), MilpError> {
        let mut expr = expr.into();
        expr.prune_zeros();
        self.check_expr(&expr)?;
        self.objective = Objective { sense, expr };
        Ok(())
    }

    fn check_expr(&self, expr: &LinExpr) -> Result<(), MilpError> {
        for &(v, c) in expr.terms() {
            if v.0 >= self.variables.len() {
                return Err(MilpError::UnknownVariable(v.0));
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite("coefficient"));
            }
        }
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_integer(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    /// Copy of the model with every integrality flag cleared.
    pub fn relaxed(&self) -> MilpModel {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.integer = false;
        }
        m
    }

    /// Largest violation of bounds and constraints by `values`, ignoring integrality.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for c in &self.constraints {
            let lhs = c.expr.eval(values);
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.expr.eval(values)
    }
}
