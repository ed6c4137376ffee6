use crate::error::{Error, Result};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    /// Name of the variable family, e.g. `"x"`.
    pub block: String,
    pub index: Vec<usize>,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub label: String,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Constraint {
            coeffs,
            sense,
            rhs,
            label: String::new(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * x[v]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimisation LP with named variable blocks.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    lookup: HashMap<(String, Vec<usize>), usize>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable with bounds `[lower, upper]`; `lower` must be finite.
    pub fn add_var(&mut self, block: &str, index: &[usize], cost: f64, lower: f64, upper: f64) -> Result<usize> {
        if !lower.is_finite() || upper < lower || cost.is_nan() {
            return Err(Error::Lp(format!(
                "bad bounds or cost for {block}{index:?}: [{lower}, {upper}], cost {cost}"
            )));
        }
        let key = (block.to_string(), index.to_vec());
        if self.lookup.contains_key(&key) {
            return Err(Error::Lp(format!("duplicate variable {block}{index:?}")));
        }
        let id = self.vars.len();
        self.lookup.insert(key, id);
        self.vars.push(Variable {
            block: block.to_string(),
            index: index.to_vec(),
            cost,
            lower,
            upper,
        });
        Ok(id)
    }

    /// Nonnegative variable without upper bound.
    pub fn add_nonneg(&mut self, block: &str, index: &[usize], cost: f64) -> Result<usize> {
        self.add_var(block, index, cost, 0.0, f64::INFINITY)
    }

    pub fn var(&self, block: &str, index: &[usize]) -> Option<usize> {
        self.lookup.get(&(block.to_string(), index.to_vec())).copied()
    }

    pub fn add_row(&mut self, row: Constraint) -> Result<usize> {
        if let Some(&(v, _)) = row.coeffs.iter().find(|(v, _)| *v >= self.vars.len()) {
            return Err(Error::Lp(format!("row references unknown column {v}")));
        }
        if row.coeffs.iter().any(|(_, a)| !a.is_finite()) || !row.rhs.is_finite() {
            return Err(Error::Lp(format!("non-finite data in row `{}`", row.label)));
        }
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, &xv)| v.cost * xv).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = self
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn var_name(&self, v: usize) -> String {
        let var = &self.vars[v];
        let mut name = var.block.clone();
        for i in &var.index {
            name.push('_');
            name.push_str(&i.to_string());
        }
        name
    }
}
