use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Cost `$(k)` of one function evaluation at a point with `k` active
/// variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CostModel {
    /// `$(k) = c0 + c1·k`.
    Affine { c0: f64, c1: f64 },
    /// `$(k) = values[min(k, len−1)]`.
    Table(Vec<f64>),
}

impl CostModel {
    pub fn affine(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 >= 1.0) || !(c1 >= 0.0) || !c0.is_finite() || !c1.is_finite() {
            return Err(invalid(format!("affine cost needs c0 >= 1 and c1 >= 0, got c0={c0}, c1={c1}")));
        }
        Ok(CostModel::Affine { c0, c1 })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        match values.first() {
            Some(&v0) if v0 >= 1.0 => {}
            _ => return Err(invalid("cost table needs a first entry >= 1")),
        }
        if values.windows(2).any(|w| !(w[1] >= w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cost table must be finite and non-decreasing"));
        }
        Ok(CostModel::Table(values))
    }

    pub fn cost(&self, active: usize) -> f64 {
        match self {
            CostModel::Affine { c0, c1 } => c0 + c1 * active as f64,
            CostModel::Table(values) => values[active.min(values.len() - 1)],
        }
    }

    /// Checks `c1·k ≤ $(k) ≤ exp(c2·k)` for `1 ≤ k ≤ k_max`.
    pub fn satisfies_bracket(&self, c1: f64, c2: f64, k_max: usize) -> bool {
        (1..=k_max).all(|k| {
            let v = self.cost(k);
            c1 * k as f64 <= v && v.ln() <= c2 * k as f64
        })
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::Affine { c0: 1.0, c1: 1.0 }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostModel::Affine { c0, c1 } => write!(f, "affine:{c0},{c1}"),
            CostModel::Table(v) => {
                let cells: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "table:{}", cells.join(","))
            }
        }
    }
}

impl FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| invalid(format!("bad cost model '{s}'")))?;
        let nums = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| invalid(format!("bad number '{v}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match kind {
            "affine" if nums.len() == 2 => CostModel::affine(nums[0], nums[1]),
            "table" => CostModel::table(nums),
            _ => Err(invalid(format!("bad cost model '{s}'"))),
        }
    }
}
