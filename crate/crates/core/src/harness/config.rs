//! Study configuration, read from TOML.
//!
//! ```toml
//! problem = "MDM_INT"
//! scheme = "pg(log:2,3)"
//! sweep = [0.1, 0.065, 0.04225]
//! seed = 1
//!
//! [mdm]
//! kappa = 0.8
//! delta = 0.6
//!
//! [output]
//! dir = "out"
//! name = "mdm-int"
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mdm::{check_admissible, CostModel, ZeroBound, DEFAULT_MAX_LEVEL};
use crate::weights::WeightScheme;

use super::testfn::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    #[serde(rename = "INT_1D")]
    Int1D,
    #[serde(rename = "APPROX_1D")]
    Approx1D,
    #[serde(rename = "MDM_INT")]
    MdmInt,
    #[serde(rename = "MDM_APPROX")]
    MdmApprox,
}

impl Problem {
    pub fn is_mdm(self) -> bool {
        matches!(self, Problem::MdmInt | Problem::MdmApprox)
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::Int1D => "INT_1D",
            Problem::Approx1D => "APPROX_1D",
            Problem::MdmInt => "MDM_INT",
            Problem::MdmApprox => "MDM_APPROX",
        }
    }

    fn default_tol(self) -> f64 {
        match self {
            Problem::Int1D => 1e-10,
            // The truncated directions of the L2 error are bounded by
            // α_{N+1}^{−1/2}, which is not small.
            Problem::Approx1D => 1e-2,
            Problem::MdmInt | Problem::MdmApprox => 1e-6,
        }
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "INT_1D" => Ok(Problem::Int1D),
            "APPROX_1D" => Ok(Problem::Approx1D),
            "MDM_INT" => Ok(Problem::MdmInt),
            "MDM_APPROX" => Ok(Problem::MdmApprox),
            other => Err(invalid(format!("unknown problem '{other}'"))),
        }
    }
}

/// Univariate rules `A_n`; also the levels of the Smolyak family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSection {
    pub r: usize,
    pub delta: f64,
    pub max_level: usize,
}

impl Default for QuadSection {
    fn default() -> Self {
        Self { r: 2, delta: 0.2, max_level: DEFAULT_MAX_LEVEL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxSection {
    /// `N = max(1, ⌊n·basis_ratio⌋)` polynomials for `n` samples.
    pub basis_ratio: f64,
    /// Levels of the Smolyak least-squares family.
    pub max_level: usize,
}

impl Default for ApproxSection {
    fn default() -> Self {
        Self { basis_ratio: 0.25, max_level: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdmSection {
    pub kappa: f64,
    pub delta: f64,
    pub anchor: f64,
    /// Smolyak constants; calibrated when either is absent.
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub calibration_budgets: Vec<usize>,
    /// `integration` or `approximation`.
    pub zero_bound: Option<String>,
}

impl Default for MdmSection {
    fn default() -> Self {
        Self {
            kappa: 0.8,
            delta: 0.6,
            anchor: 0.0,
            c0: None,
            c1: None,
            calibration_budgets: vec![16, 32, 64, 128, 256, 512, 1024, 2048, 4096],
            zero_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub name: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), name: "study".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSection {
    pub u: Vec<usize>,
    pub nu: Vec<usize>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: Problem,
    pub scheme: String,
    /// `n` values for the univariate problems, `ε` values for the MDM ones.
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Accuracy requested from the error evaluators.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_cost_model")]
    pub cost_model: String,
    /// Wall-clock budget; the sweep stops before the first point that
    /// starts after it is exhausted.
    #[serde(default = "default_runtime_cap")]
    pub runtime_cap_s: f64,
    /// Write measured run times; off by default so that outputs are a
    /// function of the configuration alone.
    #[serde(default)]
    pub record_runtime: bool,
    #[serde(default)]
    pub quad: QuadSection,
    #[serde(default)]
    pub approx: ApproxSection,
    #[serde(default)]
    pub mdm: MdmSection,
    #[serde(default)]
    pub test_function: Option<TestFunctionSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_cost_model() -> String {
    CostModel::default().to_string()
}

fn default_runtime_cap() -> f64 {
    600.0
}

/// A configuration with its parsed and validated components.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub raw: StudyConfig,
    pub scheme: WeightScheme,
    pub cost_model: CostModel,
    pub zero_bound: ZeroBound,
    pub test_function: Option<TestFunction>,
    pub tol: f64,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("study configurations serialize")
    }

    pub fn validate(&self) -> Result<ValidatedConfig> {
        let scheme: WeightScheme = self.scheme.parse()?;
        let cost_model: CostModel = self.cost_model.parse()?;
        if self.sweep.is_empty() {
            return Err(invalid("sweep grid is empty"));
        }
        if let Some(bad) = self.sweep.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(invalid(format!("sweep values must be positive and finite, got {bad}")));
        }
        let increasing = self.sweep.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.sweep.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(invalid("sweep grid must be strictly monotone"));
        }
        if !self.problem.is_mdm() {
            if let Some(bad) = self.sweep.iter().find(|v| v.fract() != 0.0 || **v < 2.0) {
                return Err(invalid(format!("univariate sweeps take integers n >= 2, got {bad}")));
            }
        }
        if !(self.runtime_cap_s > 0.0) {
            return Err(invalid(format!("runtime cap must be positive, got {}", self.runtime_cap_s)));
        }
        let tol = self.tol.unwrap_or(self.problem.default_tol());
        if !(tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        if self.quad.r == 0 || !(self.quad.delta > 0.0 && self.quad.delta < 0.25) {
            return Err(invalid(format!(
                "quadrature needs r >= 1 and delta in (0, 1/4), got r={}, delta={}",
                self.quad.r, self.quad.delta
            )));
        }
        if self.quad.max_level == 0 || self.quad.max_level > 20 {
            return Err(invalid(format!("quadrature max_level must lie in 1..=20, got {}", self.quad.max_level)));
        }
        if !(self.approx.basis_ratio > 0.0 && self.approx.basis_ratio <= 0.5) {
            return Err(invalid(format!("basis_ratio must lie in (0, 1/2], got {}", self.approx.basis_ratio)));
        }
        if self.approx.max_level == 0 || self.approx.max_level > 16 {
            return Err(invalid(format!("approx max_level must lie in 1..=16, got {}", self.approx.max_level)));
        }
        let zero_bound = match self.mdm.zero_bound.as_deref() {
            None if self.problem == Problem::MdmApprox => ZeroBound::Approximation,
            None => ZeroBound::Integration,
            Some("integration") => ZeroBound::Integration,
            Some("approximation") => ZeroBound::Approximation,
            Some(other) => {
                return Err(invalid(format!("zero_bound must be integration or approximation, got '{other}'")))
            }
        };
        if self.problem.is_mdm() {
            if scheme.is_univariate() {
                return Err(invalid("MDM studies need an infinite-variate or custom scheme"));
            }
            check_admissible(&scheme, self.mdm.kappa, self.mdm.delta)?;
            if !self.mdm.anchor.is_finite() {
                return Err(Error::NonFinite { what: "anchor", value: self.mdm.anchor });
            }
            for c in [self.mdm.c0, self.mdm.c1].into_iter().flatten() {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(invalid(format!("C0 and C1 must be positive, got {c}")));
                }
            }
            if self.mdm.c0.is_none() != self.mdm.c1.is_none() {
                return Err(invalid("give both C0 and C1, or neither to calibrate them"));
            }
        }
        let test_function = match &self.test_function {
            Some(t) => Some(TestFunction::new(t.u.clone(), t.nu.clone(), t.c.clone())?),
            None if self.problem == Problem::MdmApprox => Some(TestFunction::default_product()),
            None => None,
        };
        Ok(ValidatedConfig { raw: self.clone(), scheme, cost_model, zero_bound, test_function, tol })
    }
}
