//! Product test functions `f(x) = ∏_{j∈u}(1 + c_j h_{ν_j}(x_j))`.
//!
//! Each factor is orthogonal to the constants, so `∫ f dμ = 1`, and the
//! factors are orthogonal in `H(K)`, which gives the norm in closed form.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::hermite::{hermite_eval, AnchoredPoint};
use crate::mdm::HermiteExpansion;
use crate::weights::WeightScheme;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    u: Vec<usize>,
    nu: Vec<usize>,
    c: Vec<f64>,
}

impl TestFunction {
    pub fn new(u: Vec<usize>, nu: Vec<usize>, c: Vec<f64>) -> Result<Self> {
        if u.len() != nu.len() || u.len() != c.len() {
            return Err(invalid(format!(
                "test function needs equally many indices, degrees and coefficients, got {}, {}, {}",
                u.len(),
                nu.len(),
                c.len()
            )));
        }
        if u.first().is_some_and(|&j| j == 0) || u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("test function coordinates must be strictly increasing and start at 1 or later"));
        }
        if nu.contains(&0) {
            return Err(invalid("test function degrees must be at least 1"));
        }
        if let Some(bad) = c.iter().find(|c| !c.is_finite()) {
            return Err(invalid(format!("test function coefficient {bad} is not finite")));
        }
        Ok(Self { u, nu, c })
    }

    /// The function used when a study does not name one:
    /// `(1 + ½h_1(x_1))(1 + 0.3h_2(x_2))(1 + 0.2h_1(x_3))`.
    pub fn default_product() -> Self {
        Self { u: vec![1, 2, 3], nu: vec![1, 2, 1], c: vec![0.5, 0.3, 0.2] }
    }

    pub fn support(&self) -> &[usize] {
        &self.u
    }

    /// `∫ f dμ`.
    pub fn integral(&self) -> f64 {
        1.0
    }

    /// `‖f‖_{H(K)} = ∏_{j∈u}(1 + c_j² α_{ν_j,j})^{1/2}`.
    pub fn norm(&self, scheme: &WeightScheme) -> f64 {
        self.factors().map(|(j, nu, c)| (1.0 + c * c * scheme.alpha(nu, j)).sqrt()).product()
    }

    /// Hermite coefficients: `∏_{j∈v} c_j` on `∏_{j∈v} h_{ν_j}` for `v ⊆ u`.
    pub fn expansion(&self) -> HermiteExpansion {
        let mut out = HermiteExpansion::default();
        for mask in 0u64..1 << self.u.len() {
            let mut key = Vec::new();
            let mut coefficient = 1.0;
            for (t, (j, nu, c)) in self.factors().enumerate() {
                if mask >> t & 1 == 1 {
                    key.push((j, nu));
                    coefficient *= c;
                }
            }
            out.add(key, coefficient);
        }
        out
    }

    fn factors(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.u.iter().zip(&self.nu).zip(&self.c).map(|((&j, &nu), &c)| (j, nu, c))
    }
}

/// `∏_{j∈u}(1 + c_j h_{ν_j}(x_j))`, inactive coordinates sitting at the
/// anchor.
pub fn eval_test_function(tf: &TestFunction, x: &AnchoredPoint) -> f64 {
    tf.factors().map(|(j, nu, c)| 1.0 + c * hermite_eval(nu, x.coordinate(j)).expect("degrees are validated")).product()
}
