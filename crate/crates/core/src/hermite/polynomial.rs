//! L2(μ0)-orthonormal (probabilists') Hermite polynomials.

use crate::error::{Error, Result};

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "argument", value: x })
    }
}

/// Value of the normalized Hermite polynomial `h_nu` at `x`.
///
/// Uses the forward recurrence
/// `h_nu(x) = (x·h_{nu-1}(x) − sqrt(nu−1)·h_{nu-2}(x)) / sqrt(nu)`
/// started from `h_0 = 1`, `h_1 = x`.
pub fn hermite_eval(nu: usize, x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(hermite_unchecked(nu, x))
}

#[inline]
pub(crate) fn hermite_unchecked(nu: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if nu == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 2..=nu {
        let next = (x * cur - ((k - 1) as f64).sqrt() * prev) / (k as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `(h_0(x), …, h_{nu_max}(x))`.
pub fn hermite_column(nu_max: usize, x: f64) -> Result<Vec<f64>> {
    check_finite(x)?;
    let mut col = Vec::with_capacity(nu_max + 1);
    fill_column(nu_max, x, &mut col);
    Ok(col)
}

/// Writes `h_0(x), …, h_{nu_max}(x)` into `out` (cleared first).
pub(crate) fn fill_column(nu_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if nu_max == 0 {
        return;
    }
    out.push(x);
    for k in 2..=nu_max {
        let next = (x * out[k - 1] - ((k - 1) as f64).sqrt() * out[k - 2]) / (k as f64).sqrt();
        out.push(next);
    }
}

/// Streaming evaluator of `h_nu(x)` for increasing `nu`.
#[derive(Debug, Clone)]
pub(crate) struct HermiteStream {
    x: f64,
    nu: usize,
    prev: f64,
    cur: f64,
}

impl HermiteStream {
    pub(crate) fn new(x: f64) -> Self {
        Self { x, nu: 0, prev: 0.0, cur: 1.0 }
    }

    /// Current degree and value.
    pub(crate) fn current(&self) -> (usize, f64) {
        (self.nu, self.cur)
    }

    pub(crate) fn advance(&mut self) {
        let k = self.nu + 1;
        let next =
            if k == 1 { self.x } else { (self.x * self.cur - ((k - 1) as f64).sqrt() * self.prev) / (k as f64).sqrt() };
        self.prev = self.cur;
        self.cur = next;
        self.nu = k;
    }
}
