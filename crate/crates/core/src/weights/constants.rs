//! Constants derived from a weight scheme: `γ_j`, `ρ`, `c↑`, `C↑`, `c↓`, `β_n`.

use crate::error::{invalid, Error, Result};
use crate::hermite::{kernel_value, KernelEvalResult};
use crate::numerics::CompensatedSum;

use super::scheme::{SchemeKind, TailRule, WeightScheme};

/// `γ_j = sup_{ν≥1} α_{ν,1}/α_{ν,j}`.
///
/// For the closed-form families this is `2^{r_1 − r_j}`; custom tables are
/// scanned explicitly and their tail rules compared analytically.
pub fn gamma(scheme: &WeightScheme, j: usize) -> Result<f64> {
    if j == 0 {
        return Err(invalid("coordinate indices start at 1"));
    }
    if j == 1 {
        return Ok(1.0);
    }
    if scheme.is_univariate() {
        return Err(Error::Unsupported("γ_j for j > 1 on a univariate scheme".into()));
    }
    match scheme.kind() {
        SchemeKind::Polynomial { r } | SchemeKind::Exponential { r, .. } => Ok((r.first() - r.at(j)).exp2()),
        SchemeKind::Custom { rows } => {
            let Some(row_j) = rows.get(j - 1) else { return Ok(0.0) };
            let row_1 = &rows[0];
            let explicit = row_1.alpha.len().max(row_j.alpha.len()) + 1;
            let mut sup: f64 = 0.0;
            for nu in 1..=explicit {
                let (a1, aj) = (scheme.alpha(nu, 1), scheme.alpha(nu, j));
                match (a1.is_finite(), aj.is_finite()) {
                    (true, true) => sup = sup.max(a1 / aj),
                    (false, true) => return Err(Error::UnboundedRatio { j }),
                    _ => {}
                }
            }
            // Beyond the tables both rows follow their tail rules.
            match (row_1.tail, row_j.tail) {
                (TailRule::Vanishing, TailRule::Polynomial { .. }) => Err(Error::UnboundedRatio { j }),
                (TailRule::Polynomial { r: r1 }, TailRule::Polynomial { r: rj }) if rj < r1 => {
                    Err(Error::UnboundedRatio { j })
                }
                _ => Ok(sup),
            }
        }
    }
}

/// `γ_u = ∏_{j∈u} γ_j`; the empty set gives 1.
pub fn gamma_u(scheme: &WeightScheme, u: &[usize]) -> Result<f64> {
    u.iter().try_fold(1.0, |acc, &j| Ok(acc * gamma(scheme, j)?))
}

/// Bracket for `Σ_{j>J} γ_j^e`, `e > 0`.
pub fn gamma_power_tail(scheme: &WeightScheme, big_j: usize, e: f64) -> Result<(f64, f64)> {
    if !(e > 0.0) {
        return Err(invalid(format!("exponent must be positive, got {e}")));
    }
    if scheme.is_univariate() {
        return Err(Error::Unsupported("coordinate sums of a univariate scheme".into()));
    }
    match scheme.kind() {
        SchemeKind::Polynomial { r } | SchemeKind::Exponential { r, .. } => {
            let scale = (e * r.first()).exp2();
            let (lo, hi) = r.pow2_tail(big_j, e).ok_or_else(|| Error::Divergent(format!("sum of gamma_j^{e}")))?;
            Ok((scale * lo, scale * hi))
        }
        SchemeKind::Custom { rows } => {
            let mut acc = CompensatedSum::new();
            for j in big_j + 1..=rows.len() {
                acc.add(gamma(scheme, j)?.powf(e));
            }
            Ok((acc.value(), acc.value()))
        }
    }
}

/// `ρ = liminf_j r_j·ln 2 / ln j`, from the closed form of the generator.
pub fn rho(scheme: &WeightScheme) -> Result<f64> {
    if scheme.is_univariate() {
        return Err(Error::Unsupported("rho of a univariate scheme".into()));
    }
    match scheme.kind() {
        SchemeKind::Polynomial { r } | SchemeKind::Exponential { r, .. } => Ok(r.log_growth()),
        SchemeKind::Custom { .. } => Err(Error::Unsupported("rho needs a closed-form r_j generator".into())),
    }
}

/// `c↑(a) = 1 + k_1(a, a)` with its enclosure radius.
pub fn c_up_enclosure(scheme: &WeightScheme, a: f64, tol: f64) -> Result<KernelEvalResult> {
    let k = kernel_value(scheme, 1, a, a, tol)?;
    Ok(KernelEvalResult { value: 1.0 + k.value, ..k })
}

pub fn c_up(scheme: &WeightScheme, a: f64, tol: f64) -> Result<f64> {
    Ok(c_up_enclosure(scheme, a, tol)?.value)
}

/// Largest number of factors evaluated for `C↑(a)`.
const PRODUCT_CAP: usize = 10_000_000;

/// `C↑(a) = ∏_j (1 + γ_j c↑(a))^{1/2}`.
///
/// The returned value is an upper bound that exceeds the true constant by
/// at most `tol`, which is the direction needed wherever it enters an error
/// bound.
pub fn c_up_product(scheme: &WeightScheme, a: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let total = gamma_power_tail(scheme, 0, 1.0)?.1;
    let rough_c = c_up_enclosure(scheme, a, 1e-6)?;
    let rough = (0.5 * (rough_c.value + rough_c.tail_bound) * total).exp();
    let c_tol = (tol / (2.0 * rough * total.max(1.0))).min(1e-6);
    let c = c_up_enclosure(scheme, a, c_tol)?;
    let c_hi = c.value + c.tail_bound;

    let big_j = match scheme.active_coordinates() {
        Some(n) => n,
        None => {
            let tail_ok = |jj: usize| -> Result<bool> {
                Ok(rough * 0.5 * c_hi * gamma_power_tail(scheme, jj, 1.0)?.1 <= 0.5 * tol)
            };
            let mut hi = 16usize;
            while !tail_ok(hi)? {
                if hi >= PRODUCT_CAP {
                    let best = rough * 0.5 * c_hi * gamma_power_tail(scheme, hi, 1.0)?.1;
                    return Err(Error::ToleranceUnreachable { requested: tol, best });
                }
                hi = (hi * 2).min(PRODUCT_CAP);
            }
            hi
        }
    };
    let tail = match scheme.active_coordinates() {
        Some(_) => 0.0,
        None => gamma_power_tail(scheme, big_j, 1.0)?.1,
    };
    let mut log_sum = CompensatedSum::new();
    for j in 1..=big_j {
        log_sum.add((gamma(scheme, j)? * c_hi).ln_1p());
    }
    Ok((0.5 * (log_sum.value() + c_hi * tail)).exp())
}

/// `c↓(a) = (1 + α_{1,1} + a²)^{−1}`.
pub fn c_down(scheme: &WeightScheme, a: f64) -> f64 {
    1.0 / (1.0 + scheme.alpha(1, 1) + a * a)
}

/// The lower-bound kernel `m↓_a(x, y) = c↓(a)·(x − a)(y − a)`.
pub fn m_down(scheme: &WeightScheme, a: f64, x: f64, y: f64) -> f64 {
    c_down(scheme, a) * (x - a) * (y - a)
}

/// Explicit summation limit for [`beta_sequence`].
const BETA_CAP: usize = 1 << 25;

/// `β_n = ((1/n) Σ_{ν≥n} α_{ν,j}^{−1})^{1/2}` to absolute accuracy `tol`.
pub fn beta_sequence(scheme: &WeightScheme, j: usize, n: usize, tol: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("beta_n needs n >= 1"));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    if scheme.nu_tail(j, n).1.is_infinite() {
        return Err(Error::Divergent(format!("sum of 1/alpha_nu for coordinate {j}")));
    }
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    let mut upto = n - 1;
    let mut limit = (2 * n).max(n + 64);
    loop {
        for nu in upto + 1..=limit {
            acc.add(scheme.inv_alpha(nu, j));
        }
        upto = limit;
        let (lo, hi) = scheme.nu_tail(j, upto);
        let b_lo = ((acc.value() + lo) / nf).sqrt();
        let b_hi = ((acc.value() + hi) / nf).sqrt();
        if 0.5 * (b_hi - b_lo) <= tol {
            return Ok(0.5 * (b_lo + b_hi));
        }
        if limit >= BETA_CAP {
            return Err(Error::ToleranceUnreachable { requested: tol, best: 0.5 * (b_hi - b_lo) });
        }
        limit = (limit * 2).min(BETA_CAP);
    }
}
