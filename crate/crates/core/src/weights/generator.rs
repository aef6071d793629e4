//! Closed-form generators for real sequences indexed by `j = 1, 2, …`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// A parameter sequence `g_j` in one of three closed forms.
///
/// Restricting to closed forms keeps `ρ`, `Σ_j 2^{-g_j}` and the domain
/// comparison tests decidable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `g_j = value`.
    Constant { value: f64 },
    /// `g_j = first + step·(j − 1)`.
    Affine { first: f64, step: f64 },
    /// `g_j = base + scale·log2(j + offset)`.
    Logarithmic { base: f64, scale: f64, offset: f64 },
}

impl Generator {
    pub fn constant(value: f64) -> Self {
        Generator::Constant { value }
    }

    pub fn affine(first: f64, step: f64) -> Self {
        Generator::Affine { first, step }
    }

    pub fn logarithmic(base: f64, scale: f64) -> Self {
        Generator::Logarithmic { base, scale, offset: 0.0 }
    }

    pub fn logarithmic_shifted(base: f64, scale: f64, offset: f64) -> Self {
        Generator::Logarithmic { base, scale, offset }
    }

    /// Value at coordinate `j ≥ 1`.
    pub fn at(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        match *self {
            Generator::Constant { value } => value,
            Generator::Affine { first, step } => first + step * (j as f64 - 1.0),
            Generator::Logarithmic { base, scale, offset } => base + scale * (j as f64 + offset).log2(),
        }
    }

    pub fn first(&self) -> f64 {
        self.at(1)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let params: Vec<f64> = match *self {
            Generator::Constant { value } => vec![value],
            Generator::Affine { first, step } => vec![first, step],
            Generator::Logarithmic { base, scale, offset } => vec![base, scale, offset],
        };
        if let Some(&bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "generator parameter", value: bad });
        }
        if let Generator::Logarithmic { offset, .. } = *self {
            if offset <= -1.0 {
                return Err(invalid(format!("logarithmic generator needs offset > -1, got {offset}")));
            }
        }
        Ok(())
    }

    /// Whether `g_j` is non-decreasing in `j`.
    pub fn is_nondecreasing(&self) -> bool {
        match *self {
            Generator::Constant { .. } => true,
            Generator::Affine { step, .. } => step >= 0.0,
            Generator::Logarithmic { scale, .. } => scale >= 0.0,
        }
    }

    /// `liminf_j g_j · ln 2 / ln j`.
    pub fn log_growth(&self) -> f64 {
        match *self {
            Generator::Constant { .. } => 0.0,
            Generator::Affine { step, .. } => {
                if step > 0.0 {
                    f64::INFINITY
                } else if step == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Generator::Logarithmic { scale, .. } => scale,
        }
    }

    /// Two-sided bracket for `Σ_{j>J} 2^{−e·g_j}` (`e > 0`), or `None` when
    /// the series diverges.
    pub fn pow2_tail(&self, big_j: usize, e: f64) -> Option<(f64, f64)> {
        debug_assert!(e > 0.0);
        match *self {
            Generator::Constant { .. } => None,
            Generator::Affine { first, step } => {
                if step <= 0.0 {
                    return None;
                }
                let lead = (-e * (first + step * big_j as f64) * std::f64::consts::LN_2).exp();
                let value = lead / -(-e * step * std::f64::consts::LN_2).exp_m1();
                Some((value, value))
            }
            Generator::Logarithmic { base, scale, offset } => {
                let q = e * scale;
                if q <= 1.0 {
                    return None;
                }
                let c = (-e * base * std::f64::consts::LN_2).exp();
                let (first_term, start) = if big_j == 0 && offset <= 0.5 {
                    // The integral bound needs j + offset ≥ 1/2 at the lower end.
                    (c * (1.0 + offset).powf(-q), 1usize)
                } else {
                    (0.0, big_j)
                };
                // f(t) = c·(t + offset)^{−q} is convex and decreasing, so
                // ∫_{M}^∞ f + f(M)/2 ≤ Σ_{j≥M} f(j) ≤ ∫_{M−1/2}^∞ f.
                let m = start as f64 + 1.0;
                let integral = |t: f64| c * (t + offset).powf(1.0 - q) / (q - 1.0);
                let lo = integral(m) + 0.5 * c * (m + offset).powf(-q);
                let hi = integral(m - 0.5);
                Some((first_term + lo, first_term + hi))
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::Constant { value } => write!(f, "const:{value}"),
            Generator::Affine { first, step } => write!(f, "affine:{first},{step}"),
            Generator::Logarithmic { base, scale, offset } => {
                if offset == 0.0 {
                    write!(f, "log:{base},{scale}")
                } else {
                    write!(f, "log:{base},{scale},{offset}")
                }
            }
        }
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| invalid(format!("cannot parse number '{}'", s.trim())))
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (form, args) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("generator '{s}' must look like const:v, affine:a,s or log:b,s[,o]")))?;
        let nums = args.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
        let g = match (form.trim(), nums.as_slice()) {
            ("const", [v]) => Generator::constant(*v),
            ("affine", [a, st]) => Generator::affine(*a, *st),
            ("log", [b, sc]) => Generator::logarithmic(*b, *sc),
            ("log", [b, sc, o]) => Generator::logarithmic_shifted(*b, *sc, *o),
            _ => return Err(invalid(format!("unrecognised generator '{s}'"))),
        };
        g.validate()?;
        Ok(g)
    }
}
