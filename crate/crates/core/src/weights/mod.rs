//! Fourier-weight schemes and the constants derived from them.

mod constants;
mod decay;
mod domain;
mod generator;
mod scheme;

pub use constants::{
    beta_sequence, c_down, c_up, c_up_enclosure, c_up_product, gamma, gamma_power_tail, gamma_u, m_down, rho,
};
pub use decay::{decay_estimate, DecayFit};
pub use domain::{domain_check, Domain, DomainVerdict, SequenceSpec, Verdict};
pub use generator::Generator;
pub use scheme::{CustomRow, SchemeKind, TailRule, WeightScheme};
