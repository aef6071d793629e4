//! Infinite-variate integration and approximation by the multivariate
//! decomposition method.
//!
//! An MDM evaluates `f(a) + Σ_{u∈𝒜} A_{u,n_u}(f_u)` where `f_u` are the
//! anchored components of `f` and `A_{u,n_u}` are Smolyak rules on the
//! finitely many variables in `u`.

mod approx;
mod bounds;
mod cost;
mod decomposition;
mod flat;
mod gram;
mod plan;
mod smolyak;

pub use crate::weights::gamma_u;
pub use approx::{mdm_approximate, smolyak_approx, ApproxFamily, ApproxOutcome, HermiteExpansion};
pub use bounds::{
    calibrate, mdm_cost, mdm_cost_bound, mdm_error_bound, Calibration, CalibrationSample, CostReport, ErrorBound,
    ZeroBound,
};
pub use cost::CostModel;
pub use decomposition::{anchored_component, anchored_component_points};
pub use flat::{assemble, worst_case_error_k, FlatRule};
pub use gram::tensor_error;
pub use plan::{budget, check_admissible, l_constant, plan, ActiveSet, MdmPlan, PlanParams, MAX_ACTIVE_SETS};
pub use smolyak::{
    select_levels, smolyak_error_bound, smolyak_rule, LevelSet, QuadFamily, SmolyakRule, DEFAULT_MAX_LEVEL,
};
