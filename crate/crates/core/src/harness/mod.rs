//! Study configuration, sweeps, test functions, invariant suites and
//! report emission.

mod checks;
mod config;
mod emit;
mod study;
mod testfn;

pub use checks::{
    all_checks, anchor_optimality, anchored_decomposition, diagonal_monotonicity, domain_counterexample,
    stechkin_consistency, CheckOutcome,
};
pub use config::{
    ApproxSection, MdmSection, OutputSection, Problem, QuadSection, StudyConfig, TestFunctionSection, ValidatedConfig,
};
pub use emit::{emit, render, to_csv, to_json_lines, to_plot_data, Format, CSV_COLUMNS};
pub use study::{fit_rate, run_study, target_rate, Row, RowExtra, StudyReport, Summary};
pub use testfn::{eval_test_function, TestFunction};
