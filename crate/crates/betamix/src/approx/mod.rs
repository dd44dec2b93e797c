//! Constructive approximation of smooth densities by Beta mixtures:
//! mixing-density correction for the continuous stage, moment-matched
//! discretization for the finite stage.

pub mod continuous;
pub mod discrete;

pub use continuous::{
    approx_rate_report, build_f1, build_f1_steps, correct_once, corrected_mixture_pdf,
    correction_steps, defect_exact, rate_sup_grid, uniform_defect, CorrectedDensity,
    CorrectionLedger, CorrectionStep, DefectTable, RateReport, RateRow,
};
pub use discrete::{
    atom_budget, discrete_kl_report, discretize, discretize_with_info, floor_weights,
    mixture_l1_distance, support_grid, DiscreteKlRow, DiscretizeInfo, SupportGrid,
    DEFAULT_FLOOR_A, DEFAULT_M, DEFAULT_NODES_PER_CELL, DEFAULT_T0,
};
