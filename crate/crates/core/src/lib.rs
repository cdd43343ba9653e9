//! Persuasion problems with one-dimensional actions and states under the
//! first-order approach: the discretized primal LP and its duals, contact
//! sets and certificates, structural classifiers, and the negative
//! assortative disclosure boundary-value solver.

pub mod dual;
pub mod error;
pub mod fixtures;
pub mod lp;
pub mod model;
pub mod nad;
pub mod prior;
pub mod problem;
pub mod structure;

pub use dual::{
    compute_q_interval, contact_set, default_eps_gamma, foc_residual, q_closed_form, select_q,
    verify_support_optimality, ContactSet, DualCertificate, SelectionRule,
};
pub use error::{Bound, Error, Result};
pub use lp::{
    build_primal, duality_gap, solve_lp, solve_lp_with, value_under, LpSolution, LpStatus,
    PersuasionLp, PivotRule, SolveOptions,
};
pub use model::{
    check_aggregate_quasiconcavity, check_strict_single_crossing, receiver_best_response,
    theta_star, Family, PreferenceModel,
};
pub use nad::{nad_rhs, nad_shoot, nad_verify, sand_lever_assign, NadSolution, Orientation};
pub use prior::{Density, Posterior, Prior};
pub use problem::{uniform_grid, DiscreteProblem, Outcome};
pub use structure::{
    assemble_report, check_sdpd_conditions, classify_dippedness, full_disclosure_test,
    improving_direction, local_nd_sdd_test, pairwise_split, pooling_test, r_matrix,
    remove_single_peaked_triples, structure_report, twist_determinant, twist_scan,
    variational_scan, AssortativeVerdict, Dippedness, StructureReport,
};
