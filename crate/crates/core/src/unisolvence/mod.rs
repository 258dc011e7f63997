//! Monte Carlo checks that `V_n` is nonsingular for random nodes, plus
//! numerical probes of the determinant and branch-point arguments behind
//! that claim.

mod branch;
mod exact;
mod laplace;
mod oracle;
mod trials;

pub use branch::{
    argument_margin, branch_analyticity_check, branch_value, per_node_branch_check, pick_direction,
    with_max_last, ArgumentMargin, BranchClass, BranchEntry, BranchReport, Direction, MarginCase,
    ProofCase,
};
pub use laplace::{
    bordered_matrix, laplace_quadratic_decompose, reuse_weights, weight_stability, CofactorWeights,
    QuadraticDecomposition, MAX_DECOMPOSITION_N,
};
pub use oracle::{det_oracle, det_oracle_matrix, MAX_ORACLE_N};
pub use trials::{
    run_trials, summary_json, trial_csv, RankStatus, TrialConfig, TrialRecord, TrialRun,
    TrialSummary, MAX_TRIAL_N, TRIAL_CSV_HEADER,
};
