use thiserror::Error;

/// Which end of the action interval a boundary optimum sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("u(a,.) has constant sign on the state interval at a = {a}; assumption 3 normalization violated")]
    NoRoot { a: f64 },

    #[error("first-order condition has no interior root; optimum at {0:?} bound")]
    BoundaryOptimum(Bound),

    #[error("LP would have {vars} variables, above the cap of {cap}")]
    GridTooLarge { vars: usize, cap: usize },

    #[error("LP is infeasible (phase-1 residual {residual:.3e}); discretization admits no obedient outcome")]
    Infeasible { residual: f64 },

    #[error("simplex hit the iteration limit of {0}")]
    IterationLimit(usize),

    #[error("Q({a}) is empty: price function is not dual-feasible at this action (gap {gap:.3e})")]
    EmptyQ { a: f64, gap: f64 },

    #[error("degenerate state pair |t2 - t1| = {0:.3e} < 1e-10")]
    DegeneratePair(f64),

    #[error("triple scan over {0} candidates exceeds the cap")]
    ScanTooLarge(usize),

    #[error("posterior u-moment {0:.3e} at the proposed action is not zero")]
    MomentNonzero(f64),

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("2x2 system is singular at a = {a} (determinant {det:.3e})")]
    SingularSystem { a: f64, det: f64 },

    #[error("shooting bracket failure: residual {lo:.3e} at a_hi = {a_lo_end}, {hi:.3e} at a_hi = {a_hi_end}")]
    BracketFailure {
        a_lo_end: f64,
        a_hi_end: f64,
        lo: f64,
        hi: f64,
    },

    #[error("sand-lever budget at theta = {theta} exhausted by {deficit:.3e}")]
    BudgetExhausted { theta: f64, deficit: f64 },

    #[error("prior has atoms; the NAD path requires a density prior (use the LP path instead)")]
    AtomPrior,

    #[error("unknown fixture id `{0}`")]
    UnknownFixture(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
