//! Crate-wide error type.
//!
//! Every fallible layer shares one enum so that errors propagate with `?`
//! across the kernel → curve → lattice → analytic stack without wrapper
//! boilerplate. Variants are grouped by the layer that raises them.

use thiserror::Error;

/// Errors raised anywhere in the computational stack.
#[derive(Debug, Clone, Error)]
pub enum Error {
    // ---- series kernel ----
    /// Inversion or division where every known coefficient of the divisor
    /// vanishes; the divisor may be zero or merely too imprecise to tell.
    #[error("division by apparent zero (all known coefficients vanish below precision {prec})")]
    DivisionByApparentZero { prec: i64 },
    /// An operation required coefficients beyond the available precision.
    #[error("precision exhausted: needed absolute precision {needed}, have {have}")]
    PrecisionExhausted { needed: i64, have: i64 },
    /// A root or inverse twist would push the ramification index past the cap.
    #[error("ramification overflow: index {required} exceeds cap {cap}")]
    RamificationOverflow { required: u64, cap: u64 },
    /// An m-th root was requested of something that is not a one-unit
    /// (or whose leading data admits no root in the coefficient field).
    #[error("not a one-unit: valuation {val} in 1/{e} units obstructs the root")]
    NotOneUnit { val: i64, e: u32 },

    // ---- curve layer ----
    /// Coordinates failed the curve equation.
    #[error("point not on curve (equation residual has valuation {residual})")]
    PointNotOnCurve { residual: i64 },
    /// A function was evaluated at a point where it has a pole.
    #[error("pole at the evaluation point (order {order})")]
    PoleAtPoint { order: i64 },
    /// No admissible local parameter at the requested point.
    #[error("uniformizer unavailable at the requested point")]
    UniformizerUnavailable,
    /// A linear system that the theory promises to be nonsingular was not.
    #[error("singular linear system in {context}")]
    SingularLinearSystem { context: &'static str },

    // ---- ideal lattice ----
    /// The zero module was passed where an invertible ideal is required.
    #[error("zero ideal")]
    ZeroIdeal,
    /// Enumeration or factorization needs degrees beyond the configured cutoff.
    #[error("cutoff exceeded: needed degree {needed}, cutoff {cutoff}")]
    CutoffExceeded { needed: i64, cutoff: i64 },
    /// Trial division left a nontrivial cofactor below the prime table's reach.
    #[error("factorization incomplete at degree {degree}")]
    FactorizationIncomplete { degree: i64 },

    // ---- Hilbert/Drinfeld layer ----
    /// A Newton or fixed-point iteration failed to contract.
    #[error("newton iteration diverged in {context} (defect valuation {defect})")]
    NewtonDivergence { context: &'static str, defect: i64 },
    /// A series could not be identified with an exact algebraic element.
    #[error("recognition failure in {context}")]
    RecognitionFailure { context: &'static str },
    /// The formal-group fixed point drifted out of the convergence region.
    #[error("formal-group iteration diverged (distance valuation {val})")]
    FormalGroupDivergence { val: i64 },
    /// A skew-polynomial division hit a non-invertible leading coefficient.
    #[error("non-invertible leading coefficient in skew division")]
    NonInvertibleLeadingCoefficient,
    /// The Frobenius congruence matched no or several Galois candidates.
    #[error("ambiguous Frobenius at prime of degree {degree}: {matches} candidates matched")]
    AmbiguousFrobenius { degree: i64, matches: usize },

    // ---- tensor-power layer ----
    /// The Sylvester-type recursion hit a singular step.
    #[error("singular Sylvester step at index {index}")]
    SylvesterSingular { index: usize },
    /// Two residue routes disagreed beyond tolerance.
    #[error("residue mismatch in {context} (agreement only to valuation {val})")]
    ResidueMismatch { context: &'static str, val: i64 },
    /// A functional equation left a residual above tolerance.
    #[error("functional-equation residual in {context} at valuation {val}")]
    FunctionalEquationResidual { context: &'static str, val: i64 },
    /// The t-truncation order is too small for the requested object.
    #[error("t-truncation too small: need {needed} terms, have {have}")]
    TruncationTooSmall { needed: usize, have: usize },
    /// A series expansion failed to converge within its budget.
    #[error("expansion diverged in {context}")]
    ExpansionDivergence { context: &'static str },
    /// An evaluation point lies outside the convergence region.
    #[error("outside convergence region: valuation {val} below bound {bound}")]
    OutsideConvergenceRegion { val: i64, bound: i64 },

    // ---- motive layer ----
    /// A matrix identity that must hold exactly or to tolerance did not.
    #[error("identity residual in {context} at valuation {val}")]
    IdentityResidual { context: &'static str, val: i64 },
    /// Specialization at t = θ hit a pole.
    #[error("pole at the θ-specialization in {context}")]
    PoleAtTheta { context: &'static str },

    // ---- zeta engine ----
    /// A finite-module computation exceeded the brute-force cap.
    #[error("module too large for brute-force lattice search (dimension {dim})")]
    ModuleTooLarge { dim: usize },
    /// Negative-special-value coefficients did not stabilize inside the cutoff.
    #[error("stabilization not reached by degree {cutoff}")]
    StabilizationNotReached { cutoff: i64 },
    /// Honest recognition failure (required behavior on random input).
    #[error("not recognized: no exact element matches within the given bounds")]
    NotRecognized,

    // ---- CLI / report ----
    /// Configuration failed validation.
    #[error("invalid configuration: {reason}")]
    ConfigInvalid { reason: String },
    /// Report emission failed.
    #[error("io error: {reason}")]
    IoError { reason: String },
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoError { reason: e.to_string() }
    }
}
