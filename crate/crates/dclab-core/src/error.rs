//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown root system family `{0}`")]
    UnknownFamily(String),
    #[error("rank {rank} not supported for family {family} (supported: {supported})")]
    RankUnsupported {
        family: String,
        rank: usize,
        supported: String,
    },
    #[error("multiplicity map is not constant on Weyl orbits")]
    MultiplicityNotOrbitConstant,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not in the lattice")]
    NotInLattice,
    #[error("weight is not in the weight lattice")]
    NotInWeightLattice,
    #[error("operator flavors do not match")]
    FlavorMismatch,
    #[error("singular evaluation point")]
    SingularPoint,
    #[error("all sampled points were singular")]
    AllPointsSingular,
    #[error("division by zero in exact evaluation")]
    DivisionByZero,
    #[error("unassigned symbol `{0}` in evaluation")]
    UnassignedSymbol(String),
    #[error("exact evaluation is not defined for elliptic primitives")]
    ExactOnElliptic,
    #[error("nonzero remainder: operator does not preserve the polynomial space")]
    NonzeroRemainder,
    #[error("coefficient has a pole at hbar = 0")]
    PoleAtHbarZero,
    #[error("operator has a nontrivial group part")]
    GroupPartPresent,
    #[error("theta series truncation needs more than {0} terms")]
    ThetaTermCap(usize),
    #[error("pole proximity in elliptic evaluation")]
    PoleProximity,
    #[error("unsupported derivative order {0}")]
    DerivOrderUnsupported(u8),
    #[error("polynomial is not W-invariant")]
    NotInvariant,
    #[error("matrices do not define a representation: {0}")]
    NotARepresentation(String),
    #[error("degenerate spectrum at the chosen parameters; resample")]
    DegenerateSpectrum,
    #[error("lower-set enumeration exceeded the configured cap {0}")]
    LowerSetCap(usize),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("extrapolation did not converge (estimate {0:.3e})")]
    ExtrapolationDiverged(f64),
    #[error("spectral point lies on a pole locus")]
    SpectralPole,
    #[error("{0} requires a (quasi-)minuscule coweight")]
    NotMinuscule(String),
    #[error("trajectory hit a pole at t = {0}")]
    TrajectoryPole(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}
