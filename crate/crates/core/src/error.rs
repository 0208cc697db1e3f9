use thiserror::Error;

/// Errors surfaced by the library layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (Frobenius deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("eigenphase {phase} too close to the -pi branch cut")]
    BranchCut { phase: f64 },

    #[error("parameter {name} = {value} outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: f64 },

    #[error("expected {expected} potentials for {found} partition parameters")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid step fractions: {0}")]
    BadFractions(String),

    #[error("lookup position {0} outside [0, 1)")]
    PositionOutOfRange(f64),

    #[error("omega must be positive, got {0}")]
    NonPositiveOmega(f64),

    #[error("inertia must be positive, got {0}")]
    NonPositiveInertia(f64),

    #[error("not a four-step protocol in canonical (alpha, beta) form")]
    NotFourStep,

    #[error("field magnitude {magnitude:.3e} below diabolical guard at tau = {tau}")]
    NearDiabolical { tau: f64, magnitude: f64 },

    #[error("field direction not invariant on segment {segment} (deviation {deviation:.3e})")]
    DirectionNotInvariant { segment: String, deviation: f64 },

    #[error("trajectory endpoints differ on the sphere by {gap:.3e}")]
    TrajectoryNotClosed { gap: f64 },

    #[error("unknown builtin path `{0}`")]
    UnknownPath(String),

    #[error("path is discontinuous at tau = {tau} (jump {jump:.3e})")]
    PathDiscontinuous { tau: f64, jump: f64 },

    #[error("path leaves the unit square at tau = {tau}: ({alpha}, {beta})")]
    PathOutOfSquare { tau: f64, alpha: f64, beta: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("state vector is not normalized (norm {0})")]
    UnnormalizedState(f64),

    #[error("could not place a solid-angle reference point away from the trajectory")]
    ReferencePoint,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
