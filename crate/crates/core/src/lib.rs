//! Step-driven Floquet systems: effective Hamiltonians for
//! partition-parameterized driving protocols, an exact one-period
//! propagator oracle, and adiabatic analysis of paths in the
//! partition-parameter square.

pub mod adiabatic;
pub mod cli;
pub mod effective;
pub mod error;
pub mod operator;
pub mod path;
pub mod protocol;
pub mod spin;
pub mod verify;

pub use effective::{
    compare_models, exact_floquet, h_eff_paper, ComparisonReport, EffectiveModel,
    HarmonicTruncation, ModelMode,
};
pub use error::{Error, Result};
pub use operator::{
    commutator, evolve, principal_log, spin_half_operators, ComplexMatrix, HermitianOperator,
    UnitaryOperator,
};
pub use protocol::{
    four_step_params, four_step_protocol, generalized_protocol, partition_fractions,
    zero_sum_check, PartitionParams, StepProtocol,
};
pub use spin::{
    band_surface, diabolical_scan, invariant_segments, kick_field, max_field, spectrum,
    spin_potentials, synthetic_field, synthetic_field_gradient, BandSurface, DegeneracyScan,
    DriveConstants, InvariantSegment, SyntheticField,
};
