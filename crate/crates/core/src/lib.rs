//! Stokes eigenbasis of a 3D box under Lions boundary conditions, exact triad
//! interaction coefficients of the Navier-Stokes nonlinearity, verification
//! of the saturating-set recursion with auditable certificates, and a
//! controlled Galerkin model with adjoint-based steering.

pub mod error;
pub mod exact;
pub mod galerkin;
pub mod interaction;
pub mod io;
pub mod saturation;
pub mod spectral_basis;

pub use error::{Error, Result};
pub use galerkin::{ControlSchedule, GalerkinSystem, Segment, SteerOptions, SteerResult, Trajectory};
pub use interaction::{
    advection_sym, beta, bilinear_sym, project, self_advection, FieldExpansion, InteractionTerm, SignTriple,
};
pub use saturation::{
    paper_trace, saturate, seed_set, Certificate, CertificateRecord, ModeSet, RankEvidence, SaturationReport,
};
pub use spectral_basis::{
    eigenvalue, enumerate_frequencies, enumerate_modes, l2_norm_sq, perp_basis, Basis, DomainSpec, EigenMode,
    Frequency, ModeIndex, TrigVectorField,
};
