//! Numerical tolerances, centralized so the library and its tests agree on
//! what "equal" means. All values are absolute unless noted.

/// Entrywise deviation allowed between a matrix and its adjoint.
pub const HERMITICITY: f64 = 1e-12;

/// Reconstruction residual `max |V L V^dag - A|` accepted from the eigensolver.
pub const EIG_RESIDUAL: f64 = 1e-9;

/// Eigenvalues above `-PSD_SLACK` count as nonnegative.
pub const PSD_SLACK: f64 = 1e-10;

/// Allowed deviation of a density matrix trace from 1.
pub const DENSITY_TRACE: f64 = 1e-10;

/// Minimum eigenvalue tolerated in a POVM effect.
pub const POVM_EFFECT_PSD: f64 = 1e-9;

/// Entrywise deviation of a POVM's effect sum from the identity.
pub const POVM_COMPLETENESS: f64 = 1e-9;

/// Hermiticity slack for assembled information-channel matrices.
pub const MIC_HERMITICITY: f64 = 1e-10;

/// PSD slack for information-channel spectra.
pub const MIC_PSD: f64 = 1e-8;

/// Allowed gap between the channel matrix trace and its closed form.
pub const MIC_TRACE_IDENT: f64 = 1e-8;

/// Effects with trace below this are dropped from channel sums.
pub const EFFECT_TRACE_FLOOR: f64 = 1e-12;

/// Born probability vectors must sum to 1 within this before renormalizing.
pub const BORN_SUM: f64 = 1e-8;

/// Born entries in `[-BORN_CLIP, 0)` are clipped to zero; anything lower is an error.
pub const BORN_CLIP: f64 = 1e-10;

/// Trace slack for perturbation-basis directions (must be traceless).
pub const BASIS_TRACELESS: f64 = 1e-10;

/// Orthonormality slack for perturbation-basis directions.
pub const BASIS_ORTHO: f64 = 1e-10;

/// Residual allowed in `state - (mixed + delta)` for hard instances.
pub const INSTANCE_RESIDUAL: f64 = 1e-12;

/// Slack on the clamped perturbation operator-norm cap `1/(2d)`.
pub const CLAMP_SLACK: f64 = 1e-12;

/// Within-basis orthonormality slack for mutually unbiased bases.
pub const MUB_ORTHO: f64 = 1e-9;

/// Cross-basis overlap slack: `| |<u|v>|^2 - 1/d |` must stay below this.
pub const MUB_UNBIASED: f64 = 1e-9;

/// Frequency rows must sum to 1 within this unless flagged empty.
pub const FREQ_ROW_SUM: f64 = 1e-12;
