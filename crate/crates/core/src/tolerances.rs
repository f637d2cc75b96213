//! Numerical tolerances used across the crate.
//!
//! Every threshold that decides a validation outcome or a numerical cutoff
//! lives here, so reports can echo them and tests can refer to them by name.

/// Hermiticity of operators, `max |M[i][j] - conj(M[j][i])|`.
pub const HERMITIAN: f64 = 1e-12;

/// Unit trace of a density operator.
pub const TRACE: f64 = 1e-10;

/// Smallest admissible eigenvalue of a density operator (negative dust).
pub const POSITIVITY: f64 = 1e-10;

/// Unitarity of bases and local operations, `max |U^dag U - I|`.
pub const UNITARY: f64 = 1e-10;

/// Projector check for fidelity targets, `max |P^2 - P|`.
pub const PROJECTOR: f64 = 1e-10;

/// Purity check: `1 - Tr rho^2` below this counts as pure.
pub const PURITY: f64 = 1e-9;

/// Jacobi sweeps stop once the off-diagonal Frobenius mass, relative to
/// `max(1, ||M||_F)`, falls below this.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-14;

/// Hard cap on cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues below this are clamped to zero before taking logarithms.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

/// Relative entropy support test: an eigenvalue of sigma below
/// `SUPPORT_SIGMA` carrying rho-weight above `SUPPORT_RHO` gives +inf.
pub const SUPPORT_SIGMA: f64 = 1e-12;
pub const SUPPORT_RHO: f64 = 1e-10;

/// Maximally-mixed preservation, max-entry deviation.
pub const PMM: f64 = 1e-10;

/// Spectral gap below which an eigenspace is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Second Schmidt coefficient below which a vector counts as product.
pub const PRODUCT_VECTOR: f64 = 1e-6;

/// Overlap tolerance for grouping local vectors in the IPB pattern test.
pub const IPB_PATTERN: f64 = 1e-6;

/// Slack allowed between optimizer-derived quantities that are equal in
/// exact arithmetic (monotonicity scan threshold).
pub const OPTIMIZER: f64 = 2e-4;

/// Slack in the ordering invariants of a bounds report.
pub const REPORT_ORDERING: f64 = 1e-6;

/// Largest total Hilbert-space dimension the IPB optimizer accepts.
pub const OPTIMIZER_DIM_CAP: usize = 64;

/// Slack when comparing an accumulated fidelity against a target.
pub const FIDELITY_TARGET: f64 = 1e-12;

/// Name and value of every tolerance, for report manifests.
pub fn echo() -> Vec<(&'static str, f64)> {
    vec![
        ("hermitian", HERMITIAN),
        ("trace", TRACE),
        ("positivity", POSITIVITY),
        ("unitary", UNITARY),
        ("projector", PROJECTOR),
        ("purity", PURITY),
        ("jacobi_off_diagonal", JACOBI_OFF_DIAGONAL),
        ("eigenvalue_clamp", EIGENVALUE_CLAMP),
        ("support_sigma", SUPPORT_SIGMA),
        ("support_rho", SUPPORT_RHO),
        ("pmm", PMM),
        ("degeneracy_gap", DEGENERACY_GAP),
        ("product_vector", PRODUCT_VECTOR),
        ("ipb_pattern", IPB_PATTERN),
        ("optimizer", OPTIMIZER),
        ("report_ordering", REPORT_ORDERING),
        ("fidelity_target", FIDELITY_TARGET),
    ]
}
