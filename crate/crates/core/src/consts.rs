//! Centralized numerical tolerances and size guards.
//!
//! All tolerances are absolute unless the name says otherwise. Operations
//! take them from here instead of hard-coding magic numbers.

/// Hermiticity check at construction of `HermitianOperator` / `DensityMatrix`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// |tr(rho) - 1| allowed at `DensityMatrix` construction.
pub const TRACE_TOL: f64 = 1e-10;

/// Minimum eigenvalue allowed at `DensityMatrix` construction (slightly
/// negative to absorb rounding in products of valid factors).
pub const PSD_TOL: f64 = 1e-10;

/// Unitarity check for group elements and change-of-basis matrices.
pub const UNITARY_TOL: f64 = 1e-9;

/// Eigendecomposition residual, relative to the max-norm of the input.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

/// Relative gap below which eigenvalues are treated as degenerate.
pub const EIG_DEGENERACY_GAP: f64 = 1e-9;

/// Commutation residual accepted for twirled observables, [Y, U_g] = 0.
pub const COMMUTANT_TOL: f64 = 1e-8;

/// Symmetry check default, max_g ||U_g rho U_g^dag - rho||_max.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Cluster separation tolerance in the commutant decomposition,
/// relative to the spectral range of the probe element.
pub const CLUSTER_TOL: f64 = 1e-7;

/// Retries with fresh random probes before the decomposition gives up.
pub const DECOMPOSITION_RETRIES: usize = 5;

/// Block weights q_alpha at or below this are treated as zero and dropped
/// from the Fisher-information parameter list.
pub const WEIGHT_THRESHOLD: f64 = 1e-12;

/// Default pseudo-inverse cutoff on eigenvalue sums in the SLD solver.
pub const PINV_TOL: f64 = 1e-10;

/// Work guard for the dense twirl: |G| * dim^3 must stay below this.
pub const TWIRL_WORK_GUARD: f64 = 1e10;

/// Merge gap for measurement outcomes, relative to the max-norm of the
/// observable.
pub const OUTCOME_MERGE_GAP: f64 = 1e-9;

/// Largest qubit count for dense paths (dim = 2^n <= 4096).
pub const MAX_DENSE_QUBITS: usize = 12;

/// Largest n for full enumeration of the permutation group (n! elements).
pub const MAX_PERMUTATION_QUBITS: usize = 8;

/// Largest dimension accepted by the commutant decomposition.
pub const MAX_DECOMPOSE_DIM: usize = 256;
