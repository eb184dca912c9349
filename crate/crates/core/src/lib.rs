//! Walsh–Paley analysis on the dyadic grid and a numerical harness for the
//! one-sided Littlewood–Paley inequality
//!
//! ```text
//! ‖Σ_m f_m‖_p ≤ C_p ‖{f_m}‖_{L^p(l²)},   1 < p ≤ 2,
//! ```
//!
//! for functions whose Walsh spectra lie in pairwise disjoint intervals.
//!
//! * [`dyadic`]: the group `(Z+, ∔)`, `δ_k` blocks and interval image laws.
//! * [`walsh`]: step functions, the fast Walsh–Hadamard transform, norms.
//! * [`martingale`]: `E_k`, `Δ_k`, the square function and the operator `G`.
//! * [`decomposition`]: interval partitions and the chain of estimates.
//! * [`harness`]: random instances and empirical constants.
//! * [`report`]: JSON / CSV output.
//! * [`verify`]: self-checking suites used by the command-line tool.

pub mod decomposition;
pub mod dyadic;
pub mod error;
pub mod harness;
pub mod martingale;
pub mod report;
pub mod verify;
pub mod walsh;

pub use decomposition::{
    decompose_function, decompose_instance, partition_interval, relocation_for_instance, theorem_chain,
    ChainReport, DecomposedFunction, DecomposedInstance, Instance, IntervalPartition,
};
pub use dyadic::{
    complement_exponents, delta_block, dyadic_exponents, shift_decomposition, xor_add, xor_translate_set,
    DeltaBlock, DyadicExponents, IntervalZ, ShiftRow,
};
pub use error::{Result, WalshError};
pub use harness::{
    estimate_constants, generate_instance, weak_type_probe, CoefficientLaw, ConstantsEstimate, InstanceSpec,
    IntervalFamily, LambdaGrid, TrialRecord, WeakOperator,
};
pub use martingale::{
    conditional_expectation, distribution_tail, martingale_difference, operator_g, square_function,
    square_function_vec, IndexedFamily, RelocationAssignment,
};
pub use report::{emit_report, ReportFormat};
pub use walsh::{
    fwht_analyze, fwht_synthesize, lp_l2_norm, lp_norm, multiply_pointwise, project_spectrum, walsh_function,
    DyadicFunction, VecFunction, WalshSpectrum,
};
