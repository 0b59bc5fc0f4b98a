//! Dense complex linear-algebra kernel and quantum-information primitives.

pub mod embed;
pub mod layout;
pub mod linalg;
pub mod matrix;
pub mod ops;
pub mod types;

pub use layout::{RegisterLayout, DIM_CAP};
pub use matrix::{C64, ComplexMatrix};
pub use ops::{
    apply_channel, fidelity, gentle_post_state, haar_unitary, helstrom_povm, partial_trace,
    random_density, random_effect, random_pure_state, tensor, trace_distance, uhlmann_unitary,
};
pub use types::{DensityMatrix, KrausChannel, Povm, StateVector, UnitaryOp};

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmathError {
    DimensionMismatch,
    IndexOutOfRange,
    DegenerateInput,
    ZeroAcceptance,
    DimensionCap,
    NotFinite,
    NotHermitian,
    NotPositive,
    NotNormalized,
    NotUnitary,
    NotComplete,
    NotTracePreserving,
}

impl fmt::Display for QmathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            QmathError::DimensionMismatch => "operand dimensions do not match",
            QmathError::IndexOutOfRange => "subsystem index out of range",
            QmathError::DegenerateInput => "degenerate input (empty or full subsystem set)",
            QmathError::ZeroAcceptance => "acceptance probability is numerically zero",
            QmathError::DimensionCap => "total dimension exceeds the dense cap 2^12",
            QmathError::NotFinite => "matrix has non-finite entries",
            QmathError::NotHermitian => "matrix is not Hermitian within tolerance",
            QmathError::NotPositive => "matrix has an eigenvalue below -1e-9",
            QmathError::NotNormalized => "trace differs from 1 beyond tolerance",
            QmathError::NotUnitary => "operator is not unitary within tolerance",
            QmathError::NotComplete => "POVM elements do not sum to the identity",
            QmathError::NotTracePreserving => "Kraus operators do not sum to the identity",
        };
        f.write_str(msg)
    }
}
