//! Matrix Lie algebra and Lie group kernel.

pub mod algebra;
pub mod builtins;
pub mod expm;
pub mod group;
pub mod pair;

pub use algebra::{adjoint, bracket, AlgebraVector, MatrixAlgebra};
pub use expm::{group_exp, group_log};
pub use group::{BaseProjection, GroupBlock, GroupKind};
pub use pair::{validate_reductive, Check, ModelPair, ValidationReport};
