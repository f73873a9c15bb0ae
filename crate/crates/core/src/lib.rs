//! Mode-by-mode numerics for Dirac operators on the quantum punctured disk.

pub mod balanced;
pub mod classical;
pub mod cli;
pub mod error;
pub mod modes;
pub mod numerics;
pub mod weights;

pub use error::{Error, Result};
pub use modes::{ModeOperatorSpec, ModeVector, OperatorKind, Variant, WindowedVector};
pub use numerics::TruncationWindow;
pub use weights::{FamilyKind, TailRule, WeightSequence, WeightTable};
