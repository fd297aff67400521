//! Tape-based reverse-mode differentiation over dense `f64` tensors.

mod gradcheck;
mod graph;
mod tensor;

pub use gradcheck::{grad_check, grad_check_many, ABS_ERROR_FLOOR, DEFAULT_STEP};
pub use graph::{Gradients, Graph, Var, LAYER_NORM_EPS};
pub use tensor::Tensor;
