//! Sparse adversarial perturbations.
//!
//! The attack approximates a classifier's decision boundary near an input
//! by a hyperplane (boundary point from ℓ2-DeepFool, normal from the
//! gradient difference of the two competing logits) and then solves the
//! box-constrained ℓ1 projection onto that hyperplane greedily, one
//! coordinate at a time. Repeating the two steps until the label flips
//! yields perturbations that touch only a handful of input coordinates while
//! staying inside the valid value range.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); `f64` is
//! the default type parameter and the aliases below name the common
//! concrete instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod bounds;
pub mod classifier;
pub mod clip_failure;
pub mod deepfool;
pub mod error;
pub mod linear_solver;
pub mod rng;
pub mod scalar;
pub mod tensor;

pub use attack::{sparsefool, AttackOutcome, ChannelLayout, FailureReason, SparseFoolConfig};
pub use bounds::{box_project, delta_bounds, BoxBounds};
pub use classifier::{
    load_model, save_model, train_sgd, Activation, AffineClassifier, Classifier, DenseLayer, MlpClassifier,
    TrainConfig, TrainReport,
};
pub use clip_failure::{clip_failure_experiment, ClipFailureReport};
pub use deepfool::{
    deepfool, deepfool_clipped, deepfool_lp, deepfool_targeted, estimate_boundary, estimate_boundary_towards,
    BoundaryEstimate, Candidates, DeepFoolConfig,
};
pub use error::{Error, Result};
pub use linear_solver::{linear_solver, plane_residual, LinearSolution};
pub use rng::Rng;
pub use scalar::Scalar;
pub use tensor::{argmax, argmax_abs_excluding, dot, finite_diff_grad, IndexMask, Tensor};

pub type Tensor64 = Tensor<f64>;
pub type Tensor32 = Tensor<f32>;
pub type BoxBounds64 = BoxBounds<f64>;
pub type BoxBounds32 = BoxBounds<f32>;
pub type Mlp64 = MlpClassifier<f64>;
pub type Mlp32 = MlpClassifier<f32>;
pub type Affine64 = AffineClassifier<f64>;
pub type Affine32 = AffineClassifier<f32>;
pub type Outcome64 = AttackOutcome<f64>;
pub type Outcome32 = AttackOutcome<f32>;
