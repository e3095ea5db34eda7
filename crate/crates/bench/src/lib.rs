//! Evaluation harness for the sparsefool attack: dataset loading, fooling
//! rate and sparsity metrics, the random sparse baseline, parameter sweeps,
//! transferability, and report persistence.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod data;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod preset;
pub mod report;
pub mod sweep;

pub use baseline::random_sparse_baseline;
pub use data::{load_cifar_batch, load_idx, load_split, synth_blobs, DataSource, Dataset, Split};
pub use error::{BenchError, Result};
pub use eval::{accuracy, attack_all, evaluate, summarize, BoundsPolicy, ConfigEcho, EvalReport, SampleSummary};
pub use metrics::{fooling_rate, median_pert_pct};
pub use preset::{preset_train_config, train_preset};
pub use report::{read_report, write_report, Format};
pub use sweep::{clip_failure, sweep_delta, sweep_lambda, transfer_matrix, DeltaRow, LambdaRow, TransferMatrix};
