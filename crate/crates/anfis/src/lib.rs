//! Adaptive network-based fuzzy inference for regression over bubble-column
//! hydrodynamics data.
//!
//! The crate builds first-order Sugeno models on a grid-partition rule base
//! (six membership-function families with analytic parameter gradients),
//! trains them with hybrid learning (batch ridge least squares for the
//! consequents, normalized gradient descent for the premises), and drives a
//! sensitivity sweep over input count, membership count, and membership
//! family. A deterministic analytic surrogate of the column's pressure
//! gradient field supplies reproducible training data.
//!
//! Every numeric pipeline is deterministic: seeded sampling and splitting,
//! and fixed-order chunked reductions that produce bit-identical results at
//! any thread count. Disable the default `parallel` feature for a fully
//! sequential build.
//!
//! ```
//! use anfis::dataset::{generate_surrogate, select_regression, split, GridSpec, SurrogateParams};
//! use anfis::fis::build_model;
//! use anfis::membership::MfFamily;
//! use anfis::trainer::{train, TrainConfig};
//!
//! let data = generate_surrogate(&GridSpec::default(), &SurrogateParams::default()).unwrap();
//! let (train_ds, _test_ds) = split(&data, 0.7, 42).unwrap();
//! let names: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
//! let (x, y, inputs) = select_regression(&train_ds, &names, "dpdz").unwrap();
//!
//! let model = build_model(&inputs, 2, MfFamily::Gauss, "dpdz").unwrap();
//! let config = TrainConfig { epochs: 3, ..Default::default() };
//! let (trained, trace) = train(model, &x, &y, &config).unwrap();
//! assert!(trace.records[trace.best_epoch].train_rmse.is_finite());
//! assert!(trained.forward(&[0.01, 0.02]).unwrap() < 0.0);
//! ```

// `!(x > 0.0)`-style guards are deliberate throughout: they reject NaN
// along with out-of-domain values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod fis;
pub mod linalg;
pub mod membership;
pub mod metrics;
pub mod parallel;
pub mod sweep;
pub mod trainer;

pub use error::{AnfisError, Result};
pub use fis::{build_model, load_model, save_model, AnfisModel, InputSpec};
pub use membership::{eval_mf, grad_mf, make_mf_bank, MfFamily, MfSpec};
pub use trainer::{fit_consequents_lse, premise_gradient, train, TrainConfig, TrainTrace};
