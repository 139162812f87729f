//! Tiny two-head networks trained under four task contexts, scored with
//! the CHSH statistic.
//!
//! Each context pairs an Alice task (`x1` or `x1 ^ x2`) with a Bob task
//! (`x3` or `x3 ^ x4`) over four input bits. One network per context is
//! trained independently; the ±1 correctness of each head on the 16 inputs
//! gives the correlations `C(A_i, B_j)` and `S = C11 + C12 + C21 - C22`,
//! which no local hidden-variable model can push above 2.
//!
//! | module | contents |
//! |---|---|
//! | [`tasklab`] | tasks, contexts, the 16-sample dataset |
//! | [`neuralcore`] | network, backprop, SGD/Adam |
//! | [`bell`] | outcomes, correlations, S, LHV enumeration |
//! | [`contexts`] | four-context runs, sweeps, S traces, gradient conflict |
//! | [`ingest`] | S from external correctness logs |
//! | [`plot`] | SVG scatter of a sweep |
//! | [`cli`] | the `ncnet` command line |

pub mod bell;
pub mod cli;
pub mod contexts;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod neuralcore;
pub mod plot;
pub mod tasklab;

pub use error::{Error, Result};
