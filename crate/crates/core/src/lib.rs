//! Correlation clustering from noisy pairwise similarity queries.
//!
//! Each pair of elements is an arm whose pulls return independent samples
//! with mean equal to the pair's true similarity. The crate provides
//!
//! * [`kcfc`]: fixed-confidence clustering via a threshold bandit followed by
//!   KwikCluster, plus a sequential variant that only samples pivot pairs;
//! * [`kcfb`]: fixed-budget clustering with per-phase pull reallocation;
//! * [`uniform`]: uniform-sampling baselines;
//! * [`offline`]: the clustering cost, KwikCluster and an exact solver for
//!   small instances;
//! * [`analysis`]: gaps and theoretical reference bounds.
//!
//! The crate is `no_std` and needs only `alloc`. All randomness comes from
//! explicitly seeded ChaCha8 streams (see [`rng`]).

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod instance;
pub mod kcfb;
pub mod kcfc;
pub mod offline;
pub mod oracle;
pub mod rng;
pub mod tbhs;
pub mod uniform;

pub use error::{Error, Result};
pub use instance::{generate, pair_index, pair_of, Clustering, GeneratorKind, GeneratorSpec, Instance, PairId};
pub use kcfb::{run_kcfb, FbReport};
pub use kcfc::{run_kcfc, run_kcfc_sequential, FcParams, FcReport};
pub use offline::{brute_force_opt, cost, kwikcluster, CostEstimate, OptResult, SimilaritySource};
pub use oracle::{Feedback, NoiseModel, Oracle, RewardTape};
pub use tbhs::{run_tbhs, TbhsConfig, TbhsOutput};
pub use uniform::{run_uniform_fb, run_uniform_fc, OfflineSolver};
