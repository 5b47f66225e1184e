//! Deterministic, time-stepped simulator of DASH video delivery over a
//! cooperative multi-MEC edge network.
//!
//! Each scheduling period the engine draws client requests (Zipf popularity,
//! Poisson session arrivals), refreshes a seeded channel realization, runs the
//! configured policy to obtain per-period cache / transcode / resource-block /
//! MCS decisions, executes transfers against peer and cloud link budgets,
//! delivers bytes to playback buffers, and records metrics.
//!
//! Module map:
//! - [`catalog`]: video/segment/presentation data model, synthetic generation, file IO
//! - [`cache`]: MEC cache lifecycle (predeployment, tiering, delete priority, space transfer)
//! - [`utility`]: per-client QoE utility ingredients (urgency, switch, playback support, PSNR)
//! - [`radio`]: MCS table, BLER, effective SNR, seeded channel realizations
//! - [`lp`]: self-contained bounded-variable primal simplex solver
//! - [`optimizer`]: cache/transcode integer program (branch and bound) and the
//!   greedy cost-driven RB scheduler, plus a brute-force oracle
//! - [`constraints`]: independent checker for every emitted decision vector
//! - [`sim`]: the time-stepped engine, request generation and metrics
//! - [`baselines`]: LRU-RR and LFU-RR reference policies
//! - [`config`]: scenario configuration schema with full defaulting

pub mod baselines;
pub mod cache;
pub mod catalog;
pub mod config;
pub mod constraints;
pub mod lp;
pub mod optimizer;
pub mod radio;
pub mod sim;
pub mod types;
pub mod utility;

pub(crate) mod apportion;
pub(crate) mod rng;
