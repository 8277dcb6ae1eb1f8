//! Optimization engines for femtocell networks.
//!
//! Two independent engines live here:
//!
//! * [`multicast`]: minimum total base-station power for layered multicast with
//!   superposition coding and successive interference cancellation, including
//!   performance bounds, a best-channel heuristic, the three connection-case
//!   solvers and an exhaustive oracle.
//! * [`sched`]: per-slot scheduling of scalable video over a femtocell
//!   cognitive-radio network, with a dual-decomposition solver, greedy channel
//!   allocation over an interference graph, baselines and bounds.
//!
//! [`net`], [`spectrum`] and [`video`] hold the shared models: topology and
//! fading, primary-channel occupancy and sensing fusion, and the MGS quality and
//! loss models. [`exec`] switches the data-parallel loops between rayon and a
//! sequential fallback.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod multicast;
pub mod net;
pub mod rng;
pub mod sched;
pub mod spectrum;
pub mod video;

pub use error::{Error, Result};
pub use exec::Exec;
