//! Contextual dueling bandits with Feel-Good Thompson sampling.
//!
//! The crate simulates linear contextual dueling bandits under
//! Bradley-Terry-Luce feedback and runs Feel-Good Thompson sampling
//! (Langevin posterior draws) against MaxInP, MaxPairUCB, CoLSTIM and VACDB.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod history;
pub mod model_classes;
pub mod posterior;
pub mod primitives;
pub mod rng;

pub use error::{Error, Result};
