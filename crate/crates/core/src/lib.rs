//! Exact continuous-variable teleportation simulator.
//!
//! [`algebra`] propagates quadratures as linear forms over noise symbols, [`protocols`]
//! wires the beamsplitter, CZ and hybrid teleportation circuits (ideal and optical-CZ),
//! [`montecarlo`] re-runs them on sampled numbers, and [`cli`] drives everything from the
//! command line.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod protocols;

pub use error::{Error, Result};
