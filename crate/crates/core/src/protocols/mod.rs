//! The teleportation circuits, the optical CZ gate, and their closed-form error analysis.
//!
//! Every builder returns a [`PreparedCircuit`]: the state after both homodynes, the output
//! mode, and the feedforward gains the solver found. [`PreparedCircuit::report`] applies the
//! gains symbolically; the Monte Carlo engine applies the same gains to sampled numbers.

mod crossover;
mod optical;
mod report;
mod schemes;

pub use crossover::{
    crossover_r, czcz_optical_worst, worst_curve_is_monotone, CROSSOVER_GRID, CROSSOVER_R_MAX, CROSSOVER_TOL,
};
pub use optical::{
    apply_optical_cz, build_optical_cz, compare_optical_cz, compose_optical_cz, czcz_optical_closed_form,
    effective_weight, hybrid_optical_closed_form, hybrid_optical_gain, hybrid_optical_teleport_reflectivity,
    optical_cz_matrix, prepare_czcz_optical, prepare_hybrid_optical, AncillaNoise, OpticalCzComparison,
    OpticalCzSpec, OPTICAL_MATCH_TOL,
};
pub use report::{NoiseTerm, ProtocolReport, TELEPORT_TOL};
pub use schemes::{hybrid_gain_formula, prepare_bs, prepare_czcz, prepare_hybrid};

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{CircuitState, FeedforwardGains, ModeId};
use crate::error::Result;

/// A measured circuit waiting for its feedforward.
#[derive(Debug, Clone)]
pub struct PreparedCircuit {
    pub state: CircuitState,
    pub output: ModeId,
    pub gains: FeedforwardGains,
    pub squeezing: f64,
}

impl PreparedCircuit {
    pub fn new(state: CircuitState, output: ModeId, gains: FeedforwardGains, squeezing: f64) -> Self {
        PreparedCircuit {
            state,
            output,
            gains,
            squeezing,
        }
    }

    /// The state after the feedforward displacements.
    pub fn finish(&self) -> Result<CircuitState> {
        let mut st = self.state.clone();
        self.gains.apply(&mut st, self.output)?;
        Ok(st)
    }

    pub fn report(&self) -> Result<ProtocolReport> {
        ProtocolReport::from_state(&self.finish()?, self.output, self.squeezing)
    }
}

/// A protocol with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum Protocol {
    Bs {
        r: f64,
    },
    Czcz {
        r: f64,
        g1: f64,
        g2: f64,
    },
    Hybrid {
        r: f64,
        g1: f64,
        theta1: f64,
        theta2: f64,
    },
    CzczOptical {
        r: f64,
        #[serde(rename = "R")]
        reflectivity: f64,
    },
    HybridOptical {
        r: f64,
        #[serde(rename = "R")]
        reflectivity: f64,
    },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Bs { .. } => "bs",
            Protocol::Czcz { .. } => "czcz",
            Protocol::Hybrid { .. } => "hybrid",
            Protocol::CzczOptical { .. } => "czcz-optical",
            Protocol::HybridOptical { .. } => "hybrid-optical",
        }
    }

    pub fn squeezing(&self) -> f64 {
        match *self {
            Protocol::Bs { r }
            | Protocol::Czcz { r, .. }
            | Protocol::Hybrid { r, .. }
            | Protocol::CzczOptical { r, .. }
            | Protocol::HybridOptical { r, .. } => r,
        }
    }

    /// Named parameters in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Protocol::Bs { r } => vec![("r", r)],
            Protocol::Czcz { r, g1, g2 } => vec![("r", r), ("g1", g1), ("g2", g2)],
            Protocol::Hybrid { r, g1, theta1, theta2 } => {
                vec![("r", r), ("g1", g1), ("theta1", theta1), ("theta2", theta2)]
            }
            Protocol::CzczOptical { r, reflectivity } | Protocol::HybridOptical { r, reflectivity } => {
                vec![("r", r), ("R", reflectivity)]
            }
        }
    }

    pub fn prepare(&self) -> Result<PreparedCircuit> {
        match *self {
            Protocol::Bs { r } => prepare_bs(r),
            Protocol::Czcz { r, g1, g2 } => prepare_czcz(r, g1, g2),
            Protocol::Hybrid { r, g1, theta1, theta2 } => prepare_hybrid(r, g1, theta1, theta2),
            Protocol::CzczOptical { r, reflectivity } => prepare_czcz_optical(r, reflectivity),
            Protocol::HybridOptical { r, reflectivity } => prepare_hybrid_optical(r, reflectivity),
        }
    }

    pub fn run(&self) -> Result<ProtocolReport> {
        self.prepare()?.report()
    }

    /// The canonical parameter set used for validation, at squeezing `r`.
    pub fn canonical(r: f64) -> Vec<Protocol> {
        vec![
            Protocol::Bs { r },
            Protocol::Czcz { r, g1: 1.0, g2: -1.0 },
            Protocol::Hybrid {
                r,
                g1: 1.0,
                theta1: -FRAC_PI_4,
                theta2: FRAC_PI_4,
            },
            Protocol::CzczOptical { r, reflectivity: 0.25 },
            Protocol::HybridOptical {
                r,
                reflectivity: hybrid_optical_teleport_reflectivity(),
            },
        ]
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for (k, v) in self.params() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

pub fn teleport_bs(r: f64) -> Result<ProtocolReport> {
    prepare_bs(r)?.report()
}

pub fn teleport_czcz(r: f64, g1: f64, g2: f64) -> Result<ProtocolReport> {
    prepare_czcz(r, g1, g2)?.report()
}

pub fn teleport_hybrid(r: f64, g1: f64, theta1: f64, theta2: f64) -> Result<ProtocolReport> {
    prepare_hybrid(r, g1, theta1, theta2)?.report()
}

pub fn teleport_czcz_optical(r: f64, reflectivity: f64) -> Result<ProtocolReport> {
    prepare_czcz_optical(r, reflectivity)?.report()
}

pub fn teleport_hybrid_optical(r: f64, reflectivity: f64) -> Result<ProtocolReport> {
    prepare_hybrid_optical(r, reflectivity)?.report()
}
