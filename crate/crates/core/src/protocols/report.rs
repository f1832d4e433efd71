use serde::{Deserialize, Serialize};

use crate::algebra::{noise_budget, CircuitState, LinearForm, ModeId, Quadrature, V0};
use crate::error::{Error, Result};

/// Entry tolerance of the teleportation predicate.
pub const TELEPORT_TOL: f64 = 1e-10;

/// One coefficient of an output noise form, with a readable symbol name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTerm {
    pub quadrature: Quadrature,
    pub symbol: String,
    pub coefficient: f64,
}

/// Outcome of one protocol run.
///
/// `mse_x`/`mse_y` are the output noise variances in units of `e^{-2r} V0`. They equal the
/// teleportation error `<(q_out - s q_in)^2>` when `is_teleportation` holds; otherwise the
/// output is a transformed input and they only measure the added noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    /// Rows `(x_out, y_out)`, columns `(x_in, y_in)`.
    pub signal_gain: [[f64; 2]; 2],
    pub noise_x: LinearForm,
    pub noise_y: LinearForm,
    pub noise_terms: Vec<NoiseTerm>,
    pub mse_x: f64,
    pub mse_y: f64,
    pub is_teleportation: bool,
    pub signal_sign: [f64; 2],
    pub squeezing: f64,
}

impl ProtocolReport {
    /// Reads the report off the output mode of a completed circuit.
    pub fn from_state(state: &CircuitState, out: ModeId, r: f64) -> Result<Self> {
        let (sx, sy) = state
            .signal_symbols()
            .ok_or(Error::TargetsNotEliminable("circuit has no signal mode".into()))?;
        let mode = state.mode(out)?;
        let signal_gain = [
            [mode.x.coeff(&sx), mode.x.coeff(&sy)],
            [mode.y.coeff(&sx), mode.y.coeff(&sy)],
        ];
        let noise_x = mode.x.filtered(|s| !s.is_signal());
        let noise_y = mode.y.filtered(|s| !s.is_signal());
        let unit = (-2.0 * r).exp() * V0;
        let mse_x = noise_budget(&noise_x, state.variances())? / unit;
        let mse_y = noise_budget(&noise_y, state.variances())? / unit;

        let diag_ok = |v: f64| (v.abs() - 1.0).abs() < TELEPORT_TOL;
        let is_teleportation = diag_ok(signal_gain[0][0])
            && diag_ok(signal_gain[1][1])
            && signal_gain[0][1].abs() < TELEPORT_TOL
            && signal_gain[1][0].abs() < TELEPORT_TOL;
        let sign = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
        let signal_sign = [sign(signal_gain[0][0]), sign(signal_gain[1][1])];

        let mut noise_terms = Vec::new();
        for (q, form) in [(Quadrature::X, &noise_x), (Quadrature::Y, &noise_y)] {
            for (s, c) in form.iter() {
                noise_terms.push(NoiseTerm {
                    quadrature: q,
                    symbol: state.symbol_name(s),
                    coefficient: *c,
                });
            }
        }

        Ok(ProtocolReport {
            signal_gain,
            noise_x,
            noise_y,
            noise_terms,
            mse_x,
            mse_y,
            is_teleportation,
            signal_sign,
            squeezing: r,
        })
    }

    /// Output noise variance in units of V0 rather than `e^{-2r} V0`.
    pub fn absolute_mse(&self) -> (f64, f64) {
        let unit = (-2.0 * self.squeezing).exp() * V0;
        (self.mse_x * unit, self.mse_y * unit)
    }

    /// Coefficient of a named noise term, zero if absent.
    pub fn noise_coefficient(&self, quadrature: Quadrature, symbol: &str) -> f64 {
        self.noise_terms
            .iter()
            .find(|t| t.quadrature == quadrature && t.symbol == symbol)
            .map(|t| t.coefficient)
            .unwrap_or(0.0)
    }
}
