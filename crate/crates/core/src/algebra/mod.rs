//! Heisenberg-picture engine.
//!
//! Every quadrature operator is a [`LinearForm`] over independent [`Symbol`]s: the vacuum
//! quadratures of each created mode, the teleported input, and homodyne records. Optical
//! elements act on the forms exactly; homodyne detection turns a mode into a
//! [`MeasurementRecord`] that can be fed forward by linear substitution.
//!
//! Conventions: `[x, y] = i/2`, so a vacuum quadrature has variance [`V0`] = 1/4 and the
//! weighted CZ `exp(2i g x_j x_k)` shifts each `y` by exactly `g` times the partner's `x`.

mod feedforward;
mod form;
mod state;
mod symbol;

pub use feedforward::FeedforwardGains;
pub use form::{LinearForm, DEFAULT_PRUNE_TOL};
pub use state::{CircuitState, MeasurementRecord, Mode, Orientation, SYMPLECTIC_TOL};
pub use symbol::{ModeId, Quadrature, RecordId, Symbol, SymbolId, SymbolKind};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Variance of a vacuum quadrature under `[x, y] = i/2`.
pub const V0: f64 = 0.25;

/// Variance of `form` treating all symbols as independent: `Σ c_s² var_s`.
///
/// Fails if the form still mentions a measurement record, since that means a photocurrent
/// was never substituted.
pub fn noise_budget(form: &LinearForm, variances: &BTreeMap<Symbol, f64>) -> Result<f64> {
    let mut total = 0.0;
    for (sym, c) in form.iter() {
        if sym.is_record() {
            return Err(Error::LeftoverRecord(*sym));
        }
        let var = variances.get(sym).ok_or(Error::MissingVariance(*sym))?;
        total += c * c * var;
    }
    Ok(total)
}
