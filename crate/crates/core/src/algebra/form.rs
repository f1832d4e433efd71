use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::Symbol;

/// Coefficients with magnitude below this are dropped after every update.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-12;

/// Real linear combination of symbols. A missing key is a zero coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    coeffs: BTreeMap<Symbol, f64>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(symbol: Symbol, coeff: f64) -> Self {
        let mut form = Self::zero();
        form.set(symbol, coeff);
        form
    }

    pub fn coeff(&self, symbol: &Symbol) -> f64 {
        self.coeffs.get(symbol).copied().unwrap_or(0.0)
    }

    /// Overwrites one coefficient. Setting zero removes the entry.
    pub fn set(&mut self, symbol: Symbol, coeff: f64) {
        if coeff == 0.0 {
            self.coeffs.remove(&symbol);
        } else {
            self.coeffs.insert(symbol, coeff);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &f64)> {
        self.coeffs.iter()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.coeffs.keys()
    }

    /// `self += scale * other`, pruning at `tol`.
    pub fn add_scaled(&mut self, other: &LinearForm, scale: f64, tol: f64) {
        if scale == 0.0 {
            return;
        }
        for (sym, c) in &other.coeffs {
            *self.coeffs.entry(*sym).or_insert(0.0) += scale * c;
        }
        self.prune(tol);
    }

    pub fn scaled(&self, scale: f64, tol: f64) -> LinearForm {
        let mut out = LinearForm::zero();
        out.add_scaled(self, scale, tol);
        out
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &LinearForm, b: f64, tol: f64) -> LinearForm {
        let mut out = self.scaled(a, tol);
        out.add_scaled(other, b, tol);
        out
    }

    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.abs() >= tol && *c != 0.0);
    }

    /// Drops every symbol for which `keep` is false.
    pub fn filtered(&self, mut keep: impl FnMut(&Symbol) -> bool) -> LinearForm {
        LinearForm {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, c)| (*s, *c))
                .collect(),
        }
    }

    /// Evaluates the form on numeric symbol values.
    pub fn evaluate(&self, mut value: impl FnMut(&Symbol) -> f64) -> f64 {
        self.coeffs.iter().map(|(s, c)| c * value(s)).sum()
    }

    pub fn max_abs_diff(&self, other: &LinearForm) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|s| (self.coeff(s) - other.coeff(s)).abs())
            .fold(0.0, f64::max)
    }
}

impl FromIterator<(Symbol, f64)> for LinearForm {
    fn from_iter<I: IntoIterator<Item = (Symbol, f64)>>(iter: I) -> Self {
        let mut form = LinearForm::zero();
        for (s, c) in iter {
            *form.coeffs.entry(s).or_insert(0.0) += c;
        }
        form.prune(DEFAULT_PRUNE_TOL);
        form
    }
}

impl Add<&LinearForm> for &LinearForm {
    type Output = LinearForm;

    fn add(self, rhs: &LinearForm) -> LinearForm {
        self.combine(1.0, rhs, 1.0, DEFAULT_PRUNE_TOL)
    }
}

impl Sub<&LinearForm> for &LinearForm {
    type Output = LinearForm;

    fn sub(self, rhs: &LinearForm) -> LinearForm {
        self.combine(1.0, rhs, -1.0, DEFAULT_PRUNE_TOL)
    }
}

impl Mul<f64> for &LinearForm {
    type Output = LinearForm;

    fn mul(self, rhs: f64) -> LinearForm {
        self.scaled(rhs, DEFAULT_PRUNE_TOL)
    }
}

impl Neg for &LinearForm {
    type Output = LinearForm;

    fn neg(self) -> LinearForm {
        self.scaled(-1.0, 0.0)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.coeffs.iter().enumerate() {
            if i == 0 {
                write!(f, "{c}*{s}")?;
            } else if *c < 0.0 {
                write!(f, " - {}*{s}", -c)?;
            } else {
                write!(f, " + {c}*{s}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ModeId, SymbolId, SymbolKind};

    fn sym(id: u32) -> Symbol {
        Symbol {
            id: SymbolId(id),
            kind: SymbolKind::VacX(ModeId(id as usize)),
        }
    }

    #[test]
    fn pruning_drops_tiny_coefficients() {
        let mut f = LinearForm::term(sym(0), 1.0);
        f.add_scaled(&LinearForm::term(sym(0), 1.0), -1.0 + 1e-14, DEFAULT_PRUNE_TOL);
        assert!(f.is_zero());
    }

    #[test]
    fn absent_symbol_reads_zero() {
        let f = LinearForm::term(sym(0), 2.5);
        assert_eq!(f.coeff(&sym(1)), 0.0);
        assert_eq!(f.coeff(&sym(0)), 2.5);
    }

    #[test]
    fn arithmetic() {
        let a = &LinearForm::term(sym(0), 1.0) + &LinearForm::term(sym(1), 2.0);
        let b = &a * 3.0;
        assert_eq!(b.coeff(&sym(1)), 6.0);
        let z = &b - &b;
        assert!(z.is_zero());
        assert_eq!((-&a).coeff(&sym(0)), -1.0);
    }
}
