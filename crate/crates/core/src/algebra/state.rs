use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use super::form::{LinearForm, DEFAULT_PRUNE_TOL};
use super::symbol::{ModeId, PairKey, Quadrature, RecordId, Symbol, SymbolId, SymbolKind};
use super::V0;
use crate::error::{Error, Result};

static NEXT_STATE_ID: AtomicU64 = AtomicU64::new(1);

/// Tolerance of the canonical-commutator check.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// x shrinks by e^{-r}, y stretches by e^{r}.
    XSqueezed,
    /// y shrinks by e^{-r}, x stretches by e^{r}.
    YSqueezed,
}

/// One optical channel in the Heisenberg picture, `a = x + i y`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mode {
    pub x: LinearForm,
    pub y: LinearForm,
}

impl Mode {
    pub fn quad(&self, q: Quadrature) -> &LinearForm {
        match q {
            Quadrature::X => &self.x,
            Quadrature::Y => &self.y,
        }
    }

    pub fn quad_mut(&mut self, q: Quadrature) -> &mut LinearForm {
        match q {
            Quadrature::X => &mut self.x,
            Quadrature::Y => &mut self.y,
        }
    }
}

/// The linear form seen by a homodyne detector, with the detector amplitude divided out.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub id: RecordId,
    /// Symbol standing for the numeric photocurrent; never appears in a live form
    /// unless a caller puts it there.
    pub symbol: Symbol,
    pub form: LinearForm,
    pub angle: f64,
    pub source_mode: ModeId,
    owner: u64,
}

/// Modes, symbol registry and measurement records of one circuit.
#[derive(Debug, Clone)]
pub struct CircuitState {
    id: u64,
    modes: Vec<Option<Mode>>,
    symbols: Vec<Symbol>,
    variances: BTreeMap<Symbol, f64>,
    records: Vec<MeasurementRecord>,
    consumed: Vec<bool>,
    signal: Option<ModeId>,
    labels: BTreeMap<ModeId, String>,
    tol: f64,
}

impl Default for CircuitState {
    fn default() -> Self {
        Self::new()
    }
}

impl CircuitState {
    pub fn new() -> Self {
        Self::with_tolerance(DEFAULT_PRUNE_TOL)
    }

    /// Empty state whose element updates prune coefficients below `tol`.
    pub fn with_tolerance(tol: f64) -> Self {
        CircuitState {
            id: NEXT_STATE_ID.fetch_add(1, Ordering::Relaxed),
            modes: Vec::new(),
            symbols: Vec::new(),
            variances: BTreeMap::new(),
            records: Vec::new(),
            consumed: Vec::new(),
            signal: None,
            labels: BTreeMap::new(),
            tol,
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn fresh_symbol(&mut self, kind: SymbolKind) -> Symbol {
        let sym = Symbol {
            id: SymbolId(self.symbols.len() as u32),
            kind,
        };
        self.symbols.push(sym);
        sym
    }

    pub fn add_squeezed_mode(&mut self, r: f64, orientation: Orientation) -> Result<ModeId> {
        if !r.is_finite() {
            return Err(Error::param("r", r, "squeezing must be finite"));
        }
        if r < 0.0 {
            return Err(Error::param(
                "r",
                r,
                "squeezing must be non-negative; choose the orientation instead",
            ));
        }
        let id = ModeId(self.modes.len());
        let x0 = self.fresh_symbol(SymbolKind::VacX(id));
        let y0 = self.fresh_symbol(SymbolKind::VacY(id));
        self.variances.insert(x0, V0);
        self.variances.insert(y0, V0);
        let (cx, cy) = match orientation {
            Orientation::YSqueezed => (r.exp(), (-r).exp()),
            Orientation::XSqueezed => ((-r).exp(), r.exp()),
        };
        self.modes.push(Some(Mode {
            x: LinearForm::term(x0, cx),
            y: LinearForm::term(y0, cy),
        }));
        Ok(id)
    }

    pub fn add_vacuum_mode(&mut self) -> ModeId {
        self.add_squeezed_mode(0.0, Orientation::YSqueezed)
            .expect("zero squeezing is always valid")
    }

    /// Adds the teleported input. Its symbols carry coherent-state variance V0.
    pub fn add_signal_mode(&mut self) -> Result<ModeId> {
        if self.signal.is_some() {
            return Err(Error::DuplicateSignal);
        }
        let id = ModeId(self.modes.len());
        let sx = self.fresh_symbol(SymbolKind::SignalX);
        let sy = self.fresh_symbol(SymbolKind::SignalY);
        self.variances.insert(sx, V0);
        self.variances.insert(sy, V0);
        self.modes.push(Some(Mode {
            x: LinearForm::term(sx, 1.0),
            y: LinearForm::term(sy, 1.0),
        }));
        self.signal = Some(id);
        Ok(id)
    }

    pub fn signal_mode(&self) -> Option<ModeId> {
        self.signal
    }

    /// `(SignalX, SignalY)` if a signal mode was added.
    pub fn signal_symbols(&self) -> Option<(Symbol, Symbol)> {
        let x = self
            .symbols
            .iter()
            .find(|s| s.kind == SymbolKind::SignalX)?;
        let y = self
            .symbols
            .iter()
            .find(|s| s.kind == SymbolKind::SignalY)?;
        Some((*x, *y))
    }

    /// The vacuum symbols `(x0, y0)` introduced together with `mode`.
    pub fn vacuum_symbols(&self, mode: ModeId) -> Option<(Symbol, Symbol)> {
        let x = self
            .symbols
            .iter()
            .find(|s| s.kind == SymbolKind::VacX(mode))?;
        let y = self
            .symbols
            .iter()
            .find(|s| s.kind == SymbolKind::VacY(mode))?;
        Some((*x, *y))
    }

    /// Names a mode for reporting; the name follows the mode's vacuum symbols.
    pub fn set_label(&mut self, mode: ModeId, label: impl Into<String>) {
        self.labels.insert(mode, label.into());
    }

    pub fn label(&self, mode: ModeId) -> Option<&str> {
        self.labels.get(&mode).map(String::as_str)
    }

    /// Human-readable symbol name, using mode labels where set (`y0[s1]`).
    pub fn symbol_name(&self, symbol: &Symbol) -> String {
        match symbol.kind {
            SymbolKind::VacX(m) | SymbolKind::VacY(m) => match self.labels.get(&m) {
                Some(label) => {
                    let q = if matches!(symbol.kind, SymbolKind::VacX(_)) { "x0" } else { "y0" };
                    format!("{q}[{label}]")
                }
                None => symbol.to_string(),
            },
            _ => symbol.to_string(),
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn variances(&self) -> &BTreeMap<Symbol, f64> {
        &self.variances
    }

    pub fn variance(&self, symbol: &Symbol) -> Option<f64> {
        self.variances.get(symbol).copied()
    }

    /// Overrides the variance of a non-record symbol, e.g. a thermal input.
    pub fn set_variance(&mut self, symbol: Symbol, variance: f64) -> Result<()> {
        if symbol.is_record() {
            return Err(Error::LeftoverRecord(symbol));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::param("variance", variance, "must be positive"));
        }
        self.variances.insert(symbol, variance);
        Ok(())
    }

    pub fn mode(&self, id: ModeId) -> Result<&Mode> {
        self.modes
            .get(id.0)
            .and_then(Option::as_ref)
            .ok_or(Error::DeadMode(id))
    }

    /// Direct access to a mode's forms. Nothing re-validates the commutators afterwards.
    pub fn mode_mut(&mut self, id: ModeId) -> Result<&mut Mode> {
        self.modes
            .get_mut(id.0)
            .and_then(Option::as_mut)
            .ok_or(Error::DeadMode(id))
    }

    pub fn is_live(&self, id: ModeId) -> bool {
        matches!(self.modes.get(id.0), Some(Some(_)))
    }

    pub fn live_modes(&self) -> impl Iterator<Item = (ModeId, &Mode)> {
        self.modes
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|m| (ModeId(i), m)))
    }

    pub fn num_live_modes(&self) -> usize {
        self.modes.iter().filter(|m| m.is_some()).count()
    }

    /// Removes a mode from the live set without recording anything, e.g. an ancilla
    /// whose remaining quadrature has been folded into other modes by hand.
    pub fn retire_mode(&mut self, id: ModeId) -> Result<Mode> {
        self.modes
            .get_mut(id.0)
            .and_then(Option::take)
            .ok_or(Error::DeadMode(id))
    }

    fn two_live(&self, i: ModeId, j: ModeId) -> Result<()> {
        self.mode(i)?;
        self.mode(j)?;
        if i == j {
            return Err(Error::SameMode(i));
        }
        Ok(())
    }

    /// `x' = x cos θ - y sin θ`, `y' = x sin θ + y cos θ`.
    pub fn apply_phase_rotation(&mut self, mode: ModeId, theta: f64) -> Result<()> {
        let tol = self.tol;
        let m = self.mode_mut(mode)?;
        let (c, s) = (theta.cos(), theta.sin());
        let x = m.x.combine(c, &m.y, -s, tol);
        let y = m.x.combine(s, &m.y, c, tol);
        m.x = x;
        m.y = y;
        Ok(())
    }

    /// Real orthogonal mixing with intensity reflectivity `reflectivity`:
    /// `a_i' = t a_i + ρ a_j`, `a_j' = ρ a_i - t a_j`, with `t = √(1-R)`, `ρ = √R`.
    pub fn apply_beamsplitter(&mut self, i: ModeId, j: ModeId, reflectivity: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(Error::param("R", reflectivity, "reflectivity must lie in [0, 1]"));
        }
        self.two_live(i, j)?;
        let tol = self.tol;
        let t = (1.0 - reflectivity).sqrt();
        let rho = reflectivity.sqrt();
        let (a, b) = (self.mode(i)?.clone(), self.mode(j)?.clone());
        let mut new_i = Mode::default();
        let mut new_j = Mode::default();
        for q in Quadrature::BOTH {
            *new_i.quad_mut(q) = a.quad(q).combine(t, b.quad(q), rho, tol);
            *new_j.quad_mut(q) = a.quad(q).combine(rho, b.quad(q), -t, tol);
        }
        *self.mode_mut(i)? = new_i;
        *self.mode_mut(j)? = new_j;
        Ok(())
    }

    /// Weighted controlled-Z `exp(2i g x_i x_j)`: `y_i += g x_j`, `y_j += g x_i`.
    pub fn apply_cz(&mut self, i: ModeId, j: ModeId, weight: f64) -> Result<()> {
        if !weight.is_finite() {
            return Err(Error::param("g", weight, "weight must be finite"));
        }
        self.two_live(i, j)?;
        let tol = self.tol;
        let xi = self.mode(i)?.x.clone();
        let xj = self.mode(j)?.x.clone();
        self.mode_mut(i)?.y.add_scaled(&xj, weight, tol);
        self.mode_mut(j)?.y.add_scaled(&xi, weight, tol);
        Ok(())
    }

    /// Measures `cos θ · x + sin θ · y` and removes the mode.
    pub fn homodyne(&mut self, mode: ModeId, theta: f64) -> Result<MeasurementRecord> {
        let m = self.retire_mode(mode)?;
        let form = m.x.combine(theta.cos(), &m.y, theta.sin(), self.tol);
        let id = RecordId(self.records.len());
        let symbol = self.fresh_symbol(SymbolKind::Record(id));
        let record = MeasurementRecord {
            id,
            symbol,
            form,
            angle: theta,
            source_mode: mode,
            owner: self.id,
        };
        self.records.push(record.clone());
        self.consumed.push(false);
        Ok(record)
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn record(&self, id: RecordId) -> Option<&MeasurementRecord> {
        self.records.get(id.0)
    }

    /// Records not yet used by any displacement.
    pub fn available_records(&self) -> impl Iterator<Item = &MeasurementRecord> {
        self.records
            .iter()
            .zip(&self.consumed)
            .filter(|(_, used)| !**used)
            .map(|(r, _)| r)
    }

    pub(crate) fn owns(&self, record: &MeasurementRecord) -> bool {
        record.owner == self.id && record.id.0 < self.records.len()
    }

    /// Adds `gain · record` to one quadrature of `mode`, substituting the record's form.
    pub fn displace_by_record(
        &mut self,
        mode: ModeId,
        quadrature: Quadrature,
        gain: f64,
        record: &MeasurementRecord,
    ) -> Result<()> {
        if !self.owns(record) {
            return Err(Error::ForeignRecord(record.id));
        }
        if !gain.is_finite() {
            return Err(Error::param("gain", gain, "gain must be finite"));
        }
        let tol = self.tol;
        let form = self.records[record.id.0].form.clone();
        self.mode_mut(mode)?.quad_mut(quadrature).add_scaled(&form, gain, tol);
        self.consumed[record.id.0] = true;
        Ok(())
    }

    /// Canonical commutator `[f, g] / i` under `[x, y] = i/2`.
    pub fn commutator(&self, f: &LinearForm, g: &LinearForm) -> f64 {
        let partners = self.partner_table();
        bracket(f, g, &partners)
    }

    fn partner_table(&self) -> BTreeMap<PairKey, [Option<Symbol>; 2]> {
        let mut table: BTreeMap<PairKey, [Option<Symbol>; 2]> = BTreeMap::new();
        for s in &self.symbols {
            if let Some((key, q)) = s.pair() {
                let slot = table.entry(key).or_default();
                slot[q as usize] = Some(*s);
            }
        }
        table
    }

    /// True iff the live modes satisfy `[x_i, y_j] = i/2 δ_ij` and `[x_i, x_j] = [y_i, y_j] = 0`.
    pub fn check_symplectic(&self) -> bool {
        let partners = self.partner_table();
        let live: Vec<(ModeId, &Mode)> = self.live_modes().collect();
        for (a, (_, ma)) in live.iter().enumerate() {
            for (b, (_, mb)) in live.iter().enumerate() {
                let expected = if a == b { 0.5 } else { 0.0 };
                if (bracket(&ma.x, &mb.y, &partners) - expected).abs() > SYMPLECTIC_TOL {
                    return false;
                }
                if b > a
                    && (bracket(&ma.x, &mb.x, &partners).abs() > SYMPLECTIC_TOL
                        || bracket(&ma.y, &mb.y, &partners).abs() > SYMPLECTIC_TOL)
                {
                    return false;
                }
            }
        }
        true
    }
}

fn bracket(f: &LinearForm, g: &LinearForm, partners: &BTreeMap<PairKey, [Option<Symbol>; 2]>) -> f64 {
    let mut acc = 0.0;
    for (s, cf) in f.iter() {
        let Some((key, q)) = s.pair() else { continue };
        let Some(pair) = partners.get(&key) else { continue };
        match q {
            Quadrature::X => {
                if let Some(p) = pair[1] {
                    acc += cf * g.coeff(&p);
                }
            }
            Quadrature::Y => {
                if let Some(p) = pair[0] {
                    acc -= cf * g.coeff(&p);
                }
            }
        }
    }
    0.5 * acc
}
