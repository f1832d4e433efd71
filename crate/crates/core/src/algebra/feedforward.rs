use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{CircuitState, MeasurementRecord, ModeId, Quadrature, RecordId, Symbol};
use crate::error::{Error, Result};

/// Relative singular-value cutoff for deciding the rank of the elimination system.
const RANK_TOL: f64 = 1e-10;
/// Relative residual allowed when checking that the targets really vanish.
const RESIDUAL_TOL: f64 = 1e-9;

/// Displacement gains keyed by `(record, quadrature of the output mode)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeedforwardGains {
    gains: BTreeMap<(RecordId, Quadrature), f64>,
}

impl FeedforwardGains {
    pub fn get(&self, record: RecordId, quadrature: Quadrature) -> f64 {
        self.gains.get(&(record, quadrature)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(RecordId, Quadrature), &f64)> {
        self.gains.iter()
    }

    pub fn insert(&mut self, record: RecordId, quadrature: Quadrature, gain: f64) {
        self.gains.insert((record, quadrature), gain);
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Adds `delta` to every gain. Only useful for deliberately breaking a protocol.
    pub fn perturbed(&self, delta: f64) -> Self {
        FeedforwardGains {
            gains: self.gains.iter().map(|(k, g)| (*k, g + delta)).collect(),
        }
    }

    /// Applies every gain as a displacement of `out`.
    pub fn apply(&self, state: &mut CircuitState, out: ModeId) -> Result<()> {
        for (&(rid, q), &gain) in &self.gains {
            let record = state
                .record(rid)
                .cloned()
                .ok_or(Error::ForeignRecord(rid))?;
            state.displace_by_record(out, q, gain, &record)?;
        }
        Ok(())
    }
}

impl CircuitState {
    /// Finds the displacement gains that remove every target symbol from both quadratures
    /// of `out`, using the records not yet consumed by a displacement.
    ///
    /// The gains must be uniquely determined: the record columns restricted to the targets
    /// must be linearly independent, and the targets must actually be cancellable.
    pub fn solve_feedforward_gains(&self, out: ModeId, targets: &[Symbol]) -> Result<FeedforwardGains> {
        let records: Vec<_> = self.available_records().cloned().collect();
        self.solve_gains_over(out, targets, &records)
    }

    /// Same as [`solve_feedforward_gains`](Self::solve_feedforward_gains) but restricted to
    /// the given records, so a sub-circuit can close its own loop inside a larger state.
    pub fn solve_feedforward_gains_with(
        &self,
        out: ModeId,
        targets: &[Symbol],
        records: &[RecordId],
    ) -> Result<FeedforwardGains> {
        let records = records
            .iter()
            .map(|id| self.record(*id).cloned().ok_or(Error::ForeignRecord(*id)))
            .collect::<Result<Vec<_>>>()?;
        self.solve_gains_over(out, targets, &records)
    }

    fn solve_gains_over(
        &self,
        out: ModeId,
        targets: &[Symbol],
        records: &[MeasurementRecord],
    ) -> Result<FeedforwardGains> {
        let mode = self.mode(out)?.clone();
        let mut gains = FeedforwardGains::default();
        if targets.is_empty() {
            for rec in records {
                for q in Quadrature::BOTH {
                    gains.insert(rec.id, q, 0.0);
                }
            }
            return Ok(gains);
        }
        if records.is_empty() {
            return Err(Error::TargetsNotEliminable(format!(
                "{} target(s) but no unused measurement records",
                targets.len()
            )));
        }
        if records.len() > targets.len() {
            return Err(Error::TargetsNotEliminable(format!(
                "{} records for {} target(s): gains are not unique",
                records.len(),
                targets.len()
            )));
        }

        let nt = targets.len();
        let nr = records.len();
        let system = DMatrix::from_fn(nt, nr, |t, k| records[k].form.coeff(&targets[t]));
        let svd = system.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|s| **s > RANK_TOL * smax.max(f64::MIN_POSITIVE))
            .count();
        if rank < nr {
            return Err(Error::TargetsNotEliminable(format!(
                "measurement system is singular (rank {rank} of {nr})"
            )));
        }

        for q in Quadrature::BOTH {
            let rhs = DVector::from_fn(nt, |t, _| -mode.quad(q).coeff(&targets[t]));
            let sol = svd
                .solve(&rhs, RANK_TOL * smax)
                .map_err(|e| Error::TargetsNotEliminable(e.to_string()))?;
            let residual = (&system * &sol - &rhs).norm();
            if residual > RESIDUAL_TOL * rhs.norm().max(1.0) {
                return Err(Error::TargetsNotEliminable(format!(
                    "{q} quadrature keeps a residual of {residual:e} on the targets"
                )));
            }
            for (k, rec) in records.iter().enumerate() {
                gains.insert(rec.id, q, sol[k]);
            }
        }
        Ok(gains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Orientation;

    #[test]
    fn empty_targets_give_zero_gains() {
        let mut s = CircuitState::new();
        let a = s.add_vacuum_mode();
        let b = s.add_vacuum_mode();
        s.homodyne(b, 0.0).unwrap();
        let g = s.solve_feedforward_gains(a, &[]).unwrap();
        assert!(g.iter().all(|(_, v)| *v == 0.0));
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn duplicate_records_are_singular() {
        let mut s = CircuitState::new();
        let a = s.add_squeezed_mode(1.0, Orientation::YSqueezed).unwrap();
        let b = s.add_vacuum_mode();
        let c = s.add_vacuum_mode();
        let (xa, _) = s.vacuum_symbols(a).unwrap();
        // b and c both carry the same copy of x_a, then are measured the same way.
        s.apply_cz(a, b, 1.0).unwrap();
        s.apply_cz(a, c, 1.0).unwrap();
        let yb = s.mode(b).unwrap().y.clone();
        s.mode_mut(c).unwrap().y = yb;
        s.homodyne(b, std::f64::consts::FRAC_PI_2).unwrap();
        s.homodyne(c, std::f64::consts::FRAC_PI_2).unwrap();
        let err = s.solve_feedforward_gains(a, &[xa]).unwrap_err();
        assert!(matches!(err, Error::TargetsNotEliminable(_)));
    }

    #[test]
    fn uncancellable_target_is_reported() {
        let mut s = CircuitState::new();
        let a = s.add_squeezed_mode(1.0, Orientation::YSqueezed).unwrap();
        let b = s.add_vacuum_mode();
        let (_, yb) = s.vacuum_symbols(b).unwrap();
        let (xa, _) = s.vacuum_symbols(a).unwrap();
        // The record sees only y_b; x_a cannot be removed from a.
        s.homodyne(b, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(s.solve_feedforward_gains(a, &[xa]).is_err());
        assert!(s.solve_feedforward_gains(a, &[yb]).is_ok());
    }

    #[test]
    fn single_record_elimination() {
        let mut s = CircuitState::new();
        let a = s.add_squeezed_mode(2.0, Orientation::YSqueezed).unwrap();
        let b = s.add_squeezed_mode(2.0, Orientation::YSqueezed).unwrap();
        let (xa, _) = s.vacuum_symbols(a).unwrap();
        s.apply_cz(a, b, 1.5).unwrap();
        s.apply_beamsplitter(a, b, 0.3).unwrap();
        s.homodyne(a, 0.2).unwrap();
        let g = s.solve_feedforward_gains(b, &[xa]).unwrap();
        g.apply(&mut s, b).unwrap();
        let m = s.mode(b).unwrap();
        assert!(m.x.coeff(&xa).abs() < 1e-12);
        assert!(m.y.coeff(&xa).abs() < 1e-12);
        assert_eq!(s.available_records().count(), 0);
    }
}
