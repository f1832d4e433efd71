use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix4, Vector4};

use super::schemes::{antisqueezed_x, check_r, three_modes};
use super::PreparedCircuit;
use crate::algebra::{noise_budget, CircuitState, LinearForm, ModeId, Orientation, Quadrature, Symbol};
use crate::error::{Error, Result};

/// Tolerance for comparing a composed optical CZ with the closed form.
pub const OPTICAL_MATCH_TOL: f64 = 1e-10;

/// Beamsplitter-and-ancilla CZ gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalCzSpec {
    reflectivity: f64,
    ancilla_squeezing: f64,
}

impl OpticalCzSpec {
    pub fn new(reflectivity: f64, ancilla_squeezing: f64) -> Result<Self> {
        check_reflectivity(reflectivity)?;
        check_r(ancilla_squeezing)?;
        Ok(OpticalCzSpec {
            reflectivity,
            ancilla_squeezing,
        })
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    pub fn ancilla_squeezing(&self) -> f64 {
        self.ancilla_squeezing
    }

    /// `(1 - R) / √R`.
    pub fn effective_weight(&self) -> f64 {
        effective_weight(self.reflectivity)
    }

    /// `√((1 - R) / (1 + R))`.
    pub fn noise_prefactor(&self) -> f64 {
        let r = self.reflectivity;
        ((1.0 - r) / (1.0 + r)).sqrt()
    }
}

pub fn effective_weight(reflectivity: f64) -> f64 {
    (1.0 - reflectivity) / reflectivity.sqrt()
}

pub(crate) fn check_reflectivity(reflectivity: f64) -> Result<()> {
    if !(reflectivity > 0.0 && reflectivity < 1.0) {
        return Err(Error::param("R", reflectivity, "reflectivity must lie in (0, 1)"));
    }
    Ok(())
}

/// Which ancilla quadrature feeds an output, and with what coefficient (before `e^{-r}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncillaNoise {
    /// `Y` for the y-squeezed ancilla's `y`, `X` for the x-squeezed ancilla's `x`.
    pub ancilla: Quadrature,
    pub coefficient: f64,
}

/// Closed-form gate on `(x_i, x_j, y_i, y_j)`: the signal matrix and, per output row,
/// the single ancilla quadrature it picks up.
pub fn optical_cz_matrix(spec: &OpticalCzSpec) -> (Matrix4<f64>, [AncillaNoise; 4]) {
    let g = spec.effective_weight();
    let c = spec.noise_prefactor();
    let sr = spec.reflectivity.sqrt();
    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, g,   1.0, 0.0,
        g,   0.0, 0.0, 1.0,
    );
    let noise = [
        AncillaNoise { ancilla: Quadrature::X, coefficient: -c },
        AncillaNoise { ancilla: Quadrature::Y, coefficient: c },
        AncillaNoise { ancilla: Quadrature::Y, coefficient: -c * sr },
        AncillaNoise { ancilla: Quadrature::X, coefficient: -c * sr },
    ];
    (m, noise)
}

/// Applies the closed-form gate to modes `i`, `j` of `state`.
///
/// Two fresh ancillas are created (one y-squeezed, one x-squeezed, both at the gate's
/// squeezing); only their squeezed quadratures enter, and they are retired afterwards.
pub fn apply_optical_cz(state: &mut CircuitState, i: ModeId, j: ModeId, spec: &OpticalCzSpec) -> Result<()> {
    state.mode(i)?;
    state.mode(j)?;
    if i == j {
        return Err(Error::SameMode(i));
    }
    let r = spec.ancilla_squeezing;
    let a3 = state.add_squeezed_mode(r, Orientation::YSqueezed)?;
    let a4 = state.add_squeezed_mode(r, Orientation::XSqueezed)?;
    label_ancillas(state, i, j, a3, a4);
    let y3 = state.mode(a3)?.y.clone();
    let x4 = state.mode(a4)?.x.clone();
    state.retire_mode(a3)?;
    state.retire_mode(a4)?;

    let g = spec.effective_weight();
    let (_, noise) = optical_cz_matrix(spec);
    let pick = |n: &AncillaNoise| match n.ancilla {
        Quadrature::X => &x4,
        Quadrature::Y => &y3,
    };
    let tol = state.tolerance();
    let xi = state.mode(i)?.x.clone();
    let xj = state.mode(j)?.x.clone();
    {
        let mi = state.mode_mut(i)?;
        mi.x.add_scaled(pick(&noise[0]), noise[0].coefficient, tol);
        mi.y.add_scaled(&xj, g, tol);
        mi.y.add_scaled(pick(&noise[2]), noise[2].coefficient, tol);
    }
    let mj = state.mode_mut(j)?;
    mj.x.add_scaled(pick(&noise[1]), noise[1].coefficient, tol);
    mj.y.add_scaled(&xi, g, tol);
    mj.y.add_scaled(pick(&noise[3]), noise[3].coefficient, tol);
    Ok(())
}

fn label_ancillas(state: &mut CircuitState, i: ModeId, j: ModeId, a: ModeId, b: ModeId) {
    let base = match (state.label(i), state.label(j)) {
        (Some(li), Some(lj)) => format!("{li},{lj}"),
        _ => format!("{},{}", i.0, j.0),
    };
    state.set_label(a, format!("anc_y:{base}"));
    state.set_label(b, format!("anc_x:{base}"));
}

/// Builds the gate from its optical elements: `-π/2` on `i`, beamsplitter `R/(1+R)`,
/// one squeezed ancilla per channel mixed in at reflectivity `R`, homodyne of the
/// channel with feedforward onto the ancilla, beamsplitter `1/(1+R)`, `+π/2` phase.
///
/// The ancilla ports carry on as the gate's outputs; the returned ids replace `(i, j)`.
pub fn compose_optical_cz(
    state: &mut CircuitState,
    i: ModeId,
    j: ModeId,
    spec: &OpticalCzSpec,
) -> Result<(ModeId, ModeId)> {
    state.mode(i)?;
    state.mode(j)?;
    if i == j {
        return Err(Error::SameMode(i));
    }
    let big_r = spec.reflectivity;
    let r = spec.ancilla_squeezing;

    state.apply_phase_rotation(i, -FRAC_PI_2)?;
    state.apply_beamsplitter(j, i, big_r / (1.0 + big_r))?;

    let ax = state.add_squeezed_mode(r, Orientation::XSqueezed)?;
    let ay = state.add_squeezed_mode(r, Orientation::YSqueezed)?;
    label_ancillas(state, i, j, ay, ax);

    // Channel i meets the x-squeezed ancilla and is read out in y; the ancilla's
    // antisqueezed y is removed from the surviving port by feedforward.
    state.apply_beamsplitter(i, ax, big_r)?;
    let rec = state.homodyne(i, FRAC_PI_2)?;
    let (_, ax_y) = state.vacuum_symbols(ax).expect("ancilla symbols");
    let gains = state.solve_feedforward_gains_with(ax, &[ax_y], &[rec.id])?;
    gains.apply(state, ax)?;

    state.apply_beamsplitter(j, ay, big_r)?;
    let rec = state.homodyne(j, 0.0)?;
    let (ay_x, _) = state.vacuum_symbols(ay).expect("ancilla symbols");
    let gains = state.solve_feedforward_gains_with(ay, &[ay_x], &[rec.id])?;
    gains.apply(state, ay)?;

    state.apply_beamsplitter(ay, ax, 1.0 / (1.0 + big_r))?;
    state.apply_phase_rotation(ax, FRAC_PI_2)?;
    Ok((ax, ay))
}

/// How far a composed gate is from the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalCzComparison {
    /// Composed signal matrix on `(x_i, x_j, y_i, y_j)`.
    pub signal: Matrix4<f64>,
    /// Extracted coupling, mean of the two off-diagonal shear entries.
    pub coupling: f64,
    pub signal_error: f64,
    /// Max difference of per-output noise budgets.
    pub budget_error: f64,
    /// Max difference of the 4×4 output noise covariance.
    pub covariance_error: f64,
}

impl OpticalCzComparison {
    pub fn matches(&self) -> bool {
        self.signal_error < OPTICAL_MATCH_TOL
            && self.budget_error < OPTICAL_MATCH_TOL
            && self.covariance_error < OPTICAL_MATCH_TOL
    }
}

/// Runs both the composed circuit and the closed form on a probe pair and compares them.
pub fn compare_optical_cz(spec: &OpticalCzSpec) -> Result<OpticalCzComparison> {
    let (composed, csyms) = probe(spec, true)?;
    let (closed, _) = probe(spec, false)?;
    let signal = Matrix4::from_fn(|row, col| composed[row].coeff(&csyms[col]));
    let (target, _) = optical_cz_matrix(spec);
    let signal_error = (signal - target).abs().max();

    let noise = |forms: &[LinearForm; 4]| -> [LinearForm; 4] {
        forms.clone().map(|f| f.filtered(|s| !csyms.contains(s)))
    };
    let (nc, nk) = (noise(&composed), noise(&closed));
    let cov = |n: &[LinearForm; 4]| {
        Matrix4::from_fn(|a, b| n[a].iter().map(|(s, c)| c * n[b].coeff(s)).sum::<f64>())
    };
    // Ancilla symbols differ between the two probes, so compare second moments only.
    let v = super::super::algebra::V0;
    let (cc, ck) = (cov(&nc) * v, cov(&nk) * v);
    let budget_error = Vector4::from_fn(|k, _| (cc[(k, k)] - ck[(k, k)]).abs()).max();
    let covariance_error = (cc - ck).abs().max();

    Ok(OpticalCzComparison {
        coupling: 0.5 * (signal[(2, 1)] + signal[(3, 0)]),
        signal,
        signal_error,
        budget_error,
        covariance_error,
    })
}

/// Two vacuum probe modes through either the composed or the closed-form gate. Ancilla
/// symbols are renamed positionally so the two runs can be compared term by term.
fn probe(spec: &OpticalCzSpec, composed: bool) -> Result<([LinearForm; 4], [Symbol; 4])> {
    let mut st = CircuitState::new();
    let a = st.add_vacuum_mode();
    let b = st.add_vacuum_mode();
    let (xa, ya) = st.vacuum_symbols(a).expect("probe symbols");
    let (xb, yb) = st.vacuum_symbols(b).expect("probe symbols");
    let (oa, ob) = if composed {
        compose_optical_cz(&mut st, a, b, spec)?
    } else {
        apply_optical_cz(&mut st, a, b, spec)?;
        (a, b)
    };
    let check_budget = |f: &LinearForm| noise_budget(f, st.variances()).map(|_| ());
    let ma = st.mode(oa)?;
    let mb = st.mode(ob)?;
    let forms = [ma.x.clone(), mb.x.clone(), ma.y.clone(), mb.y.clone()];
    for f in &forms {
        check_budget(f)?;
    }
    Ok((forms, [xa, xb, ya, yb]))
}

/// Beamsplitter-and-homodyne construction, accepted only if it reproduces the closed form exactly.
///
/// The element sequence matches the closed-form signal matrix and every per-output noise
/// budget, but the two ancilla correlations come out with the same sign where the closed
/// form has opposite signs, so this returns [`Error::ConstructionMismatch`] for every R.
pub fn build_optical_cz(state: &mut CircuitState, i: ModeId, j: ModeId, spec: &OpticalCzSpec) -> Result<(ModeId, ModeId)> {
    let cmp = compare_optical_cz(spec)?;
    if !cmp.matches() {
        return Err(Error::ConstructionMismatch(format!(
            "R = {}: signal error {:.3e}, budget error {:.3e}, covariance error {:.3e}",
            spec.reflectivity, cmp.signal_error, cmp.budget_error, cmp.covariance_error
        )));
    }
    compose_optical_cz(state, i, j, spec)
}

/// CZ–CZ wiring with both CZ gates realised optically at the same `R`, all oscillators at `r`.
pub fn prepare_czcz_optical(r: f64, reflectivity: f64) -> Result<PreparedCircuit> {
    check_r(r)?;
    let spec = OpticalCzSpec::new(reflectivity, r)?;
    let (mut st, [input, s1, s2]) = three_modes(r, Orientation::YSqueezed, Orientation::YSqueezed)?;
    apply_optical_cz(&mut st, s1, s2, &spec)?;
    apply_optical_cz(&mut st, input, s1, &spec)?;
    st.homodyne(input, FRAC_PI_2)?;
    st.homodyne(s1, FRAC_PI_2)?;
    let targets = antisqueezed_x(&st, s1, s2);
    let gains = st.solve_feedforward_gains(s2, &targets)?;
    Ok(PreparedCircuit::new(st, s2, gains, r))
}

/// Hybrid wiring with the resource CZ realised optically; homodynes at `∓π/4`.
pub fn prepare_hybrid_optical(r: f64, reflectivity: f64) -> Result<PreparedCircuit> {
    check_r(r)?;
    let spec = OpticalCzSpec::new(reflectivity, r)?;
    let (mut st, [input, s1, s2]) = three_modes(r, Orientation::YSqueezed, Orientation::YSqueezed)?;
    apply_optical_cz(&mut st, s1, s2, &spec)?;
    st.apply_beamsplitter(input, s1, 0.5)?;
    st.homodyne(input, -std::f64::consts::FRAC_PI_4)?;
    st.homodyne(s1, std::f64::consts::FRAC_PI_4)?;
    let targets = antisqueezed_x(&st, s1, s2);
    let gains = st.solve_feedforward_gains(s2, &targets)?;
    Ok(PreparedCircuit::new(st, s2, gains, r))
}

/// Closed-form optical CZ–CZ error ratios `(mse_x, mse_y)`.
pub fn czcz_optical_closed_form(reflectivity: f64) -> (f64, f64) {
    let r = reflectivity;
    let mx = (1.0 + (2.0 - r) * r * r) / ((1.0 - r) * (1.0 - r) * (1.0 + r));
    let my = (1.0 + 3.0 * r - 2.0 * r * r) / (1.0 + r);
    (mx, my)
}

/// Reflectivity at which the optical hybrid scheme has unit gain: `(3 - √5)/2`.
pub fn hybrid_optical_teleport_reflectivity() -> f64 {
    0.5 * (3.0 - 5f64.sqrt())
}

/// Closed-form optical hybrid error ratios at the unit-gain reflectivity.
pub fn hybrid_optical_closed_form() -> (f64, f64) {
    let s5 = 5f64.sqrt();
    (0.3 * s5 * (1.0 + s5), 0.1 * s5 * (7.0 - s5))
}

/// Optical hybrid signal gain `diag(√R/(1-R), (1-R)/√R)`.
pub fn hybrid_optical_gain(reflectivity: f64) -> [f64; 2] {
    let g = effective_weight(reflectivity);
    [1.0 / g, g]
}
