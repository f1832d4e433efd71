use std::f64::consts::FRAC_PI_2;

use super::PreparedCircuit;
use crate::algebra::{CircuitState, Orientation};
use crate::error::{Error, Result};

pub(crate) fn check_r(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::param("r", r, "squeezing must be finite and non-negative"));
    }
    Ok(())
}

pub(crate) fn check_weight(name: &'static str, g: f64) -> Result<()> {
    if !g.is_finite() || g == 0.0 {
        return Err(Error::param(name, g, "CZ weight must be finite and non-zero"));
    }
    Ok(())
}

/// Signal plus two resource modes, labelled `in`, `s1`, `s2`.
pub(crate) fn three_modes(
    r: f64,
    o1: Orientation,
    o2: Orientation,
) -> Result<(CircuitState, [crate::algebra::ModeId; 3])> {
    let mut st = CircuitState::new();
    let input = st.add_signal_mode()?;
    let s1 = st.add_squeezed_mode(r, o1)?;
    let s2 = st.add_squeezed_mode(r, o2)?;
    st.set_label(input, "in");
    st.set_label(s1, "s1");
    st.set_label(s2, "s2");
    Ok((st, [input, s1, s2]))
}

/// Beamsplitter EPR pair and beamsplitter admixing of the input.
pub fn prepare_bs(r: f64) -> Result<PreparedCircuit> {
    check_r(r)?;
    let (mut st, [input, s1, s2]) = three_modes(r, Orientation::YSqueezed, Orientation::XSqueezed)?;
    st.apply_beamsplitter(s1, s2, 0.5)?;
    st.apply_beamsplitter(input, s1, 0.5)?;
    st.homodyne(input, FRAC_PI_2)?;
    st.homodyne(s1, 0.0)?;
    let (x1, _) = st.vacuum_symbols(s1).expect("s1 symbols");
    let (_, y2) = st.vacuum_symbols(s2).expect("s2 symbols");
    let gains = st.solve_feedforward_gains(s2, &[x1, y2])?;
    Ok(PreparedCircuit::new(st, s2, gains, r))
}

/// CZ EPR pair of weight `g1`, input coupled by a second CZ of weight `g2`.
pub fn prepare_czcz(r: f64, g1: f64, g2: f64) -> Result<PreparedCircuit> {
    check_r(r)?;
    check_weight("g1", g1)?;
    check_weight("g2", g2)?;
    let (mut st, [input, s1, s2]) = three_modes(r, Orientation::YSqueezed, Orientation::YSqueezed)?;
    st.apply_cz(s1, s2, g1)?;
    st.apply_cz(input, s1, g2)?;
    st.homodyne(input, FRAC_PI_2)?;
    st.homodyne(s1, FRAC_PI_2)?;
    let targets = antisqueezed_x(&st, s1, s2);
    let gains = st.solve_feedforward_gains(s2, &targets)?;
    Ok(PreparedCircuit::new(st, s2, gains, r))
}

/// CZ EPR pair with beamsplitter admixing; homodynes at `theta1` (input) and `theta2` (s1).
pub fn prepare_hybrid(r: f64, g1: f64, theta1: f64, theta2: f64) -> Result<PreparedCircuit> {
    check_r(r)?;
    check_weight("g1", g1)?;
    check_angles(theta1, theta2)?;
    let (mut st, [input, s1, s2]) = three_modes(r, Orientation::YSqueezed, Orientation::YSqueezed)?;
    st.apply_cz(s1, s2, g1)?;
    st.apply_beamsplitter(input, s1, 0.5)?;
    st.homodyne(input, theta1)?;
    st.homodyne(s1, theta2)?;
    let targets = antisqueezed_x(&st, s1, s2);
    let gains = st.solve_feedforward_gains(s2, &targets)?;
    Ok(PreparedCircuit::new(st, s2, gains, r))
}

pub(crate) fn check_angles(theta1: f64, theta2: f64) -> Result<()> {
    if !(theta1.is_finite() && theta2.is_finite()) {
        return Err(Error::param("theta", f64::NAN, "angles must be finite"));
    }
    let s = (theta1 - theta2).sin();
    if s.abs() < 1e-9 {
        return Err(Error::param(
            "theta1 - theta2",
            theta1 - theta2,
            "sin(theta1 - theta2) = 0 makes the measurement system singular",
        ));
    }
    Ok(())
}

pub(crate) fn antisqueezed_x(
    st: &CircuitState,
    s1: crate::algebra::ModeId,
    s2: crate::algebra::ModeId,
) -> Vec<crate::algebra::Symbol> {
    let (x1, _) = st.vacuum_symbols(s1).expect("s1 symbols");
    let (x2, _) = st.vacuum_symbols(s2).expect("s2 symbols");
    vec![x1, x2]
}

/// Closed-form hybrid gain matrix, `θ± = θ1 ± θ2`, evaluated directly.
pub fn hybrid_gain_formula(g1: f64, theta1: f64, theta2: f64) -> [[f64; 2]; 2] {
    let (tp, tm) = (theta1 + theta2, theta1 - theta2);
    let k = 1.0 / tm.sin();
    [
        [-k * (tm.cos() + tp.cos()) / g1, -k * tp.sin() / g1],
        [k * g1 * tp.sin(), k * g1 * (tm.cos() - tp.cos())],
    ]
}
