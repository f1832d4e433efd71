//! Shot-by-shot re-run of a prepared circuit on sampled numbers.
//!
//! Gaussian states under linear dynamics are fixed by their first two moments, so
//! drawing every symbol as an independent Gaussian with its registered variance
//! reproduces the protocol statistics exactly in distribution. Each shot draws the
//! symbols, evaluates the homodyne photocurrents as numbers, and displaces the output
//! with the same gains the exact engine solved for.
//!
//! Randomness: ChaCha20, seeded from the 64-bit seed, one stream per partition
//! (`set_stream(partition)`). Shots are split over [`PARTITIONS`] fixed partitions and
//! the partial sums are merged in partition order, so the result does not depend on
//! thread scheduling.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{LinearForm, Quadrature, Symbol, V0};
use crate::error::{Error, Result};
use crate::protocols::{PreparedCircuit, Protocol};

pub const PARTITIONS: u64 = 64;
pub const DEFAULT_SHOTS: u64 = 1_000_000;
pub const DEFAULT_INPUT_MEAN: [f64; 2] = [2.0, 1.0];
pub const MIN_SHOTS: u64 = 100;
/// Spacing of the 3×3 grid of input means used for the gain regression.
pub const MEAN_GRID_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub n_shots: u64,
    pub seed: u64,
    pub protocol: Protocol,
    pub input_mean: [f64; 2],
    /// Added to every feedforward gain. Zero except when deliberately breaking a run.
    #[serde(default)]
    pub gain_perturbation: f64,
}

impl ShotConfig {
    pub fn new(protocol: Protocol, seed: u64) -> Self {
        ShotConfig {
            n_shots: DEFAULT_SHOTS,
            seed,
            protocol,
            input_mean: DEFAULT_INPUT_MEAN,
            gain_perturbation: 0.0,
        }
    }

    pub fn with_shots(mut self, n: u64) -> Self {
        self.n_shots = n;
        self
    }
}

/// Statistical estimate from one batch of shots. MSEs are in units of `e^{-2r} V0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub n_shots: u64,
    pub mse_x: f64,
    pub mse_y: f64,
    pub stderr_x: f64,
    pub stderr_y: f64,
    pub signal_gain_est: [[f64; 2]; 2],
    pub signal_gain_stderr: [[f64; 2]; 2],
    pub squeezing: f64,
}

impl ShotEstimate {
    pub fn absolute_mse(&self) -> (f64, f64) {
        let unit = (-2.0 * self.squeezing).exp() * V0;
        (self.mse_x * unit, self.mse_y * unit)
    }
}

/// Dense evaluation plan for one prepared circuit.
struct Plan {
    std: Vec<f64>,
    signal: [usize; 2],
    /// Output quadratures before feedforward.
    out: [Vec<f64>; 2],
    /// `(gain, record form)` per output quadrature.
    feeds: [Vec<(f64, Vec<f64>)>; 2],
    exact_gain: [[f64; 2]; 2],
    inv_unit_sqrt: f64,
}

impl Plan {
    fn new(prep: &PreparedCircuit, perturbation: f64) -> Result<Self> {
        let exact = prep.report()?;
        let st = &prep.state;
        let syms: Vec<Symbol> = st.symbols().iter().copied().filter(|s| !s.is_record()).collect();
        let index = |s: &Symbol| syms.iter().position(|t| t == s);
        let dense = |f: &LinearForm| -> Result<Vec<f64>> {
            let mut v = vec![0.0; syms.len()];
            for (s, c) in f.iter() {
                let k = index(s).ok_or(Error::LeftoverRecord(*s))?;
                v[k] = *c;
            }
            Ok(v)
        };
        let std = syms
            .iter()
            .map(|s| st.variance(s).map(f64::sqrt).ok_or(Error::MissingVariance(*s)))
            .collect::<Result<Vec<_>>>()?;
        let (sx, sy) = st
            .signal_symbols()
            .ok_or(Error::TargetsNotEliminable("circuit has no signal mode".into()))?;
        let mode = st.mode(prep.output)?;
        let gains = if perturbation != 0.0 {
            prep.gains.perturbed(perturbation)
        } else {
            prep.gains.clone()
        };
        let mut feeds: [Vec<(f64, Vec<f64>)>; 2] = [Vec::new(), Vec::new()];
        for (&(rid, q), &g) in gains.iter() {
            let rec = st.record(rid).ok_or(Error::ForeignRecord(rid))?;
            feeds[q as usize].push((g, dense(&rec.form)?));
        }
        Ok(Plan {
            signal: [index(&sx).expect("signal x"), index(&sy).expect("signal y")],
            out: [dense(mode.quad(Quadrature::X))?, dense(mode.quad(Quadrature::Y))?],
            feeds,
            exact_gain: exact.signal_gain,
            inv_unit_sqrt: 1.0 / ((-2.0 * prep.squeezing).exp() * V0).sqrt(),
            std,
        })
    }
}

#[derive(Debug, Clone, Default)]
struct Sums {
    n: u64,
    e2: [f64; 2],
    e4: [f64; 2],
    xtx: Matrix3<f64>,
    xty: [Vector3<f64>; 2],
    yy: [f64; 2],
}

impl Sums {
    fn merge(mut self, o: &Sums) -> Sums {
        self.n += o.n;
        for q in 0..2 {
            self.e2[q] += o.e2[q];
            self.e4[q] += o.e4[q];
            self.xty[q] += o.xty[q];
            self.yy[q] += o.yy[q];
        }
        self.xtx += o.xtx;
        self
    }
}

fn grid_mean(center: [f64; 2], k: u64) -> [f64; 2] {
    let i = (k % 3) as f64 - 1.0;
    let j = ((k / 3) % 3) as f64 - 1.0;
    [center[0] + i * MEAN_GRID_STEP, center[1] + j * MEAN_GRID_STEP]
}

fn run_partition(plan: &Plan, cfg: &ShotConfig, part: u64) -> Sums {
    let base = cfg.n_shots / PARTITIONS;
    let extra = cfg.n_shots % PARTITIONS;
    let count = base + u64::from(part < extra);
    let start = part * base + part.min(extra);

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(part);
    let mut v = vec![0.0; plan.std.len()];
    let mut s = Sums::default();
    for k in start..start + count {
        let mean = grid_mean(cfg.input_mean, k);
        for (slot, sd) in v.iter_mut().zip(&plan.std) {
            let z: f64 = rng.sample(StandardNormal);
            *slot = sd * z;
        }
        v[plan.signal[0]] += mean[0];
        v[plan.signal[1]] += mean[1];
        let input = [v[plan.signal[0]], v[plan.signal[1]]];
        let design = Vector3::new(1.0, mean[0], mean[1]);
        s.xtx += design * design.transpose();
        for q in 0..2 {
            let mut out = dot(&plan.out[q], &v);
            for (g, rec) in &plan.feeds[q] {
                out += g * dot(rec, &v);
            }
            let ideal = plan.exact_gain[q][0] * input[0] + plan.exact_gain[q][1] * input[1];
            let e = (out - ideal) * plan.inv_unit_sqrt;
            let e2 = e * e;
            s.e2[q] += e2;
            s.e4[q] += e2 * e2;
            s.xty[q] += design * out;
            s.yy[q] += out * out;
        }
        s.n += 1;
    }
    s
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs the shots of `config` and returns the pooled estimate.
pub fn run_shots(config: &ShotConfig) -> Result<ShotEstimate> {
    if config.n_shots < MIN_SHOTS {
        return Err(Error::param("n_shots", config.n_shots as f64, "at least 100 shots are required"));
    }
    if !(config.input_mean[0].is_finite() && config.input_mean[1].is_finite()) {
        return Err(Error::param("input_mean", f64::NAN, "input mean must be finite"));
    }
    let prep = config.protocol.prepare()?;
    let plan = Plan::new(&prep, config.gain_perturbation)?;
    let parts: Vec<Sums> = (0..PARTITIONS)
        .into_par_iter()
        .map(|p| run_partition(&plan, config, p))
        .collect();
    let total = parts.iter().fold(Sums::default(), |acc, p| acc.merge(p));

    let n = total.n as f64;
    let mut mse = [0.0; 2];
    let mut se = [0.0; 2];
    for q in 0..2 {
        mse[q] = total.e2[q] / n;
        let var = (total.e4[q] / n - mse[q] * mse[q]).max(0.0) * n / (n - 1.0);
        se[q] = (var / n).sqrt();
    }

    let inv = total
        .xtx
        .try_inverse()
        .ok_or(Error::param("n_shots", n, "too few shots for the gain regression"))?;
    let mut gain = [[0.0; 2]; 2];
    let mut gain_se = [[0.0; 2]; 2];
    for q in 0..2 {
        let beta = inv * total.xty[q];
        let rss = (total.yy[q] - beta.dot(&total.xty[q])).max(0.0);
        let sigma2 = rss / (n - 3.0);
        for c in 0..2 {
            gain[q][c] = beta[c + 1];
            gain_se[q][c] = (sigma2 * inv[(c + 1, c + 1)]).sqrt();
        }
    }

    Ok(ShotEstimate {
        n_shots: total.n,
        mse_x: mse[0],
        mse_y: mse[1],
        stderr_x: se[0],
        stderr_y: se[1],
        signal_gain_est: gain,
        signal_gain_stderr: gain_se,
        squeezing: prep.squeezing,
    })
}

/// Outcome of comparing a Monte Carlo run with the exact engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub protocol: Protocol,
    pub exact_mse: [f64; 2],
    pub exact_gain: [[f64; 2]; 2],
    pub estimate: ShotEstimate,
    /// `|mse_mc - mse_exact| / stderr` per quadrature.
    pub mse_z: [f64; 2],
    /// Largest `|gain_est - gain_exact| / stderr` over the four entries.
    pub gain_z: f64,
    pub pass: bool,
}

pub const MSE_Z_LIMIT: f64 = 3.0;
pub const GAIN_Z_LIMIT: f64 = 5.0;

/// Runs [`run_shots`] and the exact engine; passes iff both MSEs are within 3 standard
/// errors and every gain entry within 5.
pub fn validate_against_exact(config: &ShotConfig) -> Result<Validation> {
    let exact = config.protocol.run()?;
    let est = run_shots(config)?;
    let z = |diff: f64, se: f64| diff.abs() / se.max(1e-300);
    let mse_z = [z(est.mse_x - exact.mse_x, est.stderr_x), z(est.mse_y - exact.mse_y, est.stderr_y)];
    let mut gain_z: f64 = 0.0;
    for q in 0..2 {
        for c in 0..2 {
            let d = est.signal_gain_est[q][c] - exact.signal_gain[q][c];
            gain_z = gain_z.max(z(d, est.signal_gain_stderr[q][c]));
        }
    }
    let pass = mse_z.iter().all(|v| *v < MSE_Z_LIMIT) && gain_z < GAIN_Z_LIMIT;
    Ok(Validation {
        protocol: config.protocol,
        exact_mse: [exact.mse_x, exact.mse_y],
        exact_gain: exact.signal_gain,
        estimate: est,
        mse_z,
        gain_z,
        pass,
    })
}

/// Sample variance of `n` draws at `variance`, with its standard error, from the same
/// generator as the shot engine.
pub fn sample_variance(variance: f64, n: u64, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sd = variance.sqrt();
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let v = sd * z;
        s1 += v;
        s2 += v * v;
        s4 += v * v * v * v;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = s2 / nf - mean * mean;
    let m2 = s2 / nf;
    let se = ((s4 / nf - m2 * m2) / nf).sqrt();
    (var, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: Protocol, n: u64, seed: u64) -> ShotConfig {
        ShotConfig::new(p, seed).with_shots(n)
    }

    #[test]
    fn too_few_shots() {
        assert!(run_shots(&cfg(Protocol::Bs { r: 1.0 }, 99, 1)).is_err());
    }

    #[test]
    fn deterministic() {
        let c = cfg(Protocol::Czcz { r: 0.5, g1: 1.0, g2: -1.0 }, 5000, 42);
        assert_eq!(run_shots(&c).unwrap(), run_shots(&c).unwrap());
    }

    #[test]
    fn different_seeds_differ() {
        let a = run_shots(&cfg(Protocol::Bs { r: 1.0 }, 1000, 1)).unwrap();
        let b = run_shots(&cfg(Protocol::Bs { r: 1.0 }, 1000, 2)).unwrap();
        assert_ne!(a.mse_x, b.mse_x);
    }

    #[test]
    fn coarse_run_validates() {
        let v = validate_against_exact(&cfg(Protocol::Bs { r: 1.0 }, 100, 7)).unwrap();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn corrupted_gain_fails() {
        let mut c = cfg(Protocol::Czcz { r: 1.0, g1: 1.0, g2: -1.0 }, 20_000, 3);
        c.gain_perturbation = 0.1;
        assert!(!validate_against_exact(&c).unwrap().pass);
    }

    #[test]
    fn heavy_squeezing_is_nearly_noiseless() {
        let est = run_shots(&cfg(Protocol::Bs { r: 15.0 }, 10_000, 9)).unwrap();
        let (ax, ay) = est.absolute_mse();
        assert!(ax < 1e-10 * V0 && ay < 1e-10 * V0);
    }

    #[test]
    fn grid_covers_nine_points() {
        let pts: std::collections::BTreeSet<_> =
            (0..9).map(|k| grid_mean([0.0, 0.0], k).map(|v| v as i64)).collect();
        assert_eq!(pts.len(), 9);
    }
}
