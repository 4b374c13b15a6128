//! Error experiments on compiled protocols: random superpositions, phase and
//! probability error metrics, and parameter sweeps.
//!
//! Random states use `ChaCha8Rng::seed_from_u64(seed)`; amplitude j is
//! 1 − U[0,1) drawn in index order, then the vector is normalized. ChaCha8 is
//! portable, so fixtures are identical on every platform.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::ChainConfig;
use crate::compiler::{compile, PulseProgram};
use crate::dynamics::{Simulator, MAX_SIMULATED_QUBITS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::CompositeParams;
use crate::protocols::{Gate, IdealGate};
use crate::state::{wrap_phase, QuantumState, PHASE_FLOOR};
use crate::symbolic::SymbolicPhase;

pub fn random_superposition(len: usize, seed: u64) -> Result<QuantumState> {
    if !(2..=MAX_SIMULATED_QUBITS).contains(&len) {
        return Err(Error::Config(format!("random superposition needs 2 <= L <= {MAX_SIMULATED_QUBITS}, got {len}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..1usize << len).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let norm = raw.iter().map(|b| b * b).sum::<f64>().sqrt();
    Ok(QuantumState { amplitudes: raw.into_iter().map(|b| Complex64::new(b / norm, 0.0)).collect(), time: 0.0 })
}

/// Numeric value of a constant overall phase.
pub fn constant_phase(p: &SymbolicPhase) -> Result<f64> {
    if !p.is_constant() {
        return Err(Error::Gate(format!("overall phase '{p}' is not a constant")));
    }
    let c = p.pi_coefficient();
    Ok(PI * *c.numer() as f64 / *c.denom() as f64)
}

/// Ideal map B_j → B'_j of the gate, times e^{i·overall phase}.
pub fn ideal_apply(ideal: &IdealGate, state: &QuantumState) -> Result<QuantumState> {
    let len = state.qubits();
    let top = match ideal.gate {
        Gate::Not(i) | Gate::Rotation { qubit: i, .. } => i,
        Gate::Cn { control, target } => control.max(target),
        Gate::Swap(i) => i + 1,
    };
    if top >= len {
        return Err(Error::Gate(format!("'{}' does not fit an L={len} state", ideal.gate)));
    }
    let phase = Complex64::from_polar(1.0, constant_phase(&ideal.overall_phase)?);
    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    for (j, &b) in state.amplitudes.iter().enumerate() {
        if b == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (to, c) in ideal.apply_basis(j) {
            out[to] += phase * c * b;
        }
    }
    Ok(QuantumState { amplitudes: out, time: state.time })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// φ_j − Φ relative to the ideal amplitude; `None` where |B_j|² is below the floor.
    pub per_state_phase_dev: Vec<Option<f64>>,
    pub max_phase_error: f64,
    /// max_j (φ_j − Φ) − min_j (φ_j − Φ).
    pub phase_spread: f64,
    /// Φ = arg Σ_j B_j* B'_j.
    pub global_phase: f64,
    pub ideal_probabilities: Vec<f64>,
    pub simulated_probabilities: Vec<f64>,
    pub prob_errors: Vec<f64>,
    pub relative_prob_errors: Vec<Option<f64>>,
    /// Indices whose relative error is undefined (ideal amplitude below floor).
    pub undefined_relative: Vec<usize>,
    pub phase_error_series: Vec<f64>,
    /// Q pulses completed at each series sample.
    pub series_q_pulses: Vec<usize>,
    pub mu: f64,
    pub q_pulse_count: usize,
    pub norm_drift: f64,
}

/// Compares `simulated` (B') against `ideal` (B) state by state.
pub fn error_metrics(simulated: &QuantumState, ideal: &QuantumState) -> Result<ErrorReport> {
    if simulated.dim() != ideal.dim() {
        return Err(Error::Dimension { expected: ideal.dim(), got: simulated.dim() });
    }
    let overlap: Complex64 = ideal.amplitudes.iter().zip(&simulated.amplitudes).map(|(b, bp)| b.conj() * bp).sum();
    let global_phase = overlap.arg();
    let mut report = ErrorReport {
        per_state_phase_dev: Vec::with_capacity(ideal.dim()),
        max_phase_error: 0.0,
        phase_spread: 0.0,
        global_phase,
        ideal_probabilities: ideal.probabilities(),
        simulated_probabilities: simulated.probabilities(),
        prob_errors: Vec::with_capacity(ideal.dim()),
        relative_prob_errors: Vec::with_capacity(ideal.dim()),
        undefined_relative: Vec::new(),
        phase_error_series: Vec::new(),
        series_q_pulses: Vec::new(),
        mu: 0.0,
        q_pulse_count: 0,
        norm_drift: (simulated.norm_sqr() - 1.0).abs(),
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (j, (b, bp)) in ideal.amplitudes.iter().zip(&simulated.amplitudes).enumerate() {
        let p = (b.norm_sqr() - bp.norm_sqr()).abs();
        report.prob_errors.push(p);
        if b.norm_sqr() < PHASE_FLOOR {
            report.per_state_phase_dev.push(None);
            report.relative_prob_errors.push(None);
            report.undefined_relative.push(j);
            continue;
        }
        let dev = wrap_phase(bp.im.atan2(bp.re) - b.im.atan2(b.re) - global_phase);
        report.per_state_phase_dev.push(Some(dev));
        report.relative_prob_errors.push(Some(p / b.norm_sqr()));
        report.max_phase_error = report.max_phase_error.max(dev.abs());
        lo = lo.min(dev);
        hi = hi.max(dev);
    }
    if hi >= lo {
        report.phase_spread = hi - lo;
    }
    Ok(report)
}

/// Small-parameter scale μ = Ω/(2δω) of the full-rotation pulses.
pub fn mu(cfg: &ChainConfig) -> Result<f64> {
    Ok(CompositeParams::for_chain(cfg, 1.0)?.omega_single / (2.0 * cfg.delta_omega))
}

/// Ideal reference after each elementary gate of the program.
fn ideal_references(prog: &PulseProgram, initial: &QuantumState) -> Result<Vec<QuantumState>> {
    let mut refs = Vec::with_capacity(prog.gates.len());
    let mut cur = initial.clone();
    for mark in &prog.gates {
        cur = ideal_apply(&IdealGate::new(mark.gate, mark.overall_phase.clone()), &cur)?;
        refs.push(cur.clone());
    }
    Ok(refs)
}

/// Simulates `prog` on `initial` sequentially, sampling the phase error at
/// every elementary-gate boundary.
pub fn run_program(cfg: &ChainConfig, prog: &PulseProgram, initial: &QuantumState) -> Result<ErrorReport> {
    let initial = initial.clone().at_time(prog.start_time());
    let refs = ideal_references(prog, &initial)?;
    let mut sim = Simulator::with_execution(*cfg, Execution::Sequential)?;
    let ends: Vec<usize> = prog.gates.iter().map(|m| m.end).collect();
    let mut series = Vec::with_capacity(ends.len());
    let mut series_q = Vec::with_capacity(ends.len());
    let mut drift: f64 = 0.0;
    let mut failure = None;
    let final_state = sim.propagate_observed(&initial, &prog.pulses, |n, state| {
        drift = drift.max((state.norm_sqr() - 1.0).abs());
        if let Some(g) = ends.iter().position(|&e| e == n + 1) {
            match error_metrics(state, &refs[g]) {
                Ok(r) => {
                    series.push(r.max_phase_error);
                    series_q.push(prog.annotations[n].q_index + 1);
                }
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let ideal_final = refs.last().cloned().unwrap_or(initial);
    let mut report = error_metrics(&final_state, &ideal_final)?;
    report.phase_error_series = series;
    report.series_q_pulses = series_q;
    report.mu = mu(cfg)?;
    report.q_pulse_count = prog.q_pulse_count;
    report.norm_drift = drift;
    Ok(report)
}

pub fn run_protocol_experiment(cfg: &ChainConfig, gate: &Gate, seed: u64) -> Result<ErrorReport> {
    let prog = compile(gate, cfg)?;
    run_program(cfg, &prog, &random_superposition(cfg.len, seed)?)
}

/// Per-basis-state view of the full program unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    /// arg⟨ideal_j|U|j⟩ − Φ for every basis input j.
    pub column_phase_dev: Vec<f64>,
    pub max_phase_error: f64,
    pub phase_spread: f64,
    pub min_fidelity: f64,
    pub max_norm_drift: f64,
}

/// Evolves every basis state through the compiled gate (columns in parallel
/// under `exec`) and compares with the ideal map.
pub fn basis_experiment(cfg: &ChainConfig, gate: &Gate, exec: Execution) -> Result<BasisReport> {
    let prog = compile(gate, cfg)?;
    let ideal = prog.ideal().ok_or_else(|| Error::Gate("program has no gate".into()))?;
    let mut sim = Simulator::with_execution(*cfg, exec)?;
    let columns = sim.unitary(&prog.pulses)?;
    let mut overlaps = Vec::with_capacity(columns.len());
    let mut max_norm_drift: f64 = 0.0;
    for (j, col) in columns.iter().enumerate() {
        let target = ideal_apply(&ideal, &QuantumState::basis(cfg.len, j))?;
        let ov: Complex64 = target.amplitudes.iter().zip(&col.amplitudes).map(|(b, u)| b.conj() * u).sum();
        overlaps.push(ov);
        max_norm_drift = max_norm_drift.max((col.norm_sqr() - 1.0).abs());
    }
    let common = overlaps.iter().sum::<Complex64>().arg();
    let column_phase_dev: Vec<f64> = overlaps.iter().map(|o| wrap_phase(o.arg() - common)).collect();
    let max_phase_error = column_phase_dev.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let lo = column_phase_dev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column_phase_dev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BasisReport {
        column_phase_dev,
        max_phase_error,
        phase_spread: hi - lo,
        min_fidelity: overlaps.iter().map(|o| o.norm_sqr()).fold(1.0, f64::min),
        max_norm_drift,
    })
}

/// Median of `values` (NaN-free input).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Gate descriptor where the word `last` stands for qubit L−1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTemplate(pub String);

impl GateTemplate {
    pub fn resolve(&self, len: usize) -> Result<Gate> {
        let last = (len - 1).to_string();
        let text: Vec<&str> = self.0.split_whitespace().map(|w| if w == "last" { last.as_str() } else { w }).collect();
        let gate: Gate = text.join(" ").parse()?;
        gate.validate(len)?;
        Ok(gate)
    }
}

/// Cartesian grid of experiment points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub w: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "L")]
    pub lens: Vec<usize>,
    pub delta_omega: Vec<f64>,
    pub k: Vec<u32>,
    pub seed: Vec<u64>,
    pub gate: Vec<GateTemplate>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            w: 0.0,
            j: 1.0,
            lens: vec![7],
            delta_omega: vec![1e4],
            k: vec![2],
            seed: vec![1],
            gate: vec![GateTemplate("cn 0 last".into())],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "L")]
    pub len: usize,
    pub delta_omega: f64,
    pub k: u32,
    pub seed: u64,
    pub gate: String,
}

impl SweepConfig {
    /// Points in grid order: L, then δω, k, seed, gate.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &len in &self.lens {
            for &delta_omega in &self.delta_omega {
                for &k in &self.k {
                    for &seed in &self.seed {
                        for g in &self.gate {
                            out.push(SweepPoint { len, delta_omega, k, seed, gate: g.0.clone() });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn point_config(&self, p: &SweepPoint) -> Result<ChainConfig> {
        ChainConfig::new(p.len, self.w, p.delta_omega, self.j, p.k)
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let bad = || Error::Parse(format!("bad value '{v}' for grid key '{key}'"));
    v.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn parse_range(key: &str, v: &str) -> Result<Vec<usize>> {
    match v.split_once("..") {
        Some((a, b)) => {
            let bad = || Error::Parse(format!("bad range '{v}' for grid key '{key}'"));
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b < a {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => parse_list(key, v),
    }
}

/// `L=4..7;delta_omega=1e4,2e4;k=2;seed=1,2;gate=cn 0 last|not 3`; omitted
/// keys keep their defaults.
impl FromStr for SweepConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for item in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, v) =
                item.split_once('=').ok_or_else(|| Error::Parse(format!("grid entry '{item}' lacks '='")))?;
            match key.trim() {
                "L" => cfg.lens = parse_range("L", v)?,
                "delta_omega" => cfg.delta_omega = parse_list("delta_omega", v)?,
                "k" => cfg.k = parse_range("k", v)?.into_iter().map(|k| k as u32).collect(),
                "seed" => cfg.seed = parse_list("seed", v)?,
                "gate" => {
                    cfg.gate = v.split('|').map(|g| GateTemplate(g.trim().to_string())).collect();
                    if cfg.gate.iter().any(|g| g.0.is_empty()) {
                        return Err(Error::Parse(format!("empty gate in grid entry '{item}'")));
                    }
                }
                "w" => cfg.w = v.trim().parse().map_err(|_| Error::Parse(format!("bad w '{v}'")))?,
                "J" => cfg.j = v.trim().parse().map_err(|_| Error::Parse(format!("bad J '{v}'")))?,
                other => return Err(Error::Parse(format!("unknown grid key '{other}'"))),
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>, sep: &str| v.join(sep);
        write!(
            f,
            "w={};J={};L={};delta_omega={};k={};seed={};gate={}",
            self.w,
            self.j,
            join(self.lens.iter().map(|x| x.to_string()).collect(), ","),
            join(self.delta_omega.iter().map(|x| x.to_string()).collect(), ","),
            join(self.k.iter().map(|x| x.to_string()).collect(), ","),
            join(self.seed.iter().map(|x| x.to_string()).collect(), ","),
            join(self.gate.iter().map(|g| g.0.clone()).collect(), "|"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub point: SweepPoint,
    pub report: std::result::Result<ErrorReport, String>,
}

fn run_point(cfg: &SweepConfig, p: &SweepPoint) -> Result<ErrorReport> {
    let chain = cfg.point_config(p)?;
    let gate = GateTemplate(p.gate.clone()).resolve(p.len)?;
    run_protocol_experiment(&chain, &gate, p.seed)
}

/// One record per grid point, in grid order; failing points are recorded and
/// the sweep continues.
pub fn sweep(cfg: &SweepConfig, exec: Execution) -> Result<Vec<SweepRecord>> {
    let points = cfg.points();
    if points.is_empty() {
        return Err(Error::EmptyGrid(cfg.to_string()));
    }
    Ok(exec.map(&points, |p| SweepRecord { point: p.clone(), report: run_point(cfg, p).map_err(|e| e.to_string()) }))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn point_fields(p: &SweepPoint) -> [String; 5] {
    [p.len.to_string(), p.delta_omega.to_string(), p.k.to_string(), p.seed.to_string(), p.gate.clone()]
}

/// One row per (grid point, basis state j). Frequencies in units of J,
/// phases in rad, probabilities dimensionless.
pub fn write_states_csv(records: &[SweepRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "L",
        "delta_omega",
        "k",
        "seed",
        "gate",
        "j",
        "B_j^2",
        "Bp_j^2",
        "phase_dev_rad",
        "P_j",
        "rel_P_j",
    ])?;
    for rec in records {
        let Ok(r) = &rec.report else { continue };
        for j in 0..r.prob_errors.len() {
            let [l, d, k, s, g] = point_fields(&rec.point);
            w.write_record([
                l,
                d,
                k,
                s,
                g,
                j.to_string(),
                r.ideal_probabilities[j].to_string(),
                r.simulated_probabilities[j].to_string(),
                opt(r.per_state_phase_dev[j]),
                r.prob_errors[j].to_string(),
                opt(r.relative_prob_errors[j]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per grid point; failed points carry their error and empty metrics.
pub fn write_summary_csv(records: &[SweepRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "L",
        "delta_omega",
        "k",
        "seed",
        "gate",
        "max_phase_error_rad",
        "phase_spread_rad",
        "mu",
        "q_pulse_count",
        "norm_drift",
        "error",
    ])?;
    for rec in records {
        let [l, d, k, s, g] = point_fields(&rec.point);
        let row = match &rec.report {
            Ok(r) => [
                r.max_phase_error.to_string(),
                r.phase_spread.to_string(),
                r.mu.to_string(),
                r.q_pulse_count.to_string(),
                r.norm_drift.to_string(),
                String::new(),
            ],
            Err(e) => [String::new(), String::new(), String::new(), String::new(), String::new(), e.clone()],
        };
        w.write_record([l, d, k, s, g].into_iter().chain(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Phase error after each completed elementary gate.
pub fn write_series_csv(records: &[SweepRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["L", "delta_omega", "k", "seed", "gate", "gate_index", "q_pulses", "max_phase_error_rad"])?;
    for rec in records {
        let Ok(r) = &rec.report else { continue };
        for (n, (e, q)) in r.phase_error_series.iter().zip(&r.series_q_pulses).enumerate() {
            let [l, d, k, s, g] = point_fields(&rec.point);
            w.write_record([l, d, k, s, g, (n + 1).to_string(), q.to_string(), e.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
