//! Lowering of logical gates to timed rectangular-pulse programs.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{transition_frequency, ChainConfig, NeighborContext};
use crate::dynamics::PulseSpec;
use crate::error::{Error, Result};
use crate::ledger::PulseClass;
use crate::params::{correcting_pulse_spec, CompositeParams, CorrectionKind};
pub use crate::protocols::Gate as GateSpec;
use crate::protocols::{blocks, Block, Gate, IdealGate};
use crate::symbolic::{PhaseValues, SymbolicPhase};
use crate::verify::{equalize, symbolic_verify};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseRole {
    Single,
    Main,
    Correcting,
}

impl PulseRole {
    fn as_str(self) -> &'static str {
        match self {
            PulseRole::Single => "single",
            PulseRole::Main => "main",
            PulseRole::Correcting => "corr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    /// Index into `PulseProgram::gates`.
    pub gate: usize,
    /// Index of the Q pulse within the program.
    pub q_index: usize,
    pub qubit: usize,
    pub class: PulseClass,
    pub partial: bool,
    pub role: PulseRole,
}

/// An elementary gate occupying pulses `start..end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateMark {
    pub gate: Gate,
    pub start: usize,
    pub end: usize,
    /// Verified global phase of this elementary protocol.
    pub overall_phase: SymbolicPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub config: ChainConfig,
    /// The gate as requested (before decomposition).
    pub gate: Option<Gate>,
    pub pulses: Vec<PulseSpec>,
    pub annotations: Vec<Annotation>,
    pub gates: Vec<GateMark>,
    pub total_duration: f64,
    pub q_pulse_count: usize,
}

impl PulseProgram {
    fn empty(config: ChainConfig, gate: Option<Gate>) -> Self {
        PulseProgram {
            config,
            gate,
            pulses: Vec::new(),
            annotations: Vec::new(),
            gates: Vec::new(),
            total_duration: 0.0,
            q_pulse_count: 0,
        }
    }

    pub fn start_time(&self) -> f64 {
        self.pulses.first().map_or(0.0, |p| p.t0)
    }

    pub fn end_time(&self) -> f64 {
        self.pulses.last().map_or(0.0, |p| p.end())
    }

    /// Sum of the elementary overall phases.
    pub fn overall_phase(&self) -> SymbolicPhase {
        self.gates.iter().fold(SymbolicPhase::zero(), |acc, g| acc + g.overall_phase.clone()).reduced()
    }

    pub fn ideal(&self) -> Option<IdealGate> {
        self.gate.map(|g| IdealGate::new(g, self.overall_phase()))
    }

    /// Checks contiguity, positivity and annotation completeness.
    pub fn validate(&self) -> Result<()> {
        if self.annotations.len() != self.pulses.len() {
            return Err(Error::Gate("annotation count differs from pulse count".into()));
        }
        for (n, w) in self.pulses.windows(2).enumerate() {
            if w[1].t0 != w[0].end() {
                return Err(Error::Gate(format!("pulse {} does not start where pulse {n} ends", n + 1)));
            }
        }
        if let Some(p) = self.pulses.iter().find(|p| !(p.tau > 0.0 && p.omega_rabi > 0.0)) {
            return Err(Error::Gate(format!("non-positive duration or Rabi frequency: {p:?}")));
        }
        let mut next = 0;
        for (g, mark) in self.gates.iter().enumerate() {
            if mark.start != next || mark.end < mark.start {
                return Err(Error::Gate(format!("gate {g} does not tile the program")));
            }
            if self.annotations[mark.start..mark.end].iter().any(|a| a.gate != g) {
                return Err(Error::Gate(format!("gate {g} annotations disagree")));
            }
            next = mark.end;
        }
        if next != self.pulses.len() {
            return Err(Error::Gate("gates do not cover every pulse".into()));
        }
        Ok(())
    }

    fn append(&mut self, block: &Block, overall_phase: SymbolicPhase, lowered: Vec<(PulseSpec, Annotation)>) {
        let start = self.pulses.len();
        for (p, a) in lowered {
            self.pulses.push(p);
            self.annotations.push(a);
        }
        self.gates.push(GateMark { gate: block.gate, start, end: self.pulses.len(), overall_phase });
        self.q_pulse_count += block.pulses.len();
        self.total_duration = self.end_time() - self.start_time();
    }

    /// Line-oriented text: `t0 tau nu omega_rabi phi # annotation`,
    /// 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "# spinchain pulse program; units: frequencies in J, times in 1/J, phases in rad");
        let _ = writeln!(
            s,
            "# config L={} w={:.16e} delta_omega={:.16e} J={:.16e} k={}",
            c.len, c.w, c.delta_omega, c.j, c.k
        );
        if let Some(g) = &self.gate {
            let _ = writeln!(s, "# program {g}");
        }
        let _ = writeln!(s, "# q_pulse_count={} total_duration={:.16e}", self.q_pulse_count, self.total_duration);
        for (n, g) in self.gates.iter().enumerate() {
            let _ = writeln!(s, "# gate {n} {} | overall_phase={}", g.gate, g.overall_phase);
        }
        let _ = writeln!(s, "# t0 tau nu omega_rabi phi # gate q-pulse role");
        for (p, a) in self.pulses.iter().zip(&self.annotations) {
            let rho = if a.partial { "r" } else { "" };
            let _ = writeln!(
                s,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} # g{} q{} Q{}{}^{} {}",
                p.t0,
                p.tau,
                p.nu,
                p.omega_rabi,
                p.phi,
                a.gate,
                a.q_index,
                a.qubit,
                rho,
                a.class,
                a.role.as_str()
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |n: usize, what: &str| Error::Parse(format!("program line {}: {what}", n + 1));
        let mut config = None;
        let mut gate = None;
        let mut marks: Vec<(Gate, SymbolicPhase)> = Vec::new();
        let mut prog_pulses = Vec::new();
        let mut annotations = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# config ") {
                let mut kv = std::collections::HashMap::new();
                for item in rest.split_whitespace() {
                    let (k, v) = item.split_once('=').ok_or_else(|| bad(n, "bad config entry"))?;
                    kv.insert(k, v);
                }
                let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(n, "incomplete config"));
                let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(n, "bad config number")) };
                config = Some(ChainConfig::new(
                    get("L")?.parse().map_err(|_| bad(n, "bad L"))?,
                    num("w")?,
                    num("delta_omega")?,
                    num("J")?,
                    get("k")?.parse().map_err(|_| bad(n, "bad k"))?,
                )?);
            } else if let Some(rest) = line.strip_prefix("# program ") {
                gate = Some(rest.parse()?);
            } else if let Some(rest) = line.strip_prefix("# gate ") {
                let (head, phase) = rest.split_once(" | overall_phase=").ok_or_else(|| bad(n, "bad gate header"))?;
                let (_, desc) = head.split_once(' ').ok_or_else(|| bad(n, "bad gate header"))?;
                marks.push((desc.parse()?, phase.parse()?));
            } else if line.starts_with('#') {
                continue;
            } else {
                let (nums, ann) = line.split_once('#').ok_or_else(|| bad(n, "missing annotation"))?;
                let v: Vec<f64> = nums
                    .split_whitespace()
                    .map(|x| x.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(n, "bad number"))?;
                if v.len() != 5 {
                    return Err(bad(n, "expected 5 numbers"));
                }
                prog_pulses.push(PulseSpec { t0: v[0], tau: v[1], nu: v[2], omega_rabi: v[3], phi: v[4] });
                annotations.push(parse_annotation(ann).ok_or_else(|| bad(n, "bad annotation"))?);
            }
        }
        let config = config.ok_or_else(|| Error::Parse("program has no config header".into()))?;
        let mut prog = PulseProgram::empty(config, gate);
        for (g, (gate, phase)) in marks.into_iter().enumerate() {
            let start = annotations.iter().position(|a| a.gate == g).unwrap_or(prog_pulses.len());
            let end = annotations.iter().rposition(|a| a.gate == g).map_or(start, |e| e + 1);
            prog.gates.push(GateMark { gate, start, end, overall_phase: phase });
        }
        prog.q_pulse_count = annotations.iter().map(|a| a.q_index + 1).max().unwrap_or(0);
        prog.pulses = prog_pulses;
        prog.annotations = annotations;
        prog.total_duration = prog.end_time() - prog.start_time();
        prog.validate()?;
        Ok(prog)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let prog: PulseProgram = serde_json::from_str(s)?;
        prog.validate()?;
        Ok(prog)
    }

    /// Reads text or JSON, by content.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        if s.trim_start().starts_with('{') {
            Self::from_json(&s)
        } else {
            Self::from_text(&s)
        }
    }
}

fn parse_annotation(s: &str) -> Option<Annotation> {
    let w: Vec<&str> = s.split_whitespace().collect();
    let [g, q, pulse, role] = w.as_slice() else {
        return None;
    };
    let gate = g.strip_prefix('g')?.parse().ok()?;
    let q_index = q.strip_prefix('q')?.parse().ok()?;
    let (head, class) = pulse.strip_prefix('Q')?.split_once('^')?;
    let (qubit, partial) = match head.strip_suffix('r') {
        Some(h) => (h.parse().ok()?, true),
        None => (head.parse().ok()?, false),
    };
    let role = match *role {
        "single" => PulseRole::Single,
        "main" => PulseRole::Main,
        "corr" => PulseRole::Correcting,
        _ => return None,
    };
    Some(Annotation { gate, q_index, qubit, class: class.parse().ok()?, partial, role })
}

fn check_class(i: usize, class: PulseClass, cfg: &ChainConfig) -> Result<()> {
    if i >= cfg.len || class.is_interior() == cfg.is_edge(i) {
        return Err(Error::Gate(format!("pulse class {class} cannot address qubit {i} of an L={} chain", cfg.len)));
    }
    Ok(())
}

/// Physical pulses of Q_i^{class}(φ) starting at `t_start`.
fn lower_q_pulse(
    i: usize,
    class: PulseClass,
    phi: f64,
    params: &CompositeParams,
    t_start: f64,
    cfg: &ChainConfig,
) -> Result<Vec<(PulseSpec, PulseRole)>> {
    check_class(i, class, cfg)?;
    let ctx = match class {
        PulseClass::Mixed => NeighborContext::Interior { left: 1, right: 0 },
        PulseClass::Zeros => NeighborContext::Interior { left: 0, right: 0 },
        PulseClass::Ones => NeighborContext::Interior { left: 1, right: 1 },
        PulseClass::Edge(m) => NeighborContext::Edge { neighbor: m },
    };
    let nu = transition_frequency(cfg, i, ctx)?;
    Ok(match class {
        PulseClass::Mixed | PulseClass::Edge(_) => {
            let p = PulseSpec { nu, omega_rabi: params.omega_single, phi, tau: params.tau_single, t0: t_start };
            vec![(p, PulseRole::Single)]
        }
        PulseClass::Zeros | PulseClass::Ones => {
            let main = PulseSpec { nu, omega_rabi: params.omega_main, phi, tau: params.tau_main, t0: t_start };
            let kind = if class == PulseClass::Zeros { CorrectionKind::Zeros } else { CorrectionKind::Ones };
            let mut corr = correcting_pulse_spec(kind, phi, t_start, i, cfg, params)?;
            corr.t0 = main.end();
            vec![(main, PulseRole::Main), (corr, PulseRole::Correcting)]
        }
    })
}

/// A single composite pulse as a program.
pub fn compile_q_pulse(
    i: usize,
    class: PulseClass,
    phi: f64,
    rho: f64,
    t_start: f64,
    cfg: &ChainConfig,
) -> Result<PulseProgram> {
    let params = CompositeParams::for_chain(cfg, rho)?;
    let mut prog = PulseProgram::empty(*cfg, None);
    for (p, role) in lower_q_pulse(i, class, phi, &params, t_start, cfg)? {
        prog.pulses.push(p);
        prog.annotations.push(Annotation { gate: 0, q_index: 0, qubit: i, class, partial: rho < 1.0, role });
    }
    prog.gates.push(GateMark {
        gate: Gate::Not(i),
        start: 0,
        end: prog.pulses.len(),
        overall_phase: SymbolicPhase::zero(),
    });
    prog.q_pulse_count = 1;
    prog.total_duration = prog.end_time() - prog.start_time();
    Ok(prog)
}

fn verify_block(block: &Block, k: u32, len: usize) -> Result<Option<SymbolicPhase>> {
    let ideal = IdealGate::new(block.gate, SymbolicPhase::zero());
    let report = symbolic_verify(&block.pulses, &ideal, len, k)?;
    Ok(if report.passed() { Some(report.common_phase.unwrap_or_default()) } else { None })
}

/// The block with phases valid for `cfg.k`, and its verified global phase.
///
/// Printed protocol phases assume (−1)^k = 1; when they fail to verify (odd
/// k), each pulse phase gets an unknown offset solved for exactly.
pub fn resolve_block(block: &Block, cfg: &ChainConfig) -> Result<(Block, SymbolicPhase)> {
    if let Some(p) = verify_block(block, cfg.k, cfg.len)? {
        return Ok((block.clone(), p));
    }
    let names: Vec<String> = (1..=block.pulses.len()).map(|n| format!("offset{n}")).collect();
    let mut open = block.clone();
    for (q, name) in open.pulses.iter_mut().zip(&names) {
        q.phase += SymbolicPhase::named(name);
    }
    let unknowns: Vec<&str> = names.iter().map(String::as_str).collect();
    let ideal = IdealGate::new(block.gate, SymbolicPhase::zero());
    let solved = equalize(&open.pulses, &ideal, cfg.len, cfg.k, &unknowns)?;
    let unverified =
        || Error::Gate(format!("protocol for '{}' cannot be phase-equalized for k = {}", block.gate, cfg.k));
    let solution = solved.solution.ok_or_else(unverified)?;
    for q in open.pulses.iter_mut() {
        for (name, value) in &solution {
            q.phase = q.phase.substitute(name, value);
        }
        q.phase = q.phase.reduced();
    }
    let phase = verify_block(&open, cfg.k, cfg.len)?.ok_or_else(unverified)?;
    Ok((open, phase))
}

/// Verified global phase of an elementary block (exact, k-dependent).
pub fn block_overall_phase(block: &Block, cfg: &ChainConfig) -> Result<SymbolicPhase> {
    Ok(resolve_block(block, cfg)?.1)
}

/// Lowers `gate` starting at `t_start`.
pub fn compile_at(gate: &Gate, cfg: &ChainConfig, t_start: f64) -> Result<PulseProgram> {
    let full = CompositeParams::for_chain(cfg, 1.0)?;
    let mut prog = PulseProgram::empty(*cfg, Some(*gate));
    let mut t = t_start;
    let mut resolved: Vec<(Block, SymbolicPhase)> = Vec::new();
    for block in blocks(gate, cfg.len)? {
        let (block, overall) = match resolved.iter().find(|(b, _)| b.gate == block.gate) {
            Some(hit) => hit.clone(),
            None => {
                let hit = resolve_block(&block, cfg)?;
                resolved.push(hit.clone());
                hit
            }
        };
        let partial = CompositeParams::for_chain(cfg, block.rho)?;
        let mut values = PhaseValues::new(&full, &partial);
        if let Gate::Rotation { phi, .. } = block.gate {
            values = values.with("phi", phi);
        }
        let g = prog.gates.len();
        let mut lowered = Vec::new();
        for (n, q) in block.pulses.iter().enumerate() {
            let params = if q.partial { &partial } else { &full };
            let phi = q.phase.eval(&values)?;
            for (p, role) in lower_q_pulse(q.qubit, q.class, phi, params, t, cfg)? {
                t = p.end();
                let a = Annotation {
                    gate: g,
                    q_index: prog.q_pulse_count + n,
                    qubit: q.qubit,
                    class: q.class,
                    partial: q.partial,
                    role,
                };
                lowered.push((p, a));
            }
        }
        prog.append(&block, overall, lowered);
    }
    Ok(prog)
}

pub fn compile(gate: &Gate, cfg: &ChainConfig) -> Result<PulseProgram> {
    compile_at(gate, cfg, 0.0)
}

pub fn compile_not(i: usize, cfg: &ChainConfig) -> Result<PulseProgram> {
    compile(&Gate::Not(i), cfg)
}

pub fn compile_cn(control: usize, target: usize, cfg: &ChainConfig) -> Result<PulseProgram> {
    if control.abs_diff(target) != 1 {
        return Err(Error::Gate(format!("cn {control} {target}: qubits are not adjacent")));
    }
    compile(&Gate::Cn { control, target }, cfg)
}

pub fn compile_rotation(j: usize, rho: f64, phi: f64, cfg: &ChainConfig) -> Result<PulseProgram> {
    compile(&Gate::Rotation { qubit: j, rho, phi }, cfg)
}

pub fn compile_swap(i: usize, cfg: &ChainConfig) -> Result<PulseProgram> {
    compile(&Gate::Swap(i), cfg)
}

/// CN between the two ends of the chain through a swap chain.
pub fn compile_long_range_cn(cfg: &ChainConfig) -> Result<PulseProgram> {
    compile(&Gate::Cn { control: 0, target: cfg.len - 1 }, cfg)
}

/// Concatenates programs for the same chain, retiming each to follow the last.
pub fn sequence(cfg: &ChainConfig, gates: &[Gate]) -> Result<PulseProgram> {
    let mut out = PulseProgram::empty(*cfg, None);
    for gate in gates {
        let part = compile_at(gate, cfg, out.end_time())?;
        let (offset_gates, offset_q) = (out.gates.len(), out.q_pulse_count);
        let base = out.pulses.len();
        out.pulses.extend(part.pulses);
        out.annotations.extend(part.annotations.into_iter().map(|mut a| {
            a.gate += offset_gates;
            a.q_index += offset_q;
            a
        }));
        out.gates.extend(part.gates.into_iter().map(|mut m| {
            m.start += base;
            m.end += base;
            m
        }));
        out.q_pulse_count += part.q_pulse_count;
    }
    out.total_duration = out.end_time() - out.start_time();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::ph;
    use std::f64::consts::PI;

    fn cfg(len: usize) -> ChainConfig {
        ChainConfig::standard(len, 1e4).unwrap()
    }

    #[test]
    fn odd_k_blocks_are_phase_repaired() {
        let cn = Gate::Cn { control: 1, target: 2 };
        for k in [1, 2, 3] {
            let c = cfg(4).with_k(k).unwrap();
            let block = blocks(&cn, 4).unwrap().remove(0);
            let ideal = IdealGate::new(cn, SymbolicPhase::zero());
            let printed_ok = symbolic_verify(&block.pulses, &ideal, 4, k).unwrap().passed();
            assert_eq!(printed_ok, k % 2 == 0);
            let (repaired, phase) = resolve_block(&block, &c).unwrap();
            assert!(symbolic_verify(&repaired.pulses, &ideal, 4, k).unwrap().passed());
            assert_eq!(repaired == block, k % 2 == 0);
            let want = match k {
                1 => "3pi/4",
                2 => "pi/4",
                _ => "-pi/4",
            };
            assert_eq!(phase.reduced(), ph(want).reduced(), "k={k}");
        }
    }

    #[test]
    fn single_q_pulses() {
        let c = cfg(3);
        let p = compile_q_pulse(1, PulseClass::Mixed, 0.0, 1.0, 0.0, &c).unwrap();
        assert_eq!(p.pulses.len(), 1);
        let om = 2.0 / 15f64.sqrt();
        assert!((p.pulses[0].omega_rabi - om).abs() < 1e-15);
        assert!((p.pulses[0].tau - PI / om).abs() < 1e-12);
        let p = compile_q_pulse(1, PulseClass::Ones, 0.0, 1.0, 0.0, &c).unwrap();
        let params = CompositeParams::for_chain(&c, 1.0).unwrap();
        assert_eq!(p.pulses.len(), 2);
        assert_eq!(p.pulses[1].nu, c.larmor(1));
        assert!((p.pulses[1].tau - 2.0 * params.gamma / 2.0).abs() < 1e-12);
        assert!(compile_q_pulse(0, PulseClass::Zeros, 0.0, 1.0, 0.0, &c).is_err());
        assert!(compile_q_pulse(1, PulseClass::Edge(0), 0.0, 1.0, 0.0, &c).is_err());
    }

    #[test]
    fn not_programs() {
        let c = cfg(5);
        let edge = compile_not(0, &c).unwrap();
        assert_eq!(edge.pulses.len(), 2);
        assert_eq!(edge.overall_phase(), ph("pi/2"));
        let inner = compile_not(2, &c).unwrap();
        assert_eq!(inner.q_pulse_count, 3);
        assert_eq!(inner.pulses.len(), 5);
        assert_eq!(inner.overall_phase(), ph("pi/2"));
        let p = CompositeParams::for_chain(&c, 1.0).unwrap();
        assert!((inner.pulses[0].phi - (2.0 * p.gamma + 2.0 * p.theta)).abs() < 1e-12);
        inner.validate().unwrap();
    }

    #[test]
    fn cn_programs_and_phases() {
        let c = cfg(5);
        let inner = compile_cn(1, 2, &c).unwrap();
        assert_eq!(inner.q_pulse_count, 12);
        assert_eq!(inner.overall_phase(), ph("pi/4"));
        let p = CompositeParams::for_chain(&c, 1.0).unwrap();
        assert!((inner.pulses[0].phi - (-5.0 * p.theta - 2.0 * p.gamma)).abs() < 1e-12);
        assert_eq!(compile_cn(3, 4, &c).unwrap().overall_phase(), ph("-pi/4"));
        assert_eq!(compile_cn(0, 1, &c).unwrap().overall_phase(), ph("pi/4"));
        assert!(compile_cn(0, 2, &c).is_err());
    }

    #[test]
    fn long_range_count() {
        for len in 4..=7 {
            let p = compile_long_range_cn(&cfg(len)).unwrap();
            assert_eq!(p.q_pulse_count, 72 * (len - 2) - 5);
            p.validate().unwrap();
        }
    }

    #[test]
    fn rotation_overall_phase() {
        let c = cfg(4);
        for j in [0, 1, 3] {
            assert_eq!(compile_rotation(j, 0.5, 0.3, &c).unwrap().overall_phase(), ph("pi"));
        }
    }

    #[test]
    fn text_and_json_round_trip() {
        let c = cfg(4);
        let p = compile(&Gate::Swap(1), &c).unwrap();
        let back = PulseProgram::from_text(&p.to_text()).unwrap();
        assert_eq!(p, back);
        let back = PulseProgram::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, back);
        let r = compile_rotation(1, 0.5, -0.7, &c).unwrap();
        assert_eq!(PulseProgram::from_text(&r.to_text()).unwrap(), r);
    }

    #[test]
    fn sequences_stay_contiguous() {
        let c = cfg(4);
        let s = sequence(&c, &[Gate::Not(1), Gate::Cn { control: 1, target: 2 }]).unwrap();
        s.validate().unwrap();
        assert_eq!(s.q_pulse_count, 15);
        assert_eq!(s.gates.len(), 2);
    }
}
