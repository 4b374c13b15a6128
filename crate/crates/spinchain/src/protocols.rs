//! Logical gates and their Q-pulse protocols, written symbolically.
//!
//! Sequences are listed in application order (the reverse of the operator
//! products they realize). Rotations are parameterized by the symbol `phi`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{PulseClass, QPulse};
use crate::symbolic::{ph, SymbolicPhase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Not(usize),
    Cn {
        control: usize,
        target: usize,
    },
    /// Exchanges qubits i and i+1.
    Swap(usize),
    /// cos(ρπ/2)|0⟩ + i e^{iφ} sin(ρπ/2)|1⟩ on qubit j.
    Rotation {
        qubit: usize,
        rho: f64,
        phi: f64,
    },
}

impl Gate {
    pub fn validate(&self, len: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Gate(msg));
        match *self {
            Gate::Not(i) if i >= len => bad(format!("qubit {i} outside an L={len} chain")),
            Gate::Cn { control, target } if control >= len || target >= len => {
                bad(format!("cn {control} {target} outside an L={len} chain"))
            }
            Gate::Cn { control, target } if control == target => bad("control equals target".into()),
            Gate::Cn { .. } if len < 3 => bad("CN needs L >= 3 (no protocol with both qubits at edges)".into()),
            Gate::Swap(i) if i + 1 >= len => bad(format!("swap {i} {} outside an L={len} chain", i + 1)),
            Gate::Swap(_) if len < 3 => bad("swap needs L >= 3".into()),
            Gate::Rotation { qubit, .. } if qubit >= len => bad(format!("qubit {qubit} outside an L={len} chain")),
            Gate::Rotation { rho, phi, .. } if !(rho > 0.0 && rho <= 1.0) || !phi.is_finite() => {
                bad(format!("rotation needs 0 < rho <= 1 (got {rho}) and finite phi"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_long_range(&self) -> bool {
        matches!(*self, Gate::Cn { control, target } if control.abs_diff(target) > 1)
    }

    /// Basis action without the protocol's overall phase.
    pub fn apply_basis(&self, index: usize) -> Vec<(usize, Complex64)> {
        let bit = |i: usize| (index >> i) & 1;
        match *self {
            Gate::Not(i) => vec![(index ^ (1 << i), Complex64::new(1.0, 0.0))],
            Gate::Cn { control, target } => {
                vec![(index ^ (bit(control) << target), Complex64::new(1.0, 0.0))]
            }
            Gate::Swap(i) => {
                let swapped = if bit(i) != bit(i + 1) { index ^ (0b11 << i) } else { index };
                vec![(swapped, Complex64::new(1.0, 0.0))]
            }
            Gate::Rotation { qubit, rho, phi } => {
                let (s, c) = (rho * PI / 2.0).sin_cos();
                let sign = if bit(qubit) == 0 { 1.0 } else { -1.0 };
                let moved = Complex64::i() * Complex64::from_polar(s, sign * phi);
                vec![(index, Complex64::new(c, 0.0)), (index ^ (1 << qubit), moved)]
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Not(i) => write!(f, "not {i}"),
            Gate::Cn { control, target } => write!(f, "cn {control} {target}"),
            Gate::Swap(i) => write!(f, "swap {i}"),
            Gate::Rotation { qubit, rho, phi } => write!(f, "rot {qubit} {rho} {phi}"),
        }
    }
}

/// `not <i>` | `cn <a> <b>` | `swap <i>` | `rot <j> <rho> <phi>`.
impl FromStr for Gate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::Parse(format!("bad gate descriptor '{s}'"));
        let idx = |w: &str| w.parse::<usize>().map_err(|_| bad());
        let num = |w: &str| w.parse::<f64>().map_err(|_| bad());
        match words.as_slice() {
            ["not", i] => Ok(Gate::Not(idx(i)?)),
            ["cn", a, b] => Ok(Gate::Cn { control: idx(a)?, target: idx(b)? }),
            ["swap", i] => Ok(Gate::Swap(idx(i)?)),
            ["swap", i, j] if idx(j)? == idx(i)? + 1 => Ok(Gate::Swap(idx(i)?)),
            ["rot", j, rho, phi] => Ok(Gate::Rotation { qubit: idx(j)?, rho: num(rho)?, phi: num(phi)? }),
            _ => Err(bad()),
        }
    }
}

/// Target semantics of a gate together with the global phase its protocol
/// produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealGate {
    pub gate: Gate,
    pub overall_phase: SymbolicPhase,
}

impl IdealGate {
    pub fn new(gate: Gate, overall_phase: SymbolicPhase) -> Self {
        IdealGate { gate, overall_phase }
    }

    /// Basis action without the overall phase.
    pub fn apply_basis(&self, index: usize) -> Vec<(usize, Complex64)> {
        self.gate.apply_basis(index)
    }
}

/// One elementary protocol: the unit between phase-error samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub gate: Gate,
    pub pulses: Vec<QPulse>,
    /// Rotation fraction for partial pulses (1 otherwise).
    pub rho: f64,
}

fn q(qubit: usize, class: PulseClass, phase: &str) -> QPulse {
    QPulse::new(qubit, class, ph(phase))
}

fn qr(qubit: usize, class: PulseClass, phase: &str) -> QPulse {
    QPulse::partial(qubit, class, ph(phase))
}

use PulseClass::{Edge, Mixed, Ones, Zeros};

pub fn not_interior(i: usize) -> Vec<QPulse> {
    vec![q(i, Zeros, "2gamma + 2theta"), q(i, Mixed, "theta + 2Theta"), q(i, Ones, "2theta")]
}

pub fn not_edge(i: usize) -> Vec<QPulse> {
    vec![q(i, Edge(0), "theta"), q(i, Edge(1), "theta")]
}

/// Phases φ1…φ10 of the 12-pulse CN with both qubits interior.
pub const CN_PHASES: [&str; 10] = [
    "-5theta - 2gamma",
    "5/2 theta - Theta + gamma",
    "3pi/4 + 2theta - 4Theta + 2gamma",
    "3pi/4",
    "3pi/4",
    "-2Theta",
    "-5/2 theta + Theta - gamma",
    "2theta - 4Theta + 2gamma",
    "0",
    "0",
];

/// 12-pulse CN, control `a`, target `b`, both interior; `phases` = φ1…φ10.
pub fn cn_interior_with(a: usize, b: usize, phases: &[SymbolicPhase; 10]) -> Vec<QPulse> {
    let p = |n: usize| phases[n - 1].clone();
    let z = SymbolicPhase::zero;
    vec![
        QPulse::new(b, Ones, p(1)),
        QPulse::new(b, Mixed, p(2)),
        QPulse::new(b, Mixed, z()),
        QPulse::new(a, Zeros, p(3)),
        QPulse::new(a, Mixed, p(4)),
        QPulse::new(a, Ones, p(5)),
        QPulse::new(b, Zeros, p(6)),
        QPulse::new(b, Mixed, p(7)),
        QPulse::new(b, Mixed, z()),
        QPulse::new(a, Zeros, p(8)),
        QPulse::new(a, Mixed, p(9)),
        QPulse::new(a, Ones, p(10)),
    ]
}

pub fn cn_interior(a: usize, b: usize) -> Vec<QPulse> {
    cn_interior_with(a, b, &CN_PHASES.map(ph))
}

/// Free phases φ1…φn as named symbols `phi1`…
pub fn free_phases<const N: usize>() -> [SymbolicPhase; N] {
    std::array::from_fn(|n| SymbolicPhase::named(&format!("phi{}", n + 1)))
}

/// The 8-pulse CN attempt without the two extra Q_b^{01}(0) pairs, free phases.
pub fn cn_eight_pulse(a: usize, b: usize) -> Vec<QPulse> {
    let p = free_phases::<8>();
    vec![
        QPulse::new(b, Ones, p[0].clone()),
        QPulse::new(a, Zeros, p[1].clone()),
        QPulse::new(a, Mixed, p[2].clone()),
        QPulse::new(a, Ones, p[3].clone()),
        QPulse::new(b, Zeros, p[4].clone()),
        QPulse::new(a, Zeros, p[5].clone()),
        QPulse::new(a, Mixed, p[6].clone()),
        QPulse::new(a, Ones, p[7].clone()),
    ]
}

/// 9-pulse CN whose target `b` is an edge qubit.
pub fn cn_edge_target(a: usize, b: usize) -> Vec<QPulse> {
    vec![
        q(b, Edge(1), "-2theta"),
        q(b, Edge(0), "-theta"),
        q(b, Edge(0), "0"),
        q(a, Zeros, "pi/4"),
        q(a, Mixed, "pi/4"),
        q(a, Ones, "pi/4"),
        q(a, Zeros, "0"),
        q(a, Mixed, "0"),
        q(a, Ones, "0"),
    ]
}

/// 10-pulse CN whose control `a` is an edge qubit.
pub fn cn_edge_control(a: usize, b: usize) -> Vec<QPulse> {
    vec![
        q(b, Ones, "-2Theta"),
        q(b, Mixed, "5theta - 2Theta + 2gamma"),
        q(b, Mixed, "0"),
        q(a, Edge(0), "3pi/4 - 5/2 theta + Theta - gamma"),
        q(a, Edge(1), "3pi/4 + 5/2 theta - Theta + gamma"),
        q(b, Zeros, "-6theta + 2Theta - 2gamma"),
        q(b, Mixed, "0"),
        q(b, Mixed, "0"),
        q(a, Edge(0), "0"),
        q(a, Edge(1), "0"),
    ]
}

/// Partial rotation of an interior qubit (9 Q operations).
pub fn rotation_interior(j: usize) -> Vec<QPulse> {
    vec![
        q(j, Mixed, "0"),
        q(j, Mixed, "0"),
        qr(j, Ones, "4theta - phi"),
        q(j, Ones, "0"),
        q(j, Ones, "-2(gamma + 2theta + gamma_r + theta_r)"),
        qr(j, Zeros, "-4gamma - 8theta - phi - 2gamma_r - 2theta_r"),
        q(j, Zeros, "0"),
        q(j, Zeros, "2(gamma + 2theta + gamma_r + theta_r)"),
        qr(j, Mixed, "-phi"),
    ]
}

/// Partial rotation of an edge qubit (6 pulses).
pub fn rotation_edge(j: usize) -> Vec<QPulse> {
    vec![
        q(j, Edge(0), "0"),
        q(j, Edge(1), "0"),
        q(j, Edge(0), "theta_r"),
        q(j, Edge(1), "-theta_r"),
        qr(j, Edge(0), "-phi + 2theta_r"),
        qr(j, Edge(1), "-phi"),
    ]
}

fn cn_block(control: usize, target: usize, len: usize) -> Result<Block> {
    let edge = |i: usize| i == 0 || i + 1 == len;
    let pulses = match (edge(control), edge(target)) {
        (false, false) => cn_interior(control, target),
        (false, true) => cn_edge_target(control, target),
        (true, false) => cn_edge_control(control, target),
        (true, true) => {
            return Err(Error::Gate(format!("no CN protocol with both qubits {control}, {target} at edges")))
        }
    };
    Ok(Block { gate: Gate::Cn { control, target }, pulses, rho: 1.0 })
}

fn swap_blocks(i: usize, len: usize) -> Result<Vec<Block>> {
    Ok(vec![cn_block(i, i + 1, len)?, cn_block(i + 1, i, len)?, cn_block(i, i + 1, len)?])
}

/// Elementary protocol blocks realizing `gate` on an L-qubit chain.
///
/// A long-range CN moves the control next to the target through a swap chain,
/// applies the adjacent CN, and swaps back.
pub fn blocks(gate: &Gate, len: usize) -> Result<Vec<Block>> {
    gate.validate(len)?;
    let edge = |i: usize| i == 0 || i + 1 == len;
    match *gate {
        Gate::Not(i) => {
            let pulses = if edge(i) { not_edge(i) } else { not_interior(i) };
            Ok(vec![Block { gate: *gate, pulses, rho: 1.0 }])
        }
        Gate::Rotation { qubit, rho, .. } => {
            let pulses = if edge(qubit) { rotation_edge(qubit) } else { rotation_interior(qubit) };
            Ok(vec![Block { gate: *gate, pulses, rho }])
        }
        Gate::Swap(i) => swap_blocks(i, len),
        Gate::Cn { control, target } if control.abs_diff(target) == 1 => Ok(vec![cn_block(control, target, len)?]),
        Gate::Cn { control, target } => {
            let path: Vec<usize> =
                if control < target { (control..target - 1).collect() } else { (target + 1..control).rev().collect() };
            let mut out = Vec::new();
            for &i in &path {
                out.extend(swap_blocks(i, len)?);
            }
            let near = if control < target { target - 1 } else { target + 1 };
            out.push(cn_block(near, target, len)?);
            for &i in path.iter().rev() {
                out.extend(swap_blocks(i, len)?);
            }
            Ok(out)
        }
    }
}
