//! Phase ledger of the composite Q pulses: the exact phase a basis state picks
//! up under each pulse class, depending on the target bit and its neighbors.
//!
//! With s = +1 for target bit 0 and −1 for target bit 1, and K = kπ for each
//! 2πk-suppressed transition (the (−1)^k = cos πk factor of a full generalized
//! rotation; invisible for even k):
//!
//! | class      | neighbors     | action                                     |
//! |------------|---------------|--------------------------------------------|
//! | Q^{01}     | 10 / 01       | resonant                                   |
//! | Q^{01}     | 00            | −sθ + K                                    |
//! | Q^{01}     | 11            | +sθ + K                                    |
//! | Q^{00}     | 00            | resonant, then −s'γ + K on each branch     |
//! | Q^{00}     | mixed         | π + s(θ/2 + Θ)                             |
//! | Q^{00}     | 11            | s(θ + γ) + 2K                              |
//! | Q^{11}     | 11            | resonant, then +s'γ + K on each branch     |
//! | Q^{11}     | mixed         | π − s(θ/2 + Θ)                             |
//! | Q^{11}     | 00            | −s(θ + γ) + 2K                             |
//! | Q^{m} edge | neighbor m    | resonant                                   |
//! | Q^{0} edge | neighbor 1    | +sθ + K                                    |
//! | Q^{1} edge | neighbor 0    | −sθ + K                                    |
//!
//! Resonant: the flipped branch gains π/2 − sφ (a full pulse flips; a partial
//! ρ pulse keeps cos(ρπ/2) with phase 0 and moves sin(ρπ/2)). s' is the sign of
//! the branch's bit after the main pulse. Partial pulses use θ_ρ, Θ_ρ, γ_ρ.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::NeighborContext;
use crate::error::{Error, Result};
use crate::symbolic::{Symbol, SymbolicPhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseClass {
    /// Q^{01}: resonant for one neighbor up, one down.
    Mixed,
    /// Q^{00}: both neighbors 0, composite.
    Zeros,
    /// Q^{11}: both neighbors 1, composite.
    Ones,
    /// Q^{m} on an edge qubit: its single neighbor is m.
    Edge(u8),
}

impl PulseClass {
    pub fn is_interior(self) -> bool {
        !matches!(self, PulseClass::Edge(_))
    }

    pub fn is_composite(self) -> bool {
        matches!(self, PulseClass::Zeros | PulseClass::Ones)
    }

    pub fn resonant(self, ctx: NeighborContext) -> Result<bool> {
        Ok(match (self, ctx) {
            (PulseClass::Mixed, NeighborContext::Interior { .. }) => ctx.ones() == 1,
            (PulseClass::Zeros, NeighborContext::Interior { .. }) => ctx.ones() == 0,
            (PulseClass::Ones, NeighborContext::Interior { .. }) => ctx.ones() == 2,
            (PulseClass::Edge(m), NeighborContext::Edge { neighbor }) => m == neighbor,
            _ => return Err(Error::Gate(format!("pulse class {self} does not apply to context {ctx}"))),
        })
    }
}

impl fmt::Display for PulseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseClass::Mixed => f.write_str("01"),
            PulseClass::Zeros => f.write_str("00"),
            PulseClass::Ones => f.write_str("11"),
            PulseClass::Edge(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for PulseClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "01" | "10" => Ok(PulseClass::Mixed),
            "00" => Ok(PulseClass::Zeros),
            "11" => Ok(PulseClass::Ones),
            "0" => Ok(PulseClass::Edge(0)),
            "1" => Ok(PulseClass::Edge(1)),
            other => Err(Error::Parse(format!("unknown pulse class '{other}'"))),
        }
    }
}

/// One composite pulse Q_i^{class}(φ); `partial` marks a ρ-rotation pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPulse {
    pub qubit: usize,
    pub class: PulseClass,
    pub phase: SymbolicPhase,
    pub partial: bool,
}

impl QPulse {
    pub fn new(qubit: usize, class: PulseClass, phase: SymbolicPhase) -> Self {
        QPulse { qubit, class, phase, partial: false }
    }

    pub fn partial(qubit: usize, class: PulseClass, phase: SymbolicPhase) -> Self {
        QPulse { qubit, class, phase, partial: true }
    }
}

impl fmt::Display for QPulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rho = if self.partial { "ρ" } else { "" };
        write!(f, "Q_{}{}^{}({})", self.qubit, rho, self.class, self.phase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LedgerOutcome {
    /// Bit unchanged, phase acquired.
    Stay(SymbolicPhase),
    /// Full flip, phase acquired by the flipped state.
    Flip(SymbolicPhase),
    /// Partial rotation: `stay` rides on cos(ρπ/2), `moved` on sin(ρπ/2).
    Split { stay: SymbolicPhase, moved: SymbolicPhase },
}

impl LedgerOutcome {
    pub fn flips(&self) -> bool {
        !matches!(self, LedgerOutcome::Stay(_))
    }

    /// Phase carried by the component whose target bit is `bit` afterwards
    /// (the Table III columns).
    pub fn phase_of_bit(&self, initial: u8, bit: u8) -> Option<&SymbolicPhase> {
        match self {
            LedgerOutcome::Stay(p) => (bit == initial).then_some(p),
            LedgerOutcome::Flip(p) => (bit != initial).then_some(p),
            LedgerOutcome::Split { stay, moved } => Some(if bit == initial { stay } else { moved }),
        }
    }
}

struct Angles {
    theta: SymbolicPhase,
    cap_theta: SymbolicPhase,
    gamma: SymbolicPhase,
}

impl Angles {
    fn for_pulse(partial: bool) -> Self {
        let (t, c, g) = if partial {
            (Symbol::ThetaRho, Symbol::CapThetaRho, Symbol::GammaRho)
        } else {
            (Symbol::Theta, Symbol::CapTheta, Symbol::Gamma)
        };
        Angles { theta: SymbolicPhase::symbol(t), cap_theta: SymbolicPhase::symbol(c), gamma: SymbolicPhase::symbol(g) }
    }
}

fn sign(bit: u8) -> i64 {
    if bit == 0 {
        1
    } else {
        -1
    }
}

/// Exact action of `pulse` on a basis state whose target bit is `target` and
/// whose neighbors are `ctx`.
pub fn ledger_phase(pulse: &QPulse, target: u8, ctx: NeighborContext, k: u32) -> Result<LedgerOutcome> {
    if target > 1 {
        return Err(Error::Gate(format!("target bit must be 0 or 1, got {target}")));
    }
    let a = Angles::for_pulse(pulse.partial);
    let s = sign(target);
    let kpi = SymbolicPhase::pi(k as i64, 1);
    let half = |x: &SymbolicPhase| x.scale(num_rational::Rational64::new(1, 2));

    if pulse.class.resonant(ctx)? {
        let moved = SymbolicPhase::pi(1, 2) - pulse.phase.clone() * s;
        // Composite pulses: the correcting pulse is 2πk-suppressed here.
        let tail = |bit_after: u8| -> SymbolicPhase {
            match pulse.class {
                PulseClass::Zeros => -(a.gamma.clone() * sign(bit_after)) + kpi.clone(),
                PulseClass::Ones => a.gamma.clone() * sign(bit_after) + kpi.clone(),
                _ => SymbolicPhase::zero(),
            }
        };
        let moved = moved + tail(1 - target);
        return Ok(if pulse.partial {
            LedgerOutcome::Split { stay: tail(target), moved }
        } else {
            LedgerOutcome::Flip(moved)
        });
    }

    let ones = ctx.ones();
    let phase = match pulse.class {
        PulseClass::Mixed if ones == 0 => -(a.theta.clone() * s) + kpi,
        PulseClass::Mixed => a.theta.clone() * s + kpi,
        PulseClass::Zeros if ones == 1 => SymbolicPhase::pi(1, 1) + (half(&a.theta) + a.cap_theta.clone()) * s,
        PulseClass::Zeros => (a.theta.clone() + a.gamma.clone()) * s + kpi.clone() * 2,
        PulseClass::Ones if ones == 1 => SymbolicPhase::pi(1, 1) - (half(&a.theta) + a.cap_theta.clone()) * s,
        PulseClass::Ones => -((a.theta.clone() + a.gamma.clone()) * s) + kpi.clone() * 2,
        PulseClass::Edge(0) => a.theta.clone() * s + kpi,
        PulseClass::Edge(_) => -(a.theta.clone() * s) + kpi,
    };
    Ok(LedgerOutcome::Stay(phase))
}
