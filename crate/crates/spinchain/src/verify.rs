//! Exact verification of Q-pulse protocols by propagating basis
//! configurations through the phase ledger.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::chain::{BasisState, NeighborContext};
use crate::error::{Error, Result};
use crate::ledger::{ledger_phase, LedgerOutcome, QPulse};
use crate::protocols::{Gate, IdealGate};
use crate::symbolic::{Symbol, SymbolicPhase};

/// One term of a symbolic state: cos(ρπ/2)^c · sin(ρπ/2)^s · e^{i·phase}|state⟩.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub state: usize,
    pub cos_pow: u32,
    pub sin_pow: u32,
    pub phase: SymbolicPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub initial: usize,
    pub branches: Vec<Branch>,
    /// Branch phase minus the ideal branch phase, when the branches match.
    pub relative: Vec<SymbolicPhase>,
    pub matches_ideal: bool,
    pub unverifiable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub len: usize,
    /// Qubits whose configurations were enumerated.
    pub relevant: Vec<usize>,
    pub rows: Vec<VerifyRow>,
    pub permutation_ok: bool,
    pub phases_equal: bool,
    pub common_phase: Option<SymbolicPhase>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.permutation_ok && self.phases_equal && self.rows.iter().all(|r| r.unverifiable.is_none())
    }
}

/// Propagates one basis state; `Err(reason)` when branches collide.
pub fn propagate(
    seq: &[QPulse],
    initial: usize,
    len: usize,
    k: u32,
) -> Result<std::result::Result<Vec<Branch>, String>> {
    let mut branches = vec![Branch { state: initial, cos_pow: 0, sin_pow: 0, phase: SymbolicPhase::zero() }];
    for pulse in seq {
        if pulse.qubit >= len {
            return Err(Error::Gate(format!("{pulse} outside an L={len} chain")));
        }
        let mut next: Vec<Branch> = Vec::with_capacity(branches.len());
        for b in branches {
            let s = BasisState(b.state);
            let ctx = NeighborContext::in_chain(len, s, pulse.qubit);
            let flipped = s.flip(pulse.qubit).0;
            match ledger_phase(pulse, s.bit(pulse.qubit), ctx, k)? {
                LedgerOutcome::Stay(p) => next.push(Branch { phase: b.phase + p, ..b }),
                LedgerOutcome::Flip(p) => next.push(Branch { state: flipped, phase: b.phase + p, ..b }),
                LedgerOutcome::Split { stay, moved } => {
                    next.push(Branch { cos_pow: b.cos_pow + 1, phase: b.phase.clone() + stay, ..b.clone() });
                    next.push(Branch { state: flipped, sin_pow: b.sin_pow + 1, phase: b.phase + moved, ..b });
                }
            }
        }
        for (n, b) in next.iter().enumerate() {
            if next[..n].iter().any(|o| o.state == b.state) {
                return Ok(Err(format!("branches interfere on |{}⟩ after {pulse}", BasisState(b.state).label(len))));
            }
        }
        branches = next;
    }
    branches.sort_by_key(|b| b.state);
    Ok(Ok(branches))
}

/// Ideal branches in the same symbolic form; rotations use the symbol `phi`.
pub fn ideal_branches(gate: &Gate, initial: usize) -> Vec<Branch> {
    let mut out: Vec<Branch> = match *gate {
        Gate::Rotation { qubit, .. } => {
            let bit = (initial >> qubit) & 1;
            let sign = if bit == 0 { 1 } else { -1 };
            vec![
                Branch { state: initial, cos_pow: 1, sin_pow: 0, phase: SymbolicPhase::zero() },
                Branch {
                    state: initial ^ (1 << qubit),
                    cos_pow: 0,
                    sin_pow: 1,
                    phase: SymbolicPhase::pi(1, 2) + SymbolicPhase::named("phi") * sign,
                },
            ]
        }
        _ => gate
            .apply_basis(initial)
            .into_iter()
            .map(|(state, _)| Branch { state, cos_pow: 0, sin_pow: 0, phase: SymbolicPhase::zero() })
            .collect(),
    };
    out.sort_by_key(|b| b.state);
    out
}

/// Qubits touched by the sequence plus their chain neighbors.
pub fn relevant_qubits(seq: &[QPulse], len: usize) -> Vec<usize> {
    let mut q: Vec<usize> = seq
        .iter()
        .flat_map(|p| [p.qubit.checked_sub(1), Some(p.qubit), Some(p.qubit + 1)])
        .flatten()
        .filter(|&i| i < len)
        .collect();
    q.sort_unstable();
    q.dedup();
    q
}

fn spread(bits: usize, qubits: &[usize]) -> usize {
    qubits.iter().enumerate().map(|(n, &q)| ((bits >> n) & 1) << q).sum()
}

/// Checks a sequence against an ideal gate over every configuration of the
/// relevant qubits (all others held at 0).
pub fn symbolic_verify(seq: &[QPulse], ideal: &IdealGate, len: usize, k: u32) -> Result<VerifyReport> {
    let relevant = relevant_qubits(seq, len);
    let mut rows = Vec::with_capacity(1 << relevant.len());
    for bits in 0..1usize << relevant.len() {
        let initial = spread(bits, &relevant);
        let row = match propagate(seq, initial, len, k)? {
            Err(reason) => VerifyRow {
                initial,
                branches: Vec::new(),
                relative: Vec::new(),
                matches_ideal: false,
                unverifiable: Some(reason),
            },
            Ok(branches) => {
                let want = ideal_branches(&ideal.gate, initial);
                let matches = branches.len() == want.len()
                    && branches
                        .iter()
                        .zip(&want)
                        .all(|(b, w)| b.state == w.state && b.cos_pow == w.cos_pow && b.sin_pow == w.sin_pow);
                let relative = if matches {
                    branches.iter().zip(&want).map(|(b, w)| b.phase.clone() - w.phase.clone()).collect()
                } else {
                    Vec::new()
                };
                VerifyRow { initial, branches, relative, matches_ideal: matches, unverifiable: None }
            }
        };
        rows.push(row);
    }
    let permutation_ok = rows.iter().all(|r| r.matches_ideal);
    let all: Vec<&SymbolicPhase> = rows.iter().flat_map(|r| r.relative.iter()).collect();
    let phases_equal = permutation_ok && all.windows(2).all(|w| w[0].equivalent(w[1]));
    let common_phase = if phases_equal { all.first().map(|p| p.reduced()) } else { None };
    Ok(VerifyReport { len, relevant, rows, permutation_ok, phases_equal, common_phase })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub pulse: QPulse,
    pub acquired: SymbolicPhase,
    pub cumulative: SymbolicPhase,
    pub state: usize,
}

/// Pulse-by-pulse history of one basis state (full-rotation pulses only).
pub fn trace(seq: &[QPulse], initial: usize, len: usize, k: u32) -> Result<Vec<TraceStep>> {
    let mut state = initial;
    let mut cumulative = SymbolicPhase::zero();
    let mut out = Vec::with_capacity(seq.len());
    for pulse in seq {
        let s = BasisState(state);
        let ctx = NeighborContext::in_chain(len, s, pulse.qubit);
        let acquired = match ledger_phase(pulse, s.bit(pulse.qubit), ctx, k)? {
            LedgerOutcome::Stay(p) => p,
            LedgerOutcome::Flip(p) => {
                state = s.flip(pulse.qubit).0;
                p
            }
            LedgerOutcome::Split { .. } => {
                return Err(Error::Gate(format!("{pulse} splits the state; no single trace")))
            }
        };
        cumulative += acquired.clone();
        out.push(TraceStep { pulse: pulse.clone(), acquired, cumulative: cumulative.clone(), state });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equalization {
    /// Values of the unknown phases (free ones set to 0), if any exist.
    pub solution: Option<BTreeMap<String, SymbolicPhase>>,
    pub free: Vec<String>,
    pub common_phase: Option<SymbolicPhase>,
}

/// Solves for the named pulse phases `unknowns` that make every configuration
/// acquire the same phase relative to the ideal gate. Exact Gauss–Jordan
/// elimination over the rationals; pivots follow the order of `unknowns`, so
/// trailing unknowns are the ones left free.
pub fn equalize(seq: &[QPulse], ideal: &IdealGate, len: usize, k: u32, unknowns: &[&str]) -> Result<Equalization> {
    let report = symbolic_verify(seq, ideal, len, k)?;
    if !report.permutation_ok {
        return Err(Error::Gate("sequence does not realize the ideal permutation".into()));
    }
    let rel: Vec<SymbolicPhase> = report.rows.iter().flat_map(|r| r.relative.clone()).collect();
    let syms: Vec<Symbol> = unknowns.iter().map(|n| Symbol::Phase(n.to_string())).collect();
    let split = |p: &SymbolicPhase| -> (Vec<Rational64>, SymbolicPhase) {
        let coeffs: Vec<Rational64> = syms.iter().map(|s| p.coefficient(s)).collect();
        let rest = unknowns.iter().fold(p.clone(), |acc, n| acc.substitute(n, &SymbolicPhase::zero()));
        (coeffs, -rest)
    };
    let mut rows: Vec<(Vec<Rational64>, SymbolicPhase)> =
        rel.iter().skip(1).map(|r| split(&(r.clone() - rel[0].clone()))).collect();

    let n = syms.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(found) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let inv = Rational64::one() / rows[r].0[col];
        rows[r].0.iter_mut().for_each(|c| *c *= inv);
        rows[r].1 = rows[r].1.scale(inv);
        for i in 0..rows.len() {
            if i != r && !rows[i].0[col].is_zero() {
                let f = rows[i].0[col];
                let (pc, pr) = (rows[r].0.clone(), rows[r].1.clone());
                rows[i].0.iter_mut().zip(&pc).for_each(|(c, p)| *c -= f * p);
                rows[i].1 -= pr.scale(f);
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<String> = (0..n).filter(|c| !pivots.contains(c)).map(|c| unknowns[c].to_string()).collect();
    let consistent = rows[r..].iter().all(|(_, rhs)| rhs.reduced().is_zero());
    if !consistent {
        return Ok(Equalization { solution: None, free, common_phase: None });
    }
    let mut solution: BTreeMap<String, SymbolicPhase> =
        unknowns.iter().map(|u| (u.to_string(), SymbolicPhase::zero())).collect();
    for (row, &col) in pivots.iter().enumerate() {
        solution.insert(unknowns[col].to_string(), rows[row].1.clone());
    }
    let common = solution.iter().fold(rel[0].clone(), |acc, (n, v)| acc.substitute(n, v)).reduced();
    Ok(Equalization { solution: Some(solution), free, common_phase: Some(common) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{
        cn_eight_pulse, cn_interior, cn_interior_with, free_phases, not_edge, not_interior, CN_PHASES,
    };
    use crate::symbolic::ph;

    fn ideal(gate: Gate) -> IdealGate {
        IdealGate::new(gate, SymbolicPhase::zero())
    }

    #[test]
    fn not_protocols_pi_over_two() {
        for (seq, i) in [(not_interior(2), 2), (not_edge(0), 0), (not_edge(4), 4)] {
            let r = symbolic_verify(&seq, &ideal(Gate::Not(i)), 5, 2).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.common_phase, Some(ph("pi/2")));
        }
    }

    #[test]
    fn cn_interior_all_sixteen_rows() {
        for (a, b) in [(1, 2), (2, 1)] {
            let r = symbolic_verify(&cn_interior(a, b), &ideal(Gate::Cn { control: a, target: b }), 4, 2).unwrap();
            assert_eq!(r.rows.len(), 16);
            assert!(r.passed());
            assert_eq!(r.common_phase, Some(ph("pi/4")));
        }
    }

    #[test]
    fn eight_pulse_cn_cannot_be_equalized() {
        let names: Vec<String> = (1..=8).map(|n| format!("phi{n}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let eq = equalize(&cn_eight_pulse(1, 2), &ideal(Gate::Cn { control: 1, target: 2 }), 4, 2, &names).unwrap();
        assert!(eq.solution.is_none());
    }

    #[test]
    fn twelve_pulse_solution_reproduces_printed_phases() {
        let names: Vec<String> = (1..=10).map(|n| format!("phi{n}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let seq = cn_interior_with(1, 2, &free_phases::<10>());
        let eq = equalize(&seq, &ideal(Gate::Cn { control: 1, target: 2 }), 4, 2, &names).unwrap();
        assert_eq!(eq.free, ["phi9", "phi10"]);
        let sol = eq.solution.unwrap();
        for (n, printed) in CN_PHASES.iter().enumerate() {
            assert!(
                sol[&format!("phi{}", n + 1)].equivalent(&ph(printed)),
                "phi{}: {}",
                n + 1,
                sol[&format!("phi{}", n + 1)]
            );
        }
        assert_eq!(eq.common_phase, Some(ph("pi/4")));
    }

    #[test]
    fn interference_is_unverifiable() {
        let seq = vec![QPulse::partial(0, crate::ledger::PulseClass::Edge(0), ph("0")); 2];
        let r = symbolic_verify(&seq, &ideal(Gate::Not(0)), 3, 2).unwrap();
        assert!(!r.passed());
        assert!(r.rows.iter().any(|row| row.unverifiable.is_some()));
    }
}
