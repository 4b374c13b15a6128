//! Pulse compiler and exact state-vector simulator for a homogeneous Ising
//! spin chain driven by rectangular rf pulses.
//!
//! Units: J = 1 sets the scale; frequencies are in units of J, times in 1/J,
//! phases in radians. Bit `i` of a basis index is qubit `i` (qubit 0 is the
//! least significant bit), and bit value 0 is the spin-up (+1/2) state.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod compiler;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod ledger;
pub mod params;
pub mod protocols;
pub mod state;
pub mod symbolic;
pub mod verify;

pub use chain::{exchange_constant, BasisState, ChainConfig, NeighborContext};
pub use compiler::{GateSpec, PulseProgram};
pub use dynamics::{apply_pulse, two_level_evolution, PulseSpec, Simulator};
pub use error::{Error, Result};
pub use exec::Execution;
pub use experiments::{ErrorReport, SweepConfig};
pub use ledger::{ledger_phase, LedgerOutcome, PulseClass, QPulse};
pub use params::{composite_params, rabi_for_pi_pulse, CompositeParams};
pub use protocols::IdealGate;
pub use state::{compare_states, QuantumState, StateComparison};
pub use symbolic::{Symbol, SymbolicPhase};
pub use verify::{symbolic_verify, VerifyReport};
