//! Interaction-picture state vectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NORM_TOLERANCE: f64 = 1e-10;
/// |b_j|² below this has no meaningful phase.
pub const PHASE_FLOOR: f64 = 1e-12;

/// Coefficients C_p(t) with the free phases e^{−iE_p t} factored out.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

impl QuantumState {
    pub fn basis(len: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes, time: 0.0 }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Dimension { expected: n.next_power_of_two().max(2), got: n });
        }
        Ok(QuantumState { amplitudes, time: 0.0 })
    }

    pub fn at_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        self.amplitudes.iter_mut().for_each(|c| *c /= n);
        self
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn to_records(&self) -> Vec<AmplitudeRecord> {
        self.amplitudes.iter().enumerate().map(|(index, c)| AmplitudeRecord { index, re: c.re, im: c.im }).collect()
    }

    /// Missing indices are zero.
    pub fn from_records(len: usize, records: &[AmplitudeRecord]) -> Result<Self> {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << len];
        for r in records {
            let slot = amplitudes.get_mut(r.index).ok_or(Error::Dimension { expected: 1 << len, got: r.index + 1 })?;
            *slot = Complex64::new(r.re, r.im);
        }
        Ok(QuantumState { amplitudes, time: 0.0 })
    }
}

/// Reduce to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateComparison {
    pub fidelity: f64,
    /// Phase of `a` relative to `b`: arg Σ b_j* a_j.
    pub global_phase: f64,
    pub max_phase_dev: f64,
    pub max_prob_dev: f64,
}

pub fn compare_states(a: &QuantumState, b: &QuantumState) -> Result<StateComparison> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: b.dim(), got: a.dim() });
    }
    let overlap: Complex64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| y.conj() * x).sum();
    let global_phase = overlap.arg();
    let mut max_phase_dev: f64 = 0.0;
    let mut max_prob_dev: f64 = 0.0;
    for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
        max_prob_dev = max_prob_dev.max((x.norm_sqr() - y.norm_sqr()).abs());
        if y.norm_sqr() >= PHASE_FLOOR {
            let dev = wrap_phase(x.arg() - y.arg() - global_phase);
            max_phase_dev = max_phase_dev.max(dev.abs());
        }
    }
    Ok(StateComparison { fidelity: overlap.norm_sqr(), global_phase, max_phase_dev, max_prob_dev })
}
