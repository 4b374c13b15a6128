//! Exact evolution of the 2^L interaction-picture amplitudes under one
//! rectangular rf pulse.
//!
//! In the frame rotating at the carrier ν the Hamiltonian is time independent:
//! diagonal D_p = −Σ(ω_k−ν)s_k − 2JΣ s_k s_{k+1}, and −(Ω/2)e^{∓iφ} between
//! states that differ by one flipped bit. With C = e^{iDt}ψ_rot and
//! S = diag(e^{−iφ n_p}) (n_p = number of 1 bits),
//!
//!   C(t0+τ) = Λ(t0+τ) · V e^{−iλτ} Vᵀ · Λ(t0)† C(t0),   Λ(t) = e^{i(Dt − φn)},
//!
//! where V, λ diagonalize the real symmetric H_rot at φ = 0. The
//! decomposition depends only on (ν, Ω), so it is cached per (ν, Ω, τ).

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{BasisState, ChainConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::state::QuantumState;

/// Dense propagators need 8·4^L bytes each.
pub const MAX_SIMULATED_QUBITS: usize = 14;
pub const EIGEN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub nu: f64,
    pub omega_rabi: f64,
    pub phi: f64,
    pub tau: f64,
    pub t0: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu, self.omega_rabi, self.phi, self.tau, self.t0].iter().all(|x| x.is_finite());
        if !finite || self.omega_rabi < 0.0 || self.tau < 0.0 || self.t0 < 0.0 {
            return Err(Error::Pulse(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.tau
    }

    fn key(&self) -> PulseKey {
        (self.nu.to_bits(), self.omega_rabi.to_bits(), self.tau.to_bits())
    }
}

type PulseKey = (u64, u64, u64);

/// Spectral form of one pulse's rotating-frame evolution.
#[derive(Debug, Clone)]
pub struct Propagator {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
    diag: Vec<f64>,
    ones: Vec<f64>,
    tau: f64,
}

impl Propagator {
    /// Fails if the eigendecomposition residual ‖HV − VΛ‖_max·τ exceeds
    /// `EIGEN_TOLERANCE` (a wrong eigenpair shows up as an O(1) phase error).
    pub fn new(cfg: &ChainConfig, nu: f64, omega: f64, tau: f64) -> Result<Self> {
        let n = cfg.dim();
        let diag = rotating_diagonal(cfg, nu);
        let mut h = DMatrix::<f64>::zeros(n, n);
        for (p, d) in diag.iter().enumerate() {
            h[(p, p)] = *d;
            for i in 0..cfg.len {
                let q = p ^ (1 << i);
                if q > p {
                    h[(p, q)] = -0.5 * omega;
                    h[(q, p)] = -0.5 * omega;
                }
            }
        }
        let eig = SymmetricEigen::new(h.clone());
        let scaled = eig.eigenvectors.map_with_location(|_, c, v| v * eig.eigenvalues[c]);
        let residual = (&h * &eig.eigenvectors - scaled).amax() * tau.max(1.0);
        if !(residual <= EIGEN_TOLERANCE) {
            return Err(Error::Pulse(format!(
                "eigendecomposition residual {residual:e} for nu = {nu}, omega = {omega}"
            )));
        }
        let ones = (0..n).map(|p| p.count_ones() as f64).collect();
        Ok(Propagator { vectors: eig.eigenvectors, values: eig.eigenvalues, diag, ones, tau })
    }

    fn frame(&self, t: f64, phi: f64) -> Vec<Complex64> {
        self.diag.iter().zip(&self.ones).map(|(d, n)| Complex64::from_polar(1.0, d * t - phi * n)).collect()
    }

    /// Evolves each column of (re, im) from t0 to t0 + τ.
    fn apply_block(&self, re: &mut DMatrix<f64>, im: &mut DMatrix<f64>, t0: f64, phi: f64) {
        let enter = self.frame(t0, phi);
        let leave = self.frame(t0 + self.tau, phi);
        rotate_rows(re, im, &enter, true);
        let mut yr = self.vectors.tr_mul(re);
        let mut yi = self.vectors.tr_mul(im);
        let spin: Vec<Complex64> = self.values.iter().map(|l| Complex64::from_polar(1.0, -l * self.tau)).collect();
        rotate_rows(&mut yr, &mut yi, &spin, false);
        self.vectors.mul_to(&yr, re);
        self.vectors.mul_to(&yi, im);
        rotate_rows(re, im, &leave, false);
    }

    pub fn apply(&self, amplitudes: &mut [Complex64], t0: f64, phi: f64) {
        let n = amplitudes.len();
        let mut re = DMatrix::from_iterator(n, 1, amplitudes.iter().map(|c| c.re));
        let mut im = DMatrix::from_iterator(n, 1, amplitudes.iter().map(|c| c.im));
        self.apply_block(&mut re, &mut im, t0, phi);
        for (p, c) in amplitudes.iter_mut().enumerate() {
            *c = Complex64::new(re[(p, 0)], im[(p, 0)]);
        }
    }
}

fn rotate_rows(re: &mut DMatrix<f64>, im: &mut DMatrix<f64>, factors: &[Complex64], conjugate: bool) {
    for col in 0..re.ncols() {
        for (p, f) in factors.iter().enumerate() {
            let f = if conjugate { f.conj() } else { *f };
            let z = Complex64::new(re[(p, col)], im[(p, col)]) * f;
            re[(p, col)] = z.re;
            im[(p, col)] = z.im;
        }
    }
}

/// D_p = E_p + ν Σ_k s_k.
pub fn rotating_diagonal(cfg: &ChainConfig, nu: f64) -> Vec<f64> {
    (0..cfg.dim())
        .map(|p| {
            let s = BasisState(p);
            let zeeman: f64 = (0..cfg.len).map(|k| (cfg.larmor(k) - nu) * s.spin(k)).sum();
            let ising: f64 = (0..cfg.len - 1).map(|k| s.spin(k) * s.spin(k + 1)).sum();
            -zeeman - 2.0 * cfg.j * ising
        })
        .collect()
}

fn check_dims(cfg: &ChainConfig, state: &QuantumState) -> Result<()> {
    if cfg.len > MAX_SIMULATED_QUBITS {
        return Err(Error::Config(format!("L = {} exceeds the simulator limit {MAX_SIMULATED_QUBITS}", cfg.len)));
    }
    if state.dim() != cfg.dim() {
        return Err(Error::Dimension { expected: cfg.dim(), got: state.dim() });
    }
    Ok(())
}

fn check_time(state: &QuantumState, pulse: &PulseSpec) -> Result<()> {
    if (state.time - pulse.t0).abs() > 1e-9 * pulse.t0.max(1.0) {
        return Err(Error::Pulse(format!("state at t = {} but pulse starts at {}", state.time, pulse.t0)));
    }
    Ok(())
}

/// One pulse, no caching.
pub fn apply_pulse(state: &QuantumState, cfg: &ChainConfig, pulse: &PulseSpec) -> Result<QuantumState> {
    check_dims(cfg, state)?;
    pulse.validate()?;
    state.check_normalized()?;
    check_time(state, pulse)?;
    let mut out = state.clone();
    Propagator::new(cfg, pulse.nu, pulse.omega_rabi, pulse.tau)?.apply(&mut out.amplitudes, pulse.t0, pulse.phi);
    out.time = pulse.end();
    Ok(out)
}

/// Closed-form two-level solution (lower m, upper p, detuning Δ = E_p − E_m − ν),
/// superposing the two canonical initial conditions.
pub fn two_level_evolution(
    delta: f64,
    omega: f64,
    phi: f64,
    tau: f64,
    t0: f64,
    c_lower: Complex64,
    c_upper: Complex64,
) -> (Complex64, Complex64) {
    let lambda = (delta * delta + omega * omega).sqrt();
    let (cos, sin_over) =
        if lambda == 0.0 { (1.0, 0.0) } else { ((lambda * tau / 2.0).cos(), (lambda * tau / 2.0).sin() / lambda) };
    let i = Complex64::i();
    let shift = delta * tau / 2.0;
    let drive = t0 * delta + shift - phi;
    // Lower state populated.
    let mm = (cos + i * delta * sin_over) * Complex64::from_polar(1.0, -shift);
    let pm = i * omega * sin_over * Complex64::from_polar(1.0, drive);
    // Upper state populated.
    let mp = i * omega * sin_over * Complex64::from_polar(1.0, -drive);
    let pp = (cos - i * delta * sin_over) * Complex64::from_polar(1.0, shift);
    (mm * c_lower + mp * c_upper, pm * c_lower + pp * c_upper)
}

/// Cached multi-pulse propagation for one chain.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ChainConfig,
    exec: Execution,
    cache: HashMap<PulseKey, Arc<Propagator>>,
}

impl Simulator {
    pub fn new(cfg: ChainConfig) -> Result<Self> {
        Self::with_execution(cfg, Execution::default())
    }

    pub fn with_execution(cfg: ChainConfig, exec: Execution) -> Result<Self> {
        cfg.validate()?;
        if cfg.len > MAX_SIMULATED_QUBITS {
            return Err(Error::Config(format!("L = {} exceeds the simulator limit {MAX_SIMULATED_QUBITS}", cfg.len)));
        }
        Ok(Simulator { cfg, exec, cache: HashMap::new() })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Diagonalizes every distinct (ν, Ω, τ) not yet cached.
    pub fn prepare(&mut self, pulses: &[PulseSpec]) -> Result<()> {
        let mut missing: Vec<PulseSpec> = Vec::new();
        for p in pulses {
            p.validate()?;
            if !self.cache.contains_key(&p.key()) && !missing.iter().any(|m| m.key() == p.key()) {
                missing.push(*p);
            }
        }
        let cfg = self.cfg;
        let built = self.exec.map(&missing, |p| Propagator::new(&cfg, p.nu, p.omega_rabi, p.tau));
        for (p, prop) in missing.iter().zip(built) {
            self.cache.insert(p.key(), Arc::new(prop?));
        }
        Ok(())
    }

    fn propagator(&self, pulse: &PulseSpec) -> &Propagator {
        &self.cache[&pulse.key()]
    }

    pub fn propagate(&mut self, state: &QuantumState, pulses: &[PulseSpec]) -> Result<QuantumState> {
        self.propagate_observed(state, pulses, |_, _| {})
    }

    /// `observe(n, state)` runs after pulse n.
    pub fn propagate_observed(
        &mut self,
        state: &QuantumState,
        pulses: &[PulseSpec],
        mut observe: impl FnMut(usize, &QuantumState),
    ) -> Result<QuantumState> {
        check_dims(&self.cfg, state)?;
        state.check_normalized()?;
        self.prepare(pulses)?;
        let mut out = state.clone();
        for (n, pulse) in pulses.iter().enumerate() {
            check_time(&out, pulse)?;
            self.propagator(pulse).apply(&mut out.amplitudes, pulse.t0, pulse.phi);
            out.time = pulse.end();
            observe(n, &out);
        }
        Ok(out)
    }

    /// Evolves the given basis states from the first pulse's t0; blocks of
    /// columns run concurrently.
    pub fn evolve_basis(&mut self, columns: &[usize], pulses: &[PulseSpec]) -> Result<Vec<QuantumState>> {
        self.prepare(pulses)?;
        let n = self.cfg.dim();
        if let Some(&bad) = columns.iter().find(|&&c| c >= n) {
            return Err(Error::Dimension { expected: n, got: bad + 1 });
        }
        let start = pulses.first().map_or(0.0, |p| p.t0);
        let chunks = self.exec.chunks(columns.len());
        let size = columns.len().div_ceil(chunks).max(1);
        let blocks: Vec<&[usize]> = columns.chunks(size).collect();
        let this = &*self;
        let evolved = self.exec.map(&blocks, |cols| {
            let mut re = DMatrix::<f64>::zeros(n, cols.len());
            let mut im = DMatrix::<f64>::zeros(n, cols.len());
            for (c, &idx) in cols.iter().enumerate() {
                re[(idx, c)] = 1.0;
            }
            for pulse in pulses {
                this.propagator(pulse).apply_block(&mut re, &mut im, pulse.t0, pulse.phi);
            }
            (0..cols.len())
                .map(|c| QuantumState {
                    amplitudes: (0..n).map(|p| Complex64::new(re[(p, c)], im[(p, c)])).collect(),
                    time: pulses.last().map_or(start, |p| p.end()),
                })
                .collect::<Vec<_>>()
        });
        Ok(evolved.into_iter().flatten().collect())
    }

    /// Columns of the full program unitary in the interaction picture.
    pub fn unitary(&mut self, pulses: &[PulseSpec]) -> Result<Vec<QuantumState>> {
        let all: Vec<usize> = (0..self.cfg.dim()).collect();
        self.evolve_basis(&all, pulses)
    }
}
