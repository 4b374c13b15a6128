//! 2πk Rabi frequencies and the composite (main + correcting) pulse parameters.
//!
//! Notation for rotation fraction ρ (ρ = 1 is a full π pulse), detuning Δ = 2J:
//!
//!   θ = π√(k² − ρ²/4),  α = (π/2)√(k² + 3ρ²/4),  f = θ/(2α),  g = ρπ/(2α)
//!   Θ = −atan2(f sin α, cos α),  β = atan(−g sin α / |cos α + i f sin α|)
//!   β* = β + π,  γ = √((πk)² − β*²),  Ω_c = Δβ*/γ,  τ_c = 2γ/Δ
//!
//! Θ is taken on the branch where cos α / cos Θ > 0; on that branch a single Θ
//! both defines the correcting-pulse phase and appears in the π ± θ/2 ± Θ
//! ledger entries.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::{transition_frequency, ChainConfig, NeighborContext};
use crate::dynamics::PulseSpec;
use crate::error::{Error, Result};

/// Ω_ρ = Δρ/√(4k² − ρ²): a ρπ rotation that fully suppresses a transition
/// detuned by Δ (its generalized angle is 2πk).
pub fn rabi_for_pi_pulse(k: u32, delta: f64, rho: f64) -> f64 {
    let k = k as f64;
    delta * rho / (4.0 * k * k - rho * rho).sqrt()
}

/// Which expression for tan Θ_ρ to use. Only `Derived` is physically correct;
/// `Printed` (tan Θ_ρ = −2(θ_ρ/α_ρ) tan α_ρ, tan β_ρ without the ρ factor) is
/// kept so tests can show it fails against the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaFormula {
    #[default]
    Derived,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeParams {
    pub k: u32,
    pub rho: f64,
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub f: f64,
    pub g: f64,
    #[serde(rename = "Theta")]
    pub cap_theta: f64,
    pub beta: f64,
    pub beta_star: f64,
    pub gamma: f64,
    /// Ω_{2,ρ} of the Q^{00}/Q^{11} main pulse.
    pub omega_main: f64,
    /// Ω_ρ of Q^{01} and edge pulses.
    pub omega_single: f64,
    pub omega_corr: f64,
    pub tau_corr: f64,
    pub tau_main: f64,
    pub tau_single: f64,
}

pub fn composite_params(k: u32, rho: f64, delta: f64) -> Result<CompositeParams> {
    composite_params_with(k, rho, delta, ThetaFormula::Derived)
}

pub fn composite_params_with(k: u32, rho: f64, delta: f64, formula: ThetaFormula) -> Result<CompositeParams> {
    if k < 1 || !(rho > 0.0 && rho <= 1.0) || !(delta > 0.0) {
        return Err(Error::Params(format!("need k >= 1, 0 < rho <= 1, delta > 0 (k={k}, rho={rho}, delta={delta})")));
    }
    let kf = k as f64;
    let theta = PI * (kf * kf - rho * rho / 4.0).sqrt();
    let alpha = PI / 2.0 * (kf * kf + 0.75 * rho * rho).sqrt();
    let (f, g) = match formula {
        ThetaFormula::Derived => (theta / (2.0 * alpha), rho * PI / (2.0 * alpha)),
        ThetaFormula::Printed => (2.0 * theta / alpha, PI / (2.0 * alpha)),
    };
    let (s, c) = alpha.sin_cos();
    let cap_theta = -(f * s).atan2(c);
    let beta = (-g * s / (c * c + f * f * s * s).sqrt()).atan();
    let beta_star = beta + PI;
    let gamma_sq = (PI * kf).powi(2) - beta_star * beta_star;
    if gamma_sq <= 0.0 {
        return Err(Error::Params(format!("gamma is not real for k={k}, rho={rho} (beta* = {beta_star})")));
    }
    let gamma = gamma_sq.sqrt();
    let omega_single = rabi_for_pi_pulse(k, delta, rho);
    let omega_main = 2.0 * omega_single;
    Ok(CompositeParams {
        k,
        rho,
        delta,
        theta,
        alpha,
        f,
        g,
        cap_theta,
        beta,
        beta_star,
        gamma,
        omega_main,
        omega_single,
        omega_corr: delta * beta_star / gamma,
        tau_corr: 2.0 * gamma / delta,
        tau_main: rho * PI / omega_main,
        tau_single: rho * PI / omega_single,
    })
}

impl CompositeParams {
    /// Parameters for a chain (Δ = 2J, k from the config).
    pub fn for_chain(cfg: &ChainConfig, rho: f64) -> Result<Self> {
        composite_params(cfg.k, rho, 2.0 * cfg.j)
    }
}

impl fmt::Display for CompositeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# composite pulse parameters; frequencies in units of J, times in 1/J, angles in rad")?;
        let rows: [(&str, f64); 17] = [
            ("k", self.k as f64),
            ("rho", self.rho),
            ("delta", self.delta),
            ("theta", self.theta),
            ("alpha", self.alpha),
            ("f", self.f),
            ("g", self.g),
            ("Theta", self.cap_theta),
            ("beta", self.beta),
            ("beta_star", self.beta_star),
            ("gamma", self.gamma),
            ("omega_main", self.omega_main),
            ("omega_single", self.omega_single),
            ("omega_corr", self.omega_corr),
            ("tau_main", self.tau_main),
            ("tau_single", self.tau_single),
            ("tau_corr", self.tau_corr),
        ];
        for (key, value) in rows {
            writeln!(f, "{key} = {value:.17e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrectionKind {
    Zeros,
    Ones,
}

/// Correcting pulse that follows a Q^{00}/Q^{11} main pulse of phase Φ starting
/// at `t0_main`; it starts when the main pulse ends.
///
/// φ_c^{11} = −θ + Φ − Δ·t0 − Θ,  φ_c^{00} = θ + Φ + Δ·t0 + Θ, with t0 the
/// MAIN pulse's start: the correcting pulse is exactly resonant for its pair,
/// so the only t0 dependence of the unwanted amplitude comes from the main
/// pulse's e^{iΔt0} factor.
pub fn correcting_pulse_spec(
    kind: CorrectionKind,
    main_phase: f64,
    t0_main: f64,
    i: usize,
    cfg: &ChainConfig,
    params: &CompositeParams,
) -> Result<PulseSpec> {
    let nu = transition_frequency(cfg, i, NeighborContext::Interior { left: 1, right: 0 })?;
    let shift = params.delta * t0_main;
    let phi = match kind {
        CorrectionKind::Ones => -params.theta + main_phase - shift - params.cap_theta,
        CorrectionKind::Zeros => params.theta + main_phase + shift + params.cap_theta,
    };
    Ok(PulseSpec { nu, omega_rabi: params.omega_corr, phi, tau: params.tau_corr, t0: t0_main + params.tau_main })
}
