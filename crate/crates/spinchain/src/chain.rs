//! Static spin-chain model: Larmor ladder, Ising energies, transition frequencies.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio δω/J below which the non-resonant error scale μ stops being small.
const GRADIENT_ADVISORY: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    #[serde(rename = "L")]
    pub len: usize,
    pub w: f64,
    pub delta_omega: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub k: u32,
}

impl ChainConfig {
    pub fn new(len: usize, w: f64, delta_omega: f64, j: f64, k: u32) -> Result<Self> {
        let cfg = ChainConfig { len, w, delta_omega, j, k };
        cfg.validate()?;
        Ok(cfg)
    }

    /// J = 1, k = 2, w = 0: the paper's working point.
    pub fn standard(len: usize, delta_omega: f64) -> Result<Self> {
        Self::new(len, 0.0, delta_omega, 1.0, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < 2 {
            return Err(Error::Config(format!("L must be >= 2, got {}", self.len)));
        }
        if self.len > 20 {
            return Err(Error::Config(format!("L = {} is beyond dense simulation", self.len)));
        }
        if !(self.j > 0.0) || !self.j.is_finite() {
            return Err(Error::Config(format!("J must be > 0, got {}", self.j)));
        }
        if !(self.delta_omega > 0.0) || !self.delta_omega.is_finite() {
            return Err(Error::Config(format!("delta_omega must be > 0, got {}", self.delta_omega)));
        }
        if !self.w.is_finite() {
            return Err(Error::Config("w must be finite".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        Ok(())
    }

    /// Soft warnings; the config is still usable.
    pub fn advisories(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.delta_omega < GRADIENT_ADVISORY * self.j {
            out.push(format!(
                "delta_omega/J = {} is not >> 1; non-resonant errors will be large",
                self.delta_omega / self.j
            ));
        }
        out
    }

    pub fn dim(&self) -> usize {
        1 << self.len
    }

    /// ω_k = w + k·δω.
    pub fn larmor(&self, site: usize) -> f64 {
        self.w + site as f64 * self.delta_omega
    }

    pub fn is_edge(&self, site: usize) -> bool {
        site == 0 || site + 1 == self.len
    }

    pub fn with_delta_omega(mut self, delta_omega: f64) -> Result<Self> {
        self.delta_omega = delta_omega;
        self.validate()?;
        Ok(self)
    }

    pub fn with_k(mut self, k: u32) -> Result<Self> {
        self.k = k;
        self.validate()?;
        Ok(self)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }
}

impl fmt::Display for ChainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# spin chain; frequencies in units of J")?;
        writeln!(f, "L = {}", self.len)?;
        writeln!(f, "w = {:e}", self.w)?;
        writeln!(f, "delta_omega = {:e}", self.delta_omega)?;
        writeln!(f, "J = {:e}", self.j)?;
        writeln!(f, "k = {}", self.k)
    }
}

impl FromStr for ChainConfig {
    type Err = Error;

    /// `key = value` lines; `#` starts a comment. Missing keys take the
    /// defaults w = 0, J = 1, k = 2; L and delta_omega are required.
    fn from_str(s: &str) -> Result<Self> {
        let (mut len, mut w, mut dw, mut j, mut k) = (None, 0.0, None, 1.0, 2u32);
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            let value = value.trim();
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what} '{value}'", n + 1));
            match key.trim() {
                "L" => len = Some(value.parse().map_err(|_| bad("L"))?),
                "w" => w = value.parse().map_err(|_| bad("w"))?,
                "delta_omega" => dw = Some(value.parse().map_err(|_| bad("delta_omega"))?),
                "J" => j = value.parse().map_err(|_| bad("J"))?,
                "k" => k = value.parse().map_err(|_| bad("k"))?,
                other => return Err(Error::Parse(format!("line {}: unknown key '{other}'", n + 1))),
            }
        }
        let len = len.ok_or_else(|| Error::Parse("missing key L".into()))?;
        let dw = dw.ok_or_else(|| Error::Parse("missing key delta_omega".into()))?;
        ChainConfig::new(len, w, dw, j, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState(pub usize);

impl BasisState {
    pub fn bit(self, i: usize) -> u8 {
        ((self.0 >> i) & 1) as u8
    }

    pub fn flip(self, i: usize) -> Self {
        BasisState(self.0 ^ (1 << i))
    }

    /// s_i: +1/2 for bit 0, −1/2 for bit 1.
    pub fn spin(self, i: usize) -> f64 {
        0.5 - self.bit(i) as f64
    }

    /// Ket label |n_{L−1} … n_0⟩.
    pub fn label(self, len: usize) -> String {
        (0..len).rev().map(|i| if self.bit(i) == 1 { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeighborContext {
    /// Bits of the qubits i+1 (left) and i−1 (right).
    Interior {
        left: u8,
        right: u8,
    },
    Edge {
        neighbor: u8,
    },
}

impl NeighborContext {
    /// The neighborhood of qubit `i` in `state`.
    pub fn of(cfg: &ChainConfig, state: BasisState, i: usize) -> Self {
        Self::in_chain(cfg.len, state, i)
    }

    pub fn in_chain(len: usize, state: BasisState, i: usize) -> Self {
        if i == 0 {
            NeighborContext::Edge { neighbor: state.bit(1) }
        } else if i + 1 == len {
            NeighborContext::Edge { neighbor: state.bit(i - 1) }
        } else {
            NeighborContext::Interior { left: state.bit(i + 1), right: state.bit(i - 1) }
        }
    }

    /// Number of neighbors in state 1.
    pub fn ones(self) -> u8 {
        match self {
            NeighborContext::Interior { left, right } => left + right,
            NeighborContext::Edge { neighbor } => neighbor,
        }
    }
}

impl fmt::Display for NeighborContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborContext::Interior { left, right } => write!(f, "{left}{right}"),
            NeighborContext::Edge { neighbor } => write!(f, "edge-{neighbor}"),
        }
    }
}

/// E_p = −Σ ω_k s_k − 2J Σ s_k s_{k+1}.
pub fn energy(cfg: &ChainConfig, state: BasisState) -> f64 {
    let zeeman: f64 = (0..cfg.len).map(|k| cfg.larmor(k) * state.spin(k)).sum();
    let ising: f64 = (0..cfg.len - 1).map(|k| state.spin(k) * state.spin(k + 1)).sum();
    -zeeman - 2.0 * cfg.j * ising
}

/// Energy gap for flipping qubit `i` (upper state has bit i = 1).
pub fn transition_frequency(cfg: &ChainConfig, i: usize, ctx: NeighborContext) -> Result<f64> {
    let reject = || Error::Context { qubit: i, len: cfg.len, ctx: ctx.to_string() };
    if i >= cfg.len {
        return Err(reject());
    }
    let interior = matches!(ctx, NeighborContext::Interior { .. });
    if interior == cfg.is_edge(i) {
        return Err(reject());
    }
    Ok(match ctx {
        NeighborContext::Interior { left, right } => cfg.larmor(i) + 2.0 * cfg.j * (1.0 - left as f64 - right as f64),
        NeighborContext::Edge { neighbor } => cfg.larmor(i) + cfg.j * (1.0 - 2.0 * neighbor as f64),
    })
}

/// Kane's exchange constant J(r) = 0.8·e²/(ε a0)·(r/a0)^{5/2}·exp(−2r/a0),
/// Gaussian e² read as e²/(4πε0); lengths in metres, result as J/h in MHz.
pub fn exchange_constant(r: f64, epsilon: f64, a0: f64) -> f64 {
    const E: f64 = 1.602_176_634e-19;
    const EPS0: f64 = 8.854_187_812_8e-12;
    const H: f64 = 6.626_070_15e-34;
    let coulomb = E * E / (4.0 * std::f64::consts::PI * EPS0 * epsilon * a0);
    let x = r / a0;
    0.8 * coulomb * x.powf(2.5) * (-2.0 * x).exp() / H / 1e6
}
