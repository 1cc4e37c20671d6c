//! Model parameters, unit conventions and derived-rate arithmetic.
//!
//! All rates are stored in units of the overall dissipation rate κ (κ = 1 by
//! default), matching how results are reported: as the dimensionless ratios
//! Ω/κ and U/κ. The total excitation number N enters only where finite-N
//! physics is computed; thermodynamic-limit code treats N as formally
//! infinite and never reads it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical couplings of the dimer.
///
/// * `omega` — coherent hopping rate Ω,
/// * `u` — on-site interaction U,
/// * `kappa` — overall incoherent hopping rate κ,
/// * `n_th` — thermal occupation of the auxiliary mode mediating the
///   incoherent hopping; `n_th = 0` is perfectly unidirectional (a → b),
///   `n_th → ∞` fully reciprocal,
/// * `n_total` — total excitation number N (finite-N modules only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub omega: f64,
    pub u: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub n_th: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_total: Option<usize>,
}

fn default_kappa() -> f64 {
    1.0
}

impl ModelParams {
    /// Thermodynamic-limit parameters (no N attached).
    pub fn new(omega: f64, u: f64, kappa: f64, n_th: f64) -> Result<Self> {
        let p = Self { omega, u, kappa, n_th, n_total: None };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor with κ = 1, n_th = 0.
    pub fn scaled(omega_over_kappa: f64, u_over_kappa: f64) -> Result<Self> {
        Self::new(omega_over_kappa, u_over_kappa, 1.0, 0.0)
    }

    pub fn with_n_th(mut self, n_th: f64) -> Result<Self> {
        self.n_th = n_th;
        self.validate()?;
        Ok(self)
    }

    pub fn with_n_total(mut self, n: usize) -> Result<Self> {
        self.n_total = Some(n);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::ParameterDomain(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.omega < 0.0 || !self.omega.is_finite() {
            return Err(Error::ParameterDomain(format!("omega must be >= 0, got {}", self.omega)));
        }
        if self.u < 0.0 || !self.u.is_finite() {
            return Err(Error::ParameterDomain(format!("u must be >= 0, got {}", self.u)));
        }
        if self.n_th < 0.0 || !self.n_th.is_finite() {
            return Err(Error::ParameterDomain(format!("n_th must be >= 0, got {}", self.n_th)));
        }
        if let Some(n) = self.n_total {
            if n < 1 {
                return Err(Error::ParameterDomain("n_total must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// The total excitation number, or an error where finite-N physics needs it.
    pub fn require_n_total(&self) -> Result<usize> {
        self.n_total.ok_or(Error::MissingNTotal)
    }

    /// Parse from a JSON object with keys {"omega","u","kappa","n_th","n_total"}.
    /// Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: ModelParams =
            serde_json::from_str(text).map_err(|e| Error::ConfigSchema(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ModelParams serializes")
    }
}

/// Rates derived from [`ModelParams`].
///
/// γ_R = (1 + n_th)κ and γ_L = n_th κ always satisfy γ_R − γ_L = κ and
/// γ_L/γ_R = n_th/(1 + n_th). The rescaled rates 2κ/N and 2U/N enter the
/// finite-N master equation and are present only when `n_total` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub gamma_r: f64,
    pub gamma_l: f64,
    pub kappa_scaled: Option<f64>,
    pub u_scaled: Option<f64>,
}

/// Derive the incoherent hopping rates and the finite-N rescaled couplings.
pub fn derive_rates(params: &ModelParams) -> Result<DerivedRates> {
    params.validate()?;
    let gamma_r = (1.0 + params.n_th) * params.kappa;
    let gamma_l = params.n_th * params.kappa;
    let (kappa_scaled, u_scaled) = match params.n_total {
        Some(n) => {
            let n = n as f64;
            (Some(2.0 * params.kappa / n), Some(2.0 * params.u / n))
        }
        None => (None, None),
    };
    Ok(DerivedRates { gamma_r, gamma_l, kappa_scaled, u_scaled })
}

/// Quadrature and shell conventions used throughout.
///
/// Quadratures are x̂ = â + â†, p̂ = −i(â − â†), so [x̂, p̂] = 2i and the
/// vacuum covariance matrix is the identity. Mean-field variables are
/// x_α = ⟨x̂_α⟩/√(N/2); on the maximal shell Σ_α (x_α² + p_α²)/2 = 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    /// Identifier of the quadrature scaling ("x=a+ad, [x,p]=2i").
    pub quad_scale: &'static str,
    /// ħ does not appear anywhere; all rates are frequencies.
    pub hbar_free: bool,
}

impl Conventions {
    /// Value of the conserved shell Σ_α (x_α² + p_α²)/2 on the maximal sector.
    pub const SHELL: f64 = 2.0;
    /// Symplectic eigenvalue of the vacuum in these units.
    pub const VACUUM_NU: f64 = 1.0;
}

impl Default for Conventions {
    fn default() -> Self {
        Self { quad_scale: "x=a+ad, [x,p]=2i", hbar_free: true }
    }
}
