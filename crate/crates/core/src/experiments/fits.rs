//! Scaling fits: the static critical exponent of the order parameter and
//! the logarithmic entanglement growth at criticality.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{integrate_mf_with, order_parameters, MeanFieldState, MfOptions};
use crate::params::ModelParams;

/// Ordinary least squares y = a·x + b.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientPoints { got: x.len().min(y.len()), need: 2 });
    }
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::ParameterDomain("degenerate abscissa in fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - ym) * (b - ym)).sum();
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let stderr_slope = (ss_res / dof / sxx).sqrt();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearFit { slope, intercept, stderr_slope, r_squared })
}

/// Closed-form stationary order parameter ΔN = √(1 − (Ω/κ)²) for U = 0,
/// Ω < κ.
pub fn analytic_delta_n(omega: f64, kappa: f64) -> f64 {
    let r = omega / kappa;
    (1.0 - r * r).max(0.0).sqrt()
}

/// Simulated stationary ΔN at the given parameters (generic initial state,
/// transient-discarded time average).
pub fn stationary_delta_n(params: &ModelParams, t_end: f64, tol: f64) -> Result<f64> {
    let traj = integrate_mf_with(
        &MeanFieldState::default_initial(),
        params,
        t_end,
        &MfOptions { tol, n_samples: 2048, shell_tol: 1e-9 },
    )?;
    let (delta_n, _) = order_parameters(&traj.discard_transient(0.5))?;
    Ok(delta_n)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub n_points: usize,
}

/// Static critical exponent from simulated steady states: log-log fit of ΔN
/// against δ = (Ω_c − Ω)/κ over the supplied δ grid (Ω_c/κ = 1, U = 0).
///
/// The grid must lie inside [1e−4, 1e−1] and carry at least 5 points.
pub fn critical_exponent_fit(params_base: &ModelParams, deltas: &[f64]) -> Result<ExponentFit> {
    if deltas.len() < 5 {
        return Err(Error::InsufficientPoints { got: deltas.len(), need: 5 });
    }
    if deltas.iter().any(|&d| !(1e-4..=1e-1).contains(&d)) {
        return Err(Error::ParameterDomain(
            "exponent fit grid must lie in (Ω_c−Ω)/κ ∈ [1e-4, 1e-1]".into(),
        ));
    }
    if params_base.u != 0.0 {
        return Err(Error::ParameterDomain("the exponent fit targets the U = 0 transition".into()));
    }
    let mut xs = Vec::with_capacity(deltas.len());
    let mut ys = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let params =
            ModelParams { omega: params_base.kappa * (1.0 - delta), ..*params_base };
        // Critical slowing: the relaxation rate scales like κ√(2δ).
        let t_end = (40.0 / (2.0 * delta).sqrt() / params.kappa).clamp(200.0, 4000.0);
        let dn = stationary_delta_n(&params, t_end, 1e-10)?;
        if dn <= 0.0 {
            return Err(Error::ParameterDomain(format!("vanishing ΔN at δ = {delta}")));
        }
        xs.push(delta.ln());
        ys.push(dn.ln());
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(ExponentFit { slope: fit.slope, stderr: fit.stderr_slope, n_points: deltas.len() })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthFit {
    /// dε/d ln(κt) over the window.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// First time with ε > 0.01, over the whole series.
    pub onset: Option<f64>,
    /// False flags a non-monotone window (warning, not an error).
    pub monotone: bool,
}

/// Fit ε(t) against ln(κt) over `window` = (t_lo, t_hi); κ = 1 units.
pub fn entanglement_growth_fit(times: &[f64], eps: &[f64], window: (f64, f64)) -> Result<GrowthFit> {
    if times.len() != eps.len() {
        return Err(Error::ConfigSchema("times/eps length mismatch".into()));
    }
    let onset = times
        .iter()
        .zip(eps)
        .find(|(_, &e)| e > 0.01)
        .map(|(t, _)| *t);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, e) in times.iter().zip(eps) {
        if *t >= window.0 && *t <= window.1 && *t > 0.0 {
            xs.push(t.ln());
            ys.push(*e);
        }
    }
    if xs.len() < 5 {
        return Err(Error::InsufficientPoints { got: xs.len(), need: 5 });
    }
    let fit = linear_fit(&xs, &ys)?;
    let range = ys.iter().copied().fold(f64::MIN, f64::max)
        - ys.iter().copied().fold(f64::MAX, f64::min);
    let slack = 1e-3 * range.max(1e-12);
    let monotone = ys.windows(2).all(|w| w[1] >= w[0] - slack);
    Ok(GrowthFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        onset,
        monotone,
    })
}
