//! Adiabatic parameter sweeps and hysteresis detection.
//!
//! The control parameter Ω/κ is stepped along a grid; each step evolves the
//! state for a settle time starting exactly from the previous step's final
//! state, then records the order parameters on the settled half. Bistability
//! shows up as a finite area between the forward and backward ΔN branches.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{
    classify_phase, integrate_mf_with, order_parameters, MeanFieldState, MfOptions, Phase,
};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepDirection {
    Forward,
    Backward,
}

impl std::fmt::Display for SweepDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepDirection::Forward => write!(f, "forward"),
            SweepDirection::Backward => write!(f, "backward"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepStep {
    pub omega: f64,
    pub delta_n: f64,
    pub delta_r_bar: f64,
    /// None when the classifier was inconclusive at this step (flagged, not
    /// fatal).
    pub label: Option<Phase>,
    pub final_state: MeanFieldState,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub u: f64,
    pub kappa: f64,
    pub n_th: f64,
    pub direction: SweepDirection,
    /// Steps in sweep order (control values monotone in the direction).
    pub steps: Vec<SweepStep>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub settle_time: f64,
    pub tol: f64,
    pub n_samples: usize,
    pub classify: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { settle_time: 200.0, tol: 1e-10, n_samples: 4096, classify: true }
    }
}

/// Sweep Ω over `omega_grid` (ascending) in the given direction at fixed
/// U, κ, n_th taken from `params_base`.
pub fn hysteresis_sweep(
    params_base: &ModelParams,
    omega_grid: &[f64],
    direction: SweepDirection,
    settle_time: f64,
) -> Result<SweepRecord> {
    hysteresis_sweep_with(
        params_base,
        omega_grid,
        direction,
        &SweepOptions { settle_time, ..Default::default() },
    )
}

pub fn hysteresis_sweep_with(
    params_base: &ModelParams,
    omega_grid: &[f64],
    direction: SweepDirection,
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    params_base.validate()?;
    if omega_grid.len() < 2 {
        return Err(Error::InsufficientPoints { got: omega_grid.len(), need: 2 });
    }
    if !omega_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::ParameterDomain("omega_grid must be strictly ascending".into()));
    }
    if !(opts.settle_time > 10.0 / params_base.kappa.max(1e-12)) {
        return Err(Error::ParameterDomain(format!(
            "settle_time {} too short against 1/kappa",
            opts.settle_time
        )));
    }

    let order: Vec<f64> = match direction {
        SweepDirection::Forward => omega_grid.to_vec(),
        SweepDirection::Backward => omega_grid.iter().rev().copied().collect(),
    };

    let mf_opts = MfOptions {
        tol: opts.tol,
        n_samples: opts.n_samples,
        // accumulated shell drift over a long chain is numerical, not user error
        shell_tol: 1e-4,
    };
    let mut state = MeanFieldState::default_initial();
    let mut steps = Vec::with_capacity(order.len());
    for &omega in &order {
        let p = ModelParams { omega, ..*params_base };
        let traj = integrate_mf_with(&state, &p, opts.settle_time, &mf_opts)?;
        let tail = traj.discard_transient(0.5);
        let (delta_n, delta_r_bar) = order_parameters(&tail)?;
        let label = if opts.classify { classify_phase(&traj, &p).ok().map(|l| l.phase) } else { None };
        state = *traj.states.last().unwrap();
        steps.push(SweepStep { omega, delta_n, delta_r_bar, label, final_state: state });
    }
    Ok(SweepRecord {
        u: params_base.u,
        kappa: params_base.kappa,
        n_th: params_base.n_th,
        direction,
        steps,
    })
}

/// Area enclosed between the forward and backward ΔN branches,
/// ∫ |ΔN_fwd − ΔN_bwd| dΩ on the common grid (trapezoid rule).
pub fn hysteresis_loop_area(forward: &SweepRecord, backward: &SweepRecord) -> Result<f64> {
    if forward.steps.len() != backward.steps.len() {
        return Err(Error::ConfigSchema("sweep grids differ in length".into()));
    }
    let fwd = &forward.steps;
    let mut bwd: Vec<&SweepStep> = backward.steps.iter().collect();
    bwd.reverse();
    for (f, b) in fwd.iter().zip(&bwd) {
        if (f.omega - b.omega).abs() > 1e-12 {
            return Err(Error::ConfigSchema("sweep grids do not match".into()));
        }
    }
    let mut area = 0.0;
    for k in 1..fwd.len() {
        let d0 = (fwd[k - 1].delta_n - bwd[k - 1].delta_n).abs();
        let d1 = (fwd[k].delta_n - bwd[k].delta_n).abs();
        area += 0.5 * (d0 + d1) * (fwd[k].omega - fwd[k - 1].omega);
    }
    Ok(area)
}

/// Ω value where ΔR̄ first falls below `threshold` along the sweep order,
/// i.e. where the TC2 branch collapses.
pub fn transition_omega(record: &SweepRecord, threshold: f64) -> Option<f64> {
    record.steps.iter().find(|s| s.delta_r_bar < threshold).map(|s| s.omega)
}
