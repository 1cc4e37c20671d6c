//! Phase classification over an (Ω/κ, U/κ) grid with optional
//! time-averaged correlation measures per cell.

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{time_average, CorrelationSeries, LogBase};
use crate::error::Error;
use crate::fluctuations::{integrate_lyapunov_with, CovarianceMatrix, LyapunovOptions};
use crate::meanfield::{
    classify_phase, fixed_points, integrate_mf_with, MeanFieldState, MfOptions, Phase, PolarState,
};
use crate::params::ModelParams;

/// How each cell is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellProtocol {
    /// The generic default initial state for every cell.
    DefaultInit,
    /// Start next to the TC2 fixed point (or the boundary point where none
    /// exists); probes the local stability of the limit-cycle branch, so the
    /// TC2/TC3 flip lands on the analytic boundary.
    NearFixedPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseCell {
    pub omega: f64,
    pub u: f64,
    pub label: Option<Phase>,
    pub delta_n: f64,
    pub delta_r_bar: f64,
    pub eps_avg: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub cells: Vec<PhaseCell>,
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseDiagramOptions {
    pub protocol: CellProtocol,
    pub settle_time: f64,
    pub tol: f64,
    pub n_samples: usize,
    /// Retries with doubled settle time after inconclusive classifications.
    pub max_retries: usize,
    /// Also integrate fluctuations and average the logarithmic negativity.
    pub with_correlations: bool,
    /// Averaging horizon for the correlation measures.
    pub corr_t_end: f64,
}

impl Default for PhaseDiagramOptions {
    fn default() -> Self {
        Self {
            protocol: CellProtocol::DefaultInit,
            settle_time: 400.0,
            tol: 1e-10,
            n_samples: 1 << 14,
            max_retries: 2,
            with_correlations: false,
            corr_t_end: 4000.0,
        }
    }
}

fn initial_state_for(params: &ModelParams, protocol: CellProtocol) -> MeanFieldState {
    match protocol {
        CellProtocol::DefaultInit => MeanFieldState::default_initial(),
        CellProtocol::NearFixedPoint => {
            let fps = fixed_points(params);
            let (r_a_sq, delta_phi) = match fps.first() {
                Some(fp) => (fp.polar.r_a * fp.polar.r_a, fp.polar.delta_phi),
                None => (1.0, params.kappa.atan2(4.0 * params.u)),
            };
            // Nudge along the shell so the symmetric manifold is avoided and
            // an unstable branch can depart.
            let d = 1e-3;
            let r_a_sq = (r_a_sq - d).clamp(1e-6, 2.0 - 1e-6);
            PolarState {
                r_a: r_a_sq.sqrt(),
                r_b: (2.0 - r_a_sq).sqrt(),
                delta_phi: delta_phi + 1e-3,
                sigma_phi: 0.1,
            }
            .to_cartesian()
        }
    }
}

/// Classify every (Ω, U) cell; failures are recorded per cell and the scan
/// continues. Cells run in parallel.
pub fn phase_diagram(
    omega_grid: &[f64],
    u_grid: &[f64],
    opts: &PhaseDiagramOptions,
) -> PhaseDiagram {
    let mut pairs = Vec::with_capacity(omega_grid.len() * u_grid.len());
    for &u in u_grid {
        for &omega in omega_grid {
            pairs.push((omega, u));
        }
    }
    let cells: Vec<PhaseCell> = pairs
        .par_iter()
        .map(|&(omega, u)| classify_cell(omega, u, opts))
        .collect();
    PhaseDiagram { cells }
}

fn classify_cell(omega: f64, u: f64, opts: &PhaseDiagramOptions) -> PhaseCell {
    let mut cell = PhaseCell {
        omega,
        u,
        label: None,
        delta_n: f64::NAN,
        delta_r_bar: f64::NAN,
        eps_avg: None,
        error: None,
    };
    let params = match ModelParams::scaled(omega, u) {
        Ok(p) => p,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    let state0 = initial_state_for(&params, opts.protocol);

    let mut settle = opts.settle_time;
    let mut outcome = None;
    for _attempt in 0..=opts.max_retries {
        let traj = match integrate_mf_with(
            &state0,
            &params,
            settle,
            &MfOptions { tol: opts.tol, n_samples: opts.n_samples, shell_tol: 1e-9 },
        ) {
            Ok(t) => t,
            Err(e) => {
                cell.error = Some(e.to_string());
                return cell;
            }
        };
        match classify_phase(&traj, &params) {
            Ok(label) => {
                cell.delta_n = label.delta_n;
                cell.delta_r_bar = label.delta_r_bar;
                cell.label = Some(label.phase);
                outcome = None;
                break;
            }
            Err(Error::InconclusiveClassification(msg)) => {
                outcome = Some(msg);
                settle *= 2.0;
            }
            Err(e) => {
                cell.error = Some(e.to_string());
                return cell;
            }
        }
    }
    if let Some(msg) = outcome {
        cell.error = Some(format!("inconclusive after retries: {msg}"));
    }

    if opts.with_correlations {
        match integrate_lyapunov_with(
            &initial_state_for(&params, opts.protocol),
            &CovarianceMatrix::identity(),
            &params,
            opts.corr_t_end,
            &LyapunovOptions { tol: 1e-8, n_samples: 2048, ..Default::default() },
        )
        .and_then(|(_, cov)| CorrelationSeries::from_covariances(&cov, LogBase::Two))
        .and_then(|series| time_average(&series, (0.0, opts.corr_t_end)))
        {
            Ok(avg) => cell.eps_avg = Some(avg.log_negativity),
            Err(e) => {
                cell.error
                    .get_or_insert_with(String::new)
                    .push_str(&format!(" correlations: {e}"));
            }
        }
    }
    cell
}
