//! Time evolution of density blocks and assembly of observables.

use rayon::prelude::*;

use super::{build_block, DensityBlock};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::ode::{integrate_sampled, OdeOptions};
use crate::params::ModelParams;

/// Quadrature expectation values rescaled by √(N/2), directly comparable to
/// the mean-field variables.
#[derive(Debug, Clone)]
pub struct QuadratureSeries {
    pub x_a: Vec<f64>,
    pub p_a: Vec<f64>,
    pub x_b: Vec<f64>,
    pub p_b: Vec<f64>,
}

/// Raw populations ⟨n̂_a⟩, ⟨n̂_b⟩.
#[derive(Debug, Clone)]
pub struct PopulationSeries {
    pub n_a: Vec<f64>,
    pub n_b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub quadratures: Option<QuadratureSeries>,
    pub populations: Option<PopulationSeries>,
    /// Largest deviation of the total trace from its initial value.
    pub trace_drift_max: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub tol: f64,
    pub quadratures: bool,
    pub populations: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, quadratures: true, populations: true }
    }
}

/// Evolve each supplied block independently under its own generator and
/// assemble ⟨x_α⟩, ⟨p_α⟩ (rescaled by √(N/2)) and ⟨n_α⟩ on a uniform grid.
///
/// Quadratures need at least one (N, N−1) block, populations at least one
/// diagonal block.
pub fn evolve_blocks(
    initial: &[DensityBlock],
    params: &ModelParams,
    t_end: f64,
    sample_dt: f64,
) -> Result<ObservableSeries> {
    evolve_blocks_with(initial, params, t_end, sample_dt, &EvolveOptions::default())
}

pub fn evolve_blocks_with(
    initial: &[DensityBlock],
    params: &ModelParams,
    t_end: f64,
    sample_dt: f64,
    opts: &EvolveOptions,
) -> Result<ObservableSeries> {
    let n_tot = params.require_n_total()?;
    if initial.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if !(sample_dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::ParameterDomain("t_end and sample_dt must be > 0".into()));
    }
    let has_offdiag = initial.iter().any(|b| b.n == b.n_prime + 1);
    let has_diag = initial.iter().any(|b| b.is_diagonal_sector());
    if opts.quadratures && !has_offdiag {
        return Err(Error::MissingSector { n: n_tot, n_prime: n_tot.saturating_sub(1) });
    }
    if opts.populations && !has_diag {
        return Err(Error::MissingSector { n: n_tot, n_prime: n_tot });
    }

    let n_steps = (t_end / sample_dt).floor() as usize;
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * sample_dt).collect();
    let n_samples = times.len();

    struct BlockContribution {
        a: Vec<C64>,
        b: Vec<C64>,
        n_a: Vec<f64>,
        n_b: Vec<f64>,
        trace: Vec<f64>,
    }

    let contributions: Result<Vec<BlockContribution>> = initial
        .par_iter()
        .map(|block| -> Result<BlockContribution> {
            let op = build_block(params, block.n, block.n_prime)?;
            let dim = op.dim();
            let mut y0 = vec![0.0f64; 2 * dim];
            for (k, z) in block.coeffs.iter().enumerate() {
                y0[2 * k] = z.re;
                y0[2 * k + 1] = z.im;
            }
            let mut contrib = BlockContribution {
                a: vec![C64::new(0.0, 0.0); n_samples],
                b: vec![C64::new(0.0, 0.0); n_samples],
                n_a: vec![0.0; n_samples],
                n_b: vec![0.0; n_samples],
                trace: vec![0.0; n_samples],
            };
            let (n, np) = (block.n, block.n_prime);
            let mat = op.matrix();
            integrate_sampled(
                |_t, y, dy| mat.matvec_interleaved(y, dy),
                0.0,
                &y0,
                &times,
                &OdeOptions { rtol: opts.tol, atol: opts.tol * 1e-2, ..Default::default() },
                |_| {},
                |k, _t, y| {
                    let at = |na: usize, nap: usize| {
                        let i = na * (np + 1) + nap;
                        C64::new(y[2 * i], y[2 * i + 1])
                    };
                    if n == np {
                        for na in 0..=n {
                            let p = at(na, na).re;
                            contrib.n_a[k] += p * na as f64;
                            contrib.n_b[k] += p * (n - na) as f64;
                            contrib.trace[k] += p;
                        }
                    } else if n == np + 1 {
                        for na in 1..=n {
                            contrib.a[k] += at(na, na - 1) * (na as f64).sqrt();
                        }
                        for na in 0..n {
                            contrib.b[k] += at(na, na) * ((n - na) as f64).sqrt();
                        }
                    }
                },
            )?;
            Ok(contrib)
        })
        .collect();
    let contributions = contributions?;

    let mut a_tot = vec![C64::new(0.0, 0.0); n_samples];
    let mut b_tot = vec![C64::new(0.0, 0.0); n_samples];
    let mut n_a = vec![0.0; n_samples];
    let mut n_b = vec![0.0; n_samples];
    let mut trace = vec![0.0; n_samples];
    for c in &contributions {
        for k in 0..n_samples {
            a_tot[k] += c.a[k];
            b_tot[k] += c.b[k];
            n_a[k] += c.n_a[k];
            n_b[k] += c.n_b[k];
            trace[k] += c.trace[k];
        }
    }
    let trace_drift_max = if has_diag {
        let t0 = trace[0];
        trace.iter().map(|t| (t - t0).abs()).fold(0.0, f64::max)
    } else {
        0.0
    };

    let scale = ((n_tot as f64) / 2.0).sqrt();
    let quadratures = if opts.quadratures {
        Some(QuadratureSeries {
            x_a: a_tot.iter().map(|z| 2.0 * z.re / scale).collect(),
            p_a: a_tot.iter().map(|z| 2.0 * z.im / scale).collect(),
            x_b: b_tot.iter().map(|z| 2.0 * z.re / scale).collect(),
            p_b: b_tot.iter().map(|z| 2.0 * z.im / scale).collect(),
        })
    } else {
        None
    };
    let populations =
        if opts.populations { Some(PopulationSeries { n_a, n_b }) } else { None };

    Ok(ObservableSeries { times, quadratures, populations, trace_drift_max })
}
