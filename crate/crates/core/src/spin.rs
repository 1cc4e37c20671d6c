//! Collective-spin representation of the dimer.
//!
//! The Schwinger map Ŝ₊ = â†b̂, Ŝ₋ = âb̂†, Ŝ_z = (n̂_a − n̂_b)/2 carries the
//! N-excitation sector onto a single spin S = N/2. The resulting master
//! equation has H = Ω Ŝ_x + (2U/S)(Ŝ² + Ŝ_z² − Ŝ) and dissipators
//! (κ/S)(1+n_th) D[Ŝ₋] + (κ/S) n_th D[Ŝ₊]; at U = 0, n_th = 0 it is the
//! boundary time crystal.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dagger, lindblad_superoperator, C64};
use crate::meanfield::Trajectory;
use crate::params::ModelParams;

/// Largest spin for which the dense superoperator is built.
pub const SPIN_CAP: f64 = 31.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinParams {
    /// Total spin S = N/2 (2S must be a non-negative integer).
    pub s: f64,
    pub omega: f64,
    pub u: f64,
    pub kappa: f64,
    pub n_th: f64,
}

impl SpinParams {
    pub fn new(s: f64, omega: f64, u: f64, kappa: f64, n_th: f64) -> Result<Self> {
        let two_s = 2.0 * s;
        if two_s < 1.0 || (two_s - two_s.round()).abs() > 1e-12 {
            return Err(Error::ParameterDomain(format!("2S must be a positive integer, got {two_s}")));
        }
        ModelParams::new(omega, u, kappa, n_th)?;
        Ok(Self { s, omega, u, kappa, n_th })
    }

    /// S = N/2 from the bosonic parameters.
    pub fn from_model(params: &ModelParams) -> Result<Self> {
        let n = params.require_n_total()?;
        Self::new(n as f64 / 2.0, params.omega, params.u, params.kappa, params.n_th)
    }

    pub fn dim(&self) -> usize {
        (2.0 * self.s).round() as usize + 1
    }
}

/// Angular momentum ladder operator S₋ in the |S, m⟩ basis (m ascending).
fn lowering(s: f64) -> Array2<C64> {
    let d = (2.0 * s).round() as usize + 1;
    let mut op = Array2::zeros((d, d));
    for k in 1..d {
        let m = k as f64 - s; // S₋ |m⟩ = √(S(S+1) − m(m−1)) |m−1⟩
        op[[k - 1, k]] = C64::new((s * (s + 1.0) - m * (m - 1.0)).sqrt(), 0.0);
    }
    op
}

/// Dense Lindblad generator on the (2S+1)² coefficients of the spin density
/// matrix, standard angular-momentum basis.
pub fn build_spin_liouvillian(params: &SpinParams) -> Result<Array2<C64>> {
    if params.s > SPIN_CAP {
        return Err(Error::DimensionCap {
            dim: params.dim() * params.dim(),
            cap: (2.0 * SPIN_CAP as f64) as usize + 1,
        });
    }
    let s = params.s;
    let d = params.dim();
    let s_minus = lowering(s);
    let s_plus = dagger(&s_minus);
    let s_x = (&s_plus + &s_minus).mapv(|z| z * 0.5);

    let mut h = s_x.mapv(|z| z * params.omega);
    let u_fac = 2.0 * params.u / s;
    for k in 0..d {
        let m = k as f64 - s;
        // Ŝ² and Ŝ act as constants within the sector.
        h[[k, k]] += C64::new(u_fac * (s * (s + 1.0) + m * m - s), 0.0);
    }

    let rate = params.kappa / s;
    Ok(lindblad_superoperator(
        &h,
        &[(rate * (1.0 + params.n_th), s_minus), (rate * params.n_th, s_plus)],
    ))
}

/// Spin observables m_z = (|α|² − |β|²)/2 and m_x + i m_y = ᾱβ along a
/// bosonic mean-field trajectory (Schwinger map, no separate spin ODEs).
#[derive(Debug, Clone)]
pub struct SpinObservables {
    pub times: Vec<f64>,
    pub m_x: Vec<f64>,
    pub m_y: Vec<f64>,
    pub m_z: Vec<f64>,
}

pub fn spin_observables_from_bosonic(traj: &Trajectory) -> SpinObservables {
    let n = traj.states.len();
    let mut obs = SpinObservables {
        times: traj.times.clone(),
        m_x: Vec::with_capacity(n),
        m_y: Vec::with_capacity(n),
        m_z: Vec::with_capacity(n),
    };
    for s in &traj.states {
        let a = s.alpha();
        let b = s.beta();
        let plus = a.conj() * b;
        obs.m_x.push(plus.re);
        obs.m_y.push(plus.im);
        obs.m_z.push(0.5 * (a.norm_sqr() - b.norm_sqr()));
    }
    obs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{integrate_mf_with, MeanFieldState, MfOptions};
    use approx::assert_relative_eq;

    #[test]
    fn rejects_fractional_2s() {
        assert!(SpinParams::new(0.7, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(SpinParams::new(0.5, 1.0, 0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn two_level_spectrum_matches_bloch_analysis() {
        // S = 1/2, U term ∝ identity: resonantly driven dissipative
        // two-level system with decay Γ = κ/S = 2κ. Bloch equations give the
        // Liouvillian spectrum {0, −Γ/2, −3Γ/4 ± √(Γ²/16 − Ω²)}.
        let omega = 0.8;
        let kappa = 1.0;
        let p = SpinParams::new(0.5, omega, 0.0, kappa, 0.0).unwrap();
        let gen = build_spin_liouvillian(&p).unwrap();
        let mut got = crate::linalg::eigvals_sorted(&gen).unwrap();
        let gamma = 2.0 * kappa;
        let disc = C64::new(gamma * gamma / 16.0 - omega * omega, 0.0).sqrt();
        let mut want = vec![
            C64::new(0.0, 0.0),
            C64::new(-gamma / 2.0, 0.0),
            C64::new(-0.75 * gamma, 0.0) + disc,
            C64::new(-0.75 * gamma, 0.0) - disc,
        ];
        want.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        got.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        assert_eq!(crate::linalg::spectra_max_mismatch(&got, &want) < 1e-10, true);
    }

    #[test]
    fn trace_functional_annihilates_columns() {
        let p = SpinParams::new(1.5, 1.2, 0.3, 1.0, 0.4).unwrap();
        let gen = build_spin_liouvillian(&p).unwrap();
        let d = p.dim();
        for col in 0..d * d {
            let tr: C64 = (0..d).map(|k| gen[[k * d + k, col]]).sum();
            assert!(tr.norm() < 1e-12);
        }
    }

    #[test]
    fn schwinger_observables_on_shell() {
        // m_x² + m_y² + m_z² = 1 on the maximal shell; |m_z| ≤ 1 always.
        let p = ModelParams::scaled(1.45, 0.25).unwrap();
        let traj = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &p,
            100.0,
            &MfOptions { tol: 1e-10, n_samples: 1024, ..Default::default() },
        )
        .unwrap();
        let obs = spin_observables_from_bosonic(&traj);
        for k in 0..obs.times.len() {
            let norm = obs.m_x[k].powi(2) + obs.m_y[k].powi(2) + obs.m_z[k].powi(2);
            assert!(obs.m_z[k].abs() <= 1.0 + 1e-9);
            assert_relative_eq!(norm, 1.0, max_relative = 1e-7);
        }
    }

    #[test]
    fn m_z_stationary_in_tc2_oscillating_in_tc3() {
        // U > U_c (TC2): the spin sits still while the bosons circulate;
        // U < U_c (TC3): m_z keeps oscillating.
        let spread = |v: &[f64]| {
            let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
            hi - lo
        };
        let tc2 = ModelParams::scaled(0.8, 0.25).unwrap();
        let traj2 = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &tc2,
            600.0,
            &MfOptions { tol: 1e-10, n_samples: 4096, ..Default::default() },
        )
        .unwrap();
        let tail2 = traj2.discard_transient(0.75);
        let obs2 = spin_observables_from_bosonic(&tail2);
        assert!(spread(&obs2.m_z) < 1e-6, "TC2 m_z spread {}", spread(&obs2.m_z));

        let tc3 = ModelParams::scaled(1.45, 0.25).unwrap();
        let traj3 = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &tc3,
            600.0,
            &MfOptions { tol: 1e-10, n_samples: 4096, ..Default::default() },
        )
        .unwrap();
        let tail3 = traj3.discard_transient(0.75);
        let obs3 = spin_observables_from_bosonic(&tail3);
        assert!(spread(&obs3.m_z) > 0.1, "TC3 m_z spread {}", spread(&obs3.m_z));
    }

    #[test]
    fn symmetric_state_has_zero_m_z() {
        let s = MeanFieldState::from_amplitudes(C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        let traj = Trajectory {
            times: vec![0.0],
            states: vec![s],
            meta: crate::meanfield::TrajectoryMeta {
                params: ModelParams::scaled(1.0, 0.0).unwrap(),
                initial_state: s,
                tol: 1e-10,
                shell_drift_max: 0.0,
            },
        };
        let obs = spin_observables_from_bosonic(&traj);
        assert!(obs.m_z[0].abs() < 1e-15);
    }
}
