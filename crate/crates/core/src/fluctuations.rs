//! Gaussian fluctuations around the mean field.
//!
//! Fluctuation operators carry canonical commutators [F^x, F^p] = 2i
//! independent of N (all N-dependence lives in the rescaled couplings), so
//! the vacuum/coherent reference covariance is the identity. The covariance
//! obeys the Lyapunov equation
//!
//!   Σ̇ = Σ(A + Q)ᵀ + (A + Q)Σ + (Z + Zᵀ)/2,
//!
//! with drift A (Hamiltonian), Q (dissipative) and noise Z evaluated on the
//! instantaneous mean-field state; along a time crystal they are
//! time-dependent and the two integrations share the adaptive stepper.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::meanfield::{mf_rhs, MeanFieldState, Trajectory};
use crate::ode::{integrate_sampled, OdeOptions};
use crate::params::ModelParams;

pub type Mat4 = [[f64; 4]; 4];

/// 4×4 real symmetric covariance of (x_a, p_a, x_b, p_b) fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Mat4);

impl CovarianceMatrix {
    /// Coherent/vacuum fluctuations.
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(m)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = 0.5 * (self.0[i][j] + self.0[j][i]);
            }
        }
        Self(m)
    }

    pub fn to_array2(&self) -> Array2<f64> {
        Array2::from_shape_fn((4, 4), |(i, j)| self.0[i][j])
    }

    /// Smallest eigenvalue of Σ + iJ (J the symplectic form for [x̂,p̂] = 2i).
    /// Physical states have it ≥ 0; the vacuum saturates the bound.
    pub fn uncertainty_min_eig(&self) -> f64 {
        let j = symplectic_form();
        let h = Array2::from_shape_fn((4, 4), |(r, c)| {
            Complex64::new(self.0[r][c], j[r][c])
        });
        let (vals, _) = h.eigh(UPLO::Lower).expect("4x4 Hermitian eigensolve");
        vals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.uncertainty_min_eig() >= -tol
    }
}

/// Symplectic form J with [r_i, r_j] = 2i J_ij in basis (x_a, p_a, x_b, p_b).
pub fn symplectic_form() -> Mat4 {
    let mut j = [[0.0; 4]; 4];
    j[0][1] = 1.0;
    j[1][0] = -1.0;
    j[2][3] = 1.0;
    j[3][2] = -1.0;
    j
}

/// Drift, dissipative and noise matrices at a mean-field point.
#[derive(Debug, Clone, Copy)]
pub struct FluctuationMatrices {
    pub a_mat: Mat4,
    pub q_mat: Mat4,
    /// Full complex noise matrix; consumers use its symmetric part.
    pub z_mat: [[Complex64; 4]; 4],
}

impl FluctuationMatrices {
    /// (Z + Zᵀ)/2 — the real symmetric noise entering the Lyapunov equation.
    /// The imaginary antisymmetric remainder is discarded.
    pub fn noise_sym(&self) -> Mat4 {
        let mut n = [[0.0; 4]; 4];
        for (i, row) in n.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let z = 0.5 * (self.z_mat[i][j] + self.z_mat[j][i]);
                debug_assert!(z.im.abs() < 1e-12 * (1.0 + z.re.abs()));
                *v = z.re;
            }
        }
        n
    }

    /// A + Q, the full linearized drift. Equals the Jacobian of the
    /// mean-field vector field at the same point.
    pub fn drift(&self) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.a_mat[i][j] + self.q_mat[i][j];
            }
        }
        m
    }
}

/// Evaluate A, Q and Z at a mean-field state.
pub fn build_matrices(s: &MeanFieldState, p: &ModelParams) -> FluctuationMatrices {
    let (xa, pa, xb, pb) = (s.x_a, s.p_a, s.x_b, s.p_b);
    let e_a = xa * xa + pa * pa;
    let e_b = xb * xb + pb * pb;
    let (om, ka, u) = (p.omega, p.kappa, p.u);
    let h = 0.5 * om;

    let a_mat = [
        [2.0 * u * xa * pa, u * (e_a + 2.0 * pa * pa), 0.0, h],
        [-u * (e_a + 2.0 * xa * xa), -2.0 * u * xa * pa, -h, 0.0],
        [0.0, h, 2.0 * u * xb * pb, u * (e_b + 2.0 * pb * pb)],
        [-h, 0.0, -u * (e_b + 2.0 * xb * xb), -2.0 * u * xb * pb],
    ];

    let k4 = 0.25 * ka;
    let q_mat = [
        [-k4 * e_b, 0.0, -2.0 * k4 * xa * xb, -2.0 * k4 * xa * pb],
        [0.0, -k4 * e_b, -2.0 * k4 * pa * xb, -2.0 * k4 * pa * pb],
        [2.0 * k4 * xa * xb, 2.0 * k4 * pa * xb, k4 * e_a, 0.0],
        [2.0 * k4 * xa * pb, 2.0 * k4 * pa * pb, 0.0, k4 * e_a],
    ];

    // w = p_a p_b − x_a x_b, v = x_a p_b + x_b p_a; Z is Hermitian and
    // scales linearly in (2 n_th + 1). Normalization is anchored by the
    // dark state (mode a empty, Ω = 0, n_th = 0), where the exact steady
    // state pins mode a's fluctuations to the vacuum: with drift −κE_b/4
    // per quadrature the stationary condition forces Z_11 = κE_b/2, i.e.
    // the overall prefactor κ(2n_th+1)/2.
    let w = pa * pb - xa * xb;
    let v = xa * pb + xb * pa;
    let zs = 0.5 * ka * (2.0 * p.n_th + 1.0);
    let c = |re: f64, im: f64| Complex64::new(zs * re, zs * im);
    let z_mat = [
        [c(e_b, 0.0), c(0.0, e_b), c(w, -v), c(-v, -w)],
        [c(0.0, -e_b), c(e_b, 0.0), c(-v, w), c(-w, v)],
        [c(w, v), c(-v, -w), c(e_a, 0.0), c(0.0, -e_a)],
        [c(-v, w), c(-w, -v), c(0.0, e_a), c(e_a, 0.0)],
    ];

    FluctuationMatrices { a_mat, q_mat, z_mat }
}

/// Right-hand side of the Lyapunov equation at the given matrices.
pub fn lyapunov_rhs(sigma: &CovarianceMatrix, mats: &FluctuationMatrices) -> Mat4 {
    let m = mats.drift();
    let n = mats.noise_sym();
    let s = &sigma.0;
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = n[i][j];
            for k in 0..4 {
                acc += m[i][k] * s[k][j] + s[i][k] * m[j][k];
            }
            *v = acc;
        }
    }
    out
}

/// Sampled covariance history alongside a mean-field trajectory.
#[derive(Debug, Clone)]
pub struct CovarianceSeries {
    pub times: Vec<f64>,
    pub sigmas: Vec<CovarianceMatrix>,
    /// Samples where Σ + iJ dipped below the physicality tolerance.
    pub physicality_warnings: Vec<PhysicalityWarning>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PhysicalityWarning {
    pub t: f64,
    pub min_eig: f64,
}

#[derive(Debug, Clone)]
pub struct LyapunovOptions {
    pub tol: f64,
    pub n_samples: usize,
    /// Logarithmically spaced samples from `log_t_min` instead of a uniform
    /// grid; useful for growth-law fits spanning decades.
    pub log_sampling: Option<f64>,
    /// Tolerance on the smallest eigenvalue of Σ + iJ before a warning is
    /// recorded.
    pub physicality_tol: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self { tol: 1e-8, n_samples: 4096, log_sampling: None, physicality_tol: 1e-9 }
    }
}

/// Jointly integrate the mean field and its covariance from `sigma0`.
pub fn integrate_lyapunov(
    state0: &MeanFieldState,
    sigma0: &CovarianceMatrix,
    params: &ModelParams,
    t_end: f64,
    tol: f64,
) -> Result<(Trajectory, CovarianceSeries)> {
    integrate_lyapunov_with(
        state0,
        sigma0,
        params,
        t_end,
        &LyapunovOptions { tol, ..Default::default() },
    )
}

pub fn integrate_lyapunov_with(
    state0: &MeanFieldState,
    sigma0: &CovarianceMatrix,
    params: &ModelParams,
    t_end: f64,
    opts: &LyapunovOptions,
) -> Result<(Trajectory, CovarianceSeries)> {
    params.validate()?;
    if (state0.shell() - crate::params::Conventions::SHELL).abs() > 1e-9 {
        return Err(Error::Unphysical(format!("initial state off shell: {}", state0.shell())));
    }
    if sigma0.max_asymmetry() > 1e-12 {
        return Err(Error::NonSymmetric(sigma0.max_asymmetry()));
    }
    if !sigma0.is_physical(opts.physicality_tol) {
        return Err(Error::Unphysical(format!(
            "sigma0 violates the uncertainty bound (min eig {:.3e})",
            sigma0.uncertainty_min_eig()
        )));
    }

    let n = opts.n_samples.max(2);
    let sample_times: Vec<f64> = match opts.log_sampling {
        Some(t_min) => {
            let lo = t_min.max(1e-6 * t_end).ln();
            let hi = t_end.ln();
            (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
        }
        None => (1..=n).map(|i| t_end * i as f64 / n as f64).collect(),
    };

    let mut y0 = [0.0; 20];
    y0[0] = state0.x_a;
    y0[1] = state0.p_a;
    y0[2] = state0.x_b;
    y0[3] = state0.p_b;
    for i in 0..4 {
        for j in 0..4 {
            y0[4 + 4 * i + j] = sigma0.0[i][j];
        }
    }

    let p = *params;
    let mut times = vec![0.0];
    let mut states = vec![*state0];
    let mut sigmas = vec![*sigma0];
    let mut warnings = Vec::new();

    integrate_sampled(
        move |_t, y, dy| {
            let s = MeanFieldState::new(y[0], y[1], y[2], y[3]);
            let d = mf_rhs(&s, &p);
            dy[0] = d.x_a;
            dy[1] = d.p_a;
            dy[2] = d.x_b;
            dy[3] = d.p_b;
            let mats = build_matrices(&s, &p);
            let mut sig = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    sig[i][j] = y[4 + 4 * i + j];
                }
            }
            let sdot = lyapunov_rhs(&CovarianceMatrix(sig), &mats);
            for i in 0..4 {
                for j in 0..4 {
                    dy[4 + 4 * i + j] = sdot[i][j];
                }
            }
        },
        0.0,
        &y0,
        &sample_times,
        &OdeOptions { rtol: opts.tol, atol: opts.tol * 1e-2, ..Default::default() },
        |y| {
            // Re-symmetrize the covariance block after each accepted step.
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let m = 0.5 * (y[4 + 4 * i + j] + y[4 + 4 * j + i]);
                    y[4 + 4 * i + j] = m;
                    y[4 + 4 * j + i] = m;
                }
            }
        },
        |_, t, y| {
            times.push(t);
            states.push(MeanFieldState::new(y[0], y[1], y[2], y[3]));
            let mut sig = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    sig[i][j] = y[4 + 4 * i + j];
                }
            }
            sigmas.push(CovarianceMatrix(sig));
        },
    )?;

    for (t, sig) in times.iter().zip(&sigmas) {
        let min_eig = sig.uncertainty_min_eig();
        if min_eig < -opts.physicality_tol {
            warnings.push(PhysicalityWarning { t: *t, min_eig });
        }
    }

    let shell_drift_max = states
        .iter()
        .map(|s| (s.shell() - crate::params::Conventions::SHELL).abs())
        .fold(0.0, f64::max);
    let traj = Trajectory {
        times: times.clone(),
        states,
        meta: crate::meanfield::TrajectoryMeta {
            params: *params,
            initial_state: *state0,
            tol: opts.tol,
            shell_drift_max,
        },
    };
    Ok((traj, CovarianceSeries { times, sigmas, physicality_warnings: warnings }))
}
