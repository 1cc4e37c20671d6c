//! Thermodynamic-limit mean-field dynamics of the dimer.
//!
//! Integrates the four coupled quadrature equations, provides the polar
//! decomposition, the closed-form fixed points, and the classification of
//! the asymptotic phase (stationary vs. the three time-crystal phases).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::fourier::{fourier_peaks, FourierOptions};
use crate::ode::{integrate_sampled, OdeOptions};
use crate::params::{Conventions, ModelParams};

/// Scaled quadrature amplitudes x_α = ⟨x̂_α⟩/√(N/2).
///
/// Complex amplitudes are α = (x_a + i p_a)/√2, β = (x_b + i p_b)/√2; the
/// U(1) symmetry conserves |α|² + |β|² (= 2 on the maximal shell).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldState {
    pub x_a: f64,
    pub p_a: f64,
    pub x_b: f64,
    pub p_b: f64,
}

impl MeanFieldState {
    pub fn new(x_a: f64, p_a: f64, x_b: f64, p_b: f64) -> Self {
        Self { x_a, p_a, x_b, p_b }
    }

    pub fn from_amplitudes(alpha: Complex64, beta: Complex64) -> Self {
        let s = std::f64::consts::SQRT_2;
        Self { x_a: s * alpha.re, p_a: s * alpha.im, x_b: s * beta.re, p_b: s * beta.im }
    }

    /// Generic non-symmetric on-shell point used when no initial state is
    /// given: α(0) = √1.2 e^{i0.3}, β(0) = √0.8 e^{−i0.2}. Avoids the
    /// unstable symmetric manifolds.
    pub fn default_initial() -> Self {
        let alpha = Complex64::from_polar(1.2f64.sqrt(), 0.3);
        let beta = Complex64::from_polar(0.8f64.sqrt(), -0.2);
        Self::from_amplitudes(alpha, beta)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.x_a, self.p_a) / std::f64::consts::SQRT_2
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.x_b, self.p_b) / std::f64::consts::SQRT_2
    }

    /// Conserved shell Σ_α (x_α² + p_α²)/2 = |α|² + |β|².
    pub fn shell(&self) -> f64 {
        0.5 * (self.x_a * self.x_a
            + self.p_a * self.p_a
            + self.x_b * self.x_b
            + self.p_b * self.p_b)
    }

    pub fn norm(&self) -> f64 {
        (self.x_a * self.x_a + self.p_a * self.p_a + self.x_b * self.x_b + self.p_b * self.p_b)
            .sqrt()
    }

    pub fn to_polar(&self) -> PolarState {
        use std::f64::consts::PI;
        let a = self.alpha();
        let b = self.beta();
        let phi_a = a.im.atan2(a.re);
        let phi_b = b.im.atan2(b.re);
        let mut delta_phi = phi_b - phi_a;
        let mut sigma_phi = phi_a + phi_b;
        // Fold Δφ into (−π, π]; shifting Σ_φ by the same 2π keeps
        // (φ_a, φ_b) = ((Σ−Δ)/2, (Σ+Δ)/2) pointing at the same amplitudes.
        if delta_phi > PI {
            delta_phi -= 2.0 * PI;
            sigma_phi -= 2.0 * PI;
        } else if delta_phi <= -PI {
            delta_phi += 2.0 * PI;
            sigma_phi += 2.0 * PI;
        }
        PolarState { r_a: a.norm(), r_b: b.norm(), delta_phi, sigma_phi }
    }

    fn to_array(self) -> [f64; 4] {
        [self.x_a, self.p_a, self.x_b, self.p_b]
    }

    fn from_slice(y: &[f64]) -> Self {
        Self { x_a: y[0], p_a: y[1], x_b: y[2], p_b: y[3] }
    }
}

/// The parity-time transform of the flow: a ↔ b, p → −p (with t → −t).
pub fn pt_transform(s: &MeanFieldState) -> MeanFieldState {
    MeanFieldState { x_a: s.x_b, p_a: -s.p_b, x_b: s.x_a, p_b: -s.p_a }
}

/// Polar decomposition α = R_a e^{iφ_a}, β = R_b e^{iφ_b}.
///
/// `delta_phi` = φ_b − φ_a, `sigma_phi` = φ_a + φ_b. R_a, R_b and Δφ decouple
/// from Σ_φ, which on a fixed point drifts linearly, Σ_φ(t) = −8Ut + Σ_φ(0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarState {
    pub r_a: f64,
    pub r_b: f64,
    pub delta_phi: f64,
    pub sigma_phi: f64,
}

impl PolarState {
    pub fn to_cartesian(&self) -> MeanFieldState {
        let phi_a = 0.5 * (self.sigma_phi - self.delta_phi);
        let phi_b = 0.5 * (self.sigma_phi + self.delta_phi);
        MeanFieldState::from_amplitudes(
            Complex64::from_polar(self.r_a, phi_a),
            Complex64::from_polar(self.r_b, phi_b),
        )
    }

    pub fn shell(&self) -> f64 {
        self.r_a * self.r_a + self.r_b * self.r_b
    }
}

/// Time derivatives of the four quadratures.
pub fn mf_rhs(s: &MeanFieldState, p: &ModelParams) -> MeanFieldState {
    let e_a = s.x_a * s.x_a + s.p_a * s.p_a;
    let e_b = s.x_b * s.x_b + s.p_b * s.p_b;
    let (om, ka, u) = (p.omega, p.kappa, p.u);
    MeanFieldState {
        x_a: 0.5 * om * s.p_b - 0.25 * ka * s.x_a * e_b + u * s.p_a * e_a,
        p_a: -0.5 * om * s.x_b - 0.25 * ka * s.p_a * e_b - u * s.x_a * e_a,
        x_b: 0.5 * om * s.p_a + 0.25 * ka * s.x_b * e_a + u * s.p_b * e_b,
        p_b: -0.5 * om * s.x_a + 0.25 * ka * s.p_b * e_a - u * s.x_b * e_b,
    }
}

/// Default amplitude floor below which polar coordinates are singular.
pub const POLAR_AMPLITUDE_FLOOR: f64 = 1e-9;

/// Time derivatives in polar coordinates (Ṙ_a, Ṙ_b, Δφ̇, Σ̇_φ).
pub fn polar_rhs(s: &PolarState, p: &ModelParams) -> Result<PolarState> {
    polar_rhs_with_floor(s, p, POLAR_AMPLITUDE_FLOOR)
}

pub fn polar_rhs_with_floor(s: &PolarState, p: &ModelParams, floor: f64) -> Result<PolarState> {
    if s.r_a < floor || s.r_b < floor {
        return Err(Error::SingularCoordinates { r_a: s.r_a, r_b: s.r_b, floor });
    }
    let (om, ka, u) = (p.omega, p.kappa, p.u);
    let (ra, rb) = (s.r_a, s.r_b);
    let (sin_d, cos_d) = s.delta_phi.sin_cos();
    let coupling = 0.5 * om * cos_d / (ra * rb);
    Ok(PolarState {
        r_a: 0.5 * om * rb * sin_d - 0.5 * ka * ra * rb * rb,
        r_b: -0.5 * om * ra * sin_d + 0.5 * ka * rb * ra * ra,
        delta_phi: (coupling - 2.0 * u) * (rb * rb - ra * ra),
        sigma_phi: -(coupling + 2.0 * u) * (rb * rb + ra * ra),
    })
}

/// A closed-form fixed point of the reduced (R_a, R_b, Δφ) flow, plus the
/// drift rate of the total phase on it. For U ≠ 0 it is a circular limit
/// cycle of frequency 4U in the quadratures; for U = 0 a true steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub polar: PolarState,
    /// dΣ_φ/dt on the fixed point; equals −8U.
    pub sigma_phi_rate: f64,
}

/// Both ± branches of the fixed points on the maximal shell.
///
/// R_{a,b} = √(1 ± √(1 − Ω²/(16U² + κ²))), Δφ = atan(κ/4U) ∈ [0, π/2].
/// Empty when Ω² > 16U² + κ², where the flow is quasi-periodic instead.
pub fn fixed_points(p: &ModelParams) -> Vec<FixedPoint> {
    let denom = 16.0 * p.u * p.u + p.kappa * p.kappa;
    if denom == 0.0 {
        return Vec::new(); // undamped linear hopping has no isolated fixed point
    }
    let disc = 1.0 - p.omega * p.omega / denom;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let delta_phi = p.kappa.atan2(4.0 * p.u);
    let rate = -8.0 * p.u;
    [s, -s]
        .iter()
        .map(|&sgn| FixedPoint {
            polar: PolarState {
                r_a: (1.0 + sgn).max(0.0).sqrt(),
                r_b: (1.0 - sgn).max(0.0).sqrt(),
                delta_phi,
                sigma_phi: 0.0,
            },
            sigma_phi_rate: rate,
        })
        .collect()
}

/// Critical interaction U_c(Ω) = κ√((Ω/κ)² − 1)/4 separating the TC2 limit
/// cycle (U > U_c) from quasi-periodic TC3 dynamics (U < U_c); zero for
/// Ω ≤ κ, where the fixed points always exist.
pub fn u_critical(omega: f64, kappa: f64) -> f64 {
    let r = omega / kappa;
    if r <= 1.0 {
        0.0
    } else {
        kappa * (r * r - 1.0).sqrt() / 4.0
    }
}

/// A sampled mean-field trajectory with its provenance.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    pub meta: TrajectoryMeta,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub params: ModelParams,
    pub initial_state: MeanFieldState,
    pub tol: f64,
    /// Largest observed |shell − 2| over the stored samples.
    pub shell_drift_max: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Uniform sampling interval.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
        }
    }

    /// Trajectory restricted to the last (1 − fraction) of the time span.
    pub fn discard_transient(&self, fraction: f64) -> Trajectory {
        let skip = ((self.times.len() as f64) * fraction).floor() as usize;
        let skip = skip.min(self.times.len().saturating_sub(1));
        Trajectory {
            times: self.times[skip..].to_vec(),
            states: self.states[skip..].to_vec(),
            meta: self.meta.clone(),
        }
    }

    pub fn series_p_a(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.p_a).collect()
    }

    pub fn series_x_a(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x_a).collect()
    }

    /// Polar states with φ_a, φ_b unwrapped by continuity, so the linear
    /// drift of Σ_φ is measurable across ±π crossings.
    pub fn polar_unwrapped(&self) -> Vec<PolarState> {
        let mut out = Vec::with_capacity(self.states.len());
        let mut prev_a = 0.0;
        let mut prev_b = 0.0;
        let mut acc_a = 0.0;
        let mut acc_b = 0.0;
        for (i, s) in self.states.iter().enumerate() {
            let a = s.alpha();
            let b = s.beta();
            let phi_a = a.im.atan2(a.re);
            let phi_b = b.im.atan2(b.re);
            if i > 0 {
                acc_a += unwrap_increment(phi_a - prev_a);
                acc_b += unwrap_increment(phi_b - prev_b);
            }
            prev_a = phi_a;
            prev_b = phi_b;
            let ua = phi_a + acc_a;
            let ub = phi_b + acc_b;
            out.push(PolarState {
                r_a: a.norm(),
                r_b: b.norm(),
                delta_phi: ub - ua,
                sigma_phi: ua + ub,
            });
        }
        out
    }
}

fn unwrap_increment(raw: f64) -> f64 {
    use std::f64::consts::PI;
    if raw > PI {
        -2.0 * PI
    } else if raw < -PI {
        2.0 * PI
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MfOptions {
    /// Relative tolerance of the embedded RK step control.
    pub tol: f64,
    /// Number of uniformly spaced samples stored (including t_end).
    pub n_samples: usize,
    /// Admissible |shell − 2| of the initial state. Chained runs (sweeps)
    /// widen this to hand states over exactly, accumulated drift included.
    pub shell_tol: f64,
}

impl Default for MfOptions {
    fn default() -> Self {
        Self { tol: 1e-10, n_samples: 1 << 15, shell_tol: 1e-9 }
    }
}

/// Integrate the mean-field equations from `state0` up to `t_end`.
///
/// `state0` must lie on the maximal shell within 1e−9. The returned
/// trajectory is uniformly sampled; the stored shell drift stays within
/// 10·tol·t_end of zero for healthy runs.
pub fn integrate_mf(
    state0: &MeanFieldState,
    params: &ModelParams,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate_mf_with(state0, params, t_end, &MfOptions { tol, ..Default::default() })
}

pub fn integrate_mf_with(
    state0: &MeanFieldState,
    params: &ModelParams,
    t_end: f64,
    opts: &MfOptions,
) -> Result<Trajectory> {
    params.validate()?;
    if (state0.shell() - Conventions::SHELL).abs() > opts.shell_tol {
        return Err(Error::Unphysical(format!(
            "initial state off shell: |alpha|^2 + |beta|^2 = {:.12}",
            state0.shell()
        )));
    }
    if !(t_end > 0.0) {
        return Err(Error::ParameterDomain(format!("t_end must be > 0, got {t_end}")));
    }
    let n = opts.n_samples.max(2);
    let sample_times: Vec<f64> = (1..=n).map(|i| t_end * i as f64 / n as f64).collect();

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(*state0);

    let p = *params;
    integrate_sampled(
        move |_t, y, dy| {
            let d = mf_rhs(&MeanFieldState::from_slice(y), &p);
            dy.copy_from_slice(&d.to_array());
        },
        0.0,
        &state0.to_array(),
        &sample_times,
        &OdeOptions { rtol: opts.tol, atol: opts.tol * 1e-2, ..Default::default() },
        |_| {},
        |_, t, y| {
            times.push(t);
            states.push(MeanFieldState::from_slice(y));
        },
    )?;

    let shell_drift_max = states
        .iter()
        .map(|s| (s.shell() - Conventions::SHELL).abs())
        .fold(0.0, f64::max);
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            params: *params,
            initial_state: *state0,
            tol: opts.tol,
            shell_drift_max,
        },
    })
}

/// Order parameters on a (transient-free) trajectory:
/// ΔN = |⟨R_a² − R_b²⟩_t|/2 and ΔR̄ = |R̄_a − R̄_b|/√2.
pub fn order_parameters(traj: &Trajectory) -> Result<(f64, f64)> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let n = traj.states.len() as f64;
    let mut imbalance = 0.0;
    let mut r_a_mean = 0.0;
    let mut r_b_mean = 0.0;
    for s in &traj.states {
        let na = s.alpha().norm_sqr();
        let nb = s.beta().norm_sqr();
        imbalance += na - nb;
        r_a_mean += na.sqrt();
        r_b_mean += nb.sqrt();
    }
    let delta_n = (imbalance / n).abs() / 2.0;
    let delta_r_bar = ((r_a_mean - r_b_mean) / n).abs() / std::f64::consts::SQRT_2;
    Ok((delta_n, delta_r_bar))
}

/// Asymptotic phase of the mean-field flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// Time-independent steady state (U = 0, Ω < κ).
    #[serde(rename = "stationary")]
    Stationary,
    /// PT-symmetric oscillations with odd harmonics only (U = 0, Ω > κ).
    #[serde(rename = "TC1")]
    Tc1,
    /// Single-frequency limit cycle with unequal radii (U > U_c).
    #[serde(rename = "TC2")]
    Tc2,
    /// Quasi-periodic dynamics with incommensurate frequencies (0 < U < U_c).
    #[serde(rename = "TC3")]
    Tc3,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Stationary => "stationary",
            Phase::Tc1 => "TC1",
            Phase::Tc2 => "TC2",
            Phase::Tc3 => "TC3",
        };
        write!(f, "{s}")
    }
}

/// Classification result with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    /// Detected spectral peak frequencies of p_a (angular, by falling power).
    pub frequencies: Vec<f64>,
    pub delta_n: f64,
    pub delta_r_bar: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Fraction of the trajectory discarded as transient.
    pub transient_fraction: f64,
    /// Residual ‖mf_rhs‖ below which the flow counts as stationary.
    pub eps_fp: f64,
    /// ΔR̄ threshold separating TC2 from TC3.
    pub eps_r: f64,
    /// Relative power floor for spectral peaks.
    pub power_floor: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { transient_fraction: 0.5, eps_fp: 1e-8, eps_r: 1e-3, power_floor: 1e-4 }
    }
}

/// Classify the asymptotic phase of a trajectory.
pub fn classify_phase(traj: &Trajectory, params: &ModelParams) -> Result<PhaseLabel> {
    classify_phase_with(traj, params, &ClassifyOptions::default())
}

pub fn classify_phase_with(
    traj: &Trajectory,
    params: &ModelParams,
    opts: &ClassifyOptions,
) -> Result<PhaseLabel> {
    if traj.len() < 64 {
        return Err(Error::TooShortSeries(format!("{} samples", traj.len())));
    }
    let tail = traj.discard_transient(opts.transient_fraction);
    let (delta_n, delta_r_bar) = order_parameters(&tail)?;

    let last = tail.states.last().unwrap();
    let residual = mf_rhs(last, params).norm();
    if residual < opts.eps_fp {
        return Ok(PhaseLabel {
            phase: Phase::Stationary,
            frequencies: Vec::new(),
            delta_n,
            delta_r_bar,
        });
    }

    let peaks = fourier_peaks(
        &tail.series_p_a(),
        tail.dt(),
        0.0, // transient already removed
        &FourierOptions { power_floor: opts.power_floor, ..Default::default() },
    )?;
    if peaks.peaks.is_empty() {
        return Err(Error::InconclusiveClassification(format!(
            "no spectral peaks above floor; rhs residual {residual:.3e}"
        )));
    }
    let frequencies: Vec<f64> = peaks.peaks.iter().map(|p| p.frequency).collect();

    if params.u == 0.0 {
        // Oscillating at U = 0: the PT-symmetric time crystal.
        return Ok(PhaseLabel { phase: Phase::Tc1, frequencies, delta_n, delta_r_bar });
    }

    let f0 = frequencies[0];
    let has_incommensurate =
        frequencies.iter().skip(1).any(|&f| !is_harmonically_related(f / f0, 8, 1e-3));

    if !has_incommensurate && delta_r_bar > opts.eps_r {
        Ok(PhaseLabel { phase: Phase::Tc2, frequencies, delta_n, delta_r_bar })
    } else if has_incommensurate && delta_r_bar < opts.eps_r {
        Ok(PhaseLabel { phase: Phase::Tc3, frequencies, delta_n, delta_r_bar })
    } else {
        Err(Error::InconclusiveClassification(format!(
            "delta_r_bar = {delta_r_bar:.3e} (threshold {:.1e}), incommensurate peaks: {}",
            opts.eps_r, has_incommensurate
        )))
    }
}

/// Whether `ratio` is within `tol` of some rational p/q with q ≤ `q_max`.
pub(crate) fn is_harmonically_related(ratio: f64, q_max: u32, tol: f64) -> bool {
    if !ratio.is_finite() || ratio <= 0.0 {
        return true; // degenerate; do not count as evidence of quasi-periodicity
    }
    for q in 1..=q_max {
        let p = (ratio * q as f64).round();
        if p >= 1.0 && (ratio - p / q as f64).abs() <= tol {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_on_shell(rng: &mut ChaCha8Rng) -> MeanFieldState {
        let w: f64 = rng.gen_range(0.05..0.95);
        let alpha = Complex64::from_polar(
            (2.0 * w).sqrt(),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let beta = Complex64::from_polar(
            (2.0 * (1.0 - w)).sqrt(),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        MeanFieldState::from_amplitudes(alpha, beta)
    }

    fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
        ModelParams::new(
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.0..1.0),
        )
        .unwrap()
    }

    #[test]
    fn origin_is_equilibrium() {
        let p = ModelParams::scaled(1.3, 0.2).unwrap();
        let d = mf_rhs(&MeanFieldState::new(0.0, 0.0, 0.0, 0.0), &p);
        assert_eq!(d.norm(), 0.0);
    }

    #[test]
    fn closed_form_fixed_point_annihilates_rhs() {
        // Ω/κ = 0.8, U = 0: R_a² = 1.6, R_b² = 0.4, Δφ = π/2.
        let p = ModelParams::scaled(0.8, 0.0).unwrap();
        let fps = fixed_points(&p);
        assert_eq!(fps.len(), 2);
        assert_relative_eq!(fps[0].polar.r_a * fps[0].polar.r_a, 1.6, max_relative = 1e-14);
        assert_relative_eq!(fps[0].polar.r_b * fps[0].polar.r_b, 0.4, max_relative = 1e-14);
        assert_relative_eq!(fps[0].polar.delta_phi, std::f64::consts::FRAC_PI_2);
        for fp in &fps {
            let s = fp.polar.to_cartesian();
            assert!(mf_rhs(&s, &p).norm() < 1e-12);
        }
    }

    #[test]
    fn fixed_points_with_interaction() {
        // Ω/κ = 0.8, U/κ = 0.25: 16U² + κ² = 2, Δφ = π/4.
        let p = ModelParams::scaled(0.8, 0.25).unwrap();
        let fps = fixed_points(&p);
        let s = (1.0f64 - 0.64 / 2.0).sqrt();
        assert_relative_eq!(fps[0].polar.r_a.powi(2), 1.0 + s, max_relative = 1e-14);
        assert_relative_eq!(fps[0].polar.r_b.powi(2), 1.0 - s, max_relative = 1e-14);
        assert_relative_eq!(fps[0].polar.r_a.powi(2), 1.8246, max_relative = 1e-4);
        assert_relative_eq!(fps[0].polar.r_b.powi(2), 0.1754, max_relative = 1e-3);
        assert_relative_eq!(fps[0].polar.delta_phi, std::f64::consts::FRAC_PI_4);
        assert_relative_eq!(fps[0].sigma_phi_rate, -2.0);
    }

    #[test]
    fn fixed_points_vanish_beyond_boundary() {
        // 1.45² = 2.1025 > 16·0.0625 + 1 = 2.
        let p = ModelParams::scaled(1.45, 0.25).unwrap();
        assert!(fixed_points(&p).is_empty());
    }

    #[test]
    fn random_fixed_points_annihilate_rhs() {
        // On a fixed point the only motion left is the rigid limit-cycle
        // rotation φ̇ = −4U, i.e. (ẋ, ṗ) = (4Up, −4Ux) per mode; mf_rhs
        // minus that rotation vanishes, and exactly so for U = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..200 {
            let p = random_params(&mut rng);
            for fp in fixed_points(&p) {
                if fp.polar.r_a < 1e-6 || fp.polar.r_b < 1e-6 {
                    continue; // singular branch (Ω ≈ 0)
                }
                let cart = fp.polar.to_cartesian();
                let d = mf_rhs(&cart, &p);
                let u4 = 4.0 * p.u;
                let residual = MeanFieldState::new(
                    d.x_a - u4 * cart.p_a,
                    d.p_a + u4 * cart.x_a,
                    d.x_b - u4 * cart.p_b,
                    d.p_b + u4 * cart.x_b,
                )
                .norm();
                assert!(residual < 1e-12, "residual {residual:.3e} at {p:?}");
                let pd = polar_rhs(&fp.polar, &p).unwrap();
                assert!(pd.r_a.abs() < 1e-12 && pd.r_b.abs() < 1e-12);
                // Δφ̇ cancellation is amplified by 1/(R_a R_b) for Ω ≪ κ.
                assert!(pd.delta_phi.abs() < 1e-10 * (1.0 + 1.0 / (fp.polar.r_a * fp.polar.r_b)));
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn shell_derivative_vanishes() {
        // d/dt Σ(x² + p²)/2 = x·ẋ + p·ṗ = 0 identically on the flow.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let s = random_on_shell(&mut rng);
            let d = mf_rhs(&s, &p);
            let shell_dot = s.x_a * d.x_a + s.p_a * d.p_a + s.x_b * d.x_b + s.p_b * d.p_b;
            assert!(shell_dot.abs() < 1e-13, "shell derivative {shell_dot:.3e}");
        }
    }

    #[test]
    fn pt_invariance_of_flow() {
        // mf_rhs(PT s) = −PT(mf_rhs(s)).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let s = random_on_shell(&mut rng);
            let lhs = mf_rhs(&pt_transform(&s), &p);
            let r = mf_rhs(&s, &p);
            let rhs = pt_transform(&r);
            assert_relative_eq!(lhs.x_a, -rhs.x_a, epsilon = 1e-13, max_relative = 1e-12);
            assert_relative_eq!(lhs.p_a, -rhs.p_a, epsilon = 1e-13, max_relative = 1e-12);
            assert_relative_eq!(lhs.x_b, -rhs.x_b, epsilon = 1e-13, max_relative = 1e-12);
            assert_relative_eq!(lhs.p_b, -rhs.p_b, epsilon = 1e-13, max_relative = 1e-12);
        }
    }

    #[test]
    fn polar_rhs_matches_chain_rule() {
        // Push mf_rhs through the exact Jacobian of the coordinate map:
        // Ṙ = (xẋ + pṗ)/(2R), φ̇ = (xṗ − pẋ)/(x² + p²).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let s = random_on_shell(&mut rng);
            let pol = s.to_polar();
            if pol.r_a < 1e-3 || pol.r_b < 1e-3 {
                continue;
            }
            let d = mf_rhs(&s, &p);
            let r_a_dot = (s.x_a * d.x_a + s.p_a * d.p_a) / (2.0 * pol.r_a);
            let r_b_dot = (s.x_b * d.x_b + s.p_b * d.p_b) / (2.0 * pol.r_b);
            let phi_a_dot = (s.x_a * d.p_a - s.p_a * d.x_a) / (s.x_a * s.x_a + s.p_a * s.p_a);
            let phi_b_dot = (s.x_b * d.p_b - s.p_b * d.x_b) / (s.x_b * s.x_b + s.p_b * s.p_b);
            let pd = polar_rhs(&pol, &p).unwrap();
            assert_relative_eq!(pd.r_a, r_a_dot, epsilon = 1e-12, max_relative = 1e-10);
            assert_relative_eq!(pd.r_b, r_b_dot, epsilon = 1e-12, max_relative = 1e-10);
            assert_relative_eq!(
                pd.delta_phi,
                phi_b_dot - phi_a_dot,
                epsilon = 1e-12,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                pd.sigma_phi,
                phi_b_dot + phi_a_dot,
                epsilon = 1e-12,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn polar_rhs_finite_difference_cross_check() {
        let p = ModelParams::scaled(1.1, 0.15).unwrap();
        let s = MeanFieldState::default_initial();
        let pol = s.to_polar();
        let pd = polar_rhs(&pol, &p).unwrap();
        // Central difference of the polar coordinates of a short flow.
        let h = 1e-6;
        let step = |sign: f64| {
            let d = mf_rhs(&s, &p);
            MeanFieldState::new(
                s.x_a + sign * h * d.x_a,
                s.p_a + sign * h * d.p_a,
                s.x_b + sign * h * d.x_b,
                s.p_b + sign * h * d.p_b,
            )
            .to_polar()
        };
        let fwd = step(1.0);
        let bwd = step(-1.0);
        assert_relative_eq!(pd.r_a, (fwd.r_a - bwd.r_a) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(pd.r_b, (fwd.r_b - bwd.r_b) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(
            pd.delta_phi,
            (fwd.delta_phi - bwd.delta_phi) / (2.0 * h),
            max_relative = 1e-5
        );
    }

    #[test]
    fn polar_rhs_at_fixed_point() {
        // Ṙ_a = Ṙ_b = Δφ̇ = 0 and Σ̇_φ = −8U on every fixed point.
        for (om, u) in [(0.8, 0.25), (0.8, 0.0), (1.2, 0.3), (0.3, 0.05)] {
            let p = ModelParams::scaled(om, u).unwrap();
            for fp in fixed_points(&p) {
                if fp.polar.r_a < 1e-6 || fp.polar.r_b < 1e-6 {
                    continue;
                }
                let d = polar_rhs(&fp.polar, &p).unwrap();
                assert!(d.r_a.abs() < 1e-12, "dR_a = {:.3e}", d.r_a);
                assert!(d.r_b.abs() < 1e-12);
                assert!(d.delta_phi.abs() < 1e-12);
                assert_relative_eq!(d.sigma_phi, -8.0 * u, epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn polar_rhs_rejects_singular_amplitudes() {
        let p = ModelParams::scaled(1.0, 0.0).unwrap();
        let s = PolarState { r_a: 1e-12, r_b: 1.0, delta_phi: 0.4, sigma_phi: 0.0 };
        assert!(matches!(polar_rhs(&s, &p), Err(Error::SingularCoordinates { .. })));
    }

    #[test]
    fn polar_cartesian_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let s = random_on_shell(&mut rng);
            let back = s.to_polar().to_cartesian();
            assert_relative_eq!(s.x_a, back.x_a, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(s.p_a, back.p_a, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(s.x_b, back.x_b, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(s.p_b, back.p_b, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn stationary_convergence_below_critical_hopping() {
        // Ω/κ = 0.8, U = 0: generic initial state reaches the steady state
        // with ΔN = √(1 − 0.64) = 0.6.
        let p = ModelParams::scaled(0.8, 0.0).unwrap();
        let traj = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &p,
            200.0,
            &MfOptions { tol: 1e-10, n_samples: 4096, ..Default::default() },
        )
        .unwrap();
        let tail = traj.discard_transient(0.5);
        let (delta_n, _) = order_parameters(&tail).unwrap();
        assert_relative_eq!(delta_n, 0.6, epsilon = 1e-8);
        let residual = mf_rhs(tail.states.last().unwrap(), &p).norm();
        assert!(residual < 1e-10, "rhs residual {residual:.3e}");
    }

    #[test]
    fn persistent_oscillation_above_critical_hopping() {
        let p = ModelParams::scaled(1.45, 0.0).unwrap();
        let traj = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &p,
            400.0,
            &MfOptions { tol: 1e-10, n_samples: 8192, ..Default::default() },
        )
        .unwrap();
        let tail = traj.discard_transient(0.8);
        let p_a = tail.series_p_a();
        let (lo, hi) = p_a.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi - lo > 0.5, "oscillation range {:.3}", hi - lo);
        let residual = mf_rhs(tail.states.last().unwrap(), &p).norm();
        assert!(residual > 1e-3);
    }

    #[test]
    fn tc2_limit_cycle_has_distinct_constant_radii() {
        // Ω/κ = 0.8, U/κ = 0.25: circular limit cycles, R_a ≠ R_b.
        let p = ModelParams::scaled(0.8, 0.25).unwrap();
        let traj = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &p,
            400.0,
            &MfOptions { tol: 1e-10, n_samples: 8192, ..Default::default() },
        )
        .unwrap();
        let tail = traj.discard_transient(0.75);
        let polars = tail.polar_unwrapped();
        let r_a: Vec<f64> = polars.iter().map(|q| q.r_a).collect();
        let r_b: Vec<f64> = polars.iter().map(|q| q.r_b).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let spread = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m).abs()).fold(0.0, f64::max)
        };
        // Radii are constant on the cycle and match a closed-form branch.
        assert!(spread(&r_a) < 1e-6, "R_a spread {:.3e}", spread(&r_a));
        assert!(spread(&r_b) < 1e-6);
        let fps = fixed_points(&p);
        let (ra, rb) = (mean(&r_a), mean(&r_b));
        let matches_branch = fps.iter().any(|fp| {
            (fp.polar.r_a - ra).abs() < 1e-6 && (fp.polar.r_b - rb).abs() < 1e-6
        });
        assert!(matches_branch, "R_a = {ra}, R_b = {rb}");
        assert!((ra - rb).abs() > 0.5);
    }

    #[test]
    fn tc2_limit_cycle_is_spectrally_pure() {
        // Single harmonic: secondary spectral power of p_a below 1e−4 of the
        // dominant peak on the settled cycle.
        let p = ModelParams::scaled(0.8, 0.25).unwrap();
        let traj = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &p,
            800.0,
            &MfOptions { tol: 1e-10, n_samples: 1 << 14, ..Default::default() },
        )
        .unwrap();
        let tail = traj.discard_transient(0.75);
        let purity =
            crate::experiments::fourier::spectral_purity(&tail.series_p_a(), tail.dt()).unwrap();
        assert!(purity < 1e-4, "TC2 secondary-peak power ratio {purity:.3e}");
    }

    #[test]
    fn total_phase_drifts_at_minus_8u() {
        let u = 0.25;
        let p = ModelParams::scaled(0.8, u).unwrap();
        let traj = integrate_mf_with(
            &MeanFieldState::default_initial(),
            &p,
            400.0,
            &MfOptions { tol: 1e-10, n_samples: 8192, ..Default::default() },
        )
        .unwrap();
        let tail = traj.discard_transient(0.75);
        let polars = tail.polar_unwrapped();
        // Linear fit of Σ_φ(t) over the settled window.
        let n = polars.len() as f64;
        let tm = tail.times.iter().sum::<f64>() / n;
        let sm = polars.iter().map(|q| q.sigma_phi).sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (t, q) in tail.times.iter().zip(&polars) {
            num += (t - tm) * (q.sigma_phi - sm);
            den += (t - tm) * (t - tm);
        }
        let slope = num / den;
        assert_relative_eq!(slope, -8.0 * u, max_relative = 1e-6);
    }

    #[test]
    fn shell_conservation_over_random_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let s0 = random_on_shell(&mut rng);
            let t_end = 50.0;
            let tol = 1e-10;
            let traj = integrate_mf_with(
                &s0,
                &p,
                t_end,
                &MfOptions { tol, n_samples: 512, ..Default::default() },
            )
            .unwrap();
            assert!(
                traj.meta.shell_drift_max < 10.0 * tol * t_end,
                "shell drift {:.3e} for {:?}",
                traj.meta.shell_drift_max,
                p
            );
        }
    }

    #[test]
    fn rejects_off_shell_initial_state() {
        let p = ModelParams::scaled(1.0, 0.0).unwrap();
        let s = MeanFieldState::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(integrate_mf(&s, &p, 10.0, 1e-8), Err(Error::Unphysical(_))));
    }

    #[test]
    fn symmetric_state_has_zero_order_parameters() {
        let s = MeanFieldState::from_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![s, s],
            meta: TrajectoryMeta {
                params: ModelParams::scaled(1.0, 0.0).unwrap(),
                initial_state: s,
                tol: 1e-10,
                shell_drift_max: 0.0,
            },
        };
        let (dn, dr) = order_parameters(&traj).unwrap();
        assert_eq!(dn, 0.0);
        assert_eq!(dr, 0.0);
    }

    #[test]
    fn harmonic_relation_detector() {
        assert!(is_harmonically_related(3.0, 8, 1e-3));
        assert!(is_harmonically_related(1.5, 8, 1e-3));
        assert!(is_harmonically_related(0.25, 8, 1e-3));
        assert!(!is_harmonically_related(std::f64::consts::SQRT_2, 8, 1e-3));
        assert!(!is_harmonically_related(1.6182, 8, 1e-4));
    }
}
