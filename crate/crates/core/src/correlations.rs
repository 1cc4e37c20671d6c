//! Two-mode Gaussian correlation measures.
//!
//! Works on 4×4 covariance matrices in the convention where the vacuum is
//! the identity (symplectic eigenvalues ν ≥ 1 for physical states).
//! Logarithmic negativity ε = max(0, −log₂ ν̃₋) with ν̃₋ the smaller
//! symplectic eigenvalue after partial transposition; Gaussian discord
//! D^{a←b} minimizes the conditional entropy of mode a over single-mode
//! Gaussian measurements on mode b.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluctuations::{CovarianceMatrix, CovarianceSeries, Mat4};

/// Logarithm base used for entropies and the negativity. Base 2 throughout
/// by default; natural log available as a configuration choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogBase {
    Two,
    Natural,
}

impl LogBase {
    fn log(&self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

/// Bosonic entropy function f(x) = ((x+1)/2)log((x+1)/2) − ((x−1)/2)log((x−1)/2).
fn entropy_f(x: f64, base: LogBase) -> f64 {
    let x = x.max(1.0);
    let hi = 0.5 * (x + 1.0);
    let lo = 0.5 * (x - 1.0);
    let mut s = hi * base.log(hi);
    if lo > 0.0 {
        s -= lo * base.log(lo);
    }
    s
}

fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a * d - b * c
}

/// Kahan's FMA determinant: accurate to ~1 ulp even under heavy
/// cancellation, which raw `ad − bc` is not once covariances span many
/// decades.
fn det2_stable(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let w = b * c;
    let e = f64::mul_add(b, c, -w);
    let f = f64::mul_add(a, d, -w);
    f - e
}

fn det4(m: &Mat4) -> f64 {
    // Expansion in 2×2 complementary minors along the first two rows.
    let minor_top = |c0: usize, c1: usize| det2(m[0][c0], m[0][c1], m[1][c0], m[1][c1]);
    let minor_bot = |c0: usize, c1: usize| det2(m[2][c0], m[2][c1], m[3][c0], m[3][c1]);
    minor_top(0, 1) * minor_bot(2, 3) - minor_top(0, 2) * minor_bot(1, 3)
        + minor_top(0, 3) * minor_bot(1, 2)
        + minor_top(1, 2) * minor_bot(0, 3)
        - minor_top(1, 3) * minor_bot(0, 2)
        + minor_top(2, 3) * minor_bot(0, 1)
}

/// Symplectic invariants of a two-mode covariance matrix:
/// determinants of the mode-a block, mode-b block, cross block and of Σ.
#[derive(Debug, Clone, Copy)]
struct Invariants {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

fn invariants(sigma: &CovarianceMatrix) -> Result<Invariants> {
    let asym = sigma.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NonSymmetric(asym));
    }
    let m = &sigma.0;
    // det Σ = (ν₋ν₊)² through the backward-stable symplectic spectrum; the
    // cofactor expansion of the raw 4×4 cancels catastrophically for
    // strongly squeezed covariances.
    let (nu_minus, nu_plus) = symplectic_eigenvalues(sigma, false)?;
    Ok(Invariants {
        a: det2_stable(m[0][0], m[0][1], m[1][0], m[1][1]),
        b: det2_stable(m[2][2], m[2][3], m[3][2], m[3][3]),
        c: det2_stable(m[0][2], m[0][3], m[1][2], m[1][3]),
        d: (nu_minus * nu_plus).powi(2),
    })
}

/// Symplectic eigenvalues (ν₋, ν₊): the moduli of the eigenvalues of iJΣ,
/// normalized so the vacuum gives ν = 1. With `partial_transpose` the sign
/// of the p_b row/column is flipped first (time reversal of mode b).
///
/// Computed by the backward-stable eigensolve of iJΣ; the closed-form route
/// through the symplectic invariants loses precision catastrophically once
/// Σ spans many decades (late-time critical growth).
pub fn symplectic_eigenvalues(
    sigma: &CovarianceMatrix,
    partial_transpose: bool,
) -> Result<(f64, f64)> {
    use ndarray::Array2;
    use ndarray_linalg::EigVals;

    let asym = sigma.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NonSymmetric(asym));
    }
    let mut m = *sigma;
    if partial_transpose {
        for k in 0..4 {
            m.0[3][k] = -m.0[3][k];
            m.0[k][3] = -m.0[k][3];
        }
    }
    let j = crate::fluctuations::symplectic_form();
    let ijs = Array2::from_shape_fn((4, 4), |(r, c)| {
        let mut acc = 0.0;
        for k in 0..4 {
            acc += j[r][k] * m.0[k][c];
        }
        num_complex::Complex64::new(0.0, acc)
    });
    let vals = ijs.eigvals().map_err(|e| Error::Unphysical(e.to_string()))?;
    let mut mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
    mods.sort_by(f64::total_cmp);
    // eigenvalues come in ±ν pairs
    Ok((0.5 * (mods[0] + mods[1]), 0.5 * (mods[2] + mods[3])))
}

/// Closed-form symplectic spectrum from the raw determinant invariants;
/// accurate for moderate covariances and kept as the independent
/// cross-check route.
#[allow(dead_code)]
pub(crate) fn symplectic_eigenvalues_invariant(
    sigma: &CovarianceMatrix,
    partial_transpose: bool,
) -> Result<(f64, f64)> {
    let asym = sigma.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NonSymmetric(asym));
    }
    let m = &sigma.0;
    let a = det2(m[0][0], m[0][1], m[1][0], m[1][1]);
    let b = det2(m[2][2], m[2][3], m[3][2], m[3][3]);
    let mut c = det2(m[0][2], m[0][3], m[1][2], m[1][3]);
    if partial_transpose {
        c = -c;
    }
    let d = det4(m);
    let delta = a + b + 2.0 * c;
    let disc = (delta * delta - 4.0 * d).max(0.0);
    let root = disc.sqrt();
    let nu_minus = (0.5 * (delta - root)).max(0.0).sqrt();
    let nu_plus = (0.5 * (delta + root)).max(0.0).sqrt();
    Ok((nu_minus, nu_plus))
}

/// Logarithmic negativity ε = max(0, −log₂ ν̃₋). Zero on separable states.
pub fn logarithmic_negativity(sigma: &CovarianceMatrix) -> Result<f64> {
    logarithmic_negativity_in(sigma, LogBase::Two)
}

pub fn logarithmic_negativity_in(sigma: &CovarianceMatrix, base: LogBase) -> Result<f64> {
    let (nu_t_minus, _) = symplectic_eigenvalues(sigma, true)?;
    if nu_t_minus <= 0.0 {
        return Err(Error::Unphysical(format!(
            "vanishing partially transposed symplectic eigenvalue ({nu_t_minus:.3e})"
        )));
    }
    // Separable within numerical resolution of the eigensolve.
    if nu_t_minus >= 1.0 - 1e-12 {
        return Ok(0.0);
    }
    Ok((-base.log(nu_t_minus)).max(0.0))
}

/// Gaussian quantum discord D^{a←b} and classical correlations J^{a←b}.
///
/// Uses the closed-form optimum over single-mode Gaussian measurements on
/// mode b for standard-form states; the four symplectic invariants fully
/// determine the result, so no explicit standard-form reduction is needed
/// for conditioning. Returns (D, J) with J = I_mutual − D.
pub fn gaussian_discord(sigma: &CovarianceMatrix) -> Result<(f64, f64)> {
    gaussian_discord_in(sigma, LogBase::Two)
}

pub fn gaussian_discord_in(sigma: &CovarianceMatrix, base: LogBase) -> Result<(f64, f64)> {
    let inv = invariants(sigma)?;
    let (nu_minus, nu_plus) = symplectic_eigenvalues(sigma, false)?;
    // The admissible dip below 1 scales with the covariance's dynamic range:
    // both the eigensolve and the upstream integration carry errors
    // proportional to ‖Σ‖.
    let scale: f64 = sigma.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if nu_minus < 1.0 - 1e-7 * scale.max(1.0) {
        return Err(Error::Unphysical(format!(
            "covariance violates the uncertainty bound (nu_- = {nu_minus:.12})"
        )));
    }
    let e_min = min_conditional_det(&inv, scale)?;
    let d = (entropy_f(inv.b.max(1.0).sqrt(), base) - entropy_f(nu_minus, base)
        - entropy_f(nu_plus, base)
        + entropy_f(e_min.sqrt(), base))
    .max(0.0);
    let j = (entropy_f(inv.a.max(1.0).sqrt(), base) - entropy_f(e_min.sqrt(), base)).max(0.0);
    Ok((d, j))
}

/// Minimum over single-mode Gaussian measurements on b of the determinant of
/// the conditional covariance of a. `scale` is the Frobenius norm of Σ,
/// setting the cancellation-error budget of the determinant invariants.
fn min_conditional_det(inv: &Invariants, scale: f64) -> Result<f64> {
    let (a, b, c, d) = (inv.a, inv.b, inv.c, inv.d);
    if c.abs() < 1e-14 || b <= 1.0 + 1e-12 {
        // Uncorrelated, or mode b pure (which forces a product state):
        // measurements on b do not update a.
        return Ok(a.max(1.0));
    }
    let c2 = c * c;
    let e = if (d - a * b).powi(2) <= (1.0 + b) * c2 * (a + d) {
        let inner = (c2 + (b - 1.0) * (d - a)).max(0.0);
        (2.0 * c2 + (b - 1.0) * (d - a) + 2.0 * c.abs() * inner.sqrt()) / ((b - 1.0) * (b - 1.0))
    } else {
        let inner = (c2 * c2 + (d - a * b).powi(2) - 2.0 * c2 * (a * b + d)).max(0.0);
        (a * b - c2 + d - inner.sqrt()) / (2.0 * b)
    };
    if !e.is_finite() {
        return Err(Error::NonConvergence { residual: f64::NAN });
    }
    if e < 1.0 - 1e-7 * scale.max(1.0) {
        // The optimal conditional state must itself be physical.
        return Err(Error::NonConvergence { residual: 1.0 - e });
    }
    Ok(e.max(1.0))
}

/// Gaussian mutual information of the two modes.
pub fn mutual_information_in(sigma: &CovarianceMatrix, base: LogBase) -> Result<f64> {
    let inv = invariants(sigma)?;
    let (nu_minus, nu_plus) = symplectic_eigenvalues(sigma, false)?;
    Ok(entropy_f(inv.a.max(1.0).sqrt(), base) + entropy_f(inv.b.max(1.0).sqrt(), base)
        - entropy_f(nu_minus, base)
        - entropy_f(nu_plus, base))
}

/// Correlation measures of one covariance matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrelationReport {
    pub log_negativity: f64,
    pub discord: f64,
    pub classical: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub nu_tilde_minus: f64,
    pub nu_tilde_plus: f64,
}

pub fn correlation_report(sigma: &CovarianceMatrix, base: LogBase) -> Result<CorrelationReport> {
    let (nu_minus, nu_plus) = symplectic_eigenvalues(sigma, false)?;
    let (nu_tilde_minus, nu_tilde_plus) = symplectic_eigenvalues(sigma, true)?;
    let eps = logarithmic_negativity_in(sigma, base)?;
    let (discord, classical) = gaussian_discord_in(sigma, base)?;
    Ok(CorrelationReport {
        log_negativity: eps,
        discord,
        classical,
        nu_minus,
        nu_plus,
        nu_tilde_minus,
        nu_tilde_plus,
    })
}

/// Correlation measures along a covariance series.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub reports: Vec<CorrelationReport>,
}

impl CorrelationSeries {
    /// Evaluate every sample of a covariance series (parallel).
    pub fn from_covariances(series: &CovarianceSeries, base: LogBase) -> Result<Self> {
        let reports: Result<Vec<CorrelationReport>> = series
            .sigmas
            .par_iter()
            .map(|s| correlation_report(s, base))
            .collect();
        Ok(Self { times: series.times.clone(), reports: reports? })
    }

    pub fn log_negativity(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.log_negativity).collect()
    }
}

/// Arithmetic mean of every measure over samples with t ∈ [window.0, window.1].
pub fn time_average(series: &CorrelationSeries, window: (f64, f64)) -> Result<CorrelationReport> {
    let (lo, hi) = window;
    if series.times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let span = (series.times[0], *series.times.last().unwrap());
    let dt_slack = if series.times.len() > 1 { series.times[1] - series.times[0] } else { 0.0 };
    if lo > hi || hi < span.0 - dt_slack || lo > span.1 + dt_slack || lo < span.0 - dt_slack {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let picked: Vec<&CorrelationReport> = series
        .times
        .iter()
        .zip(&series.reports)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, r)| r)
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let n = picked.len() as f64;
    let mean = |f: fn(&CorrelationReport) -> f64| picked.iter().map(|r| f(r)).sum::<f64>() / n;
    Ok(CorrelationReport {
        log_negativity: mean(|r| r.log_negativity),
        discord: mean(|r| r.discord),
        classical: mean(|r| r.classical),
        nu_minus: mean(|r| r.nu_minus),
        nu_plus: mean(|r| r.nu_plus),
        nu_tilde_minus: mean(|r| r.nu_tilde_minus),
        nu_tilde_plus: mean(|r| r.nu_tilde_plus),
    })
}

/// Reference covariance matrices and symplectic transformations.
pub mod gaussian {
    use super::*;

    /// Two-mode squeezed vacuum with squeezing parameter r.
    pub fn two_mode_squeezed(r: f64) -> CovarianceMatrix {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        CovarianceMatrix([
            [c, 0.0, s, 0.0],
            [0.0, c, 0.0, -s],
            [s, 0.0, c, 0.0],
            [0.0, -s, 0.0, c],
        ])
    }

    /// Product of thermal states with symplectic eigenvalues ν_a, ν_b ≥ 1.
    pub fn thermal_product(nu_a: f64, nu_b: f64) -> CovarianceMatrix {
        CovarianceMatrix([
            [nu_a, 0.0, 0.0, 0.0],
            [0.0, nu_a, 0.0, 0.0],
            [0.0, 0.0, nu_b, 0.0],
            [0.0, 0.0, 0.0, nu_b],
        ])
    }

    /// Single-mode symplectic R(θ₂)·diag(e^s, e^{−s})·R(θ₁) (Euler form).
    pub fn local_symplectic(theta1: f64, squeeze: f64, theta2: f64) -> [[f64; 2]; 2] {
        let rot = |t: f64| [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut m = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            m
        };
        let sq = [[squeeze.exp(), 0.0], [0.0, (-squeeze).exp()]];
        mul(rot(theta2), mul(sq, rot(theta1)))
    }

    /// Block-diagonal local operation S_a ⊕ S_b as a 4×4 symplectic.
    pub fn direct_sum(s_a: [[f64; 2]; 2], s_b: [[f64; 2]; 2]) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = s_a[i][j];
                m[2 + i][2 + j] = s_b[i][j];
            }
        }
        m
    }

    /// Beamsplitter mixing the two modes by angle θ (symplectic, orthogonal).
    pub fn beamsplitter(theta: f64) -> Mat4 {
        let (s, c) = theta.sin_cos();
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            m[i][i] = c;
            m[2 + i][2 + i] = c;
            m[i][2 + i] = s;
            m[2 + i][i] = -s;
        }
        m
    }

    /// Congruence transformation Σ → SΣSᵀ.
    pub fn apply_symplectic(sigma: &CovarianceMatrix, s: &Mat4) -> CovarianceMatrix {
        let mut tmp = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += s[i][k] * sigma.0[k][j];
                }
                tmp[i][j] = acc;
            }
        }
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += tmp[i][k] * s[j][k];
                }
                *v = acc;
            }
        }
        CovarianceMatrix(out).symmetrized()
    }
}

#[cfg(test)]
mod tests {
    use super::gaussian::*;
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use ndarray_linalg::Eig;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force symplectic spectrum: moduli of the eigenvalues of iJΣ.
    fn symplectic_brute(sigma: &CovarianceMatrix, pt: bool) -> (f64, f64) {
        let mut m = *sigma;
        if pt {
            for k in 0..4 {
                m.0[3][k] = -m.0[3][k];
                m.0[k][3] = -m.0[k][3];
            }
        }
        let j = crate::fluctuations::symplectic_form();
        let mut ijs = Array2::<Complex64>::zeros((4, 4));
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += j[r][k] * m.0[k][c];
                }
                ijs[[r, c]] = Complex64::new(0.0, acc);
            }
        }
        let (vals, _) = ijs.eig().unwrap();
        let mut mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
        mods.sort_by(f64::total_cmp);
        (0.5 * (mods[0] + mods[1]), 0.5 * (mods[2] + mods[3]))
    }

    fn random_symplectic(rng: &mut ChaCha8Rng) -> Mat4 {
        let l1 = direct_sum(
            local_symplectic(rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-0.7..0.7), rng.gen_range(0.0..std::f64::consts::TAU)),
            local_symplectic(rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-0.7..0.7), rng.gen_range(0.0..std::f64::consts::TAU)),
        );
        let bs = beamsplitter(rng.gen_range(0.0..std::f64::consts::TAU));
        let l2 = direct_sum(
            local_symplectic(rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-0.7..0.7), rng.gen_range(0.0..std::f64::consts::TAU)),
            local_symplectic(rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-0.7..0.7), rng.gen_range(0.0..std::f64::consts::TAU)),
        );
        let mul = |a: &Mat4, b: &Mat4| {
            let mut m = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = 0.0;
                    for k in 0..4 {
                        acc += a[i][k] * b[k][j];
                    }
                    m[i][j] = acc;
                }
            }
            m
        };
        mul(&l1, &mul(&bs, &l2))
    }

    pub(crate) fn random_physical_sigma(rng: &mut ChaCha8Rng) -> CovarianceMatrix {
        let nu_a = rng.gen_range(1.0..3.0);
        let nu_b = rng.gen_range(1.0..3.0);
        let s = random_symplectic(rng);
        apply_symplectic(&thermal_product(nu_a, nu_b), &s)
    }

    #[test]
    fn vacuum_symplectic_spectrum() {
        let id = CovarianceMatrix::identity();
        for pt in [false, true] {
            let (lo, hi) = symplectic_eigenvalues(&id, pt).unwrap();
            assert_relative_eq!(lo, 1.0, max_relative = 1e-12);
            assert_relative_eq!(hi, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn thermal_times_vacuum_spectrum() {
        let sig = thermal_product(3.0, 1.0);
        let (lo, hi) = symplectic_eigenvalues(&sig, false).unwrap();
        assert_relative_eq!(lo, 1.0, max_relative = 1e-12);
        assert_relative_eq!(hi, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn squeezed_pt_eigenvalue_matches_brute_force() {
        let sig = two_mode_squeezed(1.0);
        let (nu_t, _) = symplectic_eigenvalues(&sig, true).unwrap();
        assert_relative_eq!(nu_t, (-2.0f64).exp(), max_relative = 1e-10);
        let (b_lo, b_hi) = symplectic_brute(&sig, true);
        assert_relative_eq!(nu_t, b_lo, max_relative = 1e-9);
        let (_, nu_p) = symplectic_eigenvalues(&sig, true).unwrap();
        assert_relative_eq!(nu_p, b_hi, max_relative = 1e-9);
    }

    #[test]
    fn eigensolve_route_matches_invariant_closed_form() {
        // Two algebraically independent routes to the symplectic spectrum.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..150 {
            let sig = random_physical_sigma(&mut rng);
            for pt in [false, true] {
                let (lo, hi) = symplectic_eigenvalues(&sig, pt).unwrap();
                let (ilo, ihi) = symplectic_eigenvalues_invariant(&sig, pt).unwrap();
                assert_relative_eq!(lo, ilo, max_relative = 1e-8, epsilon = 1e-10);
                assert_relative_eq!(hi, ihi, max_relative = 1e-8, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn nonsymmetric_input_is_rejected() {
        let mut m = CovarianceMatrix::identity();
        m.0[0][1] = 0.1;
        assert!(matches!(
            symplectic_eigenvalues(&m, false),
            Err(Error::NonSymmetric(_))
        ));
    }

    #[test]
    fn negativity_examples() {
        assert_eq!(logarithmic_negativity(&CovarianceMatrix::identity()).unwrap(), 0.0);
        let eps = logarithmic_negativity(&two_mode_squeezed(1.0)).unwrap();
        assert_relative_eq!(eps, 2.0 / std::f64::consts::LN_2, max_relative = 1e-12);
    }

    #[test]
    fn product_states_are_not_entangled() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let s = direct_sum(
                local_symplectic(rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-0.8..0.8), 0.0),
                local_symplectic(rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-0.8..0.8), 0.0),
            );
            let sig = apply_symplectic(
                &thermal_product(rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0)),
                &s,
            );
            assert_eq!(logarithmic_negativity(&sig).unwrap(), 0.0);
        }
    }

    #[test]
    fn entanglement_iff_nu_tilde_below_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let sig = random_physical_sigma(&mut rng);
            let (nu_t, _) = symplectic_eigenvalues(&sig, true).unwrap();
            let eps = logarithmic_negativity(&sig).unwrap();
            assert_eq!(eps > 0.0, nu_t < 1.0 - 1e-12);
        }
    }

    #[test]
    fn local_symplectic_invariance_of_negativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..120 {
            let sig = random_physical_sigma(&mut rng);
            let eps = logarithmic_negativity(&sig).unwrap();
            let s = direct_sum(
                local_symplectic(
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(-0.8..0.8),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
                local_symplectic(
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(-0.8..0.8),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
            );
            let eps2 = logarithmic_negativity(&apply_symplectic(&sig, &s)).unwrap();
            assert_relative_eq!(eps, eps2, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    // --- Gaussian discord ---

    /// Dense grid + refinement over the one-parameter (plus angle) family of
    /// single-mode Gaussian measurement seeds σ_m = R(θ) diag(λ, 1/λ) R(θ)ᵀ.
    fn min_conditional_det_brute(sigma: &CovarianceMatrix) -> f64 {
        let m = &sigma.0;
        let alpha = [[m[0][0], m[0][1]], [m[1][0], m[1][1]]];
        let beta = [[m[2][2], m[2][3]], [m[3][2], m[3][3]]];
        let gamma = [[m[0][2], m[0][3]], [m[1][2], m[1][3]]];
        let eval = |theta: f64, log_lambda: f64| -> f64 {
            let (s, c) = theta.sin_cos();
            let l = log_lambda.exp();
            // R diag(l, 1/l) Rᵀ
            let sm = [
                [c * c * l + s * s / l, s * c * (l - 1.0 / l)],
                [s * c * (l - 1.0 / l), s * s * l + c * c / l],
            ];
            let bm = [
                [beta[0][0] + sm[0][0], beta[0][1] + sm[0][1]],
                [beta[1][0] + sm[1][0], beta[1][1] + sm[1][1]],
            ];
            let det = bm[0][0] * bm[1][1] - bm[0][1] * bm[1][0];
            let inv = [
                [bm[1][1] / det, -bm[0][1] / det],
                [-bm[1][0] / det, bm[0][0] / det],
            ];
            // ε = α − γ (β + σ_m)⁻¹ γᵀ
            let mut post = alpha;
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for k in 0..2 {
                        for l2 in 0..2 {
                            acc += gamma[i][k] * inv[k][l2] * gamma[j][l2];
                        }
                    }
                    post[i][j] -= acc;
                }
            }
            post[0][0] * post[1][1] - post[0][1] * post[1][0]
        };
        // Exact homodyne limit λ → ∞ along direction u(θ): by
        // Sherman–Morrison, (β + λuuᵀ)⁻¹ → β⁻¹ − β⁻¹u(uᵀβ⁻¹u)⁻¹uᵀβ⁻¹.
        let eval_homodyne = |theta: f64| -> f64 {
            let (s, c) = theta.sin_cos();
            let u = [c, s];
            let detb = beta[0][0] * beta[1][1] - beta[0][1] * beta[1][0];
            let binv = [
                [beta[1][1] / detb, -beta[0][1] / detb],
                [-beta[1][0] / detb, beta[0][0] / detb],
            ];
            let bu = [binv[0][0] * u[0] + binv[0][1] * u[1], binv[1][0] * u[0] + binv[1][1] * u[1]];
            let ubu = u[0] * bu[0] + u[1] * bu[1];
            let mut inv = binv;
            for i in 0..2 {
                for j in 0..2 {
                    inv[i][j] -= bu[i] * bu[j] / ubu;
                }
            }
            let mut post = alpha;
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for k in 0..2 {
                        for l2 in 0..2 {
                            acc += gamma[i][k] * inv[k][l2] * gamma[j][l2];
                        }
                    }
                    post[i][j] -= acc;
                }
            }
            post[0][0] * post[1][1] - post[0][1] * post[1][0]
        };

        let mut best = f64::INFINITY;
        let mut best_pt = (0.0, 0.0);
        for i in 0..48 {
            for j in 0..61 {
                let th = std::f64::consts::PI * i as f64 / 48.0;
                let ll = -9.0 + 18.0 * j as f64 / 60.0;
                let v = eval(th, ll);
                if v < best {
                    best = v;
                    best_pt = (th, ll);
                }
            }
        }
        // pattern-search refinement (diagonal moves handle curved valleys)
        let (mut th, mut ll) = best_pt;
        let mut step = (std::f64::consts::PI / 48.0, 8.0 / 60.0);
        for _ in 0..80 {
            let mut improved = false;
            for di in -1i32..=1 {
                for dj in -1i32..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let v = eval(th + di as f64 * step.0, ll + dj as f64 * step.1);
                    if v < best {
                        best = v;
                        th += di as f64 * step.0;
                        ll += dj as f64 * step.1;
                        improved = true;
                    }
                }
            }
            if !improved {
                step = (step.0 * 0.5, step.1 * 0.5);
            }
        }
        // 1D refinement of the homodyne branch.
        let mut th_h = 0.0;
        let mut best_h = f64::INFINITY;
        for i in 0..180 {
            let th = std::f64::consts::PI * i as f64 / 180.0;
            let v = eval_homodyne(th);
            if v < best_h {
                best_h = v;
                th_h = th;
            }
        }
        let mut step_h = std::f64::consts::PI / 180.0;
        for _ in 0..60 {
            let mut improved = false;
            for d in [-step_h, step_h] {
                let v = eval_homodyne(th_h + d);
                if v < best_h {
                    best_h = v;
                    th_h += d;
                    improved = true;
                }
            }
            if !improved {
                step_h *= 0.5;
            }
        }
        best.min(best_h)
    }

    #[test]
    fn discord_of_uncorrelated_states_is_zero() {
        let (d, j) = gaussian_discord(&CovarianceMatrix::identity()).unwrap();
        assert_eq!((d, j), (0.0, 0.0));
        let (d, j) = gaussian_discord(&thermal_product(2.3, 1.7)).unwrap();
        assert!(d.abs() < 1e-12 && j.abs() < 1e-12);
    }

    #[test]
    fn discord_of_pure_squeezed_state_is_subsystem_entropy() {
        // For pure states D^{a←b} = J^{a←b} = S(ρ_a) = f(cosh 2r).
        // f has infinite slope at x = 1, so the degenerate ν± of the pure
        // state limit the attainable precision to ~√ε·log ε.
        let r = 0.5;
        let (d, j) = gaussian_discord(&two_mode_squeezed(r)).unwrap();
        let want = entropy_f((2.0 * r).cosh(), LogBase::Two);
        assert_relative_eq!(d, want, max_relative = 1e-5);
        assert_relative_eq!(j, want, max_relative = 1e-5);
    }

    #[test]
    fn closed_form_matches_brute_force_minimization() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let mut tested = 0;
        for _ in 0..40 {
            let sig = random_physical_sigma(&mut rng);
            let inv = invariants(&sig).unwrap();
            if inv.c.abs() < 1e-10 {
                continue;
            }
            let scale: f64 = sig.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            let closed = min_conditional_det(&inv, scale).unwrap();
            let brute = min_conditional_det_brute(&sig);
            assert_relative_eq!(closed, brute, max_relative = 1e-5);
            tested += 1;
        }
        assert!(tested > 20);
        // and the squeezed-state example specifically
        let sig = two_mode_squeezed(0.5);
        let inv = invariants(&sig).unwrap();
        assert_relative_eq!(
            min_conditional_det(&inv, 4.0).unwrap(),
            min_conditional_det_brute(&sig),
            max_relative = 1e-6
        );
    }

    #[test]
    fn discord_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..150 {
            let sig = random_physical_sigma(&mut rng);
            let (d, j) = gaussian_discord(&sig).unwrap();
            let i_mut = mutual_information_in(&sig, LogBase::Two).unwrap();
            assert!(d >= 0.0);
            assert!(j >= 0.0);
            assert!(d <= i_mut + 1e-9, "D = {d} exceeds I = {i_mut}");
            assert_relative_eq!(d + j, i_mut, epsilon = 1e-9, max_relative = 1e-8);
        }
    }

    #[test]
    fn time_average_examples() {
        let series = CorrelationSeries {
            times: (0..100).map(|i| i as f64).collect(),
            reports: (0..100)
                .map(|_| CorrelationReport {
                    log_negativity: 0.7,
                    discord: 0.3,
                    classical: 0.2,
                    nu_minus: 1.0,
                    nu_plus: 2.0,
                    nu_tilde_minus: 0.5,
                    nu_tilde_plus: 2.0,
                })
                .collect(),
        };
        let avg = time_average(&series, (10.0, 50.0)).unwrap();
        assert_relative_eq!(avg.log_negativity, 0.7, max_relative = 1e-14);
        assert!(matches!(
            time_average(&series, (200.0, 300.0)),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn time_average_of_log_series_matches_integral() {
        // ε(t) = ln(t) sampled uniformly: the mean approaches
        // (1/(b−a)) ∫ ln t dt = (b ln b − b − a ln a + a)/(b − a).
        let n = 20001;
        let (a, b) = (1.0, 101.0);
        let times: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let reports: Vec<CorrelationReport> = times
            .iter()
            .map(|t| CorrelationReport {
                log_negativity: t.ln(),
                discord: 0.0,
                classical: 0.0,
                nu_minus: 1.0,
                nu_plus: 1.0,
                nu_tilde_minus: 1.0,
                nu_tilde_plus: 1.0,
            })
            .collect();
        let series = CorrelationSeries { times, reports };
        let avg = time_average(&series, (a, b)).unwrap();
        let exact = (b * b.ln() - b - a * a.ln() + a) / (b - a);
        // sample mean vs. integral: endpoint weighting error ~ 1/n
        assert_relative_eq!(avg.log_negativity, exact, max_relative = 1e-4);
    }
}
