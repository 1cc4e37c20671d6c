//! Iterative dominant-eigenvalue solver for blocks beyond the dense cap.
//!
//! Plain Arnoldi targets eigenvalues of largest modulus, which for a
//! Liouvillian are the *most* damped ones. Running Arnoldi on the short-time
//! propagator e^{τL} instead maps the dominant (largest real part) modes to
//! the largest |μ| = e^{τ·Re λ}, and λ = ln(μ)/τ is unambiguous as long as
//! τ·|Im λ| < π.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{eigvals_sorted, expm, Csr, C64};

#[derive(Debug, Clone, Copy)]
pub struct ArnoldiOptions {
    /// Propagator horizon; keep τ·|Im λ| < π for the modes of interest.
    pub tau: f64,
    /// Outer Krylov dimension.
    pub outer: usize,
    /// Inner Krylov dimension for each e^{τL}v application.
    pub inner: usize,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self { tau: 0.15, outer: 128, inner: 36 }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// w ← e^{τL} v by sub-stepped Krylov projection.
fn expv(mat: &Csr, v: &[C64], tau: f64, m: usize) -> Vec<C64> {
    let n = v.len();
    let norm_l = mat.norm_inf();
    let n_sub = ((tau * norm_l / 8.0).ceil() as usize).max(1);
    let dt = tau / n_sub as f64;
    let mut w = v.to_vec();
    for _ in 0..n_sub {
        let beta = norm(&w);
        if beta == 0.0 {
            return w;
        }
        let m_eff = m.min(n);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_eff + 1);
        basis.push(w.iter().map(|z| z / beta).collect());
        let mut h = Array2::<C64>::zeros((m_eff + 1, m_eff));
        let mut used = m_eff;
        for j in 0..m_eff {
            let mut next = vec![C64::new(0.0, 0.0); n];
            mat.matvec(&basis[j], &mut next);
            for (i, bi) in basis.iter().enumerate() {
                let hij = dot(bi, &next);
                h[[i, j]] = hij;
                for (t, b) in next.iter_mut().zip(bi) {
                    *t -= hij * b;
                }
            }
            let hnorm = norm(&next);
            h[[j + 1, j]] = C64::new(hnorm, 0.0);
            if hnorm < 1e-12 {
                used = j + 1;
                break;
            }
            basis.push(next.iter().map(|z| z / hnorm).collect());
        }
        // exp of the projected generator, first column
        let hm = h.slice(ndarray::s![0..used, 0..used]).to_owned();
        let e = expm(&hm.mapv(|z| z * dt));
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, bj) in basis.iter().take(used).enumerate() {
            let coeff = e[[j, 0]] * beta;
            for (o, b) in out.iter_mut().zip(bj) {
                *o += coeff * b;
            }
        }
        w = out;
    }
    w
}

/// The k eigenvalues of the sparse generator with largest real part.
pub fn dominant_eigenvalues(mat: &Csr, k: usize, opts: &ArnoldiOptions) -> Result<Vec<C64>> {
    let n = mat.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = opts.outer.min(n);
    // deterministic, structureless start vector
    let v0: Vec<C64> = (0..n)
        .map(|i| {
            let x = (i as f64 * 0.754877666 + 0.1).fract() - 0.5;
            let y = (i as f64 * 0.569840296 + 0.7).fract() - 0.5;
            C64::new(1.0 + x, y)
        })
        .collect();
    let b0 = norm(&v0);
    let mut basis: Vec<Vec<C64>> = vec![v0.iter().map(|z| z / b0).collect()];
    let mut h = Array2::<C64>::zeros((m + 1, m));
    let mut used = m;
    for j in 0..m {
        let mut next = expv(mat, &basis[j], opts.tau, opts.inner);
        for (i, bi) in basis.iter().enumerate() {
            let hij = dot(bi, &next);
            h[[i, j]] = hij;
            for (t, b) in next.iter_mut().zip(bi) {
                *t -= hij * b;
            }
        }
        // one re-orthogonalization pass for stability
        for (i, bi) in basis.iter().enumerate() {
            let hij = dot(bi, &next);
            h[[i, j]] += hij;
            for (t, b) in next.iter_mut().zip(bi) {
                *t -= hij * b;
            }
        }
        let hnorm = norm(&next);
        h[[j + 1, j]] = C64::new(hnorm, 0.0);
        if hnorm < 1e-10 {
            used = j + 1;
            break;
        }
        basis.push(next.iter().map(|z| z / hnorm).collect());
    }
    let hm = h.slice(ndarray::s![0..used, 0..used]).to_owned();
    let ritz = eigvals_sorted(&hm)?;
    let mut lambdas: Vec<C64> = ritz
        .iter()
        .filter(|mu| mu.norm() > 1e-14)
        .map(|mu| C64::new(mu.norm().ln(), mu.arg()) / opts.tau)
        .collect();
    if lambdas.len() < k {
        return Err(Error::Eigensolver(format!(
            "Arnoldi produced only {} usable Ritz values (wanted {k})",
            lambdas.len()
        )));
    }
    lambdas.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    lambdas.truncate(k);
    Ok(lambdas)
}
