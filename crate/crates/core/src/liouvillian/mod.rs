//! U(1) block decomposition of the Lindblad generator.
//!
//! Total excitation number is conserved, so the generator splits into
//! independent blocks L_{N,N'} acting on the coefficients ρ^{N,N'}_{N_a,N'_a}
//! between excitation sectors N and N'. Coefficients are vectorized
//! row-major over (N_a, N'_a). The couplings carry the thermodynamic
//! rescaling 2κ/N and 2U/N with N = `ModelParams::n_total`, independent of
//! the sector labels, so off-diagonal blocks of one model share one scaling.

mod arnoldi;
mod evolve;
mod three_mode;

pub use evolve::{
    evolve_blocks, evolve_blocks_with, EvolveOptions, ObservableSeries, PopulationSeries,
    QuadratureSeries,
};
pub use three_mode::{adiabatic_rates, three_mode_oracle, ThreeModeResult};

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Csr, C64};
use crate::params::{derive_rates, ModelParams};
use crate::spin::{build_spin_liouvillian, SpinParams};

/// Densest operator we hand to the direct eigensolver.
pub const DENSE_EIG_CAP: usize = 4096;
/// Hard cap on block dimension (memory guard).
pub const BLOCK_DIM_CAP: usize = 60_000;

/// Coefficient array ρ^{N,N'}_{N_a,N'_a} of one (N, N') sector pair,
/// shape (N+1) × (N'+1).
#[derive(Debug, Clone)]
pub struct DensityBlock {
    pub n: usize,
    pub n_prime: usize,
    pub coeffs: Array2<C64>,
}

impl DensityBlock {
    pub fn new(n: usize, n_prime: usize, coeffs: Array2<C64>) -> Result<Self> {
        if coeffs.nrows() != n + 1 || coeffs.ncols() != n_prime + 1 {
            return Err(Error::ConfigSchema(format!(
                "block ({n},{n_prime}) expects shape ({},{}), got ({},{})",
                n + 1,
                n_prime + 1,
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        Ok(Self { n, n_prime, coeffs })
    }

    pub fn zeros(n: usize, n_prime: usize) -> Self {
        Self { n, n_prime, coeffs: Array2::zeros((n + 1, n_prime + 1)) }
    }

    pub fn dim(&self) -> usize {
        (self.n + 1) * (self.n_prime + 1)
    }

    pub fn is_diagonal_sector(&self) -> bool {
        self.n == self.n_prime
    }

    /// Trace Σ ρ_{N_a,N_a}; meaningful on diagonal sectors only.
    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_diagonal_sector());
        (0..=self.n).map(|k| self.coeffs[[k, k]]).sum()
    }

    pub fn max_hermiticity_violation(&self) -> f64 {
        debug_assert!(self.is_diagonal_sector());
        let mut worst: f64 = 0.0;
        for i in 0..=self.n {
            for j in i..=self.n {
                worst = worst.max((self.coeffs[[i, j]] - self.coeffs[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// ⟨â⟩ contribution Σ √N_a ρ_{N_a,N_a−1}; nonzero only on (N, N−1) blocks.
    pub fn expect_a(&self) -> C64 {
        if self.n_prime + 1 != self.n {
            return C64::new(0.0, 0.0);
        }
        (1..=self.n).map(|na| self.coeffs[[na, na - 1]] * (na as f64).sqrt()).sum()
    }

    /// ⟨b̂⟩ contribution Σ √(N−N_a) ρ_{N_a,N_a}; nonzero only on (N, N−1).
    pub fn expect_b(&self) -> C64 {
        if self.n_prime + 1 != self.n {
            return C64::new(0.0, 0.0);
        }
        (0..self.n).map(|na| self.coeffs[[na, na]] * ((self.n - na) as f64).sqrt()).sum()
    }

    pub fn expect_n_a(&self) -> f64 {
        debug_assert!(self.is_diagonal_sector());
        (0..=self.n).map(|na| self.coeffs[[na, na]].re * na as f64).sum()
    }

    pub fn expect_n_b(&self) -> f64 {
        debug_assert!(self.is_diagonal_sector());
        (0..=self.n).map(|na| self.coeffs[[na, na]].re * (self.n - na) as f64).sum()
    }

    fn to_vec(&self) -> Vec<C64> {
        self.coeffs.iter().copied().collect()
    }
}

/// Sparse generator of one (N, N') block.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub n: usize,
    pub n_prime: usize,
    /// Excitation number used for the 2κ/N, 2U/N rescaling.
    pub scaling_n: usize,
    mat: Csr,
}

impl BlockOperator {
    pub fn dim(&self) -> usize {
        (self.n + 1) * (self.n_prime + 1)
    }

    pub fn matrix(&self) -> &Csr {
        &self.mat
    }

    pub fn to_dense(&self) -> Array2<C64> {
        self.mat.to_dense()
    }

    /// ∂t applied to a coefficient block.
    pub fn apply(&self, block: &DensityBlock) -> DensityBlock {
        debug_assert_eq!((block.n, block.n_prime), (self.n, self.n_prime));
        let x = block.to_vec();
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        self.mat.matvec(&x, &mut out);
        DensityBlock {
            n: self.n,
            n_prime: self.n_prime,
            coeffs: Array2::from_shape_vec((self.n + 1, self.n_prime + 1), out).unwrap(),
        }
    }
}

#[inline]
fn idx(n_prime: usize, na: usize, nap: usize) -> usize {
    na * (n_prime + 1) + nap
}

/// Assemble the sparse generator of the (n, n') block.
///
/// Matrix elements follow the number-basis master equation exactly,
/// including all square-root factors; indices outside [0, n]×[0, n']
/// contribute nothing.
pub fn build_block(params: &ModelParams, n: usize, n_prime: usize) -> Result<BlockOperator> {
    let n_tot = params.require_n_total()?;
    let rates = derive_rates(params)?;
    let kappa_s = rates.kappa_scaled.expect("n_total present");
    let u_s = rates.u_scaled.expect("n_total present");
    let gain_r = kappa_s * (1.0 + params.n_th);
    let gain_l = kappa_s * params.n_th;
    let omega_h = 0.5 * params.omega;

    let dim = (n + 1) * (n_prime + 1);
    if dim > BLOCK_DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: BLOCK_DIM_CAP });
    }

    let mut t: Vec<(usize, usize, C64)> = Vec::with_capacity(7 * dim);
    let i = C64::new(0.0, 1.0);
    for na in 0..=n {
        for nap in 0..=n_prime {
            let nb = n - na;
            let nbp = n_prime - nap;
            let row = idx(n_prime, na, nap);
            let (naf, nbf, napf, nbpf) = (na as f64, nb as f64, nap as f64, nbp as f64);

            // Interaction phase from H ⊃ (2U/N) Σ n̂(n̂−1); on diagonal
            // sectors any n̂(n̂±1) convention coincides.
            let interaction = naf * (naf - 1.0) + nbf * (nbf - 1.0)
                - napf * (napf - 1.0)
                - nbpf * (nbpf - 1.0);
            let loss_r = 0.5 * gain_r * (naf * (nbf + 1.0) + napf * (nbpf + 1.0));
            let loss_l = 0.5 * gain_l * (nbf * (naf + 1.0) + nbpf * (napf + 1.0));
            t.push((row, row, -i * u_s * interaction - loss_r - loss_l));

            if na >= 1 {
                t.push((
                    row,
                    idx(n_prime, na - 1, nap),
                    -i * omega_h * (naf * (nbf + 1.0)).sqrt(),
                ));
            }
            if na + 1 <= n {
                t.push((
                    row,
                    idx(n_prime, na + 1, nap),
                    -i * omega_h * (nbf * (naf + 1.0)).sqrt(),
                ));
            }
            if nap + 1 <= n_prime {
                t.push((
                    row,
                    idx(n_prime, na, nap + 1),
                    i * omega_h * (nbpf * (napf + 1.0)).sqrt(),
                ));
            }
            if nap >= 1 {
                t.push((
                    row,
                    idx(n_prime, na, nap - 1),
                    i * omega_h * (napf * (nbpf + 1.0)).sqrt(),
                ));
            }
            if na + 1 <= n && nap + 1 <= n_prime {
                let amp = ((naf + 1.0) * nbf * (napf + 1.0) * nbpf).sqrt();
                t.push((row, idx(n_prime, na + 1, nap + 1), C64::new(gain_r * amp, 0.0)));
            }
            if na >= 1 && nap >= 1 {
                let amp = ((nbf + 1.0) * naf * (nbpf + 1.0) * napf).sqrt();
                t.push((row, idx(n_prime, na - 1, nap - 1), C64::new(gain_l * amp, 0.0)));
            }
        }
    }
    Ok(BlockOperator {
        n,
        n_prime,
        scaling_n: n_tot,
        mat: Csr::from_triplets(dim, dim, t),
    })
}

/// Eigenvalues (optionally eigenvectors) of one block, sorted by falling
/// real part.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub n: usize,
    pub n_prime: usize,
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: Option<Array2<C64>>,
    /// True when an iterative partial solver produced the values.
    pub iterative: bool,
}

/// Number of dominant eigenvalues kept by the iterative path.
pub const ITERATIVE_K: usize = 16;

/// Spectrum of a block: dense up to [`DENSE_EIG_CAP`], otherwise the
/// `ITERATIVE_K` eigenvalues with largest real part via a propagator Arnoldi
/// iteration.
pub fn block_spectrum(block: &BlockOperator) -> Result<SpectrumResult> {
    if block.dim() <= DENSE_EIG_CAP {
        let vals = linalg::eigvals_sorted(&block.to_dense())?;
        Ok(SpectrumResult {
            n: block.n,
            n_prime: block.n_prime,
            eigenvalues: vals,
            eigenvectors: None,
            iterative: false,
        })
    } else {
        let vals = arnoldi::dominant_eigenvalues(&block.mat, ITERATIVE_K, &Default::default())?;
        Ok(SpectrumResult {
            n: block.n,
            n_prime: block.n_prime,
            eigenvalues: vals,
            eigenvectors: None,
            iterative: true,
        })
    }
}

/// Dense spectrum with eigenvectors (steady-state extraction and small
/// blocks only).
pub fn block_spectrum_dense(block: &BlockOperator) -> Result<SpectrumResult> {
    if block.dim() > DENSE_EIG_CAP {
        return Err(Error::DimensionCap { dim: block.dim(), cap: DENSE_EIG_CAP });
    }
    let (vals, vecs) = linalg::eig_sorted(&block.to_dense())?;
    Ok(SpectrumResult {
        n: block.n,
        n_prime: block.n_prime,
        eigenvalues: vals,
        eigenvectors: Some(vecs),
        iterative: false,
    })
}

/// Stationary state of a diagonal block: the null vector reshaped,
/// Hermitized, positivity-checked and trace-normalized.
pub fn steady_state(block: &BlockOperator) -> Result<DensityBlock> {
    if block.n != block.n_prime {
        return Err(Error::ConfigSchema(format!(
            "steady state needs n = n', got ({}, {})",
            block.n, block.n_prime
        )));
    }
    let spec = block_spectrum_dense(block)?;
    let null_tol = 1e-8;
    let null_ids: Vec<usize> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.norm() < null_tol)
        .map(|(i, _)| i)
        .collect();
    if null_ids.len() != 1 {
        return Err(Error::DegenerateNullSpace { nullity: null_ids.len() });
    }
    let vecs = spec.eigenvectors.as_ref().unwrap();
    let d = block.n + 1;
    let raw = Array2::from_shape_vec((d, d), vecs.column(null_ids[0]).to_vec()).unwrap();
    let herm = linalg::hermitize(&raw);
    let tr: C64 = (0..d).map(|k| herm[[k, k]]).sum();
    if tr.norm() < 1e-12 {
        return Err(Error::Eigensolver("null vector is traceless".into()));
    }
    let rho = herm.mapv(|z| z / tr);
    let (eigs, _) =
        rho.eigh(UPLO::Lower).map_err(|e| Error::Eigensolver(e.to_string()))?;
    let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-9 {
        return Err(Error::Unphysical(format!("steady state has eigenvalue {min_eig:.3e}")));
    }
    DensityBlock::new(block.n, block.n_prime, rho)
}

/// Maximum eigenvalue mismatch between L_{n,n} and the collective-spin
/// generator with S = n/2 (optimal assignment on |Δλ|).
pub fn spin_equivalence_check(params: &ModelParams, n: usize) -> Result<f64> {
    let p = params.with_n_total(n)?;
    let block = build_block(&p, n, n)?;
    if block.dim() > DENSE_EIG_CAP {
        return Err(Error::DimensionCap { dim: block.dim(), cap: DENSE_EIG_CAP });
    }
    let bosonic = linalg::eigvals_sorted(&block.to_dense())?;
    let spin_gen = build_spin_liouvillian(&SpinParams::from_model(&p)?)?;
    let spin = linalg::eigvals_sorted(&spin_gen)?;
    Ok(linalg::spectra_max_mismatch(&bosonic, &spin))
}

/// Sector-pair decomposition of the two-mode coherent product state
/// |α√(N/2)⟩|β√(N/2)⟩, truncated to sectors N−2..N+2 and renormalized.
/// Blocks with n ≥ n' and n − n' ≤ 2 are returned.
pub fn coherent_blocks(
    params: &ModelParams,
    alpha: Complex64,
    beta: Complex64,
) -> Result<Vec<DensityBlock>> {
    let n_tot = params.require_n_total()?;
    let scale = ((n_tot as f64) / 2.0).sqrt();
    let a = alpha * scale;
    let b = beta * scale;
    if a.norm() < 1e-12 && b.norm() < 1e-12 {
        return Err(Error::Unphysical("coherent amplitudes both vanish".into()));
    }

    let lo = n_tot.saturating_sub(2);
    let hi = n_tot + 2;
    // Unnormalized sector vectors ψ_m[N_a] = e^{−(|A|²+|B|²)/2} A^{N_a} B^{m−N_a}
    // / √(N_a!(m−N_a)!), built by stable recurrences.
    let mut sector_vecs: Vec<Vec<C64>> = Vec::new();
    let log_norm = -0.5 * (a.norm_sqr() + b.norm_sqr());
    for m in lo..=hi {
        let mut v = vec![C64::new(0.0, 0.0); m + 1];
        if b.norm() >= a.norm() {
            // seed at N_a = 0: B^m/√(m!)
            let mut c = C64::new(log_norm.exp(), 0.0);
            for k in 1..=m {
                c *= b / (k as f64).sqrt();
            }
            v[0] = c;
            for na in 1..=m {
                let prev = v[na - 1];
                let ratio = a / b * ((m - na + 1) as f64 / na as f64).sqrt();
                v[na] = prev * ratio;
            }
        } else {
            let mut c = C64::new(log_norm.exp(), 0.0);
            for k in 1..=m {
                c *= a / (k as f64).sqrt();
            }
            v[m] = c;
            for na in (0..m).rev() {
                let next = v[na + 1];
                let ratio = b / a * ((na + 1) as f64 / (m - na) as f64).sqrt();
                v[na] = next * ratio;
            }
        }
        sector_vecs.push(v);
    }
    let total_weight: f64 = sector_vecs.iter().flatten().map(|z| z.norm_sqr()).sum();
    if total_weight < 1e-300 {
        return Err(Error::Unphysical("truncated sector window carries no weight".into()));
    }

    let mut blocks = Vec::new();
    for (im, m) in (lo..=hi).enumerate() {
        for (imp, mp) in (lo..=hi).enumerate() {
            if m < mp || m - mp > 2 {
                continue;
            }
            let vm = &sector_vecs[im];
            let vmp = &sector_vecs[imp];
            let coeffs = Array2::from_shape_fn((m + 1, mp + 1), |(r, c)| {
                vm[r] * vmp[c].conj() / total_weight
            });
            blocks.push(DensityBlock { n: m, n_prime: mp, coeffs });
        }
    }
    Ok(blocks)
}
