//! Dense and sparse complex linear algebra backing the finite-N modules.
//!
//! Vectorization is row-major throughout: vec(ρ)[i·D + j] = ρ_ij, so
//! vec(AρB) = (A ⊗ Bᵀ)·vec(ρ).

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, Eigh, Solve, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Compressed sparse row complex matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl Csr {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, C64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<C64> = Vec::with_capacity(t.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            debug_assert!(r < nrows && c < ncols);
            if prev == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                prev = Some((r, c));
            }
        }
        for i in 1..=nrows {
            indptr[i] += indptr[i - 1];
        }
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn matvec(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            out[r] = acc;
        }
    }

    /// Matvec on interleaved (re, im) f64 storage, for the real-valued ODE
    /// integrator.
    pub fn matvec_interleaved(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), 2 * self.ncols);
        debug_assert_eq!(out.len(), 2 * self.nrows);
        for r in 0..self.nrows {
            let mut re = 0.0;
            let mut im = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                let (ar, ai) = (self.data[k].re, self.data[k].im);
                let (xr, xi) = (x[2 * c], x[2 * c + 1]);
                re += ar * xr - ai * xi;
                im += ar * xi + ai * xr;
            }
            out[2 * r] = re;
            out[2 * r + 1] = im;
        }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[[r, self.indices[k]]] += self.data[k];
            }
        }
        m
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| {
                self.indptr[r]..self.indptr[r + 1]
            })
            .map(|range| range.map(|k| self.data[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    (m + &dagger(m)).mapv(|z| 0.5 * z)
}

/// Truncated bosonic annihilation operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> Array2<C64> {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

/// Lindblad generator as a dense superoperator over row-major vec(ρ):
/// L = −i(H⊗I − I⊗Hᵀ) + Σ_k r_k [O⊗Ō − ½(O†O⊗I + I⊗(O†O)ᵀ)].
pub fn lindblad_superoperator(h: &Array2<C64>, jumps: &[(f64, Array2<C64>)]) -> Array2<C64> {
    let d = h.nrows();
    let eye = identity(d);
    let i = C64::new(0.0, 1.0);
    let mut sup = kron(h, &eye).mapv(|z| -i * z) + kron(&eye, &h.t().to_owned()).mapv(|z| i * z);
    for (rate, op) in jumps {
        if *rate == 0.0 {
            continue;
        }
        let op_conj = op.mapv(|z| z.conj());
        let opd_op = dagger(op).dot(op);
        let half = C64::new(0.5 * rate, 0.0);
        sup = sup + kron(op, &op_conj).mapv(|z| z * *rate)
            - kron(&opd_op, &eye).mapv(|z| z * half)
            - kron(&eye, &opd_op.t().to_owned()).mapv(|z| z * half);
    }
    sup
}

pub fn vec_rm(rho: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(rho.iter().copied())
}

pub fn unvec_rm(v: &Array1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_vec((d, d), v.to_vec()).expect("length d*d")
}

/// Matrix exponential by Padé-13 scaling and squaring.
pub fn expm(m: &Array2<C64>) -> Array2<C64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let d = m.nrows();
    let norm = (0..d)
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = m.mapv(|z| z / 2f64.powi(s));

    let eye = identity(d);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_inner = a6.mapv(|z| z * B[13]) + a4.mapv(|z| z * B[11]) + a2.mapv(|z| z * B[9]);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|z| z * B[7])
            + a4.mapv(|z| z * B[5])
            + a2.mapv(|z| z * B[3])
            + eye.mapv(|z| z * B[1])),
    );
    let v_inner = a6.mapv(|z| z * B[12]) + a4.mapv(|z| z * B[10]) + a2.mapv(|z| z * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * B[6])
        + a4.mapv(|z| z * B[4])
        + a2.mapv(|z| z * B[2])
        + eye.mapv(|z| z * B[0]);

    // (V − U) X = (V + U), column by column.
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = Array2::zeros((d, d));
    for j in 0..d {
        let col = lhs.solve(&rhs.column(j).to_owned()).expect("Padé solve");
        x.column_mut(j).assign(&col);
    }
    for _ in 0..s {
        x = x.dot(&x);
    }
    x
}

/// Trace distance ½‖ρ₁ − ρ₂‖₁ of Hermitian matrices.
pub fn trace_distance(r1: &Array2<C64>, r2: &Array2<C64>) -> f64 {
    let diff = hermitize(&(r1 - r2));
    let (vals, _) = diff.eigh(UPLO::Lower).expect("Hermitian eigensolve");
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}

/// Eigenvalues sorted by descending real part (imaginary part descending as
/// tie break).
pub fn eigvals_sorted(m: &Array2<C64>) -> Result<Vec<C64>> {
    let vals = m.eigvals().map_err(|e| Error::Eigensolver(e.to_string()))?;
    let mut v: Vec<C64> = vals.to_vec();
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(v)
}

/// Eigen-decomposition with eigenvalues sorted as in [`eigvals_sorted`] and
/// the column eigenvectors permuted consistently.
pub fn eig_sorted(m: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let (vals, vecs) = m.eig().map_err(|e| Error::Eigensolver(e.to_string()))?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].re.total_cmp(&vals[i].re).then(vals[j].im.total_cmp(&vals[i].im)));
    let sorted_vals: Vec<C64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = Array2::zeros(vecs.raw_dim());
    for (new, &old) in order.iter().enumerate() {
        sorted_vecs.column_mut(new).assign(&vecs.column(old));
    }
    Ok((sorted_vals, sorted_vecs))
}

/// Minimum-cost perfect matching on a square cost matrix (Jonker–Volgenant
/// style shortest augmenting paths). Returns `assign[row] = col`.
pub fn hungarian(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols());
    // 1-based potentials; p[j] = row matched to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![usize::MAX; n];
    for j in 1..=n {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Maximum distance between two complex spectra under the optimal pairing.
pub fn spectra_max_mismatch(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let cost = Array2::from_shape_fn((n, n), |(i, j)| (a[i] - b[j]).norm());
    let assign = hungarian(&cost);
    (0..n).map(|i| cost[[i, assign[i]]]).fold(0.0, f64::max)
}
