//! Finite-size scaling of the dominant block eigenvalues.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liouvillian::{block_spectrum, build_block};
use crate::params::ModelParams;

#[derive(Debug, Clone, Serialize)]
pub struct GapEntry {
    pub n: usize,
    /// Leading eigenvalues sorted by falling real part.
    pub eigenvalues: Vec<Complex64>,
    /// Dominant mode: largest real part, with the exact zero mode excluded
    /// on diagonal blocks.
    pub dominant: Complex64,
    /// True when an iterative partial solver produced the values.
    pub iterative: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapScaling {
    pub block_offset: usize,
    pub entries: Vec<GapEntry>,
    /// Per-N failures; the scan continues past them.
    pub failures: Vec<(usize, String)>,
}

/// Dominant eigenvalues of L_{N, N−offset} for each N in `n_list`
/// (ascending). All blocks share the couplings of `params_base`; each N sets
/// its own thermodynamic rescaling.
pub fn gap_scaling(
    n_list: &[usize],
    params_base: &ModelParams,
    block_offset: usize,
    keep: usize,
) -> Result<GapScaling> {
    if !n_list.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::ParameterDomain("n_list must be strictly ascending".into()));
    }
    let results: Vec<(usize, Result<GapEntry>)> = n_list
        .par_iter()
        .map(|&n| {
            let entry = (|| -> Result<GapEntry> {
                if block_offset > n {
                    return Err(Error::ParameterDomain(format!(
                        "offset {block_offset} exceeds sector {n}"
                    )));
                }
                let params = params_base.with_n_total(n)?;
                let block = build_block(&params, n, n - block_offset)?;
                let spec = block_spectrum(&block)?;
                let dominant = spec
                    .eigenvalues
                    .iter()
                    .find(|l| block_offset > 0 || l.norm() > 1e-10)
                    .copied()
                    .ok_or_else(|| Error::Eigensolver("no nonzero eigenvalue found".into()))?;
                let mut eigenvalues = spec.eigenvalues;
                eigenvalues.truncate(keep);
                Ok(GapEntry { n, eigenvalues, dominant, iterative: spec.iterative })
            })();
            (n, entry)
        })
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (n, res) in results {
        match res {
            Ok(e) => entries.push(e),
            Err(err) => failures.push((n, err.to_string())),
        }
    }
    Ok(GapScaling { block_offset, entries, failures })
}
