//! Tabular writers for all exported artifacts.
//!
//! CSV with a header row, `.` decimal separator and scientific notation at
//! 17 significant digits, so identical runs reproduce files byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::correlations::CorrelationSeries;
use crate::error::{Error, Result};
use crate::experiments::{GapScaling, PhaseDiagram, SweepRecord};
use crate::fluctuations::CovarianceSeries;
use crate::liouvillian::{ObservableSeries, SpectrumResult};
use crate::meanfield::Trajectory;
use crate::spin::SpinObservables;

/// 17 significant digits; enough to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `t,x_a,p_a,x_b,p_b`
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "t,x_a,p_a,x_b,p_b")?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_g17(*t),
            fmt_g17(s.x_a),
            fmt_g17(s.p_a),
            fmt_g17(s.x_b),
            fmt_g17(s.p_b)
        )?;
    }
    Ok(())
}

/// `t` plus the 10 upper-triangle entries `s11..s44`.
pub fn write_covariance_csv(path: &Path, series: &CovarianceSeries) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "t,s11,s12,s13,s14,s22,s23,s24,s33,s34,s44")?;
    for (t, sig) in series.times.iter().zip(&series.sigmas) {
        write!(w, "{}", fmt_g17(*t))?;
        for i in 0..4 {
            for j in i..4 {
                write!(w, ",{}", fmt_g17(sig.get(i, j)))?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `t,eps,discord,classical`
pub fn write_correlations_csv(path: &Path, series: &CorrelationSeries) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "t,eps,discord,classical")?;
    for (t, r) in series.times.iter().zip(&series.reports) {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_g17(*t),
            fmt_g17(r.log_negativity),
            fmt_g17(r.discord),
            fmt_g17(r.classical)
        )?;
    }
    Ok(())
}

/// `n,n_prime,re_lambda,im_lambda`, one row per eigenvalue.
pub fn write_spectrum_csv(path: &Path, spectra: &[SpectrumResult]) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "n,n_prime,re_lambda,im_lambda")?;
    for s in spectra {
        for l in &s.eigenvalues {
            writeln!(w, "{},{},{},{}", s.n, s.n_prime, fmt_g17(l.re), fmt_g17(l.im))?;
        }
    }
    Ok(())
}

/// `t,x_a,p_a,x_b,p_b,n_a,n_b`
pub fn write_observables_csv(path: &Path, series: &ObservableSeries) -> Result<()> {
    let q = series
        .quadratures
        .as_ref()
        .ok_or_else(|| Error::ConfigSchema("observable series lacks quadratures".into()))?;
    let p = series
        .populations
        .as_ref()
        .ok_or_else(|| Error::ConfigSchema("observable series lacks populations".into()))?;
    let mut w = writer(path)?;
    writeln!(w, "t,x_a,p_a,x_b,p_b,n_a,n_b")?;
    for (k, t) in series.times.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_g17(*t),
            fmt_g17(q.x_a[k]),
            fmt_g17(q.p_a[k]),
            fmt_g17(q.x_b[k]),
            fmt_g17(q.p_b[k]),
            fmt_g17(p.n_a[k]),
            fmt_g17(p.n_b[k])
        )?;
    }
    Ok(())
}

/// `omega,direction,delta_N,delta_R_bar,label`
pub fn write_sweep_csv(path: &Path, records: &[&SweepRecord]) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "omega,direction,delta_N,delta_R_bar,label")?;
    for rec in records {
        for s in &rec.steps {
            let label = s.label.map_or_else(|| "unresolved".to_string(), |l| l.to_string());
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_g17(s.omega),
                rec.direction,
                fmt_g17(s.delta_n),
                fmt_g17(s.delta_r_bar),
                label
            )?;
        }
    }
    Ok(())
}

/// `omega,u,label,eps_avg`
pub fn write_phase_diagram_csv(path: &Path, pd: &PhaseDiagram) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "omega,u,label,eps_avg")?;
    for c in &pd.cells {
        let label = c.label.map_or_else(|| "unresolved".to_string(), |l| l.to_string());
        let eps = c.eps_avg.map_or_else(|| "nan".to_string(), fmt_g17);
        writeln!(w, "{},{},{},{}", fmt_g17(c.omega), fmt_g17(c.u), label, eps)?;
    }
    Ok(())
}

/// `n,re_lambda,im_lambda,mode_index`
pub fn write_gap_csv(path: &Path, scan: &GapScaling) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "n,re_lambda,im_lambda,mode_index")?;
    for e in &scan.entries {
        for (k, l) in e.eigenvalues.iter().enumerate() {
            writeln!(w, "{},{},{},{}", e.n, fmt_g17(l.re), fmt_g17(l.im), k)?;
        }
    }
    Ok(())
}

/// `t,m_x,m_y,m_z`
pub fn write_spin_csv(path: &Path, obs: &SpinObservables) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "t,m_x,m_y,m_z")?;
    for (k, t) in obs.times.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_g17(*t),
            fmt_g17(obs.m_x[k]),
            fmt_g17(obs.m_y[k]),
            fmt_g17(obs.m_z[k])
        )?;
    }
    Ok(())
}
