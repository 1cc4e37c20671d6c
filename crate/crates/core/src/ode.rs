//! Embedded Dormand–Prince 5(4) integrator.
//!
//! Internal building block shared by the mean-field, Lyapunov and
//! density-block propagators. Steps land exactly on the requested sample
//! times (the step is clipped rather than interpolated), so sampled values
//! carry no interpolation error and runs are bitwise reproducible.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_step: f64::INFINITY, max_steps: 100_000_000 }
    }
}

// Dormand–Prince 5(4) tableau. The last row of A doubles as the 5th-order
// weights (FSAL).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// y5 − y4 error weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `t0`, invoking `on_sample(i, t, y)` at
/// each requested sample time (strictly increasing, all ≥ t0). `post_step`
/// runs after every accepted step and may project the state (e.g. re-
/// symmetrize a packed matrix).
pub(crate) fn integrate_sampled<F, P, S>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    sample_times: &[f64],
    opts: &OdeOptions,
    mut post_step: P,
    mut on_sample: S,
) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
    S: FnMut(usize, f64, &[f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<f64>; 7] = Default::default();
    for ki in &mut k {
        ki.resize(n, 0.0);
    }
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    let mut next = 0usize;
    // Emit samples coinciding with t0 immediately.
    while next < sample_times.len() && sample_times[next] <= t0 + t_eps(t0) {
        on_sample(next, t0, &y);
        next += 1;
    }
    if next >= sample_times.len() {
        return Ok(());
    }
    let t_end = *sample_times.last().unwrap();

    rhs(t, &y, &mut k[0]);
    let mut h = initial_step(t, &y, &k[0], t_end - t0, opts);
    let mut n_steps = 0usize;

    while next < sample_times.len() {
        if n_steps >= opts.max_steps {
            return Err(Error::Stiffness { t, h });
        }
        // Clip onto the next sample time.
        let target = sample_times[next];
        if t + h > target {
            h = target - t;
        }
        if h <= t_eps(t) {
            return Err(Error::Stiffness { t, h });
        }

        // Stages 2..7; k[0] is f(t, y) from FSAL.
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            rhs(t + C[s] * h, &y_stage, &mut tail[0]);
        }
        // 5th-order solution is stage 7's argument; recompute it into y_new.
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(6) {
                acc += A[6][j] * kj[i];
            }
            y_new[i] = y[i] + h * acc;
        }

        let mut finite = true;
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            err_sq += r * r;
            finite &= y_new[i].is_finite();
        }
        let err = (err_sq / n as f64).sqrt();

        if !finite {
            // Overflow from an oversized trial step: retry smaller, give up
            // once the floor is reached.
            h *= 0.25;
            if h <= t_eps(t) {
                return Err(Error::NonFinite { t });
            }
            rhs(t, &y, &mut k[0]);
            continue;
        }

        n_steps += 1;
        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            post_step(&mut y);
            // k7 = f(t+h, y5) is next step's k1 (FSAL); recompute after
            // post_step so projections feed back into the derivative.
            rhs(t, &y, &mut k[0]);

            while next < sample_times.len() && t >= sample_times[next] - t_eps(t) {
                on_sample(next, sample_times[next], &y);
                next += 1;
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).min(opts.max_step);
    }
    Ok(())
}

fn t_eps(t: f64) -> f64 {
    1e-13 * t.abs().max(1.0)
}

fn initial_step(t0: f64, y0: &[f64], f0: &[f64], span: f64, opts: &OdeOptions) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..y0.len() {
        let sc = opts.atol + opts.rtol * y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = (d0.sqrt(), d1.sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.abs() / 10.0).min(opts.max_step).max(t_eps(t0) * 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let samples = [0.5, 1.0, 2.0];
        let mut got = Vec::new();
        integrate_sampled(
            |_t, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            &samples,
            &OdeOptions::default(),
            |_| {},
            |_, t, y| got.push((t, y[0])),
        )
        .unwrap();
        for (t, v) in got {
            assert_relative_eq!(v, (-t).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_energy_drift() {
        // Energy of the unit oscillator stays within the tolerance budget
        // over many periods.
        let samples: Vec<f64> = (1..=200).map(|i| i as f64 * 0.5).collect();
        let mut worst: f64 = 0.0;
        integrate_sampled(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            &samples,
            &OdeOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() },
            |_| {},
            |_, _t, y| {
                let e = y[0] * y[0] + y[1] * y[1];
                worst = worst.max((e - 1.0).abs());
            },
        )
        .unwrap();
        assert!(worst < 1e-7, "energy drift {worst:.3e}");
    }

    #[test]
    fn sample_times_are_exact() {
        let samples = [0.1, 0.2, 0.30000000001];
        let mut ts = Vec::new();
        integrate_sampled(
            |_t, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            &samples,
            &OdeOptions::default(),
            |_| {},
            |_, t, _| ts.push(t),
        )
        .unwrap();
        assert_eq!(ts, samples.to_vec());
    }

    #[test]
    fn nan_rhs_is_reported() {
        let res = integrate_sampled(
            |_t, y, dy| dy[0] = (y[0] - 2.0).ln(), // NaN once y < 2
            0.0,
            &[1.0],
            &[1.0],
            &OdeOptions::default(),
            |_| {},
            |_, _, _| {},
        );
        assert!(matches!(res, Err(Error::NonFinite { .. }) | Err(Error::Stiffness { .. })));
    }
}
