//! Explicit Runge-Kutta integrators: an adaptive Dormand-Prince 5(4) pair
//! and fixed-step classical RK4 (smooth in its inputs, used where the
//! result must be differentiable in the initial data).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("right-hand side became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    TooManySteps { t: f64, steps: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; keeps sample spacing dense.
    pub h_max: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { rtol: 1e-10, atol: 1e-12, h_max: 0.05, h_init: 1e-3, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// True when the observer stopped the integration early.
    pub stopped: bool,
    pub steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// One Dormand-Prince step; returns the 5th-order solution and the
/// embedded error vector.
pub fn dopri5_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &combo(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &combo(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &combo(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &combo(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &combo(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = combo(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], opts: &AdaptiveOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Adaptive integration from `t0` towards `t_end` (either direction).
/// Steps are clipped so that every time in `landings` (monotone in the
/// integration direction) is hit exactly. `observe(t_prev, y_prev, t, y)`
/// runs after each accepted step and may stop the integration.
pub fn integrate<const N: usize, F, O>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    landings: &[f64],
    opts: &AdaptiveOptions,
    mut observe: O,
) -> Result<Outcome<N>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N], f64, &[f64; N]) -> StepControl,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs().max(1e-300));
    let mut steps = 0usize;
    let mut next_landing = 0usize;
    while next_landing < landings.len() && dir * (landings[next_landing] - t0) <= 0.0 {
        next_landing += 1;
    }
    if !finite(&y) {
        return Err(OdeError::NonFinite { t });
    }
    while dir * (t_end - t) > 0.0 {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps { t, steps });
        }
        let mut stop_at = t_end;
        if next_landing < landings.len() && dir * (landings[next_landing] - stop_at) < 0.0 {
            stop_at = landings[next_landing];
        }
        let remaining = (stop_at - t).abs();
        let mut landing = false;
        let mut step = h.min(opts.h_max);
        if step >= remaining * (1.0 - 1e-12) {
            step = remaining;
            landing = true;
        } else if step > 0.5 * remaining {
            // Avoid leaving a sliver before the landing point.
            step = 0.5 * remaining;
        }
        let (y_new, err) = dopri5_step(f, t, &y, dir * step);
        let e = if finite(&y_new) && finite(&err) { error_norm(&y, &y_new, &err, opts) } else { f64::INFINITY };
        if e <= 1.0 {
            let t_new = if landing { stop_at } else { t + dir * step };
            steps += 1;
            let ctl = observe(t, &y, t_new, &y_new);
            t = t_new;
            y = y_new;
            if landing && next_landing < landings.len() && stop_at == landings[next_landing] {
                next_landing += 1;
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            // After a clipped landing step keep at least the previous size.
            h = (step * factor).max(if landing { h } else { 0.0 }).min(opts.h_max);
            if ctl == StepControl::Stop {
                return Ok(Outcome { t, y, stopped: true, steps });
            }
        } else {
            if !e.is_finite() && step < 1e-14 {
                return Err(OdeError::NonFinite { t });
            }
            let factor = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h = step * factor;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { t });
            }
        }
    }
    Ok(Outcome { t, y, stopped: false, steps })
}

/// Values at each of `targets` (monotone, all on one side of `t0`).
pub fn integrate_to_targets<const N: usize, F>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    targets: &[f64],
    opts: &AdaptiveOptions,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(targets.len());
    let mut i = 0;
    while i < targets.len() && targets[i] == t0 {
        out.push(y0);
        i += 1;
    }
    if i == targets.len() {
        return Ok(out);
    }
    let t_end = *targets.last().unwrap();
    let rest = &targets[i..];
    let mut pending = rest.iter().peekable();
    integrate(f, t0, y0, t_end, rest, opts, |_, _, t, y| {
        while let Some(&&target) = pending.peek() {
            if target == t {
                out.push(*y);
                pending.next();
            } else {
                break;
            }
        }
        StepControl::Continue
    })?;
    debug_assert_eq!(out.len(), targets.len());
    Ok(out)
}

/// Classical RK4 with `n` equal steps from `t0` to `t1`.
pub fn rk4<const N: usize, F>(f: &F, t0: f64, y0: [f64; N], t1: f64, n: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..n {
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &combo(&y, h, &[(0.5, &k1)]));
        let k3 = f(t + 0.5 * h, &combo(&y, h, &[(0.5, &k2)]));
        let k4 = f(t + h, &combo(&y, h, &[(1.0, &k3)]));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn adaptive_harmonic_oscillator() {
        let opts = AdaptiveOptions::default();
        let out = integrate(&oscillator, 0.0, [0.0, 1.0], 10.0, &[], &opts, |_, _, _, _| StepControl::Continue).unwrap();
        assert!((out.y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((out.y[1] - 10f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration_and_targets() {
        let opts = AdaptiveOptions::default();
        let targets = [0.0, -0.5, -1.25, -3.0];
        let vals = integrate_to_targets(&oscillator, 0.0, [0.0, 1.0], &targets, &opts).unwrap();
        for (t, v) in targets.iter().zip(&vals) {
            assert!((v[0] - t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let e = |n| (rk4(&oscillator, 0.0, [0.0, 1.0], 2.0, n)[0] - 2f64.sin()).abs();
        let ratio = e(20) / e(40);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn observer_can_stop() {
        let opts = AdaptiveOptions::default();
        let out =
            integrate(&oscillator, 0.0, [0.0, 1.0], 10.0, &[], &opts, |_, _, t, _| if t > 1.0 { StepControl::Stop } else { StepControl::Continue })
                .unwrap();
        assert!(out.stopped && out.t > 1.0 && out.t < 1.2);
    }
}
