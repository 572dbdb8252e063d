//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)) with
//! sign-change event location.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            h_max: f64::INFINITY,
        }
    }
}

// Dormand–Prince coefficients.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted integration step.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Integrate y' = f(t, y) from t0 to t1 (t1 > t0).
///
/// `event`: if given, integration stops at the first upward sign change of
/// the event function, located on the cubic Hermite interpolant by bisection
/// and polished with a short re-integration. Returns the trajectory of
/// accepted steps (including the event point as the last entry when hit)
/// and whether the event fired.
pub fn integrate<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut event: Option<&mut dyn FnMut(f64, &[f64; N]) -> f64>,
) -> Result<(Vec<Step<N>>, bool)> {
    assert!(t1 > t0);
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y);
    let mut out = vec![Step { t, y, dy }];
    let mut g_prev = event.as_mut().map(|e| e(t, &y));

    // initial step heuristic
    let mut h = ((t1 - t0) * 1e-4).min(opts.h_max);

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok((out, false));
        }
        h = h.min(t1 - t);
        let mut k = [[0.0; N]; 7];
        k[0] = dy;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for (s, ks) in k.iter().enumerate() {
            for i in 0..N {
                y5[i] += h * B5[s] * ks[i];
                y4[i] += h * B4[s] * ks[i];
            }
        }
        // error norm
        let mut err: f64 = 0.0;
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max(((y5[i] - y4[i]) / sc).abs());
        }
        if err <= 1.0 {
            let t_new = t + h;
            let dy_new = k[6]; // FSAL
            if let (Some(ev), Some(gp)) = (event.as_mut(), g_prev) {
                let g_new = ev(t_new, &y5);
                if gp < 0.0 && g_new >= 0.0 {
                    // bracket on the Hermite interpolant first
                    let interp =
                        |s: f64| -> [f64; N] { hermite(s, t, &y, &dy, t_new, &y5, &dy_new) };
                    let (mut lo, mut hi) = (t, t_new);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let ym = interp(mid);
                        if ev(mid, &ym) < 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo < 1e-13 * (1.0 + hi.abs()) {
                            break;
                        }
                    }
                    let mut t_ev = 0.5 * (lo + hi);
                    // state from the true flow at the estimate
                    let mut y_ev = if t_ev > t + 1e-13 * (1.0 + t.abs()) {
                        let sub = integrate(f, t, t_ev, y, opts, None)?;
                        sub.0.last().unwrap().y
                    } else {
                        y
                    };
                    // Newton polish along the flow: the interpolant bracket is
                    // only O(h^4) accurate, the flow steps below are exact to
                    // roundoff for the tiny corrections involved
                    for _ in 0..6 {
                        let g_val = ev(t_ev, &y_ev);
                        let dy_ev = f(t_ev, &y_ev);
                        let s = 1e-7 * (1.0 + t_ev.abs());
                        let mut y_pert = y_ev;
                        for i in 0..N {
                            y_pert[i] += s * dy_ev[i];
                        }
                        let dg = (ev(t_ev + s, &y_pert) - g_val) / s;
                        if dg == 0.0 {
                            break;
                        }
                        let dt = -g_val / dg;
                        if dt.abs() < 1e-15 * (1.0 + t_ev.abs()) {
                            break;
                        }
                        y_ev = rk4_step(f, t_ev, &y_ev, dt);
                        t_ev += dt;
                    }
                    let dy_ev = f(t_ev, &y_ev);
                    out.push(Step {
                        t: t_ev,
                        y: y_ev,
                        dy: dy_ev,
                    });
                    return Ok((out, true));
                }
                g_prev = Some(g_new);
            }
            t = t_new;
            y = y5;
            dy = dy_new;
            out.push(Step { t, y, dy });
            // step growth
            let fac = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < 1e-15 * (1.0 + t.abs()) {
                return Err(Error::IntegrationFailure(format!(
                    "step size collapsed at t = {t:.6e}"
                )));
            }
        }
    }
    Err(Error::IntegrationFailure(format!(
        "max step count exceeded at t = {t:.6e} (target {t1:.6e})"
    )))
}

fn rk4_step<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(t, y);
    let mut y2 = *y;
    for i in 0..N {
        y2[i] += 0.5 * h * k1[i];
    }
    let k2 = f(t + 0.5 * h, &y2);
    let mut y3 = *y;
    for i in 0..N {
        y3[i] += 0.5 * h * k2[i];
    }
    let k3 = f(t + 0.5 * h, &y3);
    let mut y4 = *y;
    for i in 0..N {
        y4[i] += h * k3[i];
    }
    let k4 = f(t + h, &y4);
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn hermite<const N: usize>(
    s: f64,
    t0: f64,
    y0: &[f64; N],
    dy0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    dy1: &[f64; N],
) -> [f64; N] {
    let h = t1 - t0;
    let x = (s - t0) / h;
    let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    let h10 = x * (1.0 - x) * (1.0 - x);
    let h01 = x * x * (3.0 - 2.0 * x);
    let h11 = x * x * (x - 1.0);
    let mut y = [0.0; N];
    for i in 0..N {
        y[i] = h00 * y0[i] + h * h10 * dy0[i] + h01 * y1[i] + h * h11 * dy1[i];
    }
    y
}
