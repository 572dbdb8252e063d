//! The reduced slow flow on the vegetated manifold,
//!
//! ```text
//! u' = p,   p' = -p/r + f(u),   f(u) = u - a + u v_+(u)^2,
//! ```
//!
//! its conserved far-field energy, the core/far-field matching curves, and
//! the interface-radius predictor.
//!
//! All shooting is done in the shifted coordinate w = u - U2 with a cubic
//! Taylor model of f near the saddle: trajectories of interest pass
//! exponentially close to (U2, 0), far below the resolution of u itself in
//! f64, while w remains a well-scaled variable down to 1e-240.

use crate::bessel;
use crate::error::{Error, Result};
use crate::model::{self, Classification, ModelParams};
use crate::ode::{self, OdeOptions};
use crate::quad;
use serde::Serialize;

/// Which slow manifold a reduced trajectory lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Vegetated manifold v = v_+(u).
    Vegetated,
    /// Bare-soil manifold v = 0 (linear flow, Bessel closed form).
    Desert,
}

/// Sampled reduced-flow trajectory.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory {
    /// Rows (r, u, p).
    pub samples: Vec<[f64; 3]>,
    pub branch: Branch,
    /// Radius at which u first reached u_f (if the event fired).
    pub r_f: Option<f64>,
    /// p at the crossing.
    pub p_f: Option<f64>,
}

/// Geometric data of the singular interface construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularPrediction {
    /// Launching water level of the core trajectory (spots) or the
    /// far-field rest level U2 (gaps).
    pub u_star_in: f64,
    /// Predicted interface radius.
    pub r_i: f64,
    /// p at the matching point.
    pub p_at_jump: f64,
    pub converged: bool,
    /// p_{f,∞} - (a - u_f): positive exactly on the spot side.
    pub criterion_margin: f64,
    /// Difference of curve slopes at the crossing (nonzero = transversal).
    pub transversality: f64,
    pub classification: Classification,
}

/// Saddle-shifted reduced vector field with a cubic Taylor model near U2:
/// trajectories of interest pass exponentially close to (U2, 0), far below
/// what u-coordinates resolve in f64, while the shifted w = u - U2 stays
/// well-scaled down to 1e-240.
pub struct ReducedField {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    /// Refined root of f (machine-precision U2).
    pub u2: f64,
    pub uf: f64,
    /// w-height of the jump set u = u_f.
    pub w_f: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    w_switch: f64,
}

impl ReducedField {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let eq = model::equilibria(p);
        let (u2_raw, _) = eq.p2.ok_or_else(|| {
            Error::Domain("no vegetated equilibrium: a/m below the saddle-node".into())
        })?;
        let mut u2 = u2_raw;
        for _ in 0..4 {
            u2 -= p.f_slow(u2) / p.f_slow_prime(u2);
        }
        let uf = p.u_front();
        if u2 <= p.u_fold() || u2 >= uf {
            return Err(Error::Domain(format!(
                "U2 = {u2} outside (4bm, 9bm/2); parameter restriction violated"
            )));
        }
        let c1 = p.f_slow_prime(u2);
        // higher Taylor coefficients from the analytic f' by central
        // differences with Richardson extrapolation
        let h = 1e-4 * u2.max(1.0);
        let d2 = |h: f64| (p.f_slow_prime(u2 + h) - p.f_slow_prime(u2 - h)) / (2.0 * h);
        let f2 = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
        let d3 = |h: f64| {
            (p.f_slow_prime(u2 + h) - 2.0 * p.f_slow_prime(u2) + p.f_slow_prime(u2 - h)) / (h * h)
        };
        let f3 = (4.0 * d3(h / 2.0) - d3(h)) / 3.0;
        Ok(Self {
            a: p.a,
            b: p.b,
            m: p.m,
            u2,
            uf,
            w_f: uf - u2,
            c1,
            c2: f2 / 2.0,
            c3: f3 / 6.0,
            w_switch: 1e-3 * u2.max(1.0),
        })
    }

    /// f(U2 + w) with the Taylor model taking over near the saddle.
    pub fn f(&self, w: f64) -> f64 {
        if w.abs() > self.w_switch {
            let u = self.u2 + w;
            let vp = (1.0 + (1.0 - 4.0 * self.b * self.m / u).sqrt()) / (2.0 * self.b);
            u - self.a + u * vp * vp
        } else {
            w * (self.c1 + w * (self.c2 + w * self.c3))
        }
    }

    pub fn lambda_saddle(&self) -> f64 {
        self.c1.sqrt()
    }
}

fn shoot_options() -> OdeOptions {
    OdeOptions {
        rtol: 1e-11,
        atol: 1e-300,
        max_steps: 4_000_000,
        h_max: 2.0,
    }
}

/// Integrate the reduced flow from (w_in, p_in(w_in)) at r0 until u = u_f.
/// Returns (r_f, p_f) and the trajectory in (r, u, p) coordinates.
fn shoot_core(
    field: &ReducedField,
    w_in: f64,
    r0: f64,
    r_cap: f64,
) -> Result<(Option<(f64, f64)>, Vec<[f64; 3]>)> {
    let p_in = 0.5 * field.f(w_in) * r0;
    let rhs = |r: f64, y: &[f64; 2]| [y[1], -y[1] / r + field.f(y[0])];
    let w_f = field.w_f;
    let mut event = |_r: f64, y: &[f64; 2]| y[0] - w_f;
    let (traj, hit) = ode::integrate(
        &rhs,
        r0,
        r_cap,
        [w_in, p_in],
        &shoot_options(),
        Some(&mut event),
    )?;
    let samples: Vec<[f64; 3]> = traj
        .iter()
        .map(|s| [s.t, field.u2 + s.y[0], s.y[1]])
        .collect();
    if hit {
        let last = traj.last().unwrap();
        Ok((Some((last.t, last.y[1])), samples))
    } else {
        Ok((None, samples))
    }
}

/// Reduced-flow shoot from the launch curve at r0 (defaults to 1e-3 in the
/// predictor): integrates until the first crossing of u = u_f.
pub fn reduced_flow_shoot(u_in: f64, p: &ModelParams, r0: f64) -> Result<ReducedTrajectory> {
    let field = ReducedField::new(p)?;
    if u_in <= field.u2 {
        return Err(Error::NoCrossing(format!(
            "u_in = {u_in} at or below U2 = {}; the trajectory stalls",
            field.u2
        )));
    }
    if u_in >= field.uf {
        return Err(Error::Domain(format!(
            "u_in = {u_in} at or above u_f = {}",
            field.uf
        )));
    }
    let (hit, samples) = shoot_core(&field, u_in - field.u2, r0, 1e4)?;
    match hit {
        Some((r_f, p_f)) => Ok(ReducedTrajectory {
            samples,
            branch: Branch::Vegetated,
            r_f: Some(r_f),
            p_f: Some(p_f),
        }),
        None => Err(Error::NoCrossing(format!(
            "no crossing of u_f below r = 1e4 for u_in = {u_in}"
        ))),
    }
}

/// Core trajectory whose crossing radius r_f equals the prescribed r_i
/// (bisection on the launch level; r_f is strictly decreasing in u_in).
/// Returns a densely sampled trajectory for interpolation.
pub fn core_trajectory_for_radius(p: &ModelParams, r_i: f64) -> Result<ReducedTrajectory> {
    let field = ReducedField::new(p)?;
    let r0 = 1e-3;
    if !(r_i > r0) {
        return Err(Error::Domain(format!("r_i = {r_i} too small")));
    }
    let shoot_rf = |ln_w: f64| -> Result<f64> {
        let (hit, _) = shoot_core(&field, ln_w.exp(), r0, 1e4)?;
        Ok(hit.map(|(r, _)| r).unwrap_or(f64::INFINITY))
    };
    let mut hi = (0.999 * field.w_f).ln();
    let mut lo = (1e-220f64).ln();
    if shoot_rf(hi)? > r_i || shoot_rf(lo)? < r_i {
        return Err(Error::NoCrossing(format!(
            "r_i = {r_i} outside the range of the launch family"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shoot_rf(mid)? > r_i {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let w_in = (0.5 * (lo + hi)).exp();
    // dense re-integration for interpolation quality
    let p_in = 0.5 * field.f(w_in) * r0;
    let rhs = |r: f64, y: &[f64; 2]| [y[1], -y[1] / r + field.f(y[0])];
    let w_f = field.w_f;
    let mut event = |_r: f64, y: &[f64; 2]| y[0] - w_f;
    let opts = OdeOptions {
        h_max: 0.02,
        ..shoot_options()
    };
    let (traj, hit) = ode::integrate(&rhs, r0, 1e4, [w_in, p_in], &opts, Some(&mut event))?;
    if !hit {
        return Err(Error::NoCrossing("dense re-shoot missed the jump level".into()));
    }
    let last = traj.last().unwrap();
    Ok(ReducedTrajectory {
        samples: traj
            .iter()
            .map(|s| [s.t, field.u2 + s.y[0], s.y[1]])
            .collect(),
        branch: Branch::Vegetated,
        r_f: Some(last.t),
        p_f: Some(last.y[1]),
    })
}

/// Far-field energy E(u, p) = -p^2/2 + ∫_{U2}^u f, by quadrature.
pub fn energy(u: f64, p_mom: f64, p: &ModelParams) -> Result<f64> {
    if u < p.u_fold() {
        return Err(Error::Domain(format!(
            "energy integrand needs u >= 4bm = {}, got {u}",
            p.u_fold()
        )));
    }
    let field = ReducedField::new(p)?;
    let integral = quad::integrate(|s| p.f_slow(s), field.u2, u, 1e-12);
    Ok(-0.5 * p_mom * p_mom + integral)
}

/// The unique positive momentum with E(u_f, p) = 0.
pub fn p_f_infinity(p: &ModelParams) -> Result<f64> {
    let field = ReducedField::new(p)?;
    let integral = quad::integrate(|s| p.f_slow(s), field.u2, field.uf, 1e-13);
    if integral <= 0.0 {
        return Err(Error::Domain(
            "∫ f over [U2, u_f] is non-positive; no stationary-loop energy level".into(),
        ));
    }
    Ok((2.0 * integral).sqrt())
}

/// Far-field admissible momentum at the jump set, p_out(r) = (a - u_f) K_1(r)/K_0(r).
pub fn gamma_out(r: f64, p: &ModelParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("gamma_out needs r > 0, got {r}")));
    }
    // K_0'/K_0 = -K_1/K_0
    let k_ratio = bessel::bessel_k_ratio(0, r)?;
    Ok(-(p.a - p.u_front()) * k_ratio)
}

/// d p_out / d r, analytic: (a-u_f)(K_1^2 - K_0^2 - K_0 K_1 / r)/K_0^2.
fn gamma_out_slope(r: f64, p: &ModelParams) -> Result<f64> {
    let (k0s, k1s) = bessel::k0_k1_scaled(r)?;
    Ok((p.a - p.u_front()) * (k1s * k1s - k0s * k0s - k0s * k1s / r) / (k0s * k0s))
}

/// Gap-side core momentum curve p_in(r) = (u_f - a) I_1(r)/I_0(r).
pub fn gamma_in_gap(r: f64, p: &ModelParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("gamma_in_gap needs r > 0, got {r}")));
    }
    let i_ratio = bessel::bessel_i_ratio(0, r)?;
    Ok((p.u_front() - p.a) * i_ratio)
}

/// Backward far-field shoot for the gap construction: start on the linear
/// far-field profile w = eps K_0(sqrt(c1) r)/K_0(sqrt(c1) R) at r = R and
/// integrate backward until u reaches u_f. Returns (r_hit, p_hit).
fn gap_far_shoot(field: &ReducedField, r_big: f64, eps: f64) -> Result<Option<(f64, f64)>> {
    let lam = field.lambda_saddle();
    let p0 = eps * lam * bessel::bessel_k_ratio(0, lam * r_big)?;
    // backward in r: s = R - r
    let rhs = |s: f64, y: &[f64; 2]| {
        let r = r_big - s;
        [-y[1], y[1] / r - field.f(y[0])]
    };
    let w_f = field.w_f;
    let mut event = |_s: f64, y: &[f64; 2]| y[0] - w_f;
    let (traj, hit) = ode::integrate(
        &rhs,
        0.0,
        r_big - 1e-3,
        [eps, p0],
        &shoot_options(),
        Some(&mut event),
    )?;
    if hit {
        let last = traj.last().unwrap();
        Ok(Some((r_big - last.t, last.y[1])))
    } else {
        Ok(None)
    }
}

/// Locate the crossing of the forward-evolved launch curve with the
/// far-field curve; this radius is where the fast interface is inserted.
///
/// Spots: bisection on the launch level u_in (in ln(u_in - U2)) for
/// p_f(u_in) = p_out(r_f(u_in)). Gaps: the mirrored construction with the
/// desert-core curve I_1/I_0 and the far-field orbit on the vegetated
/// manifold, parameterized by its anchor radius.
///
/// Uses launch radius r0 = 1e-3; the launch curve carries only the leading
/// term of its graph, so the prediction depends on r0 at O(r0) — doubling
/// or halving r0 moves r_I by well under 1e-2 (see the convergence test).
pub fn predict_interface_radius(p: &ModelParams) -> Result<SingularPrediction> {
    predict_interface_radius_with_r0(p, 1e-3)
}

/// Same predictor with an explicit launch radius (for convergence studies).
pub fn predict_interface_radius_with_r0(p: &ModelParams, r0: f64) -> Result<SingularPrediction> {
    if !(r0 > 0.0 && r0 < 0.5) {
        return Err(Error::Domain(format!("launch radius r0 = {r0} out of range")));
    }
    let report = model::spot_gap_criterion(p)?;
    let field = ReducedField::new(p)?;
    let margin = p_f_infinity(p)? - (p.a - p.u_front());
    match report.classification {
        Classification::Spot => predict_spot(p, &field, margin, r0),
        Classification::Gap => predict_gap(p, &field, margin),
        Classification::Boundary => Err(Error::NoIntersection(
            "parameters sit on the spot/gap boundary; the interface radius diverges".into(),
        )),
    }
}

fn predict_spot(
    p: &ModelParams,
    field: &ReducedField,
    margin: f64,
    r0: f64,
) -> Result<SingularPrediction> {
    if margin <= 0.0 {
        return Err(Error::NoIntersection(format!(
            "criterion margin {margin} <= 0: no spot-side crossing (gap-side parameters)"
        )));
    }
    let r_cap = 1e4;
    let g = |ln_w: f64| -> Result<(f64, f64, f64)> {
        let w_in = ln_w.exp();
        let (hit, _) = shoot_core(field, w_in, r0, r_cap)?;
        match hit {
            Some((r_f, p_f)) => Ok((p_f - gamma_out(r_f, p)?, r_f, p_f)),
            None => {
                // beyond the cap: energy asymptote (the curve has flattened
                // onto the E = 0 level set)
                let p_f = p_f_infinity(p)?;
                Ok((p_f - gamma_out(r_cap, p)?, r_cap, p_f))
            }
        }
    };
    // bracket: near u_f the curve starts below p_out (p_out -> inf at r0);
    // as u_in -> U2 it rises to p_f,inf > a - u_f
    let mut hi = (0.999 * field.w_f).ln();
    let (mut ghi, _, _) = g(hi)?;
    if ghi >= 0.0 {
        return Err(Error::NoIntersection(
            "launch curve already above the far-field curve at r0".into(),
        ));
    }
    let mut lo = hi;
    let floor = (1e-240f64).ln();
    let mut bracketed = false;
    while lo > floor {
        lo = (lo - 5.0).max(floor);
        let (v, _, _) = g(lo)?;
        if v >= 0.0 {
            bracketed = true;
            break;
        }
        hi = lo;
    }
    if !bracketed {
        // crossing radius beyond the resolvable family: fall back to the
        // energy-level asymptote p_f,inf = p_out(r)
        let pf = p_f_infinity(p)?;
        let mut a_lo = 1.0f64;
        let mut a_hi = 1e9f64;
        for _ in 0..200 {
            let mid = (a_lo * a_hi).sqrt();
            if gamma_out(mid, p)? > pf {
                a_lo = mid;
            } else {
                a_hi = mid;
            }
        }
        let r_i = 0.5 * (a_lo + a_hi);
        return Ok(SingularPrediction {
            u_star_in: field.u2,
            r_i,
            p_at_jump: pf,
            converged: (gamma_out(r_i, p)? - pf).abs() <= 1e-8,
            criterion_margin: margin,
            transversality: -gamma_out_slope(r_i, p)?,
            classification: Classification::Spot,
        });
    }
    // bisection on ln w
    let (mut best_r, mut best_p, mut best_w) = (0.0, 0.0, 0.0);
    let mut converged = false;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let (gm, r_f, p_f) = g(mid)?;
        best_r = r_f;
        best_p = p_f;
        best_w = mid.exp();
        if gm.abs() <= 1e-8 {
            converged = true;
            break;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-13 {
            converged = gm.abs() <= 1e-8;
            break;
        }
    }
    // transversality: slope of the shot curve minus slope of gamma_out
    let (_, r_a, p_a) = g((best_w.ln()) - 0.05)?;
    let (_, r_b, p_b) = g((best_w.ln()) + 0.05)?;
    let slope_f = (p_b - p_a) / (r_b - r_a);
    Ok(SingularPrediction {
        u_star_in: field.u2 + best_w,
        r_i: best_r,
        p_at_jump: best_p,
        converged,
        criterion_margin: margin,
        transversality: slope_f - gamma_out_slope(best_r, p)?,
        classification: Classification::Spot,
    })
}

fn predict_gap(p: &ModelParams, field: &ReducedField, margin: f64) -> Result<SingularPrediction> {
    if margin >= 0.0 {
        return Err(Error::NoIntersection(format!(
            "criterion margin {margin} >= 0: no gap-side crossing (spot-side parameters)"
        )));
    }
    let eps = 1e-9;
    let g = |r_big: f64| -> Result<Option<(f64, f64, f64)>> {
        match gap_far_shoot(field, r_big, eps)? {
            Some((r_hit, p_hit)) => {
                Ok(Some((p_hit - gamma_in_gap(r_hit, p)?, r_hit, p_hit)))
            }
            None => Ok(None),
        }
    };
    // scan anchors for a sign change
    let mut prev: Option<(f64, f64)> = None; // (R, g)
    let mut bracket: Option<(f64, f64)> = None;
    let mut r_big = 4.0;
    while r_big <= 160.0 {
        if let Some((gv, _, _)) = g(r_big)? {
            if let Some((rp, gp)) = prev {
                if gp.signum() != gv.signum() {
                    bracket = Some((rp, r_big));
                    break;
                }
            }
            prev = Some((r_big, gv));
        }
        r_big += 2.0;
    }
    let (mut lo, mut hi) =
        bracket.ok_or_else(|| Error::NoIntersection("gap curves do not cross for R <= 160".into()))?;
    let glo = g(lo)?.unwrap().0;
    let (mut best_r, mut best_p) = (0.0, 0.0);
    let mut converged = false;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (gm, r_hit, p_hit) = g(mid)?.ok_or_else(|| {
            Error::IntegrationFailure("gap far-field shoot lost the event inside the bracket".into())
        })?;
        best_r = r_hit;
        best_p = p_hit;
        if gm.abs() <= 1e-8 {
            converged = true;
            break;
        }
        if gm.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-12 {
            converged = gm.abs() <= 1e-8;
            break;
        }
    }
    // transversality from neighboring anchors
    let mid = 0.5 * (lo + hi);
    let a = g(mid - 0.2)?;
    let b = g(mid + 0.2)?;
    let slope = match (a, b) {
        (Some((_, ra, pa)), Some((_, rb, pb))) if (rb - ra).abs() > 1e-12 => (pb - pa) / (rb - ra),
        _ => f64::NAN,
    };
    // slope of the core curve d p_in / dr
    let h = 1e-5 * best_r;
    let core_slope = (gamma_in_gap(best_r + h, p)? - gamma_in_gap(best_r - h, p)?) / (2.0 * h);
    Ok(SingularPrediction {
        u_star_in: field.u2,
        r_i: best_r,
        p_at_jump: best_p,
        converged,
        criterion_margin: margin,
        transversality: slope - core_slope,
        classification: Classification::Gap,
    })
}
