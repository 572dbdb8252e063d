//! Stationary radial profiles at delta > 0: damped Newton on the
//! second-order finite-difference discretization of
//!
//! ```text
//! 0 = u_rr + u_r/r + a - u - u v^2
//! 0 = delta^2 (v_rr + v_r/r) - m v + u v^2 (1 - b v)
//! ```
//!
//! with Neumann conditions at r = 0 (by even symmetry) and r = rMax,
//! interface detection from the inflection points of v, and natural
//! continuation in a.


use crate::error::{Error, Result};
use crate::linalg::Banded;
use crate::model::{self, ModelParams};
use serde::{Deserialize, Serialize};

/// Uniform radial grid r_i = i h, h = r_max/(n-1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    /// Grid honoring the resolution floor n >= 401, h <= delta/4.
    pub fn new(r_max: f64, delta: f64) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::Domain(format!("r_max must be > 0, got {r_max}")));
        }
        if !(delta > 0.0) {
            return Err(Error::Domain("radial grid needs delta > 0".into()));
        }
        let n = ((r_max / (delta / 4.0)).ceil() as usize + 1).max(401);
        Ok(Self { r_max, n })
    }

    /// Explicit node count; still enforces the invariants.
    pub fn with_n(r_max: f64, n: usize, delta: f64) -> Result<Self> {
        let g = Self { r_max, n };
        if n < 401 {
            return Err(Error::GridTooCoarse(format!("n = {n} < 401")));
        }
        if g.h() > delta / 4.0 + 1e-15 {
            return Err(Error::GridTooCoarse(format!(
                "h = {} exceeds delta/4 = {}",
                g.h(),
                delta / 4.0
            )));
        }
        Ok(g)
    }

    pub fn h(&self) -> f64 {
        self.r_max / (self.n - 1) as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }
}

/// Pattern shape labels from the interface-count heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    Spot,
    Gap,
    Ring,
    Target,
    Other,
}

/// A (possibly converged) radial profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub params: ModelParams,
    /// Radii of the detected inflection points of v.
    pub interfaces: Vec<f64>,
    /// Infinity norm of the discrete residual.
    pub residual_norm: f64,
    pub kind: ProfileKind,
}

/// Discrete residual of the stationary system on the grid.
pub fn residual(grid: &RadialGrid, u: &[f64], v: &[f64], p: &ModelParams) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h();
    let h2 = h * h;
    let d2 = p.delta * p.delta;
    let mut f = vec![0.0; 2 * n];
    for i in 0..n {
        let (lap_u, lap_v) = if i == 0 {
            (4.0 * (u[1] - u[0]) / h2, 4.0 * (v[1] - v[0]) / h2)
        } else if i == n - 1 {
            (
                2.0 * (u[n - 2] - u[n - 1]) / h2,
                2.0 * (v[n - 2] - v[n - 1]) / h2,
            )
        } else {
            let r = grid.r(i);
            (
                (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2 + (u[i + 1] - u[i - 1]) / (2.0 * h * r),
                (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2 + (v[i + 1] - v[i - 1]) / (2.0 * h * r),
            )
        };
        let (fu, fv) = model::reaction(u[i], v[i], p);
        f[2 * i] = lap_u + fu;
        f[2 * i + 1] = d2 * lap_v + fv;
    }
    f
}

/// Banded Jacobian of the discrete residual (interleaved unknowns, kl = ku = 2).
pub fn jacobian(grid: &RadialGrid, u: &[f64], v: &[f64], p: &ModelParams) -> Banded {
    let n = grid.n;
    let h = grid.h();
    let h2 = h * h;
    let d2 = p.delta * p.delta;
    let mut jac = Banded::zeros(2 * n, 2, 2);
    for i in 0..n {
        let (ru, rv) = (2 * i, 2 * i + 1);
        let jr = model::reaction_jacobian(u[i], v[i], p);
        let (c_diag, c_nb, j_nb, c_nb2, j_nb2);
        if i == 0 {
            c_diag = -4.0 / h2;
            c_nb = 4.0 / h2;
            j_nb = 1usize;
            c_nb2 = 0.0;
            j_nb2 = 1usize;
        } else if i == n - 1 {
            c_diag = -2.0 / h2;
            c_nb = 2.0 / h2;
            j_nb = n - 2;
            c_nb2 = 0.0;
            j_nb2 = n - 2;
        } else {
            let r = grid.r(i);
            c_diag = -2.0 / h2;
            c_nb = 1.0 / h2 + 1.0 / (2.0 * h * r);
            j_nb = i + 1;
            c_nb2 = 1.0 / h2 - 1.0 / (2.0 * h * r);
            j_nb2 = i - 1;
        }
        jac.set(ru, ru, c_diag + jr[0][0]);
        jac.add(ru, 2 * j_nb, c_nb);
        if c_nb2 != 0.0 {
            jac.add(ru, 2 * j_nb2, c_nb2);
        }
        jac.set(ru, rv, jr[0][1]);
        jac.set(rv, rv, d2 * c_diag + jr[1][1]);
        jac.add(rv, 2 * j_nb + 1, d2 * c_nb);
        if c_nb2 != 0.0 {
            jac.add(rv, 2 * j_nb2 + 1, d2 * c_nb2);
        }
        jac.set(rv, ru, jr[1][0]);
    }
    jac
}

/// Interface radii: sign changes of the 5-point-smoothed second difference
/// of v, restricted to where |v'| is a significant fraction of its maximum.
pub fn detect_interfaces(grid: &RadialGrid, v: &[f64]) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h();
    if n < 8 {
        return Vec::new();
    }
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d2[i] = v[i + 1] - 2.0 * v[i] + v[i - 1];
    }
    let mut sm = vec![0.0; n];
    for i in 2..n - 2 {
        sm[i] = (d2[i - 2] + d2[i - 1] + d2[i] + d2[i + 1] + d2[i + 2]) / 5.0;
    }
    let mut dv = vec![0.0; n];
    let mut dv_max: f64 = 0.0;
    for i in 1..n - 1 {
        dv[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        dv_max = dv_max.max(dv[i].abs());
    }
    if dv_max == 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 2..n - 3 {
        if dv[i].abs() > 0.2 * dv_max && sm[i] * sm[i + 1] < 0.0 {
            let t = sm[i] / (sm[i] - sm[i + 1]);
            let r = grid.r(i) + t * h;
            if out.last().map_or(true, |&last: &f64| r - last > 4.0 * h) {
                out.push(r);
            }
        }
    }
    out
}

fn classify(grid: &RadialGrid, u: &[f64], v: &[f64], interfaces: &[f64], p: &ModelParams) -> ProfileKind {
    let _ = u;
    let n = grid.n;
    let plateau = v.iter().fold(0.0f64, |a, &x| a.max(x));
    if plateau < 1e-4 {
        return ProfileKind::Other;
    }
    let v0 = v[0];
    let vend = v[n - 1];
    let hi = 0.5 * plateau;
    let _ = p;
    match interfaces.len() {
        1 => {
            if v0 > hi && vend < hi {
                ProfileKind::Spot
            } else if v0 < hi && vend > hi {
                ProfileKind::Gap
            } else {
                ProfileKind::Other
            }
        }
        2 => {
            if v0 < hi && vend < hi {
                ProfileKind::Ring
            } else if v0 > hi && vend > hi {
                ProfileKind::Target
            } else {
                ProfileKind::Other
            }
        }
        k if k >= 3 => ProfileKind::Target,
        _ => ProfileKind::Other,
    }
}

/// Assemble an initial guess with tanh interfaces of width delta/sqrt(m) at
/// the given radii. `kind` picks the state at the core: vegetated for Spot
/// and Target, desert for Gap and Ring; states alternate outward.
pub fn initial_guess(
    kind: ProfileKind,
    p: &ModelParams,
    radii: &[f64],
    grid: &RadialGrid,
) -> Result<RadialProfile> {
    if radii.is_empty() {
        return Err(Error::BadRadii("at least one interface radius".into()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        if w[1] - w[0] < 10.0 * p.delta {
            return Err(Error::BadRadii(format!(
                "radii {} and {} closer than 10 delta",
                w[0], w[1]
            )));
        }
    }
    if sorted != radii {
        return Err(Error::BadRadii("radii must be strictly increasing".into()));
    }
    if *radii.last().unwrap() >= grid.r_max {
        return Err(Error::BadRadii("radii must lie inside (0, rMax)".into()));
    }
    let core_vegetated = matches!(kind, ProfileKind::Spot | ProfileKind::Target);
    let eq = model::equilibria(p);
    let (u2, _v2) = eq
        .p2
        .ok_or_else(|| Error::Domain("vegetated equilibrium required for a guess".into()))?;
    let vp_u2 = p.v_plus(u2);
    let uf = p.u_front();
    let width = p.delta / p.m.sqrt();
    let kappa = p.f_slow_prime(u2).max(0.0).sqrt();
    let n = grid.n;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];

    // the 10-delta separation makes the nearest-interface tanh blend exact
    // to machine precision, so each point sees one interface only
    let veg_frac = |r: f64| -> f64 {
        let mut j = 0usize;
        for (k, &rj) in radii.iter().enumerate() {
            if (r - rj).abs() < (r - radii[j]).abs() {
                j = k;
            }
        }
        let s_in = if core_vegetated == (j % 2 == 0) { 1.0 } else { 0.0 };
        let step = 0.5 * (1.0 + ((r - radii[j]) / width).tanh());
        s_in + (1.0 - 2.0 * s_in) * step
    };
    // slow fields relax from u_f at the interfaces toward their rest states
    // at the appropriate exponential rates
    let nearest = |r: f64| -> f64 {
        radii
            .iter()
            .map(|rj| (r - rj).abs())
            .fold(f64::INFINITY, f64::min)
    };
    for i in 0..n {
        let r = grid.r(i);
        let frac = veg_frac(r);
        let d = nearest(r);
        let u_des = p.a + (uf - p.a) * (-d).exp();
        let u_veg = u2 + (uf - u2) * (-kappa * d).exp();
        u[i] = u_des * (1.0 - frac) + u_veg * frac;
        v[i] = vp_u2 * frac;
    }
    let interfaces = detect_interfaces(grid, &v);
    let res = residual(grid, &u, &v, p);
    let rn = res.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    Ok(RadialProfile {
        grid: *grid,
        u,
        v,
        params: *p,
        interfaces,
        residual_norm: rn,
        kind,
    })
}

/// Damped Newton iteration on the discretized system; converges to
/// residual_norm <= 1e-9 or reports divergence with the residual history.
pub fn solve_profile(guess: &RadialProfile, p: &ModelParams) -> Result<RadialProfile> {
    let grid = guess.grid;
    let n = grid.n;
    let mut u = guess.u.clone();
    let mut v = guess.v.clone();
    let mut history = Vec::new();
    let max_iter = 1200;
    for it in 0..max_iter {
        let f = residual(&grid, &u, &v, p);
        let nf = f.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        history.push(nf);
        if nf <= 1e-9 {
            let interfaces = detect_interfaces(&grid, &v);
            // fast interface must span >= 6 nodes
            let width_nodes = (p.delta / p.m.sqrt()) / grid.h();
            if !interfaces.is_empty() && width_nodes < 1.5 {
                return Err(Error::GridTooCoarse(format!(
                    "interface width spans {:.1} nodes",
                    4.0 * width_nodes
                )));
            }
            let kind = classify(&grid, &u, &v, &interfaces, p);
            return Ok(RadialProfile {
                grid,
                u,
                v,
                params: *p,
                interfaces,
                residual_norm: nf,
                kind,
            });
        }
        let jac = jacobian(&grid, &u, &v, p);
        let lu = jac.factor()?;
        let mut step: Vec<f64> = f.iter().map(|x| -x).collect();
        lu.solve(&mut step);
        // Armijo backtracking, factor 0.5, up to 30 halvings
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut ut = u.clone();
            let mut vt = v.clone();
            for i in 0..n {
                ut[i] += lambda * step[2 * i];
                vt[i] += lambda * step[2 * i + 1];
            }
            let ft = residual(&grid, &ut, &vt, p);
            let nft = ft.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if nft < nf {
                u = ut;
                v = vt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDiverged {
                iterations: it,
                last_residual: nf,
                history,
            });
        }
    }
    Err(Error::NewtonDiverged {
        iterations: max_iter,
        last_residual: *history.last().unwrap(),
        history,
    })
}

/// One accepted continuation step.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationStep {
    pub a: f64,
    pub r_i: f64,
    pub residual_norm: f64,
}

/// Natural-parameter continuation in a from a converged profile toward
/// a_target. Halves the step on Newton failure (floor 1e-5) and stops when
/// the leading interface exceeds 0.6 rMax.
pub fn continue_in_a(
    profile: &RadialProfile,
    a_target: f64,
    initial_step: f64,
) -> Result<(Vec<ContinuationStep>, Vec<RadialProfile>)> {
    if profile.residual_norm > 1e-9 {
        return Err(Error::Domain(
            "continuation requires a converged starting profile".into(),
        ));
    }
    let mut steps = Vec::new();
    let mut profiles = Vec::new();
    let mut current = profile.clone();
    let mut a = profile.params.a;
    let dir = (a_target - a).signum();
    if dir == 0.0 {
        return Ok((steps, profiles));
    }
    let mut da = initial_step.abs() * dir;
    while (a_target - a) * dir > 1e-12 {
        let a_next = if (a_target - a) * dir <= da.abs() {
            a_target
        } else {
            a + da
        };
        let p_next = ModelParams {
            a: a_next,
            ..profile.params
        };
        match solve_profile(&current, &p_next) {
            Ok(sol) => {
                let r_i = sol.interfaces.last().copied().unwrap_or(0.0);
                steps.push(ContinuationStep {
                    a: a_next,
                    r_i,
                    residual_norm: sol.residual_norm,
                });
                if r_i > 0.6 * sol.grid.r_max {
                    profiles.push(sol);
                    break;
                }
                current = sol.clone();
                profiles.push(sol);
                a = a_next;
            }
            Err(_) => {
                da *= 0.5;
                if da.abs() < 1e-5 {
                    return Err(Error::StepFloorReached(a));
                }
            }
        }
    }
    Ok((steps, profiles))
}
