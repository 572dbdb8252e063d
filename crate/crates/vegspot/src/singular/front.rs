//! Traveling 1D fronts of the model at small delta: Newton on the
//! discretized traveling-wave ODE with the wave speed as an unknown and an
//! interface-pinning phase condition.

use super::layer::{layer_front, FrontDirection};
use super::reduced::energy;
use crate::error::{Error, Result};
use crate::linalg::{Banded, BorderedBanded};
use crate::model::{self, ModelParams};

/// Converged traveling-front profile (desert state at xi -> -inf, vegetated
/// state at xi -> +inf) and its scaled speed c (the physical speed is
/// delta * c).
#[derive(Debug, Clone)]
pub struct FrontSolution {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub c: f64,
    /// Singular-limit jump level solving E(u*, a - u*) = 0.
    pub u_star: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Singular-limit jump level: the unique root of E(u, a - u) on (U2, a).
pub fn u_star_front(p: &ModelParams) -> Result<f64> {
    let eq = model::equilibria(p);
    let u2 = eq
        .p2
        .ok_or_else(|| Error::Domain("no vegetated equilibrium".into()))?
        .0;
    let mut lo = u2 + 1e-12;
    let mut hi = p.a - 1e-12;
    let g = |u: f64| energy(u, p.a - u, p);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() {
        return Err(Error::NoIntersection(format!(
            "E(u, a-u) does not change sign on (U2, a) = ({lo}, {hi})"
        )));
    }
    // E(U2+, a-U2) < 0
    if glo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct FrontSystem {
    p: ModelParams,
    n: usize, // node count
    h: f64,
    mid: usize,
    v_pin: f64,
}

impl FrontSystem {
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let (p, n, h) = (&self.p, self.n, self.h);
        let d = p.delta;
        let c = z[2 * n];
        let mut f = vec![0.0; 2 * n + 1];
        for i in 0..n {
            let u = z[2 * i];
            let v = z[2 * i + 1];
            let (upp, up, vpp, vp) = if i == 0 {
                let u1 = z[2];
                let v1 = z[3];
                (2.0 * (u1 - u) / (h * h), 0.0, 2.0 * (v1 - v) / (h * h), 0.0)
            } else if i == n - 1 {
                let um = z[2 * (n - 2)];
                let vm = z[2 * (n - 2) + 1];
                (2.0 * (um - u) / (h * h), 0.0, 2.0 * (vm - v) / (h * h), 0.0)
            } else {
                let um = z[2 * (i - 1)];
                let up1 = z[2 * (i + 1)];
                let vm = z[2 * (i - 1) + 1];
                let vp1 = z[2 * (i + 1) + 1];
                (
                    (up1 - 2.0 * u + um) / (h * h),
                    (up1 - um) / (2.0 * h),
                    (vp1 - 2.0 * v + vm) / (h * h),
                    (vp1 - vm) / (2.0 * h),
                )
            };
            f[2 * i] = upp + d * c * up + p.a - u - u * v * v;
            f[2 * i + 1] = d * d * vpp + d * c * vp - p.m * v + u * v * v * (1.0 - p.b * v);
        }
        f[2 * n] = z[2 * self.mid + 1] - self.v_pin;
        f
    }

    fn jacobian(&self, z: &[f64]) -> BorderedBanded {
        let (p, n, h) = (&self.p, self.n, self.h);
        let d = p.delta;
        let c = z[2 * n];
        let mut band = Banded::zeros(2 * n, 2, 2);
        let mut col = vec![0.0; 2 * n];
        let mut row = vec![0.0; 2 * n];
        let h2 = h * h;
        for i in 0..n {
            let u = z[2 * i];
            let v = z[2 * i + 1];
            let (ru, rv) = (2 * i, 2 * i + 1);
            if i == 0 || i == n - 1 {
                let j = if i == 0 { 1 } else { n - 2 };
                band.set(ru, ru, -2.0 / h2 - 1.0 - v * v);
                band.add(ru, 2 * j, 2.0 / h2);
                band.set(ru, rv, -2.0 * u * v);
                band.set(rv, rv, d * d * (-2.0 / h2) - p.m + u * (2.0 * v - 3.0 * p.b * v * v));
                band.add(rv, 2 * j + 1, d * d * 2.0 / h2);
                band.set(rv, ru, v * v * (1.0 - p.b * v));
            } else {
                let um = z[2 * (i - 1)];
                let up1 = z[2 * (i + 1)];
                let vm = z[2 * (i - 1) + 1];
                let vp1 = z[2 * (i + 1) + 1];
                band.set(ru, ru, -2.0 / h2 - 1.0 - v * v);
                band.set(ru, 2 * (i - 1), 1.0 / h2 - d * c / (2.0 * h));
                band.set(ru, 2 * (i + 1), 1.0 / h2 + d * c / (2.0 * h));
                band.set(ru, rv, -2.0 * u * v);
                col[ru] = d * (up1 - um) / (2.0 * h);
                band.set(
                    rv,
                    rv,
                    d * d * (-2.0 / h2) - p.m + u * (2.0 * v - 3.0 * p.b * v * v),
                );
                band.set(rv, 2 * (i - 1) + 1, d * d / h2 - d * c / (2.0 * h));
                band.set(rv, 2 * (i + 1) + 1, d * d / h2 + d * c / (2.0 * h));
                band.set(rv, ru, v * v * (1.0 - p.b * v));
                col[rv] = d * (vp1 - vm) / (2.0 * h);
            }
        }
        row[2 * self.mid + 1] = 1.0;
        BorderedBanded::new(band, col, row, 0.0)
    }
}

/// Solve the traveling-front boundary value problem at the crate
/// parameters' delta. `guess` optionally supplies (xi, u, v, c) to restart
/// from; otherwise the singular-limit profile seeds Newton.
pub fn solve_traveling_front(
    p: &ModelParams,
    guess: Option<&FrontSolution>,
) -> Result<FrontSolution> {
    if !(p.delta > 0.0) {
        return Err(Error::Domain("traveling front needs delta > 0".into()));
    }
    let eq = model::equilibria(p);
    let (u2, _v2) = eq
        .p2
        .ok_or_else(|| Error::Domain("bistability requires the vegetated state P2".into()))?;
    let u_star = u_star_front(p)?;
    let vp_star = p.v_plus(u_star);
    let width = p.delta / p.m.sqrt();
    let l = 15.0 + 40.0 * width;
    let h_target = width / 8.0;
    let mut nhalf = (l / h_target).ceil() as usize;
    if nhalf % 2 == 1 {
        nhalf += 1;
    }
    let n = 2 * nhalf + 1;
    let h = 2.0 * l / (n - 1) as f64;
    let mid = nhalf;
    let sys = FrontSystem {
        p: *p,
        n,
        h,
        mid,
        v_pin: 0.5 * vp_star,
    };

    let mut z = vec![0.0; 2 * n + 1];
    match guess {
        Some(g) if g.xi.len() == n => {
            for i in 0..n {
                z[2 * i] = g.u[i];
                z[2 * i + 1] = g.v[i];
            }
            z[2 * n] = g.c;
        }
        _ => {
            // singular-limit seed: layer front in the fast variable at u*,
            // slow tails toward (a, 0) on the left and (U2, V2) on the right
            let lay = layer_front(FrontDirection::DesertToVeg, u_star, p)?;
            let kappa = p.f_slow_prime(u2).max(0.0).sqrt();
            for i in 0..n {
                let xi = -l + i as f64 * h;
                let u = if xi < 0.0 {
                    p.a + (u_star - p.a) * xi.exp()
                } else {
                    u2 + (u_star - u2) * (-kappa * xi).exp()
                };
                let (v_lay, _) = lay.profile(xi / p.delta);
                let scale = if xi > 0.0 {
                    p.v_plus(u.max(p.u_fold() * 1.0001)) / vp_star
                } else {
                    1.0
                };
                z[2 * i] = u;
                z[2 * i + 1] = v_lay * scale;
            }
            z[2 * n] = 0.0;
        }
    }

    let mut history = Vec::new();
    for it in 0..80 {
        let f = sys.residual(&z);
        let nf = f.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        history.push(nf);
        if nf <= 1e-9 {
            let mut xi = Vec::with_capacity(n);
            let mut u = Vec::with_capacity(n);
            let mut v = Vec::with_capacity(n);
            for i in 0..n {
                xi.push(-l + i as f64 * h);
                u.push(z[2 * i]);
                v.push(z[2 * i + 1]);
            }
            return Ok(FrontSolution {
                xi,
                u,
                v,
                c: z[2 * n],
                u_star,
                residual_norm: nf,
                iterations: it,
            });
        }
        let jac = sys.jacobian(&z);
        let mut rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        jac.solve(&mut rhs)?;
        // Armijo backtracking on the residual norm
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let zt: Vec<f64> = z.iter().zip(&rhs).map(|(a, d)| a + lambda * d).collect();
            let ft = sys.residual(&zt);
            let nft = ft.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if nft < nf {
                z = zt;
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
        iterations: 80,
        last_residual: *history.last().unwrap(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_star_solves_energy_equation() {
        let p = ModelParams::new(2.625, 1.0, 0.5, 0.05).unwrap();
        let us = u_star_front(&p).unwrap();
        let e = energy(us, p.a - us, &p).unwrap();
        assert!(e.abs() < 1e-12);
        let u2 = model::equilibria(&p).p2.unwrap().0;
        assert!(us > u2 && us < p.a);
    }

    #[test]
    fn front_speed_spot_side() {
        // speed from this solver at (2.625, 1, 0.5, 0.05); the figure in the
        // source computation reports 0.012
        let p = ModelParams::new(2.625, 1.0, 0.5, 0.05).unwrap();
        let f = solve_traveling_front(&p, None).unwrap();
        assert!(f.residual_norm <= 1e-9);
        assert!((f.c - 0.0122).abs() < 2e-3, "c = {}", f.c);
    }

    #[test]
    fn front_speed_gap_side() {
        let p = ModelParams::new(2.665, 1.0, 0.5, 0.05).unwrap();
        let f = solve_traveling_front(&p, None).unwrap();
        assert!((f.c + 0.0128).abs() < 2e-3, "c = {}", f.c);
    }

    #[test]
    fn front_speed_near_boundary_small() {
        let p = ModelParams::new(2.6369, 1.0, 0.5, 0.05).unwrap();
        let f = solve_traveling_front(&p, None).unwrap();
        assert!(f.c.abs() < 5e-3, "c = {}", f.c);
    }

    #[test]
    fn front_profile_limits() {
        let p = ModelParams::new(2.625, 1.0, 0.5, 0.05).unwrap();
        let f = solve_traveling_front(&p, None).unwrap();
        let eq = model::equilibria(&p);
        let (u2, v2) = eq.p2.unwrap();
        assert!((f.u[0] - p.a).abs() < 1e-5, "left u -> a");
        assert!(f.v[0].abs() < 1e-6, "left v -> 0");
        let nl = f.u.len() - 1;
        assert!((f.u[nl] - u2).abs() < 1e-5, "right u -> U2, got {}", f.u[nl]);
        assert!((f.v[nl] - v2).abs() < 1e-5, "right v -> V2");
    }
}
