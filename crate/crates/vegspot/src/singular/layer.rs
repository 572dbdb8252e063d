//! Explicit heteroclinic fronts of the fast layer problem
//! v'' + c v' - m v + u v^2 (1 - b v) = 0 and the Melnikov integral that
//! measures how the connection breaks in u.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontDirection {
    /// v rises from 0 to v_+(u) as the fast variable increases.
    DesertToVeg,
    /// v falls from v_+(u) to 0.
    VegToDesert,
}

/// Explicit tanh front of the layer problem at water level u.
#[derive(Debug, Clone, Copy)]
pub struct LayerFront {
    pub direction: FrontDirection,
    pub u: f64,
    /// Plateau amplitude v_+(u).
    pub amplitude: f64,
    /// Wave speed of the layer connection; 0 exactly at u = 9bm/2.
    pub speed: f64,
    /// tanh steepness: v = (v_+/2)(1 -+ tanh(omega zeta)).
    pub omega: f64,
    m: f64,
    b: f64,
}

impl LayerFront {
    /// Profile value and derivative (v, q) at the fast coordinate zeta.
    pub fn profile(&self, zeta: f64) -> (f64, f64) {
        let t = (self.omega * zeta).tanh();
        let sech2 = 1.0 - t * t;
        match self.direction {
            FrontDirection::VegToDesert => (
                0.5 * self.amplitude * (1.0 - t),
                -0.5 * self.amplitude * self.omega * sech2,
            ),
            FrontDirection::DesertToVeg => (
                0.5 * self.amplitude * (1.0 + t),
                0.5 * self.amplitude * self.omega * sech2,
            ),
        }
    }

    /// Analytic second derivative of the profile.
    pub fn profile_dd(&self, zeta: f64) -> f64 {
        let t = (self.omega * zeta).tanh();
        let sech2 = 1.0 - t * t;
        let sign = match self.direction {
            FrontDirection::VegToDesert => 1.0,
            FrontDirection::DesertToVeg => -1.0,
        };
        sign * self.amplitude * self.omega * self.omega * sech2 * t
    }

    /// Third derivative, used by the translation-kernel check on L0.
    pub fn profile_ddd(&self, zeta: f64) -> f64 {
        let t = (self.omega * zeta).tanh();
        let sech2 = 1.0 - t * t;
        let sign = match self.direction {
            FrontDirection::VegToDesert => 1.0,
            FrontDirection::DesertToVeg => -1.0,
        };
        sign * self.amplitude * self.omega.powi(3) * (sech2 * sech2 - 2.0 * sech2 * t * t)
    }

    /// Residual of the layer ODE at zeta.
    pub fn residual(&self, zeta: f64) -> f64 {
        let (v, q) = self.profile(zeta);
        self.profile_dd(zeta) + self.speed * q - self.m * v
            + self.u * v * v * (1.0 - self.b * v)
    }
}

/// Construct the explicit layer front at water level u (requires u > 4bm).
///
/// The ansatz q = C v (v - v_+) with C = ±sqrt(bu/2) solves the layer
/// problem with speed c = ∓ sqrt(bu/2) (v_+ - 2 v_-); the sign pairs so
/// that VegToDesert carries c_vd = +sqrt(bu/2)(v_+ - 2 v_-).
pub fn layer_front(direction: FrontDirection, u: f64, p: &ModelParams) -> Result<LayerFront> {
    let (vm, vp) = p
        .v_branches(u)
        .ok_or_else(|| Error::Domain(format!("u = {u} at or below the fold 4bm = {}", p.u_fold())))?;
    let c_vd = (p.b * u / 2.0).sqrt() * (vp - 2.0 * vm);
    let speed = match direction {
        FrontDirection::VegToDesert => c_vd,
        FrontDirection::DesertToVeg => -c_vd,
    };
    let omega = vp * (p.b * u).sqrt() / (2.0 * std::f64::consts::SQRT_2);
    Ok(LayerFront {
        direction,
        u,
        amplitude: vp,
        speed,
        omega,
        m: p.m,
        b: p.b,
    })
}

/// Melnikov integral for the breaking of the layer connection in u at the
/// stationary level u_f = 9bm/2.
///
/// The integrand is d_u F · psi along the front, with psi the decaying
/// bounded solution of the adjoint variational equation. For this
/// divergence-free layer field psi = (-q', v'), giving
/// M = -∫ v^2 (1 - b v) |v'| d zeta < 0 for either orientation.
pub fn melnikov_u(direction: FrontDirection, p: &ModelParams) -> Result<f64> {
    let front = layer_front(direction, p.u_front(), p)?;
    let z = 240.0 / p.m.sqrt();
    let val = quad::integrate(
        |zeta| {
            let (v, q) = front.profile(zeta);
            -v * v * (1.0 - p.b * v) * q.abs()
        },
        -z,
        z,
        1e-13,
    );
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, m: f64) -> ModelParams {
        ModelParams::new(a, b, m, 0.05).unwrap()
    }

    #[test]
    fn stationary_front_shapes() {
        // at u = u_f with (b,m) = (1, 0.5): v_vd(0) = 1/(3b), speed 0
        let p = params(2.625, 1.0, 0.5);
        let f = layer_front(FrontDirection::VegToDesert, p.u_front(), &p).unwrap();
        let (v0, _) = f.profile(0.0);
        assert!((v0 - 1.0 / 3.0).abs() < 1e-14);
        assert!(f.speed.abs() < 1e-14);
        assert!((f.omega - 0.5 * p.m.sqrt()).abs() < 1e-14);
        // limits
        assert!((f.profile(-60.0).0 - 2.0 / 3.0).abs() < 1e-12);
        assert!(f.profile(60.0).0.abs() < 1e-12);
        // strictly decreasing
        let mut prev = f.profile(-30.0).0;
        for i in 1..=60 {
            let v = f.profile(-30.0 + i as f64).0;
            assert!(v < prev);
            prev = v;
        }
        // mirrored direction
        let g = layer_front(FrontDirection::DesertToVeg, p.u_front(), &p).unwrap();
        assert!((g.profile(0.0).0 - 1.0 / 3.0).abs() < 1e-14);
        assert!(g.profile(60.0).0 > 0.66);
    }

    #[test]
    fn fold_speed_value() {
        // c_vd(4bm) = -sqrt(b u/2) / (2b): for (b,m) = (1, 0.5), c_vd(2) = -0.5
        let p = params(2.625, 1.0, 0.5);
        let u = p.u_fold() + 1e-13;
        let f = layer_front(FrontDirection::VegToDesert, u, &p).unwrap();
        assert!((f.speed + 0.5).abs() < 1e-6, "speed {}", f.speed);
    }

    #[test]
    fn below_fold_rejected() {
        let p = params(2.625, 1.0, 0.5);
        assert!(matches!(
            layer_front(FrontDirection::VegToDesert, 1.9, &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn layer_ode_residual_random_u() {
        let p = params(2.625, 1.0, 0.5);
        let mut st = 0x5deece66du64;
        let mut next = || {
            st ^= st << 13;
            st ^= st >> 7;
            st ^= st << 17;
            (st >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let u = p.u_fold() + (2.0 * p.u_front() - p.u_fold()) * next().max(1e-6);
            for dir in [FrontDirection::VegToDesert, FrontDirection::DesertToVeg] {
                let f = layer_front(dir, u, &p).unwrap();
                let span = 30.0 / p.m.sqrt();
                for k in 0..200 {
                    let zeta = -span + 2.0 * span * k as f64 / 199.0;
                    assert!(
                        f.residual(zeta).abs() <= 1e-10,
                        "residual {} at u={u}, zeta={zeta}",
                        f.residual(zeta)
                    );
                }
            }
        }
    }

    #[test]
    fn ansatz_identity() {
        // q = ± sqrt(bu/2) v (v - v_+) pointwise
        let p = params(2.625, 1.0, 0.5);
        for u in [2.1, 2.25, 3.0] {
            let c = (p.b * u / 2.0).sqrt();
            for (dir, sign) in [
                (FrontDirection::VegToDesert, 1.0),
                (FrontDirection::DesertToVeg, -1.0),
            ] {
                let f = layer_front(dir, u, &p).unwrap();
                for k in -40..=40 {
                    let zeta = k as f64 * 0.5;
                    let (v, q) = f.profile(zeta);
                    let rhs = sign * c * v * (v - f.amplitude);
                    assert!((q - rhs).abs() <= 1e-10, "ansatz defect at u={u}");
                }
            }
        }
    }

    #[test]
    fn translation_kernel_of_l0() {
        // L0 v_vd' = 0 with L0 = d^2/ds^2 - m + u_f (2 v_vd - 3 b v_vd^2)
        let p = params(2.625, 1.0, 0.5);
        let f = layer_front(FrontDirection::VegToDesert, p.u_front(), &p).unwrap();
        for k in -100..=100 {
            let s = k as f64 * 0.2;
            let (v, q) = f.profile(s);
            let lq = f.profile_ddd(s) - p.m * q + p.u_front() * (2.0 * v - 3.0 * p.b * v * v) * q;
            assert!(lq.abs() <= 1e-8, "L0 kernel defect {lq} at s={s}");
        }
    }

    #[test]
    fn melnikov_negative_and_scaling() {
        let p = params(2.625, 1.0, 0.5);
        let m_dv = melnikov_u(FrontDirection::DesertToVeg, &p).unwrap();
        let m_vd = melnikov_u(FrontDirection::VegToDesert, &p).unwrap();
        assert!(m_dv < 0.0 && m_vd < 0.0);
        // value equals -∫_0^{v_+} v^2(1-bv) dv = -(v_+^3/3 - b v_+^4/4)
        let vp: f64 = 2.0 / 3.0;
        let exact = -(vp.powi(3) / 3.0 - p.b * vp.powi(4) / 4.0);
        assert!((m_vd - exact).abs() < 1e-12, "{m_vd} vs {exact}");
        // substitution v = w/(3b): scaling in b at fixed m is b^{-3}
        for s in [2.0, 0.5] {
            let ps = ModelParams::new(2.625, s, 0.5, 0.0).unwrap();
            let ms = melnikov_u(FrontDirection::VegToDesert, &ps).unwrap();
            assert!(
                (ms - m_vd / (s * s * s)).abs() < 1e-10 * ms.abs().max(1.0),
                "scaling defect at s={s}: {ms} vs {}",
                m_vd / (s * s * s)
            );
        }
    }
}
