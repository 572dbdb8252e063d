//! Leading-order sideband coefficient of the planar front: the long
//! transverse-wavelength expansion lambda_c(l) = lambda_2c l^2 + O(l^4) of
//! the translation eigenvalue.

use super::front::u_star_front;
use super::layer::{layer_front, FrontDirection};
use crate::error::Result;
use crate::model::{self, ModelParams};
use crate::quad;
use serde::Serialize;

/// Weight appearing in the layer integrals of the coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LayerWeight {
    /// v^2 (1 - b v): consistent with the radial solvability formula.
    CarryingCapacity,
    /// v^2 (1 - v): the literal printed front formula; differs for b != 1.
    Literal,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SidebandReport {
    /// delta * (leading coefficient); positive = sideband unstable.
    pub lambda2c: f64,
    /// The coefficient without the delta prefactor.
    pub lambda2c_over_delta: f64,
    /// Layer quotient ∫ v^2(w) e^{c z}(-v') / ∫ e^{c z} v'^2.
    pub layer_quotient: f64,
    /// ∫_{-inf}^0 u_{+,inf}'^2 over the vegetated slow tail.
    pub slow_vegetated: f64,
    /// ∫_0^inf u_{0,inf}'^2 = (a - u*)^2 / 2 over the desert slow tail.
    pub slow_desert: f64,
    pub u_star: f64,
    /// Speed of the vegetation-to-desert layer connection at u*.
    pub c_vd: f64,
}

/// Evaluate the sideband coefficient by quadrature of the layer and slow
/// integrals around the singular front at u*.
pub fn sideband_coefficient(p: &ModelParams, weight: LayerWeight) -> Result<SidebandReport> {
    let u_star = u_star_front(p)?;
    let lay = layer_front(FrontDirection::VegToDesert, u_star, p)?;
    let c_vd = lay.speed;
    let vp = lay.amplitude;

    // layer integrals over the vd front with weight e^{c z}; the profile
    // saturates exponentially, truncate where sech^2 < 1e-40
    let z_span = 48.0 / lay.omega;
    let wfun = |v: f64| match weight {
        LayerWeight::CarryingCapacity => v * v * (1.0 - p.b * v),
        LayerWeight::Literal => v * v * (1.0 - v),
    };
    let num = quad::integrate(
        |z| {
            let (v, q) = lay.profile(z);
            wfun(v) * (c_vd * z).exp() * (-q)
        },
        -z_span,
        z_span,
        1e-13,
    );
    let den = quad::integrate(
        |z| {
            let (_, q) = lay.profile(z);
            (c_vd * z).exp() * q * q
        },
        -z_span,
        z_span,
        1e-13,
    );
    let layer_quotient = num / den;

    // slow tails: vegetated side along the unstable manifold of (U2, 0),
    // ∫ u'^2 dxi = ∫ p du with p = sqrt(2 ∫_{U2}^u f); the inner integral in
    // closed form through the criterion antiderivative
    let eq = model::equilibria(p);
    let u2 = eq.p2.expect("admissible parameters have P2").0;
    let inner = |u: f64| -> f64 {
        let quadratic = 0.5 * ((u - p.a).powi(2) - (u2 - p.a).powi(2));
        let anti = model::criterion_antiderivative(u, p.b, p.m)
            - model::criterion_antiderivative(u2, p.b, p.m);
        quadratic + anti
    };
    let slow_vegetated = quad::integrate(|u| (2.0 * inner(u)).max(0.0).sqrt(), u2, u_star, 1e-12);
    let slow_desert = 0.5 * (p.a - u_star) * (p.a - u_star);

    let coeff = layer_quotient * (slow_vegetated + slow_desert) / (u_star * vp * vp);
    Ok(SidebandReport {
        lambda2c: p.delta * coeff,
        lambda2c_over_delta: coeff,
        layer_quotient,
        slow_vegetated,
        slow_desert,
        u_star,
        c_vd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::boundary_root_a;

    #[test]
    fn stationary_layer_quotient_closed_form() {
        // at the spot/gap boundary the front is stationary (u* = u_f, c = 0)
        // and the quotient collapses to 2/(3 b sqrt(m))
        for (b, m) in [(1.0, 0.5), (1.3, 0.8), (0.9, 1.7)] {
            let a = boundary_root_a(b, m).unwrap();
            let p = ModelParams::new(a, b, m, 0.05).unwrap();
            let rep = sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
            let closed = 2.0 / (3.0 * b * m.sqrt());
            assert!(
                (rep.layer_quotient - closed).abs() < 1e-6,
                "quotient {} vs closed form {} at (b,m)=({b},{m})",
                rep.layer_quotient,
                closed
            );
            assert!(rep.c_vd.abs() < 1e-6);
            // desert slow tail integral equals (a - u_f)^2 / 2 here
            assert!((rep.slow_desert - 0.5 * (a - p.u_front()).powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn positive_for_admissible_parameters() {
        let mut st = 0x2545f4914f6cdd1du64;
        let mut next = || {
            st ^= st << 13;
            st ^= st >> 7;
            st ^= st << 17;
            (st >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut done = 0;
        while done < 20 {
            let b = 0.3 + 2.2 * next();
            let m = 0.15 + 2.0 * next();
            let lo = (4.5 * b).max(4.0 * b + 1.0 / b);
            let hi = 4.5 * b + 2.0 / b;
            if lo >= hi {
                continue;
            }
            let am = lo + (hi - lo) * (0.05 + 0.9 * next());
            let p = ModelParams::new(am * m, b, m, 0.05).unwrap();
            let rep = sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
            assert!(
                rep.lambda2c > 0.0,
                "lambda2c = {} at (a,b,m) = ({}, {b}, {m})",
                rep.lambda2c,
                p.a
            );
            done += 1;
        }
    }

    #[test]
    fn literal_weight_differs_for_b_not_one() {
        let a = boundary_root_a(1.4, 0.6).unwrap();
        let p = ModelParams::new(a, 1.4, 0.6, 0.05).unwrap();
        let c = sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
        let l = sideband_coefficient(&p, LayerWeight::Literal).unwrap();
        assert!((c.layer_quotient - l.layer_quotient).abs() > 1e-3);
        // at b = 1 the two coincide
        let a = boundary_root_a(1.0, 0.6).unwrap();
        let p = ModelParams::new(a, 1.0, 0.6, 0.05).unwrap();
        let c = sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
        let l = sideband_coefficient(&p, LayerWeight::Literal).unwrap();
        assert!((c.layer_quotient - l.layer_quotient).abs() < 1e-12);
    }

    #[test]
    fn reference_value_spot_parameters() {
        // independently computed with a separate quadrature stack:
        // lambda2c(2.625, 1, 0.5, delta=0.05) = 0.005678
        let p = ModelParams::new(2.625, 1.0, 0.5, 0.05).unwrap();
        let rep = sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
        assert!((rep.lambda2c - 0.005678).abs() < 2e-5, "{}", rep.lambda2c);
        assert!((rep.layer_quotient - 0.958457).abs() < 1e-4);
        assert!(rep.c_vd < 0.0);
    }
}
