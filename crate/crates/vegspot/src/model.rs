//! Model parameters, homogeneous equilibria, layer-problem branches and the
//! closed-form spot/gap existence criterion.

use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};

/// Parameters of the vegetation model: rainfall `a`, inverse carrying
/// capacity `b`, mortality `m`, and the diffusion-ratio parameter `delta`
/// (`delta = 0` denotes the singular limit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, m: f64, delta: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || !(m > 0.0) {
            return Err(Error::Domain(format!(
                "a, b, m must be strictly positive (got a={a}, b={b}, m={m})"
            )));
        }
        if !(delta >= 0.0) {
            return Err(Error::Domain(format!("delta must be >= 0 (got {delta})")));
        }
        Ok(Self { a, b, m, delta })
    }

    /// Fold level of the layer problem: below u = 4bm the vegetated
    /// branches v_± do not exist.
    pub fn u_fold(&self) -> f64 {
        4.0 * self.b * self.m
    }

    /// Water level u_f = 9bm/2 at which the stationary layer heteroclinic
    /// loop exists.
    pub fn u_front(&self) -> f64 {
        4.5 * self.b * self.m
    }

    /// Both roots of the layer equilibrium equation m v = u v^2 (1 - b v),
    /// i.e. of u b v^2 - u v + m = 0, as (v_minus, v_plus). `None` when
    /// u <= 4bm (complex roots / fold).
    pub fn v_branches(&self, u: f64) -> Option<(f64, f64)> {
        if u <= self.u_fold() {
            return None;
        }
        let s = (1.0 - 4.0 * self.b * self.m / u).sqrt();
        Some(((1.0 - s) / (2.0 * self.b), (1.0 + s) / (2.0 * self.b)))
    }

    /// Upper layer branch v_+(u); caller must ensure u > 4bm.
    pub fn v_plus(&self, u: f64) -> f64 {
        (1.0 + (1.0 - 4.0 * self.b * self.m / u).sqrt()) / (2.0 * self.b)
    }

    /// Lower layer branch v_-(u); caller must ensure u > 4bm.
    pub fn v_minus(&self, u: f64) -> f64 {
        (1.0 - (1.0 - 4.0 * self.b * self.m / u).sqrt()) / (2.0 * self.b)
    }

    /// Reduced-flow nonlinearity on the vegetated slow manifold:
    /// f(u) = u - a + u v_+(u)^2.
    pub fn f_slow(&self, u: f64) -> f64 {
        let vp = self.v_plus(u);
        u - self.a + u * vp * vp
    }

    /// df/du for the reduced-flow nonlinearity, via the closed form of
    /// v_+'(u) = m / (u^2 sqrt(1 - 4bm/u)).
    pub fn f_slow_prime(&self, u: f64) -> f64 {
        let vp = self.v_plus(u);
        let root = (1.0 - 4.0 * self.b * self.m / u).sqrt();
        let vpp = self.m / (u * u * root);
        1.0 + vp * vp + 2.0 * u * vp * vpp
    }
}

/// Reaction terms (f_u, f_v) of the kinetics.
pub fn reaction(u: f64, v: f64, p: &ModelParams) -> (f64, f64) {
    (
        p.a - u - u * v * v,
        -p.m * v + u * v * v * (1.0 - p.b * v),
    )
}

/// Analytic Jacobian of the kinetics, rows (f_u, f_v), columns (d/du, d/dv).
pub fn reaction_jacobian(u: f64, v: f64, p: &ModelParams) -> [[f64; 2]; 2] {
    [
        [-1.0 - v * v, -2.0 * u * v],
        [
            v * v * (1.0 - p.b * v),
            -p.m + u * (2.0 * v - 3.0 * p.b * v * v),
        ],
    ]
}

/// Homogeneous steady states of the model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EquilibriumSet {
    /// Desert state (a, 0); always present.
    pub desert: (f64, f64),
    /// Lower vegetated state (U1, V1), present iff a/m > 2(b + sqrt(1+b^2)).
    pub p1: Option<(f64, f64)>,
    /// Upper vegetated state (U2, V2).
    pub p2: Option<(f64, f64)>,
    pub exists_vegetated: bool,
}

/// Compute all homogeneous equilibria; vegetated states are polished by one
/// Newton step on the kinetics so the returned residuals sit at roundoff.
pub fn equilibria(p: &ModelParams) -> EquilibriumSet {
    let am = p.a / p.m;
    let threshold = 2.0 * (p.b + (1.0 + p.b * p.b).sqrt());
    let disc = am * am - 4.0 * (1.0 + am * p.b);
    if disc < 0.0 || am <= threshold {
        return EquilibriumSet {
            desert: (p.a, 0.0),
            p1: None,
            p2: None,
            exists_vegetated: false,
        };
    }
    let sq = disc.max(0.0).sqrt();
    let denom = 2.0 * (1.0 + am * p.b);
    let mut states = [(0.0, (am - sq) / denom), (0.0, (am + sq) / denom)];
    for st in states.iter_mut() {
        let v = st.1;
        // U from the u-nullcline a - u - u v^2 = 0, then one Newton polish
        // of v on g(v) = -m v + U(v) v^2 (1 - b v) with U(v) = a/(1+v^2)
        let g = |v: f64| {
            let u = p.a / (1.0 + v * v);
            -p.m * v + u * v * v * (1.0 - p.b * v)
        };
        let mut vv = v;
        for _ in 0..3 {
            let h = 1e-7;
            let gp = (g(vv + h) - g(vv - h)) / (2.0 * h);
            if gp.abs() > 1e-14 {
                vv -= g(vv) / gp;
            }
        }
        st.1 = vv;
        st.0 = p.a / (1.0 + vv * vv);
    }
    EquilibriumSet {
        desert: (p.a, 0.0),
        p1: Some(states[0]),
        p2: Some(states[1]),
        exists_vegetated: true,
    }
}

/// Outcome of the spot/gap trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Spot,
    Gap,
    Boundary,
}

/// Report of the closed-form existence criterion.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriterionReport {
    pub restriction_satisfied: bool,
    /// Integral of (u - 2mb + sqrt(u^2 - 4umb)) / (2 b^2) over [U2, 9bm/2],
    /// computed by adaptive quadrature.
    pub lhs_integral: f64,
    /// (a - U2)^2 / 2.
    pub rhs: f64,
    /// LHS - RHS of the logarithmic closed form of the criterion; equals
    /// (lhs_integral - rhs) / m^2.
    pub closed_form_margin: f64,
    pub classification: Classification,
}

/// Integrand of the existence criterion; identical to u v_+(u)^2.
fn criterion_integrand(u: f64, b: f64, m: f64) -> f64 {
    (u - 2.0 * m * b + (u * u - 4.0 * u * m * b).max(0.0).sqrt()) / (2.0 * b * b)
}

/// Antiderivative of the criterion integrand,
/// F(u) = [u^2/2 - 2bmu + (u-2bm)/2 sqrt(u^2-4bmu) - 2b^2m^2 ln((u-2bm) + sqrt(u^2-4bmu))] / (2b^2).
pub fn criterion_antiderivative(u: f64, b: f64, m: f64) -> f64 {
    let w = u - 2.0 * b * m;
    let s = (u * u - 4.0 * b * m * u).max(0.0).sqrt();
    (0.5 * u * u - 2.0 * b * m * u + 0.5 * w * s - 2.0 * b * b * m * m * (w + s).ln())
        / (2.0 * b * b)
}

fn window(p: &ModelParams) -> (f64, f64) {
    let lo = (4.5 * p.b).max(4.0 * p.b + 1.0 / p.b);
    let hi = 4.5 * p.b + 2.0 / p.b;
    (lo, hi)
}

/// Does a/m lie inside the existence window max{9b/2, 4b+1/b} < a/m < 9b/2 + 2/b?
pub fn restriction_satisfied(p: &ModelParams) -> bool {
    let am = p.a / p.m;
    let (lo, hi) = window(p);
    lo < am && am < hi
}

/// Margin of the criterion in its logarithmic closed form
/// (positive for spots, negative for gaps). Assumes the restriction holds.
pub fn closed_form_margin(p: &ModelParams) -> f64 {
    let eq = equilibria(p);
    let u2 = eq.p2.expect("restriction implies P2 exists").0;
    let t = p.a - u2;
    let m2 = p.m * p.m;
    let lhs = 1.5 - std::f64::consts::LN_2 + u2 * t / (2.0 * m2) + (p.b * t / p.m).ln()
        - p.b * t / p.m;
    let rhs = (2.0 * p.b * p.b + 1.0) / (2.0 * m2) * t * t;
    lhs - rhs
}

/// Evaluate the existence criterion. The integral side is computed by
/// adaptive quadrature; the logarithmic closed form is reported alongside
/// for cross-checking (the two margins agree up to the factor m^2).
pub fn spot_gap_criterion(p: &ModelParams) -> Result<CriterionReport> {
    if !restriction_satisfied(p) {
        let (lo, hi) = window(p);
        return Err(Error::RestrictionViolated(format!(
            "a/m = {:.6} outside ({:.6}, {:.6}) for b = {}",
            p.a / p.m,
            lo,
            hi,
            p.b
        )));
    }
    let eq = equilibria(p);
    let u2 = eq.p2.expect("restriction implies vegetated states").0;
    let uf = p.u_front();
    let (b, m) = (p.b, p.m);
    let lhs_integral = quad::integrate(|u| criterion_integrand(u, b, m), u2, uf, 1e-12);
    let rhs = 0.5 * (p.a - u2) * (p.a - u2);
    let margin = closed_form_margin(p);
    let diff = lhs_integral - rhs;
    let classification = if diff.abs() <= 1e-10 {
        Classification::Boundary
    } else if diff > 0.0 {
        Classification::Spot
    } else {
        Classification::Gap
    };
    Ok(CriterionReport {
        restriction_satisfied: true,
        lhs_integral,
        rhs,
        closed_form_margin: margin,
        classification,
    })
}

/// Boundary value of `a` separating spots from gaps at fixed (b, m):
/// bisection on the closed-form margin inside the restriction window,
/// to 1e-8 in a.
pub fn boundary_root_a(b: f64, m: f64) -> Result<f64> {
    let (lo_am, hi_am) = {
        let p = ModelParams::new(1.0, b, m, 0.0)?;
        window(&p)
    };
    let margin_at = |a: f64| -> f64 {
        let p = ModelParams { a, b, m, delta: 0.0 };
        closed_form_margin(&p)
    };
    // expand a bracket inside the open window
    let span = hi_am - lo_am;
    let mut lo = (lo_am + 1e-9 * span) * m;
    let mut hi = (hi_am - 1e-9 * span) * m;
    let (flo, fhi) = (margin_at(lo), margin_at(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoIntersection(format!(
            "criterion margin does not change sign over the window for b={b}, m={m}"
        )));
    }
    // margin decreases in a (spots at small a); orient the bracket
    if flo < 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if margin_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
