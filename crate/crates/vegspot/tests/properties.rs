//! Randomized invariants of the algebraic layer: branch roots, equilibria
//! residuals, criterion determinism, Bessel identities, energy anchoring.

use proptest::prelude::*;
use vegspot::bessel;
use vegspot::model::{self, ModelParams};
use vegspot::singular;

fn admissible_params() -> impl Strategy<Value = ModelParams> {
    (0.25f64..2.5, 0.15f64..2.5, 0.02f64..0.96).prop_filter_map(
        "window nonempty",
        |(b, m, t)| {
            let lo = (4.5 * b).max(4.0 * b + 1.0 / b);
            let hi = 4.5 * b + 2.0 / b;
            if lo >= hi {
                return None;
            }
            let am = lo + (hi - lo) * t;
            ModelParams::new(am * m, b, m, 0.05).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn v_branches_are_exact_roots(p in admissible_params(), s in 1e-6f64..4.0) {
        let u = p.u_fold() * (1.0 + s);
        if let Some((vm, vp)) = p.v_branches(u) {
            for v in [vm, vp] {
                let res = p.m * v - u * v * v * (1.0 - p.b * v);
                prop_assert!(res.abs() <= 1e-12 * (1.0 + u), "residual {res}");
            }
            prop_assert!(vm <= vp);
        }
    }

    #[test]
    fn equilibria_zero_reaction(p in admissible_params()) {
        let eq = model::equilibria(&p);
        prop_assert!(eq.exists_vegetated);
        for st in [eq.desert, eq.p1.unwrap(), eq.p2.unwrap()] {
            let (fu, fv) = model::reaction(st.0, st.1, &p);
            prop_assert!(fu.abs() <= 1e-12 && fv.abs() <= 1e-12,
                "residuals ({fu}, {fv}) at {st:?}");
        }
        let (_, v1) = eq.p1.unwrap();
        let (_, v2) = eq.p2.unwrap();
        prop_assert!(v1 <= v2);
    }

    #[test]
    fn criterion_is_deterministic(p in admissible_params()) {
        let r1 = model::spot_gap_criterion(&p).unwrap();
        let r2 = model::spot_gap_criterion(&p).unwrap();
        prop_assert_eq!(r1.lhs_integral.to_bits(), r2.lhs_integral.to_bits());
        prop_assert_eq!(r1.closed_form_margin.to_bits(), r2.closed_form_margin.to_bits());
        prop_assert_eq!(r1.classification, r2.classification);
    }

    #[test]
    fn bessel_wronskian_random(nu in 0u32..64, x in 1e-2f64..1e3) {
        let iv = bessel::bessel_i_scaled(nu, x).unwrap();
        let iv1 = bessel::bessel_i_scaled(nu + 1, x).unwrap();
        let kv = bessel::bessel_k_scaled(nu, x).unwrap();
        let kv1 = bessel::bessel_k_scaled(nu + 1, x).unwrap();
        prop_assume!(kv.is_finite() && kv1.is_finite());
        let w = (iv * kv1 + iv1 * kv) * x;
        prop_assert!((w - 1.0).abs() < 1e-10, "wronskian defect {}", w - 1.0);
    }

    #[test]
    fn energy_anchored_at_saddle(p in admissible_params()) {
        let eq = model::equilibria(&p);
        let u2 = eq.p2.unwrap().0;
        let e = singular::energy(u2, 0.0, &p).unwrap();
        prop_assert!(e.abs() < 1e-12);
        // E is even in p
        let e1 = singular::energy(p.u_front(), 0.3, &p).unwrap();
        let e2 = singular::energy(p.u_front(), -0.3, &p).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-14);
    }
}
