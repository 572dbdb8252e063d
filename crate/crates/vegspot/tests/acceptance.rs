//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! per clause and panicking at the end if any clause failed.

use std::time::Instant;
use vegspot::model::{self, Classification, ModelParams};
use vegspot::radial::{self, ProfileKind, RadialGrid, RadialProfile};
use vegspot::sim2d;
use vegspot::singular::{self, LayerWeight};
use vegspot::spectral;

struct Report {
    name: &'static str,
    started: Instant,
    failures: Vec<String>,
}

impl Report {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            started: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, clause: &str, ok: bool, detail: String) {
        let tag = if ok { "pass" } else { "FAIL" };
        println!("[{tag}] {} :: {clause}: {detail}", self.name);
        if !ok {
            self.failures.push(format!("{clause}: {detail}"));
        }
    }

    fn finish(self) {
        let secs = self.started.elapsed().as_secs_f64();
        if self.failures.is_empty() {
            println!("[PASS] {} ({secs:.1}s)", self.name);
        } else {
            println!("[FAIL] {} ({secs:.1}s)", self.name);
            panic!(
                "{} failed clauses:\n  - {}",
                self.name,
                self.failures.join("\n  - ")
            );
        }
    }
}

fn params(a: f64, delta: f64) -> ModelParams {
    ModelParams::new(a, 1.0, 0.5, delta).unwrap()
}

fn solve_kind(a: f64, delta: f64, kind: ProfileKind, radii: &[f64], rmax: f64) -> vegspot::Result<RadialProfile> {
    let p = params(a, delta);
    let g = RadialGrid::new(rmax, delta)?;
    let guess = radial::initial_guess(kind, &p, radii, &g)?;
    radial::solve_profile(&guess, &p)
}

#[test]
fn criterion_1_existence_window() {
    let mut rep = Report::new("criterion 1: existence-window arithmetic");
    // for (b, m) = (1, 0.5) the admissible window is a in (2.5, 3.25),
    // i.e. a/m in (max{9/2, 5}, 9/2 + 2) = (5, 6.5)
    let (b, m) = (1.0, 0.5);
    let mut ok = true;
    let mut detail = String::new();
    for i in 0..=4000 {
        let a = 2.3 + (3.5 - 2.3) * i as f64 / 4000.0;
        let p = ModelParams::new(a, b, m, 0.0).unwrap();
        let inside = a / m > 5.0 && a / m < 6.5;
        if model::restriction_satisfied(&p) != inside {
            ok = false;
            detail = format!("mismatch at a = {a}");
            break;
        }
    }
    rep.check(
        "window (2.5, 3.25) reproduced exactly over a 4001-point scan",
        ok,
        if ok { "all cells agree".into() } else { detail },
    );
    // window endpoints are exact arithmetic
    let lo = ModelParams::new(2.5, b, m, 0.0).unwrap();
    let hi = ModelParams::new(3.25, b, m, 0.0).unwrap();
    rep.check(
        "open endpoints excluded",
        !model::restriction_satisfied(&lo) && !model::restriction_satisfied(&hi),
        "a = 2.5 and a = 3.25 rejected".into(),
    );
    rep.finish();
}

#[test]
fn criterion_2_boundary_and_closed_form() {
    let mut rep = Report::new("criterion 2: spot/gap boundary");
    let root = model::boundary_root_a(1.0, 0.5).unwrap();
    rep.check(
        "criterion root at (b,m) = (1, 0.5) equals 2.6369 +- 1e-3",
        (root - 2.6369).abs() <= 1e-3,
        format!("a* = {root:.7}"),
    );
    // quadrature vs closed form over 100 random admissible triples
    let mut st = 0x9d2c5680u64;
    let mut next = || {
        st ^= st << 13;
        st ^= st >> 7;
        st ^= st << 17;
        (st >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 100 {
        let b = 0.2 + 2.8 * next();
        let m = 0.1 + 2.9 * next();
        let lo = (4.5 * b).max(4.0 * b + 1.0 / b);
        let hi = 4.5 * b + 2.0 / b;
        if lo >= hi {
            continue;
        }
        let am = lo + (hi - lo) * (0.02 + 0.96 * next());
        let p = ModelParams::new(am * m, b, m, 0.0).unwrap();
        let r = model::spot_gap_criterion(&p).unwrap();
        let from_closed = r.rhs + m * m * r.closed_form_margin;
        worst = worst.max((r.lhs_integral - from_closed).abs());
        done += 1;
    }
    rep.check(
        "integral vs closed form <= 1e-8 over 100 random admissible triples",
        worst <= 1e-8,
        format!("worst |difference| = {worst:.2e}"),
    );
    rep.finish();
}

/// Warm-started continuation of a converged profile in delta, with linear
/// extrapolation of the two latest solutions as the next initial guess.
fn delta_chain(
    start: &RadialProfile,
    targets: &[f64],
    rmax: f64,
) -> vegspot::Result<Vec<(f64, f64)>> {
    let resample = |prof: &RadialProfile, g: &RadialGrid| -> (Vec<f64>, Vec<f64>) {
        let mut u = vec![0.0; g.n];
        let mut v = vec![0.0; g.n];
        for i in 0..g.n {
            let r = g.r(i);
            let x = r / prof.grid.h();
            let j = (x.floor() as usize).min(prof.grid.n - 2);
            let t = (x - j as f64).clamp(0.0, 1.0);
            u[i] = prof.u[j] * (1.0 - t) + prof.u[j + 1] * t;
            v[i] = prof.v[j] * (1.0 - t) + prof.v[j + 1] * t;
        }
        (u, v)
    };
    let mut out = Vec::new();
    let mut prev: Option<RadialProfile> = None;
    let mut cur = start.clone();
    let mut delta = start.params.delta;
    if (targets[0] - delta).abs() < 1e-14 {
        out.push((delta, *cur.interfaces.last().unwrap()));
    }
    let final_target = *targets.last().unwrap();
    let mut step = 0.004f64;
    let mut streak = 0u32;
    while delta > final_target + 1e-14 {
        // land exactly on requested deltas
        let mut d_next = delta - step;
        for &t in targets {
            if delta > t + 1e-14 && d_next < t {
                d_next = t;
            }
        }
        let p_next = ModelParams { delta: d_next, ..cur.params };
        let g_next = RadialGrid::new(rmax, d_next)?;
        let (mut u, mut v) = resample(&cur, &g_next);
        if let Some(ref pv) = prev {
            let (up, vp) = resample(pv, &g_next);
            let w = (delta - d_next) / (pv.params.delta - delta).abs().max(1e-12);
            for i in 0..g_next.n {
                u[i] += w * (u[i] - up[i]);
                v[i] += w * (v[i] - vp[i]);
            }
        }
        let guess = RadialProfile {
            grid: g_next,
            u,
            v,
            params: p_next,
            interfaces: vec![],
            residual_norm: 1.0,
            kind: cur.kind,
        };
        match radial::solve_profile(&guess, &p_next) {
            Ok(sol) => {
                if targets.iter().any(|&t| (t - d_next).abs() < 1e-14) {
                    out.push((d_next, *sol.interfaces.last().unwrap()));
                }
                prev = Some(std::mem::replace(&mut cur, sol));
                delta = d_next;
                streak += 1;
                if streak >= 3 {
                    step = (step * 1.4).min(0.004);
                    streak = 0;
                }
            }
            Err(e) => {
                step *= 0.5;
                streak = 0;
                if step < 5e-5 {
                    return Err(e);
                }
            }
        }
    }
    Ok(out)
}

#[test]
fn criterion_3_radius_prediction_vs_bvp() {
    let mut rep = Report::new("criterion 3: radius prediction vs BVP");
    let rmax = 24.0;

    // singular predictions
    let pred_spot = singular::predict_interface_radius(&params(2.625, 0.0)).unwrap();
    let pred_gap = singular::predict_interface_radius(&params(2.665, 0.0)).unwrap();

    // delta = 0.05 profiles
    let spot = solve_kind(2.625, 0.05, ProfileKind::Spot, &[5.66], rmax).unwrap();
    let gap = solve_kind(2.665, 0.05, ProfileKind::Gap, &[5.85], rmax).unwrap();
    let ri_spot = spot.interfaces[0];
    let ri_gap = gap.interfaces[0];
    rep.check(
        "spot BVP interface 5.66 +- 0.15",
        (ri_spot - 5.66).abs() <= 0.15,
        format!("r_I = {ri_spot:.4}"),
    );
    rep.check(
        "gap BVP interface 5.85 +- 0.15",
        (ri_gap - 5.85).abs() <= 0.15,
        format!("r_I = {ri_gap:.4}"),
    );
    rep.check(
        "spot predictor within 0.5 of the delta = 0.05 interface",
        (pred_spot.r_i - ri_spot).abs() <= 0.5,
        format!(
            "singular r_I = {:.3} vs BVP {ri_spot:.3}; the singular crossing is near-tangent \
             (transversality {:.2e}) and the delta correction is O(100 delta) here — see the \
             decisions ledger",
            pred_spot.r_i, pred_spot.transversality
        ),
    );
    rep.check(
        "gap predictor within 0.5 of the delta = 0.05 interface",
        (pred_gap.r_i - ri_gap).abs() <= 0.5,
        format!("singular r_I = {:.3} vs BVP {ri_gap:.3}", pred_gap.r_i),
    );

    // delta-refinement study: |r_I(delta) - r_singular| shrinking ~ delta
    for (label, start, pred) in [("spot", &spot, pred_spot.r_i), ("gap", &gap, pred_gap.r_i)] {
        match delta_chain(start, &[0.05, 0.025, 0.0125], rmax) {
            Ok(chain) => {
                let errs: Vec<f64> = chain.iter().map(|(_, ri)| (ri - pred).abs()).collect();
                let detail = format!(
                    "r_I(delta) = {:?}, |r_I - r_singular| = {:.3?}",
                    chain
                        .iter()
                        .map(|(d, r)| format!("{d}: {r:.3}"))
                        .collect::<Vec<_>>(),
                    errs
                );
                let mono = errs.windows(2).all(|w| w[1] < w[0]);
                let ratios_ok = errs
                    .windows(2)
                    .all(|w| (1.35..=3.0).contains(&(w[0] / w[1])));
                rep.check(
                    &format!("{label}: error vs singular radius shrinks ~ delta"),
                    mono && ratios_ok,
                    detail,
                );
            }
            Err(e) => rep.check(
                &format!("{label}: delta refinement chain"),
                false,
                format!("continuation failed: {e}"),
            ),
        }
    }
    rep.finish();
}

#[test]
fn criterion_4_front_speeds() {
    let mut rep = Report::new("criterion 4: front speeds");
    let f1 = singular::solve_traveling_front(&params(2.625, 0.05), None).unwrap();
    rep.check(
        "c(2.625) = 0.012 +- 0.005",
        (f1.c - 0.012).abs() <= 0.005,
        format!("c = {:+.5} (residual {:.1e})", f1.c, f1.residual_norm),
    );
    let f2 = singular::solve_traveling_front(&params(2.665, 0.05), None).unwrap();
    rep.check(
        "c(2.665) = -0.013 +- 0.005",
        (f2.c + 0.013).abs() <= 0.005,
        format!("c = {:+.5}", f2.c),
    );
    rep.finish();
}

#[test]
fn criterion_5_sideband_positivity() {
    let mut rep = Report::new("criterion 5: sideband positivity");
    let mut st = 0x853c49e6u64;
    let mut next = || {
        st ^= st << 13;
        st ^= st >> 7;
        st ^= st << 17;
        (st >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut min_coeff = f64::INFINITY;
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
        let rep_sb = singular::sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
        min_coeff = min_coeff.min(rep_sb.lambda2c);
        done += 1;
    }
    rep.check(
        "lambda_2c > 0 over 20 random admissible triples",
        min_coeff > 0.0,
        format!("minimum lambda_2c = {min_coeff:.3e}"),
    );
    // stationary layer quotient equals 2/(3 b sqrt(m)) within 1e-6
    let mut worst = 0.0f64;
    for (b, m) in [(1.0, 0.5), (1.4, 0.8), (0.8, 1.6)] {
        let a = model::boundary_root_a(b, m).unwrap();
        let p = ModelParams::new(a, b, m, 0.05).unwrap();
        let r = singular::sideband_coefficient(&p, LayerWeight::CarryingCapacity).unwrap();
        worst = worst.max((r.layer_quotient - 2.0 / (3.0 * b * m.sqrt())).abs());
    }
    rep.check(
        "stationary layer quotient = 2/(3 b sqrt(m)) within 1e-6",
        worst <= 1e-6,
        format!("worst deviation {worst:.2e}"),
    );
    rep.finish();
}

#[test]
fn criterion_6_spectral_cross_validation() {
    let mut rep = Report::new("criterion 6: spectral cross-validation");
    let spot = solve_kind(2.625, 0.05, ProfileKind::Spot, &[5.66], 20.0).unwrap();
    let r_i = spot.interfaces[0];
    let spec = spectral::direct_spectrum(&spot, 12, 6).unwrap();
    // (a) translation eigenvalue
    let e1 = spec.rightmost(1).unwrap();
    rep.check(
        "(a) eigenvalue at |l| = 1 within 5e-3 of zero",
        e1.re.abs() <= 5e-3,
        format!("lambda(1) = {:+.2e}", e1.re),
    );
    // (b) contiguous unstable band inside [2, 12]
    let signs: Vec<bool> = (2..=12)
        .map(|l| spec.rightmost(l).unwrap().re > 0.0)
        .collect();
    let first = signs.iter().position(|&s| s);
    let band_ok = match first {
        Some(f) => {
            let len = signs[f..].iter().take_while(|&&s| s).count();
            len >= 2 && signs[f + len..].iter().all(|&s| !s)
        }
        None => false,
    };
    rep.check(
        "(b) contiguous unstable band in |l| in [2, 12]",
        band_ok,
        format!(
            "signs(2..=12) = {}",
            signs
                .iter()
                .map(|&s| if s { '+' } else { '-' })
                .collect::<String>()
        ),
    );
    // (c) sign agreement of the solvability formula for l = 2..8
    let p = spot.params;
    let bg = spectral::SlowBackground::for_radius(&p, r_i).unwrap();
    let mut all_match = true;
    let mut details = String::new();
    for l in 2..=8u32 {
        let ratio = spectral::slow_eigenfunction_ratio(l, |r| bg.f_plus(r, &p), r_i, 1e-4).unwrap();
        let lam1 = spectral::lambda1_formula(l, r_i, &p, ratio).unwrap().lambda1;
        let direct = spec.rightmost(l).unwrap().re;
        if (lam1 > 0.0) != (direct > 0.0) {
            all_match = false;
        }
        details.push_str(&format!("l={l}: {:+.3}/{:+.1e} ", lam1, direct));
    }
    rep.check("(c) sign of lambda_1 formula matches direct for l = 2..8", all_match, details);
    // (d) large-l plateau positive and within 30% of (a-u_f) K_1/K_0 quotient
    let plateau_formula = {
        let ratio = spectral::slow_eigenfunction_ratio(64, |r| bg.f_plus(r, &p), r_i, 1e-4).unwrap();
        spectral::lambda1_formula(64, r_i, &p, ratio).unwrap().lambda1
    };
    let plateau_closed = spectral::lambda1_large_ell_plateau(r_i, &p).unwrap().lambda1;
    rep.check(
        "(d) large-l plateau positive, within 30% of closed form",
        plateau_formula > 0.0
            && (plateau_formula - plateau_closed).abs() <= 0.30 * plateau_closed,
        format!("formula(64) = {plateau_formula:.4}, closed = {plateau_closed:.4}"),
    );
    rep.finish();
}

#[test]
fn criterion_7_stable_solutions() {
    let mut rep = Report::new("criterion 7: stable solutions");
    let cases: [(&str, f64, ProfileKind, Vec<f64>); 4] = [
        ("spot a=2.55", 2.55, ProfileKind::Spot, vec![1.3]),
        ("gap a=2.765", 2.765, ProfileKind::Gap, vec![1.3]),
        ("ring a=2.538", 2.538, ProfileKind::Ring, vec![2.0, 4.0]),
        ("target a=2.78", 2.78, ProfileKind::Target, vec![1.5, 2.8]),
    ];
    for (label, a, kind, radii) in cases {
        // the target admits no stationary radial solution at this delta and
        // resolution (the structure creeps inward at ~1e-5 per time unit);
        // several guesses are attempted before reporting
        let attempt = match solve_kind(a, 0.05, kind, &radii, 20.0) {
            Ok(s) => Ok(s),
            Err(first_err) => {
                let alternates: Vec<Vec<f64>> = match kind {
                    ProfileKind::Target => vec![vec![1.0, 2.2], vec![2.0, 3.2]],
                    ProfileKind::Ring => vec![vec![2.5, 4.5], vec![3.0, 5.0]],
                    _ => vec![vec![1.0], vec![1.6]],
                };
                let mut ok = Err(first_err);
                for alt in alternates {
                    if let Ok(s) = solve_kind(a, 0.05, kind, &alt, 20.0) {
                        ok = Ok(s);
                        break;
                    }
                }
                ok
            }
        };
        match attempt {
            Ok(sol) => {
                rep.check(
                    &format!("{label}: BVP converges as {:?}", kind),
                    sol.residual_norm <= 1e-9 && sol.kind == kind,
                    format!(
                        "residual {:.1e}, interfaces {:?}",
                        sol.residual_norm,
                        sol.interfaces
                            .iter()
                            .map(|x| (x * 1000.0).round() / 1000.0)
                            .collect::<Vec<_>>()
                    ),
                );
                let spec = spectral::direct_spectrum(&sol, 12, 4).unwrap();
                let mut max_re = f64::NEG_INFINITY;
                let mut argmax = 0u32;
                for (l, v) in &spec.per_ell {
                    if let Some(e) = v.first() {
                        if e.re > max_re {
                            max_re = e.re;
                            argmax = *l;
                        }
                    }
                }
                rep.check(
                    &format!("{label}: max Re lambda <= 5e-3 attained only at |l| = 1"),
                    max_re <= 5e-3 && argmax == 1,
                    format!("max Re lambda = {max_re:+.2e} at |l| = {argmax}"),
                );
            }
            Err(e) => {
                rep.check(
                    &format!("{label}: BVP converges"),
                    false,
                    format!("{e} — see the decisions ledger for the non-existence analysis"),
                );
            }
        }
    }
    rep.finish();
}

#[test]
fn criterion_8_fingering() {
    let mut rep = Report::new("criterion 8: fingering");
    // unstable spot: embed + noise, watch the interface modes
    let spot = solve_kind(2.625, 0.05, ProfileKind::Spot, &[5.66], 20.0).unwrap();
    let spec = spectral::direct_spectrum(&spot, 10, 4).unwrap();
    let field = sim2d::embed_radial(&spot, 512, 16.0, 1e-3, 42).unwrap();
    let mut diags: Vec<sim2d::ContourDiagnostics> = Vec::new();
    let mut tripped_at: Option<f64> = None;
    sim2d::run(field, 2000.0, 25.0, |st| {
        let d = sim2d::contour_diagnostics(st, 256);
        if !d.star_shaped && tripped_at.is_none() {
            tripped_at = Some(st.t);
        }
        diags.push(d);
        tripped_at.is_some()
    })
    .unwrap();
    rep.check(
        "unstable spot trips the star-shape flag before t = 2000",
        tripped_at.is_some(),
        match tripped_at {
            Some(t) => format!("onset at t = {t:.0}"),
            None => format!(
                "no onset by t = 2000; the leading interface mode reached {:.3} of radius {:.2} \
                 and keeps growing (max growth rate ~1.7e-3 gives onset near t ~ 3500) — see the \
                 decisions ledger",
                diags.last().unwrap().amplitudes[4],
                diags.last().unwrap().mean_radius
            ),
        },
    );
    // growth-rate signs for l = 2..8 within the linear window
    match sim2d::growth_rates(&diags, 10) {
        Ok(rates) => {
            let mut all = true;
            let mut detail = String::new();
            for l in 2..=8usize {
                let sim_rate = rates.iter().find(|r| r.ell == l).map(|r| r.rate);
                let direct = spec.rightmost(l as u32).unwrap().re;
                match sim_rate {
                    Some(rate) => {
                        if (rate > 0.0) != (direct > 0.0) {
                            all = false;
                        }
                        detail.push_str(&format!("l={l}: {rate:+.1e}/{direct:+.1e} "));
                    }
                    None => {
                        all = false;
                        detail.push_str(&format!("l={l}: no fit "));
                    }
                }
            }
            rep.check(
                "fitted growth-rate signs match the direct spectrum for l = 2..8",
                all,
                detail,
            );
        }
        Err(e) => rep.check(
            "fitted growth-rate signs match the direct spectrum for l = 2..8",
            false,
            format!("{e}"),
        ),
    }
    // stable spot survives with mode amplitudes below 3x their initial level
    let stable = solve_kind(2.55, 0.05, ProfileKind::Spot, &[1.3], 20.0).unwrap();
    let field = sim2d::embed_radial(&stable, 512, 8.0, 1e-3, 42).unwrap();
    let mut first: Option<sim2d::ContourDiagnostics> = None;
    let mut last: Option<sim2d::ContourDiagnostics> = None;
    sim2d::run(field, 2000.0, 100.0, |st| {
        let d = sim2d::contour_diagnostics(st, 256);
        if first.is_none() {
            first = Some(d.clone());
        }
        last = Some(d);
        false
    })
    .unwrap();
    let (first, last) = (first.unwrap(), last.unwrap());
    let noise_amp = 1e-3;
    let mut survive = last.star_shaped
        && (last.mean_radius - first.mean_radius).abs() < 0.3 * first.mean_radius;
    let mut worst = 0.0f64;
    for l in 2..=10 {
        worst = worst.max(last.amplitudes[l]);
        if last.amplitudes[l] > 3.0 * noise_amp {
            survive = false;
        }
    }
    rep.check(
        "stable spot survives to t = 2000 with mode amplitudes below 3x initial noise",
        survive,
        format!(
            "star = {}, radius {:.3} -> {:.3}, largest mode amplitude {worst:.1e} vs bound {:.0e}",
            last.star_shaped,
            first.mean_radius,
            last.mean_radius,
            3.0 * noise_amp
        ),
    );
    rep.finish();
}

#[test]
fn criterion_9_property_suites() {
    let mut rep = Report::new("criterion 9: property suites");
    let p = params(2.625, 0.05);

    // Bessel Wronskian and recurrence at 1e-10
    let mut st = 0x2545f491u64;
    let mut next = || {
        st ^= st << 13;
        st ^= st >> 7;
        st ^= st << 17;
        (st >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst_w = 0.0f64;
    for _ in 0..1000 {
        let nu = (next() * 63.0) as u32;
        let x = 10f64.powf(-2.0 + 5.0 * next());
        let iv = vegspot::bessel::bessel_i_scaled(nu, x).unwrap();
        let iv1 = vegspot::bessel::bessel_i_scaled(nu + 1, x).unwrap();
        let kv = vegspot::bessel::bessel_k_scaled(nu, x).unwrap();
        let kv1 = vegspot::bessel::bessel_k_scaled(nu + 1, x).unwrap();
        if kv.is_finite() && kv1.is_finite() {
            worst_w = worst_w.max(((iv * kv1 + iv1 * kv) * x - 1.0).abs());
        }
    }
    let mut worst_rec = 0.0f64;
    for x in [0.5, 2.0, 9.0, 120.0] {
        for nu in 1..=63u32 {
            let km = vegspot::bessel::bessel_k_scaled(nu - 1, x).unwrap();
            let k = vegspot::bessel::bessel_k_scaled(nu, x).unwrap();
            let kp = vegspot::bessel::bessel_k_scaled(nu + 1, x).unwrap();
            if km.is_finite() && k.is_finite() && kp.is_finite() {
                worst_rec = worst_rec.max(((km + 2.0 * nu as f64 / x * k) / kp - 1.0).abs());
            }
        }
    }
    rep.check(
        "Bessel Wronskian and recurrence defects <= 1e-10",
        worst_w <= 1e-10 && worst_rec <= 1e-10,
        format!("wronskian {worst_w:.1e}, recurrence {worst_rec:.1e}"),
    );

    // energy conservation along the unstable-manifold orbit (1e-9)
    {
        use vegspot::ode::{integrate, OdeOptions};
        let field = singular::ReducedField::new(&p).unwrap();
        let u2 = field.u2;
        let lam = field.lambda_saddle();
        let w0 = field.w_f * (-lam * 47.0).exp();
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], field.f(y[0])];
        let opts = OdeOptions {
            rtol: 1e-11,
            atol: 1e-300,
            ..Default::default()
        };
        let (traj, _) =
            integrate(&rhs, 0.0, 50.0, [w0, lam * w0], &opts, None).unwrap();
        let e0 = singular::energy(u2 + w0, lam * w0, &p).unwrap();
        let mut drift = 0.0f64;
        for s in traj.iter().step_by(20) {
            let e = singular::energy(u2 + s.y[0], s.y[1], &p).unwrap();
            drift = drift.max((e - e0).abs());
        }
        rep.check(
            "energy conservation <= 1e-9 over span 50",
            drift <= 1e-9,
            format!("max drift {drift:.1e}"),
        );
    }

    // layer-front residuals (1e-10) and L0 kernel (1e-8)
    {
        let mut worst_res = 0.0f64;
        for k in 0..50 {
            let u = p.u_fold() + (2.0 * p.u_front() - p.u_fold()) * (k as f64 + 0.5) / 50.0;
            let f = singular::layer_front(singular::FrontDirection::VegToDesert, u, &p).unwrap();
            for i in 0..200 {
                let z = -30.0 / p.m.sqrt() + 60.0 / p.m.sqrt() * i as f64 / 199.0;
                worst_res = worst_res.max(f.residual(z).abs());
            }
        }
        let front = singular::layer_front(
            singular::FrontDirection::VegToDesert,
            p.u_front(),
            &p,
        )
        .unwrap();
        let mut worst_l0 = 0.0f64;
        for k in -100..=100 {
            let s = k as f64 * 0.2;
            let (v, q) = front.profile(s);
            let l0 = front.profile_ddd(s) - p.m * q
                + p.u_front() * (2.0 * v - 3.0 * p.b * v * v) * q;
            worst_l0 = worst_l0.max(l0.abs());
        }
        rep.check(
            "layer residuals <= 1e-10 and L0 kernel <= 1e-8",
            worst_res <= 1e-10 && worst_l0 <= 1e-8,
            format!("layer {worst_res:.1e}, L0 {worst_l0:.1e}"),
        );
    }

    // p_out monotone on a 1000-point log grid
    {
        let mut mono = true;
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0);
            let v = singular::gamma_out(r, &p).unwrap();
            if v >= prev {
                mono = false;
            }
            prev = v;
        }
        rep.check("p_out strictly decreasing (1000-point log grid)", mono, String::new());
    }

    // (p_f, r_f) monotone in u_in
    {
        let mut mono = true;
        let mut prev: Option<(f64, f64)> = None;
        let u2 = model::equilibria(&p).p2.unwrap().0;
        for k in 0..50 {
            let t = k as f64 / 49.0;
            let w = (1e-8f64).ln() + ((p.u_front() - u2) * 0.999 / 1e-8).ln() * t;
            let u_in = u2 + w.exp();
            let traj = singular::reduced_flow_shoot(u_in, &p, 1e-3).unwrap();
            let (r_f, p_f) = (traj.r_f.unwrap(), traj.p_f.unwrap());
            if let Some((rp, pp)) = prev {
                if !(r_f < rp && p_f < pp) {
                    mono = false;
                }
            }
            prev = Some((r_f, p_f));
        }
        rep.check("(p_f, r_f) strictly decreasing in u_in (50 samples)", mono, String::new());
    }

    // Jacobian finite-difference check (1e-5 relative)
    {
        let g = RadialGrid::with_n(5.0, 401, p.delta).unwrap();
        let guess = radial::initial_guess(ProfileKind::Spot, &p, &[2.0], &g).unwrap();
        let jac = radial::jacobian(&g, &guess.u, &guess.v, &p);
        let f0 = radial::residual(&g, &guess.u, &guess.v, &p);
        let mut worst = 0.0f64;
        for trial in 0..20 {
            let mut dir = vec![0.0; 2 * g.n];
            for (i, d) in dir.iter_mut().enumerate() {
                *d = ((i * 2654435761 + trial * 97) % 1000) as f64 / 1000.0 - 0.5;
            }
            let nrm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let eps = 1e-7;
            let mut ut = guess.u.clone();
            let mut vt = guess.v.clone();
            for i in 0..g.n {
                ut[i] += eps * dir[2 * i] / nrm;
                vt[i] += eps * dir[2 * i + 1] / nrm;
            }
            let f1 = radial::residual(&g, &ut, &vt, &p);
            let mut jd = vec![0.0; 2 * g.n];
            let dn: Vec<f64> = dir.iter().map(|x| x / nrm).collect();
            jac.matvec(&dn, &mut jd);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..2 * g.n {
                num += ((f1[i] - f0[i]) / eps - jd[i]).powi(2);
                den += jd[i].powi(2).max(1.0);
            }
            worst = worst.max((num / den).sqrt());
        }
        rep.check(
            "Jacobian directional finite differences <= 1e-5 relative",
            worst <= 1e-5,
            format!("worst {worst:.1e}"),
        );
    }

    // grid second-order convergence: interface radius and eigenvalue ratios
    {
        let mut ris = Vec::new();
        let mut eigs = Vec::new();
        for mult in [1usize, 2, 4] {
            let n = 1600 * mult + 1;
            let g = RadialGrid::with_n(20.0, n, p.delta).unwrap();
            let guess = radial::initial_guess(ProfileKind::Spot, &p, &[5.66], &g).unwrap();
            let s = radial::solve_profile(&guess, &p).unwrap();
            ris.push(s.interfaces[0]);
            let spec = spectral::direct_spectrum(&s, 6, 2).unwrap();
            eigs.push(spec.rightmost(6).unwrap().re);
        }
        let r_ratio = (ris[0] - ris[1]) / (ris[1] - ris[2]);
        let e_ratio = (eigs[0] - eigs[1]) / (eigs[1] - eigs[2]);
        rep.check(
            "grid convergence ratios in [3.5, 4.5]",
            (3.5..=4.5).contains(&r_ratio) && (3.5..=4.5).contains(&e_ratio),
            format!("interface ratio {r_ratio:.2}, eigenvalue ratio {e_ratio:.2}"),
        );
    }
    rep.finish();
}
