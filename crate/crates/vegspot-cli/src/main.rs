//! vegspot: file-based pipelines for spot/gap existence criteria, singular
//! interface-radius prediction, radial profiles, spectra, traveling fronts,
//! 2D simulation and continuation.

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use vegspot::io::{self, SvgPlot};
use vegspot::model::{self, Classification, ModelParams};
use vegspot::radial::{self, ProfileKind, RadialGrid};
use vegspot::singular::{self, LayerWeight};
use vegspot::spectral;
use vegspot::{sim2d, Error};

#[derive(Parser)]
#[command(name = "vegspot", version, about = "Radially symmetric vegetation patterns: criteria, profiles, spectra, fronts, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Rainfall parameter a.
    #[arg(long)]
    a: f64,
    /// Inverse carrying capacity b.
    #[arg(long)]
    b: f64,
    /// Mortality m.
    #[arg(long)]
    m: f64,
    /// Diffusion-ratio parameter delta.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        ModelParams::new(self.a, self.b, self.m, self.delta)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize the existence window and spot/gap classification over an
    /// (a/m, b) grid.
    Regions {
        /// Mortality m (fixed over the scan).
        #[arg(long)]
        m: f64,
        /// Fix b to a single row instead of scanning b-min..b-max.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        a_min: f64,
        #[arg(long, default_value_t = 7.0)]
        a_max: f64,
        #[arg(long, default_value_t = 0.4)]
        b_min: f64,
        #[arg(long, default_value_t = 2.0)]
        b_max: f64,
        /// Samples per axis.
        #[arg(long, default_value_t = 161)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Singular-limit interface radius from the reduced-flow matching.
    PredictRadius {
        #[command(flatten)]
        params: ParamArgs,
        /// Launch radius of the core curve.
        #[arg(long, default_value_t = 1e-3)]
        r0: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the stationary radial boundary value problem.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// spot | gap | ring | target
        #[arg(long)]
        kind: String,
        /// Comma-separated interface radii for the initial guess
        /// (defaults to the singular prediction for spot/gap).
        #[arg(long)]
        radii: Option<String>,
        /// Truncation radius (default max(20, 3 x outermost radius)).
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalues of the linearization about a stored profile.
    Spectrum {
        /// Profile CSV produced by `solve`.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 12)]
        lmax: u32,
        /// Rightmost eigenvalues kept per wavenumber.
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Also evaluate the asymptotic eigenvalue formulas.
        #[arg(long, default_value_t = false)]
        asymptotics: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Traveling 1D front and its speed.
    Front {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time integration on a periodic square seeded with a stored profile.
    Simulate {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Domain side length.
        #[arg(long, default_value_t = 16.0)]
        l: f64,
        #[arg(long, default_value_t = 500.0)]
        t_end: f64,
        #[arg(long, default_value_t = 25.0)]
        snap_every: f64,
        /// Uniform noise amplitude added to V.
        #[arg(long, default_value_t = 1e-3)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Keep every snapshot's raw fields (otherwise first/last only).
        #[arg(long, default_value_t = false)]
        full_snapshots: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Natural-parameter continuation of a stored profile in a.
    Continue {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        a_target: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    if let Ok(threads) = std::env::var("VEGSPOT_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // bad flags: usage on stderr, exit code 1
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let started = Instant::now();
    match run(cli, started) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}

fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(format!("{:x}", h.finalize()))
}

fn tolerances() -> serde_json::Value {
    serde_json::json!({
        "newton_residual_inf": 1e-9,
        "eigen_residual": 1e-8,
        "quadrature_abs": 1e-12,
        "ode_rtol": 1e-10,
        "ode_atol": 1e-12,
        "shoot_rtol": 1e-11,
        "matching_residual": 1e-8,
        "boundary_bisection_a": 1e-8,
        "spot_gap_boundary_band": 1e-10,
    })
}

fn write_manifest(
    out: &Path,
    subcommand: &str,
    args: serde_json::Value,
    inputs: BTreeMap<String, String>,
    started: Instant,
) -> Result<(), Error> {
    let manifest = serde_json::json!({
        "subcommand": subcommand,
        "args": args,
        "tolerances": tolerances(),
        "input_hashes": inputs,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    std::fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?,
    )?;
    Ok(())
}

fn profile_hashes(profile: &Path) -> Result<BTreeMap<String, String>, Error> {
    let base = if profile.extension().map_or(false, |e| e == "csv") {
        profile.with_extension("")
    } else {
        profile.to_path_buf()
    };
    let mut m = BTreeMap::new();
    for ext in ["csv", "json"] {
        let p = base.with_extension(ext);
        m.insert(p.display().to_string(), sha256_file(&p)?);
    }
    Ok(m)
}

fn parse_kind(s: &str) -> Result<ProfileKind, Error> {
    match s.to_ascii_lowercase().as_str() {
        "spot" => Ok(ProfileKind::Spot),
        "gap" => Ok(ProfileKind::Gap),
        "ring" => Ok(ProfileKind::Ring),
        "target" => Ok(ProfileKind::Target),
        other => Err(Error::Domain(format!(
            "unknown kind '{other}' (expected spot|gap|ring|target)"
        ))),
    }
}

fn run(cli: Cli, started: Instant) -> Result<(), Error> {
    match cli.command {
        Command::Regions {
            m,
            b,
            a_min,
            a_max,
            b_min,
            b_max,
            samples,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let (b_lo, b_hi, nb) = match b {
                Some(bv) => (bv, bv, 1usize),
                None => (b_min, b_max, samples),
            };
            let mut rows = Vec::new();
            let mut plot = SvgPlot::new((a_min / m, a_max / m), (b_lo - 0.01, b_hi + 0.01));
            let dam = (a_max - a_min) / (samples.max(2) - 1) as f64;
            let db = if nb > 1 {
                (b_hi - b_lo) / (nb - 1) as f64
            } else {
                0.0
            };
            for j in 0..nb {
                let bv = b_lo + db * j as f64;
                for i in 0..samples {
                    let av = a_min + dam * i as f64;
                    let p = ModelParams::new(av, bv, m, 0.0)?;
                    let admissible = model::restriction_satisfied(&p);
                    // classification from the closed-form margin (the
                    // integral margin equals m^2 times it)
                    let class = if !admissible {
                        f64::NAN
                    } else {
                        let margin = model::closed_form_margin(&p);
                        if margin.abs() <= 1e-10 / (m * m) {
                            0.0
                        } else if margin > 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    };
                    rows.push(vec![av, bv, av / m, admissible as u8 as f64, class]);
                    if admissible {
                        let color = if class > 0.0 {
                            "#2e8b57"
                        } else if class < 0.0 {
                            "#d2691e"
                        } else {
                            "#333333"
                        };
                        plot.rect(
                            av / m - 0.5 * dam / m,
                            bv - 0.5 * db.max(0.02),
                            av / m + 0.5 * dam / m,
                            bv + 0.5 * db.max(0.02),
                            color,
                        );
                    }
                }
            }
            io::write_csv(
                &out.join("regions.csv"),
                "a,b,a_over_m,admissible,classification",
                &rows,
            )?;
            plot.save(
                &out.join("regions.svg"),
                "existence window and classification (a/m vs b; spot=green, gap=orange)",
            )?;
            write_manifest(
                &out,
                "regions",
                serde_json::json!({"m": m, "b": b, "a_min": a_min, "a_max": a_max,
                                   "b_min": b_min, "b_max": b_max, "samples": samples}),
                BTreeMap::new(),
                started,
            )?;
            println!("regions grid written to {}", out.display());
            Ok(())
        }
        Command::PredictRadius { params, r0, out } => {
            std::fs::create_dir_all(&out)?;
            let p = params.params()?;
            let pred = singular::predict_interface_radius(&p)?;
            std::fs::write(
                out.join("prediction.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "params": p,
                    "prediction": pred,
                    "r0": r0,
                }))
                .map_err(|e| Error::Io(e.to_string()))?,
            )?;
            // trajectory dump: matched core orbit for spots, the core curve
            // on the jump set for gaps
            let rows: Vec<Vec<f64>> = match pred.classification {
                Classification::Spot => {
                    let traj = singular::core_trajectory_for_radius(&p, pred.r_i)?;
                    traj.samples.iter().map(|s| s.to_vec()).collect()
                }
                _ => {
                    let uf = p.u_front();
                    (1..=400)
                        .map(|k| {
                            let r = pred.r_i * 0.02 * k as f64;
                            let pin = singular::gamma_in_gap(r, &p).unwrap_or(f64::NAN);
                            vec![r, uf, pin]
                        })
                        .collect()
                }
            };
            io::write_csv(&out.join("trajectory.csv"), "r,u,p", &rows)?;
            write_manifest(
                &out,
                "predict-radius",
                serde_json::json!({"a": p.a, "b": p.b, "m": p.m, "r0": r0}),
                BTreeMap::new(),
                started,
            )?;
            println!(
                "predicted interface radius r_I = {:.6} ({:?}, margin {:+.6e})",
                pred.r_i, pred.classification, pred.criterion_margin
            );
            Ok(())
        }
        Command::Solve {
            params,
            kind,
            radii,
            rmax,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let p = params.params()?;
            let kind = parse_kind(&kind)?;
            let radii: Vec<f64> = match radii {
                Some(s) => s
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Domain(format!("bad radius '{x}': {e}")))
                    })
                    .collect::<Result<_, _>>()?,
                None => match kind {
                    ProfileKind::Spot | ProfileKind::Gap => {
                        vec![singular::predict_interface_radius(&p)?.r_i]
                    }
                    _ => {
                        return Err(Error::BadRadii(
                            "ring/target solves need explicit --radii".into(),
                        ))
                    }
                },
            };
            let r_max = rmax.unwrap_or_else(|| {
                (3.0 * radii.last().copied().unwrap_or(5.0)).max(20.0)
            });
            let grid = RadialGrid::new(r_max, p.delta)?;
            let guess = radial::initial_guess(kind, &p, &radii, &grid)?;
            let sol = radial::solve_profile(&guess, &p)?;
            io::write_profile(&out.join("profile"), &sol)?;
            // quick look
            let mut plot = SvgPlot::new((0.0, r_max), (0.0, 3.0));
            let upts: Vec<(f64, f64)> = (0..grid.n).map(|i| (grid.r(i), sol.u[i])).collect();
            let vpts: Vec<(f64, f64)> = (0..grid.n).map(|i| (grid.r(i), sol.v[i])).collect();
            plot.polyline(&upts, "#1f77b4");
            plot.polyline(&vpts, "#2ca02c");
            plot.save(&out.join("profile.svg"), "radial profile: u (blue), v (green)")?;
            write_manifest(
                &out,
                "solve",
                serde_json::json!({"a": p.a, "b": p.b, "m": p.m, "delta": p.delta,
                                   "kind": format!("{kind:?}"), "radii": radii, "rmax": r_max}),
                BTreeMap::new(),
                started,
            )?;
            println!(
                "converged {:?} profile, residual {:.2e}, interfaces {:?}",
                sol.kind, sol.residual_norm, sol.interfaces
            );
            Ok(())
        }
        Command::Spectrum {
            profile,
            lmax,
            k,
            asymptotics,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let prof = io::read_profile(&profile)?;
            let spec = spectral::direct_spectrum(&prof, lmax, k)?;
            // mirrored table of the critical eigenvalue, l = -lmax..=lmax
            let mut rows = Vec::new();
            for l in -(lmax as i64)..=(lmax as i64) {
                let e = spec
                    .rightmost(l.unsigned_abs() as u32)
                    .ok_or_else(|| Error::EigSolverStalled {
                        iterations: 0,
                        best_residual: f64::NAN,
                    })?;
                rows.push(vec![l as f64, e.re, e.im, e.residual]);
            }
            io::write_csv(&out.join("spectrum.csv"), "l,re_lambda,im_lambda,residual", &rows)?;
            // all computed eigenvalues per |l|
            let mut all_rows = Vec::new();
            for (l, v) in &spec.per_ell {
                for e in v {
                    all_rows.push(vec![*l as f64, e.re, e.im, e.residual]);
                }
            }
            io::write_csv(
                &out.join("spectrum_all.csv"),
                "l,re_lambda,im_lambda,residual",
                &all_rows,
            )?;
            // rightmost eigenvalues both raw and rescaled by 1/delta for
            // comparison with the lambda_1 formulas
            let rescaled: Vec<serde_json::Value> = spec
                .per_ell
                .iter()
                .filter_map(|(l, v)| {
                    v.first().map(|e| {
                        serde_json::json!({
                            "l": l,
                            "re_lambda": e.re,
                            "re_lambda_over_delta": e.re / prof.params.delta.max(1e-300),
                        })
                    })
                })
                .collect();
            std::fs::write(
                out.join("spectrum.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "params": prof.params,
                    "ess_bound": spec.ess_bound,
                    "lmax": lmax,
                    "k": k,
                    "rightmost": rescaled,
                    "profile_hashes": profile_hashes(&profile)?,
                }))
                .map_err(|e| Error::Io(e.to_string()))?,
            )?;
            let mut plot = SvgPlot::new((-(lmax as f64) - 0.5, lmax as f64 + 0.5), (-0.05, 0.01));
            for l in -(lmax as i64)..=(lmax as i64) {
                let e = spec.rightmost(l.unsigned_abs() as u32).unwrap();
                plot.circle(l as f64, e.re, "#1f77b4");
            }
            plot.save(&out.join("spectrum.svg"), "critical eigenvalue vs wavenumber")?;
            if asymptotics {
                let r_i = prof
                    .interfaces
                    .last()
                    .copied()
                    .ok_or_else(|| Error::Domain("profile has no interface".into()))?;
                let mut text = String::from("l,lambda1,regime\n");
                if let Ok(bg) = spectral::SlowBackground::for_radius(&prof.params, r_i) {
                    for l in 0..=lmax {
                        if let Ok(ratio) = spectral::slow_eigenfunction_ratio(
                            l,
                            |r| bg.f_plus(r, &prof.params),
                            r_i,
                            1e-4,
                        ) {
                            if let Ok(al) = spectral::lambda1_formula(l, r_i, &prof.params, ratio)
                            {
                                text.push_str(&format!(
                                    "{},{},Formula\n",
                                    l,
                                    io::fmt_f64(al.lambda1)
                                ));
                            }
                        }
                    }
                }
                for l in 0..=lmax as i32 {
                    if let Ok(al) = spectral::lambda1_large_radius(l, r_i, &prof.params) {
                        text.push_str(&format!("{},{},LargeRadius\n", l, io::fmt_f64(al.lambda1)));
                    }
                }
                if let Ok(al) = spectral::lambda1_large_ell_plateau(r_i, &prof.params) {
                    text.push_str(&format!("inf,{},LargeL\n", io::fmt_f64(al.lambda1)));
                }
                std::fs::write(out.join("asymptotics.csv"), text)?;
            }
            write_manifest(
                &out,
                "spectrum",
                serde_json::json!({"profile": profile.display().to_string(), "lmax": lmax, "k": k,
                                   "asymptotics": asymptotics}),
                profile_hashes(&profile)?,
                started,
            )?;
            let e1 = spec.rightmost(1.min(lmax)).unwrap();
            println!(
                "spectrum over |l| <= {lmax}; translation eigenvalue {:+.3e}",
                e1.re
            );
            Ok(())
        }
        Command::Front { params, out } => {
            std::fs::create_dir_all(&out)?;
            let p = params.params()?;
            let front = singular::solve_traveling_front(&p, None)?;
            let sideband = singular::sideband_coefficient(&p, LayerWeight::CarryingCapacity)?;
            std::fs::write(
                out.join("front.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "params": p,
                    "c": front.c,
                    "u_star": front.u_star,
                    "residual_norm": front.residual_norm,
                    "iterations": front.iterations,
                    "sideband": sideband,
                }))
                .map_err(|e| Error::Io(e.to_string()))?,
            )?;
            let rows: Vec<Vec<f64>> = front
                .xi
                .iter()
                .zip(front.u.iter().zip(&front.v))
                .map(|(&xi, (&u, &v))| vec![xi, u, v])
                .collect();
            io::write_csv(&out.join("front.csv"), "xi,u,v", &rows)?;
            write_manifest(
                &out,
                "front",
                serde_json::json!({"a": p.a, "b": p.b, "m": p.m, "delta": p.delta}),
                BTreeMap::new(),
                started,
            )?;
            println!(
                "front speed c = {:+.6e} (u* = {:.6}, sideband lambda2c = {:+.4e})",
                front.c, front.u_star, sideband.lambda2c
            );
            Ok(())
        }
        Command::Simulate {
            profile,
            n,
            l,
            t_end,
            snap_every,
            noise,
            seed,
            full_snapshots,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let prof = io::read_profile(&profile)?;
            let state0 = sim2d::embed_radial(&prof, n, l, noise, seed)?;
            let mut times = Vec::new();
            let mut diags = Vec::new();
            let mut contour_rows = Vec::new();
            let final_state = sim2d::run(state0, t_end, snap_every, |st| {
                let d = sim2d::contour_diagnostics(st, 256);
                times.push(st.t);
                if full_snapshots || st.t == 0.0 {
                    let _ = io::write_snapshot(&out, st);
                }
                contour_rows.push(vec![
                    st.t,
                    d.star_shaped as u8 as f64,
                    d.mean_radius,
                ]);
                diags.push(d);
                false
            })?;
            io::write_snapshot(&out, &final_state)?;
            let mut rows = Vec::new();
            for d in &diags {
                for (l_idx, amp) in d.amplitudes.iter().enumerate() {
                    rows.push(vec![d.t, l_idx as f64, *amp]);
                }
            }
            io::write_csv(&out.join("diagnostics.csv"), "t,l,amp", &rows)?;
            io::write_csv(
                &out.join("contour.csv"),
                "t,star_shaped,mean_radius",
                &contour_rows,
            )?;
            match sim2d::growth_rates(&diags, 10) {
                Ok(rates) => {
                    let rows: Vec<Vec<f64>> = rates
                        .iter()
                        .map(|r| vec![r.ell as f64, r.rate, r.fit_residual])
                        .collect();
                    io::write_csv(&out.join("growth.csv"), "l,rate,fit_residual", &rows)?;
                }
                Err(e) => eprintln!("growth-rate fit skipped: {e}"),
            }
            let manifest = io::SimManifest {
                n,
                l,
                times,
                params: prof.params,
                seed,
                noise_amp: noise,
            };
            std::fs::write(
                out.join("simulation.json"),
                serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?,
            )?;
            write_manifest(
                &out,
                "simulate",
                serde_json::json!({"profile": profile.display().to_string(), "n": n, "l": l,
                                   "t_end": t_end, "snap_every": snap_every, "noise": noise,
                                   "seed": seed}),
                profile_hashes(&profile)?,
                started,
            )?;
            let last = diags.last().unwrap();
            println!(
                "simulated to t = {:.1}; star-shaped = {}, mean radius = {:.3}",
                final_state.t, last.star_shaped, last.mean_radius
            );
            Ok(())
        }
        Command::Continue {
            profile,
            a_target,
            step,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let prof = io::read_profile(&profile)?;
            let (steps, profiles) = radial::continue_in_a(&prof, a_target, step)?;
            let rows: Vec<Vec<f64>> = steps
                .iter()
                .map(|s| vec![s.a, s.r_i, s.residual_norm])
                .collect();
            io::write_csv(&out.join("branch.csv"), "a,r_i,residual", &rows)?;
            if let Some(last) = profiles.last() {
                io::write_profile(&out.join("final_profile"), last)?;
            }
            write_manifest(
                &out,
                "continue",
                serde_json::json!({"profile": profile.display().to_string(),
                                   "a_target": a_target, "step": step}),
                profile_hashes(&profile)?,
                started,
            )?;
            println!(
                "continuation finished after {} accepted steps (last a = {:?})",
                steps.len(),
                steps.last().map(|s| s.a)
            );
            Ok(())
        }
    }
}
