//! Time integration of the model on a periodic square: Strang-split IMEX
//! stepping with the diffusion advanced exactly in the discrete Fourier
//! basis of the periodic finite-difference Laplacian, plus interface
//! contour diagnostics for fingering experiments.

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::radial::RadialProfile;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::sync::Arc;

/// Two scalar fields on an n x n periodic grid of side length l.
#[derive(Debug, Clone)]
pub struct Field2D {
    pub n: usize,
    pub l: f64,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub params: ModelParams,
}

impl Field2D {
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Cell-centered coordinate of index i, centered on the domain.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h() - 0.5 * self.l
    }

    pub fn homogeneous(n: usize, l: f64, u0: f64, v0: f64, p: &ModelParams) -> Self {
        Self {
            n,
            l,
            t: 0.0,
            u: vec![u0; n * n],
            v: vec![v0; n * n],
            params: *p,
        }
    }
}

/// Embed a radial profile at the domain center by linear interpolation in
/// r, then add uniform noise of the given amplitude to V (reproducible via
/// the seed). Outside the profile's grid the far-field values of the
/// profile are used.
pub fn embed_radial(
    profile: &RadialProfile,
    n: usize,
    l: f64,
    noise_amp: f64,
    seed: u64,
) -> Result<Field2D> {
    let p = profile.params;
    let max_radius = profile
        .interfaces
        .last()
        .copied()
        .unwrap_or(0.25 * profile.grid.r_max);
    if l < 2.5 * max_radius {
        return Err(Error::DomainTooSmall(format!(
            "domain side {l} below 2.5 x interface radius {max_radius}"
        )));
    }
    let h2d = l / n as f64;
    if h2d > p.delta + 1e-12 {
        return Err(Error::GridTooCoarse(format!(
            "2D spacing {h2d} exceeds delta = {}",
            p.delta
        )));
    }
    let hr = profile.grid.h();
    let nr = profile.grid.n;
    let interp = |r: f64, field: &[f64]| -> f64 {
        let x = r / hr;
        let i = (x.floor() as usize).min(nr - 2);
        let t = (x - i as f64).clamp(0.0, 1.0);
        if r >= profile.grid.r_max {
            field[nr - 1]
        } else {
            field[i] * (1.0 - t) + field[i + 1] * t
        }
    };
    let mut u = vec![0.0; n * n];
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        let x = (i as f64 + 0.5) * h2d - 0.5 * l;
        for j in 0..n {
            let y = (j as f64 + 0.5) * h2d - 0.5 * l;
            let r = (x * x + y * y).sqrt();
            u[i * n + j] = interp(r, &profile.u);
            v[i * n + j] = interp(r, &profile.v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if noise_amp > 0.0 {
        for x in v.iter_mut() {
            *x += noise_amp * (2.0 * rng.gen::<f64>() - 1.0);
        }
    }
    Ok(Field2D {
        n,
        l,
        t: 0.0,
        u,
        v,
        params: p,
    })
}

/// Spectral machinery for the exact diffusion substep.
pub struct Stepper {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Discrete FD Laplacian symbol along one axis.
    sym1: Vec<f64>,
}

impl Stepper {
    pub fn new(n: usize, l: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let h = l / n as f64;
        let sym1 = (0..n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
                -4.0 / (h * h) * s * s
            })
            .collect();
        Self { n, fft, ifft, sym1 }
    }

    fn fft_rows(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.ifft } else { &self.fft };
        buf.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
            |scratch, row| {
                plan.process_with_scratch(row, scratch);
            },
        );
    }

    fn transpose(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                buf.swap(i * n + j, j * n + i);
            }
        }
    }

    /// Advance one field by the exact diffusion propagator over time s with
    /// diffusivity d: multiply each discrete mode by exp(d * mu_jk * s).
    fn diffuse(&self, field: &mut [f64], d: f64, s: f64) {
        let n = self.n;
        let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft_rows(&mut buf, false);
        self.transpose(&mut buf);
        self.fft_rows(&mut buf, false);
        // multiplier split into per-axis factors
        let fac: Vec<f64> = self.sym1.iter().map(|mu| (d * mu * s).exp()).collect();
        buf.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let fi = fac[i];
            for (j, z) in row.iter_mut().enumerate() {
                *z *= fi * fac[j];
            }
        });
        self.fft_rows(&mut buf, true);
        self.transpose(&mut buf);
        self.fft_rows(&mut buf, true);
        let scale = 1.0 / (n as f64 * n as f64);
        field
            .par_iter_mut()
            .zip(buf.par_iter())
            .for_each(|(x, z)| *x = z.re * scale);
    }

    /// Explicit midpoint stage for the reaction over dt, with optional
    /// space-time forcing (used by the manufactured-solution order check).
    #[allow(clippy::type_complexity)]
    fn react(
        &self,
        state: &mut Field2D,
        dt: f64,
        t: f64,
        forcing: Option<&(dyn Fn(f64, f64, f64) -> (f64, f64) + Sync)>,
    ) {
        let n = state.n;
        let p = state.params;
        let l = state.l;
        let h = l / n as f64;
        let u0 = std::mem::take(&mut state.u);
        let v0 = std::mem::take(&mut state.v);
        let mut u1 = vec![0.0; n * n];
        let mut v1 = vec![0.0; n * n];
        u1.par_iter_mut()
            .zip(v1.par_iter_mut())
            .enumerate()
            .for_each(|(idx, (uo, vo))| {
                let (i, j) = (idx / n, idx % n);
                let x = (i as f64 + 0.5) * h - 0.5 * l;
                let y = (j as f64 + 0.5) * h - 0.5 * l;
                let (u, v) = (u0[idx], v0[idx]);
                let (mut fu, mut fv) = model::reaction(u, v, &p);
                if let Some(f) = forcing {
                    let (gu, gv) = f(x, y, t);
                    fu += gu;
                    fv += gv;
                }
                let (um, vm) = (u + 0.5 * dt * fu, v + 0.5 * dt * fv);
                let (mut fu2, mut fv2) = model::reaction(um, vm, &p);
                if let Some(f) = forcing {
                    let (gu, gv) = f(x, y, t + 0.5 * dt);
                    fu2 += gu;
                    fv2 += gv;
                }
                *uo = u + dt * fu2;
                *vo = v + dt * fv2;
            });
        state.u = u1;
        state.v = v1;
    }
}

/// Largest kinetics-Jacobian eigenvalue magnitude over the current field.
pub fn max_reaction_eigenvalue(state: &Field2D) -> f64 {
    let p = state.params;
    state
        .u
        .par_iter()
        .zip(state.v.par_iter())
        .map(|(&u, &v)| {
            let j = model::reaction_jacobian(u, v, &p);
            let tr = j[0][0] + j[1][1];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                0.5 * (tr + s).abs().max(0.5 * (tr - s).abs())
            } else {
                det.abs().sqrt()
            }
        })
        .reduce(|| 0.0, f64::max)
}

fn check_finite(state: &Field2D) -> Result<()> {
    let bad = state
        .u
        .par_iter()
        .chain(state.v.par_iter())
        .any(|x| !x.is_finite() || x.abs() > 1e6);
    if bad {
        return Err(Error::SimBlowUp(state.t));
    }
    Ok(())
}

/// Advance the state to t + span with fused Strang steps
/// D(dt/2) [R D]^{k-1} R D(dt/2); dt is fixed inside the span from the
/// stability bound 0.2/max|reaction eigenvalue| at entry.
pub fn advance(
    stepper: &Stepper,
    state: &mut Field2D,
    span: f64,
    forcing: Option<&(dyn Fn(f64, f64, f64) -> (f64, f64) + Sync)>,
    dt_cap: f64,
) -> Result<()> {
    if span <= 0.0 {
        return Ok(());
    }
    let p = state.params;
    let mj = max_reaction_eigenvalue(state).max(1e-10);
    let dt_raw = (0.2 / mj).min(dt_cap).min(span);
    let steps = (span / dt_raw).ceil() as usize;
    let dt = span / steps as f64;
    let d2 = p.delta * p.delta;
    stepper.diffuse(&mut state.u, 1.0, 0.5 * dt);
    stepper.diffuse(&mut state.v, d2, 0.5 * dt);
    for k in 0..steps {
        stepper.react(state, dt, state.t, forcing);
        state.t += dt;
        if k + 1 < steps {
            stepper.diffuse(&mut state.u, 1.0, dt);
            stepper.diffuse(&mut state.v, d2, dt);
        } else {
            stepper.diffuse(&mut state.u, 1.0, 0.5 * dt);
            stepper.diffuse(&mut state.v, d2, 0.5 * dt);
        }
        check_finite(state)?;
    }
    Ok(())
}

/// One Strang step of size dt (no fusion); kept for callers that step
/// manually.
pub fn step(stepper: &Stepper, state: &mut Field2D, dt: f64) -> Result<()> {
    advance(stepper, state, dt, None, dt)
}

/// Run from the initial state to t_end, calling `on_snapshot` at t = 0 and
/// after every snap_every units. The callback may stop the run early by
/// returning true.
pub fn run<F: FnMut(&Field2D) -> bool>(
    initial: Field2D,
    t_end: f64,
    snap_every: f64,
    mut on_snapshot: F,
) -> Result<Field2D> {
    let mut state = initial;
    let stepper = Stepper::new(state.n, state.l);
    if on_snapshot(&state) {
        return Ok(state);
    }
    while state.t < t_end - 1e-9 {
        let span = snap_every.min(t_end - state.t);
        advance(&stepper, &mut state, span, None, 0.25)?;
        if on_snapshot(&state) {
            break;
        }
    }
    Ok(state)
}

/// Radial interface function rho(theta) sampled on `n_angles` rays from the
/// domain center, defined by the level-set crossing of v at half the
/// plateau value, plus its angular Fourier amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct ContourDiagnostics {
    pub t: f64,
    pub rho: Vec<f64>,
    /// False once some ray sees zero or multiple crossings (post-fingering).
    pub star_shaped: bool,
    /// |rho_hat_l| / n_angles for l = 0..=32.
    pub amplitudes: Vec<f64>,
    pub mean_radius: f64,
}

/// Extract the interface contour. The level is half of max(v); rays march
/// from the domain center in steps of h/2 with bilinear sampling.
pub fn contour_diagnostics(state: &Field2D, n_angles: usize) -> ContourDiagnostics {
    let n = state.n;
    let h = state.h();
    let vmax = state.v.iter().fold(0.0f64, |a, &x| a.max(x));
    let level = 0.5 * vmax;
    let r_max = 0.5 * state.l - 2.0 * h;
    let sample = |x: f64, y: f64| -> f64 {
        let fi = (x + 0.5 * state.l) / h - 0.5;
        let fj = (y + 0.5 * state.l) / h - 0.5;
        let i0 = (fi.floor() as isize).clamp(0, n as isize - 2) as usize;
        let j0 = (fj.floor() as isize).clamp(0, n as isize - 2) as usize;
        let tx = (fi - i0 as f64).clamp(0.0, 1.0);
        let ty = (fj - j0 as f64).clamp(0.0, 1.0);
        state.v[i0 * n + j0] * (1.0 - tx) * (1.0 - ty)
            + state.v[(i0 + 1) * n + j0] * tx * (1.0 - ty)
            + state.v[i0 * n + j0 + 1] * (1.0 - tx) * ty
            + state.v[(i0 + 1) * n + j0 + 1] * tx * ty
    };
    let mut rho = vec![f64::NAN; n_angles];
    let mut star = true;
    for (k, r) in rho.iter_mut().enumerate() {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
        let (c, s) = (th.cos(), th.sin());
        let mut crossings = 0usize;
        let mut prev = sample(0.25 * h * c, 0.25 * h * s) - level;
        let mut rr = 0.25 * h;
        while rr < r_max {
            let rn = rr + 0.5 * h;
            let val = sample(rn * c, rn * s) - level;
            if prev * val < 0.0 {
                if crossings == 0 {
                    let t = prev / (prev - val);
                    *r = rr + t * 0.5 * h;
                }
                crossings += 1;
            }
            prev = val;
            rr = rn;
        }
        if crossings != 1 {
            star = false;
        }
    }
    let defined: Vec<f64> = rho.iter().copied().filter(|x| x.is_finite()).collect();
    let mean_radius = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    // angular Fourier amplitudes (NaN rays replaced by the mean so a
    // post-fingering frame still yields finite numbers)
    let mut buf: Vec<Complex64> = rho
        .iter()
        .map(|&x| Complex64::new(if x.is_finite() { x } else { mean_radius }, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_angles);
    fft.process(&mut buf);
    let amplitudes: Vec<f64> = (0..=32.min(n_angles / 2))
        .map(|l| buf[l].norm() / n_angles as f64)
        .collect();
    ContourDiagnostics {
        t: state.t,
        rho,
        star_shaped: star,
        amplitudes,
        mean_radius,
    }
}

/// Per-mode exponential growth rate fitted to log |rho_hat_l(t)|.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthRate {
    pub ell: usize,
    pub rate: f64,
    /// RMS residual of the linear fit in log space.
    pub fit_residual: f64,
}

/// Least-squares exponential rates over snapshots inside the linear window
/// (all non-axisymmetric amplitudes below 5% of the mean radius).
pub fn growth_rates(diags: &[ContourDiagnostics], l_max: usize) -> Result<Vec<GrowthRate>> {
    if diags.len() < 5 {
        return Err(Error::RegimeExceeded(format!(
            "need >= 5 snapshots, got {}",
            diags.len()
        )));
    }
    for d in diags {
        let amp_max = d.amplitudes.iter().skip(2).fold(0.0f64, |a, &x| a.max(x));
        if !d.mean_radius.is_finite() || amp_max > 0.05 * d.mean_radius {
            return Err(Error::RegimeExceeded(format!(
                "amplitudes leave the linear window at t = {}",
                d.t
            )));
        }
    }
    let mut out = Vec::new();
    for l in 1..=l_max {
        let pts: Vec<(f64, f64)> = diags
            .iter()
            .filter(|d| d.amplitudes[l] > 0.0)
            .map(|d| (d.t, d.amplitudes[l].ln()))
            .collect();
        if pts.len() < 5 {
            continue;
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-30 {
            continue;
        }
        let slope = (n * sxy - sx * sy) / denom;
        let icept = (sy - slope * sx) / n;
        let res = (pts
            .iter()
            .map(|p| (p.1 - slope * p.0 - icept).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        out.push(GrowthRate {
            ell: l,
            rate: slope,
            fit_residual: res,
        });
    }
    Ok(out)
}
