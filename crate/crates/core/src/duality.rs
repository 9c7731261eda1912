//! Per-mode scattering eigenvalues `z_l(k)`, their passages through `z = 1`,
//! half-circle censuses and the per-mode factorization identities.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{Dimension, RadialMedium};
use crate::radial::{self, BoundaryPair, Problem};
use crate::roots;
use crate::specfun;

/// Phase step between adjacent trajectory samples that triggers bisection.
const MAX_PHASE_STEP: f64 = 0.3;

/// Relative sample spacing below which the trajectory is not refined further.
const MIN_SPACING: f64 = 1e-12;

/// `|d arg z / dk| · k`, relative to the phase excursion at `k (1 ± 0.1)`,
/// below which a passage through `z = 1` is stationary.
const STATIONARY_LEVEL: f64 = 1e-8;

/// Relative trace size below which a DtN ratio is treated as a pole.
const RATIO_POLE: f64 = 1e-8;

/// Mode-expansion constant of the factorization per dimension, fixed by one
/// calibration against the matching coefficient (see [`calibrate`]).
pub const FACTORIZATION_CALIBRATION: [f64; 2] = [1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterCoeff {
    pub z: Complex64,
    /// `k H'(ka) v(a) − H(ka) v'(a)`.
    pub w: Complex64,
    pub mode: u32,
    pub k: f64,
    /// Size of the terms cancelling in `Re w`.
    re_scale: f64,
}

impl ScatterCoeff {
    /// Principal `arg z = 2 atan(Re w / Im w)`, accurate even when `z` is
    /// within rounding of 1.
    pub fn phase(&self) -> f64 {
        2.0 * (self.w.re / self.w.im).atan()
    }

    /// Sign of `Im z` from the signs of `Re w` and `Im w`, so it survives
    /// `z` being within rounding of 1; 0 when `Re w` is below resolution.
    pub fn half_circle(&self) -> i32 {
        if self.w.re.abs() <= 64.0 * f64::EPSILON * self.re_scale || self.w.im == 0.0 {
            0
        } else {
            (self.w.re.signum() * self.w.im.signum()) as i32
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(k))
    }
}

pub fn scattering_coefficient(medium: &RadialMedium, l: u32, k: f64) -> Result<ScatterCoeff> {
    check_k(k)?;
    let v = radial::boundary_data(medium, Problem::Medium, l, k * k)?;
    let h = radial::hankel(medium.dimension(), l, k * medium.outer_radius())?;
    let w = k * h.hp * v.value - h.h * v.derivative;
    if !(w.is_finite() && w != Complex64::new(0.0, 0.0)) {
        return Err(Error::Range {
            order: l,
            x: k * medium.outer_radius(),
        });
    }
    Ok(ScatterCoeff {
        z: -w.conj() / w,
        w,
        mode: l,
        k,
        re_scale: (k * h.hp.re * v.value).abs() + (h.h.re * v.derivative).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub k: f64,
    pub re_z: f64,
    pub im_z: f64,
    /// Continuously unwrapped argument.
    pub arg_z: f64,
}

struct Sample {
    k: f64,
    z: Complex64,
    /// `arg w`; `arg z = π − 2 arg w`.
    theta: f64,
    phase: f64,
}

fn sample(medium: &RadialMedium, l: u32, k: f64) -> Result<Sample> {
    let c = scattering_coefficient(medium, l, k)?;
    Ok(Sample {
        k,
        z: c.z,
        theta: c.w.arg(),
        phase: c.phase(),
    })
}

fn wrap(x: f64) -> f64 {
    let tau = 2.0 * PI;
    x - tau * (x / tau).round()
}

/// `z_l` on `[k0, k1]` with unwrapped argument.
///
/// Starts from `samples` equispaced points and bisects every gap where
/// `arg z` moves by more than 0.3 rad. The unwrapping follows `arg w`, whose
/// steps are half as large, so a full turn of `z` between two samples is
/// still seen.
pub fn trace_trajectory(
    medium: &RadialMedium,
    l: u32,
    window: (f64, f64),
    samples: usize,
) -> Result<Vec<TrajectoryPoint>> {
    let (k0, k1) = window;
    check_k(k0)?;
    if !(k1 > k0 && k1.is_finite()) || samples < 2 {
        return Err(Error::Domain(k1));
    }
    let mut pending = (1..samples)
        .rev()
        .map(|i| k0 + (k1 - k0) * i as f64 / (samples - 1) as f64)
        .map(|k| sample(medium, l, k))
        .collect::<Result<Vec<_>>>()?;

    let first = sample(medium, l, k0)?;
    let mut theta = first.theta;
    let mut out = vec![point(&first, first.phase)];
    let mut prev = first;
    while let Some(s) = pending.pop() {
        let delta = wrap(s.theta - prev.theta);
        if 2.0 * delta.abs() > MAX_PHASE_STEP {
            if s.k - prev.k > MIN_SPACING * s.k {
                let mid = sample(medium, l, 0.5 * (prev.k + s.k))?;
                pending.push(s);
                pending.push(mid);
                continue;
            }
            if delta.abs() >= FRAC_PI_2 {
                return Err(Error::UnwrapAmbiguity(s.k));
            }
        }
        theta += delta;
        let coarse = PI - 2.0 * theta;
        let arg = s.phase + 2.0 * PI * ((coarse - s.phase) / (2.0 * PI)).round();
        out.push(point(&s, arg));
        prev = s;
    }
    Ok(out)
}

fn point(s: &Sample, arg: f64) -> TrajectoryPoint {
    TrajectoryPoint {
        k: s.k,
        re_z: s.z.re,
        im_z: s.z.im,
        arg_z: arg,
    }
}

/// `Re w / |w|`, which vanishes exactly where `z = 1`.
fn unit_defect(medium: &RadialMedium, l: u32, k: f64) -> Result<f64> {
    let c = scattering_coefficient(medium, l, k)?;
    Ok(c.w.re / c.w.norm())
}

/// Wavenumbers in the window where the trajectory passes through `z = 1`,
/// located from the unwrapped argument and refined on `Re w`.
pub fn unit_crossings(
    medium: &RadialMedium,
    l: u32,
    window: (f64, f64),
    samples: usize,
) -> Result<Vec<f64>> {
    let traj = trace_trajectory(medium, l, window, samples)?;
    let tau = 2.0 * PI;
    let mut out = Vec::new();
    for pair in traj.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let m = (0.5 * (p.arg_z + q.arg_z) / tau).round() * tau;
        let (fp, fq) = (p.arg_z - m, q.arg_z - m);
        if fp == 0.0 && !out.is_empty() {
            continue;
        }
        if fp == 0.0 || fq == 0.0 || fp.signum() != fq.signum() {
            let g = |k: f64| unit_defect(medium, l, k);
            let (gp, gq) = (g(p.k)?, g(q.k)?);
            if gp.signum() != gq.signum() || gp == 0.0 || gq == 0.0 {
                out.push(roots::refine(g, p.k, q.k, gp, gq, 1e-14 * q.k)?);
            }
        }
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * a.abs());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Clockwise,
    Counterclockwise,
    /// `arg z` has a critical point at the passage.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub k_i: f64,
    pub mode: u32,
    /// Direction of motion as `k` increases.
    pub direction: Direction,
    /// `+1` for clockwise, `−1` counterclockwise, 0 when stationary.
    pub sigma: i32,
    /// `d arg z / dk` from `2 (d Re w / dk) / Im w`.
    pub arg_slope: f64,
}

impl CrossingEvent {
    /// The same passage seen with `k` decreasing.
    pub fn reversed(&self) -> CrossingEvent {
        let direction = match self.direction {
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
            Direction::Stationary => Direction::Stationary,
        };
        CrossingEvent {
            direction,
            arg_slope: -self.arg_slope,
            ..*self
        }
    }
}

fn arg_slope(medium: &RadialMedium, l: u32, k: f64) -> Result<f64> {
    let h = 1e-6 * k;
    let c = scattering_coefficient(medium, l, k)?;
    let up = scattering_coefficient(medium, l, k + h)?.w;
    let down = scattering_coefficient(medium, l, k - h)?.w;
    let scale = c.w.norm();
    let da = (up.re / up.norm() - down.re / down.norm()) * scale / (2.0 * h);
    Ok(2.0 * da / c.w.im)
}

/// Direction of the passage of `z_l` through 1 at `k_i`.
///
/// The argument is sampled at `k_i ± h`, `h = 1e-5 k_i`, and compared with
/// the sign of `2 (d Re w/dk) / Im w`; on disagreement `h` is shrunk tenfold
/// up to three times.
pub fn classify_crossing(medium: &RadialMedium, l: u32, k_i: f64) -> Result<CrossingEvent> {
    check_k(k_i)?;
    let slope = arg_slope(medium, l, k_i)?;
    let event = |direction, sigma| CrossingEvent {
        k_i,
        mode: l,
        direction,
        sigma,
        arg_slope: slope,
    };
    if !slope.is_finite() {
        return Err(Error::SlopeDisagreement(k_i));
    }
    let excursion = [0.9, 1.1]
        .iter()
        .map(|&c| scattering_coefficient(medium, l, c * k_i).map(|s| s.phase().abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::MIN_POSITIVE, f64::max);
    if slope.abs() * k_i < STATIONARY_LEVEL * excursion {
        return Ok(event(Direction::Stationary, 0));
    }
    let mut h = 1e-5 * k_i;
    for _ in 0..4 {
        let zp = scattering_coefficient(medium, l, k_i + h)?.phase();
        let zm = scattering_coefficient(medium, l, k_i - h)?.phase();
        let side = wrap(zp - zm);
        if side != 0.0 && side.signum() == slope.signum() {
            return Ok(if side < 0.0 {
                event(Direction::Clockwise, 1)
            } else {
                event(Direction::Counterclockwise, -1)
            });
        }
        h *= 0.1;
    }
    Err(Error::SlopeDisagreement(k_i))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub k: f64,
    pub l_max: u32,
    /// Modes with `Im z_l > 0`, weighted by angular multiplicity.
    pub count_upper: u64,
    pub count_lower: u64,
    /// Common sign of `arg z_l` over the three top modes, 0 if mixed.
    pub tail_sign: i32,
}

/// Smallest `l_max` the census is meant for at wavenumber `k`.
pub fn census_floor(medium: &RadialMedium, k: f64) -> u32 {
    (3.0 * k * medium.outer_radius() * medium.n_max().sqrt().max(1.0)).ceil() as u32
}

pub fn halfcircle_census(medium: &RadialMedium, k: f64, l_max: u32) -> Result<Census> {
    check_k(k)?;
    let dim = medium.dimension();
    let sides = (0..=l_max)
        .into_par_iter()
        .map(|l| scattering_coefficient(medium, l, k).map(|c| c.half_circle()))
        .collect::<Result<Vec<_>>>()?;
    let mut census = Census {
        k,
        l_max,
        count_upper: 0,
        count_lower: 0,
        tail_sign: 0,
    };
    for (l, &s) in sides.iter().enumerate() {
        let m = dim.multiplicity(l as u32) as u64;
        match s {
            1 => census.count_upper += m,
            -1 => census.count_lower += m,
            _ => {}
        }
    }
    let top = &sides[sides.len().saturating_sub(3)..];
    if top.iter().all(|&s| s == top[0]) {
        census.tail_sign = top[0];
    }
    Ok(census)
}

fn dtn_ratio(pair: &BoundaryPair) -> Result<f64> {
    if pair.value.abs() < RATIO_POLE * pair.norm() {
        return Err(Error::NearPole(pair.lambda));
    }
    Ok(pair.derivative / pair.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationCheck {
    pub z_matching: Complex64,
    pub z_factorized: Complex64,
    pub residual: f64,
}

/// `Λ⁰ − Λⁿ`, `Λ⁰ − Λᵒᵘᵗ`, `Λⁿ − Λᵒᵘᵗ` and the squared mode weight
/// `|c_d J_l(ka)|²` of the plane-wave trace.
fn factor_terms(medium: &RadialMedium, l: u32, k: f64) -> Result<(Complex64, f64)> {
    let dim = medium.dimension();
    let a = medium.outer_radius();
    let lambda = k * k;
    let l0 = dtn_ratio(&radial::boundary_data(medium, Problem::Free, l, lambda)?)?;
    let ln = dtn_ratio(&radial::boundary_data(medium, Problem::Medium, l, lambda)?)?;
    let h = radial::hankel(dim, l, k * a)?;
    let lo = k * h.log_derivative();
    let x = (l0 - lo) * (l0 - ln) / (ln - lo);
    let (j, c) = match dim {
        Dimension::Two => (specfun::cyl_bessel(l, k * a)?.j, 2.0 * PI),
        Dimension::Three => (specfun::sph_bessel(l, k * a)?.j, 4.0 * PI),
    };
    Ok((x, (c * j).powi(2)))
}

/// `2ik ᾱ F_l` without the calibration constant.
fn factorized_increment(medium: &RadialMedium, l: u32, k: f64) -> Result<Complex64> {
    let dim = medium.dimension();
    let d = dim.as_f64();
    let a = medium.outer_radius();
    let (x, weight) = factor_terms(medium, l, k)?;
    let i = Complex64::i();
    let alpha = (Complex64::new(k / (2.0 * PI), 0.0) / i).powf((d - 3.0) / 2.0) / (4.0 * PI);
    let gamma = match dim {
        Dimension::Two => Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt(),
        Dimension::Three => Complex64::new(1.0 / (4.0 * PI), 0.0),
    };
    let f = gamma * weight * a.powf(d - 1.0) * x;
    Ok(2.0 * i * k * alpha.conj() * f)
}

fn calibration_index(dim: Dimension) -> usize {
    match dim {
        Dimension::Two => 0,
        Dimension::Three => 1,
    }
}

/// The constant that makes the factorized coefficient match at `(l, k)`.
pub fn calibrate(medium: &RadialMedium, l: u32, k: f64) -> Result<Complex64> {
    let z = scattering_coefficient(medium, l, k)?.z;
    Ok((z - 1.0) / factorized_increment(medium, l, k)?)
}

/// `|z_factorized − z_matching|` of the mode, with `z_factorized` built from
/// `(Λ⁰ − Λᵒᵘᵗ)(Λⁿ − Λᵒᵘᵗ)⁻¹(Λ⁰ − Λⁿ)` and the frozen calibration.
pub fn factorization_check(medium: &RadialMedium, l: u32, k: f64) -> Result<FactorizationCheck> {
    check_k(k)?;
    let z_matching = scattering_coefficient(medium, l, k)?.z;
    let c = FACTORIZATION_CALIBRATION[calibration_index(medium.dimension())];
    let z_factorized = 1.0 + c * factorized_increment(medium, l, k)?;
    Ok(FactorizationCheck {
        z_matching,
        z_factorized,
        residual: (z_factorized - z_matching).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhatCheck {
    pub fhat: Complex64,
    /// `R₁ + iI` from the closed form.
    pub smooth: Complex64,
    pub r_inverse: f64,
    /// Relative residual of `F̂ = R₁ + 1/r + iI`.
    pub residual: f64,
    pub imag: f64,
}

/// Checks `F̂_l = R₁,ₗ + 1/r_l + i I_l` with every term written through the
/// boundary pairs, so no interior DtN value is ever formed.
pub fn fhat_decomposition_check(
    medium: &RadialMedium,
    l: u32,
    lambda: f64,
    t: f64,
) -> Result<FhatCheck> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(lambda));
    }
    let k = lambda.sqrt();
    let u = radial::boundary_data(medium, Problem::Free, l, lambda)?;
    let v = radial::boundary_data(medium, Problem::Medium, l, lambda)?;
    let hp = radial::hankel(medium.dimension(), l, k * medium.outer_radius())?;
    let (h, dh) = (hp.h, k * hp.hp);
    let (u0, u1, v0, v1) = (u.value, u.derivative, v.value, v.derivative);
    let d = u1 * v0 - u0 * v1;
    if d.abs() < 1e-12 {
        return Err(Error::NearPole(lambda));
    }
    let gv = v1 - t * v0;
    let out = v1 * h - v0 * dh;
    let fhat = gv * gv * (h * u1 - u0 * dh) / (out * d);
    let go = dh - t * h;
    let smooth = go / h + go * go * v0 / (h * out);
    let r_inverse = gv * (u1 - t * u0) / d;
    let scale = fhat.norm().max(smooth.norm()).max(r_inverse.abs());
    Ok(FhatCheck {
        fhat,
        smooth,
        r_inverse,
        residual: (fhat - smooth - r_inverse).norm() / scale,
        imag: fhat.im,
    })
}
