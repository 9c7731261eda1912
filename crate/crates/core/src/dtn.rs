//! Per-mode Dirichlet-to-Neumann values, impedance eigenvalues and the
//! large-mode symbol of the DtN difference.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::RadialMedium;
use crate::quadrature;
use crate::radial::{self, BoundaryPair, Problem};
use crate::roots;

/// `|value| / |pair|` below which the interior DtN value is reported as a pole.
pub const POLE_THRESHOLD: f64 = 1e-11;

/// A finite real value or a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Pole,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Pole => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnValue {
    pub lambda_dtn: Extended,
    pub problem: Problem,
    pub mode: u32,
    pub spectral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutgoingDtn {
    pub value: Complex64,
    pub mode: u32,
    pub k: f64,
}

pub fn dtn_interior(pair: &BoundaryPair) -> DtnValue {
    let lambda_dtn = if pair.value.abs() < POLE_THRESHOLD * pair.norm() {
        Extended::Pole
    } else {
        Extended::Finite(pair.derivative / pair.value)
    };
    DtnValue {
        lambda_dtn,
        problem: pair.problem,
        mode: pair.mode,
        spectral: pair.lambda,
    }
}

/// `k H'(ka) / H(ka)` for the outgoing Hankel factor of the dimension.
pub fn dtn_outgoing(l: u32, k: f64, medium: &RadialMedium) -> Result<OutgoingDtn> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(k));
    }
    let x = k * medium.outer_radius();
    let h = radial::hankel(medium.dimension(), l, x)?;
    // the imaginary part is `W / |H|²`; dividing by the scale twice keeps
    // it out of the overflow of `|H|²`
    let s = h.h.re.abs().max(h.h.im.abs());
    let im = radial::basis_wronskian(medium.dimension(), x) / s / s / (h.h / s).norm_sqr();
    Ok(OutgoingDtn {
        value: k * Complex64::new(h.log_derivative().re, im),
        mode: l,
        k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub mode: u32,
    /// `Λ⁰ − Λⁿ`.
    pub measured: f64,
    /// `λ (n(a) − 1) a / (2l)`.
    pub predicted: f64,
}

impl AsymptoticRow {
    pub fn ratio(&self) -> f64 {
        self.measured / self.predicted
    }
}

pub fn dtn_difference_asymptotic(
    medium: &RadialMedium,
    lambda: f64,
    modes: impl IntoIterator<Item = u32>,
) -> Result<Vec<AsymptoticRow>> {
    let a = medium.outer_radius();
    let contrast = medium.boundary_index() - 1.0;
    modes
        .into_iter()
        .map(|l| {
            let u = radial::boundary_data(medium, Problem::Free, l, lambda)?;
            let v = radial::boundary_data(medium, Problem::Medium, l, lambda)?;
            Ok(AsymptoticRow {
                mode: l,
                measured: u.derivative / u.value - v.derivative / v.value,
                predicted: lambda * contrast * a / (2.0 * l.max(1) as f64),
            })
        })
        .collect()
}

/// `g(λ) = v'(a) − t v(a)` of the unit boundary pair.
pub fn impedance_function(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    t: f64,
    lambda: f64,
) -> Result<f64> {
    Ok(radial::boundary_data(medium, problem, l, lambda)?.impedance(t))
}

/// Zeros of the impedance function on `(lo, hi)`, isolated to `1e-9` in λ.
///
/// The interval is sampled with `step` (default: the medium's scan step) and
/// every sign change is refined. A non-positive `lo` is replaced by a small
/// positive start.
pub fn impedance_zeros(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    t: f64,
    interval: (f64, f64),
    step: Option<f64>,
) -> Result<Vec<f64>> {
    let (lo, hi) = interval;
    let step = step.unwrap_or_else(|| medium.default_grid_step());
    let start = if lo > 0.0 { lo } else { 1e-3 * step.min(hi) };
    let g = |x: f64| impedance_function(medium, problem, l, t, x);

    let n = ((hi - start) / step).ceil().max(1.0) as usize;
    // a leading stretch too evanescent for binary64 holds no zero: there
    // the impedance keeps the sign of `l/a − t`
    let mut grid = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = start + (hi - start) * i as f64 / n as f64;
        match g(x) {
            Ok(v) => {
                grid.push(x);
                values.push(v);
            }
            Err(Error::Range { .. }) if values.is_empty() && i < n => {}
            Err(e) => return Err(e),
        }
    }
    let last = grid.len() - 1;
    for (&x, &v) in [(&grid[0], &values[0]), (&grid[last], &values[last])] {
        if lo > 0.0 && v.abs() < POLE_THRESHOLD {
            return Err(Error::EndpointOnZero(x));
        }
    }
    roots::sign_changes(&values)
        .into_iter()
        .map(|i| roots::refine(g, grid[i], grid[i + 1], values[i], values[i + 1], 1e-11))
        .collect()
}

pub fn impedance_count(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    t: f64,
    interval: (f64, f64),
) -> Result<usize> {
    Ok(impedance_zeros(medium, problem, l, t, interval, None)?.len())
}

/// `1 / (Λ − t) = v / (v' − t v)`.
pub fn inverse_impedance(pair: &BoundaryPair, t: f64) -> f64 {
    pair.value / pair.impedance(t)
}

/// λ-derivative of `1 / (Λ − t)` from Green's formula:
/// `a^{1−d} ∫ n v² r^{d−1} dr / (v'(a) − t v(a))²`.
pub fn green_derivative(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    lambda: f64,
    t: f64,
) -> Result<f64> {
    let sol = radial::solution(medium, problem, l, lambda)?;
    let d = medium.dimension().as_f64();
    let a = medium.outer_radius();
    let mut total = 0.0;
    for p in &sol.pieces {
        let panels = quadrature::panels_for(2.0 * p.kappa, p.hi - p.lo);
        total += quadrature::integrate(p.lo, p.hi, panels, quadrature::NODES, |r| {
            let (v, _) = radial::eval_piece(sol.dim, l, p, r)?;
            Ok(p.n * v * v * r.powf(d - 1.0))
        })?;
    }
    let (v, dv) = sol.eval(a)?;
    let g = dv - t * v;
    Ok(a.powf(1.0 - d) * total / (g * g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{Dimension, Layer};
    use crate::specfun;
    use std::f64::consts::PI;

    fn disk(n: f64) -> RadialMedium {
        RadialMedium::homogeneous(Dimension::Two, 1.0, n).unwrap()
    }

    #[test]
    fn free_mode_zero_small_lambda() {
        let lambda = 1e-6;
        let p = radial::boundary_data(&disk(4.0), Problem::Free, 0, lambda).unwrap();
        let v = dtn_interior(&p).lambda_dtn.finite().unwrap();
        assert!((v / (-lambda / 2.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn free_dirichlet_eigenvalue_is_a_pole() {
        let j0 = 2.404_825_557_695_773;
        let p = radial::boundary_data(&disk(4.0), Problem::Free, 0, j0 * j0).unwrap();
        assert_eq!(dtn_interior(&p).lambda_dtn, Extended::Pole);
    }

    #[test]
    fn unit_index_medium_matches_free_dtn() {
        let m = RadialMedium::homogeneous(Dimension::Two, 1.0, 1.0).unwrap();
        for lambda in [0.5, 13.0, 77.0] {
            let u = radial::boundary_data(&m, Problem::Free, 2, lambda).unwrap();
            let v = radial::boundary_data(&m, Problem::Medium, 2, lambda).unwrap();
            let (a, b) = (
                dtn_interior(&u).lambda_dtn.finite().unwrap(),
                dtn_interior(&v).lambda_dtn.finite().unwrap(),
            );
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn outgoing_values() {
        let m = disk(4.0);
        let o = dtn_outgoing(0, 1.0, &m).unwrap();
        let h = specfun::cyl_hankel1(0, 1.0).unwrap();
        assert!((o.value.im - 2.0 / (PI * h.h.norm_sqr())).abs() < 1e-14);
        let o = dtn_outgoing(50, 1.0, &m).unwrap();
        assert!((o.value.re / -50.0 - 1.0).abs() < 0.05);
        let ball = RadialMedium::homogeneous(Dimension::Three, 1.0, 4.0).unwrap();
        let k = 2.3;
        let o = dtn_outgoing(0, k, &ball).unwrap();
        assert!((o.value - Complex64::new(-1.0, k)).norm() < 1e-13);
    }

    #[test]
    fn dtn_difference_matches_symbol() {
        let rows = dtn_difference_asymptotic(&disk(4.0), 1.0, [100]).unwrap();
        assert!((rows[0].ratio() - 1.0).abs() < 0.02, "{:?}", rows[0]);
        let rows = dtn_difference_asymptotic(&disk(0.25), 3.0, [60, 120]).unwrap();
        for r in rows {
            assert!(r.measured < 0.0);
        }
        let flat = RadialMedium::homogeneous(Dimension::Two, 1.0, 1.0).unwrap();
        for r in dtn_difference_asymptotic(&flat, 2.0, [10, 40]).unwrap() {
            assert!(r.measured.abs() < 1e-12);
        }
    }

    /// Independent count from `k J0'(k) − J0(k)` sampled ten times finer.
    #[test]
    fn impedance_count_matches_dense_oracle() {
        let m = disk(4.0);
        let count = impedance_count(&m, Problem::Free, 0, 1.0, (0.0, 30.0)).unwrap();
        let step = m.default_grid_step() / 10.0;
        let n = (30.0 / step) as usize;
        let mut oracle = 0;
        let mut prev: Option<f64> = None;
        for i in 1..=n {
            let k = (30.0 * i as f64 / n as f64).sqrt();
            let p = specfun::cyl_bessel(0, k).unwrap();
            let g = k * p.jp - p.j;
            if let Some(q) = prev {
                if q.signum() != g.signum() {
                    oracle += 1;
                }
            }
            prev = Some(g);
        }
        assert_eq!(count, oracle);
        assert_eq!(count, 1);
        assert_eq!(
            impedance_count(&m, Problem::Free, 0, 1.0, (0.0, 1.0)).unwrap(),
            0
        );
        let flat =
            RadialMedium::new(Dimension::Two, 1.0, vec![Layer { r: 1.0, n: 1.0 }], None).unwrap();
        for l in 0..4 {
            assert_eq!(
                impedance_count(&flat, Problem::Free, l, 1.0, (0.0, 60.0)).unwrap(),
                impedance_count(&flat, Problem::Medium, l, 1.0, (0.0, 60.0)).unwrap()
            );
        }
    }

    #[test]
    fn endpoint_on_zero_is_rejected() {
        let m = disk(4.0);
        let z = impedance_zeros(&m, Problem::Free, 0, 1.0, (0.0, 30.0), None).unwrap()[0];
        assert!(matches!(
            impedance_count(&m, Problem::Free, 0, 1.0, (z, 30.0)),
            Err(Error::EndpointOnZero(_))
        ));
    }

    #[test]
    fn green_derivative_matches_finite_difference() {
        let m = disk(4.0);
        for (problem, l, lambda) in [
            (Problem::Medium, 0, 3.7),
            (Problem::Free, 3, 20.0),
            (Problem::Medium, 5, 55.0),
        ] {
            let f =
                |x: f64| inverse_impedance(&radial::boundary_data(&m, problem, l, x).unwrap(), 1.0);
            let h = 1e-5 * lambda;
            let fd = (f(lambda + h) - f(lambda - h)) / (2.0 * h);
            let g = green_derivative(&m, problem, l, lambda, 1.0).unwrap();
            assert!(g > 0.0);
            assert!((fd / g - 1.0).abs() < 1e-6, "fd={fd} g={g}");
        }
    }
}
