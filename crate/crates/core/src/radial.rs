//! Per-mode radial solutions of the free and medium Helmholtz problems.
//!
//! Solutions are kept as coefficients in the local `(J, Y)` basis of each
//! constant-index shell. The medium solution is propagated outward by
//! matching value and derivative at every interface and renormalized after
//! each shell; the final global scale makes the boundary pair unit length.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{BoundaryCondition, Dimension, RadialMedium};
use crate::specfun::{self, HankelPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    /// `n = 1` on the whole ball, no obstacle.
    Free,
    Medium,
}

/// `(value, derivative)` trace of a radial solution at `r = a`, unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPair {
    pub value: f64,
    pub derivative: f64,
    pub problem: Problem,
    pub mode: u32,
    pub lambda: f64,
}

impl BoundaryPair {
    pub fn norm(&self) -> f64 {
        self.value.hypot(self.derivative)
    }

    /// `derivative - t * value`.
    pub fn impedance(&self, t: f64) -> f64 {
        self.derivative - t * self.value
    }
}

/// Regular and irregular radial factors with derivatives in their argument.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Basis {
    pub f: f64,
    pub fp: f64,
    pub g: f64,
    pub gp: f64,
}

pub(crate) fn full_basis(dim: Dimension, l: u32, x: f64) -> Result<Basis> {
    match dim {
        Dimension::Two => {
            let p = specfun::cyl_bessel(l, x)?;
            Ok(Basis {
                f: p.j,
                fp: p.jp,
                g: p.y,
                gp: p.yp,
            })
        }
        Dimension::Three => {
            let p = specfun::sph_bessel(l, x)?;
            Ok(Basis {
                f: p.j,
                fp: p.jp,
                g: p.y,
                gp: p.yp,
            })
        }
    }
}

pub(crate) fn regular_basis(dim: Dimension, l: u32, x: f64) -> Result<(f64, f64)> {
    match dim {
        Dimension::Two => specfun::cyl_j(l, x),
        Dimension::Three => specfun::sph_j(l, x),
    }
}

pub(crate) fn hankel(dim: Dimension, l: u32, x: f64) -> Result<HankelPair> {
    match dim {
        Dimension::Two => specfun::cyl_hankel1(l, x),
        Dimension::Three => specfun::sph_hankel1(l, x),
    }
}

/// `f g' - f' g` of the basis at argument `x`.
pub(crate) fn basis_wronskian(dim: Dimension, x: f64) -> f64 {
    match dim {
        Dimension::Two => 2.0 / (PI * x),
        Dimension::Three => 1.0 / (x * x),
    }
}

/// One shell `lo <= r <= hi` of a solution `A f(kappa r) + B g(kappa r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kappa: f64,
    pub n: f64,
    pub a: f64,
    pub b: f64,
    /// Only the regular factor is present (`b == 0`); evaluated without `g`.
    pub regular: bool,
}

/// A radial solution with one global normalization across all shells.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub dim: Dimension,
    pub mode: u32,
    pub lambda: f64,
    pub problem: Problem,
    pub pieces: Vec<Piece>,
}

impl RadialSolution {
    pub fn inner_radius(&self) -> f64 {
        self.pieces[0].lo
    }

    pub fn outer_radius(&self) -> f64 {
        self.pieces.last().unwrap().hi
    }

    fn piece_for(&self, r: f64) -> Result<&Piece> {
        let lo = self.inner_radius();
        if !(r >= lo * (1.0 - 1e-14)) || r > self.outer_radius() * (1.0 + 1e-14) {
            return Err(Error::Domain(r));
        }
        Ok(self
            .pieces
            .iter()
            .find(|p| r <= p.hi)
            .unwrap_or_else(|| self.pieces.last().unwrap()))
    }

    /// `(v(r), v'(r))`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let p = self.piece_for(r)?;
        eval_piece(self.dim, self.mode, p, r)
    }
}

pub fn eval_piece(dim: Dimension, l: u32, p: &Piece, r: f64) -> Result<(f64, f64)> {
    let x = p.kappa * r;
    if x <= 0.0 {
        // only the regular factor reaches the origin
        let v = if l == 0 { p.a } else { 0.0 };
        return Ok((v, 0.0));
    }
    let (v, dv) = if p.regular {
        let (f, fp) = regular_basis(dim, l, x)?;
        (p.a * f, p.kappa * p.a * fp)
    } else {
        let s = full_basis(dim, l, x)?;
        (p.a * s.f + p.b * s.g, p.kappa * (p.a * s.fp + p.b * s.gp))
    };
    if !(v.is_finite() && dv.is_finite()) {
        return Err(Error::Range { order: l, x });
    }
    Ok((v, dv))
}

fn wavenumber(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(lambda));
    }
    Ok(lambda.sqrt())
}

fn check_mode(l: u32) -> Result<()> {
    if l > specfun::DEFAULT_MAX_ORDER {
        return Err(Error::ModeTooHigh {
            mode: l,
            max: specfun::DEFAULT_MAX_ORDER,
        });
    }
    Ok(())
}

pub(crate) fn regular_direction(dim: Dimension, l: u32, x: f64) -> Result<(f64, f64)> {
    match dim {
        Dimension::Two => specfun::cyl_j_direction(l, x),
        Dimension::Three => specfun::sph_j_direction(l, x),
    }
}

/// Unit `(value, derivative)` of `f(kappa r)`; finite even where `f` underflows.
fn regular_pair(dim: Dimension, l: u32, kappa: f64, r: f64) -> Result<(f64, f64)> {
    let (c, s) = regular_direction(dim, l, kappa * r)?;
    let (p, q) = (c, kappa * s);
    let n = p.hypot(q);
    Ok((p / n, q / n))
}

/// Free solution `f(kr)` scaled to a unit boundary pair. Where `f(ka)`
/// underflows the scale is not representable and evaluation reports a range
/// error; [`boundary_data`] is unaffected.
pub fn free_solution(medium: &RadialMedium, l: u32, lambda: f64) -> Result<RadialSolution> {
    check_mode(l)?;
    let k = wavenumber(lambda)?;
    let a = medium.outer_radius();
    let dim = medium.dimension();
    let (f, fp) = regular_basis(dim, l, k * a)?;
    let norm = f.hypot(k * fp);
    Ok(RadialSolution {
        dim,
        mode: l,
        lambda,
        problem: Problem::Free,
        pieces: vec![Piece {
            lo: 0.0,
            hi: a,
            kappa: k,
            n: 1.0,
            a: 1.0 / norm,
            b: 0.0,
            regular: true,
        }],
    })
}

pub fn medium_solution(medium: &RadialMedium, l: u32, lambda: f64) -> Result<RadialSolution> {
    Ok(propagate(medium, l, lambda)?.0)
}

/// Medium solution with its unit boundary pair.
fn propagate(medium: &RadialMedium, l: u32, lambda: f64) -> Result<(RadialSolution, (f64, f64))> {
    check_mode(l)?;
    let k = wavenumber(lambda)?;
    let dim = medium.dimension();
    let shells = medium.shells();

    let mut pieces = Vec::with_capacity(shells.len());
    let mut norms = Vec::with_capacity(shells.len());
    let mut pair = (0.0, 0.0);
    for (i, &(lo, hi, n)) in shells.iter().enumerate() {
        let kappa = k * n.sqrt();
        if i == 0 && medium.obstacle().is_none() {
            pair = regular_pair(dim, l, kappa, hi)?;
            let (f, fp) = regular_basis(dim, l, kappa * hi)?;
            pieces.push(Piece {
                lo,
                hi,
                kappa,
                n,
                a: 1.0,
                b: 0.0,
                regular: true,
            });
            norms.push(f.hypot(kappa * fp));
            continue;
        }
        let (ca, cb) = if i == 0 {
            let obs = medium.obstacle().unwrap();
            let s = full_basis(dim, l, kappa * obs.r)?;
            let (ca, cb) = match obs.bc {
                BoundaryCondition::Dirichlet => (-s.g, s.f),
                BoundaryCondition::Neumann => (s.gp, -s.fp),
            };
            let m = ca.abs().max(cb.abs());
            (ca / m, cb / m)
        } else {
            let x = kappa * lo;
            let s = full_basis(dim, l, x)?;
            let w = basis_wronskian(dim, x);
            let (p, q) = (pair.0, pair.1 / kappa);
            ((p * s.gp - q * s.g) / w, (q * s.f - p * s.fp) / w)
        };
        let piece = Piece {
            lo,
            hi,
            kappa,
            n,
            a: ca,
            b: cb,
            regular: false,
        };
        let (v, dv) = eval_piece(dim, l, &piece, hi)?;
        let nu = v.hypot(dv);
        if nu == 0.0 {
            return Err(Error::Range {
                order: l,
                x: kappa * hi,
            });
        }
        pair = (v / nu, dv / nu);
        pieces.push(piece);
        norms.push(nu);
    }

    // shell i carries raw coefficients relative to the normalized input pair
    // from shell i-1; fold the scales back from the outside in
    let mut scale = 1.0;
    for i in (0..pieces.len()).rev() {
        scale /= norms[i];
        pieces[i].a *= scale;
        pieces[i].b *= scale;
    }

    let sol = RadialSolution {
        dim,
        mode: l,
        lambda,
        problem: Problem::Medium,
        pieces,
    };
    Ok((sol, pair))
}

pub fn solution(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    lambda: f64,
) -> Result<RadialSolution> {
    match problem {
        Problem::Free => free_solution(medium, l, lambda),
        Problem::Medium => medium_solution(medium, l, lambda),
    }
}

pub fn boundary_data(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    lambda: f64,
) -> Result<BoundaryPair> {
    let (value, derivative) = match problem {
        Problem::Free => {
            check_mode(l)?;
            let k = wavenumber(lambda)?;
            regular_pair(medium.dimension(), l, k, medium.outer_radius())?
        }
        Problem::Medium => propagate(medium, l, lambda)?.1,
    };
    Ok(BoundaryPair {
        value,
        derivative,
        problem,
        mode: l,
        lambda,
    })
}

/// Samples of one globally normalized solution at increasing radii.
pub fn radial_samples(
    medium: &RadialMedium,
    problem: Problem,
    l: u32,
    lambda: f64,
    r_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let sol = solution(medium, problem, l, lambda)?;
    r_grid.iter().map(|&r| sol.eval(r)).collect()
}
