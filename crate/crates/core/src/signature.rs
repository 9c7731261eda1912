//! Sign of `a = ∫ (U² − n V²) r^{d−1} dr` for the matched eigenpair of an
//! ITE, and agreement of the three signs per record.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ite::IteRecord;
use crate::medium::RadialMedium;
use crate::quadrature;
use crate::radial::{self, RadialSolution};

/// Matching residual allowed at a refined ITE (unit pairs).
const MATCH_TOLERANCE: f64 = 1e-7;

/// Trace size below which both boundary values count as vanishing.
const SINGULAR_TRACE: f64 = 1e-6;

/// `U = A u`, `V = B v` with equal Cauchy data on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub mode: u32,
    pub lambda_t: f64,
    pub u: RadialSolution,
    pub v: RadialSolution,
    pub scale_u: f64,
    pub scale_v: f64,
    /// Both traces vanish; the scaling comes from the normal derivatives.
    pub singular: bool,
    pub value_residual: f64,
    pub derivative_residual: f64,
}

impl EigenPair {
    pub fn u_at(&self, r: f64) -> Result<f64> {
        Ok(self.scale_u * self.u.eval(r)?.0)
    }

    pub fn v_at(&self, r: f64) -> Result<f64> {
        Ok(self.scale_v * self.v.eval(r)?.0)
    }
}

pub fn eigenpair_normalized(medium: &RadialMedium, l: u32, lambda_t: f64) -> Result<EigenPair> {
    let u = radial::free_solution(medium, l, lambda_t)?;
    let v = radial::medium_solution(medium, l, lambda_t)?;
    let a = medium.outer_radius();
    let (u0, u1) = u.eval(a)?;
    let (v0, v1) = v.eval(a)?;
    let singular = u0.abs() < SINGULAR_TRACE && v0.abs() < SINGULAR_TRACE;
    let (scale_u, scale_v) = if singular { (v1, u1) } else { (v0, u0) };
    let value_residual = (scale_u * u0 - scale_v * v0).abs();
    let derivative_residual = (scale_u * u1 - scale_v * v1).abs();
    if !singular && derivative_residual > MATCH_TOLERANCE {
        return Err(Error::Unresolved(lambda_t));
    }
    Ok(EigenPair {
        mode: l,
        lambda_t,
        u,
        v,
        scale_u,
        scale_v,
        singular,
        value_residual,
        derivative_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureResult {
    pub lambda_t: f64,
    pub mode: u32,
    pub a_value: f64,
    pub sigma_signature: i32,
    pub quadrature_error_estimate: f64,
    pub unresolved: bool,
    pub singular: bool,
}

/// `∫ (U² − n V²) r^{d−1} dr` with `nodes` per panel, and `∫ U² + n V²`
/// as its scale; `U` covers the whole ball, `V` only the shells of the medium.
fn integral(pair: &EigenPair, nodes: usize) -> Result<(f64, f64)> {
    let d = pair.u.dim.as_f64();
    let mut total = 0.0;
    let mut size = 0.0;
    for (sol, scale, sign) in [(&pair.u, pair.scale_u, 1.0), (&pair.v, pair.scale_v, -1.0)] {
        for p in &sol.pieces {
            let panels = quadrature::panels_for(2.0 * p.kappa, p.hi - p.lo);
            let s = quadrature::integrate(p.lo, p.hi, panels, nodes, |r| {
                let (f, _) = radial::eval_piece(sol.dim, sol.mode, p, r)?;
                Ok(p.n * f * f * r.powf(d - 1.0))
            })?;
            total += sign * scale * scale * s;
            size += scale * scale * s;
        }
    }
    Ok((total, size))
}

pub fn signature_integral(medium: &RadialMedium, l: u32, lambda_t: f64) -> Result<SignatureResult> {
    let pair = eigenpair_normalized(medium, l, lambda_t)?;
    let (coarse, _) = integral(&pair, quadrature::NODES)?;
    let (fine, size) = integral(&pair, 2 * quadrature::NODES)?;
    let err = (fine - coarse).abs();
    let unresolved = fine.abs() <= (10.0 * err).max(1e-12 * size);
    Ok(SignatureResult {
        lambda_t,
        mode: l,
        a_value: fine,
        sigma_signature: if unresolved { 0 } else { fine.signum() as i32 },
        quadrature_error_estimate: err,
        unresolved,
        singular: pair.singular,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub lambda_t: f64,
    pub mode: u32,
    pub agree_all: bool,
    /// Tangent or singular records are reported but not checked.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub rows: Vec<AgreementRow>,
    pub checked: usize,
    pub agreed: usize,
    pub excluded: usize,
}

impl AgreementReport {
    pub fn all_agree(&self) -> bool {
        self.checked == self.agreed
    }
}

pub fn agreement_check(records: &[IteRecord]) -> AgreementReport {
    let rows: Vec<AgreementRow> = records
        .iter()
        .map(|r| {
            let s = [r.sigma_trajectory, r.sigma_flow, r.sigma_signature];
            let excluded = r.tangent || r.is_singular;
            AgreementRow {
                lambda_t: r.lambda_t,
                mode: r.mode,
                agree_all: s[0].is_some() && s[0] != Some(0) && s.iter().all(|&x| x == s[0]),
                excluded,
            }
        })
        .collect();
    let checked: Vec<&AgreementRow> = rows.iter().filter(|r| !r.excluded).collect();
    AgreementReport {
        checked: checked.len(),
        agreed: checked.iter().filter(|r| r.agree_all).count(),
        excluded: rows.len() - checked.len(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow;
    use crate::ite::{self, IteOptions};
    use crate::medium::Dimension;

    #[test]
    fn disk_signs_are_negative_and_converged() {
        let m = RadialMedium::homogeneous(Dimension::Two, 1.0, 4.0).unwrap();
        let scan = ite::collect_ites(&m, 100.0, IteOptions::default()).unwrap();
        assert!(!scan.records.is_empty());
        for rec in &scan.records {
            let pair = eigenpair_normalized(&m, rec.mode, rec.lambda_t).unwrap();
            assert!(pair.value_residual < 1e-7 && pair.derivative_residual < 1e-7);
            let s = signature_integral(&m, rec.mode, rec.lambda_t).unwrap();
            assert_eq!(s.sigma_signature, -1);
            assert!(s.quadrature_error_estimate < 1e-8 * s.a_value.abs());
        }
    }

    /// `sin(kr)/r` and `sin(2kr)/r` with matched traces.
    #[test]
    fn ball_mode_zero_closed_form() {
        let m = RadialMedium::homogeneous(Dimension::Three, 1.0, 4.0).unwrap();
        let scan = ite::collect_ites(&m, 60.0, IteOptions::default()).unwrap();
        let rec = scan.records.iter().find(|r| r.mode == 0).unwrap();
        let pair = eigenpair_normalized(&m, 0, rec.lambda_t).unwrap();
        let k = rec.lambda_t.sqrt();
        let c_u = pair.u_at(0.4).unwrap() / ((k * 0.4).sin() / 0.4);
        let c_v = pair.v_at(0.4).unwrap() / ((2.0 * k * 0.4).sin() / 0.4);
        for r in [0.1, 0.55, 0.9, 1.0] {
            assert!((pair.u_at(r).unwrap() - c_u * (k * r).sin() / r).abs() < 1e-10);
            assert!((pair.v_at(r).unwrap() - c_v * (2.0 * k * r).sin() / r).abs() < 1e-10);
        }
        assert!((pair.u_at(1.0).unwrap() - pair.v_at(1.0).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn bridge_to_flow_slope() {
        let m = RadialMedium::homogeneous(Dimension::Two, 1.0, 0.25).unwrap();
        let scan = ite::collect_ites(&m, 120.0, IteOptions::default()).unwrap();
        for rec in &scan.records {
            let fs = flow::flow_sigma(&m, rec, 1.0).unwrap();
            let s = signature_integral(&m, rec.mode, rec.lambda_t).unwrap();
            assert_eq!(fs.slope.signum(), -s.a_value.signum());
        }
    }

    #[test]
    fn rescaling_keeps_sign() {
        let m = RadialMedium::homogeneous(Dimension::Two, 1.0, 4.0).unwrap();
        let scan = ite::collect_ites(&m, 40.0, IteOptions::default()).unwrap();
        let rec = &scan.records[0];
        let mut pair = eigenpair_normalized(&m, rec.mode, rec.lambda_t).unwrap();
        let (a, _) = integral(&pair, 64).unwrap();
        pair.scale_u *= -3.0;
        pair.scale_v *= -3.0;
        let (b, _) = integral(&pair, 64).unwrap();
        assert!((b / a - 9.0).abs() < 1e-10);
    }

    #[test]
    fn agreement_report_policy() {
        let base = IteRecord {
            lambda_t: 5.0,
            mode: 0,
            angular_multiplicity: 1,
            is_singular: false,
            tangent: false,
            group: 0,
            slope: 1.0,
            sigma_trajectory: Some(-1),
            sigma_flow: Some(-1),
            sigma_signature: Some(-1),
        };
        let bad = IteRecord {
            sigma_flow: Some(1),
            ..base.clone()
        };
        let tangent = IteRecord {
            tangent: true,
            sigma_trajectory: Some(0),
            ..base.clone()
        };
        let rep = agreement_check(&[base, bad, tangent]);
        assert_eq!((rep.checked, rep.agreed, rep.excluded), (2, 1, 1));
        assert!(!rep.all_agree());
    }
}
