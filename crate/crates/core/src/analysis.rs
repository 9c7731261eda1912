//! ITE scan with all three signs filled in.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality;
use crate::error::{Error, Result};
use crate::flow;
use crate::ite::{self, IteOptions, IteRecord, IteScan};
use crate::medium::RadialMedium;
use crate::signature;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SigmaIssues {
    /// Records whose trajectory sign could not be settled.
    pub slope_disagreement: Vec<f64>,
    pub unresolved_signature: Vec<f64>,
    /// `t` values moved away from an impedance eigenvalue at an ITE.
    pub t_shifted: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub scan: IteScan,
    pub issues: SigmaIssues,
}

impl Analysis {
    pub fn records(&self) -> &[IteRecord] {
        &self.scan.records
    }
}

fn flow_sign(medium: &RadialMedium, rec: &IteRecord, t: f64) -> Result<(i32, Option<f64>)> {
    for m in 0..=flow::T_RETRIES {
        let tm = t + flow::T_RETRY_STEP * m as f64;
        match flow::flow_sigma(medium, rec, tm) {
            Ok(s) => return Ok((s.sigma, (m > 0).then_some(tm))),
            Err(Error::UnresolvedEvent { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnresolvedEvent {
        lambda: rec.lambda_t,
        t,
    })
}

/// Fills `sigma_trajectory`, `sigma_flow` and `sigma_signature` of every
/// record. Tangent records get 0 from all three.
pub fn assign_sigmas(
    medium: &RadialMedium,
    records: &mut [IteRecord],
    t: f64,
) -> Result<SigmaIssues> {
    let results = records
        .par_iter()
        .map(|rec| {
            let mut issues = SigmaIssues::default();
            if rec.tangent {
                return Ok(([Some(0); 3], issues));
            }
            let traj = match duality::classify_crossing(medium, rec.mode, rec.lambda_t.sqrt()) {
                Ok(e) => Some(e.sigma),
                Err(Error::SlopeDisagreement(_)) => {
                    issues.slope_disagreement.push(rec.lambda_t);
                    None
                }
                Err(e) => return Err(e),
            };
            let (fs, shifted) = flow_sign(medium, rec, t)?;
            if let Some(tm) = shifted {
                issues.t_shifted.push((rec.lambda_t, tm));
            }
            let sig = signature::signature_integral(medium, rec.mode, rec.lambda_t)?;
            if sig.unresolved {
                issues.unresolved_signature.push(rec.lambda_t);
            }
            Ok(([traj, Some(fs), Some(sig.sigma_signature)], issues))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = SigmaIssues::default();
    for (rec, (s, issues)) in records.iter_mut().zip(results) {
        rec.sigma_trajectory = s[0];
        rec.sigma_flow = s[1];
        rec.sigma_signature = s[2];
        all.slope_disagreement.extend(issues.slope_disagreement);
        all.unresolved_signature.extend(issues.unresolved_signature);
        all.t_shifted.extend(issues.t_shifted);
    }
    Ok(all)
}

pub fn analyze(
    medium: &RadialMedium,
    lambda_max: f64,
    t: f64,
    opts: IteOptions,
) -> Result<Analysis> {
    let mut scan = ite::collect_ites(medium, lambda_max, opts)?;
    let issues = assign_sigmas(medium, &mut scan.records, t)?;
    Ok(Analysis { scan, issues })
}
