//! Signed counting function of the ITEs and its Weyl prediction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ite::IteRecord;
use crate::medium::RadialMedium;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSource {
    Trajectory,
    Flow,
    Signature,
}

impl SigmaSource {
    pub fn of(self, rec: &IteRecord) -> Option<i32> {
        match self {
            SigmaSource::Trajectory => rec.sigma_trajectory,
            SigmaSource::Flow => rec.sigma_flow,
            SigmaSource::Signature => rec.sigma_signature,
        }
    }
}

/// `S(λ) = Σ_{λᵢ < λ} σᵢ multᵢ` as sorted jumps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignedCount {
    pub jumps: Vec<(f64, i64)>,
}

impl SignedCount {
    pub fn eval(&self, lambda: f64) -> i64 {
        self.jumps
            .iter()
            .take_while(|j| j.0 < lambda)
            .map(|j| j.1)
            .sum()
    }

    /// Number of eigenfunctions below `lambda`, regardless of sign.
    pub fn unsigned(&self, records: &[IteRecord], lambda: f64) -> u64 {
        records
            .iter()
            .filter(|r| r.lambda_t < lambda)
            .map(|r| r.angular_multiplicity as u64)
            .sum()
    }
}

pub fn signed_counting(records: &[IteRecord], source: SigmaSource) -> Result<SignedCount> {
    let mut jumps = records
        .iter()
        .map(|r| {
            let s = source.of(r).ok_or(Error::MissingSigma(r.lambda_t))?;
            Ok((r.lambda_t, s as i64 * r.angular_multiplicity as i64))
        })
        .collect::<Result<Vec<_>>>()?;
    jumps.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(SignedCount { jumps })
}

/// `W(λ) = ω_d (2π)^{−d} γ λ^{d/2}`.
pub fn weyl_prediction(medium: &RadialMedium, lambda: f64) -> Result<f64> {
    let dim = medium.dimension();
    let d = dim.as_f64();
    let c = dim.unit_ball_volume() / (2.0 * std::f64::consts::PI).powf(d);
    Ok(c * medium.gamma()? * lambda.max(0.0).powf(d / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub lambda_grid: Vec<f64>,
    pub signed_count: Vec<i64>,
    pub prediction: Vec<f64>,
    /// `S/W`, absent where `W = 0`.
    pub ratio: Vec<Option<f64>>,
    /// Least-squares slope of `log |S|` against `log λ` over the top decade.
    pub fitted_exponent: f64,
    pub source: SigmaSource,
    pub unsigned_count: u64,
}

impl WeylReport {
    pub fn final_ratio(&self) -> Option<f64> {
        self.ratio.last().copied().flatten()
    }

    pub fn within(&self, band: (f64, f64)) -> bool {
        self.final_ratio()
            .is_some_and(|r| r >= band.0 && r <= band.1)
    }
}

/// Report on `points` equispaced grid values up to `lambda_max`.
pub fn report(
    medium: &RadialMedium,
    records: &[IteRecord],
    lambda_max: f64,
    source: SigmaSource,
    points: usize,
) -> Result<WeylReport> {
    if !(lambda_max > 0.0) || points < 2 {
        return Err(Error::Domain(lambda_max));
    }
    let s = signed_counting(records, source)?;
    let lambda_grid: Vec<f64> = (1..=points)
        .map(|i| lambda_max * i as f64 / points as f64)
        .collect();
    // ITEs at λ_max count toward S(λ_max)
    let at = |x: f64| {
        if x == lambda_max {
            x * (1.0 + 1e-15)
        } else {
            x
        }
    };
    let signed_count: Vec<i64> = lambda_grid.iter().map(|&x| s.eval(at(x))).collect();
    let prediction = lambda_grid
        .iter()
        .map(|&x| weyl_prediction(medium, x))
        .collect::<Result<Vec<_>>>()?;
    let ratio = signed_count
        .iter()
        .zip(&prediction)
        .map(|(&c, &w)| (w != 0.0).then(|| c as f64 / w))
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = lambda_grid
        .iter()
        .zip(&signed_count)
        .filter(|(&x, &c)| x >= 0.1 * lambda_max && c != 0)
        .map(|(&x, &c)| (x.ln(), (c.abs() as f64).ln()))
        .unzip();
    let fitted_exponent = slope(&xs, &ys);
    Ok(WeylReport {
        lambda_grid,
        signed_count,
        prediction,
        ratio,
        fitted_exponent,
        source,
        unsigned_count: s.unsigned(records, at(lambda_max)),
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{BoundaryCondition, Dimension, Layer, Obstacle};

    fn record(lambda: f64, sigma: i32, mult: u32) -> IteRecord {
        IteRecord {
            lambda_t: lambda,
            mode: 1,
            angular_multiplicity: mult,
            is_singular: false,
            tangent: false,
            group: 0,
            slope: 1.0,
            sigma_trajectory: Some(sigma),
            sigma_flow: Some(sigma),
            sigma_signature: None,
        }
    }

    #[test]
    fn step_function() {
        let empty = signed_counting(&[], SigmaSource::Flow).unwrap();
        assert_eq!(empty.eval(1e6), 0);
        let s = signed_counting(&[record(10.0, -1, 2)], SigmaSource::Trajectory).unwrap();
        assert_eq!(s.eval(10.0), 0);
        assert_eq!(s.eval(10.5), -2);
        assert!(matches!(
            signed_counting(&[record(10.0, -1, 2)], SigmaSource::Signature),
            Err(Error::MissingSigma(_))
        ));
    }

    #[test]
    fn prediction_values() {
        let m = RadialMedium::homogeneous(Dimension::Two, 1.0, 4.0).unwrap();
        assert!((weyl_prediction(&m, 400.0).unwrap() + 300.0).abs() < 1e-10);
        assert_eq!(weyl_prediction(&m, 0.0).unwrap(), 0.0);
        let ball = RadialMedium::homogeneous(Dimension::Three, 1.0, 4.0).unwrap();
        let ratio = weyl_prediction(&ball, 50.0).unwrap() / weyl_prediction(&ball, 25.0).unwrap();
        assert!((ratio - 2f64.powf(1.5)).abs() < 1e-12);
        let obstacle = RadialMedium::new(
            Dimension::Two,
            1.0,
            vec![Layer { r: 1.0, n: 4.0 }],
            Some(Obstacle {
                r: 0.3,
                bc: BoundaryCondition::Dirichlet,
            }),
        )
        .unwrap();
        let want = (std::f64::consts::PI - 4.0 * std::f64::consts::PI * 0.91)
            / (4.0 * std::f64::consts::PI);
        assert!((weyl_prediction(&obstacle, 1.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn exponent_of_exact_power() {
        let xs: Vec<f64> = (1..10).map(|i| (i as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 * x + 0.3).collect();
        assert!((slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }
}
