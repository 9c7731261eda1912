//! Cross-module checks on built-in media.
//!
//! Setting `ITD_INJECT_FAULT` to a suite name flips a sign inside that
//! suite, which must then fail.

use std::f64::consts::PI;

use itd_core::analysis;
use itd_core::dtn;
use itd_core::duality;
use itd_core::flow;
use itd_core::ite::IteOptions;
use itd_core::medium::{BoundaryCondition, Dimension, Layer, Obstacle, RadialMedium};
use itd_core::radial::{self, Problem};
use itd_core::signature;
use itd_core::specfun;
use itd_core::Result;

use crate::error::CliError;

pub const SUITES: [&str; 5] = [
    "wronskian",
    "unitarity",
    "monotonicity",
    "conservation",
    "triple-sigma",
];

pub const FAULT_VAR: &str = "ITD_INJECT_FAULT";

const LAMBDA: f64 = 80.0;

fn media() -> Vec<(&'static str, RadialMedium)> {
    let disk = |n| RadialMedium::homogeneous(Dimension::Two, 1.0, n).unwrap();
    vec![
        ("disk n=4", disk(4.0)),
        ("disk n=0.25", disk(0.25)),
        (
            "two-layer disk",
            RadialMedium::new(
                Dimension::Two,
                1.0,
                vec![Layer { r: 0.5, n: 4.0 }, Layer { r: 1.0, n: 0.25 }],
                None,
            )
            .unwrap(),
        ),
        (
            "ball n=4",
            RadialMedium::homogeneous(Dimension::Three, 1.0, 4.0).unwrap(),
        ),
        (
            "disk n=4, obstacle",
            RadialMedium::new(
                Dimension::Two,
                1.0,
                vec![Layer { r: 1.0, n: 4.0 }],
                Some(Obstacle {
                    r: 0.3,
                    bc: BoundaryCondition::Dirichlet,
                }),
            )
            .unwrap(),
        ),
    ]
}

struct Check {
    pass: bool,
    detail: String,
}

/// `-1` inside the faulted suite, `+1` elsewhere.
fn sign(fault: bool) -> f64 {
    if fault {
        -1.0
    } else {
        1.0
    }
}

fn wronskian(fault: bool) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for l in [0, 1, 2, 5, 10, 30, 80] {
        for x in [0.3, 1.0, 4.5, 12.0, 31.0, 77.0] {
            let c = specfun::cyl_bessel(l, x)?;
            let s = specfun::sph_bessel(l, x)?;
            worst = worst.max((sign(fault) * c.wronskian() * PI * x / 2.0 - 1.0).abs());
            worst = worst.max((s.wronskian() * x * x - 1.0).abs());
        }
    }
    Ok(Check {
        pass: worst < 1e-10,
        detail: format!("max relative deviation {worst:.2e}"),
    })
}

fn unitarity(fault: bool) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (_, m) in media() {
        for l in [0, 1, 3, 8, 15] {
            for k in [0.2, 1.3, 4.0, 7.7] {
                let z = duality::scattering_coefficient(&m, l, k)?.z;
                worst = worst.max((z.norm() - sign(fault)).abs());
            }
        }
    }
    Ok(Check {
        pass: worst < 1e-10,
        detail: format!("max ||z| - 1| {worst:.2e}"),
    })
}

fn monotonicity(fault: bool) -> Result<Check> {
    let mut bad = 0;
    for (_, m) in media() {
        for l in 0..4 {
            for p in [Problem::Free, Problem::Medium] {
                let (lo, hi) = (0.05, 60.0);
                let mut cuts = vec![lo];
                cuts.extend(dtn::impedance_zeros(&m, p, l, 1.0, (lo, hi), None)?);
                cuts.push(hi);
                for gap in cuts.windows(2) {
                    let vals = (1..=100)
                        .map(|j| gap[0] + (gap[1] - gap[0]) * j as f64 / 101.0)
                        .map(|x| {
                            radial::boundary_data(&m, p, l, x)
                                .map(|b| sign(fault) * dtn::inverse_impedance(&b, 1.0))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    bad += vals.windows(2).filter(|w| w[1] <= w[0]).count();
                }
            }
        }
    }
    Ok(Check {
        pass: bad == 0,
        detail: format!("{bad} violations"),
    })
}

fn conservation(fault: bool) -> Result<Check> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m) in media() {
        let (alpha, _) = flow::default_alpha_ref(&m, 1.0, m.mode_cap(LAMBDA))?;
        let l = flow::flow_sweep_auto(&m, alpha, LAMBDA, 1.0)?;
        let n2 = sign(fault) as i64 * l.n2;
        let ok = l.n_minus_end as i64 - l.n_minus_start as i64 == l.n1 + n2;
        pass &= ok;
        parts.push(format!("{name}: {}", if ok { "ok" } else { "broken" }));
    }
    Ok(Check {
        pass,
        detail: parts.join(", "),
    })
}

fn triple_sigma(fault: bool) -> Result<Check> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m) in media() {
        let mut a = analysis::analyze(&m, LAMBDA, 1.0, IteOptions::default())?;
        if fault {
            for r in &mut a.scan.records {
                r.sigma_flow = r.sigma_flow.map(|s| -s);
            }
        }
        let rep = signature::agreement_check(a.records());
        pass &= rep.all_agree();
        parts.push(format!("{name}: {}/{}", rep.agreed, rep.checked));
    }
    Ok(Check {
        pass,
        detail: parts.join(", "),
    })
}

pub fn list() {
    for s in SUITES {
        println!("{s}");
    }
}

pub fn run() -> std::result::Result<(), CliError> {
    let fault = std::env::var(FAULT_VAR).ok();
    let mut failed = Vec::new();
    for name in SUITES {
        let f = fault.as_deref() == Some(name);
        let check = match name {
            "wronskian" => wronskian(f),
            "unitarity" => unitarity(f),
            "monotonicity" => monotonicity(f),
            "conservation" => conservation(f),
            _ => triple_sigma(f),
        };
        let (verdict, detail) = match check {
            Ok(c) if c.pass => ("PASS", c.detail),
            Ok(c) => ("FAIL", c.detail),
            Err(e) => ("FAIL", e.to_string()),
        };
        println!("{name}: {verdict}: {detail}");
        if verdict == "FAIL" {
            failed.push(name.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Selftest(failed))
    }
}
