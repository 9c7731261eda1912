use itd_core::analysis::{self, Analysis};
use itd_core::duality::{self, CrossingEvent};
use itd_core::flow::{self, FlowLedger};
use itd_core::medium::RadialMedium;
use itd_core::signature::{self, SignatureResult};
use itd_core::weyl::{self, SigmaSource};
use itd_core::Error;
use serde::Serialize;

use crate::config::{KWindow, RunConfig};
use crate::error::CliError;
use crate::output::{num, opt_int, opt_num, Output};

pub const ITE_HEADER: [&str; 7] = [
    "lambda_T",
    "mode",
    "multiplicity",
    "singular",
    "sigma_traj",
    "sigma_flow",
    "sigma_sig",
];
pub const TRAJECTORY_HEADER: [&str; 5] = ["k", "mode", "re_z", "im_z", "arg_z"];
pub const WEYL_HEADER: [&str; 4] = ["lambda", "signed_count", "prediction", "ratio"];
pub const SIGNATURE_HEADER: [&str; 5] = [
    "lambda_T",
    "mode",
    "a_value",
    "sigma_signature",
    "agree_all",
];

const WEYL_POINTS: usize = 400;
const RATIO_BAND: (f64, f64) = (0.95, 1.05);
const EXPONENT_BAND: f64 = 0.15;

pub struct Run {
    pub config: RunConfig,
    pub medium: RadialMedium,
    pub out: Output,
}

impl Run {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let medium = config.radial_medium()?;
        let out = Output::new(&config.output_dir, &config.emit)?;
        Ok(Run {
            config,
            medium,
            out,
        })
    }

    fn analysis(&self) -> Result<Analysis, CliError> {
        let a = analysis::analyze(
            &self.medium,
            self.config.lambda_max,
            self.config.t(),
            self.config.ite_options(),
        )?;
        for (lambda, t) in &a.issues.t_shifted {
            eprintln!("note: flow sign at lambda = {lambda} evaluated with t = {t} after an event collision");
        }
        for lambda in &a.issues.slope_disagreement {
            eprintln!("warning: crossing direction unresolved at lambda = {lambda}");
        }
        Ok(a)
    }
}

#[derive(Serialize)]
struct IteReport<'a> {
    medium: &'a itd_core::medium::MediumConfig,
    lambda_max: f64,
    grid_step: f64,
    lambda_min: f64,
    mode_cap: u32,
    records: &'a [itd_core::ite::IteRecord],
    issues: &'a analysis::SigmaIssues,
}

pub fn ite_scan(run: &mut Run) -> Result<(), CliError> {
    let a = run.analysis()?;
    let rows: Vec<Vec<String>> = a
        .records()
        .iter()
        .map(|r| {
            vec![
                num(r.lambda_t),
                r.mode.to_string(),
                r.angular_multiplicity.to_string(),
                r.is_singular.to_string(),
                opt_int(r.sigma_trajectory),
                opt_int(r.sigma_flow),
                opt_int(r.sigma_signature),
            ]
        })
        .collect();
    run.out.csv("ites.csv", &ITE_HEADER, &rows)?;
    run.out.json(
        "ites.json",
        &IteReport {
            medium: &run.config.medium,
            lambda_max: run.config.lambda_max,
            grid_step: a.scan.grid_step,
            lambda_min: a.scan.lambda_min,
            mode_cap: a.scan.mode_cap,
            records: a.records(),
            issues: &a.issues,
        },
    )?;
    let points: Vec<(f64, f64)> = a
        .records()
        .iter()
        .map(|r| (r.lambda_t, r.mode as f64))
        .collect();
    run.out.plot("ites.dat", &points)?;
    println!(
        "{} ITEs below lambda = {}",
        a.records().len(),
        run.config.lambda_max
    );
    Ok(())
}

#[derive(Serialize)]
struct Crossing {
    k_i: f64,
    mode: u32,
    event: Option<CrossingEvent>,
    /// Set when the direction could not be classified.
    error: Option<String>,
}

fn default_windows(run: &Run) -> Vec<KWindow> {
    let k_max = run.config.lambda_max.sqrt();
    (0..=run.medium.mode_cap(run.config.lambda_max))
        .map(|mode| KWindow {
            mode,
            k_min: 0.1_f64.min(0.5 * k_max),
            k_max,
            samples: 400,
        })
        .collect()
}

pub fn duality_trace(run: &mut Run) -> Result<(), CliError> {
    let windows = run
        .config
        .k_windows
        .clone()
        .unwrap_or_else(|| default_windows(run));
    let mut rows = Vec::new();
    let mut crossings = Vec::new();
    for w in &windows {
        let traj = duality::trace_trajectory(&run.medium, w.mode, (w.k_min, w.k_max), w.samples)?;
        rows.extend(traj.iter().map(|p| {
            vec![
                num(p.k),
                w.mode.to_string(),
                num(p.re_z),
                num(p.im_z),
                num(p.arg_z),
            ]
        }));
        let curve: Vec<(f64, f64)> = traj.iter().map(|p| (p.re_z, p.im_z)).collect();
        run.out
            .plot(&format!("trajectory_l{}.dat", w.mode), &curve)?;
        for k in duality::unit_crossings(&run.medium, w.mode, (w.k_min, w.k_max), w.samples)? {
            let (event, error) = match duality::classify_crossing(&run.medium, w.mode, k) {
                Ok(e) => (Some(e), None),
                Err(e @ Error::SlopeDisagreement(_)) => (None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            crossings.push(Crossing {
                k_i: k,
                mode: w.mode,
                event,
                error,
            });
        }
    }
    run.out.csv("trajectory.csv", &TRAJECTORY_HEADER, &rows)?;
    run.out.json("crossings.json", &crossings)?;
    println!(
        "{} unit crossings over {} windows",
        crossings.len(),
        windows.len()
    );
    Ok(())
}

fn sweep(run: &Run, alpha: f64) -> Result<(FlowLedger, bool), CliError> {
    let t = run.config.t();
    match flow::flow_sweep(&run.medium, alpha, run.config.lambda_max, t) {
        Ok(l) => Ok((l, false)),
        Err(Error::UnresolvedEvent { lambda, .. }) => {
            eprintln!("event collision at lambda = {lambda} with t = {t}");
            let l = flow::flow_sweep_auto(&run.medium, alpha, run.config.lambda_max, t)?;
            eprintln!("re-chosen t = {}", l.t);
            Ok((l, true))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn flow_sweep(run: &mut Run) -> Result<(), CliError> {
    let t = run.config.t();
    let cutoff = run.medium.mode_cap(run.config.lambda_max);
    let alpha = match run.config.alpha_ref {
        Some(a) => {
            flow::check_alpha_ref(&run.medium, a, t, cutoff)?;
            a
        }
        None => {
            let (a, clear) = flow::default_alpha_ref(&run.medium, t, cutoff)?;
            if !clear {
                eprintln!("warning: spectral events remain below alpha_ref = {a}");
            }
            a
        }
    };
    let (ledger, collided) = sweep(run, alpha)?;
    let rows: Vec<Vec<String>> = ledger
        .events
        .iter()
        .map(|e| {
            vec![
                num(e.lambda),
                e.mode.to_string(),
                format!("{:?}", e.kind),
                e.weight.to_string(),
                e.contribution.to_string(),
            ]
        })
        .collect();
    run.out.csv(
        "flow_events.csv",
        &["lambda", "mode", "kind", "weight", "contribution"],
        &rows,
    )?;
    run.out.json("ledger.json", &ledger)?;
    let mut count = ledger.n_minus_start as f64;
    let mut steps = vec![(ledger.alpha_ref, count)];
    for e in &ledger.events {
        steps.push((e.lambda, count));
        count += e.contribution as f64;
        steps.push((e.lambda, count));
    }
    steps.push((ledger.lambda_end, count));
    run.out.plot("flow.dat", &steps)?;
    println!(
        "n_minus: {} -> {}, n1 = {}, n2 = {}",
        ledger.n_minus_start, ledger.n_minus_end, ledger.n1, ledger.n2
    );
    if !ledger.conserved {
        return Err(CliError::NotConserved);
    }
    if collided {
        return Err(Error::UnresolvedEvent {
            lambda: ledger.lambda_end,
            t,
        }
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct WeylSummary {
    source: SigmaSource,
    lambda_max: f64,
    signed_count: i64,
    unsigned_count: u64,
    prediction: f64,
    final_ratio: Option<f64>,
    fitted_exponent: f64,
    ratio_band: (f64, f64),
    ratio_pass: bool,
    exponent_tolerance: f64,
    exponent_pass: bool,
}

pub fn weyl_report(run: &mut Run, source: SigmaSource) -> Result<(), CliError> {
    let a = run.analysis()?;
    let lmax = run.config.lambda_max;
    let r = weyl::report(&run.medium, a.records(), lmax, source, WEYL_POINTS)?;
    let rows: Vec<Vec<String>> = (0..r.lambda_grid.len())
        .map(|i| {
            vec![
                num(r.lambda_grid[i]),
                r.signed_count[i].to_string(),
                num(r.prediction[i]),
                opt_num(r.ratio[i]),
            ]
        })
        .collect();
    run.out.csv("weyl.csv", &WEYL_HEADER, &rows)?;
    let exponent_pass =
        (r.fitted_exponent - run.medium.dimension().as_f64() / 2.0).abs() <= EXPONENT_BAND;
    let summary = WeylSummary {
        source,
        lambda_max: lmax,
        signed_count: *r.signed_count.last().unwrap(),
        unsigned_count: r.unsigned_count,
        prediction: *r.prediction.last().unwrap(),
        final_ratio: r.final_ratio(),
        fitted_exponent: r.fitted_exponent,
        ratio_band: RATIO_BAND,
        ratio_pass: r.within(RATIO_BAND),
        exponent_tolerance: EXPONENT_BAND,
        exponent_pass,
    };
    run.out.json("weyl_summary.json", &summary)?;
    let zip = |ys: Vec<f64>| -> Vec<(f64, f64)> { r.lambda_grid.iter().copied().zip(ys).collect() };
    run.out.plot(
        "weyl_signed.dat",
        &zip(r.signed_count.iter().map(|&c| c as f64).collect()),
    )?;
    run.out
        .plot("weyl_prediction.dat", &zip(r.prediction.clone()))?;
    println!(
        "S = {}, W = {}, ratio = {}, exponent = {} ({})",
        summary.signed_count,
        num(summary.prediction),
        opt_num(summary.final_ratio),
        num(summary.fitted_exponent),
        if summary.ratio_pass && exponent_pass {
            "within bands"
        } else {
            "outside bands"
        }
    );
    Ok(())
}

#[derive(Serialize)]
struct SignatureReport {
    results: Vec<Option<SignatureResult>>,
    agreement: signature::AgreementReport,
}

pub fn signature_check(run: &mut Run) -> Result<(), CliError> {
    let a = run.analysis()?;
    let agreement = signature::agreement_check(a.records());
    let results = a
        .records()
        .iter()
        .map(
            |r| match signature::signature_integral(&run.medium, r.mode, r.lambda_t) {
                Ok(s) => Ok(Some(s)),
                Err(Error::Unresolved(_)) if r.tangent => Ok(None),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = agreement
        .rows
        .iter()
        .zip(&results)
        .map(|(row, s)| {
            vec![
                num(row.lambda_t),
                row.mode.to_string(),
                opt_num(s.map(|s| s.a_value)),
                opt_int(s.map(|s| s.sigma_signature)),
                row.agree_all.to_string(),
            ]
        })
        .collect();
    run.out.csv("signature.csv", &SIGNATURE_HEADER, &rows)?;
    let points: Vec<(f64, f64)> = results
        .iter()
        .flatten()
        .map(|s| (s.lambda_t, s.a_value))
        .collect();
    run.out.plot("signature.dat", &points)?;
    println!(
        "{}/{} simple ITEs agree ({} excluded)",
        agreement.agreed, agreement.checked, agreement.excluded
    );
    run.out
        .json("signature.json", &SignatureReport { results, agreement })?;
    Ok(())
}
