//! Spectral flow of `r_l(λ) = 1/(Λⁿ − t) − 1/(Λ⁰ − t)`: the negative count
//! `n⁻(λ)`, the event ledger through −∞ (impedance eigenvalues) and through 0
//! (ITEs), and the flow sign of each ITE.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn;
use crate::error::{Error, Result};
use crate::ite::{self, IteRecord, ScanWindow};
use crate::medium::RadialMedium;
use crate::radial::{self, Problem};

/// Closest approach in λ, relative to `max(1, λ)`, at which two events of one
/// mode are still ordered.
pub const COLLISION_GAP: f64 = 1e-8;

/// Unit-pair size of `v' − t v`, `u' − t u` or `d_l` below which a sample
/// point counts as on top of an event.
pub const EVENT_GAP: f64 = 1e-9;

/// Modes above the cutoff that must all carry the tail sign.
const TAIL_MODES: u32 = 20;

/// `|dr_l/dλ|` below which an ITE is stationary for the flow.
const FLOW_TANGENT: f64 = 1e-10;

/// Increment applied to `t` on each retry after a collision.
pub const T_RETRY_STEP: f64 = 0.137;

/// Largest number of `t` values tried by [`flow_sweep_auto`].
pub const T_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSample {
    pub lambda: f64,
    pub mode: u32,
    /// `d_l / ((v' − t v)(u' − t u))`; infinite at a pole.
    pub value: f64,
    pub pole: Option<Problem>,
    /// Within [`EVENT_GAP`] of a pole or a zero.
    pub near_event: bool,
}

pub fn r_mode(medium: &RadialMedium, l: u32, lambda: f64, t: f64) -> Result<RSample> {
    let u = radial::boundary_data(medium, Problem::Free, l, lambda)?;
    let v = radial::boundary_data(medium, Problem::Medium, l, lambda)?;
    let (gu, gv) = (u.impedance(t), v.impedance(t));
    let d = u.derivative * v.value - u.value * v.derivative;
    let pole = if gv.abs() < dtn::POLE_THRESHOLD {
        Some(Problem::Medium)
    } else if gu.abs() < dtn::POLE_THRESHOLD {
        Some(Problem::Free)
    } else {
        None
    };
    let value = if pole.is_some() {
        f64::INFINITY
    } else {
        d / (gv * gu)
    };
    let near_event = gu.abs().min(gv.abs()).min(d.abs()) < EVENT_GAP;
    Ok(RSample {
        lambda,
        mode: l,
        value,
        pole,
        near_event,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeCount {
    pub lambda: f64,
    pub count: u64,
    /// Highest mode counted; the next 20 were certified positive.
    pub cutoff: u32,
}

/// `n⁻(λ)`: modes with `σ_b r_l(λ) < 0`, weighted by multiplicity.
pub fn negative_count(
    medium: &RadialMedium,
    lambda: f64,
    t: f64,
    cutoff: Option<u32>,
) -> Result<NegativeCount> {
    let sb = medium.boundary_sign().sigma as f64;
    let dim = medium.dimension();
    let sign_of = |l: u32| -> Result<bool> {
        let r = r_mode(medium, l, lambda, t)?;
        if r.near_event {
            return Err(Error::EventTooClose(lambda));
        }
        Ok(sb * r.value < 0.0)
    };
    let mut cutoff = cutoff.unwrap_or_else(|| medium.mode_cap(lambda));
    let mut negative = (0..=cutoff + TAIL_MODES)
        .into_par_iter()
        .map(sign_of)
        .collect::<Result<Vec<_>>>()?;
    while negative[cutoff as usize + 1..].iter().any(|&n| n) {
        let extra = (cutoff + TAIL_MODES + 1..=cutoff + 2 * TAIL_MODES)
            .into_par_iter()
            .map(sign_of)
            .collect::<Result<Vec<_>>>()?;
        negative.extend(extra);
        cutoff += TAIL_MODES;
    }
    let count = negative[..=cutoff as usize]
        .iter()
        .enumerate()
        .filter(|(_, &n)| n)
        .map(|(l, _)| dim.multiplicity(l as u32) as u64)
        .sum();
    Ok(NegativeCount {
        lambda,
        count,
        cutoff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    PoleEntry,
    PoleExit,
    ZeroDown,
    ZeroUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub lambda: f64,
    pub mode: u32,
    pub kind: EventKind,
    pub weight: u32,
    /// Change of `n⁻` across the event.
    pub contribution: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLedger {
    pub alpha_ref: f64,
    pub lambda_end: f64,
    pub t: f64,
    pub n_minus_start: u64,
    pub n_minus_end: u64,
    pub n1: i64,
    pub n2: i64,
    pub events: Vec<FlowEvent>,
    #[serde(rename = "n_minus_end - n_minus_start == n1 + n2")]
    pub conserved: bool,
    /// No event of any counted mode lies in `(0, alpha_ref]`.
    pub alpha_ref_clear: bool,
    pub mode_cutoff: u32,
    /// Stationary zeros of `r_l`, excluded from `n2`.
    pub tangent_ites: Vec<(f64, u32)>,
    /// Values of `t` abandoned after an event collision.
    #[serde(default)]
    pub t_rejected: Vec<f64>,
}

struct ModeEvents {
    events: Vec<FlowEvent>,
    tangent: Vec<(f64, u32)>,
}

fn pole_event(lambda: f64, l: u32, weight: u32, contribution: i64) -> FlowEvent {
    FlowEvent {
        lambda,
        mode: l,
        kind: if contribution > 0 {
            EventKind::PoleEntry
        } else {
            EventKind::PoleExit
        },
        weight,
        contribution,
    }
}

/// Events of mode `l` on `(lo, hi)`, with collisions rejected.
fn mode_events(
    medium: &RadialMedium,
    l: u32,
    t: f64,
    window: (f64, f64),
    step: f64,
) -> Result<ModeEvents> {
    let (lo, hi) = window;
    let sb = medium.boundary_sign().sigma as i64;
    let w = medium.dimension().multiplicity(l);
    let mut events = Vec::new();
    for (problem, sign) in [(Problem::Medium, sb), (Problem::Free, -sb)] {
        for x in dtn::impedance_zeros(medium, problem, l, t, (lo, hi), Some(step))? {
            // 1/(Λ − t) increases through each pole, so the medium branch of
            // r_l drops from +∞ to −∞ and the free branch rises
            events.push(pole_event(x, l, w, sign * w as i64));
        }
    }
    let mut tangent = Vec::new();
    let window = ScanWindow {
        lambda_min: lo.max(1e-3 * step.min(hi)),
        lambda_max: hi,
        step,
    };
    for root in ite::scan_mode(medium, l, &window)? {
        if root.tangent {
            tangent.push((root.lambda, l));
            events.push(FlowEvent {
                lambda: root.lambda,
                mode: l,
                kind: EventKind::ZeroUp,
                weight: w,
                contribution: 0,
            });
            continue;
        }
        let u = radial::boundary_data(medium, Problem::Free, l, root.lambda)?;
        let v = radial::boundary_data(medium, Problem::Medium, l, root.lambda)?;
        let dr = root.slope / (u.impedance(t) * v.impedance(t));
        let contribution = -sb * dr.signum() as i64 * w as i64;
        events.push(FlowEvent {
            lambda: root.lambda,
            mode: l,
            kind: if contribution > 0 {
                EventKind::ZeroDown
            } else {
                EventKind::ZeroUp
            },
            weight: w,
            contribution,
        });
    }
    events.sort_by(|p, q| p.lambda.total_cmp(&q.lambda));
    for pair in events.windows(2) {
        if pair[1].lambda - pair[0].lambda < COLLISION_GAP * pair[0].lambda.max(1.0) {
            return Err(Error::UnresolvedEvent {
                lambda: pair[0].lambda,
                t,
            });
        }
    }
    events.retain(|e| e.contribution != 0);
    Ok(ModeEvents { events, tangent })
}

fn sweep_step(medium: &RadialMedium, span: f64) -> f64 {
    medium.default_grid_step().min(span / 50.0)
}

/// Lowest event of modes `0..=cutoff` in `(0, alpha]`, if any.
fn first_event_below(
    medium: &RadialMedium,
    alpha: f64,
    t: f64,
    cutoff: u32,
) -> Result<Option<f64>> {
    let step = sweep_step(medium, alpha);
    let lows = (0..=cutoff)
        .into_par_iter()
        .map(|l| {
            mode_events(medium, l, t, (0.0, alpha), step).map(|m| {
                m.events
                    .iter()
                    .map(|e| e.lambda)
                    .chain(m.tangent.iter().map(|p| p.0))
                    .min_by(f64::total_cmp)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lows.into_iter().flatten().min_by(f64::total_cmp))
}

/// Rejects a sweep start that is not below every event of modes `0..=cutoff`.
pub fn check_alpha_ref(medium: &RadialMedium, alpha: f64, t: f64, cutoff: u32) -> Result<()> {
    match first_event_below(medium, alpha, t, cutoff)? {
        Some(event) => Err(Error::ReferenceTooHigh { alpha, event }),
        None => Ok(()),
    }
}

/// Default sweep start: 0.05 halved until `(0, α]` is event-free, at most
/// six times. The flag reports whether a clear start was found.
pub fn default_alpha_ref(medium: &RadialMedium, t: f64, cutoff: u32) -> Result<(f64, bool)> {
    let mut alpha = 0.05;
    for _ in 0..6 {
        if first_event_below(medium, alpha, t, cutoff)?.is_none() {
            return Ok((alpha, true));
        }
        alpha *= 0.5;
    }
    Ok((alpha, false))
}

pub fn flow_sweep(
    medium: &RadialMedium,
    alpha_ref: f64,
    lambda_end: f64,
    t: f64,
) -> Result<FlowLedger> {
    let medium = medium.clone().validate()?;
    if !(alpha_ref > 0.0 && lambda_end > alpha_ref && lambda_end.is_finite()) {
        return Err(Error::Domain(lambda_end));
    }
    let probe_start = negative_count(&medium, alpha_ref, t, None)?;
    let probe_end = negative_count(&medium, lambda_end, t, None)?;
    let cutoff = probe_start
        .cutoff
        .max(probe_end.cutoff)
        .max(medium.mode_cap(lambda_end));
    let start = negative_count(&medium, alpha_ref, t, Some(cutoff))?;
    let end = negative_count(&medium, lambda_end, t, Some(cutoff))?;
    let cutoff = start.cutoff.max(end.cutoff);

    let step = sweep_step(&medium, lambda_end - alpha_ref);
    let per_mode = (0..=cutoff)
        .into_par_iter()
        .map(|l| mode_events(&medium, l, t, (alpha_ref, lambda_end), step))
        .collect::<Result<Vec<_>>>()?;
    let mut events = Vec::new();
    let mut tangent_ites = Vec::new();
    for m in per_mode {
        events.extend(m.events);
        tangent_ites.extend(m.tangent);
    }
    events.sort_by(|p, q| p.lambda.total_cmp(&q.lambda).then(p.mode.cmp(&q.mode)));
    tangent_ites.sort_by(|p, q| p.0.total_cmp(&q.0));

    let is_pole = |e: &&FlowEvent| matches!(e.kind, EventKind::PoleEntry | EventKind::PoleExit);
    let n1 = events.iter().filter(is_pole).map(|e| e.contribution).sum();
    let n2 = events
        .iter()
        .filter(|e| !is_pole(e))
        .map(|e| e.contribution)
        .sum();
    let conserved = end.count as i64 - start.count as i64 == n1 + n2;
    Ok(FlowLedger {
        alpha_ref,
        lambda_end,
        t,
        n_minus_start: start.count,
        n_minus_end: end.count,
        n1,
        n2,
        events,
        conserved,
        alpha_ref_clear: first_event_below(&medium, alpha_ref, t, cutoff)?.is_none(),
        mode_cutoff: cutoff,
        tangent_ites,
        t_rejected: Vec::new(),
    })
}

/// [`flow_sweep`], moving `t` by [`T_RETRY_STEP`] after each collision.
pub fn flow_sweep_auto(
    medium: &RadialMedium,
    alpha_ref: f64,
    lambda_end: f64,
    t: f64,
) -> Result<FlowLedger> {
    let mut rejected = Vec::new();
    let mut last = Error::Unresolved(lambda_end);
    for m in 0..=T_RETRIES {
        let tm = t + T_RETRY_STEP * m as f64;
        match flow_sweep(medium, alpha_ref, lambda_end, tm) {
            Ok(mut ledger) => {
                ledger.t_rejected = rejected;
                return Ok(ledger);
            }
            Err(e @ Error::UnresolvedEvent { .. }) => {
                rejected.push(tm);
                last = e;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountMismatch {
    pub lambda: f64,
    pub recount: u64,
    pub ledger: i64,
}

/// Recomputes `n⁻` at `points` interior sample points and compares with the
/// start count plus the ledger events below each point.
pub fn check_completeness(
    medium: &RadialMedium,
    ledger: &FlowLedger,
    points: usize,
) -> Result<Vec<CountMismatch>> {
    let (lo, hi) = (ledger.alpha_ref, ledger.lambda_end);
    (1..=points)
        .into_par_iter()
        .map(|j| {
            let mut x = lo + (hi - lo) * j as f64 / (points + 1) as f64;
            let recount = loop {
                match negative_count(medium, x, ledger.t, Some(ledger.mode_cutoff)) {
                    Err(Error::EventTooClose(_)) => x += 1e-6 * x,
                    r => break r?,
                }
            };
            let from_ledger = ledger.n_minus_start as i64
                + ledger
                    .events
                    .iter()
                    .filter(|e| e.lambda < x)
                    .map(|e| e.contribution)
                    .sum::<i64>();
            Ok((x, recount.count, from_ledger))
        })
        .collect::<Result<Vec<_>>>()
        .map(|rows| {
            rows.into_iter()
                .filter(|&(_, r, l)| r as i64 != l)
                .map(|(lambda, recount, ledger)| CountMismatch {
                    lambda,
                    recount,
                    ledger,
                })
                .collect()
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSigma {
    /// `−sign(dr_l/dλ)` per eigenfunction, 0 when stationary.
    pub sigma: i32,
    pub tangent: bool,
    pub slope: f64,
}

pub fn flow_sigma(medium: &RadialMedium, ite: &IteRecord, t: f64) -> Result<FlowSigma> {
    let (l, x) = (ite.mode, ite.lambda_t);
    let h = 1e-6 * x.max(1e-3);
    let up = r_mode(medium, l, x + h, t)?;
    let down = r_mode(medium, l, x - h, t)?;
    if up.pole.is_some() || down.pole.is_some() {
        return Err(Error::UnresolvedEvent { lambda: x, t });
    }
    let slope = (up.value - down.value) / (2.0 * h);
    let tangent = ite.tangent || slope.abs() < FLOW_TANGENT;
    Ok(FlowSigma {
        sigma: if tangent { 0 } else { -(slope.signum() as i32) },
        tangent,
        slope,
    })
}
