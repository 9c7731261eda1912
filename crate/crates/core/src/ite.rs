//! Interior transmission eigenvalues from the per-mode determinant
//! `d_l = u'(a) v(a) − u(a) v'(a)` of the free and medium boundary pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::RadialMedium;
use crate::radial::{self, Problem};
use crate::roots;

/// Records closer than this in λ are grouped as one eigenvalue.
pub const GROUP_TOLERANCE: f64 = 1e-7;

/// Trace magnitude below which both boundary values count as vanishing.
const SINGULAR_TRACE: f64 = 1e-6;

/// Determinant magnitude (unit pairs) below which a sign-preserving local
/// minimum is reported as a tangential root.
const TANGENT_LEVEL: f64 = 1e-8;

pub fn mode_determinant(medium: &RadialMedium, l: u32, lambda: f64) -> Result<f64> {
    let u = radial::boundary_data(medium, Problem::Free, l, lambda)?;
    let v = radial::boundary_data(medium, Problem::Medium, l, lambda)?;
    Ok(u.derivative * v.value - u.value * v.derivative)
}

fn slope_at(medium: &RadialMedium, l: u32, lambda: f64) -> Result<f64> {
    let h = 1e-6 * lambda.max(1e-3);
    let up = mode_determinant(medium, l, lambda + h)?;
    let down = mode_determinant(medium, l, lambda - h)?;
    Ok((up - down) / (2.0 * h))
}

fn traces_vanish(medium: &RadialMedium, l: u32, lambda: f64) -> Result<bool> {
    let u = radial::boundary_data(medium, Problem::Free, l, lambda)?;
    let v = radial::boundary_data(medium, Problem::Medium, l, lambda)?;
    Ok(u.value.abs() < SINGULAR_TRACE && v.value.abs() < SINGULAR_TRACE)
}

/// `d_l` is flat at a singular ITE, so the root is moved onto the simple
/// zero of the free trace nearby.
fn refine_singular(medium: &RadialMedium, l: u32, x: f64) -> Result<f64> {
    let trace = |y: f64| Ok(radial::boundary_data(medium, Problem::Free, l, y)?.value);
    let (lo, hi) = (x * (1.0 - 1e-5), x * (1.0 + 1e-5));
    let (a, b) = (trace(lo)?, trace(hi)?);
    if a * b > 0.0 {
        return Ok(x);
    }
    roots::refine(trace, lo, hi, a, b, refine_tol(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRoot {
    pub lambda: f64,
    /// `d d_l / dλ` at the root (unit pairs).
    pub slope: f64,
    /// No sign change: a local minimum of `|d_l|` at the tangent level.
    pub tangent: bool,
    pub singular: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanWindow {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub step: f64,
}

impl ScanWindow {
    pub fn new(medium: &RadialMedium, lambda_max: f64) -> Self {
        let step = medium.default_grid_step();
        ScanWindow {
            lambda_min: 1e-3 * step.min(lambda_max),
            lambda_max,
            step,
        }
    }

    fn grid(&self) -> Vec<f64> {
        let n = ((self.lambda_max - self.lambda_min) / self.step)
            .ceil()
            .max(1.0) as usize;
        (0..=n)
            .map(|i| self.lambda_min + (self.lambda_max - self.lambda_min) * i as f64 / n as f64)
            .collect()
    }
}

fn refine_tol(lambda: f64) -> f64 {
    1e-12 * lambda.max(1.0)
}

/// `d_l` on the window grid. Leading grid points where the mode is so
/// evanescent that its trace leaves the binary64 range are dropped; no
/// sign change can hide there because `d_l` keeps its symbol sign.
fn determinant_on_grid(
    medium: &RadialMedium,
    l: u32,
    window: &ScanWindow,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for x in window.grid() {
        match mode_determinant(medium, l, x) {
            Ok(v) => {
                grid.push(x);
                values.push(v);
            }
            Err(Error::Range { .. }) if values.is_empty() => {}
            Err(e) => return Err(e),
        }
    }
    Ok((grid, values))
}

/// Roots of `d_l` in the window.
///
/// Sign changes on the grid are refined by bracketed secant/bisection.
/// Sign-preserving local minima of `|d_l|` are re-scanned ten times finer;
/// any sign change found there is refined, otherwise a minimum below the
/// tangent level is returned with `tangent = true`.
pub fn scan_mode(medium: &RadialMedium, l: u32, window: &ScanWindow) -> Result<Vec<ModeRoot>> {
    let (grid, values) = determinant_on_grid(medium, l, window)?;
    if grid.len() < 2 {
        return Ok(Vec::new());
    }
    let det = |x: f64| mode_determinant(medium, l, x);

    let mut found = Vec::new();
    for i in roots::sign_changes(&values) {
        let x = roots::refine(
            det,
            grid[i],
            grid[i + 1],
            values[i],
            values[i + 1],
            refine_tol(grid[i]),
        )?;
        found.push((x, false));
    }

    for j in 1..grid.len() - 1 {
        let (a, b, c) = (values[j - 1], values[j], values[j + 1]);
        let same = a.signum() == b.signum() && b.signum() == c.signum();
        if !(same && b.abs() < 0.25 * a.abs().min(c.abs())) {
            continue;
        }
        let sub: Vec<f64> = (0..=20)
            .map(|i| grid[j - 1] + (grid[j + 1] - grid[j - 1]) * i as f64 / 20.0)
            .collect();
        let sv = sub.iter().map(|&x| det(x)).collect::<Result<Vec<_>>>()?;
        let changes = roots::sign_changes(&sv);
        for &i in &changes {
            let x = roots::refine(
                det,
                sub[i],
                sub[i + 1],
                sv[i],
                sv[i + 1],
                refine_tol(sub[i]),
            )?;
            found.push((x, false));
        }
        if changes.is_empty() {
            let (imin, vmin) = sv
                .iter()
                .enumerate()
                .min_by(|p, q| p.1.abs().total_cmp(&q.1.abs()))
                .unwrap();
            if vmin.abs() < TANGENT_LEVEL {
                found.push((sub[imin], true));
            }
        }
    }

    found.sort_by(|p, q| p.0.total_cmp(&q.0));
    found.dedup_by(|p, q| (p.0 - q.0).abs() < GROUP_TOLERANCE * 0.01);
    found
        .into_iter()
        .map(|(x, tangent)| {
            let singular = traces_vanish(medium, l, x)?;
            let x = if singular {
                refine_singular(medium, l, x)?
            } else {
                x
            };
            Ok(ModeRoot {
                lambda: x,
                slope: slope_at(medium, l, x)?,
                tangent,
                singular,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteRecord {
    pub lambda_t: f64,
    pub mode: u32,
    pub angular_multiplicity: u32,
    pub is_singular: bool,
    pub tangent: bool,
    /// Records sharing a group id coincide within [`GROUP_TOLERANCE`].
    pub group: usize,
    pub slope: f64,
    pub sigma_trajectory: Option<i32>,
    pub sigma_flow: Option<i32>,
    pub sigma_signature: Option<i32>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IteOptions {
    pub grid_step: Option<f64>,
    pub mode_cap: Option<u32>,
    pub lambda_min: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct IteScan {
    pub records: Vec<IteRecord>,
    pub grid_step: f64,
    pub lambda_min: f64,
    pub mode_cap: u32,
}

/// Whether every grid value of `d_l` carries the sign forced by the
/// large-mode symbol, `sign(n(a) − 1)`.
fn evanescent_sign_holds(medium: &RadialMedium, l: u32, window: &ScanWindow) -> Result<bool> {
    let want = medium.boundary_sign().sigma as f64;
    let (_, values) = determinant_on_grid(medium, l, window)?;
    Ok(values.iter().all(|v| v * want > 0.0))
}

/// All ITEs in the window, sorted, with angular multiplicities and groups.
pub fn collect_ites(medium: &RadialMedium, lambda_max: f64, opts: IteOptions) -> Result<IteScan> {
    let medium = medium.clone().validate()?;
    let mut window = ScanWindow::new(&medium, lambda_max);
    if let Some(step) = opts.grid_step {
        window.step = step;
    }
    if let Some(lo) = opts.lambda_min {
        window.lambda_min = lo;
    }
    let mut cap = opts.mode_cap.unwrap_or_else(|| medium.mode_cap(lambda_max));
    while !(cap + 1..=cap + 2)
        .into_par_iter()
        .map(|l| evanescent_sign_holds(&medium, l, &window))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|ok| ok)
    {
        cap += 10;
    }

    let per_mode = (0..=cap)
        .into_par_iter()
        .map(|l| scan_mode(&medium, l, &window).map(|r| (l, r)))
        .collect::<Result<Vec<_>>>()?;

    let dim = medium.dimension();
    let mut records: Vec<IteRecord> = per_mode
        .into_iter()
        .flat_map(|(l, roots)| {
            roots.into_iter().map(move |r| IteRecord {
                lambda_t: r.lambda,
                mode: l,
                angular_multiplicity: dim.multiplicity(l),
                is_singular: r.singular,
                tangent: r.tangent,
                group: 0,
                slope: r.slope,
                sigma_trajectory: None,
                sigma_flow: None,
                sigma_signature: None,
            })
        })
        .collect();
    records.sort_by(|p, q| p.lambda_t.total_cmp(&q.lambda_t).then(p.mode.cmp(&q.mode)));
    assign_groups(&mut records);
    Ok(IteScan {
        records,
        grid_step: window.step,
        lambda_min: window.lambda_min,
        mode_cap: cap,
    })
}

fn assign_groups(records: &mut [IteRecord]) {
    let mut group = 0;
    for i in 0..records.len() {
        if i > 0 && records[i].lambda_t - records[i - 1].lambda_t >= GROUP_TOLERANCE {
            group += 1;
        }
        records[i].group = group;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{Dimension, Layer, Obstacle};

    fn disk(n: f64) -> RadialMedium {
        RadialMedium::homogeneous(Dimension::Two, 1.0, n).unwrap()
    }

    /// `j0(k) 2k j0'(2k) − j0(2k) k j0'(k)` from `j0 = sin x / x`.
    fn closed_form_d0(k: f64) -> f64 {
        let j0 = |x: f64| x.sin() / x;
        let j0p = |x: f64| (x * x.cos() - x.sin()) / (x * x);
        j0(k) * 2.0 * k * j0p(2.0 * k) - j0(2.0 * k) * k * j0p(k)
    }

    #[test]
    fn ball_mode_zero_sign_pattern_matches_closed_form() {
        let m = RadialMedium::homogeneous(Dimension::Three, 1.0, 4.0).unwrap();
        for i in 1..=500 {
            let lambda = 0.1 * i as f64;
            let k = lambda.sqrt();
            let d = mode_determinant(&m, 0, lambda).unwrap();
            let want = closed_form_d0(k);
            if want.abs() > 1e-9 {
                // the unit-pair determinant differs by a positive factor
                assert_eq!(d.signum(), -want.signum(), "lambda={lambda}");
            }
        }
    }

    #[test]
    fn refined_root_count_matches_fine_grid() {
        let m = disk(4.0);
        let window = ScanWindow::new(&m, 100.0);
        let roots = scan_mode(&m, 0, &window).unwrap();
        let fine = ScanWindow {
            step: window.step / 20.0,
            ..window
        };
        let vals: Vec<f64> = fine
            .grid()
            .iter()
            .map(|&x| mode_determinant(&m, 0, x).unwrap())
            .collect();
        assert_eq!(roots.len(), roots::sign_changes(&vals).len());
        assert!(!roots.is_empty());
        for r in &roots {
            assert!(mode_determinant(&m, 0, r.lambda).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn monotone_window_has_no_roots() {
        let m = disk(4.0);
        let window = ScanWindow {
            lambda_min: 1e-4,
            lambda_max: 3.0,
            step: 0.05,
        };
        assert!(scan_mode(&m, 0, &window).unwrap().is_empty());
    }

    #[test]
    fn below_first_ite_is_empty() {
        let scan = collect_ites(&disk(4.0), 2.0, IteOptions::default()).unwrap();
        assert!(scan.records.is_empty());
    }

    #[test]
    fn degenerate_medium_is_rejected() {
        assert!(matches!(
            collect_ites(&disk(1.0), 10.0, IteOptions::default()),
            Err(Error::DegenerateMedium)
        ));
    }

    #[test]
    fn disk_records_carry_angular_multiplicity() {
        let scan = collect_ites(&disk(4.0), 60.0, IteOptions::default()).unwrap();
        assert!(!scan.records.is_empty());
        for r in &scan.records {
            assert_eq!(r.angular_multiplicity, if r.mode == 0 { 1 } else { 2 });
        }
    }

    #[test]
    fn record_count_is_stable_under_halving_step() {
        let m = disk(4.0);
        let a = collect_ites(&m, 80.0, IteOptions::default()).unwrap();
        let b = collect_ites(
            &m,
            80.0,
            IteOptions {
                grid_step: Some(a.grid_step / 2.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.records.len(), b.records.len());
    }

    #[test]
    fn scaling_the_radius_scales_eigenvalues() {
        let m = disk(4.0);
        let big = m.scaled(2.0).unwrap();
        let a = collect_ites(&m, 80.0, IteOptions::default()).unwrap();
        let b = collect_ites(&big, 20.0, IteOptions::default()).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((y.lambda_t * 4.0 / x.lambda_t - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn grouping_merges_coincident_roots() {
        let mut recs: Vec<IteRecord> = [1.0, 1.0 + 1e-9, 2.0]
            .iter()
            .map(|&x| IteRecord {
                lambda_t: x,
                mode: 0,
                angular_multiplicity: 1,
                is_singular: false,
                tangent: false,
                group: 0,
                slope: 1.0,
                sigma_trajectory: None,
                sigma_flow: None,
                sigma_signature: None,
            })
            .collect();
        assign_groups(&mut recs);
        assert_eq!(
            recs.iter().map(|r| r.group).collect::<Vec<_>>(),
            vec![0, 0, 1]
        );
    }

    /// Inner layer tuned so the medium shares the free Dirichlet eigenvalue
    /// `j_{0,1}^2` of mode 0: both traces vanish there and `d_0` has a root.
    #[test]
    fn planted_common_dirichlet_eigenvalue_is_singular() {
        let j01: f64 = 2.404_825_557_695_773;
        let target = j01 * j01;
        let outer_n = 0.6;
        let medium_for = |inner_n: f64| {
            RadialMedium::new(
                Dimension::Two,
                1.0,
                vec![Layer { r: 0.5, n: inner_n }, Layer { r: 1.0, n: outer_n }],
                None,
            )
            .unwrap()
        };
        let trace = |inner_n: f64| {
            radial::boundary_data(&medium_for(inner_n), Problem::Medium, 0, target)
                .unwrap()
                .value
        };
        let (mut lo, mut hi) = (1.0, 8.0);
        let samples: Vec<f64> = (0..=140)
            .map(|i| lo + (hi - lo) * i as f64 / 140.0)
            .collect();
        let vals: Vec<f64> = samples.iter().map(|&n| trace(n)).collect();
        let i = roots::sign_changes(&vals)[0];
        lo = samples[i];
        hi = samples[i + 1];
        let n_in = roots::refine(|n| Ok(trace(n)), lo, hi, vals[i], vals[i + 1], 1e-15).unwrap();
        let m = medium_for(n_in);
        assert!(mode_determinant(&m, 0, target).unwrap().abs() < 1e-10);
        assert!(traces_vanish(&m, 0, target).unwrap());
        let window = ScanWindow {
            lambda_min: target - 0.2,
            lambda_max: target + 0.2,
            step: 0.01,
        };
        let roots = scan_mode(&m, 0, &window).unwrap();
        let hit = roots
            .iter()
            .find(|r| (r.lambda - target).abs() < 1e-7)
            .unwrap();
        assert!(hit.singular);
    }

    #[test]
    fn obstacle_medium_scans() {
        let m = RadialMedium::new(
            Dimension::Two,
            1.0,
            vec![Layer { r: 1.0, n: 4.0 }],
            Some(Obstacle {
                r: 0.3,
                bc: crate::medium::BoundaryCondition::Dirichlet,
            }),
        )
        .unwrap();
        let scan = collect_ites(&m, 50.0, IteOptions::default()).unwrap();
        assert!(!scan.records.is_empty());
    }
}
