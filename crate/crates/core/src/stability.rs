//! Randomized, seeded experiments that measure both sides of the stability
//! bounds for barcodes, magnitude and magnitude profiles.
//!
//! Every trial draws from its own ChaCha stream keyed by (seed, suite, trial
//! index), so reports are identical across runs and thread counts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::{bottleneck_weighted, magnitude_profile, profile_l1_distance, wasserstein_inf};
use crate::error::{Error, Result};
use crate::filtration::{Filtration, MonotoneFunction};
use crate::homology::homology_rank;
use crate::io::{format_f64, serialize_f64, serialize_opt_f64};
use crate::length::{Backend, Length};
use crate::linalg::Rationals;
use crate::magnitude::{compute_magnitude, magnitude_upper_bound};
use crate::persistence::{weighted_barcode, WeightedBarcode};
use crate::space::{FiniteMetricSpace, PointCloud};

/// Slack allowed before a bound counts as violated.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

const MAX_SAMPLING_ATTEMPTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Radius,
    Center,
    Composition,
    Difference,
    Profile,
    UpperBound,
    Monotonicity,
    Collinear,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Radius,
        Suite::Center,
        Suite::Composition,
        Suite::Difference,
        Suite::Profile,
        Suite::UpperBound,
        Suite::Monotonicity,
        Suite::Collinear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Radius => "radius",
            Suite::Center => "center",
            Suite::Composition => "composition",
            Suite::Difference => "difference",
            Suite::Profile => "profile",
            Suite::UpperBound => "upper-bound",
            Suite::Monotonicity => "monotonicity",
            Suite::Collinear => "collinear",
        }
    }

    fn stream(&self) -> u64 {
        Suite::ALL.iter().position(|s| s == self).expect("listed") as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

/// Parameters shared by all suites; each suite reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub dim: usize,
    /// Radius `L` of the ball containing sampled configurations.
    pub radius: f64,
    /// Separation `δ` for single-δ suites.
    pub delta: f64,
    /// Separations swept by the difference and profile suites.
    pub deltas: Vec<f64>,
    /// Perturbation sizes swept by the difference and collinear suites.
    pub epsilons: Vec<f64>,
    pub tau: f64,
    /// Largest length grading used for barcodes.
    pub l_max: f64,
    pub k_max: Option<usize>,
    /// Fraction of barcode trials drawn on the integer lattice, where exact
    /// additive relations (and so nonzero boundaries) occur.
    pub lattice_fraction: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            seed: 0,
            trials: 100,
            n_min: 2,
            n_max: 5,
            dim: 2,
            radius: 2.0,
            delta: 0.5,
            deltas: vec![0.2, 0.5, 1.0],
            epsilons: vec![1e-2, 1e-3, 1e-4],
            tau: crate::length::DEFAULT_TAU,
            l_max: 3.0,
            k_max: None,
            lattice_fraction: 0.5,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_min == 0 || self.n_min > self.n_max {
            return bad("need 1 <= n_min <= n_max");
        }
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if !(self.radius > 0.0) || !(self.delta > 0.0) || self.deltas.iter().any(|d| !(*d > 0.0)) {
            return bad("radius and every delta must be positive");
        }
        if self.epsilons.iter().any(|e| !(*e >= 0.0)) {
            return bad("epsilons must be nonnegative");
        }
        if !(self.l_max >= 0.0) {
            return bad("l_max must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.lattice_fraction) {
            return bad("lattice_fraction must lie in [0, 1]");
        }
        Backend::bucketed(self.tau)?;
        Ok(())
    }

    fn backend(&self) -> Backend {
        Backend::Bucketed { tau: self.tau }
    }

    fn l_max_length(&self) -> Length {
        Length::bucketed(self.l_max, self.tau)
    }
}

/// One trial: observed distance `lhs` against the bound `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub index: usize,
    /// Sweep cell, e.g. `delta=0.5`.
    pub group: String,
    pub n: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub rhs: f64,
    /// `rhs − lhs` when `rhs` is a bound on `lhs`.
    #[serde(serialize_with = "serialize_opt_f64")]
    pub margin: Option<f64>,
    /// `lhs / rhs`, or the suite's empirical constant.
    #[serde(serialize_with = "serialize_opt_f64")]
    pub ratio: Option<f64>,
    pub note: String,
}

impl TrialRow {
    fn new(index: usize, group: impl Into<String>, n: usize, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= VIOLATION_TOLERANCE {
            0.0
        } else {
            f64::INFINITY
        };
        TrialRow { index, group: group.into(), n, lhs, rhs, margin: Some(rhs - lhs), ratio: Some(ratio), note: String::new() }
    }

    /// A row recording two measurements, neither bounding the other.
    fn unbounded(index: usize, group: impl Into<String>, n: usize, lhs: f64, rhs: f64, ratio: Option<f64>) -> Self {
        TrialRow { index, group: group.into(), n, lhs, rhs, margin: None, ratio, note: String::new() }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn violated(&self) -> bool {
        self.margin.is_some_and(|m| m < -VIOLATION_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub suite: Suite,
    pub config: TrialConfig,
    pub rows: Vec<TrialRow>,
    pub violations: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub max_ratio: f64,
    /// Empirical constants, keyed by name and sweep cell.
    pub fitted: BTreeMap<String, f64>,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// RNG for trial `index` of `suite`.
pub fn trial_rng(seed: u64, suite: Suite, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((suite.stream() << 40) | index as u64);
    rng
}

fn random_in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..=radius)).collect();
        if p.iter().map(|x| x * x).sum::<f64>().sqrt() <= radius {
            return p;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `n` points, pairwise at least `delta` apart, barycenter at the origin,
/// inside the closed ball of radius `radius`.
pub fn sample_thick_config(
    n: usize,
    dim: usize,
    radius: f64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<PointCloud> {
    if n == 1 {
        return PointCloud::new(vec![vec![0.0; dim]]);
    }
    let mut attempts = 0;
    while attempts < MAX_SAMPLING_ATTEMPTS {
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut stuck = 0;
        while pts.len() < n && stuck < 200 {
            attempts += 1;
            let p = random_in_ball(rng, dim, radius);
            if pts.iter().all(|q| crate::space::euclidean(&p, q) >= delta) {
                pts.push(p);
            } else {
                stuck += 1;
            }
        }
        if pts.len() < n {
            continue;
        }
        let cloud = PointCloud::new(pts)?.centered();
        if (0..n).all(|i| norm(cloud.point(i)) <= radius) {
            return Ok(cloud);
        }
    }
    Err(Error::SamplingExhausted { attempts })
}

/// Distinct points of the integer lattice in `[-2, 2]^dim`, centered.
fn sample_lattice_config(n: usize, dim: usize, rng: &mut impl Rng) -> Result<PointCloud> {
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-2..=2) as f64).collect();
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    Ok(PointCloud::new(pts)?)
}

/// `δ`-thick copy of `x` with every point moved by exactly `eps` in norm
/// before recentering; the displacement field has zero mean so the
/// barycenter stays at the origin.
fn perturb_thick(x: &PointCloud, eps: f64, delta: f64, rng: &mut impl Rng) -> Result<PointCloud> {
    if eps == 0.0 {
        return Ok(x.clone());
    }
    let (n, dim) = (x.len(), x.dim());
    for _ in 0..MAX_SAMPLING_ATTEMPTS / 100 {
        let mut disp: Vec<Vec<f64>> = (0..n).map(|_| random_in_ball(rng, dim, 1.0)).collect();
        for a in 0..dim {
            let mean = disp.iter().map(|v| v[a]).sum::<f64>() / n as f64;
            disp.iter_mut().for_each(|v| v[a] -= mean);
        }
        let largest = disp.iter().map(|v| norm(v)).fold(0.0, f64::max);
        if largest == 0.0 {
            continue;
        }
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| x.point(i).iter().zip(&disp[i]).map(|(p, d)| p + d * eps / largest).collect())
            .collect();
        let y = PointCloud::new(pts)?;
        let thick = (0..n).all(|i| (i + 1..n).all(|j| y.distance(i, j) >= delta));
        if thick {
            return Ok(y);
        }
    }
    Err(Error::SamplingExhausted { attempts: MAX_SAMPLING_ATTEMPTS / 100 })
}

/// Breakpoint grid `0 = x_0 < ⋯ < x_m = reach` with a few random interior
/// points.
fn random_grid(rng: &mut impl Rng, reach: f64) -> Vec<f64> {
    let m = rng.random_range(1..=4);
    let mut xs: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..reach)).collect();
    xs.push(0.0);
    xs.push(reach);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Flat to the left of `-1` and slope `right_slope` past the last point, so
/// that two functions padded alike differ by a bounded amount on ℝ.
fn padded(xs: &[f64], ys: &[f64], right_slope: f64) -> Result<MonotoneFunction> {
    let mut bp = vec![(xs[0] - 1.0, ys[0])];
    bp.extend(xs.iter().copied().zip(ys.iter().copied()));
    let (xl, yl) = *bp.last().expect("nonempty");
    bp.push((xl + 1.0, yl + right_slope));
    MonotoneFunction::new(bp)
}

fn random_monotone_values(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let mut y = rng.random_range(0.0..1.0);
    let mut ys = vec![y];
    for _ in 1..m {
        if rng.random_bool(0.8) {
            y += rng.random_range(0.0..1.5);
        }
        ys.push(y);
    }
    ys
}

/// Monotone perturbation of `ys` by at most `eta`, kept nonnegative.
fn perturbed_values(rng: &mut impl Rng, ys: &[f64], eta: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(ys.len());
    for &y in ys {
        let v = (y + rng.random_range(-eta..=eta)).max(0.0);
        let floor = out.last().copied().unwrap_or(0.0);
        out.push(v.max(floor));
    }
    out
}

/// Convex PL values on `xs`: `f(0) ∈ [0, 0.5]`, sorted random slopes.
fn random_convex_values(rng: &mut impl Rng, xs: &[f64]) -> (Vec<f64>, f64) {
    let mut slopes: Vec<f64> = (1..xs.len()).map(|_| rng.random_range(0.0..2.0)).collect();
    slopes.sort_by(f64::total_cmp);
    let mut ys = vec![rng.random_range(0.0..=0.5)];
    for (i, s) in slopes.iter().enumerate() {
        let y = ys[i] + s * (xs[i + 1] - xs[i]);
        ys.push(y);
    }
    let last = slopes.last().copied().unwrap_or(0.0);
    (ys, last)
}

fn random_n(rng: &mut impl Rng, config: &TrialConfig) -> usize {
    rng.random_range(config.n_min..=config.n_max)
}

/// Cloud used by the barcode suites: lattice points or a thick sample.
fn barcode_cloud(rng: &mut impl Rng, config: &TrialConfig) -> Result<PointCloud> {
    let n = random_n(rng, config);
    if rng.random_bool(config.lattice_fraction) {
        sample_lattice_config(n, config.dim, rng)
    } else {
        sample_thick_config(n, config.dim, config.radius, config.delta, rng)
    }
}

fn barcode(
    cloud: &PointCloud,
    z: &[f64],
    f: Option<MonotoneFunction>,
    config: &TrialConfig,
) -> Result<WeightedBarcode> {
    let filtration = Filtration::from_cloud(cloud, z, config.backend(), f)?;
    weighted_barcode(&filtration, &config.l_max_length(), config.k_max, &Rationals)
}

fn max_radius(cloud: &PointCloud, z: &[f64]) -> f64 {
    (0..cloud.len()).map(|i| cloud.distance_to(i, z)).fold(0.0, f64::max)
}

/// `d_B(B(N(z,f)), B(N(z,g)))` against `‖f − g‖`.
pub fn trial_radius_stability(
    cloud: &PointCloud,
    z: &[f64],
    f: &MonotoneFunction,
    g: &MonotoneFunction,
    config: &TrialConfig,
) -> Result<(f64, f64)> {
    let lhs = bottleneck_weighted(
        &barcode(cloud, z, Some(f.clone()), config)?.bars,
        &barcode(cloud, z, Some(g.clone()), config)?.bars,
    )
    .0;
    Ok((lhs, f.sup_distance(g)))
}

/// `d_B(B(N(z,f)), B(N(z',f)))` against `f(‖z − z'‖)`, for convex `f`.
pub fn trial_center_stability(
    cloud: &PointCloud,
    z: &[f64],
    z2: &[f64],
    f: &MonotoneFunction,
    config: &TrialConfig,
) -> Result<(f64, f64)> {
    if !f.is_convex() {
        return Err(Error::NotConvex);
    }
    let lhs = bottleneck_weighted(
        &barcode(cloud, z, Some(f.clone()), config)?.bars,
        &barcode(cloud, z2, Some(f.clone()), config)?.bars,
    )
    .0;
    Ok((lhs, f.eval(crate::space::euclidean(z, z2))))
}

/// `d_B(B(N(z,f)), B(N(z',g)))` against `‖f − g‖ + f(‖z − z'‖)`.
pub fn trial_composition_stability(
    cloud: &PointCloud,
    z: &[f64],
    z2: &[f64],
    f: &MonotoneFunction,
    g: &MonotoneFunction,
    config: &TrialConfig,
) -> Result<(f64, f64)> {
    if !f.is_convex() {
        return Err(Error::NotConvex);
    }
    let lhs = bottleneck_weighted(
        &barcode(cloud, z, Some(f.clone()), config)?.bars,
        &barcode(cloud, z2, Some(g.clone()), config)?.bars,
    )
    .0;
    Ok((lhs, f.sup_distance(g) + f.eval(crate::space::euclidean(z, z2))))
}

/// `|Mag(X) − Mag(Y)|` for `Y` an `eps`-perturbation of `X`, and the
/// empirical constant `|ΔMag|·δ/ε`.
pub fn trial_difference_bound(x: &PointCloud, y: &PointCloud, eps: f64, delta: f64) -> Result<(f64, f64)> {
    let mx = compute_magnitude(&FiniteMetricSpace::from_point_cloud(x, Backend::default())?)?;
    let my = compute_magnitude(&FiniteMetricSpace::from_point_cloud(y, Backend::default())?)?;
    let diff = (mx - my).abs();
    let constant = if eps > 0.0 { diff * delta / eps } else { 0.0 };
    Ok((diff, constant))
}

/// `d_L(Mag_X, Mag_Y)` and `d_{W,∞}(X, Y)`.
pub fn trial_profile_stability(x: &PointCloud, y: &PointCloud, scale: f64) -> Result<(f64, f64)> {
    let px = magnitude_profile(x, scale, None)?;
    let py = magnitude_profile(y, scale, None)?;
    Ok((profile_l1_distance(&px, &py)?, wasserstein_inf(x, y)?))
}

fn run_trials<T: Send>(
    config: &TrialConfig,
    suite: Suite,
    count: usize,
    trial: impl Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..count)
        .into_par_iter()
        .map(|i| trial(i, &mut trial_rng(config.seed, suite, i)))
        .collect()
}

fn summarize(suite: Suite, config: &TrialConfig, rows: Vec<TrialRow>) -> TrialReport {
    let violations = rows.iter().filter(|r| r.violated()).count();
    let max_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    TrialReport {
        suite,
        config: config.clone(),
        rows,
        violations,
        max_ratio,
        fitted: BTreeMap::new(),
        passed: violations == 0,
        notes: Vec::new(),
    }
}

/// Runs one suite. Deterministic for a fixed configuration.
pub fn run_suite(suite: Suite, config: &TrialConfig) -> Result<TrialReport> {
    config.validate()?;
    match suite {
        Suite::Radius => radius_suite(config),
        Suite::Center => center_suite(config),
        Suite::Composition => composition_suite(config),
        Suite::Difference => difference_suite(config),
        Suite::Profile => profile_suite(config),
        Suite::UpperBound => upper_bound_suite(config),
        Suite::Monotonicity => monotonicity_suite(config),
        Suite::Collinear => collinear_suite(config),
    }
}

fn radius_suite(config: &TrialConfig) -> Result<TrialReport> {
    let rows = run_trials(config, Suite::Radius, config.trials, |i, rng| {
        let cloud = barcode_cloud(rng, config)?;
        let z = random_in_ball(rng, config.dim, config.radius);
        let xs = random_grid(rng, max_radius(&cloud, &z) + 1.0);
        let fy = random_monotone_values(rng, xs.len());
        let eta = rng.random_range(0.0..0.5);
        let gy = perturbed_values(rng, &fy, eta);
        let f = padded(&xs, &fy, 1.0)?;
        let g = padded(&xs, &gy, 1.0)?;
        let (lhs, rhs) = trial_radius_stability(&cloud, &z, &f, &g, config)?;
        Ok(TrialRow::new(i, "", cloud.len(), lhs, rhs))
    })?;
    Ok(summarize(Suite::Radius, config, rows))
}

/// Every fourth trial uses `f = id`, the corollary case.
fn center_function(i: usize, rng: &mut ChaCha8Rng, reach: f64) -> Result<(MonotoneFunction, &'static str)> {
    if i % 4 == 0 {
        return Ok((MonotoneFunction::identity(), "identity"));
    }
    let xs = random_grid(rng, reach);
    let (ys, last) = random_convex_values(rng, &xs);
    let mut bp = vec![(xs[0] - 1.0, ys[0])];
    bp.extend(xs.iter().copied().zip(ys.iter().copied()));
    bp.push((xs[xs.len() - 1] + 1.0, ys[ys.len() - 1] + last));
    Ok((MonotoneFunction::new(bp)?, "convex"))
}

fn shifted_center(rng: &mut ChaCha8Rng, z: &[f64]) -> Vec<f64> {
    let s = rng.random_range(0.0..1.0);
    let dir = random_in_ball(rng, z.len(), 1.0);
    let len = norm(&dir).max(f64::MIN_POSITIVE);
    z.iter().zip(&dir).map(|(a, d)| a + s * d / len).collect()
}

fn split_by_note(report: &mut TrialReport) {
    let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in &report.rows {
        let e = per.entry(r.note.clone()).or_default();
        e.0 += 1;
        e.1 += r.violated() as usize;
    }
    for (note, (total, bad)) in per {
        report.notes.push(format!("{note}: {bad} of {total} trials violate the bound"));
        report.fitted.insert(format!("violations[{note}]"), bad as f64);
    }
}

fn center_suite(config: &TrialConfig) -> Result<TrialReport> {
    let rows = run_trials(config, Suite::Center, config.trials, |i, rng| {
        let cloud = barcode_cloud(rng, config)?;
        let z = random_in_ball(rng, config.dim, config.radius);
        let z2 = shifted_center(rng, &z);
        let reach = max_radius(&cloud, &z).max(max_radius(&cloud, &z2)) + 1.0;
        let (f, kind) = center_function(i, rng, reach)?;
        let (lhs, rhs) = trial_center_stability(&cloud, &z, &z2, &f, config)?;
        Ok(TrialRow::new(i, "", cloud.len(), lhs, rhs).with_note(kind))
    })?;
    let mut report = summarize(Suite::Center, config, rows);
    split_by_note(&mut report);
    Ok(report)
}

fn composition_suite(config: &TrialConfig) -> Result<TrialReport> {
    let rows = run_trials(config, Suite::Composition, config.trials, |i, rng| {
        let cloud = barcode_cloud(rng, config)?;
        let z = random_in_ball(rng, config.dim, config.radius);
        let z2 = shifted_center(rng, &z);
        let reach = max_radius(&cloud, &z).max(max_radius(&cloud, &z2)) + 1.0;
        let (f, kind) = center_function(i, rng, reach)?;
        // g: monotone perturbation of f on the same breakpoints and tails
        let bp: Vec<(f64, f64)> = f.breakpoints().collect();
        let ys: Vec<f64> = bp.iter().map(|p| p.1).collect();
        let eta = rng.random_range(0.0..0.5);
        let mut gy = perturbed_values(rng, &ys[..ys.len() - 1], eta);
        let tail = ys[ys.len() - 1] - ys[ys.len() - 2];
        gy.push(gy[gy.len() - 1] + tail);
        let g = MonotoneFunction::new(bp.iter().map(|p| p.0).zip(gy).collect())?;
        let (lhs, rhs) = trial_composition_stability(&cloud, &z, &z2, &f, &g, config)?;
        Ok(TrialRow::new(i, "", cloud.len(), lhs, rhs).with_note(kind))
    })?;
    let mut report = summarize(Suite::Composition, config, rows);
    split_by_note(&mut report);
    Ok(report)
}

fn cell(name: &str, v: f64) -> String {
    format!("{name}={v}")
}

fn difference_suite(config: &TrialConfig) -> Result<TrialReport> {
    let cells: Vec<(f64, f64)> = config
        .deltas
        .iter()
        .flat_map(|&d| config.epsilons.iter().map(move |&e| (d, e)))
        .collect();
    let per_cell = config.trials;
    let rows = run_trials(config, Suite::Difference, cells.len() * per_cell, |i, rng| {
        let (delta, eps) = cells[i / per_cell];
        let n = random_n(rng, config);
        let x = sample_thick_config(n, config.dim, config.radius, delta, rng)?;
        let y = perturb_thick(&x, eps, delta, rng)?;
        let (diff, constant) = trial_difference_bound(&x, &y, eps, delta)?;
        let group = format!("{},{}", cell("delta", delta), cell("eps", eps));
        Ok(TrialRow::unbounded(i, group, n, diff, eps, Some(constant)))
    })?;
    let mut report = summarize(Suite::Difference, config, rows);
    let mut passed = true;
    for &delta in &config.deltas {
        let mut by_eps = Vec::new();
        for &eps in &config.epsilons {
            let group = format!("{},{}", cell("delta", delta), cell("eps", eps));
            let c = report.rows.iter().filter(|r| r.group == group).filter_map(|r| r.ratio).fold(0.0, f64::max);
            report.fitted.insert(format!("C[{group}]"), c);
            by_eps.push((eps, c));
        }
        by_eps.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let (Some(small), Some(large)) = (by_eps.first(), by_eps.last()) {
            let ok = small.1 <= 10.0 * large.1 + VIOLATION_TOLERANCE;
            report.notes.push(format!(
                "delta={delta}: constant {:.3e} at eps={} vs {:.3e} at eps={} ({})",
                small.1,
                small.0,
                large.1,
                large.0,
                if ok { "no blow-up" } else { "grows as eps shrinks" }
            ));
            passed &= ok;
        }
    }
    report.passed = passed && report.rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite));
    Ok(report)
}

fn profile_suite(config: &TrialConfig) -> Result<TrialReport> {
    let per_cell = config.trials;
    let deltas = config.deltas.clone();
    let rows = run_trials(config, Suite::Profile, deltas.len() * per_cell, |i, rng| {
        let delta = deltas[i / per_cell];
        let n = random_n(rng, config);
        let x = sample_thick_config(n, config.dim, config.radius, delta, rng)?;
        let eps = delta * rng.random_range(0.01..0.3);
        let y = perturb_thick(&x, eps, delta, rng)?;
        let (dl, dw) = trial_profile_stability(&x, &y, config.radius)?;
        let ratio = if dw > 0.0 { dl / dw } else if dl == 0.0 { 0.0 } else { f64::INFINITY };
        Ok(TrialRow::unbounded(i, cell("delta", delta), n, dl, dw, Some(ratio)))
    })?;
    let mut report = summarize(Suite::Profile, config, rows);
    let scale = config.radius;
    let mut constants = Vec::new();
    for &delta in &deltas {
        let group = cell("delta", delta);
        let rows: Vec<&TrialRow> = report.rows.iter().filter(|r| r.group == group).collect();
        let excess = rows
            .iter()
            .map(|r| r.ratio.unwrap_or(f64::INFINITY) - 2.0 * (r.n * r.n) as f64)
            .fold(0.0, f64::max);
        let c = excess * delta / scale;
        let raw = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max) * delta / scale;
        report.fitted.insert(format!("C[{group}]"), c);
        report.fitted.insert(format!("C_linear_only[{group}]"), raw);
        constants.push(c);
    }
    let finite = report.rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite));
    let (lo, hi) = constants.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let stable = hi == 0.0 || (lo > 0.0 && hi / lo <= 5.0);
    report.notes.push(format!(
        "ratio d_L/d_W finite: {finite}; fitted C range [{lo:.3e}, {hi:.3e}]{}",
        if hi == 0.0 { " (every ratio is below 2n^2)" } else { "" }
    ));
    report.passed = finite && stable;
    Ok(report)
}

fn upper_bound_suite(config: &TrialConfig) -> Result<TrialReport> {
    let rows = run_trials(config, Suite::UpperBound, config.trials, |i, rng| {
        for _ in 0..50 {
            let n = rng.random_range(1..=config.n_max.max(1) + 3);
            let dim = rng.random_range(1..=3);
            let radius = rng.random_range(0.25..4.0);
            let delta = radius * rng.random_range(0.05..0.6);
            let Ok(x) = sample_thick_config(n, dim, radius, delta, rng) else { continue };
            let l = x.radius_about_barycenter();
            let mag = compute_magnitude(&FiniteMetricSpace::from_point_cloud(&x, Backend::default())?)?;
            return Ok(TrialRow::new(i, format!("dim={dim}"), n, mag, magnitude_upper_bound(n, l)));
        }
        Err(Error::SamplingExhausted { attempts: 50 })
    })?;
    Ok(summarize(Suite::UpperBound, config, rows))
}

fn monotonicity_suite(config: &TrialConfig) -> Result<TrialReport> {
    let rows = run_trials(config, Suite::Monotonicity, config.trials, |i, rng| {
        let n = rng.random_range(2..=config.n_max.max(2) + 3);
        let dim = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| random_in_ball(rng, dim, config.radius)).collect();
        let b = PointCloud::new(pts)?;
        let mut subset: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if subset.is_empty() || subset.len() == n {
            subset = vec![rng.random_range(0..n)];
        }
        let a = b.subset(&subset);
        let mag = |c: &PointCloud| -> Result<f64> {
            compute_magnitude(&FiniteMetricSpace::from_point_cloud(c, Backend::default())?)
        };
        Ok(TrialRow::new(i, "", n, mag(&a)?, mag(&b)?))
    })?;
    Ok(summarize(Suite::Monotonicity, config, rows))
}

/// `rank MH_{1,2}` of `{(0,0),(1,0),(2,0)}` and of the copy with the middle
/// point lifted by `eps`.
pub fn collinear_ranks(eps: f64, tau: f64) -> Result<(usize, usize)> {
    let backend = Backend::bucketed(tau)?;
    let l = Length::bucketed(2.0, tau);
    let x = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]])?;
    let y = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, eps], vec![2.0, 0.0]])?;
    let rx = homology_rank(&FiniteMetricSpace::from_point_cloud(&x, backend)?, 1, &l)?.rank;
    let ry = homology_rank(&FiniteMetricSpace::from_point_cloud(&y, backend)?, 1, &l)?.rank;
    Ok((rx, ry))
}

fn collinear_suite(config: &TrialConfig) -> Result<TrialReport> {
    let mut rows = Vec::new();
    let mut passed = true;
    for (i, &eps) in config.epsilons.iter().enumerate() {
        let (rx, ry) = collinear_ranks(eps, config.tau)?;
        // lifting the middle point lengthens the path by 2(√(1+ε²) − 1) ≈ ε²
        let defect = 2.0 * ((1.0 + eps * eps).sqrt() - 1.0);
        let resolved = defect > config.tau;
        if resolved {
            passed &= rx != ry;
        }
        let note = if resolved { "length defect above tau" } else { "length defect within tau" };
        rows.push(TrialRow::unbounded(i, cell("eps", eps), 3, rx as f64, ry as f64, None).with_note(note));
    }
    let mut report = summarize(Suite::Collinear, config, rows);
    report.passed = passed;
    report.notes.push("lhs = rank MH_{1,2}(X), rhs = rank MH_{1,2}(Y)".into());
    Ok(report)
}

/// Per-trial CSV: `index,group,n,lhs,rhs,margin,ratio,note`.
pub fn report_to_csv(report: &TrialReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "group", "n", "lhs", "rhs", "margin", "ratio", "note"]).expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.index.to_string(),
            r.group.clone(),
            r.n.to_string(),
            format_f64(r.lhs),
            format_f64(r.rhs),
            r.margin.map(format_f64).unwrap_or_default(),
            r.ratio.map(format_f64).unwrap_or_default(),
            r.note.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
