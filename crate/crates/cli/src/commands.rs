use std::fs;
use std::io::Write;
use std::path::Path;

use maghom::distances::{bottleneck_weighted, magnitude_profile, profile_l1_distance, wasserstein_inf, Matching, MagnitudeProfile};
use maghom::homology::{euler_characteristic, EulerRoute, SliceComplex};
use maghom::io::{
    barcode_to_csv, parse_barcode_csv, parse_barcode_json, parse_monotone_function, parse_point_cloud,
    parse_profile_json, parse_space, serialize_f64, serialize_length, serialize_opt_f64, space_from_input, to_json,
    InputKind, SpaceInput,
};
use maghom::chains::{realized_lengths, DEFAULT_TUPLE_BUDGET};
use maghom::length::parse_rational;
use maghom::linalg::{Field, PrimeField, Rationals};
use maghom::magnitude::{compute_weighting, magnitude_upper_bound};
use maghom::persistence::{weighted_barcode, WeightedBar, WeightedBarcode};
use maghom::stability::{report_to_csv, run_suite, Suite, TrialConfig, TrialReport};
use maghom::{Backend, Error, FiniteMetricSpace, Filtration, Length, PointCloud};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::manifest::{InputHash, RunManifest};
use crate::{BackendChoice, KindChoice, OutArgs, SpaceArgs};

/// Version of the stability configuration format.
pub const STABILITY_CONFIG_VERSION: u64 = 1;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let (code, message) = match self {
            CliError::Usage(m) => ("USAGE_ERROR", m.clone()),
            CliError::Domain(e) => (e.code(), e.to_string()),
        };
        serde_json::json!({ "error": { "code": code, "message": message } }).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_input(path: &Path) -> CliResult<(String, InputHash)> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let hash = InputHash::of(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))?;
    Ok((text, hash))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn emit<T: Serialize>(value: &T, out: &OutArgs) -> CliResult<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    match &out.out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}")).into()),
    }
}

/// A CSV file whose first line carries the manifest as a comment.
fn csv_with_manifest(manifest: &RunManifest, body: &str) -> CliResult<String> {
    Ok(format!("# manifest: {}\n{body}", to_json(manifest)?))
}

struct LoadedSpace {
    space: FiniteMetricSpace,
    cloud: Option<PointCloud>,
    hash: InputHash,
}

fn load_space(args: &SpaceArgs) -> CliResult<LoadedSpace> {
    let (text, hash) = read_input(&args.input)?;
    let kind = match args.kind {
        KindChoice::Auto => None,
        KindChoice::Points => Some(InputKind::Points),
        KindChoice::Distances => Some(InputKind::Distances),
    };
    let input = parse_space(&text, kind)?;
    let explicit = match args.backend {
        BackendChoice::Auto => None,
        BackendChoice::Rational => Some(Backend::Rational),
        BackendChoice::Bucketed => Some(Backend::bucketed(args.tau)?),
    };
    let mut space = space_from_input(&input, explicit)?;
    if explicit.is_none() && space.backend().tau().is_some_and(|t| t != args.tau) {
        space = space_from_input(&input, Some(Backend::bucketed(args.tau)?))?;
    }
    let cloud = match input {
        SpaceInput::Points(c) => Some(c),
        SpaceInput::Distances(_) => None,
    };
    Ok(LoadedSpace { space, cloud, hash })
}

fn parse_length(text: &str, backend: Backend) -> CliResult<Length> {
    let bad = || CliError::Usage(format!("not a length: {text:?}"));
    let length = match backend {
        Backend::Rational => Length::exact(parse_rational(text).ok_or_else(bad)?),
        Backend::Bucketed { tau } => {
            let v = match text.trim().parse::<f64>() {
                Ok(v) => v,
                Err(_) => parse_rational(text).map(|r| *r.numer() as f64 / *r.denom() as f64).ok_or_else(bad)?,
            };
            Length::bucketed(v, tau)
        }
    };
    if length.is_negative() || !length.to_f64().is_finite() {
        return Err(bad());
    }
    Ok(length)
}

/// Integers as JSON numbers when they fit in 64 bits, else decimal strings.
fn big_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => v.into(),
        None => x.to_string().into(),
    }
}

#[derive(Serialize)]
struct MagnitudeOutput {
    manifest: RunManifest,
    n: usize,
    magnitude: f64,
    weighting: Vec<f64>,
    /// Radius bound about the barycenter; point clouds only.
    #[serde(serialize_with = "serialize_opt_f64")]
    upper_bound: Option<f64>,
}

pub fn magnitude(args: &SpaceArgs, out: &OutArgs) -> CliResult<()> {
    let loaded = load_space(args)?;
    let w = compute_weighting(&loaded.space)?;
    let mut manifest = RunManifest::new("magnitude").with_backend(loaded.space.backend());
    manifest.inputs.push(loaded.hash);
    let upper_bound = loaded
        .cloud
        .as_ref()
        .map(|c| magnitude_upper_bound(c.len(), c.radius_about_barycenter()));
    emit(
        &MagnitudeOutput { manifest, n: loaded.space.len(), magnitude: w.magnitude(), weighting: w.w.clone(), upper_bound },
        out,
    )
}

#[derive(Serialize)]
struct RankRow {
    k: usize,
    #[serde(serialize_with = "serialize_length")]
    l: Length,
    rank: usize,
    torsion: Vec<serde_json::Value>,
}

#[derive(Serialize)]
struct EulerRow {
    #[serde(serialize_with = "serialize_length")]
    l: Length,
    value: serde_json::Value,
    route: EulerRoute,
}

#[derive(Serialize)]
struct HomologyOutput {
    manifest: RunManifest,
    n: usize,
    ranks: Vec<RankRow>,
    euler: Vec<EulerRow>,
}

pub fn homology(args: &SpaceArgs, lmax: &str, kmax: Option<usize>, out: &OutArgs) -> CliResult<()> {
    let loaded = load_space(args)?;
    let space = &loaded.space;
    let l_max = parse_length(lmax, space.backend())?;
    let mut ranks = Vec::new();
    let mut euler = Vec::new();
    for l in realized_lengths(space, &l_max) {
        let top = kmax.unwrap_or_else(|| maghom::chains::default_k_max(space, &l));
        let complex = SliceComplex::build(space, &l, top, DEFAULT_TUPLE_BUDGET)?;
        for h in complex.integer_homology() {
            ranks.push(RankRow { k: h.k, l: h.l, rank: h.rank, torsion: h.torsion.iter().map(big_json).collect() });
        }
        let chi = euler_characteristic(space, &l, None)?;
        euler.push(EulerRow { l, value: big_json(&chi.value), route: chi.route });
    }
    let mut manifest =
        RunManifest::new("homology").with_backend(space.backend()).with_lengths(Some(&l_max), kmax);
    manifest.inputs.push(loaded.hash);
    emit(&HomologyOutput { manifest, n: space.len(), ranks, euler }, out)
}

pub struct BarcodeRequest<'a> {
    pub space: &'a SpaceArgs,
    pub center: Option<&'a [f64]>,
    pub center_index: Option<usize>,
    pub lmax: &'a str,
    pub kmax: Option<usize>,
    pub repar: Option<&'a Path>,
    pub field: &'a str,
    pub csv: Option<&'a Path>,
    pub out: &'a OutArgs,
}

#[derive(Serialize)]
struct BarcodeOutput<'a> {
    manifest: &'a RunManifest,
    bars: &'a [WeightedBar],
    dropped_zero_bars: usize,
    field: &'a str,
    warnings: &'a [String],
}

fn barcode_over<F: Field>(f: &Filtration, l_max: &Length, k_max: Option<usize>, field: &F) -> CliResult<WeightedBarcode> {
    Ok(weighted_barcode(f, l_max, k_max, field)?)
}

pub fn barcode(req: BarcodeRequest<'_>) -> CliResult<()> {
    let loaded = load_space(req.space)?;
    let backend = loaded.space.backend();
    let mut manifest = RunManifest::new("barcode").with_backend(backend);
    manifest.inputs.push(loaded.hash.clone());
    let repar = match req.repar {
        Some(path) => {
            let (text, hash) = read_input(path)?;
            manifest.inputs.push(hash);
            Some(parse_monotone_function(&text)?)
        }
        None => None,
    };
    let filtration = match (req.center, req.center_index, &loaded.cloud) {
        (Some(z), None, Some(cloud)) => Filtration::from_cloud(cloud, z, backend, repar)?,
        (Some(_), None, None) => {
            return Err(CliError::Usage("--center needs a point cloud; use --center-index for a distance matrix".into()))
        }
        (None, Some(i), _) => Filtration::from_space(loaded.space.clone(), i, repar)?,
        _ => return Err(CliError::Usage("give exactly one of --center or --center-index".into())),
    };
    let l_max = parse_length(req.lmax, backend)?;
    manifest = manifest.with_lengths(Some(&l_max), req.kmax);
    let barcode = match req.field.trim() {
        "Q" | "q" => barcode_over(&filtration, &l_max, req.kmax, &Rationals)?,
        p => {
            let p: u64 = p.parse().map_err(|_| CliError::Usage(format!("--field must be Q or a prime, got {p:?}")))?;
            barcode_over(&filtration, &l_max, req.kmax, &PrimeField::new(p)?)?
        }
    };
    if let Some(path) = req.csv {
        write_file(path, &csv_with_manifest(&manifest, &barcode_to_csv(&barcode))?)?;
    }
    emit(
        &BarcodeOutput {
            manifest: &manifest,
            bars: &barcode.bars,
            dropped_zero_bars: barcode.metadata.dropped_zero_bars,
            field: &barcode.metadata.field,
            warnings: &barcode.metadata.warnings,
        },
        req.out,
    )
}

#[derive(Serialize)]
struct BottleneckOutput {
    manifest: RunManifest,
    #[serde(serialize_with = "serialize_f64")]
    distance: f64,
    matching: Matching,
}

#[derive(Serialize)]
struct DistanceOutput {
    manifest: RunManifest,
    #[serde(serialize_with = "serialize_f64")]
    distance: f64,
}

fn load_barcode(path: &Path, tau: f64) -> CliResult<(WeightedBarcode, InputHash)> {
    let (text, hash) = read_input(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let barcode = if is_csv { parse_barcode_csv(&text, tau)? } else { parse_barcode_json(&text)? };
    Ok((barcode, hash))
}

pub fn distance_bottleneck(left: &Path, right: &Path, tau: f64, out: &OutArgs) -> CliResult<()> {
    Backend::bucketed(tau)?;
    let (a, ha) = load_barcode(left, tau)?;
    let (b, hb) = load_barcode(right, tau)?;
    let (distance, matching) = bottleneck_weighted(&a.bars, &b.bars);
    let mut manifest = RunManifest::new("distance bottleneck");
    manifest.inputs = vec![ha, hb];
    emit(&BottleneckOutput { manifest, distance, matching }, out)
}

pub fn distance_wasserstein(left: &Path, right: &Path, out: &OutArgs) -> CliResult<()> {
    let (ta, ha) = read_input(left)?;
    let (tb, hb) = read_input(right)?;
    let distance = wasserstein_inf(&parse_point_cloud(&ta)?, &parse_point_cloud(&tb)?)?;
    let mut manifest = RunManifest::new("distance wasserstein");
    manifest.inputs = vec![ha, hb];
    emit(&DistanceOutput { manifest, distance }, out)
}

pub fn distance_profile(left: &Path, right: &Path, out: &OutArgs) -> CliResult<()> {
    let (ta, ha) = read_input(left)?;
    let (tb, hb) = read_input(right)?;
    let distance = profile_l1_distance(&parse_profile_json(&ta)?, &parse_profile_json(&tb)?)?;
    let mut manifest = RunManifest::new("distance profile");
    manifest.inputs = vec![ha, hb];
    emit(&DistanceOutput { manifest, distance }, out)
}

#[derive(Serialize)]
struct ProfileOutput {
    manifest: RunManifest,
    #[serde(flatten)]
    profile: MagnitudeProfile,
}

pub fn profile(input: &Path, scale: f64, center: Option<&[f64]>, out: &OutArgs) -> CliResult<()> {
    let (text, hash) = read_input(input)?;
    let cloud = parse_point_cloud(&text)?;
    let profile = magnitude_profile(&cloud, scale, center)?;
    let mut manifest = RunManifest::new("profile");
    manifest.inputs.push(hash);
    emit(&ProfileOutput { manifest, profile }, out)
}

#[derive(Serialize)]
struct StabilityOutput<'a> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    report: &'a TrialReport,
}

/// Reads a configuration object; an optional `"schema_version"` must match.
fn parse_trial_config(text: &str) -> CliResult<TrialConfig> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(Error::from)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("stability config must be a JSON object".into()))?;
    if let Some(v) = obj.remove("schema_version") {
        if v.as_u64() != Some(STABILITY_CONFIG_VERSION) {
            return Err(Error::Parse(format!(
                "unsupported schema_version {v}; expected {STABILITY_CONFIG_VERSION}"
            ))
            .into());
        }
    }
    Ok(serde_json::from_value(value).map_err(Error::from)?)
}

pub fn stability(
    suite: &str,
    config: Option<&Path>,
    seed: Option<u64>,
    trials: Option<usize>,
    csv: Option<&Path>,
    out: &OutArgs,
) -> CliResult<()> {
    let suite: Suite = suite.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let mut manifest = RunManifest::new(&format!("stability {suite}"));
    let mut cfg = match config {
        Some(path) => {
            let (text, hash) = read_input(path)?;
            manifest.inputs.push(hash);
            parse_trial_config(&text)?
        }
        None => TrialConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let report = run_suite(suite, &cfg)?;
    manifest.backend = Some("bucketed");
    manifest.tau = Some(cfg.tau);
    manifest.l_max = Some(cfg.l_max.to_string());
    manifest.k_max = cfg.k_max;
    manifest.seed = Some(cfg.seed);
    if let Some(path) = csv {
        write_file(path, &csv_with_manifest(&manifest, &report_to_csv(&report))?)?;
    }
    emit(&StabilityOutput { manifest: &manifest, report: &report }, out)
}
