//! File formats: point clouds, distance matrices, barcodes, profiles and
//! monotone functions in JSON or CSV, plus a JSON writer that prints every
//! float with 17 significant digits.

use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::filtration::MonotoneFunction;
use crate::length::{
    big_to_small, decimal_rational_of_f64, format_rational, parse_big_rational, Backend, Length,
    Rational, DEFAULT_TAU,
};
use crate::persistence::{bar_order, WeightedBar, WeightedBarcode};
use crate::distances::MagnitudeProfile;
use crate::space::{FiniteMetricSpace, PointCloud};

/// Largest denominator for which a distance table is read exactly when the
/// backend is chosen automatically.
pub const AUTO_RATIONAL_MAX_DENOMINATOR: i64 = 1_000_000;

/// Writes floats as `d.dddddddddddddddde±x` (17 significant digits).
#[derive(Debug, Clone, Copy, Default)]
pub struct SignificantDigits17;

impl serde_json::ser::Formatter for SignificantDigits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn format_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Floats that may be infinite: `±∞` become the strings `"inf"`/`"-inf"`.
pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}

pub fn serialize_opt_f64<S: Serializer>(
    x: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_f64(v, s),
        None => s.serialize_none(),
    }
}

/// Exact lengths as `"p/q"` strings, bucketed lengths as numbers.
pub fn serialize_length<S: Serializer>(l: &Length, s: S) -> std::result::Result<S::Ok, S::Error> {
    match l {
        Length::Exact(r) => s.serialize_str(&format_rational(r)),
        Length::Bucketed { value, .. } => s.serialize_f64(*value),
    }
}

/// A JSON scalar that may be a number or a string (`"p/q"`, `"inf"`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Text(t) => match t.trim() {
                "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
                "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
                other => parse_big_rational(other)
                    .map(|r| ratio_to_f64(&r))
                    .ok_or_else(|| Error::Parse(format!("not a number: {other:?}"))),
            },
        }
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Scalar::Number(x) => decimal_rational_of_f64(*x),
            Scalar::Text(t) => parse_big_rational(t),
        }
        .ok_or_else(|| Error::Parse(format!("not a finite rational: {self:?}")))
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// How to read a CSV table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Points,
    Distances,
}

/// A parsed space file before a backend is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceInput {
    Points(PointCloud),
    Distances(Vec<Vec<Scalar>>),
}

#[derive(Deserialize)]
struct SpaceJson {
    points: Option<Vec<Vec<Scalar>>>,
    dist: Option<Vec<Vec<Scalar>>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// Parses JSON (`{"points": …}` or `{"dist": …}`) or CSV. A CSV table is a
/// distance matrix when it is square and symmetric with zero diagonal, unless
/// `kind` says otherwise.
pub fn parse_space(text: &str, kind: Option<InputKind>) -> Result<SpaceInput> {
    if text.trim_start().starts_with('{') {
        let j: SpaceJson = serde_json::from_str(text)?;
        let _ = j.labels;
        return match (j.points, j.dist, kind) {
            (Some(p), None, None | Some(InputKind::Points)) => Ok(SpaceInput::Points(points_from(&p)?)),
            (None, Some(d), None | Some(InputKind::Distances)) => Ok(SpaceInput::Distances(d)),
            _ => Err(Error::Parse("JSON input needs exactly one of \"points\" or \"dist\"".into())),
        };
    }
    let rows = parse_csv_table(text)?;
    let kind = kind.unwrap_or_else(|| {
        if looks_like_distance_matrix(&rows) {
            InputKind::Distances
        } else {
            InputKind::Points
        }
    });
    match kind {
        InputKind::Points => Ok(SpaceInput::Points(points_from(&rows)?)),
        InputKind::Distances => Ok(SpaceInput::Distances(rows)),
    }
}

fn points_from(rows: &[Vec<Scalar>]) -> Result<PointCloud> {
    let pts = rows
        .iter()
        .map(|r| r.iter().map(Scalar::to_f64).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(pts)
}

fn parse_csv_table(text: &str) -> Result<Vec<Vec<Scalar>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let cells: Vec<&str> = record.iter().collect();
        if cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        let numeric = cells.iter().all(|c| parse_big_rational(c).is_some());
        if !numeric {
            if i == 0 {
                continue; // header row
            }
            return Err(Error::Parse(format!("non-numeric CSV row {}: {cells:?}", i + 1)));
        }
        rows.push(cells.iter().map(|c| Scalar::Text((*c).to_string())).collect());
    }
    Ok(rows)
}

fn looks_like_distance_matrix(rows: &[Vec<Scalar>]) -> bool {
    let n = rows.len();
    if n < 2 || rows.iter().any(|r| r.len() != n) {
        return false;
    }
    let v = |i: usize, j: usize| rows[i][j].to_rational().ok();
    (0..n).all(|i| v(i, i).is_some_and(|x| num_traits::Zero::is_zero(&x)))
        && (0..n).all(|i| (0..n).all(|j| v(i, j).is_some() && v(i, j) == v(j, i)))
}

/// Builds the metric space, choosing a backend when `backend` is `None`:
/// rational for tables with small denominators and for clouds whose
/// distances are all rational, bucketed otherwise.
pub fn space_from_input(input: &SpaceInput, backend: Option<Backend>) -> Result<FiniteMetricSpace> {
    match input {
        SpaceInput::Points(cloud) => match backend {
            Some(b) => FiniteMetricSpace::from_point_cloud(cloud, b),
            None => match FiniteMetricSpace::from_point_cloud(cloud, Backend::Rational) {
                Err(Error::IrrationalDistanceInRationalBackend { .. })
                | Err(Error::OverflowInExactArithmetic) => {
                    FiniteMetricSpace::from_point_cloud(cloud, Backend::default())
                }
                other => other,
            },
        },
        SpaceInput::Distances(rows) => {
            let exact: Option<Vec<Vec<Rational>>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|s| s.to_rational().ok().and_then(|q| big_to_small(&q)))
                        .collect()
                })
                .collect();
            let small = exact.as_ref().is_some_and(|t| {
                t.iter().flatten().all(|q| *q.denom() <= AUTO_RATIONAL_MAX_DENOMINATOR)
            });
            match backend {
                Some(Backend::Rational) => FiniteMetricSpace::from_rational_matrix(
                    &exact.ok_or(Error::OverflowInExactArithmetic)?,
                ),
                None if small => FiniteMetricSpace::from_rational_matrix(&exact.expect("checked")),
                b => {
                    let table = rows
                        .iter()
                        .map(|r| r.iter().map(Scalar::to_f64).collect::<Result<Vec<f64>>>())
                        .collect::<Result<Vec<_>>>()?;
                    FiniteMetricSpace::from_distance_matrix(&table, b.unwrap_or_default())
                }
            }
        }
    }
}

pub fn parse_point_cloud(text: &str) -> Result<PointCloud> {
    match parse_space(text, Some(InputKind::Points))? {
        SpaceInput::Points(c) => Ok(c),
        SpaceInput::Distances(_) => Err(Error::Parse("expected a point cloud".into())),
    }
}

#[derive(Deserialize)]
struct BarJson {
    birth: Scalar,
    death: Scalar,
    weight: Scalar,
    dim: usize,
}

#[derive(Deserialize)]
struct ManifestTau {
    tau: Option<f64>,
}

#[derive(Deserialize)]
struct BarcodeJson {
    bars: Vec<BarJson>,
    #[serde(default)]
    manifest: Option<ManifestTau>,
}

/// Weight text: `"p/q"` strings are exact, numbers are bucketed with `tau`.
fn weight_from(s: &Scalar, tau: f64) -> Result<Length> {
    match s {
        Scalar::Text(t) => parse_big_rational(t)
            .and_then(|r| big_to_small(&r))
            .map(Length::exact)
            .ok_or_else(|| Error::Parse(format!("bad weight {t:?}"))),
        Scalar::Number(x) => Ok(Length::bucketed(*x, tau)),
    }
}

fn check_bar(bar: WeightedBar) -> Result<WeightedBar> {
    if bar.birth.is_nan() || bar.death.is_nan() || bar.birth.is_infinite() || bar.birth > bar.death {
        return Err(Error::Parse(format!("invalid bar [{}, {})", bar.birth, bar.death)));
    }
    Ok(bar)
}

/// Reads `{"bars": [{birth, death, weight, dim}, …]}`.
pub fn parse_barcode_json(text: &str) -> Result<WeightedBarcode> {
    let j: BarcodeJson = serde_json::from_str(text)?;
    let tau = j.manifest.and_then(|m| m.tau).unwrap_or(DEFAULT_TAU);
    let bars = j
        .bars
        .iter()
        .map(|b| {
            check_bar(WeightedBar {
                birth: b.birth.to_f64()?,
                death: b.death.to_f64()?,
                weight: weight_from(&b.weight, tau)?,
                dim: b.dim,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedBarcode::new(bars))
}

pub const BARCODE_CSV_HEADER: &str = "birth,death,weight,dim";

/// Flat CSV `birth,death,weight,dim` sorted by (dim, weight, birth); infinite
/// deaths are written as `inf`.
pub fn barcode_to_csv(barcode: &WeightedBarcode) -> String {
    let mut bars = barcode.bars.clone();
    bars.sort_by(bar_order);
    let mut out = String::from(BARCODE_CSV_HEADER);
    out.push('\n');
    for b in &bars {
        let weight = match b.weight {
            Length::Exact(r) => format_rational(&r),
            Length::Bucketed { value, .. } => format_f64(value),
        };
        out.push_str(&format!("{},{},{},{}\n", format_f64(b.birth), format_f64(b.death), weight, b.dim));
    }
    out
}

/// Inverse of [`barcode_to_csv`]. Float weights are bucketed with `tau`;
/// lines starting with `#` are skipped.
pub fn parse_barcode_csv(text: &str, tau: f64) -> Result<WeightedBarcode> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != BARCODE_CSV_HEADER {
        return Err(Error::Parse(format!("expected header {BARCODE_CSV_HEADER:?}")));
    }
    let mut bars = Vec::new();
    for record in reader.records() {
        let r = record?;
        let text = |i: usize| Scalar::Text(r[i].to_string());
        let weight = if r[2].contains('/') || !r[2].contains(['.', 'e', 'E']) {
            weight_from(&text(2), tau)?
        } else {
            Length::bucketed(text(2).to_f64()?, tau)
        };
        bars.push(check_bar(WeightedBar {
            birth: text(0).to_f64()?,
            death: text(1).to_f64()?,
            weight,
            dim: r[3].parse().map_err(|_| Error::Parse(format!("bad dim {:?}", &r[3])))?,
        })?);
    }
    Ok(WeightedBarcode::new(bars))
}

#[derive(Deserialize)]
struct ProfileJson {
    #[serde(alias = "L")]
    scale: f64,
    radii: Vec<f64>,
    values: Vec<f64>,
}

/// Reads `{"scale": L, "radii": […], "values": […]}` (`"L"` accepted too).
pub fn parse_profile_json(text: &str) -> Result<MagnitudeProfile> {
    let j: ProfileJson = serde_json::from_str(text)?;
    MagnitudeProfile::new(j.scale, j.radii, j.values)
}

#[derive(Deserialize)]
struct FunctionJson {
    breakpoints: Vec<(f64, f64)>,
}

/// Reads `{"breakpoints": [[x, y], …]}`.
pub fn parse_monotone_function(text: &str) -> Result<MonotoneFunction> {
    let j: FunctionJson = serde_json::from_str(text)?;
    MonotoneFunction::new(j.breakpoints)
}
