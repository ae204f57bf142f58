//! Model files, CSV tables and JSON decision records.
//!
//! Every number written here goes through [`fmt_num`], so outputs are stable
//! byte for byte across runs.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value};

use crate::causality::{CausalDecision, Surface};
use crate::cone::WitnessRow;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{CausalCurve, DomainBox, Mass, Metric, MixedState, Settings, SpacetimeModel, VectorPotentials};
use crate::oracle::Verdict;

/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 17;

/// Twelve significant digits; scientific notation outside `1e-5 ≤ |x| < 1e12`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000000".into();
    }
    let sci = format!("{x:.11e}");
    // exponent after rounding to 12 digits
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        sci
    }
}

/// JSON number with [`fmt_num`] digits; `null` when not finite.
pub fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(fmt_num(x).parse::<Number>().expect("formatted float is valid JSON"))
}

fn json_point(x: &[f64]) -> Value {
    Value::Array(x.iter().map(|v| json_num(*v)).collect())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    dimension: usize,
    metric: MetricDoc,
    mass: MassDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    potentials: Option<PotentialsDoc>,
    domain: DomainDoc,
    #[serde(default)]
    grid: GridDoc,
    #[serde(default)]
    tolerances: ToleranceDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum MetricDoc {
    Minkowski,
    Conformal2d { omega: String },
    /// `frame[a][μ] = e_a^μ`.
    Vielbein4d { frame: Vec<Vec<String>> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum MassDoc {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Field {
        re: String,
        #[serde(default = "zero_expr")]
        im: String,
    },
    Diagonal,
}

fn zero_expr() -> String {
    "0".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialsDoc {
    a: Vec<String>,
    b: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainDoc {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GridDoc {
    dp_time_steps: usize,
    dp_space_steps: usize,
    certification_points: usize,
}

impl Default for GridDoc {
    fn default() -> Self {
        let s = Settings::default();
        GridDoc {
            dp_time_steps: s.dp_time_steps,
            dp_space_steps: s.dp_space_steps,
            certification_points: s.certification_points,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ToleranceDoc {
    psd: f64,
    dp: f64,
}

impl Default for ToleranceDoc {
    fn default() -> Self {
        let s = Settings::default();
        ToleranceDoc {
            psd: s.psd_tolerance,
            dp: s.dp_tolerance,
        }
    }
}

/// 1-based line of `key` inside `[section]` (or the top level when empty).
fn line_of(source: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut section_line = 0;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                section_line = i + 1;
            }
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return i + 1;
                }
            }
        }
    }
    section_line
}

struct Ctx<'a> {
    source: &'a str,
}

impl Ctx<'_> {
    fn error(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        Error::ModelFile {
            key: full,
            line: line_of(self.source, section, key),
            message: message.into(),
        }
    }

    fn expr(&self, section: &str, key: &str, text: &str) -> Result<Expr> {
        Expr::parse(text).map_err(|e| self.error(section, key, e.to_string()))
    }
}

/// Parses a model file.
pub fn parse_model(source: &str) -> Result<SpacetimeModel> {
    let doc: ModelDoc = toml::from_str(source).map_err(|e| {
        let line = e.span().map_or(0, |s| source[..s.start.min(source.len())].lines().count().max(1));
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "<document>".into());
        Error::ModelFile { key, line, message: msg }
    })?;
    let cx = Ctx { source };
    let n = doc.dimension;
    if n != 2 && n != 4 {
        return Err(cx.error("", "dimension", format!("unsupported dimension {n}: only 2 and 4")));
    }
    let metric = match &doc.metric {
        MetricDoc::Minkowski => Metric::Minkowski,
        MetricDoc::Conformal2d { omega } => Metric::Conformal2D {
            omega: cx.expr("metric", "omega", omega)?,
        },
        MetricDoc::Vielbein4d { frame } => {
            if frame.len() != 4 || frame.iter().any(|r| r.len() != 4) {
                return Err(cx.error("metric", "frame", "expected 4 rows of 4 expressions"));
            }
            let mut parsed: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::constant(0.0)));
            for (a, row) in frame.iter().enumerate() {
                for (mu, text) in row.iter().enumerate() {
                    parsed[a][mu] = cx.expr("metric", "frame", text)?;
                }
            }
            Metric::Vielbein4D { frame: Box::new(parsed) }
        }
    };
    let mass = match &doc.mass {
        MassDoc::Constant { re, im } => Mass::Constant(Complex64::new(*re, *im)),
        MassDoc::Field { re, im } => Mass::Field {
            re: cx.expr("mass", "re", re)?,
            im: cx.expr("mass", "im", im)?,
        },
        MassDoc::Diagonal => Mass::Diagonal,
    };
    let domain = DomainBox::new(doc.domain.lower.clone(), doc.domain.upper.clone())
        .map_err(|e| cx.error("domain", "lower", e.to_string()))?;
    for (key, value) in [
        ("dp_time_steps", doc.grid.dp_time_steps),
        ("dp_space_steps", doc.grid.dp_space_steps),
        ("certification_points", doc.grid.certification_points),
    ] {
        if value < MIN_RESOLUTION {
            return Err(cx.error("grid", key, format!("resolution {value} below {MIN_RESOLUTION}")));
        }
    }
    for (key, value) in [("psd", doc.tolerances.psd), ("dp", doc.tolerances.dp)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(cx.error("tolerances", key, "tolerance must be finite and non-negative"));
        }
    }
    let settings = Settings {
        dp_time_steps: doc.grid.dp_time_steps,
        dp_space_steps: doc.grid.dp_space_steps,
        certification_points: doc.grid.certification_points,
        psd_tolerance: doc.tolerances.psd,
        dp_tolerance: doc.tolerances.dp,
    };
    let mut model = SpacetimeModel::new(n, metric, mass, domain)
        .map_err(|e| cx.error("", "dimension", e.to_string()))?
        .with_settings(settings);
    if let Some(p) = &doc.potentials {
        let parse = |key: &str, list: &[String]| -> Result<Vec<Expr>> {
            list.iter().map(|t| cx.expr("potentials", key, t)).collect()
        };
        let potentials = VectorPotentials {
            a: parse("a", &p.a)?,
            b: parse("b", &p.b)?,
        };
        model = model
            .with_vector_potentials(potentials)
            .map_err(|e| cx.error("potentials", "a", e.to_string()))?;
    }
    Ok(model)
}

/// Serializes a model so that [`parse_model`] gives it back unchanged.
pub fn dump_model(model: &SpacetimeModel) -> String {
    let strings = |v: &[Expr]| v.iter().map(|e| e.source().to_string()).collect::<Vec<_>>();
    let doc = ModelDoc {
        dimension: model.dimension,
        metric: match &model.metric {
            Metric::Minkowski => MetricDoc::Minkowski,
            Metric::Conformal2D { omega } => MetricDoc::Conformal2d {
                omega: omega.source().to_string(),
            },
            Metric::Vielbein4D { frame } => MetricDoc::Vielbein4d {
                frame: frame.iter().map(|row| strings(row)).collect(),
            },
        },
        mass: match &model.mass {
            Mass::Constant(m) => MassDoc::Constant { re: m.re, im: m.im },
            Mass::Field { re, im } => MassDoc::Field {
                re: re.source().to_string(),
                im: im.source().to_string(),
            },
            Mass::Diagonal => MassDoc::Diagonal,
        },
        potentials: model.vector_potentials.as_ref().map(|p| PotentialsDoc {
            a: strings(&p.a),
            b: strings(&p.b),
        }),
        domain: DomainDoc {
            lower: model.domain.lower.clone(),
            upper: model.domain.upper.clone(),
        },
        grid: GridDoc {
            dp_time_steps: model.settings.dp_time_steps,
            dp_space_steps: model.settings.dp_space_steps,
            certification_points: model.settings.certification_points,
        },
        tolerances: ToleranceDoc {
            psd: model.settings.psd_tolerance,
            dp: model.settings.dp_tolerance,
        },
    };
    toml::to_string(&doc).expect("model document serializes")
}

/// Reads a curve table with header `t,x0,...,x{n-1}`.
pub fn read_curve<R: Read>(reader: R, dimension: usize) -> Result<CausalCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv { line: 1, message: e.to_string() })?
        .clone();
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((0..dimension).map(|i| format!("x{i}")))
        .collect();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut params = Vec::new();
    let mut points = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Csv { line, message: e.to_string() })?;
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Csv { line, message: e.to_string() })?;
        params.push(values[0]);
        points.push(values[1..].to_vec());
    }
    CausalCurve::new(params, points)
}

pub fn write_curve<W: Write>(mut out: W, curve: &CausalCurve) -> std::io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((0..curve.dimension()).map(|i| format!("x{i}")));
    writeln!(out, "{}", header.join(","))?;
    for (t, x) in curve.params().iter().zip(curve.points()) {
        let mut row = vec![fmt_num(*t)];
        row.extend(x.iter().map(|v| fmt_num(*v)));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

const AXES: [&str; 4] = ["t", "x", "y", "z"];

/// Surface table `t,x[,y,z],phi_max,reachable`; `phi_max` is `nan` off the cone.
pub fn write_surface<W: Write>(mut out: W, surface: &Surface, dimension: usize) -> std::io::Result<()> {
    writeln!(out, "{},phi_max,reachable", AXES[..dimension].join(","))?;
    for row in &surface.rows {
        let mut cells: Vec<String> = row.point.iter().map(|v| fmt_num(*v)).collect();
        cells.push(fmt_num(row.phi_max.unwrap_or(f64::NAN)));
        cells.push(if row.reachable() { "1" } else { "0" }.into());
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Witness audit table `t,a,b,min_eigenvalue,c1..ck`.
pub fn write_witness<W: Write>(mut out: W, rows: &[WitnessRow]) -> std::io::Result<()> {
    let k = rows.first().map_or(0, |r| r.coefficients.len());
    let mut header = vec!["t", "a", "b", "min_eigenvalue"].into_iter().map(String::from).collect::<Vec<_>>();
    header.extend((1..=k).map(|i| format!("c{i}")));
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let mut cells = vec![fmt_num(r.t), fmt_num(r.a), fmt_num(r.b), fmt_num(r.min_eigenvalue)];
        cells.extend(r.coefficients.iter().map(|c| fmt_num(*c)));
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn state_json(state: &MixedState) -> Value {
    json!({ "point": json_point(&state.point), "xi": json_num(state.xi) })
}

pub fn verdict_json(v: &Verdict) -> Value {
    json!({
        "kind": v.kind.as_str(),
        "min_value": json_num(v.min_value),
        "worst_element": v.worst_element,
        "witness_value": v.witness_value.map_or(Value::Null, json_num),
        "note": v.note,
    })
}

/// Self-describing decision record; non-finite numbers become `null`.
pub fn decision_json(from: &MixedState, to: &MixedState, d: &CausalDecision, verdict: Option<&Verdict>) -> Value {
    let mut record = json!({
        "from": state_json(from),
        "to": state_json(to),
        "related": d.related,
        "base_related": d.base_related,
        "required": json_num(d.required),
        "achieved": json_num(d.achieved),
        "slack": json_num(d.slack),
        "method": d.method.as_str(),
        "marginal": d.marginal,
    });
    if let Some(v) = verdict {
        record["verdict"] = verdict_json(v);
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::decide;

    const CONFORMAL: &str = r#"
dimension = 2

[metric]
kind = "conformal2d"
omega = "1 + 0.1*cos(x)"

[mass]
kind = "constant"
re = 1.0
im = 0.5

[potentials]
a = ["0", "x"]
b = ["t", "0"]

[domain]
lower = [0.0, -2.0]
upper = [2.0, 2.0]

[grid]
dp_time_steps = 101

[tolerances]
psd = 1e-10
"#;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(2.0 - std::f64::consts::FRAC_PI_2), "0.429203673205");
        assert_eq!(fmt_num(1.0), "1.00000000000");
        assert_eq!(fmt_num(-12.5), "-12.5000000000");
        assert_eq!(fmt_num(0.0), "0.00000000000");
        assert_eq!(fmt_num(1e-5), "0.0000100000000000");
        assert_eq!(fmt_num(1.5e-7), "1.50000000000e-7");
        assert_eq!(fmt_num(9.9999999999996), "10.0000000000");
        assert_eq!(fmt_num(123456789012.0), "123456789012");
        assert_eq!(fmt_num(1.5e12), "1.50000000000e12");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn model_round_trip() {
        let m = parse_model(CONFORMAL).unwrap();
        assert_eq!(m.settings.dp_time_steps, 101);
        assert_eq!(m.settings.dp_space_steps, Settings::default().dp_space_steps);
        assert_eq!(m.settings.psd_tolerance, 1e-10);
        let dumped = dump_model(&m);
        assert_eq!(parse_model(&dumped).unwrap(), m);
        assert_eq!(dump_model(&parse_model(&dumped).unwrap()), dumped);
    }

    #[test]
    fn vielbein_and_field_round_trip() {
        let src = r#"
dimension = 4
[metric]
kind = "vielbein4d"
frame = [["1", "0", "0", "0"], ["0", "1 + 0.1*t", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]
[mass]
kind = "field"
re = "1 + t"
[domain]
lower = [0, -1, -1, -1]
upper = [1, 1, 1, 1]
"#;
        let m = parse_model(src).unwrap();
        assert!(matches!(m.mass, Mass::Field { .. }));
        assert_eq!(parse_model(&dump_model(&m)).unwrap(), m);
        let d = parse_model("dimension = 2\n[metric]\nkind = \"minkowski\"\n[mass]\nkind = \"diagonal\"\n[domain]\nlower = [0.0, -1.0]\nupper = [1.0, 1.0]\n").unwrap();
        assert!(d.is_diagonal());
        assert_eq!(parse_model(&dump_model(&d)).unwrap(), d);
    }

    fn model_error(src: &str) -> (String, usize, String) {
        match parse_model(src) {
            Err(Error::ModelFile { key, line, message }) => (key, line, message),
            other => panic!("expected a model-file error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_key_and_line() {
        let (key, line, _) = model_error(&CONFORMAL.replace("1 + 0.1*cos(x)", "1 + * x"));
        assert_eq!((key.as_str(), line), ("metric.omega", 6));
        let (key, line, _) = model_error(&CONFORMAL.replace("dp_time_steps = 101", "dp_time_steps = 9"));
        assert_eq!((key.as_str(), line), ("grid.dp_time_steps", 22));
        let (key, _, msg) = model_error(&CONFORMAL.replace("omega =", "omegga ="));
        assert!(key == "omegga" || msg.contains("omega"), "{key} {msg}");
        let (_, line, _) = model_error("dimension = 2\n[metric\n");
        assert_eq!(line, 2);
        let (key, _, _) = model_error(&CONFORMAL.replace("dimension = 2", "dimension = 3"));
        assert_eq!(key, "dimension");
    }

    #[test]
    fn curve_csv_round_trip() {
        let curve = CausalCurve::straight(&[0.0, 0.0], &[1.0, 0.25], 5).unwrap();
        let mut buf = Vec::new();
        write_curve(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x0,x1\n"));
        let back = read_curve(text.as_bytes(), 2).unwrap();
        assert_eq!(back.len(), curve.len());
        for (a, b) in back.points().iter().zip(curve.points()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-11);
            }
        }
        assert!(matches!(read_curve("t,x\n0,0\n".as_bytes(), 2), Err(Error::Csv { line: 1, .. })));
        assert!(matches!(read_curve("t,x0,x1\n0,0,0\n1,zz,0\n".as_bytes(), 2), Err(Error::Csv { line: 3, .. })));
    }

    #[test]
    fn decision_record() {
        let domain = DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap();
        let m = SpacetimeModel::minkowski(2, Complex64::from(1.0), domain).unwrap();
        let p = MixedState::new(vec![0.0, 0.0], 1.0).unwrap();
        let q = MixedState::new(vec![2.0, 0.0], 0.0).unwrap();
        let d = decide(&p, &q, &m).unwrap();
        let text = serde_json::to_string(&decision_json(&p, &q, &d, None)).unwrap();
        assert!(text.contains("\"related\":true"), "{text}");
        assert!(text.contains("\"slack\":0.429203673205"), "{text}");
        let q = MixedState::new(vec![0.5, 1.5], 0.0).unwrap();
        let d = decide(&p, &q, &m).unwrap();
        let v: Value = decision_json(&p, &q, &d, None);
        assert!(v["achieved"].is_null());
    }
}
