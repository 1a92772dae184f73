//! Text formats: the `name:key=val,...` family grammar, `start:end:count`
//! ranges, tolerance gates, fixed-precision CSV, and OBJ meshes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diffgeo::{fundamental_forms, jet_of, ChartPoint, Immersion, JetMode, Vec3};
use crate::error::Result;
use crate::families::SurfaceFamily;
use crate::residuals::{Range, Stats};

/// Malformed user input, located by 1-based character column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message} in `{input}`")]
pub struct ParseError {
    pub input: String,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(input: &str, column: usize, message: impl Into<String>) -> Self {
        Self { input: input.to_string(), column, message: message.into() }
    }
}

pub type ParseResult<T> = std::result::Result<T, ParseError>;

/// Parameter of a parsed spec with the column where its key starts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecParam {
    pub key: String,
    pub value: f64,
    pub key_column: usize,
    pub value_column: usize,
}

/// Tokenized `name:key=val,key=val`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub input: String,
    pub name: String,
    pub params: Vec<SpecParam>,
}

fn parse_number(input: &str, text: &str, column: usize) -> ParseResult<f64> {
    let x: f64 = text
        .trim()
        .parse()
        .map_err(|_| ParseError::new(input, column, format!("expected a number, found `{text}`")))?;
    if !x.is_finite() {
        return Err(ParseError::new(input, column, format!("`{text}` is not finite")));
    }
    Ok(x)
}

impl Spec {
    pub fn parse(input: &str) -> ParseResult<Self> {
        let (name, rest, rest_col) = match input.find(':') {
            Some(i) => (&input[..i], Some(&input[i + 1..]), i + 2),
            None => (input, None, input.len() + 1),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ParseError::new(input, 1, "expected a family name"));
        }
        let mut params: Vec<SpecParam> = vec![];
        if let Some(rest) = rest {
            let mut col = rest_col;
            for item in rest.split(',') {
                let Some(eq) = item.find('=') else {
                    return Err(ParseError::new(input, col, format!("expected key=value, found `{item}`")));
                };
                let key = item[..eq].trim();
                if key.is_empty() {
                    return Err(ParseError::new(input, col, "missing parameter name"));
                }
                if params.iter().any(|p| p.key == key) {
                    return Err(ParseError::new(input, col, format!("parameter `{key}` given twice")));
                }
                let value_column = col + eq + 1;
                let value = parse_number(input, &item[eq + 1..], value_column)?;
                params.push(SpecParam { key: key.to_string(), value, key_column: col, value_column });
                col += item.len() + 1;
            }
        }
        Ok(Self { input: input.to_string(), name: name.to_string(), params })
    }

    fn error(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::new(&self.input, column, message)
    }

    /// Rejects keys outside `allowed` (each entry lists accepted spellings).
    pub fn expect_keys(&self, allowed: &[&[&str]]) -> ParseResult<()> {
        for p in &self.params {
            if !allowed.iter().any(|names| names.contains(&p.key.as_str())) {
                let names: Vec<&str> = allowed.iter().map(|n| n[0]).collect();
                return Err(self.error(
                    p.key_column,
                    format!("unknown parameter `{}` for `{}` (expected {})", p.key, self.name, names.join(", ")),
                ));
            }
        }
        Ok(())
    }

    pub fn get(&self, names: &[&str]) -> Option<&SpecParam> {
        self.params.iter().find(|p| names.contains(&p.key.as_str()))
    }

    pub fn require(&self, names: &[&str]) -> ParseResult<&SpecParam> {
        self.get(names).ok_or_else(|| self.error(self.input.len() + 1, format!("missing parameter `{}`", names[0])))
    }

    pub fn positive(&self, names: &[&str]) -> ParseResult<f64> {
        let p = self.require(names)?;
        if p.value > 0.0 {
            Ok(p.value)
        } else {
            Err(self.error(p.value_column, format!("`{}` must be positive", p.key)))
        }
    }

    fn no_params(&self) -> ParseResult<()> {
        self.expect_keys(&[])
    }
}

const CT0: &[&str] = &["Ct0", "ct0"];
const C0: &[&str] = &["C0", "c0"];

/// Surface family from its spec string, e.g. `sc:Ct0=1`, `stilde:C0=1`,
/// `ellipsoid:a=1,b=1.2,c=1.5`, `plane`.
pub fn parse_family(input: &str) -> ParseResult<SurfaceFamily> {
    let spec = Spec::parse(input)?;
    let family = match spec.name.as_str() {
        "sc" => {
            spec.expect_keys(&[CT0])?;
            SurfaceFamily::sc(spec.positive(CT0)?)
        }
        "sc_rho" => {
            spec.expect_keys(&[CT0])?;
            SurfaceFamily::sc_rho(spec.positive(CT0)?)
        }
        "stilde" => {
            spec.expect_keys(&[C0])?;
            SurfaceFamily::stilde(spec.positive(C0)?)
        }
        "sphere" => {
            spec.expect_keys(&[&["r"]])?;
            SurfaceFamily::sphere(spec.positive(&["r"])?)
        }
        "cylinder" => {
            spec.expect_keys(&[&["r"]])?;
            SurfaceFamily::cylinder(spec.positive(&["r"])?)
        }
        "ellipsoid" => {
            spec.expect_keys(&[&["a"], &["b"], &["c"]])?;
            SurfaceFamily::ellipsoid(spec.positive(&["a"])?, spec.positive(&["b"])?, spec.positive(&["c"])?)
        }
        "plane" => {
            spec.no_params()?;
            Ok(SurfaceFamily::plane())
        }
        other => {
            return Err(spec.error(
                1,
                format!("unknown family `{other}` (expected sc, sc_rho, stilde, sphere, cylinder, ellipsoid, plane)"),
            ))
        }
    };
    family.map_err(|e| spec.error(1, e.to_string()))
}

/// What `glue` should run, from `mirror:C0=1`, `mirror:Ct0=1,with=1.2`,
/// `translate:C0=1,dz=0`, `boundary:Ct0=1`, `meridian:C0=1`,
/// `parallel:C0=1,u0=1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlueSpec {
    /// Mirror gluing; `other` is the lower piece's `C0` when it differs.
    Mirror {
        c0: f64,
        other: Option<f64>,
    },
    Translate {
        c0: f64,
        dz: f64,
    },
    Boundary {
        ct0: f64,
    },
    Meridian {
        c0: f64,
    },
    Parallel {
        c0: f64,
        u0: f64,
    },
}

/// `C0` given directly or through `Ct0`.
fn c0_of(spec: &Spec) -> ParseResult<(f64, bool)> {
    match (spec.get(C0), spec.get(CT0)) {
        (Some(_), Some(p)) => Err(spec.error(p.key_column, "give either C0 or Ct0, not both")),
        (Some(_), None) => Ok((spec.positive(C0)?, false)),
        (None, Some(_)) => Ok((crate::families::c0_from_ct0(spec.positive(CT0)?), true)),
        (None, None) => Err(spec.error(spec.input.len() + 1, "missing parameter `C0`")),
    }
}

pub fn parse_glue(input: &str) -> ParseResult<GlueSpec> {
    let spec = Spec::parse(input)?;
    Ok(match spec.name.as_str() {
        "mirror" => {
            spec.expect_keys(&[C0, CT0, &["with"]])?;
            let (c0, via_ct0) = c0_of(&spec)?;
            let other = match spec.get(&["with"]) {
                None => None,
                Some(_) => {
                    let w = spec.positive(&["with"])?;
                    Some(if via_ct0 { crate::families::c0_from_ct0(w) } else { w })
                }
            };
            GlueSpec::Mirror { c0, other }
        }
        "translate" => {
            spec.expect_keys(&[C0, CT0, &["dz"]])?;
            GlueSpec::Translate { c0: c0_of(&spec)?.0, dz: spec.get(&["dz"]).map_or(0.0, |p| p.value) }
        }
        "boundary" => {
            spec.expect_keys(&[CT0])?;
            GlueSpec::Boundary { ct0: spec.positive(CT0)? }
        }
        "meridian" => {
            spec.expect_keys(&[C0, CT0])?;
            GlueSpec::Meridian { c0: c0_of(&spec)?.0 }
        }
        "parallel" => {
            spec.expect_keys(&[C0, CT0, &["u0"]])?;
            GlueSpec::Parallel { c0: c0_of(&spec)?.0, u0: spec.require(&["u0"])?.value }
        }
        other => {
            return Err(spec.error(
                1,
                format!("unknown gluing check `{other}` (expected mirror, translate, boundary, meridian, parallel)"),
            ))
        }
    })
}

/// Splits on `:` and records the column of each field.
fn fields(input: &str) -> Vec<(usize, &str)> {
    let mut col = 1;
    input
        .split(':')
        .map(|f| {
            let out = (col, f);
            col += f.len() + 1;
            out
        })
        .collect()
}

/// `start:end:count` with `start < end` and `count >= 2`.
pub fn parse_range(input: &str) -> ParseResult<Range> {
    let f = fields(input);
    if f.len() != 3 {
        return Err(ParseError::new(input, 1, format!("expected start:end:count, found {} field(s)", f.len())));
    }
    let start = parse_number(input, f[0].1, f[0].0)?;
    let end = parse_number(input, f[1].1, f[1].0)?;
    let count: usize = f[2]
        .1
        .trim()
        .parse()
        .map_err(|_| ParseError::new(input, f[2].0, format!("expected an integer count, found `{}`", f[2].1)))?;
    if !(start < end) {
        return Err(ParseError::new(input, f[1].0, format!("range end {end} must exceed start {start}")));
    }
    if count < 2 {
        return Err(ParseError::new(input, f[2].0, "count must be at least 2"));
    }
    Ok(Range::new(start, end, count))
}

/// `start:end` with `start != end`; direction is kept.
pub fn parse_span(input: &str) -> ParseResult<(f64, f64)> {
    let f = fields(input);
    if f.len() != 2 {
        return Err(ParseError::new(input, 1, format!("expected start:end, found {} field(s)", f.len())));
    }
    let a = parse_number(input, f[0].1, f[0].0)?;
    let b = parse_number(input, f[1].1, f[1].0)?;
    if a == b {
        return Err(ParseError::new(input, f[1].0, "span is empty"));
    }
    Ok((a, b))
}

/// Tolerance gate `name=limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub limit: f64,
}

pub fn parse_gate(input: &str, known: &[&str]) -> ParseResult<Gate> {
    let Some(eq) = input.find('=') else {
        return Err(ParseError::new(input, 1, "expected name=limit"));
    };
    let name = input[..eq].trim();
    if !known.contains(&name) {
        return Err(ParseError::new(input, 1, format!("unknown gate `{name}` (expected {})", known.join(", "))));
    }
    let limit = parse_number(input, &input[eq + 1..], eq + 2)?;
    if !(limit >= 0.0) {
        return Err(ParseError::new(input, eq + 2, "limit must be non-negative"));
    }
    Ok(Gate { name: name.to_string(), limit })
}

/// Outcome of one gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateResult {
    pub name: String,
    pub limit: f64,
    pub value: f64,
    pub passed: bool,
}

impl Gate {
    /// Passes when `value <= limit`; a non-finite value fails.
    pub fn check(&self, value: f64) -> GateResult {
        GateResult {
            name: self.name.clone(),
            limit: self.limit,
            value,
            passed: value.is_finite() && value <= self.limit,
        }
    }
}

/// 17 significant digits, locale-free.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl CsvTable {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|h| h.to_string()).collect(), rows: vec![] }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_float(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push_str(&line(&self.headers));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

/// Triangulated chart grid with per-vertex normals and mean curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub label: String,
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub mean_curvature: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
    pub wraps_v: bool,
}

/// Default tessellation grid: the full `v` period when there is one.
pub fn default_mesh_grid(family: &SurfaceFamily) -> crate::residuals::Grid {
    use crate::families::FamilyKind::*;
    use std::f64::consts::PI;
    let full = |p: f64, n: usize| Range::new(0.0, p, n);
    let (u, v) = match family.kind {
        Sc { .. } => (Range::new(0.01, 5.0, 60), full(2.0 * PI, 73)),
        STilde { .. } => (Range::new(-2.0, 2.0, 81), full(2.0 * PI / 3.0, 61)),
        Sphere { .. } | Ellipsoid { .. } => (Range::new(0.05, PI - 0.05, 60), full(2.0 * PI, 73)),
        Cylinder { .. } => (Range::new(-2.0, 2.0, 41), full(2.0 * PI, 73)),
        Plane => (Range::new(-2.0, 2.0, 21), Range::new(-2.0, 2.0, 21)),
    };
    let u = match (family.kind, family.chart) {
        (Sc { ct0 }, crate::diffgeo::ChartId::Rho) => {
            let b = crate::profiles::boundary_radius(ct0);
            Range::new(1.001 * b, 6.0 * b, 60)
        }
        _ => u,
    };
    crate::residuals::Grid { u, v }
}

/// Whether `v` covers a full period, in which case its last sample is
/// dropped and the grid is closed into a loop.
pub fn range_wraps(v: &Range, period: Option<f64>) -> bool {
    period.is_some_and(|p| ((v.end - v.start) - p).abs() <= 1e-4 * p)
}

/// Samples `surface` on `u x v` and splits each grid quad into two
/// triangles wound consistently with the exported normals.
pub fn build_mesh(surface: &dyn Immersion, u: &Range, v: &Range, v_period: Option<f64>, mode: JetMode) -> Result<Mesh> {
    let wraps_v = range_wraps(v, v_period);
    let us = u.values();
    let mut vs = v.values();
    if wraps_v {
        vs.pop();
    }
    let (nu, nv) = (us.len(), vs.len());
    let points: Vec<(f64, f64)> = us.iter().flat_map(|&a| vs.iter().map(move |&b| (a, b))).collect();
    let samples = points
        .par_iter()
        .map(|&(a, b)| {
            let jet = jet_of(surface, ChartPoint::new(a, b, surface.chart_id()), mode)?;
            let forms = fundamental_forms(&jet, surface.orientation())?;
            Ok((jet.position, forms.normal, forms.mean))
        })
        .collect::<Result<Vec<_>>>()?;
    let index = |i: usize, j: usize| i * nv + j % nv;
    let flip = surface.orientation() < 0.0;
    let mut triangles = Vec::with_capacity(2 * (nu - 1) * nv);
    let v_cells = if wraps_v { nv } else { nv - 1 };
    for i in 0..nu - 1 {
        for j in 0..v_cells {
            let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            if flip {
                triangles.push([a, c, b]);
                triangles.push([a, d, c]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    Ok(Mesh {
        label: surface.label(),
        vertices: samples.iter().map(|s| s.0).collect(),
        normals: samples.iter().map(|s| s.1).collect(),
        mean_curvature: samples.iter().map(|s| s.2).collect(),
        triangles,
        wraps_v,
    })
}

impl Mesh {
    pub fn edge_count(&self) -> usize {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.label);
        let _ = writeln!(out, "# vertices {} triangles {}", self.vertices.len(), self.triangles.len());
        for p in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", fmt_float(p.x), fmt_float(p.y), fmt_float(p.z));
        }
        for n in &self.normals {
            let _ = writeln!(out, "vn {} {} {}", fmt_float(n.x), fmt_float(n.y), fmt_float(n.z));
        }
        for t in &self.triangles {
            let (a, b, c) = (t[0] + 1, t[1] + 1, t[2] + 1);
            let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
        }
        out
    }

    pub fn report(&self, family: &SurfaceFamily) -> MeshReport {
        let expected_f = family.constant_mean_curvature();
        let f_min = self.mean_curvature.iter().copied().fold(f64::INFINITY, f64::min);
        let f_max = self.mean_curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        MeshReport {
            family: family.id(),
            vertices: self.vertices.len(),
            edges: self.edge_count(),
            triangles: self.triangles.len(),
            euler_characteristic: self.euler_characteristic(),
            wraps_v: self.wraps_v,
            f_min,
            f_max,
            f_mean: Stats::of(self.mean_curvature.iter().copied()).mean,
            expected_f,
            max_f_error: expected_f.map(|e| self.mean_curvature.iter().map(|f| (f - e).abs()).fold(0.0, f64::max)),
            max_normal_length_error: self.normals.iter().map(|n| (n.norm() - 1.0).abs()).fold(0.0, f64::max),
        }
    }
}

/// Summary written next to an exported mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub family: String,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub euler_characteristic: i64,
    pub wraps_v: bool,
    pub f_min: f64,
    pub f_max: f64,
    pub f_mean: f64,
    pub expected_f: Option<f64>,
    pub max_f_error: Option<f64>,
    pub max_normal_length_error: f64,
}

/// Parses the `v`/`vn` lines of an OBJ file produced by [`Mesh::to_obj`].
pub fn read_obj_vectors(text: &str, tag: &str) -> Vec<Vec3> {
    text.lines()
        .filter_map(|l| l.strip_prefix(tag).and_then(|r| r.strip_prefix(' ')))
        .filter_map(|r| {
            let xs: Vec<f64> = r.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            (xs.len() == 3).then(|| Vec3::new(xs[0], xs[1], xs[2]))
        })
        .collect()
}
