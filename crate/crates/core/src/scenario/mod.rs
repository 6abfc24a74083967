//! Scenario files: which map to examine, where, and along which curve.
//!
//! A scenario is a line-oriented text file of `key = value` pairs grouped
//! under `[section]` headers. See `docs/scenario-format.md` for the full
//! list of keys. Every numeric value is a constant expression, so
//! `pi/2` and `1/sqrt(2)` are accepted.

mod builtin;
mod format;
mod run;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::{parse, Expr};
use crate::manifold::{ChartManifold, Interval};
use crate::rmap::SmoothMap;
use crate::transport::Tolerances;

pub use builtin::{builtin, builtin_names, builtin_source, BUILTINS};
pub use run::{exit_code, run, run_full, sample_table, CurveReport, PointReport, RunOutcome, RunReport, Verdict};

use format::{parse_document, Entry, Section};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{field}{}: {message}", line_suffix(*.line))]
    Field {
        field: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{field}{}: dimension mismatch, expected {expected}, found {found}", line_suffix(*.line))]
    DimensionMismatch {
        field: String,
        line: Option<usize>,
        expected: usize,
        found: usize,
    },
    #[error("no built-in scenario named `{0}`")]
    UnknownBuiltin(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

impl ScenarioError {
    /// Dotted field path for field-level errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            ScenarioError::Field { field, .. } | ScenarioError::DimensionMismatch { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Syntax { line, .. } => Some(*line),
            ScenarioError::Field { line, .. } | ScenarioError::DimensionMismatch { line, .. } => *line,
            _ => None,
        }
    }
}

/// A manifold as written in a scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ManifoldSpec {
    /// `euclidean{n}`, `sphere{r}`, `sphere{r,d}` or `custom{n}`.
    pub manifold: String,
    /// Row-major metric entries for `custom{n}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<String>>,
    /// Components of an embedding into Euclidean space inducing the metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pullback: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapSpec {
    /// `identity{n}`, `sphere_immersion{r}`, `sphere_immersion{r,d}`,
    /// `projection{m,n}`, `scaling{c,n}`, `paper_example` or `custom{n}`.
    pub map: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameSpec {
    /// Random horizontal orthonormal frame at the first point.
    Seeded { seed: u64 },
    Explicit {
        v1: Vec<f64>,
        v2: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v3: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kappa: f64,
    pub tau: f64,
    pub s_max: f64,
    pub step: f64,
    pub frame: FrameSpec,
    /// Curvature of the random circles in the circle-transport trials;
    /// defaults to `kappa`.
    pub trial_kappa: f64,
    pub trials: usize,
}

impl Default for CurveSpec {
    fn default() -> Self {
        CurveSpec {
            kappa: 1.0,
            tau: 0.0,
            s_max: 2.0 * std::f64::consts::PI,
            step: 1e-3,
            frame: FrameSpec::Seeded { seed: 0 },
            trial_kappa: 1.0,
            trials: 10,
        }
    }
}

/// Everything a scenario file says, as plain data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Informational scenarios are reported but never fail a run.
    pub informational: bool,
    pub source: ManifoldSpec,
    pub target: ManifoldSpec,
    pub map: MapSpec,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub seed: u64,
}

/// Command-line style overrides applied after loading.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub isometry: Option<f64>,
    pub isotropy: Option<f64>,
    pub spread: Option<f64>,
    pub condition: Option<f64>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
}

/// A validated scenario with its manifolds and map built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub source: ChartManifold,
    pub target: ChartManifold,
    pub map: SmoothMap,
    lines: BTreeMap<String, usize>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

/// Load a scenario file, falling back to the built-in registry when `name`
/// is not an existing path.
pub fn load_scenario_or_builtin(name: &str) -> Result<Scenario, ScenarioError> {
    if Path::new(name).exists() {
        load_scenario(name)
    } else if let Some(src) = builtin_source(name) {
        parse_scenario(src)
    } else {
        load_scenario(name)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc = parse_document(text)?;
    let mut lines = BTreeMap::new();
    let spec = spec_from_document(&doc, &mut lines)?;
    Scenario::build(spec, lines)
}

impl Scenario {
    /// Validate plain data; errors carry no line numbers.
    pub fn from_spec(spec: ScenarioSpec) -> Result<Scenario, ScenarioError> {
        Self::build(spec, BTreeMap::new())
    }

    pub fn with_overrides(self, o: &Overrides) -> Result<Scenario, ScenarioError> {
        let mut spec = self.spec;
        let tol = &mut spec.tolerances;
        for (slot, v) in [
            (&mut tol.isometry, o.isometry),
            (&mut tol.isotropy, o.isotropy),
            (&mut tol.spread, o.spread),
            (&mut tol.condition, o.condition),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(seed) = o.seed {
            spec.seed = seed;
        }
        if let (Some(step), Some(curve)) = (o.step, spec.curve.as_mut()) {
            curve.step = step;
        }
        Self::build(spec, self.lines)
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    fn err(&self, field: &str, message: impl Into<String>) -> ScenarioError {
        field_err(&self.lines, field, message)
    }

    fn build(spec: ScenarioSpec, lines: BTreeMap<String, usize>) -> Result<Scenario, ScenarioError> {
        let source = build_manifold(&spec.source, "source", &lines)?;
        let target = build_manifold(&spec.target, "target", &lines)?;
        let map = build_map(&spec.map, &source, &target, &lines)?;
        let s = Scenario {
            spec,
            source,
            target,
            map,
            lines,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let spec = &self.spec;
        if spec.name.is_empty() {
            return Err(self.err("name", "must not be empty"));
        }
        let tol = &spec.tolerances;
        for (name, v) in [
            ("isometry", tol.isometry),
            ("isotropy", tol.isotropy),
            ("spread", tol.spread),
            ("condition", tol.condition),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(self.err(&format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        if spec.samples < 10 {
            return Err(self.err("run.samples", format!("need at least 10, got {}", spec.samples)));
        }
        if spec.points.is_empty() {
            return Err(self.err("points", "at least one point is required"));
        }
        for (i, p) in spec.points.iter().enumerate() {
            let field = format!("points.point[{i}]");
            if p.len() != self.source.dim() {
                return Err(dim_err(&self.lines, &field, self.source.dim(), p.len()));
            }
            if let Some(k) = self.source.domain_violation(p) {
                return Err(self.err(
                    &field,
                    format!(
                        "coordinate {} = {} is outside the chart of {}",
                        k + 1,
                        p[k],
                        self.source
                    ),
                ));
            }
        }
        if let Some(c) = &spec.curve {
            if !(c.step > 0.0) {
                return Err(self.err("curve.step", format!("must be > 0, got {}", c.step)));
            }
            if c.step > 1e-2 {
                return Err(self.err("curve.step", format!("must be at most 1e-2, got {}", c.step)));
            }
            if !(c.s_max >= 10.0 * c.step) {
                return Err(self.err("curve.s_max", format!("must be at least 10 steps, got {}", c.s_max)));
            }
            for (name, v) in [("kappa", c.kappa), ("tau", c.tau), ("trial_kappa", c.trial_kappa)] {
                if !v.is_finite() {
                    return Err(self.err(&format!("curve.{name}"), "must be finite"));
                }
            }
            if c.kappa < 0.0 {
                return Err(self.err("curve.kappa", "must be non-negative"));
            }
            if c.trials == 0 {
                return Err(self.err("curve.trials", "must be positive"));
            }
            if let FrameSpec::Explicit { v1, v2, v3 } = &c.frame {
                let n = self.source.dim();
                for (name, v) in [("v1", Some(v1)), ("v2", Some(v2)), ("v3", v3.as_ref())] {
                    if let Some(v) = v {
                        if v.len() != n {
                            return Err(dim_err(&self.lines, &format!("curve.{name}"), n, v.len()));
                        }
                    }
                }
            }
            if c.tau != 0.0 && matches!(&c.frame, FrameSpec::Explicit { v3: None, .. }) {
                return Err(self.err("curve.v3", "a curve with torsion needs v3"));
            }
        }
        Ok(())
    }
}

fn field_err(lines: &BTreeMap<String, usize>, field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        field: field.to_string(),
        line: lookup_line(lines, field),
        message: message.into(),
    }
}

fn dim_err(lines: &BTreeMap<String, usize>, field: &str, expected: usize, found: usize) -> ScenarioError {
    ScenarioError::DimensionMismatch {
        field: field.to_string(),
        line: lookup_line(lines, field),
        expected,
        found,
    }
}

// A field without its own line falls back to its section header.
fn lookup_line(lines: &BTreeMap<String, usize>, field: &str) -> Option<usize> {
    lines.get(field).copied().or_else(|| {
        let section = field.split('.').next()?;
        lines.get(section).copied()
    })
}

/// `name{a,b}` → (`name`, [`a`, `b`]).
fn registry_call(s: &str) -> Option<(&str, Vec<&str>)> {
    match s.split_once('{') {
        None => Some((s.trim(), Vec::new())),
        Some((name, rest)) => {
            let args = rest.trim().strip_suffix('}')?;
            Some((name.trim(), args.split(',').map(str::trim).collect()))
        }
    }
}

fn parse_exprs(
    lines: &BTreeMap<String, usize>,
    field: &str,
    sources: &[String],
    arity: usize,
) -> Result<Vec<Expr>, ScenarioError> {
    sources
        .iter()
        .map(|src| {
            parse(src, arity).map_err(|e| match e {
                crate::exprlang::ParseError::VariableOutOfRange { index, arity, .. } => {
                    dim_err(lines, field, arity, index)
                }
                e => field_err(lines, field, format!("`{src}`: {e}")),
            })
        })
        .collect()
}

fn positive_int(lines: &BTreeMap<String, usize>, field: &str, s: &str) -> Result<usize, ScenarioError> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(field_err(
            lines,
            field,
            format!("expected a positive integer, got `{s}`"),
        )),
    }
}

fn positive_real(lines: &BTreeMap<String, usize>, field: &str, s: &str) -> Result<f64, ScenarioError> {
    match constant(s) {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(field_err(lines, field, format!("expected a positive number, got {v}"))),
        Err(m) => Err(field_err(lines, field, m)),
    }
}

fn build_manifold(
    spec: &ManifoldSpec,
    section: &str,
    lines: &BTreeMap<String, usize>,
) -> Result<ChartManifold, ScenarioError> {
    let field = format!("{section}.manifold");
    let bad = |m: String| field_err(lines, &field, m);
    let (name, args) = registry_call(&spec.manifold).ok_or_else(|| bad(format!("malformed `{}`", spec.manifold)))?;
    let extras = spec.metric.is_some() || spec.diag.is_some() || spec.pullback.is_some();
    let m = match (name, args.as_slice()) {
        ("euclidean", [n]) => ChartManifold::euclidean(positive_int(lines, &field, n)?),
        ("sphere", [r]) => ChartManifold::sphere(positive_real(lines, &field, r)?),
        ("sphere", [r, d]) => {
            let d = positive_int(lines, &field, d)?;
            if d < 2 {
                return Err(bad("sphere dimension must be at least 2".into()));
            }
            ChartManifold::hypersphere(positive_real(lines, &field, r)?, d)
        }
        ("custom", [n]) => {
            let n = positive_int(lines, &field, n)?;
            let domain = match &spec.domain {
                None => vec![Interval::REAL_LINE; n],
                Some(d) if d.len() == n => d.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect(),
                Some(d) => return Err(dim_err(lines, &format!("{section}.domain"), n, d.len())),
            };
            let given = [&spec.metric, &spec.diag, &spec.pullback]
                .iter()
                .filter(|o| o.is_some())
                .count();
            if given != 1 {
                return Err(bad(
                    "custom manifolds need exactly one of `metric`, `diag` or `pullback`".into(),
                ));
            }
            let built = if let Some(entries) = &spec.metric {
                let f = format!("{section}.metric");
                if entries.len() != n * n {
                    return Err(dim_err(lines, &f, n * n, entries.len()));
                }
                ChartManifold::custom(n, parse_exprs(lines, &f, entries, n)?, domain)
            } else if let Some(entries) = &spec.diag {
                let f = format!("{section}.diag");
                if entries.len() != n {
                    return Err(dim_err(lines, &f, n, entries.len()));
                }
                let exprs = parse_exprs(lines, &f, entries, n)?;
                // a 1×1 diagonal is already a full metric
                ChartManifold::custom(n, exprs, domain)
            } else {
                let f = format!("{section}.pullback");
                let comps = spec.pullback.as_deref().unwrap_or_default();
                ChartManifold::pullback(n, parse_exprs(lines, &f, comps, n)?, domain)
            };
            return built.map_err(|e| bad(e.to_string()));
        }
        _ => return Err(bad(format!("unknown manifold `{}`", spec.manifold))),
    };
    if extras || spec.domain.is_some() {
        return Err(bad(format!("`{}` takes no metric or domain keys", spec.manifold)));
    }
    Ok(m)
}

fn build_map(
    spec: &MapSpec,
    source: &ChartManifold,
    target: &ChartManifold,
    lines: &BTreeMap<String, usize>,
) -> Result<SmoothMap, ScenarioError> {
    let field = "map.map";
    let bad = |m: String| field_err(lines, field, m);
    let (name, args) = registry_call(&spec.map).ok_or_else(|| bad(format!("malformed `{}`", spec.map)))?;
    if name != "custom" && spec.components.is_some() {
        return Err(field_err(
            lines,
            "map.components",
            "only `custom{n}` maps take components",
        ));
    }
    let built = match (name, args.as_slice()) {
        ("custom", [n]) => {
            let n = positive_int(lines, field, n)?;
            if n != source.dim() {
                return Err(dim_err(lines, field, source.dim(), n));
            }
            let comps = spec
                .components
                .as_ref()
                .ok_or_else(|| field_err(lines, "map.components", "custom maps need components"))?;
            if comps.len() != target.dim() {
                return Err(dim_err(lines, "map.components", target.dim(), comps.len()));
            }
            let exprs = parse_exprs(lines, "map.components", comps, n)?;
            return SmoothMap::custom(source.clone(), target.clone(), exprs)
                .map_err(|e| field_err(lines, "map.components", e.to_string()));
        }
        ("identity", [n]) => SmoothMap::identity(positive_int(lines, field, n)?),
        ("sphere_immersion", [r]) => SmoothMap::sphere_immersion(positive_real(lines, field, r)?),
        ("sphere_immersion", [r, d]) => {
            let d = positive_int(lines, field, d)?;
            if d < 2 {
                return Err(bad("sphere dimension must be at least 2".into()));
            }
            SmoothMap::hypersphere_immersion(positive_real(lines, field, r)?, d)
        }
        ("projection", [m, n]) => SmoothMap::projection(positive_int(lines, field, m)?, positive_int(lines, field, n)?)
            .map_err(|e| bad(e.to_string()))?,
        ("scaling", [c, n]) => {
            let c = constant(c).map_err(bad)?;
            SmoothMap::scaling(c, positive_int(lines, field, n)?)
        }
        ("paper_example", []) => SmoothMap::paper_example(),
        _ => return Err(bad(format!("unknown map `{}`", spec.map))),
    };
    if built.source().dim() != source.dim() {
        return Err(dim_err(lines, field, source.dim(), built.source().dim()));
    }
    if built.source() != source || built.target() != target {
        return Err(bad(format!(
            "`{}` maps {} -> {}, but the scenario declares {} -> {}",
            spec.map,
            built.source(),
            built.target(),
            source,
            target
        )));
    }
    Ok(built)
}

/// Value of a constant expression such as `pi/2`.
fn constant(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let e = parse(s, 0).map_err(|e| format!("`{s}`: {e}"))?;
    e.eval::<f64>(&[]).map_err(|e| format!("`{s}`: {e}"))
}

fn list(value: &str, sep: char) -> Vec<String> {
    value
        .split(sep)
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

struct Reader<'a> {
    section: &'a Section,
    lines: &'a mut BTreeMap<String, usize>,
}

impl<'a> Reader<'a> {
    fn path(&self, key: &str) -> String {
        if self.section.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.section.name)
        }
    }

    fn check_keys(&mut self, allowed: &[&str]) -> Result<(), ScenarioError> {
        for e in &self.section.entries {
            let path = self.path(&e.key);
            if !allowed.contains(&e.key.as_str()) {
                return Err(ScenarioError::Field {
                    field: path,
                    line: Some(e.line),
                    message: "unknown key".into(),
                });
            }
            self.lines.entry(path).or_insert(e.line);
        }
        Ok(())
    }

    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.section.entries.iter().find(|e| e.key == key)
    }

    fn err(&self, e: &Entry, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Field {
            field: self.path(&e.key),
            line: Some(e.line),
            message: message.into(),
        }
    }

    fn string(&self, key: &str) -> Option<String> {
        self.entry(key).map(|e| e.value.clone())
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ScenarioError> {
        self.entry(key)
            .map(|e| constant(&e.value).map_err(|m| self.err(e, m)))
            .transpose()
    }

    fn integer(&self, key: &str) -> Result<Option<u64>, ScenarioError> {
        self.entry(key)
            .map(|e| {
                e.value
                    .parse::<u64>()
                    .map_err(|_| self.err(e, format!("expected a non-negative integer, got `{}`", e.value)))
            })
            .transpose()
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, ScenarioError> {
        self.entry(key)
            .map(|e| match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                v => Err(self.err(e, format!("expected true or false, got `{v}`"))),
            })
            .transpose()
    }

    fn vector(&self, e: &Entry) -> Result<Vec<f64>, ScenarioError> {
        list(&e.value, ',')
            .iter()
            .map(|s| constant(s).map_err(|m| self.err(e, m)))
            .collect()
    }

    fn domain(&self, key: &str) -> Result<Option<Vec<(f64, f64)>>, ScenarioError> {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        list(&e.value, ';')
            .iter()
            .map(|iv| {
                let (lo, hi) = iv
                    .split_once("..")
                    .ok_or_else(|| self.err(e, format!("expected `lo..hi`, got `{iv}`")))?;
                let lo = constant(lo).map_err(|m| self.err(e, m))?;
                let hi = constant(hi).map_err(|m| self.err(e, m))?;
                if !(lo < hi) {
                    return Err(self.err(e, format!("empty interval `{iv}`")));
                }
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn spec_from_document(doc: &[Section], lines: &mut BTreeMap<String, usize>) -> Result<ScenarioSpec, ScenarioError> {
    const KNOWN: &[&str] = &["", "source", "target", "map", "points", "curve", "tolerances", "run"];
    for s in doc {
        if !KNOWN.contains(&s.name.as_str()) {
            return Err(ScenarioError::Syntax {
                line: s.line,
                message: format!("unknown section [{}]", s.name),
            });
        }
        if !s.name.is_empty() {
            lines.insert(s.name.clone(), s.line);
        }
    }
    let empty = Section {
        name: String::new(),
        line: 0,
        entries: Vec::new(),
    };
    let find = |name: &str| doc.iter().find(|s| s.name == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| ScenarioError::Field {
            field: name.to_string(),
            line: None,
            message: format!("missing section [{name}]"),
        })
    };

    let mut r = Reader {
        section: find("").unwrap_or(&empty),
        lines: &mut *lines,
    };
    r.check_keys(&["name", "description", "informational"])?;
    let name = r.string("name").ok_or_else(|| ScenarioError::Field {
        field: "name".into(),
        line: None,
        message: "missing".into(),
    })?;
    let description = r.string("description");
    let informational = r.boolean("informational")?.unwrap_or(false);

    let mut manifold = |section: &str| -> Result<ManifoldSpec, ScenarioError> {
        let mut r = Reader {
            section: require(section)?,
            lines: &mut *lines,
        };
        r.check_keys(&["manifold", "metric", "diag", "pullback", "domain"])?;
        Ok(ManifoldSpec {
            manifold: r.string("manifold").ok_or_else(|| ScenarioError::Field {
                field: format!("{section}.manifold"),
                line: Some(r.section.line),
                message: "missing".into(),
            })?,
            metric: r.string("metric").map(|v| list(&v, ';')),
            diag: r.string("diag").map(|v| list(&v, ';')),
            pullback: r.string("pullback").map(|v| list(&v, ';')),
            domain: r.domain("domain")?,
        })
    };
    let source = manifold("source")?;
    let target = manifold("target")?;

    let mut r = Reader {
        section: require("map")?,
        lines: &mut *lines,
    };
    r.check_keys(&["map", "components"])?;
    let map = MapSpec {
        map: r.string("map").ok_or_else(|| ScenarioError::Field {
            field: "map.map".into(),
            line: Some(r.section.line),
            message: "missing".into(),
        })?,
        components: r.string("components").map(|v| list(&v, ';')),
    };

    let mut r = Reader {
        section: require("points")?,
        lines: &mut *lines,
    };
    r.check_keys(&["point"])?;
    let mut points = Vec::new();
    for (i, e) in r.section.entries.iter().enumerate() {
        r.lines.insert(format!("points.point[{i}]"), e.line);
        points.push(r.vector(e)?);
    }

    let curve = match find("curve") {
        None => None,
        Some(section) => {
            let mut r = Reader {
                section,
                lines: &mut *lines,
            };
            r.check_keys(&[
                "kappa",
                "tau",
                "s_max",
                "step",
                "frame_seed",
                "v1",
                "v2",
                "v3",
                "trial_kappa",
                "trials",
            ])?;
            let d = CurveSpec::default();
            let kappa = r.real("kappa")?.unwrap_or(d.kappa);
            let explicit = ["v1", "v2", "v3"].map(|k| r.entry(k));
            let frame = match (explicit, r.entry("frame_seed")) {
                ([None, None, None], _) => FrameSpec::Seeded {
                    seed: r.integer("frame_seed")?.unwrap_or(0),
                },
                ([Some(_), Some(_), _], Some(e)) => {
                    return Err(r.err(e, "give either frame_seed or an explicit frame, not both"))
                }
                ([Some(v1), Some(v2), v3], None) => FrameSpec::Explicit {
                    v1: r.vector(v1)?,
                    v2: r.vector(v2)?,
                    v3: v3.map(|e| r.vector(e)).transpose()?,
                },
                ([v1, _, _], _) => {
                    let e = v1.or(explicit[1]).or(explicit[2]).expect("some key present");
                    return Err(r.err(e, "an explicit frame needs both v1 and v2"));
                }
            };
            Some(CurveSpec {
                kappa,
                tau: r.real("tau")?.unwrap_or(d.tau),
                s_max: r.real("s_max")?.unwrap_or(d.s_max),
                step: r.real("step")?.unwrap_or(d.step),
                frame,
                trial_kappa: r.real("trial_kappa")?.unwrap_or(kappa),
                trials: r.integer("trials")?.map_or(d.trials, |t| t as usize),
            })
        }
    };

    let defaults = Tolerances::default();
    let tolerances = match find("tolerances") {
        None => defaults,
        Some(section) => {
            let mut r = Reader {
                section,
                lines: &mut *lines,
            };
            r.check_keys(&["isometry", "isotropy", "spread", "condition"])?;
            Tolerances {
                isometry: r.real("isometry")?.unwrap_or(defaults.isometry),
                isotropy: r.real("isotropy")?.unwrap_or(defaults.isotropy),
                spread: r.real("spread")?.unwrap_or(defaults.spread),
                condition: r.real("condition")?.unwrap_or(defaults.condition),
            }
        }
    };

    let (samples, seed) = match find("run") {
        None => (100, 0),
        Some(section) => {
            let mut r = Reader {
                section,
                lines: &mut *lines,
            };
            r.check_keys(&["samples", "seed"])?;
            (
                r.integer("samples")?.map_or(100, |s| s as usize),
                r.integer("seed")?.unwrap_or(0),
            )
        }
    };

    Ok(ScenarioSpec {
        name,
        description,
        informational,
        source,
        target,
        map,
        points,
        curve,
        tolerances,
        samples,
        seed,
    })
}
