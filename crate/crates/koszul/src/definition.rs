//! Plain-text structure definition files and their JSON rendering.
//!
//! The format is line-oriented `key = value`, `#` comments, with expression
//! values in the scalar grammar:
//!
//! ```text
//! name = contact-r3
//! kind = contact
//! coords = x y z
//! eta.x = -y
//! eta.z = 1
//! g.x.x = 1 + y^2
//! g.x.z = -y
//! lambda = eta
//! ```
//!
//! Component keys are `<object>.<indices>`: one-forms and vectors take a
//! single coordinate label (`eta.z`), bilinear objects take two, either
//! dotted (`g.x.z`) or concatenated when unambiguous (`pi.xy`), and
//! endomorphisms are dotted row-then-column (`phi.x.y`). Unspecified
//! components are zero; symmetric and antisymmetric storage is handled by
//! the object type.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::algebroid::JacobiData;
use crate::chart::{Chart, ChartError};
use crate::expr::{Expr, ParseError};
use crate::geometry::{
    contact_from, lcs_from, AlmostContactMetric, ContactStructure, GeometryError, LcsStructure,
};
use crate::manifold::{
    EndoField, FieldError, Form, MetricField, Multivector, OneForm, Signature, VectorField,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Poisson,
    Jacobi,
    Contact,
    AlmostContactMetric,
    Lcs,
    LcsWithMetric,
}

impl StructureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructureKind::Poisson => "poisson",
            StructureKind::Jacobi => "jacobi",
            StructureKind::Contact => "contact",
            StructureKind::AlmostContactMetric => "almost-contact-metric",
            StructureKind::Lcs => "lcs",
            StructureKind::LcsWithMetric => "lcs-with-metric",
        }
    }

    pub fn parse(s: &str) -> Option<StructureKind> {
        match s {
            "poisson" => Some(StructureKind::Poisson),
            "jacobi" => Some(StructureKind::Jacobi),
            "contact" => Some(StructureKind::Contact),
            "almost-contact-metric" => Some(StructureKind::AlmostContactMetric),
            "lcs" => Some(StructureKind::Lcs),
            "lcs-with-metric" => Some(StructureKind::LcsWithMetric),
            _ => None,
        }
    }
}

/// Deformation one-form selector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaChoice {
    /// Natural default for the kind (eta for contact, theta for lcs, zero
    /// otherwise).
    Default,
    Eta,
    Theta,
    /// The one-form the metric package derives.
    Metric,
    Zero,
    /// Explicit components keyed by coordinate index.
    Explicit(Vec<Expr>),
}

#[derive(Debug, Error)]
pub enum DefError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("kind `{kind}` does not use `{key}`")]
    WrongKindKey { kind: String, key: String },
    #[error("chart error: {0}")]
    Chart(#[from] ChartError),
    #[error("expression error in `{key}`: {source}")]
    Expr { key: String, source: ParseError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid JSON definition: {0}")]
    Json(String),
}

/// A parsed structure definition: chart plus raw typed components.
#[derive(Clone, Debug)]
pub struct StructureDefinition {
    pub name: Option<String>,
    pub kind: StructureKind,
    pub chart: Chart,
    pub signature: Signature,
    pub pi: Option<Multivector>,
    pub xi: Option<VectorField>,
    pub eta: Option<OneForm>,
    pub theta: Option<OneForm>,
    pub omega: Option<Form>,
    pub phi: Option<EndoField>,
    pub metric: Option<MetricField>,
    pub potential: Option<Expr>,
    pub lambda: LambdaChoice,
    /// Raw component strings in file order, for round-tripping.
    raw: BTreeMap<String, String>,
}

fn line_err(line: usize, message: impl Into<String>) -> DefError {
    DefError::Line {
        line,
        message: message.into(),
    }
}

/// Parse a definition from text or, when the first significant byte is `{`,
/// from the JSON rendering.
pub fn parse_definition(text: &str) -> Result<StructureDefinition, DefError> {
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text).map_err(|e| DefError::Json(e.to_string()))?;
        return definition_from_json(&value);
    }
    parse_definition_text(text)
}

fn parse_definition_text(text: &str) -> Result<StructureDefinition, DefError> {
    // first pass: chart-level keys
    let mut name = None;
    let mut kind = None;
    let mut coords: Option<Vec<String>> = None;
    let mut declared_dim: Option<usize> = None;
    let mut excluded_src: Vec<(usize, String)> = Vec::new();
    let mut signature = Signature::Riemannian;
    let mut component_lines: Vec<(usize, String, String)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| line_err(line_no, "expected `key = value`"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match key.as_str() {
            "name" => name = Some(value),
            "kind" => {
                kind = Some(
                    StructureKind::parse(&value)
                        .ok_or_else(|| line_err(line_no, format!("unknown kind `{value}`")))?,
                )
            }
            "coords" => coords = Some(value.split_whitespace().map(|s| s.to_string()).collect()),
            "dim" => {
                declared_dim = Some(value.parse().map_err(|_| {
                    line_err(line_no, format!("`dim` must be an integer, got `{value}`"))
                })?)
            }
            "excluded" => excluded_src.push((line_no, value)),
            "signature" => {
                signature = match value.as_str() {
                    "riemannian" => Signature::Riemannian,
                    "pseudo" => Signature::Pseudo,
                    other => {
                        return Err(line_err(
                            line_no,
                            format!("signature must be riemannian|pseudo, got `{other}`"),
                        ))
                    }
                }
            }
            _ => component_lines.push((line_no, key, value)),
        }
    }

    let kind = kind.ok_or(DefError::Missing("kind"))?;
    let coords = coords.ok_or(DefError::Missing("coords"))?;
    if let Some(d) = declared_dim {
        if d != coords.len() {
            return Err(DefError::Line {
                line: 0,
                message: format!("dim = {d} but {} coordinates declared", coords.len()),
            });
        }
    }
    let mut chart = Chart::new(coords)?;
    let mut excluded = Vec::new();
    for (line_no, src) in &excluded_src {
        excluded.push(
            chart
                .parse(src)
                .map_err(|e| line_err(*line_no, format!("excluded-locus expression: {e}")))?,
        );
    }
    if !excluded.is_empty() {
        chart = chart.with_excluded(excluded);
    }

    let mut def = StructureDefinition {
        name,
        kind,
        chart: chart.clone(),
        signature,
        pi: None,
        xi: None,
        eta: None,
        theta: None,
        omega: None,
        phi: None,
        metric: None,
        potential: None,
        lambda: LambdaChoice::Default,
        raw: BTreeMap::new(),
    };

    for (line_no, key, value) in component_lines {
        def.apply_component(line_no, &key, &value)?;
    }
    Ok(def)
}

impl StructureDefinition {
    fn apply_component(&mut self, line: usize, key: &str, value: &str) -> Result<(), DefError> {
        if self.raw.contains_key(key) {
            return Err(line_err(line, format!("duplicate key `{key}`")));
        }
        let chart = self.chart.clone();
        let parse = |k: &str, v: &str| -> Result<Expr, DefError> {
            chart.parse(v).map_err(|e| DefError::Expr {
                key: k.to_string(),
                source: e,
            })
        };

        let mut parts = key.splitn(2, '.');
        let object = parts.next().unwrap_or_default();
        let index_part = parts.next();

        match (object, index_part) {
            ("f", None) => self.potential = Some(parse(key, value)?),
            ("lambda", None) => {
                self.lambda = match value {
                    "eta" => LambdaChoice::Eta,
                    "theta" => LambdaChoice::Theta,
                    "metric" => LambdaChoice::Metric,
                    "zero" => LambdaChoice::Zero,
                    other => {
                        return Err(line_err(
                            line,
                            format!("lambda must be eta|theta|metric|zero, got `{other}`"),
                        ))
                    }
                }
            }
            ("lambda", Some(label)) => {
                let i = self.coord(line, label)?;
                let comps = match &mut self.lambda {
                    LambdaChoice::Explicit(c) => c,
                    _ => {
                        self.lambda = LambdaChoice::Explicit(vec![Expr::zero(); chart.dim()]);
                        match &mut self.lambda {
                            LambdaChoice::Explicit(c) => c,
                            _ => unreachable!(),
                        }
                    }
                };
                comps[i] = parse(key, value)?;
            }
            ("eta", Some(label)) => {
                let i = self.coord(line, label)?;
                let form = self.eta.get_or_insert_with(|| OneForm::zero(chart.clone()));
                let mut comps = form.comps().to_vec();
                comps[i] = parse(key, value)?;
                self.eta = Some(OneForm::new(chart.clone(), comps)?);
            }
            ("theta", Some(label)) => {
                let i = self.coord(line, label)?;
                let form = self
                    .theta
                    .get_or_insert_with(|| OneForm::zero(chart.clone()));
                let mut comps = form.comps().to_vec();
                comps[i] = parse(key, value)?;
                self.theta = Some(OneForm::new(chart.clone(), comps)?);
            }
            ("xi", Some(label)) => {
                let i = self.coord(line, label)?;
                let field = self
                    .xi
                    .get_or_insert_with(|| VectorField::zero(chart.clone()));
                let mut comps = field.comps().to_vec();
                comps[i] = parse(key, value)?;
                self.xi = Some(VectorField::new(chart.clone(), comps)?);
            }
            ("pi", Some(labels)) => {
                let (i, j) = self.coord_pair(line, labels)?;
                if i == j {
                    return Err(line_err(line, "antisymmetric component needs i != j"));
                }
                let pi = match &mut self.pi {
                    Some(p) => p,
                    None => {
                        self.pi = Some(Multivector::zero(chart.clone(), 2)?);
                        self.pi.as_mut().unwrap()
                    }
                };
                pi.set_component(&[i, j], parse(key, value)?);
            }
            ("omega", Some(labels)) => {
                let (i, j) = self.coord_pair(line, labels)?;
                if i == j {
                    return Err(line_err(line, "antisymmetric component needs i != j"));
                }
                let omega = match &mut self.omega {
                    Some(o) => o,
                    None => {
                        self.omega = Some(Form::zero(chart.clone(), 2)?);
                        self.omega.as_mut().unwrap()
                    }
                };
                omega.set_component(&[i, j], parse(key, value)?);
            }
            ("g", Some(labels)) => {
                let (i, j) = self.coord_pair(line, labels)?;
                let g = match &mut self.metric {
                    Some(g) => g,
                    None => {
                        self.metric = Some(MetricField::zero(chart.clone(), self.signature));
                        self.metric.as_mut().unwrap()
                    }
                };
                g.set(i, j, parse(key, value)?);
            }
            ("phi", Some(labels)) => {
                let (i, j) = self.coord_pair(line, labels)?;
                let phi = match &mut self.phi {
                    Some(p) => p,
                    None => {
                        self.phi = Some(EndoField::zero(chart.clone()));
                        self.phi.as_mut().unwrap()
                    }
                };
                phi.set(i, j, parse(key, value)?);
            }
            _ => return Err(line_err(
                line,
                format!(
                    "unknown key `{key}` (objects: pi, xi, eta, theta, omega, g, phi, f, lambda)"
                ),
            )),
        }
        self.raw.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn coord(&self, line: usize, label: &str) -> Result<usize, DefError> {
        self.chart
            .coord_index(label)
            .ok_or_else(|| line_err(line, format!("unknown coordinate `{label}`")))
    }

    /// Resolve a two-index label: dotted (`x.y`) or concatenated (`xy`,
    /// accepted only when the split into two coordinate names is unique).
    fn coord_pair(&self, line: usize, labels: &str) -> Result<(usize, usize), DefError> {
        if let Some((a, b)) = labels.split_once('.') {
            return Ok((self.coord(line, a)?, self.coord(line, b)?));
        }
        let mut splits = Vec::new();
        for cut in 1..labels.len() {
            let (a, b) = labels.split_at(cut);
            if let (Some(i), Some(j)) = (self.chart.coord_index(a), self.chart.coord_index(b)) {
                splits.push((i, j));
            }
        }
        match splits.len() {
            1 => Ok(splits[0]),
            0 => Err(line_err(
                line,
                format!("cannot resolve index label `{labels}`"),
            )),
            _ => Err(line_err(
                line,
                format!("ambiguous index label `{labels}`, use the dotted form"),
            )),
        }
    }

    /// Canonical text rendering (parse -> render is a fixed point).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            out.push_str(&format!("name = {name}\n"));
        }
        out.push_str(&format!("kind = {}\n", self.kind.as_str()));
        out.push_str(&format!("coords = {}\n", self.chart.names().join(" ")));
        if self.signature == Signature::Pseudo {
            out.push_str("signature = pseudo\n");
        }
        for locus in self.chart.excluded() {
            out.push_str(&format!("excluded = {}\n", self.chart.render(locus)));
        }
        for (key, value) in &self.raw {
            if key == "lambda" || key.starts_with("lambda.") {
                continue;
            }
            out.push_str(&format!("{key} = {value}\n"));
        }
        match &self.lambda {
            LambdaChoice::Default => {}
            LambdaChoice::Eta => out.push_str("lambda = eta\n"),
            LambdaChoice::Theta => out.push_str("lambda = theta\n"),
            LambdaChoice::Metric => out.push_str("lambda = metric\n"),
            LambdaChoice::Zero => out.push_str("lambda = zero\n"),
            LambdaChoice::Explicit(comps) => {
                for (i, c) in comps.iter().enumerate() {
                    if !c.is_zero() {
                        out.push_str(&format!(
                            "lambda.{} = {}\n",
                            self.chart.names()[i],
                            self.chart.render(c)
                        ));
                    }
                }
            }
        }
        out
    }

    /// Machine rendering of the same data.
    pub fn to_json(&self) -> Value {
        let mut components = serde_json::Map::new();
        for (key, value) in &self.raw {
            if key == "lambda" || key.starts_with("lambda.") {
                continue;
            }
            components.insert(key.clone(), Value::String(value.clone()));
        }
        let lambda = match &self.lambda {
            LambdaChoice::Default => Value::Null,
            LambdaChoice::Eta => json!("eta"),
            LambdaChoice::Theta => json!("theta"),
            LambdaChoice::Metric => json!("metric"),
            LambdaChoice::Zero => json!("zero"),
            LambdaChoice::Explicit(comps) => {
                let mut map = serde_json::Map::new();
                for (i, c) in comps.iter().enumerate() {
                    if !c.is_zero() {
                        map.insert(
                            self.chart.names()[i].clone(),
                            Value::String(self.chart.render(c)),
                        );
                    }
                }
                Value::Object(map)
            }
        };
        json!({
            "name": self.name,
            "kind": self.kind.as_str(),
            "chart": {
                "dim": self.chart.dim(),
                "coords": self.chart.names(),
                "excluded": self.chart.excluded().iter().map(|e| self.chart.render(e)).collect::<Vec<_>>(),
            },
            "components": Value::Object(components),
            "lambda": lambda,
        })
    }
}

/// Rebuild a definition from the JSON rendering.
pub fn definition_from_json(value: &Value) -> Result<StructureDefinition, DefError> {
    let obj = value
        .as_object()
        .ok_or_else(|| DefError::Json("expected an object".into()))?;
    let mut text = String::new();
    if let Some(name) = obj.get("name").and_then(|v| v.as_str()) {
        text.push_str(&format!("name = {name}\n"));
    }
    let kind = obj
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| DefError::Json("missing `kind`".into()))?;
    text.push_str(&format!("kind = {kind}\n"));
    let chart = obj
        .get("chart")
        .and_then(|v| v.as_object())
        .ok_or_else(|| DefError::Json("missing `chart`".into()))?;
    let coords = chart
        .get("coords")
        .and_then(|v| v.as_array())
        .ok_or_else(|| DefError::Json("missing `chart.coords`".into()))?;
    let names: Vec<&str> = coords.iter().filter_map(|v| v.as_str()).collect();
    text.push_str(&format!("coords = {}\n", names.join(" ")));
    if let Some(excluded) = chart.get("excluded").and_then(|v| v.as_array()) {
        for e in excluded.iter().filter_map(|v| v.as_str()) {
            text.push_str(&format!("excluded = {e}\n"));
        }
    }
    if let Some(components) = obj.get("components").and_then(|v| v.as_object()) {
        for (key, value) in components {
            let v = value
                .as_str()
                .ok_or_else(|| DefError::Json(format!("component `{key}` must be a string")))?;
            text.push_str(&format!("{key} = {v}\n"));
        }
    }
    match obj.get("lambda") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) => text.push_str(&format!("lambda = {s}\n")),
        Some(Value::Object(map)) => {
            for (coord, value) in map {
                let v = value
                    .as_str()
                    .ok_or_else(|| DefError::Json("lambda components must be strings".into()))?;
                text.push_str(&format!("lambda.{coord} = {v}\n"));
            }
        }
        Some(other) => {
            return Err(DefError::Json(format!(
                "lambda must be a string or object, got {other}"
            )))
        }
    }
    parse_definition_text(&text)
}

/// A built structure, ready for the check suites.
#[derive(Clone, Debug)]
pub enum Structure {
    Poisson {
        data: JacobiData,
        metric: Option<MetricField>,
    },
    Jacobi {
        data: JacobiData,
        metric: Option<MetricField>,
    },
    Contact {
        contact: ContactStructure,
        metric: Option<MetricField>,
    },
    AlmostContact {
        acm: AlmostContactMetric,
    },
    Lcs {
        lcs: LcsStructure,
    },
    LcsWithMetric {
        lcs: LcsStructure,
        metric: MetricField,
    },
}

impl Structure {
    pub fn kind(&self) -> StructureKind {
        match self {
            Structure::Poisson { .. } => StructureKind::Poisson,
            Structure::Jacobi { .. } => StructureKind::Jacobi,
            Structure::Contact { .. } => StructureKind::Contact,
            Structure::AlmostContact { .. } => StructureKind::AlmostContactMetric,
            Structure::Lcs { .. } => StructureKind::Lcs,
            Structure::LcsWithMetric { .. } => StructureKind::LcsWithMetric,
        }
    }

    pub fn chart(&self) -> &Chart {
        match self {
            Structure::Poisson { data, .. } | Structure::Jacobi { data, .. } => data.chart(),
            Structure::Contact { contact, .. } => contact.chart(),
            Structure::AlmostContact { acm } => acm.chart(),
            Structure::Lcs { lcs } => lcs.chart(),
            Structure::LcsWithMetric { lcs, .. } => lcs.chart(),
        }
    }

    /// The underlying pair with its natural deformation one-form.
    pub fn jacobi_candidate(&self) -> JacobiData {
        match self {
            Structure::Poisson { data, .. } | Structure::Jacobi { data, .. } => data.clone(),
            Structure::Contact { contact, .. } => contact.jacobi_data(),
            Structure::AlmostContact { acm } => acm.jacobi_candidate(),
            Structure::Lcs { lcs } => lcs.jacobi_data(),
            Structure::LcsWithMetric { lcs, .. } => lcs.jacobi_data(),
        }
    }

    pub fn metric(&self) -> Option<&MetricField> {
        match self {
            Structure::Poisson { metric, .. } | Structure::Jacobi { metric, .. } => metric.as_ref(),
            Structure::Contact { metric, .. } => metric.as_ref(),
            Structure::AlmostContact { acm } => Some(acm.metric()),
            Structure::Lcs { .. } => None,
            Structure::LcsWithMetric { metric, .. } => Some(metric),
        }
    }

    /// Every defining component expression: inputs to the derivative
    /// hygiene sweep.
    pub fn component_expressions(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        let push_metric = |g: &MetricField, out: &mut Vec<Expr>| {
            out.extend_from_slice(g.components());
        };
        match self {
            Structure::Poisson { data, metric } | Structure::Jacobi { data, metric } => {
                out.extend_from_slice(data.pi().components());
                out.extend_from_slice(data.xi().comps());
                if let Some(l) = data.lambda() {
                    out.extend_from_slice(l.comps());
                }
                if let Some(g) = metric {
                    push_metric(g, &mut out);
                }
            }
            Structure::Contact { contact, metric } => {
                out.extend_from_slice(contact.eta().comps());
                out.extend_from_slice(contact.pi().components());
                out.extend_from_slice(contact.reeb().comps());
                if let Some(g) = metric {
                    push_metric(g, &mut out);
                }
            }
            Structure::AlmostContact { acm } => {
                out.extend_from_slice(acm.eta().comps());
                out.extend_from_slice(acm.xi().comps());
                out.extend_from_slice(acm.phi().components());
                push_metric(acm.metric(), &mut out);
            }
            Structure::Lcs { lcs } => {
                out.extend_from_slice(lcs.omega().components());
                out.extend_from_slice(lcs.theta().comps());
                out.extend_from_slice(lcs.pi().components());
                out.extend_from_slice(lcs.xi().comps());
                if let Some(f) = lcs.potential() {
                    out.push(f.clone());
                }
            }
            Structure::LcsWithMetric { lcs, metric } => {
                out.extend_from_slice(lcs.omega().components());
                out.extend_from_slice(lcs.theta().comps());
                out.extend_from_slice(lcs.pi().components());
                out.extend_from_slice(lcs.xi().comps());
                if let Some(f) = lcs.potential() {
                    out.push(f.clone());
                }
                push_metric(metric, &mut out);
            }
        }
        out
    }
}

/// Build the typed structure a definition describes, resolving the lambda
/// choice against the kind.
pub fn build_structure(def: &StructureDefinition) -> Result<Structure, DefError> {
    let chart = def.chart.clone();
    let zero_vec = VectorField::zero(chart.clone());
    match def.kind {
        StructureKind::Poisson => {
            let pi = def.pi.clone().ok_or(DefError::Missing("pi"))?;
            let data = JacobiData::new(pi, zero_vec)
                .map_err(GeometryError::Algebroid)?
                .with_lambda(resolve_lambda(def, None, None)?)
                .map_err(GeometryError::Algebroid)?;
            Ok(Structure::Poisson {
                data,
                metric: def.metric.clone(),
            })
        }
        StructureKind::Jacobi => {
            let pi = def.pi.clone().ok_or(DefError::Missing("pi"))?;
            let xi = def.xi.clone().unwrap_or(zero_vec);
            let data = JacobiData::new(pi, xi)
                .map_err(GeometryError::Algebroid)?
                .with_lambda(resolve_lambda(def, None, None)?)
                .map_err(GeometryError::Algebroid)?;
            Ok(Structure::Jacobi {
                data,
                metric: def.metric.clone(),
            })
        }
        StructureKind::Contact => {
            let eta = def.eta.clone().ok_or(DefError::Missing("eta"))?;
            let contact = contact_from(&eta)?;
            Ok(Structure::Contact {
                contact,
                metric: def.metric.clone(),
            })
        }
        StructureKind::AlmostContactMetric => {
            let phi = def.phi.clone().ok_or(DefError::Missing("phi"))?;
            let xi = def.xi.clone().ok_or(DefError::Missing("xi"))?;
            let eta = def.eta.clone().ok_or(DefError::Missing("eta"))?;
            let g = def.metric.clone().ok_or(DefError::Missing("g"))?;
            Ok(Structure::AlmostContact {
                acm: AlmostContactMetric::new(phi, xi, eta, g)?,
            })
        }
        StructureKind::Lcs | StructureKind::LcsWithMetric => {
            let omega = def.omega.clone().ok_or(DefError::Missing("omega"))?;
            let theta = def.theta.clone().unwrap_or(OneForm::zero(chart.clone()));
            let lcs = lcs_from(&omega, &theta, def.potential.clone())?;
            if def.kind == StructureKind::LcsWithMetric {
                let g = def.metric.clone().ok_or(DefError::Missing("g"))?;
                Ok(Structure::LcsWithMetric { lcs, metric: g })
            } else {
                Ok(Structure::Lcs { lcs })
            }
        }
    }
}

/// Resolve the lambda choice for pair kinds (poisson/jacobi); contact and
/// lcs kinds carry their natural lambda inside their structures.
fn resolve_lambda(
    def: &StructureDefinition,
    eta: Option<&OneForm>,
    theta: Option<&OneForm>,
) -> Result<OneForm, DefError> {
    let chart = def.chart.clone();
    match &def.lambda {
        LambdaChoice::Default | LambdaChoice::Zero => Ok(OneForm::zero(chart)),
        LambdaChoice::Eta => eta
            .or(def.eta.as_ref())
            .cloned()
            .ok_or(DefError::Missing("eta")),
        LambdaChoice::Theta => theta
            .or(def.theta.as_ref())
            .cloned()
            .ok_or(DefError::Missing("theta")),
        LambdaChoice::Explicit(comps) => {
            Ok(OneForm::new(chart, comps.clone()).map_err(DefError::Field)?)
        }
        LambdaChoice::Metric => {
            // derive from the metric package
            let pi = def.pi.clone().ok_or(DefError::Missing("pi"))?;
            let xi = def
                .xi
                .clone()
                .unwrap_or_else(|| VectorField::zero(def.chart.clone()));
            let g = def.metric.clone().ok_or(DefError::Missing("g"))?;
            let pkg = crate::metric::build_package(&pi, &xi, &g).map_err(GeometryError::Metric)?;
            Ok(pkg.lambda().clone())
        }
    }
}
