//! Browser bindings for the koszul library. Three operations back the demo
//! page: list the catalog (with definition sources to prefill the editor),
//! derive the induced objects of a structure definition, and run a named
//! identity suite, returning the same JSON report the CLI emits.
//!
//! Every function takes and returns strings so the page needs no glue
//! beyond `JSON.parse`. Errors come back as `{"error": "..."}` documents
//! rather than exceptions.

use serde_json::json;
use wasm_bindgen::prelude::*;

use koszul::catalog;
use koszul::definition::{build_structure, parse_definition};
use koszul::derive::{derive_object, DerivedObject};
use koszul::report::ResidualContext;
use koszul::sample::sample_points;
use koszul::suites::{run_suite, Suite};

fn error_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// Catalog listing with definition sources and expected deviations.
#[wasm_bindgen]
pub fn catalog_json() -> String {
    let fixtures: Vec<_> = catalog::FIXTURES
        .iter()
        .map(|spec| {
            let deviations: Vec<_> = spec
                .expected_deviations
                .iter()
                .map(|(name, v)| json!({ "check": name, "verdict": v.to_string() }))
                .collect();
            json!({
                "name": spec.name,
                "counterexample": spec.counterexample,
                "definition": spec.text,
                "expected_deviations": deviations,
            })
        })
        .collect();
    json!({
        "fixtures": fixtures,
        "suites": Suite::NAMES,
        "objects": DerivedObject::NAMES,
    })
    .to_string()
}

/// Run a suite against a definition (text or JSON form). Returns the CLI's
/// report schema: `{structure, suite, seed, points, checks: [...]}`.
#[wasm_bindgen]
pub fn check_json(definition: &str, suite: &str, points: u32, seed: u32, tol: f64) -> String {
    let Some(suite) = Suite::parse(suite) else {
        return error_json(format!(
            "unknown suite; choose one of {}",
            Suite::NAMES.join(", ")
        ));
    };
    let def = match parse_definition(definition) {
        Ok(d) => d,
        Err(e) => return error_json(e),
    };
    let structure = match build_structure(&def) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let pts = match sample_points(structure.chart(), points as usize, seed as u64) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let ctx = ResidualContext::new(pts, seed as u64, tol);
    let reports = match run_suite(&structure, suite, &ctx) {
        Ok(r) => r,
        Err(e) => return error_json(e),
    };
    let checks: Vec<_> = reports
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "anchor": r.anchor,
                "residual": r.residual,
                "tol": r.tol,
                "verdict": r.verdict.to_string(),
            })
        })
        .collect();
    json!({
        "structure": def.name.clone().unwrap_or_else(|| "unnamed".into()),
        "suite": suite.as_str(),
        "seed": seed,
        "points": points,
        "checks": checks,
    })
    .to_string()
}

/// Derive an object (`reeb`, `pi`, `lambda`, `sharp`, `christoffel`, `d`,
/// `j`, `defects`) from a definition; returns `{"text": ..., "json": ...}`.
#[wasm_bindgen]
pub fn derive_json(definition: &str, object: &str) -> String {
    let Some(object) = DerivedObject::parse(object) else {
        return error_json(format!(
            "unknown object; choose one of {}",
            DerivedObject::NAMES.join(", ")
        ));
    };
    let def = match parse_definition(definition) {
        Ok(d) => d,
        Err(e) => return error_json(e),
    };
    let structure = match build_structure(&def) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let text = match derive_object(&structure, object, false) {
        Ok(t) => t,
        Err(e) => return error_json(e),
    };
    let machine = derive_object(&structure, object, true).unwrap_or_else(|_| "{}".into());
    json!({
        "text": text,
        "json": serde_json::from_str::<serde_json::Value>(&machine).unwrap_or(json!({})),
    })
    .to_string()
}
