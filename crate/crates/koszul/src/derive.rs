//! Rendering of derived objects (Reeb field, bivector, deformation
//! one-form, anchor, Christoffel symbols, the contravariant derivative
//! table, the metric endomorphism and the compatibility defect) in the
//! expression grammar, shared by the CLI and the browser demo.

use serde_json::{json, Map, Value};

use crate::chart::Chart;
use crate::definition::Structure;
use crate::expr::Expr;
use crate::manifold::{combinations, OneForm};
use crate::metric::build_package;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivedObject {
    Reeb,
    Pi,
    Lambda,
    Sharp,
    Christoffel,
    ContravariantD,
    ComplexEndo,
    Defects,
}

impl DerivedObject {
    pub const NAMES: &'static [&'static str] = &[
        "reeb",
        "pi",
        "lambda",
        "sharp",
        "christoffel",
        "d",
        "j",
        "defects",
    ];

    pub fn parse(s: &str) -> Option<DerivedObject> {
        match s {
            "reeb" => Some(DerivedObject::Reeb),
            "pi" => Some(DerivedObject::Pi),
            "lambda" => Some(DerivedObject::Lambda),
            "sharp" => Some(DerivedObject::Sharp),
            "christoffel" => Some(DerivedObject::Christoffel),
            "d" => Some(DerivedObject::ContravariantD),
            "j" => Some(DerivedObject::ComplexEndo),
            "defects" => Some(DerivedObject::Defects),
            _ => None,
        }
    }
}

pub fn format_vector(chart: &Chart, comps: &[Expr]) -> String {
    let mut parts = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        let c = c.simplify();
        if c.is_zero() {
            continue;
        }
        let basis = format!("d/d{}", chart.names()[i]);
        if c.is_one() {
            parts.push(basis);
        } else {
            parts.push(format!("({})*{}", chart.render(&c), basis));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

pub fn format_oneform(chart: &Chart, form: &OneForm) -> String {
    let mut parts = Vec::new();
    for (i, c) in form.comps().iter().enumerate() {
        let c = c.simplify();
        if c.is_zero() {
            continue;
        }
        let basis = format!("d{}", chart.names()[i]);
        if c.is_one() {
            parts.push(basis);
        } else {
            parts.push(format!("({})*{}", chart.render(&c), basis));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Render a derived object as plain text or a JSON value.
pub fn derive_object(
    structure: &Structure,
    object: DerivedObject,
    as_json: bool,
) -> Result<String, String> {
    let chart = structure.chart().clone();
    let data = structure.jacobi_candidate();
    let label2 = |i: usize, j: usize| format!("{}{}", chart.names()[i], chart.names()[j]);
    let finish = |map: Map<String, Value>, lines: Vec<String>, as_json: bool| {
        if as_json {
            Ok(serde_json::to_string_pretty(&Value::Object(map)).expect("serializable"))
        } else {
            Ok(lines.join("\n"))
        }
    };
    match object {
        DerivedObject::Reeb => {
            let Structure::Contact { contact, .. } = structure else {
                return Err("object `reeb` requires a contact structure".into());
            };
            if as_json {
                let mut map = Map::new();
                for (i, c) in contact.reeb().comps().iter().enumerate() {
                    if !c.is_zero() {
                        map.insert(chart.names()[i].clone(), json!(chart.render(c)));
                    }
                }
                let mut outer = Map::new();
                outer.insert("xi".into(), Value::Object(map));
                finish(outer, Vec::new(), true)
            } else {
                Ok(format!(
                    "xi = {}",
                    format_vector(&chart, contact.reeb().comps())
                ))
            }
        }
        DerivedObject::Pi => {
            let mut map = Map::new();
            let mut lines = Vec::new();
            for combo in combinations(chart.dim(), 2) {
                let c = data.pi().component(&combo).simplify();
                let key = label2(combo[0], combo[1]);
                map.insert(key.clone(), json!(chart.render(&c)));
                lines.push(format!("pi.{key} = {}", chart.render(&c)));
            }
            finish(map, lines, as_json)
        }
        DerivedObject::Lambda => {
            let lambda = match structure.metric() {
                Some(g) => build_package(data.pi(), data.xi(), g)
                    .map_err(|e| e.to_string())?
                    .lambda()
                    .clone(),
                None => data
                    .lambda()
                    .cloned()
                    .ok_or("structure has no deformation one-form")?,
            };
            if as_json {
                let mut map = Map::new();
                for (i, c) in lambda.comps().iter().enumerate() {
                    let c = c.simplify();
                    if !c.is_zero() {
                        map.insert(chart.names()[i].clone(), json!(chart.render(&c)));
                    }
                }
                let mut outer = Map::new();
                outer.insert("lambda".into(), Value::Object(map));
                finish(outer, Vec::new(), true)
            } else {
                Ok(format!("lambda = {}", format_oneform(&chart, &lambda)))
            }
        }
        DerivedObject::Sharp => {
            let matrix = data.sharp_matrix().map_err(|e| e.to_string())?;
            let mut map = Map::new();
            let mut lines = Vec::new();
            for i in 0..chart.dim() {
                let col: Vec<Expr> = (0..chart.dim()).map(|r| matrix[r][i].clone()).collect();
                lines.push(format!(
                    "sharp(d{}) = {}",
                    chart.names()[i],
                    format_vector(&chart, &col)
                ));
                let mut inner = Map::new();
                for (r, c) in col.iter().enumerate() {
                    let c = c.simplify();
                    if !c.is_zero() {
                        inner.insert(chart.names()[r].clone(), json!(chart.render(&c)));
                    }
                }
                map.insert(format!("d{}", chart.names()[i]), Value::Object(inner));
            }
            finish(map, lines, as_json)
        }
        DerivedObject::Christoffel
        | DerivedObject::ContravariantD
        | DerivedObject::ComplexEndo
        | DerivedObject::Defects => {
            let Some(g) = structure.metric() else {
                return Err("object requires a metric".into());
            };
            let pkg = build_package(data.pi(), data.xi(), g).map_err(|e| e.to_string())?;
            let mut map = Map::new();
            let mut lines = Vec::new();
            match object {
                DerivedObject::Christoffel => {
                    for k in 0..chart.dim() {
                        for i in 0..chart.dim() {
                            for j in i..chart.dim() {
                                let c = pkg.levi_civita().christoffel(k, i, j).simplify();
                                if !c.is_zero() {
                                    let key = format!(
                                        "{}.{}{}",
                                        chart.names()[k],
                                        chart.names()[i],
                                        chart.names()[j]
                                    );
                                    map.insert(key.clone(), json!(chart.render(&c)));
                                    lines.push(format!("Gamma.{key} = {}", chart.render(&c)));
                                }
                            }
                        }
                    }
                    if lines.is_empty() {
                        lines.push("all Christoffel symbols vanish".into());
                    }
                }
                DerivedObject::ContravariantD => {
                    for i in 0..chart.dim() {
                        for j in 0..chart.dim() {
                            let d = pkg.d_basis(i, j);
                            if !d.is_zero() {
                                let key = format!("d{}.d{}", chart.names()[i], chart.names()[j]);
                                map.insert(key.clone(), json!(format_oneform(&chart, d)));
                                lines.push(format!(
                                    "D_{{d{}}} d{} = {}",
                                    chart.names()[i],
                                    chart.names()[j],
                                    format_oneform(&chart, d)
                                ));
                            }
                        }
                    }
                    if lines.is_empty() {
                        lines.push("D vanishes on the coordinate cobasis".into());
                    }
                }
                DerivedObject::ComplexEndo => {
                    for i in 0..chart.dim() {
                        for j in 0..chart.dim() {
                            let c = pkg.j_endo().get(i, j).simplify();
                            if !c.is_zero() {
                                let key = format!("{}.{}", chart.names()[i], chart.names()[j]);
                                map.insert(key.clone(), json!(chart.render(&c)));
                                lines.push(format!("J.{key} = {}", chart.render(&c)));
                            }
                        }
                    }
                    if lines.is_empty() {
                        lines.push("J = 0".into());
                    }
                }
                DerivedObject::Defects => {
                    for i in 0..chart.dim() {
                        for j in 0..chart.dim() {
                            for k in 0..chart.dim() {
                                let d = pkg
                                    .compat_defect_trilinear(
                                        &OneForm::basis(chart.clone(), i),
                                        &OneForm::basis(chart.clone(), j),
                                        &OneForm::basis(chart.clone(), k),
                                    )
                                    .map_err(|e| e.to_string())?
                                    .simplify();
                                if !d.is_zero() {
                                    let key = format!(
                                        "{}.{}.{}",
                                        chart.names()[i],
                                        chart.names()[j],
                                        chart.names()[k]
                                    );
                                    map.insert(key.clone(), json!(chart.render(&d)));
                                    lines.push(format!("defect.{key} = {}", chart.render(&d)));
                                }
                            }
                        }
                    }
                    if lines.is_empty() {
                        lines.push("compatibility defect = 0".into());
                    }
                }
                _ => unreachable!(),
            }
            finish(map, lines, as_json)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn reeb_of_contact_fixture() {
        let f = catalog::load("contact-r3").unwrap();
        let out = derive_object(&f.structure, DerivedObject::Reeb, false).unwrap();
        assert_eq!(out, "xi = d/dz");
    }

    #[test]
    fn bivector_components_of_contact_fixture() {
        let f = catalog::load("contact-r3").unwrap();
        let out = derive_object(&f.structure, DerivedObject::Pi, false).unwrap();
        assert!(out.contains("pi.xy = 1"));
        assert!(out.contains("pi.xz = 0"));
        assert!(out.contains("pi.yz = -y"));
    }

    #[test]
    fn lambda_of_contact_fixture_is_eta() {
        // the metric package reproduces eta = -y dx + dz
        let f = catalog::load("contact-r3").unwrap();
        let out = derive_object(&f.structure, DerivedObject::Lambda, false).unwrap();
        assert_eq!(out, "lambda = (-y)*dx + dz");
    }

    #[test]
    fn objects_needing_metrics_are_rejected_without_one() {
        let f = catalog::load("lcs-broken").unwrap();
        assert!(derive_object(&f.structure, DerivedObject::Christoffel, false).is_err());
        assert!(derive_object(&f.structure, DerivedObject::Reeb, false).is_err());
    }
}
