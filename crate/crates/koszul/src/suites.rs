//! Named residual suites over built structures. Each suite produces a list
//! of [`CheckReport`]s with stable names, consumed by the CLI, the catalog
//! regression tests and the acceptance tests.

use thiserror::Error;

use crate::algebroid::AlgebroidError;
use crate::calculus::lie_scalar;
use crate::definition::{Structure, StructureKind};
use crate::geometry::{
    almost_contact_checks, check_contact_algebroid, check_half_kenmotsu_equivalence,
    check_lcs_jacobi_equivalence, contact_metric_structure, lck_check, GeometryError,
};
use crate::manifold::OneForm;
use crate::metric::{
    build_package, check_anchor_transport, isometry_check, MetricError, MetricPackage,
};
use crate::report::{CheckReport, ResidualContext};
use crate::sample::{random_components, random_linear_components, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Jacobi,
    Algebroid,
    Contact,
    Lcs,
    Connection,
    Compatibility,
    Kenmotsu,
    Lck,
    All,
}

impl Suite {
    pub const NAMES: &'static [&'static str] = &[
        "jacobi",
        "algebroid",
        "contact",
        "lcs",
        "connection",
        "compatibility",
        "kenmotsu",
        "lck",
        "all",
    ];

    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "jacobi" => Some(Suite::Jacobi),
            "algebroid" => Some(Suite::Algebroid),
            "contact" => Some(Suite::Contact),
            "lcs" => Some(Suite::Lcs),
            "connection" => Some(Suite::Connection),
            "compatibility" => Some(Suite::Compatibility),
            "kenmotsu" => Some(Suite::Kenmotsu),
            "lck" => Some(Suite::Lck),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Jacobi => "jacobi",
            Suite::Algebroid => "algebroid",
            Suite::Contact => "contact",
            Suite::Lcs => "lcs",
            Suite::Connection => "connection",
            Suite::Compatibility => "compatibility",
            Suite::Kenmotsu => "kenmotsu",
            Suite::Lck => "lck",
            Suite::All => "all",
        }
    }

    /// Whether this suite makes sense for the given structure kind.
    pub fn applicable(&self, structure: &Structure) -> bool {
        let has_metric = structure.metric().is_some();
        match self {
            Suite::Jacobi | Suite::Algebroid | Suite::All => true,
            Suite::Contact => matches!(structure.kind(), StructureKind::Contact),
            Suite::Lcs => matches!(
                structure.kind(),
                StructureKind::Lcs | StructureKind::LcsWithMetric
            ),
            Suite::Connection | Suite::Compatibility => has_metric,
            Suite::Kenmotsu => {
                matches!(
                    structure.kind(),
                    StructureKind::AlmostContactMetric | StructureKind::Contact
                ) && has_metric
            }
            Suite::Lck => matches!(structure.kind(), StructureKind::LcsWithMetric),
        }
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("suite `{suite}` is not applicable to kind `{kind}`")]
    NotApplicable { suite: String, kind: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
}

/// Run a suite on a structure; `All` concatenates every applicable suite.
pub fn run_suite(
    structure: &Structure,
    suite: Suite,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    if !suite.applicable(structure) {
        return Err(SuiteError::NotApplicable {
            suite: suite.as_str().into(),
            kind: structure.kind().as_str().into(),
        });
    }
    match suite {
        Suite::Jacobi => jacobi_suite(structure, ctx),
        Suite::Algebroid => algebroid_suite(structure, ctx),
        Suite::Contact => contact_suite(structure, ctx),
        Suite::Lcs => lcs_suite(structure, ctx),
        Suite::Connection => connection_suite(structure, ctx),
        Suite::Compatibility => compatibility_suite(structure, ctx),
        Suite::Kenmotsu => kenmotsu_suite(structure, ctx),
        Suite::Lck => lck_suite(structure, ctx),
        Suite::All => {
            let mut out = Vec::new();
            for s in [
                Suite::Jacobi,
                Suite::Algebroid,
                Suite::Contact,
                Suite::Lcs,
                Suite::Connection,
                Suite::Compatibility,
                Suite::Kenmotsu,
                Suite::Lck,
            ] {
                if s.applicable(structure) {
                    out.extend(run_suite(structure, s, ctx)?);
                }
            }
            Ok(out)
        }
    }
}

fn jacobi_suite(
    structure: &Structure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    let data = structure.jacobi_candidate();
    Ok(vec![
        ctx.check(
            "jacobi.schouten",
            "[pi,pi] = 2 xi ^ pi",
            data.jacobi_defect_schouten()?.components(),
        ),
        ctx.check(
            "jacobi.invariance",
            "L_xi pi = 0",
            data.jacobi_defect_invariance()?.components(),
        ),
    ])
}

fn algebroid_suite(
    structure: &Structure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    let chart = structure.chart().clone();
    let data = structure.jacobi_candidate().force_verified();
    let mut rng = Rng::seeded(ctx.seed ^ 0xA1);
    let mut reports = Vec::new();

    // Leibniz identity with random inputs
    let mut leibniz = Vec::new();
    for _ in 0..2 {
        let a = OneForm::new(chart.clone(), random_components(&chart, &mut rng))
            .map_err(GeometryError::Field)?;
        let b = OneForm::new(chart.clone(), random_components(&chart, &mut rng))
            .map_err(GeometryError::Field)?;
        let f = crate::sample::random_polynomial(&chart, &mut rng);
        leibniz.extend_from_slice(data.leibniz_defect(&a, &f, &b)?.comps());
    }
    reports.push(ctx.check(
        "algebroid.leibniz",
        "[a, f b] = f [a,b] + (sharp(a) f) b",
        &leibniz,
    ));

    // antisymmetry with random inputs
    let a = OneForm::new(chart.clone(), random_components(&chart, &mut rng))
        .map_err(GeometryError::Field)?;
    let b = OneForm::new(chart.clone(), random_components(&chart, &mut rng))
        .map_err(GeometryError::Field)?;
    let anti = data
        .lambda_bracket(&a, &b)?
        .add(&data.lambda_bracket(&b, &a)?);
    reports.push(ctx.check("algebroid.antisymmetry", "[a,b] = -[b,a]", anti.comps()));

    // the anchor defect equals pi(a,b)(xi - sharp(lambda)): basis pairs plus
    // one random pair
    let mut defect = Vec::new();
    let mut pairs: Vec<(OneForm, OneForm)> = Vec::new();
    for i in 0..chart.dim() {
        for j in (i + 1)..chart.dim() {
            pairs.push((
                OneForm::basis(chart.clone(), i),
                OneForm::basis(chart.clone(), j),
            ));
        }
    }
    pairs.push((
        OneForm::new(chart.clone(), random_linear_components(&chart, &mut rng))
            .map_err(GeometryError::Field)?,
        OneForm::new(chart.clone(), random_linear_components(&chart, &mut rng))
            .map_err(GeometryError::Field)?,
    ));
    for (a, b) in &pairs {
        let lhs = data.anchor_defect(a, b, true)?;
        let rhs = data.anchor_defect_expected(a, b)?;
        defect.extend_from_slice(lhs.sub(&rhs).simplify().comps());
    }
    reports.push(ctx.check(
        "algebroid.anchor-defect",
        "sharp([a,b]) - [sharp a, sharp b] = pi(a,b)(xi - sharp(lambda))",
        &defect,
    ));

    // jacobiator with the structure's natural lambda; affine inputs keep
    // the nested brackets compact while the structure supplies all the
    // nonconstant coefficients
    let a = OneForm::new(chart.clone(), random_linear_components(&chart, &mut rng))
        .map_err(GeometryError::Field)?;
    let b = OneForm::new(chart.clone(), random_linear_components(&chart, &mut rng))
        .map_err(GeometryError::Field)?;
    let c = OneForm::new(chart.clone(), random_linear_components(&chart, &mut rng))
        .map_err(GeometryError::Field)?;
    let jac = data.jacobiator(&a, &b, &c)?;
    reports.push(ctx.check("algebroid.jacobiator", "cyclic [a,[b,c]] = 0", jac.comps()));

    Ok(reports)
}

fn contact_suite(
    structure: &Structure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    let Structure::Contact { contact, metric } = structure else {
        unreachable!("applicability checked");
    };
    let mut reports = check_contact_algebroid(contact, ctx)?;
    if let Some(g) = metric {
        let acm = contact_metric_structure(contact, g)?;
        reports.extend(almost_contact_checks(&acm, ctx)?);
    }
    Ok(reports)
}

fn lcs_suite(structure: &Structure, ctx: &ResidualContext) -> Result<Vec<CheckReport>, SuiteError> {
    let lcs = match structure {
        Structure::Lcs { lcs } => lcs,
        Structure::LcsWithMetric { lcs, .. } => lcs,
        _ => unreachable!("applicability checked"),
    };
    Ok(check_lcs_jacobi_equivalence(lcs, ctx)?)
}

fn package_of(structure: &Structure) -> Result<MetricPackage, SuiteError> {
    let data = structure.jacobi_candidate();
    let g = structure.metric().expect("applicability checked");
    Ok(build_package(data.pi(), data.xi(), g)?)
}

fn connection_suite(
    structure: &Structure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    let chart = structure.chart().clone();
    let pkg = package_of(structure)?;
    let data = pkg.jacobi_data();
    let lc = pkg.levi_civita();
    let mut rng = Rng::seeded(ctx.seed ^ 0xC2);
    let mut reports = Vec::new();

    reports.push(ctx.check(
        "connection.nabla-parallel",
        "nabla g = 0",
        &lc.metric_parallel_defect(),
    ));

    let mut iso = isometry_check(&pkg, ctx)?;
    iso.name = "connection.isometry".into();
    reports.push(iso);

    let random_form = |rng: &mut Rng| -> Result<OneForm, SuiteError> {
        Ok(OneForm::new(chart.clone(), random_components(&chart, rng))
            .map_err(GeometryError::Field)?)
    };

    let mut compat = Vec::new();
    let mut symmetry = Vec::new();
    for _ in 0..2 {
        let a = random_form(&mut rng)?;
        let b = random_form(&mut rng)?;
        let c = random_form(&mut rng)?;
        let lhs = lie_scalar(&pkg.anchor(&a)?, &lc.cometric(&b, &c));
        let rhs = lc
            .cometric(&pkg.contravariant_d(&a, &b)?, &c)
            .add(&lc.cometric(&b, &pkg.contravariant_d(&a, &c)?));
        compat.push(lhs.sub(&rhs));
        let sym = pkg
            .contravariant_d(&a, &b)?
            .sub(&pkg.contravariant_d(&b, &a)?)
            .sub(&data.lambda_bracket(&a, &b)?);
        symmetry.extend_from_slice(sym.simplify().comps());
    }
    reports.push(ctx.check(
        "connection.metric-compat",
        "sharp(a) g*(b,c) = g*(D_a b, c) + g*(b, D_a c)",
        &compat,
    ));
    reports.push(ctx.check(
        "connection.bracket-symmetry",
        "D_a b - D_b a = [a,b]",
        &symmetry,
    ));

    // transport identity on basis pairs plus one random pair
    let mut inputs = Vec::new();
    for i in 0..chart.dim() {
        for j in 0..chart.dim() {
            inputs.push((
                OneForm::basis(chart.clone(), i),
                OneForm::basis(chart.clone(), j),
            ));
        }
    }
    inputs.push((random_form(&mut rng)?, random_form(&mut rng)?));
    reports.push(check_anchor_transport(&pkg, ctx, &inputs)?);

    // bivector transport, the 2-form consequence of anchored transport:
    // D pi (a,b,c) = nabla omega (sharp a, sharp b, sharp c)
    if let Structure::LcsWithMetric { lcs, .. } = structure {
        let preconditions = crate::metric::transport_preconditions_hold(&pkg, ctx)?;
        let mut comps = Vec::new();
        for i in 0..chart.dim() {
            for j in 0..chart.dim() {
                for k in (j + 1)..chart.dim() {
                    let a = OneForm::basis(chart.clone(), i);
                    let b = OneForm::basis(chart.clone(), j);
                    let c = OneForm::basis(chart.clone(), k);
                    let lhs = pkg.d_pi(&a, &b, &c)?;
                    let rhs = lc.nabla_form2(
                        lcs.omega(),
                        &pkg.anchor(&a)?,
                        &pkg.anchor(&b)?,
                        &pkg.anchor(&c)?,
                    )?;
                    comps.push(lhs.sub(&rhs).simplify());
                }
            }
        }
        let mut report = ctx.check(
            "connection.bivector-transport",
            "D pi (a,b,c) = nabla omega (sharp a, sharp b, sharp c)",
            &comps,
        );
        if !preconditions {
            report.verdict = crate::report::Verdict::PreconditionsFailed;
        }
        reports.push(report);
    }

    Ok(reports)
}

fn compatibility_suite(
    structure: &Structure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    let chart = structure.chart().clone();
    let dim = chart.dim();
    let pkg = package_of(structure)?;
    let mut reports = Vec::new();

    let mut trilinear = Vec::new();
    let mut cross = Vec::new();
    let mut endo = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let a = OneForm::basis(chart.clone(), i);
            let b = OneForm::basis(chart.clone(), j);
            let form_defect = pkg.compat_defect_endo(&a, &b)?;
            endo.extend_from_slice(form_defect.comps());
            for k in 0..dim {
                let c = OneForm::basis(chart.clone(), k);
                let tri = pkg.compat_defect_trilinear(&a, &b, &c)?;
                cross.push(
                    tri.sub(&pkg.levi_civita().cometric(&form_defect, &c))
                        .simplify(),
                );
                trilinear.push(tri);
            }
        }
    }
    let tri_report = ctx.check(
        "compat.trilinear",
        "D pi = 1/2 (c(xi) pi(a,b) - b(xi) pi(a,c) - (J*c)(xi) g*(a,b) + (J*b)(xi) g*(a,c))",
        &trilinear,
    );
    let endo_report = ctx.check(
        "compat.endomorphism",
        "(D_a J*) b = 1/2 (pi(a,b) flat(xi) - b(xi) J*a + g*(a,b) J* flat(xi) + (J*b)(xi) a)",
        &endo,
    );
    let cross_report = ctx.check(
        "compat.cross-identity",
        "trilinear defect (a,b,c) = g*(endomorphism defect (a,b), c)",
        &cross,
    );
    let joint = if tri_report.passed() == endo_report.passed() {
        crate::report::Verdict::Pass
    } else {
        crate::report::Verdict::TheoremViolated
    };
    let joint_report = ctx.structural(
        "compat.joint-vanishing",
        "the two compatibility defects vanish together",
        joint,
        tri_report.residual.max(endo_report.residual),
    );
    reports.push(tri_report);
    reports.push(endo_report);
    reports.push(cross_report);
    reports.push(joint_report);
    Ok(reports)
}

fn kenmotsu_suite(
    structure: &Structure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, SuiteError> {
    let acm = match structure {
        Structure::AlmostContact { acm } => acm.clone(),
        Structure::Contact {
            contact,
            metric: Some(g),
        } => contact_metric_structure(contact, g)?,
        _ => unreachable!("applicability checked"),
    };
    let mut reports = check_half_kenmotsu_equivalence(&acm, ctx)?;
    reports.push(acm.check_kenmotsu(ctx, &crate::expr::Expr::one(), "kenmotsu.defect-one")?);
    Ok(reports)
}

fn lck_suite(structure: &Structure, ctx: &ResidualContext) -> Result<Vec<CheckReport>, SuiteError> {
    let Structure::LcsWithMetric { lcs, metric } = structure else {
        unreachable!("applicability checked");
    };
    Ok(lck_check(lcs, metric, ctx)?)
}

/// Numerical hygiene: every first derivative of every defining component
/// agrees with a central finite difference (step 1e-4) at the sample points.
pub fn derivative_hygiene(structure: &Structure, ctx: &ResidualContext) -> CheckReport {
    const STEP: f64 = 1e-4;
    let dim = structure.chart().dim();
    let mut per_point = vec![0.0f64; ctx.points.len()];
    let mut overall: f64 = 0.0;
    for expr in structure.component_expressions() {
        let expr = expr.simplify();
        for i in 0..dim {
            let symbolic = expr.diff(i).simplify();
            for (pi, p) in ctx.points.iter().enumerate() {
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[i] += STEP;
                lo[i] -= STEP;
                let fd = match (expr.eval(&hi), expr.eval(&lo)) {
                    (Ok(a), Ok(b)) => (a - b) / (2.0 * STEP),
                    _ => f64::INFINITY,
                };
                let sym = symbolic.eval(p).unwrap_or(f64::INFINITY);
                let dev = (fd - sym).abs();
                per_point[pi] = per_point[pi].max(dev);
                overall = overall.max(dev);
            }
        }
    }
    CheckReport {
        name: "hygiene.finite-difference".into(),
        anchor: "symbolic d/dx_i matches central differences (step 1e-4)".into(),
        seed: ctx.seed,
        points: ctx.points.len(),
        per_point,
        residual: overall,
        tol: crate::report::TOL_FINITE_DIFF,
        verdict: if overall < crate::report::TOL_FINITE_DIFF {
            crate::report::Verdict::Pass
        } else {
            crate::report::Verdict::Fail
        },
    }
}
