//! Locally conformally symplectic pairs `(omega, theta)`: the induced
//! bivector and vector field, the closure/Jacobi equivalence checks, and the
//! conformally Kaehler checks against an associated metric.

use crate::algebroid::JacobiData;
use crate::calculus::{exterior_d, exterior_d_scalar, lie_form, lie_multivector, sharp_pi};
use crate::chart::Chart;
use crate::expr::Expr;
use crate::manifold::linalg::{determinant, mat_vec, sym_inverse};
use crate::manifold::{combinations, Form, MetricField, Multivector, OneForm, VectorField};
use crate::metric::{build_package, gradient, isometry_check, LeviCivita};
use crate::report::{CheckReport, ResidualContext, Verdict};

use super::GeometryError;

/// A nondegenerate 2-form with a reference one-form, carrying the derived
/// objects: `flat(X) = -i_X omega`, its inverse, `xi = sharp(theta)` and
/// `pi(a, b) = omega(sharp a, sharp b)`. The optional potential records
/// `theta = df` for the conformal checks.
#[derive(Clone, Debug)]
pub struct LcsStructure {
    chart: Chart,
    omega: Form,
    theta: OneForm,
    potential: Option<Expr>,
    sharp_matrix: Vec<Vec<Expr>>,
    omega_det: Expr,
    xi: VectorField,
    pi: Multivector,
}

pub fn lcs_from(
    omega: &Form,
    theta: &OneForm,
    potential: Option<Expr>,
) -> Result<LcsStructure, GeometryError> {
    let chart = omega.chart().clone();
    let dim = chart.dim();
    if dim % 2 != 0 {
        return Err(GeometryError::OddDimension(dim));
    }
    if theta.chart() != &chart {
        return Err(GeometryError::Field(
            crate::manifold::FieldError::ChartMismatch,
        ));
    }
    // (flat X)_j = -X^i omega_{ij}, so the matrix is omega_{ji}
    let flat: Vec<Vec<Expr>> = (0..dim)
        .map(|j| (0..dim).map(|i| omega.component(&[j, i])).collect())
        .collect();
    let omega_det = determinant(&flat);
    if omega_det.is_zero() {
        return Err(GeometryError::DegenerateTwoForm);
    }
    let sharp = sym_inverse(&flat)?;
    let xi = VectorField::new(chart.clone(), mat_vec(&sharp, theta.comps()))
        .map_err(GeometryError::Field)?
        .simplify();
    let mut pi = Multivector::zero(chart.clone(), 2)?;
    for i in 0..dim {
        let si = VectorField::new(
            chart.clone(),
            (0..dim).map(|r| sharp[r][i].clone()).collect(),
        )
        .map_err(GeometryError::Field)?;
        for j in (i + 1)..dim {
            let sj = VectorField::new(
                chart.clone(),
                (0..dim).map(|r| sharp[r][j].clone()).collect(),
            )
            .map_err(GeometryError::Field)?;
            pi.set_component(&[i, j], omega.apply(&[&si, &sj])?.expr().clone());
        }
    }
    Ok(LcsStructure {
        chart,
        omega: omega.clone(),
        theta: theta.clone(),
        potential,
        sharp_matrix: sharp,
        omega_det,
        xi,
        pi,
    })
}

impl LcsStructure {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn omega(&self) -> &Form {
        &self.omega
    }

    pub fn theta(&self) -> &OneForm {
        &self.theta
    }

    pub fn potential(&self) -> Option<&Expr> {
        self.potential.as_ref()
    }

    pub fn xi(&self) -> &VectorField {
        &self.xi
    }

    pub fn pi(&self) -> &Multivector {
        &self.pi
    }

    pub fn omega_det(&self) -> &Expr {
        &self.omega_det
    }

    pub fn sharp_omega(&self, alpha: &OneForm) -> VectorField {
        VectorField::new(
            self.chart.clone(),
            mat_vec(&self.sharp_matrix, alpha.comps()),
        )
        .expect("dim components")
    }

    /// The induced pair with `theta` as deformation.
    pub fn jacobi_data(&self) -> JacobiData {
        JacobiData::new(self.pi.clone(), self.xi.clone())
            .expect("bivector by construction")
            .with_lambda(self.theta.clone())
            .expect("same chart")
    }

    /// `d(omega) + theta ^ omega`.
    pub fn closure_defect(&self) -> Result<Form, GeometryError> {
        Ok(exterior_d(&self.omega)?
            .add(&Form::from_oneform(&self.theta).wedge(&self.omega)?)
            .simplify())
    }

    /// `d(theta)`.
    pub fn lee_defect(&self) -> Result<Form, GeometryError> {
        Ok(exterior_d(&Form::from_oneform(&self.theta))?)
    }

    /// Matrix of the deformed anchor `sharp_{pi,xi}`.
    pub fn anchor_matrix(&self) -> Result<Vec<Vec<Expr>>, GeometryError> {
        Ok(self.jacobi_data().sharp_matrix()?)
    }
}

/// The closure/Jacobi equivalence: four residuals plus the two unconditional
/// pullback identities that tie them together, and a structural verdict that
/// the vanishing pattern matches the equivalence.
pub fn check_lcs_jacobi_equivalence(
    l: &LcsStructure,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, GeometryError> {
    let chart = l.chart.clone();
    let dim = chart.dim();
    let mut reports = Vec::new();

    let closure = ctx.check(
        "lcs.closure",
        "d(omega) + theta ^ omega = 0",
        l.closure_defect()?.components(),
    );
    let lee = ctx.check(
        "lcs.lee-closed",
        "d(theta) = 0",
        l.lee_defect()?.components(),
    );
    let data = l.jacobi_data();
    let schouten = ctx.check(
        "lcs.jacobi-schouten",
        "[pi,pi] = 2 xi ^ pi",
        data.jacobi_defect_schouten()?.components(),
    );
    let invariance = ctx.check(
        "lcs.jacobi-invariance",
        "L_xi pi = 0",
        data.jacobi_defect_invariance()?.components(),
    );

    // unconditional pullback identity, trivector form:
    // (d omega + theta ^ omega)(sharp_pi a, sharp_pi b, sharp_pi c)
    //              = (1/2 [pi,pi] - xi ^ pi)(a, b, c), unconditionally
    let closure_form = l.closure_defect()?;
    let rhs_tri = crate::calculus::schouten(&l.pi, &l.pi)?
        .scale(&Expr::rat(1, 2))
        .sub(&Multivector::from_vector(&l.xi).wedge(&l.pi)?)
        .simplify();
    let mut tri = Vec::new();
    for combo in combinations(dim, 3) {
        let forms: Vec<OneForm> = combo
            .iter()
            .map(|&i| OneForm::basis(chart.clone(), i))
            .collect();
        let vecs: Vec<VectorField> = forms
            .iter()
            .map(|a| sharp_pi(&l.pi, a))
            .collect::<Result<_, _>>()?;
        let lhs = closure_form
            .apply(&[&vecs[0], &vecs[1], &vecs[2]])?
            .expr()
            .clone();
        let rhs = rhs_tri
            .apply(&[&forms[0], &forms[1], &forms[2]])?
            .expr()
            .clone();
        tri.push(lhs.sub(&rhs).simplify());
    }
    reports.push(ctx.check(
        "lcs.lemma-trivector",
        "(d omega + theta^omega)(sharp_pi a, sharp_pi b, sharp_pi c) = (1/2 [pi,pi] - xi^pi)(a,b,c)",
        &tri,
    ));

    // unconditional pullback identity, bivector form:
    // L_xi omega (sharp_pi a, sharp_pi b) = -L_xi pi (a, b)
    let lie_omega = lie_form(&l.xi, &l.omega)?;
    let lie_pi = lie_multivector(&l.xi, &l.pi)?;
    let mut biv = Vec::new();
    for combo in combinations(dim, 2) {
        let a = OneForm::basis(chart.clone(), combo[0]);
        let b = OneForm::basis(chart.clone(), combo[1]);
        let lhs = lie_omega
            .apply(&[&sharp_pi(&l.pi, &a)?, &sharp_pi(&l.pi, &b)?])?
            .expr()
            .clone();
        let rhs = lie_pi.apply(&[&a, &b])?.expr().clone();
        biv.push(lhs.add(&rhs).simplify());
    }
    reports.push(ctx.check(
        "lcs.lemma-bivector",
        "L_xi omega (sharp_pi a, sharp_pi b) = -L_xi pi (a, b)",
        &biv,
    ));

    // the interior identity i_xi omega = -theta
    let interior = l
        .omega
        .interior(&l.xi)?
        .try_into_oneform()
        .expect("degree 1")
        .add(&l.theta)
        .simplify();
    reports.push(ctx.check(
        "lcs.reference-interior",
        "i_xi omega = -theta",
        interior.comps(),
    ));

    // omega restores pi through the deformed anchor, unconditionally
    let anchor = l.anchor_matrix()?;
    let anchor_field = |i: usize| {
        VectorField::new(
            chart.clone(),
            (0..dim).map(|r| anchor[r][i].clone()).collect(),
        )
        .expect("dim components")
    };
    let mut through = Vec::new();
    for combo in combinations(dim, 2) {
        let lhs = l
            .omega
            .apply(&[&anchor_field(combo[0]), &anchor_field(combo[1])])?
            .expr()
            .clone();
        through.push(lhs.sub(&l.pi.component(&combo)).simplify());
    }
    reports.push(ctx.check(
        "lcs.omega-anchor",
        "omega(sharp a, sharp b) = pi(a, b)",
        &through,
    ));

    // injectivity of the anchor at samples
    let det = determinant(&anchor);
    let mut min_det = f64::INFINITY;
    for p in &ctx.points {
        match det.eval(p) {
            Ok(v) => min_det = min_det.min(v.abs()),
            Err(_) => min_det = 0.0,
        }
    }
    reports.push(ctx.structural(
        "lcs.anchor-injective",
        "det(sharp_{pi,xi}) != 0 on samples",
        if min_det > 1e-9 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        min_det,
    ));

    // equivalence pattern: closure <-> schouten; given those, lee <-> invariance
    let pattern_ok = closure.passed() == schouten.passed()
        && (!closure.passed() || lee.passed() == invariance.passed());
    reports.push(ctx.structural(
        "lcs.equivalence-pattern",
        "(d omega + theta^omega = 0) <-> Jacobi; then d(theta) = 0 <-> L_xi pi = 0",
        if pattern_ok {
            Verdict::Pass
        } else {
            Verdict::TheoremViolated
        },
        0.0,
    ));

    reports.insert(0, invariance);
    reports.insert(0, schouten);
    reports.insert(0, lee);
    reports.insert(0, closure);
    Ok(reports)
}

/// Conformally Kaehler checks for `(omega, df)` against a metric `g`:
///
/// 1. association preconditions: `omega(X, Y) = g(JX, Y)` with `J` from the
///    package, `g*(J* a, J* b) = g*(a, b)`, the anchor isometry, and
///    `theta = df`;
/// 2. the compatibility defect of `(pi, xi, g)`;
/// 3. `Lambda_f = 0` on the coordinate frame;
/// 4. `nabla^f(e^f omega) = 0` for the independently built Levi-Civita
///    connection of `e^f g`, cross-checked against the conformal-change
///    formula for connections.
///
/// When the association preconditions fail, the aggregate verdict is
/// `preconditions-failed`; the individual residuals keep their own verdicts.
pub fn lck_check(
    l: &LcsStructure,
    g: &MetricField,
    ctx: &ResidualContext,
) -> Result<Vec<CheckReport>, GeometryError> {
    let chart = l.chart.clone();
    let dim = chart.dim();
    let f = l.potential.clone().ok_or(GeometryError::MissingPotential)?;
    let mut reports = Vec::new();

    let pkg = build_package(&l.pi, &l.xi, g)?;
    let lc = pkg.levi_civita();

    // theta = df
    let exact = l.theta.sub(&exterior_d_scalar(&chart, &f)).simplify();
    let exactness = ctx.check("lck.exactness", "theta = df", exact.comps());

    // hermitian association: omega(d_i, d_j) = g(J d_i, d_j) and J*-orthogonality
    let mut herm = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let mut g_j = Expr::zero();
            for a in 0..dim {
                g_j = g_j.add(&pkg.j_endo().get(a, i).mul(&g.get(a, j)));
            }
            herm.push(l.omega.component(&[i, j]).sub(&g_j).simplify());
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let ja = pkg
                .j_star()
                .apply_covector(&OneForm::basis(chart.clone(), i))?;
            let jb = pkg
                .j_star()
                .apply_covector(&OneForm::basis(chart.clone(), j))?;
            herm.push(lc.cometric(&ja, &jb).sub(&lc.inverse()[i][j]).simplify());
        }
    }
    let hermitian = ctx.check(
        "lck.hermitian",
        "omega(X, Y) = g(JX, Y) and g*(J*a, J*b) = g*(a, b)",
        &herm,
    );

    let isometry = isometry_check(&pkg, ctx)?;
    let isometry = CheckReport {
        name: "lck.isometry".into(),
        ..isometry
    };

    let preconditions_ok = exactness.passed() && hermitian.passed() && isometry.passed();

    // J o sharp = sharp o J*
    let mut commute = Vec::new();
    for i in 0..dim {
        let alpha = OneForm::basis(chart.clone(), i);
        let lhs = pkg.j_endo().apply(&pkg.anchor(&alpha)?)?;
        let rhs = pkg.anchor(&pkg.j_star().apply_covector(&alpha)?)?;
        commute.extend_from_slice(lhs.sub(&rhs).simplify().comps());
    }
    let commute_report = ctx.check(
        "lck.anchor-complex-commute",
        "J o sharp = sharp o J*",
        &commute,
    );

    // compatibility defect on basis triples
    let mut compat = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                compat.push(pkg.compat_defect_trilinear(
                    &OneForm::basis(chart.clone(), i),
                    &OneForm::basis(chart.clone(), j),
                    &OneForm::basis(chart.clone(), k),
                )?);
            }
        }
    }
    let compat_report = ctx.check(
        "lck.compatibility",
        "D pi = 1/2 (c(xi) pi(a,b) - b(xi) pi(a,c) - (J*c)(xi) g*(a,b) + (J*b)(xi) g*(a,c))",
        &compat,
    );

    // Lambda_f on the coordinate frame
    let grad = gradient(lc, &f)?;
    let mut lambda_f = Vec::new();
    for i in 0..dim {
        let x = VectorField::basis(chart.clone(), i);
        for j in 0..dim {
            let y = VectorField::basis(chart.clone(), j);
            let yf = f.diff(j).simplify();
            for k in (j + 1)..dim {
                let z = VectorField::basis(chart.clone(), k);
                let zf = f.diff(k).simplify();
                let nabla_omega = lc.nabla_form2(&l.omega, &x, &y, &z)?;
                let half = Expr::rat(1, 2);
                let term1 = yf
                    .mul(&l.omega.component(&[i, k]))
                    .sub(&zf.mul(&l.omega.component(&[i, j])));
                let term2 = g
                    .get(i, j)
                    .mul(l.omega.apply(&[&grad, &z])?.expr())
                    .sub(&g.get(i, k).mul(l.omega.apply(&[&grad, &y])?.expr()));
                let value = nabla_omega
                    .sub(&half.mul(&term1))
                    .add(&half.mul(&term2))
                    .simplify();
                lambda_f.push(value);
            }
        }
    }
    let lambda_report = ctx.check(
        "lck.lambda-f",
        "nabla omega(X,Y,Z) = 1/2 (Y(f) om(X,Z) - Z(f) om(X,Y) - g(X,Y) om(grad f, Z) + g(X,Z) om(grad f, Y))",
        &lambda_f,
    );

    // nabla^f (e^f omega) = 0 with the independent connection of e^f g
    let ef = f.exp();
    let mut gf = MetricField::zero(chart.clone(), g.signature());
    for i in 0..dim {
        for j in i..dim {
            gf.set(i, j, ef.mul(&g.get(i, j)).simplify());
        }
    }
    let lcf = LeviCivita::new(&gf)?;
    let ef_omega = l.omega.scale(&ef).simplify();
    let mut parallel = Vec::new();
    for i in 0..dim {
        let x = VectorField::basis(chart.clone(), i);
        for combo in combinations(dim, 2) {
            let y = VectorField::basis(chart.clone(), combo[0]);
            let z = VectorField::basis(chart.clone(), combo[1]);
            parallel.push(lcf.nabla_form2(&ef_omega, &x, &y, &z)?);
        }
    }
    let parallel_report = ctx.check(
        "lck.conformal-parallel",
        "nabla^f (e^f omega) = 0 for the Levi-Civita connection of e^f g",
        &parallel,
    );

    // conformal-change cross-check:
    // nabla^f_X Y = nabla_X Y + 1/2 (X(f) Y + Y(f) X - g(X,Y) grad f)
    let mut conformal = Vec::new();
    for i in 0..dim {
        let x = VectorField::basis(chart.clone(), i);
        for j in 0..dim {
            let y = VectorField::basis(chart.clone(), j);
            let direct = lcf.nabla_vector(&x, &y)?;
            let correction = y
                .scale(&f.diff(i))
                .add(&x.scale(&f.diff(j)))
                .sub(&grad.scale(&g.get(i, j)))
                .scale(&Expr::rat(1, 2));
            let reference = lc.nabla_vector(&x, &y)?.add(&correction);
            conformal.extend_from_slice(direct.sub(&reference).simplify().comps());
        }
    }
    let conformal_report = ctx.check(
        "lck.conformal-formula",
        "nabla^f_X Y = nabla_X Y + 1/2 (X(f) Y + Y(f) X - g(X,Y) grad f)",
        &conformal,
    );

    // joint vanishing of the three residuals, gated on the preconditions
    let agree = compat_report.passed() == lambda_report.passed()
        && lambda_report.passed() == parallel_report.passed();
    let verdict = if !preconditions_ok {
        Verdict::PreconditionsFailed
    } else if agree {
        Verdict::Pass
    } else {
        Verdict::TheoremViolated
    };
    let equivalence = ctx.structural(
        "lck.equivalence",
        "compatibility, Lambda_f = 0 and nabla^f(e^f omega) = 0 vanish together",
        verdict,
        compat_report
            .residual
            .max(lambda_report.residual)
            .max(parallel_report.residual),
    );

    reports.push(exactness);
    reports.push(hermitian);
    reports.push(isometry);
    reports.push(commute_report);
    reports.push(compat_report);
    reports.push(lambda_report);
    reports.push(parallel_report);
    reports.push(conformal_report);
    reports.push(equivalence);
    Ok(reports)
}


#[cfg(test)]
mod conformal_tests {
    use super::*;
    use crate::manifold::{MetricField, Signature, VectorField};
    use crate::metric::{gradient, LeviCivita};
    use crate::sample::sample_points;

    /// `nabla^f(e^f omega) = e^f Lambda_f` is a pure conformal-rescaling
    /// identity: it needs no closure, hermitian or isometry hypothesis, so it
    /// must hold even on a stretched metric where both sides are nonzero.
    #[test]
    fn conformal_rescaling_identity_two_pipelines() {
        let chart = Chart::new(vec!["x", "y", "z", "w"]).unwrap();
        let mut omega = Form::zero(chart.clone(), 2).unwrap();
        let decay = Expr::coord(0).neg().exp();
        omega.set_component(&[0, 1], decay.clone());
        omega.set_component(&[2, 3], decay.clone());
        let f = Expr::coord(0);
        let ef = f.exp();

        // coordinate-dependent stretch: the rescaled metric e^f g is no
        // longer constant, so nabla^f(e^f omega) is honestly nonzero
        let mut g = MetricField::zero(chart.clone(), Signature::Riemannian);
        g.set(0, 0, decay.clone());
        g.set(
            1,
            1,
            Expr::one().add(&Expr::coord(2).powi(2)).mul(&decay),
        );
        g.set(2, 2, decay.clone());
        g.set(3, 3, decay.clone());

        let lc = LeviCivita::new(&g).unwrap();
        let grad = gradient(&lc, &f).unwrap();

        // pipeline 1: Lambda_f from the base connection
        // pipeline 2: nabla^f(e^f omega) from the rescaled metric's own
        // Christoffel symbols
        let mut gf = MetricField::zero(chart.clone(), Signature::Riemannian);
        for i in 0..4 {
            for j in i..4 {
                gf.set(i, j, ef.mul(&g.get(i, j)).simplify());
            }
        }
        let lcf = LeviCivita::new(&gf).unwrap();
        let ef_omega = omega.scale(&ef).simplify();

        let pts = sample_points(&chart, 15, 0).unwrap();
        let mut nonzero_seen = false;
        for i in 0..4 {
            let x = VectorField::basis(chart.clone(), i);
            for j in 0..4 {
                let y = VectorField::basis(chart.clone(), j);
                for k in (j + 1)..4 {
                    let z = VectorField::basis(chart.clone(), k);
                    let nabla_omega = lc.nabla_form2(&omega, &x, &y, &z).unwrap();
                    let half = Expr::rat(1, 2);
                    let term1 = f
                        .diff(j)
                        .mul(&omega.component(&[i, k]))
                        .sub(&f.diff(k).mul(&omega.component(&[i, j])));
                    let term2 = g
                        .get(i, j)
                        .mul(omega.apply(&[&grad, &z]).unwrap().expr())
                        .sub(&g.get(i, k).mul(omega.apply(&[&grad, &y]).unwrap().expr()));
                    let lambda_f = nabla_omega
                        .sub(&half.mul(&term1))
                        .add(&half.mul(&term2))
                        .simplify();
                    let rescaled = lcf.nabla_form2(&ef_omega, &x, &y, &z).unwrap();
                    let defect = rescaled.sub(&ef.mul(&lambda_f)).simplify();
                    for p in &pts {
                        assert!(
                            defect.eval(p).unwrap().abs() < 1e-9,
                            "rescaling identity broken at ({i},{j},{k})"
                        );
                        if lambda_f.eval(p).unwrap().abs() > 1e-3 {
                            nonzero_seen = true;
                        }
                    }
                }
            }
        }
        assert!(nonzero_seen, "the test should exercise nonzero values");
    }
}
