//! Metric machinery: covariant Levi-Civita connection, the package of
//! objects a metric attaches to a bivector-vector pair (cometric, the
//! endomorphisms `J` and `J*`, the canonical one-form `lambda`), the
//! contravariant derivative `D` characterized by a six-term Koszul-type
//! formula, and the compatibility tensors built from it.
//!
//! `D` is assembled once on the coordinate cobasis and extended by
//! function-linearity in its first slot and the Leibniz rule in its second,
//! which keeps repeated checks cheap.

use thiserror::Error;

use crate::algebroid::{AlgebroidError, JacobiData};
use crate::calculus::lie_scalar;
use crate::chart::Chart;
use crate::expr::Expr;
use crate::manifold::linalg::{mat_vec, sym_inverse};
use crate::manifold::{
    pair, EndoField, FieldError, Form, MetricField, Multivector, OneForm, VectorField,
};
use crate::report::{CheckReport, ResidualContext, Verdict};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
}

/// Levi-Civita connection data of a metric: inverse metric and Christoffel
/// symbols, with covariant derivatives of vectors, endomorphism fields and
/// 2-forms.
#[derive(Clone, Debug)]
pub struct LeviCivita {
    chart: Chart,
    g: MetricField,
    g_inv: Vec<Vec<Expr>>,
    /// `gamma[k][i][j]` is the symbol with upper index `k`.
    gamma: Vec<Vec<Vec<Expr>>>,
}

impl LeviCivita {
    pub fn new(g: &MetricField) -> Result<LeviCivita, MetricError> {
        let chart = g.chart().clone();
        let dim = chart.dim();
        let g_inv = sym_inverse(&g.matrix())?;
        let mut gamma = vec![vec![vec![Expr::zero(); dim]; dim]; dim];
        for k in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    let mut acc = Expr::zero();
                    for m in 0..dim {
                        let term = g
                            .get(m, j)
                            .diff(i)
                            .add(&g.get(m, i).diff(j))
                            .sub(&g.get(i, j).diff(m));
                        acc = acc.add(&g_inv[k][m].mul(&term));
                    }
                    let sym = Expr::rat(1, 2).mul(&acc).simplify();
                    gamma[k][i][j] = sym.clone();
                    gamma[k][j][i] = sym;
                }
            }
        }
        Ok(LeviCivita {
            chart,
            g: g.clone(),
            g_inv,
            gamma,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn metric(&self) -> &MetricField {
        &self.g
    }

    pub fn inverse(&self) -> &Vec<Vec<Expr>> {
        &self.g_inv
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &Expr {
        &self.gamma[k][i][j]
    }

    /// Index raising.
    pub fn sharp(&self, alpha: &OneForm) -> Result<VectorField, MetricError> {
        if alpha.chart() != &self.chart {
            return Err(FieldError::ChartMismatch.into());
        }
        let comps = mat_vec(&self.g_inv, alpha.comps());
        VectorField::new(self.chart.clone(), comps).map_err(MetricError::Field)
    }

    /// Index lowering.
    pub fn flat(&self, x: &VectorField) -> Result<OneForm, MetricError> {
        if x.chart() != &self.chart {
            return Err(FieldError::ChartMismatch.into());
        }
        let dim = self.chart.dim();
        let comps = (0..dim)
            .map(|i| {
                let mut acc = Expr::zero();
                for j in 0..dim {
                    acc = acc.add(&self.g.get(i, j).mul(x.comp(j)));
                }
                acc.simplify()
            })
            .collect();
        OneForm::new(self.chart.clone(), comps).map_err(MetricError::Field)
    }

    /// Cometric pairing `g*(a, b) = g(sharp a, sharp b)`.
    pub fn cometric(&self, alpha: &OneForm, beta: &OneForm) -> Expr {
        let dim = self.chart.dim();
        let mut acc = Expr::zero();
        for i in 0..dim {
            for j in 0..dim {
                acc = acc.add(&self.g_inv[i][j].mul(alpha.comp(i)).mul(beta.comp(j)));
            }
        }
        acc.simplify()
    }

    /// Covariant derivative of a vector field.
    pub fn nabla_vector(
        &self,
        x: &VectorField,
        y: &VectorField,
    ) -> Result<VectorField, MetricError> {
        if x.chart() != &self.chart || y.chart() != &self.chart {
            return Err(FieldError::ChartMismatch.into());
        }
        let dim = self.chart.dim();
        let comps = (0..dim)
            .map(|k| {
                let mut acc = lie_scalar(x, y.comp(k));
                for i in 0..dim {
                    for j in 0..dim {
                        acc = acc.add(&self.gamma[k][i][j].mul(x.comp(i)).mul(y.comp(j)));
                    }
                }
                acc.simplify()
            })
            .collect();
        VectorField::new(self.chart.clone(), comps).map_err(MetricError::Field)
    }

    /// `(nabla_X Phi)(Y) = nabla_X(Phi Y) - Phi(nabla_X Y)`.
    pub fn nabla_endo(
        &self,
        x: &VectorField,
        phi: &EndoField,
        y: &VectorField,
    ) -> Result<VectorField, MetricError> {
        let phi_y = phi.apply(y)?;
        let first = self.nabla_vector(x, &phi_y)?;
        let second = phi.apply(&self.nabla_vector(x, y)?)?;
        Ok(first.sub(&second).simplify())
    }

    /// `nabla omega (X, Y, Z) = X(omega(Y,Z)) - omega(nabla_X Y, Z) - omega(Y, nabla_X Z)`.
    pub fn nabla_form2(
        &self,
        omega: &Form,
        x: &VectorField,
        y: &VectorField,
        z: &VectorField,
    ) -> Result<Expr, MetricError> {
        let direct = lie_scalar(x, omega.apply(&[y, z])?.expr());
        let a = omega.apply(&[&self.nabla_vector(x, y)?, z])?;
        let b = omega.apply(&[y, &self.nabla_vector(x, z)?])?;
        Ok(direct.sub(a.expr()).sub(b.expr()).simplify())
    }

    /// Residual components of `nabla g = 0` over the coordinate frame; a
    /// self-test of the Christoffel symbols.
    pub fn metric_parallel_defect(&self) -> Vec<Expr> {
        let dim = self.chart.dim();
        let mut out = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    // d_i g_{jk} - Gamma^l_{ij} g_{lk} - Gamma^l_{ik} g_{jl}
                    let mut acc = self.g.get(j, k).diff(i);
                    for l in 0..dim {
                        acc = acc.sub(&self.gamma[l][i][j].mul(&self.g.get(l, k)));
                        acc = acc.sub(&self.gamma[l][i][k].mul(&self.g.get(j, l)));
                    }
                    out.push(acc.simplify());
                }
            }
        }
        out
    }
}

/// Gradient `sharp_g(df)`.
pub fn gradient(lc: &LeviCivita, f: &Expr) -> Result<VectorField, MetricError> {
    let chart = lc.chart().clone();
    let df = crate::calculus::exterior_d_scalar(&chart, f);
    lc.sharp(&df)
}

/// Everything a metric induces on a `(pi, xi)` pair.
///
/// Invariants checked by `build_package` tests:
/// - `g_inv * g = id`
/// - `J = sharp_g o J* o flat_g`
/// - `lambda = g(xi,xi) flat_g(xi) - flat_g(J xi)`
#[derive(Clone, Debug)]
pub struct MetricPackage {
    lc: LeviCivita,
    pi: Multivector,
    xi: VectorField,
    /// `J` on vectors, defined by `g(J sharp_g a, sharp_g b) = pi(a, b)`.
    j_endo: EndoField,
    /// `J*` on covectors, defined by `g*(J* a, b) = pi(a, b)`.
    j_star: EndoField,
    lambda: OneForm,
    /// Anchor matrix: column `i` is `sharp(dx^i)`.
    anchor: Vec<Vec<Expr>>,
    /// Basis brackets `[dx^i, dx^j]` for the lambda bracket of `lambda`.
    basis_brackets: Vec<Vec<OneForm>>,
    /// `D_{dx^i} dx^j` table.
    d_table: Vec<Vec<OneForm>>,
}

impl MetricPackage {
    pub fn chart(&self) -> &Chart {
        self.lc.chart()
    }

    pub fn levi_civita(&self) -> &LeviCivita {
        &self.lc
    }

    pub fn metric(&self) -> &MetricField {
        self.lc.metric()
    }

    pub fn pi(&self) -> &Multivector {
        &self.pi
    }

    pub fn xi(&self) -> &VectorField {
        &self.xi
    }

    pub fn j_endo(&self) -> &EndoField {
        &self.j_endo
    }

    pub fn j_star(&self) -> &EndoField {
        &self.j_star
    }

    pub fn lambda(&self) -> &OneForm {
        &self.lambda
    }

    /// The pair as algebroid data carrying the metric's lambda.
    pub fn jacobi_data(&self) -> JacobiData {
        JacobiData::new(self.pi.clone(), self.xi.clone())
            .expect("validated at build")
            .with_lambda(self.lambda.clone())
            .expect("same chart")
    }

    /// Deformed anchor `sharp(a) = sharp_pi(a) + a(xi) xi`.
    pub fn anchor(&self, alpha: &OneForm) -> Result<VectorField, MetricError> {
        let comps = mat_vec(&self.anchor, alpha.comps());
        VectorField::new(self.chart().clone(), comps).map_err(MetricError::Field)
    }

    pub fn anchor_matrix(&self) -> &Vec<Vec<Expr>> {
        &self.anchor
    }

    /// `[dx^i, dx^j]` for the metric's lambda bracket.
    pub fn basis_bracket(&self, i: usize, j: usize) -> &OneForm {
        &self.basis_brackets[i][j]
    }

    /// `D_{dx^i} dx^j`.
    pub fn d_basis(&self, i: usize, j: usize) -> &OneForm {
        &self.d_table[i][j]
    }

    /// `pi(alpha, beta)` as an expression.
    pub fn pi_pairing(&self, alpha: &OneForm, beta: &OneForm) -> Result<Expr, MetricError> {
        Ok(crate::calculus::bivector_pairing(&self.pi, alpha, beta)?)
    }

    /// The contravariant derivative `D_alpha beta`, the unique derivative
    /// compatible with the cometric and symmetric for the metric's lambda
    /// bracket; assembled from the precomputed cobasis table using
    /// function-linearity in `alpha` and the Leibniz rule in `beta`.
    pub fn contravariant_d(&self, alpha: &OneForm, beta: &OneForm) -> Result<OneForm, MetricError> {
        let chart = self.chart().clone();
        let dim = chart.dim();
        let mut acc = OneForm::zero(chart.clone());
        for i in 0..dim {
            let ai = alpha.comp(i);
            if ai.is_zero() {
                continue;
            }
            let anchor_i = VectorField::new(
                chart.clone(),
                (0..dim).map(|r| self.anchor[r][i].clone()).collect(),
            )
            .map_err(MetricError::Field)?;
            let mut inner = OneForm::zero(chart.clone());
            for j in 0..dim {
                let bj = beta.comp(j);
                if !bj.is_zero() {
                    inner = inner.add(&self.d_table[i][j].scale(bj));
                }
                inner =
                    inner.add(&OneForm::basis(chart.clone(), j).scale(&lie_scalar(&anchor_i, bj)));
            }
            acc = acc.add(&inner.scale(ai));
        }
        Ok(acc.simplify())
    }

    /// `D pi (a, b, c) = sharp(a) pi(b,c) - pi(D_a b, c) - pi(b, D_a c)`,
    /// the derivation extension of `D` to the bivector.
    pub fn d_pi(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
        gamma: &OneForm,
    ) -> Result<Expr, MetricError> {
        let direct = lie_scalar(&self.anchor(alpha)?, &self.pi_pairing(beta, gamma)?);
        let a = self.pi_pairing(&self.contravariant_d(alpha, beta)?, gamma)?;
        let b = self.pi_pairing(beta, &self.contravariant_d(alpha, gamma)?)?;
        Ok(direct.sub(&a).sub(&b).simplify())
    }

    /// `(D_alpha J*) beta = D_alpha(J* beta) - J*(D_alpha beta)`.
    pub fn d_j_star(&self, alpha: &OneForm, beta: &OneForm) -> Result<OneForm, MetricError> {
        let jb = self.j_star.apply_covector(beta)?;
        let first = self.contravariant_d(alpha, &jb)?;
        let second = self
            .j_star
            .apply_covector(&self.contravariant_d(alpha, beta)?)?;
        Ok(first.sub(&second).simplify())
    }

    /// Trilinear compatibility defect:
    /// `D pi(a,b,c) - 1/2 (c(xi) pi(a,b) - b(xi) pi(a,c) - (J*c)(xi) g*(a,b) + (J*b)(xi) g*(a,c))`.
    pub fn compat_defect_trilinear(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
        gamma: &OneForm,
    ) -> Result<Expr, MetricError> {
        let dpi = self.d_pi(alpha, beta, gamma)?;
        let b_xi = pair(beta, &self.xi)?.expr().clone();
        let c_xi = pair(gamma, &self.xi)?.expr().clone();
        let jb_xi = pair(&self.j_star.apply_covector(beta)?, &self.xi)?
            .expr()
            .clone();
        let jc_xi = pair(&self.j_star.apply_covector(gamma)?, &self.xi)?
            .expr()
            .clone();
        let rhs = c_xi
            .mul(&self.pi_pairing(alpha, beta)?)
            .sub(&b_xi.mul(&self.pi_pairing(alpha, gamma)?))
            .sub(&jc_xi.mul(&self.lc.cometric(alpha, beta)))
            .add(&jb_xi.mul(&self.lc.cometric(alpha, gamma)));
        Ok(dpi.sub(&Expr::rat(1, 2).mul(&rhs)).simplify())
    }

    /// Endomorphism-form compatibility defect:
    /// `(D_a J*) b - 1/2 (pi(a,b) flat(xi) - b(xi) J*a + g*(a,b) J* flat(xi) + (J*b)(xi) a)`.
    pub fn compat_defect_endo(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
    ) -> Result<OneForm, MetricError> {
        let dj = self.d_j_star(alpha, beta)?;
        let flat_xi = self.lc.flat(&self.xi)?;
        let b_xi = pair(beta, &self.xi)?.expr().clone();
        let jb_xi = pair(&self.j_star.apply_covector(beta)?, &self.xi)?
            .expr()
            .clone();
        let rhs = flat_xi
            .scale(&self.pi_pairing(alpha, beta)?)
            .sub(&self.j_star.apply_covector(alpha)?.scale(&b_xi))
            .add(
                &self
                    .j_star
                    .apply_covector(&flat_xi)?
                    .scale(&self.lc.cometric(alpha, beta)),
            )
            .add(&alpha.scale(&jb_xi));
        Ok(dj.sub(&rhs.scale(&Expr::rat(1, 2))).simplify())
    }
}

/// Build the full metric package for `(pi, xi, g)`:
/// `J` and `J*` from the pairing identities, `lambda` from
/// `g(xi,xi) flat(xi) - flat(J xi)`, and the `D` table from the six-term
/// formula `2 g*(D_a b, c) = sharp(a) g*(b,c) + sharp(b) g*(a,c) - sharp(c) g*(a,b)
/// - g*([b,c], a) - g*([a,c], b) + g*([a,b], c)` solved through the metric.
pub fn build_package(
    pi: &Multivector,
    xi: &VectorField,
    g: &MetricField,
) -> Result<MetricPackage, MetricError> {
    let chart = g.chart().clone();
    if pi.chart() != &chart || xi.chart() != &chart {
        return Err(FieldError::ChartMismatch.into());
    }
    let data = JacobiData::new(pi.clone(), xi.clone())?;
    let lc = LeviCivita::new(g)?;
    let dim = chart.dim();

    // J^m_d = sum_c g_{dc} pi^{cm};  (J*)_{a c} = sum_b pi^{cb} g_{ba}
    let mut j_endo = EndoField::zero(chart.clone());
    let mut j_star = EndoField::zero(chart.clone());
    for m in 0..dim {
        for d in 0..dim {
            let mut acc = Expr::zero();
            for c in 0..dim {
                acc = acc.add(&g.get(d, c).mul(&pi.component(&[c, m])));
            }
            j_endo.set(m, d, acc.simplify());
        }
    }
    for a in 0..dim {
        for c in 0..dim {
            let mut acc = Expr::zero();
            for b in 0..dim {
                acc = acc.add(&pi.component(&[c, b]).mul(&g.get(b, a)));
            }
            j_star.set(a, c, acc.simplify());
        }
    }

    let g_xi_xi = g.apply(xi, xi)?.expr().clone();
    let flat_xi = lc.flat(xi)?;
    let flat_j_xi = lc.flat(&j_endo.apply(xi)?)?;
    let lambda = flat_xi.scale(&g_xi_xi).sub(&flat_j_xi).simplify();

    let with_lambda = data.with_lambda(lambda.clone())?;
    let anchor = with_lambda.sharp_matrix()?;

    // basis brackets for the metric's lambda
    let mut basis_brackets = vec![vec![OneForm::zero(chart.clone()); dim]; dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let b = with_lambda.lambda_bracket(
                &OneForm::basis(chart.clone(), i),
                &OneForm::basis(chart.clone(), j),
            )?;
            basis_brackets[i][j] = b.clone();
            basis_brackets[j][i] = b.neg();
        }
    }

    // cobasis anchor images and cometric entries
    let anchor_basis: Vec<VectorField> = (0..dim)
        .map(|i| {
            VectorField::new(
                chart.clone(),
                (0..dim).map(|r| anchor[r][i].clone()).collect(),
            )
            .expect("dim components")
        })
        .collect();
    let co = |i: usize, j: usize| lc.inverse()[i][j].clone();

    // six-term formula on the cobasis, then lower through g
    let mut d_table = vec![vec![OneForm::zero(chart.clone()); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut rhs = Vec::with_capacity(dim);
            for k in 0..dim {
                let mut acc = lie_scalar(&anchor_basis[i], &co(j, k));
                acc = acc.add(&lie_scalar(&anchor_basis[j], &co(i, k)));
                acc = acc.sub(&lie_scalar(&anchor_basis[k], &co(i, j)));
                // - g*([b, c], a) with b = dx^j, c = dx^k, a = dx^i
                acc = acc.sub(&cometric_row(&lc, &basis_brackets[j][k], i));
                acc = acc.sub(&cometric_row(&lc, &basis_brackets[i][k], j));
                acc = acc.add(&cometric_row(&lc, &basis_brackets[i][j], k));
                rhs.push(acc.simplify());
            }
            let comps: Vec<Expr> = (0..dim)
                .map(|l| {
                    let mut acc = Expr::zero();
                    for k in 0..dim {
                        acc = acc.add(&g.get(l, k).mul(&rhs[k]));
                    }
                    Expr::rat(1, 2).mul(&acc).simplify()
                })
                .collect();
            d_table[i][j] = OneForm::new(chart.clone(), comps).map_err(MetricError::Field)?;
        }
    }

    Ok(MetricPackage {
        lc,
        pi: pi.clone(),
        xi: xi.clone(),
        j_endo,
        j_star,
        lambda,
        anchor,
        basis_brackets,
        d_table,
    })
}

/// `g*(mu, dx^k)`.
fn cometric_row(lc: &LeviCivita, mu: &OneForm, k: usize) -> Expr {
    let dim = lc.chart().dim();
    let mut acc = Expr::zero();
    for i in 0..dim {
        acc = acc.add(&lc.inverse()[i][k].mul(mu.comp(i)));
    }
    acc
}

/// Isometry residual of the deformed anchor:
/// `g(sharp a, sharp b) - g*(a, b)` over the covector basis.
pub fn isometry_check(
    pkg: &MetricPackage,
    ctx: &ResidualContext,
) -> Result<CheckReport, MetricError> {
    let chart = pkg.chart().clone();
    let dim = chart.dim();
    let mut comps = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let a = pkg.anchor(&OneForm::basis(chart.clone(), i))?;
            let b = pkg.anchor(&OneForm::basis(chart.clone(), j))?;
            let lhs = pkg.metric().apply(&a, &b)?.expr().clone();
            comps.push(lhs.sub(&pkg.lc.inverse()[i][j]).simplify());
        }
    }
    Ok(ctx.check("isometry", "g(sharp a, sharp b) = g*(a, b)", &comps))
}

/// Transport identity `sharp(D_a b) = nabla_{sharp a} sharp b`, valid when
/// the bracket anchors correctly and the anchor is an isometry. The verdict
/// is `preconditions-failed` when those assumptions do not hold on the
/// structure, but the residual is always recorded.
pub fn check_anchor_transport(
    pkg: &MetricPackage,
    ctx: &ResidualContext,
    inputs: &[(OneForm, OneForm)],
) -> Result<CheckReport, MetricError> {
    let preconditions = transport_preconditions_hold(pkg, ctx)?;
    let mut comps = Vec::new();
    for (alpha, beta) in inputs {
        let lhs = pkg.anchor(&pkg.contravariant_d(alpha, beta)?)?;
        let rhs = pkg
            .lc
            .nabla_vector(&pkg.anchor(alpha)?, &pkg.anchor(beta)?)?;
        comps.extend_from_slice(lhs.sub(&rhs).simplify().comps());
    }
    let mut report = ctx.check(
        "connection.anchor-transport",
        "sharp(D_a b) = nabla_{sharp a} sharp b",
        &comps,
    );
    if !preconditions {
        report.verdict = Verdict::PreconditionsFailed;
    }
    Ok(report)
}

/// Shared precondition for the transport identities: the anchored bracket
/// defect vanishes for the metric's lambda and the anchor is an isometry.
pub fn transport_preconditions_hold(
    pkg: &MetricPackage,
    ctx: &ResidualContext,
) -> Result<bool, MetricError> {
    let iso = isometry_check(pkg, ctx)?;
    if iso.verdict != Verdict::Pass {
        return Ok(false);
    }
    let data = pkg.jacobi_data().force_verified();
    let chart = pkg.chart().clone();
    let mut comps = Vec::new();
    for i in 0..chart.dim() {
        for j in (i + 1)..chart.dim() {
            let defect = data.anchor_defect(
                &OneForm::basis(chart.clone(), i),
                &OneForm::basis(chart.clone(), j),
                true,
            )?;
            comps.extend_from_slice(defect.comps());
        }
    }
    let (_, overall) = ctx.max_residual(&comps);
    Ok(overall < ctx.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Signature;
    use crate::report::TOL_IDENTITY;
    use crate::sample::{random_components, sample_points, Rng};

    fn ctx(chart: &Chart, seed: u64) -> ResidualContext {
        ResidualContext::new(sample_points(chart, 20, seed).unwrap(), seed, TOL_IDENTITY)
    }

    fn max_abs(ctx: &ResidualContext, comps: &[Expr]) -> f64 {
        ctx.max_residual(comps).1
    }

    /// Warped metric dt^2 + e^t (dx^2 + dy^2).
    fn warped(chart: &Chart) -> MetricField {
        let mut g = MetricField::zero(chart.clone(), Signature::Riemannian);
        g.set(0, 0, Expr::one());
        g.set(1, 1, Expr::coord(0).exp());
        g.set(2, 2, Expr::coord(0).exp());
        g
    }

    #[test]
    fn euclidean_connection_is_flat() {
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let lc = LeviCivita::new(&MetricField::euclidean(chart.clone())).unwrap();
        let n = lc
            .nabla_vector(
                &VectorField::basis(chart.clone(), 0),
                &VectorField::basis(chart.clone(), 1),
            )
            .unwrap();
        assert!(n.is_zero());
        assert_eq!(
            lc.sharp(&OneForm::basis(chart.clone(), 0)).unwrap().comps(),
            VectorField::basis(chart, 0).comps()
        );
    }

    #[test]
    fn warped_christoffel_hand_value() {
        // g = dt^2 + e^t(dx^2 + dy^2): nabla_{d_x} d_x = -(1/2) e^t d_t
        let chart = Chart::new(vec!["t", "x", "y"]).unwrap();
        let lc = LeviCivita::new(&warped(&chart)).unwrap();
        let n = lc
            .nabla_vector(
                &VectorField::basis(chart.clone(), 1),
                &VectorField::basis(chart.clone(), 1),
            )
            .unwrap();
        let expect = Expr::rat(-1, 2).mul(&Expr::coord(0).exp()).simplify();
        assert_eq!(n.comp(0).clone().simplify(), expect);
        assert!(n.comp(1).is_zero());
        assert!(n.comp(2).is_zero());
    }

    #[test]
    fn metric_is_parallel() {
        let chart = Chart::new(vec!["t", "x", "y"]).unwrap();
        let lc = LeviCivita::new(&warped(&chart)).unwrap();
        let context = ctx(&chart, 0);
        assert!(max_abs(&context, &lc.metric_parallel_defect()) < 1e-9);
    }

    #[test]
    fn torsion_free() {
        let chart = Chart::new(vec!["t", "x", "y"]).unwrap();
        let lc = LeviCivita::new(&warped(&chart)).unwrap();
        let mut rng = Rng::seeded(3);
        let context = ctx(&chart, 1);
        let x = VectorField::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
        let y = VectorField::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
        let lhs = lc
            .nabla_vector(&x, &y)
            .unwrap()
            .sub(&lc.nabla_vector(&y, &x).unwrap());
        let rhs = crate::calculus::lie_vector(&x, &y).unwrap();
        assert!(max_abs(&context, lhs.sub(&rhs).comps()) < 1e-9);
    }

    #[test]
    fn diagonal_metric_musical_maps() {
        // g = dt^2 + e^t(dx^2+dy^2): sharp(dx) = e^{-t} d_x
        let chart = Chart::new(vec!["t", "x", "y"]).unwrap();
        let lc = LeviCivita::new(&warped(&chart)).unwrap();
        let s = lc.sharp(&OneForm::basis(chart.clone(), 1)).unwrap();
        assert!(s.comp(0).is_zero());
        // 1/e^t and e^{-t} are the same function; compare pointwise
        let diff = s.comp(1).sub(&Expr::coord(0).neg().exp());
        for k in 0..10 {
            let p = [0.2 * k as f64 - 1.0, 0.0, 0.0];
            assert!(diff.eval(&p).unwrap().abs() < 1e-12);
        }
        // and flat o sharp = id on the basis
        let back = lc.flat(&s).unwrap();
        let context = ctx(&chart, 2);
        let mut defect = back.clone();
        defect = defect.sub(&OneForm::basis(chart.clone(), 1));
        assert!(max_abs(&context, defect.comps()) < 1e-12);
    }

    #[test]
    fn cometric_agrees_with_sharp_pairing() {
        let chart = Chart::new(vec!["t", "x", "y"]).unwrap();
        let lc = LeviCivita::new(&warped(&chart)).unwrap();
        let context = ctx(&chart, 4);
        let mut rng = Rng::seeded(9);
        for _ in 0..5 {
            let a = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let b = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let lhs = lc.cometric(&a, &b);
            let rhs = lc
                .metric()
                .apply(&lc.sharp(&a).unwrap(), &lc.sharp(&b).unwrap())
                .unwrap()
                .expr()
                .clone();
            assert!(max_abs(&context, &[lhs.sub(&rhs)]) < 1e-9);
        }
    }

    /// Flat Poisson package on R^2.
    fn flat_package() -> (Chart, MetricPackage) {
        let chart = Chart::new(vec!["x", "y"]).unwrap();
        let mut pi = Multivector::zero(chart.clone(), 2).unwrap();
        pi.set_component(&[0, 1], Expr::one());
        let pkg = build_package(
            &pi,
            &VectorField::zero(chart.clone()),
            &MetricField::euclidean(chart.clone()),
        )
        .unwrap();
        (chart, pkg)
    }

    #[test]
    fn zero_xi_gives_zero_lambda() {
        let (_, pkg) = flat_package();
        assert!(pkg.lambda().is_zero());
    }

    #[test]
    fn inverse_metric_times_metric_is_identity() {
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let mut g = MetricField::euclidean(chart.clone());
        g.set(0, 0, Expr::one().add(&Expr::coord(1).powi(2)));
        g.set(0, 2, Expr::coord(1).neg());
        let lc = LeviCivita::new(&g).unwrap();
        let product = crate::manifold::linalg::mat_mul(lc.inverse(), &g.matrix());
        let context = ctx(&chart, 12);
        let mut residual = Vec::new();
        for (i, row) in product.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let id = if i == j { Expr::one() } else { Expr::zero() };
                residual.push(e.sub(&id));
            }
        }
        assert!(max_abs(&context, &residual) < 1e-9);
    }

    #[test]
    fn flat_poisson_d_vanishes_on_basis() {
        let (chart, pkg) = flat_package();
        let d = pkg
            .contravariant_d(&OneForm::basis(chart.clone(), 0), &OneForm::basis(chart, 0))
            .unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn j_factorization_invariant() {
        // J = sharp_g o J* o flat_g as matrices
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let a = VectorField::new(
            chart.clone(),
            vec![Expr::one(), Expr::zero(), Expr::coord(1)],
        )
        .unwrap();
        let pi = Multivector::from_vector(&a)
            .wedge(&Multivector::from_vector(&VectorField::basis(
                chart.clone(),
                1,
            )))
            .unwrap();
        let mut g = MetricField::euclidean(chart.clone());
        g.set(0, 0, Expr::one().add(&Expr::coord(1).powi(2)));
        g.set(0, 2, Expr::coord(1).neg());
        let pkg = build_package(&pi, &VectorField::basis(chart.clone(), 2), &g).unwrap();
        let context = ctx(&chart, 5);
        // composite = g_inv . J*mat . g
        let composite = crate::manifold::linalg::mat_mul(
            &crate::manifold::linalg::mat_mul(pkg.lc.inverse(), &pkg.j_star().matrix()),
            &g.matrix(),
        );
        let mut residual = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                residual.push(composite[i][j].sub(&pkg.j_endo().get(i, j)));
            }
        }
        assert!(max_abs(&context, &residual) < 1e-9);
    }

    #[test]
    fn d_defining_properties_hold_for_random_inputs() {
        // metric compatibility and bracket symmetry on a curved package
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let a = VectorField::new(
            chart.clone(),
            vec![Expr::one(), Expr::zero(), Expr::coord(1)],
        )
        .unwrap();
        let pi = Multivector::from_vector(&a)
            .wedge(&Multivector::from_vector(&VectorField::basis(
                chart.clone(),
                1,
            )))
            .unwrap();
        let mut g = MetricField::euclidean(chart.clone());
        g.set(0, 0, Expr::one().add(&Expr::coord(1).powi(2)));
        g.set(0, 2, Expr::coord(1).neg());
        let pkg = build_package(&pi, &VectorField::basis(chart.clone(), 2), &g).unwrap();
        let context = ctx(&chart, 6);
        let data = pkg.jacobi_data();
        let mut rng = Rng::seeded(15);
        for _ in 0..3 {
            let alpha = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let beta = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let gamma = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            // sharp(a) g*(b,c) = g*(D_a b, c) + g*(b, D_a c)
            let lhs = lie_scalar(
                &pkg.anchor(&alpha).unwrap(),
                &pkg.lc.cometric(&beta, &gamma),
            );
            let rhs = pkg
                .lc
                .cometric(&pkg.contravariant_d(&alpha, &beta).unwrap(), &gamma)
                .add(
                    &pkg.lc
                        .cometric(&beta, &pkg.contravariant_d(&alpha, &gamma).unwrap()),
                );
            assert!(
                max_abs(&context, &[lhs.sub(&rhs)]) < 1e-9,
                "metric compatibility"
            );
            // D_a b - D_b a = [a, b]
            let sym = pkg
                .contravariant_d(&alpha, &beta)
                .unwrap()
                .sub(&pkg.contravariant_d(&beta, &alpha).unwrap());
            let bracket = data.lambda_bracket(&alpha, &beta).unwrap();
            assert!(
                max_abs(&context, sym.sub(&bracket).comps()) < 1e-9,
                "bracket symmetry"
            );
        }
    }

    #[test]
    fn compat_defects_agree_through_cometric() {
        // defect2(a,b,c) = g*(defect_form(a,b), c) identically
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let a = VectorField::new(
            chart.clone(),
            vec![Expr::one(), Expr::zero(), Expr::coord(1)],
        )
        .unwrap();
        let pi = Multivector::from_vector(&a)
            .wedge(&Multivector::from_vector(&VectorField::basis(
                chart.clone(),
                1,
            )))
            .unwrap();
        let mut g = MetricField::euclidean(chart.clone());
        g.set(0, 0, Expr::one().add(&Expr::coord(1).powi(2)));
        g.set(0, 2, Expr::coord(1).neg());
        let pkg = build_package(&pi, &VectorField::basis(chart.clone(), 2), &g).unwrap();
        let context = ctx(&chart, 8);
        for i in 0..3 {
            for j in 0..3 {
                let alpha = OneForm::basis(chart.clone(), i);
                let beta = OneForm::basis(chart.clone(), j);
                let form = pkg.compat_defect_endo(&alpha, &beta).unwrap();
                for k in 0..3 {
                    let gamma = OneForm::basis(chart.clone(), k);
                    let tri = pkg.compat_defect_trilinear(&alpha, &beta, &gamma).unwrap();
                    let via_form = pkg.lc.cometric(&form, &gamma);
                    assert!(
                        max_abs(&context, &[tri.sub(&via_form)]) < 1e-9,
                        "cross identity at ({i},{j},{k})"
                    );
                }
            }
        }
    }

    #[test]
    fn flat_poisson_is_compatible() {
        let (chart, pkg) = flat_package();
        let context = ctx(&chart, 9);
        let mut comps = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    comps.push(
                        pkg.compat_defect_trilinear(
                            &OneForm::basis(chart.clone(), i),
                            &OneForm::basis(chart.clone(), j),
                            &OneForm::basis(chart.clone(), k),
                        )
                        .unwrap(),
                    );
                }
            }
        }
        assert!(max_abs(&context, &comps) < 1e-12);
    }

    #[test]
    fn dpi_antisymmetric_in_last_two_slots() {
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let a = VectorField::new(
            chart.clone(),
            vec![Expr::one(), Expr::zero(), Expr::coord(1)],
        )
        .unwrap();
        let pi = Multivector::from_vector(&a)
            .wedge(&Multivector::from_vector(&VectorField::basis(
                chart.clone(),
                1,
            )))
            .unwrap();
        let mut g = MetricField::euclidean(chart.clone());
        g.set(0, 0, Expr::one().add(&Expr::coord(1).powi(2)));
        g.set(0, 2, Expr::coord(1).neg());
        let pkg = build_package(&pi, &VectorField::basis(chart.clone(), 2), &g).unwrap();
        let context = ctx(&chart, 10);
        let mut rng = Rng::seeded(21);
        let alpha = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
        let beta = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
        let gamma = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
        let fwd = pkg.d_pi(&alpha, &beta, &gamma).unwrap();
        let bwd = pkg.d_pi(&alpha, &gamma, &beta).unwrap();
        assert!(max_abs(&context, &[fwd.add(&bwd)]) < 1e-9);
    }

    #[test]
    fn flat_r3_poisson_fails_isometry() {
        // pi = d_x ^ d_y on R^3 with the euclidean metric: the anchor kills
        // dz, so it cannot be an isometry
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let mut pi = Multivector::zero(chart.clone(), 2).unwrap();
        pi.set_component(&[0, 1], Expr::one());
        let pkg = build_package(
            &pi,
            &VectorField::zero(chart.clone()),
            &MetricField::euclidean(chart.clone()),
        )
        .unwrap();
        let context = ctx(&chart, 11);
        let iso = isometry_check(&pkg, &context).unwrap();
        assert_eq!(iso.verdict, Verdict::Fail);
        // and the transport check reports failed preconditions
        let inputs = vec![(
            OneForm::basis(chart.clone(), 0),
            OneForm::basis(chart.clone(), 2),
        )];
        let transport = check_anchor_transport(&pkg, &context, &inputs).unwrap();
        assert_eq!(transport.verdict, Verdict::PreconditionsFailed);
    }
}
