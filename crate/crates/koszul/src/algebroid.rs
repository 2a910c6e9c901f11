//! The deformed cotangent algebroid of a bivector-vector pair: anchor
//! `sharp(a) = sharp_pi(a) + a(xi) xi`, the lambda-deformed bracket on
//! one-forms, and residual checkers for the Jacobi and algebroid conditions.

use thiserror::Error;

use crate::calculus::{
    bivector_pairing, koszul_bracket, lie_multivector, lie_oneform, lie_scalar, lie_vector,
    schouten, sharp_pi,
};
use crate::chart::Chart;
use crate::expr::Expr;
use crate::manifold::{pair, FieldError, Multivector, OneForm, VectorField};
use crate::report::{CheckReport, ResidualContext, Verdict};

#[derive(Debug, Error)]
pub enum AlgebroidError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("pi must be a bivector, got degree {0}")]
    NotABivector(usize),
    #[error("operation needs a lambda one-form, none was provided")]
    MissingLambda,
    #[error("pair is not verified as a Jacobi structure; run is_jacobi first or pass force")]
    NotVerified,
}

/// A `(pi, xi)` pair with an optional deformation one-form `lambda`.
///
/// The `jacobi_verified` tag is set by [`JacobiData::verify`]; operations
/// whose meaning depends on the Jacobi condition refuse unverified data
/// unless forced.
#[derive(Clone, Debug)]
pub struct JacobiData {
    chart: Chart,
    pi: Multivector,
    xi: VectorField,
    lambda: Option<OneForm>,
    jacobi_verified: bool,
}

impl JacobiData {
    pub fn new(pi: Multivector, xi: VectorField) -> Result<JacobiData, AlgebroidError> {
        if pi.degree() != 2 {
            return Err(AlgebroidError::NotABivector(pi.degree()));
        }
        if pi.chart() != xi.chart() {
            return Err(AlgebroidError::Field(FieldError::ChartMismatch));
        }
        Ok(JacobiData {
            chart: pi.chart().clone(),
            pi,
            xi,
            lambda: None,
            jacobi_verified: false,
        })
    }

    pub fn with_lambda(mut self, lambda: OneForm) -> Result<JacobiData, AlgebroidError> {
        if lambda.chart() != &self.chart {
            return Err(AlgebroidError::Field(FieldError::ChartMismatch));
        }
        self.lambda = Some(lambda);
        Ok(self)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn pi(&self) -> &Multivector {
        &self.pi
    }

    pub fn xi(&self) -> &VectorField {
        &self.xi
    }

    pub fn lambda(&self) -> Option<&OneForm> {
        self.lambda.as_ref()
    }

    pub fn is_verified(&self) -> bool {
        self.jacobi_verified
    }

    /// Deformed anchor `sharp(a) = sharp_pi(a) + a(xi) xi`.
    pub fn sharp(&self, alpha: &OneForm) -> Result<VectorField, AlgebroidError> {
        let base = sharp_pi(&self.pi, alpha)?;
        let weight = pair(alpha, &self.xi)?.expr().clone();
        Ok(base.add(&self.xi.scale(&weight)).simplify())
    }

    /// Matrix of the anchor: column `i` is `sharp(dx^i)`.
    pub fn sharp_matrix(&self) -> Result<Vec<Vec<Expr>>, AlgebroidError> {
        let dim = self.chart.dim();
        let mut m = vec![vec![Expr::zero(); dim]; dim];
        for i in 0..dim {
            let v = self.sharp(&OneForm::basis(self.chart.clone(), i))?;
            for (j, row) in m.iter_mut().enumerate() {
                row[i] = v.comp(j).clone();
            }
        }
        Ok(m)
    }

    /// The deformed bracket
    /// `[a,b] = [a,b]_pi + a(xi)(L_xi b - b) - b(xi)(L_xi a - a) - pi(a,b) lambda`.
    pub fn lambda_bracket(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
    ) -> Result<OneForm, AlgebroidError> {
        let lambda = self.lambda.as_ref().ok_or(AlgebroidError::MissingLambda)?;
        self.bracket_with(alpha, beta, lambda)
    }

    /// Same bracket with an explicit deformation form.
    pub fn bracket_with(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
        lambda: &OneForm,
    ) -> Result<OneForm, AlgebroidError> {
        let koszul = koszul_bracket(&self.pi, alpha, beta)?;
        let a_xi = pair(alpha, &self.xi)?.expr().clone();
        let b_xi = pair(beta, &self.xi)?.expr().clone();
        let lie_b = lie_oneform(&self.xi, beta)?.sub(beta);
        let lie_a = lie_oneform(&self.xi, alpha)?.sub(alpha);
        let pairing = bivector_pairing(&self.pi, alpha, beta)?;
        Ok(koszul
            .add(&lie_b.scale(&a_xi))
            .sub(&lie_a.scale(&b_xi))
            .sub(&lambda.scale(&pairing))
            .simplify())
    }

    /// Residual of `[pi,pi] - 2 xi ^ pi`.
    pub fn jacobi_defect_schouten(&self) -> Result<Multivector, AlgebroidError> {
        let bracket = schouten(&self.pi, &self.pi)?;
        let wedge = Multivector::from_vector(&self.xi)
            .wedge(&self.pi)?
            .scale(&Expr::int(2));
        Ok(bracket.sub(&wedge).simplify())
    }

    /// Residual of `L_xi pi`.
    pub fn jacobi_defect_invariance(&self) -> Result<Multivector, AlgebroidError> {
        Ok(lie_multivector(&self.xi, &self.pi)?.simplify())
    }

    /// Max residual of both defining tensors over the context's samples.
    pub fn is_jacobi(&self, ctx: &ResidualContext) -> Result<CheckReport, AlgebroidError> {
        let mut comps = self.jacobi_defect_schouten()?.components().to_vec();
        comps.extend_from_slice(self.jacobi_defect_invariance()?.components());
        Ok(ctx.check("jacobi", "[pi,pi] = 2 xi^pi  and  L_xi pi = 0", &comps))
    }

    /// Tag the pair as Jacobi-verified when the residual check passes.
    pub fn verify(
        mut self,
        ctx: &ResidualContext,
    ) -> Result<(JacobiData, CheckReport), AlgebroidError> {
        let report = self.is_jacobi(ctx)?;
        self.jacobi_verified = report.verdict == Verdict::Pass;
        Ok((self, report))
    }

    pub fn force_verified(mut self) -> JacobiData {
        self.jacobi_verified = true;
        self
    }

    /// Anchor defect `sharp([a,b]) - [sharp a, sharp b]` for the bracket
    /// deformed by the stored lambda. Refuses unverified pairs unless forced,
    /// since the closed-form comparison below is only meaningful then.
    pub fn anchor_defect(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
        force: bool,
    ) -> Result<VectorField, AlgebroidError> {
        if !self.jacobi_verified && !force {
            return Err(AlgebroidError::NotVerified);
        }
        let bracket = self.lambda_bracket(alpha, beta)?;
        let lhs = self.sharp(&bracket)?;
        let rhs = lie_vector(&self.sharp(alpha)?, &self.sharp(beta)?)?;
        Ok(lhs.sub(&rhs).simplify())
    }

    /// Closed form the defect takes on Jacobi pairs:
    /// `pi(a,b) (xi - sharp(lambda))`.
    pub fn anchor_defect_expected(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
    ) -> Result<VectorField, AlgebroidError> {
        let lambda = self.lambda.as_ref().ok_or(AlgebroidError::MissingLambda)?;
        let pairing = bivector_pairing(&self.pi, alpha, beta)?;
        let direction = self.xi.sub(&self.sharp(lambda)?);
        Ok(direction.scale(&pairing).simplify())
    }

    /// Cyclic sum of nested brackets; zero exactly when the bracket makes
    /// the one-forms a Lie algebra.
    pub fn jacobiator(
        &self,
        alpha: &OneForm,
        beta: &OneForm,
        gamma: &OneForm,
    ) -> Result<OneForm, AlgebroidError> {
        let nest = |a: &OneForm, b: &OneForm, c: &OneForm| -> Result<OneForm, AlgebroidError> {
            let inner = self.lambda_bracket(b, c)?;
            self.lambda_bracket(a, &inner)
        };
        Ok(nest(alpha, beta, gamma)?
            .add(&nest(beta, gamma, alpha)?)
            .add(&nest(gamma, alpha, beta)?)
            .simplify())
    }

    /// Leibniz residual `[a, f b] - f [a,b] - (sharp(a) f) b`.
    pub fn leibniz_defect(
        &self,
        alpha: &OneForm,
        f: &Expr,
        beta: &OneForm,
    ) -> Result<OneForm, AlgebroidError> {
        let scaled = self.lambda_bracket(alpha, &beta.scale(f))?;
        let plain = self.lambda_bracket(alpha, beta)?.scale(f);
        let derivation = beta.scale(&lie_scalar(&self.sharp(alpha)?, f));
        Ok(scaled.sub(&plain).sub(&derivation).simplify())
    }
}
