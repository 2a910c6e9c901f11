//! Differential operators: exterior derivative, Lie derivatives, the
//! Schouten-Nijenhuis bracket on low degrees, musical anchor of a bivector,
//! and the Koszul bracket on one-forms.
//!
//! Sign conventions are pinned by two identities that the test suite checks
//! against independent expansions:
//!
//! - `gamma(sharp_pi([a,b]_pi) - [sharp_pi a, sharp_pi b]) = 1/2 [pi,pi](a,b,gamma)`
//! - the standard contact bivector satisfies `[pi,pi] = 2 xi ^ pi`.

use crate::chart::Chart;
use crate::expr::Expr;
use crate::manifold::{combinations, FieldError, Form, Multivector, OneForm, VectorField};

/// Differential of a scalar.
pub fn exterior_d_scalar(chart: &Chart, f: &Expr) -> OneForm {
    let comps = (0..chart.dim()).map(|i| f.diff(i).simplify()).collect();
    OneForm::new(chart.clone(), comps).expect("dim components")
}

/// Exterior derivative by the coordinate formula; `d o d = 0`.
pub fn exterior_d(omega: &Form) -> Result<Form, FieldError> {
    let chart = omega.chart().clone();
    let p = omega.degree();
    let mut out = Form::zero(chart.clone(), p + 1)?;
    for combo in combinations(chart.dim(), p) {
        let comp = omega.component(&combo);
        if comp.is_zero() {
            continue;
        }
        for k in 0..chart.dim() {
            let d = comp.diff(k);
            if d.is_zero() {
                continue;
            }
            let mut tuple = Vec::with_capacity(p + 1);
            tuple.push(k);
            tuple.extend_from_slice(&combo);
            out.add_component(&tuple, d);
        }
    }
    Ok(out.simplify())
}

/// Derivation of a scalar along a vector field.
pub fn lie_scalar(x: &VectorField, f: &Expr) -> Expr {
    let mut acc = Expr::zero();
    for (i, comp) in x.comps().iter().enumerate() {
        acc = acc.add(&comp.mul(&f.diff(i)));
    }
    acc.simplify()
}

/// Lie bracket of vector fields.
pub fn lie_vector(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    if x.chart() != y.chart() {
        return Err(FieldError::ChartMismatch);
    }
    let chart = x.chart().clone();
    let comps = (0..chart.dim())
        .map(|i| {
            lie_scalar(x, y.comp(i))
                .sub(&lie_scalar(y, x.comp(i)))
                .simplify()
        })
        .collect();
    VectorField::new(chart, comps)
}

/// Lie derivative of a form via the homotopy formula `L_X = d i_X + i_X d`.
pub fn lie_form(x: &VectorField, omega: &Form) -> Result<Form, FieldError> {
    if x.chart() != omega.chart() {
        return Err(FieldError::ChartMismatch);
    }
    if omega.degree() == 0 {
        let mut out = Form::zero(omega.chart().clone(), 0)?;
        out.set_component(&[], lie_scalar(x, &omega.component(&[])));
        return Ok(out);
    }
    let d_ix = exterior_d(&omega.interior(x)?)?;
    let ix_d = exterior_d(omega)?.interior(x)?;
    Ok(d_ix.add(&ix_d).simplify())
}

/// Lie derivative of a form by the direct coordinate formula; kept separate
/// from the homotopy route so the two can cross-check each other.
pub fn lie_form_direct(x: &VectorField, omega: &Form) -> Result<Form, FieldError> {
    if x.chart() != omega.chart() {
        return Err(FieldError::ChartMismatch);
    }
    let chart = omega.chart().clone();
    let p = omega.degree();
    let mut out = Form::zero(chart.clone(), p)?;
    for combo in combinations(chart.dim(), p) {
        let mut acc = lie_scalar(x, &omega.component(&combo));
        for (slot, &idx) in combo.iter().enumerate() {
            for l in 0..chart.dim() {
                let coeff = x.comp(l).diff(idx);
                if coeff.is_zero() {
                    continue;
                }
                let mut tuple = combo.clone();
                tuple[slot] = l;
                acc = acc.add(&coeff.mul(&omega.component(&tuple)));
            }
        }
        out.set_component(&combo, acc.simplify());
    }
    Ok(out)
}

/// Lie derivative of a multivector: `X(P_I)` minus the contraction of `dX`
/// into each slot.
pub fn lie_multivector(x: &VectorField, p: &Multivector) -> Result<Multivector, FieldError> {
    if x.chart() != p.chart() {
        return Err(FieldError::ChartMismatch);
    }
    let chart = p.chart().clone();
    let deg = p.degree();
    let mut out = Multivector::zero(chart.clone(), deg)?;
    for combo in combinations(chart.dim(), deg) {
        let mut acc = lie_scalar(x, &p.component(&combo));
        for (slot, &idx) in combo.iter().enumerate() {
            for l in 0..chart.dim() {
                let coeff = x.comp(idx).diff(l);
                if coeff.is_zero() {
                    continue;
                }
                let mut tuple = combo.clone();
                tuple[slot] = l;
                acc = acc.sub(&coeff.mul(&p.component(&tuple)));
            }
        }
        out.set_component(&combo, acc.simplify());
    }
    Ok(out)
}

/// Schouten-Nijenhuis bracket for the degree pairs the geometry needs:
/// (1,1), (1,2), (2,1) and (2,2). The (2,2) branch uses the explicit
/// coordinate formula
///
/// ```text
/// [P,Q]^{ijk} = sum_l  P^{li} dQ^{jk}/dx^l + P^{lj} dQ^{ki}/dx^l + P^{lk} dQ^{ij}/dx^l
///             + (same with P and Q swapped)
/// ```
///
/// whose overall sign is anchored by `[pi,pi] = 2 xi ^ pi` on the standard
/// contact structure.
pub fn schouten(p: &Multivector, q: &Multivector) -> Result<Multivector, FieldError> {
    if p.chart() != q.chart() {
        return Err(FieldError::ChartMismatch);
    }
    match (p.degree(), q.degree()) {
        (1, 1) => {
            let x = p.try_into_vector().expect("degree 1");
            let y = q.try_into_vector().expect("degree 1");
            Ok(Multivector::from_vector(&lie_vector(&x, &y)?))
        }
        (1, 2) => {
            let x = p.try_into_vector().expect("degree 1");
            lie_multivector(&x, q)
        }
        (2, 1) => {
            let x = q.try_into_vector().expect("degree 1");
            Ok(lie_multivector(&x, p)?.scale(&Expr::int(-1)).simplify())
        }
        (2, 2) => {
            let chart = p.chart().clone();
            let dim = chart.dim();
            let mut out = Multivector::zero(chart.clone(), 3)?;
            for combo in combinations(dim, 3) {
                let (i, j, k) = (combo[0], combo[1], combo[2]);
                let mut acc = Expr::zero();
                for l in 0..dim {
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        acc = acc.add(&p.component(&[l, a]).mul(&q.component(&[b, c]).diff(l)));
                        acc = acc.add(&q.component(&[l, a]).mul(&p.component(&[b, c]).diff(l)));
                    }
                }
                out.set_component(&combo, acc.simplify());
            }
            Ok(out)
        }
        (a, b) => Err(FieldError::DegreeOverflow(a + b)),
    }
}

/// Musical anchor of a bivector: `beta(sharp_pi(alpha)) = pi(alpha, beta)`,
/// i.e. `(sharp_pi alpha)^j = sum_i pi^{ij} alpha_i`.
pub fn sharp_pi(pi: &Multivector, alpha: &OneForm) -> Result<VectorField, FieldError> {
    if pi.chart() != alpha.chart() {
        return Err(FieldError::ChartMismatch);
    }
    let chart = pi.chart().clone();
    let dim = chart.dim();
    let comps = (0..dim)
        .map(|j| {
            let mut acc = Expr::zero();
            for i in 0..dim {
                if i == j {
                    continue;
                }
                acc = acc.add(&pi.component(&[i, j]).mul(alpha.comp(i)));
            }
            acc.simplify()
        })
        .collect();
    VectorField::new(chart, comps)
}

/// Bivector pairing `pi(alpha, beta)` as a scalar expression.
pub fn bivector_pairing(
    pi: &Multivector,
    alpha: &OneForm,
    beta: &OneForm,
) -> Result<Expr, FieldError> {
    Ok(pi.apply(&[alpha, beta])?.expr().clone())
}

/// Koszul bracket on one-forms:
/// `[a, b]_pi = L_{sharp a} b - L_{sharp b} a - d(pi(a, b))`.
pub fn koszul_bracket(
    pi: &Multivector,
    alpha: &OneForm,
    beta: &OneForm,
) -> Result<OneForm, FieldError> {
    let chart = pi.chart().clone();
    let sa = sharp_pi(pi, alpha)?;
    let sb = sharp_pi(pi, beta)?;
    let la = lie_oneform(&sa, beta)?;
    let lb = lie_oneform(&sb, alpha)?;
    let dpair = exterior_d_scalar(&chart, &bivector_pairing(pi, alpha, beta)?);
    Ok(la.sub(&lb).sub(&dpair).simplify())
}

/// Lie derivative of a one-form (degree-1 convenience wrapper).
pub fn lie_oneform(x: &VectorField, alpha: &OneForm) -> Result<OneForm, FieldError> {
    Ok(lie_form(x, &Form::from_oneform(alpha))?
        .try_into_oneform()
        .expect("degree 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::pair;
    use crate::sample::{random_components, sample_points, Rng};

    fn r2() -> Chart {
        Chart::new(vec!["x", "y"]).unwrap()
    }

    fn r3() -> Chart {
        Chart::new(vec!["x", "y", "z"]).unwrap()
    }

    fn r4() -> Chart {
        Chart::new(vec!["x", "y", "z", "w"]).unwrap()
    }

    /// eta = dz - y dx
    fn eta(chart: &Chart) -> OneForm {
        OneForm::new(
            chart.clone(),
            vec![Expr::coord(1).neg(), Expr::zero(), Expr::one()],
        )
        .unwrap()
    }

    /// pi = (d_x + y d_z) ^ d_y
    fn contact_pi(chart: &Chart) -> Multivector {
        let a = VectorField::new(
            chart.clone(),
            vec![Expr::one(), Expr::zero(), Expr::coord(1)],
        )
        .unwrap();
        let b = VectorField::basis(chart.clone(), 1);
        Multivector::from_vector(&a)
            .wedge(&Multivector::from_vector(&b))
            .unwrap()
    }

    fn max_abs(components: &[Expr], points: &[Vec<f64>]) -> f64 {
        let mut m: f64 = 0.0;
        for c in components {
            let s = c.simplify();
            for p in points {
                m = m.max(s.eval(p).unwrap().abs());
            }
        }
        m
    }

    #[test]
    fn d_of_contact_form() {
        // d(dz - y dx) = dx ^ dy, by hand: d(-y dx) = -dy ^ dx = dx ^ dy
        let chart = r3();
        let d = exterior_d(&Form::from_oneform(&eta(&chart))).unwrap();
        assert_eq!(d.component(&[0, 1]), Expr::one());
        assert!(d.component(&[0, 2]).is_zero());
        assert!(d.component(&[1, 2]).is_zero());
    }

    #[test]
    fn d_squared_vanishes() {
        // f = x^2 y + sin(z)
        let chart = r3();
        let f = Expr::coord(0)
            .powi(2)
            .mul(&Expr::coord(1))
            .add(&Expr::coord(2).sin());
        let df = exterior_d_scalar(&chart, &f);
        let ddf = exterior_d(&Form::from_oneform(&df)).unwrap();
        assert!(ddf.is_zero());
    }

    #[test]
    fn conformally_closed_pair_on_r4() {
        // omega = e^{-x}(dx^dy + dz^dw), theta = dx:
        // d(omega) + theta ^ omega = 0
        let chart = r4();
        let mut omega = Form::zero(chart.clone(), 2).unwrap();
        let decay = Expr::coord(0).neg().exp();
        omega.set_component(&[0, 1], decay.clone());
        omega.set_component(&[2, 3], decay);
        let theta = Form::from_oneform(&OneForm::basis(chart.clone(), 0));
        let residual = exterior_d(&omega)
            .unwrap()
            .add(&theta.wedge(&omega).unwrap());
        assert!(residual.is_zero());
    }

    #[test]
    fn lie_derivative_of_scalar() {
        // L_{d_x}(x^2 y) = 2xy
        let chart = r2();
        let f = Expr::coord(0).powi(2).mul(&Expr::coord(1));
        let lx = lie_scalar(&VectorField::basis(chart, 0), &f);
        let expect = Expr::int(2)
            .mul(&Expr::coord(0))
            .mul(&Expr::coord(1))
            .simplify();
        assert_eq!(lx, expect);
    }

    #[test]
    fn invariance_of_contact_bivector() {
        // components are z-independent, so L_{d_z} pi = 0
        let chart = r3();
        let l =
            lie_multivector(&VectorField::basis(chart.clone(), 2), &contact_pi(&chart)).unwrap();
        assert!(l.is_zero());
    }

    #[test]
    fn homotopy_and_direct_lie_agree() {
        let chart = r3();
        let mut rng = Rng::seeded(11);
        let pts = sample_points(&chart, 10, 3).unwrap();
        for _ in 0..4 {
            let x = VectorField::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let mut omega = Form::zero(chart.clone(), 2).unwrap();
            omega.set_component(&[0, 1], crate::sample::random_polynomial(&chart, &mut rng));
            omega.set_component(&[0, 2], crate::sample::random_polynomial(&chart, &mut rng));
            omega.set_component(&[1, 2], crate::sample::random_polynomial(&chart, &mut rng));
            let a = lie_form(&x, &omega).unwrap();
            let b = lie_form_direct(&x, &omega).unwrap();
            let res = a.sub(&b);
            assert!(max_abs(res.components(), &pts) < 1e-9);
        }
    }

    #[test]
    fn schouten_of_constant_bivector_vanishes() {
        let chart = r3();
        let mut pi3 = Multivector::zero(chart, 2).unwrap();
        pi3.set_component(&[0, 1], Expr::one());
        let bracket = schouten(&pi3, &pi3).unwrap();
        assert!(bracket.is_zero());
    }

    #[test]
    fn contact_bivector_schouten_expansion() {
        // hand expansion gives [pi, pi] = 2 d_z ^ pi for pi = (d_x + y d_z) ^ d_y
        let chart = r3();
        let pi = contact_pi(&chart);
        let bracket = schouten(&pi, &pi).unwrap();
        let xi = Multivector::from_vector(&VectorField::basis(chart.clone(), 2));
        let expect = xi.wedge(&pi).unwrap().scale(&Expr::int(2)).simplify();
        assert_eq!(bracket.simplify(), expect);
    }

    #[test]
    fn schouten_vector_bivector_is_lie_derivative() {
        let chart = r3();
        let mut rng = Rng::seeded(5);
        let pts = sample_points(&chart, 10, 1).unwrap();
        for _ in 0..10 {
            let xi = VectorField::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let mut pi = Multivector::zero(chart.clone(), 2).unwrap();
            pi.set_component(&[0, 1], crate::sample::random_polynomial(&chart, &mut rng));
            pi.set_component(&[0, 2], crate::sample::random_polynomial(&chart, &mut rng));
            pi.set_component(&[1, 2], crate::sample::random_polynomial(&chart, &mut rng));
            let a = schouten(&Multivector::from_vector(&xi), &pi).unwrap();
            let b = lie_multivector(&xi, &pi).unwrap();
            assert!(max_abs(a.sub(&b).components(), &pts) < 1e-9);
            // graded antisymmetry: [P, X] = -[X, P] for (p,q) = (2,1)
            let c = schouten(&pi, &Multivector::from_vector(&xi)).unwrap();
            assert!(max_abs(a.add(&c).components(), &pts) < 1e-9);
        }
    }

    #[test]
    fn anchor_convention_on_flat_bivector() {
        // pi = d_x ^ d_y on R^2: sharp(dx) = d_y, pinned by
        // dy(sharp(dx)) = pi(dx, dy) = 1
        let chart = r2();
        let mut pi = Multivector::zero(chart.clone(), 2).unwrap();
        pi.set_component(&[0, 1], Expr::one());
        let s = sharp_pi(&pi, &OneForm::basis(chart.clone(), 0)).unwrap();
        assert_eq!(s.comps(), VectorField::basis(chart.clone(), 1).comps());
        // alpha(sharp(alpha)) = pi(alpha, alpha) = 0
        let alpha = OneForm::new(chart.clone(), vec![Expr::coord(1), Expr::coord(0)]).unwrap();
        let v = sharp_pi(&pi, &alpha).unwrap();
        assert!(pair(&alpha, &v).unwrap().expr().is_zero());
    }

    #[test]
    fn anchor_of_contact_bivector() {
        // sharp_pi(dz) = y d_y for the standard contact bivector
        let chart = r3();
        let s = sharp_pi(&contact_pi(&chart), &OneForm::basis(chart.clone(), 2)).unwrap();
        assert!(s.comp(0).is_zero());
        assert_eq!(s.comp(1).clone(), Expr::coord(1));
        assert!(s.comp(2).is_zero());
    }

    #[test]
    fn koszul_bracket_of_exact_forms_constant_pairing() {
        // [dx, dy]_pi = d(pi(dx,dy)) = d(1) = 0 for pi = d_x ^ d_y
        let chart = r2();
        let mut pi = Multivector::zero(chart.clone(), 2).unwrap();
        pi.set_component(&[0, 1], Expr::one());
        let b = koszul_bracket(
            &pi,
            &OneForm::basis(chart.clone(), 0),
            &OneForm::basis(chart, 1),
        )
        .unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn anchor_identity_ties_schouten_sign() {
        // gamma(sharp([a,b]) - [sharp a, sharp b]) = 1/2 [pi,pi](a,b,gamma)
        // on the contact bivector with random polynomial inputs
        let chart = r3();
        let pi = contact_pi(&chart);
        let half_jac = schouten(&pi, &pi).unwrap().scale(&Expr::rat(1, 2));
        let mut rng = Rng::seeded(23);
        let pts = sample_points(&chart, 10, 9).unwrap();
        for _ in 0..10 {
            let a = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let b = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let g = OneForm::new(chart.clone(), random_components(&chart, &mut rng)).unwrap();
            let lhs_vec = sharp_pi(&pi, &koszul_bracket(&pi, &a, &b).unwrap())
                .unwrap()
                .sub(
                    &lie_vector(&sharp_pi(&pi, &a).unwrap(), &sharp_pi(&pi, &b).unwrap()).unwrap(),
                );
            let lhs = pair(&g, &lhs_vec).unwrap().expr().clone();
            let rhs = half_jac.apply(&[&a, &b, &g]).unwrap().expr().clone();
            assert!(max_abs(&[lhs.sub(&rhs)], &pts) < 1e-9);
        }
    }

    #[test]
    fn koszul_jacobiator_matches_schouten_differential() {
        // cyclic [da,[db,dc]] sum equals -1/2 d([pi,pi](da,db,dc))
        // on the contact bivector (nonzero jacobiator) with random phi, psi
        let chart = r3();
        let pi = contact_pi(&chart);
        let jac = schouten(&pi, &pi).unwrap();
        let mut rng = Rng::seeded(77);
        let pts = sample_points(&chart, 10, 13).unwrap();
        for _ in 0..6 {
            let phi = crate::sample::random_polynomial(&chart, &mut rng);
            let psi = crate::sample::random_polynomial(&chart, &mut rng);
            let tau = crate::sample::random_polynomial(&chart, &mut rng);
            let d = |f: &Expr| exterior_d_scalar(&chart, f);
            let (da, db, dc) = (d(&phi), d(&psi), d(&tau));
            let nested = |x: &OneForm, y: &OneForm, z: &OneForm| {
                koszul_bracket(&pi, x, &koszul_bracket(&pi, y, z).unwrap()).unwrap()
            };
            let lhs = nested(&da, &db, &dc)
                .add(&nested(&db, &dc, &da))
                .add(&nested(&dc, &da, &db));
            let rhs =
                exterior_d_scalar(&chart, &jac.apply(&[&da, &db, &dc]).unwrap().expr().clone())
                    .scale(&Expr::rat(-1, 2));
            assert!(max_abs(lhs.sub(&rhs).comps(), &pts) < 1e-9);
        }
    }
}
