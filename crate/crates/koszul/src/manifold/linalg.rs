//! Symbolic dense linear algebra on small `Expr` matrices (dim <= 5 in
//! practice): determinants by Laplace expansion and inversion through the
//! adjugate, so inverses stay exact expressions.

use crate::expr::Expr;

use super::FieldError;

pub fn mat_mul(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Expr::zero();
                    for l in 0..k {
                        acc = acc.add(&a[i][l].mul(&b[l][j]));
                    }
                    acc.simplify()
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Expr>], v: &[Expr]) -> Vec<Expr> {
    a.iter()
        .map(|row| {
            let mut acc = Expr::zero();
            for (entry, comp) in row.iter().zip(v) {
                acc = acc.add(&entry.mul(comp));
            }
            acc.simplify()
        })
        .collect()
}

fn minor(m: &[Vec<Expr>], skip_row: usize, skip_col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != skip_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != skip_col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

pub fn determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])).simplify(),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let cofactor = m[0][j].mul(&determinant(&minor(m, 0, j)));
                acc = if j % 2 == 0 {
                    acc.add(&cofactor)
                } else {
                    acc.sub(&cofactor)
                };
            }
            acc.simplify()
        }
    }
}

/// Symbolic inverse by adjugate over determinant.
///
/// Errors when the determinant simplifies to the zero expression; genuinely
/// singular points that survive simplification surface later as evaluation
/// errors.
pub fn sym_inverse(m: &[Vec<Expr>]) -> Result<Vec<Vec<Expr>>, FieldError> {
    let n = m.len();
    let det = determinant(m);
    if det.is_zero() {
        return Err(FieldError::SingularMatrix);
    }
    let mut inv = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            // adjugate: cofactor of (j, i)
            let c = determinant(&minor(m, j, i));
            let signed = if (i + j) % 2 == 0 { c } else { c.neg() };
            inv[i][j] = signed.div(&det).simplify();
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inverts_to_identity() {
        let id = vec![
            vec![Expr::one(), Expr::zero()],
            vec![Expr::zero(), Expr::one()],
        ];
        let inv = sym_inverse(&id).unwrap();
        assert_eq!(inv, id);
    }

    #[test]
    fn diagonal_exponential() {
        // diag(1, e^t) inverts to diag(1, e^{-t})
        let t = Expr::coord(0);
        let m = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), t.exp()]];
        let inv = sym_inverse(&m).unwrap();
        let product = mat_mul(&m, &inv);
        for (i, row) in product.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                for k in 0..10 {
                    let p = [0.2 * k as f64 - 1.0];
                    assert!((e.eval(&p).unwrap() - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn singular_matrix_detected() {
        let x = Expr::coord(0);
        let m = vec![vec![x.clone(), x.clone()], vec![x.clone(), x.clone()]];
        assert!(matches!(sym_inverse(&m), Err(FieldError::SingularMatrix)));
    }

    #[test]
    fn contact_coisotropy_inverse() {
        // flat map of eta = dz - y dx: columns are the images of the
        // coordinate fields; solving the 3x3 system by hand gives
        // sharp(dx) = d_y, sharp(dy) = -d_x - y d_z, sharp(dz) = y d_y + d_z.
        let y = Expr::coord(1);
        let b = vec![
            vec![y.powi(2), Expr::one(), y.neg()],
            vec![Expr::int(-1), Expr::zero(), Expr::zero()],
            vec![y.neg(), Expr::zero(), Expr::one()],
        ];
        let inv = sym_inverse(&b).unwrap();
        // columns of inv are sharp(dx), sharp(dy), sharp(dz)
        let expect = [
            // sharp(dx) = (0, 1, 0)
            [Expr::zero(), Expr::one(), Expr::zero()],
            // sharp(dy) = (-1, 0, -y)
            [Expr::int(-1), Expr::zero(), y.neg()],
            // sharp(dz) = (0, y, 1)
            [Expr::zero(), y.clone(), Expr::one()],
        ];
        for (col, expected) in expect.iter().enumerate() {
            for row in 0..3 {
                assert_eq!(
                    inv[row][col].simplify(),
                    expected[row].simplify(),
                    "entry ({row},{col})"
                );
            }
        }
    }
}
