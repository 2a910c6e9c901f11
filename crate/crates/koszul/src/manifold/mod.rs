//! Typed tensor fields over a chart: scalars, vectors, one-forms,
//! antisymmetric multivectors/forms up to degree 3, metrics and
//! endomorphism fields, with the multilinear algebra they need.
//!
//! Antisymmetric tensors store one component per strictly increasing index
//! tuple; reading a permuted tuple applies the permutation sign. The wedge
//! follows the shuffle convention without factorial weights, so
//! `(v ^ P)(a, b, c) = a(v) P(b, c) - b(v) P(a, c) + c(v) P(a, b)`.

pub mod linalg;

use thiserror::Error;

use crate::chart::Chart;
use crate::expr::Expr;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("antisymmetric degree {0} exceeds the supported cap of 3")]
    DegreeOverflow(usize),
    #[error("interior product needs degree >= 1")]
    DegreeUnderflow,
    #[error("expected {expected} arguments, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("matrix is singular: determinant simplifies to zero")]
    SingularMatrix,
    #[error("component count {got} does not match expected {expected}")]
    ComponentCount { expected: usize, got: usize },
}

pub const MAX_DEGREE: usize = 3;

/// Strictly increasing index tuples of length `p` drawn from `0..dim`,
/// in lexicographic order.
pub fn combinations(dim: usize, p: usize) -> Vec<Vec<usize>> {
    if p > dim {
        return Vec::new();
    }
    if p == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..p).collect();
    loop {
        out.push(current.clone());
        // advance to the next combination
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + dim - p {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..p {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// Sort an index tuple, returning the permutation sign, or `None` when an
/// index repeats.
pub fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = indices.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in (i + 1..v.len()).rev() {
            if v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
            }
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

/// Shared storage for antisymmetric tensors (used by both variances).
#[derive(Clone, Debug, PartialEq)]
pub struct AltData {
    chart: Chart,
    degree: usize,
    /// One entry per combination, in `combinations(dim, degree)` order.
    comps: Vec<Expr>,
}

impl AltData {
    fn zero(chart: Chart, degree: usize) -> Result<AltData, FieldError> {
        if degree > MAX_DEGREE {
            return Err(FieldError::DegreeOverflow(degree));
        }
        // degree > dim is the zero space: no components, every read is zero
        let n = combinations(chart.dim(), degree).len();
        Ok(AltData {
            chart,
            degree,
            comps: vec![Expr::zero(); n],
        })
    }

    fn rank_of(&self, sorted: &[usize]) -> usize {
        combinations(self.chart.dim(), self.degree)
            .iter()
            .position(|c| c == sorted)
            .expect("sorted tuple within range")
    }

    pub fn component(&self, indices: &[usize]) -> Expr {
        debug_assert_eq!(indices.len(), self.degree);
        match sort_with_sign(indices) {
            None => Expr::zero(),
            Some((sorted, sign)) => {
                let c = self.comps[self.rank_of(&sorted)].clone();
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    pub fn add_to(&mut self, indices: &[usize], value: Expr) {
        if let Some((sorted, sign)) = sort_with_sign(indices) {
            let rank = self.rank_of(&sorted);
            let signed = if sign < 0 { value.neg() } else { value };
            self.comps[rank] = self.comps[rank].add(&signed);
        }
    }

    fn map(&self, f: impl Fn(&Expr) -> Expr) -> AltData {
        AltData {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &AltData, f: impl Fn(&Expr, &Expr) -> Expr) -> AltData {
        AltData {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    fn wedge(&self, other: &AltData) -> Result<AltData, FieldError> {
        if self.chart != other.chart {
            return Err(FieldError::ChartMismatch);
        }
        let (p, q) = (self.degree, other.degree);
        let mut out = AltData::zero(self.chart.clone(), p + q)?;
        let combos = combinations(self.chart.dim(), p + q);
        for (rank, total) in combos.iter().enumerate() {
            let mut acc = Expr::zero();
            for left in combinations(p + q, p) {
                let left_ids: Vec<usize> = left.iter().map(|&k| total[k]).collect();
                let right_ids: Vec<usize> = (0..p + q)
                    .filter(|k| !left.contains(k))
                    .map(|k| total[k])
                    .collect();
                // shuffle sign: inversions between the two blocks
                let mut inversions = 0;
                for &l in &left_ids {
                    for &r in &right_ids {
                        if l > r {
                            inversions += 1;
                        }
                    }
                }
                let term = self.component(&left_ids).mul(&other.component(&right_ids));
                acc = if inversions % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            out.comps[rank] = acc.simplify();
        }
        Ok(out)
    }

    /// Full antisymmetric evaluation against `degree` argument component
    /// vectors: sum over sorted tuples of component times the argument minor.
    fn evaluate(&self, args: &[&[Expr]]) -> Result<Expr, FieldError> {
        if args.len() != self.degree {
            return Err(FieldError::WrongArity {
                expected: self.degree,
                got: args.len(),
            });
        }
        let mut acc = Expr::zero();
        for combo in combinations(self.chart.dim(), self.degree) {
            let comp = self.component(&combo);
            if comp.is_zero() {
                continue;
            }
            let minor: Vec<Vec<Expr>> = combo
                .iter()
                .map(|&idx| args.iter().map(|arg| arg[idx].clone()).collect())
                .collect();
            acc = acc.add(&comp.mul(&linalg::determinant(&minor)));
        }
        Ok(acc.simplify())
    }

    fn contract_first(&self, arg: &[Expr]) -> Result<AltData, FieldError> {
        if self.degree == 0 {
            return Err(FieldError::DegreeUnderflow);
        }
        let mut out = AltData::zero(self.chart.clone(), self.degree - 1)?;
        let combos = combinations(self.chart.dim(), self.degree - 1);
        for (rank, rest) in combos.iter().enumerate() {
            let mut acc = Expr::zero();
            for l in 0..self.chart.dim() {
                if arg[l].is_zero() {
                    continue;
                }
                let mut tuple = Vec::with_capacity(self.degree);
                tuple.push(l);
                tuple.extend_from_slice(rest);
                acc = acc.add(&arg[l].mul(&self.component(&tuple)));
            }
            out.comps[rank] = acc.simplify();
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// field types

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    chart: Chart,
    expr: Expr,
}

impl ScalarField {
    pub fn new(chart: Chart, expr: Expr) -> ScalarField {
        ScalarField { chart, expr }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    chart: Chart,
    comps: Vec<Expr>,
}

macro_rules! rank_one_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<$ty, FieldError> {
                if comps.len() != chart.dim() {
                    return Err(FieldError::ComponentCount {
                        expected: chart.dim(),
                        got: comps.len(),
                    });
                }
                Ok($ty { chart, comps })
            }

            pub fn zero(chart: Chart) -> $ty {
                let dim = chart.dim();
                $ty {
                    chart,
                    comps: vec![Expr::zero(); dim],
                }
            }

            /// The `i`-th coordinate basis element.
            pub fn basis(chart: Chart, i: usize) -> $ty {
                let mut comps = vec![Expr::zero(); chart.dim()];
                comps[i] = Expr::one();
                $ty { chart, comps }
            }

            pub fn chart(&self) -> &Chart {
                &self.chart
            }

            pub fn comps(&self) -> &[Expr] {
                &self.comps
            }

            pub fn comp(&self, i: usize) -> &Expr {
                &self.comps[i]
            }

            pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> $ty {
                $ty {
                    chart: self.chart.clone(),
                    comps: self.comps.iter().map(f).collect(),
                }
            }

            pub fn add(&self, other: &$ty) -> $ty {
                $ty {
                    chart: self.chart.clone(),
                    comps: self
                        .comps
                        .iter()
                        .zip(&other.comps)
                        .map(|(a, b)| a.add(b))
                        .collect(),
                }
            }

            pub fn sub(&self, other: &$ty) -> $ty {
                $ty {
                    chart: self.chart.clone(),
                    comps: self
                        .comps
                        .iter()
                        .zip(&other.comps)
                        .map(|(a, b)| a.sub(b))
                        .collect(),
                }
            }

            pub fn scale(&self, s: &Expr) -> $ty {
                self.map(|c| s.mul(c))
            }

            pub fn neg(&self) -> $ty {
                self.map(|c| c.neg())
            }

            pub fn simplify(&self) -> $ty {
                self.map(|c| c.simplify())
            }

            pub fn is_zero(&self) -> bool {
                self.comps.iter().all(|c| c.simplify().is_zero())
            }
        }
    };
}

rank_one_impl!(VectorField);
rank_one_impl!(OneForm);

/// Natural pairing `alpha(X)`.
pub fn pair(alpha: &OneForm, x: &VectorField) -> Result<ScalarField, FieldError> {
    if alpha.chart != x.chart {
        return Err(FieldError::ChartMismatch);
    }
    let mut acc = Expr::zero();
    for (a, v) in alpha.comps.iter().zip(&x.comps) {
        acc = acc.add(&a.mul(v));
    }
    Ok(ScalarField::new(alpha.chart.clone(), acc.simplify()))
}

/// Antisymmetric contravariant tensor of degree 0..=3.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector(AltData);

/// Antisymmetric covariant tensor (differential form) of degree 0..=3.
#[derive(Clone, Debug, PartialEq)]
pub struct Form(AltData);

macro_rules! alt_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn zero(chart: Chart, degree: usize) -> Result<$ty, FieldError> {
                Ok($ty(AltData::zero(chart, degree)?))
            }

            pub fn chart(&self) -> &Chart {
                &self.0.chart
            }

            pub fn degree(&self) -> usize {
                self.0.degree
            }

            pub fn component(&self, indices: &[usize]) -> Expr {
                self.0.component(indices)
            }

            /// Add `value` at an arbitrary index tuple (sign handled).
            pub fn add_component(&mut self, indices: &[usize], value: Expr) {
                self.0.add_to(indices, value)
            }

            pub fn set_component(&mut self, indices: &[usize], value: Expr) {
                let (sorted, sign) = sort_with_sign(indices).expect("distinct indices");
                let rank = self.0.rank_of(&sorted);
                self.0.comps[rank] = if sign < 0 { value.neg() } else { value };
            }

            pub fn wedge(&self, other: &$ty) -> Result<$ty, FieldError> {
                Ok($ty(self.0.wedge(&other.0)?))
            }

            pub fn add(&self, other: &$ty) -> $ty {
                $ty(self.0.zip(&other.0, |a, b| a.add(b)))
            }

            pub fn sub(&self, other: &$ty) -> $ty {
                $ty(self.0.zip(&other.0, |a, b| a.sub(b)))
            }

            pub fn scale(&self, s: &Expr) -> $ty {
                $ty(self.0.map(|c| s.mul(c)))
            }

            pub fn simplify(&self) -> $ty {
                $ty(self.0.map(|c| c.simplify()))
            }

            pub fn components(&self) -> &[Expr] {
                &self.0.comps
            }

            pub fn is_zero(&self) -> bool {
                self.0.comps.iter().all(|c| c.simplify().is_zero())
            }
        }
    };
}

alt_impl!(Multivector);
alt_impl!(Form);

impl Multivector {
    pub fn from_vector(v: &VectorField) -> Multivector {
        let mut data = AltData::zero(v.chart.clone(), 1).expect("degree 1 fits");
        data.comps = v.comps.clone();
        Multivector(data)
    }

    pub fn try_into_vector(&self) -> Option<VectorField> {
        if self.degree() != 1 {
            return None;
        }
        Some(VectorField {
            chart: self.0.chart.clone(),
            comps: self.0.comps.clone(),
        })
    }

    /// Evaluate on `degree` one-forms.
    pub fn apply(&self, args: &[&OneForm]) -> Result<ScalarField, FieldError> {
        for a in args {
            if a.chart != self.0.chart {
                return Err(FieldError::ChartMismatch);
            }
        }
        let comps: Vec<&[Expr]> = args.iter().map(|a| a.comps.as_slice()).collect();
        Ok(ScalarField::new(
            self.0.chart.clone(),
            self.0.evaluate(&comps)?,
        ))
    }
}

impl Form {
    pub fn from_oneform(a: &OneForm) -> Form {
        let mut data = AltData::zero(a.chart.clone(), 1).expect("degree 1 fits");
        data.comps = a.comps.clone();
        Form(data)
    }

    pub fn try_into_oneform(&self) -> Option<OneForm> {
        if self.degree() != 1 {
            return None;
        }
        Some(OneForm {
            chart: self.0.chart.clone(),
            comps: self.0.comps.clone(),
        })
    }

    /// Evaluate on `degree` vector fields.
    pub fn apply(&self, args: &[&VectorField]) -> Result<ScalarField, FieldError> {
        for a in args {
            if a.chart != self.0.chart {
                return Err(FieldError::ChartMismatch);
            }
        }
        let comps: Vec<&[Expr]> = args.iter().map(|a| a.comps.as_slice()).collect();
        Ok(ScalarField::new(
            self.0.chart.clone(),
            self.0.evaluate(&comps)?,
        ))
    }

    /// Interior product `i_X omega = omega(X, ...)`.
    pub fn interior(&self, x: &VectorField) -> Result<Form, FieldError> {
        if x.chart != self.0.chart {
            return Err(FieldError::ChartMismatch);
        }
        Ok(Form(self.0.contract_first(&x.comps)?))
    }

    /// Dense matrix of a 2-form: `m[i][j] = omega(d_i, d_j)`.
    pub fn matrix(&self) -> Vec<Vec<Expr>> {
        assert_eq!(self.degree(), 2, "matrix() expects a 2-form");
        let dim = self.0.chart.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.component(&[i, j])).collect())
            .collect()
    }
}

impl Multivector {
    /// Dense matrix of a bivector: `m[i][j] = P(dx_i, dx_j)`.
    pub fn matrix(&self) -> Vec<Vec<Expr>> {
        assert_eq!(self.degree(), 2, "matrix() expects a bivector");
        let dim = self.0.chart.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.component(&[i, j])).collect())
            .collect()
    }
}

/// Metric signature tag. Only `Riemannian`-tagged fixtures are meaningful
/// inputs to the Kenmotsu checks, which assume a definite metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Pseudo,
}

/// Symmetric metric field; stores the upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    chart: Chart,
    /// Row-major upper triangle: entry (i, j) with i <= j.
    comps: Vec<Expr>,
    signature: Signature,
}

impl MetricField {
    pub fn zero(chart: Chart, signature: Signature) -> MetricField {
        let dim = chart.dim();
        MetricField {
            chart,
            comps: vec![Expr::zero(); dim * (dim + 1) / 2],
            signature,
        }
    }

    pub fn euclidean(chart: Chart) -> MetricField {
        let dim = chart.dim();
        let mut g = MetricField::zero(chart, Signature::Riemannian);
        for i in 0..dim {
            g.set(i, i, Expr::one());
        }
        g
    }

    fn tri_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let dim = self.chart.dim();
        i * dim - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        self.comps[self.tri_index(i, j)].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, value: Expr) {
        let idx = self.tri_index(i, j);
        self.comps[idx] = value;
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn matrix(&self) -> Vec<Vec<Expr>> {
        let dim = self.chart.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn apply(&self, x: &VectorField, y: &VectorField) -> Result<ScalarField, FieldError> {
        if x.chart != self.chart || y.chart != self.chart {
            return Err(FieldError::ChartMismatch);
        }
        let dim = self.chart.dim();
        let mut acc = Expr::zero();
        for i in 0..dim {
            for j in 0..dim {
                acc = acc.add(&self.get(i, j).mul(x.comp(i)).mul(y.comp(j)));
            }
        }
        Ok(ScalarField::new(self.chart.clone(), acc.simplify()))
    }

    /// All component expressions (upper triangle), for hygiene sweeps.
    pub fn components(&self) -> &[Expr] {
        &self.comps
    }
}

/// Field of (1,1)-tensors `A^i_j`; `apply` contracts the lower index with a
/// vector. The same storage doubles for covector endomorphisms, where row
/// `i`, column `j` is the coefficient of `alpha_j` in the image's `i`-th
/// component.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoField {
    chart: Chart,
    /// Row-major `dim x dim`.
    comps: Vec<Expr>,
}

impl EndoField {
    pub fn zero(chart: Chart) -> EndoField {
        let dim = chart.dim();
        EndoField {
            chart,
            comps: vec![Expr::zero(); dim * dim],
        }
    }

    pub fn identity(chart: Chart) -> EndoField {
        let dim = chart.dim();
        let mut e = EndoField::zero(chart);
        for i in 0..dim {
            e.set(i, i, Expr::one());
        }
        e
    }

    pub fn from_matrix(chart: Chart, m: Vec<Vec<Expr>>) -> EndoField {
        let dim = chart.dim();
        let mut comps = Vec::with_capacity(dim * dim);
        for row in m {
            assert_eq!(row.len(), dim);
            comps.extend(row);
        }
        assert_eq!(comps.len(), dim * dim);
        EndoField { chart, comps }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        self.comps[i * self.chart.dim() + j].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, value: Expr) {
        let dim = self.chart.dim();
        self.comps[i * dim + j] = value;
    }

    pub fn matrix(&self) -> Vec<Vec<Expr>> {
        let dim = self.chart.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn apply(&self, x: &VectorField) -> Result<VectorField, FieldError> {
        if x.chart != self.chart {
            return Err(FieldError::ChartMismatch);
        }
        let dim = self.chart.dim();
        let comps = (0..dim)
            .map(|i| {
                let mut acc = Expr::zero();
                for j in 0..dim {
                    acc = acc.add(&self.get(i, j).mul(x.comp(j)));
                }
                acc.simplify()
            })
            .collect();
        VectorField::new(self.chart.clone(), comps)
    }

    /// Contract against a covector: `(A alpha)_i = sum_j A[i][j] alpha_j`.
    pub fn apply_covector(&self, alpha: &OneForm) -> Result<OneForm, FieldError> {
        if alpha.chart != self.chart {
            return Err(FieldError::ChartMismatch);
        }
        let dim = self.chart.dim();
        let comps = (0..dim)
            .map(|i| {
                let mut acc = Expr::zero();
                for j in 0..dim {
                    acc = acc.add(&self.get(i, j).mul(alpha.comp(j)));
                }
                acc.simplify()
            })
            .collect();
        OneForm::new(self.chart.clone(), comps)
    }

    pub fn compose(&self, inner: &EndoField) -> Result<EndoField, FieldError> {
        if inner.chart != self.chart {
            return Err(FieldError::ChartMismatch);
        }
        let m = linalg::mat_mul(&self.matrix(), &inner.matrix());
        Ok(EndoField::from_matrix(self.chart.clone(), m))
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r3() -> Chart {
        Chart::new(vec!["x", "y", "z"]).unwrap()
    }

    fn dxi(chart: &Chart, i: usize) -> VectorField {
        VectorField::basis(chart.clone(), i)
    }

    #[test]
    fn wedge_antisymmetry() {
        let chart = r3();
        let dx = Multivector::from_vector(&dxi(&chart, 0));
        let zero = dx.wedge(&dx).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn wedge_convention_unit_case() {
        // dz ^ (dx ^ dy) evaluated on (dx, dy, dz) -> +1, after relabeling to
        // the contravariant side: d_z ^ (d_x ^ d_y) on (dx, dy, dz).
        let chart = r3();
        let dz = Multivector::from_vector(&dxi(&chart, 2));
        let dxdy = Multivector::from_vector(&dxi(&chart, 0))
            .wedge(&Multivector::from_vector(&dxi(&chart, 1)))
            .unwrap();
        let tri = dz.wedge(&dxdy).unwrap();
        let args = [
            OneForm::basis(chart.clone(), 0),
            OneForm::basis(chart.clone(), 1),
            OneForm::basis(chart.clone(), 2),
        ];
        let val = tri.apply(&[&args[0], &args[1], &args[2]]).unwrap();
        assert_eq!(val.expr().clone(), Expr::one());
    }

    #[test]
    fn contact_volume_by_hand_expansion() {
        // eta ^ d(eta) for eta = dz - y dx: (dz - y dx) ^ (dx ^ dy)
        // = dz ^ dx ^ dy = dx ^ dy ^ dz, nonvanishing everywhere
        let chart = r3();
        let eta = OneForm::new(
            chart.clone(),
            vec![Expr::coord(1).neg(), Expr::zero(), Expr::one()],
        )
        .unwrap();
        let mut d_eta = Form::zero(chart.clone(), 2).unwrap();
        d_eta.set_component(&[0, 1], Expr::one());
        let volume = Form::from_oneform(&eta).wedge(&d_eta).unwrap();
        assert_eq!(volume.component(&[0, 1, 2]), Expr::one());
    }

    #[test]
    fn wedge_degree_overflow() {
        let chart = Chart::new(vec!["x", "y", "z", "w"]).unwrap();
        let a = Multivector::zero(chart.clone(), 2).unwrap();
        let b = Multivector::zero(chart, 2).unwrap();
        assert!(matches!(a.wedge(&b), Err(FieldError::DegreeOverflow(4))));
    }

    #[test]
    fn graded_anticommutativity_pointwise() {
        let chart = r3();
        // v = x d_x + y d_y, P = d_x ^ d_y + z d_y ^ d_z
        let v = VectorField::new(
            chart.clone(),
            vec![Expr::coord(0), Expr::coord(1), Expr::zero()],
        )
        .unwrap();
        let mut p = Multivector::zero(chart.clone(), 2).unwrap();
        p.set_component(&[0, 1], Expr::one());
        p.set_component(&[1, 2], Expr::coord(2));
        let vm = Multivector::from_vector(&v);
        let vp = vm.wedge(&p).unwrap();
        let pv = p.wedge(&vm).unwrap();
        // p*q = 1*2 = 2, so v^P = (+1)^2 P^v
        assert_eq!(vp.simplify(), pv.simplify());
    }

    #[test]
    fn interior_product_basics() {
        let chart = r3();
        let mut dxdy = Form::zero(chart.clone(), 2).unwrap();
        dxdy.set_component(&[0, 1], Expr::one());
        let i_dz = dxdy.interior(&dxi(&chart, 2)).unwrap();
        assert!(i_dz.is_zero());
        let i_dx = dxdy.interior(&dxi(&chart, 0)).unwrap();
        let dy = i_dx.try_into_oneform().unwrap();
        assert_eq!(dy.comps(), OneForm::basis(chart, 1).comps());
    }

    #[test]
    fn pairing_examples() {
        let chart = r3();
        // (dz - y dx)(d_z) = 1, dx(d_y) = 0
        let eta = OneForm::new(
            chart.clone(),
            vec![Expr::coord(1).neg(), Expr::zero(), Expr::one()],
        )
        .unwrap();
        let val = pair(&eta, &dxi(&chart, 2)).unwrap();
        assert!(val.expr().is_one());
        let dx = OneForm::basis(chart.clone(), 0);
        assert!(pair(&dx, &dxi(&chart, 1)).unwrap().expr().is_zero());
    }

    #[test]
    fn metric_symmetric_storage() {
        let chart = r3();
        let mut g = MetricField::euclidean(chart);
        g.set(0, 2, Expr::coord(1).neg());
        assert_eq!(g.get(2, 0), Expr::coord(1).neg());
    }
}
