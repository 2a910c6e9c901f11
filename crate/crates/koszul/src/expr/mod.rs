//! Symbolic scalar expressions over chart coordinates.
//!
//! `Expr` is a small immutable expression tree: rational/float constants,
//! coordinates, arithmetic, integer powers and the four elementary functions
//! `exp`, `ln`, `sin`, `cos`. Everything the rest of the crate manipulates
//! (tensor components, brackets, connection coefficients) is built out of
//! these trees, differentiated exactly, and only turned into floats when a
//! residual is evaluated at a sample point.
//!
//! Constants stay exact rationals as long as the inputs are rational, so
//! identities that hold symbolically evaluate to exact zeros instead of
//! rounding noise.

mod parser;

pub use parser::{parse_expr, ParseError};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Exact rational or IEEE double constant.
///
/// Rational arithmetic is done in `i64` with checked operations; on overflow
/// the value silently degrades to a float, which only affects sharpness of
/// residuals, never correctness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Rat(i64, i64),
    Float(f64),
}

impl Eq for Number {}

impl std::hash::Hash for Number {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Number::Rat(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Number::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Rat(n, 1)
    }

    /// Normalized rational; a zero denominator falls back to a float NaN-free
    /// division guard and should never be produced by the parser.
    pub fn rat(num: i64, den: i64) -> Self {
        if den == 0 {
            return Number::Float(f64::INFINITY);
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Number::Rat(sign * num / g, sign * den / g)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rat(n, d) => n as f64 / d as f64,
            Number::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Number::Rat(0, _)) || matches!(self, Number::Float(f) if f == 0.0)
    }

    pub fn is_one(self) -> bool {
        matches!(self, Number::Rat(1, 1)) || matches!(self, Number::Float(f) if f == 1.0)
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rat(n, _) => n < 0,
            Number::Float(f) => f < 0.0,
        }
    }

    fn checked_binop(
        self,
        other: Number,
        op: fn(i64, i64, i64, i64) -> Option<(i64, i64)>,
        fop: fn(f64, f64) -> f64,
    ) -> Number {
        match (self, other) {
            (Number::Rat(a, b), Number::Rat(c, d)) => match op(a, b, c, d) {
                Some((n, den)) => Number::rat(n, den),
                None => Number::Float(fop(self.to_f64(), other.to_f64())),
            },
            _ => Number::Float(fop(self.to_f64(), other.to_f64())),
        }
    }

    pub fn add(self, other: Number) -> Number {
        self.checked_binop(
            other,
            |a, b, c, d| {
                let n = a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?;
                Some((n, b.checked_mul(d)?))
            },
            |x, y| x + y,
        )
    }

    pub fn sub(self, other: Number) -> Number {
        self.add(other.neg())
    }

    pub fn mul(self, other: Number) -> Number {
        self.checked_binop(
            other,
            |a, b, c, d| Some((a.checked_mul(c)?, b.checked_mul(d)?)),
            |x, y| x * y,
        )
    }

    pub fn div(self, other: Number) -> Number {
        self.checked_binop(
            other,
            |a, b, c, d| {
                if c == 0 {
                    return None;
                }
                Some((a.checked_mul(d)?, b.checked_mul(c)?))
            },
            |x, y| x / y,
        )
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rat(n, d) => Number::Rat(-n, d),
            Number::Float(f) => Number::Float(-f),
        }
    }

    /// Integer power; negative exponents invert. Returns `None` for 0^(n<0).
    pub fn powi(self, exp: i32) -> Option<Number> {
        if exp < 0 && self.is_zero() {
            return None;
        }
        match self {
            Number::Rat(n, d) => {
                let (base_n, base_d, e) = if exp < 0 { (d, n, -exp) } else { (n, d, exp) };
                let mut rn: i64 = 1;
                let mut rd: i64 = 1;
                for _ in 0..e {
                    rn = match rn.checked_mul(base_n) {
                        Some(v) => v,
                        None => return Some(Number::Float(self.to_f64().powi(exp))),
                    };
                    rd = match rd.checked_mul(base_d) {
                        Some(v) => v,
                        None => return Some(Number::Float(self.to_f64().powi(exp))),
                    };
                }
                Some(Number::rat(rn, rd))
            }
            Number::Float(f) => Some(Number::Float(f.powi(exp))),
        }
    }
}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_f64()
            .partial_cmp(&other.to_f64())
            .unwrap_or(Ordering::Equal)
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum ExprNode {
    Const(Number),
    Coord(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Integer power; negative exponents denote reciprocals.
    Pow(Expr, i32),
    Exp(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
}

/// Immutable, cheaply clonable expression handle. `Clone` is an `Arc` bump,
/// so shared subtrees stay shared through differentiation and simplification.
#[derive(Clone, Debug)]
pub struct Expr(Arc<ExprNode>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

/// Above this many cached entries the memo tables reset; keeps long batch
/// runs bounded without giving up sharing within a computation.
const CACHE_CAP: usize = 1_500_000;

thread_local! {
    /// simplify memo; stores the key expression alongside the result so the
    /// pointed-to node cannot be freed and its address recycled.
    static SIMPLIFY_CACHE: std::cell::RefCell<HashMap<*const ExprNode, (Expr, Expr)>> =
        std::cell::RefCell::new(HashMap::new());
    static DIFF_CACHE: std::cell::RefCell<HashMap<(*const ExprNode, usize), (Expr, Expr)>> =
        std::cell::RefCell::new(HashMap::new());
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("logarithm of non-positive value in `{0}`")]
    LogDomain(String),
    #[error("zero raised to a negative power in `{0}`")]
    ZeroToNegativePower(String),
    #[error("point has {got} coordinates, expression uses coordinate index {index}")]
    PointDimension { index: usize, got: usize },
}

impl Expr {
    pub fn node(&self) -> &ExprNode {
        &self.0
    }

    pub fn constant(n: Number) -> Expr {
        Expr(Arc::new(ExprNode::Const(n)))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Number::int(n))
    }

    pub fn rat(num: i64, den: i64) -> Expr {
        Expr::constant(Number::rat(num, den))
    }

    pub fn float(f: f64) -> Expr {
        Expr::constant(Number::Float(f))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn coord(i: usize) -> Expr {
        Expr(Arc::new(ExprNode::Coord(i)))
    }

    pub fn as_const(&self) -> Option<Number> {
        match self.node() {
            ExprNode::Const(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), ExprNode::Const(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), ExprNode::Const(n) if n.is_one())
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return Expr::constant(a.add(b));
        }
        Expr(Arc::new(ExprNode::Add(self.clone(), other.clone())))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.neg();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return Expr::constant(a.sub(b));
        }
        if self == other {
            return Expr::zero();
        }
        Expr(Arc::new(ExprNode::Sub(self.clone(), other.clone())))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return Expr::constant(a.mul(b));
        }
        if matches!(self.as_const(), Some(n) if n == Number::int(-1)) {
            return other.neg();
        }
        if matches!(other.as_const(), Some(n) if n == Number::int(-1)) {
            return self.neg();
        }
        if let ExprNode::Neg(a) = self.node() {
            return a.mul(other).neg();
        }
        if let ExprNode::Neg(b) = other.node() {
            return self.mul(b).neg();
        }
        // constants lead a product, matching the printed grammar
        if other.as_const().is_some() && self.as_const().is_none() {
            return Expr(Arc::new(ExprNode::Mul(other.clone(), self.clone())));
        }
        Expr(Arc::new(ExprNode::Mul(self.clone(), other.clone())))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if !b.is_zero() {
                return Expr::constant(a.div(b));
            }
        }
        if let Some(b) = other.as_const() {
            if !b.is_zero() {
                return Expr::constant(Number::int(1).div(b)).mul(self);
            }
        }
        Expr(Arc::new(ExprNode::Div(self.clone(), other.clone())))
    }

    pub fn neg(&self) -> Expr {
        if let Some(n) = self.as_const() {
            return Expr::constant(n.neg());
        }
        if let ExprNode::Neg(inner) = self.node() {
            return inner.clone();
        }
        Expr(Arc::new(ExprNode::Neg(self.clone())))
    }

    pub fn powi(&self, exp: i32) -> Expr {
        if exp == 0 {
            return Expr::one();
        }
        if exp == 1 {
            return self.clone();
        }
        if self.is_one() {
            return Expr::one();
        }
        if let Some(n) = self.as_const() {
            if let Some(v) = n.powi(exp) {
                return Expr::constant(v);
            }
        }
        if let ExprNode::Pow(base, inner) = self.node() {
            if let Some(total) = inner.checked_mul(exp) {
                return base.powi(total);
            }
        }
        Expr(Arc::new(ExprNode::Pow(self.clone(), exp)))
    }

    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Expr(Arc::new(ExprNode::Exp(self.clone())))
    }

    pub fn ln(&self) -> Expr {
        if self.is_one() {
            return Expr::zero();
        }
        Expr(Arc::new(ExprNode::Ln(self.clone())))
    }

    pub fn sin(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        Expr(Arc::new(ExprNode::Sin(self.clone())))
    }

    pub fn cos(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        Expr(Arc::new(ExprNode::Cos(self.clone())))
    }

    /// Exact partial derivative with respect to coordinate `i`. Applying it
    /// repeatedly yields higher derivatives; nested brackets need order two.
    ///
    /// Results are memoized per node, keeping the keys alive so pointer
    /// identity stays sound.
    pub fn diff(&self, i: usize) -> Expr {
        let key = (Arc::as_ptr(&self.0), i);
        if let Some(hit) = DIFF_CACHE.with(|c| c.borrow().get(&key).map(|(_, v)| v.clone())) {
            return hit;
        }
        let out = self.diff_uncached(i);
        DIFF_CACHE.with(|c| {
            let mut map = c.borrow_mut();
            if map.len() >= CACHE_CAP {
                map.clear();
            }
            map.insert(key, (self.clone(), out.clone()));
        });
        out
    }

    fn diff_uncached(&self, i: usize) -> Expr {
        match self.node() {
            ExprNode::Const(_) => Expr::zero(),
            ExprNode::Coord(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            ExprNode::Neg(a) => a.diff(i).neg(),
            ExprNode::Add(a, b) => a.diff(i).add(&b.diff(i)),
            ExprNode::Sub(a, b) => a.diff(i).sub(&b.diff(i)),
            ExprNode::Mul(a, b) => a.diff(i).mul(b).add(&a.mul(&b.diff(i))),
            ExprNode::Div(a, b) => {
                let num = a.diff(i).mul(b).sub(&a.mul(&b.diff(i)));
                num.div(&b.powi(2))
            }
            ExprNode::Pow(a, n) => Expr::int(*n as i64).mul(&a.powi(n - 1)).mul(&a.diff(i)),
            ExprNode::Exp(a) => self.mul(&a.diff(i)),
            ExprNode::Ln(a) => a.diff(i).div(a),
            ExprNode::Sin(a) => a.cos().mul(&a.diff(i)),
            ExprNode::Cos(a) => a.sin().neg().mul(&a.diff(i)),
        }
    }

    /// Evaluate at a point. Shared subtrees are evaluated once per call.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let mut cache: HashMap<*const ExprNode, f64> = HashMap::new();
        self.eval_cached(point, &mut cache)
    }

    fn eval_cached(
        &self,
        point: &[f64],
        cache: &mut HashMap<*const ExprNode, f64>,
    ) -> Result<f64, EvalError> {
        let key = Arc::as_ptr(&self.0);
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let value = match self.node() {
            ExprNode::Const(n) => n.to_f64(),
            ExprNode::Coord(i) => *point.get(*i).ok_or(EvalError::PointDimension {
                index: *i,
                got: point.len(),
            })?,
            ExprNode::Neg(a) => -a.eval_cached(point, cache)?,
            ExprNode::Add(a, b) => a.eval_cached(point, cache)? + b.eval_cached(point, cache)?,
            ExprNode::Sub(a, b) => a.eval_cached(point, cache)? - b.eval_cached(point, cache)?,
            ExprNode::Mul(a, b) => a.eval_cached(point, cache)? * b.eval_cached(point, cache)?,
            ExprNode::Div(a, b) => {
                let den = b.eval_cached(point, cache)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero(b.to_string()));
                }
                a.eval_cached(point, cache)? / den
            }
            ExprNode::Pow(a, n) => {
                let base = a.eval_cached(point, cache)?;
                if base == 0.0 && *n < 0 {
                    return Err(EvalError::ZeroToNegativePower(a.to_string()));
                }
                base.powi(*n)
            }
            ExprNode::Exp(a) => a.eval_cached(point, cache)?.exp(),
            ExprNode::Ln(a) => {
                let v = a.eval_cached(point, cache)?;
                if v <= 0.0 {
                    return Err(EvalError::LogDomain(a.to_string()));
                }
                v.ln()
            }
            ExprNode::Sin(a) => a.eval_cached(point, cache)?.sin(),
            ExprNode::Cos(a) => a.eval_cached(point, cache)?.cos(),
        };
        cache.insert(key, value);
        Ok(value)
    }

    /// Value-preserving rewrite: constant folding, identity and annihilator
    /// rules, flattening of nested sums and products with like-term and
    /// like-monomial collection (polynomial parts expand and cancel), and
    /// canonical term ordering. No trigonometric or exponential rewriting.
    ///
    /// Results are memoized per node across calls; shared subtrees simplify
    /// once per process.
    pub fn simplify(&self) -> Expr {
        let key = Arc::as_ptr(&self.0);
        if let Some(hit) = SIMPLIFY_CACHE.with(|c| c.borrow().get(&key).map(|(_, v)| v.clone())) {
            return hit;
        }
        let out = match self.node() {
            ExprNode::Const(_) | ExprNode::Coord(_) => self.clone(),
            ExprNode::Add(..) | ExprNode::Sub(..) | ExprNode::Neg(_) => {
                let mut terms: HashMap<Expr, Number> = HashMap::new();
                let mut konst = Number::int(0);
                collect_sum(self, false, &mut terms, &mut konst);
                rebuild_sum(terms, konst)
            }
            ExprNode::Mul(..) | ExprNode::Div(..) | ExprNode::Pow(..) => {
                let mut factors: HashMap<Expr, i32> = HashMap::new();
                let mut coef = Number::int(1);
                let mut residual_div: Vec<(Expr, bool)> = Vec::new();
                collect_product(self, 1, &mut factors, &mut coef, &mut residual_div);
                rebuild_product(factors, coef, residual_div)
            }
            ExprNode::Exp(a) => a.simplify().exp(),
            ExprNode::Ln(a) => a.simplify().ln(),
            ExprNode::Sin(a) => a.simplify().sin(),
            ExprNode::Cos(a) => a.simplify().cos(),
        };
        SIMPLIFY_CACHE.with(|c| {
            let mut map = c.borrow_mut();
            if map.len() >= CACHE_CAP {
                map.clear();
            }
            map.insert(key, (self.clone(), out.clone()));
        });
        out
    }

    /// Total order used to canonicalize sums and products.
    fn rank(&self) -> u8 {
        match self.node() {
            ExprNode::Const(_) => 0,
            ExprNode::Coord(_) => 1,
            ExprNode::Pow(..) => 2,
            ExprNode::Exp(_) => 3,
            ExprNode::Ln(_) => 4,
            ExprNode::Sin(_) => 5,
            ExprNode::Cos(_) => 6,
            ExprNode::Neg(_) => 7,
            ExprNode::Mul(..) => 8,
            ExprNode::Div(..) => 9,
            ExprNode::Add(..) => 10,
            ExprNode::Sub(..) => 11,
        }
    }

    fn cmp_expr(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        match (self.node(), other.node()) {
            (ExprNode::Const(a), ExprNode::Const(b)) => a.cmp(b),
            (ExprNode::Coord(a), ExprNode::Coord(b)) => a.cmp(b),
            (ExprNode::Pow(a, m), ExprNode::Pow(b, n)) => a.cmp_expr(b).then(m.cmp(n)),
            (ExprNode::Neg(a), ExprNode::Neg(b))
            | (ExprNode::Exp(a), ExprNode::Exp(b))
            | (ExprNode::Ln(a), ExprNode::Ln(b))
            | (ExprNode::Sin(a), ExprNode::Sin(b))
            | (ExprNode::Cos(a), ExprNode::Cos(b)) => a.cmp_expr(b),
            (ExprNode::Add(a1, a2), ExprNode::Add(b1, b2))
            | (ExprNode::Sub(a1, a2), ExprNode::Sub(b1, b2))
            | (ExprNode::Mul(a1, a2), ExprNode::Mul(b1, b2))
            | (ExprNode::Div(a1, a2), ExprNode::Div(b1, b2)) => {
                a1.cmp_expr(b1).then_with(|| a2.cmp_expr(b2))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

/// Accumulate `sign * e` into the running sum, flattening nested +/-/neg and
/// splitting constant coefficients off each term.
fn collect_sum(e: &Expr, negate: bool, terms: &mut HashMap<Expr, Number>, konst: &mut Number) {
    match e.node() {
        ExprNode::Add(a, b) => {
            collect_sum(a, negate, terms, konst);
            collect_sum(b, negate, terms, konst);
        }
        ExprNode::Sub(a, b) => {
            collect_sum(a, negate, terms, konst);
            collect_sum(b, !negate, terms, konst);
        }
        ExprNode::Neg(a) => collect_sum(a, !negate, terms, konst),
        _ => {
            let s = e.simplify();
            // simplification may expose a new sum (e.g. a product that folded
            // to a single term of a sum); flatten once more in that case
            match s.node() {
                ExprNode::Add(..) | ExprNode::Sub(..) | ExprNode::Neg(_) => {
                    collect_sum(&s.clone(), negate, terms, konst)
                }
                _ => {
                    let (mut coef, core) = split_term(&s);
                    if negate {
                        coef = coef.neg();
                    }
                    if core.is_one() {
                        *konst = konst.add(coef);
                        return;
                    }
                    let slot = terms.entry(core).or_insert(Number::int(0));
                    *slot = slot.add(coef);
                }
            }
        }
    }
}

/// Split a simplified term into `(coefficient, coefficient-free core)`, so
/// like terms collect no matter where the scalar sits (`2*x`, `(-1)/e`,
/// `-(x/3)` all normalize). Plain constants become `(c, 1)`.
fn split_term(e: &Expr) -> (Number, Expr) {
    let monomials = to_monomials(e);
    if monomials.len() == 1 {
        let (coef, factors) = monomials.into_iter().next().expect("single monomial");
        (coef, monomials_to_expr(vec![(Number::int(1), factors)]))
    } else {
        (Number::int(1), e.clone())
    }
}

fn rebuild_sum(terms: HashMap<Expr, Number>, konst: Number) -> Expr {
    let mut terms: Vec<(Expr, Number)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    terms.sort_by(|a, b| a.0.cmp_expr(&b.0));
    let mut acc = if konst.is_zero() {
        None
    } else {
        Some(Expr::constant(konst))
    };
    for (term, coef) in terms {
        let signed = coef.is_negative();
        let magnitude = if signed { coef.neg() } else { coef };
        let piece = if magnitude.is_one() {
            term.clone()
        } else {
            Expr::constant(magnitude).mul(&term)
        };
        acc = Some(match acc {
            // a leading negative term keeps its sign inside the constant,
            // so `-1/2*x + ...` rather than `-(1/2*x) + ...`
            None if signed && !magnitude.is_one() => Expr::constant(coef).mul(&term),
            None if signed => piece.neg(),
            None => piece,
            Some(sum) => {
                if signed {
                    sum.sub(&piece)
                } else {
                    sum.add(&piece)
                }
            }
        });
    }
    acc.unwrap_or_else(Expr::zero)
}

/// Accumulate `e^exp` into the running product. Divisions by non-constant
/// expressions are kept as residual factors so no singular locus is dropped.
fn collect_product(
    e: &Expr,
    exp: i32,
    factors: &mut HashMap<Expr, i32>,
    coef: &mut Number,
    residual_div: &mut Vec<(Expr, bool)>,
) {
    match e.node() {
        ExprNode::Mul(a, b) => {
            collect_product(a, exp, factors, coef, residual_div);
            collect_product(b, exp, factors, coef, residual_div);
        }
        ExprNode::Div(a, b) => {
            collect_product(a, exp, factors, coef, residual_div);
            collect_product(b, -exp, factors, coef, residual_div);
        }
        ExprNode::Pow(a, n) => match n.checked_mul(exp) {
            Some(total) => collect_product(a, total, factors, coef, residual_div),
            None => push_factor(e.simplify(), exp, factors, coef),
        },
        ExprNode::Neg(a) => {
            if exp % 2 != 0 {
                *coef = coef.neg();
            }
            collect_product(a, exp, factors, coef, residual_div);
        }
        _ => {
            let s = e.simplify();
            match s.node() {
                ExprNode::Mul(..) | ExprNode::Div(..) | ExprNode::Pow(..) | ExprNode::Neg(_) => {
                    collect_product(&s.clone(), exp, factors, coef, residual_div)
                }
                ExprNode::Const(n) => match n.powi(exp) {
                    Some(v) => *coef = coef.mul(v),
                    None => residual_div.push((s.clone(), exp < 0)),
                },
                _ => push_factor(s, exp, factors, coef),
            }
        }
    }
}

fn push_factor(base: Expr, exp: i32, factors: &mut HashMap<Expr, i32>, coef: &mut Number) {
    if base.is_one() {
        return;
    }
    if base.is_zero() {
        if exp > 0 {
            *coef = Number::int(0);
        }
        return;
    }
    *factors.entry(base).or_insert(0) += exp;
}

/// A product of atomic (non-sum) bases with integer exponents and a scalar
/// coefficient; the canonical term shape after expansion.
type Monomial = (Number, Vec<(Expr, i32)>);

/// Guard against pathological expansion; above this many *distinct*
/// monomials the product is rebuilt unexpanded. Like monomials combine
/// during accumulation, so this bounds live size, not the raw term count.
const EXPANSION_CAP: usize = 60_000;

fn monomial_key(factors: &[(Expr, i32)]) -> Vec<(Expr, i32)> {
    let mut v = factors.to_vec();
    v.sort_by(|a, b| a.0.cmp_expr(&b.0));
    v
}

fn mul_monomial(a: &Monomial, b: &Monomial) -> Monomial {
    let coef = a.0.mul(b.0);
    let mut factors = a.1.clone();
    for (base, exp) in &b.1 {
        if let Some(slot) = factors.iter_mut().find(|(fb, _)| fb == base) {
            slot.1 += exp;
        } else {
            factors.push((base.clone(), *exp));
        }
    }
    factors.retain(|(_, e)| *e != 0);
    (coef, factors)
}

fn mul_monomial_lists(a: &[Monomial], b: &[Monomial]) -> Option<Vec<Monomial>> {
    let mut map: HashMap<Vec<(Expr, i32)>, Number> = HashMap::new();
    for ma in a {
        for mb in b {
            let (coef, factors) = mul_monomial(ma, mb);
            let entry = map.entry(monomial_key(&factors)).or_insert(Number::int(0));
            *entry = entry.add(coef);
            if map.len() > EXPANSION_CAP {
                return None;
            }
        }
    }
    Some(
        map.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(f, c)| (c, f))
            .collect(),
    )
}

/// Decompose a simplified expression into monomials over atomic bases.
/// `Div` nodes contribute their denominators as negative-exponent factors.
fn to_monomials(e: &Expr) -> Vec<Monomial> {
    fn term_to_monomial(e: &Expr, exp: i32, m: &mut Monomial) {
        match e.node() {
            ExprNode::Const(n) => match n.powi(exp) {
                Some(v) => m.0 = m.0.mul(v),
                None => m.1.push((e.clone(), exp)),
            },
            ExprNode::Neg(a) => {
                if exp % 2 != 0 {
                    m.0 = m.0.neg();
                }
                term_to_monomial(a, exp, m);
            }
            ExprNode::Mul(a, b) => {
                term_to_monomial(a, exp, m);
                term_to_monomial(b, exp, m);
            }
            ExprNode::Div(a, b) => {
                term_to_monomial(a, exp, m);
                term_to_monomial(b, -exp, m);
            }
            ExprNode::Pow(a, n) => match n.checked_mul(exp) {
                Some(total) => term_to_monomial(a, total, m),
                None => m.1.push((e.clone(), exp)),
            },
            _ => m.1.push((e.clone(), exp)),
        }
    }
    fn walk(e: &Expr, negate: bool, out: &mut Vec<Monomial>) {
        match e.node() {
            ExprNode::Add(a, b) => {
                walk(a, negate, out);
                walk(b, negate, out);
            }
            ExprNode::Sub(a, b) => {
                walk(a, negate, out);
                walk(b, !negate, out);
            }
            ExprNode::Neg(a) => walk(a, !negate, out),
            _ => {
                let mut m: Monomial = (Number::int(if negate { -1 } else { 1 }), Vec::new());
                term_to_monomial(e, 1, &mut m);
                out.push(m);
            }
        }
    }
    let mut out = Vec::new();
    walk(e, false, &mut out);
    out
}

fn monomials_to_expr(mut monomials: Vec<Monomial>) -> Expr {
    for m in &mut monomials {
        m.1 = monomial_key(&m.1);
    }
    monomials.sort_by(|a, b| {
        let mut it_a = a.1.iter();
        let mut it_b = b.1.iter();
        loop {
            match (it_a.next(), it_b.next()) {
                (None, None) => return a.0.cmp(&b.0),
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => {
                    let c = x.0.cmp_expr(&y.0).then(x.1.cmp(&y.1));
                    if c != Ordering::Equal {
                        return c;
                    }
                }
            }
        }
    });
    let mut acc: Option<Expr> = None;
    for (coef, factors) in monomials {
        if coef.is_zero() {
            continue;
        }
        let signed = coef.is_negative();
        let magnitude = if signed { coef.neg() } else { coef };
        let mut num = Expr::one();
        let mut den = Expr::one();
        for (base, exp) in &factors {
            if *exp > 0 {
                num = num.mul(&base.powi(*exp));
            } else {
                den = den.mul(&base.powi(-exp));
            }
        }
        let body = num.div(&den);
        let piece = if magnitude.is_one() && !body.is_one() {
            body.clone()
        } else {
            Expr::constant(magnitude).mul(&body)
        };
        acc = Some(match acc {
            None if signed && !(magnitude.is_one() && !body.is_one()) => {
                Expr::constant(coef).mul(&body)
            }
            None if signed => piece.neg(),
            None => piece,
            Some(sum) => {
                if signed {
                    sum.sub(&piece)
                } else {
                    sum.add(&piece)
                }
            }
        });
    }
    acc.unwrap_or_else(Expr::zero)
}

fn rebuild_product(
    factors: HashMap<Expr, i32>,
    coef: Number,
    residual_div: Vec<(Expr, bool)>,
) -> Expr {
    if coef.is_zero() {
        return Expr::zero();
    }
    let mut factors: Vec<(Expr, i32)> = factors.into_iter().filter(|(_, e)| *e != 0).collect();
    factors.sort_by(|a, b| a.0.cmp_expr(&b.0));

    // expand the positive-power part across sums, collecting like monomials;
    // denominators stay unexpanded so no singular locus moves
    let mut num_monomials: Option<Vec<Monomial>> = Some(vec![(coef, Vec::new())]);
    let mut den = Expr::one();
    for (base, exp) in &factors {
        if *exp > 0 {
            let base_monomials = to_monomials(base);
            for _ in 0..*exp {
                num_monomials = match num_monomials {
                    Some(acc) => mul_monomial_lists(&acc, &base_monomials),
                    None => None,
                };
            }
        } else {
            den = den.mul(&base.powi(-exp));
        }
    }
    for (e, inverted) in &residual_div {
        if *inverted {
            den = den.mul(e);
        } else {
            num_monomials = match num_monomials {
                Some(acc) => mul_monomial_lists(&acc, &[(Number::int(1), vec![(e.clone(), 1)])]),
                None => None,
            };
        }
    }
    match num_monomials {
        Some(monomials) => monomials_to_expr(monomials).div(&den),
        None => {
            // expansion would blow past the cap: rebuild unexpanded
            let mut num = Expr::one();
            for (base, exp) in &factors {
                if *exp > 0 {
                    num = num.mul(&base.powi(*exp));
                }
            }
            for (e, inverted) in &residual_div {
                if !*inverted {
                    num = num.mul(e);
                }
            }
            Expr::constant(coef).mul(&num).div(&den)
        }
    }
}

// ---------------------------------------------------------------------------
// printing

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

/// Precedence levels: 0 sum, 1 product, 2 unary minus, 3 power, 4 atom.
fn precedence(e: &Expr) -> u8 {
    match e.node() {
        ExprNode::Add(..) | ExprNode::Sub(..) => 0,
        ExprNode::Mul(..) | ExprNode::Div(..) => 1,
        ExprNode::Neg(_) => 2,
        ExprNode::Pow(..) => 3,
        ExprNode::Const(n) => {
            if n.is_negative() || matches!(n, Number::Rat(_, d) if *d != 1) {
                1
            } else {
                4
            }
        }
        _ => 4,
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
    let prec = precedence(e);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match e.node() {
        ExprNode::Const(Number::Rat(n, 1)) => write!(f, "{n}")?,
        ExprNode::Const(Number::Rat(n, d)) => write!(f, "{n}/{d}")?,
        ExprNode::Const(Number::Float(v)) => write!(f, "{v}")?,
        ExprNode::Coord(i) => write!(f, "#{i}")?,
        ExprNode::Neg(a) => {
            write!(f, "-")?;
            write_expr(a, f, 2)?;
        }
        ExprNode::Add(a, b) => {
            write_expr(a, f, 0)?;
            write!(f, " + ")?;
            write_expr(b, f, 1)?;
        }
        ExprNode::Sub(a, b) => {
            write_expr(a, f, 0)?;
            write!(f, " - ")?;
            write_expr(b, f, 1)?;
        }
        ExprNode::Mul(a, b) => {
            write_expr(a, f, 1)?;
            write!(f, "*")?;
            write_expr(b, f, 2)?;
        }
        ExprNode::Div(a, b) => {
            write_expr(a, f, 1)?;
            write!(f, "/")?;
            write_expr(b, f, 2)?;
        }
        ExprNode::Pow(a, n) => {
            write_expr(a, f, 4)?;
            write!(f, "^{n}")?;
        }
        ExprNode::Exp(a) => write!(f, "exp({a})")?,
        ExprNode::Ln(a) => write!(f, "ln({a})")?,
        ExprNode::Sin(a) => write!(f, "sin({a})")?,
        ExprNode::Cos(a) => write!(f, "cos({a})")?,
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

/// Render with coordinate names instead of `#i` placeholders.
pub fn render(e: &Expr, names: &[String]) -> String {
    struct Renderer<'a>(&'a Expr, &'a [String]);
    impl fmt::Display for Renderer<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_named(self.0, self.1, f, 0)
        }
    }
    Renderer(e, names).to_string()
}

fn write_named(
    e: &Expr,
    names: &[String],
    f: &mut fmt::Formatter<'_>,
    min_prec: u8,
) -> fmt::Result {
    let prec = precedence(e);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match e.node() {
        ExprNode::Const(Number::Rat(n, 1)) => write!(f, "{n}")?,
        ExprNode::Const(Number::Rat(n, d)) => write!(f, "{n}/{d}")?,
        ExprNode::Const(Number::Float(v)) => write!(f, "{v}")?,
        ExprNode::Coord(i) => match names.get(*i) {
            Some(name) => write!(f, "{name}")?,
            None => write!(f, "#{i}")?,
        },
        ExprNode::Neg(a) => {
            write!(f, "-")?;
            write_named(a, names, f, 2)?;
        }
        ExprNode::Add(a, b) => {
            write_named(a, names, f, 0)?;
            write!(f, " + ")?;
            write_named(b, names, f, 1)?;
        }
        ExprNode::Sub(a, b) => {
            write_named(a, names, f, 0)?;
            write!(f, " - ")?;
            write_named(b, names, f, 1)?;
        }
        ExprNode::Mul(a, b) => {
            write_named(a, names, f, 1)?;
            write!(f, "*")?;
            write_named(b, names, f, 2)?;
        }
        ExprNode::Div(a, b) => {
            write_named(a, names, f, 1)?;
            write!(f, "/")?;
            write_named(b, names, f, 2)?;
        }
        ExprNode::Pow(a, n) => {
            write_named(a, names, f, 4)?;
            write!(f, "^{n}")?;
        }
        ExprNode::Exp(a) => {
            write!(f, "exp(")?;
            write_named(a, names, f, 0)?;
            write!(f, ")")?;
        }
        ExprNode::Ln(a) => {
            write!(f, "ln(")?;
            write_named(a, names, f, 0)?;
            write!(f, ")")?;
        }
        ExprNode::Sin(a) => {
            write!(f, "sin(")?;
            write_named(a, names, f, 0)?;
            write!(f, ")")?;
        }
        ExprNode::Cos(a) => {
            write!(f, "cos(")?;
            write_named(a, names, f, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

// operator sugar

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $ctor:ident) => {
        impl std::ops::$trait for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(&self, rhs)
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::coord(0)
    }

    fn y() -> Expr {
        Expr::coord(1)
    }

    #[test]
    fn product_rule() {
        let e = x().mul(&y());
        assert_eq!(e.diff(0), y());
        assert_eq!(e.diff(1), x());
    }

    #[test]
    fn chain_rule_exp() {
        // d/dt exp(2t) = 2 exp(2t)
        let t = Expr::coord(0);
        let e = Expr::int(2).mul(&t).exp();
        let d = e.diff(0).simplify();
        assert_eq!(d, Expr::int(2).mul(&Expr::int(2).mul(&t).exp()));
    }

    #[test]
    fn mixed_partials_commute_pointwise() {
        let e = x().mul(&y()).sin();
        let dxy = e.diff(0).diff(1);
        let dyx = e.diff(1).diff(0);
        for k in 0..20 {
            let p = [0.1 * k as f64 - 1.0, 0.07 * k as f64 - 0.5];
            let a = dxy.eval(&p).unwrap();
            let b = dyx.eval(&p).unwrap();
            assert!((a - b).abs() < 1e-12, "mixed partials differ: {a} vs {b}");
        }
    }

    #[test]
    fn annihilator_and_identity_rules() {
        let e = Expr::zero().mul(&x().exp()).add(&y());
        assert_eq!(e.simplify(), y());
        let e2 = x().add(&Expr::zero()).mul(&Expr::one().mul(&y()));
        assert_eq!(e2.simplify(), x().mul(&y()));
    }

    #[test]
    fn like_terms_collect() {
        // x + x - 2x = 0
        let e = x().add(&x()).sub(&Expr::int(2).mul(&x()));
        assert!(e.simplify().is_zero());
        // e^x - e^x = 0 without any exponential rewriting
        let e2 = x().exp().sub(&x().exp());
        assert!(e2.simplify().is_zero());
    }

    #[test]
    fn simplify_preserves_value() {
        let e = x()
            .powi(2)
            .mul(&y().div(&x()))
            .add(&x().mul(&y()))
            .sub(&x().sin().mul(&Expr::zero()));
        let s = e.simplify();
        for k in 1..15 {
            let p = [0.3 * k as f64, -0.2 * k as f64 + 0.05];
            let a = e.eval(&p).unwrap();
            let b = s.eval(&p).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn eval_singularities() {
        let e = Expr::one().div(&x());
        assert!(matches!(e.eval(&[0.0]), Err(EvalError::DivisionByZero(_))));
        let l = x().ln();
        assert!(matches!(l.eval(&[-1.0]), Err(EvalError::LogDomain(_))));
        assert!(l.eval(&[2.0]).is_ok());
    }

    #[test]
    fn arithmetic_eval() {
        // x^2 + y at (2,1) = 5
        let e = x().powi(2).add(&y());
        assert_eq!(e.eval(&[2.0, 1.0]).unwrap(), 5.0);
    }

    #[test]
    fn expressions_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Expr>();
    }

    #[test]
    fn rational_constants_stay_exact() {
        let half = Expr::int(1).div(&Expr::int(2));
        assert_eq!(half.as_const(), Some(Number::Rat(1, 2)));
        let sum = half.add(&Expr::rat(1, 3));
        assert_eq!(sum.as_const(), Some(Number::Rat(5, 6)));
    }

    #[test]
    fn diff_commutes_with_simplify_pointwise() {
        let e = x()
            .powi(3)
            .mul(&y().cos())
            .add(&x().div(&y().add(&Expr::int(2))));
        let a = e.diff(0).simplify();
        let b = e.simplify().diff(0);
        for k in 0..20 {
            let p = [0.17 * k as f64 - 1.0, 0.09 * k as f64 - 0.6];
            let va = a.eval(&p).unwrap();
            let vb = b.eval(&p).unwrap();
            assert!((va - vb).abs() < 1e-12 * (1.0 + va.abs()));
        }
    }
}
