//! Coordinate charts and sample points.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{parse_expr, Expr, ParseError};

#[derive(Debug, PartialEq)]
struct ChartData {
    names: Vec<String>,
    /// Expressions whose zero sets are avoided when sampling points.
    excluded: Vec<Expr>,
}

/// A coordinate chart: a dimension, named coordinates, and optional excluded
/// loci. Cloning is cheap; two charts are equal when their names and excluded
/// loci agree, so independently constructed equal charts interoperate.
#[derive(Clone, Debug)]
pub struct Chart(Arc<ChartData>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Chart {}

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("chart needs at least one coordinate")]
    Empty,
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("coordinate name `{0}` is not a valid identifier")]
    BadName(String),
}

impl Chart {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Chart, ChartError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ChartError::Empty);
        }
        for name in &names {
            let mut chars = name.chars();
            let head_ok = chars
                .next()
                .map(|c| c.is_ascii_alphabetic() || c == '_')
                .unwrap_or(false);
            if !head_ok || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ChartError::BadName(name.clone()));
            }
            if matches!(name.as_str(), "exp" | "ln" | "sin" | "cos") {
                return Err(ChartError::BadName(name.clone()));
            }
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(ChartError::DuplicateName(name.clone()));
            }
        }
        Ok(Chart(Arc::new(ChartData {
            names,
            excluded: Vec::new(),
        })))
    }

    pub fn with_excluded(&self, excluded: Vec<Expr>) -> Chart {
        Chart(Arc::new(ChartData {
            names: self.0.names.clone(),
            excluded,
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn excluded(&self) -> &[Expr] {
        &self.0.excluded
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        parse_expr(text, &self.0.names)
    }

    pub fn render(&self, e: &Expr) -> String {
        crate::expr::render(e, &self.0.names)
    }
}

/// A concrete evaluation point on a chart.
pub type Point = Vec<f64>;
