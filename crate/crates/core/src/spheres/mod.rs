//! Star-shaped embeddings of `S^{k−1}` in `R^k` (`k = 2, 3`) given as radial
//! graphs over the unit sphere, with first derivatives and the radial
//! isotopy to the round sphere.

mod embedding;
pub mod expr;

use alloc::vec::Vec;

use thiserror::Error;

pub use embedding::{RadialEmbedding, RadialShape, SpherePoint, TangentFrame, R_FLOOR};
pub use expr::{parse_radial, ParseError, RadialExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphereError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("radial shape is not available for k = {k} (or has invalid parameters)")]
    UnsupportedShape { k: usize },
    #[error("point has dimension {got}, embedding expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("radius {radius:e} at u = {u:?} is below the floor")]
    DegenerateRadius { u: Vec<f64>, radius: f64 },
    #[error("isotopy radius {radius:e} at u = {u:?}, t = {t} is not positive")]
    PositivityViolation { u: Vec<f64>, t: f64, radius: f64 },
    #[error("isotopy parameter {0} outside [0, 1]")]
    IsotopyRange(f64),
}
