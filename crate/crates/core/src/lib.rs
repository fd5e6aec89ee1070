pub mod combinatorics;
pub mod ascent;
pub mod cone;
pub mod divisor;
pub mod effective;
pub mod elimination;
pub mod error;
pub mod io;
pub mod pullback;
pub mod pipeline;
pub mod rational;
pub mod simplex;

pub use error::{Error, Result};
