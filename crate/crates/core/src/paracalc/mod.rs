//! Discrete paradifferential calculus on periodic grids.

mod check;
mod cutoff;
mod defects;
mod dyadic;
mod grid;
mod operator;
mod symbol;

pub use check::*;
pub use cutoff::*;
pub use defects::*;
pub use dyadic::*;
pub use grid::*;
pub use operator::*;
pub use symbol::*;
