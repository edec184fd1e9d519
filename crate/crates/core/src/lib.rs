pub mod badic;
pub mod bernoulli;
pub mod bounds;
pub mod coefficients;
pub mod error;
pub mod exec;
pub mod functions;
pub mod piecewise;
pub mod quadrature;
pub mod sweep;
pub mod walsh;
pub mod wfunc;
