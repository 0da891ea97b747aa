pub mod compile;
pub mod dot;
pub mod fixtures;
pub mod formula;
pub mod model;
pub mod semilattice;
pub mod synth;
pub mod vts;
#[cfg(test)]
pub(crate) mod testutil;
pub mod pipeline;
pub mod runtime;
pub mod eval;
