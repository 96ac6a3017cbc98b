pub mod rational;
pub mod model;
pub mod linsolve;
pub(crate) mod graph_util;
pub mod expectation;
pub mod worst_case;
pub mod ec;
pub mod eval;
pub mod sim;
pub mod synthesis;
pub mod io;
pub mod bwc_sp;
pub mod bwc_mp;
pub mod cli;
