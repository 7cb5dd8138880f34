//! Probability logic over Harsanyi type spaces.

pub mod exactnum;
pub mod formula;
pub mod models;
pub mod canon;
pub mod rewrite;
pub mod bisequence;
pub mod algebra;
pub mod gen;
