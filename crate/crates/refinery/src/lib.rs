//! Front end for refinery-core: the `.rfn` format, elaboration, code
//! emission, the parallel verifier and the command-line driver.

pub mod ast;
pub mod cli;
pub mod elab;
pub mod emit;
pub mod lemmas;
pub mod lex;
pub mod parse;
pub mod run;
