#![no_std]
extern crate alloc;

pub mod algebra;
pub mod code;
pub mod enumerate;
pub mod error;
pub mod eval;
pub mod expr;
pub mod families;
pub mod refine;
pub mod typing;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
