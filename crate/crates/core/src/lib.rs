//! Parsing, checking, expansion, glue generation and execution of BIP
//! component models with parameterised architecture diagrams.

pub mod behavior;
pub mod diagram;
pub mod dsl;
pub mod engine;
pub mod glue;
pub mod interaction;
pub mod macros;
pub mod model;
pub mod pil;

pub use model::*;
