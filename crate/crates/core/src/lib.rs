//! Typestates with internal mutable state, mixed sessions and declared
//! action ratios.
//!
//! The crate parses `.tsp` protocol files ([`dsl`]), checks them
//! ([`wellformed`]), executes them ([`semantics`]), monitors observed
//! traces against the declared ratios ([`monitor`]) and simulates two
//! protocols over a lossy network to produce such traces ([`sim`]).

pub mod bundled;
pub mod cli;
pub mod dsl;
pub mod expr;
pub mod model;
pub mod monitor;
pub mod semantics;
pub mod sim;
pub mod wellformed;

pub use dsl::{parse_protocol, serialize_protocol, ParseError, SourceSpan};
pub use model::{
    ActionSignature, Branch, Destination, Direction, InternalStateDecl, ModelError, ProtocolSpec, Ratio, StateBody,
    TypeRef, Typestate, Value,
};
