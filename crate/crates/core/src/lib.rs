//! Session-behaviour contracts: syntax, transition systems, skp-compliance
//! and the subbehaviour preorder.

pub mod compliance;
pub mod lts;
pub mod preorder;
pub mod product;
pub mod syntax;

mod error;

pub use error::{Error, Limits};

use syntax::SessionBehaviour;

/// Parses and validates one behaviour.
pub fn behaviour(text: &str) -> Result<SessionBehaviour, Error> {
    Ok(syntax::validate(&syntax::parse(text)?)?)
}
