use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A message name. Polarity is carried by [`ActionLabel`], never by the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionName(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid action name `{0}`")]
pub struct InvalidName(pub String);

pub(crate) const RESERVED: &[&str] = &["rec"];

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl ActionName {
    pub fn new(name: &str) -> Result<Self, InvalidName> {
        let mut chars = name.chars();
        let valid = chars.next().is_some_and(is_ident_start)
            && chars.all(is_ident_continue)
            && !RESERVED.contains(&name);
        if valid {
            Ok(ActionName(Arc::from(name)))
        } else {
            Err(InvalidName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for ActionName {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl TryFrom<&str> for ActionName {
    type Error = InvalidName;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        ActionName::new(value)
    }
}

impl Serialize for ActionName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ActionName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ActionName::new(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Input,
    Output,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Input => Polarity::Output,
            Polarity::Output => Polarity::Input,
        }
    }
}

/// An observable action: `a` (input) or `!a` (output).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionLabel {
    pub polarity: Polarity,
    pub name: ActionName,
}

impl ActionLabel {
    pub fn input(name: ActionName) -> Self {
        ActionLabel { polarity: Polarity::Input, name }
    }

    pub fn output(name: ActionName) -> Self {
        ActionLabel { polarity: Polarity::Output, name }
    }

    pub fn dual(&self) -> ActionLabel {
        ActionLabel {
            polarity: self.polarity.flip(),
            name: self.name.clone(),
        }
    }

    pub fn is_input(&self) -> bool {
        self.polarity == Polarity::Input
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Input => write!(f, "{}", self.name),
            Polarity::Output => write!(f, "!{}", self.name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_follow_identifier_rules() {
        assert!(ActionName::new("login").is_ok());
        assert!(ActionName::new("voteA_2").is_ok());
        assert!(ActionName::new("").is_err());
        assert!(ActionName::new("1").is_err());
        assert!(ActionName::new("2a").is_err());
        assert!(ActionName::new("_a").is_err());
        assert!(ActionName::new("rec").is_err());
        assert!(ActionName::new("a-b").is_err());
    }

    #[test]
    fn label_dual_is_involutive() {
        let l = ActionLabel::output(ActionName::new("a").unwrap());
        assert_eq!(l.dual().dual(), l);
        assert_ne!(l.dual(), l);
        assert_eq!(l.to_string(), "!a");
        assert_eq!(l.dual().to_string(), "a");
    }
}
