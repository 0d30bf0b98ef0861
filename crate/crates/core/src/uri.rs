use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A node identifier in absolute URI form.
///
/// Equality is exact string equality. No percent-decoding or case folding is
/// applied, so `urn:x:A` and `urn:x:a` are different nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Uri(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid URI {0:?}: expected a non-empty string with a scheme separator ':'")]
pub struct InvalidUri(pub String);

impl Uri {
    pub fn new(value: impl Into<String>) -> Result<Self, InvalidUri> {
        let value = value.into();
        match value.find(':') {
            Some(pos) if pos > 0 => Ok(Uri(value)),
            _ => Err(InvalidUri(value)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part before the first `:`.
    pub fn scheme(&self) -> &str {
        &self.0[..self.0.find(':').unwrap_or(0)]
    }

    /// The URI with any `#fragment` removed; this names the document that
    /// would be fetched to dereference it.
    pub fn document(&self) -> &str {
        match self.0.find('#') {
            Some(pos) => &self.0[..pos],
            None => &self.0,
        }
    }
}

impl TryFrom<String> for Uri {
    type Error = InvalidUri;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Uri::new(value)
    }
}

impl TryFrom<&str> for Uri {
    type Error = InvalidUri;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        Uri::new(value)
    }
}

impl From<Uri> for String {
    fn from(uri: Uri) -> Self {
        uri.0
    }
}

impl AsRef<str> for Uri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Uri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Uri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
