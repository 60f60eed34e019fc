//! Fixed-width short strings used for tags and quantum-number names.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Result, TensorError};

pub const MAX_NAME_LEN: usize = 8;

/// An ASCII string of at most eight characters stored inline.
///
/// Zero padding makes the byte-wise order coincide with lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ShortName([u8; MAX_NAME_LEN]);

fn allowed(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'=' | b'+' | b'-' | b'/' | b'.' | b'_')
}

impl ShortName {
    pub fn new(s: &str) -> Result<Self> {
        if s.len() > MAX_NAME_LEN {
            return Err(TensorError::NameTooLong(s.to_string()));
        }
        if !s.bytes().all(allowed) {
            return Err(TensorError::BadNameChar(s.to_string()));
        }
        let mut bytes = [0u8; MAX_NAME_LEN];
        bytes[..s.len()].copy_from_slice(s.as_bytes());
        Ok(ShortName(bytes))
    }

    pub fn as_str(&self) -> &str {
        let len = self.0.iter().position(|&b| b == 0).unwrap_or(MAX_NAME_LEN);
        // Only ASCII is ever stored.
        std::str::from_utf8(&self.0[..len]).unwrap_or("")
    }

    pub fn is_empty(&self) -> bool {
        self.0[0] == 0
    }
}

impl PartialOrd for ShortName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ShortName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for ShortName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for ShortName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_lexicographic() {
        let a = ShortName::new("N").unwrap();
        let b = ShortName::new("Sz").unwrap();
        let c = ShortName::new("Nf").unwrap();
        assert!(a < b);
        assert!(a < c && c < b);
        assert_eq!(a.as_str(), "N");
    }

    #[test]
    fn rejects_long_and_comma() {
        assert!(ShortName::new("abcdefghi").is_err());
        assert!(ShortName::new("a,b").is_err());
        assert!(ShortName::new("S=1/2").is_ok());
    }
}
