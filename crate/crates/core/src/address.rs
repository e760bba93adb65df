//! Gorn addresses: paths of 1-based child indices from the root.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

/// Text used for the root (empty path).
pub const ROOT_TEXT: &str = "ε";

/// A node address in a tree. The empty path is the root; `2.2` is the second
/// child of the second child of the root.
///
/// Ordering is lexicographic on the path, so a prefix sorts before all of its
/// extensions. Iterating a `BTreeMap` keyed by addresses is a preorder walk.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GornAddress(Vec<u32>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid Gorn address {0:?}")]
pub struct AddressParseError(pub String);

impl GornAddress {
    pub fn root() -> Self {
        GornAddress(Vec::new())
    }

    /// Builds an address from components. Panics on a zero component.
    pub fn new(path: impl Into<Vec<u32>>) -> Self {
        let path = path.into();
        assert!(path.iter().all(|&k| k >= 1), "Gorn components are 1-based");
        GornAddress(path)
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, k: u32) -> Self {
        assert!(k >= 1);
        let mut path = self.0.clone();
        path.push(k);
        GornAddress(path)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(GornAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Last component, `None` at the root.
    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// Path concatenation `self · other`.
    pub fn join(&self, other: &GornAddress) -> Self {
        let mut path = self.0.clone();
        path.extend_from_slice(&other.0);
        GornAddress(path)
    }

    /// True if `self` is `other` or an ancestor of it.
    pub fn is_prefix_of(&self, other: &GornAddress) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The suffix `s` with `prefix · s == self`.
    pub fn strip_prefix(&self, prefix: &GornAddress) -> Option<GornAddress> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| GornAddress(rest.to_vec()))
    }

    /// Longest common prefix (least common ancestor).
    pub fn common_ancestor(&self, other: &GornAddress) -> GornAddress {
        let n = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        GornAddress(self.0[..n].to_vec())
    }
}

/// Where a node ends up after adjoining an auxiliary tree with foot address
/// `foot` at `site`: nodes at or below the site move under the foot, every
/// other address is untouched.
pub fn rebase_address(orig: &GornAddress, site: &GornAddress, foot: &GornAddress) -> GornAddress {
    match orig.strip_prefix(site) {
        Some(suffix) => site.join(foot).join(&suffix),
        None => orig.clone(),
    }
}

impl fmt::Display for GornAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(ROOT_TEXT);
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GornAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{self}")
    }
}

impl FromStr for GornAddress {
    type Err = AddressParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == ROOT_TEXT {
            return Ok(GornAddress::root());
        }
        let bad = || AddressParseError(s.to_string());
        let mut path = Vec::new();
        for part in s.split('.') {
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let k: u32 = part.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            path.push(k);
        }
        Ok(GornAddress(path))
    }
}

impl Serialize for GornAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Shorthand for tests and fixtures: `addr("2.2")`.
pub fn addr(text: &str) -> GornAddress {
    text.parse().expect("valid Gorn address literal")
}
