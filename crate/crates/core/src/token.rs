//! Namespaced tokens.
//!
//! Every token carries a one-character kind prefix (`a:`, `m:`, `p:`) so that
//! an author called "Fe" and the material "Fe" never collide.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Author,
    Material,
    Property,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Author, Kind::Material, Kind::Property];

    pub fn prefix(self) -> &'static str {
        match self {
            Kind::Author => "a:",
            Kind::Material => "m:",
            Kind::Property => "p:",
        }
    }

    /// Kind encoded by a namespaced token's prefix.
    pub fn of_token(token: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| token.starts_with(k.prefix()))
    }

    pub fn is_material(self) -> bool {
        self == Kind::Material
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Kind::Author => "author",
            Kind::Material => "material",
            Kind::Property => "property",
        };
        f.write_str(name)
    }
}

/// Small set of node kinds, used to restrict path intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KindSet(u8);

impl KindSet {
    pub const EMPTY: KindSet = KindSet(0);
    pub const ALL: KindSet = KindSet(0b111);

    fn bit(kind: Kind) -> u8 {
        match kind {
            Kind::Author => 1,
            Kind::Material => 2,
            Kind::Property => 4,
        }
    }

    pub fn with(self, kind: Kind) -> Self {
        KindSet(self.0 | Self::bit(kind))
    }

    pub fn contains(self, kind: Kind) -> bool {
        self.0 & Self::bit(kind) != 0
    }
}

impl FromIterator<Kind> for KindSet {
    fn from_iter<I: IntoIterator<Item = Kind>>(iter: I) -> Self {
        iter.into_iter().fold(KindSet::EMPTY, KindSet::with)
    }
}

/// Namespace a raw name under `kind`.
///
/// Internal whitespace runs become `_` so tokens stay safe in the
/// space-separated walk and vector formats. A name that already carries the
/// right prefix is kept as is.
pub fn namespaced(kind: Kind, raw: &str) -> String {
    let cleaned = raw.split_whitespace().collect::<Vec<_>>().join("_");
    if cleaned.starts_with(kind.prefix()) {
        cleaned
    } else {
        format!("{}{}", kind.prefix(), cleaned)
    }
}

/// Strip the kind prefix, if any.
pub fn bare(token: &str) -> &str {
    match Kind::of_token(token) {
        Some(kind) => &token[kind.prefix().len()..],
        None => token,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_round_trip() {
        for kind in Kind::ALL {
            let tok = namespaced(kind, "Bi2Te3");
            assert_eq!(Kind::of_token(&tok), Some(kind));
            assert_eq!(bare(&tok), "Bi2Te3");
        }
    }

    #[test]
    fn existing_prefix_is_kept() {
        assert_eq!(namespaced(Kind::Property, "p:thermoelectric"), "p:thermoelectric");
        assert_eq!(namespaced(Kind::Author, "p:odd"), "a:p:odd");
    }

    #[test]
    fn whitespace_is_collapsed() {
        assert_eq!(namespaced(Kind::Author, "  Jane   Q. Doe "), "a:Jane_Q._Doe");
    }

    #[test]
    fn kind_set_membership() {
        let set: KindSet = [Kind::Author, Kind::Property].into_iter().collect();
        assert!(set.contains(Kind::Author));
        assert!(!set.contains(Kind::Material));
        assert!(KindSet::ALL.contains(Kind::Material));
    }
}
