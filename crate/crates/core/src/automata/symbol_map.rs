use std::fmt;

use crate::error::{Error, Result};

use super::Symbol;

/// Total renaming of an alphabet onto itself, stored as the image of each
/// symbol index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolMap {
    image: Vec<Symbol>,
}

impl SymbolMap {
    /// Panics if an image entry is outside the alphabet; use
    /// [`SymbolMap::try_new`] for unchecked input.
    pub fn new(image: Vec<Symbol>) -> Self {
        Self::try_new(image).expect("symbol map entries must index the alphabet")
    }

    pub fn try_new(image: Vec<Symbol>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::input("empty symbol map"));
        }
        if let Some(&p) = image.iter().find(|&&p| p >= n) {
            return Err(Error::input(format!("symbol map image {p} out of range")));
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn apply(&self, p: Symbol) -> Symbol {
        self.image[p]
    }

    pub fn image(&self) -> &[Symbol] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn apply_string(&self, x: &[Symbol]) -> Vec<Symbol> {
        x.iter().map(|&p| self.image[p]).collect()
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            image: other.image.iter().map(|&p| self.image[p]).collect(),
        }
    }

    /// Renders the image with symbol names, e.g. `b|a|c|d|e`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        struct D<'a>(&'a SymbolMap, &'a [String]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for (i, &p) in self.0.image.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    f.write_str(&self.1[p])?;
                }
                Ok(())
            }
        }
        D(self, names)
    }

    /// Parses the `b|a|c|d|e` form back against an alphabet.
    pub fn parse_with(text: &str, names: &[String]) -> Result<Self> {
        let image = text
            .split('|')
            .map(|t| {
                names
                    .iter()
                    .position(|n| n == t.trim())
                    .ok_or_else(|| Error::input(format!("unknown symbol {t:?} in map")))
            })
            .collect::<Result<Vec<_>>>()?;
        if image.len() != names.len() {
            return Err(Error::input("symbol map is not total"));
        }
        Self::try_new(image)
    }
}
