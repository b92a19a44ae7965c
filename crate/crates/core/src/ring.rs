//! The ambient ring `F_p[x_1, ..., x_n]`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Fp;
use crate::poly::Polynomial;

/// Monomial orders understood by the Gröbner kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    DegRevLex,
}

/// A polynomial ring over a prime field, localized implicitly at the origin.
///
/// The maximal ideal `m = (x_1, ..., x_n)` is always available through
/// [`crate::Ideal::maximal`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyRing {
    field: Fp,
    vars: Vec<String>,
    order: MonomialOrder,
}

impl PolyRing {
    pub fn new<S: AsRef<str>>(p: u32, vars: &[S]) -> Result<Arc<Self>> {
        let field = Fp::new(p)?;
        if vars.is_empty() {
            return Err(Error::InvalidRing("variable list is empty".into()));
        }
        let mut seen = HashSet::new();
        let mut names = Vec::with_capacity(vars.len());
        for v in vars {
            let v = v.as_ref().trim();
            let valid = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::InvalidRing(format!("invalid variable name '{v}'")));
            }
            if !seen.insert(v.to_string()) {
                return Err(Error::InvalidRing(format!("duplicate variable '{v}'")));
            }
            names.push(v.to_string());
        }
        Ok(Arc::new(PolyRing {
            field,
            vars: names,
            order: MonomialOrder::DegRevLex,
        }))
    }

    /// Parses a comma separated variable list such as `"x,y,z"`.
    pub fn with_var_list(p: u32, vars: &str) -> Result<Arc<Self>> {
        let names: Vec<&str> = vars.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        PolyRing::new(p, &names)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.field.p()
    }

    #[inline]
    pub fn field(&self) -> Fp {
        self.field
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Embedding dimension of the localization at the origin.
    #[inline]
    pub fn emb(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn var(&self, i: usize) -> Polynomial {
        Polynomial::variable(self.nvars(), i)
    }

    pub fn parse(&self, text: &str) -> Result<Polynomial> {
        crate::parse::parse_polynomial(self, text)
    }

    pub fn q(&self, e: u32) -> Result<u64> {
        (self.p() as u64)
            .checked_pow(e)
            .filter(|q| *q <= u32::MAX as u64)
            .ok_or_else(|| Error::Overflow(format!("{}^{e} does not fit the exponent range", self.p())))
    }
}

impl fmt::Display for PolyRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}[{}]", self.p(), self.vars.join(","))
    }
}
