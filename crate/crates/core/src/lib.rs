//! Test ideals, F-pure thresholds and F-jumping numbers of ideals in
//! polynomial rings over prime fields, computed exactly.

pub mod cli;
pub mod error;
pub mod field;
pub mod frobenius;
pub mod groebner;
pub mod ideal;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod qadic;
pub mod ring;
pub mod star;
pub mod testideal;
pub mod thresholds;

pub use error::{Error, Result};
pub use field::Fp;
pub use ideal::{ideal_arith, local_invariants, Ideal, IdealOp, LocalInvariants, MuBound};
pub use monomial::Monomial;
pub use poly::Polynomial;
pub use ring::{MonomialOrder, PolyRing};
