//! Declarative windows over data streams.
//!
//! Windows are described by symbolic regular expressions ([`sre`]) or by a
//! guarded monadic second-order logic ([`smso`]), compiled to k-lookback
//! symbolic automata ([`ksla`]), extracted online with pane-based
//! aggregation ([`processor`]) and checked for bounded memory against input
//! specifiers ([`boundedness`]).
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! exact rational domain used by the command-line tool.

pub mod boundedness;
pub mod error;
pub mod ksla;
pub mod processor;
pub mod scalar;
pub mod smso;
pub mod sre;
pub mod theory;

#[cfg(test)]
pub(crate) mod testing;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational letters.
pub type Q = num_rational::BigRational;
/// Floating-point letters with a total order.
pub type F64 = ordered_float::OrderedFloat<f64>;

pub type QTheory = theory::Theory<Q>;
pub type QLetter = theory::Letter<Q>;
pub type QPredicate = theory::Predicate<Q>;
pub type QKsla = ksla::Ksla<Q>;
pub type QSre = sre::Sre<Q>;
pub type QWindowExpression = smso::WindowExpression<Q>;
pub type QVerdict = boundedness::Verdict<Q>;
