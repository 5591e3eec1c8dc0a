//! Checking proofs written in a controlled mathematical language.
//!
//! Texts are parsed and desugared to first-order logic ([`language`]),
//! elaborated into statement trees whose leaves are proof obligations
//! ([`kernel`]), rendered as TPTP problems ([`tptp`]) and discharged by a
//! portfolio of provers ([`provers`]). [`verifier`] ties the stages together.

pub mod fol;
pub mod kernel;
pub mod provers;
pub mod language;
pub mod stdlib;
pub mod tptp;
pub mod verifier;
