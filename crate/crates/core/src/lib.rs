//! Generalized doubly nonnegative cones over symmetric cones.
//!
//! [`jordan`] provides the Euclidean Jordan algebra of products of
//! nonnegative, second-order and PSD blocks; [`conicsolver`] a dense
//! interior-point method; [`gdnn`] and [`bdsep`] membership and separation
//! oracles for the NN, ZVP and BD cones; [`gcpp`] the lifted mixed 0–1 SOCP
//! relaxations built on top of them.

pub mod bdsep;
pub mod conicsolver;
pub mod gcpp;
pub mod gdnn;
pub mod jordan;
pub mod linalg;
pub mod polymoment;
