//! Rank-metric coding and private information retrieval over simulated
//! random linear networks.
//!
//! The crate is organized bottom-up:
//!
//! - [`ff`] — the GF(q) ⊂ GF(q^s) field tower, matrices and ranks over both
//!   levels, and the Φ expansion between them.
//! - [`linpoly`] — linearized (q-)polynomials: evaluation and the twisted
//!   composition that underlies the star product.
//! - [`gabidulin`] — Gabidulin codes: Moore-matrix encoding, star-product
//!   code formation, and error/erasure decoding in the rank metric.
//! - [`storage`] — file striping and MRD-coded distributed storage.
//! - [`channel`] — the random-linear-network channel simulator.
//! - [`pir`] — the retrieval protocol: query construction, oblivious server
//!   responses, aggregation, per-round retrieval, and multi-round orchestration.

pub mod channel;
pub mod ff;
pub mod gabidulin;
pub mod linpoly;
pub mod pir;
pub mod storage;
