//! Coset complexes over `SL_3(F_q[t]/<phi>)`, the Reed-Solomon Tanner codes
//! living on their triangles, and the trivariate local codes `C_{dx,dy}` that
//! appear at every vertex.
//!
//! Everything here is exact: codes are described by parity rows over a prime
//! field and every dimension, membership or identity claim is decided by
//! elimination or enumeration. Floating point only enters for spectra and
//! random-walk operators.
//!
//! Module map:
//!
//! - [`algebra`]: prime fields, the ring `R_n`, dense GF(p) elimination, symmetric spectra.
//! - [`local_code`]: Reed-Solomon checks and the vertex code `C_{dx,dy}`.
//! - [`local_decoder`]: agreement decoding of row/skew line ensembles.
//! - [`complex`]: the group, its cosets, faces, stars, links and walk operators.
//! - [`embedding`]: the coefficient embedding of triangles and its affine lines.
//! - [`global_code`]: the Tanner code on triangles and its testers and correctors.
//! - [`report`]: versioned JSON check records shared by the command-line tool.

pub mod algebra;
pub mod complex;
pub mod embedding;
mod error;
pub mod global_code;
pub mod local_code;
pub mod local_decoder;
pub mod report;

pub use error::{HdxError, Result};
