//! Operator algebra for Dunkl and Cherednik operators over root systems.
//!
//! The crate builds the crossed products `D(V)*W` and `D_q(V)*W`, realises
//! rational, trigonometric, difference and elliptic Dunkl/Cherednik
//! operators inside them, and derives the associated integrable
//! Hamiltonians: Calogero-Moser, Calogero-Moser-Sutherland, Ruijsenaars,
//! Macdonald, Koornwinder and van Diejen. On top of that it computes
//! nonsymmetric and symmetric Macdonald polynomials, q-KZ cocycles, Lax
//! matrices with spectral parameter and desk-scale isospectrality
//! experiments.
//!
//! Exact layers run over Q(i); the elliptic layer runs over configurable
//! arbitrary-precision complex floats.

pub mod crossed;
pub mod dunkl;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod mpoly;
pub mod numeric;
pub mod ratfun;
pub mod roots;
pub mod scalar;
pub mod theta;
pub mod weyl;

pub use error::CoreError;
