//! Numerical experiments on Fourier coefficients of half-integral weight
//! cusp forms in arithmetic progressions.
//!
//! The crate builds exact q-expansions, evaluates Salié sums and the
//! Voronoi kernel, applies Hecke operators T_{p²}, and computes the moment
//! and sign-count statistics over residue classes modulo a prime.

pub mod arith;
pub mod error;
pub mod hecke;
pub mod modarith;
pub mod progsums;
pub mod qseries;
pub mod quadrature;
pub mod signstats;
pub mod special;
pub mod summation;
pub mod voronoi;
pub mod windows;

pub use error::{Error, Result};
pub use modarith::PrimeCtx;
pub use qseries::{
    builtin_form, BuiltinForm, CharacterTag, CoeffView, HalfWeight, QSeries, Weight,
};
pub use windows::Window;
