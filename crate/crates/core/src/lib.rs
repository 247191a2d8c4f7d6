//! Computational laboratory for interval exchange transformations, translation
//! surfaces under the `SL(2,R)` action, recurrence of Teichmüller geodesics and
//! covering-based dimension estimates.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod iet;
pub mod permutation;
pub mod rational;
pub mod surface;
pub mod suspension;

pub use error::{Error, Result};
pub use iet::Iet;
pub use permutation::{Permutation, QForm};
pub use rational::Rational;
pub use surface::{SL2Matrix, TranslationSurface};
pub use suspension::SuspensionData;
