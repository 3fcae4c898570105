//! Detection, classification and tracking of critical points of scalar fields.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod critpoint;
pub mod domain;
pub mod error;
pub mod field;
pub mod gallery;
pub mod hom_index;
pub mod linalg;
pub mod morse;
pub mod mountain_pass;
pub mod rand_field;
pub mod sequence;

pub use domain::Domain;
pub use error::Error;
pub use field::{Field, Smoothness};
