#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod divergence;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod quad;
pub mod specfun;
pub mod sphere;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    pub mod kernels {}
    #[doc = include_str!("../../../book/src/summation.md")]
    pub mod summation {}
    #[doc = include_str!("../../../book/src/sphere.md")]
    pub mod sphere {}
    #[doc = include_str!("../../../book/src/divergence.md")]
    pub mod divergence {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
