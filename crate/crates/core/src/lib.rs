#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cmatrix;
pub mod geometry;
pub mod io;
pub mod multiqubit;
pub mod scheme;
pub mod selftest;
pub mod states;
pub mod tolerance;
pub mod tomography;
