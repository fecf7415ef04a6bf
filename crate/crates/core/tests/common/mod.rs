#![allow(dead_code)]

pub mod invariants;
pub mod kernels;
pub mod oracle;
