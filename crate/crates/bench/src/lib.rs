//! Shared fixtures for the benchmark targets.

use apnorm_core::phases::{cantor_primitive, PhaseFn};
use apnorm_core::Modulus;

pub fn staircase_fixture(depth: u32) -> (PhaseFn, Modulus) {
    let m = Modulus::power(0.5).expect("valid exponent");
    let phi = cantor_primitive(&m, depth).expect("valid depth");
    (phi, m)
}
