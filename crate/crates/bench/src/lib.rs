//! Shared fixtures for the benchmarks.

use nustab_core::assembly::assemble_system;
use nustab_core::{build_modal_system, DampedGenerator, DampingSpec, SystemKind, SystemSpec, WeakProfile};

/// String damped by the `1 - xi` profile.
pub fn wave_one_minus_xi(truncation: usize) -> DampedGenerator {
    generator(SystemKind::Wave1d, DampingSpec::Weak(WeakProfile::OneMinusXi), truncation)
}

/// String with diagonal damping `lambda^-alpha`.
pub fn wave_fractional(alpha: f64, truncation: usize) -> DampedGenerator {
    generator(SystemKind::Wave1d, DampingSpec::FractionalDiag { alpha }, truncation)
}

pub fn generator(kind: SystemKind, damping: DampingSpec, truncation: usize) -> DampedGenerator {
    let ms = build_modal_system(&SystemSpec::new(kind, damping, truncation)).expect("fixture system");
    assemble_system(&ms).expect("fixture generator")
}

/// A frequency halfway between two modes, away from the resolvent peaks.
pub fn gap_frequency(truncation: usize) -> f64 {
    (truncation as f64 / 2.0 + 0.5) * std::f64::consts::PI
}
