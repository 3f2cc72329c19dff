//! Exact arithmetic for flat `(Z/2)^r` covers of blown-up quadrics and
//! the singularity bookkeeping around them: class-T quotient
//! singularities, Hirzebruch-Jung chains, lens-space mapping classes,
//! Milnor-lattice embedding obstructions, an action catalogue for
//! rational double points, and a certified global construction with
//! component lower bounds. Every verdict is integer or
//! arbitrary-precision arithmetic; reports are deterministic.

pub mod actions;
pub mod construct;
pub mod cover;
pub mod demo;
pub mod f2;
pub mod lattice;
pub mod lens;
pub mod report;
pub mod sing;

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(false);

/// Enables the internal deterministic parallel loops (reports stay
/// byte-identical regardless of schedule).
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled, Ordering::Relaxed);
}

pub(crate) fn parallel_enabled() -> bool {
    PARALLEL.load(Ordering::Relaxed)
}
