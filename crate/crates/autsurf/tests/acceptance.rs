//! End-to-end acceptance gate: one test per criterion, each printing a
//! pass/fail line with the measured quantity at its stated tolerance.
//!
//! Populated criterion by criterion as the library modules land.

mod common;

#[test]
fn acceptance_harness_builds() {
    // Placeholder keeping the target compiling while criteria are added.
}
