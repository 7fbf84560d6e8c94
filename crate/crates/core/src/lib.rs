//! Detection, classification and cross-rotation verification of
//! `A_μ` bifurcation points of p-periodic one-dimensional map families.

pub mod expr;
pub mod numeric;
pub mod system;
pub mod bifurcation;
pub mod invariance;
pub mod reference;
pub mod strata;
