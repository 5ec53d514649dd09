//! Spectral systems of towers of fibrations, computed with effective
//! homology: exact integer linear algebra, lazy chain complexes,
//! simplicial sets, perturbation lemmas, downset-indexed filtrations and
//! the multi-fibration Serre pipeline.

pub mod chain;
pub mod exactlinalg;
pub mod homotopy;
pub mod poset;
pub mod serre;
pub mod simplicial;
pub mod spectra;
