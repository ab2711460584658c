//! Discrete phase-space analysis on computable groups.
//!
//! The crate works on the lattices `ℤ^d` and the finite groups `ℤ_N^d`, where
//! Haar measure is counting measure and every integral is a finite sum. On top
//! of that it provides:
//!
//! * solid mixed-norm spaces `ℓ^{p,q}_v` together with their amalgam, discrete
//!   and vector-valued discrete norms ([`spaces`]),
//! * molecule systems (atoms and dual atoms under a common envelope), their
//!   analysis/synthesis operators and the reproducing projector ([`atomic`]),
//! * partitions of unity on the group, the localized analysis/synthesis pair,
//!   the approximate projector `P_U` and its error certificate ([`cover`]),
//! * phase-space multipliers, convolution-dominated matrices and multiplier
//!   inversion ([`multiplier`]),
//! * discrete Gabor systems, localization operators and localized frames
//!   ([`gabor`], [`frames`]).

pub mod atomic;
pub mod cover;
pub mod domain;
pub mod error;
pub mod format;
pub mod frames;
pub mod func;
pub mod gabor;
pub mod group;
pub mod linalg;
pub mod multiplier;
pub mod spaces;
pub mod trials;
pub mod weight;

pub use num_complex::Complex64 as C64;

pub use atomic::{KernelEnvelope, MoleculeSystem};
pub use cover::{CoverWindow, PartitionOfUnity, Profile};
pub use domain::Domain;
pub use error::{Error, Result};
pub use func::GFunc;
pub use gabor::GaborSystem;
pub use group::{Element, Group, Neighborhood, RelSepSet, Side};
pub use multiplier::{CdMatrix, GramMatrix, SymbolMask};
pub use spaces::{AmalgamKind, DiscreteCoeffs, SolidSpaceSpec, VectorCoeffs};
pub use weight::Weight;
