//! Quantum transport through a two-arm Aharonov-Bohm ring with an embedded
//! quantum dot in each arm. The dot levels may be complex (physical gain or
//! loss), so the Hamiltonian is non-Hermitian in general.
//!
//! The crate is organized around a dual-route check:
//!
//! * [`oracle`] assembles and solves the exact 4x4 scattering system for an
//!   arbitrary gauge allocation of the flux phase — the ground truth.
//! * [`closed_form`] evaluates the analytic transmission/reflection formulas
//!   the model admits.
//!
//! The two routes never call each other; agreeing to solver precision is the
//! point. [`spectra`] sweeps parameters into conductance tables and [`fit`]
//! extracts Fano lineshape parameters from them.
//!
//! Everything here is `no_std` (with `alloc`); IO, file formats and the CLI
//! live in the companion `abring-cli` crate.

#![no_std]

extern crate alloc;

pub mod closed_form;
pub mod fit;
pub mod model;
pub mod oracle;
pub mod spectra;

pub use num_complex::Complex64;

pub use closed_form::{FanoParameters, TransmissionResult};
pub use fit::{FanoFit, FitError, FitOptions};
pub use model::{GaugeAllocation, ModelError, Momentum, RingConfig};
pub use oracle::{ScatteringSolution, SolveError, SolverOptions};
pub use spectra::{
    Engine, Extremum, ExtremumKind, SpectrumRow, SpectrumTable, SweepError, SweepSpec,
    SweepVariable,
};
