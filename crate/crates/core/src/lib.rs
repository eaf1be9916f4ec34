//! Lagrangian modelling of circuits with memristors, meminductors and
//! memcapacitors.
//!
//! Circuits are written in integrated coordinates: integrated loop charges
//! `σ` (loop analysis) or integrated node fluxes `ρ` (node analysis). In
//! these coordinates the memory elements have proper state functions, the
//! equations of motion are self-adjoint, and each Euler–Lagrange equation is
//! an integrated Kirchhoff law.
//!
//! The pipeline is:
//!
//! 1. [`netlist::parse`] a netlist and [`netlist::validate`] it;
//! 2. assemble a [`LagrangianSystem`] with [`build_system`];
//! 3. inspect its `(A, B)` pair with [`selfadjoint::check_self_adjoint`];
//! 4. reduce it with [`to_first_order`] and [`sim::integrate`] it;
//! 5. reconstruct element waveforms with [`sim::branch_waveforms`].

pub mod constitutive;
pub mod curve;
pub mod error;
pub mod lagrangian;
pub mod netlist;
pub mod selfadjoint;
pub mod sim;

pub use constitutive::{
    incremental_value, legendre_residual, Element, ElementKind, ElementValue, Incidence, Modulation,
    SourceWaveform, WaveShape,
};
pub use curve::{CurveRepr, ScalarCurve};
pub use error::{Error, Result};
pub use lagrangian::{
    build_loop_system, build_node_system, build_system, naive_path_lagrangian, to_first_order,
    ABDecomposition, FirstOrderSystem, FnSystem, LagrangianSystem, OdeSystem, SystemKind,
};
pub use netlist::{parse, validate, Circuit, Diagnostic, Diagnostics, Formulation, Severity};
