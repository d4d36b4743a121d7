//! Finite-dimensional C*-semi-inner-product modules, executable.
//!
//! The crate realizes algebra-valued semi-inner products over concrete
//! finite-dimensional C*-algebras and turns their defining properties into
//! seeded, reproducible numerical checks:
//!
//! - [`algebra`]: functions on a finite set, matrix algebras, direct sums;
//!   involution, C*-norm, positivity and order, spectral roots.
//! - [`sip`]: classical Lumer-Giles pairings (Hilbert and l^p-Giles fibers).
//! - [`module`]: bundle, matrix self-module, direct-sum, and transported
//!   constructions with the induced norm and pre-Finsler map.
//! - [`verify`]: axiom, norm-law, Finsler, and fullness verifiers.
//! - [`orthogonality`]: Birkhoff-James minimization and the orthogonality
//!   theorems as executable checks.
//! - [`operators`]: A-linear operator families, norm and least-K bounds,
//!   the dual-functional theory.
//! - [`suites`]: run orchestration, counterexample search, fault injection,
//!   and JSON run reports.

pub mod algebra;
pub mod error;
pub mod literal;
pub mod module;
pub mod operators;
pub mod orthogonality;
pub mod report;
pub mod sampling;
pub mod sip;
pub mod suites;
pub mod verify;

pub use algebra::{AlgebraDescriptor, AlgebraElement, NumericPolicy};
pub use error::{CsipError, Result};
pub use module::{
    csip, hermitian_defect, module_action, rho, triple_norm, IsoDescriptor, ModuleDescriptor,
    ModuleElement,
};
pub use operators::{
    check_a_linear, johnson_property_check, min_k, op_norm, regularized_normalize, BoundReport,
    ModuleOperator, OpValue,
};
pub use orthogonality::{
    bj_minimize, continuity_check, sip_orthogonal_complement_sample, thm31_check, thm34_check,
    thm34_hypothesis, BJResult,
};
pub use report::{verification_report_schema, VerificationReport};
pub use sip::{sip, sip_continuity_probe, sip_norm, SipSpaceDescriptor, SipVector};
pub use suites::{
    fault_target, find_counterexamples, run_suites, RunReport, SuiteConfig, SuiteKind,
};
pub use verify::{
    fullness_check, span_dimension, verify_axioms, verify_finsler, verify_norm_properties,
    FaultMode,
};
