//! Computational kernels for exponential complexes and their period maps.
//!
//! The crate is organised around a handful of interlocking pieces:
//!
//! * [`wedge`] — a formal graded tensor/wedge algebra over the rationals
//!   whose slots hold complex-valued atoms (`2πi`-multiples, rational
//!   constants, branch-tracked function germs), together with the
//!   differentials of the exponential and Lie-exponential complexes and
//!   evaluation maps to differential forms.
//! * [`multival`] — path-based analytic continuation of `log` and the
//!   classical polylogarithms with monodromy bookkeeping, the functions
//!   `L_n(z)`, and exact Bernoulli tables.
//! * [`periods`] — weight-graded unipotent period matrices, the big period
//!   map, cobar words and the chain maps built from them, Griffiths
//!   transversality checks, and the logarithm of the coproduct.
//! * [`bloch`] — the Bloch complex: cross-ratios, five-term relations,
//!   and the explicit maps from weight ≤ 4 polylogarithmic complexes into
//!   Lie-exponential complexes.
//! * [`grassmann`] — exact configuration complexes, decorated flags,
//!   hypersimplicial decompositions, and the chain map to the
//!   bigrassmannian complex.
//! * [`chern2`] — the local Cech cocycle for the second Chern class of a
//!   rank-2 bundle, with branch-choice auditing and rational recognition.
//! * [`realdeligne`] — the homotopy taking the real projection of the
//!   Lie-exponential complex to zero, verified by finite differences.
//! * [`verify`] — the full acceptance suite shared by the test harness and
//!   the command-line `verify-all` runner.

pub mod qnum;
pub mod sym;
pub mod wedge;
pub mod multival;
pub mod periods;
pub mod bloch;
pub mod grassmann;
pub mod chern2;
pub mod realdeligne;
pub mod verify;

pub use num::complex::Complex64;

/// Crate-wide numeric tolerances, configurable per run.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Tolerance used when merging value-keyed atoms.
    pub atom_tol: f64,
    /// Relative tolerance for path quadrature.
    pub quadrature_tol: f64,
    /// Tolerance for finite-difference residuals.
    pub fd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { atom_tol: 1e-9, quadrature_tol: 1e-12, fd_tol: 1e-6 }
    }
}
