//! Quadratic time evolutions of canonical commutation relations and their
//! quasi-free states.

pub mod catalog;
pub mod checks;
pub mod error;
pub mod io;
pub mod linalg;
pub mod majorant;
pub mod momentum;
pub mod riccati;
pub mod sampling;
pub mod states;
pub mod symplectic;
pub mod tolerance;
pub mod weyl;

pub use error::{Error, Result};
pub use symplectic::{
    basis_unitary, generator_aa, generator_pq, indefinite_product, is_cross_matrix, metric,
    propagator, symplectic_form, Basis, Generator, PhaseVector, Propagator, QuadHamiltonianAa,
    QuadHamiltonianPq,
};
pub use tolerance::Tolerances;
pub use majorant::{r_from_k, AngularOperator, ExtReal, ExtendedQuadraticForm};
pub use weyl::{gram_matrix, weyl_mul, weyl_star, HeisenbergTriple, WeylWord};
pub use riccati::{solve_scalar, solve_spectral, RiccatiProblem, SolutionSet};
pub use states::{time_limit, Direction, LimitReport, QuadraticState};
