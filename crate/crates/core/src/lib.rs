//! Exact-arithmetic machinery for classifying operator identities on n-ary
//! associative algebras by the rank of their matrix of consequences.
//!
//! The pipeline: [`monomials`] enumerates and orders operator monomials;
//! [`operad`] composes identities with the product and operator generators;
//! [`consequences`] assembles the matrix of consequences (numeric or as a
//! symbolic template); [`linalg`] computes exact ranks over prime fields and
//! the rationals; [`search`] sweeps coefficient vectors for submaximal rank;
//! [`families`] checks the discovered solutions against parametric family
//! templates.

pub mod consequences;
pub mod error;
pub mod families;
pub mod linalg;
pub mod linear_form;
pub mod monomials;
pub mod operad;
pub mod search;

pub use consequences::{build_matrix, build_template, generate_consequences, ConsequenceMatrix};
pub use error::{Error, Result};
pub use families::{
    classify_solutions, matches, parse_templates_jsonl, verify_family_generic_rank, CoverageReport,
    FamilyTemplate,
};
pub use linalg::{generic_rank, is_prime, rank_mod_leq_rational, ExactMatrix, GenericRankReport};
pub use linear_form::LinearForm;
pub use monomials::{
    count_monomials, enumerate_monomials, lex_compare, DyckWord, OperatorMonomial,
};
pub use operad::{Composition, OperatorPolynomial, Polynomial, SymbolicPolynomial};
pub use search::{
    enumerate_candidates, rank_spectrum, run_search, CoefficientVector, GcdFilter, ScreenMode,
    SearchConfig, SearchReport, SolutionRecord,
};
