//! Shared fixtures for the pipeline benchmarks.

use opident_core::consequences::{build_template, ConsequenceMatrix};
use opident_core::LinearForm;

/// The two templates every benchmark instantiates.
pub fn ternary_templates() -> (ConsequenceMatrix<LinearForm>, ConsequenceMatrix<LinearForm>) {
    (
        build_template(3, 3, 1).expect("multiplicity-1 template"),
        build_template(3, 3, 2).expect("multiplicity-2 template"),
    )
}

/// A fixed bag of candidate vectors that exercises both maximal and
/// submaximal ranks.
pub fn sample_vectors(len: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let patterns: [&[i64]; 5] = [
        &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        &[1, -1, 1, -1, 1, -1, 1, -1, 1, -1],
        &[2, 1, 0, -1, -2, 2, 1, 0, -1, -2],
        &[0, 0, 1, 0, 0, 0, 1, 0, 0, -2],
        &[1, 2, -2, 1, 0, 0, -1, 2, 0, 1],
    ];
    for pattern in patterns {
        out.push(pattern[..len].to_vec());
    }
    out
}
