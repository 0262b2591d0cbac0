//! Consequences of an operator identity and the matrix of consequences.
//!
//! A consequence composes the identity once with the product and once with
//! the operator, in either order and at every position, raising the degree
//! by arity-1 and the multiplicity by one. The matrix of consequences
//! expands the distinct consequences over the lex-ordered monomial basis of
//! the target degree and multiplicity.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::linear_form::LinearForm;
use crate::monomials::{enumerate_monomials, OperatorMonomial};
use crate::operad::{Composition, OperatorPolynomial, Polynomial, SymbolicPolynomial};

/// A two-step composition: `second ∘ first` applied to the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConsequenceOp {
    pub first: Composition,
    pub second: Composition,
}

impl ConsequenceOp {
    pub fn apply<C: Clone + Eq + Zero>(&self, poly: &Polynomial<C>) -> Result<Polynomial<C>> {
        poly.compose(self.first)?.compose(self.second)
    }
}

impl fmt::Display for ConsequenceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ; {}", self.first, self.second)
    }
}

/// The eight composition families in a fixed deterministic order, all
/// subscripts ascending: (R∘ᵢp)∘ⱼL, L∘(R∘ᵢp), (p∘ᵢR)∘ⱼL, L∘(p∘ᵢR),
/// (R∘ᵢL)∘ⱼp, p∘ⱼ(R∘ᵢL), (L∘R)∘ᵢp, p∘ᵢ(L∘R).
pub fn consequence_ops(arity: u32, degree: u32) -> Vec<ConsequenceOp> {
    use Composition::*;
    let mut ops = Vec::new();
    let expanded = degree + arity - 1;
    for i in 1..=degree {
        for j in 1..=expanded {
            ops.push(ConsequenceOp {
                first: ProductAtLeaf(i),
                second: OperatorAtLeaf(j),
            });
        }
    }
    for i in 1..=degree {
        ops.push(ConsequenceOp {
            first: ProductAtLeaf(i),
            second: OperatorAtRoot,
        });
    }
    for i in 1..=arity {
        for j in 1..=expanded {
            ops.push(ConsequenceOp {
                first: IntoProductSlot(i),
                second: OperatorAtLeaf(j),
            });
        }
    }
    for i in 1..=arity {
        ops.push(ConsequenceOp {
            first: IntoProductSlot(i),
            second: OperatorAtRoot,
        });
    }
    for i in 1..=degree {
        for j in 1..=degree {
            ops.push(ConsequenceOp {
                first: OperatorAtLeaf(i),
                second: ProductAtLeaf(j),
            });
        }
    }
    for i in 1..=degree {
        for j in 1..=arity {
            ops.push(ConsequenceOp {
                first: OperatorAtLeaf(i),
                second: IntoProductSlot(j),
            });
        }
    }
    for i in 1..=degree {
        ops.push(ConsequenceOp {
            first: OperatorAtRoot,
            second: ProductAtLeaf(i),
        });
    }
    for i in 1..=arity {
        ops.push(ConsequenceOp {
            first: OperatorAtRoot,
            second: IntoProductSlot(i),
        });
    }
    ops
}

/// Distinct consequences of an identity, with the composition that produced
/// each row and a certificate of which raw compositions collapsed.
#[derive(Debug, Clone)]
pub struct Consequences<C> {
    pub polynomials: Vec<Polynomial<C>>,
    pub ops: Vec<ConsequenceOp>,
    /// Raw compositions whose result equalled an earlier row: (op, row index).
    pub duplicates: Vec<(ConsequenceOp, usize)>,
}

/// Enumerates the eight families, removes duplicate polynomials (exact
/// term-map equality, first occurrence kept), and returns the distinct
/// consequences in order.
pub fn generate_consequences<C: Clone + Eq + Zero>(
    poly: &Polynomial<C>,
) -> Result<Consequences<C>> {
    let mut polynomials: Vec<Polynomial<C>> = Vec::new();
    let mut kept_ops = Vec::new();
    let mut duplicates = Vec::new();
    for op in consequence_ops(poly.arity(), poly.degree()) {
        let consequence = op.apply(poly)?;
        match polynomials.iter().position(|p| *p == consequence) {
            Some(index) => duplicates.push((op, index)),
            None => {
                polynomials.push(consequence);
                kept_ops.push(op);
            }
        }
    }
    Ok(Consequences {
        polynomials,
        ops: kept_ops,
        duplicates,
    })
}

/// The matrix of consequences: rows are the distinct consequences, columns
/// the lex-ordered monomial basis at the target (degree, multiplicity).
/// With `C = LinearForm` this is the symbolic template for the generic
/// identity; with `C = BigRational` it is a numeric instance.
#[derive(Debug, Clone)]
pub struct ConsequenceMatrix<C> {
    arity: u32,
    source_degree: u32,
    source_multiplicity: u32,
    /// Size of the full source basis (number of coefficients a1..aN).
    source_dimension: usize,
    columns: Vec<OperatorMonomial>,
    /// Sparse rows: (column index, entry), sorted by column.
    rows: Vec<Vec<(usize, C)>>,
    descriptors: Vec<ConsequenceOp>,
    duplicates: Vec<(ConsequenceOp, usize)>,
}

impl<C: Clone + Eq + Zero> ConsequenceMatrix<C> {
    fn from_consequences(
        arity: u32,
        source_degree: u32,
        source_multiplicity: u32,
        consequences: Consequences<C>,
    ) -> Result<Self> {
        let source_dimension =
            enumerate_monomials(arity, source_degree, source_multiplicity)?.len();
        let columns =
            enumerate_monomials(arity, source_degree + arity - 1, source_multiplicity + 1)?;
        let index: BTreeMap<&OperatorMonomial, usize> =
            columns.iter().enumerate().map(|(k, m)| (m, k)).collect();
        let mut rows = Vec::with_capacity(consequences.polynomials.len());
        for consequence in &consequences.polynomials {
            let mut row = Vec::with_capacity(consequence.len());
            for (monomial, coeff) in consequence.terms() {
                let col = *index
                    .get(monomial)
                    .expect("consequence monomial lies in the target basis");
                row.push((col, coeff.clone()));
            }
            row.sort_by_key(|&(col, _)| col);
            rows.push(row);
        }
        Ok(ConsequenceMatrix {
            arity,
            source_degree,
            source_multiplicity,
            source_dimension,
            columns,
            rows,
            descriptors: consequences.ops,
            duplicates: consequences.duplicates,
        })
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn source_degree(&self) -> u32 {
        self.source_degree
    }

    pub fn source_multiplicity(&self) -> u32 {
        self.source_multiplicity
    }

    /// Number of source coefficients (length of candidate vectors).
    pub fn source_dimension(&self) -> usize {
        self.source_dimension
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[OperatorMonomial] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<(usize, C)>] {
        &self.rows
    }

    /// Which composition produced each row.
    pub fn descriptors(&self) -> &[ConsequenceOp] {
        &self.descriptors
    }

    /// Raw compositions that collapsed onto an earlier row.
    pub fn duplicates(&self) -> &[(ConsequenceOp, usize)] {
        &self.duplicates
    }

    pub fn entry(&self, row: usize, col: usize) -> Option<&C> {
        self.rows[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .ok()
            .map(|k| &self.rows[row][k].1)
    }
}

impl<C: Clone + Eq + Zero + fmt::Display> ConsequenceMatrix<C> {
    /// Text rendering with `.` for zero entries.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut dense: Vec<String> = vec![".".into(); self.columns.len()];
            for (col, value) in row {
                dense[*col] = value.to_string();
            }
            out.push_str(&dense.join(" "));
            out.push('\n');
        }
        out
    }

    /// Dense CSV with explicit zeros.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        for row in &self.rows {
            let mut dense: Vec<String> = vec!["0".into(); self.columns.len()];
            for (col, value) in row {
                dense[*col] = value.to_string();
            }
            writeln!(w, "{}", dense.join(","))?;
        }
        Ok(())
    }

    /// Sparse triples with 1-based row/column indices.
    pub fn write_json(&self, mut w: impl Write) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Entry {
            row: usize,
            col: usize,
            value: String,
        }
        #[derive(Serialize)]
        struct Dump {
            rows: usize,
            cols: usize,
            entries: Vec<Entry>,
        }
        let entries = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter().map(move |(c, value)| Entry {
                    row: r + 1,
                    col: c + 1,
                    value: value.to_string(),
                })
            })
            .collect();
        let dump = Dump {
            rows: self.rows.len(),
            cols: self.columns.len(),
            entries,
        };
        serde_json::to_writer_pretty(&mut w, &dump)?;
        writeln!(w)
    }
}

/// Builds the numeric matrix of consequences of a concrete identity.
pub fn build_matrix(poly: &OperatorPolynomial) -> Result<ConsequenceMatrix<BigRational>> {
    let consequences = generate_consequences(poly)?;
    ConsequenceMatrix::from_consequences(
        poly.arity(),
        poly.degree(),
        poly.multiplicity(),
        consequences,
    )
}

/// Builds the symbolic template for the generic identity of the given shape.
/// Instantiating the template at a coefficient vector reproduces the numeric
/// matrix without re-deriving any composition.
pub fn build_template(
    arity: u32,
    degree: u32,
    multiplicity: u32,
) -> Result<ConsequenceMatrix<LinearForm>> {
    let generic = SymbolicPolynomial::generic(arity, degree, multiplicity)?;
    let consequences = generate_consequences(&generic)?;
    ConsequenceMatrix::from_consequences(arity, degree, multiplicity, consequences)
}

impl ConsequenceMatrix<LinearForm> {
    /// Evaluates every linear-form entry at the coefficient vector. Rows are
    /// kept as-is (duplicate or zero rows are not collapsed), so the result
    /// has the same row count as the template.
    pub fn instantiate(&self, values: &[BigRational]) -> Result<ConsequenceMatrix<BigRational>> {
        if values.len() != self.source_dimension {
            return Err(Error::Parameter(format!(
                "coefficient vector has length {} but the template has {} source coefficients",
                values.len(),
                self.source_dimension
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = Vec::with_capacity(row.len());
                for (col, form) in row {
                    let value = form.eval(|id| values[(id - 1) as usize].clone());
                    if !value.is_zero() {
                        out.push((*col, value));
                    }
                }
                out
            })
            .collect();
        Ok(ConsequenceMatrix {
            arity: self.arity,
            source_degree: self.source_degree,
            source_multiplicity: self.source_multiplicity,
            source_dimension: self.source_dimension,
            columns: self.columns.clone(),
            rows,
            descriptors: self.descriptors.clone(),
            duplicates: self.duplicates.clone(),
        })
    }
}

impl ConsequenceMatrix<BigRational> {
    /// Copies the entries into a general exact matrix for rank computations.
    pub fn to_exact(&self) -> ExactMatrix {
        let mut m = ExactMatrix::zeros(self.rows.len(), self.columns.len());
        for (r, row) in self.rows.iter().enumerate() {
            for (c, value) in row {
                m.set(r, *c, value.clone());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn op_count_for_ternary_degree_three() {
        assert_eq!(consequence_ops(3, 3).len(), 60);
    }

    #[test]
    fn generic_mult1_has_42_distinct_consequences() {
        let generic = SymbolicPolynomial::generic(3, 3, 1).unwrap();
        let consequences = generate_consequences(&generic).unwrap();
        assert_eq!(consequences.polynomials.len(), 42);
        assert_eq!(consequences.duplicates.len(), 18);
    }

    #[test]
    fn first_template_row_lands_on_columns_4_5_21_22() {
        let template = build_template(3, 3, 1).unwrap();
        let row: Vec<(usize, String)> = template.rows()[0]
            .iter()
            .map(|(c, form)| (c + 1, form.to_string()))
            .collect();
        assert_eq!(
            row,
            vec![
                (4, "a1".into()),
                (5, "a2".into()),
                (21, "a3".into()),
                (22, "a4".into())
            ]
        );
    }

    #[test]
    fn monomial_identity_has_unit_rows() {
        let basis = enumerate_monomials(3, 3, 1).unwrap();
        let single =
            OperatorPolynomial::new(3, vec![(basis[0].clone(), BigRational::one())]).unwrap();
        let matrix = build_matrix(&single).unwrap();
        for row in matrix.rows() {
            assert_eq!(row.len(), 1);
            assert!(row[0].1.is_one());
        }
    }

    #[test]
    fn instantiation_checks_length() {
        let template = build_template(3, 3, 1).unwrap();
        let err = template.instantiate(&vec![BigRational::one(); 3]);
        assert!(matches!(err, Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_vector_instantiates_to_zero_matrix() {
        let template = build_template(3, 3, 1).unwrap();
        let zero = template.instantiate(&vec![BigRational::zero(); 4]).unwrap();
        assert!(zero.rows().iter().all(|row| row.is_empty()));
        assert_eq!(zero.row_count(), 42);
    }

    #[test]
    fn template_dimensions() {
        let t1 = build_template(3, 3, 1).unwrap();
        assert_eq!((t1.row_count(), t1.column_count()), (42, 42));
        let t2 = build_template(3, 3, 2).unwrap();
        assert_eq!((t2.row_count(), t2.column_count()), (42, 140));
    }

    #[test]
    fn text_rendering_uses_dots() {
        let template = build_template(3, 3, 1).unwrap();
        let text = template.render_text();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first.split(' ').take(6).collect::<Vec<_>>(),
            vec![".", ".", ".", "a1", "a2", "."]
        );
    }
}
