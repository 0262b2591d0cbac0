//! Partial compositions of operator monomials and polynomials with the two
//! generators: the n-ary product and the unary operator. Results are kept in
//! the associativity normal form, so composing a product into a product slot
//! splices the factors inline.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linear_form::LinearForm;
use crate::monomials::{MonomialNode, OperatorMonomial};

/// Outcome of rewriting one leaf: either a replacement node, or a run of
/// factors to splice into the surrounding product.
enum LeafRewrite {
    Node(MonomialNode),
    Splice(Vec<MonomialNode>),
}

fn rewrite_leaf(
    node: &MonomialNode,
    target: u32,
    seen: &mut u32,
    rewrite: &impl Fn() -> LeafRewrite,
) -> LeafRewrite {
    match node {
        MonomialNode::Leaf => {
            *seen += 1;
            if *seen == target {
                rewrite()
            } else {
                LeafRewrite::Node(MonomialNode::Leaf)
            }
        }
        MonomialNode::OperatorApp(child) => {
            let inner = match rewrite_leaf(child, target, seen, rewrite) {
                LeafRewrite::Node(n) => n,
                LeafRewrite::Splice(items) => MonomialNode::Product(items),
            };
            LeafRewrite::Node(MonomialNode::OperatorApp(Box::new(inner)))
        }
        MonomialNode::Product(children) => {
            let mut out = Vec::with_capacity(children.len());
            for child in children {
                match rewrite_leaf(child, target, seen, rewrite) {
                    LeafRewrite::Node(n) => out.push(n),
                    LeafRewrite::Splice(items) => out.extend(items),
                }
            }
            LeafRewrite::Node(MonomialNode::Product(out))
        }
    }
}

fn check_position(position: u32, max: u32) -> Result<()> {
    if position == 0 || position > max {
        return Err(Error::Position { position, max });
    }
    Ok(())
}

impl OperatorMonomial {
    /// `M ∘_i p`: replaces the i-th leaf (left to right, 1-based) by a
    /// product of `arity` fresh leaves, splicing inline when the leaf sits
    /// in a product. Degree grows by arity-1; multiplicity is unchanged.
    pub fn insert_product(&self, position: u32) -> Result<OperatorMonomial> {
        check_position(position, self.degree())?;
        let arity = self.arity();
        let mut seen = 0;
        let result = rewrite_leaf(self.root(), position, &mut seen, &|| {
            LeafRewrite::Splice(vec![MonomialNode::Leaf; arity as usize])
        });
        let root = match result {
            LeafRewrite::Node(n) => n,
            LeafRewrite::Splice(items) => MonomialNode::Product(items),
        };
        Ok(OperatorMonomial::from_valid(arity, root))
    }

    /// `p ∘_i M`: the arity-wide product with this monomial in slot `i` and
    /// fresh leaves elsewhere, flattened if the monomial is itself a product.
    pub fn embed_in_slot(&self, slot: u32) -> Result<OperatorMonomial> {
        let arity = self.arity();
        check_position(slot, arity)?;
        let mut items = Vec::with_capacity(arity as usize);
        for s in 1..=arity {
            if s == slot {
                match self.root() {
                    MonomialNode::Product(children) => items.extend(children.iter().cloned()),
                    other => items.push(other.clone()),
                }
            } else {
                items.push(MonomialNode::Leaf);
            }
        }
        Ok(OperatorMonomial::from_valid(
            arity,
            MonomialNode::Product(items),
        ))
    }

    /// `M ∘_i L`: wraps the i-th leaf in an operator application.
    /// Multiplicity grows by one; degree is unchanged.
    pub fn wrap_leaf(&self, position: u32) -> Result<OperatorMonomial> {
        check_position(position, self.degree())?;
        let mut seen = 0;
        let result = rewrite_leaf(self.root(), position, &mut seen, &|| {
            LeafRewrite::Node(MonomialNode::OperatorApp(Box::new(MonomialNode::Leaf)))
        });
        let root = match result {
            LeafRewrite::Node(n) => n,
            LeafRewrite::Splice(_) => unreachable!(),
        };
        Ok(OperatorMonomial::from_valid(self.arity(), root))
    }

    /// `L ∘ M`: wraps the whole monomial in an operator application.
    pub fn wrap_root(&self) -> OperatorMonomial {
        OperatorMonomial::from_valid(
            self.arity(),
            MonomialNode::OperatorApp(Box::new(self.root().clone())),
        )
    }
}

/// One partial composition with a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Composition {
    /// `R ∘_i p` — insert the product at leaf i.
    ProductAtLeaf(u32),
    /// `p ∘_i R` — embed R in slot i of the product.
    IntoProductSlot(u32),
    /// `R ∘_i L` — apply the operator at leaf i.
    OperatorAtLeaf(u32),
    /// `L ∘ R` — apply the operator around the whole identity.
    OperatorAtRoot,
}

impl Composition {
    pub fn apply(&self, monomial: &OperatorMonomial) -> Result<OperatorMonomial> {
        match *self {
            Composition::ProductAtLeaf(i) => monomial.insert_product(i),
            Composition::IntoProductSlot(i) => monomial.embed_in_slot(i),
            Composition::OperatorAtLeaf(i) => monomial.wrap_leaf(i),
            Composition::OperatorAtRoot => Ok(monomial.wrap_root()),
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Composition::ProductAtLeaf(i) => write!(f, "R.p{i}"),
            Composition::IntoProductSlot(i) => write!(f, "p{i}.R"),
            Composition::OperatorAtLeaf(i) => write!(f, "R.L{i}"),
            Composition::OperatorAtRoot => write!(f, "L.R"),
        }
    }
}

/// A nonzero linear combination of operator monomials sharing one
/// (arity, degree, multiplicity). The coefficient type is either exact
/// rationals or symbolic linear forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<C> {
    arity: u32,
    degree: u32,
    multiplicity: u32,
    terms: BTreeMap<OperatorMonomial, C>,
}

/// An operator identity with exact rational coefficients.
pub type OperatorPolynomial = Polynomial<BigRational>;

/// An operator identity with symbolic coefficients.
pub type SymbolicPolynomial = Polynomial<LinearForm>;

impl<C: Clone + Eq + Zero> Polynomial<C> {
    /// Builds a polynomial from terms, summing repeated monomials and
    /// dropping zero coefficients. All monomials must share the arity,
    /// degree, and multiplicity, and at least one nonzero term must remain.
    pub fn new(arity: u32, terms: impl IntoIterator<Item = (OperatorMonomial, C)>) -> Result<Self> {
        let mut map: BTreeMap<OperatorMonomial, C> = BTreeMap::new();
        let mut shape: Option<(u32, u32)> = None;
        for (monomial, coeff) in terms {
            if monomial.arity() != arity {
                return Err(Error::Parameter(format!(
                    "monomial arity {} differs from polynomial arity {arity}",
                    monomial.arity()
                )));
            }
            let dm = (monomial.degree(), monomial.multiplicity());
            match shape {
                None => shape = Some(dm),
                Some(expected) if expected == dm => {}
                Some(expected) => {
                    return Err(Error::Parameter(format!(
                        "mixed (degree, multiplicity): {expected:?} vs {dm:?}"
                    )))
                }
            }
            match map.entry(monomial) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(coeff);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().clone() + coeff;
                    *e.get_mut() = sum;
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        let Some((degree, multiplicity)) = shape.filter(|_| !map.is_empty()) else {
            return Err(Error::ZeroPolynomial);
        };
        Ok(Polynomial {
            arity,
            degree,
            multiplicity,
            terms: map,
        })
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OperatorMonomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, monomial: &OperatorMonomial) -> Option<&C> {
        self.terms.get(monomial)
    }

    /// Applies one partial composition term by term, summing coefficients of
    /// coinciding result monomials (composition is bilinear).
    pub fn compose(&self, op: Composition) -> Result<Self> {
        let mut out: BTreeMap<OperatorMonomial, C> = BTreeMap::new();
        for (monomial, coeff) in &self.terms {
            let image = op.apply(monomial)?;
            match out.entry(image) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(coeff.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().clone() + coeff.clone();
                    *e.get_mut() = sum;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        // Each generator composition is injective on monomials, so a nonzero
        // polynomial cannot collapse to zero.
        let mut iter = out.keys();
        let first = iter.next().ok_or(Error::ZeroPolynomial)?;
        Ok(Polynomial {
            arity: self.arity,
            degree: first.degree(),
            multiplicity: first.multiplicity(),
            terms: out,
        })
    }
}

impl OperatorPolynomial {
    /// Scales every coefficient; the scalar must be nonzero.
    pub fn scaled(&self, scalar: &BigRational) -> Result<Self> {
        if scalar.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c * scalar))
            .collect();
        Ok(Polynomial {
            arity: self.arity,
            degree: self.degree,
            multiplicity: self.multiplicity,
            terms,
        })
    }

    /// Term-wise sum; errors if everything cancels.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if (self.arity, self.degree, self.multiplicity)
            != (other.arity, other.degree, other.multiplicity)
        {
            return Err(Error::Parameter(
                "cannot add polynomials of different shape".into(),
            ));
        }
        Polynomial::new(
            self.arity,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Two operator identities are equivalent when one is a nonzero scalar
    /// multiple of the other.
    pub fn is_equivalent_to(&self, other: &Self) -> bool {
        if (self.arity, self.degree, self.multiplicity)
            != (other.arity, other.degree, other.multiplicity)
            || self.terms.len() != other.terms.len()
        {
            return false;
        }
        let (first_monomial, first_coeff) = self.terms.iter().next().expect("nonzero");
        let Some(other_coeff) = other.terms.get(first_monomial) else {
            return false;
        };
        let scalar = other_coeff / first_coeff;
        self.terms
            .iter()
            .all(|(m, c)| other.terms.get(m) == Some(&(c * &scalar)))
    }
}

impl SymbolicPolynomial {
    /// The generic identity of the given shape: the linear combination of
    /// the full lex-ordered monomial basis with symbolic coefficients
    /// `a1..aN` in basis order.
    pub fn generic(arity: u32, degree: u32, multiplicity: u32) -> Result<Self> {
        let basis = crate::monomials::enumerate_monomials(arity, degree, multiplicity)?;
        Polynomial::new(
            arity,
            basis
                .into_iter()
                .enumerate()
                .map(|(k, m)| (m, LinearForm::symbol(k as u32 + 1))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomials::enumerate_monomials;
    use num_traits::One;

    fn find(arity: u32, degree: u32, multiplicity: u32, rendered: &str) -> OperatorMonomial {
        enumerate_monomials(arity, degree, multiplicity)
            .unwrap()
            .into_iter()
            .find(|m| m.render() == rendered)
            .unwrap_or_else(|| panic!("no monomial {rendered}"))
    }

    #[test]
    fn product_composition_collapses_by_associativity() {
        let r = find(3, 3, 2, "L(L(***))");
        for i in 1..=3 {
            assert_eq!(r.insert_product(i).unwrap().render(), "L(L(*****))");
        }
    }

    #[test]
    fn product_composition_from_single_leaf() {
        let leaf = OperatorMonomial::leaf(3).unwrap();
        assert_eq!(leaf.insert_product(1).unwrap().render(), "***");
    }

    #[test]
    fn product_composition_splices() {
        let m = find(3, 3, 1, "L(*)**");
        let image = m.insert_product(2).unwrap();
        assert_eq!(image.render(), "L(*)****");
        assert_eq!(image.to_dyck().to_string(), "(())()()()()");
    }

    #[test]
    fn embedding_in_product_slots() {
        let r = find(3, 3, 2, "L(L(***))");
        assert_eq!(r.embed_in_slot(2).unwrap().render(), "*L(L(***))*");
        let flat = find(3, 3, 0, "***");
        assert_eq!(flat.embed_in_slot(1).unwrap().render(), "*****");
        let mid = find(3, 3, 1, "*L(*)*");
        let image = mid.embed_in_slot(3).unwrap();
        assert_eq!(image.render(), "***L(*)*");
        assert_eq!(image.to_dyck().to_string(), "()()()(())()");
    }

    #[test]
    fn operator_at_leaf() {
        let r = find(3, 3, 2, "L(L(***))");
        assert_eq!(r.wrap_leaf(2).unwrap().render(), "L(L(*L(*)*))");
        let leaf = OperatorMonomial::leaf(3).unwrap();
        assert_eq!(leaf.wrap_leaf(1).unwrap().render(), "L(*)");
        let m = find(3, 3, 1, "L(*)**");
        assert_eq!(m.wrap_leaf(3).unwrap().render(), "L(*)*L(*)");
    }

    #[test]
    fn operator_at_root() {
        let r = find(3, 3, 2, "L(L(***))");
        assert_eq!(r.wrap_root().render_powered(), "L^3(***)");
        let m = find(3, 3, 1, "**L(*)");
        let image = m.wrap_root();
        assert_eq!(image.render(), "L(**L(*))");
        assert_eq!(image.to_dyck().to_string(), "(()()(()))");
    }

    #[test]
    fn position_errors() {
        let leaf = OperatorMonomial::leaf(3).unwrap();
        assert!(matches!(
            leaf.insert_product(2),
            Err(Error::Position { .. })
        ));
        assert!(matches!(leaf.wrap_leaf(0), Err(Error::Position { .. })));
        assert!(matches!(leaf.embed_in_slot(4), Err(Error::Position { .. })));
    }

    #[test]
    fn composition_bookkeeping() {
        for m in enumerate_monomials(3, 3, 1).unwrap() {
            let a = m.insert_product(1).unwrap();
            assert_eq!((a.degree(), a.multiplicity()), (5, 1));
            let b = m.embed_in_slot(2).unwrap();
            assert_eq!((b.degree(), b.multiplicity()), (5, 1));
            let c = m.wrap_leaf(3).unwrap();
            assert_eq!((c.degree(), c.multiplicity()), (3, 2));
            let d = m.wrap_root();
            assert_eq!((d.degree(), d.multiplicity()), (3, 2));
        }
    }

    #[test]
    fn zero_polynomial_rejected() {
        let m = find(3, 3, 1, "L(***)");
        let one = BigRational::one();
        let err = Polynomial::new(3, vec![(m.clone(), one.clone()), (m, -one)]);
        assert!(matches!(err, Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn single_term_composes() {
        let leaf = OperatorMonomial::leaf(3).unwrap();
        let p = Polynomial::new(3, vec![(leaf, BigRational::one())]).unwrap();
        let q = p.compose(Composition::OperatorAtRoot).unwrap();
        assert_eq!(q.len(), 1);
        let (m, c) = q.terms().next().unwrap();
        assert_eq!(m.render(), "L(*)");
        assert!(c.is_one());
    }

    #[test]
    fn equivalence_is_scalar() {
        let basis = enumerate_monomials(3, 3, 1).unwrap();
        let p = Polynomial::new(
            3,
            basis
                .iter()
                .cloned()
                .zip([1, -1, 2, 0].map(|k| BigRational::from_integer(k.into()))),
        )
        .unwrap();
        let q = p.scaled(&BigRational::from_integer((-3).into())).unwrap();
        assert!(p.is_equivalent_to(&q));
        let r = Polynomial::new(
            3,
            basis
                .iter()
                .cloned()
                .zip([1, 1, 2, 0].map(|k| BigRational::from_integer(k.into()))),
        )
        .unwrap();
        assert!(!p.is_equivalent_to(&r));
    }
}
