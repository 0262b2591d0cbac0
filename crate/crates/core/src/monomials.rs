//! Operator monomials over one n-ary associative product and one unary
//! operator, kept in the associativity normal form (no product directly
//! under a product), together with their Dyck-word encoding, the lex order,
//! enumeration by (degree, multiplicity), and the counting formula.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// One node of a monomial tree.
///
/// A `Product` holds the factors of a flat n-ary product: its length is
/// at least n and congruent to 1 mod (n-1), and none of its children is
/// itself a `Product`. An `OperatorApp` is one application of the unary
/// operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MonomialNode {
    Leaf,
    Product(Vec<MonomialNode>),
    OperatorApp(Box<MonomialNode>),
}

impl MonomialNode {
    pub fn degree(&self) -> u32 {
        match self {
            MonomialNode::Leaf => 1,
            MonomialNode::Product(children) => children.iter().map(|c| c.degree()).sum(),
            MonomialNode::OperatorApp(child) => child.degree(),
        }
    }

    pub fn multiplicity(&self) -> u32 {
        match self {
            MonomialNode::Leaf => 0,
            MonomialNode::Product(children) => children.iter().map(|c| c.multiplicity()).sum(),
            MonomialNode::OperatorApp(child) => 1 + child.multiplicity(),
        }
    }

    fn check(&self, arity: u32) -> Result<()> {
        match self {
            MonomialNode::Leaf => Ok(()),
            MonomialNode::OperatorApp(child) => child.check(arity),
            MonomialNode::Product(children) => {
                let len = children.len() as u32;
                if len < arity || (len - 1) % (arity - 1) != 0 {
                    return Err(Error::InvalidMonomial(format!(
                        "product with {len} factors is invalid for arity {arity}"
                    )));
                }
                for child in children {
                    if matches!(child, MonomialNode::Product(_)) {
                        return Err(Error::InvalidMonomial(
                            "product directly under a product (not flattened)".into(),
                        ));
                    }
                    child.check(arity)?;
                }
                Ok(())
            }
        }
    }

    fn push_dyck(&self, out: &mut Vec<Paren>) {
        match self {
            MonomialNode::Leaf => {
                out.push(Paren::Open);
                out.push(Paren::Close);
            }
            MonomialNode::Product(children) => {
                for child in children {
                    child.push_dyck(out);
                }
            }
            MonomialNode::OperatorApp(child) => {
                out.push(Paren::Open);
                child.push_dyck(out);
                out.push(Paren::Close);
            }
        }
    }
}

/// One symbol of a Dyck word. `Open` sorts before `Close`, so the derived
/// order on words of equal length is exactly the lex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Paren {
    Open,
    Close,
}

/// A balanced string of parentheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyckWord(Vec<Paren>);

impl DyckWord {
    /// Builds a word after checking balance.
    pub fn new(symbols: Vec<Paren>) -> Result<Self> {
        let mut depth: i64 = 0;
        for s in &symbols {
            depth += match s {
                Paren::Open => 1,
                Paren::Close => -1,
            };
            if depth < 0 {
                return Err(Error::Parameter("unbalanced Dyck word".into()));
            }
        }
        if depth != 0 {
            return Err(Error::Parameter("unbalanced Dyck word".into()));
        }
        Ok(DyckWord(symbols))
    }

    pub fn symbols(&self) -> &[Paren] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DyckWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Paren::Open => "(",
                Paren::Close => ")",
            })?;
        }
        Ok(())
    }
}

/// An n-ary operator monomial in normal form. Indeterminates are positional
/// (the underlying operad is nonsymmetric), so leaves carry no labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperatorMonomial {
    arity: u32,
    root: MonomialNode,
}

impl OperatorMonomial {
    /// Builds a monomial, validating the normal-form invariants.
    pub fn new(arity: u32, root: MonomialNode) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Parameter(format!("arity {arity} < 2")));
        }
        root.check(arity)?;
        Ok(OperatorMonomial { arity, root })
    }

    /// Internal constructor for nodes already known to be in normal form.
    pub(crate) fn from_valid(arity: u32, root: MonomialNode) -> Self {
        debug_assert!(root.check(arity).is_ok());
        OperatorMonomial { arity, root }
    }

    /// The single indeterminate.
    pub fn leaf(arity: u32) -> Result<Self> {
        Self::new(arity, MonomialNode::Leaf)
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn root(&self) -> &MonomialNode {
        &self.root
    }

    /// Number of indeterminates.
    pub fn degree(&self) -> u32 {
        self.root.degree()
    }

    /// Number of operator applications.
    pub fn multiplicity(&self) -> u32 {
        self.root.multiplicity()
    }

    /// Total number of operations: multiplicity + (degree-1)/(arity-1).
    pub fn weight(&self) -> u32 {
        self.multiplicity() + (self.degree() - 1) / (self.arity - 1)
    }

    /// Encodes the monomial as a Dyck word of length 2(degree+multiplicity):
    /// every leaf becomes a nesting and every operator application a pair of
    /// enclosing parentheses.
    pub fn to_dyck(&self) -> DyckWord {
        let mut out = Vec::with_capacity(2 * (self.degree() + self.multiplicity()) as usize);
        self.root.push_dyck(&mut out);
        DyckWord(out)
    }

    /// Rendering with iterated operators written unpowered, `L(L(*))`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        render_node(&self.root, &mut s);
        s
    }

    /// Compact rendering with powers, `L^2(***)`.
    pub fn render_powered(&self) -> String {
        let mut s = String::new();
        render_node_powered(&self.root, &mut s);
        s
    }
}

fn render_node(node: &MonomialNode, out: &mut String) {
    match node {
        MonomialNode::Leaf => out.push('*'),
        MonomialNode::Product(children) => {
            for child in children {
                render_node(child, out);
            }
        }
        MonomialNode::OperatorApp(child) => {
            out.push_str("L(");
            render_node(child, out);
            out.push(')');
        }
    }
}

fn render_node_powered(node: &MonomialNode, out: &mut String) {
    match node {
        MonomialNode::Leaf => out.push('*'),
        MonomialNode::Product(children) => {
            for child in children {
                render_node_powered(child, out);
            }
        }
        MonomialNode::OperatorApp(_) => {
            let mut power = 0u32;
            let mut inner = node;
            while let MonomialNode::OperatorApp(child) = inner {
                power += 1;
                inner = child;
            }
            if power == 1 {
                out.push_str("L(");
            } else {
                out.push_str(&format!("L^{power}("));
            }
            render_node_powered(inner, out);
            out.push(')');
        }
    }
}

impl fmt::Display for OperatorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl PartialOrd for OperatorMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OperatorMonomial {
    /// Total order: by (arity, degree, multiplicity), then lex on the Dyck
    /// word. Within one (arity, degree, multiplicity) class the Dyck map is
    /// injective, so the final structural tiebreak never fires there.
    fn cmp(&self, other: &Self) -> Ordering {
        self.arity
            .cmp(&other.arity)
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| self.multiplicity().cmp(&other.multiplicity()))
            .then_with(|| self.to_dyck().cmp(&other.to_dyck()))
            .then_with(|| self.root.cmp(&other.root))
    }
}

/// Lex comparison pulled back from Dyck words: smaller means the first
/// differing symbol is an open parenthesis. Only defined for monomials of
/// equal arity, degree, and multiplicity.
pub fn lex_compare(a: &OperatorMonomial, b: &OperatorMonomial) -> Result<Ordering> {
    if a.arity != b.arity || a.degree() != b.degree() || a.multiplicity() != b.multiplicity() {
        return Err(Error::ComparisonDomain(
            a.arity,
            a.degree(),
            a.multiplicity(),
            b.arity,
            b.degree(),
            b.multiplicity(),
        ));
    }
    Ok(a.to_dyck().cmp(&b.to_dyck()))
}

/// The factors of the top-level product, or the node itself as a singleton.
fn top_items(node: &MonomialNode) -> Vec<MonomialNode> {
    match node {
        MonomialNode::Product(children) => children.clone(),
        other => vec![other.clone()],
    }
}

fn from_items(mut items: Vec<MonomialNode>) -> MonomialNode {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        MonomialNode::Product(items)
    }
}

/// All monomials obtained from `node` by enclosing one contiguous valid
/// top-level segment in an operator application. Every monomial of
/// multiplicity q arises this way from one of multiplicity q-1.
fn operator_wraps(node: &MonomialNode, arity: u32) -> Vec<MonomialNode> {
    let items = top_items(node);
    let k = items.len();
    let step = (arity - 1) as usize;
    let mut out = Vec::new();
    for i in 0..k {
        for j in (i..k).step_by(step) {
            let segment = items[i..=j].to_vec();
            let inner = from_items(segment);
            let wrapped = MonomialNode::OperatorApp(Box::new(inner));
            let mut new_items = Vec::with_capacity(k - (j - i));
            new_items.extend_from_slice(&items[..i]);
            new_items.push(wrapped);
            new_items.extend_from_slice(&items[j + 1..]);
            out.push(from_items(new_items));
        }
    }
    out
}

/// Enumerates every operator monomial with the given arity, degree, and
/// multiplicity, exactly once, sorted by the lex order. Multiplicity-q
/// monomials are generated from multiplicity-(q-1) monomials by the
/// segment-wrapping step, with duplicates removed by a set.
pub fn enumerate_monomials(
    arity: u32,
    degree: u32,
    multiplicity: u32,
) -> Result<Vec<OperatorMonomial>> {
    if arity < 2 {
        return Err(Error::Parameter(format!("arity {arity} < 2")));
    }
    if degree < 1 {
        return Err(Error::Parameter(format!("degree {degree} < 1")));
    }
    if (degree - 1) % (arity - 1) != 0 {
        return Err(Error::Parameter(format!(
            "degree {degree} is not congruent to 1 mod {}",
            arity - 1
        )));
    }
    let base = if degree == 1 {
        MonomialNode::Leaf
    } else {
        MonomialNode::Product(vec![MonomialNode::Leaf; degree as usize])
    };
    let mut level: BTreeSet<MonomialNode> = BTreeSet::new();
    level.insert(base);
    for _ in 0..multiplicity {
        let mut next = BTreeSet::new();
        for node in &level {
            next.extend(operator_wraps(node, arity));
        }
        level = next;
    }
    let mut out: Vec<OperatorMonomial> = level
        .into_iter()
        .map(|root| OperatorMonomial::from_valid(arity, root))
        .collect();
    out.sort();
    Ok(out)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut result = BigUint::one();
    for i in 0..k {
        result = result * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    result
}

/// The number of n-ary operator monomials of weight `w` and multiplicity `m`:
///
/// ```text
/// N_n(w, m) = 1/(w+1) * C(w+1, m+1) * C(w + (w-m)(n-2) + 1, m)
/// ```
///
/// computed exactly (the division by w+1 is exact). Degenerate inputs with
/// m > w yield zero by convention.
pub fn count_monomials(arity: u32, weight: u32, multiplicity: u32) -> Result<BigUint> {
    if arity < 2 {
        return Err(Error::Parameter(format!("arity {arity} < 2")));
    }
    let (w, m, n) = (weight as u64, multiplicity as u64, arity as u64);
    if m > w {
        return Ok(BigUint::zero());
    }
    let product = binomial(w + 1, m + 1) * binomial(w + (w - m) * (n - 2) + 1, m);
    let divisor = BigUint::from(w + 1);
    debug_assert!((&product % &divisor).is_zero());
    Ok(product / divisor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(arity: u32, s: &str) -> OperatorMonomial {
        // minimal parser for tests: '*' leaf, 'L(...)' operator, juxtaposition
        fn node(chars: &mut std::iter::Peekable<std::str::Chars>) -> Vec<MonomialNode> {
            let mut items = Vec::new();
            while let Some(&c) = chars.peek() {
                match c {
                    '*' => {
                        chars.next();
                        items.push(MonomialNode::Leaf);
                    }
                    'L' => {
                        chars.next();
                        assert_eq!(chars.next(), Some('('));
                        let inner = node(chars);
                        assert_eq!(chars.next(), Some(')'));
                        let inner = if inner.len() == 1 {
                            inner.into_iter().next().unwrap()
                        } else {
                            MonomialNode::Product(inner)
                        };
                        items.push(MonomialNode::OperatorApp(Box::new(inner)));
                    }
                    ')' => break,
                    other => panic!("unexpected {other}"),
                }
            }
            items
        }
        let mut chars = s.chars().peekable();
        let items = node(&mut chars);
        let root = if items.len() == 1 {
            items.into_iter().next().unwrap()
        } else {
            MonomialNode::Product(items)
        };
        OperatorMonomial::new(arity, root).unwrap()
    }

    #[test]
    fn dyck_of_examples() {
        assert_eq!(parse(3, "L(***)").to_dyck().to_string(), "(()()())");
        assert_eq!(parse(3, "*L(*)L(*)").to_dyck().to_string(), "()(())(())");
        assert_eq!(parse(3, "*").to_dyck().to_string(), "()");
    }

    #[test]
    fn lex_compare_examples() {
        let a = parse(3, "L(***)");
        let b = parse(3, "L(*)**");
        assert_eq!(lex_compare(&a, &b).unwrap(), Ordering::Less);
        let c = parse(3, "**L(*)");
        assert_eq!(lex_compare(&c, &c).unwrap(), Ordering::Equal);
        let d = parse(3, "L(L(*))**");
        let e = parse(3, "*L(L(*))*");
        assert_eq!(lex_compare(&d, &e).unwrap(), Ordering::Less);
    }

    #[test]
    fn lex_compare_rejects_mismatched_class() {
        let a = parse(3, "L(***)");
        let b = parse(3, "***");
        assert!(matches!(
            lex_compare(&a, &b),
            Err(Error::ComparisonDomain(..))
        ));
    }

    #[test]
    fn enumerate_degree_one() {
        let mons = enumerate_monomials(3, 1, 0).unwrap();
        assert_eq!(mons.len(), 1);
        assert_eq!(mons[0].render(), "*");
    }

    #[test]
    fn enumerate_rejects_bad_degree() {
        assert!(matches!(
            enumerate_monomials(3, 4, 1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn enumeration_sizes_match_table() {
        assert_eq!(enumerate_monomials(3, 3, 1).unwrap().len(), 4);
        assert_eq!(enumerate_monomials(3, 3, 2).unwrap().len(), 10);
        assert_eq!(enumerate_monomials(3, 3, 3).unwrap().len(), 20);
        assert_eq!(enumerate_monomials(3, 5, 2).unwrap().len(), 42);
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_monomials(3, 4, 2).unwrap(), BigUint::from(42u32));
        for w in 0..8 {
            assert_eq!(count_monomials(3, w, 0).unwrap(), BigUint::one());
        }
        assert_eq!(count_monomials(2, 3, 1).unwrap(), BigUint::from(6u32));
        assert!(count_monomials(3, 2, 5).unwrap().is_zero());
    }

    #[test]
    fn powered_rendering() {
        let m = parse(3, "L(L(***))");
        assert_eq!(m.render(), "L(L(***))");
        assert_eq!(m.render_powered(), "L^2(***)");
        let n = parse(3, "*L(*)L(*)");
        assert_eq!(n.render_powered(), "*L(*)L(*)");
    }

    #[test]
    fn weight_bookkeeping() {
        let m = parse(3, "L(L(*)**)");
        assert_eq!(m.degree(), 3);
        assert_eq!(m.multiplicity(), 2);
        assert_eq!(m.weight(), 3);
    }
}
