//! Integer-coefficient linear forms in named parameters `a1, a2, ...`,
//! used both for the symbolic entries of consequence-matrix templates and
//! for the parametric entries of solution-family templates.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// `constant + sum(coefficient_k * a_k)` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearForm {
    constant: BigInt,
    terms: BTreeMap<u32, BigInt>,
}

impl LinearForm {
    pub fn constant(value: impl Into<BigInt>) -> Self {
        let value = value.into();
        let mut form = LinearForm::default();
        if !value.is_zero() {
            form.constant = value;
        }
        form
    }

    /// The single symbol `a{id}`.
    pub fn symbol(id: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, BigInt::from(1));
        LinearForm {
            constant: BigInt::zero(),
            terms,
        }
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigInt)> {
        self.terms.iter().map(|(&id, c)| (id, c))
    }

    /// Ids of the parameters this form mentions.
    pub fn parameter_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact evaluation with rational parameter values.
    pub fn eval(&self, value_of: impl Fn(u32) -> BigRational) -> BigRational {
        let mut acc = BigRational::from(self.constant.clone());
        for (&id, coeff) in &self.terms {
            acc += BigRational::from(coeff.clone()) * value_of(id);
        }
        acc
    }

    /// Evaluation with integer parameter values.
    pub fn eval_int(&self, value_of: impl Fn(u32) -> BigInt) -> BigInt {
        let mut acc = self.constant.clone();
        for (&id, coeff) in &self.terms {
            acc += coeff * value_of(id);
        }
        acc
    }

    /// Evaluation in the prime field with `p` elements; `value_of` must
    /// return residues in `0..p`.
    pub fn eval_mod(&self, value_of: impl Fn(u32) -> u64, p: u64) -> u64 {
        let mut acc = reduce_bigint_mod(&self.constant, p);
        for (&id, coeff) in &self.terms {
            let c = reduce_bigint_mod(coeff, p);
            acc = (acc as u128 + c as u128 * value_of(id) as u128 % p as u128) as u64 % p;
        }
        acc
    }

    /// Parses forms like `0`, `1`, `-a4`, `-a5-1`, `2a3+1`. Only integer
    /// coefficients and parameters named `a<digits>` are accepted.
    pub fn parse(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parameter("empty linear form".into()));
        }
        let bad =
            |at: usize| Error::Parameter(format!("invalid linear form {input:?} at offset {at}"));
        let bytes = s.as_bytes();
        let mut pos = 0;
        let mut form = LinearForm::default();
        while pos < s.len() {
            let mut sign = 1i64;
            match bytes[pos] {
                b'+' => pos += 1,
                b'-' => {
                    sign = -1;
                    pos += 1;
                }
                _ => {}
            }
            let digits_start = pos;
            while pos < s.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let coeff: Option<i64> = if pos > digits_start {
                Some(
                    s[digits_start..pos]
                        .parse()
                        .map_err(|_| bad(digits_start))?,
                )
            } else {
                None
            };
            if pos < s.len() && bytes[pos] == b'a' {
                pos += 1;
                let id_start = pos;
                while pos < s.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos == id_start {
                    return Err(bad(id_start));
                }
                let id: u32 = s[id_start..pos].parse().map_err(|_| bad(id_start))?;
                let c = BigInt::from(sign * coeff.unwrap_or(1));
                let slot = form.terms.entry(id).or_insert_with(BigInt::zero);
                *slot += c;
            } else {
                match coeff {
                    Some(c) => form.constant += BigInt::from(sign * c),
                    None => return Err(bad(pos)),
                }
            }
        }
        form.terms.retain(|_, c| !c.is_zero());
        Ok(form)
    }
}

pub(crate) fn reduce_bigint_mod(x: &BigInt, p: u64) -> u64 {
    use num_integer::Integer;
    let m = x.mod_floor(&BigInt::from(p));
    let (_, digits) = m.to_u64_digits();
    match digits.as_slice() {
        [] => 0,
        [d] => *d,
        _ => unreachable!("residue below u64 prime"),
    }
}

impl Add for LinearForm {
    type Output = LinearForm;

    fn add(mut self, rhs: LinearForm) -> LinearForm {
        self.constant += rhs.constant;
        for (id, c) in rhs.terms {
            let slot = self.terms.entry(id).or_insert_with(BigInt::zero);
            *slot += c;
        }
        self.terms.retain(|_, c| !c.is_zero());
        self
    }
}

impl Zero for LinearForm {
    fn zero() -> Self {
        LinearForm::default()
    }

    fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }
}

impl fmt::Display for LinearForm {
    /// Renders as `a1`, `a4+a7`, `-a5-1`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&id, coeff) in &self.terms {
            if coeff.is_negative() {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            let abs = coeff.abs();
            if abs != BigInt::from(1) {
                write!(f, "{abs}")?;
            }
            write!(f, "a{id}")?;
            first = false;
        }
        if !self.constant.is_zero() {
            if self.constant.is_negative() {
                write!(f, "-{}", self.constant.abs())?;
            } else if !first {
                write!(f, "+{}", self.constant)?;
            } else {
                write!(f, "{}", self.constant)?;
            }
        }
        Ok(())
    }
}
