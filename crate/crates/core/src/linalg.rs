//! Exact rank computation: Gaussian elimination over prime fields,
//! fraction-free elimination over the rationals, and probabilistic generic
//! rank over function fields by random specialization.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::consequences::ConsequenceMatrix;
use crate::error::{Error, Result};
use crate::linear_form::{reduce_bigint_mod, LinearForm};

/// A sparse exact matrix over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    nrows: usize,
    ncols: usize,
    entries: BTreeMap<(usize, usize), BigRational>,
}

impl ExactMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        ExactMatrix {
            nrows,
            ncols,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a dense integer matrix (test and CLI convenience).
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = ExactMatrix::zeros(nrows, ncols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged rows");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, BigRational::from_integer(v.into()));
            }
        }
        m
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigRational) {
        assert!(row < self.nrows && col < self.ncols, "index out of range");
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> BigRational {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigRational)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    /// Rows scaled to integers (rank is invariant under nonzero row scaling).
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        let mut rows = vec![vec![BigInt::zero(); self.ncols]; self.nrows];
        let mut scale = vec![BigInt::one(); self.nrows];
        for (&(r, _), v) in &self.entries {
            scale[r] = scale[r].lcm(v.denom());
        }
        for (&(r, c), v) in &self.entries {
            rows[r][c] = v.numer() * &scale[r] / v.denom();
        }
        rows
    }

    /// Rank over the rationals via fraction-free (Bareiss) elimination with
    /// exact integer division; pivoting is first nonzero in column order.
    pub fn rank_rational(&self) -> usize {
        bareiss_rank(self.integer_rows())
    }

    /// Rank over the field with `p` elements. Every entry must be reducible,
    /// i.e. no denominator may be divisible by `p`.
    pub fn rank_mod(&self, p: u64) -> Result<usize> {
        if !is_prime(p) {
            return Err(Error::Parameter(format!("modulus {p} is not prime")));
        }
        let mut data = vec![0u64; self.nrows * self.ncols];
        for (&(r, c), v) in &self.entries {
            let den = reduce_bigint_mod(v.denom(), p);
            if den == 0 {
                return Err(Error::Parameter(format!(
                    "entry at ({r}, {c}) has denominator divisible by {p}"
                )));
            }
            let num = reduce_bigint_mod(v.numer(), p);
            data[r * self.ncols + c] = mul_mod(num, mod_inverse(den, p), p);
        }
        Ok(rank_rows_mod(&mut data, self.nrows, self.ncols, p))
    }
}

/// Fraction-free elimination on integer rows; returns the rank.
pub(crate) fn bareiss_rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let bound = nrows.min(ncols);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (before, after) = rows.split_at_mut(rank + 1);
        let pivot_row = &before[rank];
        for row in after.iter_mut() {
            for c in (col + 1)..ncols {
                let value = &pivot_row[col] * &row[c] - &row[col] * &pivot_row[c];
                let (quotient, remainder) = value.div_rem(&prev);
                debug_assert!(remainder.is_zero(), "fraction-free division is exact");
                row[c] = quotient;
            }
            row[col] = BigInt::zero();
        }
        prev = rows[rank][col].clone();
        rank += 1;
        if rank == bound {
            break;
        }
    }
    rank
}

/// Gaussian elimination over F_p on a reduced row-major buffer
/// (all values < p); returns the rank. Works for any prime below 2^63.
pub(crate) fn rank_rows_mod(data: &mut [u64], nrows: usize, ncols: usize, p: u64) -> usize {
    debug_assert_eq!(data.len(), nrows * ncols);
    let bound = nrows.min(ncols);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| data[r * ncols + col] != 0) else {
            continue;
        };
        data.swap_unchecked_rows(rank, pivot, ncols);
        let inv = mod_inverse(data[rank * ncols + col], p);
        for c in col..ncols {
            let v = data[rank * ncols + c];
            data[rank * ncols + c] = mul_mod(v, inv, p);
        }
        for r in (rank + 1)..nrows {
            let factor = data[r * ncols + col];
            if factor == 0 {
                continue;
            }
            let neg = p - factor;
            for c in col..ncols {
                let add = mul_mod(neg, data[rank * ncols + c], p);
                let cell = &mut data[r * ncols + c];
                *cell = (*cell + add) % p;
            }
        }
        rank += 1;
        if rank == bound {
            break;
        }
    }
    rank
}

/// Elimination over F_p with lazy reduction for small primes: entries may be
/// left unreduced between pivot steps because `(nrows+1) * p^2` fits in u64.
/// Roughly one multiply-add per cell update, which is what the exhaustive
/// search hot loop needs.
pub(crate) fn rank_rows_mod_lazy(data: &mut [u64], nrows: usize, ncols: usize, p: u64) -> usize {
    debug_assert!(lazy_reduction_fits(nrows, p));
    let bound = nrows.min(ncols);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| data[r * ncols + col] % p != 0) else {
            continue;
        };
        data.swap_unchecked_rows(rank, pivot, ncols);
        let inv = mod_inverse(data[rank * ncols + col] % p, p);
        for c in col..ncols {
            data[rank * ncols + c] = data[rank * ncols + c] % p * inv % p;
        }
        for r in (rank + 1)..nrows {
            let factor = data[r * ncols + col] % p;
            if factor == 0 {
                continue;
            }
            let neg = p - factor;
            for c in col..ncols {
                data[r * ncols + c] += neg * data[rank * ncols + c];
            }
        }
        rank += 1;
        if rank == bound {
            break;
        }
    }
    rank
}

pub(crate) fn lazy_reduction_fits(nrows: usize, p: u64) -> bool {
    let p = p as u128;
    (nrows as u128 + 1) * p * p + p < (1u128 << 63)
}

trait SwapRows {
    fn swap_unchecked_rows(&mut self, a: usize, b: usize, ncols: usize);
}

impl SwapRows for [u64] {
    fn swap_unchecked_rows(&mut self, a: usize, b: usize, ncols: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a.min(b), a.max(b));
        let (head, tail) = self.split_at_mut(b * ncols);
        head[a * ncols..a * ncols + ncols].swap_with_slice(&mut tail[..ncols]);
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

pub(crate) fn mod_inverse(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The modular-vs-rational rank comparison: over any prime field the rank of
/// an integer matrix is at most its rational rank, because the rank is the
/// maximal size of a nonzero minor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaWitness {
    pub rank_mod: usize,
    pub rank_rational: usize,
}

impl LemmaWitness {
    pub fn holds(&self) -> bool {
        self.rank_mod <= self.rank_rational
    }

    pub fn is_equality(&self) -> bool {
        self.rank_mod == self.rank_rational
    }
}

/// Computes both ranks and returns the witness pair.
pub fn rank_mod_leq_rational(matrix: &ExactMatrix, p: u64) -> Result<LemmaWitness> {
    let witness = LemmaWitness {
        rank_mod: matrix.rank_mod(p)?,
        rank_rational: matrix.rank_rational(),
    };
    debug_assert!(witness.holds());
    Ok(witness)
}

/// Result of a randomized generic-rank computation. The reported rank is
/// always a lower bound on the function-field rank, and equals it except
/// with probability at most `failure_bound` (Schwartz-Zippel: the witnessing
/// minor has degree at most min(rows, cols) in the free coefficients).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericRankReport {
    pub rank: usize,
    pub trials: u32,
    pub prime: u64,
    pub failure_bound: BigRational,
}

impl GenericRankReport {
    /// Human-readable confidence note.
    pub fn note(&self) -> String {
        format!(
            "lower bound certain; equals the function-field rank except with probability <= {} \
             ({} random specializations over F_{})",
            self.failure_bound, self.trials, self.prime
        )
    }
}

/// Assignment of one template coefficient during specialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SymbolSpec {
    Free,
    Fixed(i64),
}

/// Probabilistic rank of a symbolic consequence matrix over the function
/// field in the `free` coefficients, with the remaining coefficients fixed
/// to the given integers. Takes the maximum rank over `trials` independent
/// uniform specializations of the free coefficients in F_q; deterministic
/// for a fixed seed.
pub fn generic_rank(
    template: &ConsequenceMatrix<LinearForm>,
    free: &BTreeSet<u32>,
    fixed: &BTreeMap<u32, i64>,
    trials: u32,
    seed: u64,
    q: u64,
) -> Result<GenericRankReport> {
    let dimension = template.source_dimension() as u32;
    let mut spec = Vec::with_capacity(dimension as usize);
    for id in 1..=dimension {
        match (free.contains(&id), fixed.get(&id)) {
            (true, None) => spec.push(SymbolSpec::Free),
            (false, Some(&v)) => spec.push(SymbolSpec::Fixed(v)),
            (true, Some(_)) => {
                return Err(Error::Parameter(format!(
                    "coefficient a{id} is both free and fixed"
                )))
            }
            (false, None) => {
                return Err(Error::Parameter(format!(
                    "coefficient a{id} is neither free nor fixed"
                )))
            }
        }
    }
    if fixed
        .keys()
        .chain(free.iter())
        .any(|&id| id == 0 || id > dimension)
    {
        return Err(Error::Parameter(format!(
            "coefficient ids must lie in 1..={dimension}"
        )));
    }
    specialized_rank(template, trials, seed, q, move |rng, q| {
        spec.iter()
            .map(|s| match *s {
                SymbolSpec::Free => rng.gen_range(0..q),
                SymbolSpec::Fixed(v) => v.rem_euclid(q as i64) as u64,
            })
            .collect()
    })
}

/// Shared driver for randomized specializations: `draw` produces the source
/// coefficient residues for one trial.
pub(crate) fn specialized_rank(
    template: &ConsequenceMatrix<LinearForm>,
    trials: u32,
    seed: u64,
    q: u64,
    mut draw: impl FnMut(&mut ChaCha12Rng, u64) -> Vec<u64>,
) -> Result<GenericRankReport> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    if !is_prime(q) {
        return Err(Error::Parameter(format!(
            "specialization modulus {q} is not prime"
        )));
    }
    let nrows = template.row_count();
    let ncols = template.column_count();
    let minor_bound = nrows.min(ncols) as u64;
    if q <= 10 * minor_bound {
        return Err(Error::Parameter(format!(
            "specialization prime {q} is too small for a {nrows}x{ncols} matrix"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut data = vec![0u64; nrows * ncols];
    let mut best = 0;
    for _ in 0..trials {
        let values = draw(&mut rng, q);
        data.fill(0);
        for (r, row) in template.rows().iter().enumerate() {
            for (col, form) in row {
                data[r * ncols + col] = form.eval_mod(|id| values[(id - 1) as usize], q);
            }
        }
        best = best.max(rank_rows_mod(&mut data, nrows, ncols, q));
    }
    let ratio = BigRational::new(BigInt::from(minor_bound), BigInt::from(q));
    Ok(GenericRankReport {
        rank: best,
        trials,
        prime: q,
        failure_bound: ratio.pow(trials as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero_ranks() {
        let id5 = ExactMatrix::from_rows(&[
            vec![1, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 1],
        ]);
        assert_eq!(id5.rank_rational(), 5);
        assert_eq!(id5.rank_mod(1009).unwrap(), 5);
        let zero = ExactMatrix::zeros(4, 7);
        assert_eq!(zero.rank_rational(), 0);
        assert_eq!(zero.rank_mod(1009).unwrap(), 0);
    }

    #[test]
    fn permutation_matrix_has_full_rank() {
        let p = ExactMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert_eq!(p.rank_rational(), 3);
    }

    #[test]
    fn entry_divisible_by_p_drops_modular_rank() {
        let m = ExactMatrix::from_rows(&[vec![1009]]);
        let witness = rank_mod_leq_rational(&m, 1009).unwrap();
        assert_eq!(witness.rank_mod, 0);
        assert_eq!(witness.rank_rational, 1);
        assert!(witness.holds() && !witness.is_equality());
    }

    #[test]
    fn composite_modulus_rejected() {
        let m = ExactMatrix::from_rows(&[vec![1]]);
        assert!(m.rank_mod(1008).is_err());
    }

    #[test]
    fn irreducible_entry_rejected() {
        let mut m = ExactMatrix::zeros(1, 1);
        m.set(0, 0, BigRational::new(BigInt::from(1), BigInt::from(1009)));
        assert!(m.rank_mod(1009).is_err());
        assert_eq!(m.rank_rational(), 1);
    }

    #[test]
    fn bareiss_handles_rank_deficiency() {
        let m = ExactMatrix::from_rows(&[vec![2, 4, 1], vec![1, 2, 0], vec![3, 6, 1]]);
        assert_eq!(m.rank_rational(), 2);
    }

    #[test]
    fn prime_checks() {
        assert!(is_prime(2));
        assert!(is_prime(1009));
        assert!(is_prime(2147483647));
        assert!(!is_prime(1));
        assert!(!is_prime(1008));
        assert!(!is_prime((1u64 << 32) - 1));
    }

    #[test]
    fn lazy_and_general_elimination_agree() {
        let p = 1009u64;
        let rows = [
            vec![3, 0, 1006, 5, 0, 2],
            vec![0, 0, 0, 0, 0, 0],
            vec![6, 0, 1003, 10, 0, 4],
            vec![1, 2, 3, 4, 5, 6],
            vec![2, 4, 6, 8, 10, 12],
        ];
        let flat = |rows: &[Vec<u64>]| -> Vec<u64> { rows.iter().flatten().copied().collect() };
        let mut a = flat(&rows);
        let mut b = flat(&rows);
        assert_eq!(
            rank_rows_mod(&mut a, 5, 6, p),
            rank_rows_mod_lazy(&mut b, 5, 6, p)
        );
    }

    #[test]
    fn generic_rank_with_no_free_symbols_is_plain_rank() {
        let template = crate::consequences::build_template(3, 3, 1).unwrap();
        let fixed: BTreeMap<u32, i64> = [(1, 1), (2, 0), (3, 0), (4, 0)].into();
        let report = generic_rank(&template, &BTreeSet::new(), &fixed, 3, 7, 2147483647).unwrap();
        let instance = template
            .instantiate(&[1, 0, 0, 0].map(|k| BigRational::from_integer(k.into())))
            .unwrap();
        assert_eq!(report.rank, instance.to_exact().rank_rational());
    }

    #[test]
    fn small_specialization_prime_rejected() {
        let template = crate::consequences::build_template(3, 3, 1).unwrap();
        let free: BTreeSet<u32> = (1..=4).collect();
        let err = generic_rank(&template, &free, &BTreeMap::new(), 3, 7, 419);
        assert!(matches!(err, Err(Error::Parameter(_))));
    }
}
