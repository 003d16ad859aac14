//! Reduction of group-ring matrices modulo a finite quotient, and exact
//! ranks, Betti numbers and Smith normal forms of the resulting flat
//! matrices.
//!
//! A term `c·g` of entry `(r, c)` becomes `c` times the permutation matrix
//! `P` of `quotient_image(g)`, with `P[i][j] = 1` iff `i = σ(j)`, placed in
//! block `(r, c)`. With this layout reduction is a *-homomorphism:
//! `reduce(AB) = reduce(A) reduce(B)` and `reduce(A*) = reduce(A)ᵀ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{bigint_mod, inv_mod, random_large_prime};
use crate::complex::ChainComplexSpec;
use crate::error::{Error, Result};
use crate::group::{quotient_image, FiniteQuotient, Tower};
use crate::group_ring::GroupRingMatrix;
use crate::ring::{format_rational, CoefficientRing};

/// Sparse matrix over a coefficient ring; each row maps column to a nonzero
/// normalized value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatMatrix {
    rows: usize,
    cols: usize,
    ring: CoefficientRing,
    data: Vec<BTreeMap<usize, BigRational>>,
}

impl FlatMatrix {
    pub fn zeros(ring: CoefficientRing, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            ring,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn identity(ring: CoefficientRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i].insert(i, BigRational::one());
        }
        m
    }

    pub fn from_dense_i64(ring: CoefficientRing, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        let mut m = Self::zeros(ring, r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                m.add_to(i, j, &BigRational::from_integer(v.into()))?;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, BigRational> {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        self.data[i].get(&j).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BTreeMap::is_empty)
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigRational) -> Result<()> {
        let v = self.ring.normalize(v)?;
        if v.is_zero() {
            return Ok(());
        }
        let ring = self.ring;
        let row = &mut self.data[i];
        let s = match row.get(&j) {
            Some(old) => ring.add(old, &v),
            None => v,
        };
        if s.is_zero() {
            row.remove(&j);
        } else {
            row.insert(j, s);
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ring, self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                t.data[j].insert(i, v.clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.label(), other.ring.label()));
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.ring, self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
            for (&k, a) in row {
                for (&j, b) in &other.data[k] {
                    *acc.entry(j).or_insert_with(BigRational::zero) += a * b;
                }
            }
            for (j, v) in acc {
                out.add_to(i, j, &v)?;
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<BigRational> {
        if self.rows != self.cols {
            return Err(Error::Dimension("trace of a non-square matrix".into()));
        }
        let sum: BigRational = (0..self.rows).map(|i| self.get(i, i)).sum();
        self.ring.normalize(&sum)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.transpose() == *self
    }

    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                out[i][j] = v.to_f64().unwrap_or(f64::NAN);
            }
        }
        out
    }

    /// Entries as integers; fails unless every entry is integral.
    pub fn to_dense_bigint(&self) -> Result<Vec<Vec<BigInt>>> {
        let mut out = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                if !v.is_integer() {
                    return Err(Error::Precondition("matrix has non-integer entries".into()));
                }
                out[i][j] = v.to_integer();
            }
        }
        Ok(out)
    }

    /// Each row scaled by the lcm of its denominators.
    fn integer_rows(&self) -> Vec<Vec<(usize, BigInt)>> {
        self.data
            .iter()
            .map(|row| {
                let l = row
                    .values()
                    .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
                row.iter()
                    .map(|(&j, v)| (j, v.numer() * (&l / v.denom())))
                    .collect()
            })
            .collect()
    }

    /// Rank over `F_p` of the integer rows reduced mod `p`.
    fn rank_mod(&self, p: u64) -> usize {
        let rows = self
            .integer_rows()
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .filter_map(|(j, v)| {
                        let r = bigint_mod(&v, p);
                        (r != 0).then_some((j as u32, r))
                    })
                    .collect()
            })
            .collect();
        rank_mod_p(rows, p)
    }

    /// Exact rank over the matrix's own field (Q or F_p).
    pub fn rank(&self, strategy: &RankStrategy) -> Result<usize> {
        match self.ring {
            CoefficientRing::PrimeField(p) => Ok(self.rank_mod(p)),
            CoefficientRing::Rationals | CoefficientRing::Integers => {
                self.rank_rational(strategy)
            }
        }
    }

    /// Rank over Q from ranks modulo random primes above 2^60, accepted once
    /// two primes agree on the largest value seen.
    fn rank_rational(&self, strategy: &RankStrategy) -> Result<usize> {
        if self.is_zero() {
            return Ok(0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed);
        let mut best = 0usize;
        let mut hits = 0;
        for _ in 0..strategy.max_primes {
            let r = self.rank_mod(random_large_prime(&mut rng));
            if r > best {
                best = r;
                hits = 1;
            } else if r == best {
                hits += 1;
            }
            if hits >= 2 {
                return Ok(best);
            }
        }
        Err(Error::Precondition(format!(
            "rank over Q not confirmed by two primes after {} attempts",
            strategy.max_primes
        )))
    }
}

/// Seed and retry budget for multimodular rational ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankStrategy {
    pub seed: u64,
    pub max_primes: usize,
}

impl Default for RankStrategy {
    fn default() -> Self {
        Self {
            seed: 0x5eed_0001,
            max_primes: 12,
        }
    }
}

/// Sparse Gaussian elimination over `F_p`; rows are sorted `(col, value)`
/// lists with nonzero values in `0..p`.
pub fn rank_mod_p(rows: Vec<Vec<(u32, u64)>>, p: u64) -> usize {
    let mul = |a: u64, b: u64| -> u64 {
        if p <= u32::MAX as u64 {
            a * b % p
        } else {
            ((a as u128 * b as u128) % p as u128) as u64
        }
    };
    let mut pivots: std::collections::HashMap<u32, Vec<(u32, u64)>> =
        std::collections::HashMap::new();
    let mut rows = rows;
    rows.sort_by_key(|r| r.len());
    let mut scratch: Vec<(u32, u64)> = Vec::new();
    for mut row in rows {
        while let Some(&(lead, v)) = row.first() {
            let Some(piv) = pivots.get(&lead) else {
                let inv = inv_mod(v, p);
                for e in row.iter_mut() {
                    e.1 = mul(e.1, inv);
                }
                pivots.insert(lead, row);
                break;
            };
            // row -= v * piv, piv has leading coefficient 1
            scratch.clear();
            let (mut a, mut b) = (1usize, 1usize);
            while a < row.len() || b < piv.len() {
                let ca = row.get(a).map(|e| e.0).unwrap_or(u32::MAX);
                let cb = piv.get(b).map(|e| e.0).unwrap_or(u32::MAX);
                if ca < cb {
                    scratch.push(row[a]);
                    a += 1;
                } else if cb < ca {
                    scratch.push((cb, p - mul(v, piv[b].1)));
                    b += 1;
                } else {
                    let s = crate::arith::sub_mod(row[a].1, mul(v, piv[b].1), p);
                    if s != 0 {
                        scratch.push((ca, s));
                    }
                    a += 1;
                    b += 1;
                }
            }
            std::mem::swap(&mut row, &mut scratch);
        }
    }
    pivots.len()
}

/// Exact rank by fraction-free (Bareiss) elimination. Slow; used as an
/// oracle.
pub fn bareiss_rank(m: &[Vec<BigInt>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map(Vec::len).unwrap_or(0);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, pr);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                let v = (&a[rank][c] * &a[r][j] - &a[r][c] * &a[rank][j]) / &prev;
                a[r][j] = v;
            }
            a[r][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(pr) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, pr);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// `r_N(A)`: the flat matrix of `A` over the finite quotient, with
/// coefficients mapped into `target`.
pub fn reduce_matrix(
    a: &GroupRingMatrix,
    q: &FiniteQuotient,
    target: CoefficientRing,
) -> Result<FlatMatrix> {
    let m = q.order();
    let mut flat = FlatMatrix::zeros(target, a.rows() * m, a.cols() * m);
    for (r, c, e) in a.iter() {
        for (g, coeff) in e.terms() {
            let coeff = a.ring().map_into(target, coeff)?;
            if coeff.is_zero() {
                continue;
            }
            let sigma = quotient_image(g, q)?;
            for j in 0..m {
                flat.add_to(r * m + sigma.apply(j), c * m + j, &coeff)?;
            }
        }
    }
    Ok(flat)
}

/// Both sides of the finite trace formula: the trace of `r_N(A)`, and
/// `m · Σ c_g` over diagonal terms with `g` in the kernel.
pub fn finite_trace(a: &GroupRingMatrix, q: &FiniteQuotient) -> Result<(BigRational, BigRational)> {
    if !a.is_square() {
        return Err(Error::Dimension("finite trace of a non-square matrix".into()));
    }
    let ring = match a.ring() {
        CoefficientRing::Integers => CoefficientRing::Rationals,
        r => r,
    };
    let flat = reduce_matrix(a, q, ring)?.trace()?;
    let mut kernel_sum = BigRational::zero();
    for i in 0..a.rows() {
        for (g, c) in a.get(i, i).terms() {
            if quotient_image(g, q)?.is_identity() {
                kernel_sum += c;
            }
        }
    }
    let formula = ring.normalize(&(kernel_sum * BigRational::from_integer(q.order().into())))?;
    Ok((flat, formula))
}

fn check_field(complex: &ChainComplexSpec, field: CoefficientRing) -> Result<()> {
    if !field.is_field() {
        return Err(Error::InvalidParams("Betti numbers need a field".into()));
    }
    // probe the coefficient map once so unsupported pairs fail early
    complex.ring().map_into(field, &BigRational::zero())?;
    Ok(())
}

/// Flat boundary matrices `r_N(A_1), .., r_N(A_Q)` over `field`.
pub fn reduce_complex(
    complex: &ChainComplexSpec,
    q: &FiniteQuotient,
    field: CoefficientRing,
) -> Result<Vec<FlatMatrix>> {
    complex
        .boundaries()
        .iter()
        .map(|a| reduce_matrix(a, q, field))
        .collect()
}

/// Betti numbers `b_0..b_Q` of the cover over `field`.
pub fn betti(complex: &ChainComplexSpec, q: &FiniteQuotient, field: CoefficientRing) -> Result<Vec<u64>> {
    betti_with(complex, q, field, &RankStrategy::default())
}

pub fn betti_with(
    complex: &ChainComplexSpec,
    q: &FiniteQuotient,
    field: CoefficientRing,
    strategy: &RankStrategy,
) -> Result<Vec<u64>> {
    check_field(complex, field)?;
    let flats = reduce_complex(complex, q, field)?;
    let ranks = flats
        .iter()
        .map(|f| f.rank(strategy))
        .collect::<Result<Vec<_>>>()?;
    Ok(betti_from_ranks(complex.ranks(), q.order(), &ranks))
}

/// `b_q = n_q m - rank A_q - rank A_{q+1}` from `ranks[q-1] = rank A_q`.
pub fn betti_from_ranks(module_ranks: &[usize], m: usize, ranks: &[usize]) -> Vec<u64> {
    (0..module_ranks.len())
        .map(|q| {
            let down = if q == 0 { 0 } else { ranks[q - 1] };
            let up = ranks.get(q).copied().unwrap_or(0);
            (module_ranks[q] * m - down - up) as u64
        })
        .collect()
}

/// Nonzero elementary divisors `d_1 | d_2 | ..` of an integer matrix.
pub fn smith_normal_form(m: &FlatMatrix) -> Result<Vec<BigInt>> {
    let rows = m.to_dense_bigint()?;
    let mut s = SparseIntMatrix::new(m.rows(), m.cols());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            if !v.is_zero() {
                s.insert(i, j, v);
            }
        }
    }
    let mut diagonal = s.diagonalize();
    Ok(divisibility_chain(&mut diagonal))
}

struct SparseIntMatrix {
    rows: Vec<BTreeMap<usize, BigInt>>,
    cols: Vec<BTreeSet<usize>>,
}

impl SparseIntMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); rows],
            cols: vec![BTreeSet::new(); cols],
        }
    }

    fn insert(&mut self, i: usize, j: usize, v: BigInt) {
        if v.is_zero() {
            self.rows[i].remove(&j);
            self.cols[j].remove(&i);
        } else {
            self.rows[i].insert(j, v);
            self.cols[j].insert(i);
        }
    }

    /// `row_dst -= f * row_src`.
    fn row_axpy(&mut self, dst: usize, f: &BigInt, src: usize) {
        let src_row: Vec<(usize, BigInt)> =
            self.rows[src].iter().map(|(&j, v)| (j, v.clone())).collect();
        for (j, v) in src_row {
            let cur = self.rows[dst].get(&j).cloned().unwrap_or_default();
            self.insert(dst, j, cur - f * v);
        }
    }

    /// `col_dst -= f * col_src`.
    fn col_axpy(&mut self, dst: usize, f: &BigInt, src: usize) {
        let src_col: Vec<usize> = self.cols[src].iter().copied().collect();
        for i in src_col {
            let v = self.rows[i][&src].clone();
            let cur = self.rows[i].get(&dst).cloned().unwrap_or_default();
            self.insert(i, dst, cur - f * v);
        }
    }

    /// Entry of least absolute value, ties by least Markowitz cost.
    fn pick_pivot(&self) -> Option<(usize, usize)> {
        let mut best: Option<(BigInt, usize, usize, usize)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, v) in row {
                let a = v.abs();
                let cost = (row.len() - 1) * (self.cols[j].len() - 1);
                let better = match &best {
                    None => true,
                    Some((ba, bc, _, _)) => a < *ba || (a == *ba && cost < *bc),
                };
                if better {
                    let unit_free = a.is_one() && cost == 0;
                    best = Some((a, cost, i, j));
                    if unit_free {
                        return Some((i, j));
                    }
                }
            }
        }
        best.map(|(_, _, i, j)| (i, j))
    }

    /// Reduces to a diagonal by unimodular row and column operations and
    /// returns the diagonal's absolute values.
    fn diagonalize(&mut self) -> Vec<BigInt> {
        let mut diagonal = Vec::new();
        while let Some((pi, pj)) = self.pick_pivot() {
            let (mut pi, mut pj) = (pi, pj);
            loop {
                let piv = self.rows[pi][&pj].clone();
                let mut smaller = None;
                let col: Vec<usize> = self.cols[pj].iter().copied().filter(|&i| i != pi).collect();
                for i in col {
                    let (f, r) = self.rows[i][&pj].div_mod_floor(&piv);
                    self.row_axpy(i, &f, pi);
                    if !r.is_zero() {
                        smaller = Some((i, pj));
                        break;
                    }
                }
                if smaller.is_none() {
                    let row: Vec<usize> =
                        self.rows[pi].keys().copied().filter(|&j| j != pj).collect();
                    for j in row {
                        let (f, r) = self.rows[pi][&j].div_mod_floor(&piv);
                        self.col_axpy(j, &f, pj);
                        if !r.is_zero() {
                            smaller = Some((pi, j));
                            break;
                        }
                    }
                }
                match smaller {
                    Some((i, j)) => {
                        pi = i;
                        pj = j;
                    }
                    None => break,
                }
            }
            let v = self.rows[pi][&pj].abs();
            self.insert(pi, pj, BigInt::zero());
            diagonal.push(v);
        }
        diagonal
    }
}

/// Turns any diagonal into the invariant-factor chain with the same
/// cokernel.
fn divisibility_chain(diagonal: &mut [BigInt]) -> Vec<BigInt> {
    let n = diagonal.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = diagonal[i].gcd(&diagonal[j]);
            let l = diagonal[i].lcm(&diagonal[j]);
            diagonal[i] = g;
            diagonal[j] = l;
        }
    }
    diagonal.to_vec()
}

/// Per-degree check of `b_q(F_p) = b_q(Q) + t_q + t_{q-1}`, with `t_q` the
/// number of elementary divisors of flat `A_{q+1}` divisible by `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UctRow {
    pub degree: usize,
    pub betti_q: u64,
    pub betti_p: u64,
    pub torsion_q: u64,
    pub torsion_below: u64,
}

impl UctRow {
    pub fn holds(&self) -> bool {
        self.betti_p == self.betti_q + self.torsion_q + self.torsion_below
    }
}

pub fn uct_check(complex: &ChainComplexSpec, q: &FiniteQuotient, p: u64) -> Result<Vec<UctRow>> {
    if complex.ring() != CoefficientRing::Integers {
        return Err(Error::Precondition("universal coefficients need a complex over Z".into()));
    }
    let field = CoefficientRing::prime_field(p)?;
    let b_q = betti(complex, q, CoefficientRing::Rationals)?;
    let b_p = betti(complex, q, field)?;
    let pb = BigInt::from(p);
    let torsion = complex
        .boundaries()
        .iter()
        .map(|a| {
            let flat = reduce_matrix(a, q, CoefficientRing::Integers)?;
            let divisors = smith_normal_form(&flat)?;
            Ok(divisors.iter().filter(|d| (*d % &pb).is_zero()).count() as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    // torsion[q] belongs to A_{q+1}
    Ok((0..=complex.top_degree())
        .map(|d| UctRow {
            degree: d,
            betti_q: b_q[d],
            betti_p: b_p[d],
            torsion_q: torsion.get(d).copied().unwrap_or(0),
            torsion_below: if d == 0 { 0 } else { torsion[d - 1] },
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiLevel {
    pub label: String,
    pub index: u64,
    pub rational: Option<Vec<u64>>,
    pub modp: BTreeMap<u64, Vec<u64>>,
}

impl BettiLevel {
    pub fn normalized(&self, b: u64) -> BigRational {
        BigRational::new(b.into(), self.index.into())
    }
}

/// Betti numbers per level and field for a fixed set of degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiTable {
    pub degrees: Vec<usize>,
    pub primes: Vec<u64>,
    pub rationals: bool,
    pub levels: Vec<BettiLevel>,
}

/// Computes the table, running levels in parallel.
pub fn betti_table(
    complex: &ChainComplexSpec,
    tower: &Tower,
    degrees: &[usize],
    primes: &[u64],
    rationals: bool,
    strategy: &RankStrategy,
) -> Result<BettiTable> {
    for &d in degrees {
        if d > complex.top_degree() {
            return Err(Error::DegreeOutOfRange {
                degree: d,
                top: complex.top_degree(),
            });
        }
    }
    let fields: Vec<CoefficientRing> = primes
        .iter()
        .map(|&p| CoefficientRing::prime_field(p))
        .collect::<Result<_>>()?;
    let levels = tower
        .levels()
        .par_iter()
        .map(|q| {
            let rational = if rationals {
                Some(betti_with(complex, q, CoefficientRing::Rationals, strategy)?)
            } else {
                None
            };
            let mut modp = BTreeMap::new();
            for (&p, &f) in primes.iter().zip(&fields) {
                modp.insert(p, betti_with(complex, q, f, strategy)?);
            }
            Ok(BettiLevel {
                label: q.label().to_string(),
                index: q.order() as u64,
                rational,
                modp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BettiTable {
        degrees: degrees.to_vec(),
        primes: primes.to_vec(),
        rationals,
        levels,
    })
}

impl BettiTable {
    fn field_columns(&self) -> Vec<(String, Option<u64>)> {
        let mut out = Vec::new();
        if self.rationals {
            out.push(("Q".to_string(), None));
        }
        for &p in &self.primes {
            out.push((format!("F{p}"), Some(p)));
        }
        out
    }

    fn values<'a>(&self, level: &'a BettiLevel, field: Option<u64>) -> &'a [u64] {
        match field {
            None => level.rational.as_deref().unwrap_or(&[]),
            Some(p) => &level.modp[&p],
        }
    }

    /// Columns `level, index`, then `b{q}_{field}` and `b{q}_{field}_norm`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["level".to_string(), "index".to_string()];
        for (name, _) in self.field_columns() {
            for q in &self.degrees {
                header.push(format!("b{q}_{name}"));
                header.push(format!("b{q}_{name}_norm"));
            }
        }
        w.write_record(&header)?;
        for (i, level) in self.levels.iter().enumerate() {
            let mut rec = vec![(i + 1).to_string(), level.index.to_string()];
            for (_, field) in self.field_columns() {
                let vals = self.values(level, field);
                for &q in &self.degrees {
                    rec.push(vals[q].to_string());
                    rec.push(format_rational(&level.normalized(vals[q])));
                }
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, level)| {
                let mut fields = serde_json::Map::new();
                for (name, field) in self.field_columns() {
                    let vals = self.values(level, field);
                    let per_degree: serde_json::Map<String, serde_json::Value> = self
                        .degrees
                        .iter()
                        .map(|&q| {
                            (
                                q.to_string(),
                                serde_json::json!({
                                    "betti": vals[q],
                                    "normalized": format_rational(&level.normalized(vals[q])),
                                }),
                            )
                        })
                        .collect();
                    fields.insert(name, per_degree.into());
                }
                serde_json::json!({
                    "level": i + 1,
                    "label": level.label,
                    "index": level.index,
                    "fields": fields,
                })
            })
            .collect();
        serde_json::json!({ "degrees": self.degrees, "levels": levels })
    }

    /// Plain-text summary, one line per level.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (i, level) in self.levels.iter().enumerate() {
            let _ = write!(s, "level {} (index {}):", i + 1, level.index);
            for (name, field) in self.field_columns() {
                let vals = self.values(level, field);
                let shown: Vec<String> = self.degrees.iter().map(|&q| vals[q].to_string()).collect();
                let _ = write!(s, " {name}=({})", shown.join(","));
            }
            s.push('\n');
        }
        s
    }
}
