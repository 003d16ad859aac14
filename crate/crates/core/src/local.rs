//! Linear algebra over the local ring `R = F_p[τ]/(τ^p) ≅ F_p[Z/p]` and the
//! mod-p monotonicity harness for p-power towers.
//!
//! A `Z/p` step of a tower makes the mod-p chain complex of the finer cover
//! a complex of free `R`-modules, with `T` the deck generator and
//! `τ = T - 1`. Reducing it mod `τ` gives the coarser cover.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::{add_mod, inv_mod, is_prime, mul_mod, sub_mod};
use crate::complex::ChainComplexSpec;
use crate::error::{Error, Result};
use crate::group::{Perm, Tower};
use crate::reduction::{betti_from_ranks, reduce_complex, rank_mod_p, FlatMatrix, RankStrategy};
use crate::ring::CoefficientRing;

/// `Σ coeffs[i] τ^i` with `coeffs.len() == p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalRingElement {
    p: u64,
    coeffs: Vec<u64>,
}

impl LocalRingElement {
    pub fn new(p: u64, coeffs: &[u64]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if coeffs.len() > p as usize {
            return Err(Error::Local(format!(
                "{} coefficients exceed the length {p} of F_{p}[τ]/(τ^{p})",
                coeffs.len()
            )));
        }
        let mut c: Vec<u64> = coeffs.iter().map(|x| x % p).collect();
        c.resize(p as usize, 0);
        Ok(Self { p, coeffs: c })
    }

    pub fn zero(p: u64) -> Self {
        Self {
            p,
            coeffs: vec![0; p as usize],
        }
    }

    pub fn one(p: u64) -> Self {
        Self::tau_power(p, 0)
    }

    /// `τ^k`, zero for `k >= p`.
    pub fn tau_power(p: u64, k: usize) -> Self {
        let mut e = Self::zero(p);
        if k < p as usize {
            e.coeffs[k] = 1;
        }
        e
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs[0] != 0
    }

    /// Largest `k` with `τ^k | self`; `p` for zero.
    pub fn valuation(&self) -> usize {
        self.coeffs
            .iter()
            .position(|&c| c != 0)
            .unwrap_or(self.p as usize)
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.p;
        Self {
            p,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| add_mod(a, b, p)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.p;
        Self {
            p,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| sub_mod(a, b, p)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self::zero(self.p).sub(self)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p;
        let n = p as usize;
        let mut c = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate().filter(|(_, a)| **a != 0) {
            for (j, &b) in o.coeffs[..n - i].iter().enumerate() {
                c[i + j] = add_mod(c[i + j], mul_mod(a, b, p), p);
            }
        }
        Self { p, coeffs: c }
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::Local("inverse of a non-unit".into()));
        }
        // solve self * x = 1 term by term
        let p = self.p;
        let n = p as usize;
        let a0_inv = inv_mod(self.coeffs[0], p);
        let mut x = vec![0u64; n];
        for k in 0..n {
            let mut acc = if k == 0 { 1 } else { 0 };
            for j in 1..=k {
                acc = sub_mod(acc, mul_mod(self.coeffs[j], x[k - j], p), p);
            }
            x[k] = mul_mod(acc, a0_inv, p);
        }
        Ok(Self { p, coeffs: x })
    }

    /// For `self = τ^k u` returns a unit `u` (its coefficients shifted down,
    /// with a unit tail where the shift leaves freedom).
    pub fn unit_part(&self) -> Option<(usize, Self)> {
        let k = self.valuation();
        if k == self.p as usize {
            return None;
        }
        let mut c = vec![0u64; self.p as usize];
        c[..self.p as usize - k].copy_from_slice(&self.coeffs[k..]);
        Some((k, Self { p: self.p, coeffs: c }))
    }

    /// Some `f` with `f · self = other`, when `val(other) >= val(self)`.
    pub fn divide(&self, other: &Self) -> Option<Self> {
        let (k, u) = self.unit_part()?;
        if other.valuation() < k {
            return None;
        }
        if other.is_zero() {
            return Some(Self::zero(self.p));
        }
        let (_, w) = other.unit_part()?;
        let shift = other.valuation() - k;
        let q = w.mul(&u.inverse().ok()?);
        Some(Self::tau_power(self.p, shift).mul(&q))
    }
}

impl fmt::Display for LocalRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("{c}τ"),
                _ => format!("{c}τ^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Sparse matrix over `R`, stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, LocalRingElement>>,
}

impl LocalMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, LocalRingElement::one(p));
        }
        m
    }

    pub fn from_rows(p: u64, rows: Vec<Vec<LocalRingElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        let mut m = Self::zeros(p, r, c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for (j, e) in row.into_iter().enumerate() {
                if e.p != p {
                    return Err(Error::Local("entries over different primes".into()));
                }
                m.set(i, j, e);
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> LocalRingElement {
        self.data[i]
            .get(&j)
            .cloned()
            .unwrap_or_else(|| LocalRingElement::zero(self.p))
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, LocalRingElement> {
        &self.data[i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LocalRingElement) {
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (&j, v) in row {
                t.data[j].insert(i, v.clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows || self.p != o.p {
            return Err(Error::Dimension("incompatible local matrices".into()));
        }
        let mut out = Self::zeros(self.p, self.rows, o.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (&k, a) in row {
                for (&j, b) in &o.data[k] {
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// `row_dst -= f * row_src`.
    fn row_axpy(&mut self, dst: usize, f: &LocalRingElement, src: usize) {
        let src_row: Vec<(usize, LocalRingElement)> =
            self.data[src].iter().map(|(&j, v)| (j, v.clone())).collect();
        for (j, v) in src_row {
            let next = self.get(dst, j).sub(&f.mul(&v));
            self.set(dst, j, next);
        }
    }

    fn scale_row(&mut self, i: usize, f: &LocalRingElement) {
        let row = std::mem::take(&mut self.data[i]);
        for (j, v) in row {
            self.set(i, j, f.mul(&v));
        }
    }

    fn permute_rows(&self, order: &[usize]) -> Self {
        Self {
            data: order.iter().map(|&i| self.data[i].clone()).collect(),
            ..self.clone()
        }
    }

    /// Rank over `F_p` of the reduction mod `τ`.
    pub fn residue_rank(&self) -> usize {
        let rows = self
            .data
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|(_, v)| v.coeffs[0] != 0)
                    .map(|(&j, v)| (j as u32, v.coeffs[0]))
                    .collect()
            })
            .collect();
        rank_mod_p(rows, self.p)
    }

    /// The `F_p`-matrix of the same map on `F_p^{p·rows} -> F_p^{p·cols}`,
    /// with basis `τ^l e_i` at index `i·p + l`, as sparse rows.
    pub fn to_flat(&self) -> Vec<Vec<(u32, u64)>> {
        let n = self.p as usize;
        let mut out = vec![Vec::new(); self.rows * n];
        for (i, row) in self.data.iter().enumerate() {
            for l in 0..n {
                for (&j, e) in row {
                    for (d, &c) in e.coeffs[..n - l].iter().enumerate() {
                        if c != 0 {
                            out[i * n + l].push(((j * n + l + d) as u32, c));
                        }
                    }
                }
            }
        }
        out
    }
}

/// `U · M · V = D` with `D` diagonal of powers of `τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDiagonalForm {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    /// Sorted; one per diagonal position, `p` marking a zero entry.
    pub exponents: Vec<usize>,
    pub u: LocalMatrix,
    pub v: LocalMatrix,
    pub d: LocalMatrix,
}

/// Gaussian elimination over `R` pivoting on an entry of least valuation
/// (first in row-major order). Verifies `U M V = D` and the invertibility
/// of `U`, `V` before returning.
pub fn local_diagonalize(m: &LocalMatrix) -> Result<LocalDiagonalForm> {
    let p = m.p;
    let pu = p as usize;
    let mut a = m.clone();
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols];
    for (i, row) in a.data.iter().enumerate() {
        for &j in row.keys() {
            cols[j].insert(i);
        }
    }
    let mut u = LocalMatrix::identity(p, m.rows);
    // column operations on V are row operations on Vᵀ
    let mut vt = LocalMatrix::identity(p, m.cols);
    let mut pivots: Vec<(usize, usize, usize)> = Vec::new();

    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        'scan: for (i, row) in a.data.iter().enumerate() {
            for (&j, e) in row {
                let val = e.valuation();
                if best.is_none_or(|(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                    if val == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((k, pi, pj)) = best else { break };
        let pivot = a.get(pi, pj);

        let others: Vec<usize> = cols[pj].iter().copied().filter(|&i| i != pi).collect();
        for i in others {
            let f = pivot
                .divide(&a.get(i, pj))
                .ok_or_else(|| Error::Local("pivot valuation is not minimal".into()))?;
            let before: Vec<usize> = a.data[i].keys().copied().collect();
            a.row_axpy(i, &f, pi);
            for j in before {
                if !a.data[i].contains_key(&j) {
                    cols[j].remove(&i);
                }
            }
            for &j in a.data[i].keys() {
                cols[j].insert(i);
            }
            u.row_axpy(i, &f, pi);
        }
        // only row pi meets column pj now, so clearing row pi by column
        // operations touches nothing else in A
        let row: Vec<(usize, LocalRingElement)> = a.data[pi]
            .iter()
            .filter(|(&j, _)| j != pj)
            .map(|(&j, v)| (j, v.clone()))
            .collect();
        for (j, e) in row {
            let f = pivot
                .divide(&e)
                .ok_or_else(|| Error::Local("pivot valuation is not minimal".into()))?;
            vt.row_axpy(j, &f, pj);
            a.data[pi].remove(&j);
            cols[j].remove(&pi);
        }
        let (_, unit) = pivot.unit_part().expect("pivot is nonzero");
        u.scale_row(pi, &unit.inverse()?);
        a.data[pi].remove(&pj);
        cols[pj].remove(&pi);
        pivots.push((k, pi, pj));
    }

    let row_order: Vec<usize> = pivots
        .iter()
        .map(|&(_, i, _)| i)
        .chain((0..m.rows).filter(|i| !pivots.iter().any(|&(_, pi, _)| pi == *i)))
        .collect();
    let col_order: Vec<usize> = pivots
        .iter()
        .map(|&(_, _, j)| j)
        .chain((0..m.cols).filter(|j| !pivots.iter().any(|&(_, _, pj)| pj == *j)))
        .collect();
    let u = u.permute_rows(&row_order);
    let v = vt.permute_rows(&col_order).transpose();
    let mut d = LocalMatrix::zeros(p, m.rows, m.cols);
    for (t, &(k, _, _)) in pivots.iter().enumerate() {
        d.set(t, t, LocalRingElement::tau_power(p, k));
    }
    if u.mul(m)?.mul(&v)? != d {
        return Err(Error::Local("U·M·V does not reproduce D".into()));
    }
    if u.residue_rank() != m.rows || v.residue_rank() != m.cols {
        return Err(Error::Local("transform is not invertible".into()));
    }
    let steps = m.rows.min(m.cols);
    let mut exponents: Vec<usize> = pivots.iter().map(|&(k, _, _)| k).collect();
    exponents.resize(steps, pu);
    exponents.sort_unstable();
    Ok(LocalDiagonalForm {
        p,
        rows: m.rows,
        cols: m.cols,
        exponents,
        u,
        v,
        d,
    })
}

/// `F_p`-dimensions of image and kernel of `φ: R^rows -> R^cols` and of
/// its reduction `φ̄` mod `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalDims {
    pub image: usize,
    pub kernel: usize,
    pub image_bar: usize,
    pub kernel_bar: usize,
    pub p: usize,
}

impl LocalDims {
    /// `dim im φ >= p dim im φ̄` and `dim ker φ <= p dim ker φ̄`.
    pub fn lemma_holds(&self) -> bool {
        self.image >= self.p * self.image_bar && self.kernel <= self.p * self.kernel_bar
    }
}

pub fn local_dims(form: &LocalDiagonalForm) -> LocalDims {
    let p = form.p as usize;
    let image: usize = form.exponents.iter().map(|&k| p - k).sum();
    let image_bar = form.exponents.iter().filter(|&&k| k == 0).count();
    LocalDims {
        image,
        kernel: p * form.rows - image,
        image_bar,
        kernel_bar: form.rows - image_bar,
        p,
    }
}

/// `C(n, k) mod p` for `n < p`.
fn binomials_mod(p: u64) -> Vec<Vec<u64>> {
    let n = p as usize;
    let mut c = vec![vec![0u64; n]; n];
    for i in 0..n {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = add_mod(c[i - 1][j - 1], c[i - 1][j], p);
        }
    }
    c
}

/// Rewrites flat boundary matrices over `F_p` of the finer level as
/// matrices over `R`, using the deck transformation `sigma` (order `p`,
/// acting on the `m` points of every block).
///
/// `flats[q-1]` is `r(A_q)` of shape `ranks[q]·m x ranks[q-1]·m`.
pub fn regroup_as_local(
    flats: &[FlatMatrix],
    ranks: &[usize],
    sigma: &Perm,
    p: u64,
) -> Result<Vec<LocalMatrix>> {
    let m = sigma.len();
    let pu = p as usize;
    if !m.is_multiple_of(pu) || sigma.pow(p as i64) != Perm::identity(m) {
        return Err(Error::Local("deck transformation does not have order p".into()));
    }
    if let Some(x) = sigma.fixed_point() {
        return Err(Error::Local(format!("deck transformation fixes point {x}")));
    }
    // orbit representatives (minimal point) and position of each point
    let mut rep_index = vec![usize::MAX; m];
    let mut orbit_pos = vec![0usize; m];
    let mut reps = Vec::with_capacity(m / pu);
    for x in 0..m {
        if rep_index[x] != usize::MAX {
            continue;
        }
        let mut y = x;
        for l in 0..pu {
            rep_index[y] = reps.len();
            orbit_pos[y] = l;
            y = sigma.apply(y);
        }
        reps.push(x);
    }
    let orbits = reps.len();
    let binom = binomials_mod(p);

    let mut out = Vec::with_capacity(flats.len());
    for (i, flat) in flats.iter().enumerate() {
        let (nr, nc) = (ranks[i + 1], ranks[i]);
        if flat.ring() != CoefficientRing::PrimeField(p) {
            return Err(Error::Local(format!("boundary {} is not over F_{p}", i + 1)));
        }
        if (flat.rows(), flat.cols()) != (nr * m, nc * m) {
            return Err(Error::Dimension(format!("boundary {} has the wrong shape", i + 1)));
        }
        let entry = |r: usize, c: usize| -> u64 {
            flat.get(r, c).to_integer().to_u64().expect("normalized F_p entry")
        };
        let shift = |idx: usize| -> usize { (idx / m) * m + sigma.apply(idx % m) };
        for r in 0..flat.rows() {
            for &c in flat.row(r).keys() {
                if entry(shift(r), shift(c)) != entry(r, c) {
                    return Err(Error::Local(format!(
                        "boundary {} is not σ-equivariant at ({r}, {c})",
                        i + 1
                    )));
                }
            }
        }
        let mut local = LocalMatrix::zeros(p, nr * orbits, nc * orbits);
        for br in 0..nr {
            for (o, &rep) in reps.iter().enumerate() {
                let r = br * m + rep;
                // coefficients in T^s, keyed by codomain orbit
                let mut t_coeffs: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
                for (&c, v) in flat.row(r) {
                    let (bc, x) = (c / m, c % m);
                    let col = bc * orbits + rep_index[x];
                    let v = v.to_integer().to_u64().expect("normalized F_p entry");
                    let slot = t_coeffs.entry(col).or_insert_with(|| vec![0; pu]);
                    slot[orbit_pos[x]] = add_mod(slot[orbit_pos[x]], v, p);
                }
                for (col, ts) in t_coeffs {
                    // T^s = (1 + τ)^s
                    let mut tau = vec![0u64; pu];
                    for (s, &a) in ts.iter().enumerate() {
                        for j in 0..=s {
                            tau[j] = add_mod(tau[j], mul_mod(a, binom[s][j], p), p);
                        }
                    }
                    local.set(br * orbits + o, col, LocalRingElement { p, coeffs: tau });
                }
            }
        }
        out.push(local);
    }
    Ok(out)
}

/// Results of the local-ring analysis of one `Z/p` step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalStepCheck {
    pub flat_ranks: Vec<usize>,
    pub image_dims: Vec<usize>,
    pub betti_flat: u64,
    pub betti_local: u64,
    pub betti_bar: u64,
    /// `b_q(finer) <= p · b_q(coarser)`.
    pub bound_holds: bool,
    pub lemma_holds: bool,
}

impl LocalStepCheck {
    pub fn ranks_match(&self) -> bool {
        self.flat_ranks == self.image_dims && self.betti_flat == self.betti_local
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneRow {
    pub level: usize,
    pub index: u64,
    pub betti: u64,
    pub normalized: BigRational,
    /// Sign of the change from the previous normalized value.
    pub delta_sign: i8,
    pub local: Option<LocalStepCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneReport {
    pub p: u64,
    pub degree: usize,
    pub rows: Vec<MonotoneRow>,
}

impl MonotoneReport {
    pub fn non_increasing(&self) -> bool {
        self.rows.iter().all(|r| r.delta_sign <= 0)
    }

    pub fn local_checks_pass(&self) -> bool {
        self.rows.iter().filter_map(|r| r.local.as_ref()).all(|l| {
            l.ranks_match() && l.bound_holds && l.lemma_holds
        })
    }

    pub fn all_hold(&self) -> bool {
        self.non_increasing() && self.local_checks_pass()
    }
}

fn p_power_exponent(ratio: u64, p: u64) -> Option<u32> {
    let mut r = ratio;
    let mut k = 0;
    while r > 1 {
        if !r.is_multiple_of(p) {
            return None;
        }
        r /= p;
        k += 1;
    }
    (k > 0).then_some(k)
}

/// Normalized `F_p` Betti numbers in degree `q` along a p-power tower, with
/// the local-ring analysis on every step of index exactly `p`.
pub fn monotone_harness(
    complex: &ChainComplexSpec,
    tower: &Tower,
    q: usize,
    p: u64,
) -> Result<MonotoneReport> {
    let field = CoefficientRing::prime_field(p)?;
    if q > complex.top_degree() {
        return Err(Error::DegreeOutOfRange {
            degree: q,
            top: complex.top_degree(),
        });
    }
    tower
        .maps()
        .ok_or_else(|| Error::Precondition("monotone harness needs compatibility maps".into()))?;
    let orders = tower.orders();
    for w in orders.windows(2) {
        if w[1] % w[0] != 0 || p_power_exponent(w[1] / w[0], p).is_none() {
            return Err(Error::Precondition(format!(
                "index ratio {}/{} is not a power of {p}",
                w[1], w[0]
            )));
        }
    }
    let strategy = RankStrategy::default();
    let mut rows: Vec<MonotoneRow> = Vec::with_capacity(tower.len());
    let mut prev_betti: Vec<u64> = Vec::new();
    for (i, level) in tower.levels().iter().enumerate() {
        let flats = reduce_complex(complex, level, field)?;
        let flat_ranks = flats
            .iter()
            .map(|f| f.rank(&strategy))
            .collect::<Result<Vec<_>>>()?;
        let b = betti_from_ranks(complex.ranks(), level.order(), &flat_ranks);
        let normalized = BigRational::new(b[q].into(), level.order().into());
        let delta_sign = match rows.last() {
            None => 0,
            Some(prev) => match normalized.cmp(&prev.normalized) {
                std::cmp::Ordering::Less => -1,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Greater => 1,
            },
        };
        let local = if i > 0 && orders[i] == orders[i - 1] * p {
            let kernel = tower.step_kernel(i - 1).expect("maps present");
            let s = *kernel
                .first()
                .ok_or_else(|| Error::Local("step kernel is trivial".into()))?;
            let sigma = level.deck_permutation(s)?;
            let locals = regroup_as_local(&flats, complex.ranks(), &sigma, p)?;
            let forms = locals.iter().map(local_diagonalize).collect::<Result<Vec<_>>>()?;
            let dims: Vec<LocalDims> = forms.iter().map(local_dims).collect();
            let image_dims: Vec<usize> = dims.iter().map(|d| d.image).collect();
            let image_bars: Vec<usize> = dims.iter().map(|d| d.image_bar).collect();
            let betti_local = betti_from_ranks(complex.ranks(), level.order(), &image_dims)[q];
            let betti_bar =
                betti_from_ranks(complex.ranks(), level.order() / p as usize, &image_bars)[q];
            Some(LocalStepCheck {
                flat_ranks: flat_ranks.clone(),
                image_dims,
                betti_flat: b[q],
                betti_local,
                betti_bar,
                bound_holds: betti_local <= p * betti_bar && betti_bar == prev_betti[q],
                lemma_holds: dims.iter().all(LocalDims::lemma_holds),
            })
        } else {
            None
        };
        rows.push(MonotoneRow {
            level: i + 1,
            index: level.order() as u64,
            betti: b[q],
            normalized,
            delta_sign,
            local,
        });
        prev_betti = b;
    }
    Ok(MonotoneReport {
        p,
        degree: q,
        rows,
    })
}
