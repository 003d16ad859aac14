//! Group rings `R[G]` over the built-in models and matrices over them.
//!
//! Boundary maps act on row vectors from the right, so a chain complex
//! satisfies `A_{q+1} · A_q = 0`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModelSpec};
use crate::ring::CoefficientRing;

/// A finitely supported sum `Σ a_g g` with no stored zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    model: GroupModelSpec,
    ring: CoefficientRing,
    terms: BTreeMap<GroupElement, BigRational>,
}

impl GroupRingElement {
    pub fn zero(model: GroupModelSpec, ring: CoefficientRing) -> Self {
        Self {
            model,
            ring,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        model: GroupModelSpec,
        ring: CoefficientRing,
        terms: impl IntoIterator<Item = (GroupElement, BigRational)>,
    ) -> Result<Self> {
        let mut out = Self::zero(model, ring);
        for (g, c) in terms {
            if g.model() != model {
                return Err(Error::ModelMismatch(model, g.model()));
            }
            let c = ring.normalize(&c)?;
            out.add_term(g, c);
        }
        Ok(out)
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_int_terms(
        model: GroupModelSpec,
        ring: CoefficientRing,
        terms: impl IntoIterator<Item = (GroupElement, i64)>,
    ) -> Result<Self> {
        Self::from_terms(
            model,
            ring,
            terms
                .into_iter()
                .map(|(g, c)| (g, BigRational::from_integer(c.into()))),
        )
    }

    pub fn constant(model: GroupModelSpec, ring: CoefficientRing, c: i64) -> Self {
        Self::from_int_terms(model, ring, [(GroupElement::identity(model), c)])
            .expect("integers lie in every ring")
    }

    pub fn element(g: GroupElement, ring: CoefficientRing) -> Self {
        Self::from_int_terms(g.model(), ring, [(g, 1)]).expect("model agrees")
    }

    fn add_term(&mut self, g: GroupElement, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let ring = self.ring;
        match self.terms.entry(g) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = ring.add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn model(&self) -> GroupModelSpec {
        self.model
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn terms(&self) -> &BTreeMap<GroupElement, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.model != other.model {
            return Err(Error::ModelMismatch(self.model, other.model));
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.label(), other.ring.label()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let ring = self.ring;
        Self {
            model: self.model,
            ring,
            terms: self.terms.iter().map(|(g, c)| (g.clone(), ring.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Convolution product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.model, self.ring);
        for (g, a) in &self.terms {
            for (h, b) in &other.terms {
                out.add_term(g.multiply(h)?, self.ring.mul(a, b));
            }
        }
        Ok(out)
    }

    /// `Σ a_g g ↦ Σ a_g g⁻¹` (coefficients are real, so nothing is conjugated).
    pub fn star(&self) -> Self {
        Self {
            model: self.model,
            ring: self.ring,
            terms: self.terms.iter().map(|(g, c)| (g.inverse(), c.clone())).collect(),
        }
    }

    /// Coefficient of the identity element.
    pub fn identity_coefficient(&self) -> BigRational {
        self.terms
            .get(&GroupElement::identity(self.model))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> Result<BigRational> {
        if let CoefficientRing::PrimeField(p) = self.ring {
            return Err(Error::RingMismatch(
                format!("F{p}"),
                "absolute values need Z or Q".into(),
            ));
        }
        Ok(self.terms.values().map(|c| c.abs()).sum())
    }

    pub fn change_ring(&self, target: CoefficientRing) -> Result<Self> {
        let mut out = Self::zero(self.model, target);
        for (g, c) in &self.terms {
            out.add_term(g.clone(), self.ring.map_into(target, c)?);
        }
        Ok(out)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if g.is_identity() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*({g})")?;
            }
        }
        Ok(())
    }
}

/// Row-major matrix of group-ring elements. Zero rows or columns are
/// allowed so that rank-zero chain modules need no special cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingMatrix {
    rows: usize,
    cols: usize,
    model: GroupModelSpec,
    ring: CoefficientRing,
    entries: Vec<GroupRingElement>,
}

impl GroupRingMatrix {
    pub fn zeros(model: GroupModelSpec, ring: CoefficientRing, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            model,
            ring,
            entries: vec![GroupRingElement::zero(model, ring); rows * cols],
        }
    }

    pub fn identity(model: GroupModelSpec, ring: CoefficientRing, n: usize) -> Self {
        let mut m = Self::zeros(model, ring, n, n);
        for i in 0..n {
            m.entries[i * n + i] = GroupRingElement::constant(model, ring, 1);
        }
        m
    }

    pub fn from_rows(
        model: GroupModelSpec,
        ring: CoefficientRing,
        rows: Vec<Vec<GroupRingElement>>,
    ) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        Self::from_entries(model, ring, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_entries(
        model: GroupModelSpec,
        ring: CoefficientRing,
        rows: usize,
        cols: usize,
        entries: Vec<GroupRingElement>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        for e in &entries {
            if e.model != model {
                return Err(Error::ModelMismatch(model, e.model));
            }
            if e.ring != ring {
                return Err(Error::RingMismatch(ring.label(), e.ring.label()));
            }
        }
        Ok(Self {
            rows,
            cols,
            model,
            ring,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn model(&self) -> GroupModelSpec {
        self.model
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn get(&self, r: usize, c: usize) -> &GroupRingElement {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: GroupRingElement) -> Result<()> {
        if value.model != self.model {
            return Err(Error::ModelMismatch(self.model, value.model));
        }
        if value.ring != self.ring {
            return Err(Error::RingMismatch(self.ring.label(), value.ring.label()));
        }
        self.entries[r * self.cols + c] = value;
        Ok(())
    }

    /// `(r, c, entry)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &GroupRingElement)> {
        let cols = self.cols;
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, e)| (i / cols.max(1), i % cols.max(1), e))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GroupRingElement::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.model != other.model {
            return Err(Error::ModelMismatch(self.model, other.model));
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.label(), other.ring.label()));
        }
        Ok(())
    }

    /// Transpose with `star` applied entrywise.
    pub fn star(&self) -> Self {
        let mut out = Self::zeros(self.model, self.ring, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).star();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            entries,
            ..self.clone()
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.model, self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.entries[idx] = out.entries[idx].add(&a.mul(b)?)?;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.model, self.ring, self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Sum over all entries and terms of the absolute coefficient; bounds the
    /// operator norm of `A` in every unitary representation.
    pub fn kappa_bound(&self) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for e in &self.entries {
            total += e.l1_norm()?;
        }
        Ok(total)
    }

    /// Sum of identity coefficients along the diagonal.
    pub fn vn_trace(&self) -> Result<BigRational> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "trace of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.get(i, i).identity_coefficient())
            .sum())
    }

    pub fn change_ring(&self, target: CoefficientRing) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.change_ring(target))
            .collect::<Result<_>>()?;
        Ok(Self {
            entries,
            ring: target,
            ..self.clone()
        })
    }

    /// First nonzero entry in row-major order.
    pub fn first_nonzero(&self) -> Option<(usize, usize)> {
        self.iter().find(|(_, _, e)| !e.is_zero()).map(|(r, c, _)| (r, c))
    }
}

/// `A_q A_q* + A_{q+1}* A_{q+1}`; a missing side contributes zero.
pub fn laplacian(
    a_q: Option<&GroupRingMatrix>,
    a_q1: Option<&GroupRingMatrix>,
) -> Result<GroupRingMatrix> {
    let down = a_q.map(|a| a.mul(&a.star())).transpose()?;
    let up = a_q1.map(|a| a.star().mul(a)).transpose()?;
    match (down, up) {
        (Some(d), Some(u)) => d.add(&u),
        (Some(d), None) => Ok(d),
        (None, Some(u)) => Ok(u),
        (None, None) => Err(Error::InvalidParams(
            "laplacian needs at least one boundary matrix".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModelSpec;

    fn z() -> GroupModelSpec {
        GroupModelSpec::free_abelian(1)
    }

    fn t(e: i64) -> GroupElement {
        GroupElement::generator_power(z(), 0, e).unwrap()
    }

    fn poly(terms: &[(i64, i64)]) -> GroupRingElement {
        GroupRingElement::from_int_terms(
            z(),
            CoefficientRing::Integers,
            terms.iter().map(|&(e, c)| (t(e), c)),
        )
        .unwrap()
    }

    fn one_by_one(e: GroupRingElement) -> GroupRingMatrix {
        GroupRingMatrix::from_rows(z(), CoefficientRing::Integers, vec![vec![e]]).unwrap()
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn star_inverts_support() {
        assert_eq!(poly(&[(0, 2), (1, 3)]).star(), poly(&[(0, 2), (-1, 3)]));
    }

    #[test]
    fn circle_laplacian_and_square() {
        let a = one_by_one(poly(&[(1, 1), (0, -1)]));
        let delta = laplacian(Some(&a), None).unwrap();
        assert_eq!(*delta.get(0, 0), poly(&[(0, 2), (1, -1), (-1, -1)]));
        let sq = delta.mul(&delta).unwrap();
        assert_eq!(
            *sq.get(0, 0),
            poly(&[(0, 6), (1, -4), (-1, -4), (2, 1), (-2, 1)])
        );
        assert_eq!(delta.kappa_bound().unwrap(), int(4));
        assert_eq!(delta.vn_trace().unwrap(), int(2));
        assert_eq!(sq.vn_trace().unwrap(), int(6));
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let a = poly(&[(1, 1)]);
        let diff = a.sub(&a).unwrap();
        assert!(diff.is_zero());
        assert!(diff.terms().is_empty());
    }

    #[test]
    fn kappa_rejects_prime_field() {
        let e = GroupRingElement::constant(z(), CoefficientRing::PrimeField(3), 2);
        assert!(e.l1_norm().is_err());
    }

    #[test]
    fn vn_trace_requires_square() {
        let m = GroupRingMatrix::zeros(z(), CoefficientRing::Integers, 1, 2);
        assert!(matches!(m.vn_trace(), Err(Error::Dimension(_))));
    }

    #[test]
    fn column_star_is_row() {
        let f2 = GroupModelSpec::free(2);
        let ring = CoefficientRing::Integers;
        let col = |g: usize| {
            GroupRingElement::from_int_terms(
                f2,
                ring,
                [
                    (GroupElement::generator(f2, g).unwrap(), 1),
                    (GroupElement::identity(f2), -1),
                ],
            )
            .unwrap()
        };
        let a = GroupRingMatrix::from_rows(f2, ring, vec![vec![col(0)], vec![col(1)]]).unwrap();
        let s = a.star();
        assert_eq!((s.rows(), s.cols()), (1, 2));
        assert_eq!(*s.get(0, 1), col(1).star());
        assert_eq!(s.star(), a);
    }

    #[test]
    fn mismatched_shapes() {
        let a = GroupRingMatrix::zeros(z(), CoefficientRing::Integers, 2, 3);
        assert!(a.mul(&a).is_err());
    }
}
