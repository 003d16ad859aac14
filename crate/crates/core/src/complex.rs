//! Finite free chain complexes over group rings and the built-in examples.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModelSpec};
use crate::group_ring::{laplacian, GroupRingElement, GroupRingMatrix};
use crate::ring::CoefficientRing;

/// `C_Q -> .. -> C_1 -> C_0` with `C_q = R[G]^{n_q}`; `boundaries[q-1]` is
/// the `n_q x n_{q-1}` matrix `A_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplexSpec {
    model: GroupModelSpec,
    ring: CoefficientRing,
    ranks: Vec<usize>,
    boundaries: Vec<GroupRingMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFailure {
    /// `q + 1` for a failing composite `A_{q+1} A_q`.
    pub degree: usize,
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for ChainFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A_{} * A_{} is nonzero at entry ({}, {})",
            self.degree,
            self.degree - 1,
            self.row,
            self.col
        )
    }
}

impl ChainComplexSpec {
    /// Checks shapes and shared model/ring; the chain condition is left to
    /// [`validate`](Self::validate).
    pub fn new(
        model: GroupModelSpec,
        ring: CoefficientRing,
        ranks: Vec<usize>,
        boundaries: Vec<GroupRingMatrix>,
    ) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidParams("complex needs at least degree 0".into()));
        }
        if boundaries.len() + 1 != ranks.len() {
            return Err(Error::Dimension(format!(
                "{} ranks need {} boundaries, got {}",
                ranks.len(),
                ranks.len() - 1,
                boundaries.len()
            )));
        }
        for (i, a) in boundaries.iter().enumerate() {
            let q = i + 1;
            if a.model() != model {
                return Err(Error::ModelMismatch(model, a.model()));
            }
            if a.ring() != ring {
                return Err(Error::RingMismatch(ring.label(), a.ring().label()));
            }
            if (a.rows(), a.cols()) != (ranks[q], ranks[q - 1]) {
                return Err(Error::Dimension(format!(
                    "A_{q} is {}x{}, expected {}x{}",
                    a.rows(),
                    a.cols(),
                    ranks[q],
                    ranks[q - 1]
                )));
            }
        }
        Ok(Self {
            model,
            ring,
            ranks,
            boundaries,
        })
    }

    pub fn model(&self) -> GroupModelSpec {
        self.model
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn top_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn boundaries(&self) -> &[GroupRingMatrix] {
        &self.boundaries
    }

    /// `A_q` for `1 <= q <= top_degree`.
    pub fn boundary(&self, q: usize) -> Option<&GroupRingMatrix> {
        if q == 0 {
            None
        } else {
            self.boundaries.get(q - 1)
        }
    }

    /// First degree and entry where `A_{q+1} A_q` fails to vanish.
    pub fn validate(&self) -> Result<Option<ChainFailure>> {
        for q in 1..self.boundaries.len() {
            let product = self.boundaries[q].mul(&self.boundaries[q - 1])?;
            if let Some((row, col)) = product.first_nonzero() {
                return Ok(Some(ChainFailure {
                    degree: q + 1,
                    row,
                    col,
                }));
            }
        }
        Ok(None)
    }

    /// `Δ_q = A_q A_q* + A_{q+1}* A_{q+1}`.
    pub fn laplacian(&self, q: usize) -> Result<GroupRingMatrix> {
        if q > self.top_degree() {
            return Err(Error::DegreeOutOfRange {
                degree: q,
                top: self.top_degree(),
            });
        }
        if let CoefficientRing::PrimeField(_) = self.ring {
            return Err(Error::RingMismatch(
                self.ring.label(),
                "laplacians need Z or Q".into(),
            ));
        }
        match (self.boundary(q), self.boundary(q + 1)) {
            (None, None) => Ok(GroupRingMatrix::zeros(
                self.model,
                self.ring,
                self.ranks[q],
                self.ranks[q],
            )),
            (a, b) => laplacian(a, b),
        }
    }

    /// `Σ (-1)^q n_q`.
    pub fn euler_characteristic(&self) -> i64 {
        self.ranks
            .iter()
            .enumerate()
            .map(|(q, &n)| if q % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    pub fn change_ring(&self, target: CoefficientRing) -> Result<Self> {
        let boundaries = self
            .boundaries
            .iter()
            .map(|a| a.change_ring(target))
            .collect::<Result<_>>()?;
        Self::new(self.model, target, self.ranks.clone(), boundaries)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum BuiltinComplex {
    Circle,
    WedgeOfCircles { d: usize },
    Torus { n: usize },
    LlsExample { d: usize, p: u64 },
}

impl BuiltinComplex {
    /// Known L² Betti numbers, by degree.
    pub fn reference_l2_betti(&self, q: usize) -> i64 {
        match *self {
            BuiltinComplex::WedgeOfCircles { d } if q == 1 => d as i64 - 1,
            _ => 0,
        }
    }
}

impl fmt::Display for BuiltinComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinComplex::Circle => write!(f, "circle"),
            BuiltinComplex::WedgeOfCircles { d } => write!(f, "wedge:{d}"),
            BuiltinComplex::Torus { n } => write!(f, "torus:{n}"),
            BuiltinComplex::LlsExample { d, p } => write!(f, "lls:{d}:{p}"),
        }
    }
}

impl FromStr for BuiltinComplex {
    type Err = Error;

    /// `circle`, `wedge:D`, `torus:N`, `lls:D:P`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<u64> {
            parts
                .get(i)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::InvalidParams(format!("bad builtin complex {s:?}")))
        };
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("bad builtin complex {s:?}")))
            }
        };
        match parts[0] {
            "circle" => arity(1).map(|_| BuiltinComplex::Circle),
            "wedge" | "wedge_of_circles" => {
                arity(2)?;
                Ok(BuiltinComplex::WedgeOfCircles { d: num(1)? as usize })
            }
            "torus" => {
                arity(2)?;
                Ok(BuiltinComplex::Torus { n: num(1)? as usize })
            }
            "lls" | "lls_example" => {
                arity(3)?;
                Ok(BuiltinComplex::LlsExample {
                    d: num(1)? as usize,
                    p: num(2)?,
                })
            }
            _ => Err(Error::InvalidParams(format!("unknown builtin complex {s:?}"))),
        }
    }
}

fn gen_minus_one(model: GroupModelSpec, j: usize, sign: i64) -> GroupRingElement {
    GroupRingElement::from_int_terms(
        model,
        CoefficientRing::Integers,
        [
            (GroupElement::generator(model, j).expect("generator in range"), sign),
            (GroupElement::identity(model), -sign),
        ],
    )
    .expect("integer terms")
}

/// The built-in complexes, all over `Z`.
pub fn builtin_complex(which: BuiltinComplex) -> Result<ChainComplexSpec> {
    let ring = CoefficientRing::Integers;
    match which {
        BuiltinComplex::Circle => {
            let model = GroupModelSpec::free_abelian(1);
            let a1 = GroupRingMatrix::from_rows(model, ring, vec![vec![gen_minus_one(model, 0, 1)]])?;
            ChainComplexSpec::new(model, ring, vec![1, 1], vec![a1])
        }
        BuiltinComplex::WedgeOfCircles { d } => {
            let model = GroupModelSpec::new(crate::group::GroupKind::Free, d)?;
            let rows = (0..d).map(|j| vec![gen_minus_one(model, j, 1)]).collect();
            let a1 = GroupRingMatrix::from_rows(model, ring, rows)?;
            ChainComplexSpec::new(model, ring, vec![1, d], vec![a1])
        }
        BuiltinComplex::Torus { n } => {
            if n < 1 {
                return Err(Error::InvalidParams("torus dimension must be >= 1".into()));
            }
            if n > 16 {
                return Err(Error::InvalidParams("torus dimension must be <= 16".into()));
            }
            let model = GroupModelSpec::free_abelian(n);
            let subsets: Vec<Vec<Vec<usize>>> = (0..=n).map(|q| subsets_of_size(n, q)).collect();
            let ranks: Vec<usize> = subsets.iter().map(Vec::len).collect();
            let mut boundaries = Vec::with_capacity(n);
            for q in 1..=n {
                let mut a = GroupRingMatrix::zeros(model, ring, ranks[q], ranks[q - 1]);
                for (r, s) in subsets[q].iter().enumerate() {
                    for (j, &sj) in s.iter().enumerate() {
                        let face: Vec<usize> = s.iter().copied().filter(|&x| x != sj).collect();
                        let c = subsets[q - 1]
                            .iter()
                            .position(|f| *f == face)
                            .expect("face is a subset");
                        let sign = if j % 2 == 0 { 1 } else { -1 };
                        a.set(r, c, gen_minus_one(model, sj, sign))?;
                    }
                }
                boundaries.push(a);
            }
            ChainComplexSpec::new(model, ring, ranks, boundaries)
        }
        BuiltinComplex::LlsExample { d, p } => {
            if d < 2 {
                return Err(Error::InvalidParams("lls example needs d >= 2".into()));
            }
            let model = GroupModelSpec::free_abelian(1);
            let mut ranks = vec![0; d + 2];
            for q in [0, 1, d, d + 1] {
                ranks[q] = 1;
            }
            let mut boundaries = Vec::with_capacity(d + 1);
            for q in 1..=d + 1 {
                let mut a = GroupRingMatrix::zeros(model, ring, ranks[q], ranks[q - 1]);
                if q == 1 {
                    a.set(0, 0, gen_minus_one(model, 0, 1))?;
                } else if q == d + 1 {
                    a.set(0, 0, GroupRingElement::constant(model, ring, p as i64))?;
                }
                boundaries.push(a);
            }
            ChainComplexSpec::new(model, ring, ranks, boundaries)
        }
    }
}

/// Size-`k` subsets of `0..n` in lexicographic order.
fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn builtins_validate() {
        for b in [
            BuiltinComplex::Circle,
            BuiltinComplex::WedgeOfCircles { d: 3 },
            BuiltinComplex::Torus { n: 2 },
            BuiltinComplex::Torus { n: 4 },
            BuiltinComplex::LlsExample { d: 2, p: 3 },
            BuiltinComplex::LlsExample { d: 4, p: 2 },
        ] {
            let c = builtin_complex(b).unwrap();
            assert_eq!(c.validate().unwrap(), None, "{b}");
        }
    }

    #[test]
    fn torus_ranks_and_euler() {
        let c = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
        assert_eq!(c.ranks(), &[1, 2, 1]);
        for n in 1..=5 {
            let c = builtin_complex(BuiltinComplex::Torus { n }).unwrap();
            assert_eq!(c.euler_characteristic(), 0);
        }
    }

    #[test]
    fn corrupted_torus_fails_at_degree_two() {
        let c = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
        let mut a2 = c.boundaries()[1].clone();
        a2.set(0, 0, a2.get(0, 0).neg()).unwrap();
        let bad = ChainComplexSpec::new(
            c.model(),
            c.ring(),
            c.ranks().to_vec(),
            vec![c.boundaries()[0].clone(), a2],
        )
        .unwrap();
        let failure = bad.validate().unwrap().unwrap();
        assert_eq!(failure.degree, 2);
    }

    #[test]
    fn lls_shapes_and_laplacian() {
        let c = builtin_complex(BuiltinComplex::LlsExample { d: 2, p: 3 }).unwrap();
        assert_eq!(c.ranks(), &[1, 1, 1, 1]);
        assert!(c.boundary(2).unwrap().is_zero());
        let delta = c.laplacian(2).unwrap();
        assert_eq!(
            delta.get(0, 0).identity_coefficient(),
            BigRational::from_integer(9.into())
        );
        assert_eq!(delta.get(0, 0).terms().len(), 1);
        let c3 = builtin_complex(BuiltinComplex::LlsExample { d: 3, p: 2 }).unwrap();
        assert_eq!(c3.ranks(), &[1, 1, 0, 1, 1]);
    }

    #[test]
    fn torus_bottom_laplacian() {
        let c = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
        let d0 = c.laplacian(0).unwrap();
        assert_eq!(
            d0.vn_trace().unwrap(),
            BigRational::from_integer(4.into())
        );
        assert_eq!(d0.get(0, 0).terms().len(), 5);
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "lls:2:3".parse::<BuiltinComplex>().unwrap(),
            BuiltinComplex::LlsExample { d: 2, p: 3 }
        );
        assert!("torus".parse::<BuiltinComplex>().is_err());
        assert!(builtin_complex(BuiltinComplex::LlsExample { d: 1, p: 2 }).is_err());
        assert!(builtin_complex(BuiltinComplex::Torus { n: 0 }).is_err());
    }

    #[test]
    fn degree_out_of_range() {
        let c = builtin_complex(BuiltinComplex::Circle).unwrap();
        assert!(matches!(
            c.laplacian(2),
            Err(Error::DegreeOutOfRange { degree: 2, top: 1 })
        ));
    }
}
