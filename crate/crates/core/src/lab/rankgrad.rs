//! Rank gradient along towers of a wedge of circles, where `d(G_i)` is the
//! first rational Betti number of the covering graph.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::complex::{builtin_complex, BuiltinComplex};
use crate::error::{Error, Result};
use crate::group::Tower;
use crate::reduction::{betti_with, RankStrategy};
use crate::ring::CoefficientRing;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankGradientRow {
    pub level: usize,
    pub index: u64,
    pub d_estimate: u64,
    /// `(d(G_i) - 1) / index`.
    pub rg_term: BigRational,
    /// `d(G_i) / index = d - 1 + 1/index` on free fixtures.
    pub d_over_index: BigRational,
    pub betti_modp: BTreeMap<u64, u64>,
    /// `d(G_i) - 1 = (d - 1) index`.
    pub identity_holds: bool,
    /// `b_1(Q) <= b_1(F_p) <= d(G_i)` for every prime.
    pub chain_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankGradientReport {
    pub d: usize,
    pub rows: Vec<RankGradientRow>,
    pub limit_estimate: BigRational,
    pub reference: BigRational,
    /// Both `rg_term` and `d_over_index` never increase.
    pub non_increasing: bool,
}

impl RankGradientReport {
    pub fn identity_holds(&self) -> bool {
        self.rows.iter().all(|r| r.identity_holds)
    }

    pub fn chain_holds(&self) -> bool {
        self.rows.iter().all(|r| r.chain_holds)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !r.identity_holds {
                out.push(format!(
                    "d(G_i) - 1 = {} but (d - 1) * index = {} at level {}",
                    r.d_estimate as i64 - 1,
                    (self.d as u64 - 1) * r.index,
                    r.level
                ));
            }
            if !r.chain_holds {
                out.push(format!("b1(Q) <= b1(F_p) <= d(G_i) fails at level {}", r.level));
            }
        }
        if !self.non_increasing {
            out.push("rank gradient terms increase along the tower".into());
        }
        out
    }
}

fn wedge_rank(b: BuiltinComplex) -> Result<usize> {
    match b {
        BuiltinComplex::Circle => Ok(1),
        BuiltinComplex::WedgeOfCircles { d } => Ok(d),
        other => Err(Error::Precondition(format!(
            "rank gradient needs a wedge of circles, got {other}"
        ))),
    }
}

pub fn rank_gradient(
    which: BuiltinComplex,
    tower: &Tower,
    primes: &[u64],
    strategy: &RankStrategy,
) -> Result<RankGradientReport> {
    let d = wedge_rank(which)?;
    let complex = builtin_complex(which)?;
    let fields: Vec<(u64, CoefficientRing)> = primes
        .iter()
        .map(|&p| CoefficientRing::prime_field(p).map(|f| (p, f)))
        .collect::<Result<_>>()?;
    let rows = tower
        .levels()
        .par_iter()
        .enumerate()
        .map(|(i, level)| {
            let index = level.order() as u64;
            let dg = betti_with(&complex, level, CoefficientRing::Rationals, strategy)?[1];
            let mut betti_modp = BTreeMap::new();
            for &(p, f) in &fields {
                betti_modp.insert(p, betti_with(&complex, level, f, strategy)?[1]);
            }
            let m = BigRational::from_integer(index.into());
            Ok(RankGradientRow {
                level: i + 1,
                index,
                d_estimate: dg,
                rg_term: BigRational::from_integer((dg as i64 - 1).into()) / &m,
                d_over_index: BigRational::from_integer(dg.into()) / &m,
                chain_holds: betti_modp.values().all(|&b| dg <= b && b <= dg),
                identity_holds: dg as i64 - 1 == (d as i64 - 1) * index as i64,
                betti_modp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let non_increasing = rows
        .windows(2)
        .all(|w| w[1].rg_term <= w[0].rg_term && w[1].d_over_index <= w[0].d_over_index);
    let limit_estimate = rows.last().expect("towers are non-empty").rg_term.clone();
    Ok(RankGradientReport {
        d,
        rows,
        limit_estimate,
        reference: BigRational::from_integer(which.reference_l2_betti(1).into()),
        non_increasing,
    })
}
