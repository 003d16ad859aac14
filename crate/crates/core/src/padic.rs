//! Empirical checks of `b_i = β · index_i + O(index_i^{1 - 1/d})` along
//! p-adic analytic towers.
//!
//! `β` is estimated by the last normalized Betti number, which is the limit
//! from above in p-power towers; nothing here computes Iwasawa ranks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::is_prime;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicTowerMeta {
    pub p: u64,
    pub d: u32,
    pub w_hint: Option<BigRational>,
    pub indices: Vec<u64>,
}

/// `dim im + dim ker = dim domain` data for one boundary map at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankData {
    pub domain: usize,
    pub image: usize,
    pub kernel: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PadicReport {
    pub beta_estimate: BigRational,
    pub residuals: Vec<BigRational>,
    /// `-∞` when every residual vanishes.
    pub fitted_exponent: f64,
    pub bound: f64,
    pub w: BigRational,
    pub first_regular_level: usize,
    /// Normalized values never increase, so `beta_estimate` bounds every
    /// earlier one from below.
    pub monotone: bool,
    pub dim_formulae: Option<bool>,
    pub tolerance: f64,
}

impl PadicReport {
    pub fn within_bound(&self) -> bool {
        self.fitted_exponent <= self.bound + self.tolerance
    }

    pub fn vacuous(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }

    pub fn all_hold(&self) -> bool {
        self.within_bound() && self.dim_formulae.unwrap_or(true)
    }
}

/// Finds the longest suffix with `index_{i+1} / index_i = p^d` and returns
/// `w = index_i / p^{d i}` (levels numbered from 1) with the first level of
/// that suffix.
pub fn index_pattern_check(indices: &[u64], p: u64, d: u32) -> Result<(BigRational, usize)> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if d == 0 {
        return Err(Error::Padic("dimension d must be >= 1".into()));
    }
    if indices.len() < 2 {
        return Err(Error::Padic("index pattern needs at least 2 levels".into()));
    }
    let step = BigInt::from(p).pow(d);
    let mut start = indices.len() - 1;
    while start > 0 && BigInt::from(indices[start]) == BigInt::from(indices[start - 1]) * &step {
        start -= 1;
    }
    if indices.len() - start < 2 {
        return Err(Error::Padic(format!(
            "no two consecutive levels with index ratio {p}^{d}"
        )));
    }
    let level = start + 1;
    let w = BigRational::new(indices[start].into(), step.pow(level as u32));
    Ok((w, level))
}

fn log_base(x: f64, p: u64) -> f64 {
    x.ln() / (p as f64).ln()
}

fn rational_log_p(x: &BigRational, p: u64) -> f64 {
    let n = crate::arith::ln_abs(x.numer());
    let d = crate::arith::ln_abs(x.denom());
    (n - d) / (p as f64).ln()
}

/// Fits the growth exponent of `|b_i - β̂ index_i|` against `index_i`.
pub fn padic_fit(
    betti: &[BigRational],
    meta: &PadicTowerMeta,
    tolerance: f64,
    rank_data: Option<&[Vec<RankData>]>,
) -> Result<PadicReport> {
    if betti.len() < 3 {
        return Err(Error::Padic("fit needs at least 3 levels".into()));
    }
    if betti.len() != meta.indices.len() {
        return Err(Error::Padic(format!(
            "{} Betti numbers for {} indices",
            betti.len(),
            meta.indices.len()
        )));
    }
    let (w, first_regular_level) = index_pattern_check(&meta.indices, meta.p, meta.d)?;
    if let Some(hint) = &meta.w_hint {
        if *hint != w {
            return Err(Error::Padic(format!("index constant is {w}, expected {hint}")));
        }
    }
    let normalized: Vec<BigRational> = betti
        .iter()
        .zip(&meta.indices)
        .map(|(b, &i)| b / BigRational::from_integer(i.into()))
        .collect();
    let beta = normalized.last().expect("non-empty").clone();
    let monotone = normalized.windows(2).all(|w| w[1] <= w[0]);
    let residuals: Vec<BigRational> = betti
        .iter()
        .zip(&meta.indices)
        .map(|(b, &i)| (b - &beta * BigRational::from_integer(i.into())).abs())
        .collect();

    let points: Vec<(f64, f64)> = residuals
        .iter()
        .zip(&meta.indices)
        .filter(|(r, _)| !r.is_zero())
        .map(|(r, &i)| (log_base(i as f64, meta.p), rational_log_p(r, meta.p)))
        .collect();
    let fitted_exponent = match points.len() {
        0 => f64::NEG_INFINITY,
        1 => points[0].1 / points[0].0,
        n => {
            let n = n as f64;
            let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
            let my = points.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            sxy / sxx
        }
    };

    let dim_formulae = rank_data.map(|levels| {
        levels
            .iter()
            .flatten()
            .all(|r| r.image + r.kernel == r.domain)
    });

    Ok(PadicReport {
        beta_estimate: beta,
        residuals,
        fitted_exponent,
        bound: 1.0 - 1.0 / meta.d as f64,
        w,
        first_regular_level,
        monotone,
        dim_formulae,
        tolerance,
    })
}

/// Float view of an exact rational, for reports.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `β w p^{d i} + c p^{i (d-1)}` for `i = 1..=levels`, with indices.
pub fn synthetic_sequence(
    beta: &BigRational,
    c: &BigRational,
    w: u64,
    p: u64,
    d: u32,
    levels: u32,
) -> (Vec<BigRational>, Vec<u64>) {
    let mut values = Vec::with_capacity(levels as usize);
    let mut indices = Vec::with_capacity(levels as usize);
    for i in 1..=levels {
        let index = w * p.pow(d * i);
        let tail = BigRational::from_integer(BigInt::from(p).pow(i * (d - 1)));
        values.push(beta * BigRational::from_integer(index.into()) + c * tail);
        indices.push(index);
    }
    (values, indices)
}
