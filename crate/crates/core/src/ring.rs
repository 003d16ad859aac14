//! Coefficient rings Z, Q and F_p. Values of every ring are carried as
//! `BigRational` in a normalized representative: integers have denominator
//! 1, and prime-field elements are the integers `0..p`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, is_prime};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientRing {
    Integers,
    Rationals,
    PrimeField(u64),
}

impl CoefficientRing {
    pub fn prime_field(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(CoefficientRing::PrimeField(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn is_field(self) -> bool {
        !matches!(self, CoefficientRing::Integers)
    }

    pub fn characteristic(self) -> u64 {
        match self {
            CoefficientRing::PrimeField(p) => p,
            _ => 0,
        }
    }

    /// Short label used in file formats: `Z`, `Q`, `F5`.
    pub fn label(self) -> String {
        match self {
            CoefficientRing::Integers => "Z".into(),
            CoefficientRing::Rationals => "Q".into(),
            CoefficientRing::PrimeField(p) => format!("F{p}"),
        }
    }

    /// Brings a value of this ring into its canonical representative.
    /// Fails for non-integers in Z and for non-invertible denominators in F_p.
    pub fn normalize(self, x: &BigRational) -> Result<BigRational> {
        match self {
            CoefficientRing::Rationals => Ok(x.clone()),
            CoefficientRing::Integers => {
                if x.is_integer() {
                    Ok(x.clone())
                } else {
                    Err(Error::CoefficientMap(format!("{x} is not an integer")))
                }
            }
            CoefficientRing::PrimeField(p) => {
                let pb = BigInt::from(p);
                let den = x.denom().mod_floor(&pb);
                if den.is_zero() {
                    return Err(Error::CoefficientMap(format!(
                        "{x} has a denominator divisible by {p}"
                    )));
                }
                let den: u64 = den.try_into().expect("residue fits");
                let num = x.numer().mod_floor(&pb);
                let v = (num * BigInt::from(inv_mod(den, p))).mod_floor(&pb);
                Ok(BigRational::from_integer(v))
            }
        }
    }

    pub fn from_int(self, x: i64) -> BigRational {
        self.normalize(&BigRational::from_integer(x.into()))
            .expect("integers lie in every ring")
    }

    /// Maps a value of `self` into `target` along the canonical ring map.
    /// Defined for Z→anything, Q→Q, Q→F_p (p-integral values) and F_p→F_p.
    pub fn map_into(self, target: Self, x: &BigRational) -> Result<BigRational> {
        use CoefficientRing::*;
        match (self, target) {
            (Integers, _) | (Rationals, Rationals) | (Rationals, PrimeField(_)) => {
                target.normalize(x)
            }
            (PrimeField(p), PrimeField(q)) if p == q => Ok(x.clone()),
            _ => Err(Error::CoefficientMap(format!(
                "no ring map {} -> {}",
                self.label(),
                target.label()
            ))),
        }
    }

    pub fn add(self, a: &BigRational, b: &BigRational) -> BigRational {
        self.reduce(a + b)
    }

    pub fn mul(self, a: &BigRational, b: &BigRational) -> BigRational {
        self.reduce(a * b)
    }

    pub fn neg(self, a: &BigRational) -> BigRational {
        self.reduce(-a)
    }

    fn reduce(self, x: BigRational) -> BigRational {
        match self {
            CoefficientRing::PrimeField(_) => self.normalize(&x).expect("closed under ring ops"),
            _ => x,
        }
    }

    pub fn one(self) -> BigRational {
        BigRational::one()
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for CoefficientRing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" => Ok(CoefficientRing::Integers),
            "Q" => Ok(CoefficientRing::Rationals),
            other => {
                let p = other
                    .strip_prefix('F')
                    .and_then(|d| d.parse::<u64>().ok())
                    .ok_or_else(|| Error::InvalidParams(format!("unknown coefficient ring {s:?}")))?;
                CoefficientRing::prime_field(p)
            }
        }
    }
}

/// Parses `"3"`, `"-7"` or `"2/5"` as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParams(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// `num/den` text form; integers still carry `/1`.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}
