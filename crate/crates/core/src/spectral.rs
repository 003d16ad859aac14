//! Spectral measures of reduced Laplacians, exact and L² moments, and
//! Fuglede–Kadison determinant certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{add_mod, bigint_mod, inv_mod, is_prime, ln_abs, mul_mod, sub_mod};
use crate::complex::ChainComplexSpec;
use crate::error::{Error, Result};
use crate::group::{FiniteQuotient, Tower};
use crate::group_ring::GroupRingMatrix;
use crate::reduction::{
    bareiss_determinant, betti_with, reduce_matrix, FlatMatrix, RankStrategy,
};
use crate::ring::CoefficientRing;

/// Eigenvalue atoms with multiplicities. The mass at zero is exact and kept
/// apart from the float atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    /// Positive eigenvalues, ascending, with (normalized) multiplicities.
    pub atoms: Vec<(f64, f64)>,
    pub zero_multiplicity: BigRational,
    pub normalization: BigRational,
    pub support_bound: BigRational,
    pub dimension: usize,
    /// Raw positive eigenvalue count per atom, before normalization.
    pub counts: Vec<usize>,
}

/// Relative width used both to split zero from positive eigenvalues and to
/// merge nearby eigenvalues into one atom.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

impl SpectralMeasure {
    /// Builds the measure of a symmetric positive semidefinite matrix whose
    /// kernel dimension is known exactly.
    pub fn from_matrix(
        m: &FlatMatrix,
        exact_kernel_dim: usize,
        normalization: BigRational,
        support_bound: BigRational,
        tolerance: f64,
    ) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::Spectral("matrix is not square".into()));
        }
        if !m.is_symmetric() {
            return Err(Error::Spectral("matrix is not symmetric".into()));
        }
        if exact_kernel_dim > n {
            return Err(Error::Spectral(format!(
                "kernel dimension {exact_kernel_dim} exceeds size {n}"
            )));
        }
        let bound = support_bound.to_f64().unwrap_or(f64::INFINITY);
        let scale = bound.max(1.0);
        let eps = tolerance * scale;
        let mut eig = symmetric_eigenvalues(m)?;
        eig.sort_by(f64::total_cmp);

        for &e in &eig[..exact_kernel_dim] {
            if e.abs() > eps.sqrt() {
                return Err(Error::Spectral(format!(
                    "eigenvalue {e} is forced to zero by the exact kernel"
                )));
            }
        }
        let mut positive: Vec<f64> = eig[exact_kernel_dim..].to_vec();
        if let Some(&floor) = positive.iter().find(|&&e| e > eps) {
            for e in positive.iter_mut().take_while(|e| **e <= eps) {
                *e = floor;
            }
        } else if !positive.is_empty() {
            return Err(Error::Spectral(
                "exact rank is positive but every eigenvalue is numerically zero".into(),
            ));
        }
        if let Some(&top) = positive.last() {
            if top > bound + 1e-9 * scale + eps {
                return Err(Error::Spectral(format!(
                    "eigenvalue {top} exceeds the support bound {bound}"
                )));
            }
        }

        let norm = normalization.to_f64().unwrap_or(f64::NAN);
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut cluster: Vec<f64> = Vec::new();
        let flush = |cluster: &mut Vec<f64>, atoms: &mut Vec<(f64, f64)>, counts: &mut Vec<usize>| {
            if !cluster.is_empty() {
                let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
                atoms.push((mean, cluster.len() as f64 * norm));
                counts.push(cluster.len());
                cluster.clear();
            }
        };
        for e in positive {
            if let Some(&first) = cluster.first() {
                if e - first > eps {
                    flush(&mut cluster, &mut atoms, &mut counts);
                }
            }
            cluster.push(e);
        }
        flush(&mut cluster, &mut atoms, &mut counts);

        Ok(Self {
            atoms,
            zero_multiplicity: BigRational::from_integer(exact_kernel_dim.into()) * &normalization,
            normalization,
            support_bound,
            dimension: n,
            counts,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.zero_multiplicity.to_f64().unwrap_or(f64::NAN)
            + self.atoms.iter().map(|(_, w)| w).sum::<f64>()
    }

    /// `∫ t^k dμ` for `k >= 1`.
    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|(e, w)| e.powi(k as i32) * w).sum()
    }

    /// `∫_{0+} ln t dμ`, the log of the Fuglede–Kadison determinant.
    pub fn log_determinant(&self) -> f64 {
        self.atoms.iter().map(|(e, w)| e.ln() * w).sum()
    }

    /// `bins` equal-width bins over `[0, support_bound]`; the zero atom
    /// lands in the first bin.
    pub fn histogram(&self, bins: usize) -> Vec<(f64, f64, f64)> {
        let bins = bins.max(1);
        let top = self.support_bound.to_f64().unwrap_or(1.0).max(f64::MIN_POSITIVE);
        let width = top / bins as f64;
        let mut mass = vec![0.0; bins];
        mass[0] += self.zero_multiplicity.to_f64().unwrap_or(0.0);
        for &(e, w) in &self.atoms {
            let b = ((e / width) as usize).min(bins - 1);
            mass[b] += w;
        }
        mass.into_iter()
            .enumerate()
            .map(|(i, m)| (i as f64 * width, (i + 1) as f64 * width, m))
            .collect()
    }
}

fn symmetric_eigenvalues(m: &FlatMatrix) -> Result<Vec<f64>> {
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dense = m.to_dense_f64();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| dense[i][j]);
    let eig = nalgebra::SymmetricEigen::try_new(mat, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Spectral("eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Normalized spectral measure `μ_{r(Δ)} / m` of a Laplacian at one level.
pub fn level_spectrum(
    delta: &GroupRingMatrix,
    q: &FiniteQuotient,
    tolerance: f64,
    strategy: &RankStrategy,
) -> Result<SpectralMeasure> {
    let flat = reduce_matrix(delta, q, CoefficientRing::Rationals)?;
    let kernel = flat.rows() - flat.rank(strategy)?;
    SpectralMeasure::from_matrix(
        &flat,
        kernel,
        BigRational::new(BigInt::one(), q.order().into()),
        delta.kappa_bound()?,
        tolerance,
    )
}

/// `tr(r(Δ)^k) / m`, exactly.
pub fn exact_moment(delta: &GroupRingMatrix, q: &FiniteQuotient, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidParams("moments start at k = 1".into()));
    }
    if !delta.is_square() {
        return Err(Error::Dimension("moment of a non-square matrix".into()));
    }
    let flat = reduce_matrix(delta, q, CoefficientRing::Rationals)?;
    let mut power = flat.clone();
    for _ in 1..k {
        power = power.mul(&flat)?;
    }
    Ok(power.trace()? / BigRational::from_integer(q.order().into()))
}

/// `tr_N(G)(Δ^k)`: the identity coefficient of the group-ring power.
pub fn l2_moment(delta: &GroupRingMatrix, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidParams("moments start at k = 1".into()));
    }
    delta.pow(k)?.vn_trace()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentRow {
    pub level: usize,
    pub index: u64,
    pub k: u32,
    pub exact: BigRational,
    pub l2: BigRational,
}

impl MomentRow {
    pub fn difference(&self) -> BigRational {
        &self.exact - &self.l2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// First level (1-based) from which every later level agrees for all k.
    pub agreement_from: Option<usize>,
}

pub fn moment_convergence_report(
    delta: &GroupRingMatrix,
    tower: &Tower,
    k_max: u32,
) -> Result<MomentReport> {
    let l2: Vec<BigRational> = (1..=k_max).map(|k| l2_moment(delta, k)).collect::<Result<_>>()?;
    let per_level: Vec<Vec<MomentRow>> = tower
        .levels()
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            (1..=k_max)
                .map(|k| {
                    Ok(MomentRow {
                        level: i + 1,
                        index: q.order() as u64,
                        k,
                        exact: exact_moment(delta, q, k)?,
                        l2: l2[k as usize - 1].clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let agrees: Vec<bool> = per_level
        .iter()
        .map(|rows| rows.iter().all(|r| r.exact == r.l2))
        .collect();
    let agreement_from = (0..agrees.len())
        .find(|&i| agrees[i..].iter().all(|&a| a))
        .map(|i| i + 1);
    Ok(MomentReport {
        rows: per_level.into_iter().flatten().collect(),
        agreement_from,
    })
}

/// Lowest nonzero coefficient of the characteristic polynomial of a flat
/// integer Laplacian, and the normalized log determinant it certifies.
#[derive(Clone, Debug, PartialEq)]
pub struct FkCertificate {
    pub low_coeff: BigInt,
    pub low_degree: usize,
    pub index: u64,
    pub log_normalized_det: f64,
    /// The matrix was zero, so the determinant is the empty product 1.
    pub degenerate: bool,
}

pub fn fk_certificate(delta: &GroupRingMatrix, q: &FiniteQuotient) -> Result<FkCertificate> {
    if delta.ring() != CoefficientRing::Integers {
        return Err(Error::Precondition("FK certificates need integer coefficients".into()));
    }
    let flat = reduce_matrix(delta, q, CoefficientRing::Integers)?;
    if !flat.is_symmetric() {
        return Err(Error::Spectral("reduced Laplacian is not symmetric".into()));
    }
    let index = q.order() as u64;
    let poly = char_poly(&flat)?;
    let (low_degree, low_coeff) = poly
        .iter()
        .enumerate()
        .find(|(_, c)| !c.is_zero())
        .map(|(d, c)| (d, c.clone()))
        .expect("characteristic polynomial is monic");
    let degenerate = low_degree == flat.rows();
    if low_coeff.is_zero() || low_coeff.abs() < BigInt::one() {
        return Err(Error::Spectral("lowest coefficient is not a nonzero integer".into()));
    }
    Ok(FkCertificate {
        log_normalized_det: ln_abs(&low_coeff) / index as f64,
        low_coeff,
        low_degree,
        index,
        degenerate,
    })
}

/// Coefficients (constant term first) of `det(x I - M)` for an integer
/// matrix, from Hessenberg reductions modulo enough word-sized primes.
pub fn char_poly(m: &FlatMatrix) -> Result<Vec<BigInt>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Dimension("characteristic polynomial of a non-square matrix".into()));
    }
    let entries = m.to_dense_bigint()?;
    // |e_k(λ)| <= C(n,k) ρ^k with ρ the largest absolute row sum.
    let rho = entries
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<BigInt>())
        .max()
        .unwrap_or_else(BigInt::zero)
        .max(BigInt::one());
    let bound = num_traits::pow(rho + BigInt::one(), n);
    let needed = BigInt::from(2) * bound + BigInt::one();

    let mut modulus = BigInt::one();
    let mut residues: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut p = (1u64 << 62) - 1;
    while modulus < needed {
        p = previous_prime(p);
        let dense: Vec<Vec<u64>> = entries
            .iter()
            .map(|row| row.iter().map(|x| bigint_mod(x, p)).collect())
            .collect();
        let cp = char_poly_mod_p(dense, p);
        // CRT: x ≡ r (mod modulus), x ≡ c (mod p)
        let pb = BigInt::from(p);
        let m_inv = inv_mod(bigint_mod(&modulus, p), p);
        for (r, &c) in residues.iter_mut().zip(&cp) {
            let t = mul_mod(sub_mod(c, bigint_mod(r, p), p), m_inv, p);
            *r += &modulus * BigInt::from(t);
        }
        modulus *= pb;
    }
    let half = &modulus >> 1;
    Ok(residues
        .into_iter()
        .map(|r| if r > half { r - &modulus } else { r })
        .collect())
}

fn previous_prime(mut p: u64) -> u64 {
    loop {
        p -= 1;
        if is_prime(p) {
            return p;
        }
    }
}

/// Characteristic polynomial over `F_p` via reduction to upper Hessenberg
/// form and the standard three-term recurrence.
fn char_poly_mod_p(mut h: Vec<Vec<u64>>, p: u64) -> Vec<u64> {
    let n = h.len();
    for m in 1..n.saturating_sub(1) {
        let Some(i) = (m..n).find(|&i| h[i][m - 1] != 0) else {
            continue;
        };
        if i != m {
            h.swap(i, m);
            for row in h.iter_mut() {
                row.swap(i, m);
            }
        }
        let inv = inv_mod(h[m][m - 1], p);
        for i in m + 1..n {
            let u = mul_mod(h[i][m - 1], inv, p);
            if u == 0 {
                continue;
            }
            for j in 0..n {
                let v = mul_mod(u, h[m][j], p);
                h[i][j] = sub_mod(h[i][j], v, p);
            }
            for row in h.iter_mut() {
                let v = mul_mod(u, row[i], p);
                row[m] = add_mod(row[m], v, p);
            }
        }
    }
    // polys[k] = char poly of the leading k x k block
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 1..=n {
        let km = k - 1;
        let prev = &polys[k - 1];
        let mut next = vec![0u64; k + 1];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = add_mod(next[d + 1], c, p);
            next[d] = sub_mod(next[d], mul_mod(h[km][km], c, p), p);
        }
        let mut t = 1u64;
        for i in (0..km).rev() {
            t = mul_mod(t, h[i + 1][i], p);
            if t == 0 {
                break;
            }
            let coeff = mul_mod(t, h[i][km], p);
            for (d, &c) in polys[i].iter().enumerate() {
                next[d] = sub_mod(next[d], mul_mod(coeff, c, p), p);
            }
        }
        polys.push(next);
    }
    polys.pop().expect("n + 1 polynomials")
}

/// Characteristic polynomial by exact interpolation of `det(x I - M)` at
/// `x = 0..=n`. Slow; used to cross-check [`char_poly`].
pub fn char_poly_interpolated(m: &FlatMatrix) -> Result<Vec<BigInt>> {
    let n = m.rows();
    let entries = m.to_dense_bigint()?;
    let values: Vec<BigInt> = (0..=n)
        .map(|x| {
            let shifted: Vec<Vec<BigInt>> = entries
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| if i == j { BigInt::from(x) - v } else { -v })
                        .collect()
                })
                .collect();
            bareiss_determinant(&shifted)
        })
        .collect();
    // Newton divided differences, then expand to monomial coefficients.
    let mut dd: Vec<BigRational> = values.into_iter().map(BigRational::from_integer).collect();
    for level in 1..=n {
        for i in (level..=n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / BigRational::from_integer(level.into());
        }
    }
    let mut coeffs = vec![BigRational::zero(); n + 1];
    for i in (0..=n).rev() {
        // coeffs = coeffs * (x - i) + dd[i]
        let mut next = vec![BigRational::zero(); n + 1];
        for d in 0..n {
            next[d + 1] += &coeffs[d];
        }
        for d in 0..=n {
            next[d] -= &coeffs[d] * BigRational::from_integer(i.into());
        }
        next[0] += &dd[i];
        coeffs = next;
    }
    coeffs
        .into_iter()
        .map(|c| {
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::Spectral("interpolated coefficient is not an integer".into()))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KazhdanRow {
    pub level: usize,
    pub index: u64,
    pub betti: u64,
    pub normalized: BigRational,
    pub gap: Option<BigRational>,
    pub above_reference: Option<bool>,
}

/// Normalized rational Betti numbers in degree `q` against an optional
/// reference L² Betti number.
pub fn kazhdan_report(
    complex: &ChainComplexSpec,
    tower: &Tower,
    q: usize,
    reference: Option<&BigRational>,
    strategy: &RankStrategy,
) -> Result<Vec<KazhdanRow>> {
    if q > complex.top_degree() {
        return Err(Error::DegreeOutOfRange {
            degree: q,
            top: complex.top_degree(),
        });
    }
    tower
        .levels()
        .par_iter()
        .enumerate()
        .map(|(i, level)| {
            let b = betti_with(complex, level, CoefficientRing::Rationals, strategy)?[q];
            let normalized = BigRational::new(b.into(), level.order().into());
            let gap = reference.map(|r| &normalized - r);
            Ok(KazhdanRow {
                level: i + 1,
                index: level.order() as u64,
                betti: b,
                above_reference: gap.as_ref().map(|g| !g.is_negative()),
                gap,
                normalized,
            })
        })
        .collect()
}

/// `|c|` for `c = ∏ |1 - ζ^k|^2` over nontrivial `m`-th roots of unity, in
/// floating point.
pub fn cyclotomic_product(m: u64) -> f64 {
    (1..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            2.0 - 2.0 * theta.cos()
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{builtin_complex, BuiltinComplex};

    fn circle_delta() -> GroupRingMatrix {
        builtin_complex(BuiltinComplex::Circle).unwrap().laplacian(1).unwrap()
    }

    fn cyclic(m: u64) -> FiniteQuotient {
        FiniteQuotient::abelian(format!("Z/{m}"), &[m]).unwrap()
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn circle_spectrum_z4() {
        let mu = level_spectrum(&circle_delta(), &cyclic(4), DEFAULT_TOLERANCE, &RankStrategy::default())
            .unwrap();
        assert_eq!(mu.zero_multiplicity, BigRational::new(1.into(), 4.into()));
        assert_eq!(mu.counts, vec![2, 1]);
        assert!((mu.atoms[0].0 - 2.0).abs() < 1e-9);
        assert!((mu.atoms[1].0 - 4.0).abs() < 1e-9);
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_spectrum_z3() {
        let mu = level_spectrum(&circle_delta(), &cyclic(3), DEFAULT_TOLERANCE, &RankStrategy::default())
            .unwrap();
        assert_eq!(mu.counts, vec![2]);
        assert!((mu.atoms[0].0 - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix_is_one_atom() {
        let z = FlatMatrix::zeros(CoefficientRing::Rationals, 3, 3);
        let mu = SpectralMeasure::from_matrix(&z, 3, int(1), int(0), DEFAULT_TOLERANCE).unwrap();
        assert!(mu.atoms.is_empty());
        assert_eq!(mu.zero_multiplicity, int(3));
    }

    #[test]
    fn wrong_kernel_dimension_is_rejected() {
        let id = FlatMatrix::identity(CoefficientRing::Rationals, 2);
        assert!(SpectralMeasure::from_matrix(&id, 1, int(1), int(1), DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn moments() {
        let d = circle_delta();
        assert_eq!(l2_moment(&d, 1).unwrap(), int(2));
        assert_eq!(l2_moment(&d, 2).unwrap(), int(6));
        assert_eq!(l2_moment(&d, 3).unwrap(), int(20));
        assert_eq!(exact_moment(&d, &cyclic(5), 2).unwrap(), int(6));
        assert_eq!(exact_moment(&d, &cyclic(2), 2).unwrap(), int(8));
        assert_eq!(exact_moment(&d, &cyclic(7), 1).unwrap(), int(2));
    }

    #[test]
    fn fk_circle() {
        for m in [2u64, 3, 5, 8] {
            let c = fk_certificate(&circle_delta(), &cyclic(m)).unwrap();
            assert_eq!(c.low_coeff.abs(), BigInt::from(m * m));
            assert_eq!(c.low_degree, 1);
        }
    }

    #[test]
    fn fk_zero_is_degenerate() {
        let z = crate::group::GroupModelSpec::free_abelian(1);
        let zero = GroupRingMatrix::zeros(z, CoefficientRing::Integers, 1, 1);
        let c = fk_certificate(&zero, &cyclic(3)).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.low_coeff, BigInt::one());
        assert_eq!(c.log_normalized_det, 0.0);
    }

    #[test]
    fn char_poly_paths_agree_small() {
        let m = FlatMatrix::from_dense_i64(
            CoefficientRing::Integers,
            &[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]],
        )
        .unwrap();
        let a = char_poly(&m).unwrap();
        let b = char_poly_interpolated(&m).unwrap();
        assert_eq!(a, b);
        let expect: Vec<BigInt> = [-4, 10, -6, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(a, expect);
    }

    #[test]
    fn point_measures_converge_weakly_but_not_at_zero() {
        // δ_{1/i} → δ_0 weakly, yet μ_i({0}) = 0 for all i while δ_0({0}) = 1.
        let atoms_at_zero: Vec<u32> = (1..50).map(|i| u32::from(1.0 / i as f64 == 0.0)).collect();
        assert!(atoms_at_zero.iter().all(|&a| a == 0));
        let limit_atom = 1;
        assert_ne!(atoms_at_zero.last().copied().unwrap(), limit_atom);
        // moments ∫ t^k dδ_{1/i} = i^{-k} → 0 = ∫ t^k dδ_0
        let m3: f64 = (1.0f64 / 1000.0).powi(3);
        assert!(m3 < 1e-8);
    }
}
