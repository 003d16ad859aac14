use num_rational::BigRational;
use proptest::prelude::*;

use towerlab_core::local::{local_diagonalize, LocalMatrix, LocalRingElement};
use towerlab_core::padic::{padic_fit, synthetic_sequence, PadicTowerMeta};
use towerlab_core::reduction::{betti_with, RankStrategy};
use towerlab_core::spectral::{char_poly, char_poly_interpolated, exact_moment, level_spectrum};
use towerlab_core::{
    builtin_complex, quotient_image, reduce_matrix, BuiltinComplex, CoefficientRing, FiniteQuotient,
    FlatMatrix, GroupElement, GroupModelSpec, GroupRingElement, GroupRingMatrix,
};

const Z: CoefficientRing = CoefficientRing::Integers;

fn models() -> [GroupModelSpec; 3] {
    [
        GroupModelSpec::free(2),
        GroupModelSpec::free_abelian(2),
        GroupModelSpec::heisenberg(),
    ]
}

/// A non-abelian regular quotient for each model.
fn quotient_for(model: GroupModelSpec) -> FiniteQuotient {
    let h = FiniteQuotient::heisenberg("H3(Z/3)", 3).unwrap();
    match model.generator_count() {
        2 if model.is_abelian() => FiniteQuotient::abelian("Z/3 x Z/4", &[3, 4]).unwrap(),
        2 => FiniteQuotient::new("H3(Z/3) on x, y", h.generator_images()[..2].to_vec()).unwrap(),
        _ => h,
    }
}

fn letters() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..2, -3i64..=3), 0..6)
}

fn element(model: GroupModelSpec, l: &[(usize, i64)]) -> GroupElement {
    GroupElement::from_letters(model, l).unwrap()
}

fn ring_element() -> impl Strategy<Value = Vec<(Vec<(usize, i64)>, i64)>> {
    prop::collection::vec((letters(), -3i64..=3), 0..4)
}

fn to_ring(model: GroupModelSpec, terms: &[(Vec<(usize, i64)>, i64)]) -> GroupRingElement {
    GroupRingElement::from_int_terms(model, Z, terms.iter().map(|(l, c)| (element(model, l), *c))).unwrap()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<(Vec<(usize, i64)>, i64)>>> {
    prop::collection::vec(ring_element(), rows * cols)
}

fn to_matrix(model: GroupModelSpec, rows: usize, cols: usize, e: &[Vec<(Vec<(usize, i64)>, i64)>]) -> GroupRingMatrix {
    GroupRingMatrix::from_entries(model, Z, rows, cols, e.iter().map(|t| to_ring(model, t)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(mi in 0usize..3, a in letters(), b in letters(), c in letters()) {
        let m = models()[mi];
        let (a, b, c) = (element(m, &a), element(m, &b), element(m, &c));
        let e = GroupElement::identity(m);
        prop_assert_eq!(a.multiply(&b).unwrap().multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
        prop_assert_eq!(a.multiply(&e).unwrap(), a.clone());
        prop_assert_eq!(e.multiply(&a).unwrap(), a.clone());
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_identity());
        prop_assert!(a.inverse().multiply(&a).unwrap().is_identity());
        // the normal form is reached from its own letters
        prop_assert_eq!(GroupElement::from_letters(m, &a.letters()).unwrap(), a);
    }

    #[test]
    fn star_is_an_anti_homomorphism(mi in 0usize..3, a in ring_element(), b in ring_element()) {
        let m = models()[mi];
        let (a, b) = (to_ring(m, &a), to_ring(m, &b));
        prop_assert_eq!(a.mul(&b).unwrap().star(), b.star().mul(&a.star()).unwrap());
        prop_assert_eq!(a.star().star(), a);
    }

    #[test]
    fn matrix_star_and_trace(mi in 0usize..3, a in matrix(2, 3), b in matrix(3, 2)) {
        let m = models()[mi];
        let (a, b) = (to_matrix(m, 2, 3, &a), to_matrix(m, 3, 2, &b));
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.star(), b.star().mul(&a.star()).unwrap());
        prop_assert_eq!(ab.vn_trace().unwrap(), b.mul(&a).unwrap().vn_trace().unwrap());
        prop_assert!(ab.kappa_bound().unwrap() <= a.kappa_bound().unwrap() * b.kappa_bound().unwrap());
    }

    #[test]
    fn reduction_is_a_star_homomorphism(mi in 0usize..3, a in matrix(2, 2), b in matrix(2, 2)) {
        let m = models()[mi];
        let q = quotient_for(m);
        let (a, b) = (to_matrix(m, 2, 2, &a), to_matrix(m, 2, 2, &b));
        let ra = reduce_matrix(&a, &q, Z).unwrap();
        let rb = reduce_matrix(&b, &q, Z).unwrap();
        prop_assert_eq!(reduce_matrix(&a.mul(&b).unwrap(), &q, Z).unwrap(), ra.mul(&rb).unwrap());
        prop_assert_eq!(reduce_matrix(&a.star(), &q, Z).unwrap(), ra.transpose());
        prop_assert_eq!(reduce_matrix(&a.add(&b).unwrap(), &q, Z).unwrap(), {
            let mut s = ra.clone();
            for i in 0..rb.rows() {
                for (&j, v) in rb.row(i) {
                    s.add_to(i, j, v).unwrap();
                }
            }
            s
        });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn quotient_map_is_a_homomorphism(mi in 0usize..3, a in letters(), b in letters()) {
        let m = models()[mi];
        let q = quotient_for(m);
        let (a, b) = (element(m, &a), element(m, &b));
        let lhs = quotient_image(&a.multiply(&b).unwrap(), &q).unwrap();
        let rhs = quotient_image(&a, &q).unwrap().compose(&quotient_image(&b, &q).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(quotient_image(&a.inverse(), &q).unwrap(), quotient_image(&a, &q).unwrap().inverse());
    }
}

fn complexes() -> Vec<BuiltinComplex> {
    vec![
        BuiltinComplex::Circle,
        BuiltinComplex::WedgeOfCircles { d: 2 },
        BuiltinComplex::Torus { n: 2 },
        BuiltinComplex::Torus { n: 3 },
        BuiltinComplex::LlsExample { d: 2, p: 2 },
        BuiltinComplex::LlsExample { d: 3, p: 3 },
    ]
}

fn diagonal_quotient(model: GroupModelSpec, m: u64) -> FiniteQuotient {
    FiniteQuotient::abelian(format!("(Z/{m})^r"), &vec![m; model.generator_count()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn euler_characteristic_is_multiplicative(ci in 0usize..6, m in 2u64..7, p in prop::sample::select(vec![2u64, 3, 5])) {
        let c = builtin_complex(complexes()[ci]).unwrap();
        let q = diagonal_quotient(c.model(), m);
        let index = q.order() as i64;
        for field in [CoefficientRing::Rationals, CoefficientRing::prime_field(p).unwrap()] {
            let b = betti_with(&c, &q, field, &RankStrategy::default()).unwrap();
            let chi: i64 = b.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
            prop_assert_eq!(chi, index * c.euler_characteristic());
        }
    }

    #[test]
    fn spectral_mass_moments_and_support(ci in 0usize..4, m in 2u64..6, deg in 0usize..3) {
        let c = builtin_complex(complexes()[ci]).unwrap();
        let deg = deg.min(c.top_degree());
        let q = diagonal_quotient(c.model(), m);
        let delta = c.laplacian(deg).unwrap();
        let mu = level_spectrum(&delta, &q, 1e-8, &RankStrategy::default()).unwrap();
        let n_q = c.ranks()[deg] as f64;
        prop_assert!((mu.total_mass() - n_q).abs() < 1e-9);
        let bound = delta.kappa_bound().unwrap();
        let bound: f64 = num_traits::ToPrimitive::to_f64(&bound).unwrap();
        for &(x, _) in &mu.atoms {
            prop_assert!(x > 0.0 && x <= bound + 1e-9);
        }
        for k in 1..=4u32 {
            let exact: f64 = num_traits::ToPrimitive::to_f64(&exact_moment(&delta, &q, k).unwrap()).unwrap();
            prop_assert!((mu.moment(k) - exact).abs() <= 1e-7 * exact.abs().max(1.0), "k={} {} vs {}", k, mu.moment(k), exact);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn char_poly_paths_agree(n in 1usize..9, entries in prop::collection::vec(-6i64..=6, 64)) {
        let rows: Vec<Vec<i64>> = (0..n).map(|i| entries[i * 8..i * 8 + n].to_vec()).collect();
        let m = FlatMatrix::from_dense_i64(Z, &rows).unwrap();
        let a = char_poly(&m).unwrap();
        prop_assert_eq!(a.len(), n + 1);
        prop_assert_eq!(a, char_poly_interpolated(&m).unwrap());
    }

    #[test]
    fn synthetic_padic_sequences_fit(
        bn in 0i64..60, bd in 1i64..9, cn in -30i64..=30, cd in 1i64..5,
        d in 1u32..=3, p in prop::sample::select(vec![2u64, 3, 5]), w in 1u64..4, levels in 3u32..7,
    ) {
        let beta = BigRational::new(bn.into(), bd.into());
        let c = BigRational::new(if cn == 0 { 1 } else { cn }.into(), cd.into());
        let (values, indices) = synthetic_sequence(&beta, &c, w, p, d, levels);
        let meta = PadicTowerMeta { p, d, w_hint: Some(BigRational::from_integer(w.into())), indices };
        let r = padic_fit(&values, &meta, 1e-6, None).unwrap();
        prop_assert!(r.within_bound(), "exponent {} bound {}", r.fitted_exponent, r.bound);
    }
}

fn local_matrix(p: u64, n: usize, coeffs: &[u64], valuations: &[usize]) -> LocalMatrix {
    let pu = p as usize;
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = i * n + j;
                    let v = valuations[k] % (pu + 1);
                    let c: Vec<u64> = (0..pu).map(|t| if t < v { 0 } else { coeffs[k * pu + t] % p }).collect();
                    LocalRingElement::new(p, &c).unwrap()
                })
                .collect()
        })
        .collect();
    LocalMatrix::from_rows(p, rows).unwrap()
}

/// Unit diagonal, arbitrary strictly upper part; invertible over `R`.
fn unipotent(p: u64, n: usize, coeffs: &[u64], upper: bool) -> LocalMatrix {
    let mut m = LocalMatrix::identity(p, n);
    let pu = p as usize;
    for i in 0..n {
        for j in 0..n {
            if (upper && j > i) || (!upper && j < i) {
                let k = i * n + j;
                let c: Vec<u64> = (0..pu).map(|t| coeffs[(k * pu + t) % coeffs.len()] % p).collect();
                m.set(i, j, LocalRingElement::new(p, &c).unwrap());
            }
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn local_exponents_are_invariant(
        p in prop::sample::select(vec![2u64, 3, 5]), n in 2usize..4,
        coeffs in prop::collection::vec(0u64..5, 45), vals in prop::collection::vec(0usize..6, 9),
        pc in prop::collection::vec(0u64..5, 45), qc in prop::collection::vec(0u64..5, 45),
    ) {
        let m = local_matrix(p, n, &coeffs, &vals);
        let form = local_diagonalize(&m).unwrap();
        prop_assert_eq!(form.u.mul(&m).unwrap().mul(&form.v).unwrap(), form.d.clone());
        let left = unipotent(p, n, &pc, true).mul(&unipotent(p, n, &qc, false)).unwrap();
        let right = unipotent(p, n, &qc, false).mul(&unipotent(p, n, &pc, true)).unwrap();
        let moved = left.mul(&m).unwrap().mul(&right).unwrap();
        prop_assert_eq!(local_diagonalize(&moved).unwrap().exponents, form.exponents);
    }
}
