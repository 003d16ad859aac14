//! End-to-end acceptance criteria. Runs without the libtest harness so
//! that every criterion prints exactly one PASS/FAIL line.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use towerlab_core::lab::rank_gradient;
use towerlab_core::local::{local_diagonalize, local_dims, monotone_harness, LocalMatrix, LocalRingElement};
use towerlab_core::padic::{padic_fit, synthetic_sequence, PadicTowerMeta};
use towerlab_core::reduction::{betti_with, uct_check, RankStrategy};
use towerlab_core::spectral::{
    cyclotomic_product, exact_moment, fk_certificate, kazhdan_report, l2_moment,
};
use towerlab_core::{
    betti, builtin_complex, make_builtin_tower, BuiltinComplex, ChainComplexSpec, CoefficientRing,
    FiniteQuotient, GroupModelSpec, Tower, TowerFamily,
};

type Outcome = Result<String, String>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn wedge(d: usize) -> ChainComplexSpec {
    builtin_complex(BuiltinComplex::WedgeOfCircles { d }).unwrap()
}

fn tower(model: GroupModelSpec, family: TowerFamily, depth: usize, p: u64, refine: bool) -> Tower {
    make_builtin_tower(model, family, depth, p, refine).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let c = wedge(2);
    let t = tower(c.model(), TowerFamily::AbelianizedReduction, 5, 2, false);
    ensure(t.orders() == vec![4, 16, 64, 256, 1024], || format!("orders {:?}", t.orders()))?;
    let rows = kazhdan_report(&c, &t, 1, Some(&int(1)), &RankStrategy::default()).map_err(e)?;
    for r in &rows {
        let want = int(1) + rat(1, r.index as i64);
        ensure(r.normalized == want, || {
            format!("index {}: normalized b1 {} != {}", r.index, r.normalized, want)
        })?;
    }
    let gap = rows.last().unwrap().gap.clone().unwrap();
    ensure(gap == rat(1, 1024), || format!("final gap {gap}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("b1/index = 1 + 1/index at 5 levels, final gap {gap}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let c = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
    let t = tower(c.model(), TowerFamily::Reduction, 5, 2, false);
    let mut last = None;
    let mut prev: Option<BigRational> = None;
    for q in t.levels() {
        let b = betti(&c, q, CoefficientRing::Rationals).map_err(e)?;
        ensure(b == vec![1, 2, 1], || format!("index {}: betti {b:?}", q.order()))?;
        let norm = rat(2, q.order() as i64);
        if let Some(p) = &prev {
            ensure(norm < *p, || "normalized b1 does not decrease".into())?;
        }
        prev = Some(norm.clone());
        last = Some(norm);
    }
    let last = last.unwrap();
    ensure(last == rat(2, 1024), || format!("final normalized b1 {last}"))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("b = (1,2,1) at 5 levels, final normalized b1 {last}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let c = builtin_complex(BuiltinComplex::LlsExample { d: 2, p: 2 }).unwrap();
    let t = tower(c.model(), TowerFamily::Reduction, 8, 2, false);
    let f2 = CoefficientRing::prime_field(2).unwrap();
    let mut limits = (int(0), int(0));
    for q in t.levels() {
        let m = q.order() as u64;
        let bp = betti(&c, q, f2).map_err(e)?[2];
        let bq = betti(&c, q, CoefficientRing::Rationals).map_err(e)?[2];
        ensure(bp == m, || format!("index {m}: b2(F2) = {bp}"))?;
        ensure(bq == 0, || format!("index {m}: b2(Q) = {bq}"))?;
        limits = (rat(bp as i64, m as i64), rat(bq as i64, m as i64));
    }
    ensure(limits == (int(1), int(0)), || format!("limits {limits:?}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "b2(F2) = index, b2(Q) = 0 for k <= 8; limits {} vs {}",
        limits.0, limits.1
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let delta = builtin_complex(BuiltinComplex::Circle).unwrap().laplacian(1).map_err(e)?;
    for m in 2..=64u64 {
        let q = FiniteQuotient::abelian(format!("Z/{m}"), &[m]).map_err(e)?;
        let cert = fk_certificate(&delta, &q).map_err(e)?;
        let m2 = BigInt::from(m * m);
        ensure(cert.low_coeff.abs() == m2, || format!("m = {m}: low coefficient {}", cert.low_coeff))?;
        let cyc = cyclotomic_product(m);
        ensure((cyc - (m * m) as f64).abs() < 1e-6 * (m * m) as f64, || {
            format!("m = {m}: cyclotomic product {cyc}")
        })?;
        let want = 2.0 * (m as f64).ln() / m as f64;
        ensure(cert.log_normalized_det >= 0.0, || format!("m = {m}: negative log det"))?;
        ensure((cert.log_normalized_det - want).abs() < 1e-12, || {
            format!("m = {m}: log det {} != {want}", cert.log_normalized_det)
        })?;
    }
    within(start, Duration::from_secs(60))?;
    Ok("|lowest coefficient| = m^2 and log det = 2 ln m / m for m = 2..64".into())
}

fn criterion_5() -> Outcome {
    let delta = builtin_complex(BuiltinComplex::Circle).unwrap().laplacian(1).map_err(e)?;
    let l2: Vec<BigRational> = (1..=6).map(|k| l2_moment(&delta, k)).collect::<Result<_, _>>().map_err(e)?;
    for m in 13..=40u64 {
        let q = FiniteQuotient::abelian(format!("Z/{m}"), &[m]).map_err(e)?;
        for k in 1..=6u32 {
            let ex = exact_moment(&delta, &q, k).map_err(e)?;
            ensure(ex == l2[k as usize - 1], || {
                format!("m = {m}, k = {k}: {ex} != {}", l2[k as usize - 1])
            })?;
        }
    }
    let z2 = FiniteQuotient::abelian("Z/2", &[2]).map_err(e)?;
    let ex = exact_moment(&delta, &z2, 2).map_err(e)?;
    ensure(ex == int(8) && l2[1] == int(6), || format!("(m=2, k=2): {ex} vs {}", l2[1]))?;
    Ok(format!("exact = L2 moments for m = 13..40, k <= 6; (2, 2): {ex} vs {}", l2[1]))
}

fn criterion_6() -> Outcome {
    let torus = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
    let circle = builtin_complex(BuiltinComplex::Circle).unwrap();
    let lls = builtin_complex(BuiltinComplex::LlsExample { d: 2, p: 2 }).unwrap();
    let cases = [
        ("torus(2) p=2 depth 5", &torus, tower(torus.model(), TowerFamily::Reduction, 5, 2, false), 2),
        ("torus(2) p=2 refined depth 10", &torus, tower(torus.model(), TowerFamily::Reduction, 10, 2, true), 2),
        ("circle p=3 depth 5", &circle, tower(circle.model(), TowerFamily::Reduction, 5, 3, false), 3),
        ("lls(2,2) p=2 depth 6", &lls, tower(lls.model(), TowerFamily::Reduction, 6, 2, false), 2),
    ];
    let mut steps = 0;
    for (name, c, t, p) in &cases {
        for q in 0..=c.top_degree() {
            let r = monotone_harness(c, t, q, *p).map_err(e)?;
            ensure(r.non_increasing(), || format!("{name}, degree {q}: normalized values increase"))?;
            ensure(r.local_checks_pass(), || format!("{name}, degree {q}: local cross-check fails"))?;
            steps += r.rows.iter().filter(|row| row.local.is_some()).count();
        }
    }
    ensure(steps > 0, || "no index-p steps were checked".into())?;
    Ok(format!("4 towers non-increasing, {steps} index-p step checks pass"))
}

fn random_local(rng: &mut ChaCha8Rng, p: u64, n: usize) -> Vec<Vec<Vec<u64>>> {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    // bias towards entries of positive valuation
                    let v = rng.random_range(0..=p as usize);
                    (0..p as usize)
                        .map(|k| if k < v { 0 } else { rng.random_range(0..p) })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn ring_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = p as usize;
    let mut out = vec![0; n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] = (out[i + j] + a[i] * b[j]) % p;
        }
    }
    out
}

fn dense(m: &LocalMatrix) -> Vec<Vec<Vec<u64>>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).coeffs().to_vec()).collect())
        .collect()
}

fn dense_mul(p: u64, a: &[Vec<Vec<u64>>], b: &[Vec<Vec<u64>>]) -> Vec<Vec<Vec<u64>>> {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| {
                    let mut acc = vec![0; p as usize];
                    for t in 0..k {
                        for (x, y) in acc.iter_mut().zip(ring_mul(p, &a[i][t], &b[t][j])) {
                            *x = (*x + y) % p;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `(dim im, dim ker, dim im bar, dim ker bar)` of `x -> x M` by counting.
fn brute_force_dims(p: u64, m: &[Vec<Vec<u64>>]) -> (usize, usize, usize, usize) {
    let n = m.len();
    let ps = p as usize;
    let size = ps.pow((ps * n) as u32);
    let mut images = HashSet::new();
    let mut kernel = 0usize;
    for code in 0..size {
        let mut c = code;
        let x: Vec<Vec<u64>> = (0..n)
            .map(|_| {
                (0..ps)
                    .map(|_| {
                        let d = (c % ps) as u64;
                        c /= ps;
                        d
                    })
                    .collect()
            })
            .collect();
        let y = dense_mul(p, &[x], m).remove(0);
        if y.iter().flatten().all(|&v| v == 0) {
            kernel += 1;
        }
        images.insert(y);
    }
    let residue: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|e| e[0]).collect()).collect();
    let mut bar_images = HashSet::new();
    let mut bar_kernel = 0usize;
    for code in 0..ps.pow(n as u32) {
        let mut c = code;
        let x: Vec<u64> = (0..n)
            .map(|_| {
                let d = (c % ps) as u64;
                c /= ps;
                d
            })
            .collect();
        let y: Vec<u64> = (0..n)
            .map(|j| (0..n).map(|i| x[i] * residue[i][j]).sum::<u64>() % p)
            .collect();
        if y.iter().all(|&v| v == 0) {
            bar_kernel += 1;
        }
        bar_images.insert(y);
    }
    let log = |count: usize| -> usize {
        let (mut c, mut k) = (count, 0);
        while c > 1 {
            c /= ps;
            k += 1;
        }
        k
    };
    (log(images.len()), log(kernel), log(bar_images.len()), log(bar_kernel))
}

fn criterion_7() -> Outcome {
    let mut brute = 0;
    for p in [2u64, 3, 5] {
        for n in [2usize, 3] {
            for case in 0..100u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(p * 1000 + n as u64 * 100 + case);
                let raw = random_local(&mut rng, p, n);
                let rows = raw
                    .iter()
                    .map(|r| r.iter().map(|c| LocalRingElement::new(p, c)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(e)?;
                let m = LocalMatrix::from_rows(p, rows).map_err(e)?;
                let form = local_diagonalize(&m).map_err(e)?;
                let udv = dense_mul(p, &dense_mul(p, &dense(&form.u), &raw), &dense(&form.v));
                let d = dense(&form.d);
                ensure(udv == d, || format!("p={p} n={n} case {case}: U M V != D"))?;
                for (i, row) in d.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        let zero = x.iter().all(|&c| c == 0);
                        ensure(i == j || zero, || format!("p={p} n={n} case {case}: D not diagonal"))?;
                    }
                }
                let dims = local_dims(&form);
                ensure(dims.lemma_holds(), || format!("p={p} n={n} case {case}: lemma fails {dims:?}"))?;
                if p <= 3 && n == 2 {
                    let want = brute_force_dims(p, &raw);
                    let got = (dims.image, dims.kernel, dims.image_bar, dims.kernel_bar);
                    ensure(got == want, || {
                        format!("p={p} case {case}: dims {got:?}, enumeration {want:?}")
                    })?;
                    brute += 1;
                }
            }
        }
    }
    Ok(format!("600 matrices diagonalized, {brute} checked by enumeration"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8ad1c);
    let mut worst = f64::NEG_INFINITY;
    let mut passed = 0;
    for case in 0..100 {
        let d = rng.random_range(1..=3u32);
        let p = [2u64, 3, 5][rng.random_range(0..3)];
        let beta = rat(rng.random_range(0..=40), rng.random_range(1..=8));
        let mut c = rat(rng.random_range(-20..=20), rng.random_range(1..=4));
        if c.is_zero() {
            c = int(1);
        }
        let w = rng.random_range(1..=3u64);
        let (values, indices) = synthetic_sequence(&beta, &c, w, p, d, 6);
        let meta = PadicTowerMeta {
            p,
            d,
            w_hint: Some(int(w as i64)),
            indices,
        };
        let r = padic_fit(&values, &meta, 0.0, None).map_err(e)?;
        let bound = 1.0 - 1.0 / d as f64;
        ensure(r.fitted_exponent <= bound + 1e-6, || {
            format!("case {case} (d={d}, p={p}): exponent {} > {bound}", r.fitted_exponent)
        })?;
        worst = worst.max(r.fitted_exponent - bound);
        passed += 1;
    }
    let lls = builtin_complex(BuiltinComplex::LlsExample { d: 2, p: 2 }).unwrap();
    let t = tower(lls.model(), TowerFamily::Reduction, 8, 2, false);
    let f2 = CoefficientRing::prime_field(2).unwrap();
    let seq: Vec<BigRational> = t
        .levels()
        .iter()
        .map(|q| betti(&lls, q, f2).map(|b| int(b[2] as i64)))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let meta = PadicTowerMeta {
        p: 2,
        d: 1,
        w_hint: Some(int(1)),
        indices: t.orders(),
    };
    let r = padic_fit(&seq, &meta, 1e-6, None).map_err(e)?;
    ensure(r.residuals.iter().all(Zero::is_zero), || "lls residuals are not all zero".into())?;
    ensure(r.fitted_exponent == f64::NEG_INFINITY && r.within_bound(), || {
        format!("lls exponent {}", r.fitted_exponent)
    })?;
    Ok(format!(
        "{passed}/100 synthetic fits within bound (max excess {worst:.3}); lls residuals all zero"
    ))
}

fn criterion_9() -> Outcome {
    let circle = builtin_complex(BuiltinComplex::Circle).unwrap();
    let torus = builtin_complex(BuiltinComplex::Torus { n: 2 }).unwrap();
    let lls = builtin_complex(BuiltinComplex::LlsExample { d: 2, p: 2 }).unwrap();
    let w2 = wedge(2);
    let w3 = wedge(3);
    let cases = [
        ("circle p=3", &circle, tower(circle.model(), TowerFamily::Reduction, 5, 3, false)),
        ("circle p=2", &circle, tower(circle.model(), TowerFamily::Reduction, 6, 2, false)),
        ("torus(2)", &torus, tower(torus.model(), TowerFamily::Reduction, 5, 2, false)),
        ("lls(2,2)", &lls, tower(lls.model(), TowerFamily::Reduction, 8, 2, false)),
        ("wedge(2)", &w2, tower(w2.model(), TowerFamily::AbelianizedReduction, 5, 2, false)),
        ("wedge(3)", &w3, tower(w3.model(), TowerFamily::AbelianizedReduction, 3, 2, false)),
    ];
    let mut rows = 0;
    let mut torsion = 0;
    for (name, c, t) in &cases {
        for level in t.levels() {
            for p in [2u64, 3] {
                for r in uct_check(c, level, p).map_err(e)? {
                    ensure(r.holds(), || {
                        format!("{name}, index {}, p = {p}: {r:?}", level.order())
                    })?;
                    rows += 1;
                    torsion += (r.torsion_q > 0) as usize;
                }
            }
        }
    }
    ensure(torsion > 0, || "no p-torsion was exercised".into())?;
    Ok(format!("{rows} degree checks hold, {torsion} with p-torsion"))
}

fn criterion_10() -> Outcome {
    let strategy = RankStrategy::default();
    let mut summary = Vec::new();
    for (which, depth) in [
        (BuiltinComplex::WedgeOfCircles { d: 1 }, 10),
        (BuiltinComplex::Circle, 10),
        (BuiltinComplex::WedgeOfCircles { d: 2 }, 5),
        (BuiltinComplex::WedgeOfCircles { d: 3 }, 3),
    ] {
        let c = builtin_complex(which).unwrap();
        let family = TowerFamily::for_model(c.model());
        let t = tower(c.model(), family, depth, 2, false);
        let r = rank_gradient(which, &t, &[2, 3, 5], &strategy).map_err(e)?;
        let d = match which {
            BuiltinComplex::WedgeOfCircles { d } => d as i64,
            _ => 1,
        };
        ensure(r.identity_holds(), || format!("{which}: d(G_i) - 1 != (d - 1) index"))?;
        ensure(r.chain_holds(), || format!("{which}: inequality chain fails"))?;
        ensure(r.non_increasing, || format!("{which}: terms increase"))?;
        ensure(r.limit_estimate == int(d - 1), || format!("{which}: RG estimate {}", r.limit_estimate))?;
        for row in &r.rows {
            let direct = betti_with(&c, &t.levels()[row.level - 1], CoefficientRing::Rationals, &strategy)
                .map_err(e)?[1];
            ensure(direct as i64 - 1 == (d - 1) * row.index as i64, || {
                format!("{which}: direct b1 {direct} at index {}", row.index)
            })?;
        }
        summary.push(format!("{which}: RG {}", r.limit_estimate));
    }
    Ok(summary.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("free group approximation", criterion_1),
        ("self-similar torus tower", criterion_2),
        ("mod-2 counterexample", criterion_3),
        ("determinant integrality", criterion_4),
        ("moment convergence", criterion_5),
        ("mod-p monotonicity", criterion_6),
        ("local ring lemma", criterion_7),
        ("p-adic residual exponent", criterion_8),
        ("universal coefficients", criterion_9),
        ("rank gradient", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({t:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({t:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
