//! The batch orchestrator: resolves a config, runs the requested analyses
//! level by level and writes every report atomically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Analysis, Inputs, RunConfig};
use super::format::{to_pretty, Diagnostics};
use super::rankgrad::rank_gradient;
use crate::complex::ChainComplexSpec;
use crate::error::{Error, Result};
use crate::group::Tower;
use crate::local::monotone_harness;
use crate::padic::{padic_fit, PadicTowerMeta, RankData};
use crate::reduction::{betti_from_ranks, betti_table, reduce_complex, uct_check, RankStrategy};
use crate::ring::{format_rational, CoefficientRing};
use crate::spectral::{fk_certificate, kazhdan_report, level_spectrum, moment_convergence_report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

pub const DEFAULT_OUT: &str = "towerlab-out";

/// Float text for CSV/JSON: 12 significant digits, shortest form.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float text");
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

fn q(x: &BigRational) -> String {
    format_rational(x)
}

/// Report files keyed by name, written in name order.
#[derive(Default)]
struct Outputs {
    files: BTreeMap<String, String>,
}

impl Outputs {
    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.files
            .insert(name.to_string(), String::from_utf8(bytes).expect("csv is utf-8"));
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) {
        self.files.insert(name.to_string(), to_pretty(v));
    }
}

/// Writes to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParams(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Asserted invariants that failed.
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }
}

/// Exit code of a finished run: errors are input errors.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => EXIT_INPUT,
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    inputs: &'a Inputs,
    strategy: RankStrategy,
    out: Outputs,
    violations: Vec<String>,
    summary: String,
}

impl Ctx<'_> {
    fn complex(&self) -> &ChainComplexSpec {
        &self.inputs.complex
    }

    fn tower(&self) -> &Tower {
        &self.inputs.tower
    }

    fn violate(&mut self, msg: String) {
        log::error!("{msg}");
        self.violations.push(msg);
    }

    fn note(&mut self, line: impl AsRef<str>) {
        self.summary.push_str(line.as_ref());
        self.summary.push('\n');
    }

    /// Primes for the mod-p analyses: configured ones plus the tower prime,
    /// kept only when every index ratio is a power of it.
    fn tower_primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.cfg.primes.clone();
        if let Some(p) = self.inputs.tower_prime {
            if !ps.contains(&p) {
                ps.push(p);
            }
        }
        let orders = self.tower().orders();
        ps.into_iter()
            .filter(|&p| {
                orders.windows(2).all(|w| {
                    let mut r = w[1] / w[0];
                    if w[1] % w[0] != 0 || r < 2 {
                        return false;
                    }
                    while r % p == 0 {
                        r /= p;
                    }
                    r == 1
                })
            })
            .collect()
    }
}

pub fn run(cfg: &RunConfig, diag: &mut Diagnostics, out_override: Option<&Path>) -> Result<RunOutcome> {
    let inputs = cfg.resolve(diag)?;
    let out_dir = match out_override {
        Some(p) => p.to_path_buf(),
        None => match &cfg.out {
            Some(o) if o.is_relative() => cfg.base_dir.join(o),
            Some(o) => o.clone(),
            None => PathBuf::from(DEFAULT_OUT),
        },
    };
    let mut ctx = Ctx {
        cfg,
        inputs: &inputs,
        strategy: RankStrategy {
            seed: cfg.seed,
            ..RankStrategy::default()
        },
        out: Outputs::default(),
        violations: Vec::new(),
        summary: String::new(),
    };
    let c = ctx.complex();
    ctx.note(format!(
        "complex {} over {} ranks {:?}; tower orders {:?}",
        inputs
            .builtin
            .map(|b| b.to_string())
            .unwrap_or_else(|| format!("file ({})", c.model())),
        c.ring(),
        c.ranks(),
        ctx.tower().orders()
    ));
    match ctx.complex().validate()? {
        Some(f) => ctx.violate(format!("chain condition fails: {f}")),
        None => {
            let mut analyses = cfg.analyses.clone();
            analyses.sort();
            analyses.dedup();
            for a in analyses {
                match a {
                    Analysis::Betti => betti_analysis(&mut ctx)?,
                    Analysis::Spectrum => spectrum_analysis(&mut ctx)?,
                    Analysis::Converge => converge_analysis(&mut ctx)?,
                    Analysis::Fkdet => fkdet_analysis(&mut ctx)?,
                    Analysis::Modp => modp_analysis(&mut ctx)?,
                    Analysis::Padic => padic_analysis(&mut ctx)?,
                    Analysis::Rankgrad => rankgrad_analysis(&mut ctx)?,
                }
            }
        }
    }
    let analyses: Vec<&str> = cfg.analyses.iter().map(|a| a.name()).collect();
    let report = json!({
        "complex": inputs.builtin.map(|b| b.to_string()),
        "ring": ctx.complex().ring().label(),
        "ranks": ctx.complex().ranks(),
        "orders": ctx.tower().orders(),
        "degrees": inputs.degrees,
        "analyses": analyses,
        "files": ctx.out.files.keys().collect::<Vec<_>>(),
        "violations": ctx.violations,
        "warnings": diag.warnings,
    });
    ctx.out.json("report.json", &report);

    std::fs::create_dir_all(&out_dir)?;
    let mut files = Vec::new();
    for (name, body) in &ctx.out.files {
        let path = out_dir.join(name);
        write_atomic(&path, body)?;
        files.push(path);
    }
    let mut summary = ctx.summary;
    if ctx.violations.is_empty() {
        summary.push_str("all asserted invariants hold\n");
    } else {
        for v in &ctx.violations {
            let _ = writeln!(summary, "VIOLATION: {v}");
        }
    }
    Ok(RunOutcome {
        out_dir,
        files,
        violations: ctx.violations,
        warnings: diag.warnings.clone(),
        summary,
    })
}

fn reference_for(ctx: &Ctx, degree: usize) -> Option<BigRational> {
    ctx.cfg.reference().or_else(|| {
        ctx.inputs
            .builtin
            .map(|b| BigRational::from_integer(b.reference_l2_betti(degree).into()))
    })
}

fn betti_analysis(ctx: &mut Ctx) -> Result<()> {
    let table = betti_table(
        ctx.complex(),
        ctx.tower(),
        &ctx.inputs.degrees,
        &ctx.cfg.primes,
        ctx.cfg.rationals,
        &ctx.strategy,
    )?;
    ctx.out.files.insert("betti.csv".into(), table.to_csv()?);
    ctx.out.json("betti.json", &table.to_json());
    ctx.note(table.summary().trim_end());

    if ctx.cfg.rationals {
        let mut rows = Vec::new();
        for &d in &ctx.inputs.degrees {
            let reference = reference_for(ctx, d);
            let report = kazhdan_report(ctx.complex(), ctx.tower(), d, reference.as_ref(), &ctx.strategy)?;
            if let (Some(last), Some(r)) = (report.last(), &reference) {
                ctx.note(format!(
                    "degree {d}: last normalized b = {} against reference {}",
                    q(&last.normalized),
                    q(r)
                ));
            }
            for r in report {
                rows.push(vec![
                    r.level.to_string(),
                    r.index.to_string(),
                    d.to_string(),
                    r.betti.to_string(),
                    q(&r.normalized),
                    reference.as_ref().map(q).unwrap_or_default(),
                    r.gap.as_ref().map(q).unwrap_or_default(),
                ]);
            }
        }
        ctx.out.csv(
            "kazhdan.csv",
            &["level", "index", "degree", "b_Q", "normalized", "reference", "gap"],
            rows,
        )?;
    }

    if !ctx.cfg.skip_uct && ctx.complex().ring() == CoefficientRing::Integers && !ctx.cfg.primes.is_empty() {
        let (inputs, primes) = (ctx.inputs, &ctx.cfg.primes);
        let levels = inputs.tower.levels();
        let checks: Vec<(usize, u64, Vec<crate::reduction::UctRow>)> = levels
            .par_iter()
            .enumerate()
            .flat_map(|(i, level)| {
                primes
                    .par_iter()
                    .map(move |&p| uct_check(&inputs.complex, level, p).map(|r| (i + 1, p, r)))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (level, p, uct) in checks {
            let index = levels[level - 1].order();
            for r in uct.iter().filter(|r| ctx.inputs.degrees.contains(&r.degree)) {
                if !r.holds() {
                    failures.push(format!(
                        "universal coefficients fail at level {level}, p = {p}, degree {}",
                        r.degree
                    ));
                }
                rows.push(vec![
                    level.to_string(),
                    index.to_string(),
                    p.to_string(),
                    r.degree.to_string(),
                    r.betti_q.to_string(),
                    r.betti_p.to_string(),
                    r.torsion_q.to_string(),
                    r.torsion_below.to_string(),
                    r.holds().to_string(),
                ]);
            }
        }
        for f in failures {
            ctx.violate(f);
        }
        ctx.out.csv(
            "uct.csv",
            &["level", "index", "p", "degree", "b_Q", "b_Fp", "t_q", "t_q_minus_1", "holds"],
            rows,
        )?;
    }
    Ok(())
}

fn spectrum_analysis(ctx: &mut Ctx) -> Result<()> {
    let bins = ctx.cfg.histogram_bins;
    let mut atoms = Vec::new();
    let mut hist = Vec::new();
    let mut problems = Vec::new();
    for &d in &ctx.inputs.degrees {
        let delta = ctx.complex().laplacian(d)?;
        let n_q = ctx.complex().ranks()[d];
        let measures = ctx
            .tower()
            .levels()
            .par_iter()
            .map(|level| level_spectrum(&delta, level, ctx.cfg.tolerance, &ctx.strategy))
            .collect::<Result<Vec<_>>>()?;
        for (i, (level, mu)) in ctx.tower().levels().iter().zip(&measures).enumerate() {
            let m = level.order();
            let zero_count = (&mu.zero_multiplicity * BigRational::from_integer(m.into()))
                .to_integer()
                .to_usize()
                .unwrap_or(0);
            if zero_count + mu.counts.iter().sum::<usize>() != n_q * m {
                problems.push(format!("spectrum at level {} degree {d} misses eigenvalues", i + 1));
            }
            let lead = [(i + 1).to_string(), m.to_string(), d.to_string()];
            let mut row = lead.to_vec();
            row.extend(["0".into(), zero_count.to_string(), fmt_float(mu.zero_multiplicity.to_f64().unwrap_or(f64::NAN))]);
            atoms.push(row);
            for ((x, mass), count) in mu.atoms.iter().zip(&mu.counts) {
                let mut row = lead.to_vec();
                row.extend([fmt_float(*x), count.to_string(), fmt_float(*mass)]);
                atoms.push(row);
            }
            for (left, right, mass) in mu.histogram(bins) {
                let mut row = lead.to_vec();
                row.extend([fmt_float(left), fmt_float(right), fmt_float(mass)]);
                hist.push(row);
            }
        }
        if let Some(mu) = measures.last() {
            ctx.note(format!(
                "degree {d}: last level has {} positive atoms, kernel mass {}",
                mu.atoms.len(),
                q(&mu.zero_multiplicity)
            ));
        }
    }
    for p in problems {
        ctx.violate(p);
    }
    ctx.out.csv(
        "spectrum.csv",
        &["level", "index", "degree", "eigenvalue", "count", "mass"],
        atoms,
    )?;
    ctx.out.csv(
        "histogram.csv",
        &["level", "index", "degree", "left", "right", "mass"],
        hist,
    )
}

fn converge_analysis(ctx: &mut Ctx) -> Result<()> {
    let mut rows = Vec::new();
    for &d in &ctx.inputs.degrees {
        let delta = ctx.complex().laplacian(d)?;
        let report = moment_convergence_report(&delta, ctx.tower(), ctx.cfg.kmax)?;
        ctx.note(match report.agreement_from {
            Some(l) => format!("degree {d}: moments k <= {} agree from level {l}", ctx.cfg.kmax),
            None => format!("degree {d}: moments k <= {} disagree at the last level", ctx.cfg.kmax),
        });
        for r in report.rows {
            rows.push(vec![
                r.level.to_string(),
                r.index.to_string(),
                d.to_string(),
                r.k.to_string(),
                q(&r.exact),
                q(&r.l2),
                q(&r.difference()),
            ]);
        }
    }
    ctx.out.csv(
        "moments.csv",
        &["level", "index", "degree", "k", "exact", "l2", "difference"],
        rows,
    )
}

fn fkdet_analysis(ctx: &mut Ctx) -> Result<()> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for &d in &ctx.inputs.degrees {
        let delta = ctx.complex().laplacian(d)?;
        let certs = ctx
            .tower()
            .levels()
            .par_iter()
            .map(|level| fk_certificate(&delta, level))
            .collect::<Result<Vec<_>>>()?;
        for (i, c) in certs.iter().enumerate() {
            if c.log_normalized_det < 0.0 {
                bad.push(format!(
                    "negative log determinant {} at level {} degree {d}",
                    c.log_normalized_det,
                    i + 1
                ));
            }
            rows.push(vec![
                (i + 1).to_string(),
                c.index.to_string(),
                d.to_string(),
                c.low_degree.to_string(),
                c.low_coeff.to_string(),
                fmt_float(c.log_normalized_det),
            ]);
        }
        let min = certs
            .iter()
            .map(|c| c.log_normalized_det)
            .fold(f64::INFINITY, f64::min);
        ctx.note(format!("degree {d}: smallest normalized log determinant {}", fmt_float(min)));
    }
    for b in bad {
        ctx.violate(b);
    }
    ctx.out.csv(
        "fkdet.csv",
        &["level", "index", "degree", "low_degree", "low_coeff", "log_normalized_det"],
        rows,
    )
}

fn modp_analysis(ctx: &mut Ctx) -> Result<()> {
    let primes = ctx.tower_primes();
    if primes.is_empty() {
        return Err(Error::Precondition(
            "modp needs a prime p with every index ratio a power of p".into(),
        ));
    }
    for p in primes {
        for &d in &ctx.inputs.degrees.clone() {
            let report = monotone_harness(ctx.complex(), ctx.tower(), d, p)?;
            let col = format!("b{d}_F{p}");
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    let local = r.local.as_ref();
                    vec![
                        r.level.to_string(),
                        r.index.to_string(),
                        r.betti.to_string(),
                        q(&r.normalized),
                        r.delta_sign.to_string(),
                        local.map(|l| l.ranks_match().to_string()).unwrap_or_default(),
                        local.map(|l| l.bound_holds.to_string()).unwrap_or_default(),
                        local.map(|l| l.lemma_holds.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            ctx.out.csv(
                &format!("modp_F{p}_q{d}.csv"),
                &[
                    "level",
                    "index",
                    &col,
                    "normalized",
                    "delta_sign",
                    "local_ranks_match",
                    "local_bound",
                    "local_lemma",
                ],
                rows,
            )?;
            let steps = report.rows.iter().filter(|r| r.local.is_some()).count();
            ctx.note(format!(
                "F{p} degree {d}: non-increasing {}, {steps} index-{p} steps checked in the local ring",
                report.non_increasing()
            ));
            if !report.non_increasing() {
                ctx.violate(format!("normalized F{p} Betti numbers increase in degree {d}"));
            }
            if !report.local_checks_pass() {
                ctx.violate(format!("local ring cross-check fails for F{p} in degree {d}"));
            }
        }
    }
    Ok(())
}

/// `d` from the last index ratio `p^d`.
fn infer_dimension(orders: &[u64], p: u64) -> Option<u32> {
    let (a, b) = (orders[orders.len() - 2], orders[orders.len() - 1]);
    if b % a != 0 {
        return None;
    }
    let (mut r, mut d) = (b / a, 0);
    while r > 1 && r % p == 0 {
        r /= p;
        d += 1;
    }
    (r == 1 && d > 0).then_some(d)
}

fn padic_analysis(ctx: &mut Ctx) -> Result<()> {
    let primes = ctx.tower_primes();
    if primes.is_empty() {
        return Err(Error::Precondition(
            "padic needs a prime p with every index ratio a power of p".into(),
        ));
    }
    let orders = ctx.tower().orders();
    if orders.len() < 3 {
        return Err(Error::Precondition("padic needs at least 3 levels".into()));
    }
    for p in primes {
        let d = match ctx.cfg.padic_d {
            Some(d) => d,
            None => infer_dimension(&orders, p)
                .ok_or_else(|| Error::Precondition(format!("cannot infer d from orders {orders:?}")))?,
        };
        let field = CoefficientRing::prime_field(p)?;
        let ranks: Vec<Vec<usize>> = ctx
            .tower()
            .levels()
            .par_iter()
            .map(|level| {
                reduce_complex(ctx.complex(), level, field)?
                    .iter()
                    .map(|f| f.rank(&ctx.strategy))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let module_ranks = ctx.complex().ranks().to_vec();
        let bettis: Vec<Vec<u64>> = ranks
            .iter()
            .zip(&orders)
            .map(|(r, &m)| betti_from_ranks(&module_ranks, m as usize, r))
            .collect();
        // kernel of A_q: C_q -> C_{q-1} is b_q + rank A_{q+1}
        let rank_data: Vec<Vec<RankData>> = ranks
            .iter()
            .zip(&bettis)
            .zip(&orders)
            .map(|((r, b), &m)| {
                (1..module_ranks.len())
                    .map(|qd| RankData {
                        domain: module_ranks[qd] * m as usize,
                        image: r[qd - 1],
                        kernel: b[qd] as usize + r.get(qd).copied().unwrap_or(0),
                    })
                    .collect()
            })
            .collect();
        let meta = PadicTowerMeta {
            p,
            d,
            w_hint: None,
            indices: orders.clone(),
        };
        for &deg in &ctx.inputs.degrees.clone() {
            let seq: Vec<BigRational> = bettis
                .iter()
                .map(|b| BigRational::from_integer(BigInt::from(b[deg])))
                .collect();
            let report = padic_fit(&seq, &meta, 1e-6, Some(&rank_data))?;
            let rows = seq
                .iter()
                .zip(&orders)
                .zip(&report.residuals)
                .enumerate()
                .map(|(i, ((b, &m), r))| {
                    vec![
                        (i + 1).to_string(),
                        m.to_string(),
                        b.to_integer().to_string(),
                        q(&(b / BigRational::from_integer(m.into()))),
                        q(r),
                    ]
                })
                .collect();
            let stem = format!("padic_F{p}_q{deg}");
            ctx.out.csv(
                &format!("{stem}.csv"),
                &["level", "index", "betti", "normalized", "residual"],
                rows,
            )?;
            ctx.out.json(
                &format!("{stem}.json"),
                &json!({
                    "p": p,
                    "d": d,
                    "degree": deg,
                    "beta_estimate": q(&report.beta_estimate),
                    "w": q(&report.w),
                    "first_regular_level": report.first_regular_level,
                    "residuals": report.residuals.iter().map(q).collect::<Vec<_>>(),
                    "fitted_exponent": fmt_float(report.fitted_exponent),
                    "bound": fmt_float(report.bound),
                    "within_bound": report.within_bound(),
                    "vacuous": report.vacuous(),
                    "monotone": report.monotone,
                    "dim_formulae": report.dim_formulae,
                }),
            );
            ctx.note(format!(
                "F{p} degree {deg}: beta estimate {}, fitted exponent {} against bound {}",
                q(&report.beta_estimate),
                fmt_float(report.fitted_exponent),
                fmt_float(report.bound)
            ));
            if !report.within_bound() {
                ctx.violate(format!(
                    "residual exponent {} exceeds {} for F{p} degree {deg}",
                    report.fitted_exponent, report.bound
                ));
            }
            if report.dim_formulae == Some(false) {
                ctx.violate(format!("rank additivity fails for F{p}"));
            }
        }
    }
    Ok(())
}

fn rankgrad_analysis(ctx: &mut Ctx) -> Result<()> {
    let primes = if ctx.cfg.primes.is_empty() {
        vec![2, 3, 5]
    } else {
        ctx.cfg.primes.clone()
    };
    let builtin = ctx
        .inputs
        .builtin
        .ok_or_else(|| Error::Precondition("rankgrad needs a builtin wedge of circles".into()))?;
    let report = rank_gradient(builtin, ctx.tower(), &primes, &ctx.strategy)?;
    let mut header: Vec<String> = ["level", "index", "d_estimate", "rg_term", "d_over_index"]
        .map(String::from)
        .to_vec();
    header.extend(primes.iter().map(|p| format!("b1_F{p}")));
    header.extend(["identity_holds", "chain_holds"].map(String::from));
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.level.to_string(),
                r.index.to_string(),
                r.d_estimate.to_string(),
                q(&r.rg_term),
                q(&r.d_over_index),
            ];
            row.extend(r.betti_modp.values().map(u64::to_string));
            row.push(r.identity_holds.to_string());
            row.push(r.chain_holds.to_string());
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.csv("rankgrad.csv", &header_refs, rows)?;
    ctx.out.json(
        "rankgrad.json",
        &json!({
            "d": report.d,
            "limit_estimate": q(&report.limit_estimate),
            "reference_l2_betti": q(&report.reference),
            "non_increasing": report.non_increasing,
            "identity_holds": report.identity_holds(),
            "chain_holds": report.chain_holds(),
        }),
    );
    ctx.note(format!(
        "rank gradient estimate {} against reference {}",
        q(&report.limit_estimate),
        q(&report.reference)
    ));
    for v in report.violations() {
        ctx.violate(v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text() {
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(2.0 * 2f64.ln() / 2.0), "0.69314718056");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn dimension_inference() {
        assert_eq!(infer_dimension(&[4, 16, 64], 2), Some(2));
        assert_eq!(infer_dimension(&[3, 9], 3), Some(1));
        assert_eq!(infer_dimension(&[4, 12], 2), None);
    }
}
