//! JSON documents for complexes and towers (`"format": 1`).
//!
//! A complex:
//! ```json
//! {"format":1,"group":{"kind":"free","rank":2},"coefficients":"Z","ranks":[1,2],
//!  "boundaries":{"1":[[[{"word":"g0","coeff":"1"},{"word":"","coeff":"-1"}]],
//!                     [[{"word":"g1","coeff":"1"},{"word":"","coeff":"-1"}]]]}}
//! ```
//! A tower:
//! ```json
//! {"format":1,"levels":[{"order":2,"generators":[[1,0],[1,0]]},
//!                       {"order":4,"generators":[[1,0,3,2],[2,3,0,1]]}],
//!  "maps":[[0,0,1,1]]}
//! ```
//! Words are space separated tokens `gK`, `gK^N` or `gK^-N`, the empty word
//! is the identity, and coefficients are exact decimal strings (`"-3"`,
//! `"0.25"`, `"2/3"`).

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Map, Value};

use crate::complex::ChainComplexSpec;
use crate::error::{Error, Result};
use crate::group::{FiniteQuotient, GroupElement, GroupKind, GroupModelSpec, Perm, Tower};
use crate::group_ring::{GroupRingElement, GroupRingMatrix};
use crate::ring::{format_rational, parse_rational, CoefficientRing};

pub const FORMAT_VERSION: u64 = 1;

/// Strictness for unknown keys; lax mode collects warnings instead.
#[derive(Debug, Default)]
pub struct Diagnostics {
    pub strict: bool,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn strict() -> Self {
        Self {
            strict: true,
            warnings: Vec::new(),
        }
    }

    pub fn lax() -> Self {
        Self::default()
    }

    pub(crate) fn check_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                let at = join(path, key);
                if self.strict {
                    return Err(Error::parse(at, "unknown field"));
                }
                log::warn!("{at}: unknown field ignored");
                self.warnings.push(format!("{at}: unknown field ignored"));
            }
        }
        Ok(())
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

pub(crate) fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::parse(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::parse(path, "expected a non-negative integer"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::parse(path, "expected a string"))
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(join(path, key), "missing field"))
}

fn check_version(obj: &Map<String, Value>) -> Result<()> {
    match obj.get("format") {
        None => Ok(()),
        Some(v) => match v.as_u64() {
            Some(FORMAT_VERSION) => Ok(()),
            _ => Err(Error::parse("format", format!("unsupported format version {v}"))),
        },
    }
}

/// Exact value of `"12"`, `"-0.125"`, `"1e3"`-free decimals and `"a/b"`.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let Some((int, frac)) = t.split_once('.') else {
        return parse_rational(t);
    };
    let bad = || Error::InvalidParams(format!("not a decimal number: {s:?}"));
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let negative = int.starts_with('-');
    let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
    let n = BigInt::from_str(&digits).map_err(|_| bad())?;
    let value = BigRational::new(n, BigInt::from(10u32).pow(frac.len() as u32));
    Ok(if negative { -value } else { value })
}

/// Parses `"g0 g1^-2 g0^3"`.
pub fn parse_word(model: GroupModelSpec, word: &str) -> Result<GroupElement> {
    let mut letters = Vec::new();
    for token in word.split_whitespace() {
        let bad = || Error::InvalidParams(format!("bad word token {token:?}"));
        let rest = token.strip_prefix('g').ok_or_else(bad)?;
        let (g, e) = match rest.split_once('^') {
            Some((g, e)) => (g, e.parse::<i64>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let g = g.parse::<usize>().map_err(|_| bad())?;
        letters.push((g, e));
    }
    GroupElement::from_letters(model, &letters)
}

fn word_string(g: &GroupElement) -> String {
    if g.is_identity() {
        String::new()
    } else {
        g.to_string()
    }
}

fn parse_model(v: &Value, diag: &mut Diagnostics) -> Result<GroupModelSpec> {
    let obj = as_object(v, "group")?;
    diag.check_keys(obj, &["kind", "rank"], "group")?;
    let kind = match as_str(required(obj, "kind", "group")?, "group.kind")? {
        "free" => GroupKind::Free,
        "free_abelian" => GroupKind::FreeAbelian,
        "heisenberg" => GroupKind::Heisenberg,
        other => return Err(Error::parse("group.kind", format!("unknown group kind {other:?}"))),
    };
    let rank = match obj.get("rank") {
        Some(r) => as_u64(r, "group.rank")? as usize,
        None if kind == GroupKind::Heisenberg => 3,
        None => return Err(Error::parse("group.rank", "missing field")),
    };
    if kind == GroupKind::Heisenberg && rank != 3 {
        return Err(Error::parse("group.rank", "the Heisenberg group has 3 generators"));
    }
    GroupModelSpec::new(kind, rank).map_err(|e| Error::parse("group", e.to_string()))
}

fn model_json(model: GroupModelSpec) -> Value {
    json!({ "kind": model.kind.name(), "rank": model.rank })
}

/// Parses a complex document. Shape errors name the offending path; the
/// chain condition is not checked here.
pub fn parse_complex(text: &str, diag: &mut Diagnostics) -> Result<ChainComplexSpec> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::parse("", e.to_string()))?;
    let obj = as_object(&doc, "")?;
    diag.check_keys(obj, &["format", "group", "coefficients", "ranks", "boundaries"], "")?;
    check_version(obj)?;
    let model = parse_model(required(obj, "group", "")?, diag)?;
    let ring = match obj.get("coefficients") {
        None => CoefficientRing::Integers,
        Some(v) => CoefficientRing::from_str(as_str(v, "coefficients")?)
            .map_err(|e| Error::parse("coefficients", e.to_string()))?,
    };
    let ranks: Vec<usize> = as_array(required(obj, "ranks", "")?, "ranks")?
        .iter()
        .enumerate()
        .map(|(i, r)| as_u64(r, &format!("ranks[{i}]")).map(|x| x as usize))
        .collect::<Result<_>>()?;
    if ranks.is_empty() {
        return Err(Error::parse("ranks", "complex needs at least degree 0"));
    }
    let bobj = match obj.get("boundaries") {
        Some(v) => as_object(v, "boundaries")?.clone(),
        None => Map::new(),
    };
    let allowed: Vec<String> = (1..ranks.len()).map(|q| q.to_string()).collect();
    for key in bobj.keys() {
        if !allowed.contains(key) {
            return Err(Error::parse(
                format!("boundaries.{key}"),
                format!("degree must be in 1..={}", ranks.len() - 1),
            ));
        }
    }
    let mut boundaries = Vec::with_capacity(ranks.len() - 1);
    for q in 1..ranks.len() {
        let path = format!("boundaries.{q}");
        let mut a = GroupRingMatrix::zeros(model, ring, ranks[q], ranks[q - 1]);
        if let Some(rows_v) = bobj.get(&q.to_string()) {
            let rows = as_array(rows_v, &path)?;
            if rows.len() != ranks[q] {
                return Err(Error::parse(
                    &path,
                    format!("expected {} rows, found {}", ranks[q], rows.len()),
                ));
            }
            for (r, row_v) in rows.iter().enumerate() {
                let rpath = format!("{path}[{r}]");
                let row = as_array(row_v, &rpath)?;
                if row.len() != ranks[q - 1] {
                    return Err(Error::parse(
                        &rpath,
                        format!("expected {} entries, found {}", ranks[q - 1], row.len()),
                    ));
                }
                for (c, entry_v) in row.iter().enumerate() {
                    let epath = format!("{rpath}[{c}]");
                    let entry = parse_entry(entry_v, model, ring, &epath, diag)?;
                    a.set(r, c, entry).map_err(|e| Error::parse(&epath, e.to_string()))?;
                }
            }
        }
        boundaries.push(a);
    }
    ChainComplexSpec::new(model, ring, ranks, boundaries).map_err(|e| Error::parse("", e.to_string()))
}

fn parse_entry(
    v: &Value,
    model: GroupModelSpec,
    ring: CoefficientRing,
    path: &str,
    diag: &mut Diagnostics,
) -> Result<GroupRingElement> {
    let mut terms = Vec::new();
    for (t, term_v) in as_array(v, path)?.iter().enumerate() {
        let tpath = format!("{path}[{t}]");
        let term = as_object(term_v, &tpath)?;
        diag.check_keys(term, &["word", "coeff"], &tpath)?;
        let word = as_str(required(term, "word", &tpath)?, &format!("{tpath}.word"))?;
        let g = parse_word(model, word).map_err(|e| Error::parse(format!("{tpath}.word"), e.to_string()))?;
        let cpath = format!("{tpath}.coeff");
        let coeff = parse_decimal(as_str(required(term, "coeff", &tpath)?, &cpath)?)
            .map_err(|e| Error::parse(&cpath, e.to_string()))?;
        terms.push((g, coeff));
    }
    GroupRingElement::from_terms(model, ring, terms).map_err(|e| Error::parse(path, e.to_string()))
}

/// Inverse of [`parse_complex`]; entries list terms in element order.
pub fn complex_to_json(c: &ChainComplexSpec) -> Value {
    let mut boundaries = Map::new();
    for (i, a) in c.boundaries().iter().enumerate() {
        let rows: Vec<Value> = (0..a.rows())
            .map(|r| {
                let entries: Vec<Value> = (0..a.cols())
                    .map(|col| {
                        let terms: Vec<Value> = a
                            .get(r, col)
                            .terms()
                            .iter()
                            .map(|(g, x)| json!({ "word": word_string(g), "coeff": coeff_string(x) }))
                            .collect();
                        Value::Array(terms)
                    })
                    .collect();
                Value::Array(entries)
            })
            .collect();
        boundaries.insert((i + 1).to_string(), Value::Array(rows));
    }
    json!({
        "format": FORMAT_VERSION,
        "group": model_json(c.model()),
        "coefficients": c.ring().label(),
        "ranks": c.ranks(),
        "boundaries": boundaries,
    })
}

fn coeff_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format_rational(x)
    }
}

/// Parses a tower document. A regularity failure names its level.
pub fn parse_tower(text: &str, diag: &mut Diagnostics) -> Result<Tower> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::parse("", e.to_string()))?;
    let obj = as_object(&doc, "")?;
    diag.check_keys(obj, &["format", "group", "levels", "maps"], "")?;
    check_version(obj)?;
    let levels = as_array(required(obj, "levels", "")?, "levels")?;
    let mut quotients = Vec::with_capacity(levels.len());
    for (i, level_v) in levels.iter().enumerate() {
        let path = format!("levels[{i}]");
        let level = as_object(level_v, &path)?;
        diag.check_keys(level, &["order", "generators", "label"], &path)?;
        let order = as_u64(required(level, "order", &path)?, &format!("{path}.order"))? as usize;
        let gens = as_array(required(level, "generators", &path)?, &format!("{path}.generators"))?;
        let mut perms = Vec::with_capacity(gens.len());
        for (g, gen_v) in gens.iter().enumerate() {
            let gpath = format!("{path}.generators[{g}]");
            let images: Vec<u32> = as_array(gen_v, &gpath)?
                .iter()
                .enumerate()
                .map(|(k, x)| as_u64(x, &format!("{gpath}[{k}]")).map(|x| x as u32))
                .collect::<Result<_>>()?;
            if images.len() != order {
                return Err(Error::parse(
                    &gpath,
                    format!("permutation has {} points, level order is {order}", images.len()),
                ));
            }
            perms.push(Perm::from_images(images).map_err(|e| Error::parse(&gpath, e.to_string()))?);
        }
        let label = match level.get("label") {
            Some(l) => as_str(l, &format!("{path}.label"))?.to_string(),
            None => format!("level {}", i + 1),
        };
        quotients.push(FiniteQuotient::new(label, perms).map_err(|e| Error::parse(&path, e.to_string()))?);
    }
    let maps = match obj.get("maps") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            as_array(v, "maps")?
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let path = format!("maps[{i}]");
                    as_array(m, &path)?
                        .iter()
                        .enumerate()
                        .map(|(k, x)| as_u64(x, &format!("{path}[{k}]")).map(|x| x as u32))
                        .collect::<Result<Vec<u32>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Tower::new(quotients, maps).map_err(|e| match e {
        Error::InvalidQuotient { level, reason } => {
            Error::parse(format!("levels[{}]", level - 1), format!("level {level}: {reason}"))
        }
        other => Error::parse("", other.to_string()),
    })
}

pub fn tower_to_json(t: &Tower) -> Value {
    let levels: Vec<Value> = t
        .levels()
        .iter()
        .map(|q| {
            let gens: Vec<&[u32]> = q.generator_images().iter().map(Perm::images).collect();
            json!({ "label": q.label(), "order": q.order(), "generators": gens })
        })
        .collect();
    let mut doc = json!({ "format": FORMAT_VERSION, "levels": levels });
    if let Some(maps) = t.maps() {
        doc["maps"] = json!(maps);
    }
    doc
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn with_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { path: at, msg } if at.is_empty() => Error::parse(path.display().to_string(), msg),
        Error::Parse { path: at, msg } => Error::parse(format!("{}: {at}", path.display()), msg),
        other => other,
    }
}

pub fn load_complex(path: &Path, diag: &mut Diagnostics) -> Result<ChainComplexSpec> {
    parse_complex(&read(path)?, diag).map_err(|e| with_file(path, e))
}

pub fn load_tower(path: &Path, diag: &mut Diagnostics) -> Result<Tower> {
    parse_tower(&read(path)?, diag).map_err(|e| with_file(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{builtin_complex, BuiltinComplex};
    use crate::group::{make_builtin_tower, TowerFamily};

    #[test]
    fn decimals() {
        assert_eq!(parse_decimal("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_decimal("3").unwrap(), BigRational::from_integer(3.into()));
        assert_eq!(parse_decimal("2/6").unwrap(), BigRational::new(1.into(), 3.into()));
        assert!(parse_decimal("1.").is_err());
        assert!(parse_decimal("x").is_err());
    }

    #[test]
    fn words() {
        let m = GroupModelSpec::free(2);
        let g = parse_word(m, "g0 g1^-2 g1^2 g0").unwrap();
        assert_eq!(g, GroupElement::generator_power(m, 0, 2).unwrap());
        assert!(parse_word(m, "").unwrap().is_identity());
        assert!(parse_word(m, "g2").is_err());
        assert!(parse_word(m, "h0").is_err());
    }

    #[test]
    fn complexes_round_trip() {
        for b in [
            BuiltinComplex::Circle,
            BuiltinComplex::WedgeOfCircles { d: 3 },
            BuiltinComplex::Torus { n: 3 },
            BuiltinComplex::LlsExample { d: 2, p: 2 },
        ] {
            let c = builtin_complex(b).unwrap();
            let text = to_pretty(&complex_to_json(&c));
            assert_eq!(parse_complex(&text, &mut Diagnostics::strict()).unwrap(), c, "{b}");
        }
    }

    #[test]
    fn towers_round_trip() {
        let t = make_builtin_tower(GroupModelSpec::free_abelian(2), TowerFamily::Reduction, 3, 2, false)
            .unwrap();
        let text = to_pretty(&tower_to_json(&t));
        let back = parse_tower(&text, &mut Diagnostics::strict()).unwrap();
        assert_eq!(back.orders(), t.orders());
        assert_eq!(back.maps(), t.maps());
    }

    #[test]
    fn unknown_keys() {
        let text = r#"{"group":{"kind":"free","rank":1},"ranks":[1],"colour":"red"}"#;
        let err = parse_complex(text, &mut Diagnostics::strict()).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let mut lax = Diagnostics::lax();
        assert!(parse_complex(text, &mut lax).is_ok());
        assert_eq!(lax.warnings.len(), 1);
    }

    #[test]
    fn bad_entry_is_named() {
        let text = r#"{"group":{"kind":"free","rank":1},"ranks":[1,1],
            "boundaries":{"1":[[[{"word":"g0","coeff":"1"},{"word":"g7","coeff":"-1"}]]]}}"#;
        let err = parse_complex(text, &mut Diagnostics::strict()).unwrap_err().to_string();
        assert!(err.contains("boundaries.1[0][0][1].word"), "{err}");
    }

    #[test]
    fn irregular_level_is_named() {
        // second generator has a fixed point
        let text = r#"{"levels":[{"order":2,"generators":[[1,0]]},
            {"order":3,"generators":[[1,2,0]]},{"order":4,"generators":[[0,1,3,2]]}]}"#;
        let err = parse_tower(text, &mut Diagnostics::strict()).unwrap_err().to_string();
        assert!(err.contains("level 3"), "{err}");
    }
}
