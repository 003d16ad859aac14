use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::format::{as_object, load_complex, load_tower, Diagnostics};
use crate::complex::{builtin_complex, BuiltinComplex, ChainComplexSpec};
use crate::error::{Error, Result};
use crate::group::{make_builtin_tower, Tower, TowerFamily};
use crate::ring::parse_rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Betti,
    Spectrum,
    Converge,
    Fkdet,
    Modp,
    Padic,
    Rankgrad,
}

impl Analysis {
    pub const ALL: [Analysis; 7] = [
        Analysis::Betti,
        Analysis::Spectrum,
        Analysis::Converge,
        Analysis::Fkdet,
        Analysis::Modp,
        Analysis::Padic,
        Analysis::Rankgrad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Betti => "betti",
            Analysis::Spectrum => "spectrum",
            Analysis::Converge => "converge",
            Analysis::Fkdet => "fkdet",
            Analysis::Modp => "modp",
            Analysis::Padic => "padic",
            Analysis::Rankgrad => "rankgrad",
        }
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown analysis {s:?}")))
    }
}

/// A builtin name such as `"wedge:2"`, or a complex file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexSource {
    pub builtin: Option<String>,
    pub file: Option<PathBuf>,
}

/// A builtin family, explicit diagonal moduli, or a tower file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TowerSource {
    pub family: Option<String>,
    pub p: u64,
    pub depth: usize,
    /// Grow one coordinate at a time so every step has index `p`.
    pub refine: bool,
    pub moduli: Option<Vec<u64>>,
    pub file: Option<PathBuf>,
}

impl Default for TowerSource {
    fn default() -> Self {
        Self {
            family: None,
            p: 2,
            depth: 3,
            refine: false,
            moduli: None,
            file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub complex: ComplexSource,
    pub tower: TowerSource,
    /// Empty means every degree of the complex.
    pub degrees: Vec<usize>,
    pub primes: Vec<u64>,
    pub rationals: bool,
    pub analyses: Vec<Analysis>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub kmax: u32,
    pub tolerance: f64,
    pub padic_d: Option<u32>,
    /// Exact rational, e.g. `"1"`; builtin complexes know their own.
    pub reference_l2_betti: Option<String>,
    /// Skip the Smith normal form cross-check in `betti`.
    pub skip_uct: bool,
    pub histogram_bins: usize,
    /// Directory that relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            complex: ComplexSource::default(),
            tower: TowerSource::default(),
            degrees: Vec::new(),
            primes: Vec::new(),
            rationals: true,
            analyses: Vec::new(),
            out: None,
            seed: 0x5eed_0001,
            kmax: 6,
            tolerance: crate::spectral::DEFAULT_TOLERANCE,
            padic_d: None,
            reference_l2_betti: None,
            skip_uct: false,
            histogram_bins: 32,
            base_dir: PathBuf::from("."),
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "complex",
    "tower",
    "degrees",
    "primes",
    "rationals",
    "analyses",
    "out",
    "seed",
    "kmax",
    "tolerance",
    "padic_d",
    "reference_l2_betti",
    "skip_uct",
    "histogram_bins",
];

/// What a config resolves to once its files are read.
pub struct Inputs {
    pub complex: ChainComplexSpec,
    pub builtin: Option<BuiltinComplex>,
    pub tower: Tower,
    /// The prime of a builtin tower.
    pub tower_prime: Option<u64>,
    pub degrees: Vec<usize>,
}

pub fn parse_family(s: &str) -> Result<TowerFamily> {
    match s {
        "reduction" => Ok(TowerFamily::Reduction),
        "heisenberg" | "heisenberg_congruence" => Ok(TowerFamily::HeisenbergCongruence),
        "abelianized" | "abelianized_reduction" => Ok(TowerFamily::AbelianizedReduction),
        _ => Err(Error::InvalidParams(format!("unknown tower family {s:?}"))),
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str, base_dir: &Path, diag: &mut Diagnostics) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::parse("", e.to_string()))?;
        let obj = as_object(&doc, "")?;
        diag.check_keys(obj, TOP_KEYS, "")?;
        if let Some(c) = obj.get("complex") {
            diag.check_keys(as_object(c, "complex")?, &["builtin", "file"], "complex")?;
        }
        if let Some(t) = obj.get("tower") {
            diag.check_keys(
                as_object(t, "tower")?,
                &["family", "p", "depth", "refine", "moduli", "file"],
                "tower",
            )?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(doc).map_err(|e| Error::parse("", e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, diag: &mut Diagnostics) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&text, &base, diag).map_err(|e| match e {
            Error::Parse { path: at, msg } if at.is_empty() => Error::parse(path.display().to_string(), msg),
            Error::Parse { path: at, msg } => Error::parse(format!("{}: {at}", path.display()), msg),
            other => other,
        })
    }

    /// Source-independent checks; degrees are checked once the complex is
    /// known.
    pub fn check(&self) -> Result<()> {
        if self.analyses.is_empty() {
            return Err(Error::parse("analyses", "at least one analysis is required"));
        }
        match (&self.complex.builtin, &self.complex.file) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::parse("complex", "give exactly one of builtin or file")),
        }
        if self.tower.file.is_some() && self.tower.moduli.is_some() {
            return Err(Error::parse("tower", "give at most one of file or moduli"));
        }
        if self.kmax == 0 {
            return Err(Error::parse("kmax", "must be >= 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::parse("tolerance", "must lie in (0, 1)"));
        }
        if self.histogram_bins == 0 {
            return Err(Error::parse("histogram_bins", "must be >= 1"));
        }
        if let Some(r) = &self.reference_l2_betti {
            parse_rational(r).map_err(|e| Error::parse("reference_l2_betti", e.to_string()))?;
        }
        Ok(())
    }

    pub fn reference(&self) -> Option<BigRational> {
        self.reference_l2_betti.as_deref().and_then(|r| parse_rational(r).ok())
    }

    fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn resolve(&self, diag: &mut Diagnostics) -> Result<Inputs> {
        self.check()?;
        let (complex, builtin) = match (&self.complex.builtin, &self.complex.file) {
            (Some(name), _) => {
                let b = BuiltinComplex::from_str(name)
                    .map_err(|e| Error::parse("complex.builtin", e.to_string()))?;
                (builtin_complex(b)?, Some(b))
            }
            (None, Some(file)) => (load_complex(&self.resolve_path(file), diag)?, None),
            (None, None) => unreachable!("checked"),
        };
        let model = complex.model();
        let t = &self.tower;
        let (tower, tower_prime) = if let Some(file) = &t.file {
            (load_tower(&self.resolve_path(file), diag)?, None)
        } else if let Some(moduli) = &t.moduli {
            (Tower::from_moduli(model, moduli)?, None)
        } else {
            let family = match &t.family {
                Some(f) => parse_family(f).map_err(|e| Error::parse("tower.family", e.to_string()))?,
                None => TowerFamily::for_model(model),
            };
            (make_builtin_tower(model, family, t.depth, t.p, t.refine)?, Some(t.p))
        };
        let top = complex.top_degree();
        let degrees = if self.degrees.is_empty() {
            (0..=top).collect()
        } else {
            self.degrees.clone()
        };
        if let Some(&bad) = degrees.iter().find(|&&d| d > top) {
            return Err(Error::DegreeOutOfRange { degree: bad, top });
        }
        for &p in &self.primes {
            if !crate::arith::is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        Ok(Inputs {
            complex,
            builtin,
            tower,
            tower_prime,
            degrees,
        })
    }
}
