//! Group models with exact normal forms, finite quotients given as regular
//! permutation representations, and towers of such quotients.
//!
//! Normal subgroups are never represented directly: a level of a tower is a
//! surjection `G -> Q` onto a finite group `Q`, encoded by the images of the
//! generators as permutations of `{0, .., |Q|-1}`. The encoding is only
//! accepted when the generated permutation group acts regularly, so that
//! point `x` names the unique element of `Q` sending `0` to `x` and the kernel
//! has index exactly `|Q|`.
//!
//! Permutations compose as functions: `a.compose(&b)` applies `b` first, and
//! [`quotient_image`] satisfies `image(gh) = image(g) ∘ image(h)`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Free,
    FreeAbelian,
    Heisenberg,
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Free => "free",
            GroupKind::FreeAbelian => "free_abelian",
            GroupKind::Heisenberg => "heisenberg",
        }
    }
}

/// One of the built-in group models. Heisenberg always has the three
/// generators `x, y, z` with `z = [x, y]` central.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupModelSpec {
    pub kind: GroupKind,
    pub rank: usize,
}

impl GroupModelSpec {
    pub fn new(kind: GroupKind, rank: usize) -> Result<Self> {
        match kind {
            GroupKind::Heisenberg => Ok(Self::heisenberg()),
            _ if rank == 0 => Err(Error::InvalidModel(format!(
                "{} group needs rank >= 1",
                kind.name()
            ))),
            _ => Ok(Self { kind, rank }),
        }
    }

    pub fn free(rank: usize) -> Self {
        Self::new(GroupKind::Free, rank).expect("rank >= 1")
    }

    pub fn free_abelian(rank: usize) -> Self {
        Self::new(GroupKind::FreeAbelian, rank).expect("rank >= 1")
    }

    pub fn heisenberg() -> Self {
        Self {
            kind: GroupKind::Heisenberg,
            rank: 3,
        }
    }

    pub fn generator_count(&self) -> usize {
        match self.kind {
            GroupKind::Heisenberg => 3,
            _ => self.rank,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self.kind {
            GroupKind::FreeAbelian => true,
            GroupKind::Free => self.rank == 1,
            GroupKind::Heisenberg => false,
        }
    }
}

impl fmt::Display for GroupModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Free => write!(f, "F_{}", self.rank),
            GroupKind::FreeAbelian => write!(f, "Z^{}", self.rank),
            GroupKind::Heisenberg => write!(f, "H3(Z)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum NormalForm {
    /// Freely reduced word; letter `±(i+1)` is generator `i` or its inverse.
    Word(Vec<i32>),
    Exponents(Vec<i64>),
    /// `(a, b, c)` is the unitriangular matrix with `a` at (1,2), `b` at
    /// (2,3) and `c` at (1,3).
    Heisenberg([i64; 3]),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    model: GroupModelSpec,
    form: NormalForm,
}

impl GroupElement {
    pub fn identity(model: GroupModelSpec) -> Self {
        let form = match model.kind {
            GroupKind::Free => NormalForm::Word(Vec::new()),
            GroupKind::FreeAbelian => NormalForm::Exponents(vec![0; model.rank]),
            GroupKind::Heisenberg => NormalForm::Heisenberg([0; 3]),
        };
        Self { model, form }
    }

    pub fn generator(model: GroupModelSpec, index: usize) -> Result<Self> {
        Self::generator_power(model, index, 1)
    }

    /// `g_index ^ exponent`.
    pub fn generator_power(model: GroupModelSpec, index: usize, exponent: i64) -> Result<Self> {
        if index >= model.generator_count() {
            return Err(Error::InvalidParams(format!(
                "generator g{index} out of range for {model}"
            )));
        }
        let form = match model.kind {
            GroupKind::Free => {
                let letter = if exponent >= 0 {
                    index as i32 + 1
                } else {
                    -(index as i32 + 1)
                };
                NormalForm::Word(vec![letter; exponent.unsigned_abs() as usize])
            }
            GroupKind::FreeAbelian => {
                let mut e = vec![0; model.rank];
                e[index] = exponent;
                NormalForm::Exponents(e)
            }
            GroupKind::Heisenberg => {
                let mut t = [0; 3];
                t[index] = exponent;
                NormalForm::Heisenberg(t)
            }
        };
        Ok(Self { model, form })
    }

    /// Evaluates a word given as `(generator, exponent)` letters.
    pub fn from_letters(model: GroupModelSpec, letters: &[(usize, i64)]) -> Result<Self> {
        let mut acc = Self::identity(model);
        for &(g, e) in letters {
            acc = acc.multiply(&Self::generator_power(model, g, e)?)?;
        }
        Ok(acc)
    }

    pub fn free_word(model: GroupModelSpec, letters: &[i32]) -> Result<Self> {
        let pairs: Vec<(usize, i64)> = letters
            .iter()
            .map(|&l| ((l.unsigned_abs() - 1) as usize, l.signum() as i64))
            .collect();
        Self::from_letters(model, &pairs)
    }

    pub fn free_abelian(model: GroupModelSpec, exponents: Vec<i64>) -> Result<Self> {
        if model.kind != GroupKind::FreeAbelian || exponents.len() != model.rank {
            return Err(Error::InvalidParams(format!(
                "exponent vector of length {} is not an element of {model}",
                exponents.len()
            )));
        }
        Ok(Self {
            model,
            form: NormalForm::Exponents(exponents),
        })
    }

    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        Self {
            model: GroupModelSpec::heisenberg(),
            form: NormalForm::Heisenberg([a, b, c]),
        }
    }

    pub fn model(&self) -> GroupModelSpec {
        self.model
    }

    pub fn is_identity(&self) -> bool {
        match &self.form {
            NormalForm::Word(w) => w.is_empty(),
            NormalForm::Exponents(e) => e.iter().all(|&x| x == 0),
            NormalForm::Heisenberg(t) => *t == [0; 3],
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.model != other.model {
            return Err(Error::ModelMismatch(self.model, other.model));
        }
        let form = match (&self.form, &other.form) {
            (NormalForm::Word(a), NormalForm::Word(b)) => {
                let mut out = a.clone();
                for &letter in b {
                    if out.last() == Some(&-letter) {
                        out.pop();
                    } else {
                        out.push(letter);
                    }
                }
                NormalForm::Word(out)
            }
            (NormalForm::Exponents(a), NormalForm::Exponents(b)) => {
                NormalForm::Exponents(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (NormalForm::Heisenberg([a, b, c]), NormalForm::Heisenberg([a2, b2, c2])) => {
                NormalForm::Heisenberg([a + a2, b + b2, c + c2 + a * b2])
            }
            _ => unreachable!("forms agree with models"),
        };
        Ok(Self {
            model: self.model,
            form,
        })
    }

    pub fn inverse(&self) -> Self {
        let form = match &self.form {
            NormalForm::Word(w) => NormalForm::Word(w.iter().rev().map(|l| -l).collect()),
            NormalForm::Exponents(e) => NormalForm::Exponents(e.iter().map(|x| -x).collect()),
            NormalForm::Heisenberg([a, b, c]) => NormalForm::Heisenberg([-a, -b, a * b - c]),
        };
        Self {
            model: self.model,
            form,
        }
    }

    /// A word in the generators representing this element, as run-length
    /// `(generator, exponent)` letters. Heisenberg uses `x^a y^b z^(c-ab)`.
    pub fn letters(&self) -> Vec<(usize, i64)> {
        match &self.form {
            NormalForm::Word(w) => {
                let mut out: Vec<(usize, i64)> = Vec::new();
                for &l in w {
                    let g = (l.unsigned_abs() - 1) as usize;
                    let e = l.signum() as i64;
                    match out.last_mut() {
                        Some((lg, le)) if *lg == g && le.signum() == e => *le += e,
                        _ => out.push((g, e)),
                    }
                }
                out
            }
            NormalForm::Exponents(e) => e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| (i, x))
                .collect(),
            NormalForm::Heisenberg([a, b, c]) => [(0, *a), (1, *b), (2, c - a * b)]
                .into_iter()
                .filter(|&(_, e)| e != 0)
                .collect(),
        }
    }

    /// Sum of absolute exponents of [`letters`](Self::letters).
    pub fn word_length(&self) -> u64 {
        self.letters().iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn exponents(&self) -> Option<&[i64]> {
        match &self.form {
            NormalForm::Exponents(e) => Some(e),
            _ => None,
        }
    }

    pub fn heisenberg_triple(&self) -> Option<[i64; 3]> {
        match &self.form {
            NormalForm::Heisenberg(t) => Some(*t),
            _ => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters = self.letters();
        if letters.is_empty() {
            return write!(f, "1");
        }
        for (i, (g, e)) in letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *e == 1 {
                write!(f, "g{g}")?;
            } else {
                write!(f, "g{g}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A permutation of `{0, .., n-1}` stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidParams(format!(
                    "image list of length {n} is not a permutation"
                )));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, exp: i64) -> Perm {
        let mut base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Perm::identity(self.len());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn fixed_point(&self) -> Option<usize> {
        self.0.iter().enumerate().find(|(i, &x)| *i as u32 == x).map(|(i, _)| i)
    }

    pub fn order(&self) -> u64 {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = p.compose(self);
            k += 1;
        }
        k
    }
}

/// A surjection of a group model onto a finite group, encoded by the
/// generator images of a regular permutation action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuotient {
    generator_images: Vec<Perm>,
    inverse_images: Vec<Perm>,
    order: usize,
    label: String,
}

impl FiniteQuotient {
    /// Builds the quotient without checking regularity; see
    /// [`validate_quotient`].
    pub fn new(label: impl Into<String>, generator_images: Vec<Perm>) -> Result<Self> {
        let order = generator_images.first().map(Perm::len).unwrap_or(1);
        if order == 0 {
            return Err(Error::InvalidParams("quotient on zero points".into()));
        }
        if generator_images.iter().any(|g| g.len() != order) {
            return Err(Error::InvalidParams(
                "generator images act on different point sets".into(),
            ));
        }
        let inverse_images = generator_images.iter().map(Perm::inverse).collect();
        Ok(Self {
            generator_images,
            inverse_images,
            order,
            label: label.into(),
        })
    }

    /// The quotient `Z^n -> Z/m_1 x .. x Z/m_n` (also used for free groups
    /// through abelianization). Point index is mixed-radix with the first
    /// coordinate fastest.
    pub fn abelian(label: impl Into<String>, moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidParams(format!("bad moduli {moduli:?}")));
        }
        let order: u64 = moduli.iter().product();
        if order > u32::MAX as u64 {
            return Err(Error::InvalidParams(format!("quotient order {order} too large")));
        }
        let strides: Vec<u64> = moduli
            .iter()
            .scan(1u64, |s, &m| {
                let cur = *s;
                *s *= m;
                Some(cur)
            })
            .collect();
        let gens = (0..moduli.len())
            .map(|j| {
                let images = (0..order)
                    .map(|x| {
                        let digit = (x / strides[j]) % moduli[j];
                        let next = (digit + 1) % moduli[j];
                        (x - digit * strides[j] + next * strides[j]) as u32
                    })
                    .collect();
                Perm(images)
            })
            .collect();
        Self::new(label, gens)
    }

    /// `H3(Z/n)` acting on itself by left multiplication; point
    /// `a + n b + n^2 c` is the triple `(a, b, c)`.
    pub fn heisenberg(label: impl Into<String>, n: u64) -> Result<Self> {
        let order = n
            .checked_pow(3)
            .filter(|&o| o <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidParams(format!("H3(Z/{n}) too large")))?;
        let decode = |x: u64| (x % n, (x / n) % n, x / (n * n));
        let encode = |a: u64, b: u64, c: u64| (a % n + n * (b % n) + n * n * (c % n)) as u32;
        let left = |g: usize| {
            let images = (0..order)
                .map(|x| {
                    let (a, b, c) = decode(x);
                    match g {
                        0 => encode(a + 1, b, c + b),
                        1 => encode(a, b + 1, c),
                        _ => encode(a, b, c + 1),
                    }
                })
                .collect();
            Perm(images)
        };
        Self::new(label, (0..3).map(left).collect())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator_count(&self) -> usize {
        self.generator_images.len()
    }

    pub fn generator_images(&self) -> &[Perm] {
        &self.generator_images
    }

    fn letter_image(&self, g: usize, e: i64) -> Perm {
        match e {
            1 => self.generator_images[g].clone(),
            -1 => self.inverse_images[g].clone(),
            _ => self.generator_images[g].pow(e),
        }
    }

    /// Permutation of the right multiplication by the element at point `s`.
    /// It commutes with every generator image, so it is a deck
    /// transformation of the cover; with `s` in the kernel of a map to a
    /// coarser level it generates (part of) that kernel.
    pub fn deck_permutation(&self, s: usize) -> Result<Perm> {
        if s >= self.order {
            return Err(Error::InvalidParams(format!("point {s} out of range")));
        }
        let m = self.order;
        let mut sigma = vec![u32::MAX; m];
        sigma[0] = s as u32;
        let mut queue = VecDeque::from([0usize]);
        while let Some(y) = queue.pop_front() {
            for g in &self.generator_images {
                let x = g.apply(y);
                let image = g.apply(sigma[y] as usize) as u32;
                if sigma[x] == u32::MAX {
                    sigma[x] = image;
                    queue.push_back(x);
                } else if sigma[x] != image {
                    return Err(Error::InvalidParams(
                        "quotient action is not regular; no deck permutation".into(),
                    ));
                }
            }
        }
        if sigma.contains(&u32::MAX) {
            return Err(Error::InvalidParams("quotient action is not transitive".into()));
        }
        Perm::from_images(sigma)
    }
}

/// Realizes the surjection `G -> Q`: the permutation of the image of `g`.
pub fn quotient_image(g: &GroupElement, q: &FiniteQuotient) -> Result<Perm> {
    let element = g.model().generator_count();
    if element != q.generator_count() {
        return Err(Error::GeneratorCount {
            element,
            quotient: q.generator_count(),
        });
    }
    let mut acc = Perm::identity(q.order());
    for (gen, e) in g.letters() {
        acc = acc.compose(&q.letter_image(gen, e));
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotientViolation {
    NotTransitive { orbit_size: usize },
    FixedPoint { point: usize },
    OrderExceeded { closure_size: usize },
}

impl fmt::Display for QuotientViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientViolation::NotTransitive { orbit_size } => {
                write!(f, "not transitive (orbit of 0 has {orbit_size} points)")
            }
            QuotientViolation::FixedPoint { point } => {
                write!(f, "a non-identity element fixes point {point}")
            }
            QuotientViolation::OrderExceeded { closure_size } => {
                write!(f, "generated group has more than {} elements", closure_size - 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientReport {
    pub order: usize,
    pub closure_size: usize,
    pub violation: Option<QuotientViolation>,
}

impl QuotientReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that the generator images generate a group of exactly `m`
/// elements acting transitively without fixed points (a regular action).
pub fn validate_quotient(q: &FiniteQuotient) -> QuotientReport {
    let m = q.order();
    let report = |closure_size, violation| QuotientReport {
        order: m,
        closure_size,
        violation,
    };

    let mut seen = vec![false; m];
    seen[0] = true;
    let mut orbit = 1;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for g in q.generator_images() {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                orbit += 1;
                queue.push_back(y);
            }
        }
    }
    if orbit != m {
        return report(0, Some(QuotientViolation::NotTransitive { orbit_size: orbit }));
    }

    let identity = Perm::identity(m);
    let mut closure: HashSet<Perm> = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(h) = queue.pop_front() {
        for g in q.generator_images() {
            let next = g.compose(&h);
            if closure.contains(&next) {
                continue;
            }
            if let Some(point) = next.fixed_point() {
                if !next.is_identity() {
                    return report(closure.len(), Some(QuotientViolation::FixedPoint { point }));
                }
            }
            closure.insert(next.clone());
            if closure.len() > m {
                return report(
                    closure.len(),
                    Some(QuotientViolation::OrderExceeded {
                        closure_size: closure.len(),
                    }),
                );
            }
            queue.push_back(next);
        }
    }
    report(closure.len(), None)
}

/// Built-in congruence families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerFamily {
    /// `Z^n -> (Z/p^k)^n`.
    Reduction,
    /// `H3(Z) -> H3(Z/p^k)`.
    HeisenbergCongruence,
    /// `F_d -> Z^d -> (Z/p^k)^d`. Kernels do not intersect trivially.
    AbelianizedReduction,
}

impl TowerFamily {
    pub fn for_model(model: GroupModelSpec) -> Self {
        match model.kind {
            GroupKind::Free => TowerFamily::AbelianizedReduction,
            GroupKind::FreeAbelian => TowerFamily::Reduction,
            GroupKind::Heisenberg => TowerFamily::HeisenbergCongruence,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TowerFamily::Reduction => "reduction",
            TowerFamily::HeisenbergCongruence => "heisenberg",
            TowerFamily::AbelianizedReduction => "abelianized",
        }
    }
}

/// A sequence of finite quotients of strictly increasing order, optionally
/// with compatibility maps `maps[i]: points(level i+1) -> points(level i)`.
#[derive(Clone, Debug)]
pub struct Tower {
    quotients: Vec<FiniteQuotient>,
    maps: Option<Vec<Vec<u32>>>,
}

impl Tower {
    /// Validates every level (regularity), the order sequence, and that each
    /// map is a homomorphism on generator images sending 0 to 0.
    pub fn new(quotients: Vec<FiniteQuotient>, maps: Option<Vec<Vec<u32>>>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InvalidTower("tower has no levels".into()));
        }
        for (i, q) in quotients.iter().enumerate() {
            if let Some(v) = validate_quotient(q).violation {
                return Err(Error::InvalidQuotient {
                    level: i + 1,
                    reason: v.to_string(),
                });
            }
        }
        let gens = quotients[0].generator_count();
        if quotients.iter().any(|q| q.generator_count() != gens) {
            return Err(Error::InvalidTower("levels disagree on generator count".into()));
        }
        for w in quotients.windows(2) {
            if w[1].order() <= w[0].order() {
                return Err(Error::InvalidTower(format!(
                    "orders must increase strictly ({} then {})",
                    w[0].order(),
                    w[1].order()
                )));
            }
        }
        if let Some(maps) = &maps {
            if maps.len() + 1 != quotients.len() {
                return Err(Error::InvalidTower(format!(
                    "{} levels need {} maps, got {}",
                    quotients.len(),
                    quotients.len() - 1,
                    maps.len()
                )));
            }
            for (i, map) in maps.iter().enumerate() {
                check_map(&quotients[i], &quotients[i + 1], map).map_err(|reason| {
                    Error::InvalidTower(format!("map {} -> {}: {reason}", i + 2, i + 1))
                })?;
            }
        }
        Ok(Self { quotients, maps })
    }

    pub fn levels(&self) -> &[FiniteQuotient] {
        &self.quotients
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.quotients.iter().map(|q| q.order() as u64).collect()
    }

    pub fn maps(&self) -> Option<&[Vec<u32>]> {
        self.maps.as_deref()
    }

    /// Non-identity points of level `i+1` (0-based `i`) mapping to the
    /// identity of level `i`, i.e. the kernel of the step.
    pub fn step_kernel(&self, i: usize) -> Option<Vec<usize>> {
        let map = self.maps.as_ref()?.get(i)?;
        Some(
            map.iter()
                .enumerate()
                .filter(|&(x, &y)| x != 0 && y == 0)
                .map(|(x, _)| x)
                .collect(),
        )
    }

    /// Diagonal abelian quotients `(Z/m)^r` for each listed `m`, for free or
    /// free abelian models. Maps are attached when each modulus divides the
    /// next.
    pub fn from_moduli(model: GroupModelSpec, moduli: &[u64]) -> Result<Self> {
        if model.kind == GroupKind::Heisenberg {
            return Err(Error::UnsupportedFamily {
                family: "moduli".into(),
                model: model.to_string(),
            });
        }
        let r = model.generator_count();
        let vectors: Vec<Vec<u64>> = moduli.iter().map(|&m| vec![m; r]).collect();
        abelian_tower(&vectors)
    }
}

fn check_map(
    coarse: &FiniteQuotient,
    fine: &FiniteQuotient,
    map: &[u32],
) -> std::result::Result<(), String> {
    if map.len() != fine.order() {
        return Err(format!("has {} entries, expected {}", map.len(), fine.order()));
    }
    if !fine.order().is_multiple_of(coarse.order()) {
        return Err(format!(
            "order {} does not divide {}",
            coarse.order(),
            fine.order()
        ));
    }
    if map.iter().any(|&y| y as usize >= coarse.order()) {
        return Err("image point out of range".into());
    }
    if map[0] != 0 {
        return Err("identity point must map to identity point".into());
    }
    for (gf, gc) in fine.generator_images().iter().zip(coarse.generator_images()) {
        for x in 0..fine.order() {
            if map[gf.apply(x)] as usize != gc.apply(map[x] as usize) {
                return Err(format!("not compatible with generator images at point {x}"));
            }
        }
    }
    Ok(())
}

fn abelian_tower(moduli: &[Vec<u64>]) -> Result<Tower> {
    let quotients = moduli
        .iter()
        .map(|m| {
            let label = m.iter().map(|x| format!("Z/{x}")).collect::<Vec<_>>().join(" x ");
            FiniteQuotient::abelian(label, m)
        })
        .collect::<Result<Vec<_>>>()?;
    let divisible = moduli
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b % a == 0));
    let maps = divisible.then(|| {
        moduli
            .windows(2)
            .map(|w| {
                let (coarse, fine) = (&w[0], &w[1]);
                let order: u64 = fine.iter().product();
                (0..order)
                    .map(|mut x| {
                        let mut y = 0u64;
                        let mut stride = 1u64;
                        for (&mf, &mc) in fine.iter().zip(coarse) {
                            y += ((x % mf) % mc) * stride;
                            x /= mf;
                            stride *= mc;
                        }
                        y as u32
                    })
                    .collect()
            })
            .collect()
    });
    Tower::new(quotients, maps)
}

/// Congruence towers of the built-in models at levels `k = 1..=depth`.
///
/// With `p_step_refinement` (abelian families only) the moduli grow one
/// coordinate at a time, so every step has index exactly `p`; `depth` then
/// counts the refined levels.
pub fn make_builtin_tower(
    model: GroupModelSpec,
    family: TowerFamily,
    depth: usize,
    p: u64,
    p_step_refinement: bool,
) -> Result<Tower> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if depth == 0 {
        return Err(Error::InvalidParams("tower depth must be >= 1".into()));
    }
    let compatible = matches!(
        (model.kind, family),
        (GroupKind::FreeAbelian, TowerFamily::Reduction)
            | (GroupKind::Heisenberg, TowerFamily::HeisenbergCongruence)
            | (GroupKind::Free, TowerFamily::AbelianizedReduction)
    );
    if !compatible {
        return Err(Error::UnsupportedFamily {
            family: family.name().into(),
            model: model.to_string(),
        });
    }
    match family {
        TowerFamily::HeisenbergCongruence => {
            if p_step_refinement {
                return Err(Error::UnsupportedFamily {
                    family: "heisenberg with p-step refinement".into(),
                    model: model.to_string(),
                });
            }
            let mut quotients = Vec::with_capacity(depth);
            let mut maps = Vec::new();
            for k in 1..=depth as u32 {
                let n = p
                    .checked_pow(k)
                    .ok_or_else(|| Error::InvalidParams("modulus overflow".into()))?;
                quotients.push(FiniteQuotient::heisenberg(format!("H3(Z/{n})"), n)?);
                if k > 1 {
                    let coarse = n / p;
                    let map = (0..n * n * n)
                        .map(|x| {
                            let (a, b, c) = (x % n, (x / n) % n, x / (n * n));
                            ((a % coarse) + coarse * (b % coarse) + coarse * coarse * (c % coarse))
                                as u32
                        })
                        .collect();
                    maps.push(map);
                }
            }
            Tower::new(quotients, Some(maps))
        }
        TowerFamily::Reduction | TowerFamily::AbelianizedReduction => {
            let r = model.generator_count();
            let mut moduli = Vec::with_capacity(depth);
            if p_step_refinement {
                let mut current = vec![1u64; r];
                for step in 0..depth {
                    current[step % r] *= p;
                    moduli.push(current.clone());
                }
            } else {
                for k in 1..=depth as u32 {
                    moduli.push(vec![p.pow(k); r]);
                }
            }
            abelian_tower(&moduli)
        }
    }
}
