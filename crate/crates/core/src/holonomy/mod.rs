//! Orientation-preserving homeomorphisms of `I = [-1, 1]` fixing both ends.
//!
//! A [`HoloMap`] is either an exact PL map or a lazily evaluated map built
//! from PL generators: a conjugacy witness iterated through a fundamental
//! domain, a composition, a concatenation over a partition, or one member
//! of a self-similar system of concatenation equations. Lazy maps are
//! evaluated through monotone interval enclosures with rational endpoints,
//! refined until the requested precision is met.

mod lemmas;
mod orbit;
mod pl;
pub mod rational;

use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lemmas::{
    commutator_factorization, conjugacy_witness, genus_factorization, solve_concatenation_i,
    solve_concatenation_ii,
};
pub use pl::{Drift, PlMap, Point};
use orbit::Round;
use rational::{int, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HoloError {
    #[error("map does not fix both endpoints")]
    EndpointNotFixed,
    #[error("map is not strictly increasing at {x}")]
    NotMonotone { x: String },
    #[error("{maps} maps for a partition with {blocks} blocks")]
    LengthMismatch { maps: usize, blocks: usize },
    #[error("partition cut points must increase strictly from -1 to 1")]
    BadPartition,
    #[error("precondition failed at z = {witness}: {message}")]
    Precondition { witness: String, message: String },
    #[error("genus must be at least 1")]
    GenusZero,
}

/// Cut points `-1 = c0 < c1 < ... < ck = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    #[serde(with = "rational::text_vec")]
    cuts: Vec<Q>,
}

impl Partition {
    pub fn new(cuts: Vec<Q>) -> Result<Self, HoloError> {
        let ok = cuts.len() >= 2
            && cuts[0] == int(-1)
            && cuts[cuts.len() - 1] == int(1)
            && cuts.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Partition { cuts })
        } else {
            Err(HoloError::BadPartition)
        }
    }

    /// `k` blocks of equal length.
    pub fn equal(k: usize) -> Self {
        let k = k.max(1) as i64;
        Partition { cuts: (0..=k).map(|i| int(-1) + Q::new((2 * i).into(), k.into())).collect() }
    }

    pub fn thirds() -> Self {
        Partition::equal(3)
    }

    pub fn cuts(&self) -> &[Q] {
        &self.cuts
    }

    pub fn blocks(&self) -> usize {
        self.cuts.len() - 1
    }

    /// Block containing `z`, or `None` when `z` is a cut point.
    fn locate(&self, z: &Q) -> Option<usize> {
        let i = self.cuts.partition_point(|c| c < z);
        if i < self.cuts.len() && self.cuts[i] == *z {
            None
        } else {
            Some(i.saturating_sub(1).min(self.blocks() - 1))
        }
    }

    /// Largest block length as a fraction of the whole interval.
    fn max_fraction(&self) -> f64 {
        self.cuts
            .windows(2)
            .map(|w| rational::to_f64(&(&w[1] - &w[0])) / 2.0)
            .fold(0.0, f64::max)
    }

    /// `(a + b, b - a)` for block `i`.
    fn span(&self, i: usize) -> (Q, Q) {
        let (a, b) = (&self.cuts[i], &self.cuts[i + 1]);
        (a + b, b - a)
    }

    /// `(2z - a - b) / (b - a)`, reduced once.
    fn to_block(&self, i: usize, z: &Q) -> Q {
        let (s, w) = self.span(i);
        let num = (z.numer() * s.denom() * 2 - s.numer() * z.denom()) * w.denom();
        Q::new(num, z.denom() * s.denom() * w.numer())
    }

    /// `(t (b - a) + a + b) / 2`, reduced once.
    fn from_block(&self, i: usize, t: &Q) -> Q {
        let (s, w) = self.span(i);
        let num = t.numer() * w.numer() * s.denom() + s.numer() * t.denom() * w.denom();
        Q::new(num, t.denom() * w.denom() * s.denom() * 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoloMap {
    Pl(PlMap),
    Lazy(Arc<LazyMap>),
}

/// Generator tree of a lazily evaluated map.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LazyMap {
    /// The `q` with `q ∘ f = p ∘ q`, affine on the fundamental domain
    /// between `0` and `f(0)`.
    Conjugacy {
        f: PlMap,
        p: PlMap,
        #[serde(skip)]
        orbits: OrbitCache,
    },
    /// `maps[0] ∘ maps[1] ∘ ...`.
    Compose { maps: Vec<HoloMap> },
    Concat { partition: Partition, blocks: Vec<HoloMap> },
    /// Member `index` of a self-similar system, possibly inverted.
    SelfSimilar { system: Arc<System>, index: usize, inverted: bool },
}

impl LazyMap {
    pub fn conjugacy(f: PlMap, p: PlMap) -> LazyMap {
        LazyMap::Conjugacy { f, p, orbits: OrbitCache::default() }
    }
}

/// Prepared orbit data of a conjugacy, built on first evaluation. It is
/// derived from the maps, so comparisons and hashing ignore it.
#[derive(Clone, Default)]
pub struct OrbitCache(OnceLock<Arc<orbit::Conjugacy>>);

impl OrbitCache {
    fn get(&self, f: &PlMap, p: &PlMap) -> &orbit::Conjugacy {
        self.0.get_or_init(|| Arc::new(orbit::Conjugacy::new(f, p)))
    }
}

impl std::fmt::Debug for OrbitCache {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        out.write_str("OrbitCache")
    }
}

impl PartialEq for OrbitCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for OrbitCache {}

impl std::hash::Hash for OrbitCache {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

/// Maps defined by concatenations whose blocks may refer back to the
/// system's own members.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct System {
    pub equations: Vec<Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Equation {
    pub partition: Partition,
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Known(HoloMap),
    Member { index: usize, inverted: bool },
}

/// Result of a guaranteed-precision evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Q,
    /// Width of the final enclosure; at most `2ε` when `converged`.
    pub width: Q,
    pub converged: bool,
    /// Deepest self-similar recursion level visited.
    pub depth: usize,
    /// Fundamental-domain iterations performed.
    pub iterations: usize,
}

struct Ctx {
    tol: Q,
    depth: usize,
    iterations: usize,
    /// Bit length above which enclosure endpoints are rounded outward.
    max_bits: u64,
    grid_bits: u32,
}

impl Ctx {
    fn new(tol: &Q) -> Self {
        let grid_bits = (-rational::to_f64(tol).max(1e-300).log2()).ceil().max(0.0) as u32 + 24;
        Ctx { tol: tol.clone(), depth: 0, iterations: 0, max_bits: 4 * grid_bits as u64 + 256, grid_bits }
    }

    /// Outward rounding onto a dyadic grid once the fractions get large.
    fn tame(&self, lo: Q, hi: Q) -> (Q, Q) {
        let big = |x: &Q| x.numer().bits() + x.denom().bits() > self.max_bits;
        if !big(&lo) && !big(&hi) {
            return (lo, hi);
        }
        let scale = Q::from_integer(num_bigint::BigInt::one() << self.grid_bits);
        let lo = if big(&lo) { (lo * &scale).floor() / &scale } else { lo };
        let hi = if big(&hi) { (hi * &scale).ceil() / &scale } else { hi };
        (lo.max(int(-1)), hi.min(int(1)))
    }
}

impl HoloMap {
    pub fn identity() -> Self {
        HoloMap::Pl(PlMap::identity())
    }

    pub fn pl(m: PlMap) -> Self {
        HoloMap::Pl(m)
    }

    fn lazy(l: LazyMap) -> Self {
        HoloMap::Lazy(Arc::new(l))
    }

    pub fn as_pl(&self) -> Option<&PlMap> {
        match self {
            HoloMap::Pl(m) => Some(m),
            HoloMap::Lazy(_) => None,
        }
    }

    pub fn is_exact_identity(&self) -> bool {
        self.as_pl().is_some_and(PlMap::is_identity)
    }

    /// `self ∘ g`; exact when both are PL.
    pub fn compose(&self, g: &HoloMap) -> HoloMap {
        match (self, g) {
            (HoloMap::Pl(a), HoloMap::Pl(b)) => HoloMap::Pl(a.compose(b)),
            _ if self.is_exact_identity() => g.clone(),
            _ if g.is_exact_identity() => self.clone(),
            _ => {
                let mut maps = Vec::new();
                for m in [self, g] {
                    match m {
                        HoloMap::Lazy(l) => match l.as_ref() {
                            LazyMap::Compose { maps: inner } => maps.extend(inner.iter().cloned()),
                            _ => maps.push(m.clone()),
                        },
                        HoloMap::Pl(_) => maps.push(m.clone()),
                    }
                }
                HoloMap::lazy(LazyMap::Compose { maps })
            }
        }
    }

    pub fn compose_all<'a>(maps: impl IntoIterator<Item = &'a HoloMap>) -> HoloMap {
        maps.into_iter().fold(HoloMap::identity(), |acc, m| acc.compose(m))
    }

    pub fn invert(&self) -> HoloMap {
        match self {
            HoloMap::Pl(m) => HoloMap::Pl(m.inverse()),
            HoloMap::Lazy(l) => HoloMap::lazy(match l.as_ref() {
                LazyMap::Conjugacy { f, p, .. } => LazyMap::conjugacy(p.clone(), f.clone()),
                LazyMap::Compose { maps } => {
                    LazyMap::Compose { maps: maps.iter().rev().map(HoloMap::invert).collect() }
                }
                LazyMap::Concat { partition, blocks } => LazyMap::Concat {
                    partition: partition.clone(),
                    blocks: blocks.iter().map(HoloMap::invert).collect(),
                },
                LazyMap::SelfSimilar { system, index, inverted } => LazyMap::SelfSimilar {
                    system: system.clone(),
                    index: *index,
                    inverted: !inverted,
                },
            }),
        }
    }

    /// Enclosure of `self(z)` for a single rational `z`.
    fn enclose(&self, z: &Q, ctx: &mut Ctx) -> (Q, Q) {
        if *z <= int(-1) {
            return (int(-1), int(-1));
        }
        if *z >= int(1) {
            return (int(1), int(1));
        }
        match self {
            HoloMap::Pl(m) => {
                let y = m.eval(z);
                (y.clone(), y)
            }
            HoloMap::Lazy(l) => {
                let (lo, hi) = match l.as_ref() {
                    LazyMap::Conjugacy { f, p, orbits } => conjugacy_enclose(orbits.get(f, p), z, ctx),
                    LazyMap::Compose { maps } => {
                        let mut cur = (z.clone(), z.clone());
                        for m in maps.iter().rev() {
                            cur = m.enclose_interval(&cur.0, &cur.1, ctx);
                        }
                        cur
                    }
                    LazyMap::Concat { partition, blocks } => match partition.locate(z) {
                        None => (z.clone(), z.clone()),
                        Some(i) => {
                            let (a, b) = blocks[i].enclose(&partition.to_block(i, z), ctx);
                            (partition.from_block(i, &a), partition.from_block(i, &b))
                        }
                    },
                    LazyMap::SelfSimilar { system, index, inverted } => {
                        let budget = system.depth_budget(&ctx.tol);
                        system_enclose(system, *index, *inverted, z, budget, 0, ctx)
                    }
                };
                ctx.tame(lo, hi)
            }
        }
    }

    fn enclose_interval(&self, lo: &Q, hi: &Q, ctx: &mut Ctx) -> (Q, Q) {
        if lo == hi {
            self.enclose(lo, ctx)
        } else {
            (self.enclose(lo, ctx).0, self.enclose(hi, ctx).1)
        }
    }

    /// A rational within `eps` of `self(z)`, refining the enclosure until
    /// its width is at most `2 eps`.
    pub fn evaluate(&self, z: &Q, eps: &Q) -> Evaluation {
        let mut tol = eps.clone();
        let mut last = None;
        for _ in 0..24 {
            let mut ctx = Ctx::new(&tol);
            let (lo, hi) = self.enclose(z, &mut ctx);
            let width = &hi - &lo;
            let value = (&lo + &hi) / int(2);
            let converged = width <= eps * int(2);
            let ev = Evaluation { value, width, converged, depth: ctx.depth, iterations: ctx.iterations };
            if converged {
                return ev;
            }
            last = Some(ev);
            tol /= int(16);
        }
        last.expect("at least one attempt")
    }

    /// Exact value for PL maps, otherwise the midpoint of a `2 eps` enclosure.
    pub fn value(&self, z: &Q, eps: &Q) -> Q {
        match self {
            HoloMap::Pl(m) => m.eval(z),
            HoloMap::Lazy(_) => self.evaluate(z, eps).value,
        }
    }
}

/// `g ∘ h ∘ g⁻¹ ∘ h⁻¹`.
pub fn commutator(g: &HoloMap, h: &HoloMap) -> HoloMap {
    g.compose(h).compose(&g.invert()).compose(&h.invert())
}

pub fn concatenate(maps: &[HoloMap], partition: &Partition) -> Result<HoloMap, HoloError> {
    if maps.len() != partition.blocks() {
        return Err(HoloError::LengthMismatch { maps: maps.len(), blocks: partition.blocks() });
    }
    if maps.len() == 1 {
        return Ok(maps[0].clone());
    }
    if maps.iter().all(|m| m.as_pl().is_some()) {
        let mut pts = Vec::new();
        for (i, m) in maps.iter().enumerate() {
            let block = m.as_pl().expect("checked").scaled_points(&partition.cuts[i], &partition.cuts[i + 1]);
            let skip = usize::from(i > 0);
            pts.extend(block.into_iter().skip(skip));
        }
        return PlMap::new(pts).map(HoloMap::Pl);
    }
    Ok(HoloMap::lazy(LazyMap::Concat { partition: partition.clone(), blocks: maps.to_vec() }))
}

/// Evaluates the conjugacy `q` by moving `z` into the fundamental domain
/// between `0` and `f(0)`, counting steps `k` with `z = f^k(w)`, and
/// returning `p^k(q0(w))`. The ends of the enclosure come from orbits
/// rounded down and up.
fn conjugacy_enclose(orbits: &orbit::Conjugacy, z: &Q, ctx: &mut Ctx) -> (Q, Q) {
    let fx = orbit::Fixed { frac: u64::from(ctx.grid_bits) + 16 };
    let (lo, k) = orbits.bound(z, &ctx.tol, fx, Round::Down);
    let (hi, _) = orbits.bound(z, &ctx.tol, fx, Round::Up);
    ctx.iterations += usize::try_from(k).unwrap_or(usize::MAX);
    (lo, hi)
}

impl System {
    /// Recursion depth after which the innermost block is narrower than `tol`.
    fn depth_budget(&self, tol: &Q) -> usize {
        let rho = self
            .equations
            .iter()
            .filter(|e| e.partition.blocks() > 1)
            .map(|e| e.partition.max_fraction())
            .fold(0.0, f64::max)
            .clamp(1e-9, 0.999);
        let t = rational::to_f64(&tol.abs()).max(1e-300);
        ((2.0 / t).ln() / (1.0 / rho).ln()).ceil().max(0.0) as usize + 2
    }
}

fn system_enclose(
    sys: &System,
    index: usize,
    inverted: bool,
    z: &Q,
    budget: usize,
    level: usize,
    ctx: &mut Ctx,
) -> (Q, Q) {
    ctx.depth = ctx.depth.max(level);
    let eq = &sys.equations[index];
    let Some(i) = eq.partition.locate(z) else { return (z.clone(), z.clone()) };
    let t = eq.partition.to_block(i, z);
    let (a, b) = match &eq.blocks[i] {
        Block::Known(m) => {
            if inverted {
                m.invert().enclose(&t, ctx)
            } else {
                m.enclose(&t, ctx)
            }
        }
        Block::Member { index: j, inverted: inv } => {
            // A single-block equation only renames a member; it does not shrink.
            let next = level + usize::from(eq.partition.blocks() > 1);
            if next > budget {
                (int(-1), int(1))
            } else {
                system_enclose(sys, *j, inverted ^ inv, &t, budget, next, ctx)
            }
        }
    };
    (eq.partition.from_block(i, &a), eq.partition.from_block(i, &b))
}

impl System {
    pub fn member(self: &Arc<Self>, index: usize) -> HoloMap {
        HoloMap::lazy(LazyMap::SelfSimilar { system: self.clone(), index, inverted: false })
    }
}

/// Deterministic sample points: breakpoints of the PL inputs plus a
/// reproducible spread of dyadic rationals.
pub fn sample_points(seed: u64, count: usize) -> Vec<Q> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n: i64 = rng.gen_range(-(1i64 << 30) + 1..(1i64 << 30));
            Q::new(n.into(), (1i64 << 30).into())
        })
        .collect()
}

/// Largest `|a(z) - b(z)|` over the sample points, evaluated to `eps`.
pub fn residual(a: &HoloMap, b: &HoloMap, points: &[Q], eps: &Q) -> Q {
    points
        .iter()
        .map(|z| (a.value(z, eps) - b.value(z, eps)).abs())
        .max()
        .unwrap_or_else(rational::zero)
}
