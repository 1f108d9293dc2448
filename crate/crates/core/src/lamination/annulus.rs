//! One-dimensional laminations on the vertical annulus `∂D × I` of a disk
//! branch, kept as a finite fiber description plus a PL return map.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::holonomy::rational::{self, int, Q};
use crate::holonomy::{Drift, PlMap};

use super::collar::{AttachmentPattern, BoundaryTrainTrack, SwitchDirection, Tail};
use super::LamError;

/// A closed piece of the fiber set: an isolated leaf or a labelled Cantor
/// block spanning `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberPiece {
    Point(#[serde(with = "rational::text")] Q),
    Cantor {
        #[serde(with = "rational::text")]
        lo: Q,
        #[serde(with = "rational::text")]
        hi: Q,
        label: String,
    },
}

impl FiberPiece {
    fn span(&self) -> (&Q, &Q) {
        match self {
            FiberPiece::Point(x) => (x, x),
            FiberPiece::Cantor { lo, hi, .. } => (lo, hi),
        }
    }
}

/// Leaves in the open interval `(lo, hi)` of a Cantor block spiral toward
/// `limit`, one of the two fixed endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpiralAnnotation {
    #[serde(with = "rational::text")]
    pub lo: Q,
    #[serde(with = "rational::text")]
    pub hi: Q,
    pub direction: Drift,
    #[serde(with = "rational::text")]
    pub limit: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnulusLamination {
    pub fiber_set: Vec<FiberPiece>,
    pub return_map: PlMap,
    pub spirals: Vec<SpiralAnnotation>,
}

/// The regluing map applied along `{p} × I`; undoing it restores the input.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutRecord {
    pub position: usize,
    pub map: PlMap,
}

/// Maximal open intervals on which `r` has no fixed point, with the side of
/// the diagonal.
pub fn moving_intervals(r: &PlMap) -> Vec<(Q, Q, Drift)> {
    let pts = r.points();
    let d = |i: usize| &pts[i].y - &pts[i].x;
    // Fixed points: every breakpoint on the diagonal plus sign changes.
    let mut fixed: Vec<(Q, bool)> = Vec::new(); // (point, segment to the right is fixed)
    for i in 0..pts.len() {
        let di = d(i);
        if di.is_zero() {
            let right_fixed = i + 1 < pts.len() && d(i + 1).is_zero();
            fixed.push((pts[i].x.clone(), right_fixed));
        }
        if i + 1 < pts.len() {
            let dj = d(i + 1);
            if (di < int(0) && dj > int(0)) || (di > int(0) && dj < int(0)) {
                let t = &di / (&di - &dj);
                fixed.push((&pts[i].x + t * (&pts[i + 1].x - &pts[i].x), false));
            }
        }
    }
    fixed.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::new();
    for w in fixed.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.1 || a.0 == b.0 {
            continue;
        }
        let mid = (&a.0 + &b.0) / int(2);
        let dir = if r.eval(&mid) > mid { Drift::Up } else { Drift::Down };
        out.push((a.0.clone(), b.0.clone(), dir));
    }
    out
}

impl AnnulusLamination {
    /// Checks that pieces are ordered, disjoint and inside `I`, and that the
    /// return map fixes every isolated leaf and every block endpoint.
    pub fn new(fiber_set: Vec<FiberPiece>, return_map: PlMap) -> Result<Self, LamError> {
        let mut last: Option<Q> = None;
        for p in &fiber_set {
            let (lo, hi) = p.span();
            let inside = *lo >= int(-1) && *hi <= int(1) && lo <= hi;
            let after = last.as_ref().map_or(true, |l| lo > l);
            if !inside || !after {
                return Err(LamError::BadFiberSet(format!("piece at {} is out of order", rational::to_text(lo))));
            }
            if matches!(p, FiberPiece::Cantor { .. }) && lo == hi {
                return Err(LamError::BadFiberSet("empty Cantor block".into()));
            }
            for x in [lo, hi] {
                if return_map.eval(x) != *x {
                    return Err(LamError::BadFiberSet(format!(
                        "return map moves the fiber-set endpoint {}",
                        rational::to_text(x)
                    )));
                }
            }
            last = Some(hi.clone());
        }
        let spirals = spirals_of(&fiber_set, &return_map);
        Ok(AnnulusLamination { fiber_set, return_map, spirals })
    }

    pub fn all_circles(&self) -> bool {
        self.fiber_set.iter().all(|p| match p {
            FiberPiece::Point(x) => self.return_map.eval(x) == *x,
            FiberPiece::Cantor { lo, hi, .. } => {
                moving_intervals(&self.return_map).iter().all(|(a, b, _)| b <= lo || a >= hi)
            }
        })
    }

    /// Every annotation limits on a fixed point of the return map, and the
    /// annotations are exactly those recomputed from the map.
    pub fn annotations_consistent(&self) -> bool {
        self.spirals.iter().all(|s| self.return_map.eval(&s.limit) == s.limit)
            && self.spirals == spirals_of(&self.fiber_set, &self.return_map)
    }
}

fn spirals_of(fiber_set: &[FiberPiece], r: &PlMap) -> Vec<SpiralAnnotation> {
    let moving = moving_intervals(r);
    let mut out = Vec::new();
    for p in fiber_set {
        let FiberPiece::Cantor { lo, hi, .. } = p else { continue };
        for (a, b, dir) in &moving {
            if a >= lo && b <= hi {
                let limit = if *dir == Drift::Up { b.clone() } else { a.clone() };
                out.push(SpiralAnnotation { lo: a.clone(), hi: b.clone(), direction: *dir, limit });
            }
        }
    }
    out
}

/// Cuts along the fiber over the puncture and reglues so every leaf closes
/// up. The regluing map is the inverse of the old return map.
pub fn reglue_to_circles(
    mu: &AnnulusLamination,
    track: &BoundaryTrainTrack,
) -> Result<(AnnulusLamination, CutRecord), LamError> {
    track.check_puncture()?;
    let map = mu.return_map.inverse();
    let glued = AnnulusLamination::new(mu.fiber_set.clone(), map.compose(&mu.return_map))?;
    Ok((glued, CutRecord { position: track.puncture, map }))
}

/// Undoes a regluing: applies the inverse of the recorded map.
pub fn restore(mu: &AnnulusLamination, cut: &CutRecord) -> Result<AnnulusLamination, LamError> {
    AnnulusLamination::new(mu.fiber_set.clone(), cut.map.inverse().compose(&mu.return_map))
}

fn dyadic(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q) -> Q {
    let t = Q::new(rng.gen_range(1..256i64).into(), 256.into());
    lo + (hi - lo) * t
}

/// Random PL homeomorphism of `[a, b]` given as interior graph vertices.
fn random_block(rng: &mut ChaCha8Rng, a: &Q, b: &Q, out: &mut Vec<(Q, Q)>) {
    let n = rng.gen_range(0..3);
    let (mut px, mut py) = (a.clone(), a.clone());
    for i in 0..n {
        let remaining = (n - i) as i64;
        let xhi = &px + (b - &px) / int(remaining + 1) * int(2);
        let x = dyadic(rng, &px, &xhi.min(b.clone()));
        let y = dyadic(rng, &py, b);
        out.push((x.clone(), y.clone()));
        px = x;
        py = y;
    }
    out.push((b.clone(), b.clone()));
}

/// A random valid lamination and a track it is carried by.
pub fn random_annulus_lamination(seed: u64) -> (AnnulusLamination, BoundaryTrainTrack) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..6);
    let mut cuts: Vec<Q> = (0..2 * count).map(|_| dyadic(&mut rng, &int(-1), &int(1))).collect();
    cuts.sort();
    cuts.dedup();
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < cuts.len() {
        if i + 1 < cuts.len() && rng.gen_bool(0.7) {
            pieces.push(FiberPiece::Cantor {
                lo: cuts[i].clone(),
                hi: cuts[i + 1].clone(),
                label: format!("b{}", pieces.len()),
            });
            i += 2;
        } else {
            pieces.push(FiberPiece::Point(cuts[i].clone()));
            i += 1;
        }
    }
    let mut knots = vec![int(-1)];
    for p in &pieces {
        let (lo, hi) = p.span();
        knots.push(lo.clone());
        if hi != lo {
            knots.push(hi.clone());
        }
    }
    knots.push(int(1));
    knots.dedup();
    let mut pts = vec![(int(-1), int(-1))];
    for w in knots.windows(2) {
        random_block(&mut rng, &w[0], &w[1], &mut pts);
    }
    let r = PlMap::new(pts).expect("increasing by construction");
    let mu = AnnulusLamination::new(pieces, r).expect("endpoints fixed by construction");

    let circle_len = rng.gen_range(1..7usize);
    let puncture = rng.gen_range(0..circle_len);
    let mut tails = Vec::new();
    for position in (0..circle_len).filter(|p| *p != puncture) {
        if rng.gen_bool(0.5) {
            let pattern = [AttachmentPattern::Above, AttachmentPattern::Below, AttachmentPattern::Straddle]
                [rng.gen_range(0..3)];
            let direction = if rng.gen_bool(0.5) { SwitchDirection::Forward } else { SwitchDirection::Backward };
            tails.push(Tail { position, pattern, direction });
        }
    }
    let track = BoundaryTrainTrack { disk: crate::complex::SectorId(0), circle_len, tails, puncture };
    (mu, track)
}
