//! Certificate documents and their checker.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::complex::{Assertion, EdgeId, SectorId};
use crate::holonomy::rational::{self, int, Q};
use crate::holonomy::{commutator, concatenate, residual, sample_points, HoloMap, Partition, PlMap};
use crate::io::parse;

use super::annulus::{restore, AnnulusLamination, CutRecord};
use super::collar::{covers_all_fibers, BoundaryTrainTrack, CollarComplex, CollarLamination, CollarPiece};
use super::pipeline::build_lamination_certificate;
use super::LamError;

pub const CERTIFICATE_FORMAT: u32 = 1;
pub const VERDICT: &str = "fully-carried lamination certificate, conditional on ledger";

/// A holonomy map together with the relation it must satisfy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "relation")]
pub enum Witness {
    /// `[a1, b1] ∘ ... ∘ [ag, bg] = target`.
    Commutators { target: PlMap, pairs: Vec<(HoloMap, HoloMap)> },
    /// `g` equals the concatenation of the present maps among `f, g, h`.
    ConcatI { f: Option<HoloMap>, h: Option<HoloMap>, g: HoloMap },
    /// `mu` is the concatenation of `f, g⁻¹, h` and `g` that of `sigma, mu⁻¹, tau`.
    ConcatII {
        f: Option<HoloMap>,
        h: Option<HoloMap>,
        sigma: Option<HoloMap>,
        tau: Option<HoloMap>,
        g: HoloMap,
        mu: HoloMap,
    },
}

fn concat_present(parts: [Option<&HoloMap>; 3]) -> Result<HoloMap, LamError> {
    let maps: Vec<HoloMap> = parts.into_iter().flatten().cloned().collect();
    Ok(concatenate(&maps, &Partition::equal(maps.len()))?)
}

impl Witness {
    /// Largest residual of the defining relations over `points`.
    pub fn residual(&self, points: &[Q], eps: &Q) -> Result<Q, LamError> {
        Ok(match self {
            Witness::Commutators { target, pairs } => {
                let product =
                    pairs.iter().fold(HoloMap::identity(), |acc, (a, b)| acc.compose(&commutator(a, b)));
                residual(&product, &HoloMap::pl(target.clone()), points, eps)
            }
            Witness::ConcatI { f, h, g } => {
                let rhs = concat_present([f.as_ref(), Some(g), h.as_ref()])?;
                residual(g, &rhs, points, eps)
            }
            Witness::ConcatII { f, h, sigma, tau, g, mu } => {
                let (gi, mi) = (g.invert(), mu.invert());
                let mu_rhs = concat_present([f.as_ref(), Some(&gi), h.as_ref()])?;
                let g_rhs = concat_present([sigma.as_ref(), Some(&mi), tau.as_ref()])?;
                residual(mu, &mu_rhs, points, eps).max(residual(g, &g_rhs, points, eps))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleCase {
    #[serde(rename = "1a")]
    C1a,
    #[serde(rename = "1b")]
    C1b,
    #[serde(rename = "1c")]
    C1c,
    #[serde(rename = "2a")]
    C2a,
    #[serde(rename = "2b")]
    C2b,
}

impl CycleCase {
    pub fn tag(self) -> &'static str {
        match self {
            CycleCase::C1a => "1a",
            CycleCase::C1b => "1b",
            CycleCase::C1c => "1c",
            CycleCase::C2a => "2a",
            CycleCase::C2b => "2b",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NondiskCase {
    /// No boundary: nothing to match.
    Closed,
    /// Genus zero with several boundary circles: bands carry the product.
    Planar,
    /// Positive genus: the boundary holonomy is a product of commutators.
    Genus,
    /// Twisted I-bundle over a one-sided piece.
    NonOrientable,
}

/// Symbolic data of a branched annulus around a cycle core: the tail
/// sectors entering above and below, the limiting leaves `H_i`, `L_i` and
/// the return maps on the two boundary circles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleData {
    pub tails_above: Vec<SectorId>,
    pub tails_below: Vec<SectorId>,
    #[serde(with = "rational::text")]
    pub h: Q,
    #[serde(with = "rational::text")]
    pub l: Q,
    pub boundary: Vec<PlMap>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "step")]
pub enum Step {
    Collar {
        pieces: Vec<CollarPiece>,
        lamination: CollarLamination,
        tracks: Vec<BoundaryTrainTrack>,
    },
    ChainReglue {
        disk: SectorId,
        out_edge: EdgeId,
        target: SectorId,
        track: BoundaryTrainTrack,
        before: AnnulusLamination,
        after: AnnulusLamination,
        cut: CutRecord,
    },
    ProductExtend {
        disk: SectorId,
    },
    NondiskExtend {
        sector: SectorId,
        case: NondiskCase,
        boundary: PlMap,
        witnesses: Vec<Witness>,
    },
    CycleExtend {
        cycle: Vec<SectorId>,
        data: CycleData,
        case: Option<CycleCase>,
        witnesses: Vec<Witness>,
    },
    MobiusExtend {
        cycle: Vec<SectorId>,
        data: CycleData,
        witnesses: Vec<Witness>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepNode {
    pub step: Step,
    pub children: Vec<StepNode>,
}

impl StepNode {
    pub fn leaf(step: Step) -> Self {
        StepNode { step, children: Vec::new() }
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&Step> {
        let mut out = vec![&self.step];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionLedger {
    pub flags: Vec<(String, Assertion)>,
    /// Non-disk sectors whose essential curve is consumed as an assertion.
    pub essential_sectors: Vec<SectorId>,
    pub collapsed_bubbles: Vec<(SectorId, SectorId)>,
    /// Structural facts consumed without being checked.
    pub guarantees: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaminationCertificate {
    pub format: u32,
    /// The input complex in the text format.
    pub complex: String,
    #[serde(with = "rational::text")]
    pub epsilon: Q,
    pub ledger: AssumptionLedger,
    pub root: StepNode,
    pub verdict: String,
}

impl LaminationCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LamError> {
        serde_json::from_str(text).map_err(|e| LamError::Rejected(format!("unreadable certificate: {e}")))
    }

    pub fn steps(&self) -> Vec<&Step> {
        self.root.walk()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub steps: usize,
    pub witnesses: usize,
    /// Largest relation residual seen.
    pub max_residual: Q,
}

fn reject(msg: impl Into<String>) -> LamError {
    LamError::Rejected(msg.into())
}

/// Local checks that need nothing but the step itself.
fn check_step(
    step: &Step,
    collar: &mut Option<CollarComplex>,
    processed: &mut BTreeSet<SectorId>,
    points: &[Q],
    eps: &Q,
    report: &mut CheckReport,
) -> Result<(), LamError> {
    let tol = eps * int(4);
    let mut verify = |ws: &[Witness]| -> Result<(), LamError> {
        for w in ws {
            let r = w.residual(points, eps)?;
            if r > tol {
                return Err(reject(format!("witness residual {} exceeds tolerance", rational::to_text(&r))));
            }
            report.witnesses += 1;
            report.max_residual = report.max_residual.clone().max(r);
        }
        Ok(())
    };
    match step {
        Step::Collar { pieces, lamination, tracks } => {
            let c = CollarComplex {
                pieces: pieces.clone(),
                locus_arcs: pieces.iter().map(|p| p.edge).collect(),
                components: Vec::new(),
            };
            if !covers_all_fibers(&c, lamination) {
                return Err(reject("collar lamination misses a fiber"));
            }
            if tracks.iter().any(|t| t.tails.iter().any(|x| x.position >= t.circle_len)) {
                return Err(reject("track tail outside its circle"));
            }
            *collar = Some(c);
        }
        Step::ChainReglue { disk, out_edge, target, track, before, after, cut } => {
            let c = collar.as_ref().ok_or_else(|| reject("reglue before collar"))?;
            let piece = c.pieces.iter().find(|p| p.edge == *out_edge);
            let leads = piece.is_some_and(|p| p.sink == *target && (p.through == *disk || p.merge == *disk));
            if !leads {
                return Err(reject(format!("{out_edge} does not lead from {disk} to {target}")));
            }
            if track.disk != *disk || track.check_puncture().is_err() || cut.position != track.puncture {
                return Err(reject(format!("puncture of {disk} is not a single-point fiber")));
            }
            if processed.contains(target) || !processed.insert(*disk) {
                return Err(reject(format!("step at {disk} touches an earlier track")));
            }
            if !after.all_circles() || after.fiber_set != before.fiber_set {
                return Err(reject(format!("reglue at {disk} does not close every leaf")));
            }
            if !before.annotations_consistent() || !after.annotations_consistent() {
                return Err(reject(format!("spiral annotations at {disk} are inconsistent")));
            }
            if restore(after, cut)? != *before {
                return Err(reject(format!("cut record at {disk} does not restore the input")));
            }
        }
        Step::ProductExtend { disk } => {
            if !processed.contains(disk) {
                return Err(reject(format!("product extension over {disk} before its boundary closed up")));
            }
        }
        Step::NondiskExtend { case, boundary, witnesses, .. } => {
            if *case == NondiskCase::Closed && !boundary.is_identity() {
                return Err(reject("closed sector with nontrivial boundary"));
            }
            verify(witnesses)?;
        }
        Step::CycleExtend { data, witnesses, .. } | Step::MobiusExtend { data, witnesses, .. } => {
            for r in &data.boundary {
                if r.eval(&data.h) != data.h || r.eval(&data.l) != data.l || data.h == data.l {
                    return Err(reject("limiting leaves are not fixed"));
                }
            }
            verify(witnesses)?;
        }
    }
    report.steps += 1;
    Ok(())
}

/// Re-derives the whole certificate from its complex and compares it
/// field by field, then re-checks every step on its own: closed leaves and
/// round trips for reglue steps, chain order, and every holonomy relation
/// at `samples` deterministic points.
pub fn check_certificate(cert: &LaminationCertificate, samples: usize) -> Result<CheckReport, LamError> {
    let b = parse(&cert.complex).map_err(|e| reject(format!("embedded complex: {e}")))?;
    let rebuilt = build_lamination_certificate(&b, &cert.epsilon)
        .map_err(|e| reject(format!("rebuilding failed: {e}")))?;
    if rebuilt.format != cert.format || rebuilt.verdict != cert.verdict {
        return Err(reject("header differs"));
    }
    if rebuilt.ledger != cert.ledger {
        return Err(reject("assumption ledger differs"));
    }
    let (mine, theirs) = (rebuilt.steps(), cert.steps());
    if mine.len() != theirs.len() {
        return Err(reject(format!("expected {} steps, found {}", mine.len(), theirs.len())));
    }
    for (i, (a, b)) in mine.iter().zip(&theirs).enumerate() {
        if a != b {
            return Err(reject(format!("step {i} differs from the re-derived step")));
        }
    }
    if rebuilt.root != cert.root {
        return Err(reject("step tree shape differs"));
    }
    let mut points = sample_points(0x1a31, samples);
    points.push(int(0));
    let mut report = CheckReport { steps: 0, witnesses: 0, max_residual: rational::zero() };
    let (mut collar, mut processed) = (None, BTreeSet::new());
    for step in theirs {
        check_step(step, &mut collar, &mut processed, &points, &cert.epsilon, &mut report)?;
    }
    Ok(report)
}

fn leaf_paths(v: &Value, path: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                path.push(Value::String(k.clone()));
                leaf_paths(x, path, out);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                path.push(Value::from(i));
                leaf_paths(x, path, out);
                path.pop();
            }
        }
        Value::Null => {}
        _ => out.push(path.clone()),
    }
}

fn mutate_leaf(v: &Value, rng: &mut ChaCha8Rng) -> Value {
    match v {
        Value::Bool(b) => Value::Bool(!b),
        Value::Number(n) => match n.as_u64() {
            Some(x) => Value::from(x + rng.gen_range(1..4)),
            None => Value::from(n.as_f64().unwrap_or(0.0) + 1.0),
        },
        Value::String(s) => {
            if let Ok(x) = rational::from_text(s) {
                let d = Q::new(rng.gen_range(1..50i64).into(), rng.gen_range(51..200i64).into());
                return Value::String(rational::to_text(&(x + d)));
            }
            let digits = s.trim_start_matches(|c: char| c.is_ascii_alphabetic());
            if let (Some(p), Ok(n)) = (s.chars().next(), digits.parse::<u64>()) {
                if p.is_ascii_alphabetic() && digits.len() + 1 == s.len() {
                    return Value::String(format!("{p}{}", n + rng.gen_range(1..4)));
                }
            }
            Value::String(format!("{s}~"))
        }
        other => other.clone(),
    }
}

/// Changes one randomly chosen datum inside the step tree of a serialized
/// certificate. Returns the mutated document and the path that changed.
pub fn mutate_step_field(cert_json: &str, seed: u64) -> Option<(String, String)> {
    let mut doc: Value = serde_json::from_str(cert_json).ok()?;
    let mut leaves = Vec::new();
    leaf_paths(doc.get("root")?, &mut vec![Value::String("root".into())], &mut leaves);
    if leaves.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = &leaves[rng.gen_range(0..leaves.len())];
    let mut cur = &mut doc;
    for key in path {
        cur = match key {
            Value::String(k) => cur.get_mut(k.as_str())?,
            Value::Number(i) => cur.get_mut(i.as_u64()? as usize)?,
            _ => return None,
        };
    }
    let new = mutate_leaf(cur, &mut rng);
    if new == *cur {
        return None;
    }
    *cur = new;
    let shown: Vec<String> = path.iter().map(|k| k.to_string().trim_matches('"').to_string()).collect();
    Some((serde_json::to_string_pretty(&doc).ok()?, shown.join(".")))
}
