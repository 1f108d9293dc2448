//! Witness constructions: conjugacies, commutators and self-similar
//! concatenations.

use std::sync::Arc;

use super::pl::{Drift, PlMap};
use super::rational::{self, int, q};
use super::{Block, Equation, HoloError, HoloMap, LazyMap, Partition, System};

fn drift_of(name: &str, m: &PlMap) -> Result<Drift, HoloError> {
    m.drift().map_err(|z| HoloError::Precondition {
        witness: rational::to_text(&z),
        message: format!("{name} has a fixed point or crosses the diagonal"),
    })
}

/// The lazy `q` with `q ∘ f = p ∘ q`. Both maps must lie strictly on the
/// same side of the diagonal on the open interval.
pub fn conjugacy_witness(f: &PlMap, p: &PlMap) -> Result<HoloMap, HoloError> {
    let (df, dp) = (drift_of("f", f)?, drift_of("p", p)?);
    if df != dp {
        let (name, m) = if df == Drift::Down { ("f", f) } else { ("p", p) };
        let z = int(0);
        return Err(HoloError::Precondition {
            message: format!(
                "{name}(z) = {} lies below z while the other map lies above",
                rational::to_text(&m.eval(&z))
            ),
            witness: rational::to_text(&z),
        });
    }
    Ok(HoloMap::lazy(LazyMap::conjugacy(f.clone(), p.clone())))
}

/// `(g, h)` with `g ∘ h ∘ g⁻¹ ∘ h⁻¹ = f`.
///
/// `h = s ∘ max(f⁻¹, id)` dominates the diagonal and so does `f ∘ h`; the
/// conjugacy `q` from `f ∘ h` to `h` gives `q⁻¹ ∘ h ∘ q = f ∘ h`, hence
/// `g = q⁻¹`.
pub fn commutator_factorization(f: &PlMap) -> (HoloMap, HoloMap) {
    if f.is_identity() {
        return (HoloMap::identity(), HoloMap::identity());
    }
    let s = PlMap::through(int(0), q(1, 2)).expect("valid push");
    let h = s.compose(&f.inverse().max(&PlMap::identity()));
    let fh = f.compose(&h);
    let conj = conjugacy_witness(&fh, &h).expect("f ∘ h and h both lie above the diagonal");
    (conj.invert(), HoloMap::Pl(h))
}

/// `genus` commutator pairs whose product is `f`; all but the first are
/// identity pairs.
pub fn genus_factorization(f: &PlMap, genus: usize) -> Result<Vec<(HoloMap, HoloMap)>, HoloError> {
    if genus == 0 {
        return Err(HoloError::GenusZero);
    }
    let mut out = vec![commutator_factorization(f)];
    out.resize(genus, (HoloMap::identity(), HoloMap::identity()));
    Ok(out)
}

fn is_trivial(m: &Option<HoloMap>) -> bool {
    m.as_ref().map_or(true, HoloMap::is_exact_identity)
}

/// Blocks `[left, member, right]` with absent outer blocks dropped, over
/// equal subintervals.
fn equation(left: &Option<HoloMap>, member: Block, right: &Option<HoloMap>) -> Equation {
    let mut blocks = Vec::new();
    if let Some(m) = left {
        blocks.push(Block::Known(m.clone()));
    }
    blocks.push(member);
    if let Some(m) = right {
        blocks.push(Block::Known(m.clone()));
    }
    Equation { partition: Partition::equal(blocks.len()), blocks }
}

/// The map `g` equal to the concatenation of `f`, `g`, `h` over the thirds
/// partition. Absent blocks are omitted; with both absent `g = id`.
pub fn solve_concatenation_i(f: Option<HoloMap>, h: Option<HoloMap>) -> HoloMap {
    if (f.is_none() && h.is_none()) || (is_trivial(&f) && is_trivial(&h)) {
        return HoloMap::identity();
    }
    let eq = equation(&f, Block::Member { index: 0, inverted: false }, &h);
    Arc::new(System { equations: vec![eq] }).member(0)
}

/// The pair `(g, μ)` with `μ` the concatenation of `f`, `g⁻¹`, `h` and `g`
/// the concatenation of `σ`, `μ⁻¹`, `τ`.
pub fn solve_concatenation_ii(
    f: Option<HoloMap>,
    h: Option<HoloMap>,
    sigma: Option<HoloMap>,
    tau: Option<HoloMap>,
) -> (HoloMap, HoloMap) {
    let mu_bare = f.is_none() && h.is_none();
    let g_bare = sigma.is_none() && tau.is_none();
    let all_trivial = [&f, &h, &sigma, &tau].iter().all(|m| is_trivial(m));
    if all_trivial || (mu_bare && g_bare) {
        return (HoloMap::identity(), HoloMap::identity());
    }
    let g_eq = equation(&sigma, Block::Member { index: 1, inverted: true }, &tau);
    let mu_eq = equation(&f, Block::Member { index: 0, inverted: true }, &h);
    let sys = Arc::new(System { equations: vec![g_eq, mu_eq] });
    (sys.member(0), sys.member(1))
}
