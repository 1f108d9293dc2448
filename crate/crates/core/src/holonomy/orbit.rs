//! Long orbits of one-sided PL maps.
//!
//! Inside one affine piece `A(w) = a w + b` the orbit has the closed form
//! `c + a^n (w - c)` with `c` the fixed point of the line, so an orbit of
//! millions of steps costs a handful of powerings. Orbit points are fixed
//! point integers `X` standing for `X · 2^-frac`, rounded in one direction
//! throughout; since the maps are increasing, a chain rounded down stays
//! below the exact orbit and a chain rounded up stays above it.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::pl::PlMap;
use super::rational::{self, int, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Round {
    Down,
    Up,
}

impl Round {
    fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// `n / d` for `d > 0`, rounded in direction `dir`.
fn div_round(n: &BigInt, d: &BigInt, dir: Round) -> BigInt {
    match dir {
        Round::Down => n.div_floor(d),
        Round::Up => -(-n).div_floor(d),
    }
}

/// `m >> k` rounded in direction `dir`.
fn shr_round(m: &BigInt, k: u64, dir: Round) -> BigInt {
    match dir {
        Round::Down => m >> k,
        Round::Up => -((-m) >> k),
    }
}

/// Natural log of `|n|` for nonzero `n`, without overflowing `f64`.
fn ln_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::MAX).ln();
    }
    let shift = bits - 64;
    (n.abs() >> shift).to_f64().unwrap_or(f64::MAX).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Fixed-point precision: `X` stands for `X · 2^-frac`.
#[derive(Clone, Copy, Debug)]
pub(super) struct Fixed {
    pub frac: u64,
}

impl Fixed {
    pub fn from_q(self, x: &Q, dir: Round) -> BigInt {
        div_round(&(x.numer() << self.frac), x.denom(), dir)
    }

    pub fn to_q(self, x: &BigInt) -> Q {
        // Already in lowest terms once the common twos are gone.
        let tz = x.trailing_zeros().unwrap_or(self.frac).min(self.frac);
        Q::new_raw(x >> tz, BigInt::one() << (self.frac - tz))
    }

    fn cmp_q(self, x: &BigInt, t: &Q) -> Ordering {
        (x * t.denom()).cmp(&(t.numer() << self.frac))
    }
}

/// An affine piece `w ↦ a w + b` on `[x0, x1]` that moves points up.
#[derive(Debug)]
struct Piece {
    x1: Q,
    b: Q,
    /// `(a_num, a_den)` with `a_den > 0`.
    a: (BigInt, BigInt),
    /// Integer form of the step: `Y = (ka X + kb 2^frac) / kd`.
    ka: BigInt,
    kb: BigInt,
    kd: BigInt,
    /// Fixed point of the line, absent for translations.
    c: Option<Q>,
    ln_a: f64,
}

impl Piece {
    fn new(p0: (&Q, &Q), p1: (&Q, &Q)) -> Piece {
        let a = (p1.1 - p0.1) / (p1.0 - p0.0);
        let b = p0.1 - &a * p0.0;
        let (an, ad) = (a.numer().clone(), a.denom().clone());
        let (bn, bd) = (b.numer().clone(), b.denom().clone());
        let c = (!a.is_one()).then(|| &b / (int(1) - &a));
        let d = &a - int(1);
        let ln_a = if d.abs() < rational::q(1, 2) {
            rational::to_f64(&d).ln_1p()
        } else {
            ln_int(&an) - ln_int(&ad)
        };
        Piece { x1: p1.0.clone(), ka: &an * &bd, kb: &bn * &ad, kd: &ad * &bd, a: (an, ad), b, c, ln_a }
    }

    fn step(&self, x: &BigInt, fx: Fixed, dir: Round) -> BigInt {
        div_round(&(&self.ka * x + (&self.kb << fx.frac)), &self.kd, dir)
    }

    /// Estimated least `n` with `A^n(w) >= exit`; `u64::MAX` if never.
    fn steps_to(&self, x: &BigInt, exit: &Q, fx: Fixed) -> u64 {
        // ln |exit - c| and ln |w - c| from integer numerators, with signs.
        let gap = |c: &Q| {
            let to_exit = exit.numer() * c.denom() - c.numer() * exit.denom();
            let from = x * c.denom() - (c.numer() << fx.frac);
            let ln_to = ln_int(&to_exit) - ln_int(&(exit.denom() * c.denom()));
            let ln_from = ln_int(&from) - ln_int(c.denom()) - fx.frac as f64 * std::f64::consts::LN_2;
            (to_exit, from, ln_to, ln_from)
        };
        let n = match &self.c {
            None => {
                let (to_exit, from, _, _) = gap(&int(0));
                let num = (to_exit << fx.frac) - from * exit.denom();
                if !num.is_positive() {
                    return 1;
                }
                let ln_gap = ln_int(&num) - ln_int(exit.denom()) - fx.frac as f64 * std::f64::consts::LN_2;
                (ln_gap - (ln_int(self.b.numer()) - ln_int(self.b.denom()))).exp()
            }
            Some(c) => {
                let (to_exit, from, ln_to, ln_from) = gap(c);
                if to_exit.is_zero() || from.is_zero() || to_exit.is_positive() != from.is_positive() {
                    return u64::MAX;
                }
                (ln_to - ln_from) / self.ln_a
            }
        };
        if n.is_nan() {
            return 1;
        }
        n.ceil().clamp(1.0, u64::MAX as f64) as u64
    }

    /// `a^n` as `m · 2^e` with `m` kept near `bits` bits, rounded toward
    /// `dir` after every product.
    fn pow(&self, mut n: u64, bits: u64, dir: Round) -> (BigInt, i64) {
        let norm = |m: BigInt, e: i64| {
            let extra = m.bits().saturating_sub(bits);
            if extra == 0 {
                (m, e)
            } else {
                (shr_round(&m, extra, dir), e + extra as i64)
            }
        };
        let (an, ad) = &self.a;
        let s = bits as i64 + ad.bits() as i64 - an.bits() as i64;
        let mut base = if s >= 0 {
            (div_round(&(an << s as u64), ad, dir), -s)
        } else {
            (div_round(an, &(ad << s.unsigned_abs()), dir), -s)
        };
        let mut acc = (BigInt::one(), 0i64);
        while n > 0 {
            if n & 1 == 1 {
                acc = norm(&acc.0 * &base.0, acc.1 + base.1);
            }
            n >>= 1;
            if n > 0 {
                base = norm(&base.0 * &base.0, 2 * base.1);
            }
        }
        acc
    }

    /// `A^n(w)` rounded in direction `dir`.
    fn jump(&self, x: &BigInt, n: u64, fx: Fixed, dir: Round) -> BigInt {
        let Some(c) = &self.c else {
            let (bn, bd) = (self.b.numer(), self.b.denom());
            return div_round(&(x * bd + ((bn * BigInt::from(n)) << fx.frac)), bd, dir);
        };
        let (cn, cd) = (c.numer(), c.denom());
        let d = x * cd - (cn << fx.frac);
        let (m, e) = self.pow(n, fx.frac + 16, if d.is_positive() { dir } else { dir.flip() });
        if e >= 0 {
            div_round(&((cn << fx.frac) + ((m * d) << e as u64)), cd, dir)
        } else {
            let s = e.unsigned_abs();
            div_round(&((cn << (fx.frac + s)) + m * d), &(cd << s), dir)
        }
    }
}

/// A map that moves every interior point the same way, stored as an
/// upward map (negated when the original moves points down).
#[derive(Debug)]
pub(super) struct Prepared {
    negate: bool,
    xs: Vec<Q>,
    pieces: Vec<Piece>,
}

impl Prepared {
    pub fn new(m: &PlMap) -> Prepared {
        let negate = m.eval(&int(0)) < int(0);
        let pts: Vec<(Q, Q)> = if negate {
            m.points().iter().rev().map(|p| (-&p.x, -&p.y)).collect()
        } else {
            m.points().iter().map(|p| (p.x.clone(), p.y.clone())).collect()
        };
        let pieces = pts.windows(2).map(|w| Piece::new((&w[0].0, &w[0].1), (&w[1].0, &w[1].1))).collect();
        Prepared { negate, xs: pts.into_iter().map(|(x, _)| x).collect(), pieces }
    }
}

/// End of an orbit segment.
pub(super) struct Orbit {
    pub end: BigInt,
    pub steps: u64,
    /// Whether the walk stopped at the target rather than at the limit.
    pub reached: bool,
}

/// Iterates `m` from the interior point `x` until the orbit reaches
/// `target` (at or beyond it in the direction `m` moves points) or
/// `limit` steps are taken.
pub(super) fn walk(m: &Prepared, x: BigInt, target: &Q, limit: u64, fx: Fixed, dir: Round) -> Orbit {
    if m.negate {
        let o = walk_up(m, -x, &-target, limit, fx, dir.flip());
        Orbit { end: -o.end, ..o }
    } else {
        walk_up(m, x, target, limit, fx, dir)
    }
}

fn walk_up(m: &Prepared, mut x: BigInt, target: &Q, limit: u64, fx: Fixed, dir: Round) -> Orbit {
    let one = BigInt::one() << fx.frac;
    let mut steps = 0;
    loop {
        if fx.cmp_q(&x, target) != Ordering::Less || x >= one {
            return Orbit { end: x, steps, reached: true };
        }
        if steps == limit {
            return Orbit { end: x, steps, reached: false };
        }
        let j = m.xs.partition_point(|t| fx.cmp_q(&x, t) != Ordering::Less).max(1) - 1;
        let piece = &m.pieces[j.min(m.pieces.len() - 1)];
        let exit = if *target < piece.x1 { target } else { &piece.x1 };
        // Stop one step short of the exit, then cross it with a plain step.
        let mut n = piece.steps_to(&x, exit, fx).saturating_sub(1).min(limit - steps);
        while n > 0 {
            // The upper chain certifies that every jumped point stays inside
            // the piece.
            if fx.cmp_q(&piece.jump(&x, n, fx, Round::Up), exit) == Ordering::Less {
                break;
            }
            n /= 2;
        }
        if n > 0 {
            x = piece.jump(&x, n, fx, dir);
            steps += n;
        } else {
            x = piece.step(&x, fx, dir);
            steps += 1;
        }
    }
}

/// Orbit data of the conjugacy `q` with `q ∘ f = p ∘ q`, affine on the
/// fundamental domain between `0` and `f(0)`.
#[derive(Debug)]
pub(super) struct Conjugacy {
    dlo: Q,
    dhi: Q,
    /// Slope `p(0) / f(0)` of `q` on the domain.
    ratio: Q,
    f_up: Prepared,
    f_down: Prepared,
    p_up: Prepared,
    p_down: Prepared,
}

impl Conjugacy {
    pub fn new(f: &PlMap, p: &PlMap) -> Conjugacy {
        let (f0, p0) = (f.eval(&int(0)), p.eval(&int(0)));
        let up = f0 > int(0);
        let (dlo, dhi) = if up { (int(0), f0.clone()) } else { (f0.clone(), int(0)) };
        let (finv, pinv) = (f.inverse(), p.inverse());
        let (f_up, f_down) = if up { (f, &finv) } else { (&finv, f) };
        let (p_up, p_down) = if up { (p, &pinv) } else { (&pinv, p) };
        Conjugacy {
            ratio: p0 / &f0,
            dlo,
            dhi,
            f_up: Prepared::new(f_up),
            f_down: Prepared::new(f_down),
            p_up: Prepared::new(p_up),
            p_down: Prepared::new(p_down),
        }
    }

    /// A bound on `q(z)` from below or above, and the number of domain
    /// steps taken. Once the orbit under `p` comes within `tol` of the
    /// endpoint it approaches, the walk stops and the bound on that side
    /// is the endpoint itself.
    pub fn bound(&self, z: &Q, tol: &Q, fx: Fixed, dir: Round) -> (Q, u64) {
        let start = || fx.from_q(z, dir);
        // z = U^k(w) when z lies above the domain, z = D^k(w) below it.
        let (w, k, toward_top) = if *z > self.dhi {
            let o = walk(&self.f_down, start(), &self.dhi, u64::MAX, fx, dir);
            (o.end, o.steps, true)
        } else if *z < self.dlo {
            let o = walk(&self.f_up, start(), &self.dlo, u64::MAX, fx, dir);
            (o.end, o.steps, false)
        } else {
            return (z * &self.ratio, 0);
        };
        // The exact last step lands in the closed domain. Clamping to the
        // domain ends rounded the same way keeps the bound on its side,
        // since q is increasing and affine on the domain.
        let (lo, hi) = (fx.from_q(&self.dlo, dir), fx.from_q(&self.dhi, dir));
        let w = w.clamp(lo, hi);
        let y = div_round(&(w * self.ratio.numer()), self.ratio.denom(), dir);
        let (step, target, end) = if toward_top {
            (&self.p_up, int(1) - tol, int(1))
        } else {
            (&self.p_down, int(-1) + tol, int(-1))
        };
        let o = walk(step, y, &target, k, fx, dir);
        let stopped_short = o.reached && o.steps < k;
        let value = match (stopped_short, toward_top, dir) {
            (true, true, Round::Up) | (true, false, Round::Down) => end,
            _ => fx.to_q(&o.end),
        };
        (value, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::rational::q;

    const FX: Fixed = Fixed { frac: 80 };

    fn plain_orbit(m: &PlMap, mut w: Q, target: &Q) -> (Q, u64) {
        let up = m.eval(&w) > w;
        let mut k = 0;
        while if up { w < *target } else { w > *target } {
            w = m.eval(&w);
            k += 1;
        }
        (w, k)
    }

    #[test]
    fn walks_agree_with_plain_iteration() {
        let m = PlMap::through(q(1, 3), q(1, 2)).unwrap();
        for (map, start, target) in [(m.clone(), q(-1, 2), q(9, 10)), (m.inverse(), q(9, 10), q(-1, 2))] {
            let (w, k) = plain_orbit(&map, start.clone(), &target);
            let prepared = Prepared::new(&map);
            let mut ends = Vec::new();
            for dir in [Round::Down, Round::Up] {
                let o = walk(&prepared, FX.from_q(&start, dir), &target, u64::MAX, FX, dir);
                assert!(o.reached);
                assert_eq!(o.steps, k);
                ends.push(FX.to_q(&o.end));
            }
            assert!(ends[0] <= w && w <= ends[1]);
            assert!(rational::to_f64(&(&ends[1] - &ends[0])) < 1e-20);
        }
        let capped = walk(&Prepared::new(&m), FX.from_q(&q(-1, 2), Round::Up), &q(9, 10), 2, FX, Round::Up);
        assert!(!capped.reached && capped.steps == 2);
    }

    #[test]
    fn slopes_near_one_take_few_iterations() {
        // Slope 1 + 2^-30 at -1: billions of steps away from the endpoint.
        let y = Q::new(BigInt::one(), BigInt::one() << 30u32);
        let m = Prepared::new(&PlMap::through(int(0), y).unwrap());
        let start = Q::new(BigInt::one(), BigInt::one() << 40u32) - int(1);
        let lo = walk(&m, FX.from_q(&start, Round::Down), &int(0), u64::MAX, FX, Round::Down);
        let hi = walk(&m, FX.from_q(&start, Round::Up), &int(0), u64::MAX, FX, Round::Up);
        assert!(lo.reached && hi.reached);
        assert!(lo.steps > 1_000_000_000);
        assert!(lo.steps.abs_diff(hi.steps) <= 1);
        assert!(lo.end <= hi.end || lo.steps != hi.steps);
    }

    #[test]
    fn conjugacy_bounds_bracket_the_relation() {
        let f = PlMap::through(q(-1, 2), q(1, 4)).unwrap();
        let p = PlMap::through(q(1, 3), q(1, 2)).unwrap();
        let c = Conjugacy::new(&f, &p);
        let tol = q(1, 1 << 40);
        for z in [q(-99, 100), q(-1, 3), q(1, 7), q(999, 1000)] {
            let (lo, _) = c.bound(&z, &tol, FX, Round::Down);
            let (hi, _) = c.bound(&z, &tol, FX, Round::Up);
            assert!(lo <= hi);
            // q(f(z)) = p(q(z)) within the enclosure widths.
            let (flo, _) = c.bound(&f.eval(&z), &tol, FX, Round::Down);
            let (fhi, _) = c.bound(&f.eval(&z), &tol, FX, Round::Up);
            assert!(flo <= p.eval(&hi) && p.eval(&lo) <= fhi);
        }
    }
}
