//! Piecewise-linear homeomorphisms of `[-1, 1]` with rational breakpoints.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::rational::{self, int, Q};
use super::HoloError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "rational::text")]
    pub x: Q,
    #[serde(with = "rational::text")]
    pub y: Q,
}

/// Which side of the diagonal a map lies on over the open interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Drift {
    /// `f(z) > z` for all interior `z`.
    Up,
    /// `f(z) < z` for all interior `z`.
    Down,
}

/// Strictly increasing PL map fixing `-1` and `1`. Breakpoints are kept
/// minimal: no three consecutive points are collinear.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PlMap {
    points: Vec<Point>,
}

impl TryFrom<Vec<Point>> for PlMap {
    type Error = HoloError;

    fn try_from(points: Vec<Point>) -> Result<Self, Self::Error> {
        PlMap::new(points.into_iter().map(|p| (p.x, p.y)).collect())
    }
}

impl From<PlMap> for Vec<Point> {
    fn from(m: PlMap) -> Self {
        m.points
    }
}

fn lerp(a: &Point, b: &Point, x: &Q) -> Q {
    // One reduction at the end: x usually has the largest terms.
    let s = (&b.y - &a.y) / (&b.x - &a.x);
    let (xn, xd) = (x.numer(), x.denom());
    let (pn, pd) = (a.x.numer(), a.x.denom());
    let (rn, rd) = (a.y.numer(), a.y.denom());
    let (sn, sd) = (s.numer(), s.denom());
    let num = (xn * pd - pn * xd) * sn * rd + rn * xd * pd * sd;
    Q::new(num, xd * pd * sd * rd)
}

fn collinear(a: &Point, b: &Point, c: &Point) -> bool {
    (&b.y - &a.y) * (&c.x - &b.x) == (&c.y - &b.y) * (&b.x - &a.x)
}

impl PlMap {
    /// Builds a map from its graph vertices; they must start at `(-1, -1)`,
    /// end at `(1, 1)` and increase strictly in both coordinates.
    pub fn new(points: Vec<(Q, Q)>) -> Result<Self, HoloError> {
        let (lo, hi) = (int(-1), int(1));
        let first_ok = points.first().is_some_and(|(x, y)| *x == lo && *y == lo);
        let last_ok = points.last().is_some_and(|(x, y)| *x == hi && *y == hi);
        if points.len() < 2 || !first_ok || !last_ok {
            return Err(HoloError::EndpointNotFixed);
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(HoloError::NotMonotone {
                    x: rational::to_text(&w[1].0),
                });
            }
        }
        Ok(Self::from_sorted(points.into_iter().map(|(x, y)| Point { x, y }).collect()))
    }

    fn from_sorted(points: Vec<Point>) -> Self {
        let mut out: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if out.last().is_some_and(|l| l.x == p.x) {
                continue;
            }
            while out.len() >= 2 && collinear(&out[out.len() - 2], &out[out.len() - 1], &p) {
                out.pop();
            }
            out.push(p);
        }
        PlMap { points: out }
    }

    pub fn identity() -> Self {
        PlMap { points: vec![Point { x: int(-1), y: int(-1) }, Point { x: int(1), y: int(1) }] }
    }

    /// The two-piece map through `(x, y)`.
    pub fn through(x: Q, y: Q) -> Result<Self, HoloError> {
        PlMap::new(vec![(int(-1), int(-1)), (x, y), (int(1), int(1))])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_identity(&self) -> bool {
        self.points.len() == 2
    }

    pub fn eval(&self, z: &Q) -> Q {
        let i = self.points.partition_point(|p| p.x <= *z);
        if i == 0 {
            return self.points[0].y.clone();
        }
        if i == self.points.len() {
            return self.points[i - 1].y.clone();
        }
        let (a, b) = (&self.points[i - 1], &self.points[i]);
        if a.x == *z {
            a.y.clone()
        } else {
            lerp(a, b, z)
        }
    }

    pub fn inverse(&self) -> PlMap {
        PlMap {
            points: self.points.iter().map(|p| Point { x: p.y.clone(), y: p.x.clone() }).collect(),
        }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &PlMap) -> PlMap {
        let ginv = g.inverse();
        let mut xs: Vec<Q> = g.points.iter().map(|p| p.x.clone()).collect();
        xs.extend(self.points.iter().map(|p| ginv.eval(&p.x)));
        xs.sort();
        xs.dedup();
        PlMap::from_sorted(
            xs.into_iter()
                .map(|x| {
                    let y = self.eval(&g.eval(&x));
                    Point { x, y }
                })
                .collect(),
        )
    }

    /// Pointwise maximum; again an increasing PL map fixing the endpoints.
    pub fn max(&self, g: &PlMap) -> PlMap {
        let mut xs: Vec<Q> =
            self.points.iter().chain(&g.points).map(|p| p.x.clone()).collect();
        xs.sort();
        xs.dedup();
        let mut all = xs.clone();
        for w in xs.windows(2) {
            let (da, db) = (self.eval(&w[0]) - g.eval(&w[0]), self.eval(&w[1]) - g.eval(&w[1]));
            if (da < int(0) && db > int(0)) || (da > int(0) && db < int(0)) {
                // Both maps are affine on this window: solve da + t (db - da) = 0.
                let t = &da / (&da - &db);
                all.push(&w[0] + t * (&w[1] - &w[0]));
            }
        }
        all.sort();
        all.dedup();
        PlMap::from_sorted(
            all.into_iter()
                .map(|x| {
                    let (a, b) = (self.eval(&x), g.eval(&x));
                    Point { x, y: if a >= b { a } else { b } }
                })
                .collect(),
        )
    }

    /// Graph vertices of the map acting on `[a, b]` as `self` acts on `[-1, 1]`.
    pub fn scaled_points(&self, a: &Q, b: &Q) -> Vec<(Q, Q)> {
        let half = (b - a) / int(2);
        self.points
            .iter()
            .map(|p| (a + (&p.x + int(1)) * &half, a + (&p.y + int(1)) * &half))
            .collect()
    }

    /// Side of the diagonal, if the map has no interior fixed point.
    pub fn drift(&self) -> Result<Drift, Q> {
        let interior = &self.points[1..self.points.len() - 1];
        let Some(first) = interior.first() else { return Err(int(0)) };
        let want = first.y.cmp(&first.x);
        if want == Ordering::Equal {
            return Err(first.x.clone());
        }
        for p in interior {
            if p.y.cmp(&p.x) != want {
                return Err(p.x.clone());
            }
        }
        Ok(if want == Ordering::Greater { Drift::Up } else { Drift::Down })
    }

    /// All breakpoints and the midpoints between consecutive ones.
    pub fn test_points(&self) -> Vec<Q> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            out.push(w[0].x.clone());
            out.push((&w[0].x + &w[1].x) / int(2));
        }
        out.push(int(1));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::rational::q;

    #[test]
    fn inverse_of_two_piece_map() {
        let f = PlMap::through(int(0), q(1, 2)).unwrap();
        assert_eq!(f.inverse().eval(&q(1, 2)), int(0));
        assert_eq!(f.compose(&f.inverse()), PlMap::identity());
    }

    #[test]
    fn collinear_points_are_dropped() {
        let f = PlMap::new(vec![(int(-1), int(-1)), (int(0), int(0)), (int(1), int(1))]).unwrap();
        assert!(f.is_identity());
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(PlMap::new(vec![(int(-1), int(-1)), (int(0), int(1)), (int(1), int(1))]).is_err());
        assert!(PlMap::new(vec![(int(-1), int(0)), (int(1), int(1))]).is_err());
    }

    #[test]
    fn max_inserts_crossing() {
        let f = PlMap::through(int(0), q(1, 2)).unwrap();
        let g = PlMap::through(q(1, 2), int(0)).unwrap();
        let m = f.max(&g);
        for z in [q(-1, 2), int(0), q(1, 3), q(3, 4)] {
            assert_eq!(m.eval(&z), std::cmp::max(f.eval(&z), g.eval(&z)));
        }
    }

    #[test]
    fn drift_detects_sides() {
        assert_eq!(PlMap::through(int(0), q(1, 2)).unwrap().drift(), Ok(Drift::Up));
        assert_eq!(PlMap::through(int(0), q(-1, 2)).unwrap().drift(), Ok(Drift::Down));
        assert!(PlMap::identity().drift().is_err());
    }
}
