use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A nonempty, ordered, finite set of points in `R^d` with the Euclidean metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::input("point set is empty"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::input("points must have at least one coordinate"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::input(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(PointSet { dim, points })
    }

    /// Evenly spaced points `start, start + step, ...` up to and including `end`.
    pub fn line(start: f64, end: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::input("line needs at least one point"));
        }
        if count == 1 {
            return PointSet::new(vec![vec![start]]);
        }
        let step = (end - start) / (count - 1) as f64;
        PointSet::new((0..count).map(|i| vec![start + step * i as f64]).collect())
    }

    /// `count` points drawn uniformly from the closed unit ball in `R^dim`.
    pub fn ball_sample<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(Error::input("ball sample needs dim >= 1 and count >= 1"));
        }
        let points = (0..count)
            .map(|_| {
                let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let radius = rng.random::<f64>().powf(1.0 / dim as f64);
                for x in &mut v {
                    *x *= radius / norm;
                }
                v
            })
            .collect();
        PointSet::new(points)
    }

    /// `count` points evenly spaced on the unit circle, the first at angle `phase`.
    pub fn circle(count: usize, phase: f64) -> Result<Self> {
        let points = (0..count)
            .map(|i| {
                let angle = phase + std::f64::consts::TAU * i as f64 / count as f64;
                vec![angle.cos(), angle.sin()]
            })
            .collect();
        PointSet::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.points[i], &self.points[j])
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    /// Largest Euclidean norm of any point.
    pub fn radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct indices (infinity for a single point).
    pub fn min_separation(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(self.distance(i, j));
            }
        }
        best
    }

    /// Index of the point closest to `x`, lowest index on ties.
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "query has {} coordinates, point set has {}",
                x.len(),
                self.dim
            )));
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = euclidean(p, x);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }

    /// Index of a point exactly equal to `x`, if any.
    pub fn position(&self, x: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == x)
    }
}

impl TryFrom<Vec<Vec<f64>>> for PointSet {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        PointSet::new(points)
    }
}

impl From<PointSet> for Vec<Vec<f64>> {
    fn from(set: PointSet) -> Self {
        set.points
    }
}
