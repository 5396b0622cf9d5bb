use serde::{Deserialize, Serialize};

use super::net::{greedy_over_cells, EpsilonNet};
use super::points::PointSet;
use crate::error::{Error, Result};

/// How the coarsest level `k0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum K0Rule {
    /// Largest `k` with `alpha^-k >= diam(space)`; the root is the lowest-index point.
    #[default]
    Diameter,
    /// Space lives in the closed unit ball; largest `k` with `alpha^-k >= 1`
    /// (so `k0 = 0`) and the root is the origin.
    UnitBall,
}

fn largest_level_above(alpha: f64, scale: f64) -> i32 {
    let mut k = (-scale.ln() / alpha.ln()).floor() as i32;
    while alpha.powi(-(k + 1)) >= scale {
        k += 1;
    }
    while alpha.powi(-k) < scale {
        k -= 1;
    }
    k
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("alpha must be a finite real > 1, got {alpha}")))
    }
}

/// Coarsest level of a chain over `space`.
///
/// Under [`K0Rule::Diameter`] a space of zero diameter has no finite `k0`
/// and is rejected.
pub fn compute_k0(space: &PointSet, alpha: f64, rule: K0Rule) -> Result<i32> {
    check_alpha(alpha)?;
    match rule {
        K0Rule::Diameter => {
            let diam = space.diameter();
            if diam == 0.0 {
                return Err(Error::input(
                    "space has zero diameter; k0 is unbounded and a chain is pointless",
                ));
            }
            Ok(largest_level_above(alpha, diam))
        }
        K0Rule::UnitBall => {
            if space.radius() > 1.0 {
                return Err(Error::input("unit-ball rule needs every point inside the unit ball"));
            }
            Ok(largest_level_above(alpha, 1.0))
        }
    }
}

/// Smallest level above `k0` at which the greedy net keeps every point as a center.
pub fn finest_singleton_level(space: &PointSet, alpha: f64, rule: K0Rule) -> Result<i32> {
    let k0 = compute_k0(space, alpha, rule)?;
    let sep = space.min_separation();
    if sep == 0.0 {
        return Err(Error::input("point set has duplicate points"));
    }
    let mut k = k0 + 1;
    while alpha.powi(-k) >= sep {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLevel {
    pub k: i32,
    #[serde(flatten)]
    pub net: EpsilonNet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentMap {
    /// The coarse level; pairs map level `k + 1` centers to level `k` centers.
    pub k: i32,
    pub pairs: Vec<(usize, usize)>,
}

/// Nested `alpha^-k` nets for `k = k0..=k_max` with `pi_k = pi'_k o pi_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationChain {
    pub alpha: f64,
    pub k0: i32,
    pub rule: K0Rule,
    pub points: PointSet,
    pub levels: Vec<ChainLevel>,
    pub parent_maps: Vec<ParentMap>,
}

/// Builds the chain bottom-up.
///
/// The finest level is a greedy net of the points at scale `alpha^-k_max`.
/// Each coarser level is a greedy net over the cells of the level below: a
/// candidate center may absorb a finer cell only if every point of that cell
/// is within `alpha^-k`, which keeps the covering radius exact at every level
/// and makes every coarse center a fine center.
///
/// Under [`K0Rule::UnitBall`] the origin is always the first pick, appended
/// to the point set when it is not already present.
pub fn build_quantization_chain(
    space: &PointSet,
    alpha: f64,
    k_max: i32,
    rule: K0Rule,
) -> Result<QuantizationChain> {
    let k0 = compute_k0(space, alpha, rule)?;
    if k_max <= k0 {
        return Err(Error::input(format!("k_max = {k_max} must exceed k0 = {k0}")));
    }
    let (points, root) = match rule {
        K0Rule::Diameter => (space.clone(), 0),
        K0Rule::UnitBall => {
            let origin = vec![0.0; space.dim()];
            match space.position(&origin) {
                Some(i) => (space.clone(), i),
                None => {
                    let mut pts = space.points().to_vec();
                    pts.push(origin);
                    let n = pts.len() - 1;
                    (PointSet::new(pts)?, n)
                }
            }
        }
    };

    let n_levels = (k_max - k0 + 1) as usize;
    let mut rev: Vec<ChainLevel> = Vec::with_capacity(n_levels);
    let mut candidates: Vec<usize> = (0..points.len()).collect();
    let mut cells: Vec<Vec<usize>> = candidates.iter().map(|&i| vec![i]).collect();
    for k in (k0..=k_max).rev() {
        let first = candidates
            .iter()
            .position(|&c| c == root)
            .ok_or_else(|| Error::invariant("root fell out of the finer net"))?;
        let net = greedy_over_cells(&points, &candidates, &cells, alpha.powi(-k), first)?;
        candidates = net.center_indices.clone();
        cells = candidates.iter().map(|&c| net.cell(c)).collect();
        rev.push(ChainLevel { k, net });
    }
    rev.reverse();
    let levels = rev;
    if levels[0].net.len() != 1 {
        return Err(Error::invariant(format!(
            "level k0 = {k0} has {} centers",
            levels[0].net.len()
        )));
    }
    let parent_maps = levels
        .windows(2)
        .map(|w| ParentMap {
            k: w[0].k,
            pairs: w[1]
                .net
                .center_indices
                .iter()
                .map(|&c| (c, w[0].net.assignment[c]))
                .collect(),
        })
        .collect();
    Ok(QuantizationChain {
        alpha,
        k0,
        rule,
        points,
        levels,
        parent_maps,
    })
}

impl QuantizationChain {
    pub fn k_max(&self) -> i32 {
        self.k0 + self.levels.len() as i32 - 1
    }

    pub fn scale(&self, k: i32) -> f64 {
        self.alpha.powi(-k)
    }

    pub fn level(&self, k: i32) -> Result<&ChainLevel> {
        if k < self.k0 || k > self.k_max() {
            return Err(Error::input(format!(
                "level {k} outside chain range {}..={}",
                self.k0,
                self.k_max()
            )));
        }
        Ok(&self.levels[(k - self.k0) as usize])
    }

    pub fn root(&self) -> usize {
        self.levels[0].net.center_indices[0]
    }

    /// `pi_k(a)` as a point index.
    pub fn quantize(&self, a: usize, k: i32) -> Result<usize> {
        if a >= self.points.len() {
            return Err(Error::input(format!("point index {a} out of range")));
        }
        Ok(self.level(k)?.net.assignment[a])
    }

    /// Quantizes an arbitrary point by first snapping it to the nearest chain point.
    pub fn quantize_point(&self, x: &[f64], k: i32) -> Result<usize> {
        let a = self.points.nearest(x)?;
        self.quantize(a, k)
    }

    /// `pi'_k`: maps a level `k + 1` center to its level `k` parent.
    pub fn parent(&self, center: usize, k: i32) -> Result<usize> {
        let map = self
            .parent_maps
            .get((k - self.k0) as usize)
            .filter(|m| m.k == k)
            .ok_or_else(|| Error::input(format!("no parent map at level {k}")))?;
        map.pairs
            .iter()
            .find(|&&(fine, _)| fine == center)
            .map(|&(_, coarse)| coarse)
            .ok_or_else(|| Error::input(format!("{center} is not a level {} center", k + 1)))
    }

    /// Level `k` cells: for each center (ascending), the points it absorbs.
    pub fn cells(&self, k: i32) -> Result<Vec<(usize, Vec<usize>)>> {
        let net = &self.level(k)?.net;
        Ok(net
            .center_indices
            .iter()
            .map(|&c| (c, net.cell(c)))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn pair(d: f64) -> PointSet {
        PointSet::new(vec![vec![0.0], vec![d]]).unwrap()
    }

    #[test]
    fn k0_diameter_rule() {
        assert_eq!(compute_k0(&pair(2.0), 2.0, K0Rule::Diameter).unwrap(), -1);
        assert_eq!(compute_k0(&pair(0.3), 2.0, K0Rule::Diameter).unwrap(), 1);
        assert_eq!(compute_k0(&pair(1.0), 2.0, K0Rule::Diameter).unwrap(), 0);
        assert_eq!(compute_k0(&pair(0.5), 2.0, K0Rule::Diameter).unwrap(), 1);
    }

    #[test]
    fn k0_ball_rule_is_zero() {
        let ball = PointSet::ball_sample(3, 40, &mut seeded(2)).unwrap();
        assert_eq!(compute_k0(&ball, 2.0, K0Rule::UnitBall).unwrap(), 0);
        assert_eq!(compute_k0(&ball, 20.0, K0Rule::UnitBall).unwrap(), 0);
    }

    #[test]
    fn k0_rejects_degenerate_inputs() {
        let single = PointSet::new(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            compute_k0(&single, 2.0, K0Rule::Diameter),
            Err(Error::Input(_))
        ));
        assert!(compute_k0(&pair(1.0), 1.0, K0Rule::Diameter).is_err());
        assert!(compute_k0(&pair(3.0), 2.0, K0Rule::UnitBall).is_err());
    }

    #[test]
    fn one_step_chain_has_singleton_root() {
        let set = PointSet::ball_sample(2, 30, &mut seeded(4)).unwrap();
        let k0 = compute_k0(&set, 2.0, K0Rule::Diameter).unwrap();
        let chain = build_quantization_chain(&set, 2.0, k0 + 1, K0Rule::Diameter).unwrap();
        assert_eq!(chain.levels.len(), 2);
        assert_eq!(chain.levels[0].net.len(), 1);
        assert!(build_quantization_chain(&set, 2.0, k0, K0Rule::Diameter).is_err());
    }

    #[test]
    fn two_point_chain_separates_at_level_one() {
        let set = PointSet::new(vec![vec![-1.0], vec![1.0]]).unwrap();
        let chain = build_quantization_chain(&set, 2.0, 3, K0Rule::Diameter).unwrap();
        assert_eq!(chain.k0, -1);
        for k in 1..=3 {
            assert_eq!(chain.level(k).unwrap().net.center_indices, vec![0, 1]);
        }
        assert_eq!(chain.level(-1).unwrap().net.center_indices, vec![0]);
    }

    #[test]
    fn nesting_matches_composed_parent_maps() {
        let mut rng = seeded(9);
        let set = PointSet::ball_sample(2, 300, &mut rng).unwrap();
        let chain = build_quantization_chain(&set, 2.0, 4, K0Rule::Diameter).unwrap();
        for _ in 0..1000 {
            let a = rng.random_range(0..set.len());
            let mut c = chain.quantize(a, chain.k_max()).unwrap();
            for k in (chain.k0..chain.k_max()).rev() {
                c = chain.parent(c, k).unwrap();
                assert_eq!(c, chain.quantize(a, k).unwrap());
            }
        }
    }

    #[test]
    fn quantize_edges() {
        let set = PointSet::ball_sample(2, 80, &mut seeded(12)).unwrap();
        let chain = build_quantization_chain(&set, 2.0, 3, K0Rule::Diameter).unwrap();
        let root = chain.root();
        for a in 0..set.len() {
            assert_eq!(chain.quantize(a, chain.k0).unwrap(), root);
        }
        for lvl in &chain.levels {
            for &c in &lvl.net.center_indices {
                assert_eq!(chain.quantize(c, lvl.k).unwrap(), c);
            }
        }
        assert!(chain.quantize(0, chain.k0 - 1).is_err());
        assert!(chain.quantize(0, chain.k_max() + 1).is_err());
        assert!(chain.quantize(set.len(), chain.k0).is_err());
    }

    #[test]
    fn finest_level_is_nearest_center() {
        let mut rng = seeded(21);
        let set = PointSet::ball_sample(2, 150, &mut rng).unwrap();
        let chain = build_quantization_chain(&set, 2.0, 3, K0Rule::Diameter).unwrap();
        let finest = &chain.level(3).unwrap().net;
        for a in 0..set.len() {
            // exhaustive nearest-center oracle, lowest index on ties
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for &c in &finest.center_indices {
                let d = set.distance(a, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            assert_eq!(chain.quantize(a, 3).unwrap(), best);
        }
    }

    #[test]
    fn ball_rule_roots_at_origin() {
        let set = PointSet::ball_sample(2, 60, &mut seeded(8)).unwrap();
        let chain = build_quantization_chain(&set, 2.0, 3, K0Rule::UnitBall).unwrap();
        assert_eq!(chain.k0, 0);
        assert_eq!(chain.points.len(), 61);
        assert_eq!(chain.points.point(chain.root()), &[0.0, 0.0]);
        for lvl in &chain.levels {
            assert!(lvl.net.center_indices.contains(&chain.root()));
            assert!(lvl.net.covering_radius(&chain.points) <= chain.scale(lvl.k));
        }
    }

    #[test]
    fn json_round_trip() {
        let set = PointSet::ball_sample(2, 20, &mut seeded(1)).unwrap();
        let chain = build_quantization_chain(&set, 2.0, 2, K0Rule::Diameter).unwrap();
        let json = chain.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["alpha", "k0", "levels", "parent_maps"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let lvl = &v["levels"][0];
        for key in ["k", "epsilon", "center_indices", "assignment"] {
            assert!(lvl.get(key).is_some(), "missing level field {key}");
        }
        assert_eq!(QuantizationChain::from_json(&json).unwrap(), chain);
    }

    #[test]
    fn singleton_level_for_circle() {
        let circle = PointSet::circle(8, 0.0).unwrap();
        assert_eq!(compute_k0(&circle, 2.0, K0Rule::Diameter).unwrap(), -1);
        let k = finest_singleton_level(&circle, 2.0, K0Rule::Diameter).unwrap();
        assert_eq!(k, 1);
        let chain = build_quantization_chain(&circle, 2.0, k, K0Rule::Diameter).unwrap();
        assert_eq!(chain.level(k).unwrap().net.len(), 8);
    }
}
