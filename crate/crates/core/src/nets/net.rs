use serde::{Deserialize, Serialize};

use super::points::{euclidean, PointSet};
use crate::error::{Error, Result};

/// An epsilon-net over a [`PointSet`], stored by index.
///
/// `assignment[i]` is the index of the center that point `i` maps to; centers
/// map to themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonNet {
    pub epsilon: f64,
    pub center_indices: Vec<usize>,
    pub assignment: Vec<usize>,
}

impl EpsilonNet {
    pub fn len(&self) -> usize {
        self.center_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_indices.is_empty()
    }

    pub fn center_of(&self, point: usize) -> usize {
        self.assignment[point]
    }

    /// Largest distance from a point to its assigned center.
    pub fn covering_radius(&self, space: &PointSet) -> f64 {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, &c)| space.distance(i, c))
            .fold(0.0, f64::max)
    }

    /// Points assigned to `center`, in index order.
    pub fn cell(&self, center: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == center)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Farthest-point greedy epsilon-net.
///
/// The first center is the lowest index; each further center is the point
/// farthest from the current centers (lowest index on ties) until every
/// point lies within `epsilon` of some center. Points are then assigned to
/// their nearest center, lowest center index on ties.
pub fn greedy_epsilon_net(space: &PointSet, epsilon: f64) -> Result<EpsilonNet> {
    let cells: Vec<Vec<usize>> = (0..space.len()).map(|i| vec![i]).collect();
    let candidates: Vec<usize> = (0..space.len()).collect();
    greedy_over_cells(space, &candidates, &cells, epsilon, 0)
}

/// Greedy net whose candidates are whole cells.
///
/// `candidates[j]` is a point index acting as the representative of cell
/// `cells[j]`. A chosen center covers cell `j` only if every member of the
/// cell is within `epsilon` of it, so the returned assignment is constant on
/// cells. `first` is the position (in `candidates`) of the forced first pick.
pub(crate) fn greedy_over_cells(
    space: &PointSet,
    candidates: &[usize],
    cells: &[Vec<usize>],
    epsilon: f64,
    first: usize,
) -> Result<EpsilonNet> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::input(format!("epsilon must be positive, got {epsilon}")));
    }
    if candidates.is_empty() {
        return Err(Error::input("point set is empty"));
    }
    let n = candidates.len();
    let covers = |center: usize, cell: &[usize]| {
        cell.iter()
            .all(|&a| euclidean(space.point(a), space.point(center)) <= epsilon)
    };

    let mut chosen: Vec<usize> = Vec::new();
    let mut covered = vec![false; n];
    let mut gap = vec![f64::INFINITY; n];
    let mut next = Some(first);
    while let Some(pick) = next {
        let center = candidates[pick];
        chosen.push(pick);
        for j in 0..n {
            let d = space.distance(candidates[j], center);
            gap[j] = gap[j].min(d);
            if !covered[j] && covers(center, &cells[j]) {
                covered[j] = true;
            }
        }
        if !covered[pick] {
            return Err(Error::invariant(format!(
                "cell of candidate {center} is wider than epsilon {epsilon}"
            )));
        }
        next = None;
        let mut best = f64::NEG_INFINITY;
        for j in 0..n {
            if !covered[j] && gap[j] > best {
                best = gap[j];
                next = Some(j);
            }
        }
    }

    let mut assignment = vec![usize::MAX; space.len()];
    for j in 0..n {
        let rep = candidates[j];
        let mut best_center = usize::MAX;
        let mut best_d = f64::INFINITY;
        for &pick in &chosen {
            let center = candidates[pick];
            let d = space.distance(rep, center);
            let better = d < best_d || (d == best_d && center < best_center);
            if better && covers(center, &cells[j]) {
                best_center = center;
                best_d = d;
            }
        }
        for &a in &cells[j] {
            assignment[a] = best_center;
        }
    }
    if assignment.contains(&usize::MAX) {
        return Err(Error::invariant("cells do not partition the point set"));
    }
    let mut center_indices: Vec<usize> = chosen.iter().map(|&p| candidates[p]).collect();
    center_indices.sort_unstable();
    Ok(EpsilonNet {
        epsilon,
        center_indices,
        assignment,
    })
}
