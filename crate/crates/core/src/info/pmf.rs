use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Probability table over a product of named finite axes, row-major (last
/// axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPMF {
    names: Vec<String>,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / q).ln()
    } else {
        0.0
    }
}

impl JointPMF {
    /// Checks nonnegativity and that the table sums to 1 within `1e-12`.
    pub fn new(axes: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        let joint = Self::unchecked(axes, probs)?;
        if joint.probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::input("joint pmf entries must be finite and nonnegative"));
        }
        let total: f64 = joint.probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::input(format!("joint pmf sums to {total}, not 1")));
        }
        Ok(joint)
    }

    /// Normalizes nonnegative weights; a zero total is an impossible observation.
    pub fn from_weights(axes: Vec<(String, usize)>, weights: Vec<f64>) -> Result<Self> {
        let mut joint = Self::unchecked(axes, weights)?;
        if joint.probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::input("weights must be finite and nonnegative"));
        }
        let total: f64 = joint.probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::ImpossibleObservation("all configurations have zero weight".into()));
        }
        joint.probs.iter_mut().for_each(|p| *p /= total);
        Ok(joint)
    }

    fn unchecked(axes: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::input("joint pmf needs at least one axis"));
        }
        let (names, dims): (Vec<String>, Vec<usize>) = axes.into_iter().unzip();
        if dims.contains(&0) {
            return Err(Error::input("axes must be nonempty"));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::input(format!("duplicate axis name {n:?}")));
            }
        }
        let size: usize = dims.iter().product();
        if probs.len() != size {
            return Err(Error::input(format!(
                "table has {} entries, axes need {size}",
                probs.len()
            )));
        }
        Ok(JointPMF { names, dims, probs })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn axis(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::input(format!("no axis named {name:?}")))
    }

    fn check_group(&self, group: &[usize]) -> Result<()> {
        for (i, &a) in group.iter().enumerate() {
            if a >= self.dims.len() {
                return Err(Error::input(format!("axis {a} out of range")));
            }
            if group[..i].contains(&a) {
                return Err(Error::input(format!("axis {a} listed twice")));
            }
        }
        Ok(())
    }

    /// Flat index of every entry projected onto `group` (mixed radix in
    /// the order given).
    fn projection(&self, group: &[usize]) -> (Vec<usize>, usize) {
        let n = self.dims.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        let size: usize = group.iter().map(|&a| self.dims[a]).product();
        let idx = (0..self.probs.len())
            .map(|flat| {
                group
                    .iter()
                    .fold(0, |acc, &a| acc * self.dims[a] + (flat / strides[a]) % self.dims[a])
            })
            .collect();
        (idx, size)
    }

    fn project(&self, group: &[usize]) -> (Vec<usize>, Vec<f64>) {
        let (idx, size) = self.projection(group);
        let mut table = vec![0.0; size];
        for (&i, &p) in idx.iter().zip(&self.probs) {
            table[i] += p;
        }
        (idx, table)
    }

    /// Marginal over the given axes, in the given order.
    pub fn marginal(&self, group: &[usize]) -> Result<JointPMF> {
        self.check_group(group)?;
        if group.is_empty() {
            return Err(Error::input("marginal needs at least one axis"));
        }
        let (_, table) = self.project(group);
        Ok(JointPMF {
            names: group.iter().map(|&a| self.names[a].clone()).collect(),
            dims: group.iter().map(|&a| self.dims[a]).collect(),
            probs: table,
        })
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// `I(X_a; X_b)` summed directly as `sum p log(p / (p_a p_b))`.
    pub fn mutual_information_between(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// `I(X_a; X_b | X_c)` summed directly as `sum p log(p p_c / (p_ac p_bc))`.
    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::input("mutual information needs nonempty axis groups"));
        }
        let all: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.check_group(&all)?;
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let (abc_idx, abc) = self.project(&all);
        let (ac_idx, p_ac) = self.project(&ac);
        let (bc_idx, p_bc) = self.project(&bc);
        let (c_idx, p_c) = self.project(c);
        // every flat entry maps into each projection; pick one representative
        // entry per joint (a, b, c) cell
        let mut seen = vec![false; abc.len()];
        let mut total = 0.0;
        for flat in 0..self.probs.len() {
            let cell = abc_idx[flat];
            if seen[cell] {
                continue;
            }
            seen[cell] = true;
            let p = abc[cell];
            if p > 0.0 {
                total += xlogy_ratio(p, p_ac[ac_idx[flat]] * p_bc[bc_idx[flat]] / p_c[c_idx[flat]]);
            }
        }
        Ok(total.max(0.0))
    }
}

/// `I(X; Y)` for a joint pmf over exactly two axes.
pub fn mutual_information(joint: &JointPMF) -> Result<f64> {
    if joint.dims.len() != 2 {
        return Err(Error::input(format!(
            "mutual_information expects two axes, got {}",
            joint.dims.len()
        )));
    }
    joint.mutual_information_between(&[0], &[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(n: usize, m: usize, probs: Vec<f64>) -> JointPMF {
        JointPMF::new(vec![("x".into(), n), ("y".into(), m)], probs).unwrap()
    }

    #[test]
    fn product_has_zero_information() {
        let px = [0.2, 0.8];
        let py = [0.5, 0.3, 0.2];
        let probs = px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect();
        assert!(mutual_information(&two(2, 3, probs)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn identity_coupling() {
        let mut probs = vec![0.0; 16];
        for i in 0..4 {
            probs[i * 4 + i] = 0.25;
        }
        let mi = mutual_information(&two(4, 4, probs)).unwrap();
        assert!((mi - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_binary_channel() {
        let mi = mutual_information(&two(2, 2, vec![0.4, 0.1, 0.1, 0.4])).unwrap();
        let expected = 0.8 * (1.6f64).ln() + 0.2 * (0.4f64).ln();
        assert!((mi - expected).abs() < 1e-15);
        assert!((mi - 0.1927).abs() < 1e-4);
    }

    #[test]
    fn marginal_and_entropy() {
        let j = two(2, 2, vec![0.1, 0.2, 0.3, 0.4]);
        let mx = j.marginal(&[0]).unwrap();
        assert!((mx.probs()[0] - 0.3).abs() < 1e-15);
        let my = j.marginal(&[1]).unwrap();
        assert!((my.probs()[1] - 0.6).abs() < 1e-15);
        assert!((mx.entropy() - (-(0.3f64 * 0.3f64.ln()) - 0.7 * 0.7f64.ln())).abs() < 1e-15);
        let swapped = j.marginal(&[1, 0]).unwrap();
        assert_eq!(swapped.probs(), &[0.1, 0.3, 0.2, 0.4]);
    }

    #[test]
    fn chain_rule_on_three_axes() {
        let w: Vec<f64> = (1..=12).map(|i| (i * i % 7 + 1) as f64).collect();
        let j = JointPMF::from_weights(
            vec![("t".into(), 3), ("a".into(), 2), ("b".into(), 2)],
            w,
        )
        .unwrap();
        let both = j.mutual_information_between(&[0], &[1, 2]).unwrap();
        let first = j.mutual_information_between(&[0], &[1]).unwrap();
        let second = j.conditional_mutual_information(&[0], &[2], &[1]).unwrap();
        assert!((both - first - second).abs() < 1e-12);
        let via_entropy = j.marginal(&[0]).unwrap().entropy() + j.marginal(&[1, 2]).unwrap().entropy() - j.entropy();
        assert!((both - via_entropy).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(JointPMF::new(vec![("x".into(), 2)], vec![0.5, 0.6]).is_err());
        assert!(JointPMF::new(vec![("x".into(), 2)], vec![-0.5, 1.5]).is_err());
        assert!(JointPMF::new(vec![("x".into(), 2), ("x".into(), 1)], vec![0.5, 0.5]).is_err());
        assert!(matches!(
            JointPMF::from_weights(vec![("x".into(), 2)], vec![0.0, 0.0]),
            Err(Error::ImpossibleObservation(_))
        ));
        let j = two(2, 2, vec![0.25; 4]);
        assert!(j.mutual_information_between(&[0], &[0]).is_err());
        assert!(mutual_information(&j.marginal(&[0]).unwrap()).is_err());
    }
}
