//! Multi-output CART regression tree.
//!
//! Splits maximize the variance reduction summed over all targets. Columns
//! that only hold 0/1 values (one-hot blocks) are scanned sparsely: a node
//! only touches the indicators that are set for its samples, which keeps
//! wide one-hot designs cheap.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// How many candidate columns each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum FeatureSubset {
    #[default]
    All,
    Sqrt,
    Fraction(f64),
    Count(usize),
}

impl FeatureSubset {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            FeatureSubset::All => n_features,
            FeatureSubset::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeatureSubset::Fraction(f) => (f * n_features as f64).ceil() as usize,
            FeatureSubset::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeatureSubset,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeatureSubset::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub n_outputs: usize,
}

impl RegressionTree {
    pub fn predict_row(&self, x: ArrayView1<f64>) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Column layout shared by all trees of one fit.
pub(crate) struct Design<'a> {
    pub x: ArrayView2<'a, f64>,
    pub y: ArrayView2<'a, f64>,
    /// Per row, the indicator columns set to 1 (ascending).
    active: Vec<Vec<u32>>,
    continuous: Vec<usize>,
}

impl<'a> Design<'a> {
    pub fn new(x: ArrayView2<'a, f64>, y: ArrayView2<'a, f64>) -> Self {
        let p = x.ncols();
        let is_indicator: Vec<bool> = (0..p)
            .map(|j| x.column(j).iter().all(|&v| v == 0.0 || v == 1.0))
            .collect();
        let active = x
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &v)| is_indicator[j] && v == 1.0)
                    .map(|(j, _)| j as u32)
                    .collect()
            })
            .collect();
        let continuous = (0..p).filter(|&j| !is_indicator[j]).collect();
        Self {
            x,
            y,
            active,
            continuous,
        }
    }

    fn n_outputs(&self) -> usize {
        self.y.ncols()
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct Stats {
    n: usize,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

impl Stats {
    fn of(design: &Design, samples: &[usize]) -> Self {
        let k = design.n_outputs();
        let mut s = Stats {
            n: samples.len(),
            sum: vec![0.0; k],
            sumsq: vec![0.0; k],
        };
        for &i in samples {
            for (t, &v) in design.y.row(i).iter().enumerate() {
                s.sum[t] += v;
                s.sumsq[t] += v * v;
            }
        }
        s
    }

    fn sse(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sumsq)
            .map(|(s, q)| (q - s * s / n).max(0.0))
            .sum()
    }

    fn mean(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.sum.iter().map(|s| s / n).collect()
    }
}

/// Split score: sum over targets of `S_L^2 / n_L + S_R^2 / n_R`. Maximizing it
/// minimizes the children's summed squared error.
fn split_score(left_sum: &[f64], n_left: usize, total: &[f64], n: usize) -> f64 {
    let nl = n_left as f64;
    let nr = (n - n_left) as f64;
    left_sum
        .iter()
        .zip(total)
        .map(|(l, t)| {
            let r = t - l;
            l * l / nl + r * r / nr
        })
        .sum()
}

fn is_pure(design: &Design, samples: &[usize]) -> bool {
    let first = design.y.row(samples[0]);
    samples[1..].iter().all(|&i| design.y.row(i) == first)
}

pub(crate) struct TreeBuilder<'d, 'a> {
    design: &'d Design<'a>,
    params: TreeParams,
    /// Scratch for indicator scans.
    ind_count: Vec<usize>,
    ind_sum: Vec<f64>,
    touched: Vec<usize>,
    /// Unnormalized impurity decrease per column.
    pub importance: Vec<f64>,
}

impl<'d, 'a> TreeBuilder<'d, 'a> {
    pub fn new(design: &'d Design<'a>, params: TreeParams) -> Self {
        let p = design.x.ncols();
        let k = design.n_outputs();
        Self {
            design,
            params,
            ind_count: vec![0; p],
            ind_sum: vec![0.0; p * k],
            touched: Vec::new(),
            importance: vec![0.0; p],
        }
    }

    pub fn build(&mut self, samples: Vec<usize>, rng: &mut Rng) -> RegressionTree {
        let mut nodes: Vec<Node> = Vec::new();
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, samples, 0usize)];
        nodes.push(Node::Leaf { value: Vec::new() });
        while let Some((slot, samples, depth)) = stack.pop() {
            let stats = Stats::of(self.design, &samples);
            let min_leaf = self.params.min_samples_leaf.max(1);
            let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
            let split = if depth_ok && samples.len() >= 2 * min_leaf && !is_pure(self.design, &samples) {
                self.best_split(&samples, &stats, rng)
            } else {
                None
            };
            match split {
                None => nodes[slot] = Node::Leaf { value: stats.mean() },
                Some(c) => {
                    let (left, right): (Vec<usize>, Vec<usize>) = samples
                        .iter()
                        .partition(|&&i| self.design.x[[i, c.feature]] <= c.threshold);
                    let decrease =
                        stats.sse() - Stats::of(self.design, &left).sse() - Stats::of(self.design, &right).sse();
                    self.importance[c.feature] += decrease.max(0.0);
                    let l = nodes.len();
                    nodes.push(Node::Leaf { value: Vec::new() });
                    nodes.push(Node::Leaf { value: Vec::new() });
                    nodes[slot] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: l,
                        right: l + 1,
                    };
                    stack.push((l + 1, right, depth + 1));
                    stack.push((l, left, depth + 1));
                }
            }
        }
        RegressionTree {
            nodes,
            n_features: self.design.x.ncols(),
            n_outputs: self.design.n_outputs(),
        }
    }

    fn candidate_features(&self, rng: &mut Rng) -> Option<Vec<bool>> {
        let p = self.design.x.ncols();
        let k = self.params.features_per_split.resolve(p);
        if k >= p {
            return None;
        }
        let mut mask = vec![false; p];
        for j in index::sample(rng, p, k) {
            mask[j] = true;
        }
        Some(mask)
    }

    fn best_split(&mut self, samples: &[usize], stats: &Stats, rng: &mut Rng) -> Option<Candidate> {
        let mask = self.candidate_features(rng);
        let allowed = |j: usize| mask.as_ref().is_none_or(|m| m[j]);
        let n = samples.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let k = self.design.n_outputs();
        let mut best: Option<Candidate> = None;
        let consider = |c: Candidate, best: &mut Option<Candidate>| {
            let better = match best {
                None => true,
                Some(b) => c.score > b.score || (c.score == b.score && c.feature < b.feature),
            };
            if better {
                *best = Some(c);
            }
        };

        // Indicator columns: right child = rows with the indicator set.
        for &i in samples {
            for &j in &self.design.active[i] {
                let j = j as usize;
                if self.ind_count[j] == 0 {
                    self.touched.push(j);
                }
                self.ind_count[j] += 1;
                for (t, &v) in self.design.y.row(i).iter().enumerate() {
                    self.ind_sum[j * k + t] += v;
                }
            }
        }
        self.touched.sort_unstable();
        let mut left_sum = vec![0.0; k];
        for &j in &self.touched {
            let n_right = self.ind_count[j];
            let n_left = n - n_right;
            if allowed(j) && n_left >= min_leaf && n_right >= min_leaf {
                for t in 0..k {
                    left_sum[t] = stats.sum[t] - self.ind_sum[j * k + t];
                }
                let score = split_score(&left_sum, n_left, &stats.sum, n);
                consider(
                    Candidate {
                        feature: j,
                        threshold: 0.5,
                        score,
                    },
                    &mut best,
                );
            }
        }
        for &j in &self.touched {
            self.ind_count[j] = 0;
            self.ind_sum[j * k..(j + 1) * k].fill(0.0);
        }
        self.touched.clear();

        // Continuous columns: sorted sweep over midpoints.
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
        for &j in &self.design.continuous {
            if !allowed(j) {
                continue;
            }
            order.clear();
            order.extend(samples.iter().map(|&i| (self.design.x[[i, j]], i)));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            if order[0].0 == order[n - 1].0 {
                continue;
            }
            left_sum.fill(0.0);
            for pos in 0..n - 1 {
                let (v, i) = order[pos];
                for (t, &yv) in self.design.y.row(i).iter().enumerate() {
                    left_sum[t] += yv;
                }
                let n_left = pos + 1;
                let next = order[pos + 1].0;
                if v == next || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let score = split_score(&left_sum, n_left, &stats.sum, n);
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                consider(
                    Candidate {
                        feature: j,
                        threshold,
                        score,
                    },
                    &mut best,
                );
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    fn fit(x: ArrayView2<f64>, y: ArrayView2<f64>, params: TreeParams) -> RegressionTree {
        let design = Design::new(x, y);
        let mut b = TreeBuilder::new(&design, params);
        b.build((0..x.nrows()).collect(), &mut Rng::seed_from_u64(0))
    }

    #[test]
    fn memorizes_distinct_rows() {
        let x = array![[0.0, 1.0, 0.3], [1.0, 0.0, 0.1], [0.0, 1.0, 0.9], [1.0, 0.0, 0.5]];
        let y = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]];
        let t = fit(x.view(), y.view(), TreeParams::default());
        for i in 0..4 {
            assert_eq!(t.predict_row(x.row(i)), y.row(i).to_vec().as_slice());
        }
    }

    #[test]
    fn zero_gain_splits_still_separate() {
        // XOR layout: every single split leaves the means unchanged.
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = array![[0.0], [0.0], [1.0], [1.0]];
        let t = fit(x.view(), y.view(), TreeParams::default());
        for i in 0..4 {
            assert_eq!(t.predict_row(x.row(i))[0], y[[i, 0]]);
        }
    }

    #[test]
    fn depth_and_leaf_limits() {
        let x = array![[0.1], [0.2], [0.3], [0.4], [0.5], [0.6]];
        let y = array![[1.0], [2.0], [3.0], [4.0], [5.0], [6.0]];
        let stump = fit(
            x.view(),
            y.view(),
            TreeParams {
                max_depth: Some(1),
                ..Default::default()
            },
        );
        assert_eq!(stump.depth(), 1);
        assert_eq!(stump.predict_row(x.row(0))[0], 2.0);
        let leafy = fit(
            x.view(),
            y.view(),
            TreeParams {
                min_samples_leaf: 3,
                ..Default::default()
            },
        );
        assert_eq!(leafy.depth(), 1);
    }
}
