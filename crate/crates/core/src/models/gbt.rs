//! Gradient-boosted regression trees with second-order leaf values.
//!
//! Trees grow level by level with exact greedy splits over presorted features.
//! Split gain is `GL²/HL + GR²/HR - G²/H` and a leaf stores `-lr·G/H`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, ln, sigmoid, softplus};

const MIN_HESS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Logistic,
    Squared,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_of(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf(_) => return at,
            }
        }
    }

    pub fn value(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_of(row)] {
            Node::Leaf(v) => v,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf(_) => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Grows one tree on gradients `g` and hessians `h`. Returns the tree and the
/// leaf node reached by every training row.
fn grow(x: &[f64], p: usize, sorted: &[Vec<usize>], g: &[f64], h: &[f64], depth: usize) -> (Tree, Vec<usize>) {
    let n = g.len();
    let mut nodes = vec![Node::Leaf(0.0)];
    let mut node_of = vec![0usize; n];
    let mut active = vec![0usize];
    for _ in 0..depth {
        if active.is_empty() {
            break;
        }
        // slot of each active node in the per-level arrays
        let mut slot = vec![usize::MAX; nodes.len()];
        for (s, nd) in active.iter().enumerate() {
            slot[*nd] = s;
        }
        let m = active.len();
        let mut g_tot = vec![0.0; m];
        let mut h_tot = vec![0.0; m];
        for i in 0..n {
            let s = slot[node_of[i]];
            if s != usize::MAX {
                g_tot[s] += g[i];
                h_tot[s] += h[i];
            }
        }
        let mut best: Vec<Option<Best>> = (0..m).map(|_| None).collect();
        let mut gl = vec![0.0; m];
        let mut hl = vec![0.0; m];
        let mut last = vec![f64::NAN; m];
        for f in 0..p {
            gl.iter_mut().for_each(|v| *v = 0.0);
            hl.iter_mut().for_each(|v| *v = 0.0);
            last.iter_mut().for_each(|v| *v = f64::NAN);
            for &i in &sorted[f] {
                let s = slot[node_of[i]];
                if s == usize::MAX {
                    continue;
                }
                let v = x[i * p + f];
                if !last[s].is_nan() && v > last[s] {
                    let (gr, hr) = (g_tot[s] - gl[s], h_tot[s] - hl[s]);
                    let gain = gl[s] * gl[s] / hl[s].max(MIN_HESS) + gr * gr / hr.max(MIN_HESS)
                        - g_tot[s] * g_tot[s] / h_tot[s].max(MIN_HESS);
                    if gain > 1e-12 && best[s].as_ref().is_none_or(|b| gain > b.gain) {
                        best[s] = Some(Best { gain, feature: f, threshold: 0.5 * (last[s] + v) });
                    }
                }
                gl[s] += g[i];
                hl[s] += h[i];
                last[s] = v;
            }
        }
        let mut next = Vec::new();
        let mut children = vec![None; m];
        for (s, nd) in active.iter().enumerate() {
            if let Some(b) = &best[s] {
                let left = nodes.len();
                nodes.push(Node::Leaf(0.0));
                nodes.push(Node::Leaf(0.0));
                nodes[*nd] = Node::Split { feature: b.feature, threshold: b.threshold, left, right: left + 1 };
                children[s] = Some((b.feature, b.threshold, left));
                next.push(left);
                next.push(left + 1);
            }
        }
        for i in 0..n {
            let s = slot[node_of[i]];
            if s == usize::MAX {
                continue;
            }
            if let Some((f, t, left)) = children[s] {
                node_of[i] = if x[i * p + f] <= t { left } else { left + 1 };
            }
        }
        active = next;
    }
    (Tree { nodes }, node_of)
}

fn row_loss(obj: Objective, f: f64, y: f64) -> f64 {
    match obj {
        Objective::Logistic => softplus(f) - y * f,
        Objective::Squared => 0.5 * (f - y) * (f - y),
    }
}

/// Additive model `F(x) = base + Σ tree_m(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Booster {
    pub objective: Objective,
    pub base: f64,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone)]
pub struct BoostStats {
    /// Weighted mean training loss before the first tree and after each tree.
    pub objective: Vec<f64>,
}

impl Booster {
    /// `y` holds 0/1 for the logistic objective and real targets otherwise.
    pub fn fit(obj: Objective, x: &[f64], p: usize, y: &[f64], w: &[f64], rounds: usize, depth: usize, lr: f64) -> (Self, BoostStats) {
        let n = y.len();
        let total: f64 = w.iter().sum();
        let ybar = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
        let base = match obj {
            Objective::Logistic => {
                let q = ybar.clamp(1e-6, 1.0 - 1e-6);
                ln(q / (1.0 - q))
            }
            Objective::Squared => ybar,
        };
        let sorted: Vec<Vec<usize>> = (0..p)
            .map(|f| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|a, b| x[a * p + f].total_cmp(&x[b * p + f]));
                idx
            })
            .collect();
        let mut score = vec![base; n];
        let mean_loss = |score: &[f64]| score.iter().zip(y).zip(w).map(|((f, yi), wi)| wi * row_loss(obj, *f, *yi)).sum::<f64>() / total;
        let mut history = vec![mean_loss(&score)];
        let mut trees = Vec::with_capacity(rounds);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..rounds {
            for i in 0..n {
                let (gi, hi) = match obj {
                    Objective::Logistic => {
                        let s = sigmoid(score[i]);
                        (s - y[i], s * (1.0 - s))
                    }
                    Objective::Squared => (score[i] - y[i], 1.0),
                };
                g[i] = w[i] * gi;
                h[i] = w[i] * hi;
            }
            let (mut tree, leaf_of) = grow(x, p, &sorted, &g, &h, depth);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
            for (i, leaf) in leaf_of.iter().enumerate() {
                members[*leaf].push(i);
            }
            for (nd, rows) in members.iter().enumerate() {
                if rows.is_empty() {
                    continue;
                }
                let gs: f64 = rows.iter().map(|i| g[*i]).sum();
                let hs: f64 = rows.iter().map(|i| h[*i]).sum::<f64>().max(MIN_HESS);
                let leaf_loss = |step: f64| rows.iter().map(|i| w[*i] * row_loss(obj, score[*i] + step, y[*i])).sum::<f64>();
                // a shrunken Newton step can still overshoot when the hessian is tiny; halve until the leaf loss does not rise
                let before = leaf_loss(0.0);
                let mut step = -lr * gs / hs;
                for _ in 0..60 {
                    if leaf_loss(step) <= before {
                        break;
                    }
                    step *= 0.5;
                }
                if leaf_loss(step) > before {
                    step = 0.0;
                }
                tree.nodes[nd] = Node::Leaf(step);
                for i in rows {
                    score[*i] += step;
                }
            }
            history.push(mean_loss(&score));
            trees.push(tree);
        }
        (Booster { objective: obj, base, trees }, BoostStats { objective: history })
    }

    pub fn raw(&self, row: &[f64]) -> f64 {
        self.base + self.trees.iter().map(|t| t.value(row)).sum::<f64>()
    }
}

/// Boosted classifier, one-vs-rest beyond two classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtClassifier {
    pub boosters: Vec<Booster>,
}

impl GbtClassifier {
    pub fn fit(x: &[f64], p: usize, y: &[usize], w: &[f64], k: usize, rounds: usize, depth: usize, lr: f64) -> (Self, Vec<BoostStats>) {
        let targets: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };
        let mut boosters = Vec::new();
        let mut stats = Vec::new();
        for class in targets {
            let yb: Vec<f64> = y.iter().map(|v| if *v == class { 1.0 } else { 0.0 }).collect();
            let (b, s) = Booster::fit(Objective::Logistic, x, p, &yb, w, rounds, depth, lr);
            boosters.push(b);
            stats.push(s);
        }
        (GbtClassifier { boosters }, stats)
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        if self.boosters.len() == 1 {
            return usize::from(self.boosters[0].raw(row) > 0.0);
        }
        let scores: Vec<f64> = self.boosters.iter().map(|b| b.raw(row)).collect();
        math::argmax(&scores)
    }
}
