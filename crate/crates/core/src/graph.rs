//! The edge-colored directed graph `G_σ̄` and canonical codes for rooted balls.
//!
//! The radius-`r` ball around `x` has as vertices every endpoint of a walk of
//! length at most `r` from `x` (edges used in either direction) and as edges
//! the edges incident to a vertex at distance below `r`. These are exactly the
//! edges such walks can traverse.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::perm::{PermTuple, Permutation};

/// Vertex `x` has one outgoing edge `x → σᵢx` of each color `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

pub fn build_graph(sigma: &PermTuple) -> LabeledGraph {
    LabeledGraph {
        succ: sigma.perms().iter().map(|p| p.images().to_vec()).collect(),
        pred: sigma
            .perms()
            .iter()
            .map(|p| (0..p.degree()).map(|x| p.preimage(x)).collect())
            .collect(),
    }
}

impl LabeledGraph {
    pub fn vertex_count(&self) -> usize {
        self.succ[0].len()
    }

    pub fn colors(&self) -> usize {
        self.succ.len()
    }

    /// `(color, from, to)` for every edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(c, row)| row.iter().enumerate().map(move |(x, &y)| (c, x, y)))
    }

    pub fn out_neighbor(&self, color: usize, x: usize) -> usize {
        self.succ[color][x]
    }

    pub fn in_neighbor(&self, color: usize, x: usize) -> usize {
        self.pred[color][x]
    }

    /// Reads the tuple back off the edge set.
    pub fn to_tuple(&self) -> PermTuple {
        let n = self.vertex_count();
        let mut images = vec![vec![usize::MAX; n]; self.colors()];
        for (c, x, y) in self.edges() {
            images[c][x] = y;
        }
        PermTuple::new(
            images
                .into_iter()
                .map(|im| Permutation::from_images(im).expect("color classes are bijections"))
                .collect(),
        )
        .expect("uniform degree")
    }
}

/// Canonical form of a rooted colored ball.
///
/// Vertices are labeled in BFS order from the root, scanning neighbors in
/// letter order (`s₁`, `s₁⁻¹`, `s₂`, ...). Every vertex has at most one
/// neighbor per letter, so the labeling is forced and two balls have equal
/// codes exactly when they are isomorphic as rooted colored graphs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallCode {
    radius: usize,
    colors: usize,
    /// Number of vertices at each distance `0..=radius`.
    layers: Vec<usize>,
    /// For each interior vertex in label order, the label reached by each letter.
    adjacency: Vec<u32>,
}

impl BallCode {
    pub fn vertex_count(&self) -> usize {
        self.layers.iter().sum()
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    /// Edges of the ball as `(color, from_label, to_label)`, sorted.
    pub fn edges(&self) -> Vec<(usize, u32, u32)> {
        let mut out = Vec::new();
        for (v, row) in self.adjacency.chunks(2 * self.colors).enumerate() {
            for c in 0..self.colors {
                out.push((c, v as u32, row[2 * c]));
                out.push((c, row[2 * c + 1], v as u32));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub fn ball(g: &LabeledGraph, root: usize, radius: usize) -> BallCode {
    let k = g.colors();
    let mut label: HashMap<usize, u32> = HashMap::new();
    let mut depth: Vec<usize> = vec![0];
    let mut order: VecDeque<usize> = VecDeque::new();
    let mut adjacency = Vec::new();
    label.insert(root, 0);
    order.push_back(root);
    while let Some(v) = order.pop_front() {
        let d = depth[label[&v] as usize];
        if d >= radius {
            continue;
        }
        for c in 0..k {
            for u in [g.out_neighbor(c, v), g.in_neighbor(c, v)] {
                let next = label.len() as u32;
                let l = *label.entry(u).or_insert_with(|| {
                    depth.push(d + 1);
                    order.push_back(u);
                    next
                });
                adjacency.push(l);
            }
        }
    }
    let mut layers = vec![0; radius + 1];
    for d in depth {
        layers[d] += 1;
    }
    BallCode {
        radius,
        colors: k,
        layers,
        adjacency,
    }
}
