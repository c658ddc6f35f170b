//! Boolean distance, FASTMAP pole selection and projection, and the
//! recursive bi-cluster tree.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{contract, Result};
use crate::preprocess::BitMatrix;

/// Normalized Hamming distance: differing columns over total columns.
pub fn distance(u: &[bool], v: &[bool]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(contract(format!("vectors of length {} and {}", u.len(), v.len())));
    }
    if u.is_empty() {
        return Ok(0.0);
    }
    let diff = u.iter().zip(v).filter(|(a, b)| a != b).count();
    Ok(diff as f64 / u.len() as f64)
}

/// Distance between two rows of a packed matrix.
pub fn row_distance(m: &BitMatrix, i: usize, j: usize) -> f64 {
    if m.cols() == 0 {
        return 0.0;
    }
    let diff: u32 = m.row(i).iter().zip(m.row(j)).map(|(a, b)| (a ^ b).count_ones()).sum();
    f64::from(diff) / m.cols() as f64
}

/// Position on the east-west line by the cosine rule, for a point at
/// distance `a` from east and `b` from west, with poles `c` apart.
pub fn project(a: f64, b: f64, c: f64) -> f64 {
    (a * a + c * c - b * b) / (2.0 * c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Poles {
    pub east: usize,
    pub west: usize,
    pub c: f64,
}

/// Linear-time pole heuristic: east is the member furthest from a random
/// pivot, west the member furthest from east. Calls `dist` exactly
/// `2 * members.len()` times.
pub fn pick_poles_with<R, D>(members: &[usize], rng: &mut R, mut dist: D) -> Result<Poles>
where
    R: Rng,
    D: FnMut(usize, usize) -> f64,
{
    if members.len() < 2 {
        return Err(contract("pole selection needs at least two members"));
    }
    let pivot = members[rng.gen_range(0..members.len())];
    let furthest = |from: usize, dist: &mut D| {
        let mut best = (members[0], f64::NEG_INFINITY);
        for &m in members {
            let d = dist(from, m);
            if d > best.1 {
                best = (m, d);
            }
        }
        best
    };
    let (east, _) = furthest(pivot, &mut dist);
    let (west, c) = furthest(east, &mut dist);
    Ok(Poles { east, west, c })
}

pub fn pick_poles<R: Rng>(members: &[usize], m: &BitMatrix, rng: &mut R) -> Result<Poles> {
    pick_poles_with(members, rng, |i, j| row_distance(m, i, j))
}

/// Outcome of a median split.
#[derive(Clone, Debug, PartialEq)]
pub enum Split {
    /// Lower half by projected position (nearest east), upper half.
    Halves(Vec<usize>, Vec<usize>),
    /// The poles coincide; the node cannot be divided.
    Unsplittable,
}

/// Projects members onto the pole line and splits at the median. Ties in the
/// projection keep ascending member index order.
pub fn project_and_split(members: &[usize], poles: &Poles, m: &BitMatrix) -> Split {
    if members.len() < 2 || poles.c <= 0.0 {
        return Split::Unsplittable;
    }
    let mut xs: Vec<(f64, usize)> = members
        .iter()
        .map(|&i| {
            let a = row_distance(m, i, poles.east);
            let b = row_distance(m, i, poles.west);
            (project(a, b, poles.c), i)
        })
        .collect();
    xs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    let half = xs.len() / 2;
    let east = xs[..half].iter().map(|p| p.1).collect();
    let west = xs[half..].iter().map(|p| p.1).collect();
    Split::Halves(east, west)
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

/// Mean over columns of the base-2 entropy of each column's true/false
/// frequency among `members`.
pub fn node_entropy(m: &BitMatrix, members: &[usize]) -> f64 {
    if members.is_empty() || m.cols() == 0 {
        return 0.0;
    }
    let mut counts = vec![0u32; m.cols()];
    for &r in members {
        for (w, &word) in m.row(r).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                counts[w * 64 + t] += 1;
                bits &= bits - 1;
            }
        }
    }
    let n = members.len() as f64;
    counts.iter().map(|&k| binary_entropy(f64::from(k) / n)).sum::<f64>() / m.cols() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterNode {
    pub members: Vec<usize>,
    /// Poles of this node; a single-member node has east = west.
    pub east: usize,
    pub west: usize,
    pub c: f64,
    /// Root depth is 1.
    pub depth: usize,
    pub entropy: f64,
    pub parent: Option<usize>,
    /// Arena ids of the (east, west) children.
    pub children: Option<(usize, usize)>,
}

impl ClusterNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Recursive bi-cluster tree stored as an arena; node 0 is the root.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterTree {
    pub nodes: Vec<ClusterNode>,
}

impl ClusterTree {
    pub fn root(&self) -> &ClusterNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &ClusterNode {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_leaf()).count()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Ids of `id` and all its descendants.
    pub fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            if let Some((e, w)) = self.nodes[out[i]].children {
                out.push(e);
                out.push(w);
            }
            i += 1;
        }
        out
    }
}

/// Builds the tree over every row of `m`. Nodes with fewer than
/// `sqrt(rows)` members, or whose poles coincide, become leaves.
pub fn build_tree(m: &BitMatrix, seed: u64) -> Result<ClusterTree> {
    if m.rows() < 4 {
        return Err(contract("tree construction needs at least four candidates"));
    }
    let members: Vec<usize> = (0..m.rows()).collect();
    build_tree_over(m, members, seed)
}

/// Builds the tree over a subset of rows; the leaf threshold is the square
/// root of the subset size.
pub fn build_tree_over(m: &BitMatrix, members: Vec<usize>, seed: u64) -> Result<ClusterTree> {
    if members.is_empty() {
        return Err(contract("tree over an empty member set"));
    }
    let stop = (members.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<ClusterNode> = Vec::new();
    // depth-first, east child before west, so the RNG stream is fixed per seed
    let mut stack = vec![(members, 1usize, None::<usize>, None::<bool>)];
    while let Some((members, depth, parent, is_east)) = stack.pop() {
        let id = nodes.len();
        if let (Some(p), Some(east_side)) = (parent, is_east) {
            let slot = nodes[p].children.get_or_insert((usize::MAX, usize::MAX));
            if east_side {
                slot.0 = id;
            } else {
                slot.1 = id;
            }
        }
        let poles = if members.len() >= 2 {
            pick_poles(&members, m, &mut rng)?
        } else {
            Poles {
                east: members[0],
                west: members[0],
                c: 0.0,
            }
        };
        let entropy = node_entropy(m, &members);
        let split = if (members.len() as f64) < stop {
            Split::Unsplittable
        } else {
            project_and_split(&members, &poles, m)
        };
        nodes.push(ClusterNode {
            members,
            east: poles.east,
            west: poles.west,
            c: poles.c,
            depth,
            entropy,
            parent,
            children: None,
        });
        if let Split::Halves(east, west) = split {
            stack.push((west, depth + 1, Some(id), Some(false)));
            stack.push((east, depth + 1, Some(id), Some(true)));
        }
    }
    Ok(ClusterTree { nodes })
}
