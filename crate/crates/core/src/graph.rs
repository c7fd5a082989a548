//! Weighted graphs from edge lists, feature vectors, or images, with their
//! degree vectors and Laplacians.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

/// Undirected weighted graph: a symmetric nonnegative weight matrix plus the
/// node degrees. Construction rejects disconnected graphs and isolated
/// nodes; callers that want per-component processing split the input first.
#[derive(Clone, Debug)]
pub struct Graph<T> {
    w: SparseMatrix<T>,
    degrees: Vec<T>,
    n: usize,
}

impl<T: Scalar> Graph<T> {
    /// Wrap a symmetric nonnegative weight matrix, computing degrees and
    /// verifying connectivity.
    pub fn from_weight_matrix(w: SparseMatrix<T>) -> Result<Self> {
        let n = w.n_rows();
        if w.n_cols() != n {
            return Err(Error::dim("graph weights", w.n_rows(), w.n_cols()));
        }
        if !w.is_symmetric(T::real(1e-12).max(T::epsilon() * T::real(64.0))) {
            return Err(Error::NotSymmetric);
        }
        for i in 0..n {
            let (cols, vals) = w.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if v < T::zero() {
                    return Err(Error::NonPositiveWeight { i, j, w: v.as_f64() });
                }
            }
        }
        let degrees: Vec<T> = (0..n).map(|i| w.row(i).1.iter().copied().sum()).collect();
        if let Some(node) = degrees.iter().position(|&d| d <= T::zero()) {
            return Err(Error::IsolatedNode { node });
        }
        let components = count_components(&w);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(Self { w, degrees, n })
    }

    /// Build a graph from undirected edges `(i, j, w)`. Each edge is stored
    /// in both directions; duplicates are summed; self-loops are kept once
    /// and count toward the degree.
    pub fn from_edge_list(edges: &[(usize, usize, T)], n: usize) -> Result<Self> {
        let mut triplets = Vec::with_capacity(edges.len() * 2);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::EdgeOutOfRange { i, j, n });
            }
            if w <= T::zero() || !w.is_finite() {
                return Err(Error::NonPositiveWeight { i, j, w: w.as_f64() });
            }
            triplets.push((i, j, w));
            if i != j {
                triplets.push((j, i, w));
            }
        }
        let w = SparseMatrix::from_triplets(n, n, triplets)?;
        Self::from_weight_matrix(w)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weights(&self) -> &SparseMatrix<T> {
        &self.w
    }

    #[inline]
    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }
}

/// Breadth-first count of connected components over the sparsity pattern.
fn count_components<T: Scalar>(w: &SparseMatrix<T>) -> usize {
    let n = w.n_rows();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut queue = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push(start);
        while let Some(u) = queue.pop() {
            let (cols, _) = w.row(u);
            for &v in cols {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
    }
    components
}

/// Points in feature space, one row per node.
#[derive(Clone, Debug)]
pub struct FeatureSet<T> {
    n: usize,
    d: usize,
    points: Vec<T>,
}

impl<T: Scalar> FeatureSet<T> {
    pub fn new(n: usize, d: usize, points: Vec<T>) -> Result<Self> {
        if points.len() != n * d {
            return Err(Error::dim("feature set", points.len(), n * d));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "feature set" });
        }
        Ok(Self { n, d, points })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.d..(i + 1) * self.d]
    }
}

/// Gaussian similarity `exp(-||x_i - x_j||^2 / (2 sigma^2))`.
pub fn gaussian_weight<T: Scalar>(x_i: &[T], x_j: &[T], sigma: T) -> T {
    assert!(sigma > T::zero(), "sigma must be positive");
    assert_eq!(x_i.len(), x_j.len(), "feature dimension mismatch");
    let d2: T = x_i
        .iter()
        .zip(x_j)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    (-d2 / (T::real(2.0) * sigma * sigma)).exp()
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

// ---------------------------------------------------------------------------
// exact k-NN via a KD-tree (desk scale; no approximate search)

struct KdNode {
    // leaves hold point index ranges; internal nodes split on one dimension
    split_dim: usize,
    split_val: f64,
    left: usize,
    right: usize,
    start: usize,
    end: usize,
}

struct KdTree<'a, T> {
    features: &'a FeatureSet<T>,
    nodes: Vec<KdNode>,
    indices: Vec<usize>,
}

const KD_LEAF_SIZE: usize = 16;

impl<'a, T: Scalar> KdTree<'a, T> {
    fn build(features: &'a FeatureSet<T>) -> Self {
        let mut indices: Vec<usize> = (0..features.n()).collect();
        let mut nodes = Vec::new();
        Self::build_rec(features, &mut indices, &mut nodes, 0);
        Self { features, nodes, indices }
    }

    fn build_rec(
        features: &FeatureSet<T>,
        indices: &mut [usize],
        nodes: &mut Vec<KdNode>,
        offset: usize,
    ) -> usize {
        let len = indices.len();
        let id = nodes.len();
        nodes.push(KdNode {
            split_dim: 0,
            split_val: 0.0,
            left: usize::MAX,
            right: usize::MAX,
            start: offset,
            end: offset + len,
        });
        if len <= KD_LEAF_SIZE {
            return id;
        }
        // split on the dimension with the widest spread
        let d = features.d();
        let mut best_dim = 0;
        let mut best_spread = -1.0f64;
        for dim in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &p in indices.iter() {
                let v = features.point(p)[dim].as_f64();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_dim = dim;
            }
        }
        let mid = len / 2;
        indices.select_nth_unstable_by(mid, |&a, &b| {
            let va = features.point(a)[best_dim].as_f64();
            let vb = features.point(b)[best_dim].as_f64();
            (va, a).partial_cmp(&(vb, b)).unwrap()
        });
        let split_val = features.point(indices[mid])[best_dim].as_f64();
        let (left_slice, right_slice) = indices.split_at_mut(mid);
        let left = Self::build_rec(features, left_slice, nodes, offset);
        let right = Self::build_rec(features, right_slice, nodes, offset + mid);
        let node = &mut nodes[id];
        node.split_dim = best_dim;
        node.split_val = split_val;
        node.left = left;
        node.right = right;
        id
    }

    /// Indices of the `k` nearest neighbors of `query` (excluding `query`),
    /// ties broken by lower index.
    fn k_nearest(&self, query: usize, k: usize) -> Vec<usize> {
        // bounded "worst candidate" list kept sorted by (distance, index)
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let q = self.features.point(query);
        self.search(0, query, q, k, &mut heap);
        heap.into_iter().map(|(_, i)| i).collect()
    }

    fn search(&self, node_id: usize, query: usize, q: &[T], k: usize, heap: &mut Vec<(f64, usize)>) {
        let node = &self.nodes[node_id];
        if node.left == usize::MAX {
            for &p in &self.indices[node.start..node.end] {
                if p == query {
                    continue;
                }
                let d2 = squared_distance(q, self.features.point(p)).as_f64();
                let cand = (d2, p);
                if heap.len() < k {
                    let pos = heap.partition_point(|&e| e < cand);
                    heap.insert(pos, cand);
                } else if cand < heap[k - 1] {
                    heap.pop();
                    let pos = heap.partition_point(|&e| e < cand);
                    heap.insert(pos, cand);
                }
            }
            return;
        }
        let qv = q[node.split_dim].as_f64();
        let (near, far) = if qv <= node.split_val {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, query, q, k, heap);
        let plane = qv - node.split_val;
        let plane_d2 = plane * plane;
        if heap.len() < k || plane_d2 <= heap[heap.len() - 1].0 {
            self.search(far, query, q, k, heap);
        }
    }
}

/// Sparse Gaussian similarity graph: each node is linked to its `k` exact
/// nearest neighbors (Euclidean) and the edge set is symmetrized by keeping
/// an edge if either endpoint selected the other (weights are symmetric, so
/// this equals the max-symmetrization).
pub fn knn_gaussian_graph<T: Scalar>(
    features: &FeatureSet<T>,
    k: usize,
    sigma: T,
) -> Result<Graph<T>> {
    let n = features.n();
    if k == 0 || k >= n {
        return Err(Error::param("k", format!("need 1 <= k < n = {n}, got {k}")));
    }
    if sigma <= T::zero() {
        return Err(Error::param("sigma", "must be positive"));
    }
    let tree = KdTree::build(features);
    let neighbor_lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| tree.k_nearest(i, k))
        .collect();

    let mut edges: HashMap<(usize, usize), T> = HashMap::new();
    for (i, neighbors) in neighbor_lists.iter().enumerate() {
        for &j in neighbors {
            let key = (i.min(j), i.max(j));
            edges.entry(key).or_insert_with(|| {
                gaussian_weight(features.point(key.0), features.point(key.1), sigma)
            });
        }
    }
    let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(edges.len() * 2);
    for (&(i, j), &w) in &edges {
        triplets.push((i, j, w));
        triplets.push((j, i, w));
    }
    let w = SparseMatrix::from_triplets(n, n, triplets)?;
    match Graph::from_weight_matrix(w) {
        Ok(g) => Ok(g),
        Err(Error::Disconnected { components }) => Err(Error::KnnDisconnected { k, components }),
        Err(e) => Err(e),
    }
}

/// Symmetric normalized Laplacian `I - D^{-1/2} W D^{-1/2}`.
///
/// Symmetric positive semidefinite with spectrum in [0, 2].
pub fn sym_normalized_laplacian<T: Scalar>(g: &Graph<T>) -> SparseMatrix<T> {
    let n = g.n();
    let inv_sqrt: Vec<T> = g.degrees().iter().map(|&d| T::one() / d.sqrt()).collect();
    let mut triplets = Vec::with_capacity(g.weights().nnz() + n);
    for i in 0..n {
        let (cols, vals) = g.weights().row(i);
        let mut diag = T::one();
        for (&j, &w) in cols.iter().zip(vals) {
            if j == i {
                diag -= w * inv_sqrt[i] * inv_sqrt[i];
            } else {
                triplets.push((i, j, -w * inv_sqrt[i] * inv_sqrt[j]));
            }
        }
        triplets.push((i, i, diag));
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("laplacian triplets in range")
}

/// Combinatorial Laplacian `D - W`; rows sum to zero.
pub fn combinatorial_laplacian<T: Scalar>(g: &Graph<T>) -> SparseMatrix<T> {
    let n = g.n();
    let mut triplets = Vec::with_capacity(g.weights().nnz() + n);
    for i in 0..n {
        let (cols, vals) = g.weights().row(i);
        let mut diag = g.degrees()[i];
        for (&j, &w) in cols.iter().zip(vals) {
            if j == i {
                diag -= w;
            } else {
                triplets.push((i, j, -w));
            }
        }
        triplets.push((i, i, diag));
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("laplacian triplets in range")
}

/// Random walk Laplacian `I - D^{-1} W`; generally nonsymmetric.
pub fn random_walk_laplacian<T: Scalar>(g: &Graph<T>) -> SparseMatrix<T> {
    let n = g.n();
    let mut triplets = Vec::with_capacity(g.weights().nnz() + n);
    for i in 0..n {
        let inv_d = T::one() / g.degrees()[i];
        let (cols, vals) = g.weights().row(i);
        let mut diag = T::one();
        for (&j, &w) in cols.iter().zip(vals) {
            if j == i {
                diag -= w * inv_d;
            } else {
                triplets.push((i, j, -w * inv_d));
            }
        }
        triplets.push((i, i, diag));
    }
    SparseMatrix::from_triplets(n, n, triplets).expect("laplacian triplets in range")
}
