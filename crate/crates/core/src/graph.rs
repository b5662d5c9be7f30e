//! Undirected weighted communication graphs and their Laplacians.

use std::collections::{BTreeSet, VecDeque};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numkernel::{symmetric_eig, DenseMatrix};

/// Eigenvalues within this distance of zero count as zero.
pub const ZERO_EIGENVALUE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected graph over agents `0..n_agents`. Edges are stored with `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    n_agents: usize,
    edges: Vec<Edge>,
}

impl Topology {
    /// Validates and normalizes an edge list. `(j, i, w)` is accepted and stored as `(i, j, w)`.
    pub fn new(n_agents: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidTopology("graph needs at least one agent".into()));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, weight) in edges {
            if a == b {
                return Err(Error::InvalidTopology(format!("self-loop at agent {a}")));
            }
            if a >= n_agents || b >= n_agents {
                return Err(Error::InvalidTopology(format!(
                    "edge ({a}, {b}) references an agent outside 0..{n_agents}"
                )));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidTopology(format!(
                    "edge ({a}, {b}) has non-positive weight {weight}"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((i, j)) {
                return Err(Error::InvalidTopology(format!("duplicate edge ({i}, {j})")));
            }
            out.push(Edge { i, j, weight });
        }
        Ok(Self { n_agents, edges: out })
    }

    /// Unit-weight cycle `0 - 1 - ... - (n-1) - 0`; needs `n >= 3`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidTopology(format!(
                "a ring needs at least 3 agents, got {n}"
            )));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
    }

    /// Unit-weight path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i, 1.0)))
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `agent` with their edge weights, in ascending index order.
    pub fn neighbors(&self, agent: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.i == agent {
                    Some((e.j, e.weight))
                } else if e.j == agent {
                    Some((e.i, e.weight))
                } else {
                    None
                }
            })
            .collect();
        out.sort_by_key(|&(j, _)| j);
        out
    }

    /// Breadth-first reachability from agent 0.
    pub fn is_connected(&self) -> bool {
        let mut adjacency = vec![Vec::new(); self.n_agents];
        for e in &self.edges {
            adjacency[e.i].push(e.j);
            adjacency[e.j].push(e.i);
        }
        let mut visited = vec![false; self.n_agents];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        visited.iter().all(|&v| v)
    }
}

/// Graph Laplacian `L = D - A` with lazily computed spectrum.
#[derive(Debug)]
pub struct LaplacianView {
    matrix: DenseMatrix,
    spectrum: OnceLock<Vec<f64>>,
}

impl Clone for LaplacianView {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            matrix: self.matrix.clone(),
            spectrum,
        }
    }
}

/// `l_ij = -a_ij` off the diagonal, `l_ii = sum_j a_ij`.
pub fn build_laplacian(topology: &Topology) -> LaplacianView {
    let n = topology.n_agents();
    let mut l = DenseMatrix::zeros(n, n);
    for e in topology.edges() {
        l[(e.i, e.j)] = -e.weight;
        l[(e.j, e.i)] = -e.weight;
        l[(e.i, e.i)] += e.weight;
        l[(e.j, e.j)] += e.weight;
    }
    LaplacianView {
        matrix: l,
        spectrum: OnceLock::new(),
    }
}

impl LaplacianView {
    /// Wraps an explicit matrix after checking the Laplacian sign and row-sum structure.
    pub fn from_matrix(matrix: DenseMatrix) -> Result<Self> {
        let asym = matrix.asymmetry();
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        let n = matrix.rows();
        for i in 0..n {
            let row = matrix.row(i);
            let sum: f64 = row.iter().sum();
            let scale = row.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if sum.abs() > 1e-12 * scale {
                return Err(Error::InvalidTopology(format!("Laplacian row {i} sums to {sum}")));
            }
            if row.iter().enumerate().any(|(j, &v)| j != i && v > 0.0) {
                return Err(Error::InvalidTopology(format!(
                    "Laplacian row {i} has a positive off-diagonal entry"
                )));
            }
        }
        Ok(Self {
            matrix,
            spectrum: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// All eigenvalues, ascending. Computed once and cached.
    pub fn spectrum(&self) -> Result<&[f64]> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let eig = symmetric_eig(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| eig))
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(*self.spectrum()?.last().expect("non-empty graph"))
    }

    /// Number of eigenvalues in `[-tol, tol]`; equals the number of connected components.
    pub fn zero_eigenvalue_count(&self) -> Result<usize> {
        Ok(self
            .spectrum()?
            .iter()
            .filter(|v| v.abs() <= ZERO_EIGENVALUE_TOLERANCE)
            .count())
    }

    /// `(L ⊗ I_q) X` for an `n × q` stacked matrix `X`, accumulated over `j` in index order.
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.rows(), self.n(), "Laplacian apply row mismatch");
        let mut out = DenseMatrix::zeros(x.rows(), x.cols());
        for i in 0..self.n() {
            for c in 0..x.cols() {
                let mut acc = 0.0;
                for j in 0..self.n() {
                    acc += self.matrix[(i, j)] * x[(j, c)];
                }
                out[(i, c)] = acc;
            }
        }
        out
    }
}

/// Free-function form of [`LaplacianView::spectrum`].
pub fn laplacian_spectrum(lap: &LaplacianView) -> Result<Vec<f64>> {
    lap.spectrum().map(<[f64]>::to_vec)
}

/// The admissible step-size bound `min(1/(2 λ_max), 3/(2 L))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSizeBound {
    pub lambda_max: f64,
    pub lipschitz: f64,
    pub bound: f64,
}

impl StepSizeBound {
    /// True iff `0 < beta < bound` (strict on both sides).
    pub fn admits(&self, beta: f64) -> bool {
        beta > 0.0 && beta < self.bound
    }
}

pub fn max_step_size(lap: &LaplacianView, lipschitz: f64) -> Result<StepSizeBound> {
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::InvalidStepSize(format!(
            "Lipschitz constant must be positive, got {lipschitz}"
        )));
    }
    let lambda_max = lap.lambda_max()?;
    if lambda_max <= ZERO_EIGENVALUE_TOLERANCE {
        return Err(Error::EdgelessGraph);
    }
    let bound = (1.0 / (2.0 * lambda_max)).min(3.0 / (2.0 * lipschitz));
    Ok(StepSizeBound {
        lambda_max,
        lipschitz,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn two_node_path_laplacian() {
        let lap = build_laplacian(&Topology::path(2).unwrap());
        assert_eq!(lap.matrix().to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let eig = laplacian_spectrum(&lap).unwrap();
        assert!(eig[0].abs() < 1e-12 && (eig[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn four_ring_laplacian() {
        let lap = build_laplacian(&Topology::ring(4).unwrap());
        let expected = vec![
            vec![2.0, -1.0, 0.0, -1.0],
            vec![-1.0, 2.0, -1.0, 0.0],
            vec![0.0, -1.0, 2.0, -1.0],
            vec![-1.0, 0.0, -1.0, 2.0],
        ];
        assert_eq!(lap.matrix().to_rows(), expected);
        let eig = laplacian_spectrum(&lap).unwrap();
        for (got, want) in eig.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn ten_ring_laplacian() {
        let lap = build_laplacian(&Topology::ring(10).unwrap());
        for i in 0..10 {
            assert_eq!(lap.entry(i, i), 2.0);
            assert_eq!(lap.matrix().row(i).iter().sum::<f64>(), 0.0);
        }
        assert!((lap.lambda_max().unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn connectivity() {
        assert!(Topology::path(2).unwrap().is_connected());
        assert!(Topology::ring(4).unwrap().is_connected());
        let split = Topology::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(!split.is_connected());
        assert_eq!(build_laplacian(&split).zero_eigenvalue_count().unwrap(), 2);
    }

    #[test]
    fn topology_rejects_bad_edges() {
        assert!(Topology::new(3, [(1, 1, 1.0)]).is_err());
        assert!(Topology::new(3, [(0, 1, 0.0)]).is_err());
        assert!(Topology::new(3, [(0, 1, -1.0)]).is_err());
        assert!(Topology::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(Topology::new(3, [(0, 3, 1.0)]).is_err());
        assert!(Topology::new(0, []).is_err());
    }

    #[test]
    fn edges_are_normalized() {
        let t = Topology::new(3, [(2, 0, 0.5)]).unwrap();
        assert_eq!(
            t.edges()[0],
            Edge {
                i: 0,
                j: 2,
                weight: 0.5
            }
        );
        assert_eq!(t.neighbors(0), vec![(2, 0.5)]);
    }

    #[test]
    fn from_matrix_rejects_non_laplacians() {
        let asym = DenseMatrix::from_rows(&[[1.0, -1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(LaplacianView::from_matrix(asym), Err(Error::NotSymmetric(_))));
        let bad_sum = DenseMatrix::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]).unwrap();
        assert!(LaplacianView::from_matrix(bad_sum).is_err());
    }

    #[test]
    fn step_size_bounds() {
        let ring4 = build_laplacian(&Topology::ring(4).unwrap());
        let b = max_step_size(&ring4, 2.0).unwrap();
        assert!((b.bound - 0.125).abs() < 1e-9);
        assert!(b.admits(0.05));
        assert!(!b.admits(0.125 + 1e-6));
        assert!(!b.admits(0.0));

        let path2 = build_laplacian(&Topology::path(2).unwrap());
        assert!((max_step_size(&path2, 2.0).unwrap().bound - 0.25).abs() < 1e-9);

        // the Lipschitz term binds when the graph is sparse enough
        let b = max_step_size(&path2, 20.0).unwrap();
        assert!((b.bound - 0.075).abs() < 1e-12);
    }

    #[test]
    fn step_size_errors() {
        let lonely = build_laplacian(&Topology::new(1, []).unwrap());
        assert!(matches!(max_step_size(&lonely, 2.0), Err(Error::EdgelessGraph)));
        let ring = build_laplacian(&Topology::ring(3).unwrap());
        assert!(max_step_size(&ring, 0.0).is_err());
    }

    #[test]
    fn ring_spectra_match_cycle_formula() {
        for n in 3..=12 {
            let eig = laplacian_spectrum(&build_laplacian(&Topology::ring(n).unwrap())).unwrap();
            let mut analytic: Vec<f64> = (0..n)
                .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos())
                .collect();
            analytic.sort_by(|a, b| a.total_cmp(b));
            for (got, want) in eig.iter().zip(&analytic) {
                assert!((got - want).abs() < 1e-8, "n={n}");
            }
        }
    }

    fn arb_topology() -> impl Strategy<Value = Topology> {
        (2usize..9).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let m = pairs.len();
            (
                Just(n),
                Just(pairs),
                proptest::collection::vec(proptest::option::of(0.1f64..5.0), m),
            )
                .prop_map(|(n, pairs, weights)| {
                    let edges = pairs
                        .into_iter()
                        .zip(weights)
                        .filter_map(|((i, j), w)| w.map(|w| (i, j, w)));
                    Topology::new(n, edges).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn laplacian_invariants(t in arb_topology()) {
            let lap = build_laplacian(&t);
            let ones = vec![1.0; t.n_agents()];
            let l1 = lap.matrix().mul_vec(&ones);
            prop_assert!(l1.iter().all(|v| v.abs() < 1e-12));
            prop_assert_eq!(lap.matrix().asymmetry(), 0.0);
            for i in 0..t.n_agents() {
                prop_assert!(lap.entry(i, i) >= 0.0);
                for j in 0..t.n_agents() {
                    if i != j { prop_assert!(lap.entry(i, j) <= 0.0); }
                }
            }
            let eig = lap.spectrum().unwrap();
            prop_assert!(eig[0].abs() < 1e-8);
            prop_assert!(eig.iter().all(|&v| v > -1e-8));
            if t.is_connected() {
                prop_assert_eq!(lap.zero_eigenvalue_count().unwrap(), 1);
            } else {
                prop_assert!(lap.zero_eigenvalue_count().unwrap() > 1);
            }
        }
    }
}
