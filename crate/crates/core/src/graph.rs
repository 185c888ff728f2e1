//! Attributed directed multigraphs and their disjoint-union batches.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} endpoint {index} out of range for {nodes} nodes")]
    IndexOutOfRange {
        edge: usize,
        index: usize,
        nodes: usize,
    },
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
}

/// Feature widths of a graph: node, edge and global attribute dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDims {
    pub node: usize,
    pub edge: usize,
    pub global: usize,
}

/// Directed multigraph with a feature vector on every node, every edge and
/// on the graph itself. Self-loops and parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "GraphRecord<T>",
    into = "GraphRecord<T>",
    bound = "T: Scalar"
)]
pub struct AttributedGraph<T: Scalar> {
    nodes: Matrix<T>,
    edges: Vec<(usize, usize)>,
    edge_attrs: Matrix<T>,
    globals: Vec<T>,
}

impl<T: Scalar> AttributedGraph<T> {
    /// Validating constructor from nested vectors. Dimensions are inferred
    /// from the first row; an empty list has dimension zero.
    pub fn new(
        node_attrs: Vec<Vec<T>>,
        edge_list: Vec<(usize, usize)>,
        edge_attrs: Vec<Vec<T>>,
        global_attrs: Vec<T>,
    ) -> Result<Self, GraphError> {
        let dv = node_attrs.first().map_or(0, Vec::len);
        let de = edge_attrs.first().map_or(0, Vec::len);
        let nodes = rows_to_matrix(&node_attrs, dv, "node attributes")?;
        let edge_attrs = rows_to_matrix(&edge_attrs, de, "edge attributes")?;
        Self::from_parts(nodes, edge_list, edge_attrs, global_attrs)
    }

    /// Validating constructor from dense attribute tables. Unlike [`new`],
    /// this keeps the declared widths even when a table has no rows.
    ///
    /// [`new`]: AttributedGraph::new
    pub fn from_parts(
        nodes: Matrix<T>,
        edges: Vec<(usize, usize)>,
        edge_attrs: Matrix<T>,
        globals: Vec<T>,
    ) -> Result<Self, GraphError> {
        if edge_attrs.rows() != edges.len() {
            return Err(GraphError::DimensionMismatch {
                what: "edge attribute count",
                expected: edges.len(),
                found: edge_attrs.rows(),
            });
        }
        let n = nodes.rows();
        for (k, &(s, r)) in edges.iter().enumerate() {
            for index in [s, r] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange {
                        edge: k,
                        index,
                        nodes: n,
                    });
                }
            }
        }
        Ok(Self {
            nodes,
            edges,
            edge_attrs,
            globals,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.rows()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn dims(&self) -> GraphDims {
        GraphDims {
            node: self.nodes.cols(),
            edge: self.edge_attrs.cols(),
            global: self.globals.len(),
        }
    }

    pub fn nodes(&self) -> &Matrix<T> {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_attrs(&self) -> &Matrix<T> {
        &self.edge_attrs
    }

    pub fn globals(&self) -> &[T] {
        &self.globals
    }

    /// Relabels nodes: node `i` moves to slot `perm[i]`, and every edge
    /// `(s, r)` becomes `(perm[s], perm[r])`. Edge storage order is kept.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self, GraphError> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(GraphError::InvalidPermutation(n));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(GraphError::InvalidPermutation(n));
            }
            seen[p] = true;
        }
        let mut nodes = Matrix::zeros(n, self.nodes.cols());
        for (i, &p) in perm.iter().enumerate() {
            nodes.row_mut(p).copy_from_slice(self.nodes.row(i));
        }
        let edges = self
            .edges
            .iter()
            .map(|&(s, r)| (perm[s], perm[r]))
            .collect();
        Ok(Self {
            nodes,
            edges,
            edge_attrs: self.edge_attrs.clone(),
            globals: self.globals.clone(),
        })
    }

    /// Returns a copy with the attribute tables replaced (topology kept).
    pub fn with_attrs(
        &self,
        nodes: Matrix<T>,
        edge_attrs: Matrix<T>,
        globals: Vec<T>,
    ) -> Result<Self, GraphError> {
        if nodes.rows() != self.node_count() {
            return Err(GraphError::DimensionMismatch {
                what: "node count",
                expected: self.node_count(),
                found: nodes.rows(),
            });
        }
        Self::from_parts(nodes, self.edges.clone(), edge_attrs, globals)
    }

    pub fn cast<U: Scalar>(&self) -> AttributedGraph<U> {
        AttributedGraph {
            nodes: self.nodes.cast(),
            edges: self.edges.clone(),
            edge_attrs: self.edge_attrs.cast(),
            globals: self.globals.iter().map(|&g| U::lit(g.as_f64())).collect(),
        }
    }
}

fn rows_to_matrix<T: Scalar>(
    rows: &[Vec<T>],
    width: usize,
    what: &'static str,
) -> Result<Matrix<T>, GraphError> {
    Matrix::from_rows(rows, width).map_err(|e| match e {
        crate::linalg::LinalgError::Ragged {
            expected, found, ..
        } => GraphError::DimensionMismatch {
            what,
            expected,
            found,
        },
        _ => unreachable!("from_rows only reports ragged rows"),
    })
}

/// JSON layout of a graph: `{"nodes": [[..]], "edges": [[s, r]],
/// "edge_attrs": [[..]], "global": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GraphRecord<T: Scalar> {
    pub nodes: Vec<Vec<T>>,
    pub edges: Vec<[usize; 2]>,
    pub edge_attrs: Vec<Vec<T>>,
    pub global: Vec<T>,
}

impl<T: Scalar> TryFrom<GraphRecord<T>> for AttributedGraph<T> {
    type Error = GraphError;

    fn try_from(rec: GraphRecord<T>) -> Result<Self, GraphError> {
        AttributedGraph::new(
            rec.nodes,
            rec.edges.into_iter().map(|[s, r]| (s, r)).collect(),
            rec.edge_attrs,
            rec.global,
        )
    }
}

impl<T: Scalar> From<AttributedGraph<T>> for GraphRecord<T> {
    fn from(g: AttributedGraph<T>) -> Self {
        GraphRecord {
            nodes: g.nodes.to_rows(),
            edges: g.edges.iter().map(|&(s, r)| [s, r]).collect(),
            edge_attrs: g.edge_attrs.to_rows(),
            global: g.globals,
        }
    }
}

/// Disjoint union of several graphs sharing one set of feature widths.
///
/// Nodes and edges are concatenated in input order; edge endpoints are
/// shifted by the number of nodes preceding their graph. Each node and edge
/// carries the index of the graph it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchedGraph<T: Scalar> {
    nodes: Matrix<T>,
    edges: Vec<(usize, usize)>,
    edge_attrs: Matrix<T>,
    globals: Matrix<T>,
    node_graph: Vec<usize>,
    edge_graph: Vec<usize>,
    node_offsets: Vec<usize>,
    edge_offsets: Vec<usize>,
}

impl<T: Scalar> BatchedGraph<T> {
    pub fn union<'a, I>(graphs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = &'a AttributedGraph<T>>,
    {
        let graphs: Vec<&AttributedGraph<T>> = graphs.into_iter().collect();
        let dims = graphs.first().map(|g| g.dims()).unwrap_or(GraphDims {
            node: 0,
            edge: 0,
            global: 0,
        });
        let total_nodes: usize = graphs.iter().map(|g| g.node_count()).sum();
        let total_edges: usize = graphs.iter().map(|g| g.edge_count()).sum();

        let mut nodes = Vec::with_capacity(total_nodes * dims.node);
        let mut edge_attrs = Vec::with_capacity(total_edges * dims.edge);
        let mut globals = Vec::with_capacity(graphs.len() * dims.global);
        let mut edges = Vec::with_capacity(total_edges);
        let mut node_graph = Vec::with_capacity(total_nodes);
        let mut edge_graph = Vec::with_capacity(total_edges);
        let mut node_offsets = vec![0];
        let mut edge_offsets = vec![0];

        for (b, g) in graphs.iter().enumerate() {
            let gd = g.dims();
            for (what, expected, found) in [
                ("node width", dims.node, gd.node),
                ("edge width", dims.edge, gd.edge),
                ("global width", dims.global, gd.global),
            ] {
                if expected != found {
                    return Err(GraphError::DimensionMismatch {
                        what,
                        expected,
                        found,
                    });
                }
            }
            let offset = *node_offsets.last().unwrap();
            nodes.extend_from_slice(g.nodes.as_slice());
            edge_attrs.extend_from_slice(g.edge_attrs.as_slice());
            globals.extend_from_slice(&g.globals);
            edges.extend(g.edges.iter().map(|&(s, r)| (s + offset, r + offset)));
            node_graph.extend(std::iter::repeat_n(b, g.node_count()));
            edge_graph.extend(std::iter::repeat_n(b, g.edge_count()));
            node_offsets.push(offset + g.node_count());
            edge_offsets.push(edge_offsets.last().unwrap() + g.edge_count());
        }

        Ok(Self {
            nodes: Matrix::from_vec(total_nodes, dims.node, nodes).expect("sized"),
            edges,
            edge_attrs: Matrix::from_vec(total_edges, dims.edge, edge_attrs).expect("sized"),
            globals: Matrix::from_vec(graphs.len(), dims.global, globals).expect("sized"),
            node_graph,
            edge_graph,
            node_offsets,
            edge_offsets,
        })
    }

    pub fn single(g: &AttributedGraph<T>) -> Self {
        Self::union(std::iter::once(g)).expect("one graph is always consistent")
    }

    /// Recovers the member graphs.
    pub fn split(&self) -> Vec<AttributedGraph<T>> {
        (0..self.graph_count())
            .map(|b| {
                let (n0, n1) = (self.node_offsets[b], self.node_offsets[b + 1]);
                let (e0, e1) = (self.edge_offsets[b], self.edge_offsets[b + 1]);
                let dv = self.nodes.cols();
                let de = self.edge_attrs.cols();
                AttributedGraph {
                    nodes: Matrix::from_vec(
                        n1 - n0,
                        dv,
                        self.nodes.as_slice()[n0 * dv..n1 * dv].to_vec(),
                    )
                    .expect("sized"),
                    edges: self.edges[e0..e1]
                        .iter()
                        .map(|&(s, r)| (s - n0, r - n0))
                        .collect(),
                    edge_attrs: Matrix::from_vec(
                        e1 - e0,
                        de,
                        self.edge_attrs.as_slice()[e0 * de..e1 * de].to_vec(),
                    )
                    .expect("sized"),
                    globals: self.globals.row(b).to_vec(),
                }
            })
            .collect()
    }

    pub fn graph_count(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn dims(&self) -> GraphDims {
        GraphDims {
            node: self.nodes.cols(),
            edge: self.edge_attrs.cols(),
            global: self.globals.cols(),
        }
    }

    pub fn nodes(&self) -> &Matrix<T> {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_attrs(&self) -> &Matrix<T> {
        &self.edge_attrs
    }

    /// One row of global attributes per member graph.
    pub fn globals(&self) -> &Matrix<T> {
        &self.globals
    }

    pub fn node_graph(&self) -> &[usize] {
        &self.node_graph
    }

    pub fn edge_graph(&self) -> &[usize] {
        &self.edge_graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_graph(n: usize) -> AttributedGraph<f64> {
        AttributedGraph::new(
            (0..n).map(|i| vec![i as f64, 1.0]).collect(),
            (0..n - 1).map(|i| (i, i + 1)).collect(),
            (0..n - 1).map(|i| vec![10.0 + i as f64]).collect(),
            vec![0.5],
        )
        .unwrap()
    }

    #[test]
    fn minimal_graph() {
        let g = AttributedGraph::new(vec![vec![0.0], vec![0.0]], vec![(0, 1)], vec![vec![1.0]], vec![])
            .unwrap();
        assert_eq!(
            g.dims(),
            GraphDims {
                node: 1,
                edge: 1,
                global: 0
            }
        );
    }

    #[test]
    fn endpoint_out_of_range() {
        let err = AttributedGraph::new(
            vec![vec![0.0]; 3],
            vec![(0, 5)],
            vec![vec![1.0]],
            vec![],
        )
        .unwrap_err();
        assert_eq!(
            err,
            GraphError::IndexOutOfRange {
                edge: 0,
                index: 5,
                nodes: 3
            }
        );
    }

    #[test]
    fn ragged_attributes_rejected() {
        let err = AttributedGraph::new(
            vec![vec![0.0, 1.0], vec![0.0]],
            vec![],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DimensionMismatch { .. }));

        let err = AttributedGraph::new(
            vec![vec![0.0]; 2],
            vec![(0, 1), (1, 0)],
            vec![vec![1.0]],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DimensionMismatch { .. }));
    }

    #[test]
    fn self_loops_and_parallel_edges_allowed() {
        let g = AttributedGraph::new(
            vec![vec![1.0]; 2],
            vec![(0, 0), (0, 1), (0, 1)],
            vec![vec![1.0]; 3],
            vec![],
        )
        .unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn transposition() {
        let g = AttributedGraph::new(
            vec![vec![1.0], vec![2.0]],
            vec![(0, 1)],
            vec![vec![7.0]],
            vec![],
        )
        .unwrap();
        let p = g.permute_nodes(&[1, 0]).unwrap();
        assert_eq!(p.edges(), &[(1, 0)]);
        assert_eq!(p.nodes().as_slice(), &[2.0, 1.0]);
        assert_eq!(g.permute_nodes(&[0, 1]).unwrap(), g);
    }

    #[test]
    fn invalid_permutations() {
        let g = line_graph(3);
        assert!(g.permute_nodes(&[0, 0, 1]).is_err());
        assert!(g.permute_nodes(&[0, 1]).is_err());
        assert!(g.permute_nodes(&[0, 1, 3]).is_err());
    }

    #[test]
    fn union_offsets() {
        let a = line_graph(3);
        let b = line_graph(3);
        let batch = BatchedGraph::union([&a, &b]).unwrap();
        assert_eq!(batch.nodes().rows(), 6);
        assert_eq!(batch.edges()[2], (3, 4));
        assert_eq!(batch.node_graph(), &[0, 0, 0, 1, 1, 1]);
        assert_eq!(batch.edge_graph(), &[0, 0, 1, 1]);
    }

    #[test]
    fn singleton_union() {
        let g = line_graph(4);
        let batch = BatchedGraph::single(&g);
        assert!(batch.node_graph().iter().all(|&b| b == 0));
        assert_eq!(batch.split(), vec![g]);
    }

    #[test]
    fn union_rejects_mixed_widths() {
        let a = line_graph(3);
        let b = AttributedGraph::new(vec![vec![1.0]], vec![], vec![], vec![]).unwrap();
        assert!(matches!(
            BatchedGraph::union([&a, &b]),
            Err(GraphError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_layout() {
        let g = AttributedGraph::new(
            vec![vec![1.0, 2.0]],
            vec![(0, 0)],
            vec![vec![3.0]],
            vec![4.0],
        )
        .unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"nodes":[[1.0,2.0]],"edges":[[0,0]],"edge_attrs":[[3.0]],"global":[4.0]}"#
        );
        let back: AttributedGraph<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"nodes":[[1.0]],"edges":[[0,3]],"edge_attrs":[[3.0]],"global":[]}"#;
        assert!(serde_json::from_str::<AttributedGraph<f64>>(bad).is_err());
    }
}
