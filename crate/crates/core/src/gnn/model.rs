//! Computation blocks (edge, node and global updates) and their
//! composition into a graph regression model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::aggregate::Aggregator;
use super::mlp::{Activation, Mlp, MlpCache};
use super::GnnError;
use crate::graph::{AttributedGraph, BatchedGraph, GraphDims};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Hidden and output widths of one network; the input width follows from
/// the block wiring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub hidden: Vec<usize>,
    pub output: usize,
}

impl MlpShape {
    pub fn new(hidden: &[usize], output: usize) -> Self {
        Self {
            hidden: hidden.to_vec(),
            output,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub edge: Option<MlpShape>,
    pub node: Option<MlpShape>,
    pub global: Option<MlpShape>,
}

/// Layer widths of every network of every block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub blocks: Vec<BlockShape>,
}

fn shape(hidden: &[usize], output: usize) -> Option<MlpShape> {
    Some(MlpShape::new(hidden, output))
}

impl Architecture {
    /// Three blocks tuned for the mean aggregator on single-material trusses.
    pub fn mean_reference() -> Self {
        Self {
            blocks: vec![
                BlockShape {
                    edge: shape(&[64], 32),
                    node: shape(&[72], 50),
                    global: None,
                },
                BlockShape {
                    edge: shape(&[80], 50),
                    node: shape(&[100], 70),
                    global: shape(&[200], 100),
                },
                BlockShape {
                    edge: shape(&[180], 80),
                    node: shape(&[300], 72),
                    global: shape(&[300, 72], 1),
                },
            ],
        }
    }

    /// Three blocks tuned for the mean-variance aggregator on
    /// single-material trusses.
    pub fn mean_var_reference() -> Self {
        let mut a = Self::mean_reference();
        a.blocks[2].global = shape(&[450, 150], 1);
        a
    }

    /// Three blocks for two member materials with a temperature global.
    pub fn thermal_reference() -> Self {
        Self {
            blocks: vec![
                BlockShape {
                    edge: shape(&[100], 64),
                    node: shape(&[120], 85),
                    global: shape(&[120], 85),
                },
                BlockShape {
                    edge: shape(&[100], 64),
                    node: shape(&[200], 100),
                    global: shape(&[200], 100),
                },
                BlockShape {
                    edge: shape(&[250], 120),
                    node: shape(&[450], 150),
                    global: shape(&[450, 150], 1),
                },
            ],
        }
    }

    /// Divides every width by `divisor`, never going below `min_width`.
    /// Unit outputs stay unit.
    pub fn scaled(&self, divisor: usize, min_width: usize) -> Self {
        let f = |w: usize| if w == 1 { 1 } else { (w / divisor).max(min_width) };
        let g = |s: &Option<MlpShape>| {
            s.as_ref().map(|s| MlpShape {
                hidden: s.hidden.iter().map(|&w| f(w)).collect(),
                output: f(s.output),
            })
        };
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockShape {
                    edge: g(&b.edge),
                    node: g(&b.node),
                    global: g(&b.global),
                })
                .collect(),
        }
    }

    /// Quarter-width variant used for desk-scale runs.
    pub fn desk(&self) -> Self {
        self.scaled(4, 8)
    }
}

/// Connectivity of a (batched) graph as the blocks consume it.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub senders: Vec<usize>,
    pub receivers: Vec<usize>,
    pub node_graph: Vec<usize>,
    pub edge_graph: Vec<usize>,
    pub n_graphs: usize,
}

impl Topology {
    pub fn of<T: Scalar>(g: &BatchedGraph<T>) -> Self {
        Self {
            senders: g.edges().iter().map(|e| e.0).collect(),
            receivers: g.edges().iter().map(|e| e.1).collect(),
            node_graph: g.node_graph().to_vec(),
            edge_graph: g.edge_graph().to_vec(),
            n_graphs: g.graph_count(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_graph.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_graph.len()
    }
}

/// Node, edge and global attribute tables flowing between blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState<T> {
    pub nodes: Matrix<T>,
    pub edges: Matrix<T>,
    pub globals: Matrix<T>,
}

impl<T: Scalar> GraphState<T> {
    pub fn of(g: &BatchedGraph<T>) -> Self {
        Self {
            nodes: g.nodes().clone(),
            edges: g.edge_attrs().clone(),
            globals: g.globals().clone(),
        }
    }

    pub fn dims(&self) -> GraphDims {
        GraphDims {
            node: self.nodes.cols(),
            edge: self.edges.cols(),
            global: self.globals.cols(),
        }
    }
}

/// One edge → node → global pass. Absent networks pass their attributes
/// through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GnBlock<T: Scalar> {
    pub edge: Option<Mlp<T>>,
    pub node: Option<Mlp<T>>,
    pub global: Option<Mlp<T>>,
    pub aggregator: Aggregator,
}

/// Forward values of one block needed by its reverse pass.
#[derive(Debug, Clone)]
pub struct BlockTape<T> {
    input_dims: GraphDims,
    edges_out: Matrix<T>,
    nodes_out: Matrix<T>,
    received: Matrix<T>,
    edge_summary: Matrix<T>,
    node_summary: Matrix<T>,
    edge_cache: Option<MlpCache<T>>,
    node_cache: Option<MlpCache<T>>,
    global_cache: Option<MlpCache<T>>,
}

fn concat_rows<T: Scalar>(rows: usize, parts: &[(&Matrix<T>, &dyn Fn(usize) -> usize)]) -> Matrix<T> {
    let width: usize = parts.iter().map(|(m, _)| m.cols()).sum();
    let mut out = Matrix::zeros(rows, width);
    for r in 0..rows {
        let dst = out.row_mut(r);
        let mut c = 0;
        for (m, pick) in parts {
            let w = m.cols();
            dst[c..c + w].copy_from_slice(m.row(pick(r)));
            c += w;
        }
    }
    out
}

fn add_rows<T: Scalar>(dst: &mut Matrix<T>, dst_row: usize, src: &[T]) {
    for (d, &s) in dst.row_mut(dst_row).iter_mut().zip(src) {
        *d += s;
    }
}

fn add_matrix<T: Scalar>(dst: &mut Matrix<T>, src: &Matrix<T>) {
    for (d, &s) in dst.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *d += s;
    }
}

fn columns<T: Scalar>(m: &Matrix<T>, from: usize, width: usize) -> Matrix<T> {
    let mut out = Matrix::zeros(m.rows(), width);
    for r in 0..m.rows() {
        out.row_mut(r).copy_from_slice(&m.row(r)[from..from + width]);
    }
    out
}

fn check_width(what: &'static str, expected: usize, found: usize) -> Result<(), GnnError> {
    if expected == found {
        Ok(())
    } else {
        Err(GnnError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

impl<T: Scalar> GnBlock<T> {
    /// Builds a block whose networks accept `input` and have the widths in
    /// `shape`.
    pub fn init<R: Rng + ?Sized>(
        input: GraphDims,
        shape: &BlockShape,
        aggregator: Aggregator,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self, GnnError> {
        let sizes = |n_in: usize, s: &MlpShape| {
            let mut v = vec![n_in];
            v.extend_from_slice(&s.hidden);
            v.push(s.output);
            v
        };
        let edge_in = input.edge + 2 * input.node + input.global;
        let edge = match &shape.edge {
            Some(s) => Some(Mlp::init(sizes(edge_in, s), activation, rng)?),
            None => None,
        };
        let de = edge.as_ref().map_or(input.edge, |m| m.output_dim());
        let node_in = aggregator.output_dim(de) + input.node + input.global;
        let node = match &shape.node {
            Some(s) => Some(Mlp::init(sizes(node_in, s), activation, rng)?),
            None => None,
        };
        let dv = node.as_ref().map_or(input.node, |m| m.output_dim());
        let global_in = aggregator.output_dim(de) + aggregator.output_dim(dv) + input.global;
        let global = match &shape.global {
            Some(s) => Some(Mlp::init(sizes(global_in, s), activation, rng)?),
            None => None,
        };
        Ok(Self {
            edge,
            node,
            global,
            aggregator,
        })
    }

    /// Checks the wiring against `input` and returns the output widths.
    pub fn output_dims(&self, input: GraphDims) -> Result<GraphDims, GnnError> {
        let agg = |d| self.aggregator.output_dim(d);
        if let Some(m) = &self.edge {
            check_width("edge network input", input.edge + 2 * input.node + input.global, m.input_dim())?;
        }
        let de = self.edge.as_ref().map_or(input.edge, |m| m.output_dim());
        if let Some(m) = &self.node {
            check_width("node network input", agg(de) + input.node + input.global, m.input_dim())?;
        }
        let dv = self.node.as_ref().map_or(input.node, |m| m.output_dim());
        if let Some(m) = &self.global {
            check_width("global network input", agg(de) + agg(dv) + input.global, m.input_dim())?;
        }
        let du = self.global.as_ref().map_or(input.global, |m| m.output_dim());
        Ok(GraphDims {
            node: dv,
            edge: de,
            global: du,
        })
    }

    pub fn param_count(&self) -> usize {
        self.mlps().map(|m| m.param_count()).sum()
    }

    /// Present networks in parameter order: edge, node, global.
    pub fn mlps(&self) -> impl Iterator<Item = &Mlp<T>> {
        [&self.edge, &self.node, &self.global].into_iter().flatten()
    }

    pub fn mlps_mut(&mut self) -> impl Iterator<Item = &mut Mlp<T>> {
        [&mut self.edge, &mut self.node, &mut self.global]
            .into_iter()
            .flatten()
    }

    /// `e′ₖ = φᵉ(eₖ, v_sender, v_receiver, u)` for every edge.
    pub fn edge_update(
        &self,
        topo: &Topology,
        state: &GraphState<T>,
    ) -> Result<(Matrix<T>, Option<MlpCache<T>>), GnnError> {
        let Some(mlp) = &self.edge else {
            return Ok((state.edges.clone(), None));
        };
        let x = concat_rows(
            topo.edge_count(),
            &[
                (&state.edges, &|k| k),
                (&state.nodes, &|k| topo.senders[k]),
                (&state.nodes, &|k| topo.receivers[k]),
                (&state.globals, &|k| topo.edge_graph[k]),
            ],
        );
        let (y, cache) = mlp.forward_batch(&x)?;
        Ok((y, Some(cache)))
    }

    /// `v′ = φᵛ(ρ(incoming e′), v, u)`; returns the new nodes and the
    /// per-node aggregate of incoming edges.
    pub fn node_update(
        &self,
        topo: &Topology,
        state: &GraphState<T>,
        edges_out: &Matrix<T>,
    ) -> Result<(Matrix<T>, Matrix<T>, Option<MlpCache<T>>), GnnError> {
        let received = self
            .aggregator
            .segments(edges_out, &topo.receivers, topo.node_count());
        let Some(mlp) = &self.node else {
            return Ok((state.nodes.clone(), received, None));
        };
        let x = concat_rows(
            topo.node_count(),
            &[
                (&received, &|n| n),
                (&state.nodes, &|n| n),
                (&state.globals, &|n| topo.node_graph[n]),
            ],
        );
        let (y, cache) = mlp.forward_batch(&x)?;
        Ok((y, received, Some(cache)))
    }

    /// `u′ = φᵘ(ρ(E′), ρ(V′), u)` per member graph; returns the new globals
    /// and both summaries.
    #[allow(clippy::type_complexity)]
    pub fn global_update(
        &self,
        topo: &Topology,
        state: &GraphState<T>,
        edges_out: &Matrix<T>,
        nodes_out: &Matrix<T>,
    ) -> Result<(Matrix<T>, Matrix<T>, Matrix<T>, Option<MlpCache<T>>), GnnError> {
        let edge_summary = self
            .aggregator
            .segments(edges_out, &topo.edge_graph, topo.n_graphs);
        let node_summary = self
            .aggregator
            .segments(nodes_out, &topo.node_graph, topo.n_graphs);
        let Some(mlp) = &self.global else {
            return Ok((state.globals.clone(), edge_summary, node_summary, None));
        };
        let x = concat_rows(
            topo.n_graphs,
            &[
                (&edge_summary, &|b| b),
                (&node_summary, &|b| b),
                (&state.globals, &|b| b),
            ],
        );
        let (y, cache) = mlp.forward_batch(&x)?;
        Ok((y, edge_summary, node_summary, Some(cache)))
    }

    pub fn forward(
        &self,
        topo: &Topology,
        state: &GraphState<T>,
    ) -> Result<(GraphState<T>, BlockTape<T>), GnnError> {
        let input_dims = state.dims();
        self.output_dims(input_dims)?;
        let (edges_out, edge_cache) = self.edge_update(topo, state)?;
        let (nodes_out, received, node_cache) = self.node_update(topo, state, &edges_out)?;
        let (globals_out, edge_summary, node_summary, global_cache) =
            self.global_update(topo, state, &edges_out, &nodes_out)?;
        let next = GraphState {
            nodes: nodes_out.clone(),
            edges: edges_out.clone(),
            globals: globals_out,
        };
        Ok((
            next,
            BlockTape {
                input_dims,
                edges_out,
                nodes_out,
                received,
                edge_summary,
                node_summary,
                edge_cache,
                node_cache,
                global_cache,
            },
        ))
    }

    /// Reverse pass. `d_out` holds the gradients with respect to the block
    /// outputs; parameter gradients are added into `grad` and the gradients
    /// with respect to the block inputs are returned.
    pub fn backward(
        &self,
        topo: &Topology,
        tape: &BlockTape<T>,
        d_out: GraphState<T>,
        grad: &mut [T],
    ) -> Result<GraphState<T>, GnnError> {
        let dims = tape.input_dims;
        let GraphState {
            nodes: mut d_nodes_out,
            edges: mut d_edges_out,
            globals: d_globals_out,
        } = d_out;
        let mut d_nodes = Matrix::zeros(topo.node_count(), dims.node);
        let mut d_edges = Matrix::zeros(topo.edge_count(), dims.edge);
        let mut d_globals = Matrix::zeros(topo.n_graphs, dims.global);

        let sizes: Vec<usize> = [&self.edge, &self.node, &self.global]
            .iter()
            .map(|m| m.as_ref().map_or(0, |m| m.param_count()))
            .collect();
        let (g_edge, rest) = grad.split_at_mut(sizes[0]);
        let (g_node, g_global) = rest.split_at_mut(sizes[1]);
        let mismatch = || GnnError::TapeMismatch("block tape does not match the block".into());

        match (&self.global, &tape.global_cache) {
            (Some(mlp), Some(cache)) => {
                let dx = mlp
                    .backward_batch(cache, &d_globals_out, g_global, true)?
                    .expect("input gradient requested");
                let we = tape.edge_summary.cols();
                let wv = tape.node_summary.cols();
                self.aggregator.segments_backward(
                    &tape.edges_out,
                    &topo.edge_graph,
                    &tape.edge_summary,
                    &columns(&dx, 0, we),
                    &mut d_edges_out,
                );
                self.aggregator.segments_backward(
                    &tape.nodes_out,
                    &topo.node_graph,
                    &tape.node_summary,
                    &columns(&dx, we, wv),
                    &mut d_nodes_out,
                );
                add_matrix(&mut d_globals, &columns(&dx, we + wv, dims.global));
            }
            (None, None) => add_matrix(&mut d_globals, &d_globals_out),
            _ => return Err(mismatch()),
        }

        match (&self.node, &tape.node_cache) {
            (Some(mlp), Some(cache)) => {
                let dx = mlp
                    .backward_batch(cache, &d_nodes_out, g_node, true)?
                    .expect("input gradient requested");
                let wr = tape.received.cols();
                self.aggregator.segments_backward(
                    &tape.edges_out,
                    &topo.receivers,
                    &tape.received,
                    &columns(&dx, 0, wr),
                    &mut d_edges_out,
                );
                for n in 0..topo.node_count() {
                    let row = dx.row(n);
                    add_rows(&mut d_nodes, n, &row[wr..wr + dims.node]);
                    add_rows(&mut d_globals, topo.node_graph[n], &row[wr + dims.node..]);
                }
            }
            (None, None) => add_matrix(&mut d_nodes, &d_nodes_out),
            _ => return Err(mismatch()),
        }

        match (&self.edge, &tape.edge_cache) {
            (Some(mlp), Some(cache)) => {
                let dx = mlp
                    .backward_batch(cache, &d_edges_out, g_edge, true)?
                    .expect("input gradient requested");
                let (de, dv) = (dims.edge, dims.node);
                for k in 0..topo.edge_count() {
                    let row = dx.row(k);
                    add_rows(&mut d_edges, k, &row[..de]);
                    add_rows(&mut d_nodes, topo.senders[k], &row[de..de + dv]);
                    add_rows(&mut d_nodes, topo.receivers[k], &row[de + dv..de + 2 * dv]);
                    add_rows(&mut d_globals, topo.edge_graph[k], &row[de + 2 * dv..]);
                }
            }
            (None, None) => add_matrix(&mut d_edges, &d_edges_out),
            _ => return Err(mismatch()),
        }

        Ok(GraphState {
            nodes: d_nodes,
            edges: d_edges,
            globals: d_globals,
        })
    }

    pub fn cast<U: Scalar>(&self) -> GnBlock<U> {
        GnBlock {
            edge: self.edge.as_ref().map(Mlp::cast),
            node: self.node.as_ref().map(Mlp::cast),
            global: self.global.as_ref().map(Mlp::cast),
            aggregator: self.aggregator,
        }
    }
}

/// Record of a forward pass through a whole model.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    topology: Topology,
    blocks: Vec<BlockTape<T>>,
    layout: Vec<Vec<usize>>,
}

impl<T> Tape<T> {
    pub fn graph_count(&self) -> usize {
        self.topology.n_graphs
    }
}

/// Sequence of computation blocks whose final global attribute is the
/// scalar prediction for each graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GnModel<T: Scalar> {
    input: GraphDims,
    blocks: Vec<GnBlock<T>>,
}

impl<T: Scalar> GnModel<T> {
    pub fn init<R: Rng + ?Sized>(
        input: GraphDims,
        architecture: &Architecture,
        aggregator: Aggregator,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self, GnnError> {
        let mut dims = input;
        let mut blocks = Vec::with_capacity(architecture.blocks.len());
        for shape in &architecture.blocks {
            let block = GnBlock::init(dims, shape, aggregator, activation, rng)?;
            dims = block.output_dims(dims)?;
            blocks.push(block);
        }
        Self::from_blocks(input, blocks)
    }

    /// Validates the dimension chain and the unit readout.
    pub fn from_blocks(input: GraphDims, blocks: Vec<GnBlock<T>>) -> Result<Self, GnnError> {
        if blocks.is_empty() {
            return Err(GnnError::InvalidArchitecture("a model needs at least one block".into()));
        }
        let mut dims = input;
        for b in &blocks {
            dims = b.output_dims(dims)?;
        }
        check_width("model output", 1, dims.global)?;
        Ok(Self { input, blocks })
    }

    pub fn input_dims(&self) -> GraphDims {
        self.input
    }

    pub fn blocks(&self) -> &[GnBlock<T>] {
        &self.blocks
    }

    pub fn aggregator(&self) -> Aggregator {
        self.blocks[0].aggregator
    }

    pub fn param_count(&self) -> usize {
        self.blocks.iter().map(|b| b.param_count()).sum()
    }

    fn layout(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .flat_map(|b| {
                [&b.edge, &b.node, &b.global]
                    .into_iter()
                    .map(|m| m.as_ref().map_or_else(Vec::new, |m| m.sizes().to_vec()))
            })
            .collect()
    }

    /// All parameters, block by block, networks in edge/node/global order.
    pub fn parameters(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for b in &self.blocks {
            for m in b.mlps() {
                out.extend_from_slice(m.params());
            }
        }
        out
    }

    pub fn set_parameters(&mut self, values: &[T]) -> Result<(), GnnError> {
        check_width("parameter vector", self.param_count(), values.len())?;
        let mut offset = 0;
        for b in &mut self.blocks {
            for m in b.mlps_mut() {
                let n = m.param_count();
                m.params_mut().copy_from_slice(&values[offset..offset + n]);
                offset += n;
            }
        }
        Ok(())
    }

    /// Visits every parameter with its flat index.
    pub fn for_each_parameter_mut(&mut self, mut f: impl FnMut(usize, &mut T)) {
        let mut i = 0;
        for b in &mut self.blocks {
            for m in b.mlps_mut() {
                for p in m.params_mut() {
                    f(i, p);
                    i += 1;
                }
            }
        }
    }

    pub fn forward(&self, graph: &BatchedGraph<T>) -> Result<(Vec<T>, Tape<T>), GnnError> {
        let dims = graph.dims();
        check_width("node attributes", self.input.node, dims.node)?;
        check_width("edge attributes", self.input.edge, dims.edge)?;
        check_width("global attributes", self.input.global, dims.global)?;
        let topology = Topology::of(graph);
        let mut state = GraphState::of(graph);
        let mut tapes = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (next, tape) = b.forward(&topology, &state)?;
            tapes.push(tape);
            state = next;
        }
        let out = state.globals.into_vec();
        Ok((
            out,
            Tape {
                topology,
                blocks: tapes,
                layout: self.layout(),
            },
        ))
    }

    pub fn predict(&self, graph: &BatchedGraph<T>) -> Result<Vec<T>, GnnError> {
        self.forward(graph).map(|(y, _)| y)
    }

    pub fn predict_graph(&self, graph: &AttributedGraph<T>) -> Result<T, GnnError> {
        Ok(self.predict(&BatchedGraph::single(graph))?[0])
    }

    /// Gradient of `Σ_b upstream[b] · prediction[b]` with respect to every
    /// parameter, in [`GnModel::parameters`] order.
    pub fn backward(&self, tape: &Tape<T>, upstream: &[T]) -> Result<Vec<T>, GnnError> {
        if tape.layout != self.layout() || tape.blocks.len() != self.blocks.len() {
            return Err(GnnError::TapeMismatch(
                "tape was recorded with a different architecture".into(),
            ));
        }
        if upstream.len() != tape.topology.n_graphs {
            return Err(GnnError::TapeMismatch(format!(
                "{} upstream values for {} graphs",
                upstream.len(),
                tape.topology.n_graphs
            )));
        }
        let mut grad = vec![T::zero(); self.param_count()];
        let offsets: Vec<usize> = std::iter::once(0)
            .chain(self.blocks.iter().scan(0, |acc, b| {
                *acc += b.param_count();
                Some(*acc)
            }))
            .collect();
        let last = self.blocks.last().expect("non-empty");
        let last_dims = last.output_dims(tape.blocks.last().expect("non-empty").input_dims)?;
        let mut d = GraphState {
            nodes: Matrix::zeros(tape.topology.node_count(), last_dims.node),
            edges: Matrix::zeros(tape.topology.edge_count(), last_dims.edge),
            globals: Matrix::from_vec(upstream.len(), 1, upstream.to_vec()).expect("sized"),
        };
        for (i, (b, bt)) in self.blocks.iter().zip(&tape.blocks).enumerate().rev() {
            d = b.backward(
                &tape.topology,
                bt,
                d,
                &mut grad[offsets[i]..offsets[i + 1]],
            )?;
        }
        Ok(grad)
    }

    pub fn cast<U: Scalar>(&self) -> GnModel<U> {
        GnModel {
            input: self.input,
            blocks: self.blocks.iter().map(GnBlock::cast).collect(),
        }
    }
}
