//! Graph network regression engine: networks, aggregators, computation
//! blocks and reverse-mode gradients.

mod aggregate;
mod mlp;
mod model;

use thiserror::Error;

pub use aggregate::Aggregator;
pub use mlp::{param_count, Activation, Mlp, MlpCache};
pub use model::{
    Architecture, BlockShape, BlockTape, GnBlock, GnModel, GraphState, MlpShape, Tape, Topology,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnnError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("tape mismatch: {0}")]
    TapeMismatch(String),
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AttributedGraph, BatchedGraph, GraphDims};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mlp(sizes: Vec<usize>, rng: &mut ChaCha8Rng) -> Mlp<f64> {
        let n = param_count(&sizes);
        let p = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
        Mlp::from_params(sizes, Activation::Tanh, p).unwrap()
    }

    fn topo_state(g: &AttributedGraph<f64>) -> (Topology, GraphState<f64>) {
        let b = BatchedGraph::single(g);
        (Topology::of(&b), GraphState::of(&b))
    }

    #[test]
    fn single_edge_concatenation_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = AttributedGraph::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![(1, 0)],
            vec![vec![5.0]],
            vec![6.0],
        )
        .unwrap();
        let block = GnBlock {
            edge: Some(random_mlp(vec![6, 4, 3], &mut rng)),
            node: None,
            global: None,
            aggregator: Aggregator::Mean,
        };
        let (t, s) = topo_state(&g);
        let (e, _) = block.edge_update(&t, &s).unwrap();
        let expected = block
            .edge
            .as_ref()
            .unwrap()
            .forward(&[5.0, 3.0, 4.0, 1.0, 2.0, 6.0])
            .unwrap();
        assert_eq!(e.row(0), expected.as_slice());
    }

    #[test]
    fn zero_edge_network_and_parallel_edges() {
        let g = AttributedGraph::new(
            vec![vec![1.0], vec![2.0]],
            vec![(0, 1), (0, 1)],
            vec![vec![0.5], vec![0.5]],
            vec![],
        )
        .unwrap();
        let (t, s) = topo_state(&g);
        let zero = GnBlock {
            edge: Some(Mlp::zeros(vec![3, 2], Activation::Relu).unwrap()),
            node: None,
            global: None,
            aggregator: Aggregator::Mean,
        };
        assert!(zero.edge_update(&t, &s).unwrap().0.as_slice().iter().all(|&v| v == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = GnBlock {
            edge: Some(random_mlp(vec![3, 5, 2], &mut rng)),
            ..zero
        };
        let (e, _) = b.edge_update(&t, &s).unwrap();
        assert_eq!(e.row(0), e.row(1));
    }

    #[test]
    fn two_node_desk_calculation() {
        // identity edge net on e, node net v′ = ρe + 2v, Mean aggregation
        let g = AttributedGraph::new(
            vec![vec![1.0], vec![10.0]],
            vec![(0, 1), (1, 1)],
            vec![vec![4.0], vec![8.0]],
            vec![],
        )
        .unwrap();
        let edge = Mlp::from_params(vec![3, 1], Activation::Relu, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let node = Mlp::from_params(vec![2, 1], Activation::Relu, vec![1.0, 2.0, 0.0]).unwrap();
        let global = Mlp::from_params(vec![2, 1], Activation::Relu, vec![1.0, 1.0, 0.5]).unwrap();
        let block = GnBlock {
            edge: Some(edge),
            node: Some(node),
            global: Some(global),
            aggregator: Aggregator::Mean,
        };
        let (t, s) = topo_state(&g);
        let (out, _) = block.forward(&t, &s).unwrap();
        // node 0 has no in-edges: 0 + 2; node 1 receives {4, 8}: 6 + 20
        assert_eq!(out.nodes.as_slice(), &[2.0, 26.0]);
        // mean e′ = 6, mean v′ = 14, bias 0.5
        assert_eq!(out.globals.as_slice(), &[20.5]);
    }

    #[test]
    fn self_loop_composition() {
        let g = AttributedGraph::new(vec![vec![2.0]], vec![(0, 0)], vec![vec![3.0]], vec![1.0]).unwrap();
        // e′ = e + v_s + v_r + u = 8; v′ = ρe′·v + ... linear: v′ = e′ - v + u = 7
        // u′ = ρe′ + ρv′ + u = 16
        let block = GnBlock {
            edge: Some(Mlp::from_params(vec![4, 1], Activation::Relu, vec![1.0, 1.0, 1.0, 1.0, 0.0]).unwrap()),
            node: Some(Mlp::from_params(vec![3, 1], Activation::Relu, vec![1.0, -1.0, 1.0, 0.0]).unwrap()),
            global: Some(Mlp::from_params(vec![3, 1], Activation::Relu, vec![1.0, 1.0, 1.0, 0.0]).unwrap()),
            aggregator: Aggregator::Mean,
        };
        let (t, s) = topo_state(&g);
        let (out, _) = block.forward(&t, &s).unwrap();
        assert_eq!(out.edges.as_slice(), &[8.0]);
        assert_eq!(out.nodes.as_slice(), &[7.0]);
        assert_eq!(out.globals.as_slice(), &[16.0]);
    }

    #[test]
    fn absent_global_network_passes_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = AttributedGraph::new(
            vec![vec![1.0], vec![2.0]],
            vec![(0, 1)],
            vec![vec![1.0]],
            vec![0.25, -3.5],
        )
        .unwrap();
        let block = GnBlock::init(
            g.dims(),
            &BlockShape {
                edge: Some(MlpShape::new(&[4], 3)),
                node: Some(MlpShape::new(&[4], 2)),
                global: None,
            },
            Aggregator::MeanVar,
            Activation::Relu,
            &mut rng,
        )
        .unwrap();
        let (t, s) = topo_state(&g);
        let (out, _) = block.forward(&t, &s).unwrap();
        assert_eq!(out.globals.as_slice(), &[0.25, -3.5]);
        assert_eq!(
            block.output_dims(g.dims()).unwrap(),
            GraphDims {
                node: 2,
                edge: 3,
                global: 2
            }
        );
    }

    fn small_model(agg: Aggregator, act: Activation, seed: u64) -> GnModel<f64> {
        let arch = Architecture {
            blocks: vec![
                BlockShape {
                    edge: Some(MlpShape::new(&[6], 4)),
                    node: Some(MlpShape::new(&[6], 4)),
                    global: Some(MlpShape::new(&[5], 3)),
                },
                BlockShape {
                    edge: Some(MlpShape::new(&[6], 4)),
                    node: Some(MlpShape::new(&[6], 4)),
                    global: Some(MlpShape::new(&[6], 1)),
                },
            ],
        };
        let dims = GraphDims {
            node: 2,
            edge: 3,
            global: 1,
        };
        GnModel::init(dims, &arch, agg, act, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn random_graph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> AttributedGraph<f64> {
        let nodes = (0..n).map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let edges = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let attrs = (0..m).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        AttributedGraph::new(nodes, edges, attrs, vec![rng.gen_range(-1.0..1.0)]).unwrap()
    }

    #[test]
    fn smooth_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for agg in [Aggregator::Mean, Aggregator::MeanVar, Aggregator::Sum] {
            let mut model = small_model(agg, Activation::Tanh, 4);
            let g = BatchedGraph::single(&random_graph(5, 9, &mut rng));
            let (_, tape) = model.forward(&g).unwrap();
            let grad = model.backward(&tape, &[1.0]).unwrap();
            let p0 = model.parameters();
            let h = 1e-5;
            for i in 0..p0.len() {
                let mut p = p0.clone();
                p[i] += h;
                model.set_parameters(&p).unwrap();
                let up = model.predict(&g).unwrap()[0];
                p[i] -= 2.0 * h;
                model.set_parameters(&p).unwrap();
                let down = model.predict(&g).unwrap()[0];
                let fd = (up - down) / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "{agg:?} param {i}: fd {fd} vs {}",
                    grad[i]
                );
            }
            model.set_parameters(&p0).unwrap();
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let model = small_model(Aggregator::MeanVar, Activation::Relu, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = BatchedGraph::single(&random_graph(4, 6, &mut rng));
        let (_, tape) = model.forward(&g).unwrap();
        assert!(model.backward(&tape, &[0.0]).unwrap().iter().all(|&v| v == 0.0));
        assert!(matches!(
            model.backward(&tape, &[0.0, 1.0]),
            Err(GnnError::TapeMismatch(_))
        ));
        let other = small_model(Aggregator::MeanVar, Activation::Relu, 2);
        assert!(other.backward(&tape, &[1.0]).is_ok());
        let bigger = Architecture {
            blocks: vec![BlockShape {
                edge: None,
                node: None,
                global: Some(MlpShape::new(&[4], 1)),
            }],
        };
        let m2 = GnModel::<f64>::init(
            model.input_dims(),
            &bigger,
            Aggregator::MeanVar,
            Activation::Relu,
            &mut rng,
        )
        .unwrap();
        assert!(matches!(m2.backward(&tape, &[1.0]), Err(GnnError::TapeMismatch(_))));
    }

    #[test]
    fn batch_of_one_matches_unbatched() {
        let model = small_model(Aggregator::Mean, Activation::Relu, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_graph(6, 10, &mut rng);
        let a = model.predict_graph(&g).unwrap();
        let b = model.predict(&BatchedGraph::union([&g]).unwrap()).unwrap()[0];
        assert_eq!(a, b);
    }

    #[test]
    fn input_width_mismatch() {
        let model = small_model(Aggregator::Mean, Activation::Relu, 8);
        let g = AttributedGraph::new(vec![vec![1.0]], vec![], Vec::<Vec<f64>>::new(), vec![]).unwrap();
        assert!(matches!(
            model.predict_graph(&g),
            Err(GnnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reference_architectures_scale_down() {
        let desk = Architecture::mean_reference().desk();
        assert_eq!(desk.blocks[0].edge, Some(MlpShape::new(&[16], 8)));
        assert_eq!(desk.blocks[0].global, None);
        assert_eq!(desk.blocks[2].global, Some(MlpShape::new(&[75, 18], 1)));
        let dims = GraphDims {
            node: 4,
            edge: 3,
            global: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (arch, agg) in [
            (Architecture::mean_reference(), Aggregator::Mean),
            (Architecture::mean_var_reference(), Aggregator::MeanVar),
        ] {
            let m = GnModel::<f64>::init(dims, &arch.desk(), agg, Activation::Relu, &mut rng).unwrap();
            assert!(m.param_count() > 0);
        }
        let thermal = GraphDims {
            node: 4,
            edge: 5,
            global: 1,
        };
        let m = GnModel::<f64>::init(
            thermal,
            &Architecture::thermal_reference().desk(),
            Aggregator::MeanVar,
            Activation::Relu,
            &mut rng,
        )
        .unwrap();
        // node-network input of the first block: ρe (2·16) + v (4) + u (1)
        assert_eq!(m.blocks()[0].node.as_ref().unwrap().input_dim(), 37);
    }

    #[test]
    fn chain_validation() {
        let dims = GraphDims {
            node: 1,
            edge: 1,
            global: 0,
        };
        let bad = GnBlock::<f64> {
            edge: Some(Mlp::zeros(vec![4, 1], Activation::Relu).unwrap()),
            node: None,
            global: Some(Mlp::zeros(vec![2, 1], Activation::Relu).unwrap()),
            aggregator: Aggregator::Mean,
        };
        assert!(GnModel::from_blocks(dims, vec![bad]).is_err());
        let no_readout = GnBlock::<f64> {
            edge: None,
            node: None,
            global: None,
            aggregator: Aggregator::Mean,
        };
        assert!(GnModel::from_blocks(dims, vec![no_readout]).is_err());
    }
}
