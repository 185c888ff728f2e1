//! Fast runtime checks of the numerical invariants, for use from the
//! command line on a fresh build or machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delaunay::delaunay;
use crate::fem::{first_natural_frequency, MassModel};
use crate::gnn::{Activation, Aggregator, BlockShape, GnModel, MlpShape};
use crate::graph::BatchedGraph;
use crate::synth::{generate_sample, generate_truss, sample_rng, SynthConfig};
use crate::training::{nmse, Dataset, Normalizer};
use crate::truss::{Fixity, Materials, Member, MemberType, TemperatureLaw, Truss};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn axial_anchor() -> Outcome {
    let t = Truss::new(
        vec![[0.0, 0.0], [1.0, 0.0]],
        vec![Fixity::PINNED, Fixity::ROLLER_Y],
        vec![Member { i: 0, j: 1, type_id: 0 }],
    )
    .map_err(|e| e.to_string())?;
    let w = first_natural_frequency(&t, 30.0, &Materials::uniform(), &MassModel::default())
        .map_err(|e| e.to_string())?
        .omega1;
    let expected = (3.0e4f64).sqrt();
    ensure(rel(w, expected) < 1e-10, || format!("ω = {w}, expected {expected}"))?;
    Ok(format!("ω = {w:.9}"))
}

fn scaling_and_invariance() -> Outcome {
    let cfg = SynthConfig::uniform().nodes(8, 14);
    let mut worst = 0.0f64;
    for i in 0..5 {
        let truss = generate_truss(&cfg, &mut sample_rng(17, i)).map_err(|e| e.to_string())?;
        let mass = MassModel::default();
        let base = first_natural_frequency(&truss, 25.0, &Materials::uniform(), &mass)
            .map_err(|e| e.to_string())?
            .omega1;
        let stiff = Materials {
            types: vec![MemberType::new(TemperatureLaw::Constant { base_ea: 4.0e4 })],
        };
        let w4 = first_natural_frequency(&truss, 25.0, &stiff, &mass)
            .map_err(|e| e.to_string())?
            .omega1;
        worst = worst.max(rel(w4, 2.0 * base));
        let moved = truss.transformed(0.0, [13.0, -7.5]);
        let wm = first_natural_frequency(&moved, 25.0, &Materials::uniform(), &mass)
            .map_err(|e| e.to_string())?
            .omega1;
        worst = worst.max(rel(wm, base));
    }
    ensure(worst < 1e-9, || format!("relative deviation {worst:e}"))?;
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn delaunay_empty_circles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(3..=12);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let tri = delaunay(&pts).map_err(|e| e.to_string())?;
        for t in &tri.triangles {
            let [a, b, c] = t.map(|i| pts[i]);
            let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
            let sq = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1];
            let ux = (sq(a) * (b[1] - c[1]) + sq(b) * (c[1] - a[1]) + sq(c) * (a[1] - b[1])) / d;
            let uy = (sq(a) * (c[0] - b[0]) + sq(b) * (a[0] - c[0]) + sq(c) * (b[0] - a[0])) / d;
            let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
            for (k, p) in pts.iter().enumerate() {
                if t.contains(&k) {
                    continue;
                }
                let d2 = (p[0] - ux).powi(2) + (p[1] - uy).powi(2);
                ensure(d2 >= r2 * (1.0 - 1e-9), || format!("point {k} inside circumcircle of {t:?}"))?;
            }
        }
    }
    Ok("50 point sets".into())
}

fn gradient_check() -> Outcome {
    let cfg = SynthConfig::thermal().nodes(5, 5);
    let samples = crate::synth::generate_labeled_dataset(&cfg, 20).map_err(|e| e.to_string())?;
    let norm = Normalizer::fit(&Dataset::from_samples(&samples)).map_err(|e| e.to_string())?;
    let g = BatchedGraph::single(&norm.apply_graph(&samples[3].graph).map_err(|e| e.to_string())?);
    let shape = |h: usize, o: usize| Some(MlpShape::new(&[h], o));
    let arch = crate::gnn::Architecture {
        blocks: vec![
            BlockShape {
                edge: shape(12, 8),
                node: shape(12, 8),
                global: shape(12, 4),
            },
            BlockShape {
                edge: shape(12, 8),
                node: shape(12, 8),
                global: shape(12, 1),
            },
        ],
    };
    let mut worst = 0.0f64;
    for agg in [Aggregator::Mean, Aggregator::MeanVar] {
        let mut model = GnModel::<f64>::init(
            g.dims(),
            &arch,
            agg,
            Activation::Tanh,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .map_err(|e| e.to_string())?;
        let (_, tape) = model.forward(&g).map_err(|e| e.to_string())?;
        let grad = model.backward(&tape, &[1.0]).map_err(|e| e.to_string())?;
        let p0 = model.parameters();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let i = rng.gen_range(0..p0.len());
            let h = 1e-5;
            let mut p = p0.clone();
            p[i] = p0[i] + h;
            model.set_parameters(&p).map_err(|e| e.to_string())?;
            let up = model.predict(&g).map_err(|e| e.to_string())?[0];
            p[i] = p0[i] - h;
            model.set_parameters(&p).map_err(|e| e.to_string())?;
            let down = model.predict(&g).map_err(|e| e.to_string())?[0];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-10));
        }
        model.set_parameters(&p0).map_err(|e| e.to_string())?;
    }
    ensure(worst < 1e-4, || format!("relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn permutation_invariance() -> Outcome {
    let sample = generate_sample(&SynthConfig::thermal().nodes(8, 12), 0).map_err(|e| e.to_string())?;
    let model = GnModel::<f64>::init(
        sample.graph.dims(),
        &crate::gnn::Architecture::thermal_reference().desk(),
        Aggregator::MeanVar,
        Activation::Relu,
        &mut ChaCha8Rng::seed_from_u64(4),
    )
    .map_err(|e| e.to_string())?;
    let base = model.predict_graph(&sample.graph).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = sample.graph.node_count();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let g = sample.graph.permute_nodes(&perm).map_err(|e| e.to_string())?;
        worst = worst.max(rel(model.predict_graph(&g).map_err(|e| e.to_string())?, base));
    }
    ensure(worst < 1e-9, || format!("relative deviation {worst:e}"))?;
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn nmse_anchors() -> Outcome {
    let t = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let perfect = nmse(&t, &t).map_err(|e| e.to_string())?;
    let baseline = nmse(&[mean; 6], &t).map_err(|e| e.to_string())?;
    ensure(perfect == 0.0 && baseline == 100.0, || {
        format!("perfect {perfect}, mean predictor {baseline}")
    })?;
    Ok("0 and 100".into())
}

fn generation_determinism() -> Outcome {
    let cfg = SynthConfig::uniform().nodes(10, 14).seed(9);
    let a = crate::synth::generate_labeled_dataset(&cfg, 8).map_err(|e| e.to_string())?;
    let b: Vec<_> = (0..8)
        .map(|i| generate_sample(&cfg, i))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(a == b, || "parallel and serial generation differ".into())?;
    Ok("8 samples".into())
}

/// Runs every check and reports each outcome.
pub fn run() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 7] = [
        ("axial bar frequency", axial_anchor),
        ("stiffness scaling and translation", scaling_and_invariance),
        ("delaunay empty circumcircles", delaunay_empty_circles),
        ("gradient against finite differences", gradient_check),
        ("node permutation invariance", permutation_invariance),
        ("nmse anchors", nmse_anchors),
        ("generation determinism", generation_determinism),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check {
                name,
                passed,
                detail,
            }
        })
        .collect()
}
