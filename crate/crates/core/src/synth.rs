//! Random truss populations: scattered joints, Delaunay members, random
//! supports and member types, labelled with the modal oracle.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delaunay::{delaunay, DelaunayError};
use crate::fem::{first_natural_frequency, FemError, MassModel};
use crate::graph::AttributedGraph;
use crate::truss::{encode_truss, supports_restrain_rigid_body, EncodingConfig, Fixity, Materials, Member, Truss, TrussError};

/// Relative minimum joint separation, as a fraction of the domain diagonal.
pub const MIN_SEPARATION_FRACTION: f64 = 0.01;
const POINT_RETRIES: usize = 1000;
const TRUSS_RETRIES: usize = 100;
const FIXITY_RETRIES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("could not place point {index} at the required separation after {tries} tries")]
    SeparationUnachievable { index: usize, tries: usize },
    #[error("no admissible truss after {0} attempts")]
    GenerationExhausted(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Delaunay(#[from] DelaunayError),
    #[error(transparent)]
    Truss(#[from] TrussError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Domain {
    pub fn square(side: f64) -> Self {
        Self {
            min: [0.0, 0.0],
            max: [side, side],
        }
    }

    pub fn diagonal(&self) -> f64 {
        (self.max[0] - self.min[0]).hypot(self.max[1] - self.min[1])
    }
}

/// How many supports each truss receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixityPolicy {
    /// Inclusive range of nodes fixed in both directions.
    pub fully_fixed: (usize, usize),
    /// Inclusive range of nodes fixed in one direction only.
    pub partially_fixed: (usize, usize),
}

impl Default for FixityPolicy {
    fn default() -> Self {
        Self {
            fully_fixed: (1, 3),
            partially_fixed: (0, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_nodes: (usize, usize),
    pub domain: Domain,
    pub temperature: (f64, f64),
    pub materials: Materials<f64>,
    pub encoding: EncodingConfig,
    pub fixity: FixityPolicy,
    pub mass: MassModel<f64>,
    pub seed: u64,
}

impl SynthConfig {
    /// Population with `n_types` member types on a 10 x 10 domain, joints in
    /// `[10, 40]` and temperatures in `[20, 40]`.
    pub fn with_types(n_types: usize) -> Self {
        Self {
            n_nodes: (10, 40),
            domain: Domain::square(10.0),
            temperature: crate::truss::OPERATING_RANGE,
            materials: Materials::standard(n_types),
            encoding: EncodingConfig::for_types(n_types),
            fixity: FixityPolicy::default(),
            mass: MassModel::default(),
            seed: 0,
        }
    }

    /// Single material with constant rigidity; temperature is not encoded.
    pub fn uniform() -> Self {
        Self::with_types(1)
    }

    /// Linear and nonlinear thermal member types, one-hot and temperature encoded.
    pub fn thermal() -> Self {
        Self::with_types(2)
    }

    pub fn nodes(mut self, lo: usize, hi: usize) -> Self {
        self.n_nodes = (lo, hi);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_member_types(&self) -> usize {
        self.materials.len()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.n_nodes.0 < 3 || self.n_nodes.0 > self.n_nodes.1 {
            return bad("node range must satisfy 3 <= min <= max");
        }
        if !(self.domain.max[0] > self.domain.min[0] && self.domain.max[1] > self.domain.min[1]) {
            return bad("domain box is degenerate");
        }
        if !(self.temperature.0 <= self.temperature.1) {
            return bad("temperature range is empty");
        }
        if self.materials.is_empty() {
            return bad("no member types");
        }
        if self.encoding.include_member_onehot && self.encoding.n_member_types != self.materials.len() {
            return bad("encoding one-hot width differs from the number of member types");
        }
        let f = self.fixity;
        if f.fully_fixed.0 > f.fully_fixed.1 || f.partially_fixed.0 > f.partially_fixed.1 {
            return bad("fixity ranges are empty");
        }
        Ok(())
    }
}

/// Independent generator for sample `index` of a population seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` uniform points in `domain`, pairwise at least 1% of the diagonal apart.
pub fn sample_points<R: Rng + ?Sized>(
    n: usize,
    domain: &Domain,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>, SynthError> {
    let min_sep = MIN_SEPARATION_FRACTION * domain.diagonal();
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n);
    for index in 0..n {
        let mut placed = false;
        for _ in 0..POINT_RETRIES {
            let p = [
                rng.gen_range(domain.min[0]..domain.max[0]),
                rng.gen_range(domain.min[1]..domain.max[1]),
            ];
            if pts
                .iter()
                .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= min_sep)
            {
                pts.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SynthError::SeparationUnachievable {
                index,
                tries: POINT_RETRIES,
            });
        }
    }
    Ok(pts)
}

/// Random supports that block all rigid-body motion.
///
/// Draws a count of fully fixed nodes and of single-direction supports from
/// the policy, with at least one pin and at least three constrained
/// directions, and redraws until the rigid-body screen passes.
pub fn assign_fixities<R: Rng + ?Sized>(
    points: &[[f64; 2]],
    rng: &mut R,
    policy: &FixityPolicy,
) -> Vec<Fixity> {
    let n = points.len();
    assert!(n >= 2, "at least two nodes are needed for a statically determinate support");
    for _ in 0..FIXITY_RETRIES {
        let full = rng
            .gen_range(policy.fully_fixed.0..=policy.fully_fixed.1)
            .clamp(1, n - 1);
        let mut partial = rng
            .gen_range(policy.partially_fixed.0..=policy.partially_fixed.1)
            .min(n - full);
        if full == 1 && partial == 0 {
            partial = 1;
        }
        let chosen = sample(rng, n, full + partial);
        let mut fix = vec![Fixity::FREE; n];
        for (k, node) in chosen.iter().enumerate() {
            fix[node] = if k < full {
                Fixity::PINNED
            } else if rng.gen_bool(0.5) {
                Fixity::ROLLER_X
            } else {
                Fixity::ROLLER_Y
            };
        }
        if supports_restrain_rigid_body(points, &fix) {
            return fix;
        }
    }
    // pin node 0 and restrain node 1 across the line joining them
    let mut fix = vec![Fixity::FREE; n];
    fix[0] = Fixity::PINNED;
    let (dx, dy) = (points[1][0] - points[0][0], points[1][1] - points[0][1]);
    fix[1] = if dy.abs() >= dx.abs() {
        Fixity::ROLLER_X
    } else {
        Fixity::ROLLER_Y
    };
    fix
}

/// One admissible truss: Delaunay members over random joints, random
/// member types and supports, accepted only without a rigid-body mode.
pub fn generate_truss<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> Result<Truss<f64>, SynthError> {
    cfg.validate()?;
    let n_types = cfg.n_member_types();
    for _ in 0..TRUSS_RETRIES {
        let n = rng.gen_range(cfg.n_nodes.0..=cfg.n_nodes.1);
        let points = match sample_points(n, &cfg.domain, rng) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let tri = match delaunay(&points) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let members = tri
            .edges()
            .into_iter()
            .map(|(i, j)| Member {
                i,
                j,
                type_id: rng.gen_range(0..n_types),
            })
            .collect();
        let fixities = assign_fixities(&points, rng, &cfg.fixity);
        let truss = match Truss::new(points, fixities, members) {
            Ok(t) => t,
            Err(_) => continue,
        };
        if first_natural_frequency(&truss, cfg.temperature.0, &cfg.materials, &cfg.mass).is_ok() {
            return Ok(truss);
        }
    }
    Err(SynthError::GenerationExhausted(TRUSS_RETRIES))
}

/// One population member with its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub truss: Truss<f64>,
    pub temperature: f64,
    pub graph: AttributedGraph<f64>,
    pub omega1: f64,
    pub seed_index: u64,
}

impl LabeledSample {
    pub fn node_count(&self) -> usize {
        self.truss.node_count()
    }
}

/// Sample `index` of the population described by `cfg`.
pub fn generate_sample(cfg: &SynthConfig, index: u64) -> Result<LabeledSample, SynthError> {
    let mut rng = sample_rng(cfg.seed, index);
    let truss = generate_truss(cfg, &mut rng)?;
    let (lo, hi) = cfg.temperature;
    let temperature = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    let graph = encode_truss(&truss, temperature, &cfg.encoding)?;
    let modal = first_natural_frequency(&truss, temperature, &cfg.materials, &cfg.mass)?;
    Ok(LabeledSample {
        truss,
        temperature,
        graph,
        omega1: modal.omega1,
        seed_index: index,
    })
}

/// `count` labelled samples; sample `k` depends only on `(cfg, k)`, so the
/// result is identical whatever the thread count.
pub fn generate_labeled_dataset(cfg: &SynthConfig, count: usize) -> Result<Vec<LabeledSample>, SynthError> {
    cfg.validate()?;
    if count == 0 {
        return Err(SynthError::InvalidConfig("count must be at least 1".into()));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|k| generate_sample(cfg, k))
        .collect()
}
