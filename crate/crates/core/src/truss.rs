//! Planar pin-jointed trusses, member materials and the truss-to-graph
//! encoding.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AttributedGraph, GraphError};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Scalar;

/// Operating temperature interval in °C.
pub const OPERATING_RANGE: (f64, f64) = (20.0, 40.0);

/// Axial rigidity of the reference member material.
pub const REFERENCE_EA: f64 = 1.0e4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrussError {
    #[error("member {member} connects node {node} to itself")]
    SelfMember { member: usize, node: usize },
    #[error("member {member} duplicates the pair ({i}, {j})")]
    DuplicateMember { member: usize, i: usize, j: usize },
    #[error("member {member} references node {node} but the truss has {nodes} nodes")]
    MemberOutOfRange {
        member: usize,
        node: usize,
        nodes: usize,
    },
    #[error("member {0} has zero length")]
    DegenerateMember(usize),
    #[error("{found} fixity entries for {nodes} nodes")]
    FixityCountMismatch { nodes: usize, found: usize },
    #[error("only {0} constrained degrees of freedom; at least 3 are required")]
    Underconstrained(usize),
    #[error("temperature {t} outside the operating range [{lo}, {hi}]")]
    TemperatureOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("axial rigidity {0} is not positive")]
    NonpositiveStiffness(f64),
    #[error("member type {type_id} is not defined ({available} types available)")]
    UnknownMemberType { type_id: usize, available: usize },
    #[error("invalid member index {0}")]
    NoSuchMember(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Support condition of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Fixity {
    pub x: bool,
    pub y: bool,
}

impl Fixity {
    pub const FREE: Fixity = Fixity { x: false, y: false };
    pub const PINNED: Fixity = Fixity { x: true, y: true };
    pub const ROLLER_X: Fixity = Fixity { x: true, y: false };
    pub const ROLLER_Y: Fixity = Fixity { x: false, y: true };

    pub fn count(self) -> usize {
        self.x as usize + self.y as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Member {
    pub i: usize,
    pub j: usize,
    pub type_id: usize,
}

/// Validated planar truss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrussRecord<T>", into = "TrussRecord<T>", bound = "T: Scalar")]
pub struct Truss<T: Scalar> {
    nodes: Vec<[T; 2]>,
    fixities: Vec<Fixity>,
    members: Vec<Member>,
}

impl<T: Scalar> Truss<T> {
    pub fn new(
        nodes: Vec<[T; 2]>,
        fixities: Vec<Fixity>,
        members: Vec<Member>,
    ) -> Result<Self, TrussError> {
        let n = nodes.len();
        if fixities.len() != n {
            return Err(TrussError::FixityCountMismatch {
                nodes: n,
                found: fixities.len(),
            });
        }
        let mut seen = HashSet::with_capacity(members.len());
        for (k, m) in members.iter().enumerate() {
            for node in [m.i, m.j] {
                if node >= n {
                    return Err(TrussError::MemberOutOfRange {
                        member: k,
                        node,
                        nodes: n,
                    });
                }
            }
            if m.i == m.j {
                return Err(TrussError::SelfMember {
                    member: k,
                    node: m.i,
                });
            }
            if !seen.insert((m.i.min(m.j), m.i.max(m.j))) {
                return Err(TrussError::DuplicateMember {
                    member: k,
                    i: m.i,
                    j: m.j,
                });
            }
            if nodes[m.i] == nodes[m.j] {
                return Err(TrussError::DegenerateMember(k));
            }
        }
        let constrained: usize = fixities.iter().map(|f| f.count()).sum();
        if constrained < 3 {
            return Err(TrussError::Underconstrained(constrained));
        }
        Ok(Self {
            nodes,
            fixities,
            members,
        })
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn fixities(&self) -> &[Fixity] {
        &self.fixities
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Length, sine and cosine of member `m` oriented from `i` to `j`.
    pub fn member_geometry(&self, m: usize) -> Result<(T, T, T), TrussError> {
        let member = self.members.get(m).ok_or(TrussError::NoSuchMember(m))?;
        directed_geometry(self.nodes[member.i], self.nodes[member.j])
            .ok_or(TrussError::DegenerateMember(m))
    }

    /// Axial stiffness `EA / L` of member `m` at temperature `t`.
    pub fn member_axial_stiffness(
        &self,
        m: usize,
        t: T,
        materials: &Materials<T>,
    ) -> Result<T, TrussError> {
        let (len, _, _) = self.member_geometry(m)?;
        let ea = materials.ea_at(self.members[m].type_id, t)?;
        Ok(ea / len)
    }

    /// Whether the supports block both rigid translations and the rigid
    /// rotation, judged on geometry alone.
    pub fn supports_restrain_rigid_body(&self) -> bool {
        supports_restrain_rigid_body(&self.nodes, &self.fixities)
    }

    /// Same truss with every node shifted and rotated rigidly.
    pub fn transformed(&self, angle: T, shift: [T; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        let nodes = self
            .nodes
            .iter()
            .map(|&[x, y]| [c * x - s * y + shift[0], s * x + c * y + shift[1]])
            .collect();
        Self {
            nodes,
            fixities: self.fixities.clone(),
            members: self.members.clone(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Truss<U> {
        Truss {
            nodes: self
                .nodes
                .iter()
                .map(|&[x, y]| [U::lit(x.as_f64()), U::lit(y.as_f64())])
                .collect(),
            fixities: self.fixities.clone(),
            members: self.members.clone(),
        }
    }
}

/// `(L, sinθ, cosθ)` of the segment `from → to`, `None` when it has zero length.
pub fn directed_geometry<T: Scalar>(from: [T; 2], to: [T; 2]) -> Option<(T, T, T)> {
    let dx = to[0] - from[0];
    let dy = to[1] - from[1];
    let len = dx.hypot(dy);
    if len > T::zero() {
        Some((len, dy / len, dx / len))
    } else {
        None
    }
}

/// Rigid-body screen on the supports alone: the constrained directions,
/// seen as rows `[1, 0, -y]` (x) and `[0, 1, x]` (y) against the three planar
/// rigid motions, must have full rank.
pub fn supports_restrain_rigid_body<T: Scalar>(nodes: &[[T; 2]], fixities: &[Fixity]) -> bool {
    if nodes.is_empty() {
        return false;
    }
    let n = T::from_count(nodes.len());
    let cx = nodes.iter().map(|p| p[0]).sum::<T>() / n;
    let cy = nodes.iter().map(|p| p[1]).sum::<T>() / n;
    let scale = nodes
        .iter()
        .map(|p| (p[0] - cx).hypot(p[1] - cy))
        .fold(T::zero(), T::max)
        .max(T::epsilon());

    let mut gram = Matrix::<T>::zeros(3, 3);
    let mut add = |row: [T; 3]| {
        for a in 0..3 {
            for b in 0..3 {
                gram[(a, b)] += row[a] * row[b];
            }
        }
    };
    for (p, f) in nodes.iter().zip(fixities) {
        let (x, y) = ((p[0] - cx) / scale, (p[1] - cy) / scale);
        if f.x {
            add([T::one(), T::zero(), -y]);
        }
        if f.y {
            add([T::zero(), T::one(), x]);
        }
    }
    match symmetric_eigen(&gram) {
        Ok(eig) => {
            let max = eig.values[2];
            max > T::zero() && eig.values[0] > T::lit(1e-9) * max
        }
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct TrussRecord<T: Scalar> {
    nodes: Vec<[T; 2]>,
    fix: Vec<[u8; 2]>,
    members: Vec<[usize; 3]>,
}

impl<T: Scalar> TryFrom<TrussRecord<T>> for Truss<T> {
    type Error = TrussError;

    fn try_from(rec: TrussRecord<T>) -> Result<Self, TrussError> {
        Truss::new(
            rec.nodes,
            rec.fix
                .into_iter()
                .map(|[x, y]| Fixity {
                    x: x != 0,
                    y: y != 0,
                })
                .collect(),
            rec.members
                .into_iter()
                .map(|[i, j, type_id]| Member { i, j, type_id })
                .collect(),
        )
    }
}

impl<T: Scalar> From<Truss<T>> for TrussRecord<T> {
    fn from(t: Truss<T>) -> Self {
        TrussRecord {
            nodes: t.nodes,
            fix: t
                .fixities
                .iter()
                .map(|f| [f.x as u8, f.y as u8])
                .collect(),
            members: t.members.iter().map(|m| [m.i, m.j, m.type_id]).collect(),
        }
    }
}

/// How a member type's axial rigidity `EA` varies with temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum TemperatureLaw<T: Scalar> {
    Constant { base_ea: T },
    /// `base_ea * (1 - alpha (T - t_ref))`
    Linear { base_ea: T, alpha: T, t_ref: T },
    /// `base_ea * (1 - beta (T - t_ref)^2)`
    Nonlinear { base_ea: T, beta: T, t_ref: T },
}

impl<T: Scalar> TemperatureLaw<T> {
    pub fn constant_reference() -> Self {
        Self::Constant {
            base_ea: T::lit(REFERENCE_EA),
        }
    }

    pub fn linear_default() -> Self {
        Self::Linear {
            base_ea: T::lit(REFERENCE_EA),
            alpha: T::lit(0.005),
            t_ref: T::lit(20.0),
        }
    }

    pub fn nonlinear_default() -> Self {
        Self::Nonlinear {
            base_ea: T::lit(REFERENCE_EA),
            beta: T::lit(0.00025),
            t_ref: T::lit(20.0),
        }
    }

    /// Raw law, without range or sign checks.
    pub fn evaluate(&self, t: T) -> T {
        match *self {
            Self::Constant { base_ea } => base_ea,
            Self::Linear {
                base_ea,
                alpha,
                t_ref,
            } => base_ea * (T::one() - alpha * (t - t_ref)),
            Self::Nonlinear {
                base_ea,
                beta,
                t_ref,
            } => {
                let d = t - t_ref;
                base_ea * (T::one() - beta * d * d)
            }
        }
    }
}

/// A member material: its temperature law and the interval it is valid on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MemberType<T: Scalar> {
    pub law: TemperatureLaw<T>,
    pub range: (T, T),
}

impl<T: Scalar> MemberType<T> {
    pub fn new(law: TemperatureLaw<T>) -> Self {
        Self {
            law,
            range: (T::lit(OPERATING_RANGE.0), T::lit(OPERATING_RANGE.1)),
        }
    }

    pub fn ea_at(&self, t: T) -> Result<T, TrussError> {
        let (lo, hi) = self.range;
        if !(t >= lo && t <= hi) {
            return Err(TrussError::TemperatureOutOfRange {
                t: t.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        let ea = self.law.evaluate(t);
        if !(ea > T::zero()) {
            return Err(TrussError::NonpositiveStiffness(ea.as_f64()));
        }
        Ok(ea)
    }
}

/// Catalogue of member types indexed by `type_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Materials<T: Scalar> {
    pub types: Vec<MemberType<T>>,
}

impl<T: Scalar> Materials<T> {
    /// One member type with constant `EA = 10^4`.
    pub fn uniform() -> Self {
        Self {
            types: vec![MemberType::new(TemperatureLaw::constant_reference())],
        }
    }

    /// A linear and a nonlinear temperature-dependent member type.
    pub fn thermal_pair() -> Self {
        Self {
            types: vec![
                MemberType::new(TemperatureLaw::linear_default()),
                MemberType::new(TemperatureLaw::nonlinear_default()),
            ],
        }
    }

    /// Default catalogue for `n` member types: the uniform material for one
    /// type, the thermal pair for two, and for more types the thermal pair
    /// followed by constant materials of increasing rigidity.
    pub fn standard(n: usize) -> Self {
        match n {
            0 | 1 => Self::uniform(),
            _ => {
                let mut m = Self::thermal_pair();
                for k in 2..n {
                    m.types.push(MemberType::new(TemperatureLaw::Constant {
                        base_ea: T::lit(REFERENCE_EA * (1.0 + 0.5 * (k - 1) as f64)),
                    }));
                }
                m
            }
        }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn ea_at(&self, type_id: usize, t: T) -> Result<T, TrussError> {
        self.types
            .get(type_id)
            .ok_or(TrussError::UnknownMemberType {
                type_id,
                available: self.types.len(),
            })?
            .ea_at(t)
    }
}

/// Which optional features go into the encoded graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub include_member_onehot: bool,
    pub include_temperature_global: bool,
    pub n_member_types: usize,
}

impl EncodingConfig {
    /// Geometry only, no global attribute.
    pub const UNIFORM: EncodingConfig = EncodingConfig {
        include_member_onehot: false,
        include_temperature_global: false,
        n_member_types: 1,
    };

    /// Geometry plus member-type one-hot and temperature.
    pub const THERMAL: EncodingConfig = EncodingConfig {
        include_member_onehot: true,
        include_temperature_global: true,
        n_member_types: 2,
    };

    pub fn for_types(n: usize) -> Self {
        if n <= 1 {
            Self::UNIFORM
        } else {
            Self {
                n_member_types: n,
                ..Self::THERMAL
            }
        }
    }

    pub fn node_width(&self) -> usize {
        4
    }

    pub fn edge_width(&self) -> usize {
        3 + if self.include_member_onehot {
            self.n_member_types
        } else {
            0
        }
    }

    pub fn global_width(&self) -> usize {
        self.include_temperature_global as usize
    }
}

/// Encodes a truss as a graph.
///
/// Nodes carry `[x, y, fix_x, fix_y]`. Member `m` becomes edges `2m` (i→j)
/// and `2m+1` (j→i), each carrying `[L, sinθ, cosθ]` for its own direction
/// followed by the optional member-type one-hot. The global vector is `[t]`
/// or empty.
pub fn encode_truss<T: Scalar>(
    truss: &Truss<T>,
    t: T,
    cfg: &EncodingConfig,
) -> Result<AttributedGraph<T>, TrussError> {
    let n = truss.node_count();
    let mut nodes = Matrix::zeros(n, cfg.node_width());
    for (k, (p, f)) in truss.nodes.iter().zip(&truss.fixities).enumerate() {
        let row = nodes.row_mut(k);
        row[0] = p[0];
        row[1] = p[1];
        row[2] = if f.x { T::one() } else { T::zero() };
        row[3] = if f.y { T::one() } else { T::zero() };
    }

    let de = cfg.edge_width();
    let mut edges = Vec::with_capacity(2 * truss.members.len());
    let mut attrs = Matrix::zeros(2 * truss.members.len(), de);
    for (k, m) in truss.members.iter().enumerate() {
        if cfg.include_member_onehot && m.type_id >= cfg.n_member_types {
            return Err(TrussError::UnknownMemberType {
                type_id: m.type_id,
                available: cfg.n_member_types,
            });
        }
        let (len, s, c) = truss.member_geometry(k)?;
        for (slot, (from, to), sign) in [(2 * k, (m.i, m.j), T::one()), (2 * k + 1, (m.j, m.i), -T::one())]
        {
            edges.push((from, to));
            let row = attrs.row_mut(slot);
            row[0] = len;
            row[1] = sign * s;
            row[2] = sign * c;
            if cfg.include_member_onehot {
                row[3 + m.type_id] = T::one();
            }
        }
    }
    let globals = if cfg.include_temperature_global {
        vec![t]
    } else {
        Vec::new()
    };
    Ok(AttributedGraph::from_parts(nodes, edges, attrs, globals)?)
}

/// Eight-node, thirteen-member Pratt-style truss pinned at both ends of
/// the bottom chord. Member classes: `0` top chord, `1` diagonals and
/// verticals, `2` bottom chord.
pub fn pratt_truss<T: Scalar>() -> Truss<T> {
    let nodes: [[f64; 2]; 8] = [
        [0.0, 0.0],
        [3.0, 0.0],
        [6.0, 0.0],
        [9.0, 0.0],
        [12.0, 0.0],
        [3.0, 4.0],
        [6.0, 4.0],
        [9.0, 4.0],
    ];
    let mut fix = vec![Fixity::FREE; 8];
    fix[0] = Fixity::PINNED;
    fix[4] = Fixity::PINNED;
    let m = |i, j, type_id| Member { i, j, type_id };
    let members = vec![
        m(0, 1, 2),
        m(1, 2, 2),
        m(2, 3, 2),
        m(3, 4, 2),
        m(0, 5, 1),
        m(5, 6, 0),
        m(6, 7, 0),
        m(1, 5, 1),
        m(5, 2, 1),
        m(2, 6, 1),
        m(2, 7, 1),
        m(4, 7, 1),
        m(3, 7, 1),
    ];
    let nodes = nodes.iter().map(|&[x, y]| [T::lit(x), T::lit(y)]).collect();
    Truss::new(nodes, fix, members).expect("valid reference truss")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(a: [f64; 2], b: [f64; 2]) -> Truss<f64> {
        Truss::new(
            vec![a, b],
            vec![Fixity::PINNED, Fixity::ROLLER_Y],
            vec![Member {
                i: 0,
                j: 1,
                type_id: 0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn geometry_of_axis_aligned_and_diagonal_members() {
        assert_eq!(bar([0.0, 0.0], [3.0, 0.0]).member_geometry(0).unwrap(), (3.0, 0.0, 1.0));
        assert_eq!(bar([0.0, 0.0], [0.0, 2.0]).member_geometry(0).unwrap(), (2.0, 1.0, 0.0));
        let (l, s, c) = bar([0.0, 0.0], [1.0, 1.0]).member_geometry(0).unwrap();
        let h = std::f64::consts::SQRT_2 / 2.0;
        assert!((l - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((s - h).abs() < 1e-15 && (c - h).abs() < 1e-15);
    }

    #[test]
    fn invalid_trusses_rejected() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let fix = vec![Fixity::PINNED, Fixity::ROLLER_Y, Fixity::FREE];
        let m = |i, j| Member { i, j, type_id: 0 };
        assert!(matches!(
            Truss::new(pts.clone(), fix.clone(), vec![m(0, 0)]),
            Err(TrussError::SelfMember { .. })
        ));
        assert!(matches!(
            Truss::new(pts.clone(), fix.clone(), vec![m(0, 1), m(1, 0)]),
            Err(TrussError::DuplicateMember { .. })
        ));
        assert!(matches!(
            Truss::new(pts.clone(), fix.clone(), vec![m(0, 3)]),
            Err(TrussError::MemberOutOfRange { .. })
        ));
        assert!(matches!(
            Truss::new(pts.clone(), vec![Fixity::PINNED, Fixity::FREE, Fixity::FREE], vec![m(0, 1)]),
            Err(TrussError::Underconstrained(2))
        ));
        assert!(matches!(
            Truss::new(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]], fix, vec![m(0, 1)]),
            Err(TrussError::DegenerateMember(0))
        ));
    }

    #[test]
    fn temperature_laws() {
        let constant = MemberType::new(TemperatureLaw::<f64>::constant_reference());
        assert_eq!(constant.ea_at(25.0).unwrap(), 1e4);
        assert_eq!(constant.ea_at(20.0).unwrap(), constant.ea_at(40.0).unwrap());

        let linear = MemberType::new(TemperatureLaw::<f64>::linear_default());
        assert_eq!(linear.ea_at(20.0).unwrap(), 1e4);
        assert!((linear.ea_at(40.0).unwrap() - 9000.0).abs() < 1e-9);

        let nonlinear = MemberType::new(TemperatureLaw::<f64>::nonlinear_default());
        assert_eq!(nonlinear.ea_at(20.0).unwrap(), 1e4);
        assert!((nonlinear.ea_at(40.0).unwrap() - 9000.0).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let ea = nonlinear.ea_at(20.0 + 0.5 * k as f64).unwrap();
            assert!(ea <= prev);
            prev = ea;
        }

        assert!(matches!(
            linear.ea_at(41.0),
            Err(TrussError::TemperatureOutOfRange { .. })
        ));
        let soft = MemberType::new(TemperatureLaw::Linear {
            base_ea: 1.0,
            alpha: 0.1,
            t_ref: 20.0,
        });
        assert!(matches!(soft.ea_at(35.0), Err(TrussError::NonpositiveStiffness(_))));
    }

    #[test]
    fn axial_stiffness() {
        let mats = Materials::<f64>::uniform();
        assert_eq!(bar([0.0, 0.0], [2.0, 0.0]).member_axial_stiffness(0, 25.0, &mats).unwrap(), 5000.0);
        assert_eq!(bar([0.0, 0.0], [1.0, 0.0]).member_axial_stiffness(0, 25.0, &mats).unwrap(), 1e4);
        let thermal = Materials::<f64>::thermal_pair();
        let k = bar([0.0, 0.0], [2.0, 0.0]).member_axial_stiffness(0, 40.0, &thermal).unwrap();
        assert!((k - 4500.0).abs() < 1e-9);
    }

    #[test]
    fn single_member_encoding() {
        let g = encode_truss(&bar([0.0, 0.0], [3.0, 0.0]), 25.0, &EncodingConfig::UNIFORM).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.dims().node, 4);
        assert_eq!(g.edges(), &[(0, 1), (1, 0)]);
        assert_eq!(g.edge_attrs().row(0), &[3.0, 0.0, 1.0]);
        assert_eq!(g.edge_attrs().row(1), &[3.0, 0.0, -1.0]);
        assert!(g.globals().is_empty());
        assert_eq!(g.nodes().row(0), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(g.nodes().row(1), &[3.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn pratt_truss_encoding() {
        let truss = pratt_truss::<f64>();
        let cfg = EncodingConfig {
            include_member_onehot: true,
            include_temperature_global: true,
            n_member_types: 3,
        };
        let g = encode_truss(&truss, 30.0, &cfg).unwrap();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.edge_count(), 26);
        assert_eq!(g.dims().node, 4);
        assert_eq!(g.globals(), &[30.0]);
        // bottom chord
        for m in 0..4 {
            assert_eq!(g.edge_attrs().row(2 * m), &[3.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
            assert_eq!(&g.edge_attrs().row(2 * m + 1)[3..], &[0.0, 0.0, 1.0]);
        }
        assert_eq!(g.nodes().row(0), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(g.nodes().row(1), &[3.0, 0.0, 0.0, 0.0]);
        for k in 0..g.edge_count() {
            let r = g.edge_attrs().row(k);
            assert!((r[1] * r[1] + r[2] * r[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_body_screen() {
        let pts = vec![[0.0, 0.0], [5.0, 0.0], [2.0, 3.0]];
        // pin + roller whose direction points at the pin: rotation is free
        assert!(!supports_restrain_rigid_body(
            &pts,
            &[Fixity::PINNED, Fixity::ROLLER_X, Fixity::FREE]
        ));
        assert!(supports_restrain_rigid_body(
            &pts,
            &[Fixity::PINNED, Fixity::ROLLER_Y, Fixity::FREE]
        ));
        // three parallel constraints cannot stop the perpendicular translation
        assert!(!supports_restrain_rigid_body(
            &pts,
            &[Fixity::ROLLER_X, Fixity::ROLLER_X, Fixity::ROLLER_X]
        ));
    }

    #[test]
    fn truss_json_layout() {
        let t = bar([0.0, 0.0], [1.0, 0.0]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(
            s,
            r#"{"nodes":[[0.0,0.0],[1.0,0.0]],"fix":[[1,1],[0,1]],"members":[[0,1,0]]}"#
        );
        assert_eq!(serde_json::from_str::<Truss<f64>>(&s).unwrap(), t);
    }
}
