//! Linear modal analysis of planar trusses: bar-element stiffness and
//! consistent mass assembly, support reduction and the smallest eigenpair of
//! the pencil `K φ = λ M φ`.
//!
//! Degree of freedom `2i` is the x displacement of node `i`, `2i + 1` its y
//! displacement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cholesky, solve_lower, solve_lower_transpose, symmetric_eigen, LinalgError, Matrix};
use crate::scalar::Scalar;
use crate::truss::{Fixity, Materials, Truss, TrussError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error(transparent)]
    Truss(#[from] TrussError),
    #[error("node {0} is not attached to any member")]
    IsolatedNode(usize),
    #[error("every degree of freedom is fixed")]
    AllDofsFixed,
    #[error("mass matrix is not positive definite: {0}")]
    MassNotPd(LinalgError),
    #[error("eigen solve did not converge: {0}")]
    EigenNoConvergence(String),
    #[error("rigid-body mode: smallest eigenvalue {lambda} below threshold {threshold}")]
    RigidBodyMode { lambda: f64, threshold: f64 },
    #[error("pencil dimensions differ: K is {k}, M is {m}")]
    DimensionMismatch { k: usize, m: usize },
    #[error("{fixities} fixity entries for {dofs} degrees of freedom")]
    FixityMismatch { fixities: usize, dofs: usize },
}

/// Linear density `ρA` of every member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MassModel<T: Scalar> {
    pub rho_a: T,
}

impl<T: Scalar> Default for MassModel<T> {
    fn default() -> Self {
        Self { rho_a: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalResult<T> {
    /// First natural frequency in rad per time unit.
    pub omega1: T,
    pub lambda_min: T,
    pub n_free_dofs: usize,
    /// `‖Kφ − λMφ‖ / ‖Kφ‖` of the returned eigenpair.
    pub residual: T,
}

/// Relative residual the eigen solve must reach.
pub fn residual_tolerance<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon().sqrt())
}

/// Rigid-body screen: `λ_min ≤ RIGID_BODY_RATIO · trace(K_ff) / n` is a mechanism.
pub const RIGID_BODY_RATIO: f64 = 1e-8;

fn member_dofs(i: usize, j: usize) -> [usize; 4] {
    [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
}

/// Global stiffness from axial bar elements, `(EA/L) [c², cs; cs, s²]` blocks.
pub fn assemble_stiffness<T: Scalar>(
    truss: &Truss<T>,
    t: T,
    materials: &Materials<T>,
) -> Result<Matrix<T>, FemError> {
    let n = 2 * truss.node_count();
    let mut k = Matrix::zeros(n, n);
    for (idx, m) in truss.members().iter().enumerate() {
        let (_, s, c) = truss.member_geometry(idx)?;
        let stiff = truss.member_axial_stiffness(idx, t, materials)?;
        let block = [c * c, c * s, s * s];
        let local = |a: usize, b: usize| -> T {
            let (a2, b2) = (a % 2, b % 2);
            let v = match (a2, b2) {
                (0, 0) => block[0],
                (1, 1) => block[2],
                _ => block[1],
            };
            if (a < 2) == (b < 2) {
                v
            } else {
                -v
            }
        };
        let dofs = member_dofs(m.i, m.j);
        for a in 0..4 {
            for b in 0..4 {
                k[(dofs[a], dofs[b])] += stiff * local(a, b);
            }
        }
    }
    Ok(k)
}

/// Global consistent mass, `(ρAL/6) [2,0,1,0; 0,2,0,1; 1,0,2,0; 0,1,0,2]` per member.
pub fn assemble_mass<T: Scalar>(truss: &Truss<T>, mass: &MassModel<T>) -> Result<Matrix<T>, FemError> {
    let n = 2 * truss.node_count();
    let mut touched = vec![false; truss.node_count()];
    let mut m = Matrix::zeros(n, n);
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    for (idx, mem) in truss.members().iter().enumerate() {
        let (len, _, _) = truss.member_geometry(idx)?;
        touched[mem.i] = true;
        touched[mem.j] = true;
        let w = mass.rho_a * len / six;
        let dofs = member_dofs(mem.i, mem.j);
        for a in 0..4 {
            m[(dofs[a], dofs[a])] += two * w;
        }
        for a in 0..2 {
            m[(dofs[a], dofs[a + 2])] += w;
            m[(dofs[a + 2], dofs[a])] += w;
        }
    }
    if let Some(node) = touched.iter().position(|&t| !t) {
        return Err(FemError::IsolatedNode(node));
    }
    Ok(m)
}

/// Free-DOF partition of a pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPencil<T: Scalar> {
    pub k: Matrix<T>,
    pub m: Matrix<T>,
    /// `free[a]` is the global DOF of reduced row `a`.
    pub free: Vec<usize>,
}

pub fn reduce_boundary<T: Scalar>(
    k: &Matrix<T>,
    m: &Matrix<T>,
    fixities: &[Fixity],
) -> Result<ReducedPencil<T>, FemError> {
    if k.rows() != m.rows() {
        return Err(FemError::DimensionMismatch {
            k: k.rows(),
            m: m.rows(),
        });
    }
    if 2 * fixities.len() != k.rows() {
        return Err(FemError::FixityMismatch {
            fixities: fixities.len(),
            dofs: k.rows(),
        });
    }
    let free: Vec<usize> = fixities
        .iter()
        .enumerate()
        .flat_map(|(i, f)| {
            [(2 * i, f.x), (2 * i + 1, f.y)]
                .into_iter()
                .filter(|&(_, fixed)| !fixed)
                .map(|(d, _)| d)
        })
        .collect();
    if free.is_empty() {
        return Err(FemError::AllDofsFixed);
    }
    Ok(ReducedPencil {
        k: k.submatrix(&free),
        m: m.submatrix(&free),
        free,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair<T> {
    pub lambda: T,
    /// M-normalised: `φᵀ M φ = 1`.
    pub vector: Vec<T>,
    pub residual: T,
}

/// Smallest eigenpair of `K φ = λ M φ` through `M = L Lᵀ` and the standard
/// symmetric problem `L⁻¹ K L⁻ᵀ y = λ y`, `φ = L⁻ᵀ y`.
pub fn smallest_generalized_eigenvalue<T: Scalar>(
    k: &Matrix<T>,
    m: &Matrix<T>,
) -> Result<Eigenpair<T>, FemError> {
    let n = k.rows();
    if m.rows() != n || k.cols() != n || m.cols() != n {
        return Err(FemError::DimensionMismatch { k: n, m: m.rows() });
    }
    let l = cholesky(m).map_err(FemError::MassNotPd)?;
    // A = L⁻¹ K L⁻ᵀ = L⁻¹ (L⁻¹ K)ᵀ since K is symmetric
    let half = solve_lower(&l, k);
    let mut a = solve_lower(&l, &half.transpose());
    // symmetrise away rounding
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)]) / T::lit(2.0);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let eig = symmetric_eigen(&a).map_err(|e| FemError::EigenNoConvergence(e.to_string()))?;
    let lambda = eig.values[0];
    let y: Vec<T> = (0..n).map(|r| eig.vectors[(r, 0)]).collect();
    let vector = solve_lower_transpose(&l, &y);

    let kv = k.matvec(&vector);
    let mv = m.matvec(&vector);
    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();
    let diff: Vec<T> = kv.iter().zip(&mv).map(|(&a, &b)| a - lambda * b).collect();
    let denom = norm(&kv).max(T::min_positive_value());
    let residual = norm(&diff) / denom;
    Ok(Eigenpair {
        lambda,
        vector,
        residual,
    })
}

/// First natural frequency of a supported truss at temperature `t`.
pub fn first_natural_frequency<T: Scalar>(
    truss: &Truss<T>,
    t: T,
    materials: &Materials<T>,
    mass: &MassModel<T>,
) -> Result<ModalResult<T>, FemError> {
    let k = assemble_stiffness(truss, t, materials)?;
    let m = assemble_mass(truss, mass)?;
    let reduced = reduce_boundary(&k, &m, truss.fixities())?;
    let nf = reduced.free.len();
    let pair = smallest_generalized_eigenvalue(&reduced.k, &reduced.m)?;
    let threshold = T::lit(RIGID_BODY_RATIO) * reduced.k.trace() / T::from_count(nf);
    if !(pair.lambda > threshold) {
        return Err(FemError::RigidBodyMode {
            lambda: pair.lambda.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    if !(pair.residual <= residual_tolerance::<T>()) {
        return Err(FemError::EigenNoConvergence(format!(
            "relative residual {} exceeds {}",
            pair.residual,
            residual_tolerance::<T>()
        )));
    }
    Ok(ModalResult {
        omega1: pair.lambda.sqrt(),
        lambda_min: pair.lambda,
        n_free_dofs: nf,
        residual: pair.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truss::{pratt_truss, Member};

    fn bar(len: f64, fix: [Fixity; 2]) -> Truss<f64> {
        Truss::new(
            vec![[0.0, 0.0], [len, 0.0]],
            fix.to_vec(),
            vec![Member {
                i: 0,
                j: 1,
                type_id: 0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn horizontal_bar_stiffness() {
        let t = bar(2.0, [Fixity::PINNED, Fixity::ROLLER_Y]);
        let k = assemble_stiffness(&t, 25.0, &Materials::uniform()).unwrap();
        let kk = 5000.0;
        let expected: [[f64; 4]; 4] = [
            [kk, 0.0, -kk, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [-kk, 0.0, kk, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert_eq!(k[(r, c)].abs(), v.abs(), "({r},{c})");
                assert_eq!(k[(r, c)], v);
            }
        }
    }

    #[test]
    fn bar_mass_entries() {
        let t = bar(3.0, [Fixity::PINNED, Fixity::ROLLER_Y]);
        let m = assemble_mass(&t, &MassModel { rho_a: 2.0 }).unwrap();
        // ρAL = 6
        assert_eq!(m[(2, 2)], 2.0);
        assert_eq!(m[(0, 2)], 1.0);
        assert_eq!(m[(1, 3)], 1.0);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn isolated_node_rejected() {
        let t = Truss::new(
            vec![[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]],
            vec![Fixity::PINNED, Fixity::ROLLER_Y, Fixity::FREE],
            vec![Member {
                i: 0,
                j: 1,
                type_id: 0,
            }],
        )
        .unwrap();
        assert_eq!(
            assemble_mass(&t, &MassModel::default()),
            Err(FemError::IsolatedNode(2))
        );
    }

    #[test]
    fn reduction_counts() {
        let t = bar(1.0, [Fixity::PINNED, Fixity::ROLLER_Y]);
        let k = assemble_stiffness(&t, 25.0, &Materials::uniform()).unwrap();
        let m = assemble_mass(&t, &MassModel::default()).unwrap();
        assert_eq!(reduce_boundary(&k, &m, t.fixities()).unwrap().free, vec![2]);
        let r = reduce_boundary(&k, &m, &[Fixity::PINNED, Fixity::FREE]).unwrap();
        assert_eq!(r.free, vec![2, 3]);
        let none = reduce_boundary(&k, &m, &[Fixity::FREE; 2]).unwrap();
        assert_eq!(none.k, k);
        assert_eq!(
            reduce_boundary(&k, &m, &[Fixity::PINNED; 2]),
            Err(FemError::AllDofsFixed)
        );

        let p = pratt_truss::<f64>();
        let k = assemble_stiffness(&p, 30.0, &Materials::standard(3)).unwrap();
        let m = assemble_mass(&p, &MassModel::default()).unwrap();
        assert_eq!(reduce_boundary(&k, &m, p.fixities()).unwrap().free.len(), 12);
    }

    #[test]
    fn scalar_and_identity_pencils() {
        let k = Matrix::<f64>::from_rows(&[vec![2.0]], 1).unwrap();
        let m = Matrix::from_rows(&[vec![0.5]], 1).unwrap();
        assert!((smallest_generalized_eigenvalue(&k, &m).unwrap().lambda - 4.0).abs() < 1e-14);

        let a = Matrix::<f64>::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 2.0]], 3)
            .unwrap();
        let pair = smallest_generalized_eigenvalue(&a, &a).unwrap();
        assert!((pair.lambda - 1.0).abs() < 1e-13);
    }

    #[test]
    fn indefinite_mass_rejected() {
        let k = Matrix::identity(2);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]], 2).unwrap();
        assert!(matches!(
            smallest_generalized_eigenvalue(&k, &m),
            Err(FemError::MassNotPd(_))
        ));
    }

    #[test]
    fn axial_bar_frequency() {
        // node 1 free only along the bar: one DOF with k = EA/L, m = ρAL/3
        let t = bar(1.0, [Fixity::PINNED, Fixity::ROLLER_Y]);
        let r = first_natural_frequency(&t, 25.0, &Materials::uniform(), &MassModel::default()).unwrap();
        assert_eq!(r.n_free_dofs, 1);
        assert!((r.omega1 - 3.0e4f64.sqrt()).abs() / 3.0e4f64.sqrt() < 1e-12);
    }

    #[test]
    fn unsupported_transverse_dof_is_rigid_body_mode() {
        let t = bar(1.0, [Fixity::PINNED, Fixity::ROLLER_X]);
        assert!(matches!(
            first_natural_frequency(&t, 25.0, &Materials::uniform(), &MassModel::default()),
            Err(FemError::RigidBodyMode { .. })
        ));
    }

    #[test]
    fn pratt_truss_modal() {
        let p = pratt_truss::<f64>();
        let r = first_natural_frequency(&p, 30.0, &Materials::standard(3), &MassModel::default())
            .unwrap();
        assert!(r.omega1 > 0.0 && r.omega1.is_finite());
        assert!(r.residual < 1e-8);
        let r32 = first_natural_frequency(
            &pratt_truss::<f32>(),
            30.0,
            &Materials::standard(3),
            &MassModel::default(),
        )
        .unwrap();
        assert!(((r32.omega1 as f64) - r.omega1).abs() / r.omega1 < 1e-3);
    }
}
