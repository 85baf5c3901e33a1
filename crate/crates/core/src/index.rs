//! Second variation of the discrete energy and Morse index.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::{DiscreteClosedCurve, EnergyParams, NodeField};
use crate::error::{Error, Result};
use crate::linalg::dot;

/// Largest gradient norm for which a curve counts as critical.
pub const CRITICAL_TOL: f64 = 1e-4;

/// Relative threshold separating zero modes from the rest of the spectrum.
pub const DEFAULT_REL_EIG_TOL: f64 = 1e-6;

/// Hessian of the discrete energy restricted to tangential perturbations.
///
/// `matrix` is `P H P` where `H` is the ambient Hessian of the energy as a
/// function of the node coordinates and `P` the block-diagonal tangent
/// projection. On the sphere the energy is invariant under radial scaling of
/// each node, so its gradient is tangent and `P H P` is the Riemannian
/// Hessian on the product of spheres.
#[derive(Clone, Debug)]
pub struct HessianMatrix {
    pub nodes: usize,
    pub dim: usize,
    pub sigma: f64,
    pub matrix: DMatrix<f64>,
    /// Orthonormal tangent basis per node, `intrinsic dim` vectors each.
    pub basis: Vec<Vec<Vec<f64>>>,
    pub grad_norm: f64,
    /// False when the curve was not critical to [`CRITICAL_TOL`].
    pub near_critical: bool,
}

pub fn hessian(c: &DiscreteClosedCurve, e: &EnergyParams) -> Result<HessianMatrix> {
    let n = c.len();
    let q = c.dim();
    let m = c.manifold();
    let blocks = c.stencil_hessians(e);
    let size = n * q;
    let mut h = DMatrix::<f64>::zeros(size, size);
    let w = 3 * q;
    for (s, blk) in blocks.iter().enumerate() {
        for a in 0..3 {
            let na = (s + n + a - 1) % n;
            for b in 0..3 {
                let nb = (s + n + b - 1) % n;
                for i in 0..q {
                    for j in 0..q {
                        h[(na * q + i, nb * q + j)] += blk[(a * q + i) * w + b * q + j];
                    }
                }
            }
        }
    }
    let projectors: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let mut p = DMatrix::<f64>::identity(q, q);
            for k in 0..q {
                let mut col = vec![0.0; q];
                col[k] = 1.0;
                m.project_tangent_in_place(c.node(i), &mut col);
                for r in 0..q {
                    p[(r, k)] = col[r];
                }
            }
            p
        })
        .collect();
    let mut phq = DMatrix::<f64>::zeros(size, size);
    for bi in 0..n {
        for d in 0..5 {
            let bj = (bi + n + d - 2) % n;
            let blk = h.view((bi * q, bj * q), (q, q)).clone_owned();
            let proj = &projectors[bi] * blk * &projectors[bj];
            phq.view_mut((bi * q, bj * q), (q, q)).copy_from(&proj);
        }
    }
    // Symmetrize away rounding asymmetry from the accumulation order.
    let matrix = (&phq + phq.transpose()) * 0.5;
    let basis = (0..n)
        .map(|i| m.tangent_basis(c.node(i)))
        .collect::<Result<Vec<_>>>()?;
    let grad_norm = c.first_variation(e).max_norm();
    Ok(HessianMatrix {
        nodes: n,
        dim: q,
        sigma: e.sigma,
        matrix,
        basis,
        grad_norm,
        near_critical: grad_norm <= CRITICAL_TOL,
    })
}

impl HessianMatrix {
    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    fn intrinsic_dim(&self) -> usize {
        self.basis[0].len()
    }

    /// The Hessian in tangent-basis coordinates.
    pub fn reduced(&self) -> DMatrix<f64> {
        let q = self.dim;
        let m = self.intrinsic_dim();
        let n = self.nodes;
        let mut out = DMatrix::<f64>::zeros(n * m, n * m);
        for bi in 0..n {
            let bb: DMatrix<f64> = DMatrix::from_fn(q, m, |a, k| self.basis[bi][k][a]);
            for d in 0..5 {
                let bj = (bi + n + d - 2) % n;
                let cb: DMatrix<f64> = DMatrix::from_fn(q, m, |a, k| self.basis[bj][k][a]);
                let blk = self.matrix.view((bi * q, bj * q), (q, q));
                let r = bb.transpose() * blk * cb;
                out.view_mut((bi * m, bj * m), (m, m)).copy_from(&r);
            }
        }
        (&out + out.transpose()) * 0.5
    }

    /// `H v` for a per-node ambient field.
    pub fn apply(&self, v: &NodeField) -> NodeField {
        let x = DVector::from_column_slice(v.as_slice());
        let y = &self.matrix * x;
        NodeField::from_flat(self.dim, y.as_slice().to_vec()).expect("shape preserved")
    }

    /// `v^T H v`.
    pub fn quadratic_form(&self, v: &NodeField) -> f64 {
        self.apply(v).dot(v)
    }

    /// Converts a reduced coordinate vector into an ambient node field.
    pub fn ambient_field(&self, coords: &[f64]) -> NodeField {
        let q = self.dim;
        let m = self.intrinsic_dim();
        let mut out = NodeField::zeros(self.nodes, q);
        for i in 0..self.nodes {
            let dst = out.get_mut(i);
            for k in 0..m {
                for a in 0..q {
                    dst[a] += coords[i * m + k] * self.basis[i][k][a];
                }
            }
        }
        out
    }

    /// Ascending eigenvalues and matching ambient eigenfields.
    pub fn spectrum(&self) -> Result<(Vec<f64>, Vec<NodeField>)> {
        let red = self.reduced();
        let eig = red
            .try_symmetric_eigen(1e-14, 0)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let fields = order
            .iter()
            .map(|&k| self.ambient_field(eig.eigenvectors.column(k).as_slice()))
            .collect();
        Ok((values, fields))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    /// Eigenvalues below `-tol`.
    pub index: usize,
    /// Eigenvalues in `[-tol, tol]`.
    pub zero_modes: usize,
    /// `index + zero_modes`.
    pub index_with_zero_modes: usize,
    pub tol: f64,
    pub eigenvalues: Vec<f64>,
}

/// Counts negative eigenvalues of the tangent-restricted Hessian. The
/// threshold defaults to `1e-6 · max |eigenvalue|`.
pub fn morse_index(h: &HessianMatrix, eig_tol: Option<f64>) -> Result<MorseReport> {
    let (values, _) = h.spectrum()?;
    Ok(count_modes(values, eig_tol))
}

fn count_modes(values: Vec<f64>, eig_tol: Option<f64>) -> MorseReport {
    let scale = values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let tol = eig_tol.unwrap_or(DEFAULT_REL_EIG_TOL * scale);
    let index = values.iter().filter(|&&v| v < -tol).count();
    let zero_modes = values.iter().filter(|&&v| v.abs() <= tol).count();
    MorseReport {
        index,
        zero_modes,
        index_with_zero_modes: index + zero_modes,
        tol,
        eigenvalues: values,
    }
}

/// Discrete second variation of length at a geodesic,
/// `∫ |D_t v|² - <D_t v, u'>² - <R(u', v)v, u'> ds`.
pub fn length_second_variation(c: &DiscreteClosedCurve, v: &NodeField) -> Result<f64> {
    let m = c.manifold();
    let dv = m.discrete_covariant_derivative(c, v)?;
    let t = c.unit_tangents()?;
    let edges = c.edge_lengths()?;
    let n = c.len();
    let k = m.sectional_curvature();
    let mut total = 0.0;
    for i in 0..n {
        let ds = 0.5 * (edges[(i + n - 1) % n] + edges[i]);
        let d = dv.get(i);
        let ti = t.get(i);
        let vi = v.get(i);
        let tv = dot(ti, vi);
        let sectional = k * (dot(vi, vi) * dot(ti, ti) - tv * tv);
        total += (dot(d, d) - dot(d, ti).powi(2) - sectional) * ds;
    }
    Ok(total)
}

/// Projects `field` (sampled on a curve with the same node count) onto the
/// tangent spaces of `c`.
pub fn transport(c: &DiscreteClosedCurve, field: &NodeField) -> Result<NodeField> {
    if field.len() != c.len() || field.dim() != c.dim() {
        return Err(Error::InvalidInput("field does not match the curve".into()));
    }
    let mut out = field.clone();
    for i in 0..c.len() {
        c.manifold()
            .project_tangent_in_place(c.node(i), out.get_mut(i));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub sigma: f64,
    pub index: usize,
    pub zero_modes: usize,
    pub grad_norm: f64,
    /// Second variation at this curve of each transported negative field of
    /// the limit.
    pub field_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityReport {
    pub limit_index: usize,
    pub limit_zero_modes: usize,
    /// Second variation of length at the limit on its negative fields.
    pub limit_field_values: Vec<f64>,
    pub entries: Vec<SequenceEntry>,
    /// `limit_index <= min index over the sequence`.
    pub holds: bool,
}

/// Compares the index of a limit geodesic with the indices along a
/// sequence of critical curves, transporting the limit's negative
/// eigenfields by tangent projection onto each curve.
///
/// Each negative field is normalized so that `sum |v_i|² h_i = 2 pi`, which
/// keeps its quadratic form comparable across resolutions.
pub fn semicontinuity_report(
    seq: &[(DiscreteClosedCurve, f64)],
    limit: &DiscreteClosedCurve,
    eig_tol: Option<f64>,
) -> Result<SemicontinuityReport> {
    let zero = EnergyParams::new(0.0)?;
    let hl = hessian(limit, &zero)?;
    let (values, fields) = hl.spectrum()?;
    let report = count_modes(values.clone(), eig_tol);
    let edges = limit.edge_lengths()?;
    let negatives: Vec<NodeField> = fields
        .into_iter()
        .take(report.index)
        .map(|f| {
            let mass: f64 = f
                .rows()
                .enumerate()
                .map(|(i, r)| dot(r, r) * edges[i])
                .sum();
            f.scaled((std::f64::consts::TAU / mass).sqrt())
        })
        .collect();
    let limit_field_values = negatives.iter().map(|f| hl.quadratic_form(f)).collect();
    let mut entries = Vec::with_capacity(seq.len());
    for (c, s) in seq {
        let e = EnergyParams::new(*s)?;
        let h = hessian(c, &e)?;
        let mr = morse_index(&h, eig_tol)?;
        let field_values = if c.len() == limit.len() {
            negatives
                .iter()
                .map(|f| transport(c, f).map(|t| h.quadratic_form(&t)))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        entries.push(SequenceEntry {
            sigma: *s,
            index: mr.index,
            zero_modes: mr.zero_modes,
            grad_norm: h.grad_norm,
            field_values,
        });
    }
    let min_index = entries.iter().map(|e| e.index).min().unwrap_or(usize::MAX);
    Ok(SemicontinuityReport {
        limit_index: report.index,
        limit_zero_modes: report.zero_modes,
        limit_field_values,
        holds: report.index <= min_index,
        entries,
    })
}
