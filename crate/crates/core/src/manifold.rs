//! Built-in target manifolds and their extrinsic geometry.

use serde::{Deserialize, Serialize};

use crate::curve::{DiscreteClosedCurve, NodeField};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Points farther than this from the manifold are rejected as inputs.
pub const ON_MANIFOLD_TOL: f64 = 1e-8;

/// A built-in manifold, embedded isometrically in `R^q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldModel {
    /// Unit sphere of intrinsic dimension `dim` in `R^(dim+1)`.
    Sphere { dim: usize },
    /// Flat torus `R^q / (sides · Z^q)` in periodic coordinates.
    FlatTorus { sides: Vec<f64> },
    /// Constant sectional curvature, without an embedding. Only the
    /// curvature tensor is available; point-level operations are rejected.
    ConstantCurvature { curvature: f64, dim: usize },
}

impl ManifoldModel {
    pub fn sphere(dim: usize) -> Self {
        ManifoldModel::Sphere { dim }
    }

    pub fn unit_sphere() -> Self {
        ManifoldModel::Sphere { dim: 2 }
    }

    pub fn flat_torus(sides: Vec<f64>) -> Self {
        ManifoldModel::FlatTorus { sides }
    }

    /// Checks dimensions and side lengths.
    pub fn validate(&self) -> Result<()> {
        match self {
            ManifoldModel::Sphere { dim } | ManifoldModel::ConstantCurvature { dim, .. } => {
                if *dim < 2 {
                    return Err(Error::InvalidInput(format!(
                        "intrinsic dimension {dim} must be at least 2"
                    )));
                }
            }
            ManifoldModel::FlatTorus { sides } => {
                if sides.len() < 2 {
                    return Err(Error::InvalidInput(
                        "flat torus needs at least two sides".into(),
                    ));
                }
                if sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(Error::InvalidInput(
                        "flat torus sides must be positive".into(),
                    ));
                }
            }
        }
        if let ManifoldModel::ConstantCurvature { curvature, .. } = self {
            if !curvature.is_finite() {
                return Err(Error::InvalidInput("curvature must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            ManifoldModel::Sphere { dim } | ManifoldModel::ConstantCurvature { dim, .. } => *dim,
            ManifoldModel::FlatTorus { sides } => sides.len(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ManifoldModel::Sphere { dim } => dim + 1,
            ManifoldModel::FlatTorus { sides } => sides.len(),
            ManifoldModel::ConstantCurvature { dim, .. } => *dim,
        }
    }

    /// Sectional curvature (all built-in models have constant curvature).
    pub fn sectional_curvature(&self) -> f64 {
        match self {
            ManifoldModel::Sphere { .. } => 1.0,
            ManifoldModel::FlatTorus { .. } => 0.0,
            ManifoldModel::ConstantCurvature { curvature, .. } => *curvature,
        }
    }

    fn require_embedded(&self) -> Result<()> {
        match self {
            ManifoldModel::ConstantCurvature { .. } => Err(Error::Unsupported(
                "constant-curvature model has no embedding".into(),
            )),
            _ => Ok(()),
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "vector of length {} in ambient dimension {}",
                v.len(),
                self.ambient_dim()
            )));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(())
    }

    /// Distance from `x` to the manifold (zero for the torus chart).
    pub fn off_manifold(&self, x: &[f64]) -> f64 {
        match self {
            ManifoldModel::Sphere { .. } => (norm(x) - 1.0).abs(),
            _ => 0.0,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        let off = self.off_manifold(x);
        if off > ON_MANIFOLD_TOL {
            return Err(Error::InvalidInput(format!(
                "point is {off:.3e} away from the manifold"
            )));
        }
        Ok(())
    }

    /// Retraction onto the manifold: radial projection for the sphere,
    /// coordinate wrapping into `[0, side)` for the torus.
    pub fn project_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_embedded()?;
        self.check_dim(x)?;
        match self {
            ManifoldModel::Sphere { .. } => {
                let r = norm(x);
                if r < 1e-300 {
                    return Err(Error::Degenerate("cannot project the origin".into()));
                }
                Ok(x.iter().map(|c| c / r).collect())
            }
            ManifoldModel::FlatTorus { sides } => Ok(x
                .iter()
                .zip(sides)
                .map(|(c, s)| {
                    let w = c.rem_euclid(*s);
                    if w >= *s {
                        0.0
                    } else {
                        w
                    }
                })
                .collect()),
            ManifoldModel::ConstantCurvature { .. } => unreachable!(),
        }
    }

    /// Orthogonal projection of `v` onto the tangent space at `x`.
    pub fn project_tangent(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.require_embedded()?;
        self.check_point(x)?;
        self.check_dim(v)?;
        let mut out = v.to_vec();
        self.project_tangent_in_place(x, &mut out);
        Ok(out)
    }

    /// Unchecked tangent projection used by the inner loops.
    pub(crate) fn project_tangent_in_place(&self, x: &[f64], v: &mut [f64]) {
        if let ManifoldModel::Sphere { .. } = self {
            let r2 = dot(x, x);
            let s = dot(x, v) / r2;
            for (vi, xi) in v.iter_mut().zip(x) {
                *vi -= s * xi;
            }
        }
    }

    fn check_tangent(&self, x: &[f64], v: &[f64]) -> Result<()> {
        self.check_dim(v)?;
        if let ManifoldModel::Sphere { .. } = self {
            let radial = dot(x, v).abs();
            if radial > ON_MANIFOLD_TOL * (1.0 + norm(v)) {
                return Err(Error::InvalidInput(format!(
                    "vector has normal component {radial:.3e}"
                )));
            }
        }
        Ok(())
    }

    /// Second fundamental form `II(v, w)`, a normal vector at `x`.
    pub fn second_fundamental_form(&self, x: &[f64], v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.require_embedded()?;
        self.check_point(x)?;
        self.check_tangent(x, v)?;
        self.check_tangent(x, w)?;
        Ok(match self {
            ManifoldModel::Sphere { .. } => {
                let s = dot(v, w);
                x.iter().map(|c| -s * c).collect()
            }
            _ => vec![0.0; x.len()],
        })
    }

    /// Riemann tensor `R(X, Y)Z = K(<Y,Z>X - <X,Z>Y)`.
    pub fn riemann_curvature(
        &self,
        x: &[f64],
        a: &[f64],
        b: &[f64],
        c: &[f64],
    ) -> Result<Vec<f64>> {
        match self {
            ManifoldModel::ConstantCurvature { .. } => {
                for v in [a, b, c] {
                    self.check_dim(v)?;
                }
            }
            _ => {
                self.check_point(x)?;
                for v in [a, b, c] {
                    self.check_tangent(x, v)?;
                }
            }
        }
        Ok(riemann_constant(self.sectional_curvature(), a, b, c))
    }

    /// Ambient displacement from `a` to `b`; minimal image on the torus.
    pub fn chord(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut e: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        if let ManifoldModel::FlatTorus { sides } = self {
            for (ei, s) in e.iter_mut().zip(sides) {
                *ei -= s * (*ei / s).round();
            }
        }
        e
    }

    /// Intrinsic distance between two points.
    pub fn geodesic_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let e = self.chord(a, b);
        let d = norm(&e);
        match self {
            ManifoldModel::Sphere { .. } => 2.0 * (0.5 * d).min(1.0).asin(),
            _ => d,
        }
    }

    /// Orthonormal basis of the tangent space at `x`.
    pub fn tangent_basis(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.require_embedded()?;
        self.check_point(x)?;
        let q = self.ambient_dim();
        let m = self.intrinsic_dim();
        let mut order: Vec<usize> = (0..q).collect();
        // Start from the coordinate axes least aligned with the normal.
        order.sort_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()).then(i.cmp(&j)));
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        for &k in &order {
            if basis.len() == m {
                break;
            }
            let mut v = vec![0.0; q];
            v[k] = 1.0;
            self.project_tangent_in_place(x, &mut v);
            for b in &basis {
                let s = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= s * bi;
                }
            }
            let n = norm(&v);
            if n > 1e-8 {
                basis.push(v.iter().map(|c| c / n).collect());
            }
        }
        if basis.len() != m {
            return Err(Error::Numerical("tangent basis construction failed".into()));
        }
        Ok(basis)
    }

    /// Covariant derivative of a tangent field along a curve, by tangent
    /// projection of the centered ambient difference quotient.
    pub fn discrete_covariant_derivative(
        &self,
        curve: &DiscreteClosedCurve,
        field: &NodeField,
    ) -> Result<NodeField> {
        if curve.manifold() != self {
            return Err(Error::InvalidInput(
                "curve lives on another manifold".into(),
            ));
        }
        if field.len() != curve.len() || field.dim() != curve.dim() {
            return Err(Error::InvalidInput("field does not match curve".into()));
        }
        let edges = curve.edge_lengths()?;
        let n = curve.len();
        for i in 0..n {
            self.check_tangent(curve.node(i), field.get(i))?;
        }
        Ok(covariant_derivative_unchecked(self, curve, &edges, field))
    }
}

/// `K(<b,c>a - <a,c>b)`.
pub fn riemann_constant(k: f64, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let bc = dot(b, c);
    let ac = dot(a, c);
    a.iter()
        .zip(b)
        .map(|(ai, bi)| k * (bc * ai - ac * bi))
        .collect()
}

pub(crate) fn covariant_derivative_unchecked(
    m: &ManifoldModel,
    curve: &DiscreteClosedCurve,
    edges: &[f64],
    field: &NodeField,
) -> NodeField {
    let n = curve.len();
    let q = curve.dim();
    let mut out = NodeField::zeros(n, q);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        let span = edges[prev] + edges[i];
        let f1 = field.get(next);
        let f0 = field.get(prev);
        let o = out.get_mut(i);
        for k in 0..q {
            o[k] = (f1[k] - f0[k]) / span;
        }
        m.project_tangent_in_place(curve.node(i), o);
    }
    out
}
