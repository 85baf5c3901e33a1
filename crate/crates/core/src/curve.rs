//! Discrete closed curves, the regularized energy and its variations.
//!
//! The energy of a closed polygon `x_0, …, x_{N-1}` is a sum of stencil terms
//! over consecutive triples `(x_{i-1}, x_i, x_{i+1})`:
//!
//! ```text
//! term_i = l_i + sigma² |P_i(u_i - u_{i-1})|² / ds_i
//! ```
//!
//! where `l_i` is the geodesic length of the edge `x_i -> x_{i+1}`, `u_i` the
//! edge chord divided by `l_i`, `ds_i = (l_{i-1} + l_i)/2` and `P_i` the
//! tangent projection at `x_i`. The discrete curvature is
//! `kappa_i = |P_i(u_i - u_{i-1})| / ds_i`, so the energy is exactly
//! `length + sigma² Σ kappa_i² ds_i`.
//!
//! On the sphere every stencil first normalizes its inputs, which makes the
//! energy a function on the ambient space that is invariant under radial
//! scaling of each node. Its ambient gradient is therefore tangent.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dual, HyperDual, Real};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::manifold::{covariant_derivative_unchecked, riemann_constant, ManifoldModel};

/// Smallest node count accepted for a closed curve.
pub const MIN_NODES: usize = 8;
/// Nodes must lie on the manifold to this accuracy.
pub const GEOMETRIC_TOL: f64 = 1e-10;
/// Adjacent nodes closer than this make the curve degenerate.
pub const MIN_CHORD: f64 = 1e-12;

/// Per-node vectors stored contiguously.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeField {
    dim: usize,
    data: Vec<f64>,
}

impl NodeField {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; n * dim],
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::InvalidInput(
                "field length not a multiple of dim".into(),
            ));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("ragged or empty field".into()));
        }
        Ok(Self {
            dim,
            data: rows.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Largest Euclidean norm over nodes.
    pub fn max_norm(&self) -> f64 {
        self.data.chunks(self.dim).map(norm).fold(0.0, f64::max)
    }

    /// Flat Euclidean inner product.
    pub fn dot(&self, other: &NodeField) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn scaled(&self, k: f64) -> NodeField {
        NodeField {
            dim: self.dim,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }
}

/// Viscosity parameter of the energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub sigma: f64,
}

impl EnergyParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma {sigma} must be finite and >= 0"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// A closed polygon with nodes on a built-in manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteClosedCurve {
    manifold: ManifoldModel,
    dim: usize,
    nodes: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Geom {
    Sphere,
    Flat,
}

macro_rules! with_dim {
    ($q:expr, $f:ident::<_, _>($($arg:expr),*)) => {
        match $q {
            2 => $f::<2, 6>($($arg),*),
            3 => $f::<3, 9>($($arg),*),
            4 => $f::<4, 12>($($arg),*),
            q => unreachable!("ambient dimension {q} rejected at construction"),
        }
    };
}

impl DiscreteClosedCurve {
    /// Builds a curve from nodes that already lie on the manifold.
    pub fn new(manifold: ManifoldModel, nodes: Vec<Vec<f64>>) -> Result<Self> {
        let dim = manifold.ambient_dim();
        if nodes.iter().any(|x| x.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "every node needs {dim} coordinates"
            )));
        }
        Self::from_flat(manifold, nodes.concat())
    }

    /// Builds a curve from a flat coordinate array.
    pub fn from_flat(manifold: ManifoldModel, nodes: Vec<f64>) -> Result<Self> {
        manifold.validate()?;
        if matches!(manifold, ManifoldModel::ConstantCurvature { .. }) {
            return Err(Error::Unsupported(
                "curves need an embedded manifold".into(),
            ));
        }
        let dim = manifold.ambient_dim();
        if !(2..=4).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "ambient dimension {dim} (supported: 2 to 4)"
            )));
        }
        if nodes.len() % dim != 0 {
            return Err(Error::InvalidInput(
                "coordinate count not a multiple of dim".into(),
            ));
        }
        let curve = Self {
            manifold,
            dim,
            nodes,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Projects each point onto the manifold first.
    pub fn from_points_projected(manifold: ManifoldModel, points: Vec<Vec<f64>>) -> Result<Self> {
        let projected = points
            .iter()
            .map(|x| manifold.project_point(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifold, projected)
    }

    /// Samples `f(theta)` at `theta = 2πi/n` and projects onto the manifold.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(
        manifold: ManifoldModel,
        n: usize,
        f: F,
    ) -> Result<Self> {
        let pts = (0..n)
            .map(|i| f(std::f64::consts::TAU * i as f64 / n as f64))
            .collect();
        Self::from_points_projected(manifold, pts)
    }

    /// Latitude circle `x_3 = height` on the unit 2-sphere, uniformly spaced.
    pub fn latitude(height: f64, n: usize) -> Result<Self> {
        if !(height.abs() < 1.0) {
            return Err(Error::Degenerate(format!("latitude {height} is a pole")));
        }
        let r = (1.0 - height * height).sqrt();
        Self::from_fn(ManifoldModel::unit_sphere(), n, |th| {
            vec![r * th.cos(), r * th.sin(), height]
        })
    }

    /// The equator of the unit 2-sphere.
    pub fn equator(n: usize) -> Result<Self> {
        Self::latitude(0.0, n)
    }

    /// The equator traversed `k` times.
    pub fn equator_cover(k: usize, n: usize) -> Result<Self> {
        Self::from_fn(ManifoldModel::unit_sphere(), n, |th| {
            let a = k as f64 * th;
            vec![a.cos(), a.sin(), 0.0]
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "curve has {n} nodes, at least {MIN_NODES} required"
            )));
        }
        for i in 0..n {
            let x = self.node(i);
            if x.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("node {i} is not finite")));
            }
            let off = self.manifold.off_manifold(x);
            if off > GEOMETRIC_TOL {
                return Err(Error::InvalidInput(format!(
                    "node {i} is {off:.3e} away from the manifold"
                )));
            }
        }
        self.edge_lengths().map(|_| ())
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.manifold
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn flat_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        self.nodes.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Returns a curve with the same manifold and new (validated) nodes.
    pub fn with_flat_nodes(&self, nodes: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.manifold.clone(), nodes)
    }

    fn geom(&self) -> Geom {
        match self.manifold {
            ManifoldModel::Sphere { .. } => Geom::Sphere,
            _ => Geom::Flat,
        }
    }

    /// Geodesic edge lengths `l_i = d(x_i, x_{i+1})`.
    pub fn edge_lengths(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let e = self.manifold.chord(self.node(i), self.node((i + 1) % n));
            let c = norm(&e);
            if c <= MIN_CHORD {
                return Err(Error::Degenerate(format!(
                    "nodes {i} and {} coincide",
                    (i + 1) % n
                )));
            }
            out.push(match self.geom() {
                Geom::Sphere => 2.0 * (0.5 * c).min(1.0).asin(),
                Geom::Flat => c,
            });
        }
        Ok(out)
    }

    /// Smallest chord between adjacent nodes.
    pub fn min_chord(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| norm(&self.manifold.chord(self.node(i), self.node((i + 1) % n))))
            .fold(f64::INFINITY, f64::min)
    }

    /// Stencil points around node `i`, with torus neighbours unwrapped
    /// relative to the centre.
    fn stencil_points(&self, i: usize) -> [Vec<f64>; 3] {
        let n = self.len();
        let c = self.node(i);
        let mut prev = self.manifold.chord(c, self.node((i + n - 1) % n));
        let mut next = self.manifold.chord(c, self.node((i + 1) % n));
        for k in 0..self.dim {
            prev[k] += c[k];
            next[k] += c[k];
        }
        [prev, c.to_vec(), next]
    }

    /// Per-stencil `(edge length, curvature² · ds, ds)`.
    fn stencil_values(&self) -> Vec<(f64, f64, f64)> {
        let geom = self.geom();
        (0..self.len())
            .map(|i| {
                let pts = self.stencil_points(i);
                with_dim!(self.dim, stencil_f64::<_, _>(geom, &pts))
            })
            .collect()
    }

    /// Total geodesic length of the polygon.
    pub fn length(&self) -> f64 {
        self.stencil_values().iter().map(|v| v.0).sum()
    }

    /// Discrete geodesic curvature at each node.
    pub fn geodesic_curvature(&self) -> Result<Vec<f64>> {
        self.edge_lengths()?;
        Ok(self
            .stencil_values()
            .into_iter()
            .map(|(_, k2ds, ds)| (k2ds / ds).sqrt())
            .collect())
    }

    /// `(length, bending)` computed from the same stencils.
    pub fn energy_parts(&self, e: &EnergyParams) -> (f64, f64) {
        let mut length = 0.0;
        let mut bend = 0.0;
        for (l, k2ds, _) in self.stencil_values() {
            length += l;
            bend += k2ds;
        }
        (length, e.sigma2() * bend)
    }

    /// Regularized energy `length + bending`.
    pub fn energy(&self, e: &EnergyParams) -> f64 {
        let (l, b) = self.energy_parts(e);
        l + b
    }

    /// `sigma² Σ kappa_i² ds_i`.
    pub fn bending(&self, e: &EnergyParams) -> f64 {
        self.energy_parts(e).1
    }

    /// Exact gradient of the discrete energy with respect to the nodes,
    /// projected onto the tangent spaces.
    pub fn first_variation(&self, e: &EnergyParams) -> NodeField {
        let n = self.len();
        let q = self.dim;
        let geom = self.geom();
        let s2 = e.sigma2();
        let mut grad = NodeField::zeros(n, q);
        for i in 0..n {
            let pts = self.stencil_points(i);
            let g = with_dim!(q, stencil_gradient::<_, _>(geom, &pts, s2));
            for k in 0..3 {
                let node = (i + n + k - 1) % n;
                let dst = grad.get_mut(node);
                for a in 0..q {
                    dst[a] += g[k * q + a];
                }
            }
        }
        for i in 0..n {
            self.manifold
                .project_tangent_in_place(self.node(i), grad.get_mut(i));
        }
        grad
    }

    /// Per-stencil ambient Hessian blocks of size `3q × 3q` (row-major),
    /// with stencil `i` acting on nodes `i-1, i, i+1`.
    pub fn stencil_hessians(&self, e: &EnergyParams) -> Vec<Vec<f64>> {
        let geom = self.geom();
        let s2 = e.sigma2();
        (0..self.len())
            .map(|i| {
                let pts = self.stencil_points(i);
                with_dim!(self.dim, stencil_hessian::<_, _>(geom, &pts, s2))
            })
            .collect()
    }

    /// Unit tangents from centered chords.
    pub fn unit_tangents(&self) -> Result<NodeField> {
        let n = self.len();
        let mut out = NodeField::zeros(n, self.dim);
        for i in 0..n {
            let x = self.node(i);
            let mut t = self
                .manifold
                .chord(self.node((i + n - 1) % n), self.node((i + 1) % n));
            self.manifold.project_tangent_in_place(x, &mut t);
            let len = norm(&t);
            if len <= MIN_CHORD {
                return Err(Error::Degenerate(format!("no tangent at node {i}")));
            }
            for (o, c) in out.get_mut(i).iter_mut().zip(&t) {
                *o = c / len;
            }
        }
        Ok(out)
    }

    /// Max-norm residual of the critical-point equation
    /// `D_t u' = sigma² (D_t(2 D_t² u' + 3 kappa² u') + 2 R(D_t u', u') u')`
    /// assembled from centered covariant differences.
    pub fn el_residual(&self, e: &EnergyParams) -> Result<f64> {
        let fields = self.el_fields()?;
        let s2 = e.sigma2();
        let k = self.manifold.sectional_curvature();
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let a = fields.accel.get(i);
            let t = fields.tangent.get(i);
            let r = riemann_constant(k, a, t, t);
            let c = fields.flux_derivative.get(i);
            let mut res = 0.0;
            for d in 0..self.dim {
                let v = a[d] - s2 * (c[d] + 2.0 * r[d]);
                res += v * v;
            }
            worst = worst.max(res.sqrt());
        }
        Ok(worst)
    }

    /// Centered-difference fields used by the residual diagnostics:
    /// tangent, acceleration `A = D_t u'`, `B = D_t A` and
    /// `D_t(2B + 3|A|² u')`.
    pub fn el_fields(&self) -> Result<ElFields> {
        let n = self.len();
        if n < 16 {
            return Err(Error::InvalidInput(format!(
                "{n} nodes is too few for the residual stencil (need 16)"
            )));
        }
        let edges = self.edge_lengths()?;
        let tangent = self.unit_tangents()?;
        let accel = covariant_derivative_unchecked(&self.manifold, self, &edges, &tangent);
        let jerk = covariant_derivative_unchecked(&self.manifold, self, &edges, &accel);
        let mut flux = NodeField::zeros(n, self.dim);
        for i in 0..n {
            let k2 = dot(accel.get(i), accel.get(i));
            let t = tangent.get(i);
            let b = jerk.get(i);
            for (d, f) in flux.get_mut(i).iter_mut().enumerate() {
                *f = 2.0 * b[d] + 3.0 * k2 * t[d];
            }
        }
        let flux_derivative = covariant_derivative_unchecked(&self.manifold, self, &edges, &flux);
        Ok(ElFields {
            tangent,
            accel,
            jerk,
            flux_derivative,
        })
    }

    /// Node coordinates lifted to a continuous path in `R^q`; on the torus
    /// node `i+1` is `node i` plus the minimal-image chord. Also returns the
    /// closing translation `x_N - x_0` (zero off the torus).
    pub fn unwrapped(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.node(0).to_vec());
        for i in 0..n {
            let e = self.manifold.chord(self.node(i), self.node((i + 1) % n));
            let next: Vec<f64> = out[i].iter().zip(&e).map(|(a, b)| a + b).collect();
            out.push(next);
        }
        let closing: Vec<f64> = out[n].iter().zip(&out[0]).map(|(a, b)| a - b).collect();
        out.pop();
        (out, closing)
    }

    /// Resamples to `n` nodes equally spaced in geodesic chord length.
    ///
    /// A periodic cubic spline through the nodes, parametrized by cumulative
    /// chord length, is evaluated and projected back to the manifold; the
    /// sample parameters are then corrected until adjacent chords agree.
    pub fn resample_arclength(&self, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "cannot resample to {n} nodes (minimum {MIN_NODES})"
            )));
        }
        let edges = self.edge_lengths()?;
        let total: f64 = edges.iter().sum();
        let mut knots = Vec::with_capacity(self.len() + 1);
        knots.push(0.0);
        for l in &edges {
            knots.push(knots.last().unwrap() + l);
        }
        let (points, closing) = self.unwrapped();
        let q = self.dim;
        let splines: Vec<PeriodicSpline> = (0..q)
            .map(|d| {
                let vals: Vec<f64> = points
                    .iter()
                    .zip(&knots)
                    .map(|(p, s)| p[d] - closing[d] * s / total)
                    .collect();
                PeriodicSpline::new(&knots, &vals)
            })
            .collect::<Result<_>>()?;
        let eval = |s: f64| -> Result<Vec<f64>> {
            let raw: Vec<f64> = (0..q)
                .map(|d| splines[d].eval(s) + closing[d] * s / total)
                .collect();
            self.manifold.project_point(&raw)
        };

        let mut params: Vec<f64> = (0..n).map(|j| total * j as f64 / n as f64).collect();
        let mut pts: Vec<Vec<f64>> = params.iter().map(|&s| eval(s)).collect::<Result<_>>()?;
        for _ in 0..100 {
            let mut cum = vec![0.0; n + 1];
            for j in 0..n {
                let l = self.manifold.geodesic_distance(&pts[j], &pts[(j + 1) % n]);
                cum[j + 1] = cum[j] + l;
            }
            let new_total = cum[n];
            let mean = new_total / n as f64;
            let spread = (0..n)
                .map(|j| ((cum[j + 1] - cum[j]) - mean).abs())
                .fold(0.0, f64::max)
                / mean;
            if spread < 1e-12 {
                break;
            }
            // Move each sample toward its equal-arclength target; the chord
            // metric and the spline parameter agree to first order.
            let ratio = total / new_total;
            for j in 1..n {
                let target = mean * j as f64;
                params[j] += (target - cum[j]) * ratio;
            }
            pts = params.iter().map(|&s| eval(s)).collect::<Result<_>>()?;
        }
        Self::new(self.manifold.clone(), pts)
    }

    /// Largest node-wise geodesic distance to another curve with the same
    /// node count.
    pub fn max_node_distance(&self, other: &Self) -> Result<f64> {
        if other.len() != self.len() || other.dim != self.dim {
            return Err(Error::InvalidInput("curves have different shapes".into()));
        }
        Ok((0..self.len())
            .map(|i| self.manifold.geodesic_distance(self.node(i), other.node(i)))
            .fold(0.0, f64::max))
    }

    /// Relative spread of edge lengths, `max |l_i - mean| / mean`.
    pub fn spacing_spread(&self) -> Result<f64> {
        let e = self.edge_lengths()?;
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        Ok(e.iter().map(|l| (l - mean).abs()).fold(0.0, f64::max) / mean)
    }
}

/// Fields produced by [`DiscreteClosedCurve::el_fields`].
#[derive(Clone, Debug)]
pub struct ElFields {
    pub tangent: NodeField,
    pub accel: NodeField,
    pub jerk: NodeField,
    pub flux_derivative: NodeField,
}

fn stencil<T: Real, const Q: usize>(geom: Geom, x: &[[T; Q]; 3]) -> (T, T, T) {
    let pts: [[T; Q]; 3] = match geom {
        Geom::Sphere => std::array::from_fn(|k| {
            let mut r2 = T::cst(0.0);
            for a in 0..Q {
                r2 = r2 + x[k][a] * x[k][a];
            }
            let r = r2.sqrt();
            std::array::from_fn(|a| x[k][a] / r)
        }),
        Geom::Flat => *x,
    };
    let edge = |a: usize| -> ([T; Q], T) {
        let e: [T; Q] = std::array::from_fn(|d| pts[a + 1][d] - pts[a][d]);
        let mut c2 = T::cst(0.0);
        for d in 0..Q {
            c2 = c2 + e[d] * e[d];
        }
        let c = c2.sqrt();
        let l = match geom {
            Geom::Sphere => c.scale(0.5).asin().scale(2.0),
            Geom::Flat => c,
        };
        (e, l)
    };
    let (e0, l0) = edge(0);
    let (e1, l1) = edge(1);
    let mut diff: [T; Q] = std::array::from_fn(|d| e1[d] / l1 - e0[d] / l0);
    if let Geom::Sphere = geom {
        let mut s = T::cst(0.0);
        for d in 0..Q {
            s = s + diff[d] * pts[1][d];
        }
        for d in 0..Q {
            diff[d] = diff[d] - s * pts[1][d];
        }
    }
    let mut d2 = T::cst(0.0);
    for d in 0..Q {
        d2 = d2 + diff[d] * diff[d];
    }
    let ds = (l0 + l1).scale(0.5);
    (l1, d2 / ds, ds)
}

fn to_array<const Q: usize>(pts: &[Vec<f64>; 3]) -> [[f64; Q]; 3] {
    std::array::from_fn(|k| std::array::from_fn(|a| pts[k][a]))
}

fn stencil_f64<const Q: usize, const N: usize>(geom: Geom, pts: &[Vec<f64>; 3]) -> (f64, f64, f64) {
    stencil::<f64, Q>(geom, &to_array::<Q>(pts))
}

fn stencil_gradient<const Q: usize, const N: usize>(
    geom: Geom,
    pts: &[Vec<f64>; 3],
    sigma2: f64,
) -> Vec<f64> {
    debug_assert_eq!(N, 3 * Q);
    let x: [[Dual<N>; Q]; 3] =
        std::array::from_fn(|k| std::array::from_fn(|a| Dual::variable(pts[k][a], k * Q + a)));
    let (l, b, _) = stencil::<Dual<N>, Q>(geom, &x);
    let t = l + b.scale(sigma2);
    t.d.to_vec()
}

fn stencil_hessian<const Q: usize, const N: usize>(
    geom: Geom,
    pts: &[Vec<f64>; 3],
    sigma2: f64,
) -> Vec<f64> {
    debug_assert_eq!(N, 3 * Q);
    let x: [[HyperDual<N>; Q]; 3] =
        std::array::from_fn(|k| std::array::from_fn(|a| HyperDual::variable(pts[k][a], k * Q + a)));
    let (l, b, _) = stencil::<HyperDual<N>, Q>(geom, &x);
    let t = l + b.scale(sigma2);
    t.h.iter().flat_map(|row| row.iter().copied()).collect()
}

/// Periodic cubic spline on knots `s_0 < … < s_n` (the value at `s_n`
/// equals the value at `s_0`).
struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len() - 1;
        let h: Vec<f64> = (0..n).map(|i| knots[i + 1] - knots[i]).collect();
        if h.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Degenerate("spline knots not increasing".into()));
        }
        let y = |i: usize| values[i % n];
        // Cyclic tridiagonal system for the second derivatives M_0..M_{n-1}:
        // h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = rhs_i.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            let hi = h[i];
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hi);
            sup[i] = hi;
            rhs[i] = 6.0 * ((y(i + 1) - y(i)) / hi - (y(i) - y(i + n - 1)) / hp);
        }
        let second = solve_cyclic(&sub, &diag, &sup, &rhs);
        Ok(Self {
            knots: knots.to_vec(),
            values: values[..n].to_vec(),
            second,
        })
    }

    fn eval(&self, s: f64) -> f64 {
        let n = self.values.len();
        let period = self.knots[n] - self.knots[0];
        let s = self.knots[0] + (s - self.knots[0]).rem_euclid(period);
        let i = match self.knots.partition_point(|&k| k <= s) {
            0 => 0,
            p => (p - 1).min(n - 1),
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - s) / h;
        let b = (s - self.knots[i]) / h;
        let y0 = self.values[i];
        let y1 = self.values[(i + 1) % n];
        let m0 = self.second[i];
        let m1 = self.second[(i + 1) % n];
        a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }
}

/// Solves a cyclic tridiagonal system (row `i` couples `i-1, i, i+1`
/// modulo `n`) by the Sherman–Morrison correction of the Thomas algorithm.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1]; // row n-1, column 0
    let beta = sub[0]; // row 0, column n-1
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &d, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &d, sup, &u);
    let factor = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
