use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DpError, Result};
use crate::integrator::OdeState;
use crate::par;

pub const DEFAULT_MAX_NODES: usize = 1_000_000;

/// Nodes per parallel task during basis evaluation.
const BASIS_CHUNK: usize = 512;

/// Grid layout for the controller's network. Input order is
/// `[x, y, psi, u, v, r, alpha1_x, alpha1_y, alpha1_psi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfGridSpec {
    pub ranges: Vec<(f64, f64)>,
    pub points_per_dim: usize,
    pub width: f64,
    pub max_nodes: usize,
}

impl RbfGridSpec {
    /// Eight standard center intervals plus `[-0.2, 0.2]` for the ninth
    /// input, which has none.
    pub fn default_ranges() -> Vec<(f64, f64)> {
        vec![
            (-2.0, 10.0),
            (0.0, 10.0),
            (-0.05, 0.2),
            (-0.35, 0.05),
            (-0.012, 0.004),
            (-0.5, 0.2),
            (-0.7, 0.0),
            (-0.14, 0.04),
            (-0.2, 0.2),
        ]
    }

    pub fn build(&self) -> Result<RbfNetwork> {
        let grid = build_grid_centers(&self.ranges, self.points_per_dim, self.max_nodes)?;
        let mut net = RbfNetwork::uniform(grid, self.width)?;
        net.axes = Some(grid_axes(&self.ranges, self.points_per_dim));
        Ok(net)
    }
}

impl Default for RbfGridSpec {
    fn default() -> Self {
        Self {
            ranges: Self::default_ranges(),
            points_per_dim: 3,
            width: 1.0,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Row-major `nodes x dim` matrix of centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCenters {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl GridCenters {
    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }
}

fn grid_axes(ranges: &[(f64, f64)], points_per_dim: usize) -> Vec<Vec<f64>> {
    ranges
        .iter()
        .map(|&(lo, hi)| {
            let step = (hi - lo) / (points_per_dim - 1) as f64;
            (0..points_per_dim)
                .map(|k| if k + 1 == points_per_dim { hi } else { lo + step * k as f64 })
                .collect()
        })
        .collect()
}

/// Cartesian product of equally spaced points (endpoints included) in
/// lexicographic order: the last dimension varies fastest.
pub fn build_grid_centers(
    ranges: &[(f64, f64)],
    points_per_dim: usize,
    max_nodes: usize,
) -> Result<GridCenters> {
    if ranges.is_empty() {
        return Err(DpError::InvalidParameter("at least one range is required".into()));
    }
    if points_per_dim < 2 {
        return Err(DpError::InvalidParameter(format!(
            "points_per_dim must be >= 2, got {points_per_dim}"
        )));
    }
    for (i, &(lo, hi)) in ranges.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DpError::InvalidParameter(format!(
                "range {i} must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
    }
    let requested = (points_per_dim as u128)
        .checked_pow(ranges.len() as u32)
        .unwrap_or(u128::MAX);
    if requested > max_nodes as u128 {
        return Err(DpError::Capacity {
            requested,
            ceiling: max_nodes,
        });
    }
    let nodes = requested as usize;
    let dim = ranges.len();
    let axes = grid_axes(ranges, points_per_dim);

    let mut coords = Vec::with_capacity(nodes * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..nodes {
        coords.extend(idx.iter().zip(&axes).map(|(&k, axis)| axis[k]));
        // odometer increment, last digit fastest
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < points_per_dim {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(GridCenters { dim, coords })
}

/// Gaussian RBF layer `g_j(z) = exp(-|z - k_j|^2 / (2 h_j^2)) / (sqrt(2 pi) h_j)`.
///
/// The leading normalisation is kept; it only rescales the weights.
///
/// Networks built from an [`RbfGridSpec`] share one width across nodes, so
/// the Gaussian factors per dimension and [`RbfNetwork::basis_into`] takes
/// a tensor-product path with one `exp` per axis point instead of per node.
#[derive(Debug, Clone)]
pub struct RbfNetwork {
    centers: GridCenters,
    widths: Vec<f64>,
    scale: Vec<f64>,
    inv_two_h2: Vec<f64>,
    axes: Option<Vec<Vec<f64>>>,
}

impl RbfNetwork {
    pub fn new(centers: GridCenters, widths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(DpError::InvalidParameter("network needs at least one node".into()));
        }
        if widths.len() != centers.len() {
            return Err(DpError::DimensionMismatch {
                expected: centers.len(),
                found: widths.len(),
            });
        }
        if widths.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(DpError::InvalidParameter("RBF widths must be positive".into()));
        }
        if centers.coords.iter().any(|c| !c.is_finite()) {
            return Err(DpError::InvalidParameter("RBF centers must be finite".into()));
        }
        let scale = widths.iter().map(|h| 1.0 / ((2.0 * PI).sqrt() * h)).collect();
        let inv_two_h2 = widths.iter().map(|h| 1.0 / (2.0 * h * h)).collect();
        Ok(Self {
            centers,
            widths,
            scale,
            inv_two_h2,
            axes: None,
        })
    }

    pub fn uniform(centers: GridCenters, width: f64) -> Result<Self> {
        let n = centers.len();
        Self::new(centers, vec![width; n])
    }

    pub fn node_count(&self) -> usize {
        self.centers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.centers.dim
    }

    pub fn centers(&self) -> &GridCenters {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    #[inline]
    fn node_value(&self, j: usize, z: &[f64]) -> f64 {
        let c = self.centers.row(j);
        let mut d2 = 0.0;
        for (zi, ci) in z.iter().zip(c) {
            let e = zi - ci;
            d2 += e * e;
        }
        self.scale[j] * (-d2 * self.inv_two_h2[j]).exp()
    }

    fn check_dims(&self, z: &[f64], out: &[f64]) -> Result<()> {
        if z.len() != self.input_dim() {
            return Err(DpError::DimensionMismatch {
                expected: self.input_dim(),
                found: z.len(),
            });
        }
        if out.len() != self.node_count() {
            return Err(DpError::DimensionMismatch {
                expected: self.node_count(),
                found: out.len(),
            });
        }
        Ok(())
    }

    /// Single-threaded evaluation into `out`.
    pub fn basis_into_seq(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dims(z, out)?;
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.node_value(j, z);
        }
        Ok(())
    }

    /// Evaluation split across the rayon pool.
    #[cfg(feature = "parallel")]
    pub fn basis_into_par(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        use rayon::prelude::*;
        self.check_dims(z, out)?;
        out.par_chunks_mut(BASIS_CHUNK)
            .enumerate()
            .for_each(|(chunk, o)| {
                let base = chunk * BASIS_CHUNK;
                for (k, v) in o.iter_mut().enumerate() {
                    *v = self.node_value(base + k, z);
                }
            });
        Ok(())
    }

    /// Whether the tensor-product path is available.
    pub fn is_separable(&self) -> bool {
        self.axes.is_some()
    }

    /// Tensor-product evaluation for grid networks. Agrees with the
    /// per-node path to rounding.
    pub fn basis_into_separable(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dims(z, out)?;
        let axes = self
            .axes
            .as_ref()
            .ok_or_else(|| DpError::InvalidParameter("network is not a uniform grid".into()))?;
        let k = self.inv_two_h2[0];
        out[0] = self.scale[0];
        let mut len = 1;
        let mut factors = Vec::new();
        for (axis, &zd) in axes.iter().zip(z) {
            factors.clear();
            factors.extend(axis.iter().map(|c| (-(zd - c) * (zd - c) * k).exp()));
            let p = factors.len();
            // expand in place from the back so unread entries survive
            for i in (0..len).rev() {
                let v = out[i];
                for (slot, f) in out[i * p..(i + 1) * p].iter_mut().zip(&factors) {
                    *slot = v * f;
                }
            }
            len *= p;
        }
        Ok(())
    }

    /// Evaluation through the fastest available path: tensor product for
    /// grid networks, otherwise per node (in parallel when enabled).
    pub fn basis_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        if self.axes.is_some() {
            return self.basis_into_separable(z, out);
        }
        self.check_dims(z, out)?;
        par::for_each_chunk_mut(out, BASIS_CHUNK, |chunk, o| {
            let base = chunk * BASIS_CHUNK;
            for (k, v) in o.iter_mut().enumerate() {
                *v = self.node_value(base + k, z);
            }
        });
        Ok(())
    }
}

pub fn gaussian_basis(net: &RbfNetwork, z: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; net.node_count()];
    net.basis_into(z, &mut out)?;
    Ok(out)
}

/// Per-axis weight vectors `theta_hat_1..3`, one entry per node.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveWeights {
    pub theta: [Vec<f64>; 3],
}

impl AdaptiveWeights {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            theta: [vec![0.0; nodes], vec![0.0; nodes], vec![0.0; nodes]],
        }
    }

    /// Independent uniform draws in `[0, 1)` from a seeded ChaCha stream 0.
    pub fn random(nodes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..nodes).map(|_| rng.random::<f64>()).collect::<Vec<_>>();
        Self {
            theta: [draw(), draw(), draw()],
        }
    }

    pub fn node_count(&self) -> usize {
        self.theta[0].len()
    }

    pub fn norms(&self) -> [f64; 3] {
        self.theta
            .each_ref()
            .map(|t| t.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `[theta_1 . g, theta_2 . g, theta_3 . g]`.
    pub fn apply(&self, basis: &[f64]) -> Result<Vector3<f64>> {
        if basis.len() != self.node_count() {
            return Err(DpError::DimensionMismatch {
                expected: self.node_count(),
                found: basis.len(),
            });
        }
        let dot = |t: &[f64]| t.iter().zip(basis).map(|(a, b)| a * b).sum::<f64>();
        Ok(Vector3::new(
            dot(&self.theta[0]),
            dot(&self.theta[1]),
            dot(&self.theta[2]),
        ))
    }

    /// Snapshot as `node,theta1,theta2,theta3`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["node", "theta1", "theta2", "theta3"])?;
        for j in 0..self.node_count() {
            wr.write_record(&[
                j.to_string(),
                format!("{:.8e}", self.theta[0][j]),
                format!("{:.8e}", self.theta[1][j]),
                format!("{:.8e}", self.theta[2][j]),
            ])?;
        }
        wr.flush()
    }
}

impl OdeState for AdaptiveWeights {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.theta.iter_mut().zip(&x.theta) {
            s.axpy(a, v);
        }
    }

    fn is_finite(&self) -> bool {
        self.theta.iter().all(|t| t.is_finite())
    }
}

/// Network output `[theta_i^T g(z)]` with the basis shared across axes.
pub fn rbf_output(net: &RbfNetwork, weights: &AdaptiveWeights, z: &[f64]) -> Result<Vector3<f64>> {
    if weights.node_count() != net.node_count() {
        return Err(DpError::DimensionMismatch {
            expected: net.node_count(),
            found: weights.node_count(),
        });
    }
    let g = gaussian_basis(net, z)?;
    weights.apply(&g)
}
