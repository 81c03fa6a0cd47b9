//! Principal components of the correlation matrix with varimax rotation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VARIMAX_TOL: f64 = 1e-6;
pub const VARIMAX_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// All eigenvalues of the correlation matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Variables x retained components, `eigenvector * sqrt(eigenvalue)`.
    pub loadings: Vec<Vec<f64>>,
    pub rotated_loadings: Vec<Vec<f64>>,
    /// Orthonormal matrix with `rotated = loadings * rotation`.
    pub rotation: Vec<Vec<f64>>,
    /// Pre-rotation share of total variance for every component.
    pub explained_variance_ratio: Vec<f64>,
    pub varimax_sweeps: usize,
}

impl PcaResult {
    pub fn retained_variance(&self) -> f64 {
        self.explained_variance_ratio[..self.rotation.len()].iter().sum()
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Correlation matrix of the columns of `data` (rows are observations).
pub fn correlation_matrix(data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, p) = data.shape();
    if n < 2 || p == 0 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut z = data.clone();
    for j in 0..p {
        let col = data.column(j);
        let m = col.mean();
        let ss: f64 = col.iter().map(|v| (v - m).powi(2)).sum();
        let sd = (ss / (n as f64 - 1.0)).sqrt();
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::DegenerateInput(format!("column {j} is constant")));
        }
        for i in 0..n {
            z[(i, j)] = (data[(i, j)] - m) / sd;
        }
    }
    Ok(z.transpose() * &z / (n as f64 - 1.0))
}

/// Flip each column so that its largest-magnitude entry is positive.
fn orient_columns(m: &mut DMatrix<f64>, companion: Option<&mut DMatrix<f64>>) {
    let mut flips = Vec::new();
    for j in 0..m.ncols() {
        let col = m.column(j);
        let mut best = 0.0f64;
        for &v in col.iter() {
            if v.abs() > best.abs() + 1e-12 {
                best = v;
            }
        }
        if best < 0.0 {
            flips.push(j);
            m.column_mut(j).neg_mut();
        }
    }
    if let Some(c) = companion {
        for j in flips {
            c.column_mut(j).neg_mut();
        }
    }
}

pub fn pca_varimax(data: &DMatrix<f64>, n_components: usize) -> Result<PcaResult> {
    let (n, p) = data.shape();
    if n_components == 0 || n_components > n.min(p) {
        return Err(Error::InvalidConfig(format!(
            "n_components = {n_components} with {n} rows and {p} columns"
        )));
    }
    let corr = correlation_matrix(data)?;
    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    let explained_variance_ratio = eigenvalues.iter().map(|v| v / total).collect();

    let mut loadings = DMatrix::zeros(p, n_components);
    for (j, &src) in order.iter().take(n_components).enumerate() {
        let scale = eigenvalues[j].sqrt();
        for i in 0..p {
            loadings[(i, j)] = eig.eigenvectors[(i, src)] * scale;
        }
    }
    orient_columns(&mut loadings, None);

    let vm = varimax(&loadings, VARIMAX_TOL, VARIMAX_MAX_SWEEPS);
    Ok(PcaResult {
        eigenvalues,
        loadings: rows(&loadings),
        rotated_loadings: rows(&vm.rotated),
        rotation: rows(&vm.rotation),
        explained_variance_ratio,
        varimax_sweeps: vm.sweeps,
    })
}

#[derive(Debug, Clone)]
pub struct Varimax {
    pub rotated: DMatrix<f64>,
    pub rotation: DMatrix<f64>,
    pub sweeps: usize,
}

/// Kaiser-normalized varimax by successive pairwise planar rotations.
pub fn varimax(loadings: &DMatrix<f64>, tol: f64, max_sweeps: usize) -> Varimax {
    let (p, k) = loadings.shape();
    let h: Vec<f64> = (0..p).map(|i| loadings.row(i).norm()).collect();
    let mut l = loadings.clone();
    for i in 0..p {
        if h[i] > 0.0 {
            l.row_mut(i).unscale_mut(h[i]);
        }
    }
    let mut r = DMatrix::<f64>::identity(k, k);
    let mut sweeps = 0;
    if k > 1 {
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut max_angle: f64 = 0.0;
            for a in 0..k - 1 {
                for b in a + 1..k {
                    let phi = pair_angle(&l, a, b);
                    max_angle = max_angle.max(phi.abs());
                    if phi == 0.0 {
                        continue;
                    }
                    rotate_pair(&mut l, a, b, phi);
                    rotate_pair(&mut r, a, b, phi);
                }
            }
            if max_angle < tol {
                break;
            }
        }
    }
    for i in 0..p {
        if h[i] > 0.0 {
            l.row_mut(i).scale_mut(h[i]);
        }
    }
    orient_columns(&mut l, Some(&mut r));
    Varimax {
        rotated: l,
        rotation: r,
        sweeps,
    }
}

/// Angle that maximizes the varimax criterion of columns `a`, `b`.
fn pair_angle(l: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let p = l.nrows() as f64;
    let (mut sa, mut sb, mut sc, mut sd) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..l.nrows() {
        let (x, y) = (l[(i, a)], l[(i, b)]);
        let u = x * x - y * y;
        let v = 2.0 * x * y;
        sa += u;
        sb += v;
        sc += u * u - v * v;
        sd += 2.0 * u * v;
    }
    let num = sd - 2.0 * sa * sb / p;
    let den = sc - (sa * sa - sb * sb) / p;
    if num == 0.0 && den >= 0.0 {
        return 0.0;
    }
    num.atan2(den) / 4.0
}

fn rotate_pair(m: &mut DMatrix<f64>, a: usize, b: usize, phi: f64) {
    let (s, c) = phi.sin_cos();
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, a)], m[(i, b)]);
        m[(i, a)] = c * x + s * y;
        m[(i, b)] = -s * x + c * y;
    }
}

/// Raw varimax criterion `sum_j [mean_i l^4 - (mean_i l^2)^2]` on
/// Kaiser-normalized rows.
pub fn varimax_criterion(loadings: &DMatrix<f64>) -> f64 {
    let (p, k) = loadings.shape();
    let mut l = loadings.clone();
    for i in 0..p {
        let h = l.row(i).norm();
        if h > 0.0 {
            l.row_mut(i).unscale_mut(h);
        }
    }
    (0..k)
        .map(|j| {
            let m2 = l.column(j).iter().map(|v| v.powi(2)).sum::<f64>() / p as f64;
            let m4 = l.column(j).iter().map(|v| v.powi(4)).sum::<f64>() / p as f64;
            m4 - m2 * m2
        })
        .sum()
}
