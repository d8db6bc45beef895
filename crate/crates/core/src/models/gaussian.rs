//! Closed-form Gaussian convolutional factorization.
//!
//! Independent Gaussian latents summed per coordinate add their (padded)
//! means and covariances, so a convolutional factorization of a Gaussian is a
//! split of its mean and covariance into pieces supported on cliques of the
//! covariance graph.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::cliques::{maximal_cliques, UndirectedGraph, DEFAULT_CLIQUE_CAP};
use crate::error::{Error, Result};

const PSD_TOL: f64 = 1e-10;
const EDGE_TOL: f64 = 1e-12;

/// A `|scope|`-dimensional Gaussian over a subset of the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFactor {
    pub scope: Vec<usize>,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianFactor {
    pub fn new(scope: Vec<usize>, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let k = scope.len();
        if mean.len() != k || covariance.nrows() != k || covariance.ncols() != k {
            return Err(Error::InvalidSpec(
                "gaussian factor dimensions do not match its scope".into(),
            ));
        }
        if !is_symmetric(&covariance) {
            return Err(Error::InvalidSpec(
                "gaussian factor covariance is not symmetric".into(),
            ));
        }
        if min_eigenvalue(&covariance) < -PSD_TOL {
            return Err(Error::InvalidSpec(
                "gaussian factor covariance is not PSD".into(),
            ));
        }
        Ok(GaussianFactor {
            scope,
            mean,
            covariance,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    pub names: Vec<String>,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl CovarianceModel {
    pub fn new(names: Vec<String>, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = names.len();
        if mean.len() != n || covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::InvalidSpec(format!(
                "covariance model needs {n} means and an {n}x{n} matrix"
            )));
        }
        if !is_symmetric(&covariance) {
            return Err(Error::InvalidSpec(
                "covariance matrix is not symmetric".into(),
            ));
        }
        if covariance.diagonal().iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidSpec(
                "covariance matrix has a negative variance".into(),
            ));
        }
        Ok(CovarianceModel {
            names,
            mean,
            covariance,
        })
    }

    /// Zero mean, coordinates named `y1..yn`.
    pub fn centered(covariance: DMatrix<f64>) -> Result<Self> {
        let n = covariance.nrows();
        CovarianceModel::new(
            (1..=n).map(|i| format!("y{i}")).collect(),
            DVector::zeros(n),
            covariance,
        )
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= EDGE_TOL))
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Edge `i – j` wherever `|C_ij| > 1e-12`.
pub fn covariance_graph(model: &CovarianceModel) -> UndirectedGraph {
    let n = model.dim();
    let mut g = UndirectedGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if model.covariance[(i, j)].abs() > EDGE_TOL {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// One Gaussian per maximal clique of the covariance graph by equal splitting:
/// each off-diagonal entry is shared among the cliques containing both ends,
/// each variance and mean component among the cliques containing it.
///
/// Fails with [`Error::HeuristicFailure`] when a clique's share is not PSD;
/// that does not mean no factorization exists.
pub fn gaussian_decompose(model: &CovarianceModel) -> Result<Vec<GaussianFactor>> {
    let cliques = maximal_cliques(&covariance_graph(model), DEFAULT_CLIQUE_CAP)?;
    let n = model.dim();
    let mut share = DMatrix::<usize>::zeros(n, n);
    for c in &cliques {
        for &i in c {
            for &j in c {
                share[(i, j)] += 1;
            }
        }
    }
    cliques
        .into_iter()
        .map(|clique| {
            let k = clique.len();
            let mean = DVector::from_fn(k, |a, _| {
                model.mean[clique[a]] / share[(clique[a], clique[a])] as f64
            });
            let covariance = DMatrix::from_fn(k, k, |a, b| {
                let (i, j) = (clique[a], clique[b]);
                model.covariance[(i, j)] / share[(i, j)] as f64
            });
            let min = min_eigenvalue(&covariance);
            if min < -PSD_TOL {
                return Err(Error::HeuristicFailure {
                    clique,
                    min_eigenvalue: min,
                });
            }
            Ok(GaussianFactor {
                scope: clique,
                mean,
                covariance,
            })
        })
        .collect()
}

/// Sum of the zero-padded factor means and covariances.
pub fn gaussian_compose(factors: &[GaussianFactor], n: usize) -> Result<CovarianceModel> {
    let mut mean = DVector::zeros(n);
    let mut covariance = DMatrix::zeros(n, n);
    for f in factors {
        if let Some(&bad) = f.scope.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSpec(format!(
                "factor scope index {bad} outside dimension {n}"
            )));
        }
        for (a, &i) in f.scope.iter().enumerate() {
            mean[i] += f.mean[a];
            for (b, &j) in f.scope.iter().enumerate() {
                covariance[(i, j)] += f.covariance[(a, b)];
            }
        }
    }
    CovarianceModel::centered(covariance).map(|m| CovarianceModel { mean, ..m })
}

/// Draws independent clique Gaussians, sums them per coordinate and returns
/// the L∞ deviation of the empirical covariance from the model's.
pub fn gaussian_sample_check(
    model: &CovarianceModel,
    factors: &[GaussianFactor],
    samples: usize,
    seed: u64,
) -> f64 {
    let n = model.dim();
    // Square roots via the eigendecomposition, which tolerates singular blocks.
    let roots: Vec<DMatrix<f64>> = factors
        .iter()
        .map(|f| {
            let eig = SymmetricEigen::new(f.covariance.clone());
            let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
            &eig.eigenvectors * scale
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = DVector::<f64>::zeros(n);
    let mut cross = DMatrix::<f64>::zeros(n, n);
    let mut y = DVector::<f64>::zeros(n);
    for _ in 0..samples {
        y.fill(0.0);
        for (f, root) in factors.iter().zip(&roots) {
            let k = f.scope.len();
            let z = DVector::<f64>::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            let draw = root * z + &f.mean;
            for (a, &i) in f.scope.iter().enumerate() {
                y[i] += draw[a];
            }
        }
        sum += &y;
        cross.syger(1.0, &y, &y, 1.0);
    }
    let count = samples as f64;
    let mean = sum / count;
    let empirical = cross / count - &mean * mean.transpose();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((empirical[(i, j)] - model.covariance[(i, j)]).abs());
        }
    }
    worst
}
