//! Model builders: latent-sum graphs, Gaussian covariance factorizations and
//! the discretized independent-factor model.

mod cliques;
mod gaussian;
mod independent_factor;
mod latent_sum;

pub use cliques::{maximal_cliques, UndirectedGraph, DEFAULT_CLIQUE_CAP};
pub use gaussian::{
    covariance_graph, gaussian_compose, gaussian_decompose, gaussian_sample_check, CovarianceModel,
    GaussianFactor,
};
pub use independent_factor::{build_if_model, IfSpec};
pub use latent_sum::{
    build_latent_sum, export_chain_graph, simulate_latent_sum, LatentBlock, LatentSumSpec,
};

use crate::algebra::Factor;
use crate::error::{Error, Result};

/// Rejects factors that are not real, non-negative and summing to 1 within 1e-9.
pub(crate) fn check_distribution(what: &str, f: &Factor) -> Result<()> {
    if f.values().iter().any(|z| z.im.abs() > 1e-12 || z.re < 0.0) {
        return Err(Error::InvalidSpec(format!(
            "{what} has negative or complex entries"
        )));
    }
    let total = f.total().re;
    if (total - 1.0).abs() > crate::algebra::PROB_TOL {
        return Err(Error::InvalidSpec(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}
