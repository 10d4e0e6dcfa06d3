use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{chain_rng, truncated_normal_draw, ChainBuilder, ChainOutput, SamplerConfig};
use crate::error::{Error, Result};
use crate::models::{dot, BinaryRegressionData, TargetModel};

/// Albert–Chib data-augmentation Gibbs sampler for the flat-prior probit posterior.
///
/// Each sweep draws the latent utilities `u_i ~ N(x_iᵀβ, 1)` truncated to the
/// side of zero given by `y_i`, then `β | u ~ N((XᵀX)⁻¹Xᵀu, (XᵀX)⁻¹)`.
pub fn gibbs_probit(data: &BinaryRegressionData, config: &SamplerConfig) -> Result<ChainOutput> {
    let model = TargetModel::probit(data.clone());
    config.validate(&model)?;
    let (n, d) = (data.n(), data.dimension());
    let x = data.design_matrix();
    let chol = (x.transpose() * &x).cholesky().ok_or_else(|| {
        Error::Setup("XᵀX is not positive definite; the design is rank deficient".into())
    })?;
    // (XᵀX)⁻¹ = L⁻ᵀL⁻¹, so β = mean + L⁻ᵀε has the required covariance
    let l_transpose = chol.l().transpose();

    let mut rng = chain_rng(config.seed);
    let mut beta = DVector::from_column_slice(&config.init);
    let mut latent = DVector::<f64>::zeros(n);
    let mut eps = DVector::<f64>::zeros(d);

    let mut sweep = |beta: &mut DVector<f64>, rng: &mut super::ChainRng| -> Result<()> {
        for (i, (row, y)) in data.rows().enumerate() {
            let eta = dot(row, beta.as_slice());
            latent[i] = if y {
                truncated_normal_draw(eta, 1.0, 0.0, f64::INFINITY, rng)?
            } else {
                truncated_normal_draw(eta, 1.0, f64::NEG_INFINITY, 0.0, rng)?
            };
        }
        let mean = chol.solve(&(x.transpose() * &latent));
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let noise = l_transpose
            .solve_upper_triangular(&eps)
            .expect("Cholesky factor has a positive diagonal");
        *beta = mean + noise;
        Ok(())
    };

    for _ in 0..config.burn_in {
        sweep(&mut beta, &mut rng)?;
    }
    let mut chain = ChainBuilder::with_capacity(d, config.length);
    let mut gradient = vec![0.0; d];
    for _ in 0..config.length {
        sweep(&mut beta, &mut rng)?;
        model.grad_log_density_into(beta.as_slice(), &mut gradient)?;
        chain.push(beta.as_slice(), &gradient);
    }
    Ok(chain.finish(1.0, config.seed, model.tag()))
}
