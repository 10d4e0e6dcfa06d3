use crate::error::{Error, Result};

pub fn sample_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = sample_mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Batch-means estimate of the asymptotic variance per draw.
///
/// The series is cut into `batch_count` consecutive batches of `⌊N/B⌋` draws
/// (a remainder at the end is dropped); the result is the batch size times the
/// sample variance of the batch means.
pub fn batch_means_asvar(series: &[f64], batch_count: usize) -> Result<f64> {
    if batch_count < 10 {
        return Err(Error::InsufficientSample(format!(
            "batch means needs at least 10 batches, got {batch_count}"
        )));
    }
    if series.len() < 2 * batch_count {
        return Err(Error::InsufficientSample(format!(
            "series of length {} is too short for {batch_count} batches",
            series.len()
        )));
    }
    let b = series.len() / batch_count;
    let means: Vec<f64> = series.chunks_exact(b).take(batch_count).map(sample_mean).collect();
    Ok(b as f64 * sample_variance(&means))
}
