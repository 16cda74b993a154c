use crate::error::BenchError;

/// Number of observations revealed at fraction `lambda` of `total`:
/// `floor(total * lambda)`, with a small tolerance so that e.g. `0.3 * 10`
/// yields 3 rather than 2.
pub fn prefix_len(total: usize, lambda: f64) -> usize {
    let k = (total as f64 * lambda + 1e-9).floor();
    (k.max(0.0) as usize).min(total)
}

/// Mean over instances of `[g* in G] / |G|`.
pub fn precision(results: &[Vec<usize>], truths: &[usize]) -> Result<f64, BenchError> {
    if results.len() != truths.len() {
        return Err(BenchError::Misaligned {
            results: results.len(),
            truths: truths.len(),
        });
    }
    if results.is_empty() {
        return Err(BenchError::NoResults);
    }
    let mut sum = 0.0;
    for (i, (set, truth)) in results.iter().zip(truths).enumerate() {
        if set.is_empty() {
            return Err(BenchError::EmptyRecognizedSet(i));
        }
        if set.contains(truth) {
            sum += 1.0 / set.len() as f64;
        }
    }
    Ok(sum / results.len() as f64)
}

/// Mean size of the recognized sets.
pub fn spread(results: &[Vec<usize>]) -> f64 {
    let total: usize = results.iter().map(Vec::len).sum();
    total as f64 / results.len() as f64
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
