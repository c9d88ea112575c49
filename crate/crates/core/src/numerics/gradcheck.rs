use crate::{Error, Result};

/// Maximum number of coordinates probed; larger parameter vectors are
/// sampled at an even stride so the check stays fast and deterministic.
const MAX_COORDS: usize = 512;

/// Central-difference gradient check.
///
/// `loss` must be a deterministic function of `params` (freeze any dropout
/// masks or noise draws before calling). Returns the maximum over probed
/// coordinates of |g_analytic - g_fd| / max(1, |g_analytic|, |g_fd|).
pub fn grad_check<F>(
    mut loss: F,
    params: &mut [f64],
    analytic: &[f64],
    eps: f64,
) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(1e-7..=1e-4).contains(&eps) {
        return Err(Error::Parameter(format!(
            "grad_check eps must be in [1e-7, 1e-4], got {eps}"
        )));
    }
    if params.len() != analytic.len() {
        return Err(Error::shape(
            "grad_check",
            format!("params {} vs analytic {}", params.len(), analytic.len()),
        ));
    }
    let n = params.len();
    let stride = n.div_ceil(MAX_COORDS).max(1);
    let mut max_err = 0.0f64;
    let mut idx = 0;
    while idx < n {
        let orig = params[idx];
        params[idx] = orig + eps;
        let lp = loss(params)?;
        params[idx] = orig - eps;
        let lm = loss(params)?;
        params[idx] = orig;
        if !lp.is_finite() || !lm.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss while probing parameter {idx}"
            )));
        }
        let fd = (lp - lm) / (2.0 * eps);
        let ga = analytic[idx];
        let err = (ga - fd).abs() / ga.abs().max(fd.abs()).max(1.0);
        if err > max_err {
            max_err = err;
        }
        idx += stride;
    }
    Ok(max_err)
}
