use crate::constitutive::Constitutive;
use crate::error::{Error, Result};

/// Godunov flux for the batch settling flux `f(X) = X v_hs(X)`: the minimum
/// of `f` over `[a, b]` when `a ≤ b`, the maximum over `[b, a]` otherwise.
pub fn godunov_batch_flux(law: &Constitutive, x_above: f64, x_below: f64) -> Result<f64> {
    let x_max = law.params().x_max;
    for x in [x_above, x_below] {
        if !(0.0..=x_max).contains(&x) {
            return Err(Error::domain("solids concentration X", x, 0.0, x_max));
        }
    }
    Ok(godunov_raw(law, x_above, x_below))
}

/// `f` rises on `[0, X*]` and falls afterwards, so interval extrema sit at
/// the end points or at the peak `X*`.
#[inline]
pub(crate) fn godunov_raw(law: &Constitutive, a: f64, b: f64) -> f64 {
    let (fa, fb) = (law.batch_flux(a), law.batch_flux(b));
    if a <= b {
        return fa.min(fb);
    }
    match law.flux_peak() {
        Some(peak) if b <= peak && peak <= a => law.batch_flux(peak),
        _ => fa.max(fb),
    }
}
