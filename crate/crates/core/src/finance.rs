//! Capital-recovery arithmetic.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FinanceError {
    #[error("discount rate {0} must be > 0")]
    Rate(f64),
    #[error("lifetime must be at least one year")]
    Lifetime,
}

/// Capital-recovery factor `r / (1 - (1 + r)^-L)`: the constant annual payment
/// that repays one unit of capital over `lifetime` years at rate `r`.
pub fn annuity_factor(r: f64, lifetime: u32) -> Result<f64, FinanceError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(FinanceError::Rate(r));
    }
    if lifetime == 0 {
        return Err(FinanceError::Lifetime);
    }
    Ok(r / (1.0 - libm::pow(1.0 + r, -(lifetime as f64))))
}

/// Present value of one unit paid at the end of each of `lifetime` years,
/// the inverse of [`annuity_factor`].
pub fn present_value_factor(r: f64, lifetime: u32) -> Result<f64, FinanceError> {
    annuity_factor(r, lifetime).map(|a| 1.0 / a)
}
