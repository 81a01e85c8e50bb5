//! Temperature unit conversion.

use crate::error::{Error, Result};

/// Converts Kelvin to degrees Fahrenheit.
///
/// Rejects non-finite and negative (below absolute zero) inputs.
pub fn kelvin_to_fahrenheit(k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::domain(format!("temperature {k} is not finite")));
    }
    if k < 0.0 {
        return Err(Error::domain(format!("temperature {k} K below absolute zero")));
    }
    Ok((k - 273.15) * 9.0 / 5.0 + 32.0)
}
