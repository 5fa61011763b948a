/// Robust rate of an isolated link on its own orthogonal band `w`:
/// `w log2(1 + p g / (w N0 + ln(1/eta0) sigma_h^2 p))`.
pub fn oma_rate(
    power: f64,
    band: f64,
    gain: f64,
    est_error_var: f64,
    outage_threshold: f64,
    noise_psd: f64,
) -> crate::Result<f64> {
    if outage_threshold <= 0.0 {
        return Err(crate::Error::Domain("outage threshold must be positive".into()));
    }
    if band <= 0.0 || power <= 0.0 {
        return Ok(0.0);
    }
    let leak = (1.0 / outage_threshold).ln() * est_error_var * power;
    let ratio = power * gain / (band * noise_psd + leak);
    Ok(band * ratio.ln_1p() / std::f64::consts::LN_2)
}
