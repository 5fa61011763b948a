//! Conversions between interface units (dB, dBm, km/h) and the SI/linear
//! values used internally.

/// `10^((dbm - 30) / 10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Linear power ratio of a dB value.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

pub fn ms_to_kmh(ms: f64) -> f64 {
    ms * 3.6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert!((dbm_to_watts(35.0) - 3.162_277_66).abs() < 1e-8);
        assert!((dbm_to_watts(-174.0) - 3.981_071_7e-21).abs() < 1e-27);
        assert!((db_to_linear(-31.5) - 7.079_457_8e-4).abs() < 1e-11);
        assert!((kmh_to_ms(108.0) - 30.0).abs() < 1e-12);
        assert!((kmh_to_ms(180.0) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn inverses() {
        for x in [-174.0, -31.5, 0.0, 35.0] {
            assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() < 1e-9);
            assert!((linear_to_db(db_to_linear(x)) - x).abs() < 1e-9);
        }
        assert!((ms_to_kmh(kmh_to_ms(126.0)) - 126.0).abs() < 1e-12);
    }
}
