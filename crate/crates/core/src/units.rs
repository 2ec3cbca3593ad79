//! Unit conventions and conversions.
//!
//! All frequencies, energies and pole positions are in cm⁻¹.  The time
//! variable `t` is dimensionless-conjugate to cm⁻¹: phases are `ω·t`
//! exactly, so `t = 1` corresponds to `1/(2πc) ≈ 5308.8 fs`.

/// Boltzmann constant in cm⁻¹ per Kelvin.
pub const KB_WAVENUMBER_PER_KELVIN: f64 = 0.6950348;

/// Femtoseconds per internal time unit, `1/(2πc)` with `c` in cm/fs.
pub const TIME_UNIT_FS: f64 = 5308.8375;

/// Temperature in Kelvin to thermal energy in cm⁻¹.
pub fn kelvin_to_wavenumber(t_kelvin: f64) -> f64 {
    KB_WAVENUMBER_PER_KELVIN * t_kelvin
}

/// Internal time to femtoseconds.
pub fn time_to_fs(t: f64) -> f64 {
    TIME_UNIT_FS * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fs_conversion_matches_speed_of_light() {
        // c = 2.99792458e-5 cm/fs
        let c_cm_per_fs = 2.99792458e-5;
        let expected = 1.0 / (2.0 * std::f64::consts::PI * c_cm_per_fs);
        assert!((TIME_UNIT_FS - expected).abs() / expected < 1e-7);
    }

    #[test]
    fn room_temperature_scale() {
        // 300 K is about 208.5 cm^-1
        assert!((kelvin_to_wavenumber(300.0) - 208.51044).abs() < 1e-4);
    }
}
