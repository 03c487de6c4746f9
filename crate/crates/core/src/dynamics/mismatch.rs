use std::f64::consts::PI;

/// Longitudinal wave-vector mismatch (rad/m) of a grating written by a control
/// at `alpha_write` to the probe axis and read by one at `alpha_read`, with
/// emission along the probe axis:
/// Δk_z = k_p − k_w cos α_w + k_r cos α_r − k_out.
///
/// With k_p = k_w and k_out = k_r this is k_w(1 − cos α_w) − k_r(1 − cos α_r).
pub fn delta_kz(alpha_write: f64, alpha_read: f64, lambda_write: f64, lambda_read: f64) -> f64 {
    let kw = 2.0 * PI / lambda_write;
    let kr = 2.0 * PI / lambda_read;
    kw * (1.0 - alpha_write.cos()) - kr * (1.0 - alpha_read.cos())
}

/// |sinc(Δk_z L/2)|² for a collinear write/read pair at angle `alpha`.
pub fn phase_mismatch_factor(alpha: f64, lambda_write: f64, lambda_read: f64, length: f64) -> f64 {
    let x = 0.5 * delta_kz(alpha, alpha, lambda_write, lambda_read) * length;
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        (x.sin() / x).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEG: f64 = PI / 180.0;

    // |(1/L)∫₀ᴸ e^{iΔk z} dz|² by composite Simpson, independent of the closed form.
    fn brute_force(alpha: f64) -> f64 {
        let dk = 2.0 * PI * (1.0 / 795e-9 - 1.0 / 780e-9) * (1.0 - alpha.cos());
        let (l, n) = (0.03, 2000);
        let h = l / n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let z = i as f64 * h;
            re += w * (dk * z).cos();
            im += w * (dk * z).sin();
        }
        let (re, im) = (re * h / 3.0 / l, im * h / 3.0 / l);
        re * re + im * im
    }

    #[test]
    fn degenerate_and_collinear_are_matched() {
        assert_eq!(phase_mismatch_factor(2.5 * DEG, 795e-9, 795e-9, 0.03), 1.0);
        assert_eq!(phase_mismatch_factor(0.0, 795e-9, 780e-9, 0.03), 1.0);
    }

    #[test]
    fn conversion_spot_values() {
        let f25 = phase_mismatch_factor(2.5 * DEG, 795e-9, 780e-9, 0.03);
        let x = 0.5 * delta_kz(2.5 * DEG, 2.5 * DEG, 795e-9, 780e-9) * 0.03;
        assert!((x.abs() - 2.16988).abs() < 1e-4, "{x}");
        assert!((f25 - 0.144854).abs() < 1e-5, "{f25}");
        assert!((f25 - brute_force(2.5 * DEG)).abs() < 1e-9);
        let f12 = phase_mismatch_factor(1.2 * DEG, 795e-9, 780e-9, 0.03);
        assert!((f12 - 0.919395).abs() < 1e-5, "{f12}");
        assert!((f12 - brute_force(1.2 * DEG)).abs() < 1e-9);
    }

    #[test]
    fn monotone_over_main_lobe() {
        let mut prev = 1.0;
        for i in 1..=30 {
            let f = phase_mismatch_factor(0.1 * i as f64 * DEG, 795e-9, 780e-9, 0.03);
            assert!(f <= prev + 1e-15);
            prev = f;
        }
    }
}
