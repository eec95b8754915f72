use super::profile::CurvatureProfile;

/// The three adiabaticity ratios at one arc-length position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticitySample {
    pub s: f64,
    pub kappa: f64,
    /// σ|κ|
    pub curvature: f64,
    /// σ|dκ/ds| / |κ|; `None` where κ is negligible.
    pub slope: Option<f64>,
    /// σ|d²κ/ds²| / κ²; `None` where κ is negligible.
    pub bending: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityReport {
    pub samples: Vec<AdiabaticitySample>,
    /// Maxima over the strongly curved region |κ| ≥ κ_max / 2.
    pub max_curvature: f64,
    pub max_slope: f64,
    pub max_bending: f64,
}

/// Evaluate the adiabaticity ratios at the midpoint of every table
/// interval. Midpoints never coincide with a breakpoint, so the one-sided
/// derivatives of the interpolant are unambiguous.
pub fn adiabaticity_report(profile: &CurvatureProfile, sigma: f64) -> AdiabaticityReport {
    let kappa_max = profile.kappa_max();
    let floor = 1e-6 * kappa_max;
    let samples: Vec<AdiabaticitySample> = profile
        .sample_s()
        .windows(2)
        .map(|w| {
            let s = 0.5 * (w[0] + w[1]);
            let jet = profile.eval(s);
            let k = jet.value.abs();
            let (slope, bending) = if k > floor {
                (Some(sigma * jet.d1.abs() / k), Some(sigma * jet.d2.abs() / (k * k)))
            } else {
                (None, None)
            };
            AdiabaticitySample {
                s,
                kappa: jet.value,
                curvature: sigma * k,
                slope,
                bending,
            }
        })
        .collect();

    let strong = samples.iter().filter(|p| p.kappa.abs() >= 0.5 * kappa_max);
    let (mut max_curvature, mut max_slope, mut max_bending) = (0.0f64, 0.0f64, 0.0f64);
    for p in strong {
        max_curvature = max_curvature.max(p.curvature);
        max_slope = max_slope.max(p.slope.unwrap_or(0.0));
        max_bending = max_bending.max(p.bending.unwrap_or(0.0));
    }
    // the sampled midpoints can miss the peak itself
    max_curvature = max_curvature.max(sigma * kappa_max);

    AdiabaticityReport {
        samples,
        max_curvature,
        max_slope,
        max_bending,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_interior_has_zero_derivative_ratios() {
        let p = CurvatureProfile::constant(0.2, 5.0).unwrap();
        let r = adiabaticity_report(&p, 0.5);
        assert_eq!(r.max_slope, 0.0);
        assert_eq!(r.max_bending, 0.0);
        assert!((r.max_curvature - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ratios_only_where_curvature_is_significant() {
        let s: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let k: Vec<f64> = s.iter().map(|&v| if v < 5.0 { 0.0 } else { (v - 5.0) * 0.1 }).collect();
        let p = CurvatureProfile::from_samples(s, k).unwrap();
        let r = adiabaticity_report(&p, 1.0);
        assert!(r.samples.iter().filter(|x| x.s < 4.9).all(|x| x.slope.is_none()));
        assert!(r.samples.iter().filter(|x| x.s > 5.1).all(|x| x.slope.is_some()));
    }
}
