use crate::error::{Error, Result};
use crate::interp::{CubicHermite, Jet};

/// Curvature κ(s) of a guide centreline over `[0, s_f]`, zero outside.
///
/// Lengths are in whatever unit the caller works in (internally σ); the
/// table writers convert to SI.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    table: CubicHermite,
    kappa_max: f64,
}

/// Which side of the profile support a segment index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// s < 0: entry guide.
    Before,
    /// Smooth run `k` of the tabulated profile.
    Run(usize),
    /// s > s_f: exit guide.
    After,
}

impl CurvatureProfile {
    /// Profile from samples starting at s = 0, interpolated with the
    /// monotone cubic Hermite rule.
    pub fn from_samples(s: Vec<f64>, kappa: Vec<f64>) -> Result<Self> {
        check_origin(&s)?;
        Ok(Self::from_table(CubicHermite::pchip(s, kappa)?))
    }

    /// Profile from samples with known one-sided slopes dκ/ds.
    pub fn from_samples_with_slopes(
        s: Vec<f64>,
        kappa: Vec<f64>,
        slope_left: Vec<f64>,
        slope_right: Vec<f64>,
    ) -> Result<Self> {
        check_origin(&s)?;
        Ok(Self::from_table(CubicHermite::with_slopes(s, kappa, slope_left, slope_right)?))
    }

    /// Constant curvature over `[0, length]`.
    pub fn constant(kappa: f64, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Precondition(format!("profile length must be > 0, got {length}")));
        }
        Self::from_samples_with_slopes(vec![0.0, length], vec![kappa; 2], vec![0.0; 2], vec![0.0; 2])
    }

    fn from_table(table: CubicHermite) -> Self {
        let kappa_max = table.values().iter().fold(0.0f64, |m, k| m.max(k.abs()));
        Self { table, kappa_max }
    }

    /// Total length s_f.
    pub fn length(&self) -> f64 {
        self.table.last()
    }

    pub fn sample_s(&self) -> &[f64] {
        self.table.nodes()
    }

    pub fn sample_kappa(&self) -> &[f64] {
        self.table.values()
    }

    /// Largest |κ| over the samples.
    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn contains(&self, s: f64) -> bool {
        (0.0..=self.length()).contains(&s)
    }

    pub fn kappa(&self, s: f64) -> f64 {
        self.eval(s).value
    }

    /// κ and its first two arc-length derivatives; zero outside the support.
    pub fn eval(&self, s: f64) -> Jet {
        if self.contains(s) {
            self.table.eval(s)
        } else {
            Jet::default()
        }
    }

    /// Points where κ or its slope may jump: 0, interior kinks and s_f.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.table.breakpoints()
    }

    pub fn segment_of(&self, s: f64) -> Segment {
        if s < 0.0 {
            Segment::Before
        } else if s >= self.length() {
            Segment::After
        } else {
            Segment::Run(self.table.run_of(s))
        }
    }

    /// The segment following `seg`, and the arc length at which it starts.
    pub fn next_segment(&self, seg: Segment) -> Option<(Segment, f64)> {
        let bps = self.table.breakpoints();
        match seg {
            Segment::Before => Some((Segment::Run(0), 0.0)),
            Segment::Run(k) if k + 1 < self.table.run_count() => Some((Segment::Run(k + 1), bps[k + 1])),
            Segment::Run(_) => Some((Segment::After, self.length())),
            Segment::After => None,
        }
    }

    /// Evaluate using the formula of one segment only, extrapolating it past
    /// the segment ends.
    pub fn eval_segment(&self, seg: Segment, s: f64) -> Jet {
        match seg {
            Segment::Before | Segment::After => Jet::default(),
            Segment::Run(k) => self.table.eval_in_run(k, s),
        }
    }

    /// ∫ κ ds over the support, exact for the interpolant.
    pub fn turning_angle(&self) -> f64 {
        self.table.integral()
    }

    /// Same profile with arc length multiplied by `factor` and curvature
    /// divided by it (a change of length unit).
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let s: Vec<f64> = self.sample_s().iter().map(|v| v * factor).collect();
        let k: Vec<f64> = self.sample_kappa().iter().map(|v| v / factor).collect();
        let (dl, dr): (Vec<f64>, Vec<f64>) = self
            .sample_s()
            .iter()
            .enumerate()
            .map(|(i, &si)| {
                let run_left = if i == 0 { 0 } else { self.table.run_of(0.5 * (si + self.sample_s()[i - 1])) };
                let run_right = if i + 1 == self.sample_s().len() {
                    self.table.run_count() - 1
                } else {
                    self.table.run_of(0.5 * (si + self.sample_s()[i + 1]))
                };
                let f2 = factor * factor;
                (self.table.eval_in_run(run_left, si).d1 / f2, self.table.eval_in_run(run_right, si).d1 / f2)
            })
            .unzip();
        Self::from_samples_with_slopes(s, k, dl, dr)
    }
}

fn check_origin(s: &[f64]) -> Result<()> {
    match s.first() {
        Some(&0.0) => Ok(()),
        Some(&s0) => Err(Error::Table(format!("profile must start at s = 0, first row has s = {s0}"))),
        None => Err(Error::Table("empty profile".into())),
    }
}

/// Metric factor h(s, y) = 1 − κ(s)·y.
pub fn metric_factor(profile: &CurvatureProfile, s: f64, y: f64) -> f64 {
    1.0 - profile.kappa(s) * y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn metric_factor_examples() {
        let straight = CurvatureProfile::constant(0.0, 10.0).unwrap();
        assert_eq!(metric_factor(&straight, 3.0, 123.0), 1.0);
        // κ = 0.22 μm⁻¹ in μm units
        let bent = CurvatureProfile::constant(0.22, 10.0).unwrap();
        assert_relative_eq!(metric_factor(&bent, 5.0, -2.0), 1.44, max_relative = 1e-15);
        assert!(metric_factor(&bent, 5.0, 4.5455).abs() < 1e-4);
        // outside the support the guide is straight
        assert_eq!(metric_factor(&bent, 11.0, -2.0), 1.0);
        assert_eq!(metric_factor(&bent, -1.0, -2.0), 1.0);
    }

    #[test]
    fn segments_walk_the_support() {
        let s: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let k: Vec<f64> = s.iter().map(|v| 1.0 - (v - 5.0).abs() / 5.0).collect();
        let p = CurvatureProfile::from_samples(s, k).unwrap();
        let mut seg = p.segment_of(-1.0);
        let mut starts = vec![];
        while let Some((next, at)) = p.next_segment(seg) {
            starts.push(at);
            seg = next;
        }
        assert_eq!(starts, vec![0.0, 5.0, 10.0]);
        assert_eq!(p.segment_of(2.0), Segment::Run(0));
        assert_eq!(p.segment_of(7.0), Segment::Run(1));
        assert_relative_eq!(p.turning_angle(), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn rescaling_preserves_turning_angle() {
        let s: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let k: Vec<f64> = s.iter().map(|v| (v * 0.3).sin().powi(2)).collect();
        let p = CurvatureProfile::from_samples(s, k).unwrap();
        let q = p.rescaled(0.261).unwrap();
        assert_relative_eq!(q.turning_angle(), p.turning_angle(), max_relative = 1e-12);
        assert_relative_eq!(q.length(), 10.0 * 0.261, max_relative = 1e-14);
        assert_relative_eq!(q.eval(1.0).d1, p.eval(1.0 / 0.261).d1 / 0.261f64.powi(2), max_relative = 1e-10);
    }

    #[test]
    fn profile_must_start_at_zero() {
        assert!(CurvatureProfile::from_samples(vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
    }
}
