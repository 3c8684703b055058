//! Log-log decay fits used as the numerical stand-in for `O(k^{−∞})`.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// Every sample is exactly zero.
    ExactZero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `d log₁₀ a / d log₁₀ k`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual in `log₁₀` units.
    pub residual: f64,
    pub points: usize,
    /// Slope refit on the upper half of the `k` range.
    pub upper_slope: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

impl DecayFit {
    /// Fits `(k, a_k)` pairs. Passing needs `slope ≤ threshold` and a steeper
    /// slope on the upper half of the range. Zero samples are dropped; if all
    /// samples are zero the verdict is [`Verdict::ExactZero`].
    pub fn fit(series: &[(u32, f64)], threshold: f64) -> Result<Self> {
        if series.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(Error::Config("decay series must be finite and non-negative".into()));
        }
        if !series.is_empty() && series.iter().all(|p| p.1 == 0.0) {
            return Ok(Self {
                slope: f64::NEG_INFINITY,
                intercept: f64::NEG_INFINITY,
                residual: 0.0,
                points: series.len(),
                upper_slope: f64::NEG_INFINITY,
                threshold,
                verdict: Verdict::ExactZero,
            });
        }
        let mut pts: Vec<(f64, f64)> =
            series.iter().filter(|p| p.1 > 0.0).map(|&(k, a)| ((k as f64).log10(), a.log10())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.len() < MIN_POINTS {
            return Err(Error::FitTooShort { needed: MIN_POINTS, got: pts.len() });
        }
        let (slope, intercept, residual) = least_squares(&pts);
        let mid = (pts.first().unwrap().0 + pts.last().unwrap().0) / 2.0;
        let upper: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 >= mid - 1e-12).collect();
        let upper_slope = if upper.len() >= 2 { least_squares(&upper).0 } else { slope };
        let verdict = if slope <= threshold && upper_slope < slope { Verdict::Pass } else { Verdict::Fail };
        Ok(Self { slope, intercept, residual, points: pts.len(), upper_slope, threshold, verdict })
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn describe(&self) -> String {
        match self.verdict {
            Verdict::ExactZero => format!("all {} samples exactly zero", self.points),
            _ => format!(
                "slope {:.3} (threshold {:.1}), upper-half slope {:.3}, rms {:.2e}, {} points",
                self.slope, self.threshold, self.upper_slope, self.residual, self.points
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let s: Vec<(u32, f64)> = [64u32, 128, 256, 512].iter().map(|&k| (k, 5.0 * (k as f64).powf(-4.0))).collect();
        let f = DecayFit::fit(&s, -3.0).unwrap();
        assert!((f.slope + 4.0).abs() < 1e-12);
        assert!((f.intercept - 5f64.log10()).abs() < 1e-10);
        // a pure power law is not super-polynomial: the upper half is no steeper
        assert_eq!(f.verdict, Verdict::Fail);
    }

    #[test]
    fn super_polynomial_passes() {
        let s: Vec<(u32, f64)> = [64u32, 91, 128, 181, 256, 362, 512].iter().map(|&k| (k, (-(k as f64).sqrt()).exp())).collect();
        let f = DecayFit::fit(&s, -3.0).unwrap();
        assert_eq!(f.verdict, Verdict::Pass, "{f:?}");
    }

    #[test]
    fn zeros_and_short_series() {
        assert_eq!(DecayFit::fit(&[(1, 0.0), (2, 0.0)], -3.0).unwrap().verdict, Verdict::ExactZero);
        assert!(matches!(DecayFit::fit(&[(1, 1.0), (2, 0.5), (3, 0.1)], -3.0), Err(Error::FitTooShort { .. })));
        assert!(DecayFit::fit(&[(1, f64::NAN)], -3.0).is_err());
    }

    proptest::proptest! {
        // Extending the k-list of a stretched-exponential series with a
        // comfortable slope margin never turns a pass into a fail.
        #[test]
        fn extension_keeps_pass(c in 0.5..3.0f64, alpha in 0.3..1.0f64, extra in 1usize..6) {
            let ks: Vec<u32> = (0..8).map(|i| (64.0 * 2f64.powf(i as f64 / 4.0)).round() as u32).collect();
            let series = |ks: &[u32]| ks.iter().map(|&k| (k, (-c * (k as f64).powf(alpha)).exp())).collect::<Vec<_>>();
            let base = DecayFit::fit(&series(&ks), -3.0).unwrap();
            proptest::prop_assume!(base.verdict == Verdict::Pass && base.slope <= -3.5);
            let mut longer = ks.clone();
            for i in 0..extra {
                longer.push((64.0 * 2f64.powf((8 + i) as f64 / 4.0)).round() as u32);
            }
            let ext = DecayFit::fit(&series(&longer), -3.0).unwrap();
            proptest::prop_assert_eq!(ext.verdict, Verdict::Pass);
        }
    }
}
