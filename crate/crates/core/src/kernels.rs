//! Spectral-projector kernels of a decomposed Toeplitz operator.
//!
//! Every kernel here is a weighted sum `Σ_j w(λ_kj) e_kj(x1) ē_kj(x2)`. The
//! products `e_kj(x1) ē_kj(x2)` are computed once per point pair by
//! [`PairWeights`], after which each kernel is a pass over the spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::chi::{ChiHat, TestFunctionChi};
use crate::error::{Error, Result};
use crate::geometry::CirclePoint;
use crate::quadrature::CompositeRule;
use crate::sections::SectionBasis;
use crate::toeplitz::ToeplitzSpectrum;

/// Threshold shape, in units of `k` (so `Below(λ)` keeps `λ_kj ≤ λk`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandKind {
    Below(f64),
    Band(f64, f64),
    /// `λ ≤ center − e_k`.
    ShrinkingBelow { center: f64 },
    /// `center − e_k < λ ≤ center + e_k`.
    ShrinkingBand { center: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub kind: BandKind,
    /// Shrink constant `c` in `e_k = c k^{−ξ}`.
    pub c: f64,
    pub xi: f64,
    /// Offset exponent: `‖w‖, ‖v‖ ≤ k^ϖ`.
    pub varpi: f64,
}

impl BandSpec {
    pub fn new(kind: BandKind, c: f64, xi: f64, varpi: f64) -> Result<Self> {
        let spec = Self { kind, c, xi, varpi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn below(lambda: f64) -> Self {
        Self { kind: BandKind::Below(lambda), c: 0.3, xi: 0.25, varpi: 1.0 / 6.0 }
    }

    pub fn band(l1: f64, l2: f64) -> Result<Self> {
        Self::new(BandKind::Band(l1, l2), 0.3, 0.25, 1.0 / 6.0)
    }

    pub fn validate(&self) -> Result<()> {
        check_hypotheses(self.xi, self.varpi)?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Hypothesis(format!("shrink constant c = {} must be positive", self.c)));
        }
        if let BandKind::Band(a, b) = self.kind {
            if !(a < b) {
                return Err(Error::InvalidBand(format!("need λ₁ < λ₂, got ({a}, {b})")));
            }
        }
        Ok(())
    }

    /// `e_k = c k^{−ξ}`.
    pub fn half_width(&self, k: u32) -> f64 {
        self.c * (k as f64).powf(-self.xi)
    }

    /// Per-`k` thresholds `(lower, upper)` before multiplication by `k`;
    /// `lower = −∞` for one-sided thresholds.
    pub fn thresholds(&self, k: u32) -> (f64, f64) {
        let e = self.half_width(k);
        match self.kind {
            BandKind::Below(l) => (f64::NEG_INFINITY, l),
            BandKind::Band(a, b) => (a, b),
            BandKind::ShrinkingBelow { center } => (f64::NEG_INFINITY, center - e),
            BandKind::ShrinkingBand { center } => (center - e, center + e),
        }
    }

    /// Thresholds on the eigenvalue scale, `(kλ₁, kλ₂)`.
    pub fn absolute(&self, k: u32) -> (f64, f64) {
        let (a, b) = self.thresholds(k);
        (a * k as f64, b * k as f64)
    }

    /// `k^ϖ`, the admissible offset norm.
    pub fn offset_bound(&self, k: u32) -> f64 {
        (k as f64).powf(self.varpi)
    }
}

/// `0 ≤ ξ < ½`, `ϖ ≤ 1/6`, `ϖ < ½ − ξ`.
pub fn check_hypotheses(xi: f64, varpi: f64) -> Result<()> {
    if !(0.0..0.5).contains(&xi) {
        return Err(Error::Hypothesis(format!("ξ = {xi} outside [0, 1/2)")));
    }
    if !(varpi <= 1.0 / 6.0) {
        return Err(Error::Hypothesis(format!("ϖ = {varpi} exceeds 1/6")));
    }
    if !(varpi < 0.5 - xi) {
        return Err(Error::Hypothesis(format!("ϖ = {varpi} not below 1/2 − ξ = {}", 0.5 - xi)));
    }
    Ok(())
}

/// `e_kj(x1) ē_kj(x2)` for every `j`, alongside the eigenvalues.
#[derive(Debug, Clone)]
pub struct PairWeights {
    k: u32,
    values: Vec<f64>,
    weights: Vec<Complex64>,
}

impl PairWeights {
    pub fn new(spec: &ToeplitzSpectrum, basis: &SectionBasis, x1: &CirclePoint, x2: &CirclePoint) -> Result<Self> {
        let values = spec.eigenvalues()?.to_vec();
        let e1 = spec.eigenfunctions_at(basis, x1)?;
        let e2 = if x1 == x2 { e1.clone() } else { spec.eigenfunctions_at(basis, x2)? };
        let weights = e1.iter().zip(&e2).map(|(a, b)| a * b.conj()).collect();
        Ok(Self { k: spec.k(), values, weights })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `Σ_j e_kj(x1) ē_kj(x2) = Π_k(x1, x2)`.
    pub fn total(&self) -> Complex64 {
        self.weights.iter().sum()
    }

    /// `Σ_{λ_kj ≤ Λ}`.
    pub fn below(&self, lambda: f64) -> Complex64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| **v <= lambda).map(|(_, w)| w).sum()
    }

    /// `Σ_{Λ₁ < λ_kj ≤ Λ₂}`.
    pub fn within(&self, l1: f64, l2: f64) -> Complex64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| **v > l1 && **v <= l2).map(|(_, w)| w).sum()
    }

    /// `Σ_{λ_kj ∉ (Λ₁, Λ₂]}`: `Π_k` minus the band, summed directly.
    pub fn outside(&self, l1: f64, l2: f64) -> Complex64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| !(**v > l1 && **v <= l2)).map(|(_, w)| w).sum()
    }

    /// `k^{−ξ} Σ_j χ̂(k^{−ξ}(kλ − λ_kj)) e_kj(x1) ē_kj(x2)`.
    pub fn smoothed(&self, chi: &impl ChiHat, xi: f64, lambda: f64) -> Complex64 {
        let kf = self.k as f64;
        let scale = kf.powf(-xi);
        let at = kf * lambda;
        let s: Complex64 =
            self.values.iter().zip(&self.weights).map(|(v, w)| w * chi.chi_hat(scale * (at - v))).sum();
        s * scale
    }
}

/// `𝒯_k(Λ, x1, x2) = Σ_{λ_kj ≤ Λ} e_kj(x1) ē_kj(x2)`; `Λ` is absolute.
pub fn spectral_function(
    spec: &ToeplitzSpectrum,
    basis: &SectionBasis,
    lambda: f64,
    x1: &CirclePoint,
    x2: &CirclePoint,
) -> Result<Complex64> {
    Ok(PairWeights::new(spec, basis, x1, x2)?.below(lambda))
}

/// `𝒯_k(Λ₂, ·, ·) − 𝒯_k(Λ₁, ·, ·)`, as the sum over `Λ₁ < λ_kj ≤ Λ₂`.
pub fn band_kernel(
    spec: &ToeplitzSpectrum,
    basis: &SectionBasis,
    l1: f64,
    l2: f64,
    x1: &CirclePoint,
    x2: &CirclePoint,
) -> Result<Complex64> {
    if !(l1 < l2) {
        return Err(Error::InvalidBand(format!("need Λ₁ < Λ₂, got ({l1}, {l2})")));
    }
    Ok(PairWeights::new(spec, basis, x1, x2)?.within(l1, l2))
}

/// `S^{(k)}_{χ_k e^{−ikλ}}(x1, x2)`; `λ` is the per-`k` level.
pub fn smoothed_kernel(
    spec: &ToeplitzSpectrum,
    basis: &SectionBasis,
    chi: &impl ChiHat,
    xi: f64,
    lambda: f64,
    x1: &CirclePoint,
    x2: &CirclePoint,
) -> Result<Complex64> {
    Ok(PairWeights::new(spec, basis, x1, x2)?.smoothed(chi, xi, lambda))
}

/// The grid points of `eta_grid` outside the window
/// `(ς − C k^{−ξ}, ς + C k^{−ξ})`.
pub fn excluded_window_filter(eta_grid: &[f64], symbol_value: f64, c_off: f64, xi: f64, k: u32) -> Vec<f64> {
    let half = c_off * (k as f64).powf(-xi);
    eta_grid.iter().copied().filter(|&e| (e - symbol_value).abs() >= half).collect()
}

/// `max |S^{(k)}_{χ_k e^{−ikη}}(x, x)|` over the part of `eta_grid` outside the
/// excluded window around `symbol_value = ς_T(m)`.
#[allow(clippy::too_many_arguments)]
pub fn gamma_k(
    spec: &ToeplitzSpectrum,
    basis: &SectionBasis,
    chi: &impl ChiHat,
    xi: f64,
    c_off: f64,
    symbol_value: f64,
    x: &CirclePoint,
    eta_grid: &[f64],
) -> Result<f64> {
    let pw = PairWeights::new(spec, basis, x, x)?;
    gamma_from_weights(&pw, chi, xi, c_off, symbol_value, eta_grid)
}

pub fn gamma_from_weights(
    pw: &PairWeights,
    chi: &impl ChiHat,
    xi: f64,
    c_off: f64,
    symbol_value: f64,
    eta_grid: &[f64],
) -> Result<f64> {
    let etas = excluded_window_filter(eta_grid, symbol_value, c_off, xi, pw.k);
    if etas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(etas.par_iter().map(|&eta| pw.smoothed(chi, xi, eta).norm()).reduce(|| 0.0, f64::max))
}

/// Uniform grid over `[lo, hi]` with spacing at most `step`.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Settings for the `b`-quadrature of the `G_k` identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BQuadrature {
    /// Largest panel width measured in `s = k^{1−ξ} b`.
    pub max_step_s: f64,
    pub order: usize,
    /// Allowed change under panel halving, relative to the kernel scale.
    pub refine_tol: f64,
}

impl Default for BQuadrature {
    fn default() -> Self {
        Self { max_step_s: 0.125, order: 16, refine_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GkIdentity {
    /// `Σ_j G_k(kλ − λ_kj) e_kj(x1) ē_kj(x2)`.
    pub lhs: Complex64,
    /// `k ∫_{b_lo}^{λ} S^{(k)}_{χ_k e^{−ikb}}(x1, x2) db`.
    pub rhs: Complex64,
    /// `|lhs − rhs| / (2π √(Π_k(x1,x1) Π_k(x2,x2)))`.
    pub gap: f64,
    /// `2π 𝒯_k(kλ, x1, x2)`.
    pub two_pi_t: Complex64,
    /// `|lhs − 2π 𝒯_k(kλ, x1, x2)|`.
    pub t_defect: f64,
    pub b_lo: f64,
    pub panels: usize,
    pub refinement_diff: f64,
}

/// Computes both sides of
/// `Σ_j G_k(kλ − λ_kj) e ē = k ∫_{−∞}^{λ} S^{(k)}_{χ_k e^{−ikb}} db`
/// independently: the left through `G` built from `χ`, the right by
/// quadrature of the `χ̂`-weighted sum.
#[allow(clippy::too_many_arguments)]
pub fn gk_identity_check(
    spec: &ToeplitzSpectrum,
    basis: &SectionBasis,
    chi: &TestFunctionChi,
    xi: f64,
    lambda: f64,
    x1: &CirclePoint,
    x2: &CirclePoint,
    bq: &BQuadrature,
    symbol_min: f64,
) -> Result<GkIdentity> {
    let pw = PairWeights::new(spec, basis, x1, x2)?;
    let d1 = PairWeights::new(spec, basis, x1, x1)?.total().re;
    let d2 = PairWeights::new(spec, basis, x2, x2)?.total().re;
    let scale = 2.0 * PI * (d1 * d2).sqrt();
    let k = spec.k();
    let kf = k as f64;

    let lhs: Complex64 = pw
        .values
        .iter()
        .zip(&pw.weights)
        .map(|(v, w)| w * chi.big_g_k(kf * lambda - v, k, xi))
        .sum();

    let lambda_max = pw.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = chi.s_max() * kf.powf(xi - 1.0);
    let b_lo = (symbol_min - 1.0).min(lambda_max / kf - width).min(lambda - 1.0);
    let s_span = (lambda - b_lo) * kf.powf(1.0 - xi);
    let panels = (s_span / bq.max_step_s).ceil() as usize;

    let integrate = |panels: usize| -> Complex64 {
        let rule = CompositeRule::new(b_lo, lambda, panels, bq.order);
        let chunk = 4096;
        let parts: Vec<Complex64> = rule
            .nodes
            .par_chunks(chunk)
            .zip(rule.weights.par_chunks(chunk))
            .map(|(ns, ws)| ns.iter().zip(ws).map(|(&b, &w)| pw.smoothed(chi, xi, b) * w).sum())
            .collect();
        parts.into_iter().sum::<Complex64>() * kf
    };
    let rhs = integrate(panels);
    let fine = integrate(2 * panels);
    let refinement_diff = (rhs - fine).norm() / scale;
    if refinement_diff > bq.refine_tol {
        return Err(Error::UnderResolved { diff: refinement_diff, tol: bq.refine_tol });
    }

    let two_pi_t = 2.0 * PI * pw.below(kf * lambda);
    Ok(GkIdentity {
        lhs,
        rhs: fine,
        gap: (lhs - fine).norm() / scale,
        two_pi_t,
        t_defect: (lhs - two_pi_t).norm(),
        b_lo,
        panels,
        refinement_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chi::ConstantChiHat;
    use crate::quadrature::QuadratureGrid;
    use crate::sections::KernelMethod;
    use crate::toeplitz::{build_toeplitz, eigendecompose, lift_first_order, SymbolFunction};

    fn lifted(f: &SymbolFunction, k: u32) -> (SectionBasis, ToeplitzSpectrum) {
        let basis = SectionBasis::cp1(k).unwrap();
        let t = build_toeplitz(f, &basis, &QuadratureGrid::for_level(k)).unwrap();
        let t = eigendecompose(&lift_first_order(&t).unwrap()).unwrap();
        (basis, t)
    }

    fn pt(re: f64, im: f64, theta: f64) -> CirclePoint {
        CirclePoint::on_cp1(Complex64::new(re, im), theta)
    }

    #[test]
    fn hypotheses() {
        assert!(check_hypotheses(0.25, 1.0 / 6.0).is_ok());
        assert!(check_hypotheses(0.5, 0.1).is_err());
        assert!(check_hypotheses(-0.1, 0.1).is_err());
        assert!(check_hypotheses(0.0, 0.2).is_err());
        assert!(check_hypotheses(0.4, 0.15).is_err());
        assert!(BandSpec::band(0.5, 0.2).is_err());
        assert!(BandSpec::new(BandKind::Below(0.1), 0.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn band_thresholds() {
        let b = BandSpec::new(BandKind::ShrinkingBand { center: 0.5 }, 0.3, 0.25, 1.0 / 6.0).unwrap();
        let (lo, hi) = b.thresholds(16);
        assert!((lo - 0.35).abs() < 1e-15 && (hi - 0.65).abs() < 1e-15);
        assert_eq!(b.absolute(16), (16.0 * lo, 16.0 * hi));
    }

    #[test]
    fn limits_of_the_spectral_function() {
        let (basis, t) = lifted(&SymbolFunction::sphere_x(), 12);
        let x1 = pt(0.3, 0.2, 0.1);
        let x2 = pt(-0.5, 0.9, -1.0);
        let full = basis.szego_kernel(&x1, &x2, KernelMethod::ClosedForm).unwrap().value;
        let top = spectral_function(&t, &basis, 1e9, &x1, &x2).unwrap();
        assert!((top - full).norm() < 1e-12);
        assert_eq!(spectral_function(&t, &basis, -1e9, &x1, &x2).unwrap(), Complex64::new(0.0, 0.0));
        let band = band_kernel(&t, &basis, -1e9, 1e9, &x1, &x2).unwrap();
        assert!((band - full).norm() < 1e-12);
        assert!(band_kernel(&t, &basis, 1.0, 1.0, &x1, &x2).is_err());
    }

    #[test]
    fn k2_height_example() {
        let (basis, t) = lifted(&SymbolFunction::height(), 2);
        let x = pt(0.0, 0.0, 0.0);
        let v = spectral_function(&t, &basis, 0.75, &x, &x).unwrap();
        assert!((v - Complex64::new(3.0 / PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn adjacent_bands_add() {
        let (basis, t) = lifted(&SymbolFunction::sphere_x(), 20);
        let x1 = pt(0.1, 0.0, 0.0);
        let x2 = pt(0.2, -0.1, 0.3);
        let a = band_kernel(&t, &basis, -5.0, 2.0, &x1, &x2).unwrap();
        let b = band_kernel(&t, &basis, 2.0, 9.0, &x1, &x2).unwrap();
        let ab = band_kernel(&t, &basis, -5.0, 9.0, &x1, &x2).unwrap();
        assert!((a + b - ab).norm() < 1e-13);
    }

    #[test]
    fn constant_hook_gives_szego() {
        let (basis, t) = lifted(&SymbolFunction::sphere_x(), 16);
        let x1 = pt(0.4, 0.4, 0.0);
        let x2 = pt(0.1, -0.3, 0.5);
        let xi = 0.25;
        let s = smoothed_kernel(&t, &basis, &ConstantChiHat(1.0), xi, 0.3, &x1, &x2).unwrap();
        let pi = basis.szego_kernel(&x1, &x2, KernelMethod::ClosedForm).unwrap().value;
        assert!((s - pi * 16f64.powf(-xi)).norm() < 1e-12);
    }

    #[test]
    fn smoothed_tail_far_below_spectrum() {
        let chi = crate::chi::shared(0.5).unwrap();
        let (basis, t) = lifted(&SymbolFunction::height(), 2);
        let x = pt(0.0, 0.0, 0.0);
        let xi = 0.25;
        let scale = 2f64.powf(-xi);
        let v = smoothed_kernel(&t, &basis, chi, xi, -10.0, &x, &x).unwrap();
        // eigenvalues {1/2, 1, 3/2} put every argument in |s| ∈ [20.5, 21.5]·2^{−ξ}
        let tail_max = (0..=200)
            .map(|i| chi.chi_hat_direct(scale * (20.5 + i as f64 / 200.0)))
            .fold(0.0, f64::max);
        assert!(v.re >= 0.0 && v.im.abs() < 1e-15);
        assert!(v.re <= scale * tail_max * 3.0 / PI * (1.0 + 1e-6), "{v} vs {tail_max}");
        assert!(v.re < 1e-2);
    }

    #[test]
    fn gamma_needs_points_outside_window() {
        let chi = ConstantChiHat(1.0);
        let (basis, t) = lifted(&SymbolFunction::height(), 8);
        let x = pt(0.0, 0.0, 0.0);
        let grid = [0.0, 0.01, -0.01];
        assert!(matches!(gamma_k(&t, &basis, &chi, 0.25, 0.3, 0.0, &x, &grid), Err(Error::EmptyGrid)));
    }

    #[test]
    fn gamma_monotone_in_window() {
        let chi = crate::chi::shared(0.5).unwrap();
        let (basis, t) = lifted(&SymbolFunction::height(), 32);
        let x = pt(0.0, 0.0, 0.0);
        let grid = uniform_grid(-2.0, 3.0, 1.0 / 32.0);
        let g1 = gamma_k(&t, &basis, chi, 0.25, 0.3, 0.0, &x, &grid).unwrap();
        let g2 = gamma_k(&t, &basis, chi, 0.25, 0.6, 0.0, &x, &grid).unwrap();
        assert!(g2 <= g1);
    }

    #[test]
    fn gk_identity_extremes_and_mid_gap() {
        let chi = crate::chi::shared(0.5).unwrap();
        let (basis, t) = lifted(&SymbolFunction::height(), 8);
        let x1 = pt(0.0, 0.0, 0.0);
        let x2 = pt(0.1, 0.05, 0.0);
        let bq = BQuadrature::default();
        let low = gk_identity_check(&t, &basis, chi, 0.25, -40.0, &x1, &x2, &bq, 0.0).unwrap();
        assert_eq!(low.two_pi_t.norm(), 0.0);
        assert!(low.lhs.norm() < 1e-5 * 2.0 * PI * 9.0 / PI, "{low:?}");
        assert!(low.gap < 1e-6);
        let high = gk_identity_check(&t, &basis, chi, 0.25, 40.0, &x1, &x2, &bq, 0.0).unwrap();
        let pi = basis.szego_kernel(&x1, &x2, KernelMethod::ClosedForm).unwrap().value;
        assert!((high.lhs - 2.0 * PI * pi).norm() / (2.0 * PI * 9.0 / PI) < 1e-5);
        assert!(high.gap < 1e-6);
        // eigenvalues 8(j+1)/10; 0.45·8 sits between the third and fourth
        let mid = gk_identity_check(&t, &basis, chi, 0.25, 0.45, &x1, &x2, &bq, 0.0).unwrap();
        assert!(mid.gap <= 1e-6, "{mid:?}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn equivariance(re in -1.5..1.5f64, im in -1.5..1.5f64, t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, lam in -2.0..14.0f64) {
            let (basis, t) = lifted(&SymbolFunction::sphere_x(), 13);
            let a = spectral_function(&t, &basis, lam, &pt(re, im, t1), &pt(0.2, -0.4, t2)).unwrap();
            let b = spectral_function(&t, &basis, lam, &pt(re, im, 0.0), &pt(0.2, -0.4, 0.0)).unwrap();
            let phase = Complex64::from_polar(1.0, 13.0 * (t1 - t2));
            proptest::prop_assert!((a - phase * b).norm() <= 1e-12 * (1.0 + b.norm()));
        }

        #[test]
        fn diagonal_monotone(re in -2.0..2.0f64, im in -2.0..2.0f64) {
            let (basis, t) = lifted(&SymbolFunction::sphere_x_squared(), 15);
            let x = pt(re, im, 0.4);
            let pw = PairWeights::new(&t, &basis, &x, &x).unwrap();
            let mut prev = 0.0;
            for i in 0..=40 {
                let lam = -1.0 + 17.0 * i as f64 / 40.0;
                let v = pw.below(lam);
                proptest::prop_assert!(v.im.abs() < 1e-13);
                proptest::prop_assert!(v.re >= prev - 1e-13);
                prev = v.re;
            }
            proptest::prop_assert!((prev - 16.0 / PI).abs() < 1e-11);
        }

        #[test]
        fn increments_cauchy_schwarz(a in -1.0..15.0f64, d in 0.0..8.0f64,
                                     r1 in -1.0..1.0f64, i1 in -1.0..1.0f64, r2 in -1.0..1.0f64, i2 in -1.0..1.0f64) {
            let (basis, t) = lifted(&SymbolFunction::sphere_x(), 14);
            let x1 = pt(r1, i1, 0.0);
            let x2 = pt(r2, i2, 0.7);
            let inc = PairWeights::new(&t, &basis, &x1, &x2).unwrap().within(a, a + d);
            let d1 = PairWeights::new(&t, &basis, &x1, &x1).unwrap().within(a, a + d).re;
            let d2 = PairWeights::new(&t, &basis, &x2, &x2).unwrap().within(a, a + d).re;
            proptest::prop_assert!(inc.norm_sqr() <= d1 * d2 * (1.0 + 1e-10) + 1e-24);
        }

        #[test]
        fn bound_by_smoothed(c in -0.2..1.2f64, frac in 0.0..1.0f64, re in -1.0..1.0f64) {
            let chi = crate::chi::shared(0.5).unwrap();
            let k = 24u32;
            let xi = 0.25;
            let (basis, t) = lifted(&SymbolFunction::height(), k);
            let x = pt(re, 0.3, 0.0);
            let pw = PairWeights::new(&t, &basis, &x, &x).unwrap();
            let kf = k as f64;
            let dprime = frac * chi.delta().unwrap();
            let inc = pw.within(kf * c, kf * c + kf.powf(xi) * dprime).re;
            let s = pw.smoothed(chi, xi, c).re;
            proptest::prop_assert!(s >= 0.0);
            proptest::prop_assert!(inc <= 2.0 * kf.powf(xi) / chi.chi_hat_zero() * s * (1.0 + 1e-9) + 1e-14);
        }
    }
}
