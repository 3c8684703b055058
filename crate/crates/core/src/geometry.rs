//! Model Kähler manifolds, tangent data and points on the unit circle bundle.
//!
//! Two models are provided. `Cp1` is the projective line with the
//! Fubini–Study form normalized so that the hyperplane bundle has curvature
//! `Θ = −2iω`; it is described in the single affine chart `z ∈ ℂ` (the point
//! at infinity is a null set and never sampled). `FockPlane` is flat `ℂ^d`
//! with the same conventions and serves as the Heisenberg reference model.
//!
//! A point of the circle bundle `X` is a chart point plus a fiber angle in the
//! unitary frame, so the circle action is a translation of that angle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    Cp1,
    FockPlane,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Cp1 => "cp1",
            ModelId::FockPlane => "fock",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelKahlerSurface {
    id: ModelId,
    dim: usize,
}

impl ModelKahlerSurface {
    pub fn cp1() -> Self {
        Self { id: ModelId::Cp1, dim: 1 }
    }

    pub fn fock(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("Fock plane dimension must be positive".into()));
        }
        Ok(Self { id: ModelId::FockPlane, dim })
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    /// Complex dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total volume `π^d/d! ∫ c₁(A)^d`; `None` for the non-compact Fock model.
    pub fn volume(&self) -> Option<f64> {
        match self.id {
            ModelId::Cp1 => Some(PI),
            ModelId::FockPlane => None,
        }
    }

    /// Dimension of the level-`k` isotype, when finite.
    pub fn isotype_dim(&self, k: u32) -> Option<usize> {
        match self.id {
            ModelId::Cp1 => Some(k as usize + 1),
            ModelId::FockPlane => None,
        }
    }

    /// Density of `dV_M` against Lebesgue measure `dx dy` in the chart.
    pub fn volume_density(&self, z: &ChartPoint) -> f64 {
        match self.id {
            ModelId::Cp1 => {
                let t = z.norm_sqr();
                1.0 / ((1.0 + t) * (1.0 + t))
            }
            ModelId::FockPlane => 1.0,
        }
    }

    /// Kähler potential `φ` with `h = e^{−φ}` on the hyperplane bundle.
    pub fn potential(&self, z: &ChartPoint) -> f64 {
        match self.id {
            ModelId::Cp1 => z.norm_sqr().ln_1p(),
            ModelId::FockPlane => z.norm_sqr(),
        }
    }

    pub fn check_point(&self, z: &ChartPoint) -> Result<()> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.dim() });
        }
        if !z.is_finite() {
            return Err(Error::NonFiniteSample { z: format!("{:?}", z.coords()) });
        }
        Ok(())
    }

    /// The point with Heisenberg coordinates `(θ, w/√k)` centred at `m`.
    ///
    /// At the chart origin of `Cp1`, and everywhere on the Fock plane, the
    /// affine chart already is a preferred chart. Away from the origin the
    /// `SU(2)` isometry `u ↦ (u + m)/(1 − m̄u)` carries the preferred chart at
    /// the origin to one at `m`; its lift to `X` shifts the fiber angle by
    /// `arg(1 − m̄u)`, which makes the Szegő kernel exactly invariant.
    pub fn heisenberg_point(
        &self,
        m: &ChartPoint,
        theta: f64,
        w: &TangentVector,
        k: u32,
    ) -> Result<CirclePoint> {
        self.check_point(m)?;
        let shifted = rescaled_point(&ChartPoint::origin(self.dim), w, k)?;
        match self.id {
            ModelId::FockPlane => {
                let z = m.coords().iter().zip(shifted.coords()).map(|(a, b)| a + b).collect();
                Ok(CirclePoint::new(ChartPoint::new(z), theta))
            }
            ModelId::Cp1 => {
                let m0 = m.z0();
                let u = shifted.z0();
                let denom = Complex64::new(1.0, 0.0) - m0.conj() * u;
                let z = (u + m0) / denom;
                Ok(CirclePoint::new(ChartPoint::scalar(z), theta + denom.arg()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    z: Vec<Complex64>,
}

impl ChartPoint {
    pub fn new(z: Vec<Complex64>) -> Self {
        Self { z }
    }

    pub fn scalar(z: Complex64) -> Self {
        Self { z: vec![z] }
    }

    pub fn origin(dim: usize) -> Self {
        Self { z: vec![Complex64::new(0.0, 0.0); dim] }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.z
    }

    /// First coordinate; the whole point for `d = 1`.
    pub fn z0(&self) -> Complex64 {
        self.z[0]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirclePoint {
    pub base: ChartPoint,
    pub theta: f64,
}

impl CirclePoint {
    pub fn new(base: ChartPoint, theta: f64) -> Self {
        Self { base, theta: wrap_angle(theta) }
    }

    pub fn on_cp1(z: Complex64, theta: f64) -> Self {
        Self::new(ChartPoint::scalar(z), theta)
    }
}

/// Reduce an angle to `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > PI {
        t -= two_pi;
    }
    t
}

/// `r_ϑ`: rotate the fiber angle, keep the base point.
pub fn circle_act(x: &CirclePoint, vartheta: f64) -> CirclePoint {
    CirclePoint::new(x.base.clone(), x.theta + vartheta)
}

/// Tangent vector in the unitary identification `ℂ^d ≅ T_mM`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    w: Vec<Complex64>,
}

impl TangentVector {
    pub fn new(w: Vec<Complex64>) -> Self {
        Self { w }
    }

    pub fn scalar(w: Complex64) -> Self {
        Self { w: vec![w] }
    }

    pub fn zero(dim: usize) -> Self {
        Self { w: vec![Complex64::new(0.0, 0.0); dim] }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.w
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// `H(w, v) = Σ w_i v̄_i`.
pub fn hermitian(w: &TangentVector, v: &TangentVector) -> Result<Complex64> {
    if w.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: v.dim() });
    }
    Ok(w.w.iter().zip(&v.w).map(|(a, b)| a * b.conj()).sum())
}

/// `ψ₂(w, v) = H(w, v) − ½(‖w‖² + ‖v‖²)`.
pub fn psi2(w: &TangentVector, v: &TangentVector) -> Result<Complex64> {
    let h = hermitian(w, v)?;
    Ok(h - 0.5 * (w.norm_sqr() + v.norm_sqr()))
}

/// The same pairing written as `i·Im H(w, v) − ½‖w − v‖²`.
pub fn psi2_symplectic_form(w: &TangentVector, v: &TangentVector) -> Result<Complex64> {
    let h = hermitian(w, v)?;
    let diff: f64 = w.w.iter().zip(&v.w).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(Complex64::new(-0.5 * diff, h.im))
}

/// Plain chart translate `m + w/√k`.
pub fn rescaled_point(m: &ChartPoint, w: &TangentVector, k: u32) -> Result<ChartPoint> {
    if k == 0 {
        return Err(Error::Hypothesis("level k must be at least 1".into()));
    }
    if m.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: w.dim() });
    }
    let s = (k as f64).sqrt().recip();
    Ok(ChartPoint::new(m.z.iter().zip(&w.w).map(|(a, b)| a + b * s).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn psi2_examples() {
        let w = TangentVector::scalar(c(0.3, -1.2));
        assert!(psi2(&w, &w).unwrap().norm() < 1e-15);
        let z = TangentVector::zero(1);
        let p = psi2(&w, &z).unwrap();
        assert!((p - c(-0.5 * w.norm_sqr(), 0.0)).norm() < 1e-15);
        let one = TangentVector::scalar(c(1.0, 0.0));
        let i = TangentVector::scalar(c(0.0, 1.0));
        let p = psi2(&one, &i).unwrap();
        assert!((p - c(-1.0, -1.0)).norm() < 1e-15);
        let q = psi2_symplectic_form(&one, &i).unwrap();
        assert!((p - q).norm() < 1e-15);
    }

    #[test]
    fn psi2_dimension_mismatch() {
        let a = TangentVector::zero(1);
        let b = TangentVector::zero(2);
        assert!(matches!(psi2(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rescaling_examples() {
        let m = ChartPoint::origin(1);
        let z = rescaled_point(&m, &TangentVector::zero(1), 7).unwrap();
        assert_eq!(z.z0(), c(0.0, 0.0));
        let z = rescaled_point(&m, &TangentVector::scalar(c(1.0, 0.0)), 100).unwrap();
        assert!((z.z0() - c(0.1, 0.0)).norm() < 1e-15);
        let z = rescaled_point(&m, &TangentVector::scalar(c(2.0, 1.0)), 4).unwrap();
        assert!((z.z0() - c(1.0, 0.5)).norm() < 1e-15);
        assert!(rescaled_point(&m, &TangentVector::zero(1), 0).is_err());
    }

    #[test]
    fn circle_action_examples() {
        let x = CirclePoint::on_cp1(c(0.4, 0.1), 0.1);
        let y = circle_act(&x, 0.2);
        assert!((y.theta - 0.3).abs() < 1e-15);
        assert_eq!(y.base, x.base);
        assert!((circle_act(&x, 0.0).theta - x.theta).abs() < 1e-15);
        assert!((circle_act(&x, 2.0 * PI).theta - x.theta).abs() < 1e-14);
    }

    #[test]
    fn wrap_lands_in_half_open_interval() {
        assert!((wrap_angle(PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_point_at_origin_is_plain_rescaling() {
        let model = ModelKahlerSurface::cp1();
        let w = TangentVector::scalar(c(1.5, -0.5));
        let x = model.heisenberg_point(&ChartPoint::origin(1), 0.25, &w, 9).unwrap();
        assert!((x.base.z0() - c(0.5, -0.5 / 3.0)).norm() < 1e-15);
        assert!((x.theta - 0.25).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_point_centre_is_base_point() {
        let model = ModelKahlerSurface::cp1();
        let m = ChartPoint::scalar(c(1.0, 0.3));
        let x = model.heisenberg_point(&m, -0.4, &TangentVector::zero(1), 50).unwrap();
        assert!((x.base.z0() - m.z0()).norm() < 1e-15);
        assert!((x.theta + 0.4).abs() < 1e-15);
    }

    #[test]
    fn fock_dimension_checked() {
        let model = ModelKahlerSurface::fock(2).unwrap();
        assert!(model.check_point(&ChartPoint::origin(1)).is_err());
        assert!(ModelKahlerSurface::fock(0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn psi2_conjugate_symmetry(a in -3.0..3.0f64, b in -3.0..3.0f64, p in -3.0..3.0f64, q in -3.0..3.0f64) {
            let w = TangentVector::scalar(c(a, b));
            let v = TangentVector::scalar(c(p, q));
            let l = psi2(&w, &v).unwrap();
            let r = psi2(&v, &w).unwrap().conj();
            proptest::prop_assert!((l - r).norm() < 1e-12);
            proptest::prop_assert!((l - psi2_symplectic_form(&w, &v).unwrap()).norm() < 1e-12);
        }

        #[test]
        fn psi2_real_part_is_nonpositive(a in -3.0..3.0f64, b in -3.0..3.0f64, p in -3.0..3.0f64, q in -3.0..3.0f64) {
            let w = TangentVector::new(vec![c(a, b), c(q, p)]);
            let v = TangentVector::new(vec![c(p, q), c(b, a)]);
            let re = psi2(&w, &v).unwrap().re;
            let dist: f64 = w.coords().iter().zip(v.coords()).map(|(x, y)| (x - y).norm_sqr()).sum();
            proptest::prop_assert!(re <= 1e-12);
            proptest::prop_assert!((re + 0.5 * dist).abs() < 1e-10);
        }

        #[test]
        fn circle_action_composes(t0 in -3.0..3.0f64, a in -10.0..10.0f64, b in -10.0..10.0f64) {
            let x = CirclePoint::on_cp1(c(0.2, 0.7), t0);
            let two = circle_act(&circle_act(&x, a), b);
            let one = circle_act(&x, a + b);
            let d = wrap_angle(two.theta - one.theta);
            proptest::prop_assert!(d.abs() < 1e-12);
        }
    }
}
