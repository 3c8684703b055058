//! Orthonormal bases of the level-`k` isotypes and the equivariant Szegő kernel.
//!
//! On `CP1` the isotype `H(X)_k` is spanned by the lifts of the monomial
//! sections `s_j(z) = c_j z^j (1+|z|²)^{−k/2}`, `j = 0..=k`, evaluated in the
//! unitary frame so that a point `(z, θ)` of `X` picks up the factor `e^{ikθ}`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{CirclePoint, ModelId, ModelKahlerSurface};
use crate::quadrature::{ln_factorials, QuadratureGrid};

/// Gate tolerance for the closed-form kernel, relative to `(k+1)/π`.
pub const CLOSED_FORM_GATE_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SectionBasis {
    model: ModelKahlerSurface,
    k: u32,
    /// `ln c_j²`; empty for models without a finite basis.
    ln_norm_sq: Vec<f64>,
}

impl SectionBasis {
    /// Builds the basis and cross-checks the analytic constants against
    /// quadrature on the default grid.
    pub fn new(model: ModelKahlerSurface, k: u32) -> Result<Self> {
        let basis = Self::unchecked(model, k);
        if model.id() == ModelId::Cp1 {
            basis.check_normalization(&QuadratureGrid::for_level(k))?;
        }
        Ok(basis)
    }

    pub fn cp1(k: u32) -> Result<Self> {
        Self::new(ModelKahlerSurface::cp1(), k)
    }

    fn unchecked(model: ModelKahlerSurface, k: u32) -> Self {
        let ln_norm_sq = match model.id() {
            ModelId::Cp1 => {
                let n = k as usize;
                let lf = ln_factorials(n + 1);
                // c_j² = (k+1)! / (π j! (k−j)!)
                (0..=n).map(|j| lf[n + 1] - lf[j] - lf[n - j] - PI.ln()).collect()
            }
            ModelId::FockPlane => Vec::new(),
        };
        Self { model, k, ln_norm_sq }
    }

    fn check_normalization(&self, grid: &QuadratureGrid) -> Result<()> {
        let k = self.k as usize;
        for j in 0..=k {
            let mut norm = 0.0;
            for (u, wu) in grid.radial() {
                norm += wu * self.radial_profile(j, u).powi(2);
            }
            // the angular integral contributes 2π and dV_M = ½ du dφ
            norm *= PI;
            let dev = (norm - 1.0).abs();
            if dev > NORMALIZATION_TOL {
                return Err(Error::NormalizationDrift { k: self.k, j, norm, dev });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn model(&self) -> &ModelKahlerSurface {
        &self.model
    }

    pub fn dim(&self) -> Result<usize> {
        self.model
            .isotype_dim(self.k)
            .ok_or(Error::MethodUnavailable { method: "finite basis", model: self.model.id().name() })
    }

    /// Normalization constant `c_j`.
    pub fn norm_constant(&self, j: usize) -> Result<f64> {
        self.ln_norm_sq
            .get(j)
            .map(|l| (0.5 * l).exp())
            .ok_or(Error::IndexOutOfRange { index: j, k: self.k, size: self.ln_norm_sq.len() })
    }

    /// `|s_j|` on the circle `u = |z|²/(1+|z|²)`: `c_j u^{j/2} (1−u)^{(k−j)/2}`.
    pub fn radial_profile(&self, j: usize, u: f64) -> f64 {
        let k = self.k as usize;
        let mut l = 0.5 * self.ln_norm_sq[j];
        if j > 0 {
            l += 0.5 * j as f64 * u.ln();
        }
        if k > j {
            l += 0.5 * (k - j) as f64 * (-u).ln_1p();
        }
        l.exp()
    }

    /// Value of the lifted basis section `j` at `x`.
    pub fn basis_eval(&self, j: usize, x: &CirclePoint) -> Result<Complex64> {
        let size = self.dim()?;
        if j >= size {
            return Err(Error::IndexOutOfRange { index: j, k: self.k, size });
        }
        self.model.check_point(&x.base)?;
        Ok(self.eval_unchecked(j, x.base.z0(), x.theta))
    }

    fn eval_unchecked(&self, j: usize, z: Complex64, theta: f64) -> Complex64 {
        let k = self.k as f64;
        let r2 = z.norm_sqr();
        if j > 0 && r2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut l = 0.5 * self.ln_norm_sq[j] - 0.5 * k * r2.ln_1p();
        let mut phase = k * theta;
        if j > 0 {
            l += 0.5 * j as f64 * r2.ln();
            phase += j as f64 * z.arg();
        }
        Complex64::from_polar(l.exp(), phase)
    }

    /// All basis values at `x`, indexed by `j`.
    pub fn eval_all(&self, x: &CirclePoint) -> Result<Vec<Complex64>> {
        let size = self.dim()?;
        self.model.check_point(&x.base)?;
        let z = x.base.z0();
        Ok((0..size).map(|j| self.eval_unchecked(j, z, x.theta)).collect())
    }

    /// `Π_k(x1, x2)`.
    pub fn szego_kernel(
        &self,
        x1: &CirclePoint,
        x2: &CirclePoint,
        method: KernelMethod,
    ) -> Result<KernelValue> {
        let value = match method {
            KernelMethod::ClosedForm => {
                closed_form_gate()?;
                self.szego_closed_form(x1, x2)?
            }
            KernelMethod::BasisSum => self.szego_basis_sum(x1, x2)?,
        };
        Ok(KernelValue { value, k: self.k, x1: x1.clone(), x2: x2.clone() })
    }

    /// Closed form without the fixture gate; the gate itself calls this.
    pub(crate) fn szego_closed_form(&self, x1: &CirclePoint, x2: &CirclePoint) -> Result<Complex64> {
        self.model.check_point(&x1.base)?;
        self.model.check_point(&x2.base)?;
        let k = self.k as f64;
        let phase = Complex64::from_polar(1.0, k * (x1.theta - x2.theta));
        match self.model.id() {
            ModelId::Cp1 => {
                let z1 = x1.base.z0();
                let z2 = x2.base.z0();
                let w = Complex64::new(1.0, 0.0) + z1 * z2.conj();
                if w.norm() == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let l = k * w.ln() - 0.5 * k * (z1.norm_sqr().ln_1p() + z2.norm_sqr().ln_1p());
                Ok((k + 1.0) / PI * l.exp() * phase)
            }
            ModelId::FockPlane => {
                let d = self.model.dim() as i32;
                let dot: Complex64 =
                    x1.base.coords().iter().zip(x2.base.coords()).map(|(a, b)| a * b.conj()).sum();
                let l = k * dot - 0.5 * k * (x1.base.norm_sqr() + x2.base.norm_sqr());
                Ok((k / PI).powi(d) * l.exp() * phase)
            }
        }
    }

    fn szego_basis_sum(&self, x1: &CirclePoint, x2: &CirclePoint) -> Result<Complex64> {
        if self.model.id() != ModelId::Cp1 {
            return Err(Error::MethodUnavailable { method: "basis_sum", model: self.model.id().name() });
        }
        let a = self.eval_all(x1)?;
        let b = self.eval_all(x2)?;
        Ok(a.iter().zip(&b).map(|(p, q)| p * q.conj()).sum())
    }

    /// `max |⟨s_i, s_j⟩ − δ_ij|` computed on `grid`.
    pub fn gram_check(&self, grid: &QuadratureGrid) -> Result<f64> {
        let n = self.dim()?;
        // (1/N) Σ_l e^{imφ_l} for m = −(n−1)..=(n−1), summed rather than assumed
        let n_ang = grid.n_ang();
        let angular: Vec<Complex64> = (0..2 * n - 1)
            .map(|idx| {
                let m = idx as f64 - (n as f64 - 1.0);
                let s: Complex64 =
                    (0..n_ang).map(|l| Complex64::from_polar(1.0, m * grid.angle(l))).sum();
                s / n_ang as f64
            })
            .collect();
        let profiles: Vec<(f64, Vec<f64>)> = grid
            .radial()
            .map(|(u, wu)| (wu, (0..n).map(|j| self.radial_profile(j, u)).collect()))
            .collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let radial: f64 = profiles.iter().map(|(wu, a)| wu * a[i] * a[j]).sum();
                let g = PI * radial * angular[j + n - 1 - i];
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    ClosedForm,
    BasisSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub k: u32,
    pub x1: CirclePoint,
    pub x2: CirclePoint,
}

/// Sample points used by the closed-form gate.
fn gate_points() -> Vec<CirclePoint> {
    (0..24)
        .map(|i| {
            let t = i as f64;
            let r = 0.05 + 0.35 * t;
            CirclePoint::on_cp1(Complex64::from_polar(r, 0.7 * t), 0.3 * t - 2.0)
        })
        .collect()
}

/// Runs once per process: the closed form must agree with the basis sum for
/// `k ∈ {2, 8, 32}` before it may be used.
pub fn closed_form_gate() -> Result<()> {
    static GATE: OnceLock<std::result::Result<(), (u32, f64)>> = OnceLock::new();
    let outcome = GATE.get_or_init(|| {
        let pts = gate_points();
        for k in [2u32, 8, 32] {
            let basis = SectionBasis::unchecked(ModelKahlerSurface::cp1(), k);
            let scale = (k as f64 + 1.0) / PI;
            let mut worst = 0.0f64;
            for a in &pts {
                for b in &pts {
                    let c = basis.szego_closed_form(a, b).map_err(|_| (k, f64::NAN))?;
                    let s = basis.szego_basis_sum(a, b).map_err(|_| (k, f64::NAN))?;
                    worst = worst.max((c - s).norm() / scale);
                }
            }
            if worst > CLOSED_FORM_GATE_TOL || worst.is_nan() {
                return Err((k, worst));
            }
        }
        Ok(())
    });
    outcome.map_err(|(k, dev)| Error::ClosedFormGate { k, dev })
}
