//! Equivariant Toeplitz matrices `T_f^{(k)}`, their first-order lifts and
//! Hermitian eigendecompositions.
//!
//! The matrix entries `⟨f s_j, s_i⟩` separate into a radial Gauss–Legendre sum
//! and the angular Fourier coefficients of `f`, which are taken with one FFT
//! per radial node. Rotation-invariant symbols only have the zeroth angular
//! mode, so their matrices are built exactly diagonal.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{CirclePoint, ModelId};
use crate::quadrature::QuadratureGrid;
use crate::sections::SectionBasis;

type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A real symbol on `CP1`, given as a chart evaluator.
#[derive(Clone)]
pub struct SymbolFunction {
    id: String,
    eval: Evaluator,
    min: Option<f64>,
    max: Option<f64>,
    rotation_invariant: bool,
}

impl fmt::Debug for SymbolFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolFunction")
            .field("id", &self.id)
            .field("min", &self.min)
            .field("max", &self.max)
            .field("rotation_invariant", &self.rotation_invariant)
            .finish()
    }
}

impl SymbolFunction {
    pub fn new(
        id: impl Into<String>,
        f: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
        range: Option<(f64, f64)>,
        rotation_invariant: bool,
    ) -> Self {
        Self {
            id: id.into(),
            eval: Arc::new(move |z| Complex64::new(f(z), 0.0)),
            min: range.map(|r| r.0),
            max: range.map(|r| r.1),
            rotation_invariant,
        }
    }

    /// A symbol given by a complex-valued evaluator; it must be real on the
    /// grid, which `build_toeplitz` checks.
    pub fn from_complex(
        id: impl Into<String>,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), eval: Arc::new(f), min: None, max: None, rotation_invariant: false }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c, Some((c, c)), true)
    }

    /// `|z|²/(1+|z|²)`, ranging over `[0, 1]`.
    pub fn height() -> Self {
        Self::new(
            "height",
            |z| {
                let t = z.norm_sqr();
                t / (1.0 + t)
            },
            Some((0.0, 1.0)),
            true,
        )
    }

    /// Third sphere coordinate `(|z|²−1)/(|z|²+1)`.
    pub fn sphere_z() -> Self {
        Self::new(
            "sphere_z",
            |z| {
                let t = z.norm_sqr();
                (t - 1.0) / (t + 1.0)
            },
            Some((-1.0, 1.0)),
            true,
        )
    }

    /// First sphere coordinate `2 Re z/(1+|z|²)`; a rotated copy of `sphere_z`.
    pub fn sphere_x() -> Self {
        Self::new("sphere_x", |z| 2.0 * z.re / (1.0 + z.norm_sqr()), Some((-1.0, 1.0)), false)
    }

    /// `(2 Re z/(1+|z|²))²`; its spectrum has doubly degenerate levels.
    pub fn sphere_x_squared() -> Self {
        Self::new(
            "sphere_x_squared",
            |z| {
                let x = 2.0 * z.re / (1.0 + z.norm_sqr());
                x * x
            },
            Some((0.0, 1.0)),
            false,
        )
    }

    /// `Re z/(1+|z|²)`: only the `±1` angular modes are present.
    pub fn first_harmonic() -> Self {
        Self::new("first_harmonic", |z| z.re / (1.0 + z.norm_sqr()), Some((-0.5, 0.5)), false)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn min(&self) -> Option<f64> {
        self.min
    }

    pub fn max(&self) -> Option<f64> {
        self.max
    }

    pub fn is_rotation_invariant(&self) -> bool {
        self.rotation_invariant
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        (self.eval)(z).re
    }

    fn eval_complex(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// Min and max sampled on `grid`, used when no analytic range is known.
    pub fn sampled_range(&self, grid: &QuadratureGrid) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (u, _) in grid.radial() {
            for l in 0..grid.n_ang() {
                let v = self.eval(grid.point(u, l));
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    First,
}

impl Order {
    fn name(self) -> &'static str {
        match self {
            Order::Zero => "zero",
            Order::First => "first",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenData {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are the eigenvectors in the monomial basis.
    pub vectors: DMatrix<Complex64>,
    /// `max_j ‖T u_j − λ_j u_j‖`.
    pub residual: f64,
    /// Set when the matrix was diagonal: eigenvector `j` is basis vector `perm[j]`.
    permutation: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct ToeplitzSpectrum {
    k: u32,
    symbol_id: String,
    order: Order,
    matrix: DMatrix<Complex64>,
    eigen: Option<EigenData>,
}

/// `M[i][j] = ∫_M f s_j s̄_i dV_M`.
pub fn build_toeplitz(
    f: &SymbolFunction,
    basis: &SectionBasis,
    grid: &QuadratureGrid,
) -> Result<ToeplitzSpectrum> {
    if basis.model().id() != ModelId::Cp1 {
        return Err(Error::MethodUnavailable { method: "build_toeplitz", model: basis.model().id().name() });
    }
    let k = basis.k();
    let n = k as usize + 1;
    let n_ang = grid.n_ang();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n_ang);

    let mut profiles = Vec::with_capacity(grid.n_rad());
    // modes[node][m] = (1/N) Σ_l f(u, φ_l) e^{imφ_l}, m = 0..n
    let mut modes: Vec<Vec<Complex64>> = Vec::with_capacity(grid.n_rad());
    let mut weights = Vec::with_capacity(grid.n_rad());
    for (u, wu) in grid.radial() {
        let mut ring: Vec<Complex64> = Vec::with_capacity(n_ang);
        for l in 0..n_ang {
            let z = grid.point(u, l);
            let v = f.eval_complex(z);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSample { z: format!("{z}") });
            }
            if v.im.abs() > 1e-14 * (1.0 + v.re.abs()) {
                return Err(Error::NonRealSymbol { symbol: f.id.clone(), imag: v.im });
            }
            ring.push(Complex64::new(v.re, 0.0));
        }
        let row = if f.rotation_invariant {
            let mean = ring.iter().map(|c| c.re).sum::<f64>() / n_ang as f64;
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            row[0] = Complex64::new(mean, 0.0);
            row
        } else {
            fft.process(&mut ring);
            let mut row: Vec<Complex64> =
                (0..n).map(|m| ring[m % n_ang] / n_ang as f64).collect();
            row[0].im = 0.0;
            row
        };
        modes.push(row);
        profiles.push((0..n).map(|j| basis.radial_profile(j, u)).collect::<Vec<f64>>());
        weights.push(wu);
    }

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let upper = if f.rotation_invariant { i + 1 } else { n };
            for (j, entry) in row.iter_mut().enumerate().take(upper).skip(i) {
                let mut acc = Complex64::new(0.0, 0.0);
                for node in 0..weights.len() {
                    let a = weights[node] * profiles[node][i] * profiles[node][j];
                    acc += a * modes[node][j - i];
                }
                *entry = PI * acc;
            }
            row
        })
        .collect();

    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        matrix[(i, i)] = Complex64::new(rows[i][i].re, 0.0);
        for j in i + 1..n {
            matrix[(i, j)] = rows[i][j];
            matrix[(j, i)] = rows[i][j].conj();
        }
    }
    Ok(ToeplitzSpectrum { k, symbol_id: f.id.clone(), order: Order::Zero, matrix, eigen: None })
}

/// `D ∘ T_f`: `D` acts on the level-`k` isotype as `k·id`.
pub fn lift_first_order(t: &ToeplitzSpectrum) -> Result<ToeplitzSpectrum> {
    if t.order != Order::Zero {
        return Err(Error::WrongOrder { expected: "zero", got: t.order.name() });
    }
    let k = t.k as f64;
    let eigen = t.eigen.as_ref().map(|e| EigenData {
        values: e.values.iter().map(|v| v * k).collect(),
        vectors: e.vectors.clone(),
        residual: e.residual * k,
        permutation: e.permutation.clone(),
    });
    Ok(ToeplitzSpectrum {
        k: t.k,
        symbol_id: t.symbol_id.clone(),
        order: Order::First,
        matrix: t.matrix.map(|c| c * k),
        eigen,
    })
}

/// Full Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigendecompose(t: &ToeplitzSpectrum) -> Result<ToeplitzSpectrum> {
    let n = t.matrix.nrows();
    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || t.matrix[(i, j)] == Complex64::new(0.0, 0.0)));
    let eigen = if is_diagonal {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| t.matrix[(a, a)].re.total_cmp(&t.matrix[(b, b)].re));
        let values: Vec<f64> = idx.iter().map(|&i| t.matrix[(i, i)].re).collect();
        let mut vectors = DMatrix::<Complex64>::zeros(n, n);
        for (col, &row) in idx.iter().enumerate() {
            vectors[(row, col)] = Complex64::new(1.0, 0.0);
        }
        EigenData { values, vectors, residual: 0.0, permutation: Some(idx) }
    } else {
        let se = SymmetricEigen::new(t.matrix.clone());
        let mut idx: Vec<usize> = (0..n).collect();
        // stable: ties keep solver order
        idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);
        let residual = max_residual(&t.matrix, &values, &vectors);
        EigenData { values, vectors, residual, permutation: None }
    };
    let scale = t.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let limit = 1e-10 * scale * (n as f64).sqrt();
    if eigen.residual > limit {
        return Err(Error::EigenResidual { residual: eigen.residual, limit });
    }
    Ok(ToeplitzSpectrum { eigen: Some(eigen), ..t.clone() })
}

fn max_residual(m: &DMatrix<Complex64>, values: &[f64], vectors: &DMatrix<Complex64>) -> f64 {
    let mv = m * vectors;
    (0..values.len())
        .map(|j| {
            (0..m.nrows())
                .map(|r| (mv[(r, j)] - vectors[(r, j)] * values[j]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

impl ToeplitzSpectrum {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn symbol_id(&self) -> &str {
        &self.symbol_id
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn eigen(&self) -> Result<&EigenData> {
        self.eigen.as_ref().ok_or(Error::NotDecomposed)
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.eigen()?.values)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |M − M*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U*U − I|`.
    pub fn unitarity_defect(&self) -> Result<f64> {
        let u = &self.eigen()?.vectors;
        let g = u.adjoint() * u;
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        Ok(worst)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `e_kj(x) = Σ_i U[i][j] s_i(x)`.
    pub fn eigenfunction_eval(&self, basis: &SectionBasis, j: usize, x: &CirclePoint) -> Result<Complex64> {
        let eigen = self.eigen()?;
        let n = self.dim();
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, k: self.k, size: n });
        }
        self.check_basis(basis)?;
        if let Some(perm) = &eigen.permutation {
            return basis.basis_eval(perm[j], x);
        }
        let s = basis.eval_all(x)?;
        Ok((0..n).map(|i| eigen.vectors[(i, j)] * s[i]).sum())
    }

    /// All eigenfunction values at `x`, indexed like the eigenvalues.
    pub fn eigenfunctions_at(&self, basis: &SectionBasis, x: &CirclePoint) -> Result<Vec<Complex64>> {
        let eigen = self.eigen()?;
        self.check_basis(basis)?;
        let s = basis.eval_all(x)?;
        if let Some(perm) = &eigen.permutation {
            return Ok(perm.iter().map(|&i| s[i]).collect());
        }
        let n = self.dim();
        Ok((0..n).map(|j| (0..n).map(|i| eigen.vectors[(i, j)] * s[i]).sum()).collect())
    }

    fn check_basis(&self, basis: &SectionBasis) -> Result<()> {
        if basis.k() != self.k {
            return Err(Error::Config(format!("basis level {} does not match spectrum level {}", basis.k(), self.k)));
        }
        Ok(())
    }

    /// Re-run the eigensolver on the matrix written in the basis order
    /// `perm` (new index `a` is old index `perm[a]`), and express the result
    /// back in the original basis.
    pub fn decompose_permuted(&self, perm: &[usize]) -> Result<ToeplitzSpectrum> {
        let n = self.dim();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let permuted = DMatrix::from_fn(n, n, |a, b| self.matrix[(perm[a], perm[b])]);
        let tmp = ToeplitzSpectrum { matrix: permuted, eigen: None, ..self.clone() };
        let solved = eigendecompose(&tmp)?;
        let e = solved.eigen()?;
        let mut vectors = DMatrix::<Complex64>::zeros(n, n);
        for a in 0..n {
            for c in 0..n {
                vectors[(perm[a], c)] = e.vectors[(a, c)];
            }
        }
        let permutation = e.permutation.as_ref().map(|p| p.iter().map(|&a| perm[a]).collect());
        let eigen = EigenData { values: e.values.clone(), vectors, residual: e.residual, permutation };
        Ok(ToeplitzSpectrum { eigen: Some(eigen), ..self.clone() })
    }

    /// CSV rows `k, j, lambda`.
    pub fn write_eigenvalues_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "j", "lambda"])?;
        for (j, v) in self.eigenvalues()?.iter().enumerate() {
            w.write_record(&[self.k.to_string(), j.to_string(), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Binary cache of the eigen-data keyed by `(model, symbol, k)`.
    pub fn write_cache<W: Write>(&self, model: &str, mut out: W) -> Result<()> {
        let eigen = self.eigen()?;
        let n = self.dim();
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        write_str(&mut out, model)?;
        write_str(&mut out, &self.symbol_id)?;
        out.write_all(&self.k.to_le_bytes())?;
        out.write_all(&[matches!(self.order, Order::First) as u8])?;
        out.write_all(&(n as u64).to_le_bytes())?;
        out.write_all(&eigen.residual.to_le_bytes())?;
        for v in &eigen.values {
            out.write_all(&v.to_le_bytes())?;
        }
        for c in 0..n {
            for r in 0..n {
                let z = eigen.vectors[(r, c)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        for c in 0..n {
            for r in 0..n {
                let z = self.matrix[(r, c)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(model: &str, symbol_id: &str, k: u32, mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = read_u32(&mut input)?;
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("version {version}, expected {CACHE_VERSION}")));
        }
        let m = read_str(&mut input)?;
        let s = read_str(&mut input)?;
        let kk = read_u32(&mut input)?;
        if m != model || s != symbol_id || kk != k {
            return Err(Error::Cache(format!("key ({m}, {s}, {kk}) does not match ({model}, {symbol_id}, {k})")));
        }
        let mut flag = [0u8; 1];
        input.read_exact(&mut flag)?;
        let order = if flag[0] == 1 { Order::First } else { Order::Zero };
        let n = read_u64(&mut input)? as usize;
        let residual = read_f64(&mut input)?;
        let values = (0..n).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
        let mut vectors = DMatrix::<Complex64>::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                vectors[(r, c)] = Complex64::new(read_f64(&mut input)?, read_f64(&mut input)?);
            }
        }
        let mut matrix = DMatrix::<Complex64>::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                matrix[(r, c)] = Complex64::new(read_f64(&mut input)?, read_f64(&mut input)?);
            }
        }
        let eigen = EigenData { values, vectors, residual, permutation: None };
        Ok(Self { k, symbol_id: symbol_id.to_string(), order, matrix, eigen: Some(eigen) })
    }
}

const CACHE_MAGIC: &[u8; 8] = b"TBANDEIG";
const CACHE_VERSION: u32 = 1;

fn write_str<W: Write>(out: &mut W, s: &str) -> Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(input: &mut R) -> Result<String> {
    let len = read_u32(input)? as usize;
    let mut buf = vec![0u8; len];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Cache(e.to_string()))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(f: &SymbolFunction, k: u32) -> (SectionBasis, ToeplitzSpectrum) {
        let basis = SectionBasis::cp1(k).unwrap();
        let t = build_toeplitz(f, &basis, &QuadratureGrid::for_level(k)).unwrap();
        (basis, eigendecompose(&t).unwrap())
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let (_, t) = spectrum(&SymbolFunction::constant(1.0), 9);
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t.matrix()[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-13);
            }
        }
        let lifted = lift_first_order(&t).unwrap();
        assert!(lifted.eigenvalues().unwrap().iter().all(|&v| (v - 9.0).abs() < 1e-12));
    }

    #[test]
    fn height_is_diagonal_with_beta_ratios() {
        let k = 11u32;
        let (_, t) = spectrum(&SymbolFunction::height(), k);
        for i in 0..=k as usize {
            for j in 0..=k as usize {
                let want = if i == j { (j as f64 + 1.0) / (k as f64 + 2.0) } else { 0.0 };
                assert!((t.matrix()[(i, j)].re - want).abs() < 1e-13);
                if i != j {
                    assert_eq!(t.matrix()[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn k2_height_eigenvalues() {
        let (_, t) = spectrum(&SymbolFunction::height(), 2);
        let ev = t.eigenvalues().unwrap();
        for (v, want) in ev.iter().zip([0.25, 0.5, 0.75]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn first_harmonic_is_tridiagonal() {
        let k = 10u32;
        let basis = SectionBasis::cp1(k).unwrap();
        let t = build_toeplitz(&SymbolFunction::first_harmonic(), &basis, &QuadratureGrid::for_level(k)).unwrap();
        let mut off_band = 0.0f64;
        let mut on_band = 0.0f64;
        for i in 0..=10usize {
            for j in 0..=10usize {
                let v = t.matrix()[(i, j)].norm();
                if i.abs_diff(j) == 1 {
                    on_band = on_band.min(v).max(if on_band == 0.0 { v } else { on_band });
                } else {
                    off_band = off_band.max(v);
                }
            }
        }
        assert!(off_band < 1e-14, "{off_band}");
        assert!(on_band > 1e-3);
    }

    #[test]
    fn lift_scales_eigenvalues_by_k() {
        let k = 100u32;
        let (_, t) = spectrum(&SymbolFunction::height(), k);
        let lifted = lift_first_order(&t).unwrap();
        for (j, v) in lifted.eigenvalues().unwrap().iter().enumerate() {
            let want = 100.0 * (j as f64 + 1.0) / 102.0;
            assert!((v - want).abs() < 1e-11);
            assert!(*v >= 0.0 && *v <= 100.0);
        }
        assert!(matches!(lift_first_order(&lifted), Err(Error::WrongOrder { .. })));
    }

    #[test]
    fn rotated_coordinate_has_rotated_spectrum() {
        // sphere_x and sphere_z are related by an isometry, so their Toeplitz
        // spectra coincide: (2j − k)/(k + 2).
        for k in [4u32, 15, 40] {
            let (_, t) = spectrum(&SymbolFunction::sphere_x(), k);
            let ev = t.eigenvalues().unwrap();
            for (j, v) in ev.iter().enumerate() {
                let want = (2.0 * j as f64 - k as f64) / (k as f64 + 2.0);
                assert!((v - want).abs() < 1e-12, "k={k} j={j}: {v} vs {want}");
            }
            assert!(t.unitarity_defect().unwrap() < 1e-10);
            assert!(t.eigen().unwrap().residual < 1e-12);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 6;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let t = ToeplitzSpectrum { k: 5, symbol_id: "random".into(), order: Order::Zero, matrix: m.clone(), eigen: None };
        let t = eigendecompose(&t).unwrap();
        let e = t.eigen().unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            e.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let rebuilt = &e.vectors * lambda * e.vectors.adjoint();
        assert!((rebuilt - m).iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn diagonal_input_gives_permutation() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let t = ToeplitzSpectrum { k: 2, symbol_id: "diag".into(), order: Order::Zero, matrix: m, eigen: None };
        let t = eigendecompose(&t).unwrap();
        assert_eq!(t.eigenvalues().unwrap(), &[1.0, 2.0, 3.0]);
        let u = &t.eigen().unwrap().vectors;
        assert_eq!(u[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(u[(2, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(u[(0, 2)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn eigenfunction_parseval_and_phase() {
        let k = 14u32;
        let (basis, t) = spectrum(&SymbolFunction::sphere_x(), k);
        let x = CirclePoint::on_cp1(Complex64::new(0.6, -0.2), 0.0);
        let e = t.eigenfunctions_at(&basis, &x).unwrap();
        let total: f64 = e.iter().map(|c| c.norm_sqr()).sum();
        assert!((total - 15.0 / PI).abs() < 1e-11);
        let xt = CirclePoint::on_cp1(Complex64::new(0.6, -0.2), 1.1);
        for j in 0..=k as usize {
            let a = t.eigenfunction_eval(&basis, j, &xt).unwrap();
            let want = e[j] * Complex64::from_polar(1.0, k as f64 * 1.1);
            assert!((a - want).norm() < 1e-12);
        }
        assert!(t.eigenfunction_eval(&basis, 15, &x).is_err());
    }

    #[test]
    fn diagonal_symbol_eigenfunctions_are_monomials() {
        let (basis, t) = spectrum(&SymbolFunction::height(), 6);
        let x = CirclePoint::on_cp1(Complex64::new(-0.3, 0.8), 0.2);
        for j in 0..=6 {
            let e = t.eigenfunction_eval(&basis, j, &x).unwrap();
            assert!((e.norm() - basis.basis_eval(j, &x).unwrap().norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn non_real_symbol_rejected() {
        let f = SymbolFunction::from_complex("complex", |z| z);
        let basis = SectionBasis::cp1(3).unwrap();
        assert!(matches!(
            build_toeplitz(&f, &basis, &QuadratureGrid::for_level(3)),
            Err(Error::NonRealSymbol { .. })
        ));
    }

    #[test]
    fn trace_matches_quadrature() {
        let k = 20u32;
        let f = SymbolFunction::sphere_x_squared();
        let (basis, t) = spectrum(&f, k);
        let grid = QuadratureGrid::for_level(k);
        let direct = grid
            .integrate_m(|z| {
                let x = CirclePoint::on_cp1(z, 0.0);
                let s = basis.eval_all(&x).unwrap();
                f.eval(z) * s.iter().map(|c| c.norm_sqr()).sum::<f64>()
            })
            .unwrap();
        let sum: f64 = t.eigenvalues().unwrap().iter().sum();
        assert!((t.trace() - direct).abs() < 1e-10);
        assert!((sum - direct).abs() < 1e-10);
    }

    #[test]
    fn cache_round_trip() {
        let (_, t) = spectrum(&SymbolFunction::sphere_x(), 5);
        let mut buf = Vec::new();
        t.write_cache("cp1", &mut buf).unwrap();
        let back = ToeplitzSpectrum::read_cache("cp1", "sphere_x", 5, buf.as_slice()).unwrap();
        assert_eq!(back.eigenvalues().unwrap(), t.eigenvalues().unwrap());
        assert!(ToeplitzSpectrum::read_cache("cp1", "height", 5, buf.as_slice()).is_err());
    }

    #[test]
    fn eigenvalue_csv() {
        let (_, t) = spectrum(&SymbolFunction::height(), 2);
        let mut buf = Vec::new();
        t.write_eigenvalues_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,j,lambda"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&first[..2], &["2", "0"]);
        assert!((first[2].parse::<f64>().unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(lines.count(), 2);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn zero_order_bounds(k in 1u32..40, which in 0usize..4) {
            let f = [SymbolFunction::height(), SymbolFunction::sphere_x(),
                     SymbolFunction::sphere_x_squared(), SymbolFunction::first_harmonic()][which].clone();
            let (_, t) = spectrum(&f, k);
            let lo = f.min().unwrap();
            let hi = f.max().unwrap();
            for &v in t.eigenvalues().unwrap() {
                proptest::prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
            proptest::prop_assert!(t.hermitian_defect() <= 1e-14);
        }
    }
}
