//! Galerkin and collocation matrices for Hankel operators, eigenvalues and signed counts.
//!
//! In the Laguerre functions `ℓ_n(u) = L_n(u) e^{−u/2}` the operator with kernel
//! `h(t+s)` has matrix `M_jk = m_{j+k} − m_{j+k+1}` where `m_n = ∫ h(u) ℓ_n(u) du`.
//! The basis is dilated by a scale σ (kernel `σh(σu)`, a unitary change of
//! variables) so that the kernel's effective support is resolved by the basis.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::fmt17;
use crate::kernels::{decay_horizon, eval_kernel, KernelSpec};
use crate::quad::{gl20, KahanSum};

/// Dense real symmetric matrix storing only the lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * (dim + 1) / 2] }
    }

    /// Builds from `f(i, j)` evaluated for `j ≤ i`.
    pub fn from_fn<F: Fn(usize, usize) -> f64 + Sync>(dim: usize, f: F) -> Self {
        let data = (0..dim * (dim + 1) / 2)
            .into_par_iter()
            .map(|p| {
                let mut i = ((((8 * p + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
                while i * (i + 1) / 2 > p {
                    i -= 1;
                }
                while (i + 1) * (i + 2) / 2 <= p {
                    i += 1;
                }
                let j = p - i * (i + 1) / 2;
                f(i, j)
            })
            .collect();
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(i: usize, j: usize) -> usize {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[Self::idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[Self::idx(i, j)] = v;
    }

    /// Leading principal `n × n` block.
    pub fn leading(&self, n: usize) -> Self {
        let n = n.min(self.dim);
        Self { dim: n, data: self.data[..n * (n + 1) / 2].to_vec() }
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// All eigenvalues, sorted in decreasing order.
pub fn sym_eig(m: &SymMatrix) -> Result<Vec<f64>> {
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    if m.dim == 0 {
        return Ok(Vec::new());
    }
    let e = m
        .to_dense()
        .try_symmetric_eigen(f64::EPSILON, 100 * m.dim.max(10))
        .ok_or_else(|| Error::Eigen(format!("symmetric QR did not converge for n = {}", m.dim)))?;
    let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(v)
}

/// Eigenpairs with their residuals `‖Mv − λv‖ / ‖M‖_F`, in decreasing eigenvalue order.
pub fn sym_eig_residuals(m: &SymMatrix) -> Result<Vec<(f64, f64)>> {
    let a = m.to_dense();
    let e = a
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100 * m.dim.max(10))
        .ok_or_else(|| Error::Eigen(format!("symmetric QR did not converge for n = {}", m.dim)))?;
    let norm = m.frobenius().max(f64::MIN_POSITIVE);
    let mut out: Vec<(f64, f64)> = (0..m.dim)
        .map(|k| {
            let v = e.eigenvectors.column(k);
            let lam = e.eigenvalues[k];
            ((&a * v - v * lam).norm() / norm, lam)
        })
        .map(|(r, l)| (l, r))
        .collect();
    out.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    Ok(out)
}

/// Eigenvalues above `tol_rel·max|λ|` and below `−tol_rel·max|λ|`.
pub fn signature_counts(eigs: &[f64], tol_rel: f64) -> Result<(usize, usize)> {
    if eigs.is_empty() {
        return Err(Error::Insufficient("empty spectrum".into()));
    }
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::Config(format!("tol_rel = {tol_rel} must lie in (0, 1)")));
    }
    let cut = tol_rel * eigs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((eigs.iter().filter(|v| **v > cut).count(), eigs.iter().filter(|v| **v < -cut).count()))
}

/// `ℓ_0(u), …, ℓ_N(u)` with `ℓ_n = L_n e^{−u/2}`, written into `out`.
pub fn laguerre_functions(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let l0 = (-0.5 * u).exp();
    out[0] = l0;
    if out.len() > 1 {
        out[1] = (1.0 - u) * l0;
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0 - u) * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Points of the u-axis where the (dilated) kernel is not smooth.
fn kernel_breaks(spec: &KernelSpec, sigma: f64) -> Vec<f64> {
    match spec {
        KernelSpec::TruncatedPower { t0, .. } => vec![t0 / sigma],
        KernelSpec::Sampled(s) => vec![s.grid.origin / sigma, s.grid.end() / sigma],
        KernelSpec::Sum { terms } => terms.iter().flat_map(|t| kernel_breaks(&t.kernel, sigma)).collect(),
        _ => Vec::new(),
    }
}

fn kernel_or_zero(spec: &KernelSpec, t: f64) -> f64 {
    match spec {
        KernelSpec::Sampled(s) if !s.grid.contains(t) => 0.0,
        KernelSpec::Sum { terms } => terms.iter().map(|w| w.weight * kernel_or_zero(&w.kernel, t)).sum(),
        _ => eval_kernel(spec, t).unwrap_or(0.0),
    }
}

/// Moments `m_n = ∫ σh(σu) ℓ_n(u) du`, `n = 0..=count`, on a given panel width in `v = √u`.
fn moments_with_width(spec: &KernelSpec, count: usize, sigma: f64, u_max: f64, dv: f64) -> Vec<f64> {
    let v_max = u_max.sqrt();
    let mut edges = vec![0.0];
    // Geometric panels toward v = 0 for t^k singularities.
    let first = dv.min(v_max);
    for j in (1..=30).rev() {
        edges.push(first * 0.5f64.powi(j));
    }
    let mut cuts: Vec<f64> = kernel_breaks(spec, sigma).into_iter().map(f64::sqrt).filter(|v| *v > first && *v < v_max).collect();
    cuts.push(v_max);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut a = first;
    for c in cuts {
        let n = ((c - a) / dv).ceil().max(1.0) as usize;
        for j in 1..=n {
            edges.push(a + (c - a) * j as f64 / n as f64);
        }
        a = c;
    }
    let gl = gl20();
    let chunks: Vec<Vec<f64>> = edges
        .par_windows(2)
        .map(|w| {
            let mut acc = vec![0.0; count + 1];
            let mut ell = vec![0.0; count + 1];
            for (v, wt) in gl.mapped(w[0], w[1]) {
                let u = v * v;
                let hv = sigma * kernel_or_zero(spec, sigma * u);
                if hv == 0.0 {
                    continue;
                }
                laguerre_functions(u, &mut ell);
                let f = hv * wt * 2.0 * v;
                for (a, l) in acc.iter_mut().zip(&ell) {
                    *a += f * l;
                }
            }
            acc
        })
        .collect();
    let mut sums = vec![KahanSum::default(); count + 1];
    for c in &chunks {
        for (s, v) in sums.iter_mut().zip(c) {
            s.add(*v);
        }
    }
    sums.iter().map(|s| s.value()).collect()
}

/// Agreement required between two quadrature resolutions, relative to `max |m_n|`.
pub const MOMENT_TOL: f64 = 1e-9;

/// Dilated Laguerre moments `m_n = ∫ σh(σu) ℓ_n(u) du` for `n = 0..=count`.
pub fn laguerre_moments_scaled(spec: &KernelSpec, count: usize, sigma: f64) -> Result<Vec<f64>> {
    spec.validate()?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("scale σ = {sigma} must be positive")));
    }
    if spec.is_carleman_type() {
        return Err(Error::Quadrature("kernel behaves like 1/t at 0; Laguerre moments diverge, use collocation".into()));
    }
    if let KernelSpec::Delta { t0 } = spec {
        let mut ell = vec![0.0; count + 1];
        laguerre_functions(t0 / sigma, &mut ell);
        return Ok(ell);
    }
    let horizon = decay_horizon(spec, 1e-17);
    // ℓ_n is negligible beyond u ≈ 4n + O(√n); so is the kernel beyond its horizon.
    let u_max = (horizon / sigma).min(4.0 * count as f64 + 60.0 * (count as f64).sqrt() + 200.0);
    let dv = 0.25 / ((count + 1) as f64).sqrt();
    let fine = moments_with_width(spec, count, sigma, u_max, dv);
    let coarse = moments_with_width(spec, count, sigma, u_max, 2.0 * dv);
    let scale = fine.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let diff = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if fine.iter().any(|v| !v.is_finite()) || diff > MOMENT_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Quadrature(format!("Laguerre moments did not settle: change {diff:.2e} against scale {scale:.2e}")));
    }
    Ok(fine)
}

/// Undilated Laguerre moments `m_n = ∫ h(u) ℓ_n(u) du`, `n = 0..=count`.
pub fn laguerre_moments(spec: &KernelSpec, count: usize) -> Result<Vec<f64>> {
    laguerre_moments_scaled(spec, count, 1.0)
}

/// Discretisation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    /// Laguerre–Galerkin when the moments converge, collocation otherwise.
    #[default]
    Auto,
    Laguerre,
    Collocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GalerkinOptions {
    /// Basis dilation σ; `None` picks `min(1, T/(2n))` from the kernel's decay horizon T.
    pub scale: Option<f64>,
    pub path: Path,
    /// Log-grid window `[x_lo, x_hi]` for collocation (`t = eˣ`).
    pub window: (f64, f64),
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        Self { scale: None, path: Path::Auto, window: (-14.0, 14.0) }
    }
}

/// The scale used by default for a basis of size `n`.
pub fn auto_scale(spec: &KernelSpec, n: usize) -> f64 {
    (decay_horizon(spec, 1e-17) / (2.0 * n as f64)).min(1.0)
}

/// Matrix together with the route that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub matrix: SymMatrix,
    pub path: Path,
    pub scale: Option<f64>,
}

/// `n × n` matrix of the Hankel operator with kernel `spec`.
pub fn hankel_galerkin_matrix(spec: &KernelSpec, n: usize, opts: &GalerkinOptions) -> Result<Discretization> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Config("basis size must be positive".into()));
    }
    let laguerre = |sigma: f64| -> Result<Discretization> {
        let m = laguerre_moments_scaled(spec, 2 * n, sigma)?;
        let matrix = SymMatrix::from_fn(n, |j, k| m[j + k] - m[j + k + 1]);
        Ok(Discretization { matrix, path: Path::Laguerre, scale: Some(sigma) })
    };
    let sigma = opts.scale.unwrap_or_else(|| auto_scale(spec, n));
    match opts.path {
        Path::Laguerre => laguerre(sigma),
        Path::Collocation => collocation(spec, n, opts.window),
        Path::Auto => {
            if spec.is_carleman_type() {
                return collocation(spec, n, opts.window);
            }
            match laguerre(sigma) {
                Ok(d) => Ok(d),
                Err(Error::Quadrature(_)) => collocation(spec, n, opts.window),
                Err(e) => Err(e),
            }
        }
    }
}

fn collocation(spec: &KernelSpec, n: usize, window: (f64, f64)) -> Result<Discretization> {
    if matches!(spec, KernelSpec::Delta { .. }) {
        return Err(Error::NotAvailable("delta kernel cannot be sampled; use the Laguerre path".into()));
    }
    let matrix = collocation_matrix(|t, s| kernel_or_zero(spec, t + s), n, window)?;
    Ok(Discretization { matrix, path: Path::Collocation, scale: None })
}

/// `A_ij = √(w_i w_j t_i t_j) k(t_i, t_j)` on `t_i = e^{x_i}`, `x_i` uniform with trapezoid weights.
pub fn collocation_matrix<K: Fn(f64, f64) -> f64 + Sync>(k: K, n: usize, window: (f64, f64)) -> Result<SymMatrix> {
    let (lo, hi) = window;
    if n < 2 || !(hi > lo) {
        return Err(Error::Config("collocation needs n ≥ 2 and a nonempty window".into()));
    }
    let dx = (hi - lo) / (n - 1) as f64;
    let t: Vec<f64> = (0..n).map(|i| (lo + i as f64 * dx).exp()).collect();
    let sw: Vec<f64> = (0..n).map(|i| (if i == 0 || i + 1 == n { 0.5 * dx } else { dx } * t[i]).sqrt()).collect();
    let m = SymMatrix::from_fn(n, |i, j| sw[i] * sw[j] * k(t[i], t[j]));
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("kernel is not finite on the collocation grid".into()));
    }
    Ok(m)
}

/// Collocation matrix of `(Qf)(t) = ∫ e^{−2ts} f(s) ds`.
pub fn q_operator_matrix(n: usize, window: (f64, f64)) -> Result<SymMatrix> {
    collocation_matrix(|t, s| (-2.0 * t * s).exp(), n, window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub basis_size: usize,
    /// Decreasing order.
    pub eigenvalues: Vec<f64>,
    pub tol: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub max_abs: f64,
    pub path: Path,
    pub scale: Option<f64>,
    /// Eigensolver converged and, on the Laguerre path, the moments settled.
    pub converged: bool,
}

impl SpectralReport {
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, tol: f64, path: Path, scale: Option<f64>) -> Result<Self> {
        let (n_plus, n_minus) = signature_counts(&eigenvalues, tol)?;
        let max_abs = eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Self { basis_size: eigenvalues.len(), eigenvalues, tol, n_plus, n_minus, max_abs, path, scale, converged: true })
    }

    /// Counted eigenvalues of one sign, by decreasing modulus.
    pub fn counted(&self, sign: Sign) -> Vec<f64> {
        let cut = self.tol * self.max_abs;
        let mut v: Vec<f64> = match sign {
            Sign::Plus => self.eigenvalues.iter().copied().filter(|x| *x > cut).collect(),
            Sign::Minus => self.eigenvalues.iter().rev().copied().filter(|x| *x < -cut).collect(),
        };
        v.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        v
    }

    /// `index,eigenvalue` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, fmt17(*v)));
        }
        s
    }
}

/// Discretises, eigensolves and counts.
pub fn spectral_report(spec: &KernelSpec, n: usize, tol: f64, opts: &GalerkinOptions) -> Result<SpectralReport> {
    let d = hankel_galerkin_matrix(spec, n, opts)?;
    SpectralReport::from_eigenvalues(sym_eig(&d.matrix)?, tol, d.path, d.scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// `|λ_n| ≈ C n^{−p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsFit {
    pub c: f64,
    pub p: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// 1-based index range used.
    pub first: usize,
    pub last: usize,
}

/// Least-squares fit of `ln|λ_n| = ln C − p ln n`, dropping the first 3 and the last third.
pub fn asymptotics_fit(report: &SpectralReport, sign: Sign) -> Result<AsymptoticsFit> {
    let v = report.counted(sign);
    if v.len() < 8 {
        return Err(Error::Insufficient(format!("{} counted eigenvalues of that sign; need at least 8", v.len())));
    }
    let first = 4;
    let last = v.len() - v.len() / 3;
    let pts: Vec<(f64, f64)> = (first..=last).map(|n| ((n as f64).ln(), v[n - 1].abs().ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(AsymptoticsFit { c: icpt.exp(), p: -slope, residual, first, last })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indexing() {
        let m = SymMatrix::from_fn(7, |i, j| (10 * i + j) as f64);
        for i in 0..7 {
            for j in 0..7 {
                let (a, b) = if i >= j { (i, j) } else { (j, i) };
                assert_eq!(m.get(i, j), (10 * a + b) as f64);
            }
        }
    }

    #[test]
    fn small_spectra() {
        let mut m = SymMatrix::zeros(2);
        m.set(1, 0, 1.0);
        assert_eq!(sym_eig(&m).unwrap(), vec![1.0, -1.0]);
        let id = SymMatrix::from_fn(5, |i, j| if i == j { 1.0 } else { 0.0 });
        assert_eq!(sym_eig(&id).unwrap(), vec![1.0; 5]);
        assert_eq!(signature_counts(&[2.0, 0.5, -0.1, 1e-15], 1e-8).unwrap(), (2, 1));
        assert!(signature_counts(&[], 1e-8).is_err());
    }

    #[test]
    fn laguerre_orthogonality() {
        // h(u) = e^{−u/2}: m_n = ∫ L_n e^{−u} du = δ_{n0}
        let spec = KernelSpec::power_exp(0.0, 0.5);
        let m = laguerre_moments(&spec, 20).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-13);
        assert!(m[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn truncated_power_moment() {
        let m = laguerre_moments(&KernelSpec::TruncatedPower { l: 0, t0: 1.0 }, 3).unwrap();
        assert!((m[0] - 2.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-13);
        assert!((m[0] - 0.786_938_7).abs() < 1e-7);
    }

    #[test]
    fn carleman_moments_refused() {
        assert!(laguerre_moments(&KernelSpec::Carleman, 4).is_err());
    }

    #[test]
    fn fit_recovers_power_law() {
        let eig: Vec<f64> = (1..=60).map(|n| 0.3 * (n as f64).powf(-1.5)).collect();
        let r = SpectralReport::from_eigenvalues(eig, 1e-8, Path::Laguerre, None).unwrap();
        let f = asymptotics_fit(&r, Sign::Plus).unwrap();
        assert!((f.p - 1.5).abs() < 1e-12 && (f.c - 0.3).abs() < 1e-12);
        assert!(asymptotics_fit(&r, Sign::Minus).is_err());
    }
}
