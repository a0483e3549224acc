//! Numerical checks of the identities tying the quadratic form `(Hf, f)` to the
//! b-function and the sign-function.
//!
//! Test vectors are built on the Fourier side: a bump `g ∈ C₀^∞` determines
//! `f̃(ξ) = g(ξ)/Γ(1/2 + iξ)` and hence `f` by the inverse Mellin transform.
//! All functions of `x = ln t` are sampled on uniform grids and summed with the
//! trapezoid rule, which is spectrally accurate for these smooth, fast-decaying
//! integrands.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::kernels::{closed_form_sign_function, SignFunctionRepr, TestFunction};
use crate::kernels::{eval_kernel, KernelSpec};
use crate::quad::gl20;
use crate::specfun::log_gamma;
use crate::transforms::fourier::{direct_sum, fourier_sum, Sign};
use crate::transforms::{b_function, sign_function_numeric, BFunctionRepr, SignOptions};

type C64 = Complex64;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Default ξ-spacing for sampled bumps. Keeps the x-period `2π/Δξ` far outside every window used here.
pub const BUMP_STEP: f64 = 0.005;

/// Relative tolerance for the windowed sign-function pairings.
pub const PAIR_TOL: f64 = 1e-11;

/// Smooth bump `A·exp(1 − 1/(1 − u²))`, `u = (ξ − center)/width`, supported on `[center − width, center + width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestBump {
    pub center: f64,
    pub width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl TestBump {
    pub fn new(center: f64, width: f64, amplitude: f64) -> Result<Self> {
        let b = Self { center, width, amplitude };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::Domain(format!("bump width {} must be positive", self.width)));
        }
        if !(self.center.is_finite() && self.amplitude.is_finite()) {
            return Err(Error::Domain("bump center and amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn value(&self, xi: f64) -> f64 {
        let u = (xi - self.center) / self.width;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
    }

    /// Samples on the support; the step is shrunk so that both end points are nodes.
    pub fn sample(&self, step: f64) -> Result<GridFunction> {
        self.validate()?;
        if !(step > 0.0) {
            return Err(Error::Domain(format!("sampling step {step} must be positive")));
        }
        let n = ((2.0 * self.width / step).ceil() as usize).max(4);
        let h = 2.0 * self.width / n as f64;
        let lo = self.center - self.width;
        GridFunction::sample(lo, h, n + 1, |xi| c(self.value(xi), 0.0))
    }

    /// The three bumps of the default verification matrix.
    pub fn default_set() -> Vec<TestBump> {
        vec![
            TestBump { center: 0.0, width: 1.0, amplitude: 1.0 },
            TestBump { center: 2.0, width: 0.5, amplitude: 1.0 },
            TestBump { center: -1.0, width: 2.0, amplitude: 1.0 },
        ]
    }
}

/// Log-grid `x = ln t ∈ [−300, 300]`, step 0.1.
pub fn default_log_axis() -> Axis {
    Axis::new(-300.0, 0.1, 6001)
}

/// Trapezoid nodes `(ξ_j, w_j q_j)` with `q = weight(ξ)·g(ξ)`; exact zeros are dropped.
fn weighted_nodes<W>(g: &GridFunction, weight: W) -> Result<Vec<(f64, C64)>>
where
    W: Fn(f64) -> Result<C64>,
{
    g.validate()?;
    let n = g.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let v = g.value(j);
        if v == c(0.0, 0.0) {
            continue;
        }
        let w = if n > 1 && (j == 0 || j + 1 == n) { 0.5 } else { 1.0 };
        let xi = g.x(j);
        out.push((xi, v * weight(xi)? * (w * g.step)));
    }
    Ok(out)
}

/// `1/Γ(1/2 + iξ)`
fn rgamma_half(xi: f64) -> Result<C64> {
    Ok((-log_gamma(c(0.5, xi))?).exp())
}

/// `v(x) = e^{x/2} f(eˣ) = (2π)^{-1/2} ∫ g(ξ)/Γ(1/2 + iξ) e^{ixξ} dξ` at `xs`.
fn v_from_g(g: &GridFunction, xs: &[f64]) -> Result<Vec<C64>> {
    let nodes = weighted_nodes(g, rgamma_half)?;
    Ok(direct_sum(&nodes, INV_SQRT_2PI, xs, Sign::Plus))
}

/// Inverse Mellin transform of `g/Γ(1/2 + iξ)`: samples of `f(eˣ)` on the log-grid `x`.
pub fn build_f_from_g(g: &GridFunction, x: &Axis) -> Result<GridFunction> {
    x.validate()?;
    let xs = x.points();
    let v = v_from_g(g, &xs)?;
    let vals = v.iter().zip(&xs).map(|(v, x)| v * (-0.5 * x).exp()).collect();
    GridFunction::new(x.origin, x.step, vals)
}

/// `u = Φ*g`, evaluated exactly from the bump nodes, with derivatives.
struct FourierSquare {
    nodes: Vec<(f64, C64)>,
}

impl FourierSquare {
    fn new(g: &GridFunction) -> Result<Self> {
        let nodes = weighted_nodes(g, |_| Ok(c(INV_SQRT_2PI, 0.0)))?;
        Ok(Self { nodes })
    }

    fn u(&self, x: f64, n: usize) -> Vec<C64> {
        let mut d = vec![c(0.0, 0.0); n + 1];
        for &(xi, q) in &self.nodes {
            let mut term = q * C64::from_polar(1.0, x * xi);
            for dj in d.iter_mut() {
                *dj += term;
                term *= c(0.0, xi);
            }
        }
        d
    }
}

impl TestFunction for FourierSquare {
    fn derivs(&self, x: f64, n: usize) -> Vec<f64> {
        mod_square_derivs(&self.u(x, n))
    }
}

/// Derivatives of `|u|²` from those of `u` (Leibniz).
fn mod_square_derivs(d: &[C64]) -> Vec<f64> {
    let n = d.len() - 1;
    (0..=n)
        .map(|m| {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..=m {
                acc += binom * (d[j] * d[m - j].conj()).re;
                binom = binom * (m - j) as f64 / (j + 1) as f64;
            }
            acc
        })
        .collect()
}

/// `u_L(x) = (L_{1/2}φ)(e^{−x})` with `φ(t) = t^{1/2} f(t)`, summed on the log-grid of `v`:
/// `u_L(x) = ∫ K(y − x) v(y) dy`, `K(z) = e^{z/2} exp(−e^z)`.
struct LaplaceSquare {
    origin: f64,
    step: f64,
    v: Vec<C64>,
}

/// Below this `K(z)` is under `e^{−30}` relative to its peak; above it `exp(−e^z)` underflows.
const K_WINDOW: (f64, f64) = (-60.0, 6.7);

impl LaplaceSquare {
    fn u(&self, x: f64, n: usize) -> Vec<C64> {
        let len = self.v.len();
        let j_lo = (((x + K_WINDOW.0 - self.origin) / self.step).floor().max(0.0) as usize).min(len);
        let j_hi = (((x + K_WINDOW.1 - self.origin) / self.step).ceil().max(0.0) as usize + 1).min(len);
        // K^{(m)}(z) = P_m(e^z) K(z), P_0 = 1, P_{m+1}(w) = w P_m'(w) + (1/2 − w) P_m(w)
        let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
        for _ in 0..n {
            let p = polys.last().unwrap();
            let mut next = vec![0.0; p.len() + 1];
            for (i, a) in p.iter().enumerate() {
                next[i] += (i as f64 + 0.5) * a;
                next[i + 1] -= a;
            }
            polys.push(next);
        }
        let mut d = vec![c(0.0, 0.0); n + 1];
        for j in j_lo..j_hi {
            let z = self.origin + j as f64 * self.step - x;
            let w = z.exp();
            let k = (0.5 * z - w).exp();
            if k == 0.0 {
                continue;
            }
            let kv = self.v[j] * k;
            for (m, p) in polys.iter().enumerate() {
                let pv = p.iter().rev().fold(0.0, |acc, a| acc * w + a);
                let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
                d[m] += kv * (sgn * pv);
            }
        }
        d.iter().map(|z| z * self.step).collect()
    }
}

impl TestFunction for LaplaceSquare {
    fn derivs(&self, x: f64, n: usize) -> Vec<f64> {
        mod_square_derivs(&self.u(x, n))
    }
}

/// Settings for [`main_identity_residual_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub pair_tol: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        let a = default_log_axis();
        Self { x_min: a.origin, x_max: a.end(), x_step: a.step, pair_tol: PAIR_TOL }
    }
}

impl IdentityOptions {
    fn axis(&self) -> Result<Axis> {
        if !(self.x_step > 0.0 && self.x_max > self.x_min) {
            return Err(Error::Config("identity grid needs x_step > 0 and x_max > x_min".into()));
        }
        if !(self.pair_tol > 0.0 && self.pair_tol < 1e-3) {
            return Err(Error::Config(format!("pair_tol = {} outside (0, 1e-3)", self.pair_tol)));
        }
        let n = ((self.x_max - self.x_min) / self.x_step).round() as usize + 1;
        let a = Axis::new(self.x_min, self.x_step, n);
        a.validate()?;
        Ok(a)
    }
}

/// The three evaluations of the quadratic form and their pairwise relative residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `(Hf, f)` by double quadrature.
    pub lhs: f64,
    /// `⟨s, |Φ*g|²⟩`
    pub rhs_s: f64,
    /// `⟨h♮, |L_{1/2}φ|²⟩`
    pub rhs_hnat: f64,
    pub res_lhs_s: f64,
    pub res_lhs_hnat: f64,
    pub res_s_hnat: f64,
    pub max_rel_residual: f64,
}

impl IdentityReport {
    fn new(lhs: f64, rhs_s: f64, rhs_hnat: f64) -> Self {
        let scale = lhs.abs().max(rhs_s.abs()).max(rhs_hnat.abs());
        let rel = |a: f64, b: f64| if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
        let (r1, r2, r3) = (rel(lhs, rhs_s), rel(lhs, rhs_hnat), rel(rhs_s, rhs_hnat));
        Self { lhs, rhs_s, rhs_hnat, res_lhs_s: r1, res_lhs_hnat: r2, res_s_hnat: r3, max_rel_residual: r1.max(r2).max(r3) }
    }
}

/// Sign-function in closed form when tabulated, otherwise through the numeric b-function.
pub fn sign_function_for(spec: &KernelSpec) -> Result<SignFunctionRepr> {
    match closed_form_sign_function(spec) {
        Ok(s) => Ok(s),
        Err(Error::NotAvailable(_)) => {
            let xi = Axis::new(-30.0, 30.0 / 8192.0, 16385);
            let b = b_function(spec, &xi)?;
            let x = Axis::new(-40.0, 0.01, 8001);
            let s = sign_function_numeric(&b, &x, &SignOptions::default())
                .map_err(|e| Error::NotAvailable(format!("no sign-function for {}: {e}", spec.label())))?;
            Ok(s.sign)
        }
        Err(e) => Err(e),
    }
}

/// Sesquilinear form `(Hf_a, f_b) = ∫∫ h(t + s) f_a(s) conj f_b(t) ds dt` from `v = e^{x/2} f(eˣ)` on a log-grid.
fn hankel_form_v(spec: &KernelSpec, axis: &Axis, va: &[C64], vb: &[C64]) -> Result<C64> {
    let peak = va.iter().chain(vb).fold(0.0f64, |m, z| m.max(z.norm()));
    if peak == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let cut = 1e-18 * peak;
    let live = |v: &[C64]| -> Vec<usize> { (0..v.len()).filter(|&j| v[j].norm() > cut).collect() };
    let (ia, ib) = (live(va), live(vb));
    let h = axis.step;
    let rows: Vec<Result<C64>> = ib
        .par_iter()
        .map(|&i| {
            let x = axis.at(i);
            let mut acc = c(0.0, 0.0);
            for &j in &ia {
                let y = axis.at(j);
                let kernel = eval_kernel(spec, x.exp() + y.exp())?;
                acc += va[j] * (kernel * (0.5 * (x + y)).exp());
            }
            Ok(acc * vb[i].conj())
        })
        .collect();
    let mut total = c(0.0, 0.0);
    for r in rows {
        total += r?;
    }
    Ok(total * h * h)
}

/// `(Hf_a, f_b)` for `f_a`, `f_b` built from the bumps `ga`, `gb`.
pub fn hankel_sesquilinear(spec: &KernelSpec, ga: &GridFunction, gb: &GridFunction, opts: &IdentityOptions) -> Result<C64> {
    spec.validate()?;
    let axis = opts.axis()?;
    let xs = axis.points();
    let va = v_from_g(ga, &xs)?;
    let vb = v_from_g(gb, &xs)?;
    hankel_form_v(spec, &axis, &va, &vb)
}

/// [`main_identity_residual_with`] on the default grid.
pub fn main_identity_residual(spec: &KernelSpec, g: &GridFunction) -> Result<IdentityReport> {
    main_identity_residual_with(spec, g, &IdentityOptions::default())
}

/// `(Hf, f)` three ways: double quadrature in `(s, t)`, `⟨s, |u|²⟩` with `u = Φ*g`, and
/// `⟨h♮, |L_{1/2}φ|²⟩` written as `⟨s, |u_L|²⟩` with `u_L(x) = (L_{1/2}φ)(e^{−x})`.
pub fn main_identity_residual_with(spec: &KernelSpec, g: &GridFunction, opts: &IdentityOptions) -> Result<IdentityReport> {
    spec.validate()?;
    let axis = opts.axis()?;
    let sign = sign_function_for(spec)?;
    let xs = axis.points();
    let v = v_from_g(g, &xs)?;

    let lhs = hankel_form_v(spec, &axis, &v, &v)?.re;

    let (lo, hi) = (axis.origin, axis.end());
    let u = FourierSquare::new(g)?;
    let rhs_s = sign.pair_on(&u, lo, hi, opts.pair_tol)?;

    let ul = LaplaceSquare { origin: axis.origin, step: axis.step, v };
    let rhs_hnat = sign.pair_on(&ul, lo, hi, opts.pair_tol)?;

    Ok(IdentityReport::new(lhs, rhs_s, rhs_hnat))
}

/// One row of the verification matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub spec: KernelSpec,
    pub bump: TestBump,
    pub lhs: f64,
    pub rhs_s: f64,
    pub rhs_hnat: f64,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub lhs_s: f64,
    pub lhs_hnat: f64,
    pub s_hnat: f64,
    pub max: f64,
}

/// Kernels of the default verification matrix.
pub fn default_specs() -> Vec<KernelSpec> {
    vec![
        KernelSpec::Carleman,
        KernelSpec::power_exp(0.0, 1.0),
        KernelSpec::power_exp(-0.5, 1.0),
        KernelSpec::stretched_exp(0.5),
    ]
}

/// Every `(spec, bump)` pair, in row-major order.
pub fn verify_matrix(specs: &[KernelSpec], bumps: &[TestBump], opts: &IdentityOptions) -> Result<Vec<VerificationCase>> {
    let pairs: Vec<(&KernelSpec, &TestBump)> = specs.iter().flat_map(|s| bumps.iter().map(move |b| (s, b))).collect();
    pairs
        .par_iter()
        .map(|(spec, bump)| {
            let g = bump.sample(BUMP_STEP)?;
            let r = main_identity_residual_with(spec, &g, opts)?;
            Ok(VerificationCase {
                spec: (*spec).clone(),
                bump: **bump,
                lhs: r.lhs,
                rhs_s: r.rhs_s,
                rhs_hnat: r.rhs_hnat,
                residuals: Residuals { lhs_s: r.res_lhs_s, lhs_hnat: r.res_lhs_hnat, s_hnat: r.res_s_hnat, max: r.max_rel_residual },
            })
        })
        .collect()
}

/// `b[g, g] = ⟨b, (Jḡ)*g⟩ = ∫ b(ξ) D(ξ) dξ` with `D(ξ) = ∫ g(ζ) conj g(ζ + ξ) dζ`.
///
/// `D` is the discrete autocorrelation of the samples, so `g` must be sampled on a
/// uniform grid. Atoms are paired exactly with `D` interpolated at their location.
pub fn convolution_form(b: &BFunctionRepr, g: &GridFunction) -> Result<f64> {
    g.validate()?;
    if b.is_mellin {
        return Err(Error::Domain("convolution_form needs a b-function, not a Mellin symbol".into()));
    }
    if b.has_principal_value() {
        return Err(Error::NotAvailable("principal-value b-functions are not supported by convolution_form".into()));
    }
    let vals = g.complex_values();
    let n = vals.len();
    if vals.iter().all(|v| *v == c(0.0, 0.0)) {
        return Ok(0.0);
    }
    let h = g.step;
    // D at lag k·h, k ∈ (−n, n), trapezoid in ζ (endpoint weights matter only if g is not zero there)
    let w = |j: usize| if n > 1 && (j == 0 || j + 1 == n) { 0.5 } else { 1.0 };
    let lags: Vec<i64> = (-(n as i64) + 1..n as i64).collect();
    let corr: Vec<C64> = lags
        .par_iter()
        .map(|&k| {
            let mut acc = c(0.0, 0.0);
            for j in 0..n {
                let jk = j as i64 + k;
                if jk < 0 || jk >= n as i64 {
                    continue;
                }
                let jk = jk as usize;
                acc += vals[j] * vals[jk].conj() * (w(j) * w(jk));
            }
            acc * h
        })
        .collect();
    let d_axis = GridFunction::new(-((n - 1) as f64) * h, h, corr.clone())?;

    let has_smooth = !b.closed.is_empty() || b.grid.is_some();
    let mut total = c(0.0, 0.0);
    if has_smooth {
        if let Some(grid) = &b.grid {
            let live: Vec<f64> = (0..corr.len()).filter(|&i| corr[i].norm() > 0.0).map(|i| d_axis.x(i)).collect();
            let (a, z) = (live[0], live[live.len() - 1]);
            if a < grid.origin || z > grid.end() {
                return Err(Error::Domain(format!(
                    "support [{a}, {z}] of (Jḡ)*g exceeds the b-function window [{}, {}]",
                    grid.origin,
                    grid.end()
                )));
            }
        }
        let terms: Vec<Result<C64>> = (0..corr.len())
            .into_par_iter()
            .map(|i| if corr[i] == c(0.0, 0.0) { Ok(c(0.0, 0.0)) } else { b.eval(d_axis.x(i)).map(|bv| bv * corr[i]) })
            .collect();
        for t in terms {
            total += t?;
        }
        total *= h;
    }
    for a in &b.atoms {
        let d = if d_axis.contains(a.location) { d_axis.interpolate(a.location)? } else { c(0.0, 0.0) };
        total += a.weight.0 * d;
    }
    Ok(total.re)
}

/// Both sides of `ΦΩ = (2π)^{-1/2} Γ(1 + iξ)^{-1} ((Jḡ₁)*g₂)` on a common ξ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub xi: Axis,
    /// Fourier transform of `Ω(x) = F(eˣ)`, `F = f̄₁ ⋆ f₂` by direct quadrature.
    pub lhs: Vec<C64>,
    /// The right-hand side built from the Mellin transforms of `f₁`, `f₂`.
    pub rhs: Vec<C64>,
    pub residual: f64,
}

/// Sup-norm deviation of `v(−ξ)` from `conj v(ξ)` on a grid symmetric about 0, relative to `max |v|`.
pub fn hermitian_residual(axis: &Axis, v: &[C64]) -> Result<f64> {
    let n = v.len();
    if n != axis.len || n == 0 {
        return Err(Error::Domain("grid and values have different lengths".into()));
    }
    if (axis.origin + axis.end()).abs() > 1e-9 * axis.step {
        return Err(Error::Domain("grid is not symmetric about 0".into()));
    }
    let peak = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    Ok((0..n).map(|j| (v[n - 1 - j] - v[j].conj()).norm()).fold(0.0, f64::max) / peak)
}

const FAC_XI_MAX: f64 = 10.0;
const FAC_OUT_MAX: f64 = 6.0;
const FAC_FINE_STEP: f64 = 0.01;
const FAC_OMEGA_MAX: f64 = 150.0;

/// Six-point Lagrange interpolation on a uniform grid; zero outside.
fn lagrange6(v: &[C64], origin: f64, step: f64, x: f64) -> C64 {
    let s = (x - origin) / step;
    let i = s.floor() as i64;
    if i < 2 || i + 3 >= v.len() as i64 {
        return c(0.0, 0.0);
    }
    let t = s - i as f64;
    let mut acc = c(0.0, 0.0);
    for a in -2i64..=3 {
        let mut l = 1.0;
        for b in -2i64..=3 {
            if b != a {
                l *= (t - b as f64) / (a - b) as f64;
            }
        }
        acc += v[(i + a) as usize] * l;
    }
    acc
}

/// Mellin transform `f̃(ξ) = (2π)^{-1/2} ∫ v(x) e^{−ixξ} dx` of log-grid samples of `f`.
fn mellin_of_samples(f: &GridFunction, xi: &[f64]) -> Result<Vec<C64>> {
    f.validate()?;
    let n = f.len();
    let nodes: Vec<(f64, C64)> = (0..n)
        .map(|j| {
            let x = f.x(j);
            let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
            (x, f.value(j) * ((0.5 * x).exp() * w))
        })
        .filter(|(_, v)| v.norm() > 0.0)
        .collect();
    Ok(direct_sum(&nodes, INV_SQRT_2PI * f.step, xi, Sign::Minus))
}

/// Both routes of the Fourier factorization of `F = f̄₁ ⋆ f₂`.
///
/// `f₁`, `f₂` are samples of `f(eˣ)` on log-grids (as returned by [`build_f_from_g`]) reaching
/// at least `x ∈ [−210, 150]`.
pub fn fourier_factorization(f1: &GridFunction, f2: &GridFunction) -> Result<FactorizationReport> {
    let n_xi = (2.0 * FAC_XI_MAX / BUMP_STEP).round() as usize + 1;
    let xi_axis = Axis::new(-FAC_XI_MAX, BUMP_STEP, n_xi);
    let xi = xi_axis.points();
    let ft1 = mellin_of_samples(f1, &xi)?;
    let ft2 = mellin_of_samples(f2, &xi)?;

    let om_lo = (f1.origin.max(f2.origin) + 60.0).max(-FAC_OMEGA_MAX);
    let om_hi = f1.end().min(f2.end()).min(FAC_OMEGA_MAX);
    if om_hi - om_lo < 100.0 {
        return Err(Error::Domain("log-grids of f₁, f₂ are too short for the factorization check".into()));
    }

    // Band-limited reconstruction of v_j on a fine grid, for interpolation inside F.
    let fine_lo = om_lo - 61.0;
    let n_fine = ((om_hi + 1.0 - fine_lo) / FAC_FINE_STEP).ceil() as usize + 1;
    let fine: Vec<f64> = (0..n_fine).map(|j| fine_lo + j as f64 * FAC_FINE_STEP).collect();
    let upsample = |ft: &[C64]| -> Vec<C64> {
        let peak = ft.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let nodes: Vec<(f64, C64)> = xi.iter().zip(ft).filter(|(_, v)| v.norm() > 1e-17 * peak).map(|(x, v)| (*x, *v)).collect();
        direct_sum(&nodes, INV_SQRT_2PI * BUMP_STEP, &fine, Sign::Plus)
    };
    let v1 = upsample(&ft1);
    let v2 = upsample(&ft2);

    // Ω(x) = ∫_{−∞}^{x − ln 2} e^{(y−z)/2} [conj v₁(y) v₂(z) + v₂(y) conj v₁(z)] dy, z = x + ln(1 − e^{y−x})
    let rule = gl20();
    let omega = |x: f64| -> C64 {
        let top = x - std::f64::consts::LN_2;
        let bottom = x - 60.0;
        let panels = 120;
        let w = (top - bottom) / panels as f64;
        let mut acc = c(0.0, 0.0);
        for p in 0..panels {
            let a = bottom + p as f64 * w;
            for (y, wt) in rule.mapped(a, a + w) {
                let z = x + (-(y - x).exp()).ln_1p();
                let a1 = lagrange6(&v1, fine_lo, FAC_FINE_STEP, y);
                let a2 = lagrange6(&v2, fine_lo, FAC_FINE_STEP, y);
                let b1 = lagrange6(&v1, fine_lo, FAC_FINE_STEP, z);
                let b2 = lagrange6(&v2, fine_lo, FAC_FINE_STEP, z);
                acc += (a1.conj() * b2 + a2 * b1.conj()) * (wt * (0.5 * (y - z)).exp());
            }
        }
        acc
    };

    let n_out = (2.0 * FAC_OUT_MAX / BUMP_STEP).round() as usize + 1;
    let out = Axis::new(-FAC_OUT_MAX, BUMP_STEP, n_out);
    let lhs: Vec<C64> =
        fourier_sum(omega, om_lo, om_hi, 0.1, &out, Sign::Minus).into_iter().map(|z| z * INV_SQRT_2PI).collect();

    // ((Jḡ₁)*g₂)(ξ) = ∫ conj g₁(η − ξ) g₂(η) dη on lags ξ = k·Δ
    let g1: Vec<C64> = xi.iter().zip(&ft1).map(|(x, f)| Ok(f * log_gamma(c(0.5, *x))?.exp())).collect::<Result<_>>()?;
    let g2: Vec<C64> = xi.iter().zip(&ft2).map(|(x, f)| Ok(f * log_gamma(c(0.5, *x))?.exp())).collect::<Result<_>>()?;
    let k0 = (n_out as i64 - 1) / 2;
    let rhs: Vec<C64> = (0..n_out)
        .into_par_iter()
        .map(|i| {
            let k = i as i64 - k0;
            let mut acc = c(0.0, 0.0);
            for j in 0..n_xi as i64 {
                let jk = j - k;
                if jk < 0 || jk >= n_xi as i64 {
                    continue;
                }
                acc += g1[jk as usize].conj() * g2[j as usize];
            }
            let x = out.at(i);
            Ok(acc * BUMP_STEP * INV_SQRT_2PI * (-log_gamma(c(1.0, x))?).exp())
        })
        .collect::<Result<_>>()?;

    let peak = lhs.iter().chain(&rhs).fold(0.0f64, |m, z| m.max(z.norm()));
    let residual = if peak == 0.0 {
        0.0
    } else {
        lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / peak
    };
    Ok(FactorizationReport { xi: out, lhs, rhs, residual })
}

/// Max relative deviation between the two sides of the Fourier factorization.
pub fn fourier_factorization_residual(f1: &GridFunction, f2: &GridFunction) -> Result<f64> {
    fourier_factorization(f1, f2).map(|r| r.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::b_function;
    use std::f64::consts::PI;

    fn bump(c: f64, w: f64) -> GridFunction {
        TestBump::new(c, w, 1.0).unwrap().sample(BUMP_STEP).unwrap()
    }

    #[test]
    fn inverse_mellin_recovers_exponential() {
        // f = e^{−t}: f̃ = (2π)^{-1/2} Γ(1/2 − iξ), so g = (2π)^{-1/2} π / cosh(πξ)
        let g = GridFunction::sample(-15.0, BUMP_STEP, 6001, |xi| c(INV_SQRT_2PI * PI / (PI * xi).cosh(), 0.0)).unwrap();
        let x = Axis::new(-5.0, 0.05, 161);
        let f = build_f_from_g(&g, &x).unwrap();
        for j in 0..f.len() {
            let want = (-x.at(j).exp()).exp();
            assert!((f.value(j) - want).norm() < 1e-8, "x = {} got {} want {want}", x.at(j), f.value(j));
        }
    }

    #[test]
    fn symmetric_bump_gives_real_f() {
        let f = build_f_from_g(&bump(0.0, 1.0), &Axis::new(-20.0, 0.1, 401)).unwrap();
        assert!(f.max_imag() < 1e-9 * f.max_abs());
        let zero = GridFunction::new(-1.0, 0.1, vec![c(0.0, 0.0); 21]).unwrap();
        let f0 = build_f_from_g(&zero, &Axis::new(-5.0, 0.5, 21)).unwrap();
        assert_eq!(f0.max_abs(), 0.0);
    }

    #[test]
    fn laplace_route_matches_fourier_route() {
        let g = bump(2.0, 0.5);
        let axis = default_log_axis();
        let v = v_from_g(&g, &axis.points()).unwrap();
        let ul = LaplaceSquare { origin: axis.origin, step: axis.step, v };
        let u = FourierSquare::new(&g).unwrap();
        for x in [-3.0, -0.7, 0.0, 1.3, 4.0] {
            let a = u.u(x, 2);
            let b = ul.u(x, 2);
            for m in 0..3 {
                assert!((a[m] - b[m]).norm() < 1e-10, "x={x} m={m} {} vs {}", a[m], b[m]);
            }
        }
    }

    #[test]
    fn rank_one_and_carleman_cases() {
        let g = bump(0.0, 1.0);
        let r = main_identity_residual(&KernelSpec::power_exp(0.0, 1.0), &g).unwrap();
        assert!(r.max_rel_residual < 1e-8, "{r:?}");
        // rhs_s = |u(0)|²
        let u0 = FourierSquare::new(&g).unwrap().u(0.0, 0)[0];
        assert!((r.rhs_s - u0.norm_sqr()).abs() < 1e-12 * r.rhs_s);

        let r = main_identity_residual(&KernelSpec::Carleman, &g).unwrap();
        assert!(r.max_rel_residual < 1e-8, "{r:?}");
        // (Hf, f) = ∫ π/cosh(πξ) |f̃|² dξ = ∫ |g|² dξ
        let norm: f64 = g.complex_values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.step;
        assert!((r.lhs - norm).abs() < 1e-8 * norm, "{} vs {norm}", r.lhs);
    }

    #[test]
    fn convolution_form_cases() {
        let g = bump(0.0, 1.0);
        let norm: f64 = g.complex_values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.step;
        let q = convolution_form(&BFunctionRepr::atom(1.0), &g).unwrap();
        assert!((q - norm).abs() < 1e-14 * norm);

        let spec = KernelSpec::power_exp(2.0, 1.0);
        let xi = Axis::new(-10.0, 0.01, 2001);
        let b = b_function(&spec, &xi).unwrap();
        for g in [bump(0.0, 1.0), bump(2.0, 0.5)] {
            let q = convolution_form(&b, &g).unwrap();
            let lhs = hankel_sesquilinear(&spec, &g, &g, &IdentityOptions::default()).unwrap().re;
            assert!((q - lhs).abs() < 1e-6 * lhs.abs(), "{q} vs {lhs}");
        }

        let zero = GridFunction::new(-1.0, 0.1, vec![c(0.0, 0.0); 21]).unwrap();
        assert_eq!(convolution_form(&b, &zero).unwrap(), 0.0);
    }

    #[test]
    fn factorization_routes_agree() {
        let axis = default_log_axis();
        let f = build_f_from_g(&bump(0.0, 1.0), &axis).unwrap();
        let rep = fourier_factorization(&f, &f).unwrap();
        assert!(rep.residual < 1e-6, "residual {}", rep.residual);
        assert!(hermitian_residual(&rep.xi, &rep.lhs).unwrap() < 1e-9);
        assert!(hermitian_residual(&rep.xi, &rep.rhs).unwrap() < 1e-9);

        let zero = GridFunction::new(axis.origin, axis.step, vec![c(0.0, 0.0); axis.len]).unwrap();
        let rep = fourier_factorization(&f, &zero).unwrap();
        assert_eq!(rep.residual, 0.0);
        assert!(rep.lhs.iter().chain(&rep.rhs).all(|z| z.norm() == 0.0));
    }
}
