//! The chain h → a → b → s → h♮ and back to h.
//!
//! * `a(ξ) = (2π)^{-1/2} ∫ h(t) t^{−iξ} dt`, the Mellin symbol.
//! * `b(ξ) = (2π)^{-1/2} a(ξ) / Γ(1 − iξ)`.
//! * `s(x) = ∫ b(ξ) e^{ixξ} dξ`, the sign-function.
//! * `h(t) = ∫ e^{−t e^{−x}} e^{−x} s(x) dx` recovers the kernel.

pub mod fourier;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::{Axis, Cplx, GridFunction};
use crate::kernels::{theta, KernelSpec, SignFunctionRepr, SmoothPart, TestFunction};
use crate::quad::{integrate_line, LineSpec};
use crate::specfun::{gamma_ratio, log_gamma};
use fourier::{flat_top, fourier_sum, Sign};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Families whose symbols are known in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedSymbol {
    /// t^k e^{−αt}; α may be complex (finite-rank pairs), k ≥ −1.
    PowerExp { k: f64, alpha: Cplx },
    StretchedExp { r: f64 },
    Delta { t0: f64 },
    TruncatedPower { l: u32, t0: f64 },
}

impl ClosedSymbol {
    /// Mellin symbol a(ξ).
    pub fn a(&self, xi: f64) -> Result<Complex64> {
        let z = c(1.0, -xi);
        Ok(match *self {
            ClosedSymbol::PowerExp { k, alpha } => {
                if k == -1.0 {
                    return Err(Error::NotAvailable("a(ξ) of t⁻¹e^{−αt} is Γ(−iξ), singular at ξ = 0".into()));
                }
                INV_SQRT_2PI * (c(-1.0 - k, xi) * alpha.0.ln() + log_gamma(c(1.0 + k, -xi))?).exp()
            }
            ClosedSymbol::StretchedExp { r } => INV_SQRT_2PI / r * log_gamma(z / r)?.exp(),
            ClosedSymbol::Delta { t0 } => INV_SQRT_2PI * Complex64::from_polar(1.0, -xi * t0.ln()),
            ClosedSymbol::TruncatedPower { l, t0 } => {
                let lf = ln_factorial(l);
                INV_SQRT_2PI
                    * (c(l as f64 + 1.0, -xi) * t0.ln() + lf + log_gamma(z)? - log_gamma(c(l as f64 + 2.0, -xi))?).exp()
            }
        })
    }

    /// b-function b(ξ). For k = −1 this is the principal-value part only.
    pub fn b(&self, xi: f64) -> Result<Complex64> {
        let z = c(1.0, -xi);
        let inv2pi = 1.0 / TAU;
        Ok(match *self {
            ClosedSymbol::PowerExp { k, alpha } => {
                let pow = (c(-1.0 - k, xi) * alpha.0.ln()).exp();
                if k == -1.0 {
                    if xi == 0.0 {
                        return Err(Error::Domain("principal-value symbol evaluated at ξ = 0".into()));
                    }
                    // Γ(−iξ)/Γ(1 − iξ) = 1/(−iξ)
                    inv2pi * pow / c(0.0, -xi)
                } else if k >= 0.0 && k.fract() == 0.0 {
                    // Γ(1 + k − iξ)/Γ(1 − iξ) = (1 − iξ)_k
                    let mut poch = c(1.0, 0.0);
                    for j in 0..k as usize {
                        poch *= c(1.0 + j as f64, -xi);
                    }
                    inv2pi * pow * poch
                } else {
                    inv2pi * pow * gamma_ratio(c(1.0 + k, -xi), z)?
                }
            }
            ClosedSymbol::StretchedExp { r } => inv2pi / r * gamma_ratio(z / r, z)?,
            ClosedSymbol::Delta { t0 } => inv2pi * (c(0.0, -xi) * t0.ln() - log_gamma(z)?).exp(),
            ClosedSymbol::TruncatedPower { l, t0 } => {
                inv2pi * (c(l as f64 + 1.0, -xi) * t0.ln() + ln_factorial(l) - log_gamma(c(l as f64 + 2.0, -xi))?).exp()
            }
        })
    }
}

fn ln_factorial(l: u32) -> f64 {
    (1..=l).map(|j| (j as f64).ln()).sum()
}

/// Point mass `weight · δ(ξ − location)` in a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolAtom {
    pub location: f64,
    pub weight: Cplx,
}

/// A symbol a(ξ) or b(ξ): closed-form terms, an optional numeric grid, and atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BFunctionRepr {
    pub closed: Vec<(Cplx, ClosedSymbol)>,
    pub grid: Option<GridFunction>,
    pub atoms: Vec<SymbolAtom>,
    /// Set when the numeric division by Γ(1 − iξ) blew up; the Fourier route is then meaningless.
    pub growing: bool,
    /// True for a(ξ), false for b(ξ).
    #[serde(default)]
    pub is_mellin: bool,
}

/// Mellin symbol uses the same carrier.
pub type MellinSymbol = BFunctionRepr;

impl BFunctionRepr {
    fn empty(is_mellin: bool) -> Self {
        Self { closed: Vec::new(), grid: None, atoms: Vec::new(), growing: false, is_mellin }
    }

    /// Single atom at the origin.
    pub fn atom(weight: f64) -> Self {
        Self { atoms: vec![SymbolAtom { location: 0.0, weight: Cplx::real(weight) }], ..Self::empty(false) }
    }

    /// Smooth part at ξ (atoms excluded).
    pub fn eval(&self, xi: f64) -> Result<Complex64> {
        let mut acc = c(0.0, 0.0);
        for (w, cs) in &self.closed {
            acc += w.0 * if self.is_mellin { cs.a(xi)? } else { cs.b(xi)? };
        }
        if let Some(g) = &self.grid {
            acc += g.interpolate(xi)?;
        }
        Ok(acc)
    }

    /// Whether the smooth part can be evaluated at any ξ.
    pub fn is_closed(&self) -> bool {
        self.grid.is_none()
    }

    /// Contains a t⁻¹e^{−αt} term, whose b is a principal value 1/ξ.
    pub fn has_principal_value(&self) -> bool {
        self.closed.iter().any(|(_, s)| matches!(s, ClosedSymbol::PowerExp { k, .. } if *k == -1.0))
    }

    pub fn scaled(mut self, w: f64) -> Self {
        for t in &mut self.closed {
            t.0 = Cplx(t.0 .0 * w);
        }
        if let Some(g) = &mut self.grid {
            for v in &mut g.values {
                v.0 *= w;
            }
        }
        for a in &mut self.atoms {
            a.weight = Cplx(a.weight.0 * w);
        }
        self
    }

    fn plus(mut self, other: Self) -> Result<Self> {
        self.closed.extend(other.closed);
        self.atoms.extend(other.atoms);
        self.growing |= other.growing;
        self.grid = match (self.grid.take(), other.grid) {
            (None, g) | (g, None) => g,
            (Some(a), Some(b)) => {
                if a.origin != b.origin || a.step != b.step || a.len() != b.len() {
                    return Err(Error::NotAvailable("numeric symbols on different grids".into()));
                }
                let vals = a.complex_values().iter().zip(b.complex_values()).map(|(x, y)| x + y).collect();
                Some(GridFunction::new(a.origin, a.step, vals)?)
            }
        };
        Ok(self)
    }
}

/// Settings for the numeric θ-FFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Largest admissible |θ| at the window edges, relative to max|θ|.
    pub tail_tol: f64,
}

impl Default for MellinOptions {
    fn default() -> Self {
        Self { x_min: -30.0, x_max: 30.0, points: 1 << 14, tail_tol: 1e-10 }
    }
}

/// Closed-form decomposition when every piece is tabulated; `None` means numeric work is needed.
fn closed_parts(spec: &KernelSpec, w: f64, is_mellin: bool) -> Option<BFunctionRepr> {
    let term = |k: f64, alpha: f64| BFunctionRepr { closed: vec![(Cplx::real(w), ClosedSymbol::PowerExp { k, alpha: Cplx::real(alpha) })], ..BFunctionRepr::empty(is_mellin) };
    // Carleman: a = √(2π) δ, b = δ
    let carleman = |weight: f64| {
        let aw = if is_mellin { (TAU).sqrt() } else { 1.0 };
        BFunctionRepr { atoms: vec![SymbolAtom { location: 0.0, weight: Cplx::real(weight * aw) }], ..BFunctionRepr::empty(is_mellin) }
    };
    // t⁻¹e^{−αt}: b = p.v. α^{iξ}/(−2πiξ) + ½δ
    let inverse_exp = |alpha: f64, weight: f64| -> Option<BFunctionRepr> {
        if alpha == 0.0 {
            return Some(carleman(weight));
        }
        if is_mellin {
            return None;
        }
        Some(BFunctionRepr {
            closed: vec![(Cplx::real(weight), ClosedSymbol::PowerExp { k: -1.0, alpha: Cplx::real(alpha) })],
            atoms: vec![SymbolAtom { location: 0.0, weight: Cplx::real(0.5 * weight) }],
            ..BFunctionRepr::empty(is_mellin)
        })
    };
    let single = |s: ClosedSymbol| BFunctionRepr { closed: vec![(Cplx::real(w), s)], ..BFunctionRepr::empty(is_mellin) };
    match spec {
        KernelSpec::Carleman => Some(carleman(w)),
        KernelSpec::PowerExp { k, alpha } if *k == -1.0 => inverse_exp(*alpha, w),
        KernelSpec::PowerExp { k, alpha } => Some(term(*k, *alpha)),
        KernelSpec::StretchedExp { r } => Some(single(ClosedSymbol::StretchedExp { r: *r })),
        KernelSpec::Gaussian => Some(single(ClosedSymbol::StretchedExp { r: 2.0 })),
        KernelSpec::Delta { t0 } => Some(single(ClosedSymbol::Delta { t0: *t0 })),
        KernelSpec::TruncatedPower { l, t0 } => Some(single(ClosedSymbol::TruncatedPower { l: *l, t0: *t0 })),
        KernelSpec::CarlemanDiff { alpha1, alpha2, gamma } => {
            let a = inverse_exp(*alpha1, w)?;
            let b = inverse_exp(*alpha2, -gamma * w)?;
            a.plus(b).ok()
        }
        KernelSpec::FiniteRank(fr) => {
            let mut out = BFunctionRepr::empty(is_mellin);
            for t in &fr.terms {
                for (j, cj) in t.coeffs.iter().enumerate() {
                    if cj.0 != c(0.0, 0.0) {
                        out.closed.push((Cplx(cj.0 * w), ClosedSymbol::PowerExp { k: j as f64, alpha: t.alpha }));
                    }
                }
            }
            Some(out)
        }
        KernelSpec::Sum { terms } => {
            let mut out = BFunctionRepr::empty(is_mellin);
            for t in terms {
                out = out.plus(closed_parts(&t.kernel, w * t.weight, is_mellin)?).ok()?;
            }
            Some(out)
        }
        KernelSpec::Sampled(_) => None,
    }
}

/// Numeric a(ξ) on `xi` by a trapezoid/FFT over θ(x) = eˣh(eˣ).
pub fn mellin_numeric(spec: &KernelSpec, xi: &Axis, opts: &MellinOptions) -> Result<GridFunction> {
    xi.validate()?;
    let dx = (opts.x_max - opts.x_min) / (opts.points - 1) as f64;
    let th = |x: f64| theta(spec, x).unwrap_or(0.0);
    if matches!(spec, KernelSpec::Delta { .. }) {
        return Err(Error::NotAvailable("delta kernel has no samples; use the closed form".into()));
    }
    let peak = (0..opts.points).map(|j| th(opts.x_min + j as f64 * dx).abs()).fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::Domain("kernel vanishes or is not finite on the log window".into()));
    }
    let edge = th(opts.x_min).abs().max(th(opts.x_max).abs());
    if edge > opts.tail_tol * peak {
        return Err(Error::Truncation(format!(
            "|θ| at the window edge is {:.3e} of its peak; widen [{}, {}] or use a closed form",
            edge / peak,
            opts.x_min,
            opts.x_max
        )));
    }
    let vals = fourier_sum(|x| c(th(x), 0.0), opts.x_min, opts.x_max, dx, xi, Sign::Minus);
    GridFunction::new(xi.origin, xi.step, vals.into_iter().map(|v| v * INV_SQRT_2PI).collect())
}

/// a(ξ): closed forms where tabulated, otherwise the θ-FFT sampled on `xi`.
pub fn mellin_symbol(spec: &KernelSpec, xi: &Axis) -> Result<MellinSymbol> {
    spec.validate()?;
    if let Some(s) = closed_parts(spec, 1.0, true) {
        return Ok(s);
    }
    let grid = mellin_numeric(spec, xi, &MellinOptions::default())?;
    Ok(BFunctionRepr { grid: Some(grid), ..BFunctionRepr::empty(true) })
}

/// Numeric b is flagged as growing beyond this factor over its value near ξ = 0.
pub const GROWTH_LIMIT: f64 = 1e6;

/// b(ξ): closed forms where tabulated, otherwise numeric a divided by Γ(1 − iξ) on `xi`.
///
/// The numeric grid is cut to the central range where a(ξ) stands clear of its
/// round-off floor, and `growing` is set when |b| exceeds [`GROWTH_LIMIT`] times
/// its central value.
pub fn b_function(spec: &KernelSpec, xi: &Axis) -> Result<BFunctionRepr> {
    spec.validate()?;
    if let Some(s) = closed_parts(spec, 1.0, false) {
        return Ok(s);
    }
    b_function_numeric(spec, xi, &MellinOptions::default())
}

/// b(ξ) from the numeric Mellin symbol even when a closed form exists; used to cross-check the tables.
pub fn b_function_numeric(spec: &KernelSpec, xi: &Axis, opts: &MellinOptions) -> Result<BFunctionRepr> {
    spec.validate()?;
    let opts = *opts;
    let a = mellin_numeric(spec, xi, &opts)?;
    let dx = (opts.x_max - opts.x_min) / (opts.points - 1) as f64;
    let mass: f64 = (0..opts.points).map(|j| theta(spec, opts.x_min + j as f64 * dx).unwrap_or(0.0).abs()).sum::<f64>() * dx;
    let floor = 64.0 * f64::EPSILON * mass * INV_SQRT_2PI;
    let j0 = ((0.0 - xi.origin) / xi.step).round().clamp(0.0, (xi.len - 1) as f64) as usize;
    let clear = |j: usize| a.value(j).norm() > 1e3 * floor;
    if !clear(j0) {
        return Err(Error::Domain("numeric Mellin symbol is lost in round-off near ξ = 0".into()));
    }
    let (mut lo, mut hi) = (j0, j0);
    while lo > 0 && clear(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < xi.len && clear(hi + 1) {
        hi += 1;
    }
    if hi - lo < 2 {
        return Err(Error::Domain("numeric b-function window is too narrow".into()));
    }
    let mut vals = Vec::with_capacity(hi - lo + 1);
    for j in lo..=hi {
        let x = xi.at(j);
        vals.push(INV_SQRT_2PI * a.value(j) * (-log_gamma(c(1.0, -x))?).exp());
    }
    let centre = vals[j0 - lo].norm().max(1e-300);
    let growing = vals.iter().any(|v| v.norm() > GROWTH_LIMIT * centre);
    let grid = GridFunction::new(xi.at(lo), xi.step, vals)?;
    Ok(BFunctionRepr { grid: Some(grid), growing, ..BFunctionRepr::empty(false) })
}

/// Settings for [`sign_function_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignOptions {
    /// Largest frequency cut-off; slowly decaying b are tapered smoothly up to here.
    pub xi_max: f64,
    /// Frequency step; 2π/step must exceed the effective support of s.
    pub xi_step: f64,
}

impl Default for SignOptions {
    fn default() -> Self {
        Self { xi_max: 2000.0, xi_step: 0.05 }
    }
}

/// Diagnostics from the Fourier route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignDiagnostics {
    /// Largest |Im s| before it was discarded.
    pub max_imag: f64,
    /// Frequency window actually used.
    pub xi_cut: f64,
    /// Whether b was still significant at the cut (so a taper was needed).
    pub tapered: bool,
}

/// Numeric sign-function with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericSign {
    pub sign: SignFunctionRepr,
    pub diagnostics: SignDiagnostics,
}

/// s = √(2π)Φ*b sampled on `x`: `s(x) = ∫ b(ξ) e^{ixξ} dξ`.
///
/// Atoms at ξ = 0 become constants. Closed-form b is integrated with a smooth
/// flat-top taper when it decays too slowly to be truncated; grid b is summed
/// directly over its window.
pub fn sign_function_numeric(b: &BFunctionRepr, x: &Axis, opts: &SignOptions) -> Result<NumericSign> {
    x.validate()?;
    if b.is_mellin {
        return Err(Error::Domain("expected a b-function, got a Mellin symbol".into()));
    }
    if b.growing {
        return Err(Error::Growing("numeric b exceeded the growth limit; use the witness search".into()));
    }
    if b.has_principal_value() {
        return Err(Error::NotAvailable("b has a 1/ξ principal value; use the closed-form step sign-function".into()));
    }
    let mut constant = c(0.0, 0.0);
    for a in &b.atoms {
        if a.location != 0.0 {
            return Err(Error::NotAvailable(format!("b-function atom at ξ = {} is not supported", a.location)));
        }
        constant += a.weight.0;
    }
    let mut vals = vec![constant; x.len];
    let mut diag = SignDiagnostics { max_imag: 0.0, xi_cut: 0.0, tapered: false };

    if !b.closed.is_empty() {
        let closed_only = BFunctionRepr { grid: None, atoms: Vec::new(), ..b.clone() };
        let centre = closed_only.eval(0.0)?.norm().max(closed_only.eval(0.5)?.norm()).max(1e-300);
        // Walk outwards until b is negligible or the cap is reached.
        let mut cut = 8.0;
        let mut peak: f64 = centre;
        loop {
            let v = closed_only.eval(cut)?.norm().max(closed_only.eval(-cut)?.norm());
            peak = peak.max(v);
            if v > GROWTH_LIMIT * centre {
                return Err(Error::Growing(format!("|b({cut})| exceeds {GROWTH_LIMIT:e} × |b(0)|")));
            }
            if v < 1e-17 * peak || cut >= opts.xi_max {
                diag.tapered = v >= 1e-17 * peak;
                break;
            }
            cut = (cut * 1.25).min(opts.xi_max);
        }
        // Flat top covers [−cut, cut]; the taper runs out to 2·cut unless b is already negligible.
        let window = if diag.tapered { cut } else { 2.0 * cut };
        diag.xi_cut = window;
        let f = |xi: f64| {
            let w = flat_top(xi / window);
            if w == 0.0 {
                return c(0.0, 0.0);
            }
            closed_only.eval(xi).map(|v| v * w).unwrap_or(c(0.0, 0.0))
        };
        let sum = fourier_sum(f, -window, window, opts.xi_step, x, Sign::Plus);
        for (v, s) in vals.iter_mut().zip(sum) {
            *v += s;
        }
    }
    if let Some(g) = &b.grid {
        let half = 0.5 * (g.end() - g.origin);
        let mid = 0.5 * (g.end() + g.origin);
        let nodes: Vec<(f64, Complex64)> = (0..g.len()).map(|j| (g.x(j), g.value(j) * flat_top((g.x(j) - mid) / half))).collect();
        let sum = fourier::direct_sum(&nodes, g.step, &x.points(), Sign::Plus);
        for (v, s) in vals.iter_mut().zip(sum) {
            *v += s;
        }
        diag.xi_cut = diag.xi_cut.max(half);
        diag.tapered = true;
    }
    diag.max_imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let real: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let grid = GridFunction::from_real(x.origin, x.step, &real)?;
    Ok(NumericSign { sign: SignFunctionRepr { smooth: SmoothPart::Grid(grid), atoms: Vec::new() }, diagnostics: diag })
}

/// F_t(x) = e^{−t e^{−x}} e^{−x} and its x-derivatives, exact.
///
/// With y = e^{−x}, d/dx = −y d/dy maps yʲe^{−ty} to (−j yʲ + t y^{j+1}) e^{−ty}.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceProbe {
    pub t: f64,
}

impl TestFunction for LaplaceProbe {
    fn derivs(&self, x: f64, n: usize) -> Vec<f64> {
        let y = (-x).exp();
        let ty = self.t * y;
        if ty > 740.0 || !y.is_finite() {
            return vec![0.0; n + 1];
        }
        let e = (-ty).exp();
        let mut p = vec![0.0, 1.0];
        let eval = |p: &[f64]| p.iter().rev().fold(0.0, |acc, c| acc * y + c) * e;
        let mut out = vec![eval(&p)];
        for _ in 0..n {
            let mut q = vec![0.0; p.len() + 1];
            for (j, cj) in p.iter().enumerate() {
                q[j] -= j as f64 * cj;
                q[j + 1] += self.t * cj;
            }
            p = q;
            out.push(eval(&p));
        }
        out
    }

    fn anchors(&self) -> Vec<f64> {
        vec![self.t.ln()]
    }
}

/// Relative tolerance used by the reconstruction and Laplace quadratures.
pub const QUAD_TOL: f64 = 1e-9;

/// h(t) = ⟨s, F_t⟩ at a single point.
pub fn reconstruct_at(s: &SignFunctionRepr, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    s.pair(&LaplaceProbe { t }, QUAD_TOL)
}

/// Kernel samples h(t) on the uniform grid `t`, recovered from the sign-function.
pub fn reconstruct_kernel(s: &SignFunctionRepr, t: &Axis) -> Result<GridFunction> {
    t.validate()?;
    let vals: Result<Vec<f64>> = t.points().par_iter().map(|tt| reconstruct_at(s, *tt)).collect();
    GridFunction::from_real(t.origin, t.step, &vals?)
}

/// `(L_α φ)(λ) = λ^α ∫ e^{−tλ} t^{α−1} φ(t) dt` over `support = (a, b)`, `0 ≤ a < b ≤ ∞`.
///
/// Integrated in y = ln t with graded Gauss–Legendre panels.
pub fn laplace_weighted<F>(phi: F, support: (f64, f64), alpha: f64, lambdas: &[f64]) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
    }
    let (a, b) = support;
    if !(a >= 0.0 && b > a) {
        return Err(Error::Domain("support must satisfy 0 ≤ a < b".into()));
    }
    let spec = LineSpec { lo: if a > 0.0 { a.ln() } else { f64::NEG_INFINITY }, hi: b.ln(), ..LineSpec::whole() };
    lambdas
        .par_iter()
        .map(|&lam| {
            if !(lam > 0.0) {
                return Err(Error::Domain(format!("lambda = {lam} must be positive")));
            }
            let mut f = |y: f64| {
                let t = y.exp();
                let arg = -t * lam + alpha * y;
                if arg < -745.0 {
                    return c(0.0, 0.0);
                }
                phi(t) * arg.exp()
            };
            let spec = LineSpec { breaks: vec![-lam.ln()], ..spec.clone() };
            integrate_line(&mut f, &spec, QUAD_TOL).map(|v| v * lam.powf(alpha))
        })
        .collect()
}

/// Settings for the Fourier route of the weighted Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceFourierOptions {
    pub y_min: f64,
    pub y_max: f64,
    pub y_step: f64,
    pub xi_max: f64,
    pub xi_step: f64,
}

impl Default for LaplaceFourierOptions {
    fn default() -> Self {
        Self { y_min: -30.0, y_max: 30.0, y_step: 0.01, xi_max: 60.0, xi_step: 0.02 }
    }
}

/// Same transform through Fourier space: `L_α φ(λ) = W(−ln λ)` with `W = Φ* Γ(α + iξ) Φ Ω`, `Ω(y) = φ(e^y)`.
pub fn laplace_weighted_fourier<F>(phi: F, alpha: f64, lambdas: &[f64], opts: &LaplaceFourierOptions) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
    }
    let n_xi = (2.0 * opts.xi_max / opts.xi_step).round() as usize + 1;
    let xi = Axis::new(-opts.xi_max, opts.xi_step, n_xi);
    // ΦΩ(ξ) = (2π)^{-1/2} ∫ Ω(y) e^{−iyξ} dy
    let omega_hat = fourier_sum(|y| phi(y.exp()), opts.y_min, opts.y_max, opts.y_step, &xi, Sign::Minus);
    let mut nodes = Vec::with_capacity(n_xi);
    for (j, oh) in omega_hat.iter().enumerate() {
        let x = xi.at(j);
        let g = log_gamma(c(alpha, x))?.exp();
        nodes.push((x, g * oh * INV_SQRT_2PI));
    }
    let xs: Vec<f64> = lambdas.iter().map(|l| -l.ln()).collect();
    // W(x) = (2π)^{-1/2} ∫ Γ(α + iξ) ΦΩ(ξ) e^{ixξ} dξ
    Ok(fourier::direct_sum(&nodes, opts.xi_step * INV_SQRT_2PI, &xs, Sign::Plus))
}

/// `(2π)⁻¹ ∫ e^{ixλ} Γ(α + iλ) dλ` by the trapezoid rule; equals `e^{−e^{−x}} e^{−αx}`.
pub fn gamma_fourier_pair(alpha: f64, x: f64) -> Result<f64> {
    let h = 0.01;
    let n = (80.0 / h) as i64;
    let mut acc = c(0.0, 0.0);
    for j in -n..=n {
        let l = j as f64 * h;
        acc += log_gamma(c(alpha, l))?.exp() * Complex64::from_polar(1.0, x * l);
    }
    Ok((acc * h / TAU).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let xi = Axis::span(-1.0, 1.0, 3);
        let a = mellin_symbol(&KernelSpec::power_exp(0.0, 1.0), &xi).unwrap();
        assert!((a.eval(0.0).unwrap().re - INV_SQRT_2PI).abs() < 1e-15);

        let a = mellin_symbol(&KernelSpec::Carleman, &xi).unwrap();
        assert!(a.closed.is_empty());
        assert_eq!(a.atoms.len(), 1);
        assert!((a.atoms[0].weight.0.re - TAU.sqrt()).abs() < 1e-15);

        let b = b_function(&KernelSpec::power_exp(1.0, 1.0), &xi).unwrap();
        assert!((b.eval(0.0).unwrap().re - 1.0 / TAU).abs() < 1e-16);

        let b = b_function(&KernelSpec::Delta { t0: 1.0 }, &xi).unwrap();
        assert!((b.eval(0.0).unwrap() - c(1.0 / TAU, 0.0)).norm() < 1e-16);

        let b = b_function(&KernelSpec::stretched_exp(2.0), &xi).unwrap();
        assert!(b.eval(40.0).unwrap().norm() > 10.0 * b.eval(0.0).unwrap().norm());
    }

    #[test]
    fn carleman_b_is_unit_atom() {
        let b = b_function(&KernelSpec::Carleman, &Axis::span(-1.0, 1.0, 3)).unwrap();
        let s = sign_function_numeric(&b, &Axis::span(-3.0, 3.0, 7), &SignOptions::default()).unwrap();
        match s.sign.smooth {
            SmoothPart::Grid(g) => assert!(g.real_values().iter().all(|v| *v == 1.0)),
            _ => panic!("expected grid"),
        }
    }

    #[test]
    fn probe_derivatives_match_finite_differences() {
        let p = LaplaceProbe { t: 1.7 };
        let x = 0.3;
        let d = p.derivs(x, 3);
        let h = 1e-4;
        for n in 1..=3 {
            let fd = (p.derivs(x + h, n - 1)[n - 1] - p.derivs(x - h, n - 1)[n - 1]) / (2.0 * h);
            assert!((fd - d[n]).abs() < 1e-7, "order {n}");
        }
    }

    #[test]
    fn laplace_examples() {
        let t_end: f64 = 2.0;
        let v = laplace_weighted(|_| c(1.0, 0.0), (0.0, t_end), 1.0, &[0.5, 1.0, 3.0]).unwrap();
        for (lam, got) in [0.5f64, 1.0, 3.0].iter().zip(v) {
            assert!((got.re - (1.0 - (-lam * t_end).exp())).abs() < 1e-12);
        }
        let v = laplace_weighted(|t| c(t.sqrt() * (-t).exp(), 0.0), (0.0, f64::INFINITY), 0.5, &[1.0]).unwrap();
        assert!((v[0].re - 0.5).abs() < 1e-12);
        assert!(laplace_weighted(|_| c(1.0, 0.0), (0.0, 1.0), 0.0, &[1.0]).is_err());
    }
}
