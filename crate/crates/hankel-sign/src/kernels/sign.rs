//! Sign-functions: a smooth part plus symbolic Dirac atoms.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::KernelSpec;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quad::{integrate_line_real, LineSpec};
use crate::specfun::rgamma_real;

/// `weight · δ^{(order)}(x − location)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
    pub order: u32,
}

/// Tabulated closed-form pieces of a sign-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedSign {
    Constant { value: f64 },
    /// `weight · 1{x < beta}`
    Step { beta: f64, weight: f64 },
    /// `weight/Γ(−k) · (e^{−x} − α)₊^{−k−1}` for non-integer k > −1.
    /// For k > 0 this is a finite-part distribution; pointwise values are still returned.
    PowerBranch { k: f64, alpha: f64, weight: f64 },
    /// `weight · ½π^{−1/2} e^{3x/2} e^{−eˣ/4}`
    StretchedHalf { weight: f64 },
}

impl ClosedSign {
    fn scaled(&self, w: f64) -> ClosedSign {
        match *self {
            ClosedSign::Constant { value } => ClosedSign::Constant { value: w * value },
            ClosedSign::Step { beta, weight } => ClosedSign::Step { beta, weight: w * weight },
            ClosedSign::PowerBranch { k, alpha, weight } => ClosedSign::PowerBranch { k, alpha, weight: w * weight },
            ClosedSign::StretchedHalf { weight } => ClosedSign::StretchedHalf { weight: w * weight },
        }
    }

    /// Point where the piece is singular or jumps.
    fn break_point(&self) -> Option<f64> {
        match *self {
            ClosedSign::Step { beta, .. } => Some(beta),
            ClosedSign::PowerBranch { alpha, .. } => Some(-alpha.ln()),
            _ => None,
        }
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(match *self {
            ClosedSign::Constant { value } => value,
            ClosedSign::Step { beta, weight } => {
                if x < beta {
                    weight
                } else if x == beta {
                    0.5 * weight
                } else {
                    0.0
                }
            }
            ClosedSign::PowerBranch { k, alpha, weight } => {
                let beta = -alpha.ln();
                if x > beta {
                    0.0
                } else if x == beta {
                    return Err(Error::Domain(format!("sign-function is singular at x = {beta}")));
                } else {
                    // e^{−x} − α = α(e^{β−x} − 1), computed without cancellation
                    let gap = alpha * (beta - x).exp_m1();
                    weight * rgamma_real(-k) * (-(k + 1.0) * gap.ln()).exp()
                }
            }
            ClosedSign::StretchedHalf { weight } => {
                if x > 700.0 {
                    0.0
                } else {
                    weight * 0.5 / PI.sqrt() * (1.5 * x - 0.25 * x.exp()).exp()
                }
            }
        })
    }
}

/// Non-atomic part of a sign-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum SmoothPart {
    Zero,
    Closed(Vec<ClosedSign>),
    Grid(GridFunction),
}

/// s(x) = smooth(x) + Σ atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignFunctionRepr {
    pub smooth: SmoothPart,
    pub atoms: Vec<Atom>,
}

/// Real test function with derivatives, paired against a sign-function.
pub trait TestFunction: Sync {
    /// `[φ(x), φ'(x), …, φ^{(n)}(x)]`
    fn derivs(&self, x: f64, n: usize) -> Vec<f64>;

    fn value(&self, x: f64) -> f64 {
        self.derivs(x, 0)[0]
    }

    /// Points near which the test function lives; used to anchor quadrature.
    fn anchors(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl SignFunctionRepr {
    pub fn closed(pieces: Vec<ClosedSign>, atoms: Vec<Atom>) -> Self {
        Self { smooth: if pieces.is_empty() { SmoothPart::Zero } else { SmoothPart::Closed(pieces) }, atoms }
    }

    pub fn constant(value: f64) -> Self {
        Self::closed(vec![ClosedSign::Constant { value }], Vec::new())
    }

    /// True when s is an ordinary locally integrable function (no atoms, no finite parts).
    pub fn is_function(&self) -> bool {
        self.atoms.is_empty()
            && match &self.smooth {
                SmoothPart::Closed(p) => !p.iter().any(|c| matches!(c, ClosedSign::PowerBranch { k, .. } if *k > 0.0)),
                _ => true,
            }
    }

    /// Whether the smooth part is continuous everywhere.
    pub fn is_continuous(&self) -> bool {
        self.is_function()
            && match &self.smooth {
                SmoothPart::Closed(p) => p.iter().all(|c| matches!(c, ClosedSign::Constant { .. } | ClosedSign::StretchedHalf { .. })),
                _ => true,
            }
    }

    /// Jumps and singular points of the smooth part.
    pub fn break_points(&self) -> Vec<f64> {
        let mut b: Vec<f64> = match &self.smooth {
            SmoothPart::Closed(p) => p.iter().filter_map(|c| c.break_point()).collect(),
            _ => Vec::new(),
        };
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    /// Value of the smooth part at `x` (atoms are not point-evaluable).
    pub fn smooth_value(&self, x: f64) -> Result<f64> {
        match &self.smooth {
            SmoothPart::Zero => Ok(0.0),
            SmoothPart::Closed(p) => p.iter().try_fold(0.0, |acc, c| Ok(acc + c.value(x)?)),
            SmoothPart::Grid(g) => g.interpolate(x).map(|v| v.re),
        }
    }

    /// Samples the smooth part; the grid is shifted by half a step if a node would hit a singular point.
    pub fn sample(&self, origin: f64, step: f64, n: usize) -> Result<GridFunction> {
        let breaks = self.break_points();
        let hits = |o: f64| (0..n).any(|j| breaks.iter().any(|b| (o + j as f64 * step - b).abs() < 1e-9 * step));
        let o = if hits(origin) { origin + 0.5 * step } else { origin };
        let mut vals = Vec::with_capacity(n);
        for j in 0..n {
            vals.push(self.smooth_value(o + j as f64 * step)?);
        }
        GridFunction::from_real(o, step, &vals)
    }

    pub fn scaled(&self, w: f64) -> Self {
        let smooth = match &self.smooth {
            SmoothPart::Zero => SmoothPart::Zero,
            SmoothPart::Closed(p) => SmoothPart::Closed(p.iter().map(|c| c.scaled(w)).collect()),
            SmoothPart::Grid(g) => {
                let vals: Vec<f64> = g.real_values().iter().map(|v| w * v).collect();
                SmoothPart::Grid(GridFunction::from_real(g.origin, g.step, &vals).expect("same grid"))
            }
        };
        let atoms = self.atoms.iter().map(|a| Atom { weight: w * a.weight, ..*a }).collect();
        Self { smooth, atoms }
    }

    /// Sum of two closed-form representations.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        let smooth = match (&self.smooth, &other.smooth) {
            (SmoothPart::Zero, s) | (s, SmoothPart::Zero) => s.clone(),
            (SmoothPart::Closed(a), SmoothPart::Closed(b)) => SmoothPart::Closed([a.clone(), b.clone()].concat()),
            _ => return Err(Error::NotAvailable("cannot add grid-valued sign-functions".into())),
        };
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            match atoms.iter_mut().find(|b| b.location == a.location && b.order == a.order) {
                Some(b) => b.weight += a.weight,
                None => atoms.push(*a),
            }
        }
        atoms.retain(|a| a.weight != 0.0);
        Ok(Self { smooth, atoms })
    }

    /// ⟨s, φ⟩ with atoms paired exactly: `⟨δ^{(n)}(· − x₀), φ⟩ = (−1)ⁿ φ^{(n)}(x₀)`.
    pub fn pair(&self, phi: &dyn TestFunction, rel_tol: f64) -> Result<f64> {
        self.pair_on(phi, f64::NEG_INFINITY, f64::INFINITY, rel_tol)
    }

    /// [`pair`](Self::pair) restricted to `[lo, hi]`, for test functions only known on a window.
    pub fn pair_on(&self, phi: &dyn TestFunction, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
        if !(lo < hi) {
            return Err(Error::Domain(format!("empty pairing window [{lo}, {hi}]")));
        }
        let window = (lo, hi);
        let mut total = 0.0;
        for a in self.atoms.iter().filter(|a| a.location >= lo && a.location <= hi) {
            let d = phi.derivs(a.location, a.order as usize);
            let sgn = if a.order % 2 == 0 { 1.0 } else { -1.0 };
            total += a.weight * sgn * d[a.order as usize];
        }
        let anchors = phi.anchors();
        match &self.smooth {
            SmoothPart::Zero => {}
            SmoothPart::Grid(g) => {
                let mut acc = 0.0;
                for j in 0..g.len() {
                    let x = g.x(j);
                    if x < lo || x > hi {
                        continue;
                    }
                    let w = if j == 0 || j + 1 == g.len() { 0.5 } else { 1.0 };
                    acc += w * g.value(j).re * phi.value(x);
                }
                total += acc * g.step;
            }
            SmoothPart::Closed(pieces) => {
                for c in pieces {
                    total += pair_closed(c, phi, &anchors, window, rel_tol)?;
                }
            }
        }
        Ok(total)
    }
}

fn pair_closed(c: &ClosedSign, phi: &dyn TestFunction, anchors: &[f64], window: (f64, f64), rel_tol: f64) -> Result<f64> {
    let clip = |spec: LineSpec| -> Option<LineSpec> {
        let lo = spec.lo.max(window.0);
        let hi = spec.hi.min(window.1);
        (lo < hi).then_some(LineSpec { lo, hi, ..spec })
    };
    let run = |f: &mut dyn FnMut(f64) -> f64, spec: LineSpec| -> Result<f64> {
        match clip(spec) {
            Some(spec) => integrate_line_real(&mut |x| f(x), &spec, rel_tol),
            None => Ok(0.0),
        }
    };
    match *c {
        ClosedSign::Constant { value } => {
            if value == 0.0 {
                return Ok(0.0);
            }
            let spec = LineSpec::whole().with_breaks(anchors);
            Ok(value * run(&mut |x| phi.value(x), spec)?)
        }
        ClosedSign::StretchedHalf { .. } => {
            let spec = LineSpec::whole().with_breaks(anchors).with_breaks(&[6f64.ln()]);
            run(&mut |x| c.value(x).unwrap_or(0.0) * phi.value(x), spec)
        }
        ClosedSign::Step { beta, weight } => {
            let spec = LineSpec { hi: beta, ..LineSpec::whole() }.with_breaks(anchors);
            Ok(weight * run(&mut |x| phi.value(x), spec)?)
        }
        ClosedSign::PowerBranch { k, alpha, weight } => {
            let beta = -alpha.ln();
            // ⟨s_k, φ⟩ = α^{−m} ⟨s_{k−m}, Π_{j<m} (k − j + ∂) φ⟩ with k − m ∈ (−1, 0)
            let m = if k > 0.0 { k.ceil() as usize } else { 0 };
            let mut poly = vec![1.0];
            for j in 0..m {
                let c0 = k - j as f64;
                let mut next = vec![0.0; poly.len() + 1];
                for (i, p) in poly.iter().enumerate() {
                    next[i] += c0 * p;
                    next[i + 1] += p;
                }
                poly = next;
            }
            let k0 = k - m as f64;
            let p = -k0;
            let scale = weight * alpha.powi(-(m as i32)) * rgamma_real(-k0) * alpha.powf(-(k0 + 1.0));
            // In u = β − x the density is u^{p−1} q(u) with q smooth, q(u) = ((e^u − 1)/u)^{p−1}.
            let q = |u: f64| if u == 0.0 { 1.0 } else { (u.exp_m1() / u).powf(p - 1.0) };
            let applied = |u: f64| {
                let d = phi.derivs(beta - u, m);
                poly.iter().zip(&d).map(|(c, v)| c * v).sum::<f64>()
            };
            let lo = (beta - window.1).max(0.0);
            let hi = beta - window.0;
            if !(lo < hi) {
                return Ok(0.0);
            }
            let breaks: Vec<f64> = anchors.iter().map(|a| beta - a).filter(|u| *u > 0.0).collect();
            let mut body = 0.0;
            // Near u = 0 use w = u^p, which absorbs the singular factor: u^{p−1} du = dw / p.
            let split = hi.min(1.0);
            if lo < split {
                let wb: Vec<f64> = breaks.iter().filter(|u| **u < split).map(|u| u.powf(p)).collect();
                let spec = LineSpec { lo: lo.powf(p), hi: split.powf(p), ..LineSpec::whole() }.with_breaks(&wb);
                body += integrate_line_real(
                    &mut |w: f64| {
                        let u = w.max(0.0).powf(1.0 / p);
                        q(u) * applied(u) / p
                    },
                    &spec,
                    rel_tol,
                )?;
            }
            if split < hi {
                let spec = LineSpec { lo: split.max(lo), hi, ..LineSpec::whole() }.with_breaks(&breaks);
                body += integrate_line_real(&mut |u: f64| u.powf(p - 1.0) * q(u) * applied(u), &spec, rel_tol)?;
            }
            Ok(scale * body)
        }
    }
}

/// Atom coefficients for `t^k e^{−αt}`, `k ∈ ℤ₊`: `s_{k+1} = α⁻¹((k+1) − ∂) s_k`, `s_0 = α⁻¹δ`.
pub(crate) fn integer_power_atoms(k: usize, alpha: f64) -> Vec<f64> {
    let mut c = vec![1.0 / alpha];
    for kk in 0..k {
        let mut next = vec![0.0; c.len() + 1];
        for n in 0..next.len() {
            let cur = c.get(n).copied().unwrap_or(0.0);
            let prev = if n > 0 { c[n - 1] } else { 0.0 };
            next[n] = ((kk + 1) as f64 * cur - prev) / alpha;
        }
        c = next;
    }
    c
}

fn power_exp_sign(k: f64, alpha: f64) -> SignFunctionRepr {
    if alpha == 0.0 {
        return SignFunctionRepr::constant(1.0);
    }
    let beta = -alpha.ln();
    if k == -1.0 {
        return SignFunctionRepr::closed(vec![ClosedSign::Step { beta, weight: 1.0 }], Vec::new());
    }
    if k >= 0.0 && k.fract() == 0.0 {
        let atoms = integer_power_atoms(k as usize, alpha)
            .into_iter()
            .enumerate()
            .filter(|(_, w)| *w != 0.0)
            .map(|(n, w)| Atom { location: beta, weight: w, order: n as u32 })
            .collect();
        return SignFunctionRepr::closed(Vec::new(), atoms);
    }
    SignFunctionRepr::closed(vec![ClosedSign::PowerBranch { k, alpha, weight: 1.0 }], Vec::new())
}

/// Exact sign-function for the tabulated families.
pub fn closed_form_sign_function(spec: &KernelSpec) -> Result<SignFunctionRepr> {
    spec.validate()?;
    match spec {
        KernelSpec::Carleman => Ok(SignFunctionRepr::constant(1.0)),
        KernelSpec::PowerExp { k, alpha } => Ok(power_exp_sign(*k, *alpha)),
        KernelSpec::CarlemanDiff { alpha1, alpha2, gamma } => {
            power_exp_sign(-1.0, *alpha1).plus(&power_exp_sign(-1.0, *alpha2).scaled(-gamma))
        }
        KernelSpec::StretchedExp { r } if *r == 0.5 => {
            Ok(SignFunctionRepr::closed(vec![ClosedSign::StretchedHalf { weight: 1.0 }], Vec::new()))
        }
        KernelSpec::StretchedExp { r } if *r == 1.0 => Ok(power_exp_sign(0.0, 1.0)),
        KernelSpec::FiniteRank(fr) => {
            let mut acc = SignFunctionRepr::closed(Vec::new(), Vec::new());
            for term in &fr.terms {
                if term.alpha.0.im != 0.0 {
                    return Err(Error::NotAvailable("complex rates have no real-line sign-function atoms".into()));
                }
                for (j, c) in term.coeffs.iter().enumerate() {
                    if c.0.re != 0.0 {
                        acc = acc.plus(&power_exp_sign(j as f64, term.alpha.0.re).scaled(c.0.re))?;
                    }
                }
            }
            Ok(acc)
        }
        KernelSpec::Sum { terms } => {
            let mut acc = SignFunctionRepr::closed(Vec::new(), Vec::new());
            for t in terms {
                acc = acc.plus(&closed_form_sign_function(&t.kernel)?.scaled(t.weight))?;
            }
            Ok(acc)
        }
        _ => Err(Error::NotAvailable(format!("no closed-form sign-function for {}", spec.label()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_recursion_low_orders() {
        // s_1 = α⁻²(δ − δ'), s_2 = α⁻³(2δ − 3δ' + δ'')
        let c1 = integer_power_atoms(1, 2.0);
        assert_eq!(c1, vec![0.25, -0.25]);
        let c2 = integer_power_atoms(2, 1.0);
        assert_eq!(c2, vec![2.0, -3.0, 1.0]);
    }

    #[test]
    fn examples() {
        let s = closed_form_sign_function(&KernelSpec::Carleman).unwrap();
        assert_eq!(s.smooth_value(3.0).unwrap(), 1.0);
        assert!(s.atoms.is_empty());

        let s = closed_form_sign_function(&KernelSpec::power_exp(0.0, 2.0)).unwrap();
        assert_eq!(s.atoms, vec![Atom { location: -(2f64.ln()), weight: 0.5, order: 0 }]);

        let s = closed_form_sign_function(&KernelSpec::stretched_exp(0.5)).unwrap();
        let want = 0.5 / PI.sqrt() * (-0.25f64).exp();
        assert!((s.smooth_value(0.0).unwrap() - want).abs() < 1e-16);
        assert!((want - 0.219_695_64).abs() < 1e-8);

        assert!(closed_form_sign_function(&KernelSpec::Gaussian).is_err());
        assert!(closed_form_sign_function(&KernelSpec::stretched_exp(0.7)).is_err());
    }

    #[test]
    fn half_step_shift_avoids_singularity() {
        let s = closed_form_sign_function(&KernelSpec::power_exp(-0.5, 1.0)).unwrap();
        let g = s.sample(-1.0, 0.5, 5).unwrap();
        assert_eq!(g.origin, -0.75);
        assert!(g.real_values().iter().all(|v| v.is_finite()));
    }
}
