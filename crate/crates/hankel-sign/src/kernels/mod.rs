//! Kernel families `h(t)`, their evaluation, and the complete-monotonicity test.
//!
//! A [`KernelSpec`] is immutable and serialises to the JSON schema used by the
//! command-line tool, for example `{"family": "power_exp", "k": -0.5, "alpha": 1.0}`.

mod sign;

pub use sign::{closed_form_sign_function, Atom, ClosedSign, SignFunctionRepr, SmoothPart, TestFunction};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cplx, GridFunction};

/// One term `P(t)·e^{−αt}` with `P(t) = Σ_j coeffs[j]·t^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteRankTerm {
    pub coeffs: Vec<Cplx>,
    pub alpha: Cplx,
}

/// Finite sum of quasi-polynomial terms. Complex rates appear as explicit conjugate pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteRankKernel {
    pub terms: Vec<FiniteRankTerm>,
}

/// Degree and leading coefficient of a real-rate term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealTermInfo {
    pub alpha: f64,
    pub degree: usize,
    pub leading: f64,
}

/// Bookkeeping derived from a validated [`FiniteRankKernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRankStructure {
    /// One entry per real rate.
    pub real_terms: Vec<RealTermInfo>,
    /// Degree of each conjugate pair, listed once per pair.
    pub pair_degrees: Vec<usize>,
}

impl FiniteRankStructure {
    pub fn m0(&self) -> usize {
        self.real_terms.len()
    }

    pub fn m1(&self) -> usize {
        self.pair_degrees.len()
    }

    /// Kronecker rank Σ(K_m + 1) over all distinct rates.
    pub fn rank(&self) -> usize {
        self.real_terms.iter().map(|t| t.degree + 1).sum::<usize>() + 2 * self.pair_degrees.iter().map(|k| k + 1).sum::<usize>()
    }
}

const PAIR_TOL: f64 = 1e-12;

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= PAIR_TOL * (1.0 + a.norm().max(b.norm()))
}

impl FiniteRankKernel {
    pub fn single(coeffs: &[f64], alpha: f64) -> Self {
        Self { terms: vec![FiniteRankTerm { coeffs: coeffs.iter().map(|c| Cplx::real(*c)).collect(), alpha: Cplx::real(alpha) }] }
    }

    /// `P(t)e^{−αt} + conj(P)(t)e^{−ᾱt}` for a complex rate.
    pub fn conjugate_pair(coeffs: &[Complex64], alpha: Complex64) -> Self {
        Self {
            terms: vec![
                FiniteRankTerm { coeffs: coeffs.iter().map(|c| Cplx(*c)).collect(), alpha: Cplx(alpha) },
                FiniteRankTerm { coeffs: coeffs.iter().map(|c| Cplx(c.conj())).collect(), alpha: Cplx(alpha.conj()) },
            ],
        }
    }

    /// Checks self-adjointness and derives M₀, M₁, K_m and p_m.
    pub fn structure(&self) -> Result<FiniteRankStructure> {
        if self.terms.is_empty() {
            return Err(Error::InvalidKernel("finite-rank kernel has no terms".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            let a = t.alpha.0;
            if !(a.re.is_finite() && a.im.is_finite()) || a.re <= 0.0 {
                return Err(Error::InvalidKernel(format!("term {i}: Re alpha must be positive, got {a}")));
            }
            if t.coeffs.is_empty() {
                return Err(Error::InvalidKernel(format!("term {i}: empty polynomial")));
            }
            if t.coeffs.iter().any(|c| !(c.0.re.is_finite() && c.0.im.is_finite())) {
                return Err(Error::InvalidKernel(format!("term {i}: non-finite coefficient")));
            }
            if t.coeffs.last().unwrap().0 == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidKernel(format!("term {i}: zero leading coefficient")));
            }
            for (j, u) in self.terms.iter().enumerate().take(i) {
                if close(u.alpha.0, a) {
                    return Err(Error::InvalidKernel(format!("terms {j} and {i} share the rate {a}; merge them")));
                }
            }
        }
        let mut real_terms = Vec::new();
        let mut pair_degrees = Vec::new();
        let mut used = vec![false; self.terms.len()];
        for (i, t) in self.terms.iter().enumerate() {
            let a = t.alpha.0;
            if a.im == 0.0 {
                if t.coeffs.iter().any(|c| c.0.im != 0.0) {
                    return Err(Error::InvalidKernel(format!("term {i}: real rate needs real coefficients")));
                }
                real_terms.push(RealTermInfo { alpha: a.re, degree: t.coeffs.len() - 1, leading: t.coeffs.last().unwrap().0.re });
                continue;
            }
            if used[i] {
                continue;
            }
            let partner = self.terms.iter().enumerate().position(|(j, u)| {
                j != i
                    && !used[j]
                    && close(u.alpha.0, a.conj())
                    && u.coeffs.len() == t.coeffs.len()
                    && u.coeffs.iter().zip(&t.coeffs).all(|(x, y)| close(x.0, y.0.conj()))
            });
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                    pair_degrees.push(t.coeffs.len() - 1);
                }
                None => {
                    return Err(Error::InvalidKernel(format!(
                        "term {i}: complex rate {a} has no conjugate partner with conjugate coefficients"
                    )))
                }
            }
        }
        Ok(FiniteRankStructure { real_terms, pair_degrees })
    }

    /// Adds up terms with the same rate and drops vanishing ones.
    pub fn merged(self) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut out: Vec<FiniteRankTerm> = Vec::new();
        for t in self.terms {
            match out.iter_mut().find(|u| u.alpha == t.alpha) {
                Some(u) => {
                    if u.coeffs.len() < t.coeffs.len() {
                        u.coeffs.resize(t.coeffs.len(), Cplx::default());
                    }
                    for (a, b) in u.coeffs.iter_mut().zip(&t.coeffs) {
                        a.0 += b.0;
                    }
                }
                None => out.push(t),
            }
        }
        for u in &mut out {
            while u.coeffs.len() > 1 && u.coeffs.last().unwrap().0 == zero {
                u.coeffs.pop();
            }
        }
        out.retain(|t| t.coeffs.iter().any(|c| c.0 != zero));
        Self { terms: out }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mut p = Complex64::new(0.0, 0.0);
            for c in term.coeffs.iter().rev() {
                p = p * t + c.0;
            }
            s += p * (-term.alpha.0 * t).exp();
        }
        s.re
    }
}

/// Tabulated kernel on a uniform grid of positive `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledKernel {
    pub grid: GridFunction,
}

/// `weight · kernel` inside a [`KernelSpec::Sum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedKernel {
    pub weight: f64,
    pub kernel: KernelSpec,
}

/// Tagged description of a kernel family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Σ P_m(t) e^{−α_m t}
    FiniteRank(FiniteRankKernel),
    /// t^k e^{−αt}, k ≥ −1
    PowerExp { k: f64, alpha: f64 },
    /// e^{−t^r}
    StretchedExp { r: f64 },
    /// 1/t
    Carleman,
    /// t⁻¹(e^{−α₁t} − γe^{−α₂t})
    CarlemanDiff { alpha1: f64, alpha2: f64, gamma: f64 },
    /// (t₀ − t)^l on (0, t₀), zero beyond
    TruncatedPower { l: u32, t0: f64 },
    /// e^{−t²}
    Gaussian,
    /// δ(t − t₀); a distribution, so it has no pointwise values
    Delta { t0: f64 },
    Sampled(SampledKernel),
    Sum { terms: Vec<WeightedKernel> },
}

impl KernelSpec {
    pub fn power_exp(k: f64, alpha: f64) -> Self {
        KernelSpec::PowerExp { k, alpha }
    }

    pub fn stretched_exp(r: f64) -> Self {
        KernelSpec::StretchedExp { r }
    }

    pub fn sum(terms: Vec<(f64, KernelSpec)>) -> Self {
        KernelSpec::Sum { terms: terms.into_iter().map(|(weight, kernel)| WeightedKernel { weight, kernel }).collect() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: KernelSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("kernel specs always serialise")
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            KernelSpec::FiniteRank(k) => format!("finite_rank[{} terms]", k.terms.len()),
            KernelSpec::PowerExp { k, alpha } => format!("t^{k} e^(-{alpha} t)"),
            KernelSpec::StretchedExp { r } => format!("e^(-t^{r})"),
            KernelSpec::Carleman => "1/t".into(),
            KernelSpec::CarlemanDiff { alpha1, alpha2, gamma } => format!("(e^(-{alpha1} t) - {gamma} e^(-{alpha2} t))/t"),
            KernelSpec::TruncatedPower { l, t0 } => format!("({t0} - t)_+^{l}"),
            KernelSpec::Gaussian => "e^(-t^2)".into(),
            KernelSpec::Delta { t0 } => format!("delta(t - {t0})"),
            KernelSpec::Sampled(s) => format!("sampled[{} pts]", s.grid.len()),
            KernelSpec::Sum { terms } => format!("sum[{} terms]", terms.len()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidKernel(m));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        match self {
            KernelSpec::FiniteRank(k) => k.structure().map(|_| ()),
            KernelSpec::PowerExp { k, alpha } => {
                if !k.is_finite() || *k < -1.0 {
                    return bad(format!("power_exp: k = {k} must be ≥ −1"));
                }
                if !alpha.is_finite() || *alpha < 0.0 || (*alpha == 0.0 && *k != -1.0) {
                    return bad(format!("power_exp: alpha = {alpha} must be > 0 (0 only with k = −1)"));
                }
                Ok(())
            }
            KernelSpec::StretchedExp { r } if !finite_pos(*r) => bad(format!("stretched_exp: r = {r} must be > 0")),
            KernelSpec::CarlemanDiff { alpha1, alpha2, gamma } => {
                if !(alpha1.is_finite() && *alpha1 >= 0.0 && alpha2.is_finite() && *alpha2 >= 0.0 && gamma.is_finite()) {
                    return bad("carleman_diff: rates must be ≥ 0 and gamma finite".into());
                }
                Ok(())
            }
            KernelSpec::TruncatedPower { t0, .. } if !finite_pos(*t0) => bad(format!("truncated_power: t0 = {t0} must be > 0")),
            KernelSpec::Delta { t0 } if !finite_pos(*t0) => bad(format!("delta: t0 = {t0} must be > 0")),
            KernelSpec::Sampled(s) => {
                s.grid.validate().map_err(|e| Error::InvalidKernel(format!("sampled: {e}")))?;
                if s.grid.origin <= 0.0 {
                    return bad("sampled: grid must lie in t > 0".into());
                }
                if s.grid.max_imag() != 0.0 {
                    return bad("sampled: kernel values must be real".into());
                }
                Ok(())
            }
            KernelSpec::Sum { terms } => {
                if terms.is_empty() {
                    return bad("sum: no terms".into());
                }
                let mut hull: Option<(f64, f64)> = None;
                for t in terms {
                    if !t.weight.is_finite() {
                        return bad("sum: weights must be finite".into());
                    }
                    t.kernel.validate()?;
                    if matches!(t.kernel, KernelSpec::Delta { .. }) {
                        return bad("sum: delta kernels have no pointwise values".into());
                    }
                    if let Some(h) = t.kernel.domain() {
                        match hull {
                            None => hull = Some(h),
                            Some(prev) if prev != h => return bad("sum: sampled terms must share one grid".into()),
                            _ => {}
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Bounded evaluation domain, if any (sampled kernels only).
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            KernelSpec::Sampled(s) => Some((s.grid.origin, s.grid.end())),
            KernelSpec::Sum { terms } => terms.iter().find_map(|t| t.kernel.domain()),
            _ => None,
        }
    }

    /// Behaves like c/t near t = 0, so Laguerre moments diverge.
    pub fn is_carleman_type(&self) -> bool {
        match self {
            KernelSpec::Carleman | KernelSpec::CarlemanDiff { .. } => true,
            KernelSpec::PowerExp { k, .. } => *k <= -1.0,
            KernelSpec::Sum { terms } => terms.iter().any(|t| t.weight != 0.0 && t.kernel.is_carleman_type()),
            _ => false,
        }
    }

    /// Finite-rank view of the kernel when it is one (non-negative integer powers times exponentials).
    pub fn as_finite_rank(&self) -> Option<FiniteRankKernel> {
        match self {
            KernelSpec::FiniteRank(k) => Some(k.clone()),
            KernelSpec::PowerExp { k, alpha } if *k >= 0.0 && k.fract() == 0.0 && *alpha > 0.0 => {
                let mut c = vec![0.0; *k as usize + 1];
                c[*k as usize] = 1.0;
                Some(FiniteRankKernel::single(&c, *alpha))
            }
            KernelSpec::StretchedExp { r } if *r == 1.0 => Some(FiniteRankKernel::single(&[1.0], 1.0)),
            KernelSpec::Sum { terms } => {
                let mut all = Vec::new();
                for t in terms {
                    for mut term in t.kernel.as_finite_rank()?.terms {
                        for c in &mut term.coeffs {
                            c.0 *= t.weight;
                        }
                        all.push(term);
                    }
                }
                Some(FiniteRankKernel { terms: all }.merged())
            }
            _ => None,
        }
    }
}

/// h(t) for `t > 0`.
pub fn eval_kernel(spec: &KernelSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("kernel argument t = {t} must be positive and finite")));
    }
    Ok(match spec {
        KernelSpec::FiniteRank(k) => k.eval(t),
        KernelSpec::PowerExp { k, alpha } => (k * t.ln() - alpha * t).exp(),
        KernelSpec::StretchedExp { r } => (-t.powf(*r)).exp(),
        KernelSpec::Carleman => 1.0 / t,
        KernelSpec::CarlemanDiff { alpha1, alpha2, gamma } => ((-alpha1 * t).exp() - gamma * (-alpha2 * t).exp()) / t,
        KernelSpec::TruncatedPower { l, t0 } => {
            if t < *t0 {
                (t0 - t).powi(*l as i32)
            } else if t == *t0 && *l == 0 {
                1.0
            } else {
                0.0
            }
        }
        KernelSpec::Gaussian => (-t * t).exp(),
        KernelSpec::Delta { .. } => return Err(Error::NotAvailable("delta kernel has no pointwise values".into())),
        KernelSpec::Sampled(s) => s.grid.interpolate(t).map_err(|e| Error::Domain(format!("sampled kernel: {e}")))?.re,
        KernelSpec::Sum { terms } => {
            let mut acc = 0.0;
            for w in terms {
                acc += w.weight * eval_kernel(&w.kernel, t)?;
            }
            acc
        }
    })
}

/// θ(x) = eˣ h(eˣ), the kernel in logarithmic variables.
pub fn theta(spec: &KernelSpec, x: f64) -> Result<f64> {
    let t = x.exp();
    Ok(t * eval_kernel(spec, t)?)
}

/// Largest t beyond which |t·h(t)| stays below `rel` of its peak, found on a log grid.
pub fn decay_horizon(spec: &KernelSpec, rel: f64) -> f64 {
    match spec {
        KernelSpec::TruncatedPower { t0, .. } => return *t0,
        KernelSpec::Delta { t0 } => return *t0,
        KernelSpec::Sampled(s) => return s.grid.end(),
        _ => {}
    }
    let (lo, hi) = match spec.domain() {
        Some((a, b)) => (a.ln(), b.ln()),
        None => (-30.0, 12.0),
    };
    let n = ((hi - lo) / 0.01).ceil() as usize;
    let vals: Vec<(f64, f64)> = (0..=n)
        .map(|j| {
            let x = lo + (hi - lo) * j as f64 / n as f64;
            (x, theta(spec, x).map(f64::abs).unwrap_or(0.0))
        })
        .collect();
    let peak = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let last = vals.iter().rev().find(|v| v.1 > rel * peak).map(|v| v.0).unwrap_or(hi);
    (last + 0.05).min(hi).exp()
}

/// Outcome of [`complete_monotonicity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub passes: bool,
    /// Lowest difference order that fails, and the grid point where it fails worst.
    pub first_violation: Option<(usize, f64)>,
}

/// Default grid for [`complete_monotonicity_check`]: t ∈ [0.1, 6], step 0.02.
pub fn default_cm_grid() -> Vec<f64> {
    (0..=295).map(|j| 0.1 + 0.02 * j as f64).collect()
}

/// Relative tolerance for counting a finite-difference violation.
pub const CM_TOL: f64 = 1e-8;

/// Checks `(−1)ⁿ Δⁿh ≥ −tol·max|Δⁿh|` for `n = 0..=n_max` with central differences.
///
/// `t_grid` must be uniform. Passing is necessary for a positive operator;
/// a violation proves the operator is not positive.
pub fn complete_monotonicity_check(spec: &KernelSpec, t_grid: &[f64], n_max: usize) -> Result<MonotonicityReport> {
    if n_max < 2 {
        return Err(Error::Domain("n_max must be at least 2".into()));
    }
    if t_grid.len() < 2 {
        return Err(Error::Domain("grid needs at least two points".into()));
    }
    let step = (t_grid[t_grid.len() - 1] - t_grid[0]) / (t_grid.len() - 1) as f64;
    if !(step > 0.0) || t_grid.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0)) {
        return Err(Error::Domain("grid must be uniform and increasing".into()));
    }
    // The stencil of order n spans n·step; beyond half a unit it no longer resolves derivatives.
    if step * n_max as f64 > 0.5 {
        return Err(Error::Domain(format!("grid too coarse: step {step} with difference order {n_max}")));
    }
    if t_grid[0] - 0.5 * n_max as f64 * step <= 0.0 {
        return Err(Error::Domain(format!(
            "difference stencil of order {n_max} leaves t > 0; start the grid above {}",
            0.5 * n_max as f64 * step
        )));
    }
    for n in 0..=n_max {
        let binom: Vec<f64> = (0..=n).map(|j| binomial(n, j)).collect();
        let mut diffs = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let mut d = 0.0;
            for (j, b) in binom.iter().enumerate() {
                let sgn = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
                d += sgn * b * eval_kernel(spec, t + (j as f64 - 0.5 * n as f64) * step)?;
            }
            diffs.push(if n % 2 == 0 { d } else { -d });
        }
        let scale = diffs.iter().map(|d| d.abs()).fold(0.0, f64::max);
        let (mut worst, mut at) = (0.0, t_grid[0]);
        for (d, t) in diffs.iter().zip(t_grid) {
            if *d < worst {
                worst = *d;
                at = *t;
            }
        }
        if worst < -CM_TOL * scale {
            return Ok(MonotonicityReport { passes: false, first_violation: Some((n, at)) });
        }
    }
    Ok(MonotonicityReport { passes: true, first_violation: None })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_values() {
        assert_eq!(eval_kernel(&KernelSpec::Carleman, 2.0).unwrap(), 0.5);
        let v = eval_kernel(&KernelSpec::power_exp(1.0, 1.0), 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(eval_kernel(&KernelSpec::TruncatedPower { l: 0, t0: 1.0 }, 1.5).unwrap(), 0.0);
        assert!(eval_kernel(&KernelSpec::Carleman, 0.0).is_err());
        assert!(eval_kernel(&KernelSpec::Carleman, -1.0).is_err());
        assert!(eval_kernel(&KernelSpec::Delta { t0: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn json_schema() {
        let s = KernelSpec::from_json(r#"{"family":"power_exp","k":-0.5,"alpha":1.0}"#).unwrap();
        assert_eq!(s, KernelSpec::power_exp(-0.5, 1.0));
        let s = KernelSpec::from_json(
            r#"{"family":"sum","terms":[{"weight":1.0,"kernel":{"family":"carleman"}},{"weight":-2.0,"kernel":{"family":"gaussian"}}]}"#,
        )
        .unwrap();
        assert!(matches!(s, KernelSpec::Sum { ref terms } if terms.len() == 2));
        let fr = KernelSpec::from_json(
            r#"{"family":"finite_rank","terms":[{"coeffs":[[1,0]],"alpha":[1,1]},{"coeffs":[1],"alpha":[1,-1]}]}"#,
        )
        .unwrap();
        assert_eq!(KernelSpec::from_json(&fr.to_json()).unwrap(), fr);
        assert!(KernelSpec::from_json(r#"{"family":"power_exp","k":-2,"alpha":1}"#).is_err());
        assert!(KernelSpec::from_json(r#"{"family":"power_exp","k":1,"alpha":0}"#).is_err());
        assert!(KernelSpec::from_json(r#"{"family":"nope"}"#).is_err());
    }

    #[test]
    fn finite_rank_validation() {
        let unpaired = FiniteRankKernel { terms: vec![FiniteRankTerm { coeffs: vec![Cplx::real(1.0)], alpha: Cplx(Complex64::new(1.0, 1.0)) }] };
        assert!(unpaired.structure().is_err());
        let zero_lead = FiniteRankKernel::single(&[1.0, 0.0], 1.0);
        assert!(zero_lead.structure().is_err());
        let dup = FiniteRankKernel { terms: [FiniteRankKernel::single(&[1.0], 2.0).terms, FiniteRankKernel::single(&[3.0], 2.0).terms].concat() };
        assert!(dup.structure().is_err());
        let pair = FiniteRankKernel::conjugate_pair(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.5)], Complex64::new(1.0, 1.0));
        let st = pair.structure().unwrap();
        assert_eq!((st.m0(), st.m1(), st.rank()), (0, 1, 4));
        // The pair is real-valued.
        let v = pair.eval(0.7);
        let z = Complex64::new(1.0, 0.5) * 0.7 * (-Complex64::new(1.0, 1.0) * 0.7).exp();
        assert!((v - 2.0 * z.re).abs() < 1e-15);
    }

    #[test]
    fn sum_is_linear() {
        let s = KernelSpec::sum(vec![(2.0, KernelSpec::Gaussian), (-0.5, KernelSpec::Carleman)]);
        for t in [0.1f64, 1.0, 3.3] {
            let want = 2.0 * (-t * t).exp() - 0.5 / t;
            assert_eq!(eval_kernel(&s, t).unwrap(), want);
        }
    }

    #[test]
    fn cm_examples() {
        let g = default_cm_grid();
        assert!(complete_monotonicity_check(&KernelSpec::power_exp(0.0, 1.0), &g, 6).unwrap().passes);
        assert!(complete_monotonicity_check(&KernelSpec::stretched_exp(0.5), &g, 4).unwrap().passes);
        let r = complete_monotonicity_check(&KernelSpec::Gaussian, &g, 2).unwrap();
        assert!(!r.passes);
        let (n, t) = r.first_violation.unwrap();
        assert_eq!(n, 2);
        assert!(t < std::f64::consts::FRAC_1_SQRT_2);
        assert!(complete_monotonicity_check(&KernelSpec::Gaussian, &[0.5, 1.0, 1.5], 2).is_err());
    }

    #[test]
    fn horizon() {
        let t = decay_horizon(&KernelSpec::power_exp(0.0, 1.0), 1e-17);
        // θ(x) = t e^{−t} drops below 1e-17 of its peak 1/e near t ≈ 46.
        assert!(t > 42.0 && t < 50.0, "{t}");
        assert_eq!(decay_horizon(&KernelSpec::TruncatedPower { l: 1, t0: 2.0 }, 1e-17), 2.0);
    }
}
