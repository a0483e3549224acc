//! Sign-definiteness verdicts and eigenvalue counts.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::kernels::{closed_form_sign_function, FiniteRankKernel, KernelSpec, SignFunctionRepr, SmoothPart};
use crate::quad::gl20;
use crate::transforms::fourier::smooth_step;
use crate::transforms::{b_function, sign_function_numeric, BFunctionRepr, SignOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Positive,
    Negative,
    Indefinite,
    Unknown,
}

/// An eigenvalue count. Serialises as an integer, `"inf"` or `"unknown"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Finite(u64),
    Infinite,
    Unknown,
}

impl Count {
    pub fn is_positive(self) -> bool {
        matches!(self, Count::Infinite) || matches!(self, Count::Finite(n) if n > 0)
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => s.serialize_u64(*n),
            Count::Infinite => s.serialize_str("inf"),
            Count::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Count::Finite(n)),
            Raw::S(s) if s == "inf" => Ok(Count::Infinite),
            Raw::S(s) if s == "unknown" => Ok(Count::Unknown),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad count {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classification {
    pub verdict: Verdict,
    pub n_plus: Count,
    pub n_minus: Count,
    pub evidence: Vec<String>,
}

impl Classification {
    fn new(verdict: Verdict, n_plus: Count, n_minus: Count, evidence: &str) -> Self {
        Self { verdict, n_plus, n_minus, evidence: vec![evidence.to_string()] }
    }

    fn unknown(evidence: &str) -> Self {
        Self::new(Verdict::Unknown, Count::Unknown, Count::Unknown, evidence)
    }

    fn from_counts(n_plus: Count, n_minus: Count, evidence: &str) -> Self {
        let verdict = match (n_plus.is_positive(), n_minus.is_positive()) {
            (_, false) if n_minus == Count::Finite(0) => Verdict::Positive,
            (false, true) if n_plus == Count::Finite(0) => Verdict::Negative,
            (true, true) => Verdict::Indefinite,
            _ => Verdict::Unknown,
        };
        Self::new(verdict, n_plus, n_minus, evidence)
    }

    /// Checks the verdict/count consistency rules.
    pub fn validate(&self) -> Result<()> {
        let ok = match self.verdict {
            Verdict::Positive => self.n_minus == Count::Finite(0),
            Verdict::Negative => self.n_plus == Count::Finite(0),
            Verdict::Indefinite => {
                !matches!(self.n_plus, Count::Finite(0)) && !matches!(self.n_minus, Count::Finite(0))
            }
            Verdict::Unknown => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parse(format!("counts {:?}/{:?} contradict verdict {:?}", self.n_plus, self.n_minus, self.verdict)))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classification serialises")
    }
}

/// `(N₊, N₋)` of a finite-rank Hankel operator.
///
/// A real rate with polynomial degree K contributes `((K+1)/2, (K+1)/2)` for odd K and
/// `(K/2 + 1, K/2)` for even K, swapped when the leading coefficient is negative.
/// A conjugate pair of degree K contributes `K + 1` of each sign.
pub fn finite_rank_counts(kernel: &FiniteRankKernel) -> Result<(usize, usize)> {
    let st = kernel.structure()?;
    let (mut np, mut nm) = (0, 0);
    for t in &st.real_terms {
        let k = t.degree;
        if k % 2 == 1 {
            np += (k + 1) / 2;
            nm += (k + 1) / 2;
        } else if t.leading > 0.0 {
            np += k / 2 + 1;
            nm += k / 2;
        } else {
            np += k / 2;
            nm += k / 2 + 1;
        }
    }
    for k in &st.pair_degrees {
        np += k + 1;
        nm += k + 1;
    }
    Ok((np, nm))
}

fn fr(n: usize) -> Count {
    Count::Finite(n as u64)
}

/// Splits `Σ w_j v_j` into a Carleman weight and a finite-rank remainder, if it has that shape.
fn carleman_plus_finite_rank(spec: &KernelSpec) -> Option<(f64, Option<FiniteRankKernel>)> {
    let KernelSpec::Sum { terms } = spec else { return None };
    let mut carleman = 0.0;
    let mut rest = Vec::new();
    for t in terms {
        match &t.kernel {
            KernelSpec::Carleman => carleman += t.weight,
            KernelSpec::PowerExp { k, alpha } if *k == -1.0 && *alpha == 0.0 => carleman += t.weight,
            k => rest.push(KernelSpec::sum(vec![(t.weight, k.clone())])),
        }
    }
    if rest.is_empty() {
        return Some((carleman, None));
    }
    let mut terms = Vec::new();
    for r in rest {
        terms.extend(r.as_finite_rank()?.terms);
    }
    Some((carleman, Some(FiniteRankKernel { terms }.merged())))
}

/// Sign of a step-function sign-function `Σ w_j 1_{x<β_j}`: (has positive plateau, has negative plateau).
fn step_plateaus(steps: &[(f64, f64)]) -> (bool, bool) {
    let mut cuts: Vec<f64> = steps.iter().map(|s| s.0).filter(|b| b.is_finite()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut probes = vec![cuts.first().map_or(0.0, |c| c - 1.0)];
    for w in cuts.windows(2) {
        probes.push(0.5 * (w[0] + w[1]));
    }
    let (mut pos, mut neg) = (false, false);
    for x in probes {
        let v: f64 = steps.iter().filter(|(b, _)| x < *b).map(|(_, w)| w).sum();
        let scale = steps.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
        if v > 1e-14 * scale {
            pos = true;
        }
        if v < -1e-14 * scale {
            neg = true;
        }
    }
    (pos, neg)
}

/// Minimum and maximum of a continuous sign-function on a dense grid.
fn sign_range(s: &SignFunctionRepr, lo: f64, hi: f64, n: usize) -> Result<(f64, f64)> {
    let g = s.sample(lo, (hi - lo) / (n - 1) as f64, n)?;
    let v = g.real_values();
    Ok((v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
}

/// Relative level below which a sampled sign-function counts as zero.
const SIGN_TOL: f64 = 1e-9;

fn classify_continuous(s: &SignFunctionRepr, lo: f64, hi: f64, what: &str) -> Result<Classification> {
    let (min, max) = sign_range(s, lo, hi, 10_000)?;
    let scale = min.abs().max(max.abs());
    if scale == 0.0 {
        return Ok(Classification::new(Verdict::Positive, fr(0), fr(0), "sign-function vanishes identically: zero operator"));
    }
    let pos = max > SIGN_TOL * scale;
    let neg = min < -SIGN_TOL * scale;
    let np = if pos { Count::Infinite } else { fr(0) };
    let nm = if neg { Count::Infinite } else { fr(0) };
    let mut c = Classification::from_counts(np, nm, &format!("{what} sign-function on [{lo}, {hi}]: min {min:.3e}, max {max:.3e}"));
    c.evidence.push("a continuous sign-function of one sign gives a sign-definite operator; a sign change on an interval gives infinite spectrum of that sign".into());
    Ok(c)
}

/// Verdict and counts for a kernel.
pub fn classify(spec: &KernelSpec) -> Classification {
    if let Err(e) = spec.validate() {
        return Classification::unknown(&format!("invalid kernel: {e}"));
    }
    match classify_inner(spec) {
        Ok(c) => c,
        Err(e) => Classification::unknown(&format!("no decision rule succeeded: {e}")),
    }
}

fn classify_inner(spec: &KernelSpec) -> Result<Classification> {
    use Count::*;
    Ok(match spec {
        KernelSpec::Carleman => Classification::new(Verdict::Positive, Infinite, fr(0), "sign-function is identically 1"),
        KernelSpec::PowerExp { k, alpha } => {
            if *k == -1.0 {
                let what = if *alpha == 0.0 { "Carleman kernel, s = 1" } else { "s is the indicator of x < −ln α" };
                Classification::new(Verdict::Positive, Infinite, fr(0), what)
            } else if *k < 0.0 {
                Classification::new(Verdict::Positive, Infinite, fr(0), "s = (e^{−x} − α)₊^{−k−1}/Γ(−k) is nonnegative and integrable")
            } else if k.fract() == 0.0 {
                let (np, nm) = finite_rank_counts(&FiniteRankKernel::single(&monomial(*k as usize), *alpha))?;
                Classification::from_counts(fr(np), fr(nm), "finite-rank count formula")
            } else {
                let mut c = Classification::new(
                    Verdict::Indefinite,
                    Unknown,
                    Unknown,
                    "Re b(ξ) ~ cos(πk/2) ξᵏ/(2π) is unbounded with a definite sign, so both signs occur",
                );
                c.evidence.push("counts for non-integer k > 0 are not decided".into());
                c
            }
        }
        KernelSpec::StretchedExp { r } => {
            if *r <= 1.0 {
                Classification::new(Verdict::Positive, Infinite, fr(0), "e^{−tʳ} with r ≤ 1 is completely monotonic")
            } else {
                Classification::new(Verdict::Indefinite, Infinite, Infinite, "b grows exponentially and oscillates for r > 1")
            }
        }
        KernelSpec::Gaussian => Classification::new(Verdict::Indefinite, Infinite, Infinite, "e^{−t²}: b grows exponentially and oscillates"),
        KernelSpec::TruncatedPower { .. } => {
            Classification::new(Verdict::Indefinite, Infinite, Infinite, "truncated power: eigenvalues of both signs accumulate at 0")
        }
        KernelSpec::Delta { .. } => Classification::new(Verdict::Indefinite, Infinite, Infinite, "delta kernel: eigenvalues ±1 of infinite multiplicity"),
        KernelSpec::CarlemanDiff { alpha1, alpha2, gamma } => {
            let beta = |a: f64| if a == 0.0 { f64::INFINITY } else { -a.ln() };
            let (pos, neg) = step_plateaus(&[(beta(*alpha1), 1.0), (beta(*alpha2), -gamma)]);
            let np = if pos { Infinite } else { fr(0) };
            let nm = if neg { Infinite } else { fr(0) };
            let mut c = Classification::from_counts(np, nm, "sign-function is a difference of two step functions");
            if pos || neg {
                c.evidence.push("a plateau of either sign on an interval gives infinite spectrum of that sign".into());
            }
            c
        }
        KernelSpec::FiniteRank(k) => {
            let (np, nm) = finite_rank_counts(k)?;
            Classification::from_counts(fr(np), fr(nm), "finite-rank count formula")
        }
        KernelSpec::Sum { .. } | KernelSpec::Sampled(_) => return classify_composite(spec),
    })
}

fn classify_composite(spec: &KernelSpec) -> Result<Classification> {
    if let Some(k) = spec.as_finite_rank() {
        let (np, nm) = finite_rank_counts(&k)?;
        return Ok(Classification::from_counts(fr(np), fr(nm), "finite-rank count formula"));
    }
    if let Some((c, Some(v))) = carleman_plus_finite_rank(spec) {
        if c > 0.0 {
            let (_, nm) = finite_rank_counts(&v)?;
            let mut out = Classification::from_counts(Count::Infinite, fr(nm), "Carleman part has sign-function c > 0");
            out.evidence.push("finite-rank perturbation of a positive bounded sign-function: N₋(H) = N₋(V)".into());
            return Ok(out);
        }
    }
    if let Ok(s) = closed_form_sign_function(spec) {
        if s.is_continuous() {
            return classify_continuous(&s, -40.0, 40.0, "closed-form");
        }
        return Ok(Classification::unknown("closed-form sign-function has singular parts; no decision rule applies"));
    }
    let xi = Axis::span(-60.0, 60.0, 4801);
    let b = b_function(spec, &xi)?;
    if b.growing {
        return Ok(Classification::unknown("numeric b-function grows; run the witness search"));
    }
    let x = Axis::span(-20.0, 20.0, 2001);
    let s = sign_function_numeric(&b, &x, &SignOptions::default())?;
    let mut c = classify_continuous(&s.sign, -20.0, 20.0, "numeric")?;
    c.evidence.push("numeric sign check is evidence, not proof".into());
    Ok(c)
}

fn monomial(k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k + 1];
    c[k] = 1.0;
    c
}

/// Plateau bump: 1 on |u| ≤ 1/4, 0 for |u| ≥ 1/2, C^∞.
pub fn plateau_bump(u: f64) -> f64 {
    smooth_step((0.5 - u.abs()) / 0.25)
}

/// ψ(η) = ∫ φ(u) φ(u + η) du for the plateau bump φ; supported on |η| ≤ 1.
pub fn bump_autocorrelation(eta: f64) -> f64 {
    if eta.abs() >= 1.0 {
        return 0.0;
    }
    let (a, b) = ((-0.5f64).max(-0.5 - eta), 0.5f64.min(0.5 - eta));
    let gl = gl20();
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels).map(|p| gl.mapped(a + p as f64 * h, a + (p + 1) as f64 * h).map(|(u, w)| w * plateau_bump(u) * plateau_bump(u + eta)).sum::<f64>()).sum()
}

/// Search schedule for [`indefiniteness_witness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub r_seq: Vec<f64>,
    pub sigma_seq: Vec<f64>,
}

impl Default for WitnessSearch {
    /// `r_n = 2ⁿ`, `σ_n = 1`, `n = 1..8`.
    fn default() -> Self {
        Self { r_seq: (1..=8).map(|n| 2f64.powi(n)).collect(), sigma_seq: vec![1.0; 8] }
    }
}

/// Quadratic-form values for one candidate pair of bumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub n: usize,
    pub r: f64,
    pub sigma: f64,
    /// Form value for `g = φ((ξ−r/2)/σ) + φ((ξ+r/2)/σ)`.
    pub q_plus: f64,
    /// Form value for `g = φ((ξ−r/2)/σ) − φ((ξ+r/2)/σ)`.
    pub q_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// Some candidate gave a strictly positive form.
    pub found_plus: bool,
    /// Some candidate gave a form below `−tol`.
    pub found_minus: bool,
    pub first_plus: Option<usize>,
    pub first_minus: Option<usize>,
    pub witness_params: Vec<WitnessStep>,
    /// Candidates skipped because b could not be evaluated there.
    pub skipped: Vec<String>,
}

/// Relative size of a negative form value that counts as a witness.
pub const WITNESS_TOL: f64 = 1e-9;

/// `σ² ∫₀¹ ψ(η) [b(c + ση) + b(c − ση)] dη`, the smooth part of `σ∫ b(ξ) ψ((ξ−c)/σ) dξ`.
fn smooth_bump_integral(b: &BFunctionRepr, c: f64, sigma: f64) -> Result<Complex64> {
    let gl = gl20();
    let panels = 32;
    let h = 1.0 / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        for (eta, w) in gl.mapped(p as f64 * h, (p + 1) as f64 * h) {
            let v = b.eval(c + sigma * eta)? + b.eval(c - sigma * eta)?;
            acc += v * (w * bump_autocorrelation(eta));
        }
    }
    Ok(acc * sigma * sigma)
}

/// Value of `⟨b, (Jḡ)*g⟩` for `g = φ((ξ−r/2)/σ) ± φ((ξ+r/2)/σ)`, both signs.
fn witness_forms(b: &BFunctionRepr, r: f64, sigma: f64) -> Result<(f64, f64, f64)> {
    if b.is_mellin {
        return Err(Error::Domain("expected a b-function, got a Mellin symbol".into()));
    }
    // (Jḡ)*g = 2σψ(ξ/σ) ± σ[ψ((ξ−r)/σ) + ψ((ξ+r)/σ)]
    let has_smooth = !b.closed.is_empty() || b.grid.is_some();
    let (i0, ir) = if has_smooth {
        (smooth_bump_integral(b, 0.0, sigma)?, smooth_bump_integral(b, r, sigma)?)
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let (mut diag, mut cross) = (i0.re, ir.re);
    for a in &b.atoms {
        let x = a.location;
        let w = a.weight.0.re;
        diag += w * sigma * bump_autocorrelation(x / sigma);
        cross += 0.5 * w * sigma * (bump_autocorrelation((x - r) / sigma) + bump_autocorrelation((x + r) / sigma));
    }
    let scale = 2.0 * (diag.abs() + cross.abs());
    Ok((2.0 * diag + 2.0 * cross, 2.0 * diag - 2.0 * cross, scale))
}

/// Searches the bump pairs of the schedule for quadratic-form values of both signs.
pub fn indefiniteness_witness(b: &BFunctionRepr, search: &WitnessSearch) -> Result<WitnessReport> {
    if search.r_seq.len() != search.sigma_seq.len() || search.r_seq.is_empty() {
        return Err(Error::Config("r_seq and sigma_seq must be nonempty and of equal length".into()));
    }
    if search.sigma_seq.iter().zip(&search.r_seq).any(|(s, r)| !(*s > 0.0) || !(*r > *s) || !r.is_finite()) {
        return Err(Error::Config("each σ must be positive and r > σ so the two bumps do not overlap".into()));
    }
    let results: Vec<(usize, f64, f64, Result<(f64, f64, f64)>)> = search
        .r_seq
        .par_iter()
        .zip(search.sigma_seq.par_iter())
        .enumerate()
        .map(|(n, (r, s))| (n + 1, *r, *s, witness_forms(b, *r, *s)))
        .collect();
    let mut rep = WitnessReport { found_plus: false, found_minus: false, first_plus: None, first_minus: None, witness_params: Vec::new(), skipped: Vec::new() };
    for (n, r, sigma, res) in results {
        match res {
            Ok((qp, qm, scale)) if qp.is_finite() && qm.is_finite() => {
                if qp.max(qm) > WITNESS_TOL * scale && rep.first_plus.is_none() {
                    rep.first_plus = Some(n);
                }
                if qp.min(qm) < -WITNESS_TOL * scale && rep.first_minus.is_none() {
                    rep.first_minus = Some(n);
                }
                rep.witness_params.push(WitnessStep { n, r, sigma, q_plus: qp, q_minus: qm });
            }
            Ok(_) => rep.skipped.push(format!("n = {n}: form overflowed")),
            Err(e) => rep.skipped.push(format!("n = {n}: {e}")),
        }
    }
    rep.found_plus = rep.first_plus.is_some();
    rep.found_minus = rep.first_minus.is_some();
    Ok(rep)
}

/// Positivity threshold of `C − γV`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    /// `C − γV ≥ 0` exactly for `γ ≤ γ₀`.
    Gamma0(f64),
    /// Negative spectrum for every `γ > 0`.
    Zero,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: Threshold,
    /// Location of max s_v, when a maximisation was done.
    pub argmax: Option<f64>,
    pub evidence: Vec<String>,
}

fn report(threshold: Threshold, argmax: Option<f64>, why: &str) -> ThresholdReport {
    ThresholdReport { threshold, argmax, evidence: vec![why.to_string()] }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid maximum refined by a three-point parabola.
fn grid_max(xs: &[f64], vs: &[f64]) -> (f64, f64) {
    let (j, _) = vs.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    if j == 0 || j + 1 == vs.len() {
        return (xs[j], vs[j]);
    }
    let (y0, y1, y2) = (vs[j - 1], vs[j], vs[j + 1]);
    let den = y0 - 2.0 * y1 + y2;
    if den >= 0.0 {
        return (xs[j], y1);
    }
    let h = xs[j + 1] - xs[j];
    let off = 0.5 * (y0 - y2) / den;
    (xs[j] + off * h, y1 - 0.25 * (y0 - y2) * off)
}

/// γ₀ for `H_γ = C − γV`: `1/max s_v` when s_v is continuous and decays, `Zero` when
/// every γ > 0 already gives negative spectrum.
pub fn carleman_perturbation_threshold(v: &KernelSpec) -> Result<ThresholdReport> {
    v.validate()?;
    if let Some(k) = v.as_finite_rank() {
        let (np, _) = finite_rank_counts(&k)?;
        return Ok(if np > 0 {
            report(Threshold::Zero, None, "N₋(C − γV) = N₊(V) ≥ 1 for every γ > 0")
        } else {
            report(Threshold::NotApplicable, None, "V ≤ 0, so C − γV ≥ 0 for every γ > 0")
        });
    }
    match v {
        KernelSpec::Carleman => return Ok(report(Threshold::Gamma0(1.0), None, "C − γC = (1 − γ)C")),
        KernelSpec::PowerExp { k, alpha } if *k == -1.0 => {
            let why = if *alpha == 0.0 { "C − γC = (1 − γ)C" } else { "s = 1 − γ·1_{x<β} is nonnegative iff γ ≤ 1" };
            return Ok(report(Threshold::Gamma0(1.0), None, why));
        }
        KernelSpec::PowerExp { k, .. } if *k < 0.0 => {
            return Ok(report(Threshold::Zero, None, "s_v → +∞ at x = −ln α, so 1 − γ s_v takes negative values for every γ > 0"))
        }
        KernelSpec::PowerExp { .. } => {
            return Ok(report(Threshold::Zero, None, "b_v grows like ξᵏ; negative eigenvalues for every γ ≠ 0"))
        }
        KernelSpec::StretchedExp { r } if *r == 0.5 => {
            let s = closed_form_sign_function(v)?;
            let (x, m) = golden_max(|x| s.smooth_value(x).unwrap_or(f64::NEG_INFINITY), -5.0, 6.0, 1e-12);
            return Ok(report(Threshold::Gamma0(1.0 / m), Some(x), "golden-section maximum of the closed-form sign-function"));
        }
        KernelSpec::StretchedExp { r } if *r > 1.0 => {
            return Ok(report(Threshold::Zero, None, "r > 1: b_v grows, so negative eigenvalues for every γ > 0"));
        }
        KernelSpec::StretchedExp { r } if *r == 1.0 => {
            return Ok(report(Threshold::Zero, None, "e^{−t} has rank one with N₊ = 1"));
        }
        _ => {}
    }
    let s = match closed_form_sign_function(v) {
        Ok(s) => s,
        Err(_) => {
            let b = b_function(v, &Axis::span(-60.0, 60.0, 4801))?;
            sign_function_numeric(&b, &Axis::span(-30.0, 30.0, 6001), &SignOptions::default())?.sign
        }
    };
    if !s.is_continuous() {
        return Ok(report(Threshold::NotApplicable, None, "sign-function is not continuous"));
    }
    let grid = match &s.smooth {
        SmoothPart::Grid(g) => g.clone(),
        _ => s.sample(-30.0, 0.01, 6001)?,
    };
    let (xs, vs) = (grid.xs(), grid.real_values());
    let tail = vs[0].abs().max(vs[vs.len() - 1].abs());
    let (x, m) = grid_max(&xs, &vs);
    if tail > 1e-6 * m.abs().max(1e-300) {
        return Ok(report(Threshold::NotApplicable, None, "sign-function does not decay on the window"));
    }
    if m <= 0.0 {
        return Ok(report(Threshold::NotApplicable, None, "s_v ≤ 0, so C − γV ≥ 0 for every γ > 0"));
    }
    Ok(report(Threshold::Gamma0(1.0 / m), Some(x), "grid maximum of the sign-function with parabolic refinement"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn count_json() {
        let c = Classification::new(Verdict::Indefinite, Count::Infinite, Count::Finite(3), "x");
        let back = Classification::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_json().contains("\"inf\""));
        assert!(Classification::from_json(r#"{"verdict":"Positive","n_plus":1,"n_minus":2,"evidence":[]}"#).is_err());
    }

    #[test]
    fn finite_rank_examples() {
        let i = Complex64::new(0.0, 1.0);
        let cases: Vec<(FiniteRankKernel, (usize, usize))> = vec![
            (FiniteRankKernel::single(&[1.0], 1.0), (1, 0)),
            (FiniteRankKernel::single(&[0.0, 1.0], 1.0), (1, 1)),
            (FiniteRankKernel::single(&[0.0, 0.0, 1.0], 1.0), (2, 1)),
            (FiniteRankKernel::single(&[0.0, 0.0, -1.0], 1.0), (1, 2)),
            (FiniteRankKernel::conjugate_pair(&[Complex64::new(1.0, 0.0)], 1.0 + i), (1, 1)),
        ];
        for (k, want) in cases {
            assert_eq!(finite_rank_counts(&k).unwrap(), want);
        }
    }

    #[test]
    fn dispatch_examples() {
        let c = classify(&KernelSpec::power_exp(-0.5, 1.0));
        assert_eq!(c.verdict, Verdict::Positive);
        let c = classify(&KernelSpec::CarlemanDiff { alpha1: 1.0, alpha2: 2.0, gamma: 1.5 });
        assert_eq!((c.verdict, c.n_minus), (Verdict::Indefinite, Count::Infinite));
        let c = classify(&KernelSpec::stretched_exp(2.0));
        assert_eq!((c.verdict, c.n_plus, c.n_minus), (Verdict::Indefinite, Count::Infinite, Count::Infinite));
        let c = classify(&KernelSpec::Carleman);
        assert_eq!((c.verdict, c.n_minus), (Verdict::Positive, Count::Finite(0)));
        c.validate().unwrap();
    }

    #[test]
    fn carleman_diff_cases() {
        let v = |a1, a2, g| classify(&KernelSpec::CarlemanDiff { alpha1: a1, alpha2: a2, gamma: g }).verdict;
        assert_eq!(v(1.0, 2.0, 1.0), Verdict::Positive);
        assert_eq!(v(0.0, 2.0, 0.7), Verdict::Positive);
        assert_eq!(v(2.0, 1.0, 0.5), Verdict::Indefinite);
        assert_eq!(v(1.0, 1.0, 3.0), Verdict::Negative);
    }

    #[test]
    fn carleman_minus_rank_one() {
        let s = KernelSpec::sum(vec![(1.0, KernelSpec::Carleman), (-2.0, KernelSpec::power_exp(0.0, 1.0))]);
        let c = classify(&s);
        assert_eq!((c.verdict, c.n_minus), (Verdict::Indefinite, Count::Finite(1)));
    }

    #[test]
    fn autocorrelation_at_zero() {
        // ∫φ² over the plateau plus two symmetric ramps
        let psi0 = bump_autocorrelation(0.0);
        assert!(psi0 > 0.5 && psi0 < 1.0);
        assert_eq!(bump_autocorrelation(1.0), 0.0);
        assert!((bump_autocorrelation(0.3) - bump_autocorrelation(-0.3)).abs() < 1e-15);
    }

    #[test]
    fn threshold_half() {
        let t = carleman_perturbation_threshold(&KernelSpec::stretched_exp(0.5)).unwrap();
        let nu = 3.0 * (6.0 / PI).sqrt() * (-1.5f64).exp();
        match t.threshold {
            Threshold::Gamma0(g) => assert!((g - 1.0 / nu).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!((t.argmax.unwrap() - 6f64.ln()).abs() < 1e-6);
        assert_eq!(carleman_perturbation_threshold(&KernelSpec::power_exp(0.0, 1.0)).unwrap().threshold, Threshold::Zero);
        assert_eq!(carleman_perturbation_threshold(&KernelSpec::power_exp(-0.5, 1.0)).unwrap().threshold, Threshold::Zero);
    }
}
