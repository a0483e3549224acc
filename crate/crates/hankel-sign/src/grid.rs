//! Uniform-grid samples and the complex-number JSON encoding.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex number that serialises as a bare number when real, `[re, im]` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cplx(pub Complex64);

impl Cplx {
    pub fn real(x: f64) -> Self {
        Cplx(Complex64::new(x, 0.0))
    }
}

impl From<f64> for Cplx {
    fn from(x: f64) -> Self {
        Cplx::real(x)
    }
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Cplx(z)
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Re(f64),
            Pair([f64; 2]),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Re(x) => Cplx::real(x),
            Repr::Pair([re, im]) => Cplx(Complex64::new(re, im)),
        })
    }
}

/// Uniform set of nodes `origin + j·step`, `j < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub origin: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(origin: f64, step: f64, len: usize) -> Self {
        Self { origin, step, len }
    }

    /// `len` nodes from `a` to `b` inclusive.
    pub fn span(a: f64, b: f64, len: usize) -> Self {
        Self { origin: a, step: (b - a) / (len.max(2) - 1) as f64, len }
    }

    pub fn at(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.at(j)).collect()
    }

    pub fn end(&self) -> f64 {
        self.at(self.len.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < 2 || !(self.step > 0.0) || !self.origin.is_finite() || !self.end().is_finite() {
            return Err(Error::Domain(format!("bad axis: origin {}, step {}, len {}", self.origin, self.step, self.len)));
        }
        Ok(())
    }
}

/// Samples `values[j] ≈ f(origin + j·step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub origin: f64,
    pub step: f64,
    pub values: Vec<Cplx>,
}

impl GridFunction {
    pub fn new(origin: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        let g = Self { origin, step, values: values.into_iter().map(Cplx).collect() };
        g.validate()?;
        Ok(g)
    }

    pub fn from_real(origin: f64, step: f64, values: &[f64]) -> Result<Self> {
        Self::new(origin, step, values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    /// Samples `f` on `n` nodes.
    pub fn sample<F: FnMut(f64) -> Complex64>(origin: f64, step: f64, n: usize, mut f: F) -> Result<Self> {
        Self::new(origin, step, (0..n).map(|j| f(origin + j as f64 * step)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Parse(format!("grid step must be positive, got {}", self.step)));
        }
        if !self.origin.is_finite() {
            return Err(Error::Parse("grid origin must be finite".into()));
        }
        if self.values.len() < 2 {
            return Err(Error::Parse("grid needs at least two samples".into()));
        }
        if !self.end().is_finite() {
            return Err(Error::Parse("grid extent overflows".into()));
        }
        if self.values.iter().any(|v| !(v.0.re.is_finite() && v.0.im.is_finite())) {
            return Err(Error::Parse("grid values must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Last node.
    pub fn end(&self) -> f64 {
        self.x(self.values.len().saturating_sub(1))
    }

    pub fn value(&self, j: usize) -> Complex64 {
        self.values[j].0
    }

    pub fn complex_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.0).collect()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.0.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.0.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.0.im.abs()).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.origin - 1e-12 * self.step && x <= self.end() + 1e-12 * self.step
    }

    /// Four-point Lagrange interpolation (linear on the outermost cells).
    pub fn interpolate(&self, x: f64) -> Result<Complex64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("{x} outside grid [{}, {}]", self.origin, self.end())));
        }
        let n = self.len();
        let u = ((x - self.origin) / self.step).clamp(0.0, (n - 1) as f64);
        let j = (u.floor() as usize).min(n - 2);
        let f = u - j as f64;
        if n < 4 || j == 0 || j + 2 >= n {
            return Ok(self.value(j) * (1.0 - f) + self.value(j + 1) * f);
        }
        let (p0, p1, p2, p3) = (self.value(j - 1), self.value(j), self.value(j + 1), self.value(j + 2));
        let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
        Ok(p0 * w0 + p1 * w1 + p2 * w2 + p3 * w3)
    }

    /// CSV with header `x,re,im`, 17 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for j in 0..self.len() {
            let v = self.value(j);
            out.push_str(&format!("{},{},{}\n", fmt17(self.x(j)), fmt17(v.re), fmt17(v.im)));
        }
        out
    }

    /// Parses the CSV produced by [`GridFunction::to_csv`]; the x column must be uniformly spaced.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["x", "re", "im"] {
            return Err(Error::Parse(format!("expected header x,re,im, got {}", names.join(","))));
        }
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns, got {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                let v: f64 = rec[i].parse().map_err(|_| Error::Parse(format!("bad number {:?}", &rec[i])))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse(format!("non-finite number {:?}", &rec[i])))
                }
            };
            xs.push(num(0)?);
            vals.push(Complex64::new(num(1)?, num(2)?));
        }
        if xs.len() < 2 {
            return Err(Error::Parse("grid needs at least two rows".into()));
        }
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if !(step > 0.0) {
            return Err(Error::Parse("x column must increase".into()));
        }
        for (j, x) in xs.iter().enumerate() {
            let expect = xs[0] + j as f64 * step;
            if (x - expect).abs() > 1e-6 * step + 1e-13 * expect.abs() {
                return Err(Error::Parse(format!("row {j}: x = {x} breaks uniform spacing")));
            }
        }
        Self::new(xs[0], step, vals)
    }
}

/// Scientific notation with 17 significant digits, enough for a lossless round trip.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_lossless() {
        let g = GridFunction::sample(-1.0, 0.1, 21, |x| Complex64::new(x.sin(), x * x / 3.0)).unwrap();
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back.len(), g.len());
        for j in 0..g.len() {
            assert_eq!(back.value(j), g.value(j));
        }
        assert!((back.step - g.step).abs() < 1e-15);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(GridFunction::from_csv("x,re,im\n0,1,0\n").is_err());
        assert!(GridFunction::from_csv("a,b,c\n0,1,0\n1,1,0\n").is_err());
        assert!(GridFunction::from_csv("x,re,im\n0,1,0\n1,nan,0\n").is_err());
        assert!(GridFunction::from_csv("x,re,im\n0,1,0\n1,1,0\n5,1,0\n").is_err());
        assert!(GridFunction::from_csv("x,re,im\n1,1,0\n0,1,0\n").is_err());
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let f = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
        let g = GridFunction::sample(0.0, 0.25, 20, |x| Complex64::new(f(x), 0.0)).unwrap();
        for x in [0.6, 1.3, 2.71, 4.0] {
            assert!((g.interpolate(x).unwrap().re - f(x)).abs() < 1e-12);
        }
        assert!(g.interpolate(-0.5).is_err());
    }

    #[test]
    fn complex_json_forms() {
        let a: Cplx = serde_json::from_str("2.5").unwrap();
        let b: Cplx = serde_json::from_str("[1.0, -3.0]").unwrap();
        assert_eq!(a.0, Complex64::new(2.5, 0.0));
        assert_eq!(b.0, Complex64::new(1.0, -3.0));
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1.0,-3.0]");
        assert_eq!(serde_json::to_string(&a).unwrap(), "2.5");
    }
}
