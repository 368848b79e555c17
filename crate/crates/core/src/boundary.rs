//! Functions on the boundary circle, held as finite Fourier data and
//! optionally as angular samples.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{QDiskError, Result};

/// Coefficients with modulus below this are dropped from derived data.
pub const COEFF_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryFunction {
    fourier: BTreeMap<i64, Complex64>,
    samples: Option<Vec<(f64, Complex64)>>,
}

impl BoundaryFunction {
    pub fn from_fourier<I>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut fourier = BTreeMap::new();
        for (d, c) in coeffs {
            *fourier.entry(d).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        fourier.retain(|_, c: &mut Complex64| *c != Complex64::new(0.0, 0.0));
        Self {
            fourier,
            samples: None,
        }
    }

    /// `e^{i d theta}`
    pub fn mode(d: i64) -> Self {
        Self::from_fourier([(d, Complex64::new(1.0, 0.0))])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_fourier([(0, c)])
    }

    /// Builds Fourier data from `K` uniform samples at `theta_k = 2 pi k / K`
    /// and keeps the samples. Modes with `|d| <= bandwidth` are retained, so
    /// `bandwidth` must be below `K / 2`.
    pub fn from_uniform_samples(values: &[Complex64], bandwidth: usize) -> Result<Self> {
        let k = values.len();
        if k == 0 || 2 * bandwidth >= k {
            return Err(QDiskError::Bandwidth {
                bandwidth,
                limit: k.saturating_sub(1) / 2,
            });
        }
        let bw = bandwidth as i64;
        let mut fourier = BTreeMap::new();
        for d in -bw..=bw {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let theta = 2.0 * PI * j as f64 / k as f64;
                acc += v * Complex64::from_polar(1.0, -(d as f64) * theta);
            }
            acc /= k as f64;
            if acc.norm() > COEFF_FLOOR {
                fourier.insert(d, acc);
            }
        }
        let samples = values
            .iter()
            .enumerate()
            .map(|(j, v)| (2.0 * PI * j as f64 / k as f64, *v))
            .collect();
        Ok(Self {
            fourier,
            samples: Some(samples),
        })
    }

    /// Boundary values of the Poisson kernel with pole `w`, `|w| < 1`:
    /// `(1 - |w|^2) / |e^{i theta} - w|^2 = sum_{d>=0} conj(w)^d e^{i d theta} + sum_{d>=1} w^d e^{-i d theta}`,
    /// truncated where `|w|^d` drops below `tol`.
    pub fn poisson_kernel(pole: Complex64, tol: f64) -> Result<Self> {
        let r = pole.norm();
        if r >= 1.0 {
            return Err(QDiskError::OutsideDisk {
                what: "Poisson kernel pole",
                value: pole.to_string(),
                modulus: r,
            });
        }
        let mut coeffs = vec![(0, Complex64::new(1.0, 0.0))];
        let mut p = Complex64::new(1.0, 0.0);
        let mut d = 0i64;
        // tail of the geometric series in |w|
        while p.norm() / (1.0 - r) >= tol {
            d += 1;
            p *= pole;
            coeffs.push((d, p.conj()));
            coeffs.push((-d, p));
        }
        Ok(Self::from_fourier(coeffs))
    }

    pub fn fourier(&self) -> &BTreeMap<i64, Complex64> {
        &self.fourier
    }

    pub fn samples(&self) -> Option<&[(f64, Complex64)]> {
        self.samples.as_deref()
    }

    pub fn coefficient(&self, d: i64) -> Complex64 {
        self.fourier.get(&d).copied().unwrap_or_default()
    }

    pub fn bandwidth(&self) -> usize {
        self.fourier
            .keys()
            .map(|d| d.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.fourier
            .iter()
            .map(|(d, c)| c * Complex64::from_polar(1.0, *d as f64 * theta))
            .sum()
    }

    /// Harmonic extension through the Fourier route:
    /// `sum_{d>=0} c_d zeta^d + sum_{d<0} c_d conj(zeta)^{|d|}`.
    pub fn harmonic_eval(&self, zeta: Complex64) -> Complex64 {
        self.fourier
            .iter()
            .map(|(d, c)| {
                if *d >= 0 {
                    c * zeta.powu(*d as u32)
                } else {
                    c * zeta.conj().powu(d.unsigned_abs() as u32)
                }
            })
            .sum()
    }

    /// Whether the function is real-valued, `c_{-d} = conj(c_d)`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.fourier
            .iter()
            .all(|(d, c)| (self.coefficient(-d) - c.conj()).norm() <= tol)
    }

    /// Maximum deviation between the stored samples and the Fourier sum.
    pub fn sample_mismatch(&self) -> f64 {
        self.samples
            .as_ref()
            .map(|s| {
                s.iter()
                    .map(|(t, v)| (self.eval(*t) - v).norm())
                    .fold(0.0, f64::max)
            })
            .unwrap_or(0.0)
    }

    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let m = self.sample_mismatch();
        if m > tol {
            return Err(QDiskError::Format(format!(
                "samples disagree with Fourier data by {m:e}"
            )));
        }
        Ok(())
    }

    fn angular_resolution(&self) -> usize {
        (32 * (self.bandwidth() + 1)).max(1024)
    }

    pub fn sup_abs(&self) -> f64 {
        let k = self.angular_resolution();
        (0..k)
            .map(|j| self.eval(2.0 * PI * j as f64 / k as f64).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        let k = self.angular_resolution();
        (0..k)
            .map(|j| self.eval(2.0 * PI * j as f64 / k as f64).re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest coefficientwise distance, missing modes counting as zero.
    pub fn max_coeff_diff(&self, other: &BoundaryFunction) -> f64 {
        self.fourier
            .keys()
            .chain(other.fourier.keys())
            .map(|d| (self.coefficient(*d) - other.coefficient(*d)).norm())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &BoundaryFunction) -> BoundaryFunction {
        Self::from_fourier(
            self.fourier
                .iter()
                .chain(other.fourier.iter())
                .map(|(d, c)| (*d, *c)),
        )
    }

    pub fn scale(&self, s: Complex64) -> BoundaryFunction {
        Self::from_fourier(self.fourier.iter().map(|(d, c)| (*d, c * s)))
    }

    /// `{"d": [re, im], ...}` with keys in ascending order of `d`.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (d, c) in &self.fourier {
            m.insert(d.to_string(), serde_json::json!([c.re, c.im]));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| QDiskError::Format("boundary data must be a JSON object".into()))?;
        let mut coeffs = Vec::with_capacity(obj.len());
        for (k, val) in obj {
            let d: i64 = k.trim().parse().map_err(|_| {
                QDiskError::Format(format!("Fourier index {k:?} is not an integer"))
            })?;
            let pair = val.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                QDiskError::Format(format!("coefficient for {k} must be [re, im]"))
            })?;
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| QDiskError::Format(format!("bad real part at {k}")))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| QDiskError::Format(format!("bad imaginary part at {k}")))?;
            coeffs.push((d, Complex64::new(re, im)));
        }
        Ok(Self::from_fourier(coeffs))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

impl Serialize for BoundaryFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}
