//! Test functions with analytic first and second derivatives.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    C2Bounded,
    C2Compact,
    CinfCompact,
}

/// Sup norms `(‖u‖, Σ_{|α|=1} ‖∂^α u‖, Σ_{|α|=2} ‖∂^α u‖)`, summed over multi-indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeNorms {
    pub sup: f64,
    pub first: f64,
    pub second: f64,
}

impl DerivativeNorms {
    /// `‖u‖_{C²} = Σ_{|α|≤2} ‖∂^α u‖`.
    pub fn c2(&self) -> f64 {
        self.sup + self.first + self.second
    }

    fn scaled(self, a: f64) -> Self {
        Self { sup: a.abs() * self.sup, first: a.abs() * self.first, second: a.abs() * self.second }
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
/// Writes the gradient (length d) and row-major Hessian (d×d) and returns the value.
type JetFn = dyn Fn(&[f64], &mut [f64], &mut [f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct TestFunction {
    name: String,
    dim: usize,
    value: Arc<ValueFn>,
    jet: Arc<JetFn>,
    /// Closed box outside of which `u` vanishes; `None` for bounded-only functions.
    pub support: Option<(Vec<f64>, Vec<f64>)>,
    pub smoothness: Smoothness,
    /// `u` and its derivatives tend to zero at infinity (implied by compact support).
    pub vanishes_at_infinity: bool,
    pub norms: DerivativeNorms,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// One-dimensional function from `y ↦ (u, u', u'')`.
    pub fn from_profile_1d<F>(
        name: impl Into<String>,
        profile: F,
        support: Option<(f64, f64)>,
        smoothness: Smoothness,
        norms: DerivativeNorms,
    ) -> Self
    where
        F: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        let p = Arc::new(profile);
        let pv = p.clone();
        Self {
            name: name.into(),
            dim: 1,
            value: Arc::new(move |x| pv(x[0]).0),
            jet: Arc::new(move |x, g, h| {
                let (v, d1, d2) = p(x[0]);
                g[0] = d1;
                h[0] = d2;
                v
            }),
            support: support.map(|(a, b)| (vec![a], vec![b])),
            vanishes_at_infinity: support.is_some(),
            smoothness,
            norms,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    /// Value, gradient and row-major Hessian at `x`.
    #[inline]
    pub fn jet(&self, x: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
        (self.jet)(x, grad, hess)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        let mut h = vec![0.0; self.dim * self.dim];
        self.jet(x, &mut g, &mut h);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        let mut h = vec![0.0; self.dim * self.dim];
        self.jet(x, &mut g, &mut h);
        h
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.smoothness, Smoothness::C2Compact | Smoothness::CinfCompact)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            name: "zero".into(),
            dim,
            value: Arc::new(|_| 0.0),
            jet: Arc::new(|_, g, h| {
                g.fill(0.0);
                h.fill(0.0);
                0.0
            }),
            support: Some((vec![0.0; dim], vec![0.0; dim])),
            smoothness: Smoothness::CinfCompact,
            vanishes_at_infinity: true,
            norms: DerivativeNorms { sup: 0.0, first: 0.0, second: 0.0 },
        }
    }

    /// `A exp(-|y - c|² / w²)` in any dimension.
    pub fn gaussian_bump(center: Vec<f64>, width: f64, amplitude: f64) -> Self {
        let d = center.len();
        let w2 = width * width;
        let c1 = center.clone();
        let c2 = center.clone();
        let pairs = (d * d.saturating_sub(1) / 2) as f64;
        let norms = DerivativeNorms {
            sup: 1.0,
            first: d as f64 * 2f64.sqrt() * (-0.5f64).exp() / width,
            second: (d as f64 * 2.0 + pairs * 2.0 / E) / w2,
        }
        .scaled(amplitude);
        // effective support: the profile is below 1e-35 beyond 9 widths
        let lo = center.iter().map(|c| c - 9.0 * width).collect();
        let hi = center.iter().map(|c| c + 9.0 * width).collect();
        Self {
            name: "gaussian-bump".into(),
            dim: d,
            value: Arc::new(move |x| {
                let r2: f64 = x.iter().zip(&c1).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * (-r2 / w2).exp()
            }),
            jet: Arc::new(move |x, g, h| {
                let r2: f64 = x.iter().zip(&c2).map(|(a, b)| (a - b) * (a - b)).sum();
                let u = amplitude * (-r2 / w2).exp();
                for j in 0..d {
                    let zj = x[j] - c2[j];
                    g[j] = -2.0 * zj / w2 * u;
                    for k in 0..d {
                        let zk = x[k] - c2[k];
                        let delta = if j == k { 1.0 } else { 0.0 };
                        h[j * d + k] = (4.0 * zj * zk / (w2 * w2) - 2.0 * delta / w2) * u;
                    }
                }
                u
            }),
            support: Some((lo, hi)),
            smoothness: Smoothness::C2Bounded,
            vanishes_at_infinity: true,
            norms,
        }
    }

    /// `A ((1 + cos(π z)) / 2)²` for `|z| < 1`, `z = (y - c) / r`; C³ with compact support.
    pub fn cosine_bump(center: f64, radius: f64, amplitude: f64) -> Self {
        let k = PI / radius;
        let norms = DerivativeNorms { sup: 1.0, first: k * 3.0 * 3f64.sqrt() / 8.0, second: k * k }.scaled(amplitude);
        Self::from_profile_1d(
            "cosine-bump",
            move |y| {
                let z = (y - center) / radius;
                if z.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let th = PI * z;
                let (s, c) = th.sin_cos();
                let base = 0.5 * (1.0 + c);
                (
                    amplitude * base * base,
                    amplitude * k * (-(1.0 + c) * s * 0.5),
                    amplitude * k * k * (-(c + (2.0 * th).cos()) * 0.5),
                )
            },
            Some((center - radius, center + radius)),
            Smoothness::C2Compact,
            norms,
        )
    }

    /// Cubic B-spline scaled to peak `A` and support `[c - r, c + r]`; exactly C².
    pub fn cubic_spline_bump(center: f64, radius: f64, amplitude: f64) -> Self {
        let norms =
            DerivativeNorms { sup: 1.0, first: 2.0 / radius, second: 12.0 / (radius * radius) }.scaled(amplitude);
        Self::from_profile_1d(
            "cubic-spline-bump",
            move |y| {
                let z = (y - center) / radius;
                let t = 2.0 * z.abs();
                let sg = z.signum();
                let (b, b1, b2) = if t >= 2.0 {
                    (0.0, 0.0, 0.0)
                } else if t >= 1.0 {
                    let m = 2.0 - t;
                    (m * m * m / 6.0, -0.5 * m * m, m)
                } else {
                    (2.0 / 3.0 - t * t + 0.5 * t * t * t, -2.0 * t + 1.5 * t * t, -2.0 + 3.0 * t)
                };
                let a = 1.5 * amplitude;
                (a * b, a * b1 * sg * 2.0 / radius, a * b2 * 4.0 / (radius * radius))
            },
            Some((center - radius, center + radius)),
            Smoothness::C2Compact,
            norms,
        )
    }

    /// Equal to `level` on `|y - c| ≤ inner`, zero beyond `outer`, quintic smoothstep between.
    pub fn plateau(center: f64, inner: f64, outer: f64, level: f64) -> Self {
        let len = outer - inner;
        let norms =
            DerivativeNorms { sup: 1.0, first: 1.875 / len, second: 10.0 / (3f64.sqrt() * len * len) }.scaled(level);
        Self::from_profile_1d(
            "plateau",
            move |y| {
                let r = (y - center).abs();
                let s = ((r - inner) / len).clamp(0.0, 1.0);
                let sg = (y - center).signum();
                let p = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
                let p1 = -30.0 * s * s * (1.0 - s) * (1.0 - s);
                let p2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
                (level * p, level * p1 * sg / len, level * p2 / (len * len))
            },
            Some((center - outer, center + outer)),
            Smoothness::C2Compact,
            norms,
        )
    }

    pub fn sine() -> Self {
        Self::from_profile_1d(
            "sine",
            |y| {
                let (s, c) = y.sin_cos();
                (s, c, -s)
            },
            None,
            Smoothness::C2Bounded,
            DerivativeNorms { sup: 1.0, first: 1.0, second: 1.0 },
        )
    }

    /// `a u + b v`.
    pub fn linear_combination(a: f64, u: &TestFunction, b: f64, v: &TestFunction) -> Result<Self> {
        if u.dim != v.dim {
            return Err(Error::arg("test functions of different dimension"));
        }
        let d = u.dim;
        let (uv, vv) = (u.value.clone(), v.value.clone());
        let (uj, vj) = (u.jet.clone(), v.jet.clone());
        let support = match (&u.support, &v.support) {
            (Some((l1, h1)), Some((l2, h2))) => Some((
                l1.iter().zip(l2).map(|(a, b)| a.min(*b)).collect(),
                h1.iter().zip(h2).map(|(a, b)| a.max(*b)).collect(),
            )),
            _ => None,
        };
        let smoothness = match (u.smoothness, v.smoothness) {
            (Smoothness::CinfCompact, Smoothness::CinfCompact) => Smoothness::CinfCompact,
            (s, t) if s != Smoothness::C2Bounded && t != Smoothness::C2Bounded => Smoothness::C2Compact,
            _ => Smoothness::C2Bounded,
        };
        let nu = u.norms.scaled(a);
        let nv = v.norms.scaled(b);
        Ok(Self {
            name: format!("{a}*{}+{b}*{}", u.name, v.name),
            dim: d,
            value: Arc::new(move |x| a * uv(x) + b * vv(x)),
            jet: Arc::new(move |x, g, h| {
                let mut g2 = vec![0.0; d];
                let mut h2 = vec![0.0; d * d];
                let p = uj(x, g, h);
                let q = vj(x, &mut g2, &mut h2);
                for (gi, g2i) in g.iter_mut().zip(&g2) {
                    *gi = a * *gi + b * g2i;
                }
                for (hi, h2i) in h.iter_mut().zip(&h2) {
                    *hi = a * *hi + b * h2i;
                }
                a * p + b * q
            }),
            support,
            smoothness,
            vanishes_at_infinity: u.vanishes_at_infinity && v.vanishes_at_infinity,
            norms: DerivativeNorms { sup: nu.sup + nv.sup, first: nu.first + nv.first, second: nu.second + nv.second },
        })
    }

    /// Catalog lookup for one-dimensional functions by name, with `center`, `scale`
    /// (width or radius) and `amplitude` overrides.
    pub fn from_catalog(name: &str, center: f64, scale: f64, amplitude: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::arg(format!("test function scale must be positive, got {scale}")));
        }
        match name {
            "gaussian-bump" => Ok(Self::gaussian_bump(vec![center], scale, amplitude)),
            "cosine-bump" => Ok(Self::cosine_bump(center, scale, amplitude)),
            "cubic-spline-bump" => Ok(Self::cubic_spline_bump(center, scale, amplitude)),
            other => Err(Error::Config(format!(
                "unknown test function '{other}' (expected gaussian-bump, cosine-bump or cubic-spline-bump)"
            ))),
        }
    }
}

pub const CATALOG: [&str; 3] = ["gaussian-bump", "cosine-bump", "cubic-spline-bump"];
