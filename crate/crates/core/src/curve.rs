//! Time-dependent coefficients `b_α(t)`.
//!
//! [`ScalarCurve`] is a small serializable expression language for the
//! coefficient functions used by the scenarios. [`CoefficientSource`] is the
//! interface the solvers consume, so callers can also drive them with
//! computed curves (for example a gauge-transformed one).

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A real function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de> + Default"
    )
)]
pub enum ScalarCurve<T> {
    /// `value`
    Constant {
        value: T,
    },
    /// `a + b t`
    Linear {
        a: T,
        b: T,
    },
    /// `q (eps0 + eps cos(omega t))`
    CosineAffine {
        q: T,
        eps0: T,
        eps: T,
        omega: T,
    },
    /// `offset + cos_amp cos(omega t) + sin_amp sin(omega t)`
    Sinusoid {
        offset: T,
        #[serde(default)]
        cos_amp: T,
        #[serde(default)]
        sin_amp: T,
        omega: T,
    },
    /// `c exp(r t)`
    Exponential {
        c: T,
        r: T,
    },
    /// `scale (t + k)^s`, defined for `t + k > 0`.
    Power {
        scale: T,
        k: T,
        s: T,
    },
    /// Monotone cubic (Fritsch-Carlson) interpolation of samples on a
    /// strictly increasing grid; evaluation outside the grid is an error.
    Tabulated {
        times: Vec<T>,
        values: Vec<T>,
    },
    Product {
        factors: Vec<ScalarCurve<T>>,
    },
    Sum {
        terms: Vec<ScalarCurve<T>>,
    },
    Reciprocal {
        of: Box<ScalarCurve<T>>,
    },
}

impl<T: Real> ScalarCurve<T> {
    pub fn constant(value: T) -> Self {
        ScalarCurve::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn product(factors: Vec<Self>) -> Self {
        ScalarCurve::Product { factors }
    }

    pub fn sum(terms: Vec<Self>) -> Self {
        ScalarCurve::Sum { terms }
    }

    pub fn reciprocal(of: Self) -> Self {
        ScalarCurve::Reciprocal { of: Box::new(of) }
    }

    /// Whether the curve is the literal constant zero. This is a structural
    /// test: it does not try to prove that an expression vanishes.
    pub fn is_zero(&self) -> bool {
        match self {
            ScalarCurve::Constant { value } => *value == T::zero(),
            ScalarCurve::Product { factors } => factors.iter().any(|f| f.is_zero()),
            ScalarCurve::Sum { terms } => terms.iter().all(|f| f.is_zero()),
            ScalarCurve::Linear { a, b } => *a == T::zero() && *b == T::zero(),
            ScalarCurve::Exponential { c, .. } => *c == T::zero(),
            ScalarCurve::Power { scale, .. } => *scale == T::zero(),
            ScalarCurve::CosineAffine { q, eps0, eps, .. } => {
                *q == T::zero() || (*eps0 == T::zero() && *eps == T::zero())
            }
            ScalarCurve::Sinusoid {
                offset,
                cos_amp,
                sin_amp,
                ..
            } => *offset == T::zero() && *cos_amp == T::zero() && *sin_amp == T::zero(),
            ScalarCurve::Tabulated { values, .. } => values.iter().all(|v| *v == T::zero()),
            ScalarCurve::Reciprocal { .. } => false,
        }
    }

    /// Checks static well-formedness (finite parameters, tabulated grids).
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::CurveUndefined {
                t: f64::NAN,
                reason: reason.to_string(),
            })
        };
        match self {
            ScalarCurve::Tabulated { times, values } => {
                if times.len() != values.len() {
                    return bad("tabulated times and values differ in length");
                }
                if times.len() < 2 {
                    return bad("tabulated curve needs at least two samples");
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("tabulated times must be strictly increasing");
                }
                if values.iter().chain(times).any(|v| !v.is_finite()) {
                    return bad("tabulated samples must be finite");
                }
                Ok(())
            }
            ScalarCurve::Product { factors: cs } | ScalarCurve::Sum { terms: cs } => {
                cs.iter().try_for_each(|c| c.validate())
            }
            ScalarCurve::Reciprocal { of } => of.validate(),
            other => {
                let params: Vec<T> = match *other {
                    ScalarCurve::Constant { value } => vec![value],
                    ScalarCurve::Linear { a, b } => vec![a, b],
                    ScalarCurve::CosineAffine {
                        q,
                        eps0,
                        eps,
                        omega,
                    } => vec![q, eps0, eps, omega],
                    ScalarCurve::Sinusoid {
                        offset,
                        cos_amp,
                        sin_amp,
                        omega,
                    } => vec![offset, cos_amp, sin_amp, omega],
                    ScalarCurve::Exponential { c, r } => vec![c, r],
                    ScalarCurve::Power { scale, k, s } => vec![scale, k, s],
                    _ => unreachable!(),
                };
                if params.iter().all(|p| p.is_finite()) {
                    Ok(())
                } else {
                    bad("non-finite curve parameter")
                }
            }
        }
    }

    pub fn eval(&self, t: T) -> Result<T> {
        let undefined = |reason: &str| Error::CurveUndefined {
            t: t.to_f64_lossy(),
            reason: reason.to_string(),
        };
        let v = match self {
            ScalarCurve::Constant { value } => *value,
            ScalarCurve::Linear { a, b } => *a + *b * t,
            ScalarCurve::CosineAffine {
                q,
                eps0,
                eps,
                omega,
            } => *q * (*eps0 + *eps * (*omega * t).cos()),
            ScalarCurve::Sinusoid {
                offset,
                cos_amp,
                sin_amp,
                omega,
            } => {
                let (s, c) = (*omega * t).sin_cos();
                *offset + *cos_amp * c + *sin_amp * s
            }
            ScalarCurve::Exponential { c, r } => *c * (*r * t).exp(),
            ScalarCurve::Power { scale, k, s } => {
                let base = t + *k;
                if !(base > T::zero()) {
                    return Err(undefined("power curve needs t + k > 0"));
                }
                *scale * base.powf(*s)
            }
            ScalarCurve::Tabulated { times, values } => {
                pchip(times, values, t).ok_or_else(|| {
                    undefined("outside the tabulated grid (extrapolation is not allowed)")
                })?
            }
            ScalarCurve::Product { factors } => {
                let mut acc = T::one();
                for f in factors {
                    acc *= f.eval(t)?;
                }
                acc
            }
            ScalarCurve::Sum { terms } => {
                let mut acc = T::zero();
                for f in terms {
                    acc += f.eval(t)?;
                }
                acc
            }
            ScalarCurve::Reciprocal { of } => {
                let d = of.eval(t)?;
                if d == T::zero() {
                    return Err(undefined("reciprocal of zero"));
                }
                T::one() / d
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(undefined("non-finite value"))
        }
    }
}

/// Monotone piecewise cubic Hermite interpolation. Returns `None` outside the
/// grid.
fn pchip<T: Real>(ts: &[T], ys: &[T], t: T) -> Option<T> {
    let n = ts.len();
    if n < 2 || !(t >= ts[0] && t <= ts[n - 1]) {
        return None;
    }
    let i = match ts.partition_point(|&x| x <= t) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let secant = |k: usize| (ys[k + 1] - ys[k]) / (ts[k + 1] - ts[k]);
    let slope = |k: usize| -> T {
        if k == 0 {
            let d0 = secant(0);
            if n == 2 {
                return d0;
            }
            end_slope(ts[1] - ts[0], ts[2] - ts[1], d0, secant(1))
        } else if k == n - 1 {
            let dl = secant(n - 2);
            if n == 2 {
                return dl;
            }
            end_slope(
                ts[n - 1] - ts[n - 2],
                ts[n - 2] - ts[n - 3],
                dl,
                secant(n - 3),
            )
        } else {
            let (d0, d1) = (secant(k - 1), secant(k));
            if d0 * d1 <= T::zero() {
                T::zero()
            } else {
                let h0 = ts[k] - ts[k - 1];
                let h1 = ts[k + 1] - ts[k];
                let w1 = T::lit(2.0) * h1 + h0;
                let w2 = h1 + T::lit(2.0) * h0;
                (w1 + w2) / (w1 / d0 + w2 / d1)
            }
        }
    };
    let h = ts[i + 1] - ts[i];
    let s = (t - ts[i]) / h;
    let (m0, m1) = (slope(i), slope(i + 1));
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    Some(h00 * ys[i] + h10 * h * m0 + h01 * ys[i + 1] + h11 * h * m1)
}

/// One-sided three-point end slope with the usual shape-preserving limits.
fn end_slope<T: Real>(h0: T, h1: T, d0: T, d1: T) -> T {
    let m = ((T::lit(2.0) * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= T::zero() {
        T::zero()
    } else if d0 * d1 <= T::zero() && m.abs() > T::lit(3.0) * d0.abs() {
        T::lit(3.0) * d0
    } else {
        m
    }
}

/// Time-dependent coefficient vector `b(t)` consumed by the solvers.
pub trait CoefficientSource<T>: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `b(t)` into `out` (length `dim()`).
    fn eval_into(&self, t: T, out: &mut [T]) -> Result<()>;

    /// Indices that may be nonzero somewhere. Used for structural
    /// decisions, so it must never omit a component that can be nonzero.
    fn support(&self) -> Vec<usize> {
        (0..self.dim()).collect()
    }

    fn eval(&self, t: T) -> Result<Vec<T>>
    where
        T: Real,
    {
        let mut out = vec![T::zero(); self.dim()];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }
}

/// One [`ScalarCurve`] per basis index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    transparent,
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de> + Default"
    )
)]
pub struct CoefficientCurve<T> {
    pub components: Vec<ScalarCurve<T>>,
}

impl<T: Real> CoefficientCurve<T> {
    pub fn new(components: Vec<ScalarCurve<T>>) -> Result<Self> {
        for c in &components {
            c.validate()?;
        }
        Ok(CoefficientCurve { components })
    }

    pub fn zero(dim: usize) -> Self {
        CoefficientCurve {
            components: vec![ScalarCurve::zero(); dim],
        }
    }

    /// Zero curve with the given components set (0-based indices).
    pub fn sparse(dim: usize, entries: Vec<(usize, ScalarCurve<T>)>) -> Result<Self> {
        let mut c = Self::zero(dim);
        for (i, curve) in entries {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            c.components[i] = curve;
        }
        Self::new(c.components)
    }

    pub fn into_source(self) -> Arc<dyn CoefficientSource<T>> {
        Arc::new(self)
    }
}

impl<T: Real> CoefficientSource<T> for CoefficientCurve<T> {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval_into(&self, t: T, out: &mut [T]) -> Result<()> {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(t)?;
        }
        Ok(())
    }

    fn support(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Coefficients given by a closure, with an explicit support.
pub struct FnCoefficients<T> {
    dim: usize,
    support: Vec<usize>,
    f: Box<dyn Fn(T, &mut [T]) -> Result<()> + Send + Sync>,
}

impl<T> FnCoefficients<T> {
    pub fn new(
        dim: usize,
        support: Vec<usize>,
        f: impl Fn(T, &mut [T]) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        FnCoefficients {
            dim,
            support,
            f: Box::new(f),
        }
    }
}

impl<T> Debug for FnCoefficients<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnCoefficients")
            .field("dim", &self.dim)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl<T: Real> CoefficientSource<T> for FnCoefficients<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: T, out: &mut [T]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = T::zero());
        (self.f)(t, out)
    }

    fn support(&self) -> Vec<usize> {
        self.support.clone()
    }
}
