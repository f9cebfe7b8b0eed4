//! Exact and quadrature solutions of the Wei-Norman systems of the worked
//! examples, used as oracles for the generic solver.
//!
//! Every oracle returns the coordinates `v(t)` in the ordering used by the
//! matching scenario ([`OracleSpec::ordering`]).

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::curve::{CoefficientCurve, ScalarCurve};
use crate::error::{Error, Result};
use crate::quadrature::{CumulativeIntegral, QuadOptions};
use crate::scalar::Real;

fn quad_opts<T: Real>() -> QuadOptions<T> {
    QuadOptions {
        abs_tol: T::lit(1e-12),
        rel_tol: T::lit(1e-13),
        max_panels: 4000,
    }
}

fn require_nonnegative<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) {
        return Err(Error::OutsideDomain {
            t: t.to_f64_lossy(),
            reason: "oracles are defined for t >= 0".into(),
        });
    }
    Ok(())
}

fn running<T: Real>(
    f: impl Fn(T) -> Result<T> + Send + Sync + 'static,
    t_max: T,
) -> Result<Arc<CumulativeIntegral<T>>> {
    Ok(Arc::new(CumulativeIntegral::new(
        f,
        T::zero(),
        t_max,
        &quad_opts(),
    )?))
}

/// Running integrals `F = ∫f` and `FF = ∫∫f` of a force curve.
#[derive(Clone, Debug)]
struct ForceIntegrals<T> {
    f1: Arc<CumulativeIntegral<T>>,
    f2: Arc<CumulativeIntegral<T>>,
}

impl<T: Real> ForceIntegrals<T> {
    fn new(f: &ScalarCurve<T>, t_max: T) -> Result<Self> {
        require_nonnegative(t_max)?;
        let f = f.clone();
        let f1 = running(move |t| f.eval(t), t_max)?;
        let inner = f1.clone();
        let f2 = running(move |t| inner.eval(t), t_max)?;
        Ok(ForceIntegrals { f1, f2 })
    }
}

/// Classical particle of constant mass in a time-dependent linear potential
/// `f(t) x` (algebra `heisenberg3`, ordering `(3, 2, 1)`).
#[derive(Clone, Debug)]
pub struct ClassicalLinearPotential<T> {
    m: T,
    ints: ForceIntegrals<T>,
}

impl<T: Real> ClassicalLinearPotential<T> {
    pub fn new(m: T, f: &ScalarCurve<T>, t_max: T) -> Result<Self> {
        check_mass(m, T::zero())?;
        Ok(ClassicalLinearPotential {
            m,
            ints: ForceIntegrals::new(f, t_max)?,
        })
    }

    /// `(u₁, u₂, u₃) = (t/m, -∫f, -(1/m)∫∫f)`.
    pub fn eval(&self, t: T) -> Result<[T; 3]> {
        require_nonnegative(t)?;
        Ok([
            t / self.m,
            -self.ints.f1.eval(t)?,
            -self.ints.f2.eval(t)? / self.m,
        ])
    }

    /// Constants of motion `(I₁, I₂) = (p + ∫f, x - (t/m)(p + ∫f) + (1/m)∫∫f)`,
    /// equal to the initial momentum and position.
    pub fn constants(&self, x: T, p: T, t: T) -> Result<(T, T)> {
        let big_f = self.ints.f1.eval(t)?;
        let ff = self.ints.f2.eval(t)?;
        let i1 = p + big_f;
        Ok((i1, x - t / self.m * i1 + ff / self.m))
    }

    /// The commonly printed form
    /// `I₂ = x - (t/m)(p + ∫f) t + (t/m)∫∫f`, which carries two spurious
    /// factors of `t`. Kept only so reports can quantify the difference.
    pub fn printed_constants(&self, x: T, p: T, t: T) -> Result<(T, T)> {
        let big_f = self.ints.f1.eval(t)?;
        let ff = self.ints.f2.eval(t)?;
        let i1 = p + big_f;
        Ok((i1, x - t / self.m * i1 * t + t / self.m * ff))
    }
}

/// Oracle `(u₁, u₂, u₃)` at a single time.
pub fn classical_linear_potential<T: Real>(m: T, f: &ScalarCurve<T>, t: T) -> Result<[T; 3]> {
    ClassicalLinearPotential::new(m, f, t)?.eval(t)
}

/// Quantum particle in a linear potential (algebra `heisenberg4_central`,
/// ordering `(4, 2, 3, 1)`).
#[derive(Clone, Debug)]
pub struct QuantumLinearPotential<T> {
    m: T,
    f1: Arc<CumulativeIntegral<T>>,
    v3: Arc<CumulativeIntegral<T>>,
    v4: Arc<CumulativeIntegral<T>>,
}

impl<T: Real> QuantumLinearPotential<T> {
    pub fn new(m: T, f: &ScalarCurve<T>, t_max: T) -> Result<Self> {
        check_mass(m, T::zero())?;
        let ints = ForceIntegrals::new(f, t_max)?;
        let f1 = ints.f1.clone();
        let sq = f1.clone();
        let v4 = running(
            move |t| {
                let v2 = sq.eval(t)?;
                Ok(v2 * v2)
            },
            t_max,
        )?;
        Ok(QuantumLinearPotential {
            m,
            f1,
            v3: ints.f2,
            v4,
        })
    }

    /// `v₁ = t/m`, `v₂ = -∫f`, `v₃ = (1/m)∫v₂`, `v₄ = -(1/2m)∫v₂²`.
    pub fn eval(&self, t: T) -> Result<[T; 4]> {
        require_nonnegative(t)?;
        let m = self.m;
        Ok([
            t / m,
            -self.f1.eval(t)?,
            -self.v3.eval(t)? / m,
            -self.v4.eval(t)? / (T::lit(2.0) * m),
        ])
    }
}

pub fn quantum_linear_potential<T: Real>(m: T, f: &ScalarCurve<T>, t: T) -> Result<[T; 4]> {
    QuantumLinearPotential::new(m, f, t)?.eval(t)
}

fn check_mass<T: Real>(m: T, t: T) -> Result<()> {
    if !(m > T::zero()) {
        return Err(Error::NonPositiveMass {
            t: t.to_f64_lossy(),
            mass: m.to_f64_lossy(),
        });
    }
    Ok(())
}

fn mass_at<T: Real>(m: &ScalarCurve<T>, t: T) -> Result<T> {
    let v = m.eval(t)?;
    check_mass(v, t)?;
    Ok(v)
}

/// Variable mass `m(t)` in a linear potential `S(t) X` (algebra
/// `quadratic6`, ordering `(4, 5, 6, 1, 2, 3)`), solved by nested
/// quadratures.
#[derive(Clone, Debug)]
pub struct MassLinearPotential<T> {
    v1: Arc<CumulativeIntegral<T>>,
    v4: Arc<CumulativeIntegral<T>>,
    v5: Arc<CumulativeIntegral<T>>,
    v6: Arc<CumulativeIntegral<T>>,
}

impl<T: Real> MassLinearPotential<T> {
    pub fn new(m: &ScalarCurve<T>, s: &ScalarCurve<T>, t_max: T) -> Result<Self> {
        require_nonnegative(t_max)?;
        let mc = m.clone();
        let v1 = running(move |t| Ok(T::one() / mass_at(&mc, t)?), t_max)?;
        let sc = s.clone();
        let v5 = running(move |t| sc.eval(t), t_max)?;
        let (mc, v5c) = (m.clone(), v5.clone());
        let v4 = running(move |t| Ok(v5c.eval(t)? / mass_at(&mc, t)?), t_max)?;
        let (mc, sc, v4c, v5c) = (m.clone(), s.clone(), v4.clone(), v5.clone());
        let v6 = running(
            move |t| {
                let w5 = v5c.eval(t)?;
                Ok(-sc.eval(t)? * v4c.eval(t)? - w5 * w5 / (T::lit(2.0) * mass_at(&mc, t)?))
            },
            t_max,
        )?;
        Ok(MassLinearPotential { v1, v4, v5, v6 })
    }

    pub fn eval(&self, t: T) -> Result<[T; 6]> {
        require_nonnegative(t)?;
        Ok([
            self.v1.eval(t)?,
            T::zero(),
            T::zero(),
            self.v4.eval(t)?,
            self.v5.eval(t)?,
            self.v6.eval(t)?,
        ])
    }
}

pub fn mass_linear_potential<T: Real>(
    m: &ScalarCurve<T>,
    s: &ScalarCurve<T>,
    t: T,
) -> Result<[T; 6]> {
    MassLinearPotential::new(m, s, t)?.eval(t)
}

/// Closed form for constant mass and `S(t) = q ε₀ + q ε cos(ωt)`.
pub fn guedes_solution<T: Real>(m: T, q: T, eps0: T, eps: T, omega: T, t: T) -> Result<[T; 6]> {
    check_mass(m, t)?;
    if omega == T::zero() {
        return Err(Error::OutsideDomain {
            t: t.to_f64_lossy(),
            reason: "the closed form needs omega != 0".into(),
        });
    }
    let lit = T::lit;
    let (w, wt) = (omega, omega * t);
    let (s, c) = wt.sin_cos();
    let v4 =
        q / (lit(2.0) * m * w * w) * (lit(2.0) * eps + eps0 * w * w * t * t - lit(2.0) * eps * c);
    let v5 = q / w * (eps0 * wt + eps * s);
    let v6 = -q * q / (lit(12.0) * m * w * w * w)
        * (lit(4.0) * eps0 * eps0 * w * w * w * t * t * t
            - lit(3.0) * eps * (eps - lit(4.0) * eps0) * wt
            + lit(3.0)
                * eps
                * (lit(4.0) * eps + lit(2.0) * eps0 * (wt * wt - lit(2.0)) - lit(3.0) * eps * c)
                * s);
    Ok([t / m, T::zero(), T::zero(), v4, v5, v6])
}

fn real_part<T: Real>(z: Complex<T>, t: T) -> Result<T> {
    let residue = z.im.abs();
    if !(residue <= T::lit(1e-10) * z.re.abs().max(T::one())) {
        return Err(Error::ImaginaryResidue {
            t: t.to_f64_lossy(),
            residue: residue.to_f64_lossy(),
        });
    }
    Ok(z.re)
}

/// `√x` for possibly negative `x`, as a complex number.
fn csqrt<T: Real>(x: T) -> Complex<T> {
    if x >= T::zero() {
        Complex::new(x.sqrt(), T::zero())
    } else {
        Complex::new(T::zero(), (-x).sqrt())
    }
}

/// Damped-mass oscillator with `m(t) = m₀ e^{-rt}` and constant `ω₀`
/// (`b₁ = e^{rt}/m₀`, `b₃ = m₀ e^{-rt} ω₀²`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaldirolaKanai<T> {
    pub m0: T,
    pub r: T,
    pub omega0: T,
}

impl<T: Real> CaldirolaKanai<T> {
    pub fn new(m0: T, r: T, omega0: T) -> Result<Self> {
        check_mass(m0, T::zero())?;
        Ok(CaldirolaKanai { m0, r, omega0 })
    }

    /// `ω̄₀ = √(r² - 4ω₀²)`, imaginary in the underdamped regime.
    pub fn omega_bar(&self) -> Complex<T> {
        csqrt(self.r * self.r - T::lit(4.0) * self.omega0 * self.omega0)
    }

    /// End of the interval `[0, t*)` on which the closed form is regular.
    ///
    /// `v₁` solves a Riccati equation and has a pole where
    /// `r sinh(tω̄₀/2) + ω̄₀ cosh(tω̄₀/2)` vanishes; this happens in the
    /// underdamped regime and for `r < 0`.
    pub fn validity_end(&self) -> T {
        let disc = self.r * self.r - T::lit(4.0) * self.omega0 * self.omega0;
        let two = T::lit(2.0);
        if disc < T::zero() {
            let w = (-disc).sqrt();
            two * w.atan2(-self.r) / w
        } else if self.r < T::zero() {
            let s = disc.sqrt();
            if s == T::zero() {
                -two / self.r
            } else {
                two * (s / -self.r).atanh() / s
            }
        } else {
            T::infinity()
        }
    }

    fn check_domain(&self, t: T) -> Result<()> {
        require_nonnegative(t)?;
        let end = self.validity_end();
        if !(t < end) {
            return Err(Error::OutsideDomain {
                t: t.to_f64_lossy(),
                reason: format!(
                    "the Riccati solution has a pole at t = {}",
                    end.to_f64_lossy()
                ),
            });
        }
        Ok(())
    }

    fn is_critical(&self, s: Complex<T>) -> bool {
        s.norm() <= T::lit(1e-9) * (self.r.abs() + self.omega0.abs())
    }

    /// `(v₁, v₂, v₃)` from the closed form; `v₄ = v₅ = v₆ = 0`.
    pub fn eval(&self, t: T) -> Result<[T; 3]> {
        let [v1, v2, v3] = self.eval_complex(t)?;
        Ok([real_part(v1, t)?, real_part(v2, t)?, real_part(v3, t)?])
    }

    /// The closed form evaluated in complex arithmetic, before the imaginary
    /// parts (which cancel analytically) are discarded.
    pub fn eval_complex(&self, t: T) -> Result<[Complex<T>; 3]> {
        let re = |x: T| Complex::new(x, T::zero());
        self.check_domain(t)?;
        if t == T::zero() {
            return Ok([re(T::zero()); 3]);
        }
        let (m0, r, w0) = (self.m0, self.r, self.omega0);
        let two = T::lit(2.0);
        let s = self.omega_bar();
        if self.is_critical(s) {
            // s coth(ts/2) -> 2/t and the logarithms combine to log(1 + rt/2)
            let d = r + two / t;
            return Ok([
                re(two * (r * t).exp() / (m0 * d)),
                re(r * t - two * (T::one() + r * t / two).ln()),
                re(two * m0 * w0 * w0 / d),
            ]);
        }
        let z = s * (t / two);
        let cr = Complex::new(r, T::zero());
        let d = cr + s * z.cosh() / z.sinh();
        let v1 = Complex::new(two * (r * t).exp() / m0, T::zero()) / d;
        let v2 = Complex::new(r * t, T::zero()) + s.ln() * two
            - (cr * z.sinh() + s * z.cosh()).ln() * two;
        let v3 = Complex::new(two * m0 * w0 * w0, T::zero()) / d;
        Ok([v1, v2, v3])
    }

    /// Analytic time derivatives of `(v₁, v₂, v₃)`.
    pub fn derivative(&self, t: T) -> Result<[T; 3]> {
        self.check_domain(t)?;
        if !(t > T::zero()) {
            return Err(Error::OutsideDomain {
                t: t.to_f64_lossy(),
                reason: "derivative is taken on t > 0".into(),
            });
        }
        let [v1, _, v3] = self.eval(t)?;
        let two = T::lit(2.0);
        let r = self.r;
        let s = self.omega_bar();
        if self.is_critical(s) {
            let d = r + two / t;
            let q = two / (t * t * d);
            return Ok([v1 * (r + q), r - r / (T::one() + r * t / two), v3 * q]);
        }
        let z = s * (t / two);
        let (sh, ch) = (z.sinh(), z.cosh());
        let cr = Complex::new(r, T::zero());
        let d = cr + s * ch / sh;
        let q = s * s / (sh * sh * d * two);
        let dv1 = Complex::new(v1, T::zero()) * (cr + q);
        let dv2 = cr - s * (cr * ch + s * sh) / (cr * sh + s * ch);
        let dv3 = Complex::new(v3, T::zero()) * q;
        Ok([real_part(dv1, t)?, real_part(dv2, t)?, real_part(dv3, t)?])
    }
}

pub fn caldirola_kanai<T: Real>(m0: T, r: T, omega0: T, t: T) -> Result<[T; 3]> {
    CaldirolaKanai::new(m0, r, omega0)?.eval(t)
}

/// Constant mass with `ω²(t) = ω₀²/(t + k)²` (`b₁ = 1/m`, `b₃ = m ω₀²/(t+k)²`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseSquareFrequency<T> {
    pub m: T,
    pub omega0: T,
    pub k: T,
}

impl<T: Real> InverseSquareFrequency<T> {
    pub fn new(m: T, omega0: T, k: T) -> Result<Self> {
        check_mass(m, T::zero())?;
        if !(k > T::zero()) {
            return Err(Error::OutsideDomain {
                t: 0.0,
                reason: "k must be positive".into(),
            });
        }
        Ok(InverseSquareFrequency { m, omega0, k })
    }

    /// `ω̄₀ = √(1 - 4ω₀²)`.
    pub fn omega_bar(&self) -> Complex<T> {
        csqrt(T::one() - T::lit(4.0) * self.omega0 * self.omega0)
    }

    pub fn eval(&self, t: T) -> Result<[T; 3]> {
        let (m, w0, k) = (self.m, self.omega0, self.k);
        if !(t > -k) {
            return Err(Error::OutsideDomain {
                t: t.to_f64_lossy(),
                reason: "needs t > -k".into(),
            });
        }
        let s = self.omega_bar();
        let one = Complex::new(T::one(), T::zero());
        let two = T::lit(2.0);
        let kc = Complex::new(k, T::zero());
        let ktc = Complex::new(k + t, T::zero());
        let kp = kc.powc(s);
        let ktp = ktc.powc(s);
        let den = kp * (s - one) + ktp * (s + one);
        let v1 = ktc * (ktp - kp) * two / (den * m);
        let v2 =
            (one + s) * ktc.ln() - (one + s) * kc.ln() + (kp * s * two).ln() * two - den.ln() * two;
        let v3 = (ktp - kp) / den * (two * m * w0 * w0 / k);
        Ok([real_part(v1, t)?, real_part(v2, t)?, real_part(v3, t)?])
    }
}

pub fn inverse_square_frequency<T: Real>(m: T, omega0: T, k: T, t: T) -> Result<[T; 3]> {
    InverseSquareFrequency::new(m, omega0, k)?.eval(t)
}

/// Coefficients of `H = P²/2m(t) + ½ m(t) ω(t)² X² + f(t) X` on `quadratic6`:
/// `b₁ = 1/m`, `b₃ = m ω²`, `b₅ = f`.
///
/// The mass is checked to be positive at `samples` equally spaced points of
/// `span`.
pub fn forced_oscillator_rhs<T: Real>(
    m: &ScalarCurve<T>,
    omega: &ScalarCurve<T>,
    f: &ScalarCurve<T>,
    span: (T, T),
    samples: usize,
) -> Result<CoefficientCurve<T>> {
    for t in crate::scalar::linspace(span.0, span.1, samples.max(2)) {
        mass_at(m, t)?;
    }
    CoefficientCurve::sparse(
        6,
        vec![
            (0, ScalarCurve::reciprocal(m.clone())),
            (
                2,
                ScalarCurve::product(vec![m.clone(), omega.clone(), omega.clone()]),
            ),
            (4, f.clone()),
        ],
    )
}

/// Parameterized oracle for one of the worked examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "id",
    rename_all = "kebab-case",
    deny_unknown_fields,
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de> + Default"
    )
)]
pub enum OracleSpec<T> {
    ClassicalLinear {
        m: T,
        f: ScalarCurve<T>,
    },
    QuantumLinear {
        m: T,
        f: ScalarCurve<T>,
    },
    MassLinear {
        m: ScalarCurve<T>,
        s: ScalarCurve<T>,
    },
    Guedes {
        m: T,
        q: T,
        eps0: T,
        eps: T,
        omega: T,
    },
    CaldirolaKanai {
        m0: T,
        r: T,
        omega0: T,
    },
    InverseSquare {
        m: T,
        omega0: T,
        k: T,
    },
}

/// Closed-form or quadrature solution `t ↦ v(t)` on a validity domain.
#[derive(Clone)]
pub struct OracleSolution<T> {
    pub id: &'static str,
    pub note: &'static str,
    pub domain: (T, T),
    f: Arc<dyn Fn(T) -> Result<Vec<T>> + Send + Sync>,
}

impl<T: Real> OracleSolution<T> {
    pub fn eval(&self, t: T) -> Result<Vec<T>> {
        if !(t >= self.domain.0 && t <= self.domain.1) {
            return Err(Error::OutsideDomain {
                t: t.to_f64_lossy(),
                reason: format!(
                    "oracle `{}` is valid on [{}, {}]",
                    self.id,
                    self.domain.0.to_f64_lossy(),
                    self.domain.1.to_f64_lossy()
                ),
            });
        }
        (self.f)(t)
    }
}

impl<T: Real> std::fmt::Debug for OracleSolution<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleSolution")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl<T: Real> OracleSpec<T> {
    pub fn id(&self) -> &'static str {
        match self {
            OracleSpec::ClassicalLinear { .. } => "classical-linear",
            OracleSpec::QuantumLinear { .. } => "quantum-linear",
            OracleSpec::MassLinear { .. } => "mass-linear",
            OracleSpec::Guedes { .. } => "guedes",
            OracleSpec::CaldirolaKanai { .. } => "caldirola-kanai",
            OracleSpec::InverseSquare { .. } => "inverse-square",
        }
    }

    /// Catalog algebra the oracle coordinates refer to.
    pub fn algebra(&self) -> &'static str {
        match self {
            OracleSpec::ClassicalLinear { .. } => "heisenberg3",
            OracleSpec::QuantumLinear { .. } => "heisenberg4_central",
            _ => "quadratic6",
        }
    }

    /// 1-based factor ordering the oracle coordinates refer to.
    pub fn ordering(&self) -> Vec<usize> {
        match self {
            OracleSpec::ClassicalLinear { .. } => vec![3, 2, 1],
            OracleSpec::QuantumLinear { .. } => vec![4, 2, 3, 1],
            _ => vec![4, 5, 6, 1, 2, 3],
        }
    }

    /// Coefficient curve `b(t)` of the example.
    pub fn curve(&self) -> Result<CoefficientCurve<T>> {
        let c = ScalarCurve::constant;
        let neg = |f: &ScalarCurve<T>| ScalarCurve::product(vec![c(-T::one()), f.clone()]);
        match self {
            OracleSpec::ClassicalLinear { m, f } => {
                check_mass(*m, T::zero())?;
                CoefficientCurve::sparse(3, vec![(0, c(T::one() / *m)), (1, neg(f))])
            }
            OracleSpec::QuantumLinear { m, f } => {
                check_mass(*m, T::zero())?;
                CoefficientCurve::sparse(4, vec![(0, c(T::one() / *m)), (1, neg(f))])
            }
            OracleSpec::MassLinear { m, s } => CoefficientCurve::sparse(
                6,
                vec![(0, ScalarCurve::reciprocal(m.clone())), (4, s.clone())],
            ),
            OracleSpec::Guedes {
                m,
                q,
                eps0,
                eps,
                omega,
            } => {
                check_mass(*m, T::zero())?;
                CoefficientCurve::sparse(
                    6,
                    vec![
                        (0, c(T::one() / *m)),
                        (
                            4,
                            ScalarCurve::CosineAffine {
                                q: *q,
                                eps0: *eps0,
                                eps: *eps,
                                omega: *omega,
                            },
                        ),
                    ],
                )
            }
            OracleSpec::CaldirolaKanai { m0, r, omega0 } => {
                check_mass(*m0, T::zero())?;
                CoefficientCurve::sparse(
                    6,
                    vec![
                        (
                            0,
                            ScalarCurve::Exponential {
                                c: T::one() / *m0,
                                r: *r,
                            },
                        ),
                        (
                            2,
                            ScalarCurve::Exponential {
                                c: *m0 * *omega0 * *omega0,
                                r: -*r,
                            },
                        ),
                    ],
                )
            }
            OracleSpec::InverseSquare { m, omega0, k } => {
                check_mass(*m, T::zero())?;
                CoefficientCurve::sparse(
                    6,
                    vec![
                        (0, c(T::one() / *m)),
                        (
                            2,
                            ScalarCurve::Power {
                                scale: *m * *omega0 * *omega0,
                                k: *k,
                                s: T::lit(-2.0),
                            },
                        ),
                    ],
                )
            }
        }
    }

    /// Builds the oracle on `[0, t_max]`, clipped to its validity domain.
    pub fn build(&self, t_max: T) -> Result<OracleSolution<T>> {
        require_nonnegative(t_max)?;
        let id = self.id();
        let full = (T::zero(), t_max);
        let (note, domain, f): (
            &'static str,
            (T, T),
            Arc<dyn Fn(T) -> Result<Vec<T>> + Send + Sync>,
        ) = match self {
            OracleSpec::ClassicalLinear { m, f } => {
                let o = ClassicalLinearPotential::new(*m, f, t_max)?;
                (
                    "nested quadratures",
                    full,
                    Arc::new(move |t| Ok(o.eval(t)?.to_vec())),
                )
            }
            OracleSpec::QuantumLinear { m, f } => {
                let o = QuantumLinearPotential::new(*m, f, t_max)?;
                (
                    "nested quadratures",
                    full,
                    Arc::new(move |t| Ok(o.eval(t)?.to_vec())),
                )
            }
            OracleSpec::MassLinear { m, s } => {
                let o = MassLinearPotential::new(m, s, t_max)?;
                (
                    "nested quadratures",
                    full,
                    Arc::new(move |t| Ok(o.eval(t)?.to_vec())),
                )
            }
            OracleSpec::Guedes {
                m,
                q,
                eps0,
                eps,
                omega,
            } => {
                let (m, q, eps0, eps, omega) = (*m, *q, *eps0, *eps, *omega);
                (
                    "closed form",
                    full,
                    Arc::new(move |t| Ok(guedes_solution(m, q, eps0, eps, omega, t)?.to_vec())),
                )
            }
            OracleSpec::CaldirolaKanai { m0, r, omega0 } => {
                let ck = CaldirolaKanai::new(*m0, *r, *omega0)?;
                let end = ck.validity_end();
                let domain = (
                    T::zero(),
                    if end.is_finite() {
                        t_max.min(T::lit(0.95) * end)
                    } else {
                        t_max
                    },
                );
                (
                    "closed form (complex continuation when underdamped)",
                    domain,
                    Arc::new(move |t| {
                        let [a, b, c] = ck.eval(t)?;
                        Ok(vec![a, b, c, T::zero(), T::zero(), T::zero()])
                    }),
                )
            }
            OracleSpec::InverseSquare { m, omega0, k } => {
                let o = InverseSquareFrequency::new(*m, *omega0, *k)?;
                (
                    "closed form",
                    full,
                    Arc::new(move |t| {
                        let [a, b, c] = o.eval(t)?;
                        Ok(vec![a, b, c, T::zero(), T::zero(), T::zero()])
                    }),
                )
            }
        };
        Ok(OracleSolution {
            id,
            note,
            domain,
            f,
        })
    }
}

/// Ids of the shipped example scenarios.
pub const SCENARIO_IDS: [&str; 9] = [
    "classical-linear",
    "quantum-linear",
    "mass-linear",
    "guedes",
    "caldirola-kanai",
    "inverse-square",
    "paul-trap",
    "damped-ck",
    "forced-oscillator",
];
