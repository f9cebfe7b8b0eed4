//! Gauge transformations of Lie systems: the transformation law for curves
//! in the algebra, the interaction picture, and the reduction of `sl2`
//! systems to the one-parameter subgroup generated by `a₁`.
//!
//! Curves in the algebra are given by their coordinates `a(t)`; a Lie system
//! with coefficients `b(t)` corresponds to `a(t) = -b(t)`.

use std::fmt;
use std::sync::Arc;

use crate::curve::{CoefficientSource, ScalarCurve};
use crate::error::{Error, Result};
use crate::lie_core::{builtin_algebra, AlgebraElement, LieAlgebra, MatrixRep};
use crate::linalg::Mat;
use crate::ode::{solve, OdeOptions, Trajectory};
use crate::quadrature::{CumulativeIntegral, QuadOptions};
use crate::scalar::Real;
use crate::wei_norman::WeiNormanSolution;

/// A curve `t ↦ ḡ(t)` in the group, given in a matrix representation.
pub trait GaugeCurve<T: Real>: Send + Sync {
    /// Size of the representation matrices.
    fn size(&self) -> usize;

    fn eval(&self, t: T) -> Result<Mat<T>>;

    /// Analytic `dḡ/dt` when the gauge knows it.
    fn derivative(&self, _t: T) -> Option<Result<Mat<T>>> {
        None
    }

    /// Interval on which `eval` may be called.
    fn domain(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }
}

/// Base step of the difference quotients used when a gauge has no analytic
/// derivative.
pub const DIFF_STEP: f64 = 1e-6;

fn diff_quotient<T: Real, G: GaugeCurve<T> + ?Sized>(
    gauge: &G,
    t: T,
    h: T,
    central: bool,
) -> Result<Mat<T>> {
    let two = T::lit(2.0);
    if central {
        let d = &gauge.eval(t + h)? - &gauge.eval(t - h)?;
        Ok(d.scale(T::one() / (two * h)))
    } else {
        // second-order one-sided formula; `h` carries the direction
        let g0 = gauge.eval(t)?;
        let g1 = gauge.eval(t + h)?;
        let g2 = gauge.eval(t + two * h)?;
        let d = &(&g1.scale(T::lit(4.0)) - &g0.scale(T::lit(3.0))) - &g2;
        Ok(d.scale(T::one() / (two * h)))
    }
}

/// `dḡ/dt`, analytic when available, otherwise by second-order differences
/// with one Richardson extrapolation step.
pub fn gauge_derivative<T: Real, G: GaugeCurve<T> + ?Sized>(gauge: &G, t: T) -> Result<Mat<T>> {
    if let Some(d) = gauge.derivative(t) {
        return d;
    }
    let (lo, hi) = gauge.domain();
    let h = T::lit(DIFF_STEP) * t.abs().max(T::one());
    let (h, central) = if t - h >= lo && t + h <= hi {
        (h, true)
    } else if t + T::lit(2.0) * h <= hi {
        (h, false)
    } else if t - T::lit(2.0) * h >= lo {
        (-h, false)
    } else {
        return Err(Error::OutsideDomain {
            t: t.to_f64_lossy(),
            reason: "gauge domain too short to difference".into(),
        });
    };
    let coarse = diff_quotient(gauge, t, h, central)?;
    let fine = diff_quotient(gauge, t, h / T::lit(2.0), central)?;
    Ok((&fine.scale(T::lit(4.0)) - &coarse).scale(T::one() / T::lit(3.0)))
}

/// Right logarithmic derivative `ḡ̇ ḡ⁻¹`.
pub fn log_derivative<T: Real, G: GaugeCurve<T> + ?Sized>(gauge: &G, t: T) -> Result<Mat<T>> {
    let g = gauge.eval(t)?;
    Ok(&gauge_derivative(gauge, t)? * &g.inverse()?)
}

/// Transformed curve `a′(t) = ḡ̇ ḡ⁻¹ + ḡ a(t) ḡ⁻¹`, pulled back to algebra
/// coordinates.
///
/// `a` gives the algebra coordinates of the curve (not the Lie-system
/// coefficients; see [`system_curve`]).
pub fn transform_curve<T: Real, G: GaugeCurve<T> + ?Sized>(
    rep: &MatrixRep<T>,
    a: &dyn CoefficientSource<T>,
    gauge: &G,
    t: T,
) -> Result<AlgebraElement<T>> {
    if gauge.size() != rep.size() {
        return Err(Error::DimensionMismatch {
            expected: rep.size(),
            got: gauge.size(),
        });
    }
    let g = gauge.eval(t)?;
    let ginv = g.inverse()?;
    let dg = gauge_derivative(gauge, t)?;
    let image = rep.image(&AlgebraElement::new(a.eval(t)?));
    let m = &(&dg * &ginv) + &(&(&g * &image) * &ginv);
    rep.pullback(&m)
}

/// Curve `a(t) = -b(t)` of the Lie system with coefficients `b`.
pub fn system_curve<T: Real>(b: Arc<dyn CoefficientSource<T>>) -> Arc<dyn CoefficientSource<T>> {
    Arc::new(Negated { inner: b })
}

#[derive(Debug)]
struct Negated<T> {
    inner: Arc<dyn CoefficientSource<T>>,
}

impl<T: Real> CoefficientSource<T> for Negated<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval_into(&self, t: T, out: &mut [T]) -> Result<()> {
        self.inner.eval_into(t, out)?;
        out.iter_mut().for_each(|x| *x = -*x);
        Ok(())
    }

    fn support(&self) -> Vec<usize> {
        self.inner.support()
    }
}

/// Coefficients `b′ = -a′` of the Lie system obtained by gauging the system
/// with coefficients `b` by `ḡ`. Its solution is `g′ = ḡ g`.
pub struct TransformedSystem<T> {
    rep: MatrixRep<T>,
    a: Arc<dyn CoefficientSource<T>>,
    gauge: Arc<dyn GaugeCurve<T>>,
}

impl<T: Real> TransformedSystem<T> {
    pub fn new(
        rep: MatrixRep<T>,
        b: Arc<dyn CoefficientSource<T>>,
        gauge: Arc<dyn GaugeCurve<T>>,
    ) -> Result<Self> {
        if b.dim() != rep.mats().len() {
            return Err(Error::DimensionMismatch {
                expected: rep.mats().len(),
                got: b.dim(),
            });
        }
        Ok(TransformedSystem {
            rep,
            a: system_curve(b),
            gauge,
        })
    }
}

impl<T> fmt::Debug for TransformedSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformedSystem").finish_non_exhaustive()
    }
}

impl<T: Real> CoefficientSource<T> for TransformedSystem<T> {
    fn dim(&self) -> usize {
        self.rep.mats().len()
    }

    fn eval_into(&self, t: T, out: &mut [T]) -> Result<()> {
        let a = transform_curve(&self.rep, self.a.as_ref(), self.gauge.as_ref(), t)?;
        for (o, c) in out.iter_mut().zip(a.coords) {
            *o = -c;
        }
        Ok(())
    }
}

/// `ḡ ≡ e`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityGauge {
    pub size: usize,
}

impl<T: Real> GaugeCurve<T> for IdentityGauge {
    fn size(&self) -> usize {
        self.size
    }

    fn eval(&self, _t: T) -> Result<Mat<T>> {
        Ok(Mat::identity(self.size))
    }

    fn derivative(&self, _t: T) -> Option<Result<Mat<T>>> {
        Some(Ok(Mat::zeros(self.size, self.size)))
    }
}

type MatFn<T> = Arc<dyn Fn(T) -> Result<Mat<T>> + Send + Sync>;

/// Gauge given by closures.
#[derive(Clone)]
pub struct FnGauge<T> {
    size: usize,
    f: MatFn<T>,
    df: Option<MatFn<T>>,
    domain: (T, T),
}

impl<T: Real> FnGauge<T> {
    pub fn new(size: usize, f: impl Fn(T) -> Result<Mat<T>> + Send + Sync + 'static) -> Self {
        FnGauge {
            size,
            f: Arc::new(f),
            df: None,
            domain: (T::neg_infinity(), T::infinity()),
        }
    }

    pub fn with_derivative(
        mut self,
        df: impl Fn(T) -> Result<Mat<T>> + Send + Sync + 'static,
    ) -> Self {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn with_domain(mut self, lo: T, hi: T) -> Self {
        self.domain = (lo, hi);
        self
    }
}

impl<T: Real> GaugeCurve<T> for FnGauge<T> {
    fn size(&self) -> usize {
        self.size
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        (self.f)(t)
    }

    fn derivative(&self, t: T) -> Option<Result<Mat<T>>> {
        self.df.as_ref().map(|df| df(t))
    }

    fn domain(&self) -> (T, T) {
        self.domain
    }
}

type CoordFn<T> = Arc<dyn Fn(T) -> Result<(T, T)> + Send + Sync>;

/// `ḡ(t) = exp(c₁(t) ρ(a_{α₁})) ⋯ exp(c_n(t) ρ(a_{α_n}))` with each
/// coordinate function returning `(c_k, ċ_k)`; the derivative is exact.
#[derive(Clone)]
pub struct FactorizedGauge<T> {
    rep: MatrixRep<T>,
    factors: Vec<(usize, CoordFn<T>)>,
    domain: (T, T),
}

impl<T: Real> FactorizedGauge<T> {
    pub fn new(rep: MatrixRep<T>) -> Self {
        FactorizedGauge {
            rep,
            factors: Vec::new(),
            domain: (T::neg_infinity(), T::infinity()),
        }
    }

    /// Appends `exp(c(t) ρ(a_alpha))` on the right.
    pub fn factor(
        mut self,
        alpha: usize,
        c: impl Fn(T) -> Result<(T, T)> + Send + Sync + 'static,
    ) -> Result<Self> {
        if alpha >= self.rep.mats().len() {
            return Err(Error::IndexOutOfRange {
                index: alpha,
                dim: self.rep.mats().len(),
            });
        }
        self.factors.push((alpha, Arc::new(c)));
        Ok(self)
    }

    pub fn with_domain(mut self, lo: T, hi: T) -> Self {
        self.domain = (lo, hi);
        self
    }

    fn pieces(&self, t: T) -> Result<Vec<(Mat<T>, Mat<T>)>> {
        self.factors
            .iter()
            .map(|(alpha, c)| {
                let (c, dc) = c(t)?;
                let gen = self.rep.generator(*alpha);
                let e = gen.scale(c).expm()?;
                let de = &gen.scale(dc) * &e;
                Ok((e, de))
            })
            .collect()
    }
}

impl<T: Real> GaugeCurve<T> for FactorizedGauge<T> {
    fn size(&self) -> usize {
        self.rep.size()
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        Ok(self
            .pieces(t)?
            .iter()
            .fold(Mat::identity(self.rep.size()), |acc, (e, _)| &acc * e))
    }

    fn derivative(&self, t: T) -> Option<Result<Mat<T>>> {
        Some(self.pieces(t).map(|pieces| {
            let n = self.rep.size();
            let mut total = Mat::zeros(n, n);
            for k in 0..pieces.len() {
                let term = pieces
                    .iter()
                    .enumerate()
                    .fold(Mat::identity(n), |acc, (j, (e, de))| {
                        &acc * if j == k { de } else { e }
                    });
                total = &total + &term;
            }
            total
        }))
    }

    fn domain(&self) -> (T, T) {
        self.domain
    }
}

/// `ḡ = left · right`.
pub struct ProductGauge<T> {
    pub left: Arc<dyn GaugeCurve<T>>,
    pub right: Arc<dyn GaugeCurve<T>>,
}

impl<T: Real> GaugeCurve<T> for ProductGauge<T> {
    fn size(&self) -> usize {
        self.left.size()
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        Ok(&self.left.eval(t)? * &self.right.eval(t)?)
    }

    fn derivative(&self, t: T) -> Option<Result<Mat<T>>> {
        let dl = self.left.derivative(t)?;
        let dr = self.right.derivative(t)?;
        Some((|| {
            let (l, r) = (self.left.eval(t)?, self.right.eval(t)?);
            Ok(&(&dl? * &r) + &(&l * &dr?))
        })())
    }

    fn domain(&self) -> (T, T) {
        let (a, b) = (self.left.domain(), self.right.domain());
        (a.0.max(b.0), a.1.min(b.1))
    }
}

/// `ḡ(t) = g(t)⁻¹` for a computed solution `g`, which gauges its own curve
/// to zero. The derivative is taken by differencing the reconstruction.
pub struct SolutionGauge<T> {
    sol: Arc<WeiNormanSolution<T>>,
    rep: MatrixRep<T>,
}

impl<T: Real> SolutionGauge<T> {
    pub fn inverse_of(sol: Arc<WeiNormanSolution<T>>, rep: MatrixRep<T>) -> Self {
        SolutionGauge { sol, rep }
    }
}

impl<T: Real> GaugeCurve<T> for SolutionGauge<T> {
    fn size(&self) -> usize {
        self.rep.size()
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        self.sol.reconstruct(&self.rep, t)?.inverse()
    }

    fn domain(&self) -> (T, T) {
        self.sol.span()
    }
}

/// Interaction picture with respect to the drift `a_{α₀}`.
///
/// For `b(t) = a_{α₀} + Σ_{α≠α₀} b_α(t) a_α` the gauge `ḡ(t) = exp(t ρ(a_{α₀}))`
/// removes the drift; the transformed system has coefficients
/// `b′(t) = exp(t ad a_{α₀}) Σ_{α≠α₀} b_α(t) a_α` and the original solution is
/// `g(t) = exp(-t ρ(a_{α₀})) g′(t)`. The drift component of `b` is taken to
/// be 1 and otherwise ignored.
#[derive(Debug)]
pub struct InteractionPicture<T> {
    ad: Mat<T>,
    drift: usize,
    b: Arc<dyn CoefficientSource<T>>,
    support: Vec<usize>,
}

impl<T: Real> InteractionPicture<T> {
    pub fn new(
        alg: &LieAlgebra<T>,
        drift: usize,
        b: Arc<dyn CoefficientSource<T>>,
    ) -> Result<Self> {
        if b.dim() != alg.dim() {
            return Err(Error::DimensionMismatch {
                expected: alg.dim(),
                got: b.dim(),
            });
        }
        let ad = alg.ad_matrix(drift)?;
        // indices reachable from the perturbation support under ad a_{α₀}
        let mut reach: Vec<bool> = vec![false; alg.dim()];
        let mut stack: Vec<usize> = b.support().into_iter().filter(|&i| i != drift).collect();
        while let Some(beta) = stack.pop() {
            if reach[beta] {
                continue;
            }
            reach[beta] = true;
            for gamma in 0..alg.dim() {
                if ad[(gamma, beta)] != T::zero() && !reach[gamma] {
                    stack.push(gamma);
                }
            }
        }
        let support = (0..alg.dim()).filter(|&i| reach[i]).collect();
        Ok(InteractionPicture {
            ad,
            drift,
            b,
            support,
        })
    }

    pub fn drift(&self) -> usize {
        self.drift
    }

    /// `a′(t) = -exp(t ad a_{α₀}) Σ_{α≠α₀} b_α(t) a_α`.
    pub fn transformed_curve(&self, t: T) -> Result<AlgebraElement<T>> {
        let mut b = self.b.eval(t)?;
        b[self.drift] = T::zero();
        let e = self.ad.scale(t).expm()?;
        Ok(AlgebraElement::new(
            e.mul_vec(&b).into_iter().map(|x| -x).collect(),
        ))
    }

    /// `ḡ(t) = exp(t ρ(a_{α₀}))`.
    pub fn gauge(&self, rep: &MatrixRep<T>) -> FactorizedGauge<T> {
        FactorizedGauge::new(rep.clone())
            .factor(self.drift, |t| Ok((t, T::one())))
            .expect("drift index was validated by ad_matrix")
    }

    /// `g(t) = exp(-t ρ(a_{α₀})) g′(t)`.
    pub fn reconstruct(&self, rep: &MatrixRep<T>, g_prime: &Mat<T>, t: T) -> Result<Mat<T>> {
        Ok(&rep.generator(self.drift).scale(-t).expm()? * g_prime)
    }
}

impl<T: Real> CoefficientSource<T> for InteractionPicture<T> {
    fn dim(&self) -> usize {
        self.ad.rows()
    }

    fn eval_into(&self, t: T, out: &mut [T]) -> Result<()> {
        let a = self.transformed_curve(t)?;
        for (o, c) in out.iter_mut().zip(a.coords) {
            *o = -c;
        }
        Ok(())
    }

    fn support(&self) -> Vec<usize> {
        self.support.clone()
    }
}

/// `a′(t)` of the interaction picture at a single time.
pub fn interaction_picture<T: Real>(
    alg: &LieAlgebra<T>,
    drift: usize,
    b: Arc<dyn CoefficientSource<T>>,
    t: T,
) -> Result<AlgebraElement<T>> {
    InteractionPicture::new(alg, drift, b)?.transformed_curve(t)
}

/// Solution of `α̈ = -Ω(t)² α` with `α(t₀) = 1`, `α̇(t₀) = 0`.
#[derive(Clone, Debug)]
pub struct OscillatorSolution<T> {
    omega: ScalarCurve<T>,
    trajectory: Trajectory<T>,
    first_zero: Option<T>,
}

fn oscillator_rhs<T: Real>(
    omega: &ScalarCurve<T>,
) -> impl FnMut(T, &[T], &mut [T]) -> Result<()> + '_ {
    move |t, y, dy| {
        let w = omega.eval(t)?;
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
        Ok(())
    }
}

/// Integrates the oscillator equation on `span` with adaptive Dormand-Prince
/// steps and dense output.
pub fn oscillator_solve<T: Real>(
    omega: &ScalarCurve<T>,
    span: (T, T),
) -> Result<OscillatorSolution<T>> {
    omega.validate()?;
    let opts = OdeOptions {
        rtol: T::lit(1e-12),
        atol: T::lit(1e-14),
        ..OdeOptions::default()
    };
    let trajectory = solve(
        &mut oscillator_rhs(omega),
        span.0,
        &[T::one(), T::zero()],
        span.1,
        opts,
    )?;
    let mut osc = OscillatorSolution {
        omega: omega.clone(),
        trajectory,
        first_zero: None,
    };
    osc.first_zero = osc.locate_first_zero()?;
    Ok(osc)
}

impl<T: Real> OscillatorSolution<T> {
    pub fn span(&self) -> (T, T) {
        (self.trajectory.t_start(), self.trajectory.t_end())
    }

    /// `(α, α̇)` at `t`.
    pub fn eval(&self, t: T) -> Result<(T, T)> {
        let y = self.trajectory.eval(&mut oscillator_rhs(&self.omega), t)?;
        Ok((y[0], y[1]))
    }

    pub fn omega_sq(&self, t: T) -> Result<T> {
        let w = self.omega.eval(t)?;
        Ok(w * w)
    }

    pub fn omega(&self) -> &ScalarCurve<T> {
        &self.omega
    }

    /// First zero of `α` inside the span, if any.
    pub fn first_zero(&self) -> Option<T> {
        self.first_zero
    }

    /// End of the default reduction interval: 90% of the way to the first
    /// zero of `α`, or the end of the span.
    pub fn validity_end(&self) -> T {
        let (t0, t1) = self.span();
        match self.first_zero {
            Some(z) => t0 + T::lit(0.9) * (z - t0),
            None => t1,
        }
    }

    fn locate_first_zero(&self) -> Result<Option<T>> {
        let nodes = &self.trajectory.nodes;
        for w in nodes.windows(2) {
            if w[1].y[0] > T::zero() {
                continue;
            }
            let (mut lo, mut hi) = (w[0].t, w[1].t);
            for _ in 0..200 {
                let mid = T::lit(0.5) * (lo + hi);
                if !(mid > lo && mid < hi) {
                    break;
                }
                if self.eval(mid)?.0 > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(hi));
        }
        Ok(None)
    }

    fn check(&self, t: T) -> Result<()> {
        if let Some(z) = self.first_zero {
            if t >= z {
                return Err(Error::ZeroCrossing {
                    t: z.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// Point of `SL(2,ℝ)/H`, `H = {exp(s a₁)}`, in the chart of lower triangular
/// matrices `[[α, 0], [γ, 1/α]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousPoint<T> {
    pub alpha: T,
    pub gamma: T,
}

impl<T: Real> HomogeneousPoint<T> {
    pub fn new(alpha: T, gamma: T) -> Result<Self> {
        if alpha == T::zero() || !alpha.is_finite() || !gamma.is_finite() {
            return Err(Error::OutsideDomain {
                t: T::nan().to_f64_lossy(),
                reason: "chart needs a finite, nonzero alpha".into(),
            });
        }
        Ok(HomogeneousPoint { alpha, gamma })
    }

    pub fn matrix(&self) -> Mat<T> {
        Mat::from_rows(&[[self.alpha, T::zero()], [self.gamma, T::one() / self.alpha]])
    }
}

/// `ḡ(t) = exp(-α α̇ ρ(a₃)) exp(2 log α ρ(a₂)) = [[1/α, 0], [-α̇, α]]` in the
/// `sl2` representation, built from an oscillator solution.
#[derive(Clone, Debug)]
pub struct Sl2Gauge<T> {
    osc: Arc<OscillatorSolution<T>>,
}

impl<T: Real> Sl2Gauge<T> {
    pub fn new(osc: Arc<OscillatorSolution<T>>) -> Self {
        Sl2Gauge { osc }
    }

    /// The same gauge as an explicit product of one-parameter subgroups.
    pub fn factorized(&self) -> Result<FactorizedGauge<T>> {
        let rep = sl2_rep()?;
        let (o1, o2) = (self.osc.clone(), self.osc.clone());
        let (lo, _) = self.domain();
        Ok(FactorizedGauge::new(rep)
            .factor(2, move |t| {
                o1.check(t)?;
                let (a, da) = o1.eval(t)?;
                Ok((-a * da, -(da * da - o1.omega_sq(t)? * a * a)))
            })?
            .factor(1, move |t| {
                o2.check(t)?;
                let (a, da) = o2.eval(t)?;
                Ok((T::lit(2.0) * a.ln(), T::lit(2.0) * da / a))
            })?
            .with_domain(lo, self.osc.first_zero().unwrap_or(self.osc.span().1)))
    }
}

fn sl2_rep<T: Real>() -> Result<MatrixRep<T>> {
    builtin_algebra::<T>("sl2")?
        .rep
        .ok_or_else(|| Error::RepresentationUnavailable("sl2".into()))
}

impl<T: Real> GaugeCurve<T> for Sl2Gauge<T> {
    fn size(&self) -> usize {
        2
    }

    fn eval(&self, t: T) -> Result<Mat<T>> {
        self.osc.check(t)?;
        let (a, da) = self.osc.eval(t)?;
        Ok(Mat::from_rows(&[[T::one() / a, T::zero()], [-da, a]]))
    }

    fn derivative(&self, t: T) -> Option<Result<Mat<T>>> {
        Some((|| {
            self.osc.check(t)?;
            let (a, da) = self.osc.eval(t)?;
            let dda = -self.osc.omega_sq(t)? * a;
            Ok(Mat::from_rows(&[[-da / (a * a), T::zero()], [-dda, da]]))
        })())
    }

    fn domain(&self) -> (T, T) {
        let (lo, hi) = self.osc.span();
        (lo, self.osc.first_zero().unwrap_or(hi))
    }
}

/// Reduction of the `sl2` system `b = (1, 0, Ω²)` (unit-mass oscillator) to
/// the subgroup generated by `a₁`.
///
/// The gauge [`Sl2Gauge`] maps the curve to `a′(t) = -(1/α²) a₁`, i.e. the
/// free Hamiltonian `P²/(2α²)`, and the solution is recovered as
/// `g(t) = g̃(t) h(t)` with `g̃ = ḡ⁻¹` and `h(t) = exp(-(∫1/α²) ρ(a₁))`.
#[derive(Clone)]
pub struct Sl2Reduction<T> {
    osc: Arc<OscillatorSolution<T>>,
    rep: MatrixRep<T>,
    gauge: Arc<Sl2Gauge<T>>,
    inv_alpha_sq: Arc<CumulativeIntegral<T>>,
}

impl<T: Real> fmt::Debug for Sl2Reduction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sl2Reduction")
            .field("span", &self.osc.span())
            .field("validity_end", &self.osc.validity_end())
            .finish_non_exhaustive()
    }
}

/// Builds the reduction on `[t₀, validity_end]` of the oscillator solution.
pub fn sl2_reduce<T: Real>(osc: Arc<OscillatorSolution<T>>) -> Result<Sl2Reduction<T>> {
    let rep = sl2_rep()?;
    let (t0, _) = osc.span();
    let end = osc.validity_end();
    let o = osc.clone();
    let inv_alpha_sq = CumulativeIntegral::new(
        move |t| {
            let (a, _) = o.eval(t)?;
            Ok(T::one() / (a * a))
        },
        t0,
        end,
        &QuadOptions {
            abs_tol: T::lit(1e-13),
            rel_tol: T::lit(1e-13),
            max_panels: 4000,
        },
    )?;
    Ok(Sl2Reduction {
        gauge: Arc::new(Sl2Gauge::new(osc.clone())),
        osc,
        rep,
        inv_alpha_sq: Arc::new(inv_alpha_sq),
    })
}

impl<T: Real> Sl2Reduction<T> {
    pub fn oscillator(&self) -> &OscillatorSolution<T> {
        &self.osc
    }

    pub fn rep(&self) -> &MatrixRep<T> {
        &self.rep
    }

    pub fn gauge(&self) -> Arc<Sl2Gauge<T>> {
        self.gauge.clone()
    }

    /// Interval on which the reduction is evaluated.
    pub fn interval(&self) -> (T, T) {
        (self.osc.span().0, self.osc.validity_end())
    }

    /// Coefficients `b = (1, 0, Ω²)` of the original system.
    pub fn system(&self) -> Arc<dyn CoefficientSource<T>> {
        let w = self.osc.omega().clone();
        Arc::new(crate::curve::FnCoefficients::new(
            3,
            vec![0, 2],
            move |t, out: &mut [T]| {
                let w = w.eval(t)?;
                out[0] = T::one();
                out[2] = w * w;
                Ok(())
            },
        ))
    }

    /// `a′(t)` computed by [`transform_curve`].
    pub fn reduced_curve(&self, t: T) -> Result<AlgebraElement<T>> {
        let a = system_curve(self.system());
        transform_curve(&self.rep, a.as_ref(), self.gauge.as_ref(), t)
    }

    /// Coefficient `1/α²` of the reduced Hamiltonian `P²/(2α²)`.
    pub fn reduced_coefficient(&self, t: T) -> Result<T> {
        self.osc.check(t)?;
        let (a, _) = self.osc.eval(t)?;
        Ok(T::one() / (a * a))
    }

    pub fn homogeneous_point(&self, t: T) -> Result<HomogeneousPoint<T>> {
        self.osc.check(t)?;
        let (a, da) = self.osc.eval(t)?;
        HomogeneousPoint::new(a, da)
    }

    /// `∫_{t₀}^t 1/α²`.
    pub fn reduced_coordinate(&self, t: T) -> Result<T> {
        self.inv_alpha_sq.eval(t)
    }

    /// `g(t) = g̃(t) h(t)`.
    pub fn reconstruct(&self, t: T) -> Result<Mat<T>> {
        let g_tilde = self.homogeneous_point(t)?.matrix();
        let h = self
            .rep
            .generator(0)
            .scale(-self.reduced_coordinate(t)?)
            .expm()?;
        Ok(&g_tilde * &h)
    }
}

/// Residual of the projected equation on `SL(2,ℝ)/H` for `g̃ = ḡ⁻¹`.
///
/// The first column `(α, γ)` of `g̃` is invariant under the right action of
/// `H`; it solves the projected system
/// `α̇ = b₁ γ + ½ b₂ α`, `γ̇ = -b₃ α - ½ b₂ γ` exactly when `ḡ` reduces the
/// system with coefficients `b` to `H`. Returns the larger of the two
/// residuals.
pub fn projected_equation_residual<T: Real, G: GaugeCurve<T> + ?Sized>(
    gauge: &G,
    b: &dyn CoefficientSource<T>,
    t: T,
) -> Result<T> {
    if gauge.size() != 2 || b.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: gauge.size(),
        });
    }
    let g_tilde = gauge.eval(t)?.inverse()?;
    let dg = gauge_derivative(gauge, t)?;
    let dg_tilde = -&(&(&g_tilde * &dg) * &g_tilde);
    let (alpha, gamma) = (g_tilde[(0, 0)], g_tilde[(1, 0)]);
    let (dalpha, dgamma) = (dg_tilde[(0, 0)], dg_tilde[(1, 0)]);
    let b = b.eval(t)?;
    let half = T::lit(0.5);
    let r1 = dalpha - (b[0] * gamma + half * b[1] * alpha);
    let r2 = dgamma + b[2] * alpha + half * b[1] * gamma;
    Ok(r1.abs().max(r2.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CoefficientCurve;
    use crate::wei_norman::{integrate, IntegrateOptions, Ordering};

    fn rep(name: &str) -> (LieAlgebra<f64>, MatrixRep<f64>) {
        let b = builtin_algebra::<f64>(name).unwrap();
        (b.algebra, b.rep.unwrap())
    }

    fn sinusoid(cos_amp: f64, sin_amp: f64) -> ScalarCurve<f64> {
        ScalarCurve::Sinusoid {
            offset: 0.0,
            cos_amp,
            sin_amp,
            omega: 1.0,
        }
    }

    #[test]
    fn identity_gauge_is_trivial() {
        let (_, rep) = rep("quadratic6");
        let a = CoefficientCurve::new(vec![
            sinusoid(1.0, 0.0),
            ScalarCurve::constant(0.3),
            ScalarCurve::zero(),
            ScalarCurve::constant(-2.0),
            sinusoid(0.0, 1.0),
            ScalarCurve::constant(1.0),
        ])
        .unwrap();
        let t = 0.7;
        let out = transform_curve(&rep, &a, &IdentityGauge { size: 4 }, t).unwrap();
        let expected = a.eval(t).unwrap();
        for k in 0..6 {
            assert!((out.coords[k] - expected[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn numeric_and_analytic_derivatives_agree() {
        let osc = Arc::new(oscillator_solve(&ScalarCurve::constant(1.0), (0.0, 1.5)).unwrap());
        let gauge = Sl2Gauge::new(osc);
        let numeric = FnGauge::new(2, {
            let g = gauge.clone();
            move |t| g.eval(t)
        })
        .with_domain(0.0, 1.5);
        for t in [0.0, 0.4, 1.2] {
            let a = gauge.derivative(t).unwrap().unwrap();
            let n = gauge_derivative(&numeric, t).unwrap();
            assert!((&a - &n).max_abs() < 1e-8, "t={t}");
        }
        let fact = gauge.factorized().unwrap();
        for t in [0.0, 0.4, 1.2] {
            assert!((&fact.eval(t).unwrap() - &gauge.eval(t).unwrap()).max_abs() < 1e-12);
            let d = fact.derivative(t).unwrap().unwrap();
            assert!((&d - &gauge.derivative(t).unwrap().unwrap()).max_abs() < 1e-10);
        }
    }

    #[test]
    fn oscillator_constant_frequency() {
        let osc = oscillator_solve(&ScalarCurve::constant(2.0), (0.0, 3.0)).unwrap();
        for i in 0..=30 {
            let t = 0.1 * i as f64;
            let (a, da) = osc.eval(t).unwrap();
            assert!((a - (2.0 * t).cos()).abs() < 1e-9);
            assert!((da + 2.0 * (2.0 * t).sin()).abs() < 1e-9);
        }
        let z = osc.first_zero().unwrap();
        assert!((z - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
        let free = oscillator_solve(&ScalarCurve::zero(), (0.0, 2.0)).unwrap();
        assert_eq!(free.eval(1.3).unwrap(), (1.0, 0.0));
        assert!(free.first_zero().is_none());
    }

    #[test]
    fn free_particle_reduction_is_trivial() {
        let osc = Arc::new(oscillator_solve(&ScalarCurve::zero(), (0.0, 2.0)).unwrap());
        let red = sl2_reduce(osc).unwrap();
        let a = red.reduced_curve(1.0).unwrap();
        assert_eq!(a.coords, vec![-1.0, 0.0, 0.0]);
        let system = red.system();
        assert_eq!(
            projected_equation_residual(
                &IdentityGauge { size: 2 },
                &*CoefficientCurve::<f64>::zero(3).into_source(),
                0.5
            )
            .unwrap(),
            0.0
        );
        assert!(
            projected_equation_residual(red.gauge().as_ref(), system.as_ref(), 1.0).unwrap()
                < 1e-12
        );
    }

    #[test]
    fn harmonic_reduction() {
        let osc = Arc::new(oscillator_solve(&ScalarCurve::constant(1.0), (0.0, 1.6)).unwrap());
        let red = sl2_reduce(osc).unwrap();
        assert!((red.interval().1 - 0.9 * std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        for i in 0..=20 {
            let t = red.interval().1 * i as f64 / 20.0;
            let a = red.reduced_curve(t).unwrap();
            let sec2 = 1.0 / t.cos().powi(2);
            assert!((a.coords[0] + sec2).abs() < 1e-8 * sec2);
            assert!(a.coords[1].abs() < 1e-10 && a.coords[2].abs() < 1e-10);
            let g = red.reconstruct(t).unwrap();
            let (s, c) = t.sin_cos();
            let exact = Mat::from_rows(&[[c, s], [-s, c]]);
            assert!((&g - &exact).max_abs() < 1e-9, "t={t}");
        }
        assert!(matches!(
            red.reconstruct(1.59),
            Err(Error::ZeroCrossing { .. }) | Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn random_gauge_is_not_a_reduction() {
        let b = CoefficientCurve::new(vec![
            ScalarCurve::constant(1.0),
            ScalarCurve::zero(),
            ScalarCurve::constant(1.0),
        ])
        .unwrap();
        let gauge = FnGauge::new(2, |t: f64| {
            Ok(Mat::from_rows(&[
                [1.0 + t * t, 0.0],
                [t, 1.0 / (1.0 + t * t)],
            ]))
        });
        assert!(projected_equation_residual(&gauge, &b, 0.8).unwrap() > 0.1);
    }

    #[test]
    fn heisenberg_interaction_picture() {
        let (alg, _) = rep("heisenberg3");
        let b = CoefficientCurve::sparse(
            3,
            vec![(0, ScalarCurve::constant(1.0)), (1, sinusoid(0.0, 1.0))],
        )
        .unwrap()
        .into_source();
        let ip = InteractionPicture::new(&alg, 0, b).unwrap();
        assert_eq!(ip.support(), vec![1, 2]);
        let t: f64 = 0.9;
        let a = ip.transformed_curve(t).unwrap();
        assert!(a.coords[0].abs() < 1e-15);
        assert!((a.coords[1] + t.sin()).abs() < 1e-15);
        assert!((a.coords[2] - t * t.sin()).abs() < 1e-14);
        let zero = CoefficientCurve::sparse(3, vec![(0, ScalarCurve::constant(1.0))])
            .unwrap()
            .into_source();
        assert!(interaction_picture(&alg, 0, zero, 2.0).unwrap().norm_inf() == 0.0);
    }

    #[test]
    fn interaction_picture_matches_gauge_law() {
        let (alg, rep) = rep("quadratic6");
        let b = CoefficientCurve::sparse(
            6,
            vec![
                (0, ScalarCurve::constant(1.0)),
                (2, sinusoid(0.5, 0.0)),
                (4, sinusoid(0.0, 1.0)),
            ],
        )
        .unwrap()
        .into_source();
        let ip = InteractionPicture::new(&alg, 0, b.clone()).unwrap();
        let gauge = ip.gauge(&rep);
        let a = system_curve(b);
        for t in [0.3, 1.1] {
            let law = transform_curve(&rep, a.as_ref(), &gauge, t).unwrap();
            let direct = ip.transformed_curve(t).unwrap();
            for k in 0..6 {
                assert!((law.coords[k] - direct.coords[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solution_gauges_curve_to_zero() {
        let (alg, rep) = rep("sl2");
        let b = CoefficientCurve::new(vec![
            ScalarCurve::constant(1.0),
            sinusoid(0.2, 0.0),
            ScalarCurve::constant(0.7),
        ])
        .unwrap()
        .into_source();
        let sol = integrate(
            &alg,
            &Ordering::natural(3),
            b.clone(),
            (0.0, 2.0),
            &IntegrateOptions::with_tol(1e-12),
        )
        .unwrap();
        let gauge = SolutionGauge::inverse_of(Arc::new(sol), rep.clone());
        let a = system_curve(b);
        for t in [0.0, 0.5, 1.7, 2.0] {
            let out = transform_curve(&rep, a.as_ref(), &gauge, t).unwrap();
            assert!(out.norm_inf() < 1e-7, "t={t}: {:?}", out.coords);
        }
    }
}
