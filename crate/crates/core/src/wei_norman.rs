//! Wei-Norman factorization of solutions of right-invariant group equations.
//!
//! For `ġ g⁻¹ = -Σ_α b_α(t) ρ(a_α)`, `g(0) = e`, the solution is written as
//! `g(t) = exp(-v_{σ1} a_{σ1}) ··· exp(-v_{σr} a_{σr})` and the coordinates
//! obey `M(v) v̇ = b`, where column `σk` of `M(v)` is
//! `exp(-v_{σ1} ad a_{σ1}) ··· exp(-v_{σ(k-1)} ad a_{σ(k-1)}) a_{σk}`.
//!
//! Second-kind coordinates are only local. When `M(v)` becomes
//! ill-conditioned the integration closes the current segment and restarts
//! with `v = 0`, and group elements are composed as `g = g_new · g_prev`.

use std::sync::Arc;

use crate::curve::CoefficientSource;
use crate::error::{Error, Result};
use crate::lie_core::{LieAlgebra, MatrixRep, Tolerances};
use crate::linalg::Mat;
use crate::ode::{self, Driver, Node, OdeOptions, OdeStats};
use crate::quadrature::{CumulativeIntegral, QuadOptions};
use crate::scalar::Real;

/// Order of the exponential factors in `g(t)` (0-based basis indices,
/// leftmost factor first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidOrdering(format!(
                    "{:?} is not a permutation of 1..={}",
                    perm.iter().map(|p| p + 1).collect::<Vec<_>>(),
                    perm.len()
                )));
            }
            seen[p] = true;
        }
        Ok(Ordering { perm })
    }

    /// Ordering from 1-based indices, e.g. `[4, 5, 6, 1, 2, 3]`.
    pub fn from_one_based(perm: &[usize]) -> Result<Self> {
        if perm.contains(&0) {
            return Err(Error::InvalidOrdering("indices are 1-based".into()));
        }
        Self::new(perm.iter().map(|p| p - 1).collect())
    }

    pub fn natural(dim: usize) -> Self {
        Ordering {
            perm: (0..dim).collect(),
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|p| p + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

/// The Wei-Norman system of an algebra under a fixed ordering.
#[derive(Clone, Debug)]
pub struct WnSystem<T> {
    algebra: LieAlgebra<T>,
    ordering: Ordering,
    ad: Vec<Mat<T>>,
    breakdown_condition: f64,
}

impl<T: Real> WnSystem<T> {
    pub fn new(algebra: &LieAlgebra<T>, ordering: &Ordering) -> Result<Self> {
        if ordering.len() != algebra.dim() {
            return Err(Error::OrderingMismatch(format!(
                "ordering of length {} for algebra `{}` of dimension {}",
                ordering.len(),
                algebra.name(),
                algebra.dim()
            )));
        }
        let ad = (0..algebra.dim())
            .map(|a| algebra.ad_matrix(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(WnSystem {
            algebra: algebra.clone(),
            ordering: ordering.clone(),
            ad,
            breakdown_condition: Tolerances::default().breakdown_condition,
        })
    }

    pub fn with_breakdown_condition(mut self, condition: f64) -> Self {
        self.breakdown_condition = condition;
        self
    }

    pub fn algebra(&self) -> &LieAlgebra<T> {
        &self.algebra
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn breakdown_condition(&self) -> f64 {
        self.breakdown_condition
    }

    fn check_len(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// The matrix `M(v)` of `M(v) v̇ = b`.
    pub fn matrix(&self, v: &[T]) -> Result<Mat<T>> {
        self.check_len(v)?;
        let r = self.dim();
        let mut m = Mat::zeros(r, r);
        let mut p = Mat::identity(r);
        for (k, &alpha) in self.ordering.perm.iter().enumerate() {
            m.set_column(alpha, &p.column(alpha));
            if k + 1 < r && v[alpha] != T::zero() {
                let e = self.ad[alpha].scale(-v[alpha]).expm()?;
                p = &p * &e;
            }
        }
        Ok(m)
    }

    /// `v̇ = M(v)⁻¹ b` together with the 1-norm condition number of `M(v)`.
    pub fn rhs_with_condition(&self, v: &[T], b: &[T]) -> Result<(Vec<T>, f64)> {
        self.check_len(b)?;
        let m = self.matrix(v)?;
        let lu = m.lu().map_err(|_| Error::ChartBreakdown {
            t: f64::NAN,
            condition: f64::INFINITY,
        })?;
        let r = self.dim();
        let mut inv_norm = T::zero();
        let mut e = vec![T::zero(); r];
        for j in 0..r {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = lu.solve(&e);
            inv_norm = inv_norm.max(col.iter().map(|x| x.abs()).sum());
        }
        let condition = (m.norm1() * inv_norm).to_f64_lossy();
        if !(condition <= self.breakdown_condition) {
            return Err(Error::ChartBreakdown {
                t: f64::NAN,
                condition,
            });
        }
        let vdot = lu.solve(b);
        if !vdot.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("Wei-Norman right-hand side"));
        }
        Ok((vdot, condition))
    }

    /// `v̇ = M(v)⁻¹ b`; fails with [`Error::ChartBreakdown`] when the chart
    /// degenerates.
    pub fn rhs(&self, v: &[T], b: &[T]) -> Result<Vec<T>> {
        Ok(self.rhs_with_condition(v, b)?.0)
    }

    /// Structural dependency pattern of `v̇` for coefficients supported on
    /// `support`: entry `[α][β]` is true when `v̇_α` depends on `v_β`.
    pub fn dependency_pattern(&self, support: &[usize]) -> Result<Vec<Vec<bool>>> {
        let r = self.dim();
        let mut dep = vec![vec![false; r]; r];
        // Generic probe points; the system is analytic in (v, b), so a
        // dependence that exists shows up at generic points.
        for probe in 0..3 {
            let gen = |i: usize, salt: f64| -> T {
                T::lit(
                    0.45 * ((i as f64 + 1.0) * 1.618_033_988_75 + salt + probe as f64 * 2.3).sin(),
                )
            };
            let v0: Vec<T> = (0..r).map(|i| gen(i, 0.3)).collect();
            let mut b = vec![T::zero(); r];
            for &s in support {
                b[s] = T::lit(0.5) + gen(s, 1.1).abs();
            }
            let base = self.rhs(&v0, &b)?;
            for beta in 0..r {
                let mut v1 = v0.clone();
                v1[beta] += T::lit(0.37);
                let moved = self.rhs(&v1, &b)?;
                for alpha in 0..r {
                    let scale = base[alpha].abs().max(moved[alpha].abs()).max(T::one());
                    if (moved[alpha] - base[alpha]).abs() > T::lit(1e3) * T::epsilon() * scale {
                        dep[alpha][beta] = true;
                    }
                }
            }
        }
        Ok(dep)
    }
}

/// `M(v)` for the given algebra and ordering.
pub fn wn_matrix<T: Real>(alg: &LieAlgebra<T>, ordering: &Ordering, v: &[T]) -> Result<Mat<T>> {
    WnSystem::new(alg, ordering)?.matrix(v)
}

/// `v̇ = M(v)⁻¹ b` for the given algebra and ordering.
pub fn wn_rhs<T: Real>(
    alg: &LieAlgebra<T>,
    ordering: &Ordering,
    v: &[T],
    b: &[T],
) -> Result<Vec<T>> {
    WnSystem::new(alg, ordering)?.rhs(v, b)
}

/// Hand-written right-hand side of the `quadratic6` system under the
/// ordering `(4, 5, 6, 1, 2, 3)`. Kept as an independent check of the generic
/// assembly.
pub fn wn_rhs_quadratic6_explicit<T: Real>(v: &[T; 6], b: &[T; 6]) -> [T; 6] {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    [
        b[0] + b[1] * v[0] + b[2] * v[0] * v[0],
        b[1] + two * b[2] * v[0],
        v[1].exp() * b[2],
        b[3] + half * b[1] * v[3] + b[0] * v[4],
        b[4] - b[2] * v[3] - half * b[1] * v[4],
        b[5] - b[4] * v[3] + half * b[2] * v[3] * v[3] - half * b[0] * v[4] * v[4],
    ]
}

/// Options for [`integrate`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Condition number of `M(v)` above which the chart is abandoned.
    pub breakdown_condition: f64,
    /// Times at which a new segment is started regardless of conditioning.
    pub forced_restarts: Vec<T>,
}

impl<T: Real> Default for IntegrateOptions<T> {
    fn default() -> Self {
        IntegrateOptions {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            max_steps: 1_000_000,
            breakdown_condition: Tolerances::default().breakdown_condition,
            forced_restarts: Vec::new(),
        }
    }
}

impl<T: Real> IntegrateOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        IntegrateOptions {
            rtol: tol,
            atol: tol * T::lit(1e-2),
            ..Self::default()
        }
    }

    fn ode_options(&self) -> OdeOptions<T> {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            h_init: None,
            h_max: None,
        }
    }
}

/// One chart of a solution: `v` restarts from zero at `t_start`.
#[derive(Clone, Debug)]
pub struct Segment<T> {
    pub t_start: T,
    pub t_end: T,
    pub nodes: Vec<Node<T>>,
}

impl<T: Real> Segment<T> {
    pub fn v_end(&self) -> &[T] {
        &self.nodes.last().unwrap().y
    }
}

#[derive(Clone, Debug)]
enum Trajectory<T> {
    Ode {
        segments: Vec<Segment<T>>,
        opts: OdeOptions<T>,
    },
    Quadrature {
        span: (T, T),
        components: Vec<Option<Arc<CumulativeIntegral<T>>>>,
    },
}

/// Solver statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub steps: OdeStats,
    /// Number of chart restarts (forced or due to breakdown).
    pub restarts: usize,
    /// Largest condition number of `M(v)` seen at accepted nodes.
    pub max_condition: f64,
}

/// Wei-Norman coordinates of a solution on a time span, with dense output.
#[derive(Clone, Debug)]
pub struct WeiNormanSolution<T> {
    system: Arc<WnSystem<T>>,
    curve: Arc<dyn CoefficientSource<T>>,
    trajectory: Trajectory<T>,
    diagnostics: Diagnostics,
}

/// Group in which the factors `exp(-v a_α)` can be evaluated and multiplied.
pub trait GroupRealization<T: Real> {
    type Element: Clone;

    fn algebra_dim(&self) -> usize;
    fn identity(&self) -> Self::Element;
    /// `exp(-v a_α)`.
    fn factor(&self, alpha: usize, v: T) -> Result<Self::Element>;
    /// `left · right`.
    fn compose(&self, left: &Self::Element, right: &Self::Element) -> Self::Element;
}

impl<T: Real> GroupRealization<T> for MatrixRep<T> {
    type Element = Mat<T>;

    fn algebra_dim(&self) -> usize {
        self.mats().len()
    }

    fn identity(&self) -> Mat<T> {
        Mat::identity(self.size())
    }

    fn factor(&self, alpha: usize, v: T) -> Result<Mat<T>> {
        if v == T::zero() {
            return Ok(Mat::identity(self.size()));
        }
        self.generator(alpha).scale(-v).expm()
    }

    fn compose(&self, left: &Mat<T>, right: &Mat<T>) -> Mat<T> {
        left * right
    }
}

impl<T: Real> WeiNormanSolution<T> {
    pub fn system(&self) -> &WnSystem<T> {
        &self.system
    }

    pub fn algebra(&self) -> &LieAlgebra<T> {
        self.system.algebra()
    }

    pub fn ordering(&self) -> &Ordering {
        self.system.ordering()
    }

    pub fn curve(&self) -> &Arc<dyn CoefficientSource<T>> {
        &self.curve
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn span(&self) -> (T, T) {
        match &self.trajectory {
            Trajectory::Ode { segments, .. } => {
                (segments[0].t_start, segments.last().unwrap().t_end)
            }
            Trajectory::Quadrature { span, .. } => *span,
        }
    }

    /// `(t_start, t_end)` of every chart segment.
    pub fn segments(&self) -> Vec<(T, T)> {
        match &self.trajectory {
            Trajectory::Ode { segments, .. } => {
                segments.iter().map(|s| (s.t_start, s.t_end)).collect()
            }
            Trajectory::Quadrature { span, .. } => vec![*span],
        }
    }

    /// Accepted integrator nodes (empty for quadrature solutions).
    pub fn node_times(&self) -> Vec<T> {
        match &self.trajectory {
            Trajectory::Ode { segments, .. } => segments
                .iter()
                .flat_map(|s| s.nodes.iter().map(|n| n.t))
                .collect(),
            Trajectory::Quadrature { .. } => Vec::new(),
        }
    }

    fn check_time(&self, t: T) -> Result<()> {
        let (a, b) = self.span();
        if !(t >= a && t <= b) {
            return Err(Error::OutsideDomain {
                t: t.to_f64_lossy(),
                reason: format!(
                    "solution covers [{}, {}]",
                    a.to_f64_lossy(),
                    b.to_f64_lossy()
                ),
            });
        }
        Ok(())
    }

    /// Index of the segment containing `t` (the later one at a boundary).
    pub fn segment_index(&self, t: T) -> Result<usize> {
        self.check_time(t)?;
        Ok(match &self.trajectory {
            Trajectory::Ode { segments, .. } => {
                let k = segments.partition_point(|s| s.t_start <= t);
                k.saturating_sub(1)
            }
            Trajectory::Quadrature { .. } => 0,
        })
    }

    /// Coordinates `v(t)` relative to the start of the segment containing `t`.
    pub fn v(&self, t: T) -> Result<Vec<T>> {
        let s = self.segment_index(t)?;
        self.v_in_segment(s, t)
    }

    fn v_in_segment(&self, s: usize, t: T) -> Result<Vec<T>> {
        match &self.trajectory {
            Trajectory::Ode { segments, opts } => {
                let mut f = wn_ode(&self.system, &self.curve);
                ode::eval_nodes(&segments[s].nodes, opts, &mut f, t).map_err(|e| at_time(e, t))
            }
            Trajectory::Quadrature { components, .. } => components
                .iter()
                .map(|c| match c {
                    Some(c) => c.eval(t),
                    None => Ok(T::zero()),
                })
                .collect(),
        }
    }

    /// `v` at each of the given times.
    pub fn sample(&self, times: &[T]) -> Result<Vec<Vec<T>>> {
        times.iter().map(|&t| self.v(t)).collect()
    }

    fn factor_product<R: GroupRealization<T>>(&self, real: &R, v: &[T]) -> Result<R::Element> {
        let mut g = real.identity();
        for &alpha in self.ordering().perm() {
            g = real.compose(&g, &real.factor(alpha, v[alpha])?);
        }
        Ok(g)
    }

    /// Group element `g(t)` in the given realization.
    pub fn reconstruct<R: GroupRealization<T>>(&self, real: &R, t: T) -> Result<R::Element> {
        if real.algebra_dim() != self.algebra().dim() {
            return Err(Error::RepresentationUnavailable(format!(
                "realization of a {}-dimensional algebra used for `{}`",
                real.algebra_dim(),
                self.algebra().name()
            )));
        }
        let mut accumulated = real.identity();
        for v in self.factor_chain(t)? {
            accumulated = real.compose(&self.factor_product(real, &v)?, &accumulated);
        }
        Ok(accumulated)
    }

    /// Coordinates of the chart products whose composition is `g(t)`, in the
    /// order they act: the end points of the completed segments first, the
    /// segment-local `v(t)` last. `g(t) = G_last ⋯ G_first`.
    pub fn factor_chain(&self, t: T) -> Result<Vec<Vec<T>>> {
        let s = self.segment_index(t)?;
        let mut chain = Vec::with_capacity(s + 1);
        if let Trajectory::Ode { segments, .. } = &self.trajectory {
            chain.extend(segments[..s].iter().map(|seg| seg.v_end().to_vec()));
        }
        chain.push(self.v_in_segment(s, t)?);
        Ok(chain)
    }
}

fn at_time(e: Error, t: impl Real) -> Error {
    match e {
        Error::ChartBreakdown { condition, .. } => Error::ChartBreakdown {
            t: t.to_f64_lossy(),
            condition,
        },
        other => other,
    }
}

fn wn_ode<'a, T: Real>(
    system: &'a WnSystem<T>,
    curve: &'a Arc<dyn CoefficientSource<T>>,
) -> impl FnMut(T, &[T], &mut [T]) -> Result<()> + 'a {
    let mut b = vec![T::zero(); system.dim()];
    move |t, v, dv| {
        curve.eval_into(t, &mut b)?;
        let vdot = system.rhs(v, &b).map_err(|e| at_time(e, t))?;
        dv.copy_from_slice(&vdot);
        Ok(())
    }
}

fn check_curve<T: Real>(alg: &LieAlgebra<T>, curve: &dyn CoefficientSource<T>) -> Result<()> {
    if curve.dim() != alg.dim() {
        return Err(Error::DimensionMismatch {
            expected: alg.dim(),
            got: curve.dim(),
        });
    }
    Ok(())
}

fn check_span<T: Real>(span: (T, T)) -> Result<()> {
    if !(span.1 >= span.0) || !span.0.is_finite() || !span.1.is_finite() {
        return Err(Error::OutsideDomain {
            t: span.1.to_f64_lossy(),
            reason: "time span must be finite and increasing".into(),
        });
    }
    Ok(())
}

/// Integrates the Wei-Norman system with adaptive Dormand-Prince steps,
/// restarting the chart whenever `M(v)` becomes ill-conditioned.
pub fn integrate<T: Real>(
    alg: &LieAlgebra<T>,
    ordering: &Ordering,
    curve: Arc<dyn CoefficientSource<T>>,
    span: (T, T),
    opts: &IntegrateOptions<T>,
) -> Result<WeiNormanSolution<T>> {
    check_curve(alg, curve.as_ref())?;
    check_span(span)?;
    let system =
        Arc::new(WnSystem::new(alg, ordering)?.with_breakdown_condition(opts.breakdown_condition));
    let ode_opts = opts.ode_options();
    let r = alg.dim();

    let mut stops: Vec<T> = opts
        .forced_restarts
        .iter()
        .copied()
        .filter(|&t| t > span.0 && t < span.1)
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    stops.push(span.1);

    let mut segments: Vec<Segment<T>> = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut t = span.0;
    let mut h_hint = None;
    let mut max_condition = 1.0f64;
    for &stop in &stops {
        while t < stop {
            let mut driver = Driver::new(ode_opts);
            let outcome = {
                let mut b = vec![T::zero(); r];
                let mut f = |tt: T, v: &[T], dv: &mut [T]| -> Result<()> {
                    curve.eval_into(tt, &mut b)?;
                    let (vdot, cond) = system
                        .rhs_with_condition(v, &b)
                        .map_err(|e| at_time(e, tt))?;
                    max_condition = max_condition.max(cond);
                    dv.copy_from_slice(&vdot);
                    Ok(())
                };
                driver.run(&mut f, t, &vec![T::zero(); r], stop, h_hint, |e| {
                    matches!(e, Error::ChartBreakdown { .. })
                })
            };
            diagnostics.steps.accepted += driver.stats.accepted;
            diagnostics.steps.rejected += driver.stats.rejected;
            diagnostics.steps.rhs_evals += driver.stats.rhs_evals;
            match outcome {
                Ok((nodes, h)) => {
                    h_hint = Some(h);
                    segments.push(Segment {
                        t_start: t,
                        t_end: stop,
                        nodes,
                    });
                    t = stop;
                }
                Err(interrupted) => {
                    let breakdown = matches!(interrupted.error, Error::ChartBreakdown { .. });
                    if !breakdown || interrupted.nodes.len() < 2 {
                        return Err(interrupted.error);
                    }
                    let t_end = interrupted.nodes.last().unwrap().t;
                    h_hint = Some(interrupted.last_h);
                    segments.push(Segment {
                        t_start: t,
                        t_end,
                        nodes: interrupted.nodes,
                    });
                    t = t_end;
                }
            }
        }
    }
    if segments.is_empty() {
        // Degenerate span: a single node at the start.
        let mut b = vec![T::zero(); r];
        curve.eval_into(span.0, &mut b)?;
        segments.push(Segment {
            t_start: span.0,
            t_end: span.0,
            nodes: vec![Node {
                t: span.0,
                y: vec![T::zero(); r],
                dy: b,
            }],
        });
    }
    diagnostics.restarts = segments.len() - 1;
    diagnostics.max_condition = max_condition;
    Ok(WeiNormanSolution {
        system,
        curve,
        trajectory: Trajectory::Ode {
            segments,
            opts: ode_opts,
        },
        diagnostics,
    })
}

/// Solves a triangular Wei-Norman system by nested adaptive quadratures.
///
/// The dependency pattern of `v̇` on `v` (for the coefficient components that
/// are structurally nonzero) must be acyclic; the components are then
/// integrated in topological order.
pub fn solve_by_quadrature<T: Real>(
    alg: &LieAlgebra<T>,
    ordering: &Ordering,
    curve: Arc<dyn CoefficientSource<T>>,
    span: (T, T),
    opts: &QuadOptions<T>,
) -> Result<WeiNormanSolution<T>> {
    check_curve(alg, curve.as_ref())?;
    check_span(span)?;
    let system = Arc::new(WnSystem::new(alg, ordering)?);
    let r = alg.dim();
    let support = curve.support();
    let dep = system.dependency_pattern(&support)?;

    for (alpha, row) in dep.iter().enumerate() {
        if row[alpha] {
            return Err(Error::NotTriangular(format!(
                "v{} depends on itself",
                alpha + 1
            )));
        }
    }
    // Kahn's algorithm on "α depends on β" edges.
    let mut remaining: Vec<usize> = (0..r)
        .map(|a| dep[a].iter().filter(|&&d| d).count())
        .collect();
    let mut order = Vec::with_capacity(r);
    let mut done = vec![false; r];
    while order.len() < r {
        let next = (0..r).find(|&a| !done[a] && remaining[a] == 0);
        let Some(a) = next else {
            let cyclic: Vec<usize> = (0..r).filter(|&a| !done[a]).map(|a| a + 1).collect();
            return Err(Error::NotTriangular(format!(
                "coupled components {cyclic:?}"
            )));
        };
        done[a] = true;
        order.push(a);
        for (g, row) in dep.iter().enumerate() {
            if row[a] {
                remaining[g] -= 1;
            }
        }
    }

    let mut components: Vec<Option<Arc<CumulativeIntegral<T>>>> = vec![None; r];
    for &alpha in &order {
        let deps: Vec<(usize, Arc<CumulativeIntegral<T>>)> = (0..r)
            .filter(|&b| dep[alpha][b])
            .map(|b| {
                (
                    b,
                    components[b]
                        .clone()
                        .expect("dependencies are integrated first"),
                )
            })
            .collect();
        let system = system.clone();
        let curve = curve.clone();
        let integrand = move |t: T| -> Result<T> {
            let mut v = vec![T::zero(); r];
            for (b, c) in &deps {
                v[*b] = c.eval(t)?;
            }
            let b = curve.eval(t)?;
            Ok(system.rhs(&v, &b).map_err(|e| at_time(e, t))?[alpha])
        };
        components[alpha] = Some(Arc::new(CumulativeIntegral::new(
            integrand, span.0, span.1, opts,
        )?));
    }
    Ok(WeiNormanSolution {
        system,
        curve,
        trajectory: Trajectory::Quadrature { span, components },
        diagnostics: Diagnostics::default(),
    })
}

/// Frobenius norm of `ġ g⁻¹ + Σ_α b_α(t) ρ(a_α)` with `ġ` from central
/// differences of step `h`.
pub fn group_equation_residual<T: Real>(
    sol: &WeiNormanSolution<T>,
    rep: &MatrixRep<T>,
    t: T,
    h: T,
) -> Result<T> {
    let g = sol.reconstruct(rep, t)?;
    let gp = sol.reconstruct(rep, t + h)?;
    let gm = sol.reconstruct(rep, t - h)?;
    let gdot = (&gp - &gm).scale(T::one() / (T::lit(2.0) * h));
    let ginv = g.inverse()?;
    let b = sol.curve().eval(t)?;
    let mut res = &gdot * &ginv;
    for (alpha, &c) in b.iter().enumerate() {
        res = &res + &rep.generator(alpha).scale(c);
    }
    Ok(res.frobenius_norm())
}

/// Constants of motion `(I₁, I₂)` of the classical particle in a linear
/// potential: `g(t)⁻¹ (x, p, 1)` recovers the initial `(x₀, p₀)`, returned
/// as `(p₀, x₀)`.
pub fn constants_of_motion_heisenberg<T: Real>(
    sol: &WeiNormanSolution<T>,
    rep: &MatrixRep<T>,
    x: T,
    p: T,
    t: T,
) -> Result<(T, T)> {
    if rep.size() != 3 || sol.algebra().dim() != 3 {
        return Err(Error::RepresentationUnavailable(
            "constants of motion need the 3x3 heisenberg3 representation".into(),
        ));
    }
    let g = sol.reconstruct(rep, t)?;
    let z = g.solve(&[x, p, T::one()])?;
    Ok((z[1], z[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CoefficientCurve, ScalarCurve};
    use crate::lie_core::builtin_algebra;

    fn constant_curve(values: &[f64]) -> Arc<dyn CoefficientSource<f64>> {
        CoefficientCurve::new(values.iter().map(|&v| ScalarCurve::constant(v)).collect())
            .unwrap()
            .into_source()
    }

    #[test]
    fn ordering_validation() {
        assert!(Ordering::from_one_based(&[3, 2, 1]).is_ok());
        assert!(Ordering::from_one_based(&[1, 1, 2]).is_err());
        assert!(Ordering::from_one_based(&[0, 1, 2]).is_err());
        assert_eq!(
            Ordering::from_one_based(&[4, 5, 6, 1, 2, 3])
                .unwrap()
                .perm(),
            &[3, 4, 5, 0, 1, 2]
        );
    }

    #[test]
    fn matrix_at_zero_is_identity() {
        let q = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
        let o = Ordering::from_one_based(&[4, 5, 6, 1, 2, 3]).unwrap();
        assert_eq!(wn_matrix(&q, &o, &[0.0; 6]).unwrap(), Mat::identity(6));
        let a = LieAlgebra::<f64>::abelian(3);
        assert_eq!(
            wn_matrix(&a, &Ordering::natural(3), &[1.0, -2.0, 3.0]).unwrap(),
            Mat::identity(3)
        );
    }

    #[test]
    fn heisenberg3_system() {
        let h = builtin_algebra::<f64>("heisenberg3").unwrap().algebra;
        let o = Ordering::from_one_based(&[3, 2, 1]).unwrap();
        let v = [0.7, -1.3, 0.4];
        let b = [0.5, 2.0, -1.0];
        let vd = wn_rhs(&h, &o, &v, &b).unwrap();
        assert!((vd[0] - b[0]).abs() < 1e-15);
        assert!((vd[1] - b[1]).abs() < 1e-15);
        assert!((vd[2] - vd[0] * v[1] - b[2]).abs() < 1e-14);
    }

    #[test]
    fn quadratic6_explicit_examples() {
        let q = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
        let o = Ordering::from_one_based(&[4, 5, 6, 1, 2, 3]).unwrap();
        let v = [1.0, 0.3, 0.0, 0.8, 0.0, 0.0];
        let b = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let e = wn_rhs_quadratic6_explicit(&v, &b);
        assert_eq!(e[0], 1.0);
        assert_eq!(e[1], 2.0);
        assert_eq!(e[2], 0.3f64.exp());
        assert_eq!(e[4], -0.8);
        assert!((e[5] - 0.32).abs() < 1e-15);
        let g = wn_rhs(&q, &o, &v, &b).unwrap();
        for i in 0..6 {
            assert!((g[i] - e[i]).abs() < 1e-13, "{i}");
        }
        let v = [0.0, 0.9, 0.2, 0.0, 0.0, 0.0];
        let b = [0.3, 0.7, 1.1, -0.2, 0.4, 0.5];
        let g = wn_rhs(&q, &o, &v, &b).unwrap();
        assert!((g[1] - b[1]).abs() < 1e-14);
        assert!((g[2] - 0.9f64.exp() * b[2]).abs() < 1e-14);
        assert_eq!(wn_rhs(&q, &o, &[0.0; 6], &b).unwrap(), b.to_vec());
    }

    #[test]
    fn breakdown_detected() {
        let s = builtin_algebra::<f64>("sl2").unwrap().algebra;
        let sys = WnSystem::new(&s, &Ordering::natural(3))
            .unwrap()
            .with_breakdown_condition(1e3);
        let err = sys.rhs(&[200.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ChartBreakdown { .. }));
    }

    #[test]
    fn heisenberg3_constant_force() {
        let b = builtin_algebra::<f64>("heisenberg3").unwrap();
        let o = Ordering::from_one_based(&[3, 2, 1]).unwrap();
        let curve = constant_curve(&[1.0, -2.0, 0.0]);
        let sol = integrate(
            &b.algebra,
            &o,
            curve,
            (0.0, 1.0),
            &IntegrateOptions::default(),
        )
        .unwrap();
        let v = sol.v(1.0).unwrap();
        for (x, e) in v.iter().zip([1.0, -2.0, -1.0]) {
            assert!((x - e).abs() < 1e-12, "{v:?}");
        }
        let rep = b.rep.unwrap();
        let g = sol.reconstruct(&rep, 1.0).unwrap();
        let expected = Mat::from_rows(&[[1.0, 1.0, -1.0], [0.0, 1.0, -2.0], [0.0, 0.0, 1.0]]);
        assert!((&g - &expected).max_abs() < 1e-12);
        assert!(group_equation_residual(&sol, &rep, 0.5, 1e-5).unwrap() < 1e-7);
        let (i1, i2) = constants_of_motion_heisenberg(&sol, &rep, 0.0, 0.0, 0.0).unwrap();
        assert_eq!((i1, i2), (0.0, 0.0));
    }

    #[test]
    fn zero_curve_stays_at_zero() {
        let q = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
        let o = Ordering::from_one_based(&[4, 5, 6, 1, 2, 3]).unwrap();
        let sol = integrate(
            &q,
            &o,
            constant_curve(&[0.0; 6]),
            (0.0, 2.0),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.segments().len(), 1);
        assert_eq!(sol.v(1.3).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn quadrature_detects_coupling() {
        let q = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
        let o = Ordering::from_one_based(&[4, 5, 6, 1, 2, 3]).unwrap();
        let err = solve_by_quadrature(
            &q,
            &o,
            constant_curve(&[1.0, 0.0, 0.5, 0.0, 0.0, 0.0]),
            (0.0, 1.0),
            &QuadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotTriangular(_)), "{err:?}");
    }

    #[test]
    fn quadrature_matches_integration_on_heisenberg3() {
        let h = builtin_algebra::<f64>("heisenberg3").unwrap().algebra;
        let o = Ordering::from_one_based(&[3, 2, 1]).unwrap();
        let curve = CoefficientCurve::new(vec![
            ScalarCurve::constant(1.0),
            ScalarCurve::CosineAffine {
                q: -1.0,
                eps0: 0.5,
                eps: 1.0,
                omega: 2.0,
            },
            ScalarCurve::zero(),
        ])
        .unwrap()
        .into_source();
        let a = integrate(
            &h,
            &o,
            curve.clone(),
            (0.0, 3.0),
            &IntegrateOptions::default(),
        )
        .unwrap();
        let b = solve_by_quadrature(&h, &o, curve, (0.0, 3.0), &QuadOptions::default()).unwrap();
        for i in 0..=30 {
            let t = i as f64 * 0.1;
            let (x, y) = (a.v(t).unwrap(), b.v(t).unwrap());
            for k in 0..3 {
                assert!((x[k] - y[k]).abs() < 1e-9, "t={t} k={k}");
            }
        }
    }
}
