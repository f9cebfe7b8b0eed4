//! Adaptive Dormand-Prince 5(4) integrator.
//!
//! The driver records every accepted node together with the derivative there.
//! Values between nodes are produced by taking one fresh 5th-order step from
//! the preceding node, so interpolated trajectories keep the full accuracy of
//! the integrator and are smooth between nodes (finite differences of dense
//! output stay meaningful).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerances and limits for [`solve`] and [`Driver`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Initial step; estimated from the problem when `None`.
    pub h_init: Option<T>,
    /// Largest allowed step; unbounded when `None`.
    pub h_max: Option<T>,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            max_steps: 1_000_000,
            h_init: None,
            h_max: None,
        }
    }
}

/// Accepted integration node: time, state and derivative at that state.
#[derive(Clone, Debug, PartialEq)]
pub struct Node<T> {
    pub t: T,
    pub y: Vec<T>,
    pub dy: Vec<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Result of a single trial step.
#[derive(Clone, Debug)]
pub struct Step<T> {
    pub y: Vec<T>,
    pub dy: Vec<T>,
    /// Scaled RMS error estimate; the step is acceptable when `<= 1`.
    pub error: T,
}

/// Takes one Dormand-Prince step of size `h` from `(t, y)` with `dy = f(t, y)`.
pub fn step<T, F>(f: &mut F, t: T, y: &[T], dy: &[T], h: T, opts: &OdeOptions<T>) -> Result<Step<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let n = y.len();
    let mut k: Vec<Vec<T>> = Vec::with_capacity(7);
    k.push(dy.to_vec());
    let mut stage = vec![T::zero(); n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = T::zero();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    acc += T::lit(a) * kj[i];
                }
            }
            stage[i] = y[i] + h * acc;
        }
        let mut ks = vec![T::zero(); n];
        f(t + T::lit(C[s]) * h, &stage, &mut ks)?;
        k.push(ks);
    }
    // The last stage is evaluated at the 5th-order solution (FSAL).
    let y_new = stage;
    let mut err_sq = T::zero();
    for i in 0..n {
        let mut e = T::zero();
        for (j, kj) in k.iter().enumerate() {
            e += T::lit(E[j]) * kj[i];
        }
        let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        let r = h * e / sc;
        err_sq += r * r;
    }
    let error = if n == 0 {
        T::zero()
    } else {
        (err_sq / T::from_usize(n).unwrap()).sqrt()
    };
    let dy_new = k.pop().unwrap();
    if !y_new.iter().chain(&dy_new).all(|v| v.is_finite()) {
        return Ok(Step {
            y: y_new,
            dy: dy_new,
            error: T::infinity(),
        });
    }
    Ok(Step {
        y: y_new,
        dy: dy_new,
        error,
    })
}

/// Hairer-Wanner starting step heuristic.
fn initial_step<T, F>(
    f: &mut F,
    t: T,
    y: &[T],
    dy: &[T],
    span: T,
    opts: &OdeOptions<T>,
) -> Result<T>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let n = T::from_usize(y.len().max(1)).unwrap();
    let scale = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let d0 = (y
        .iter()
        .enumerate()
        .map(|(i, v)| (*v / scale(i)).powi(2))
        .sum::<T>()
        / n)
        .sqrt();
    let d1 = (dy
        .iter()
        .enumerate()
        .map(|(i, v)| (*v / scale(i)).powi(2))
        .sum::<T>()
        / n)
        .sqrt();
    let tiny = T::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    h0 = h0.min(span);
    let y1: Vec<T> = y.iter().zip(dy).map(|(a, b)| *a + h0 * *b).collect();
    let mut dy1 = vec![T::zero(); y.len()];
    f(t + h0, &y1, &mut dy1)?;
    let d2 = (dy1
        .iter()
        .zip(dy)
        .enumerate()
        .map(|(i, (a, b))| ((*a - *b) / scale(i)).powi(2))
        .sum::<T>()
        / n)
        .sqrt()
        / h0;
    let m = d1.max(d2);
    let h1 = if m <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / m).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h0).min(h1).min(span))
}

/// Why [`Driver::run`] stopped before reaching the end time.
#[derive(Debug)]
pub struct Interrupted<T> {
    pub error: Error,
    pub nodes: Vec<Node<T>>,
    pub last_h: T,
}

/// Step-size controller and node recorder shared by the solvers.
pub struct Driver<T> {
    pub opts: OdeOptions<T>,
    pub stats: OdeStats,
    /// Step-size reductions allowed per run when the right-hand side fails
    /// with a recoverable error; the budget is not replenished by accepted
    /// steps, so creeping up to the edge of the admissible region ends.
    pub recoverable_retries: usize,
}

impl<T: Real> Driver<T> {
    pub fn new(opts: OdeOptions<T>) -> Self {
        Driver {
            opts,
            stats: OdeStats::default(),
            recoverable_retries: 8,
        }
    }

    /// Integrates from `(t0, y0)` to `t_end` (which must be `>= t0`).
    ///
    /// Errors from `f` for which `recoverable` returns true are treated like
    /// rejected steps; if shrinking the step does not help, integration stops
    /// and the nodes accepted so far are returned with the error.
    pub fn run<F>(
        &mut self,
        f: &mut F,
        t0: T,
        y0: &[T],
        t_end: T,
        h_hint: Option<T>,
        recoverable: impl Fn(&Error) -> bool,
    ) -> std::result::Result<(Vec<Node<T>>, T), Interrupted<T>>
    where
        F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    {
        let mut dy0 = vec![T::zero(); y0.len()];
        if let Err(error) = f(t0, y0, &mut dy0) {
            return Err(Interrupted {
                error,
                nodes: Vec::new(),
                last_h: T::zero(),
            });
        }
        self.stats.rhs_evals += 1;
        let mut nodes = vec![Node {
            t: t0,
            y: y0.to_vec(),
            dy: dy0,
        }];
        let span = t_end - t0;
        if span <= T::zero() {
            return Ok((nodes, h_hint.unwrap_or(T::zero())));
        }
        let mut h = match h_hint.or(self.opts.h_init) {
            Some(h) => h,
            None => {
                let n0 = &nodes[0];
                match initial_step(f, t0, &n0.y, &n0.dy, span, &self.opts) {
                    Ok(h) => h,
                    Err(error) if recoverable(&error) => span * T::lit(1e-6),
                    Err(error) => {
                        return Err(Interrupted {
                            error,
                            nodes,
                            last_h: T::zero(),
                        })
                    }
                }
            }
        };
        if let Some(hm) = self.opts.h_max {
            h = h.min(hm);
        }
        let mut failures = 0usize;
        let mut steps = 0usize;
        loop {
            let node = nodes.last().unwrap();
            let t = node.t;
            if t >= t_end {
                return Ok((nodes, h));
            }
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(Interrupted {
                    error: Error::StepSizeUnderflow {
                        t: t.to_f64_lossy(),
                        h: h.to_f64_lossy(),
                    },
                    nodes,
                    last_h: h,
                });
            }
            let h_floor = T::lit(64.0) * T::epsilon() * t.abs().max(span);
            if h < h_floor {
                return Err(Interrupted {
                    error: Error::StepSizeUnderflow {
                        t: t.to_f64_lossy(),
                        h: h.to_f64_lossy(),
                    },
                    nodes,
                    last_h: h,
                });
            }
            let remaining = t_end - t;
            let last = h >= remaining * T::lit(1.0 - 1e-12);
            let h_try = if last { remaining } else { h };
            let outcome = step(f, t, &node.y, &node.dy, h_try, &self.opts);
            self.stats.rhs_evals += 6;
            match outcome {
                Ok(s) if s.error <= T::one() => {
                    self.stats.accepted += 1;
                    let t_new = if last { t_end } else { t + h_try };
                    let fac = if s.error == T::zero() {
                        T::lit(5.0)
                    } else {
                        (T::lit(0.9) * s.error.powf(T::lit(-0.2)))
                            .min(T::lit(5.0))
                            .max(T::lit(0.2))
                    };
                    // Keep the regular step size when the last step was clipped.
                    h = if last {
                        h.max(h_try * fac)
                    } else {
                        h_try * fac
                    };
                    if let Some(hm) = self.opts.h_max {
                        h = h.min(hm);
                    }
                    nodes.push(Node {
                        t: t_new,
                        y: s.y,
                        dy: s.dy,
                    });
                }
                Ok(s) => {
                    self.stats.rejected += 1;
                    let fac = if s.error.is_finite() {
                        (T::lit(0.9) * s.error.powf(T::lit(-0.2))).max(T::lit(0.1))
                    } else {
                        T::lit(0.1)
                    };
                    h = h_try * fac.min(T::lit(0.9));
                }
                Err(error) if recoverable(&error) && failures < self.recoverable_retries => {
                    self.stats.rejected += 1;
                    failures += 1;
                    h = h_try * T::lit(0.25);
                }
                Err(error) => {
                    return Err(Interrupted {
                        error,
                        nodes,
                        last_h: h,
                    })
                }
            }
        }
    }
}

/// Dense trajectory of an ODE solve.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub nodes: Vec<Node<T>>,
    pub opts: OdeOptions<T>,
    pub stats: OdeStats,
}

impl<T: Real> Trajectory<T> {
    pub fn t_start(&self) -> T {
        self.nodes[0].t
    }

    pub fn t_end(&self) -> T {
        self.nodes.last().unwrap().t
    }

    /// Value at `t` by re-stepping from the preceding node.
    pub fn eval<F>(&self, f: &mut F, t: T) -> Result<Vec<T>>
    where
        F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    {
        eval_nodes(&self.nodes, &self.opts, f, t)
    }
}

/// Value at `t` from a node list (see [`Trajectory::eval`]).
pub fn eval_nodes<T, F>(nodes: &[Node<T>], opts: &OdeOptions<T>, f: &mut F, t: T) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let first = nodes[0].t;
    let last = nodes.last().unwrap().t;
    if !(t >= first && t <= last) {
        return Err(Error::OutsideDomain {
            t: t.to_f64_lossy(),
            reason: format!(
                "trajectory covers [{}, {}]",
                first.to_f64_lossy(),
                last.to_f64_lossy()
            ),
        });
    }
    let i = nodes.partition_point(|n| n.t <= t) - 1;
    let node = &nodes[i];
    if node.t == t {
        return Ok(node.y.clone());
    }
    Ok(step(f, node.t, &node.y, &node.dy, t - node.t, opts)?.y)
}

/// Solves `y' = f(t, y)` on `[t0, t_end]`.
pub fn solve<T, F>(
    f: &mut F,
    t0: T,
    y0: &[T],
    t_end: T,
    opts: OdeOptions<T>,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let mut driver = Driver::new(opts);
    match driver.run(f, t0, y0, t_end, None, |_| false) {
        Ok((nodes, _)) => Ok(Trajectory {
            nodes,
            opts,
            stats: driver.stats,
        }),
        Err(interrupted) => Err(interrupted.error),
    }
}
