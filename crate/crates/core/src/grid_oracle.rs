//! Crank-Nicolson propagator for `iψ̇ = H(t)ψ` on a uniform position grid,
//! `H = α P²/2 + β (XP+PX)/4 + γ X²/2 + δ P + ε X + φ`, used as an
//! independent check of the Gaussian evolution. Works in `f64` only.
//!
//! Derivatives use fourth-order five-point stencils with Dirichlet
//! boundaries, so the discrete Hamiltonian is a Hermitian pentadiagonal
//! matrix and every step is one banded solve.

use num_complex::Complex64;

use crate::curve::CoefficientSource;
use crate::error::{Error, Result};
use crate::quantum_gaussian::GaussianState;

/// Coefficients `(α, β, γ, δ, ε, φ)` of the quadratic Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadraticCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub phi: f64,
}

impl QuadraticCoefficients {
    /// Coefficients of `Σ b_α H_α` for a Lie system on `quadratic6`
    /// (`H = P²/2, (XP+PX)/4, X²/2, -P, X, I`) or `heisenberg4_central`
    /// (`H = P²/2, -X, P, -I`).
    pub fn from_system(algebra: &str, b: &[f64]) -> Result<Self> {
        match (algebra, b.len()) {
            ("quadratic6", 6) => Ok(QuadraticCoefficients {
                alpha: b[0],
                beta: b[1],
                gamma: b[2],
                delta: -b[3],
                epsilon: b[4],
                phi: b[5],
            }),
            ("heisenberg4_central", 4) => Ok(QuadraticCoefficients {
                alpha: b[0],
                epsilon: -b[1],
                delta: b[2],
                phi: -b[3],
                ..Default::default()
            }),
            _ => Err(Error::OrderingMismatch(format!(
                "no grid Hamiltonian for `{algebra}` with {} coefficients",
                b.len()
            ))),
        }
    }
}

/// Grid geometry and step size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub dt: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            x_min: -40.0,
            x_max: 40.0,
            points: 4096,
            dt: 1e-3,
        }
    }
}

/// Edge amplitude above which propagation reports a boundary leak.
pub const BOUNDARY_WARNING: f64 = 1e-8;

/// Mass fraction outside the grid above which comparisons are refused.
pub const MASS_OUTSIDE_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub x_min: f64,
    pub dx: f64,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl GridState {
    pub fn from_fn(opts: &GridOptions, t: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if opts.points < 5 || !(opts.x_max > opts.x_min) {
            return Err(Error::OutsideDomain {
                t,
                reason: "grid needs at least 5 points on a nonempty interval".into(),
            });
        }
        let dx = (opts.x_max - opts.x_min) / (opts.points - 1) as f64;
        let psi = (0..opts.points)
            .map(|j| f(opts.x_min + j as f64 * dx))
            .collect();
        Ok(GridState {
            x_min: opts.x_min,
            dx,
            psi,
            t,
        })
    }

    /// Samples the position-space wavefunction of a Gaussian state.
    pub fn from_gaussian(state: &GaussianState<f64>, opts: &GridOptions, t: f64) -> Result<Self> {
        Self::from_fn(opts, t, |x| state.position_value(x))
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Discrete `L²` norm `(Σ|ψ_j|² Δx)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx).sqrt()
    }

    /// Largest amplitude among the two outermost points at each end.
    pub fn edge_amplitude(&self) -> f64 {
        let n = self.len();
        [0, 1, n - 2, n - 1]
            .iter()
            .map(|&j| self.psi[j].norm())
            .fold(0.0, f64::max)
    }

    /// `(⟨X⟩, ⟨P⟩, Var X, Var P)` with `P = -i d/dx` from the stencils.
    pub fn moments(&self) -> (f64, f64, f64, f64) {
        let mass = self.norm().powi(2);
        let w: Vec<f64> = self
            .psi
            .iter()
            .map(|z| z.norm_sqr() * self.dx / mass)
            .collect();
        let mx: f64 = w.iter().enumerate().map(|(j, w)| self.x(j) * w).sum();
        let vx: f64 = w
            .iter()
            .enumerate()
            .map(|(j, w)| (self.x(j) - mx).powi(2) * w)
            .sum();
        let d1 = apply_stencil(&self.psi, &first_derivative(self.dx));
        let d2 = apply_stencil(&self.psi, &second_derivative(self.dx));
        let i = Complex64::new(0.0, 1.0);
        let mut p = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        for j in 0..self.len() {
            p += self.psi[j].conj() * (-i * d1[j]);
            p2 += self.psi[j].conj() * (-d2[j]);
        }
        let mp = p.re * self.dx / mass;
        let vp = p2.re * self.dx / mass - mp * mp;
        (mx, mp, vx, vp)
    }
}

fn first_derivative(dx: f64) -> [f64; 5] {
    let s = 1.0 / (12.0 * dx);
    [s, -8.0 * s, 0.0, 8.0 * s, -s]
}

fn second_derivative(dx: f64) -> [f64; 5] {
    let s = 1.0 / (12.0 * dx * dx);
    [-s, 16.0 * s, -30.0 * s, 16.0 * s, -s]
}

fn apply_stencil(psi: &[Complex64], c: &[f64; 5]) -> Vec<Complex64> {
    let n = psi.len();
    (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &ck) in c.iter().enumerate() {
                let idx = j as isize + k as isize - 2;
                if idx >= 0 && (idx as usize) < n {
                    acc += psi[idx as usize] * ck;
                }
            }
            acc
        })
        .collect()
}

/// Pentadiagonal matrix stored by rows: `rows[j][d + 2] = A[j][j + d]`.
#[derive(Clone, Debug)]
struct Banded {
    rows: Vec<[Complex64; 5]>,
}

impl Banded {
    fn get(&self, i: usize, j: usize) -> Complex64 {
        let d = j as isize - i as isize;
        if d.abs() > 2 {
            Complex64::new(0.0, 0.0)
        } else {
            self.rows[i][(d + 2) as usize]
        }
    }

    fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for d in 0..5 {
                    let k = j as isize + d as isize - 2;
                    if k >= 0 && (k as usize) < n {
                        acc += self.rows[j][d] * v[k as usize];
                    }
                }
                acc
            })
            .collect()
    }

    /// In-place LU without pivoting followed by the solve of `A x = b`.
    fn solve_in_place(mut self, b: &mut [Complex64]) -> Result<()> {
        let n = self.rows.len();
        for k in 0..n {
            let pivot = self.rows[k][2];
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::Singular);
            }
            for i in (k + 1)..(k + 3).min(n) {
                let l = self.rows[i][k + 2 - i] / pivot;
                self.rows[i][k + 2 - i] = l;
                for j in (k + 1)..(k + 3).min(n) {
                    let u = self.rows[k][j + 2 - k];
                    self.rows[i][j + 2 - i] -= l * u;
                }
                b[i] = b[i] - l * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in (k + 1)..(k + 3).min(n) {
                acc -= self.rows[k][j + 2 - k] * b[j];
            }
            b[k] = acc / self.rows[k][2];
        }
        Ok(())
    }
}

fn hamiltonian(x_min: f64, dx: f64, n: usize, h: &QuadraticCoefficients) -> Banded {
    let d1 = first_derivative(dx);
    let d2 = second_derivative(dx);
    let i = Complex64::new(0.0, 1.0);
    let rows = (0..n)
        .map(|j| {
            let xj = x_min + j as f64 * dx;
            let mut row = [Complex64::new(0.0, 0.0); 5];
            for (d, entry) in row.iter_mut().enumerate() {
                let k = j as isize + d as isize - 2;
                if k < 0 || k as usize >= n {
                    continue;
                }
                let xk = x_min + k as f64 * dx;
                let mut v = Complex64::new(-0.5 * h.alpha * d2[d], 0.0);
                v += -i * d1[d] * (h.delta + 0.25 * h.beta * (xj + xk));
                if d == 2 {
                    v += 0.5 * h.gamma * xj * xj + h.epsilon * xj + h.phi;
                }
                *entry = v;
            }
            row
        })
        .collect();
    Banded { rows }
}

/// Largest `|H_jk - conj(H_kj)|` of the discrete Hamiltonian.
pub fn hermiticity_defect(state: &GridState, h: &QuadraticCoefficients) -> f64 {
    let n = state.len();
    let m = hamiltonian(state.x_min, state.dx, n, h);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in j.saturating_sub(2)..(j + 3).min(n) {
            worst = worst.max((m.get(j, k) - m.get(k, j).conj()).norm());
        }
    }
    worst
}

/// Result of [`propagate`].
#[derive(Clone, Debug)]
pub struct Propagation {
    pub state: GridState,
    pub steps: usize,
    /// `|‖ψ(t₁)‖ - ‖ψ(t₀)‖|`.
    pub norm_drift: f64,
    pub max_edge_amplitude: f64,
    pub warnings: Vec<String>,
}

/// Crank-Nicolson steps from `state.t` to `t1` with step at most `dt`
/// (shortened so the last step lands on `t1`); coefficients are sampled at
/// step midpoints.
pub fn propagate(
    state: &GridState,
    coefficients: &dyn Fn(f64) -> Result<QuadraticCoefficients>,
    t1: f64,
    dt: f64,
) -> Result<Propagation> {
    if !(dt > 0.0) || !(t1 >= state.t) {
        return Err(Error::OutsideDomain {
            t: t1,
            reason: "propagation needs dt > 0 and t1 >= t0".into(),
        });
    }
    let n = state.len();
    let steps = ((t1 - state.t) / dt - 1e-9).ceil().max(0.0) as usize;
    let h_step = if steps > 0 {
        (t1 - state.t) / steps as f64
    } else {
        0.0
    };
    let norm0 = state.norm();
    let mut psi = state.psi.clone();
    let mut max_edge = state.edge_amplitude();
    let half = Complex64::new(0.0, 0.5 * h_step);
    for s in 0..steps {
        let tm = state.t + (s as f64 + 0.5) * h_step;
        let h = hamiltonian(state.x_min, state.dx, n, &coefficients(tm)?);
        let hpsi = h.mul_vec(&psi);
        let mut rhs: Vec<Complex64> = psi.iter().zip(&hpsi).map(|(p, hp)| p - half * hp).collect();
        let mut lhs = h;
        for row in lhs.rows.iter_mut() {
            for e in row.iter_mut() {
                *e *= half;
            }
            row[2] += 1.0;
        }
        lhs.solve_in_place(&mut rhs)?;
        psi = rhs;
        let edge = [0, 1, n - 2, n - 1]
            .iter()
            .map(|&j| psi[j].norm())
            .fold(0.0, f64::max);
        max_edge = max_edge.max(edge);
    }
    let out = GridState {
        x_min: state.x_min,
        dx: state.dx,
        psi,
        t: t1,
    };
    let mut warnings = Vec::new();
    if max_edge > BOUNDARY_WARNING {
        warnings.push(format!(
            "boundary leak: edge amplitude reached {max_edge:.3e} (limit {BOUNDARY_WARNING:e})"
        ));
    }
    Ok(Propagation {
        norm_drift: (out.norm() - norm0).abs(),
        state: out,
        steps,
        max_edge_amplitude: max_edge,
        warnings,
    })
}

/// Propagates with the coefficients of a Lie system on `quadratic6` or
/// `heisenberg4_central`.
pub fn propagate_system(
    state: &GridState,
    algebra: &str,
    b: &dyn CoefficientSource<f64>,
    t1: f64,
    dt: f64,
) -> Result<Propagation> {
    let f = |t: f64| QuadraticCoefficients::from_system(algebra, &b.eval(t)?);
    propagate(state, &f, t1, dt)
}

/// Relative `L²` differences between a grid state and a Gaussian state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    /// `‖ψ_grid - ψ‖ / ‖ψ‖`, sensitive to the global phase.
    pub full: f64,
    /// `‖|ψ_grid| - |ψ|‖ / ‖ψ‖`.
    pub phase_insensitive: f64,
    /// Fraction of the probability of the Gaussian state outside the grid.
    pub mass_outside: f64,
}

pub fn compare(grid: &GridState, analytic: &GaussianState<f64>) -> Result<Comparison> {
    let exact_mass = analytic.norm()?.powi(2);
    let values: Vec<Complex64> = (0..grid.len())
        .map(|j| analytic.position_value(grid.x(j)))
        .collect();
    let grid_mass: f64 = values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx;
    let mass_outside = ((exact_mass - grid_mass) / exact_mass).max(0.0);
    if mass_outside > MASS_OUTSIDE_LIMIT {
        return Err(Error::GridTooNarrow { mass_outside });
    }
    let scale = grid_mass.sqrt();
    let mut full = 0.0;
    let mut modulus = 0.0;
    for (g, a) in grid.psi.iter().zip(&values) {
        full += (g - a).norm_sqr();
        modulus += (g.norm() - a.norm()).powi(2);
    }
    Ok(Comparison {
        full: (full * grid.dx).sqrt() / scale,
        phase_insensitive: (modulus * grid.dx).sqrt() / scale,
        mass_outside,
    })
}
