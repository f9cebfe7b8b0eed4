//! Gaussian states in the momentum representation (`ħ = 1`, `X = i d/dp`)
//! and the exact action of the one-parameter unitary groups `exp(-iθG)` for
//! the quadratic generators, plus the Jacobi-group model `(S, w, φ)` of the
//! `quadratic6` group.
//!
//! The algebra elements of `quadratic6` and `heisenberg4_central` are
//! `a_α = iH_α`, so the Wei-Norman factor `exp(-v a_α)` is the flow of `H_α`
//! by `v`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_core::sl2_hamiltonian_matrices;
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::wei_norman::{GroupRealization, WeiNormanSolution};

/// Quadratic generators, named after the Hermitian operator `G` in
/// `exp(-iθG)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `P²/2`
    HalfP2,
    /// `(XP + PX)/4`
    Dilation,
    /// `X²/2`
    HalfX2,
    P,
    X,
    Identity,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::HalfP2,
        Generator::Dilation,
        Generator::HalfX2,
        Generator::P,
        Generator::X,
        Generator::Identity,
    ];
}

/// `H_α = sign · G` for the basis of `quadratic6`
/// (`P²/2, (XP+PX)/4, X²/2, -P, X, I`).
pub const QUADRATIC6_GENERATORS: [(Generator, i8); 6] = [
    (Generator::HalfP2, 1),
    (Generator::Dilation, 1),
    (Generator::HalfX2, 1),
    (Generator::P, -1),
    (Generator::X, 1),
    (Generator::Identity, 1),
];

/// `H_α = sign · G` for the basis of `heisenberg4_central`
/// (`P²/2, -X, P, -I`).
pub const HEISENBERG4_GENERATORS: [(Generator, i8); 4] = [
    (Generator::HalfP2, 1),
    (Generator::X, -1),
    (Generator::P, 1),
    (Generator::Identity, -1),
];

/// `ψ(p) = exp(-(A p² + B p + C))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
}

/// First and second moments of a Gaussian state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub x: T,
    pub p: T,
    pub var_x: T,
    pub var_p: T,
    /// `‖ψ‖`
    pub norm: T,
}

impl<T: Real> GaussianState<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>) -> Result<Self> {
        let s = GaussianState { a, b, c };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if !(self.a.re > T::zero())
            || !(self.b.re.is_finite() && self.b.im.is_finite() && self.c.re.is_finite())
        {
            return Err(Error::NonNormalizable {
                re_a: self.a.re.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Unit-norm state with the given `A`, `B` and real, nonnegative `ψ(p)`
    /// phase at the origin.
    pub fn normalized(a: Complex<T>, b: Complex<T>) -> Result<Self> {
        let mut s = Self::new(a, b, Complex::new(T::zero(), T::zero()))?;
        let n = s.norm()?;
        s.c.re = n.ln();
        Ok(s)
    }

    /// Unit-norm minimum-uncertainty packet with `⟨X⟩ = x0`, `⟨P⟩ = p0` and
    /// momentum width `sigma_p`.
    pub fn coherent(x0: T, p0: T, sigma_p: T) -> Result<Self> {
        let a = T::one() / (T::lit(4.0) * sigma_p * sigma_p);
        Self::normalized(
            Complex::new(a, T::zero()),
            Complex::new(-T::lit(2.0) * a * p0, x0),
        )
    }

    /// `∫|ψ|² dp`.
    fn mass(&self) -> Result<T> {
        self.check()?;
        let ar = self.a.re;
        let two = T::lit(2.0);
        Ok((T::PI() / (two * ar)).sqrt()
            * (self.b.re * self.b.re / (two * ar) - two * self.c.re).exp())
    }

    /// `‖ψ‖` in closed form.
    pub fn norm(&self) -> Result<T> {
        Ok(self.mass()?.sqrt())
    }

    /// `ψ(p)`.
    pub fn value(&self, p: T) -> Complex<T> {
        let p = Complex::new(p, T::zero());
        (-(self.a * p * p + self.b * p + self.c)).exp()
    }

    /// `ψ(x)` in the position representation,
    /// `(2π)^{-1/2} ∫ e^{ipx} ψ(p) dp = (2π)^{-1/2} √(π/A) exp((ix - B)²/(4A) - C)`.
    pub fn position_value(&self, x: T) -> Complex<T> {
        let ix = Complex::new(T::zero(), x);
        let pi = Complex::new(T::PI(), T::zero());
        let pref = (pi / self.a).sqrt() / (T::lit(2.0) * T::PI()).sqrt();
        let d = ix - self.b;
        pref * (d * d / (self.a * T::lit(4.0)) - self.c).exp()
    }

    /// Applies `exp(-iθG)`.
    pub fn flow(&self, g: Generator, theta: T) -> Self {
        flow(self, g, theta)
    }
}

/// `exp(-iθG) ψ` for a Gaussian `ψ`.
pub fn flow<T: Real>(state: &GaussianState<T>, g: Generator, theta: T) -> GaussianState<T> {
    let GaussianState { a, b, c } = *state;
    let i = Complex::new(T::zero(), T::one());
    let two = T::lit(2.0);
    match g {
        Generator::HalfP2 => GaussianState {
            a: a + i * (theta / two),
            b,
            c,
        },
        Generator::P => GaussianState {
            a,
            b: b + i * theta,
            c,
        },
        Generator::Identity => GaussianState {
            a,
            b,
            c: c + i * theta,
        },
        // ψ(p) ↦ ψ(p + θ)
        Generator::X => GaussianState {
            a,
            b: b + a * (two * theta),
            c: c + a * (theta * theta) + b * theta,
        },
        // ψ(p) ↦ e^{θ/4} ψ(e^{θ/2} p)
        Generator::Dilation => GaussianState {
            a: a * theta.exp(),
            b: b * (theta / two).exp(),
            c: c - Complex::new(theta / T::lit(4.0), T::zero()),
        },
        // solution of ∂_θ ψ = (i/2) ψ''
        Generator::HalfX2 => {
            let d = Complex::new(T::one(), T::zero()) + i * a * (two * theta);
            GaussianState {
                a: a / d,
                b: b / d,
                c: c + d.ln() / two - i * b * b * theta / (d * two),
            }
        }
    }
}

/// `(⟨X⟩, ⟨P⟩, Var X, Var P, ‖ψ‖)` in closed form.
pub fn expectations<T: Real>(state: &GaussianState<T>) -> Result<Moments<T>> {
    let norm = state.norm()?;
    let (ar, ai) = (state.a.re, state.a.im);
    let two = T::lit(2.0);
    let p = -state.b.re / (two * ar);
    Ok(Moments {
        x: two * ai * p + state.b.im,
        p,
        var_x: state.a.norm_sqr() / ar,
        var_p: T::one() / (T::lit(4.0) * ar),
        norm,
    })
}

/// `ψ(p)` on a momentum grid.
pub fn sample_wavefunction<T: Real>(state: &GaussianState<T>, grid: &[T]) -> Vec<Complex<T>> {
    grid.iter().map(|&p| state.value(p)).collect()
}

/// `ψ(x)` on a position grid.
pub fn position_wavefunction<T: Real>(state: &GaussianState<T>, grid: &[T]) -> Vec<Complex<T>> {
    grid.iter().map(|&x| state.position_value(x)).collect()
}

/// Generator table for a quantum catalog algebra.
pub fn generator_table(algebra: &str) -> Result<&'static [(Generator, i8)]> {
    match algebra {
        "quadratic6" => Ok(&QUADRATIC6_GENERATORS),
        "heisenberg4_central" => Ok(&HEISENBERG4_GENERATORS),
        other => Err(Error::OrderingMismatch(format!(
            "algebra `{other}` has no Gaussian realization (expected quadratic6 or heisenberg4_central)"
        ))),
    }
}

fn apply_product<T: Real>(
    mut state: GaussianState<T>,
    table: &[(Generator, i8)],
    perm: &[usize],
    v: &[T],
) -> GaussianState<T> {
    for &alpha in perm.iter().rev() {
        let (g, sign) = table[alpha];
        if v[alpha] != T::zero() {
            state = flow(&state, g, T::lit(sign as f64) * v[alpha]);
        }
    }
    state
}

/// `U(t) ψ` for the evolution operator reconstructed from a Wei-Norman
/// solution on `quadratic6` or `heisenberg4_central`.
///
/// The factor product `exp(-v_{σ(1)} a_{σ(1)}) ⋯ exp(-v_{σ(r)} a_{σ(r)})` is
/// applied rightmost factor first.
pub fn evolve<T: Real>(
    state: &GaussianState<T>,
    sol: &WeiNormanSolution<T>,
    t: T,
) -> Result<GaussianState<T>> {
    state.check()?;
    let table = generator_table(sol.algebra().name())?;
    if table.len() != sol.algebra().dim() {
        return Err(Error::OrderingMismatch(format!(
            "algebra `{}` has dimension {}, expected {}",
            sol.algebra().name(),
            sol.algebra().dim(),
            table.len()
        )));
    }
    let perm = sol.ordering().perm();
    let mut out = *state;
    for v in sol.factor_chain(t)? {
        out = apply_product(out, table, perm, &v);
    }
    Ok(out)
}

/// Residuals of the classical equations for the first moments along
/// `evolve`, with the time derivative taken by central differences of step
/// `h`. Returns `(res_x, res_p)`.
///
/// For `quadratic6`: `ẋ = b₁p + b₂x/2 - b₄`, `ṗ = -b₃x - b₂p/2 - b₅`;
/// for `heisenberg4_central`: `ẋ = b₁p + b₃`, `ṗ = b₂`.
pub fn ehrenfest_residual<T: Real>(
    state: &GaussianState<T>,
    sol: &WeiNormanSolution<T>,
    t: T,
    h: T,
) -> Result<(T, T)> {
    let m = |s: T| -> Result<Moments<T>> { expectations(&evolve(state, sol, s)?) };
    let (mp, mm, m0) = (m(t + h)?, m(t - h)?, m(t)?);
    let two = T::lit(2.0);
    let dx = (mp.x - mm.x) / (two * h);
    let dp = (mp.p - mm.p) / (two * h);
    let b = sol.curve().eval(t)?;
    let (fx, fp) = match sol.algebra().name() {
        "quadratic6" => (
            b[0] * m0.p + b[1] * m0.x / two - b[3],
            -b[2] * m0.x - b[1] * m0.p / two - b[4],
        ),
        "heisenberg4_central" => (b[0] * m0.p + b[2], b[1]),
        other => {
            return Err(Error::OrderingMismatch(format!(
                "no Ehrenfest equations for `{other}`"
            )))
        }
    };
    Ok(((dx - fx).abs(), (dp - fp).abs()))
}

/// Element `(S, w, φ)` of the Jacobi group: the 4x4 matrix
/// `[[1, ½ wᵀJ₀S, φ], [0, S, w], [0, 0, 1]]` with `J₀ = [[0, 1], [-1, 0]]`.
///
/// `S` acts linearly on phase space `(x, p)`, `w` translates and `φ` is the
/// central phase.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiElement<T> {
    pub s: Mat<T>,
    pub w: [T; 2],
    pub phi: T,
}

/// `ω(u, v) = u_x v_p - u_p v_x`.
pub fn symplectic_form<T: Real>(u: [T; 2], v: [T; 2]) -> T {
    u[0] * v[1] - u[1] * v[0]
}

impl<T: Real> JacobiElement<T> {
    pub fn identity() -> Self {
        JacobiElement {
            s: Mat::identity(2),
            w: [T::zero(); 2],
            phi: T::zero(),
        }
    }

    /// `(S₂, w₂, φ₂)(S₁, w₁, φ₁) = (S₂S₁, w₂ + S₂w₁, φ₂ + φ₁ + ½ω(w₂, S₂w₁))`.
    pub fn compose(&self, right: &Self) -> Self {
        let sw = self.s.mul_vec(&right.w);
        let sw = [sw[0], sw[1]];
        JacobiElement {
            s: &self.s * &right.s,
            w: [self.w[0] + sw[0], self.w[1] + sw[1]],
            phi: self.phi + right.phi + T::lit(0.5) * symplectic_form(self.w, sw),
        }
    }

    pub fn det_s(&self) -> T {
        self.s[(0, 0)] * self.s[(1, 1)] - self.s[(0, 1)] * self.s[(1, 0)]
    }

    pub fn to_matrix(&self) -> Mat<T> {
        let half = T::lit(0.5);
        // ½ wᵀ J₀ = ½ (-w_p, w_x)
        let row = [-half * self.w[1], half * self.w[0]];
        let r0 = row[0] * self.s[(0, 0)] + row[1] * self.s[(1, 0)];
        let r1 = row[0] * self.s[(0, 1)] + row[1] * self.s[(1, 1)];
        let (o, l) = (T::zero(), T::one());
        Mat::from_rows(&[
            [l, r0, r1, self.phi],
            [o, self.s[(0, 0)], self.s[(0, 1)], self.w[0]],
            [o, self.s[(1, 0)], self.s[(1, 1)], self.w[1]],
            [o, o, o, l],
        ])
    }

    /// Image `S z + w` of a phase-space point.
    pub fn act(&self, z: [T; 2]) -> [T; 2] {
        let sz = self.s.mul_vec(&z);
        [sz[0] + self.w[0], sz[1] + self.w[1]]
    }
}

/// Realization of `quadratic6` by Jacobi-group elements, compatible with the
/// 4x4 matrix representation of the catalog.
#[derive(Clone, Copy, Debug, Default)]
pub struct JacobiRealization;

impl<T: Real> GroupRealization<T> for JacobiRealization {
    type Element = JacobiElement<T>;

    fn algebra_dim(&self) -> usize {
        6
    }

    fn identity(&self) -> JacobiElement<T> {
        JacobiElement::identity()
    }

    fn factor(&self, alpha: usize, v: T) -> Result<JacobiElement<T>> {
        let mut e = JacobiElement::identity();
        match alpha {
            // ρ(a_α) acts on phase space by -M_α
            0..=2 => e.s = sl2_hamiltonian_matrices::<T>()[alpha].scale(v).expm()?,
            3 => e.w = [-v, T::zero()],
            4 => e.w = [T::zero(), -v],
            5 => e.phi = v,
            _ => {
                return Err(Error::IndexOutOfRange {
                    index: alpha,
                    dim: 6,
                })
            }
        }
        Ok(e)
    }

    fn compose(&self, left: &JacobiElement<T>, right: &JacobiElement<T>) -> JacobiElement<T> {
        left.compose(right)
    }
}

/// `g(t)` of a `quadratic6` solution as a Jacobi-group element.
pub fn jacobi_from_wn<T: Real>(sol: &WeiNormanSolution<T>, t: T) -> Result<JacobiElement<T>> {
    if sol.algebra().name() != "quadratic6" {
        return Err(Error::OrderingMismatch(format!(
            "Jacobi model needs quadratic6, got `{}`",
            sol.algebra().name()
        )));
    }
    sol.reconstruct(&JacobiRealization, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample() -> GaussianState<f64> {
        GaussianState::new(c(0.7, 0.3), c(-0.4, 0.9), c(0.2, -1.1)).unwrap()
    }

    #[test]
    fn zero_angle_is_identity() {
        let s = sample();
        for g in Generator::ALL {
            assert_eq!(flow(&s, g, 0.0), s, "{g:?}");
        }
    }

    #[test]
    fn flows_preserve_norm() {
        let s = sample();
        let n = s.norm().unwrap();
        for g in Generator::ALL {
            for theta in [-1.3, 0.4, 2.5] {
                let m = flow(&s, g, theta).norm().unwrap();
                assert!((m - n).abs() < 1e-12 * n, "{g:?} {theta}");
            }
        }
    }

    #[test]
    fn flows_match_pointwise_action() {
        let s = sample();
        let theta = 0.37;
        let p = 0.81;
        let shifted = flow(&s, Generator::X, theta);
        assert!((shifted.value(p) - s.value(p + theta)).norm() < 1e-14);
        let kicked = flow(&s, Generator::HalfP2, theta);
        let phase = Complex::new(0.0, -theta * p * p / 2.0).exp();
        assert!((kicked.value(p) - phase * s.value(p)).norm() < 1e-14);
        let dil = flow(&s, Generator::Dilation, theta);
        let expected = s.value(p * (theta / 2.0).exp()) * (theta / 4.0).exp();
        assert!((dil.value(p) - expected).norm() < 1e-14);
        let phased = flow(&s, Generator::Identity, theta);
        assert!((phased.value(p) - Complex::new(0.0, -theta).exp() * s.value(p)).norm() < 1e-14);
    }

    #[test]
    fn half_x2_flow_solves_its_equation() {
        // ∂_θ ψ = (i/2) ψ'' checked by differences
        let s = sample();
        let (theta, p, h) = (0.6, 0.3, 1e-4);
        let f = |th: f64, q: f64| flow(&s, Generator::HalfX2, th).value(q);
        let dtheta = (f(theta + h, p) - f(theta - h, p)) / (2.0 * h);
        let dpp = (f(theta, p + h) - f(theta, p) * 2.0 + f(theta, p - h)) / (h * h);
        assert!((dtheta - Complex::new(0.0, 0.5) * dpp).norm() < 1e-6);
        // group law
        let twice = flow(&flow(&s, Generator::HalfX2, 0.3), Generator::HalfX2, 0.4);
        let once = flow(&s, Generator::HalfX2, 0.7);
        assert!((twice.a - once.a).norm() < 1e-14 && (twice.b - once.b).norm() < 1e-14);
        assert!((twice.c - once.c).norm() < 1e-14);
    }

    #[test]
    fn moments_of_coherent_state() {
        let s = GaussianState::coherent(1.5_f64, -0.5, 0.8).unwrap();
        let m = expectations(&s).unwrap();
        assert!((m.x - 1.5).abs() < 1e-14);
        assert!((m.p + 0.5).abs() < 1e-14);
        assert!((m.var_p - 0.64).abs() < 1e-14);
        assert!((m.var_x * m.var_p - 0.25).abs() < 1e-14);
        assert!((m.norm - 1.0).abs() < 1e-14);
        let centered = GaussianState::normalized(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        let m = expectations(&centered).unwrap();
        assert_eq!((m.x, m.p), (0.0, 0.0));
        assert!(GaussianState::new(c(-0.1, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn position_shift_moves_mean() {
        let s = GaussianState::coherent(0.2_f64, 0.3, 1.1).unwrap();
        let theta = 1e-5_f64;
        let x0 = expectations(&s).unwrap().x;
        let x1 = expectations(&flow(&s, Generator::P, theta)).unwrap().x;
        assert!(((x1 - x0) / theta - 1.0).abs() < 1e-8);
        let p1 = expectations(&flow(&s, Generator::X, theta)).unwrap().p;
        assert!(((p1 - 0.3) / theta + 1.0).abs() < 1e-8);
    }

    #[test]
    fn numerical_norm_and_position_transform() {
        let s = GaussianState::coherent(0.4, -0.7, 0.9)
            .unwrap()
            .flow(Generator::HalfP2, 0.6);
        let n = 8001;
        let (lo, hi) = (-15.0, 15.0);
        let dx = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|j| lo + j as f64 * dx).collect();
        let ps = sample_wavefunction(&s, &grid);
        let xs = position_wavefunction(&s, &grid);
        let trap = |v: &[Complex<f64>]| {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
                - 0.5 * dx * (v[0].norm_sqr() + v[n - 1].norm_sqr())
        };
        assert!((trap(&ps) - 1.0).abs() < 1e-8);
        assert!((trap(&xs) - 1.0).abs() < 1e-8);
        let mean_x: f64 = grid
            .iter()
            .zip(&xs)
            .map(|(x, z)| x * z.norm_sqr())
            .sum::<f64>()
            * dx;
        assert!((mean_x - expectations(&s).unwrap().x).abs() < 1e-8);
        assert_eq!(s.value(0.0), (-s.c).exp());
    }

    #[test]
    fn jacobi_product_law() {
        let real = JacobiRealization;
        let e1 = GroupRealization::<f64>::factor(&real, 0, 0.3).unwrap();
        let e2 = GroupRealization::<f64>::factor(&real, 3, -0.8).unwrap();
        let e3 = GroupRealization::<f64>::factor(&real, 4, 1.1).unwrap();
        let lhs = e1.compose(&e2).compose(&e3);
        let rhs = e1.compose(&e2.compose(&e3));
        assert!((&lhs.to_matrix() - &rhs.to_matrix()).max_abs() < 1e-14);
        assert!(
            (&lhs.to_matrix() - &(&(&e1.to_matrix() * &e2.to_matrix()) * &e3.to_matrix()))
                .max_abs()
                < 1e-14
        );
        assert!((lhs.det_s() - 1.0).abs() < 1e-14);
    }
}
