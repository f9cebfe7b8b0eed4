//! Adaptive Gauss-Kronrod (7, 15) quadrature and memoized running integrals.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and `|Kronrod - Gauss|` on `[a, b]`.
pub fn gk15<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, a: T, b: T) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c)?;
    let mut kron = T::lit(WGK[7]) * fc;
    let mut gauss = T::lit(WG[3]) * fc;
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let s = f(c - dx)? + f(c + dx)?;
        kron += T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * s;
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs();
    if !value.is_finite() {
        return Err(Error::NonFinite("integrand"));
    }
    Ok((value, err))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        QuadOptions {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-12),
            max_panels: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

/// Global adaptive bisection. Returns the final panels sorted by position.
fn adaptive_panels<T: Real, F: FnMut(T) -> Result<T>>(
    f: &mut F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<Vec<Panel<T>>> {
    let (value, err) = gk15(f, a, b)?;
    let mut panels = vec![Panel { a, b, value, err }];
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let total_err: T = panels.iter().map(|p| p.err).sum();
        let floor = T::lit(50.0) * T::epsilon() * panels.iter().map(|p| p.value.abs()).sum::<T>();
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs()).max(floor);
        if total_err <= tol {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::zero()), |best, (i, p)| {
                if p.err > best.1 {
                    (i, p.err)
                } else {
                    best
                }
            });
        let p = panels[worst];
        let mid = T::lit(0.5) * (p.a + p.b);
        if panels.len() >= opts.max_panels || !(mid > p.a && mid < p.b) {
            return Err(Error::QuadratureNonConvergence {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
                estimate: total_err.to_f64_lossy(),
            });
        }
        let (v1, e1) = gk15(f, p.a, mid)?;
        let (v2, e2) = gk15(f, mid, p.b)?;
        panels[worst] = Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
        };
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
        });
    }
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    Ok(panels)
}

/// `∫_a^b f` by adaptive Gauss-Kronrod.
pub fn integrate<T: Real, F: FnMut(T) -> Result<T>>(
    f: &mut F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return Ok(-integrate(f, b, a, opts)?);
    }
    Ok(adaptive_panels(f, a, b, opts)?
        .iter()
        .map(|p| p.value)
        .sum())
}

type Integrand<T> = Arc<dyn Fn(T) -> Result<T> + Send + Sync>;

/// `F(t) = ∫_a^t f` for all `t` in `[a, b]`.
///
/// The adaptive panel partition of `[a, b]` and its prefix sums are computed
/// once; evaluating at an interior point costs one 15-point rule on the
/// partial panel, which makes nested integrals affordable.
#[derive(Clone)]
pub struct CumulativeIntegral<T> {
    f: Integrand<T>,
    edges: Vec<T>,
    prefix: Vec<T>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for CumulativeIntegral<T> {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("CumulativeIntegral")
            .field("panels", &(self.edges.len() - 1))
            .field("total", &self.prefix.last())
            .finish()
    }
}

impl<T: Real> CumulativeIntegral<T> {
    pub fn new(
        f: impl Fn(T) -> Result<T> + Send + Sync + 'static,
        a: T,
        b: T,
        opts: &QuadOptions<T>,
    ) -> Result<Self> {
        let f: Integrand<T> = Arc::new(f);
        if !(b >= a) {
            return Err(Error::OutsideDomain {
                t: b.to_f64_lossy(),
                reason: "running integral needs b >= a".into(),
            });
        }
        let panels = if a == b {
            Vec::new()
        } else {
            // Each panel must be accurate on its own because partial panels are
            // re-integrated at evaluation time.
            let mut g = |t: T| f(t);
            adaptive_panels(&mut g, a, b, opts)?
        };
        let mut edges = vec![a];
        let mut prefix = vec![T::zero()];
        for p in &panels {
            edges.push(p.b);
            prefix.push(*prefix.last().unwrap() + p.value);
        }
        Ok(CumulativeIntegral { f, edges, prefix })
    }

    pub fn domain(&self) -> (T, T) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    pub fn total(&self) -> T {
        *self.prefix.last().unwrap()
    }

    pub fn integrand(&self, t: T) -> Result<T> {
        (self.f)(t)
    }

    pub fn eval(&self, t: T) -> Result<T> {
        let (a, b) = self.domain();
        if !(t >= a && t <= b) {
            return Err(Error::OutsideDomain {
                t: t.to_f64_lossy(),
                reason: format!(
                    "running integral covers [{}, {}]",
                    a.to_f64_lossy(),
                    b.to_f64_lossy()
                ),
            });
        }
        let k = self.edges.partition_point(|&e| e <= t) - 1;
        if self.edges[k] == t {
            return Ok(self.prefix[k]);
        }
        let mut g = |s: T| (self.f)(s);
        let (partial, _) = gk15(&mut g, self.edges[k], t)?;
        Ok(self.prefix[k] + partial)
    }
}
