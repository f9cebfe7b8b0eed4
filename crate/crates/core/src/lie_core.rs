//! Finite-dimensional real Lie algebras given by structure constants, their
//! matrix representations, and the built-in catalog.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Numerical tolerances shared by the algebra checks and the Wei-Norman solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance for antisymmetry and Jacobi identities.
    pub validation: f64,
    /// Frobenius tolerance for `[ρ(a), ρ(b)] = ρ([a, b])`.
    pub homomorphism: f64,
    /// Condition number of the Wei-Norman matrix above which the chart is
    /// considered broken.
    pub breakdown_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            validation: 1e-12,
            homomorphism: 1e-10,
            breakdown_condition: 1e8,
        }
    }
}

/// Real Lie algebra with basis `a_0, ..., a_{r-1}` and brackets
/// `[a_α, a_β] = Σ_γ f[α][β][γ] a_γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra<T> {
    name: String,
    dim: usize,
    f: Vec<T>,
    labels: Vec<String>,
}

/// Coordinates of an element in the basis of its algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement<T> {
    pub coords: Vec<T>,
}

impl<T: Real> AlgebraElement<T> {
    pub fn new(coords: Vec<T>) -> Self {
        AlgebraElement { coords }
    }

    pub fn zero(dim: usize) -> Self {
        AlgebraElement {
            coords: vec![T::zero(); dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coords[index] = T::one();
        e
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn scale(&self, s: T) -> Self {
        AlgebraElement {
            coords: self.coords.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        AlgebraElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn norm_inf(&self) -> T {
        self.coords
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.abs()))
    }
}

/// One failed identity found by [`LieAlgebra::validate`]. Indices are 0-based;
/// the `Display` form prints them 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Antisymmetry {
        alpha: usize,
        beta: usize,
        gamma: usize,
        residual: f64,
    },
    Jacobi {
        alpha: usize,
        beta: usize,
        delta: usize,
        gamma: usize,
        residual: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Antisymmetry {
                alpha,
                beta,
                gamma,
                residual,
            } => write!(
                f,
                "antisymmetry violated at ({},{},{}): residual {residual:e}",
                alpha + 1,
                beta + 1,
                gamma + 1
            ),
            Violation::Jacobi {
                alpha,
                beta,
                delta,
                gamma,
                residual,
            } => write!(
                f,
                "Jacobi identity violated at ({},{},{}; {}): residual {residual:e}",
                alpha + 1,
                beta + 1,
                delta + 1,
                gamma + 1
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub max_antisymmetry_residual: f64,
    pub max_jacobi_residual: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Real> LieAlgebra<T> {
    /// Wraps a dense structure tensor (`f[(α * r + β) * r + γ]`) without
    /// validating it; call [`LieAlgebra::validate`] to check the axioms.
    pub fn from_tensor(
        name: impl Into<String>,
        dim: usize,
        f: Vec<T>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        if f.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: f.len(),
            });
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("structure constants"));
        }
        let labels = match labels {
            Some(l) if l.len() != dim => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: l.len(),
                })
            }
            Some(l) => l,
            None => (1..=dim).map(|i| format!("a{i}")).collect(),
        };
        Ok(LieAlgebra {
            name: name.into(),
            dim,
            f,
            labels,
        })
    }

    /// Builds an algebra from the brackets `[a_i, a_j]` with `i < j`
    /// (0-based); the remaining entries follow by antisymmetry.
    pub fn from_brackets(
        name: impl Into<String>,
        dim: usize,
        brackets: &[(usize, usize, &[(usize, f64)])],
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut f = vec![T::zero(); dim * dim * dim];
        for &(i, j, coeffs) in brackets {
            if i >= j {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket ({}, {}) must have i < j",
                    i + 1,
                    j + 1
                )));
            }
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, dim });
            }
            for &(k, c) in coeffs {
                if k >= dim {
                    return Err(Error::IndexOutOfRange { index: k, dim });
                }
                let c = T::from_f64(c).ok_or(Error::NonFinite("structure constant"))?;
                f[(i * dim + j) * dim + k] += c;
                f[(j * dim + i) * dim + k] -= c;
            }
        }
        let alg = Self::from_tensor(name, dim, f, labels)?;
        Ok(alg)
    }

    /// The abelian algebra of the given dimension.
    pub fn abelian(dim: usize) -> Self {
        Self::from_tensor(
            format!("abelian{dim}"),
            dim,
            vec![T::zero(); dim * dim * dim],
            None,
        )
        .expect("positive dimension")
    }

    /// Parses the JSON algebra format
    /// `{"dim": r, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": -1.0}}], "labels": [...]}`
    /// with 1-based indices and `i < j`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AlgebraDoc = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        doc.into_algebra()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn structure(&self, alpha: usize, beta: usize, gamma: usize) -> T {
        self.f[(alpha * self.dim + beta) * self.dim + gamma]
    }

    pub fn structure_tensor(&self) -> &[T] {
        &self.f
    }

    /// Checks antisymmetry and the Jacobi identity against `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let r = self.dim;
        let mut report = ValidationReport::default();
        for a in 0..r {
            for b in 0..r {
                for g in 0..r {
                    let res = (self.structure(a, b, g) + self.structure(b, a, g))
                        .abs()
                        .to_f64_lossy();
                    report.max_antisymmetry_residual = report.max_antisymmetry_residual.max(res);
                    if res > tol && a < b {
                        report.violations.push(Violation::Antisymmetry {
                            alpha: a,
                            beta: b,
                            gamma: g,
                            residual: res,
                        });
                    }
                }
            }
        }
        for a in 0..r {
            for b in 0..r {
                for d in 0..r {
                    for g in 0..r {
                        let mut s = T::zero();
                        for m in 0..r {
                            s += self.structure(a, b, m) * self.structure(m, d, g)
                                + self.structure(b, d, m) * self.structure(m, a, g)
                                + self.structure(d, a, m) * self.structure(m, b, g);
                        }
                        let res = s.abs().to_f64_lossy();
                        report.max_jacobi_residual = report.max_jacobi_residual.max(res);
                        if res > tol && a < b && b < d {
                            report.violations.push(Violation::Jacobi {
                                alpha: a,
                                beta: b,
                                delta: d,
                                gamma: g,
                                residual: res,
                            });
                        }
                    }
                }
            }
        }
        report
    }

    fn check_element(&self, x: &AlgebraElement<T>) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    pub fn bracket(
        &self,
        x: &AlgebraElement<T>,
        y: &AlgebraElement<T>,
    ) -> Result<AlgebraElement<T>> {
        self.check_element(x)?;
        self.check_element(y)?;
        let r = self.dim;
        let mut out = vec![T::zero(); r];
        for a in 0..r {
            if x.coords[a] == T::zero() {
                continue;
            }
            for b in 0..r {
                let w = x.coords[a] * y.coords[b];
                if w == T::zero() {
                    continue;
                }
                for (g, o) in out.iter_mut().enumerate() {
                    *o += w * self.structure(a, b, g);
                }
            }
        }
        Ok(AlgebraElement::new(out))
    }

    /// Matrix of `ad(a_α)`: entry `(γ, β)` is `f[α][β][γ]`.
    pub fn ad_matrix(&self, alpha: usize) -> Result<Mat<T>> {
        if alpha >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: alpha,
                dim: self.dim,
            });
        }
        Ok(Mat::from_fn(self.dim, self.dim, |g, b| {
            self.structure(alpha, b, g)
        }))
    }

    /// Matrix of `ad(x)` for an arbitrary element.
    pub fn ad_of(&self, x: &AlgebraElement<T>) -> Result<Mat<T>> {
        self.check_element(x)?;
        let r = self.dim;
        Ok(Mat::from_fn(r, r, |g, b| {
            (0..r).map(|a| x.coords[a] * self.structure(a, b, g)).sum()
        }))
    }

    /// Dimensions of the derived series `g ⊃ [g,g] ⊃ ...` until it stabilizes.
    pub fn derived_series_dims(&self) -> Vec<usize> {
        let r = self.dim;
        let mut basis: Vec<Vec<T>> = (0..r).map(|i| AlgebraElement::basis(r, i).coords).collect();
        let mut dims = vec![r];
        loop {
            let mut spanning = Vec::new();
            for i in 0..basis.len() {
                for j in i + 1..basis.len() {
                    let x = AlgebraElement::new(basis[i].clone());
                    let y = AlgebraElement::new(basis[j].clone());
                    spanning.push(self.bracket(&x, &y).expect("same algebra").coords);
                }
            }
            let next = row_basis(spanning);
            let d = next.len();
            if d == *dims.last().unwrap() {
                break;
            }
            dims.push(d);
            basis = next;
            if d == 0 {
                break;
            }
        }
        dims
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series_dims().last() == Some(&0)
    }
}

/// Independent rows by Gaussian elimination with a relative threshold.
fn row_basis<T: Real>(mut rows: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    let tol = T::lit(1e-10);
    for row in rows.iter_mut() {
        for b in &out {
            let p = b.iter().position(|x| x.abs() > tol).unwrap();
            let c = row[p] / b[p];
            for (x, y) in row.iter_mut().zip(b) {
                *x -= c * *y;
            }
        }
        if row.iter().any(|x| x.abs() > tol) {
            out.push(row.clone());
        }
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraDoc {
    #[serde(default)]
    name: Option<String>,
    dim: usize,
    #[serde(default)]
    brackets: Vec<BracketDoc>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketDoc {
    i: usize,
    j: usize,
    coeffs: BTreeMap<String, f64>,
}

impl AlgebraDoc {
    fn into_algebra<T: Real>(self) -> Result<LieAlgebra<T>> {
        let dim = self.dim;
        let one_based = |k: usize| -> Result<usize> {
            if k == 0 || k > dim {
                Err(Error::InvalidAlgebra(format!(
                    "basis index {k} outside 1..={dim}"
                )))
            } else {
                Ok(k - 1)
            }
        };
        let mut parsed: Vec<(usize, usize, Vec<(usize, f64)>)> = Vec::new();
        for b in &self.brackets {
            let mut coeffs = Vec::new();
            for (key, &val) in &b.coeffs {
                let k: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidAlgebra(format!("bad basis index `{key}`")))?;
                coeffs.push((one_based(k)?, val));
            }
            parsed.push((one_based(b.i)?, one_based(b.j)?, coeffs));
        }
        let refs: Vec<(usize, usize, &[(usize, f64)])> = parsed
            .iter()
            .map(|(i, j, c)| (*i, *j, c.as_slice()))
            .collect();
        LieAlgebra::from_brackets(
            self.name.unwrap_or_else(|| "custom".into()),
            dim,
            &refs,
            self.labels,
        )
    }
}

/// Matrix realization `a_α ↦ ρ(a_α)` of a Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRep<T> {
    n: usize,
    mats: Vec<Mat<T>>,
}

impl<T: Real> MatrixRep<T> {
    /// Validates the homomorphism property before returning.
    pub fn new(alg: &LieAlgebra<T>, mats: Vec<Mat<T>>, tol: f64) -> Result<Self> {
        if mats.len() != alg.dim() {
            return Err(Error::DimensionMismatch {
                expected: alg.dim(),
                got: mats.len(),
            });
        }
        let n = mats[0].rows();
        for m in &mats {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.rows().max(m.cols()),
                });
            }
        }
        let rep = MatrixRep { n, mats };
        let (alpha, beta, residual) = rep.homomorphism_residual(alg);
        if !(residual <= tol) {
            return Err(Error::NotAHomomorphism {
                alpha,
                beta,
                residual,
            });
        }
        Ok(rep)
    }

    /// Largest Frobenius residual of `[ρ_α, ρ_β] − Σ_γ f ρ_γ` and where it occurs.
    pub fn homomorphism_residual(&self, alg: &LieAlgebra<T>) -> (usize, usize, f64) {
        let r = alg.dim();
        let mut worst = (0, 0, 0.0f64);
        for a in 0..r {
            for b in a + 1..r {
                let mut diff = self.mats[a].commutator(&self.mats[b]);
                for g in 0..r {
                    let c = alg.structure(a, b, g);
                    if c != T::zero() {
                        diff = &diff - &self.mats[g].scale(c);
                    }
                }
                let res = diff.frobenius_norm().to_f64_lossy();
                if !(res <= worst.2) {
                    worst = (a, b, res);
                }
            }
        }
        worst
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[Mat<T>] {
        &self.mats
    }

    pub fn generator(&self, alpha: usize) -> &Mat<T> {
        &self.mats[alpha]
    }

    /// `ρ(x) = Σ_α x_α ρ(a_α)`.
    pub fn image(&self, x: &AlgebraElement<T>) -> Mat<T> {
        let mut out = Mat::zeros(self.n, self.n);
        for (c, m) in x.coords.iter().zip(&self.mats) {
            if *c != T::zero() {
                out = &out + &m.scale(*c);
            }
        }
        out
    }

    /// Least-squares coordinates of `m` in the span of the generators.
    ///
    /// Fails when the generators are (numerically) linearly dependent, or when
    /// `m` is not in their span.
    pub fn pullback(&self, m: &Mat<T>) -> Result<AlgebraElement<T>> {
        let r = self.mats.len();
        let dot = |x: &Mat<T>, y: &Mat<T>| -> T {
            x.as_slice()
                .iter()
                .zip(y.as_slice())
                .map(|(&a, &b)| a * b)
                .sum()
        };
        let gram = Mat::from_fn(r, r, |i, j| dot(&self.mats[i], &self.mats[j]));
        let rhs: Vec<T> = self.mats.iter().map(|g| dot(g, m)).collect();
        let cond = gram.condition_number();
        if !(cond.to_f64_lossy() < 1e12) {
            return Err(Error::PullbackFailure(format!(
                "generators are linearly dependent (Gram condition {:e})",
                cond.to_f64_lossy()
            )));
        }
        let coords = gram
            .solve(&rhs)
            .map_err(|_| Error::PullbackFailure("singular Gram matrix".into()))?;
        let x = AlgebraElement::new(coords);
        let residual = (&self.image(&x) - m).frobenius_norm();
        let scale = m.frobenius_norm().max(T::one());
        if residual > T::lit(1e-6) * scale {
            return Err(Error::PullbackFailure(format!(
                "matrix is not in the span of the generators (residual {:e})",
                residual.to_f64_lossy()
            )));
        }
        Ok(x)
    }
}

/// Names accepted by [`builtin_algebra`].
pub const BUILTIN_ALGEBRAS: [&str; 4] = ["heisenberg3", "heisenberg4_central", "quadratic6", "sl2"];

/// Algebra from the catalog together with its faithful matrix realization.
#[derive(Clone, Debug)]
pub struct BuiltinAlgebra<T> {
    pub algebra: LieAlgebra<T>,
    pub rep: Option<MatrixRep<T>>,
}

fn unit<T: Real>(n: usize, entries: &[(usize, usize, f64)]) -> Mat<T> {
    let mut m = Mat::zeros(n, n);
    for &(i, j, v) in entries {
        m[(i, j)] = T::lit(v);
    }
    m
}

fn labels(names: &[&str]) -> Option<Vec<String>> {
    Some(names.iter().map(|s| s.to_string()).collect())
}

/// Looks up a catalog algebra by name.
///
/// * `heisenberg3`: `[a1, a2] = -a3`, realized by strictly upper triangular
///   3x3 matrices.
/// * `heisenberg4_central`: `[a1, a2] = -a3`, `[a2, a3] = -a4`, the algebra of
///   `-iH` for `H = P²/2, -X, P, -I`.
/// * `quadratic6`: the skew operators `-iH` for `H = P²/2, (XP+PX)/4, X²/2,
///   -P, X, I`, realized by 4x4 matrices of the Jacobi group.
/// * `sl2`: the first three elements of `quadratic6`, realized by the
///   generators of the linear classical flow on phase space.
pub fn builtin_algebra<T: Real>(name: &str) -> Result<BuiltinAlgebra<T>> {
    let tol = Tolerances::default();
    let (algebra, mats): (LieAlgebra<T>, Vec<Mat<T>>) = match name {
        "heisenberg3" => (
            LieAlgebra::from_brackets(
                name,
                3,
                &[(0, 1, &[(2, -1.0)])],
                labels(&["a1", "a2", "a3"]),
            )?,
            vec![
                unit(3, &[(0, 1, -1.0)]),
                unit(3, &[(1, 2, -1.0)]),
                unit(3, &[(0, 2, -1.0)]),
            ],
        ),
        "heisenberg4_central" => (
            LieAlgebra::from_brackets(
                name,
                4,
                &[(0, 1, &[(2, -1.0)]), (1, 2, &[(3, -1.0)])],
                labels(&["P^2/2", "-X", "P", "-I"]),
            )?,
            vec![
                unit(4, &[(2, 3, 1.0)]),
                unit(4, &[(0, 1, 1.0), (1, 2, 1.0)]),
                unit(4, &[(1, 3, 1.0)]),
                unit(4, &[(0, 3, -1.0)]),
            ],
        ),
        "quadratic6" => (quadratic6_algebra()?, quadratic6_mats()),
        "sl2" => (
            LieAlgebra::from_brackets(
                name,
                3,
                &SL2_BRACKETS,
                labels(&["P^2/2", "(XP+PX)/4", "X^2/2"]),
            )?,
            sl2_mats(),
        ),
        other => return Err(Error::UnknownAlgebra(other.to_string())),
    };
    let report = algebra.validate(tol.validation);
    if !report.passed() {
        return Err(Error::InvalidAlgebra(report.violations[0].to_string()));
    }
    let rep = MatrixRep::new(&algebra, mats, tol.homomorphism)?;
    Ok(BuiltinAlgebra {
        algebra,
        rep: Some(rep),
    })
}

const SL2_BRACKETS: [(usize, usize, &[(usize, f64)]); 3] = [
    (0, 1, &[(0, 1.0)]),
    (0, 2, &[(1, 2.0)]),
    (1, 2, &[(2, 1.0)]),
];

fn quadratic6_algebra<T: Real>() -> Result<LieAlgebra<T>> {
    LieAlgebra::from_brackets(
        "quadratic6",
        6,
        &[
            SL2_BRACKETS[0],
            SL2_BRACKETS[1],
            SL2_BRACKETS[2],
            (0, 4, &[(3, -1.0)]),
            (1, 3, &[(3, -0.5)]),
            (1, 4, &[(4, 0.5)]),
            (2, 3, &[(4, 1.0)]),
            (3, 4, &[(5, -1.0)]),
        ],
        labels(&["P^2/2", "(XP+PX)/4", "X^2/2", "-P", "X", "I"]),
    )
}

/// The 2x2 matrices `M_1 = [[0,1],[0,0]]`, `M_2 = diag(1,-1)/2`,
/// `M_3 = [[0,0],[-1,0]]`.
///
/// They satisfy `[M_α, M_β] = -Σ f M_γ` with the `sl2` constants, so the
/// shipped representation is `ρ(a_α) = -M_α`. The matrix `Σ b_α M_α` is the
/// Hamiltonian vector field of `Σ b_α H_α` acting on `(x, p)`.
pub fn sl2_hamiltonian_matrices<T: Real>() -> [Mat<T>; 3] {
    [
        unit(2, &[(0, 1, 1.0)]),
        unit(2, &[(0, 0, 0.5), (1, 1, -0.5)]),
        unit(2, &[(1, 0, -1.0)]),
    ]
}

fn sl2_mats<T: Real>() -> Vec<Mat<T>> {
    sl2_hamiltonian_matrices::<T>().iter().map(|m| -m).collect()
}

/// Embeds `(K, u, θ)` as `[[0, ½uᵀJ, θ], [0, K, u], [0, 0, 0]]` with
/// `J = [[0,1],[-1,0]]`.
pub fn jacobi_algebra_matrix<T: Real>(k: &Mat<T>, u: [T; 2], theta: T) -> Mat<T> {
    let half = T::lit(0.5);
    let mut m = Mat::zeros(4, 4);
    // ½ uᵀ J = ½ (-u_p, u_x)
    m[(0, 1)] = -half * u[1];
    m[(0, 2)] = half * u[0];
    m[(0, 3)] = theta;
    for i in 0..2 {
        for j in 0..2 {
            m[(1 + i, 1 + j)] = k[(i, j)];
        }
        m[(1 + i, 3)] = u[i];
    }
    m
}

fn quadratic6_mats<T: Real>() -> Vec<Mat<T>> {
    let z = T::zero();
    let o = T::one();
    let zero2 = Mat::zeros(2, 2);
    let mut mats: Vec<Mat<T>> = sl2_mats::<T>()
        .iter()
        .map(|k| jacobi_algebra_matrix(k, [z, z], z))
        .collect();
    mats.push(jacobi_algebra_matrix(&zero2, [o, z], z));
    mats.push(jacobi_algebra_matrix(&zero2, [z, o], z));
    mats.push(jacobi_algebra_matrix(&zero2, [z, z], -o));
    mats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, i: usize) -> AlgebraElement<f64> {
        AlgebraElement::basis(dim, i)
    }

    #[test]
    fn heisenberg3_bracket_and_ad() {
        let h = builtin_algebra::<f64>("heisenberg3").unwrap().algebra;
        assert_eq!(
            h.bracket(&e(3, 0), &e(3, 1)).unwrap().coords,
            vec![0.0, 0.0, -1.0]
        );
        let ad = h.ad_matrix(0).unwrap();
        let mut expected = Mat::zeros(3, 3);
        expected[(2, 1)] = -1.0;
        assert_eq!(ad, expected);
        assert!(h.is_solvable());
    }

    #[test]
    fn quadratic6_brackets_and_center() {
        let q = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
        assert_eq!(
            q.bracket(&e(6, 0), &e(6, 2)).unwrap().coords,
            vec![0.0, 2.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert!(q.ad_matrix(5).unwrap().is_zero());
        assert!(!q.is_solvable());
        assert_eq!(q.derived_series_dims(), vec![6]);
    }

    #[test]
    fn sl2_ad_of_dilation_is_diagonal() {
        let s = builtin_algebra::<f64>("sl2").unwrap().algebra;
        assert_eq!(s.ad_matrix(1).unwrap(), Mat::diag(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn bracket_is_antisymmetric_on_self() {
        let q = builtin_algebra::<f64>("quadratic6").unwrap().algebra;
        let x = AlgebraElement::new(vec![0.3, -1.2, 0.7, 2.0, -0.4, 5.0]);
        assert!(q.bracket(&x, &x).unwrap().norm_inf() < 1e-15);
        assert!(matches!(
            q.bracket(&x, &e(3, 0)),
            Err(Error::DimensionMismatch {
                expected: 6,
                got: 3
            })
        ));
    }

    #[test]
    fn validation_reports_one_sided_flip() {
        let h = builtin_algebra::<f64>("heisenberg3").unwrap().algebra;
        let mut f = h.structure_tensor().to_vec();
        // [a1, a2] = +a3 while [a2, a1] stays +a3
        f[5] = 1.0;
        let bad = LieAlgebra::from_tensor("bad", 3, f, None).unwrap();
        let report = bad.validate(1e-12);
        assert!(!report.passed());
        assert_eq!(
            report.violations[0],
            Violation::Antisymmetry {
                alpha: 0,
                beta: 1,
                gamma: 2,
                residual: 2.0
            }
        );
        assert_eq!(
            report.violations[0].to_string(),
            "antisymmetry violated at (1,2,3): residual 2e0"
        );
    }

    #[test]
    fn jacobi_violation_detected() {
        // [a1,a2]=a2, [a1,a3]=a2, [a2,a3]=a1 breaks the Jacobi identity
        let bad = LieAlgebra::<f64>::from_brackets(
            "bad",
            3,
            &[
                (0, 1, &[(1, 1.0)]),
                (0, 2, &[(1, 1.0)]),
                (1, 2, &[(0, 1.0)]),
            ],
            None,
        )
        .unwrap();
        let report = bad.validate(1e-12);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Jacobi { .. })));
    }

    #[test]
    fn abelian_passes() {
        let a = LieAlgebra::<f64>::abelian(4);
        assert!(a.validate(1e-12).passed());
        assert!(a.ad_matrix(3).unwrap().is_zero());
        assert_eq!(
            a.ad_matrix(4).unwrap_err(),
            Error::IndexOutOfRange { index: 4, dim: 4 }
        );
    }

    #[test]
    fn catalog_and_unknown_names() {
        for name in BUILTIN_ALGEBRAS {
            let b = builtin_algebra::<f64>(name).unwrap();
            let report = b.algebra.validate(1e-14);
            assert!(report.passed(), "{name}");
            let rep = b.rep.unwrap();
            assert!(rep.homomorphism_residual(&b.algebra).2 < 1e-14, "{name}");
        }
        assert!(matches!(
            builtin_algebra::<f64>("so3"),
            Err(Error::UnknownAlgebra(_))
        ));
        assert!(builtin_algebra::<f32>("quadratic6").is_ok());
    }

    #[test]
    fn hamiltonian_matrices_satisfy_opposite_brackets() {
        let s = builtin_algebra::<f64>("sl2").unwrap();
        let m = sl2_hamiltonian_matrices::<f64>();
        let neg_alg = LieAlgebra::from_tensor(
            "opposite",
            3,
            s.algebra.structure_tensor().iter().map(|x| -x).collect(),
            None,
        )
        .unwrap();
        let opposite = MatrixRep::new(&neg_alg, m.to_vec(), 1e-14);
        assert!(opposite.is_ok());
        assert!(matches!(
            MatrixRep::new(&s.algebra, m.to_vec(), 1e-10),
            Err(Error::NotAHomomorphism { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": -1.0}}], "labels": ["x", "y", "z"]}"#;
        let alg = LieAlgebra::<f64>::from_json(text).unwrap();
        let h = builtin_algebra::<f64>("heisenberg3").unwrap().algebra;
        assert_eq!(alg.structure_tensor(), h.structure_tensor());
        assert_eq!(alg.labels(), ["x", "y", "z"]);

        let reversed = r#"{"dim": 3, "brackets": [{"i": 2, "j": 1, "coeffs": {"3": 1.0}}]}"#;
        assert!(matches!(
            LieAlgebra::<f64>::from_json(reversed),
            Err(Error::InvalidAlgebra(_))
        ));
        let out_of_range = r#"{"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": 1.0}}]}"#;
        assert!(LieAlgebra::<f64>::from_json(out_of_range).is_err());
        assert!(matches!(
            LieAlgebra::<f64>::from_json("{"),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn pullback_recovers_coordinates() {
        let b = builtin_algebra::<f64>("quadratic6").unwrap();
        let rep = b.rep.unwrap();
        let x = AlgebraElement::new(vec![0.5, -1.0, 2.0, 0.25, -3.0, 1.5]);
        let back = rep.pullback(&rep.image(&x)).unwrap();
        for (a, b) in back.coords.iter().zip(&x.coords) {
            assert!((a - b).abs() < 1e-13);
        }
        let mut outside = Mat::zeros(4, 4);
        outside[(3, 0)] = 1.0;
        assert!(matches!(
            rep.pullback(&outside),
            Err(Error::PullbackFailure(_))
        ));
    }

    #[test]
    fn dependent_generators_fail_pullback() {
        let alg = LieAlgebra::<f64>::abelian(2);
        let m = Mat::diag(&[1.0, 2.0]);
        let rep = MatrixRep::new(&alg, vec![m.clone(), m.scale(2.0)], 1e-10).unwrap();
        assert!(matches!(rep.pullback(&m), Err(Error::PullbackFailure(_))));
    }
}
