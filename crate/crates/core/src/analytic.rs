//! Floating-point checks on the Siegel upper half-space: the Möbius action
//! `Ω ↦ (AΩ + B)(CΩ + D)⁻¹`, the automorphy factor `det(CΩ + D)` and the weight-k
//! slash action. The multiplier character is taken to be 1 (Sp only).

use num_complex::Complex;
use num_traits::{Float, NumCast};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::finalg::Matrix;

/// Floating-point scalar usable as a matrix entry.
pub trait Real: Float + std::fmt::Debug {}

impl<T: Float + std::fmt::Debug> Real for T {}

/// Tolerances used when validating points and matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub symmetric: T,
    pub definite: T,
    pub symplectic: T,
    /// pivots below this magnitude are treated as singular
    pub pivot: T,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        let c = |x: f64| <T as NumCast>::from(x).expect("representable");
        Self {
            symmetric: c(1e-9),
            definite: c(1e-12),
            symplectic: c(1e-9),
            pivot: c(1e-12),
        }
    }
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// LU with partial pivoting; returns the factored matrix, row permutation and its sign.
fn lu<T: Real>(m: &Matrix<Complex<T>>, tol: T) -> Result<(Matrix<Complex<T>>, Vec<usize>, T)> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not square",
            n,
            m.cols()
        )));
    }
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();
    let scale = m
        .as_slice()
        .iter()
        .fold(T::one(), |acc, z| acc.max(z.norm()));
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| {
                a[(i, k)]
                    .norm()
                    .partial_cmp(&a[(j, k)].norm())
                    .expect("finite")
            })
            .expect("nonempty range");
        if a[(piv, k)].norm() <= tol * scale {
            return Err(Error::Conditioning(format!(
                "pivot {} in column {k}",
                a[(piv, k)].norm().to_f64().unwrap_or(f64::NAN)
            )));
        }
        if piv != k {
            for c in 0..n {
                let tmp = a[(k, c)];
                a[(k, c)] = a[(piv, c)];
                a[(piv, c)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        for r in k + 1..n {
            let f = a[(r, k)] / a[(k, k)];
            a[(r, k)] = f;
            for c in k + 1..n {
                let v = a[(k, c)];
                a[(r, c)] = a[(r, c)] - f * v;
            }
        }
    }
    Ok((a, perm, sign))
}

pub fn complex_determinant<T: Real>(m: &Matrix<Complex<T>>, tol: T) -> Result<Complex<T>> {
    match lu(m, tol) {
        Ok((a, _, sign)) => {
            Ok((0..m.rows()).fold(Complex::new(sign, T::zero()), |acc, i| acc * a[(i, i)]))
        }
        Err(Error::Conditioning(_)) => Ok(czero()),
        Err(e) => Err(e),
    }
}

/// Inverse by LU with partial pivoting.
pub fn complex_inverse<T: Real>(m: &Matrix<Complex<T>>, tol: T) -> Result<Matrix<Complex<T>>> {
    let n = m.rows();
    let (a, perm, _) = lu(m, tol)?;
    let mut inv = Matrix::zeros(n, n);
    for col in 0..n {
        // solve L y = P e_col, then U x = y
        let mut y = vec![czero::<T>(); n];
        for i in 0..n {
            let mut s = if perm[i] == col { cone() } else { czero() };
            for j in 0..i {
                s = s - a[(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s = s - a[(i, j)] * inv[(j, col)];
            }
            inv[(i, col)] = s / a[(i, i)];
        }
    }
    Ok(inv)
}

/// Whether a real symmetric matrix exceeds `tol·I`, by Cholesky.
pub fn is_positive_definite<T: Real>(m: &Matrix<T>, tol: T) -> bool {
    let n = m.rows();
    let mut l = Matrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[(i, j)];
            if i == j {
                s = s - tol;
            }
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= T::zero() {
                    return false;
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    true
}

/// A point of the Siegel upper half-space `ℍ_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint<T> {
    omega: Matrix<Complex<T>>,
}

impl<T: Real> SiegelPoint<T> {
    pub fn new(omega: Matrix<Complex<T>>, tol: &Tolerance<T>) -> Result<Self> {
        let g = omega.rows();
        if g != omega.cols() || g == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} period matrix",
                g,
                omega.cols()
            )));
        }
        let asym = (0..g)
            .flat_map(|i| (0..g).map(move |j| (i, j)))
            .fold(T::zero(), |acc, (i, j)| {
                acc.max((omega[(i, j)] - omega[(j, i)]).norm())
            });
        if asym > tol.symmetric {
            return Err(Error::InvalidParameter(
                "period matrix is not symmetric".into(),
            ));
        }
        let imag = omega.map(|z| z.im);
        if !is_positive_definite(&imag, tol.definite) {
            return Err(Error::InvalidParameter(
                "imaginary part is not positive definite".into(),
            ));
        }
        Ok(Self { omega })
    }

    /// `x + iy` for real symmetric `x`, `y`.
    pub fn from_parts(x: &Matrix<T>, y: &Matrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        let g = x.rows();
        let mut omega = Matrix::zeros(g, g);
        for i in 0..g {
            for j in 0..g {
                omega[(i, j)] = Complex::new(x[(i, j)], y[(i, j)]);
            }
        }
        Self::new(omega, tol)
    }

    /// `i·I_g`.
    pub fn base_point(g: usize) -> Self {
        let mut omega = Matrix::zeros(g, g);
        for i in 0..g {
            omega[(i, i)] = Complex::new(T::zero(), T::one());
        }
        Self { omega }
    }

    pub fn genus(&self) -> usize {
        self.omega.rows()
    }

    pub fn omega(&self) -> &Matrix<Complex<T>> {
        &self.omega
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.omega
            .as_slice()
            .iter()
            .zip(other.omega.as_slice())
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }
}

fn block<T: Real>(m: &Matrix<T>, r0: usize, c0: usize, g: usize) -> Matrix<Complex<T>> {
    let mut out = Matrix::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            out[(i, j)] = Complex::new(m[(r0 + i, c0 + j)], T::zero());
        }
    }
    out
}

/// Real `J`.
pub fn real_j<T: Real>(g: usize) -> Matrix<T> {
    let mut j = Matrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        j[(i, g + i)] = T::one();
        j[(g + i, i)] = -T::one();
    }
    j
}

/// `max |γᵀJγ − J|`.
pub fn symplectic_defect<T: Real>(gamma: &Matrix<T>) -> Result<T> {
    let g = gamma.rows() / 2;
    let j = real_j::<T>(g);
    let lhs = gamma.transpose().mul(&j)?.mul(gamma)?;
    Ok(lhs
        .as_slice()
        .iter()
        .zip(j.as_slice())
        .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs())))
}

fn check_gamma<T: Real>(gamma: &Matrix<T>, g: usize, tol: &Tolerance<T>) -> Result<()> {
    if gamma.rows() != 2 * g || gamma.cols() != 2 * g {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} acting on genus {g}",
            gamma.rows(),
            gamma.cols()
        )));
    }
    if symplectic_defect(gamma)? > tol.symplectic {
        return Err(Error::InvalidParameter("matrix is not symplectic".into()));
    }
    Ok(())
}

/// `CΩ + D`.
fn denominator<T: Real>(
    gamma: &Matrix<T>,
    omega: &Matrix<Complex<T>>,
) -> Result<Matrix<Complex<T>>> {
    let g = omega.rows();
    block(gamma, g, 0, g)
        .mul(omega)?
        .add(&block(gamma, g, g, g))
}

/// `γ·Ω = (AΩ + B)(CΩ + D)⁻¹`.
pub fn moebius<T: Real>(
    gamma: &Matrix<T>,
    point: &SiegelPoint<T>,
    tol: &Tolerance<T>,
) -> Result<SiegelPoint<T>> {
    let g = point.genus();
    check_gamma(gamma, g, tol)?;
    let num = block(gamma, 0, 0, g)
        .mul(&point.omega)?
        .add(&block(gamma, 0, g, g))?;
    let den = complex_inverse(&denominator(gamma, &point.omega)?, tol.pivot)?;
    SiegelPoint::new(num.mul(&den)?, tol)
}

/// `j(γ, Ω) = det(CΩ + D)`.
pub fn automorphy_factor<T: Real>(
    gamma: &Matrix<T>,
    point: &SiegelPoint<T>,
    tol: &Tolerance<T>,
) -> Result<Complex<T>> {
    check_gamma(gamma, point.genus(), tol)?;
    let d = denominator(gamma, &point.omega)?;
    lu(&d, tol.pivot)?;
    complex_determinant(&d, tol.pivot)
}

/// Polynomial test function `f(Ω) = 1 + tr Ω + det Ω + (Ω_{0,g-1})²`.
pub fn test_function<T: Real>(point: &SiegelPoint<T>) -> Complex<T> {
    let g = point.genus();
    let w = &point.omega;
    let tr = (0..g).fold(czero::<T>(), |acc, i| acc + w[(i, i)]);
    let det = complex_determinant(w, T::zero()).expect("square");
    cone::<T>() + tr + det + w[(0, g - 1)] * w[(0, g - 1)]
}

/// `(f|[γ]_k)(Ω) = det(CΩ + D)^{-k}·f(γΩ)`.
pub fn slash<T: Real>(
    f: &dyn Fn(&SiegelPoint<T>) -> Complex<T>,
    gamma: &Matrix<T>,
    k: i32,
    point: &SiegelPoint<T>,
    tol: &Tolerance<T>,
) -> Result<Complex<T>> {
    let j = automorphy_factor(gamma, point, tol)?;
    Ok(j.powi(-k) * f(&moebius(gamma, point, tol)?))
}

fn relative(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Residuals of one instance `(γ₁, γ₂, Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `‖(γ₁γ₂)Ω − γ₁(γ₂Ω)‖`
    pub moebius: f64,
    /// `j(γ₁γ₂, Ω)` against `j(γ₁, γ₂Ω)·j(γ₂, Ω)`
    pub cocycle: f64,
    /// `f|[γ₁γ₂]_k` against `(f|[γ₁]_k)|[γ₂]_k`
    pub slash: f64,
}

pub fn residuals(
    g1: &Matrix<f64>,
    g2: &Matrix<f64>,
    point: &SiegelPoint<f64>,
    k: i32,
) -> Result<Residuals> {
    let tol = Tolerance::default();
    let prod = g1.mul(g2)?;
    let inner = moebius(g2, point, &tol)?;
    let direct = moebius(&prod, point, &tol)?;
    let nested = moebius(g1, &inner, &tol)?;
    let scale = direct
        .omega
        .as_slice()
        .iter()
        .fold(1.0f64, |acc, z| acc.max(z.norm()));
    let j12 = automorphy_factor(&prod, point, &tol)?;
    let j1 = automorphy_factor(g1, &inner, &tol)?;
    let j2 = automorphy_factor(g2, point, &tol)?;
    let f = |p: &SiegelPoint<f64>| test_function(p);
    let lhs = slash(&f, &prod, k, point, &tol)?;
    let f1 = |p: &SiegelPoint<f64>| slash(&f, g1, k, p, &tol).expect("validated on this orbit");
    let rhs = slash(&f1, g2, k, point, &tol)?;
    Ok(Residuals {
        moebius: direct.max_abs_diff(&nested) / scale,
        cocycle: relative(j12, j1 * j2),
        slash: relative(lhs, rhs),
    })
}

/// Sp(2g, ℤ) word generators: `J` and `[[I, S], [0, I]]` for `S` elementary symmetric.
fn word_generators(g: usize) -> Vec<Matrix<f64>> {
    let mut gens = vec![real_j::<f64>(g), real_j::<f64>(g).scale(&-1.0)];
    for i in 0..g {
        for j in i..g {
            for s in [1.0, -1.0] {
                let mut m = Matrix::<f64>::identity(2 * g);
                m[(i, g + j)] = s;
                m[(j, g + i)] = s;
                gens.push(m);
            }
        }
    }
    gens
}

pub fn random_word<R: Rng>(g: usize, max_len: usize, rng: &mut R) -> Matrix<f64> {
    let gens = word_generators(g);
    let len = rng.gen_range(0..=max_len);
    (0..len).fold(Matrix::identity(2 * g), |acc, _| {
        acc.mul(&gens[rng.gen_range(0..gens.len())])
            .expect("square")
    })
}

pub fn random_point<R: Rng>(g: usize, rng: &mut R) -> SiegelPoint<f64> {
    let mut x = Matrix::<f64>::zeros(g, g);
    let mut a = Matrix::<f64>::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            a[(i, j)] = rng.gen_range(-0.5..0.5);
            if j >= i {
                let v = rng.gen_range(-1.0..1.0);
                x[(i, j)] = v;
                x[(j, i)] = v;
            }
        }
    }
    let y = a
        .mul(&a.transpose())
        .and_then(|m| m.add(&Matrix::identity(g).scale(&0.5)))
        .expect("square");
    SiegelPoint::from_parts(&x, &y, &Tolerance::default())
        .expect("positive definite by construction")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub g: usize,
    pub seed: u64,
    pub instances: usize,
    pub weight: i32,
    pub max_moebius: f64,
    pub max_cocycle: f64,
    pub max_slash: f64,
    /// instances whose images failed symmetry or definiteness
    pub invalid_images: usize,
}

impl AnalyticReport {
    pub fn passed(&self, bound: f64) -> bool {
        self.invalid_images == 0
            && self.max_moebius < bound
            && self.max_cocycle < bound
            && self.max_slash < bound
    }
}

/// `count` seeded instances of random words of length ≤ 6 and random points.
pub fn analytic_sanity(g: usize, count: usize, k: i32, seed: u64) -> Result<AnalyticReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AnalyticReport {
        g,
        seed,
        instances: count,
        weight: k,
        max_moebius: 0.0,
        max_cocycle: 0.0,
        max_slash: 0.0,
        invalid_images: 0,
    };
    for _ in 0..count {
        let g1 = random_word(g, 6, &mut rng);
        let g2 = random_word(g, 6, &mut rng);
        let point = random_point(g, &mut rng);
        match residuals(&g1, &g2, &point, k) {
            Ok(r) => {
                report.max_moebius = report.max_moebius.max(r.moebius);
                report.max_cocycle = report.max_cocycle.max(r.cocycle);
                report.max_slash = report.max_slash.max(r.slash);
            }
            Err(Error::InvalidParameter(_)) => report.invalid_images += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn identity_and_fixed_point() {
        let i = SiegelPoint::<f64>::base_point(1);
        assert_eq!(moebius(&Matrix::identity(2), &i, &tol()).unwrap(), i);
        let image = moebius(&real_j(1), &i, &tol()).unwrap();
        assert!(image.max_abs_diff(&i) < 1e-15);
        let z = SiegelPoint::new(
            Matrix::from_rows(vec![vec![Complex::new(0.3, 2.0)]]),
            &tol(),
        )
        .unwrap();
        // -1/z
        let expect = -Complex::new(1.0, 0.0) / Complex::new(0.3, 2.0);
        assert!((moebius(&real_j(1), &z, &tol()).unwrap().omega()[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad = Matrix::from_rows(vec![vec![Complex::new(0.0, -1.0)]]);
        assert!(SiegelPoint::new(bad, &tol()).is_err());
        let asym = Matrix::from_rows(vec![
            vec![Complex::new(0.0, 1.0), Complex::new(1.0, 0.0)],
            vec![Complex::new(0.0, 0.0), Complex::new(0.0, 1.0)],
        ]);
        assert!(SiegelPoint::new(asym, &tol()).is_err());
        let not_sp = Matrix::<f64>::identity(2).scale(&2.0);
        assert!(moebius(&not_sp, &SiegelPoint::base_point(1), &tol()).is_err());
    }

    #[test]
    fn cocycle_trivial_for_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_point(2, &mut rng);
        let g1 = random_word(2, 6, &mut rng);
        let r = residuals(&g1, &Matrix::identity(4), &p, 4).unwrap();
        assert_eq!(r.cocycle, 0.0);
    }

    #[test]
    fn classical_cocycle_g1() {
        // j(γ, τ) = cτ + d on SL(2, ℤ)
        let tau = SiegelPoint::new(
            Matrix::from_rows(vec![vec![Complex::new(0.2, 1.3)]]),
            &tol(),
        )
        .unwrap();
        let gamma = Matrix::from_rows(vec![vec![2.0, 1.0], vec![5.0, 3.0]]);
        let j = automorphy_factor(&gamma, &tau, &tol()).unwrap();
        assert!((j - Complex::new(5.0 * 0.2 + 3.0, 5.0 * 1.3)).norm() < 1e-14);
        let r = analytic_sanity(1, 500, 4, 11).unwrap();
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn sanity_g2() {
        let r = analytic_sanity(2, 1000, 6, 42).unwrap();
        assert!(r.passed(1e-8), "{r:?}");
    }

    #[test]
    fn inverse_and_determinant() {
        let m = Matrix::from_rows(vec![
            vec![Complex::new(0.0, 0.0), Complex::new(2.0, 1.0)],
            vec![Complex::new(1.0, -1.0), Complex::new(3.0, 0.0)],
        ]);
        let inv = complex_inverse(&m, 1e-12).unwrap();
        let id = m.mul(&inv).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - Complex::new(e, 0.0)).norm() < 1e-14);
            }
        }
        let det = complex_determinant(&m, 1e-12).unwrap();
        assert!((det - (-(Complex::new(2.0, 1.0) * Complex::new(1.0, -1.0)))).norm() < 1e-14);
        let singular = Matrix::from_rows(vec![
            vec![Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)],
            vec![Complex::new(2.0, 0.0), Complex::new(4.0, 0.0)],
        ]);
        assert!(matches!(
            complex_inverse(&singular, 1e-12),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn generic_over_f32() {
        let t = Tolerance::<f32>::default();
        let p = SiegelPoint::<f32>::base_point(2);
        let img = moebius(&real_j::<f32>(2), &p, &t).unwrap();
        assert!(img.max_abs_diff(&p) < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn action_preserves_half_space(seed in any::<u64>(), g in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_point(g, &mut rng);
            let gamma = random_word(g, 6, &mut rng);
            prop_assert!(symplectic_defect(&gamma).unwrap() == 0.0);
            let img = moebius(&gamma, &p, &tol()).unwrap();
            let back = moebius(&gamma_inverse(&gamma), &img, &tol()).unwrap();
            prop_assert!(back.max_abs_diff(&p) < 1e-8);
        }
    }

    fn gamma_inverse(gamma: &Matrix<f64>) -> Matrix<f64> {
        // γ⁻¹ = −J γᵀ J
        let j = real_j::<f64>(gamma.rows() / 2);
        j.mul(&gamma.transpose())
            .unwrap()
            .mul(&j)
            .unwrap()
            .scale(&-1.0)
    }
}
