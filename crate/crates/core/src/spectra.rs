//! Characteristic polynomials, palindromicity, spectral radii and Perron rays.
//!
//! Everything up to the squarefree decomposition is exact. Roots are found
//! as eigenvalues of companion matrices of the squarefree factors and then
//! polished by Newton's method against those exact factors, so multiplicities
//! come from algebra rather than from clustering floating-point roots.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::linalg::{big_to_f64, IntMatrix, Rational};

/// Relative tolerance used to decide dominance and simplicity.
pub const DEFAULT_SIMPLICITY_TOL: f64 = 1e-8;

/// Integer polynomial stored from the leading coefficient down to the
/// constant term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Palindromy {
    Palindromic,
    AntiPalindromic,
    Neither,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPolynomial {
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    /// Coefficients, leading first and constant term last.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn negated(&self) -> Self {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Exact evaluation at an integer.
    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn palindromy(&self) -> Palindromy {
        palindrome_check(self)
    }

    /// Compensated (double-double) Horner evaluation at a complex point.
    pub fn eval_compensated(&self, z: Complex<f64>) -> Complex<f64> {
        eval_dd(&self.coeffs, z)
    }
}

/// `det(νI - A)` by the Faddeev–LeVerrier recursion. Every division is exact
/// over the integers, so no fractions ever appear.
pub fn char_poly(a: &IntMatrix) -> IntPolynomial {
    assert!(a.is_square(), "characteristic polynomial of a non-square matrix");
    let n = a.rows();
    let mut coeffs = vec![BigInt::one()];
    let mut m = IntMatrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = a.mul(&m);
        for i in 0..n {
            let v = next.get(i, i) + &coeffs[k - 1];
            next.set(i, i, v);
        }
        m = next;
        let tr = a.mul(&m).trace();
        let (q, r) = (-tr).div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero(), "Faddeev-LeVerrier division must be exact");
        coeffs.push(q);
    }
    IntPolynomial { coeffs }
}

pub fn palindrome_check(p: &IntPolynomial) -> Palindromy {
    let c = &p.coeffs;
    let rev = c.iter().rev();
    if c.iter().zip(rev.clone()).all(|(a, b)| a == b) {
        Palindromy::Palindromic
    } else if c.iter().zip(rev).all(|(a, b)| *a == -b) {
        Palindromy::AntiPalindromic
    } else {
        Palindromy::Neither
    }
}

// --- exact polynomial arithmetic over Q (leading coefficient first) -------

type QPoly = Vec<Rational>;

fn trim(mut p: QPoly) -> QPoly {
    let lead = p.iter().position(|c| !c.is_zero()).unwrap_or(p.len());
    p.drain(..lead);
    p
}

fn derivative(p: &QPoly) -> QPoly {
    let d = p.len().saturating_sub(1);
    trim(
        p.iter()
            .take(d)
            .enumerate()
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(d - i)))
            .collect(),
    )
}

fn div_rem(p: &QPoly, q: &QPoly) -> (QPoly, QPoly) {
    assert!(!q.is_empty(), "polynomial division by zero");
    let mut r = trim(p.clone());
    if r.len() < q.len() {
        return (Vec::new(), r);
    }
    let mut quot = vec![Rational::zero(); r.len() - q.len() + 1];
    for i in 0..quot.len() {
        let f = &r[i] / &q[0];
        for (j, qc) in q.iter().enumerate() {
            let delta = &f * qc;
            r[i + j] -= delta;
        }
        quot[i] = f;
    }
    let rem = trim(r.split_off(quot.len()));
    (trim(quot), rem)
}

fn monic(p: QPoly) -> QPoly {
    let lead = p[0].clone();
    p.into_iter().map(|c| c / &lead).collect()
}

fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    if a.is_empty() {
        a
    } else {
        monic(a)
    }
}

/// Yun's squarefree decomposition: `p = Π f_i^i` with each `f_i` squarefree.
fn squarefree_factors(p: &IntPolynomial) -> Vec<(QPoly, usize)> {
    let f: QPoly = monic(trim(
        p.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect(),
    ));
    let mut out = Vec::new();
    if f.len() <= 1 {
        return out;
    }
    let df = derivative(&f);
    let a0 = gcd(&f, &df);
    let mut b = div_rem(&f, &a0).0;
    let mut c = div_rem(&df, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut i = 1;
    while b.len() > 1 {
        let a = gcd(&b, &d);
        if a.len() > 1 {
            out.push((a.clone(), i));
        }
        b = div_rem(&b, &a).0;
        c = div_rem(&d, &a).0;
        d = sub(&c, &derivative(&b));
        i += 1;
    }
    out
}

fn sub(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    let pad = |p: &QPoly, i: usize| {
        let off = n - p.len();
        if i >= off {
            p[i - off].clone()
        } else {
            Rational::zero()
        }
    };
    trim((0..n).map(|i| pad(a, i) - pad(b, i)).collect())
}

fn primitive_int(p: &QPoly) -> Vec<BigInt> {
    crate::linalg::primitive_integer_vector(p)
}

// --- floating-point root finding ------------------------------------------

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.0, o.0);
        let (hi, lo) = two_sum(s, e + self.1 + o.1);
        Dd(hi, lo)
    }
    fn mul_f(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.0, b);
        let (hi, lo) = two_sum(p, e + self.1 * b);
        Dd(hi, lo)
    }
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
}

fn big_to_dd(v: &BigInt) -> Dd {
    let hi = big_to_f64(v);
    if !hi.is_finite() {
        return Dd(hi, 0.0);
    }
    let rest = v - BigInt::from_f64(hi).unwrap_or_default();
    Dd(hi, rest.to_f64().unwrap_or(0.0))
}

fn eval_dd(coeffs: &[BigInt], z: Complex<f64>) -> Complex<f64> {
    let (mut re, mut im) = (Dd(0.0, 0.0), Dd(0.0, 0.0));
    for c in coeffs {
        let nre = re.mul_f(z.re).add(im.mul_f(z.im).neg()).add(big_to_dd(c));
        let nim = re.mul_f(z.im).add(im.mul_f(z.re));
        re = nre;
        im = nim;
    }
    Complex::new(re.0 + re.1, im.0 + im.1)
}

fn eval_derivative(coeffs: &[f64], z: Complex<f64>) -> Complex<f64> {
    let d = coeffs.len().saturating_sub(1);
    coeffs
        .iter()
        .take(d)
        .enumerate()
        .fold(Complex::new(0.0, 0.0), |acc, (i, &c)| {
            acc * z + Complex::new(c * (d - i) as f64, 0.0)
        })
}

fn companion_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[0];
    let mut c = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        c[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    // the unbounded Schur iteration can stall on orthogonal companions such as x⁴ + 1
    match Schur::try_new(c, f64::EPSILON, SCHUR_MAX_ITERATIONS) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => aberth_roots(coeffs),
    }
}

const SCHUR_MAX_ITERATIONS: usize = 10_000;
const ABERTH_MAX_ITERATIONS: usize = 2_000;

/// Simultaneous Aberth–Ehrlich iteration; `coeffs` must be squarefree.
fn aberth_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[0];
    let bound = 1.0 + coeffs[1..].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    // asymmetric start avoids symmetric stalls
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex::from_polar(0.5 * bound * (1.0 + 0.01 * k as f64), t)
        })
        .collect();
    let eval = |z: Complex<f64>| {
        coeffs
            .iter()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + Complex::new(c, 0.0))
    };
    for _ in 0..ABERTH_MAX_ITERATIONS {
        let mut moved = 0.0f64;
        for k in 0..n {
            let p = eval(z[k]);
            let dp = eval_derivative(coeffs, z[k]);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / z[k].norm().max(1.0));
            }
        }
        if moved <= 1e-15 {
            break;
        }
    }
    z
}

fn newton_polish(int_coeffs: &[BigInt], z0: Complex<f64>) -> Complex<f64> {
    let fc: Vec<f64> = int_coeffs.iter().map(big_to_f64).collect();
    let mut z = z0;
    for _ in 0..100 {
        let p = eval_dd(int_coeffs, z);
        let dp = eval_derivative(&fc, z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        // only accept steps that do not increase the residual
        if eval_dd(int_coeffs, next).norm() > p.norm() {
            break;
        }
        z = next;
        if step.norm() <= 1e-17 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// All roots with multiplicity, sorted by decreasing modulus then argument.
pub fn roots(p: &IntPolynomial) -> Vec<Complex<f64>> {
    let mut out = Vec::with_capacity(p.degree());
    for (factor, mult) in squarefree_factors(p) {
        let ints = primitive_int(&factor);
        let fc: Vec<f64> = ints.iter().map(big_to_f64).collect();
        for z in companion_roots(&fc) {
            let mut z = newton_polish(&ints, z);
            if z.im.abs() <= 1e-14 * z.norm().max(1.0) {
                z.im = 0.0;
            }
            out.extend(std::iter::repeat_n(z, mult));
        }
    }
    out.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    pub rho: f64,
    pub dominant_real: bool,
    pub dominant_simple: bool,
    pub perron_ray: Option<Vec<f64>>,
    pub residual: Option<f64>,
    pub char_poly: Vec<String>,
    pub roots: Vec<[f64; 2]>,
}

pub fn spectral_radius(a: &IntMatrix) -> f64 {
    roots(&char_poly(a)).first().map_or(0.0, |z| z.norm())
}

/// Spectral radius, dominance flags and (when it exists) the Perron ray.
pub fn spectral_summary(a: &IntMatrix, tol: f64) -> SpectralSummary {
    assert!(tol > 0.0, "tolerance must be positive");
    let p = char_poly(a);
    let rs = roots(&p);
    let rho = rs.first().map_or(0.0, |z| z.norm());
    let scale = rho.max(1.0);
    let dominant: Vec<&Complex<f64>> = rs.iter().filter(|z| z.norm() >= rho - tol * scale).collect();
    let dominant_simple = dominant.len() == 1;
    let dominant_real = dominant.iter().any(|z| z.im.abs() <= tol * scale && z.re > 0.0);
    let (perron_ray, residual) = if dominant_simple && dominant_real {
        match inverse_iteration(a, rho) {
            Some((v, res)) => (Some(v), Some(res)),
            None => (None, None),
        }
    } else {
        (None, None)
    };
    SpectralSummary {
        rho,
        dominant_real,
        dominant_simple,
        perron_ray,
        residual,
        char_poly: p.coeffs.iter().map(|c| c.to_string()).collect(),
        roots: rs.iter().map(|z| [z.re, z.im]).collect(),
    }
}

/// Eigenvector for the real eigenvalue `lambda`, normalised to unit L1 norm
/// with positive coordinate sum, and its residual `‖Av - λv‖₁ / ‖v‖₁`.
pub fn inverse_iteration(a: &IntMatrix, lambda: f64) -> Option<(Vec<f64>, f64)> {
    let n = a.rows();
    let rows = a.to_f64_rows();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let shift = lambda + 1e-9 * lambda.abs().max(1.0);
    let shifted = &m - DMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * i as f64);
    for _ in 0..60 {
        let next = lu.solve(&v)?;
        let norm = next.iter().map(|x| x.abs()).sum::<f64>();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = next / norm;
    }
    let sum: f64 = v.iter().sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        let (imax, _) = v.iter().enumerate().max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))?;
        v[imax] < 0.0
    };
    if flip {
        v = -v;
    }
    let res = (&m * &v - &v * lambda).iter().map(|x| x.abs()).sum::<f64>() / v.iter().map(|x| x.abs()).sum::<f64>();
    Some((v.iter().copied().collect(), res))
}

/// Sign (±1) relating the characteristic polynomials of `A` and `Ǎ = (Aᵀ)⁻¹`,
/// or `None` when they differ by more than a sign.
pub fn check_polys_agree(p: &IntPolynomial, q: &IntPolynomial) -> Option<i8> {
    if p == q {
        Some(1)
    } else if *p == q.negated() {
        Some(-1)
    } else {
        None
    }
}

/// Monic characteristic polynomial of the inverse, obtained by reversing
/// coefficients; useful when `det = ±1`.
pub fn reciprocal(p: &IntPolynomial) -> IntPolynomial {
    let mut c: Vec<BigInt> = p.coeffs.iter().rev().cloned().collect();
    if c.first().is_some_and(|l| l.is_negative()) {
        c = c.into_iter().map(|x| -x).collect();
    }
    IntPolynomial { coeffs: c }
}
