//! Tropical X-points, the signed piecewise-linear cluster transformations,
//! sign words of paths and their presentation matrices.
//!
//! A point is stored by its coordinates `x_i(w)` in one cluster chart. Along
//! an edge `t -k- t'` the coordinates change by
//!
//! ```text
//! x'_k = -x_k,    x'_i = x_i + [sgn(x_k) b_ik]_+ x_k   (i != k)
//! ```
//!
//! which is linear on each half-space `ε x_k ≥ 0` with matrix `E_{k,ε}`.
//! A loop closes with the relabeling `x_a(out) = x_{σ(a)}(end chart)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, Rational};
use crate::seed::{ExchangeMatrix, MutationLoop, MutationPath, Permutation};

/// Integer matrix of determinant ±1 presenting a linear piece of a PL map.
pub type PresentationMatrix = IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(v: &Rational) -> Sign {
        if v.is_positive() {
            Sign::Plus
        } else if v.is_negative() {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn is_strict(self) -> bool {
        self != Sign::Zero
    }

    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Zero => 0,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Zero => Sign::Zero,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Zero => '0',
            Sign::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '0' => Some(Sign::Zero),
            '-' => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Word of per-step signs `ε_γ(w)`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignSequence(pub Vec<Sign>);

impl SignSequence {
    pub fn new(word: Vec<Sign>) -> Self {
        SignSequence(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strict(&self) -> bool {
        self.0.iter().all(|s| s.is_strict())
    }

    pub fn first_zero(&self) -> Option<usize> {
        self.0.iter().position(|s| !s.is_strict())
    }

    pub fn require_strict(&self) -> Result<()> {
        match self.first_zero() {
            Some(step) => Err(Error::NonStrictSign { step }),
            None => Ok(()),
        }
    }

    pub fn repeated(&self, n: usize) -> SignSequence {
        SignSequence(std::iter::repeat_n(self.0.iter().copied(), n).flatten().collect())
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| Sign::from_char(c).ok_or_else(|| Error::Parse(format!("bad sign `{c}`"))))
            .collect::<Result<Vec<_>>>()
            .map(SignSequence)
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignSequence({self})")
    }
}

impl Serialize for SignSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact coordinates of a point of the tropical X-variety in one chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TropicalPoint {
    coords: Vec<Rational>,
}

impl TropicalPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        TropicalPoint { coords }
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        TropicalPoint {
            coords: coords
                .iter()
                .map(|&v| Rational::from_integer(BigInt::from(v)))
                .collect(),
        }
    }

    /// The point `ℓ⁺ = (1, .., 1)`.
    pub fn all_ones(n: usize) -> Self {
        Self::from_integers(&vec![1; n])
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        TropicalPoint {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        TropicalPoint {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }

    /// Representative of the ray scaled to unit L1 norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = crate::linalg::l1_norm(&self.coords);
        if norm.is_zero() {
            return Err(Error::ZeroPoint);
        }
        Ok(TropicalPoint {
            coords: self.coords.iter().map(|x| x / &norm).collect(),
        })
    }

    fn check_dim(&self, rank: usize) -> Result<()> {
        if self.dim() != rank {
            return Err(Error::RankMismatch {
                left: rank,
                right: self.dim(),
            });
        }
        Ok(())
    }

    /// Coordinates after the closing relabeling, `x_a ← x_{σ(a)}`.
    pub fn relabeled(&self, sigma: &Permutation) -> Self {
        TropicalPoint {
            coords: (0..self.dim()).map(|a| self.coords[sigma.apply(a)].clone()).collect(),
        }
    }
}

fn positive_part(v: BigInt) -> BigInt {
    if v.is_positive() {
        v
    } else {
        BigInt::zero()
    }
}

fn strict_factor(eps: Sign) -> Result<i64> {
    match eps {
        Sign::Plus => Ok(1),
        Sign::Minus => Ok(-1),
        Sign::Zero => Err(Error::NonStrictSign { step: 0 }),
    }
}

/// `E_{k,ε}`: identity except `-1` at `(k,k)` and `[ε b_ik]_+` down column `k`.
pub fn elementary_e(b: &ExchangeMatrix, k: usize, eps: Sign) -> Result<PresentationMatrix> {
    b.check_index(k)?;
    let e = strict_factor(eps)?;
    let n = b.rank();
    let mut m = IntMatrix::identity(n);
    m.set(k, k, BigInt::from(-1));
    for i in (0..n).filter(|&i| i != k) {
        m.set(i, k, positive_part(b.entry(i, k) * e));
    }
    Ok(m)
}

/// `Ě_{k,ε}`: identity except `-1` at `(k,k)` and `[-ε b_kj]_+` along row `k`.
pub fn elementary_e_check(b: &ExchangeMatrix, k: usize, eps: Sign) -> Result<PresentationMatrix> {
    b.check_index(k)?;
    let e = strict_factor(eps)?;
    let n = b.rank();
    let mut m = IntMatrix::identity(n);
    m.set(k, k, BigInt::from(-1));
    for j in (0..n).filter(|&j| j != k) {
        m.set(k, j, positive_part(b.entry(k, j) * -e));
    }
    Ok(m)
}

/// One tropical X-mutation at `k`; returns the new point and `sgn(x_k(w))`.
pub fn mutate_point(b: &ExchangeMatrix, k: usize, w: &TropicalPoint) -> Result<(TropicalPoint, Sign)> {
    b.check_index(k)?;
    w.check_dim(b.rank())?;
    Ok(mutate_point_unchecked(b, k, w))
}

fn mutate_point_unchecked(b: &ExchangeMatrix, k: usize, w: &TropicalPoint) -> (TropicalPoint, Sign) {
    let xk = &w.coords[k];
    let sign = Sign::of(xk);
    let s = sign.to_i64();
    let coords = w
        .coords
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            if i == k {
                -xi
            } else {
                let c = positive_part(b.entry(i, k) * s);
                if c.is_zero() {
                    xi.clone()
                } else {
                    xi + xk * Rational::from_integer(c)
                }
            }
        })
        .collect();
    (TropicalPoint { coords }, sign)
}

/// `transport_unchecked` on an integer point, without rational reductions.
pub(crate) fn transport_integer(lp: &MutationLoop, x: &[BigInt]) -> (Vec<BigInt>, SignSequence) {
    let mut cur = x.to_vec();
    let mut word = Vec::with_capacity(lp.len());
    for (nu, &k) in lp.path().steps().iter().enumerate() {
        let b = lp.seed(nu);
        let xk = cur[k].clone();
        let sign = if xk.is_positive() {
            Sign::Plus
        } else if xk.is_negative() {
            Sign::Minus
        } else {
            Sign::Zero
        };
        let s = sign.to_i64();
        for (i, xi) in cur.iter_mut().enumerate() {
            if i == k {
                *xi = -&*xi;
            } else {
                let c = positive_part(b.entry(i, k) * s);
                if !c.is_zero() {
                    *xi += &xk * c;
                }
            }
        }
        word.push(sign);
    }
    let relabeled = (0..cur.len()).map(|a| cur[lp.perm().apply(a)].clone()).collect();
    (relabeled, SignSequence(word))
}

/// Transports `w` along `path` from the seed `b`, returning the point in the
/// final chart (no relabeling) and the sign word.
pub fn transport_along_path(
    b: &ExchangeMatrix,
    path: &MutationPath,
    w: &TropicalPoint,
) -> Result<(TropicalPoint, SignSequence)> {
    w.check_dim(b.rank())?;
    let seeds = crate::seed::apply_path(b, path)?;
    let mut cur = w.clone();
    let mut word = Vec::with_capacity(path.len());
    for (nu, &k) in path.steps().iter().enumerate() {
        let (next, s) = mutate_point_unchecked(&seeds[nu], k, &cur);
        word.push(s);
        cur = next;
    }
    Ok((cur, SignSequence(word)))
}

/// `φ(w)` in the base chart together with the sign word `ε_γ(w)`.
pub fn transport_point(lp: &MutationLoop, w: &TropicalPoint) -> Result<(TropicalPoint, SignSequence)> {
    w.check_dim(lp.rank())?;
    Ok(transport_unchecked(lp, w))
}

pub(crate) fn transport_unchecked(lp: &MutationLoop, w: &TropicalPoint) -> (TropicalPoint, SignSequence) {
    let mut cur = w.clone();
    let mut word = Vec::with_capacity(lp.len());
    for (nu, &k) in lp.path().steps().iter().enumerate() {
        let (next, s) = mutate_point_unchecked(lp.seed(nu), k, &cur);
        word.push(s);
        cur = next;
    }
    (cur.relabeled(lp.perm()), SignSequence(word))
}

fn check_word(path: &MutationPath, eps: &SignSequence) -> Result<()> {
    if eps.len() != path.len() {
        return Err(Error::SignLength {
            got: eps.len(),
            expected: path.len(),
        });
    }
    eps.require_strict()
}

/// `E_{γ,ε} = E_{k_{h-1},ε_{h-1}} ··· E_{k_0,ε_0}` without the relabeling.
pub fn path_matrix(b: &ExchangeMatrix, path: &MutationPath, eps: &SignSequence) -> Result<PresentationMatrix> {
    check_word(path, eps)?;
    let seeds = crate::seed::apply_path(b, path)?;
    let mut m = IntMatrix::identity(b.rank());
    for (nu, (&k, &s)) in path.steps().iter().zip(eps.signs()).enumerate() {
        m = elementary_e(&seeds[nu], k, s)?.mul(&m);
    }
    Ok(m)
}

/// `P · E_{γ,ε}`, the linear piece of the loop map on the sign cone of `ε`.
pub fn path_presentation_matrix(
    b: &ExchangeMatrix,
    path: &MutationPath,
    eps: &SignSequence,
    perm: &Permutation,
) -> Result<PresentationMatrix> {
    if perm.len() != b.rank() {
        return Err(Error::RankMismatch {
            left: b.rank(),
            right: perm.len(),
        });
    }
    Ok(perm.matrix().mul(&path_matrix(b, path, eps)?))
}

/// `Ě_{γ,ε} = ((P·E_{γ,ε})ᵀ)⁻¹`, assembled as `P · Ě_{k_{h-1}} ··· Ě_{k_0}`.
pub fn path_presentation_matrix_check(
    b: &ExchangeMatrix,
    path: &MutationPath,
    eps: &SignSequence,
    perm: &Permutation,
) -> Result<PresentationMatrix> {
    check_word(path, eps)?;
    if perm.len() != b.rank() {
        return Err(Error::RankMismatch {
            left: b.rank(),
            right: perm.len(),
        });
    }
    let seeds = crate::seed::apply_path(b, path)?;
    let mut m = IntMatrix::identity(b.rank());
    for (nu, (&k, &s)) in path.steps().iter().zip(eps.signs()).enumerate() {
        m = elementary_e_check(&seeds[nu], k, s)?.mul(&m);
    }
    Ok(perm.matrix().mul(&m))
}

/// Loop-level shorthand for [`path_presentation_matrix`].
pub fn loop_matrix(lp: &MutationLoop, eps: &SignSequence) -> Result<PresentationMatrix> {
    path_presentation_matrix(lp.base(), lp.path(), eps, lp.perm())
}

/// Loop-level shorthand for [`path_presentation_matrix_check`].
pub fn loop_matrix_check(lp: &MutationLoop, eps: &SignSequence) -> Result<PresentationMatrix> {
    path_presentation_matrix_check(lp.base(), lp.path(), eps, lp.perm())
}
