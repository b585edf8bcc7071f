//! Exchange matrices, matrix mutation, seed isomorphisms and mutation loops.
//!
//! Indices are 0-based throughout the library; the JSON and CLI layers
//! translate from the 1-based labels users write.
//!
//! Matrices follow the convention in which the Fomin–Zelevinsky exchange
//! matrix is the transpose: `b_fz[i][j] = b[j][i]`. Use
//! [`ExchangeMatrix::from_fz`] to ingest FZ-convention data.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

/// Default cap on the rank accepted by the brute-force isomorphism search.
pub const DEFAULT_SEARCH_CAP: usize = 12;

/// Skew-symmetric integer exchange matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExchangeMatrix {
    b: IntMatrix,
}

impl ExchangeMatrix {
    pub fn new(b: IntMatrix) -> Result<Self> {
        if !b.is_square() || b.rows() == 0 {
            return Err(Error::Shape(format!(
                "exchange matrix must be square and non-empty, got {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        let n = b.rows();
        for i in 0..n {
            for j in i..n {
                if *b.get(i, j) != -b.get(j, i) {
                    return Err(Error::NotSkewSymmetric { i, j });
                }
            }
        }
        Ok(ExchangeMatrix { b })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_i64_rows(rows)?)
    }

    /// Builds from a matrix written in the Fomin–Zelevinsky convention.
    pub fn from_fz(b_fz: IntMatrix) -> Result<Self> {
        Self::new(b_fz.transpose())
    }

    pub fn rank(&self) -> usize {
        self.b.rows()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        self.b.get(i, j)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.b
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.rank() {
            return Err(Error::IndexOutOfRange {
                index: k,
                rank: self.rank(),
            });
        }
        Ok(())
    }

    /// Matrix mutation at `k`.
    pub fn mutate(&self, k: usize) -> Result<Self> {
        self.check_index(k)?;
        let n = self.rank();
        let mut out = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let bij = self.entry(i, j);
                let v = if i == k || j == k {
                    -bij
                } else {
                    let bik = self.entry(i, k);
                    let bkj = self.entry(k, j);
                    if bik.is_positive() && bkj.is_positive() {
                        bij + bik * bkj
                    } else if bik.is_negative() && bkj.is_negative() {
                        bij - bik * bkj
                    } else {
                        bij.clone()
                    }
                };
                out.set(i, j, v);
            }
        }
        Ok(ExchangeMatrix { b: out })
    }

    /// `σ.B`, whose `(i, j)` entry is `b[σ⁻¹(i)][σ⁻¹(j)]`.
    pub fn permuted(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.len() != self.rank() {
            return Err(Error::RankMismatch {
                left: self.rank(),
                right: sigma.len(),
            });
        }
        let n = self.rank();
        let mut out = IntMatrix::zeros(n, n);
        for a in 0..n {
            for c in 0..n {
                out.set(sigma.apply(a), sigma.apply(c), self.entry(a, c).clone());
            }
        }
        Ok(ExchangeMatrix { b: out })
    }
}

impl fmt::Debug for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExchangeMatrix({})", self.b)
    }
}

impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.b.fmt(f)
    }
}

/// Free functional form of [`ExchangeMatrix::mutate`].
pub fn mutate_matrix(b: &ExchangeMatrix, k: usize) -> Result<ExchangeMatrix> {
    b.mutate(k)
}

/// Bijection of `{0, .., n-1}`, stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!("{images:?}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidPermutation(format!(
                "transposition ({a} {b}) on {n} points"
            )));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Ok(Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`, i.e. `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Matrix `P` with `(P x)_a = x_{σ(a)}`, the coordinate relabeling used to
    /// close a mutation loop.
    pub fn matrix(&self) -> IntMatrix {
        let n = self.len();
        let mut p = IntMatrix::zeros(n, n);
        for a in 0..n {
            p.set(a, self.apply(a), BigInt::from(1));
        }
        p
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

/// Sequence of mutation indices `(k_0, .., k_{h-1})`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MutationPath {
    steps: Vec<usize>,
}

impl MutationPath {
    pub fn new(steps: Vec<usize>) -> Self {
        MutationPath { steps }
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn validate(&self, rank: usize) -> Result<()> {
        match self.steps.iter().find(|&&k| k >= rank) {
            Some(&k) => Err(Error::IndexOutOfRange { index: k, rank }),
            None => Ok(()),
        }
    }

    /// True when every index of `{0, .., rank-1}` is mutated at least once.
    pub fn is_fully_mutating(&self, rank: usize) -> bool {
        let mut seen = vec![false; rank];
        for &k in &self.steps {
            if k < rank {
                seen[k] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn concat(&self, other: &MutationPath) -> Self {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        MutationPath { steps }
    }

    pub fn reversed(&self) -> Self {
        MutationPath {
            steps: self.steps.iter().rev().copied().collect(),
        }
    }

    /// Path with every step relabeled through `sigma`.
    pub fn relabeled(&self, sigma: &Permutation) -> Self {
        MutationPath {
            steps: self.steps.iter().map(|&k| sigma.apply(k)).collect(),
        }
    }
}

impl From<Vec<usize>> for MutationPath {
    fn from(steps: Vec<usize>) -> Self {
        MutationPath::new(steps)
    }
}

/// All intermediate matrices `B^(t_0), .., B^(t_h)` along `path`.
pub fn apply_path(b: &ExchangeMatrix, path: &MutationPath) -> Result<Vec<ExchangeMatrix>> {
    path.validate(b.rank())?;
    let mut out = Vec::with_capacity(path.len() + 1);
    out.push(b.clone());
    for &k in path.steps() {
        let next = out.last().expect("non-empty").mutate(k)?;
        out.push(next);
    }
    Ok(out)
}

/// Lexicographically smallest `σ` with `σ.B1 = B2`, searched with the default cap.
pub fn find_seed_isomorphism(b1: &ExchangeMatrix, b2: &ExchangeMatrix) -> Result<Option<Permutation>> {
    find_seed_isomorphism_capped(b1, b2, DEFAULT_SEARCH_CAP)
}

/// Brute-force search over all `N!` relabelings in lexicographic order of the
/// image array, pruning partial assignments that already disagree.
pub fn find_seed_isomorphism_capped(
    b1: &ExchangeMatrix,
    b2: &ExchangeMatrix,
    cap: usize,
) -> Result<Option<Permutation>> {
    let n = b1.rank();
    if n != b2.rank() {
        return Err(Error::RankMismatch {
            left: n,
            right: b2.rank(),
        });
    }
    if n > cap {
        return Err(Error::SearchCapExceeded { rank: n, cap });
    }
    let mut images = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if search(b1, b2, &mut images, &mut used) {
        Ok(Some(Permutation { images }))
    } else {
        Ok(None)
    }
}

fn search(b1: &ExchangeMatrix, b2: &ExchangeMatrix, images: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let a = images.len();
    let n = b1.rank();
    if a == n {
        return true;
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        // (σ.B1)_{σa,σc} = B1_{a,c} must equal B2_{σa,σc}
        let consistent = b1.entry(a, a) == b2.entry(cand, cand)
            && images
                .iter()
                .enumerate()
                .all(|(c, &sc)| b1.entry(a, c) == b2.entry(cand, sc) && b1.entry(c, a) == b2.entry(sc, cand));
        if !consistent {
            continue;
        }
        used[cand] = true;
        images.push(cand);
        if search(b1, b2, images, used) {
            return true;
        }
        images.pop();
        used[cand] = false;
    }
    false
}

/// Closing permutation `σ` with `σ.B = μ_γ(B)` when `path` closes up to relabeling.
/// The check is at the exchange-matrix level only.
pub fn is_mutation_loop(b: &ExchangeMatrix, path: &MutationPath) -> Result<Option<Permutation>> {
    let seeds = apply_path(b, path)?;
    find_seed_isomorphism(b, seeds.last().expect("non-empty"))
}

/// A representation path of a mutation loop, together with its closing
/// relabeling `σ` (satisfying `σ.B = μ_γ(B)`) and the cached seeds along the path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationLoop {
    base: ExchangeMatrix,
    path: MutationPath,
    perm: Permutation,
    seeds: Vec<ExchangeMatrix>,
}

impl MutationLoop {
    pub fn new(base: ExchangeMatrix, path: MutationPath, perm: Permutation) -> Result<Self> {
        if perm.len() != base.rank() {
            return Err(Error::RankMismatch {
                left: base.rank(),
                right: perm.len(),
            });
        }
        let seeds = apply_path(&base, &path)?;
        if base.permuted(&perm)? != *seeds.last().expect("non-empty") {
            return Err(Error::NotALoop);
        }
        Ok(MutationLoop {
            base,
            path,
            perm,
            seeds,
        })
    }

    /// Builds a loop with the lexicographically smallest closing permutation.
    pub fn detect(base: ExchangeMatrix, path: MutationPath) -> Result<Self> {
        let perm = is_mutation_loop(&base, &path)?.ok_or(Error::NotALoop)?;
        Self::new(base, path, perm)
    }

    pub fn base(&self) -> &ExchangeMatrix {
        &self.base
    }

    pub fn path(&self) -> &MutationPath {
        &self.path
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// Seed at step `nu` of the path (`0 ..= h`).
    pub fn seed(&self, nu: usize) -> &ExchangeMatrix {
        &self.seeds[nu]
    }

    pub fn seeds(&self) -> &[ExchangeMatrix] {
        &self.seeds
    }

    pub fn is_fully_mutating(&self) -> bool {
        self.path.is_fully_mutating(self.rank())
    }

    /// Inverse loop: reversed steps relabeled by `σ⁻¹`, closed by `σ⁻¹`.
    pub fn inverse(&self) -> Result<Self> {
        let inv = self.perm.inverse();
        let path = self.path.reversed().relabeled(&inv);
        MutationLoop::new(self.base.clone(), path, inv)
    }

    /// The same loop read from the seed after the first `shift` steps.
    pub fn rotated(&self, shift: usize) -> Result<Self> {
        let h = self.len();
        if h == 0 {
            return Ok(self.clone());
        }
        let shift = shift % h;
        let steps = self.path.steps();
        let mut new_steps: Vec<usize> = steps[shift..].to_vec();
        new_steps.extend(steps[..shift].iter().map(|&k| self.perm.apply(k)));
        MutationLoop::new(
            self.seeds[shift].clone(),
            MutationPath::new(new_steps),
            self.perm.clone(),
        )
    }

    /// Conjugate of the loop moved to the seed `μ_δ(B)`.
    pub fn conjugated(&self, delta: &MutationPath) -> Result<Self> {
        let new_base = apply_path(&self.base, delta)?.pop().expect("non-empty");
        let path = delta.reversed().concat(&self.path).concat(&delta.relabeled(&self.perm));
        MutationLoop::new(new_base, path, self.perm.clone())
    }

    /// The loop traversed `n` times as a single path (`n ≥ 1`).
    pub fn power(&self, n: usize) -> Result<Self> {
        assert!(n >= 1);
        let mut path = self.path.clone();
        let mut perm = self.perm.clone();
        for _ in 1..n {
            path = path.concat(&self.path.relabeled(&perm));
            perm = self.perm.compose(&perm);
        }
        MutationLoop::new(self.base.clone(), path, perm)
    }
}

/// True when every entry is zero.
pub fn is_zero_matrix(b: &ExchangeMatrix) -> bool {
    (0..b.rank()).all(|i| (0..b.rank()).all(|j| b.entry(i, j).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn em(rows: &[&[i64]]) -> ExchangeMatrix {
        ExchangeMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn markov() -> ExchangeMatrix {
        em(&[&[0, 2, -2], &[-2, 0, 2], &[2, -2, 0]])
    }

    fn a2() -> ExchangeMatrix {
        em(&[&[0, 1], &[-1, 0]])
    }

    #[test]
    fn rank_two_mutation_negates() {
        assert_eq!(a2().mutate(0).unwrap(), em(&[&[0, -1], &[1, 0]]));
    }

    #[test]
    fn markov_mutation_by_hand() {
        // b'_23 = 2 + [b_21]+[b_13]+ - [-b_21]+[-b_13]+ = 2 + 0 - 2*2 = -2
        assert_eq!(
            markov().mutate(0).unwrap(),
            em(&[&[0, -2, 2], &[2, 0, -2], &[-2, 2, 0]])
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            ExchangeMatrix::from_rows(&[vec![0, 1], vec![1, 0]]),
            Err(Error::NotSkewSymmetric { i: 0, j: 1 })
        );
        assert!(matches!(
            a2().mutate(2),
            Err(Error::IndexOutOfRange { index: 2, rank: 2 })
        ));
        assert!(ExchangeMatrix::from_rows(&[vec![0, 1]]).is_err());
    }

    #[test]
    fn fz_convention_is_transpose() {
        let fz = IntMatrix::from_i64_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        assert_eq!(ExchangeMatrix::from_fz(fz).unwrap(), em(&[&[0, -1], &[1, 0]]));
    }

    #[test]
    fn apply_path_lists_every_seed() {
        let seeds = apply_path(&markov(), &MutationPath::new(vec![0])).unwrap();
        assert_eq!(seeds.len(), 2);
        assert_eq!(seeds[1], markov().mutate(0).unwrap());
        assert_eq!(apply_path(&a2(), &MutationPath::default()).unwrap(), vec![a2()]);
    }

    #[test]
    fn pentagon_closes_with_transposition() {
        let path = MutationPath::new(vec![0, 1, 0, 1, 0]);
        let seeds = apply_path(&a2(), &path).unwrap();
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        assert_eq!(*seeds.last().unwrap(), a2().permuted(&swap).unwrap());
        assert_eq!(is_mutation_loop(&a2(), &path).unwrap(), Some(swap));
    }

    #[test]
    fn isomorphism_search_examples() {
        assert_eq!(
            find_seed_isomorphism(&markov(), &markov()).unwrap(),
            Some(Permutation::identity(3))
        );
        assert_eq!(
            find_seed_isomorphism(&a2(), &em(&[&[0, -1], &[1, 0]])).unwrap(),
            Some(Permutation::transposition(2, 0, 1).unwrap())
        );
        assert!(matches!(
            find_seed_isomorphism(&a2(), &markov()),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn markov_automorphisms_by_enumeration() {
        // enumerate all six relabelings directly
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let autos: Vec<_> = perms
            .iter()
            .filter(|p| {
                let s = Permutation::new(p.to_vec()).unwrap();
                markov().permuted(&s).unwrap() == markov()
            })
            .collect();
        assert_eq!(autos, vec![&[0, 1, 2], &[1, 2, 0], &[2, 0, 1]]);
    }

    #[test]
    fn loop_recognition() {
        let double = MutationPath::new(vec![1, 1]);
        assert_eq!(
            is_mutation_loop(&markov(), &double).unwrap(),
            Some(Permutation::identity(3))
        );
        let acyclic = em(&[&[0, 1, 0], &[-1, 0, 1], &[0, -1, 0]]);
        assert_eq!(is_mutation_loop(&acyclic, &MutationPath::new(vec![1])).unwrap(), None);
        assert_eq!(
            is_mutation_loop(&em(&[&[0, 2], &[-2, 0]]), &MutationPath::new(vec![0])).unwrap(),
            Some(Permutation::transposition(2, 0, 1).unwrap())
        );
    }

    #[test]
    fn search_cap_is_enforced() {
        let b = ExchangeMatrix::new(IntMatrix::zeros(4, 4)).unwrap();
        assert!(matches!(
            find_seed_isomorphism_capped(&b, &b, 3),
            Err(Error::SearchCapExceeded { rank: 4, cap: 3 })
        ));
    }

    #[test]
    fn loop_constructor_validates_closure() {
        let bad = MutationLoop::new(a2(), MutationPath::new(vec![0]), Permutation::identity(2));
        assert_eq!(bad, Err(Error::NotALoop));
    }

    #[test]
    fn inverse_rotation_and_power_are_loops() {
        let lp = MutationLoop::detect(markov(), MutationPath::new(vec![0, 1])).unwrap();
        assert!(lp.inverse().is_ok());
        assert!(lp.rotated(1).is_ok());
        assert_eq!(lp.power(3).unwrap().len(), 6);
        let conj = lp.conjugated(&MutationPath::new(vec![2, 0])).unwrap();
        assert_eq!(conj.len(), 6);
    }
}
