//! Harness for the conjecture that `E_{γ,ε}` and `Ě_{γ,ε}` have the same
//! characteristic polynomial up to an overall sign (equivalently, that `P_E`
//! is palindromic or anti-palindromic), hence equal spectral radii.
//!
//! Random loops come from families that close for every word: rank-2 seeds,
//! the Markov seed, and block sums of these, moved to generic seeds by
//! conjugation with a random path.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{point_to_json, LoopFile, SeedFile};
use crate::linalg::IntMatrix;
use crate::seed::{apply_path, ExchangeMatrix, MutationLoop, MutationPath, Permutation};
use crate::spectra::{char_poly, check_polys_agree, palindrome_check, spectral_radius, Palindromy};
use crate::stability::{detect_sign_stability, tropical_sign_detailed, Budget, Region};
use crate::tropical::{loop_matrix, loop_matrix_check, transport_point, SignSequence, TropicalPoint};

/// Absolute tolerance on `|ρ(E) − ρ(Ě)|`.
pub const RHO_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum SignSource {
    /// `ε_γ(ℓ⁺)`.
    Tropical,
    /// The stable sign found on `C⁺` with this budget.
    Stable(Budget),
    /// `ε_γ(w)` at the given point.
    Point(TropicalPoint),
}

impl SignSource {
    fn name(&self) -> &'static str {
        match self {
            SignSource::Tropical => "tropical",
            SignSource::Stable(_) => "stable",
            SignSource::Point(_) => "point",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub sign_source: &'static str,
    pub sign: SignSequence,
    /// Interior point used when `ℓ⁺` met a zero coordinate.
    pub perturbation: Option<serde_json::Value>,
    pub char_poly_e: Vec<String>,
    pub char_poly_e_check: Vec<String>,
    pub palindromy: Palindromy,
    /// `+1` or `-1` when `P_Ě = ±P_E`.
    pub overall_sign: Option<i8>,
    pub rho_e: f64,
    pub rho_e_check: f64,
    pub rho_gap: f64,
    pub holds: bool,
}

fn poly_strings(m: &IntMatrix) -> (crate::spectra::IntPolynomial, Vec<String>) {
    let p = char_poly(m);
    let s = p.coeffs().iter().map(BigInt::to_string).collect();
    (p, s)
}

/// Compares `E` and `Ě` at the sign chosen by `source`.
pub fn conjecture_check(lp: &MutationLoop, source: &SignSource) -> Result<ConjectureReport> {
    let (sign, perturbation) = match source {
        SignSource::Tropical => {
            let (s, w) = tropical_sign_detailed(lp.base(), lp.path())?;
            (s, w.as_ref().map(point_to_json))
        }
        SignSource::Stable(budget) => {
            let r = detect_sign_stability(lp, Region::ConePlus, *budget)?;
            (r.stable_data()?.0.clone(), None)
        }
        SignSource::Point(w) => (transport_point(lp, w)?.1, None),
    };
    if let Some(step) = sign.first_zero() {
        return Err(Error::NonStrictSign { step });
    }
    let e = loop_matrix(lp, &sign)?;
    let ec = loop_matrix_check(lp, &sign)?;
    let (pe, char_poly_e) = poly_strings(&e);
    let (pc, char_poly_e_check) = poly_strings(&ec);
    let palindromy = palindrome_check(&pe);
    let overall_sign = check_polys_agree(&pe, &pc);
    let rho_e = spectral_radius(&e);
    let rho_e_check = spectral_radius(&ec);
    let rho_gap = (rho_e - rho_e_check).abs();
    Ok(ConjectureReport {
        sign_source: source.name(),
        sign,
        perturbation,
        char_poly_e,
        char_poly_e_check,
        palindromy,
        overall_sign,
        rho_e,
        rho_e_check,
        rho_gap,
        holds: overall_sign.is_some() && palindromy != Palindromy::Neither && rho_gap < RHO_TOL,
    })
}

// --- random loops ------------------------------------------------------------

/// Every `σ` with `σ.b = target` (brute force; rank ≤ 8).
pub fn all_closing_permutations(b: &ExchangeMatrix, target: &ExchangeMatrix) -> Vec<Permutation> {
    let n = b.rank();
    assert!(n <= 8, "brute-force permutation enumeration is limited to rank 8");
    let mut out = Vec::new();
    let mut images: Vec<usize> = (0..n).collect();
    permute(&mut images, 0, &mut |img| {
        let sigma = Permutation::new(img.to_vec()).expect("bijection");
        if b.permuted(&sigma).is_ok_and(|m| m == *target) {
            out.push(sigma);
        }
    });
    out.sort_by(|a, b| a.images().cmp(b.images()));
    out
}

fn permute(v: &mut [usize], i: usize, emit: &mut dyn FnMut(&[usize])) {
    if i == v.len() {
        emit(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, emit);
        v.swap(i, j);
    }
}

fn block_sum(blocks: &[Vec<Vec<i64>>]) -> ExchangeMatrix {
    let n: usize = blocks.iter().map(Vec::len).sum();
    let mut rows = vec![vec![0i64; n]; n];
    let mut off = 0;
    for b in blocks {
        for (i, r) in b.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                rows[off + i][off + j] = v;
            }
        }
        off += b.len();
    }
    ExchangeMatrix::from_rows(&rows).expect("block sum of skew blocks")
}

/// A block whose mutation class is `{B, -B}`.
fn random_block(rng: &mut ChaCha8Rng, room: usize) -> Vec<Vec<i64>> {
    let choice = if room >= 3 {
        rng.gen_range(0..4)
    } else if room == 2 {
        rng.gen_range(0..3)
    } else {
        0
    };
    match choice {
        0 => vec![vec![0]],
        3 => vec![vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]],
        _ => {
            let b = rng.gen_range(1..=3);
            vec![vec![0, b], vec![-b, 0]]
        }
    }
}

/// A random loop of rank `2..=max_rank`, conjugated to a random seed.
pub fn random_loop(rng: &mut ChaCha8Rng, max_rank: usize) -> Result<MutationLoop> {
    if max_rank < 2 {
        return Err(Error::InvalidArgument("random loops need rank at least 2".into()));
    }
    let rank = rng.gen_range(2..=max_rank);
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < rank {
        let blk = random_block(rng, rank - used);
        used += blk.len();
        blocks.push(blk);
    }
    if blocks.iter().all(|b| b.len() == 1) {
        // all-zero seeds give trivial loops; force one genuine block
        blocks = vec![vec![vec![0, 1], vec![-1, 0]]];
        blocks.extend((2..rank).map(|_| vec![vec![0]]));
    }
    let base = block_sum(&blocks);
    let n = base.rank();
    let len = rng.gen_range(1..=8);
    let word = MutationPath::new((0..len).map(|_| rng.gen_range(0..n)).collect());
    let end = apply_path(&base, &word)?.pop().expect("non-empty");
    let perms = all_closing_permutations(&base, &end);
    let perm = perms.choose(rng).cloned().ok_or(Error::NotALoop)?;
    let lp = MutationLoop::new(base, word, perm)?;
    let delta_len = rng.gen_range(0..=4);
    let delta = MutationPath::new((0..delta_len).map(|_| rng.gen_range(0..n)).collect());
    lp.conjugated(&delta)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> TropicalPoint {
    loop {
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
        if w.iter().any(|&x| x != 0) {
            return TropicalPoint::from_integers(&w);
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub count: usize,
    pub max_rank: usize,
    pub rng_seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            count: 200,
            max_rank: 5,
            rng_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub seed: SeedFile,
    #[serde(rename = "loop")]
    pub loop_file: LoopFile,
    pub point: Option<serde_json::Value>,
    pub report: ConjectureReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub count: usize,
    pub max_rank: usize,
    pub rng_seed: u64,
    /// Checks run (tropical sign and one random-point sign per loop).
    pub checks: usize,
    /// Checks skipped for a non-strict sign.
    pub skipped: usize,
    pub loops_by_rank: Vec<(usize, usize)>,
    pub max_rho_gap: f64,
    pub counterexample: Option<Counterexample>,
    pub reproducer: Option<PathBuf>,
}

/// Runs the randomized suite. The first counterexample (in generation order)
/// stops the suite and, when `reproducer_dir` is given, is written there as
/// JSON.
pub fn run_suite(cfg: &SuiteConfig, reproducer_dir: Option<&Path>) -> Result<SuiteReport> {
    if cfg.max_rank < 2 {
        return Err(Error::InvalidArgument(
            "rank-1 seeds carry no nontrivial loops; use max_rank ≥ 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut cases = Vec::with_capacity(cfg.count);
    for _ in 0..cfg.count {
        let lp = random_loop(&mut rng, cfg.max_rank)?;
        let w = random_point(&mut rng, lp.rank());
        cases.push((lp, w));
    }
    let results: Vec<Vec<(Option<TropicalPoint>, Result<ConjectureReport>)>> = cases
        .par_iter()
        .map(|(lp, w)| {
            vec![
                (None, conjecture_check(lp, &SignSource::Tropical)),
                (Some(w.clone()), conjecture_check(lp, &SignSource::Point(w.clone()))),
            ]
        })
        .collect();
    let mut report = SuiteReport {
        count: cfg.count,
        max_rank: cfg.max_rank,
        rng_seed: cfg.rng_seed,
        checks: 0,
        skipped: 0,
        loops_by_rank: (2..=cfg.max_rank)
            .map(|r| (r, cases.iter().filter(|(lp, _)| lp.rank() == r).count()))
            .collect(),
        max_rho_gap: 0.0,
        counterexample: None,
        reproducer: None,
    };
    'outer: for (index, (res, (lp, _))) in results.into_iter().zip(&cases).enumerate() {
        for (point, r) in res {
            match r {
                Err(Error::NonStrictSign { .. }) => report.skipped += 1,
                Err(e) => return Err(e),
                Ok(r) => {
                    report.checks += 1;
                    report.max_rho_gap = report.max_rho_gap.max(r.rho_gap);
                    if !r.holds {
                        report.counterexample = Some(Counterexample {
                            index,
                            seed: SeedFile::from_matrix(lp.base())?,
                            loop_file: LoopFile::from_loop(lp),
                            point: point.as_ref().map(point_to_json),
                            report: r,
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    if let (Some(c), Some(dir)) = (&report.counterexample, reproducer_dir) {
        let path = dir.join(format!("counterexample-{}-{}.json", cfg.rng_seed, c.index));
        let body = serde_json::to_string_pretty(c).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(&path, body).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        report.reproducer = Some(path);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kk_loop_trivially_holds() {
        let b = ExchangeMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let lp = MutationLoop::new(b, MutationPath::new(vec![1, 1]), Permutation::identity(2)).unwrap();
        let r = conjecture_check(&lp, &SignSource::Tropical).unwrap();
        assert!(r.holds);
        assert_eq!(r.char_poly_e, vec!["1", "-2", "1"]);
        assert_eq!(r.char_poly_e, r.char_poly_e_check);
    }

    #[test]
    fn non_strict_point_is_rejected() {
        let b = ExchangeMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let lp = MutationLoop::new(b, MutationPath::new(vec![1, 1]), Permutation::identity(2)).unwrap();
        let w = TropicalPoint::from_integers(&[1, 0]);
        assert!(matches!(
            conjecture_check(&lp, &SignSource::Point(w)),
            Err(Error::NonStrictSign { .. })
        ));
    }

    #[test]
    fn closing_permutations_of_markov() {
        let m = ExchangeMatrix::from_rows(&[vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]]).unwrap();
        assert_eq!(all_closing_permutations(&m, &m).len(), 3);
        let neg = m.mutate(0).unwrap();
        assert_eq!(all_closing_permutations(&m, &neg).len(), 3);
    }

    #[test]
    fn random_loops_are_deterministic_and_valid() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let x = random_loop(&mut a, 5).unwrap();
            let y = random_loop(&mut b, 5).unwrap();
            assert_eq!(x, y);
            assert!((2..=5).contains(&x.rank()));
        }
        assert!(random_loop(&mut a, 1).is_err());
    }

    #[test]
    fn small_suite_runs_clean() {
        let cfg = SuiteConfig {
            count: 20,
            max_rank: 4,
            rng_seed: 3,
        };
        let r = run_suite(&cfg, None).unwrap();
        assert!(r.counterexample.is_none(), "{:?}", r.counterexample);
        assert_eq!(r.checks + r.skipped, 40);
        assert!(run_suite(&SuiteConfig { max_rank: 1, ..cfg }, None).is_err());
    }
}
