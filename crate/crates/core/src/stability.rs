//! Tropical signs, sign-stability detection on sampled rays, sign cones and
//! their stabilization, North-South diagnostics and X-filling checks.
//!
//! Sign stability quantifies over every nonzero point of a region; here it is
//! semi-decided on finitely many exact rational rays, and the verdict name
//! `verified-on-samples` says so. Cone stabilization, when found, is a proof.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::io::{rational_rows_to_json, ser_opt_matrix};
use crate::linalg::{self, rational_to_f64, IntMatrix, Rational};
use crate::seed::{ExchangeMatrix, MutationLoop, MutationPath};
use crate::simplex::{minimize, Constraint, LpOutcome, Relation};
use crate::spectra::{
    char_poly, palindrome_check, spectral_summary, Palindromy, SpectralSummary, DEFAULT_SIMPLICITY_TOL,
};
use crate::tropical::{
    elementary_e, loop_matrix, loop_matrix_check, mutate_point, transport_along_path, transport_integer,
    transport_unchecked, Sign, SignSequence, TropicalPoint,
};

/// Tolerance for floating-point cone membership of Perron rays.
pub const PERRON_CONE_TOL: f64 = 1e-8;

// --- cones ----------------------------------------------------------------

/// `{x : a·x ≥ 0 for every row a}` in exact rationals.
///
/// Rows are stored as primitive integer vectors, deduplicated and in first-seen
/// order; zero rows are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralCone {
    dim: usize,
    rows: Vec<Vec<Rational>>,
}

impl PolyhedralCone {
    pub fn new(dim: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let mut cone = PolyhedralCone { dim, rows: Vec::new() };
        for r in rows {
            cone.push(r)?;
        }
        Ok(cone)
    }

    /// The whole space.
    pub fn full(dim: usize) -> Self {
        PolyhedralCone { dim, rows: Vec::new() }
    }

    /// The positive orthant `C⁺`.
    pub fn positive_orthant(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| unit(dim, i).into_iter().map(Rational::from_integer).collect())
            .collect();
        PolyhedralCone::new(dim, rows).expect("well-formed rows")
    }

    fn push(&mut self, row: Vec<Rational>) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::RankMismatch {
                left: self.dim,
                right: row.len(),
            });
        }
        let prim: Vec<Rational> = linalg::primitive_integer_vector(&row)
            .into_iter()
            .map(Rational::from_integer)
            .collect();
        if prim.iter().all(Zero::is_zero) || self.rows.contains(&prim) {
            return Ok(());
        }
        self.rows.push(prim);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|a| !linalg::dot(a, x).is_negative())
    }

    /// Every inequality holds strictly at `x`.
    pub fn strictly_contains_point(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|a| linalg::dot(a, x).is_positive())
    }

    /// Strictly convex (contains no line) iff the rows span the dual space.
    pub fn is_strictly_convex(&self) -> bool {
        linalg::rank(&self.rows) == self.dim
    }

    /// Least normalised slack `min a·v / ‖a‖₁` of a floating-point ray.
    pub fn min_normalized_slack(&self, v: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|a| {
                let af: Vec<f64> = a.iter().map(rational_to_f64).collect();
                let norm: f64 = af.iter().map(|x| x.abs()).sum();
                af.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / norm
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl Serialize for PolyhedralCone {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational_rows_to_json(&self.rows).serialize(s)
    }
}

fn unit(n: usize, i: usize) -> Vec<BigInt> {
    (0..n)
        .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
        .collect()
}

/// Split free variables `x = u - v` with `0 ≤ u, v ≤ 1`, the box normalisation.
fn box_constraints(n: usize) -> Vec<Constraint> {
    (0..2 * n)
        .map(|j| {
            let mut c = vec![Rational::zero(); 2 * n];
            c[j] = Rational::one();
            Constraint::new(c, Relation::LessEq, Rational::one())
        })
        .collect()
}

fn split(a: &[Rational]) -> Vec<Rational> {
    a.iter().cloned().chain(a.iter().map(|x| -x)).collect()
}

/// `other ⊆ cone`, decided by exact LP: each row `a` of `cone` must satisfy
/// `min a·x ≥ 0` over `other` intersected with the unit box.
pub fn cone_contains(cone: &PolyhedralCone, other: &PolyhedralCone) -> Result<bool> {
    if cone.dim != other.dim {
        return Err(Error::RankMismatch {
            left: cone.dim,
            right: other.dim,
        });
    }
    let n = cone.dim;
    let mut constraints: Vec<Constraint> = other
        .rows
        .iter()
        .map(|b| Constraint::new(split(b), Relation::GreaterEq, Rational::zero()))
        .collect();
    constraints.extend(box_constraints(n));
    for a in &cone.rows {
        if other.rows.contains(a) {
            continue;
        }
        match minimize(&split(a), &constraints) {
            LpOutcome::Optimal { value, .. } if value.is_negative() => return Ok(false),
            LpOutcome::Optimal { .. } => {}
            // the box keeps the problem feasible (x = 0) and bounded
            _ => unreachable!("box-normalised containment LP is feasible and bounded"),
        }
    }
    Ok(true)
}

/// Mutual containment.
pub fn cones_equal(a: &PolyhedralCone, b: &PolyhedralCone) -> Result<bool> {
    Ok(cone_contains(a, b)? && cone_contains(b, a)?)
}

/// Sign cone `C^ε_{γⁿ}` of the loop traversed `power` times, in base
/// coordinates. `eps` has length `power · h`.
pub fn sign_cone(lp: &MutationLoop, eps: &SignSequence, power: usize) -> Result<PolyhedralCone> {
    if power == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let expected = power * lp.len();
    if eps.len() != expected {
        return Err(Error::SignLength {
            got: eps.len(),
            expected,
        });
    }
    eps.require_strict()?;
    let rows = sign_rows(&lp.power(power)?, eps.signs())?;
    PolyhedralCone::new(lp.rank(), rows)
}

/// Sign cone of a plain path from `b` (no loop structure needed).
pub fn path_sign_cone(b: &ExchangeMatrix, path: &MutationPath, eps: &SignSequence) -> Result<PolyhedralCone> {
    if eps.len() != path.len() {
        return Err(Error::SignLength {
            got: eps.len(),
            expected: path.len(),
        });
    }
    eps.require_strict()?;
    let seeds = crate::seed::apply_path(b, path)?;
    let n = b.rank();
    let mut m = IntMatrix::identity(n);
    let mut rows = Vec::with_capacity(path.len());
    for (nu, (&k, &s)) in path.steps().iter().zip(eps.signs()).enumerate() {
        let f = BigInt::from(s.to_i64());
        rows.push(m.row(k).iter().map(|x| Rational::from_integer(x * &f)).collect());
        m = elementary_e(&seeds[nu], k, s)?.mul(&m);
    }
    PolyhedralCone::new(n, rows)
}

fn sign_rows(lp: &MutationLoop, signs: &[Sign]) -> Result<Vec<Vec<Rational>>> {
    let n = lp.rank();
    let mut m = IntMatrix::identity(n);
    let mut rows = Vec::with_capacity(signs.len());
    for (nu, (&k, &s)) in lp.path().steps().iter().zip(signs).enumerate() {
        let f = BigInt::from(s.to_i64());
        rows.push(m.row(k).iter().map(|x| Rational::from_integer(x * &f)).collect());
        m = elementary_e(lp.seed(nu), k, s)?.mul(&m);
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeStabilization {
    /// Smallest `n` with `C^{εⁿ}_{γⁿ} = C^{ε^{n+1}}_{γ^{n+1}}`.
    pub n: usize,
    /// The stable cone `C^stab`.
    pub cone: PolyhedralCone,
    /// Once found, the loop has North dynamics on the projectivised region.
    pub north_dynamics: bool,
}

/// Finds the smallest `n ≤ n_max` at which the nested sign cones of the stable
/// sign stop shrinking. Equality of consecutive cones persists forever.
pub fn check_cone_stabilization(
    lp: &MutationLoop,
    stable_sign: &SignSequence,
    n_max: usize,
) -> Result<Option<ConeStabilization>> {
    if stable_sign.len() != lp.len() {
        return Err(Error::SignLength {
            got: stable_sign.len(),
            expected: lp.len(),
        });
    }
    stable_sign.require_strict()?;
    if n_max == 0 {
        return Ok(None);
    }
    let h = lp.len();
    let long = lp.power(n_max + 1)?;
    let rows = sign_rows(&long, stable_sign.repeated(n_max + 1).signs())?;
    let mut prev = PolyhedralCone::new(lp.rank(), rows[..h].to_vec())?;
    for n in 1..=n_max {
        let next = PolyhedralCone::new(lp.rank(), rows[..(n + 1) * h].to_vec())?;
        // next ⊆ prev always holds; equality reduces to the reverse inclusion
        if cone_contains(&next, &prev)? {
            return Ok(Some(ConeStabilization {
                n,
                cone: prev,
                north_dynamics: true,
            }));
        }
        prev = next;
    }
    Ok(None)
}

/// Whether `m` maps every nonzero point of `cone` into its interior.
/// `None` when the cone is not strictly convex (the slice `f·x = 1` with `f`
/// the row sum is then not a compact base).
pub fn maps_into_interior(cone: &PolyhedralCone, m: &IntMatrix) -> Result<Option<bool>> {
    let n = cone.dim;
    if m.rows() != n || m.cols() != n {
        return Err(Error::RankMismatch {
            left: n,
            right: m.rows(),
        });
    }
    if !cone.is_strictly_convex() {
        return Ok(None);
    }
    let f: Vec<Rational> = (0..n)
        .map(|j| cone.rows.iter().fold(Rational::zero(), |acc, a| acc + &a[j]))
        .collect();
    let mut constraints: Vec<Constraint> = cone
        .rows
        .iter()
        .map(|a| Constraint::new(split(a), Relation::GreaterEq, Rational::zero()))
        .collect();
    constraints.push(Constraint::new(split(&f), Relation::Eq, Rational::one()));
    for a in &cone.rows {
        // objective a·(M x)
        let am: Vec<Rational> = (0..n)
            .map(|j| {
                (0..n).fold(Rational::zero(), |acc, i| {
                    acc + &a[i] * Rational::from_integer(m.get(i, j).clone())
                })
            })
            .collect();
        match minimize(&split(&am), &constraints) {
            LpOutcome::Optimal { value, .. } => {
                if !value.is_positive() {
                    return Ok(Some(false));
                }
            }
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Ok(Some(false)),
        }
    }
    Ok(Some(true))
}

/// Agreement of the two sides of the cone criterion for a Perron-Frobenius
/// eigenvalue on a stable cone.
#[derive(Clone, Debug, Serialize)]
pub struct ConeCriterion {
    /// Smallest `n` with `Eⁿ(C) ⊆ int C`, if found.
    pub interior_power: Option<usize>,
    /// Simple dominant eigenvalue whose eigenvector lies in `int C`.
    pub perron_interior: bool,
    pub min_normalized_slack: Option<f64>,
    pub agree: bool,
}

/// Compares "some power maps the cone into its interior" against "simple
/// dominant eigenvalue with eigenvector in the interior".
pub fn cone_criterion(cone: &PolyhedralCone, e: &IntMatrix, n_max: usize) -> Result<Option<ConeCriterion>> {
    if !cone.is_strictly_convex() {
        return Ok(None);
    }
    let mut interior_power = None;
    let mut p = IntMatrix::identity(cone.dim);
    for n in 1..=n_max {
        p = e.mul(&p);
        match maps_into_interior(cone, &p)? {
            Some(true) => {
                interior_power = Some(n);
                break;
            }
            Some(false) => {}
            None => return Ok(None),
        }
    }
    let spec = spectral_summary(e, DEFAULT_SIMPLICITY_TOL);
    let slack = spec.perron_ray.as_ref().map(|v| oriented_slack(cone, v).0);
    let perron_interior = spec.dominant_simple && slack.is_some_and(|s| s > PERRON_CONE_TOL);
    Ok(Some(ConeCriterion {
        interior_power,
        perron_interior,
        min_normalized_slack: slack,
        agree: interior_power.is_some() == perron_interior,
    }))
}

/// The orientation of `±v` with the larger least slack, and that slack.
fn oriented_slack(cone: &PolyhedralCone, v: &[f64]) -> (f64, Vec<f64>) {
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let sp = cone.min_normalized_slack(v);
    let sn = cone.min_normalized_slack(&neg);
    if sp >= sn {
        (sp, v.to_vec())
    } else {
        (sn, neg)
    }
}

// --- tropical sign ----------------------------------------------------------

/// `ε_γ(ℓ⁺)`, the tropical sign of the path.
pub fn tropical_sign(b: &ExchangeMatrix, path: &MutationPath) -> Result<SignSequence> {
    Ok(tropical_sign_detailed(b, path)?.0)
}

/// Tropical sign together with the interior point it was evaluated at when
/// `ℓ⁺` itself met a zero coordinate.
pub fn tropical_sign_detailed(
    b: &ExchangeMatrix,
    path: &MutationPath,
) -> Result<(SignSequence, Option<TropicalPoint>)> {
    let n = b.rank();
    let (_, word) = transport_along_path(b, path, &TropicalPoint::all_ones(n))?;
    if word.is_strict() {
        return Ok((word, None));
    }
    // deterministic perturbations inside int C⁺
    for m in 1..=64i64 {
        let w = TropicalPoint::new(
            (0..n)
                .map(|i| {
                    let i = i as i64 + 1;
                    Rational::one() + Rational::new(BigInt::from(i * i), BigInt::from(97 * m + i))
                })
                .collect(),
        );
        let (_, word) = transport_along_path(b, path, &w)?;
        if word.is_strict() {
            return Ok((word, Some(w)));
        }
    }
    Ok((word, None))
}

// --- sign stability ---------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    #[serde(rename = "cone-C-plus")]
    ConePlus,
    #[serde(rename = "nonneg-and-nonpos")]
    NonnegAndNonpos,
    #[serde(rename = "integer-rays")]
    IntegerRays,
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cone-C-plus" | "cone-c-plus" | "c-plus" => Ok(Region::ConePlus),
            "nonneg-and-nonpos" => Ok(Region::NonnegAndNonpos),
            "integer-rays" => Ok(Region::IntegerRays),
            _ => Err(Error::Parse(format!("unknown region `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_iterations: usize,
    pub ray_samples: usize,
    pub rng_seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_iterations: 200,
            ray_samples: 64,
            rng_seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    VerifiedOnSamples,
    Failed,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RayOutcome {
    /// Strict word `sign` from iterate `at` to the end of the budget.
    Stabilized { sign: SignSequence, at: usize },
    /// Constant but non-strict word from iterate `at`.
    PersistentZero { sign: SignSequence, at: usize },
    /// The ray returns to itself projectively with a non-constant or
    /// non-strict cycle of words, so it never stabilizes.
    Periodic { start: usize, period: usize },
    /// Last change of word too late in the budget to conclude.
    Unsettled,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayTrace {
    pub label: String,
    /// Primitive integer start vector.
    pub start: Vec<String>,
    /// Lies on the boundary of the sampled cone.
    pub boundary: bool,
    pub outcome: RayOutcome,
    /// Run-length encoding of the sign words: `(first iterate, word)`.
    pub sign_changes: Vec<(usize, SignSequence)>,
    /// Iterates whose word contains a zero.
    pub zero_sign_iterates: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub region: Region,
    pub budget: Budget,
    pub verdict: Verdict,
    pub stable_sign: Option<SignSequence>,
    /// Largest stabilization iterate over the rays that count.
    pub stabilization_bound: Option<usize>,
    #[serde(rename = "stable_matrix_E", serialize_with = "ser_opt_matrix")]
    pub stable_matrix_e: Option<IntMatrix>,
    #[serde(rename = "stable_matrix_E_check", serialize_with = "ser_opt_matrix")]
    pub stable_matrix_e_check: Option<IntMatrix>,
    pub lambda: Option<f64>,
    pub lambda_check: Option<f64>,
    #[serde(rename = "spectrum_E")]
    pub spectrum_e: Option<SpectralSummary>,
    pub rays_considered: usize,
    /// Boundary rays left out of the verdict (they lie outside the interior).
    pub rays_excluded: usize,
    pub notes: Vec<String>,
    pub diagnostics: Vec<RayTrace>,
}

impl StabilityReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::VerifiedOnSamples
    }

    /// Stable sign, stable matrix and its dual, or [`Error::Unverified`].
    pub fn stable_data(&self) -> Result<(&SignSequence, &IntMatrix, &IntMatrix)> {
        match (
            self.verdict,
            &self.stable_sign,
            &self.stable_matrix_e,
            &self.stable_matrix_e_check,
        ) {
            (Verdict::VerifiedOnSamples, Some(s), Some(e), Some(c)) => Ok((s, e, c)),
            _ => Err(Error::Unverified),
        }
    }
}

struct Sample {
    label: String,
    point: Vec<BigInt>,
    boundary: bool,
}

fn random_primitive(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<BigInt> {
    loop {
        let v: Vec<Rational> = (0..n)
            .map(|_| Rational::from_integer(BigInt::from(rng.gen_range(lo..=hi))))
            .collect();
        if v.iter().any(|x| !x.is_zero()) {
            return linalg::primitive_integer_vector(&v);
        }
    }
}

fn samples(n: usize, region: Region, budget: &Budget) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.rng_seed);
    let ones = vec![BigInt::one(); n];
    let mut out = Vec::new();
    match region {
        Region::ConePlus | Region::NonnegAndNonpos => {
            out.push(Sample {
                label: "l+".into(),
                point: ones,
                boundary: false,
            });
            for i in 0..n {
                out.push(Sample {
                    label: format!("e{}", i + 1),
                    point: unit(n, i),
                    boundary: true,
                });
            }
            for r in 0..budget.ray_samples {
                out.push(Sample {
                    label: format!("random{r}"),
                    point: random_primitive(&mut rng, n, 1, 1000),
                    boundary: false,
                });
            }
            if region == Region::NonnegAndNonpos {
                let mirrored: Vec<Sample> = out
                    .iter()
                    .map(|s| Sample {
                        label: format!("-{}", s.label),
                        point: s.point.iter().map(|x| -x).collect(),
                        boundary: s.boundary,
                    })
                    .collect();
                out.extend(mirrored);
            }
        }
        Region::IntegerRays => {
            out.push(Sample {
                label: "l+".into(),
                point: ones.clone(),
                boundary: false,
            });
            out.push(Sample {
                label: "-l+".into(),
                point: ones.iter().map(|x| -x).collect(),
                boundary: false,
            });
            for i in 0..n {
                for (sgn, name) in [(1, "+"), (-1, "-")] {
                    out.push(Sample {
                        label: format!("{name}e{}", i + 1),
                        point: unit(n, i).into_iter().map(|x| x * sgn).collect(),
                        boundary: false,
                    });
                }
            }
            for r in 0..budget.ray_samples {
                // small boxes probe the walls, large ones generic directions
                let bound = if r % 2 == 0 { 5 } else { 1000 };
                out.push(Sample {
                    label: format!("random{r}"),
                    point: random_primitive(&mut rng, n, -bound, bound),
                    boundary: false,
                });
            }
        }
    }
    out
}

fn to_point(v: &[BigInt]) -> TropicalPoint {
    TropicalPoint::new(v.iter().cloned().map(Rational::from_integer).collect())
}

/// Iterates the loop map on one ray, recording sign words until the budget
/// runs out or the projective orbit closes up.
fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v
        .iter()
        .fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, x));
    if g.is_zero() || g.is_one() {
        v
    } else {
        v.into_iter().map(|x| x / &g).collect()
    }
}

pub fn iterate_ray(
    lp: &MutationLoop,
    start: &TropicalPoint,
    max_iterations: usize,
) -> (RayOutcome, Vec<(usize, SignSequence)>, usize, usize) {
    let mut seen: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut words: Vec<SignSequence> = Vec::with_capacity(max_iterations);
    // the action is positively homogeneous and integral, so the primitive
    // integer vector carries the whole ray
    let mut cur = linalg::primitive_integer_vector(start.coords());
    let mut cycle = None;
    for n in 0..max_iterations {
        if let Some(&m) = seen.get(&cur) {
            cycle = Some((m, n - m));
            break;
        }
        let (next, word) = transport_integer(lp, &cur);
        seen.insert(std::mem::replace(&mut cur, primitive(next)), n);
        words.push(word);
    }
    let zeros = words.iter().filter(|w| !w.is_strict()).count();
    let mut changes: Vec<(usize, SignSequence)> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if changes.last().is_none_or(|(_, last)| last != w) {
            changes.push((i, w.clone()));
        }
    }
    let iterations = words.len();
    let outcome = match (cycle, words.last()) {
        (_, None) => RayOutcome::Unsettled,
        (Some((start, period)), Some(last)) => {
            let constant = words[start..].iter().all(|w| w == last);
            if constant {
                let at = changes.last().map_or(0, |c| c.0);
                if last.is_strict() {
                    RayOutcome::Stabilized { sign: last.clone(), at }
                } else {
                    RayOutcome::PersistentZero { sign: last.clone(), at }
                }
            } else {
                RayOutcome::Periodic { start, period }
            }
        }
        (None, Some(last)) => {
            let at = changes.last().map_or(0, |c| c.0);
            if at > max_iterations / 2 {
                RayOutcome::Unsettled
            } else if last.is_strict() {
                RayOutcome::Stabilized { sign: last.clone(), at }
            } else {
                RayOutcome::PersistentZero { sign: last.clone(), at }
            }
        }
    };
    (outcome, changes, zeros, iterations)
}

/// Samples rays in `region`, iterates the loop map on each and aggregates.
///
/// A ray counts as stabilized when its word is strict and constant from some
/// iterate no later than half the budget until the end (or around an exact
/// projective cycle). In `cone-C-plus` and `nonneg-and-nonpos` the coordinate
/// rays lie on the boundary; those that do not stabilize are reported but do
/// not decide the verdict.
pub fn detect_sign_stability(lp: &MutationLoop, region: Region, budget: Budget) -> Result<StabilityReport> {
    let n = lp.rank();
    let samples = samples(n, region, &budget);
    let traces: Vec<RayTrace> = samples
        .par_iter()
        .map(|s| {
            let (outcome, sign_changes, zero_sign_iterates, iterations) =
                iterate_ray(lp, &to_point(&s.point), budget.max_iterations);
            RayTrace {
                label: s.label.clone(),
                start: s.point.iter().map(|x| x.to_string()).collect(),
                boundary: s.boundary,
                outcome,
                sign_changes,
                zero_sign_iterates,
                iterations,
            }
        })
        .collect();
    let mut notes = Vec::new();
    let mut considered = Vec::new();
    let mut excluded = 0;
    for t in &traces {
        if t.zero_sign_iterates > 0 {
            notes.push(format!(
                "ray {} met a zero sign on {} iterate(s)",
                t.label, t.zero_sign_iterates
            ));
        }
        if t.boundary {
            if let RayOutcome::Stabilized { .. } = t.outcome {
                considered.push(t);
            } else {
                excluded += 1;
                notes.push(format!("boundary ray {} excluded: {:?}", t.label, t.outcome));
            }
        } else {
            considered.push(t);
        }
    }
    // boundary rays that stabilize to a different word are reported only
    let interior_sign = considered.iter().find_map(|t| match &t.outcome {
        RayOutcome::Stabilized { sign, .. } if !t.boundary => Some(sign.clone()),
        _ => None,
    });
    considered.retain(|t| {
        if !t.boundary {
            return true;
        }
        let agrees = matches!(&t.outcome, RayOutcome::Stabilized { sign, .. } if Some(sign) == interior_sign.as_ref());
        if !agrees {
            excluded += 1;
            notes.push(format!("boundary ray {} stabilized to a different sign", t.label));
        }
        agrees
    });

    let mut verdict = Verdict::VerifiedOnSamples;
    let mut stable_sign: Option<SignSequence> = None;
    let mut bound = 0usize;
    for t in &considered {
        match &t.outcome {
            RayOutcome::Stabilized { sign, at } => {
                bound = bound.max(*at);
                match &stable_sign {
                    None => stable_sign = Some(sign.clone()),
                    Some(s) if s != sign => {
                        verdict = Verdict::Failed;
                        notes.push(format!("ray {} stabilized to {} instead of {}", t.label, sign, s));
                    }
                    _ => {}
                }
            }
            RayOutcome::Periodic { start, period } => {
                verdict = Verdict::Failed;
                notes.push(format!(
                    "ray {} is projectively periodic (start {start}, period {period}) with changing signs",
                    t.label
                ));
            }
            RayOutcome::PersistentZero { sign, .. } => {
                verdict = Verdict::Failed;
                notes.push(format!("ray {} keeps the non-strict word {}", t.label, sign));
            }
            RayOutcome::Unsettled => {
                if verdict != Verdict::Failed {
                    verdict = Verdict::Inconclusive;
                }
            }
        }
    }
    if considered.is_empty() {
        verdict = Verdict::Inconclusive;
    }

    let mut report = StabilityReport {
        region,
        budget,
        verdict,
        stable_sign: None,
        stabilization_bound: None,
        stable_matrix_e: None,
        stable_matrix_e_check: None,
        lambda: None,
        lambda_check: None,
        spectrum_e: None,
        rays_considered: considered.len(),
        rays_excluded: excluded,
        notes,
        diagnostics: traces.clone(),
    };
    if verdict == Verdict::VerifiedOnSamples {
        let sign = stable_sign.expect("verified implies a sign");
        let e = loop_matrix(lp, &sign)?;
        let ec = loop_matrix_check(lp, &sign)?;
        let spec = spectral_summary(&e, DEFAULT_SIMPLICITY_TOL);
        report.lambda = Some(spec.rho);
        report.lambda_check = Some(spectral_summary(&ec, DEFAULT_SIMPLICITY_TOL).rho);
        report.spectrum_e = Some(spec);
        report.stable_sign = Some(sign);
        report.stabilization_bound = Some(bound);
        report.stable_matrix_e = Some(e);
        report.stable_matrix_e_check = Some(ec);
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationResult {
    pub shift: usize,
    pub verdict: Verdict,
    pub stable_sign: Option<SignSequence>,
    pub lambda: Option<f64>,
}

/// Runs detection on every cyclic rotation of the loop word. This is the
/// scope checked for uniform sign stability; other representation paths are
/// not enumerated.
pub fn detect_over_rotations(lp: &MutationLoop, region: Region, budget: Budget) -> Result<Vec<RotationResult>> {
    (0..lp.len().max(1))
        .map(|shift| {
            let r = detect_sign_stability(&lp.rotated(shift)?, region, budget)?;
            Ok(RotationResult {
                shift,
                verdict: r.verdict,
                stable_sign: r.stable_sign,
                lambda: r.lambda,
            })
        })
        .collect()
}

/// Perron ray membership in a stable cone with tolerance `PERRON_CONE_TOL·‖a‖₁`.
pub fn perron_in_cone(cone: &PolyhedralCone, ray: &[f64]) -> bool {
    oriented_slack(cone, ray).0 >= -PERRON_CONE_TOL
}

// --- X-filling --------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum XFilling {
    /// Coordinate `index` (1-based) vanishes in the chart reached by `witness`
    /// (1-based mutation labels).
    NotFilling {
        witness: Vec<usize>,
        index: usize,
    },
    NoObstructionToDepth {
        depth: usize,
        charts: usize,
    },
}

impl XFilling {
    pub fn is_filling_to_depth(&self) -> bool {
        matches!(self, XFilling::NoObstructionToDepth { .. })
    }
}

/// Walks all charts within mutation distance `depth` (no immediate
/// backtracking) and looks for a vanishing coordinate.
pub fn check_x_filling(w: &TropicalPoint, b: &ExchangeMatrix, depth: usize) -> Result<XFilling> {
    if w.dim() != b.rank() {
        return Err(Error::RankMismatch {
            left: b.rank(),
            right: w.dim(),
        });
    }
    let mut charts = 0usize;
    let mut stack: Vec<(ExchangeMatrix, TropicalPoint, Vec<usize>)> = vec![(b.clone(), w.clone(), Vec::new())];
    while let Some((seed, point, path)) = stack.pop() {
        charts += 1;
        if let Some(i) = point.coords().iter().position(Zero::is_zero) {
            return Ok(XFilling::NotFilling {
                witness: path.iter().map(|k| k + 1).collect(),
                index: i + 1,
            });
        }
        if path.len() == depth {
            continue;
        }
        for k in (0..b.rank()).rev() {
            if path.last() == Some(&k) {
                continue;
            }
            let (next, _) = mutate_point(&seed, k, &point)?;
            let mut p = path.clone();
            p.push(k);
            stack.push((seed.mutate(k)?, next, p));
        }
    }
    Ok(XFilling::NoObstructionToDepth { depth, charts })
}

// --- North-South ------------------------------------------------------------

/// Iterations used to approximate the attracting and repelling rays.
pub const NS_ORBIT_ITERATIONS: usize = 60;

#[derive(Clone, Debug, Serialize)]
pub struct NorthSouthReport {
    pub forward_verdict: Verdict,
    pub backward_verdict: Verdict,
    pub lambda_forward: Option<f64>,
    pub lambda_backward: Option<f64>,
    pub ns_on_samples: bool,
    /// `φⁿ(ℓ⁺)` and `φ⁻ⁿ(ℓ⁺)`, L1-normalised.
    pub attracting_ray: Option<Vec<f64>>,
    pub repelling_ray: Option<Vec<f64>>,
    /// L1 distance between the orbit direction and the Perron ray of `E_φ`.
    pub attracting_perron_gap: Option<f64>,
    pub repelling_perron_gap: Option<f64>,
    pub sign_at_attracting: Option<SignSequence>,
    pub sign_at_repelling: Option<SignSequence>,
    pub non_parabolic: Option<bool>,
    pub attracting_filling: Option<XFilling>,
    pub repelling_filling: Option<XFilling>,
    pub char_poly_palindromy: Option<Palindromy>,
    /// `|λ(φ) − λ(φ⁻¹)|` small, as palindromic characteristic polynomials predict.
    pub reciprocal_consistent: Option<bool>,
    pub notes: Vec<String>,
}

fn orbit_point(lp: &MutationLoop, start: &TropicalPoint, n: usize) -> TropicalPoint {
    let mut cur = start.clone();
    for _ in 0..n {
        let (next, _) = transport_unchecked(lp, &cur);
        // rescale to keep the representatives small
        let key = linalg::primitive_integer_vector(next.coords());
        cur = to_point(&key);
    }
    cur
}

fn l1_direction(w: &TropicalPoint) -> Vec<f64> {
    let norm = linalg::l1_norm(w.coords());
    w.coords().iter().map(|c| rational_to_f64(&(c / &norm))).collect()
}

fn l1_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Runs detection on integer rays for the loop and its inverse and checks the
/// North-South picture: both stretch factors above one, distinct signs at the
/// two fixed rays and X-filling of both rays to `depth`.
pub fn check_north_south(lp: &MutationLoop, budget: Budget, depth: usize) -> Result<NorthSouthReport> {
    let inv = lp.inverse()?;
    let fwd = detect_sign_stability(lp, Region::IntegerRays, budget)?;
    let bwd = detect_sign_stability(&inv, Region::IntegerRays, budget)?;
    let mut notes = Vec::new();
    let lf = fwd.lambda;
    let lb = bwd.lambda;
    let expanding = |l: Option<f64>| l.is_some_and(|l| l > 1.0 + 1e-9);
    let ns_on_samples = fwd.is_verified() && bwd.is_verified() && expanding(lf) && expanding(lb);
    let mut report = NorthSouthReport {
        forward_verdict: fwd.verdict,
        backward_verdict: bwd.verdict,
        lambda_forward: lf,
        lambda_backward: lb,
        ns_on_samples,
        attracting_ray: None,
        repelling_ray: None,
        attracting_perron_gap: None,
        repelling_perron_gap: None,
        sign_at_attracting: None,
        sign_at_repelling: None,
        non_parabolic: None,
        attracting_filling: None,
        repelling_filling: None,
        char_poly_palindromy: None,
        reciprocal_consistent: None,
        notes: Vec::new(),
    };
    if let (Some(a), Some(b)) = (lf, lb) {
        report.reciprocal_consistent = Some((a - b).abs() <= 1e-9 * a.max(b).max(1.0));
    }
    if let Some(e) = &fwd.stable_matrix_e {
        report.char_poly_palindromy = Some(palindrome_check(&char_poly(e)));
    }
    if !ns_on_samples {
        if !expanding(lf) || !expanding(lb) {
            notes.push("no expansion: a stretch factor is not above 1".into());
        }
        report.notes = notes;
        return Ok(report);
    }
    let ones = TropicalPoint::all_ones(lp.rank());
    let plus = orbit_point(lp, &ones, NS_ORBIT_ITERATIONS);
    let minus = orbit_point(&inv, &ones, NS_ORBIT_ITERATIONS);
    let gap = |r: &StabilityReport, v: &[f64]| {
        r.spectrum_e
            .as_ref()
            .and_then(|s| s.perron_ray.as_ref())
            .map(|p| l1_gap(p, v).min(l1_gap(&p.iter().map(|x| -x).collect::<Vec<_>>(), v)))
    };
    let dp = l1_direction(&plus);
    let dm = l1_direction(&minus);
    report.attracting_perron_gap = gap(&fwd, &dp);
    report.repelling_perron_gap = gap(&bwd, &dm);
    let (_, sp) = transport_unchecked(lp, &plus);
    let (_, sm) = transport_unchecked(lp, &minus);
    report.non_parabolic = Some(sp != sm);
    report.sign_at_attracting = Some(sp);
    report.sign_at_repelling = Some(sm);
    report.attracting_filling = Some(check_x_filling(&plus, lp.base(), depth)?);
    report.repelling_filling = Some(check_x_filling(&minus, lp.base(), depth)?);
    report.attracting_ray = Some(dp);
    report.repelling_ray = Some(dm);
    report.notes = notes;
    Ok(report)
}

/// `φⁿ(ℓ⁺)/‖φⁿ(ℓ⁺)‖₁` for `n = 0..=iterations`.
pub fn normalized_orbit(lp: &MutationLoop, iterations: usize) -> Vec<Vec<f64>> {
    let mut cur = TropicalPoint::all_ones(lp.rank());
    let mut out = vec![l1_direction(&cur)];
    for _ in 0..iterations {
        let (next, _) = transport_unchecked(lp, &cur);
        cur = to_point(&linalg::primitive_integer_vector(next.coords()));
        out.push(l1_direction(&cur));
    }
    out
}
