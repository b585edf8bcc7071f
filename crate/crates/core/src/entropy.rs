//! Categorical-entropy values through their K-theoretic reduction.
//!
//! The entropy of the loop functor on the finite-dimensional side equals
//! `log λ̌` for every parameter `T`; on the perfect side it equals `log λ` at
//! `T = 0` and is bounded above by `log λ` elsewhere. Both reduce to the growth
//! of `‖Eⁿ‖₁` (entrywise L¹), which the traces below measure directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{l1_norm, ln_big, ln_rational, IntMatrix};
use crate::seed::MutationLoop;
use crate::stability::StabilityReport;
use crate::tropical::{transport_point, TropicalPoint};

/// Fraction of the trace used by [`extrapolate`].
pub const EXTRAPOLATION_TAIL: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct EntropyEstimate {
    pub h_dfd: f64,
    pub h_per: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// `log λ`, an upper bound for the perfect-side entropy at any `T`.
    pub h_per_upper_bound: f64,
    pub growth_trace: Vec<(usize, f64)>,
    pub orbit_trace: Vec<(usize, f64)>,
    /// Limit of `growth_trace` fitted on its last quarter.
    pub extrapolated: Option<f64>,
    pub orbit_extrapolated: Option<f64>,
}

fn ln_at_least_one(x: f64) -> f64 {
    // ρ ≥ 1 for unimodular matrices; absorb float noise just below 1
    if x < 1.0 && x > 1.0 - 1e-12 {
        0.0
    } else {
        x.ln()
    }
}

/// `log λ̌`. `T` does not enter: the value is the same for every `T`.
pub fn entropy_dfd(report: &StabilityReport, _t: f64) -> Result<f64> {
    report.stable_data()?;
    report.lambda_check.map(ln_at_least_one).ok_or(Error::Unverified)
}

/// `log λ`, the perfect-side entropy at `T = 0`.
pub fn entropy_per(report: &StabilityReport) -> Result<f64> {
    report.stable_data()?;
    report.lambda.map(ln_at_least_one).ok_or(Error::Unverified)
}

/// Upper bound `log λ` for the perfect-side entropy at any `T`; equality is
/// only known at `T = 0`.
pub fn entropy_per_upper_bound(report: &StabilityReport, _t: f64) -> Result<f64> {
    entropy_per(report)
}

/// `(n, (1/n)·log‖Eⁿ‖₁)` for `n = 1..=n_max`, with exact integer powers.
pub fn norm_growth_trace(e: &IntMatrix, n_max: usize) -> Result<Vec<(usize, f64)>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if !e.is_square() {
        return Err(Error::Shape("norm growth needs a square matrix".into()));
    }
    let mut p = IntMatrix::identity(e.rows());
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        p = e.mul(&p);
        let norm = p.l1_norm();
        if norm == 0u32.into() {
            return Err(Error::InvalidArgument("matrix is nilpotent".into()));
        }
        out.push((n, ln_big(&norm) / n as f64));
    }
    Ok(out)
}

/// `(n, (1/n)·log‖x(φⁿ(w))‖₁)` for `n = 1..=n_max`.
pub fn orbit_growth_trace(lp: &MutationLoop, w: &TropicalPoint, n_max: usize) -> Result<Vec<(usize, f64)>> {
    if w.is_zero() {
        return Err(Error::ZeroPoint);
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let mut cur = w.clone();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        cur = transport_point(lp, &cur)?.0;
        // the loop map is invertible, so the orbit never reaches 0
        out.push((n, ln_rational(&l1_norm(cur.coords())) / n as f64));
    }
    Ok(out)
}

/// Least-squares fit of `a + b/n` over the last quarter of the trace
/// (at least two points); returns `a`.
pub fn extrapolate(trace: &[(usize, f64)]) -> Option<f64> {
    let m = (trace.len() / EXTRAPOLATION_TAIL).max(2);
    if trace.len() < m {
        return None;
    }
    let tail = &trace[trace.len() - m..];
    let k = tail.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, y) in tail {
        let x = 1.0 / n as f64;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = k * sxx - sx * sx;
    if det.abs() < f64::EPSILON * k * sxx {
        return None;
    }
    Some((sy * sxx - sx * sxy) / det)
}

/// All entropy quantities for a verified report, with traces up to `n_max`
/// (the orbit trace starts at `ℓ⁺`).
pub fn estimate(lp: &MutationLoop, report: &StabilityReport, t: f64, n_max: usize) -> Result<EntropyEstimate> {
    let (_, e, _) = report.stable_data()?;
    let growth_trace = norm_growth_trace(e, n_max)?;
    let orbit_trace = orbit_growth_trace(lp, &TropicalPoint::all_ones(lp.rank()), n_max)?;
    Ok(EntropyEstimate {
        h_dfd: entropy_dfd(report, t)?,
        h_per: entropy_per(report)?,
        t,
        h_per_upper_bound: entropy_per_upper_bound(report, t)?,
        extrapolated: extrapolate(&growth_trace),
        orbit_extrapolated: extrapolate(&orbit_trace),
        growth_trace,
        orbit_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::seed::{ExchangeMatrix, MutationPath, Permutation};
    use crate::stability::{detect_sign_stability, Budget, Region};

    fn im(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_and_permutations_have_flat_traces() {
        for m in [im(&[&[1, 0], &[0, 1]]), im(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]])] {
            let n = m.rows() as f64;
            for (k, v) in norm_growth_trace(&m, 10).unwrap() {
                // ‖Pᵏ‖₁ = N, so the trace is (log N)/k
                assert!((v - n.ln() / k as f64).abs() < 1e-15);
            }
        }
        assert!(norm_growth_trace(&im(&[&[1]]), 5).unwrap().iter().all(|p| p.1 == 0.0));
        assert!(norm_growth_trace(&im(&[&[1]]), 0).is_err());
    }

    #[test]
    fn golden_matrix_trace_matches_closed_form() {
        let m = im(&[&[2, 1], &[1, 1]]);
        let trace = norm_growth_trace(&m, 40).unwrap();
        // ‖Mⁿ‖₁ = F(2n+3), an independent oracle by the Fibonacci recurrence
        let mut fib = vec![0f64, 1.0];
        for i in 2..90 {
            fib.push(fib[i - 1] + fib[i - 2]);
        }
        for &(n, v) in &trace {
            assert!((v - fib[2 * n + 3].ln() / n as f64).abs() < 1e-12, "n = {n}");
        }
        let ln_lambda = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let last = trace.last().unwrap().1;
        assert!((last - ln_lambda).abs() < 2e-2);
        assert!((extrapolate(&trace).unwrap() - ln_lambda).abs() < 1e-6);
        assert_eq!(m.pow(40).l1_norm(), {
            let mut p = IntMatrix::identity(2);
            for _ in 0..40 {
                p = m.mul(&p);
            }
            p.l1_norm()
        });
    }

    #[test]
    fn orbit_trace_homogeneity_and_zero() {
        let b = ExchangeMatrix::from_rows(&[vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]]).unwrap();
        let lp = MutationLoop::new(
            b.clone(),
            MutationPath::new(vec![0, 1]),
            Permutation::new(vec![2, 0, 1]).unwrap(),
        )
        .unwrap();
        let w = TropicalPoint::from_integers(&[3, -1, 2]);
        let a = orbit_growth_trace(&lp, &w, 12).unwrap();
        let c = orbit_growth_trace(&lp, &w.scaled(&rat(7)), 12).unwrap();
        for ((n, x), (_, y)) in a.iter().zip(&c) {
            assert!((y - x - 7f64.ln() / *n as f64).abs() < 1e-12);
        }
        assert_eq!(
            orbit_growth_trace(&lp, &TropicalPoint::from_integers(&[0, 0, 0]), 3),
            Err(Error::ZeroPoint)
        );
        let kk = MutationLoop::new(b, MutationPath::new(vec![1, 1]), Permutation::identity(3)).unwrap();
        let w = TropicalPoint::from_integers(&[1, 0, 0]);
        assert!(orbit_growth_trace(&kk, &w, 5).unwrap().iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn entropies_need_verified_reports() {
        let b = ExchangeMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let kk = MutationLoop::new(b.clone(), MutationPath::new(vec![0, 0]), Permutation::identity(2)).unwrap();
        let r = detect_sign_stability(&kk, Region::ConePlus, Budget::default()).unwrap();
        assert_eq!(entropy_dfd(&r, 5.0).unwrap(), 0.0);
        assert_eq!(entropy_dfd(&r, -5.0).unwrap(), 0.0);
        assert_eq!(entropy_per(&r).unwrap(), 0.0);
        assert_eq!(entropy_per_upper_bound(&r, 3.0).unwrap(), 0.0);
        let gen = MutationLoop::new(b, MutationPath::new(vec![0]), Permutation::new(vec![1, 0]).unwrap()).unwrap();
        let r = detect_sign_stability(&gen, Region::ConePlus, Budget::default()).unwrap();
        assert_eq!(entropy_per(&r), Err(Error::Unverified));
    }
}
