//! Closed-form accuracy and reliability bounds.
//!
//! For Generalized Counting with k-wise independent hashing the failure
//! probability at relative precision `epsilon` is
//! `(4k / (e^{2/3} epsilon^2 M))^{k/2}`. For Gibbons–Tirthapura it is
//!
//! ```text
//! k^{k/2} / (e^{k/3} M^{k/2}) * ( alpha^{k/2} / (1-alpha)^k
//!                                + 4^{k/2} / (alpha^{k/2} epsilon^k (2^{k/2} - 1)) )
//! ```
//!
//! for any `alpha` in `[4k/M, 1)`; [`gt_delta_opt`] minimizes it over
//! `alpha`. At `delta = 0.05` and `k = 4` the GT bound gives roughly
//! `epsilon = 5 / sqrt(M)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sketches::Technique;

/// Failure probability used for plotted curves (19 times out of 20).
pub const DEFAULT_DELTA: f64 = 0.05;

/// One point of a bound curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub technique: Technique,
    pub k: u32,
    pub memory: u64,
    pub epsilon: f64,
    pub delta: f64,
}

/// Standard error of probabilistic counting with `m` bitmaps.
pub fn pc_theoretical_stderr(m: f64) -> f64 {
    0.78 / m.sqrt()
}

/// Standard error of LogLog with `m` buckets.
pub fn ll_theoretical_stderr(m: f64) -> f64 {
    1.3 / m.sqrt()
}

fn check_gc(m: f64, k: u32) -> Result<()> {
    if k < 2 || m < 2.0 * k as f64 {
        return Err(Error::invalid(format!("GC bound needs M >= 2k >= 4 (M={m}, k={k})")));
    }
    Ok(())
}

fn check_gt(m: f64, k: u32) -> Result<()> {
    if k < 1 || m < 8.0 * k as f64 {
        return Err(Error::invalid(format!("GT bound needs M >= 8k (M={m}, k={k})")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64, max: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < max) {
        return Err(Error::invalid(format!("epsilon {epsilon} not in (0, {max})")));
    }
    Ok(())
}

/// GC failure probability, clamped to `[0, 1]`.
pub fn gc_delta(epsilon: f64, m: f64, k: u32) -> Result<f64> {
    check_epsilon(epsilon, 0.5)?;
    check_gc(m, k)?;
    let base = 4.0 * k as f64 / ((2.0f64 / 3.0).exp() * epsilon * epsilon * m);
    Ok(base.powf(k as f64 / 2.0).min(1.0))
}

/// Precision reached by GC with probability `1 - delta`, if it is below 1/2.
pub fn gc_epsilon(delta: f64, m: f64, k: u32) -> Result<Option<f64>> {
    check_gc(m, k)?;
    check_delta(delta)?;
    let eps = (4.0 * k as f64 / ((2.0f64 / 3.0).exp() * m * delta.powf(2.0 / k as f64))).sqrt();
    Ok((eps < 0.5).then_some(eps))
}

/// GT failure probability for a given `alpha` (not clamped).
pub fn gt_delta(epsilon: f64, m: f64, k: u32, alpha: f64) -> Result<f64> {
    check_epsilon(epsilon, f64::INFINITY)?;
    check_gt(m, k)?;
    let lo = 4.0 * k as f64 / m;
    if !(alpha >= lo && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} not in [{lo}, 1)")));
    }
    Ok(gt_raw(epsilon, m, k, alpha))
}

fn gt_raw(epsilon: f64, m: f64, k: u32, alpha: f64) -> f64 {
    let h = k as f64 / 2.0;
    let kf = k as f64;
    let lead = (h * kf.ln() - kf / 3.0 - h * m.ln()).exp();
    let first = alpha.powf(h) / (1.0 - alpha).powf(kf);
    let second = 4f64.powf(h) / (alpha.powf(h) * epsilon.powf(kf) * (2f64.powf(h) - 1.0));
    lead * (first + second)
}

/// Minimum of [`gt_delta`] over admissible `alpha`, with the minimizer.
pub fn gt_delta_opt_at(epsilon: f64, m: f64, k: u32) -> Result<(f64, f64)> {
    check_epsilon(epsilon, f64::INFINITY)?;
    check_gt(m, k)?;
    // golden-section search over the logit of alpha
    let logit = |a: f64| (a / (1.0 - a)).ln();
    let alpha = |x: f64| 1.0 / (1.0 + (-x).exp());
    let f = |x: f64| gt_raw(epsilon, m, k, alpha(x));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (logit(4.0 * k as f64 / m), logit(1.0 - 1e-12));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-9 * (1.0 + a.abs().max(b.abs())) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let lower = logit(4.0 * k as f64 / m);
    let (x, v) = if f(lower) < f(x) { (lower, f(lower)) } else { (x, f(x)) };
    Ok((v, alpha(x)))
}

/// Minimum of [`gt_delta`] over admissible `alpha`.
pub fn gt_delta_opt(epsilon: f64, m: f64, k: u32) -> Result<f64> {
    gt_delta_opt_at(epsilon, m, k).map(|(d, _)| d)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta {delta} not in (0, 1)")));
    }
    Ok(())
}

/// Precision reached by GT with probability `1 - delta`, if it is below 1.
pub fn gt_epsilon(delta: f64, m: f64, k: u32) -> Result<Option<f64>> {
    check_delta(delta)?;
    check_gt(m, k)?;
    let g = |eps: f64| gt_delta_opt(eps, m, k);
    let mut hi = 1.0;
    if g(hi)? > delta {
        return Ok(None);
    }
    let mut lo = hi;
    while g(lo)? <= delta {
        lo /= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// Hash width needed by GC to handle `f0` distinct tuples at precision
/// `epsilon` with `m` stored hashes.
pub fn gc_min_bits(f0: f64, epsilon: f64, m: f64) -> u32 {
    let bits = (1.0 + (f0 / (epsilon * m)).log2()).ceil();
    bits.max(0.0) as u32
}

/// Precision at `delta` for `technique`, `None` when the bound is vacuous
/// or its preconditions fail.
pub fn epsilon_at_delta(technique: Technique, delta: f64, m: f64, k: u32) -> Option<f64> {
    match technique {
        Technique::Gc => gc_epsilon(delta, m, k).ok().flatten(),
        Technique::Gt => gt_epsilon(delta, m, k).ok().flatten(),
        _ => None,
    }
}

/// Memory values `2^6 ..= 2^20` used for the default curves.
pub fn default_memory_grid() -> Vec<u64> {
    (6..=20).map(|e| 1u64 << e).collect()
}

/// Solves the GC and GT bounds for epsilon at `delta` over the grid and
/// writes them as a tab-separated table.
pub fn emit_bound_curves<W: Write>(memories: &[u64], ks: &[u32], delta: f64, mut out: W) -> Result<Vec<BoundPoint>> {
    let mut points = Vec::new();
    for technique in [Technique::Gc, Technique::Gt] {
        for &k in ks {
            for &m in memories {
                if let Some(epsilon) = epsilon_at_delta(technique, delta, m as f64, k) {
                    points.push(BoundPoint {
                        technique,
                        k,
                        memory: m,
                        epsilon,
                        delta,
                    });
                }
            }
        }
    }
    writeln!(out, "technique\tk\tM\tepsilon_at_delta_{delta}")?;
    for p in &points {
        writeln!(out, "{}\t{}\t{}\t{:.6e}", p.technique, p.k, p.memory, p.epsilon)?;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn stderr_examples() {
        assert!((pc_theoretical_stderr(1024.0) - 0.024375).abs() < 1e-12);
        assert!((ll_theoretical_stderr(1024.0) - 0.040625).abs() < 1e-12);
        assert_eq!(pc_theoretical_stderr(1.0), 0.78);
        assert_eq!(ll_theoretical_stderr(1.0), 1.3);
    }

    #[test]
    fn gc_reference_value() {
        let d = gc_delta(0.1, 10_000.0, 2).unwrap();
        let independent = 8.0 / (100.0 * E.powf(2.0 / 3.0));
        assert!((d - independent).abs() < 1e-15);
        assert!((d - 0.0411).abs() < 5e-5);
    }

    #[test]
    fn gc_preconditions() {
        assert!(gc_delta(0.5, 1e4, 2).is_err());
        assert!(gc_delta(0.1, 3.0, 2).is_err());
        assert!(gc_delta(0.1, 1e4, 1).is_err());
        assert_eq!(gc_delta(0.01, 4.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn gc_epsilon_inverts_delta() {
        for k in [2, 4, 8] {
            let eps = gc_epsilon(0.05, 1e5, k).unwrap().unwrap();
            assert!((gc_delta(eps, 1e5, k).unwrap() - 0.05).abs() < 1e-12);
        }
        assert_eq!(gc_epsilon(0.05, 16.0, 8).unwrap(), None);
    }

    #[test]
    fn min_bits() {
        assert_eq!(gc_min_bits(1000.0, 0.1, 10_000.0), 1);
        let headline = gc_min_bits(2e21, 0.1, 1e4);
        assert!(headline <= 64, "{headline}");
        for f0 in [3e5, 7.7e9, 1.3e15] {
            assert_eq!(gc_min_bits(2.0 * f0, 0.1, 1e4), gc_min_bits(f0, 0.1, 1e4) + 1);
        }
    }

    #[test]
    fn gt_constraints() {
        assert!(gt_delta(0.1, 31.0, 4, 0.6).is_err());
        assert!(gt_delta(0.1, 1e4, 4, 0.0015).is_err());
        assert!(gt_delta(0.1, 1e4, 4, 1.0).is_err());
        assert!(gt_delta(0.1, 1e4, 4, 0.0016).is_ok());
    }

    #[test]
    fn gt_opt_is_a_minimum() {
        for (eps, m, k) in [(0.05, 1e4, 4), (0.2, 1e3, 2), (0.01, 1e6, 8), (0.5, 64.0, 8)] {
            let opt = gt_delta_opt(eps, m, k).unwrap();
            let lo = 4.0 * k as f64 / m;
            for i in 0..=200 {
                let alpha = lo + (1.0 - lo) * i as f64 / 201.0;
                assert!(opt <= gt_delta(eps, m, k, alpha).unwrap() * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn corollary_within_ten_percent() {
        for m in [1e4, 1e5, 1e6] {
            let eps = gt_epsilon(0.05, m, 4).unwrap().unwrap();
            let target = 5.0 / f64::sqrt(m);
            assert!((eps / target - 1.0).abs() < 0.10, "M={m}: {eps} vs {target}");
            assert!((gt_delta_opt(eps, m, 4).unwrap() - 0.05).abs() < 1e-4);
        }
    }

    #[test]
    fn monotone_in_memory() {
        for k in [2u32, 4, 8] {
            let mut prev_gc = f64::INFINITY;
            let mut prev_gt = f64::INFINITY;
            for e in 7..=24 {
                let m = (1u64 << e) as f64;
                let gc = gc_delta(0.2, m, k).unwrap();
                let gt = gt_delta_opt(0.2, m, k).unwrap();
                assert!(gc <= prev_gc && gt <= prev_gt);
                prev_gc = gc;
                prev_gt = gt;
            }
        }
    }

    #[test]
    fn curves() {
        let mut buf = Vec::new();
        let points = emit_bound_curves(&default_memory_grid(), &[2, 4, 8], DEFAULT_DELTA, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("technique\tk\tM\tepsilon_at_delta_0.05\n"));
        assert_eq!(text.lines().count(), points.len() + 1);
        for t in [Technique::Gc, Technique::Gt] {
            for k in [2, 4, 8] {
                let eps: Vec<f64> = points
                    .iter()
                    .filter(|p| p.technique == t && p.k == k)
                    .map(|p| p.epsilon)
                    .collect();
                assert!(!eps.is_empty());
                assert!(eps.windows(2).all(|w| w[1] < w[0]), "{t} k={k}");
            }
        }
        // with pairwise independence GC's bound is tighter at every budget
        for m in default_memory_grid() {
            let gc = epsilon_at_delta(Technique::Gc, 0.05, m as f64, 2);
            let gt = epsilon_at_delta(Technique::Gt, 0.05, m as f64, 2);
            if let (Some(gc), Some(gt)) = (gc, gt) {
                assert!(gc < gt, "M={m}");
            }
        }
    }
}
