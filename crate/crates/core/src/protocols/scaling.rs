//! Monte Carlo build-time statistics for cluster chains assembled by
//! probabilistic fusion.
//!
//! A chain of `n` is built by fusing two chains of `n/2`; a failed fusion
//! destroys the entanglement of both halves, which must be rebuilt. Two
//! accounting modes are provided:
//!
//! - `SerialAttempts`: total work, i.e. every fusion attempt anywhere in
//!   the recursion costs `t0` and they are summed. At `p = 1` this is
//!   `(n-1) t0`.
//! - `LockstepParallel`: wall-clock time with both halves rebuilt
//!   concurrently on identical pipelines, the fusion pulse folded into the
//!   base-level build. Each top-level attempt then costs one half-build
//!   time, giving mean `t0 (1/p)^{log2 n}` exactly for power-of-two `n`.
//!   At `p = 1` this is `t0`.
//!
//! Only the lockstep mode realizes the `t0 (1/p)^{log2 n}` scaling law
//! across the full range of `p`; the serial mode's total work grows with an
//! extra factor of two per recursion level (exponent `log2(2/p)` for small
//! `p`).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Chain length, per-attempt fusion success probability, and attempt time.
#[derive(Clone, Copy, Debug)]
pub struct ClusterSpec {
    pub n: usize,
    pub p: f64,
    pub t0: f64,
}

impl ClusterSpec {
    pub fn new(n: usize, p: f64, t0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "success probability must lie in (0, 1], got {p}"
            )));
        }
        if !(t0 > 0.0) {
            return Err(Error::InvalidParameter(format!("t0 must be > 0, got {t0}")));
        }
        Ok(ClusterSpec { n, p, t0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeAccounting {
    SerialAttempts,
    LockstepParallel,
}

/// Monte Carlo estimate next to the analytic scaling value.
#[derive(Clone, Debug)]
pub struct BuildTimeStats {
    pub mean: f64,
    /// `t0 (1/p)^{log2 n}`.
    pub analytic: f64,
    pub mode: TimeAccounting,
    /// Per-trial build times.
    pub times: Vec<f64>,
}

/// `t0 (1/p)^{log2 n}`.
pub fn analytic_build_time(spec: &ClusterSpec) -> f64 {
    spec.t0 * (1.0 / spec.p).powf((spec.n as f64).log2())
}

fn serial_attempts<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> u64 {
    if n <= 1 {
        return 0;
    }
    let hi = n - n / 2;
    let lo = n / 2;
    let mut attempts = 0u64;
    loop {
        attempts += serial_attempts(hi, p, rng) + serial_attempts(lo, p, rng) + 1;
        if rng.gen::<f64>() < p {
            return attempts;
        }
    }
}

fn lockstep_time<R: Rng + ?Sized>(n: usize, p: f64, t0: f64, rng: &mut R) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    if n == 2 {
        let mut t = t0;
        while rng.gen::<f64>() >= p {
            t += t0;
        }
        return t;
    }
    let hi = n - n / 2;
    let mut t = lockstep_time(hi, p, t0, rng);
    while rng.gen::<f64>() >= p {
        t += lockstep_time(hi, p, t0, rng);
    }
    t
}

/// Run `trials` seeded Monte Carlo builds and report the empirical mean
/// alongside the analytic value.
pub fn simulate_build_time(
    spec: &ClusterSpec,
    trials: usize,
    seed: u64,
    mode: TimeAccounting,
) -> Result<BuildTimeStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(trials);
    for _ in 0..trials {
        let t = match mode {
            TimeAccounting::SerialAttempts => {
                serial_attempts(spec.n, spec.p, &mut rng) as f64 * spec.t0
            }
            TimeAccounting::LockstepParallel => lockstep_time(spec.n, spec.p, spec.t0, &mut rng),
        };
        times.push(t);
    }
    let mean = times.iter().sum::<f64>() / trials as f64;
    Ok(BuildTimeStats {
        mean,
        analytic: analytic_build_time(spec),
        mode,
        times,
    })
}

/// Least-squares slope of `ln(mean)` against `ln(n)`; for a power law
/// `T = t0 n^s` this recovers `s = log2(1/p)`.
pub fn scaling_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_reference_value() {
        let spec = ClusterSpec::new(4, 0.5, 1.0).unwrap();
        assert!((analytic_build_time(&spec) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_success_costs() {
        // p = 1: serial counts every fusion once, lockstep collapses to t0
        for n in [2usize, 4, 8, 16] {
            let spec = ClusterSpec::new(n, 1.0, 1.0).unwrap();
            let serial =
                simulate_build_time(&spec, 100, 1, TimeAccounting::SerialAttempts).unwrap();
            assert!((serial.mean - (n as f64 - 1.0)).abs() < 1e-12);
            let lockstep =
                simulate_build_time(&spec, 100, 1, TimeAccounting::LockstepParallel).unwrap();
            assert!((lockstep.mean - 1.0).abs() < 1e-12);
            assert!((lockstep.analytic - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_runs_replay() {
        let spec = ClusterSpec::new(8, 0.5, 1.0).unwrap();
        let a = simulate_build_time(&spec, 500, 42, TimeAccounting::LockstepParallel).unwrap();
        let b = simulate_build_time(&spec, 500, 42, TimeAccounting::LockstepParallel).unwrap();
        assert_eq!(a.times, b.times);
    }

    #[test]
    fn lockstep_mean_tracks_analytic() {
        let spec = ClusterSpec::new(8, 0.5, 1.0).unwrap();
        let stats =
            simulate_build_time(&spec, 50_000, 7, TimeAccounting::LockstepParallel).unwrap();
        assert!(
            (stats.mean / stats.analytic - 1.0).abs() < 0.05,
            "mean {} vs analytic {}",
            stats.mean,
            stats.analytic
        );
    }

    #[test]
    fn lockstep_slope_matches_retry_exponent() {
        let p = 0.5;
        let points: Vec<(f64, f64)> = [4usize, 8, 16]
            .iter()
            .map(|&n| {
                let spec = ClusterSpec::new(n, p, 1.0).unwrap();
                let stats = simulate_build_time(
                    &spec,
                    20_000,
                    100 + n as u64,
                    TimeAccounting::LockstepParallel,
                )
                .unwrap();
                (n as f64, stats.mean)
            })
            .collect();
        let slope = scaling_slope(&points);
        let want = (1.0 / p).log2();
        assert!(
            (slope / want - 1.0).abs() < 0.2,
            "slope {slope} vs {want}"
        );
    }

    #[test]
    fn serial_mean_exceeds_lockstep() {
        let spec = ClusterSpec::new(8, 0.5, 1.0).unwrap();
        let serial =
            simulate_build_time(&spec, 20_000, 3, TimeAccounting::SerialAttempts).unwrap();
        let lockstep =
            simulate_build_time(&spec, 20_000, 3, TimeAccounting::LockstepParallel).unwrap();
        assert!(serial.mean > lockstep.mean);
    }

    #[test]
    fn spec_validation() {
        assert!(ClusterSpec::new(1, 0.5, 1.0).is_err());
        assert!(ClusterSpec::new(4, 0.0, 1.0).is_err());
        assert!(ClusterSpec::new(4, 1.1, 1.0).is_err());
        assert!(ClusterSpec::new(4, 0.5, 0.0).is_err());
        let spec = ClusterSpec::new(4, 0.5, 1.0).unwrap();
        assert!(simulate_build_time(&spec, 0, 0, TimeAccounting::SerialAttempts).is_err());
    }
}
