//! Two-sample permutation test on the unbiased MMD statistic.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::measures::{rng_for, Measure, Sample};
use crate::scalar::{from_usize, Real};

pub const DEFAULT_PERMUTATIONS: usize = 199;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Reject,
    Accept,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult<T> {
    pub statistic: T,
    /// (1 + #{permuted ≥ observed}) / (B + 1)
    pub p_value: f64,
    pub permutations: usize,
    pub exceedances: usize,
    pub level: f64,
    pub decision: Decision,
    pub seed: u64,
}

/// Paired U-statistic on the pooled Gram matrix, X = idx[..m], Y = idx[m..].
fn u_from_gram<T: Real>(g: &[Vec<T>], idx: &[usize], m: usize) -> T {
    let (a, b) = idx.split_at(m);
    let mut s = T::zero();
    for l in 0..m {
        let (al, bl) = (&g[a[l]], &g[b[l]]);
        for j in 0..m {
            if j != l {
                s += al[a[j]] + bl[b[j]] - al[b[j]] - bl[a[j]];
            }
        }
    }
    s / (from_usize::<T>(m) * from_usize::<T>(m - 1))
}

/// Pools X and Y, reassigns the labels uniformly `b` times and compares
/// the observed γ²_u with the permutation distribution.
pub fn permutation_test<T: Real>(
    k: &KernelSpec<T>,
    x: &Sample<T>,
    y: &Sample<T>,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<TestResult<T>> {
    let m = x.len();
    if m < 2 || y.len() != m {
        return invalid(format!(
            "permutation test needs two samples of equal size >= 2, got {} and {}",
            m,
            y.len()
        ));
    }
    if b == 0 {
        return invalid("at least one permutation is required");
    }
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("level must lie in (0, 1), got {level}"));
    }
    let pooled: Vec<&Vec<T>> = x.points.iter().chain(&y.points).collect();
    if pooled.iter().any(|p| p.len() != k.dim) {
        return Err(Error::Domain(format!("sample points must have dimension {}", k.dim)));
    }
    let n = pooled.len();
    let gram: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| k.k(pooled[i], pooled[j])).collect())
        .collect();
    let identity: Vec<usize> = (0..n).collect();
    let observed = u_from_gram(&gram, &identity, m);
    let exceedances = (0..b)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = rng_for(seed, r as u64 + 1);
            let mut idx = identity.clone();
            idx.shuffle(&mut rng);
            u_from_gram(&gram, &idx, m) >= observed
        })
        .count();
    let p_value = (1 + exceedances) as f64 / (b + 1) as f64;
    let decision = if p_value <= level {
        Decision::Reject
    } else {
        Decision::Accept
    };
    Ok(TestResult {
        statistic: observed,
        p_value,
        permutations: b,
        exceedances,
        level,
        decision,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionRate {
    pub rate: f64,
    pub rejections: usize,
    pub repetitions: usize,
    pub p_values: Vec<f64>,
}

/// Repeats the test on fresh draws; repetition r samples X from stream 2r and
/// Y from stream 2r + 1 of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn rejection_rate<T: Real>(
    k: &KernelSpec<T>,
    p: &Measure<T>,
    q: &Measure<T>,
    m: usize,
    b: usize,
    level: f64,
    reps: usize,
    seed: u64,
) -> Result<RejectionRate> {
    if reps == 0 {
        return invalid("at least one repetition is required");
    }
    let p_values = (0..reps)
        .map(|r| {
            let x = p.sample_stream(m, seed, 2 * r as u64)?;
            let y = q.sample_stream(m, seed, 2 * r as u64 + 1)?;
            Ok(permutation_test(k, &x, &y, b, level, seed.wrapping_add(r as u64))?.p_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rejections = p_values.iter().filter(|&&pv| pv <= level).count();
    Ok(RejectionRate {
        rate: rejections as f64 / reps as f64,
        rejections,
        repetitions: reps,
        p_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Measure;
    use crate::mmd::mmd_u_statistic;

    fn gauss(mu: f64) -> Measure<f64> {
        Measure::gaussian(mu, 1.0).unwrap()
    }

    #[test]
    fn statistic_matches_u_statistic() {
        let k = KernelSpec::gaussian(1.0);
        let x = gauss(0.0).sample(40, 1).unwrap();
        let y = gauss(0.5).sample_stream(40, 1, 7).unwrap();
        let t = permutation_test(&k, &x, &y, 19, 0.05, 3).unwrap();
        let u = mmd_u_statistic(&k, &x, &y).unwrap().gamma_sq;
        assert!((t.statistic - u).abs() < 1e-12);
        assert_eq!(t.p_value, (1 + t.exceedances) as f64 / 20.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let k = KernelSpec::laplacian(1.0);
        let x = gauss(0.0).sample(30, 5).unwrap();
        let y = gauss(0.2).sample_stream(30, 5, 1).unwrap();
        let a = permutation_test(&k, &x, &y, 99, 0.05, 11).unwrap();
        let b = permutation_test(&k, &x, &y, 99, 0.05, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let k = KernelSpec::gaussian(1.0);
        let x = gauss(0.0).sample(10, 1).unwrap();
        let y = gauss(0.0).sample(12, 2).unwrap();
        assert!(permutation_test(&k, &x, &y, 10, 0.05, 0).is_err());
        assert!(permutation_test(&k, &x, &x, 0, 0.05, 0).is_err());
        for level in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(permutation_test(&k, &x, &x, 10, level, 0).is_err());
        }
        let one = gauss(0.0).sample(1, 1).unwrap();
        assert!(permutation_test(&k, &one, &one, 10, 0.05, 0).is_err());
    }

    #[test]
    fn p_value_bounds() {
        let k = KernelSpec::gaussian(1.0);
        let x = gauss(0.0).sample(25, 2).unwrap();
        let y = gauss(4.0).sample_stream(25, 2, 1).unwrap();
        let t = permutation_test(&k, &x, &y, 49, 0.05, 1).unwrap();
        assert_eq!(t.p_value, 1.0 / 50.0);
        assert_eq!(t.decision, Decision::Reject);
        let t = permutation_test(&k, &x, &x, 49, 0.05, 1).unwrap();
        assert!(t.p_value > 0.0 && t.p_value <= 1.0);
    }

    #[test]
    fn rejection_rate_counts() {
        let k = KernelSpec::gaussian(1.0);
        let r = rejection_rate(&k, &gauss(0.0), &gauss(5.0), 10, 19, 0.1, 5, 4).unwrap();
        assert_eq!(r.rejections, 5);
        assert_eq!(r.p_values.len(), 5);
        assert!(rejection_rate(&k, &gauss(0.0), &gauss(0.0), 10, 19, 0.1, 0, 4).is_err());
    }
}
