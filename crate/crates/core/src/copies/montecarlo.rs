use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Law of the i.i.d. variables `f_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Gaussian,
    Exponential,
    TwoPoint,
}

impl std::str::FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Distribution> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "exponential" => Ok(Distribution::Exponential),
            "two-point" => Ok(Distribution::TwoPoint),
            _ => Err(Error::Parse(format!("unknown distribution {s:?}"))),
        }
    }
}

impl Distribution {
    fn sample<R: Rng>(self, r: &mut R) -> f64 {
        match self {
            Distribution::Gaussian => r.sample(StandardNormal),
            Distribution::Exponential => r.sample(Exp1),
            Distribution::TwoPoint => {
                if r.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `E|f|^r`.
    pub fn abs_moment(self, r: f64) -> f64 {
        match self {
            Distribution::Gaussian => gaussian_abs_moment(r),
            Distribution::Exponential => libm::tgamma(r + 1.0),
            Distribution::TwoPoint => 1.0,
        }
    }
}

/// `E|g|^r = 2^{r/2} Γ((r+1)/2) / √π` for a standard Gaussian.
pub fn gaussian_abs_moment(r: f64) -> f64 {
    2f64.powf(r / 2.0) * libm::tgamma((r + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub distribution: Distribution,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    /// `(E (Σ|f_k|^q)^{p/q})^{1/p}`, estimated
    pub lhs: f64,
    /// `(Σ‖f_k‖_p^p)^{1/p} + (Σ‖f_k‖_q^q)^{1/q}`, from exact moments
    pub rhs: f64,
    pub ratio: f64,
    /// 95% percentile bootstrap interval for `ratio`
    pub ci: (f64, f64),
    pub seed: u64,
}

const SHARD: usize = 10_000;
const RESAMPLES: usize = 1000;

/// Percentile bootstrap interval of `stat` over `values`.
pub fn bootstrap_ci(values: &[f64], resamples: usize, seed: u64, stat: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut r = rng::stream(seed, "bootstrap");
    let n = values.len();
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let mean = (0..n).map(|_| *values.choose(&mut r).unwrap()).sum::<f64>() / n as f64;
            stat(mean)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let at = |q: f64| stats[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (at(0.025), at(0.975))
}

/// Monte Carlo check of the classical two-term Rosenthal bound for `n` i.i.d. variables.
/// Samples are drawn in shards of 10⁴ with their own seeds.
pub fn rosenthal_classical_mc(dist: Distribution, n: usize, p: f64, q: f64, samples: usize, seed: u64) -> Result<McReport> {
    if !(1.0 <= q && q <= p && p.is_finite()) {
        return Err(Error::Exponent(format!("need 1 ≤ q ≤ p < ∞, got p = {p}, q = {q}")));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    if samples < 10_000 {
        return Err(Error::Invalid(format!("{samples} samples; at least 10⁴ are required")));
    }
    let mut values = Vec::with_capacity(samples);
    for shard in 0..samples.div_ceil(SHARD) {
        let mut r = rng::stream(rng::child_seed(seed, "rosenthal_mc", shard as u64), "shard");
        let count = SHARD.min(samples - shard * SHARD);
        for _ in 0..count {
            let s: f64 = (0..n).map(|_| dist.sample(&mut r).abs().powf(q)).sum();
            values.push(s.powf(p / q));
        }
    }
    let nf = n as f64;
    let rhs = (nf * dist.abs_moment(p)).powf(1.0 / p) + (nf * dist.abs_moment(q)).powf(1.0 / q);
    let mean = values.iter().sum::<f64>() / samples as f64;
    let lhs = mean.powf(1.0 / p);
    let ci = bootstrap_ci(&values, RESAMPLES, seed, |m| m.powf(1.0 / p) / rhs);
    Ok(McReport { distribution: dist, n, p, q, samples, lhs, rhs, ratio: lhs / rhs, ci, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert!((gaussian_abs_moment(1.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-14);
        assert!((gaussian_abs_moment(4.0) - 3.0).abs() < 1e-13);
        assert!((Distribution::Exponential.abs_moment(3.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn single_variable_and_equal_exponents() {
        for dist in [Distribution::Gaussian, Distribution::Exponential, Distribution::TwoPoint] {
            let r = rosenthal_classical_mc(dist, 1, 2.0, 1.0, 20_000, 4).unwrap();
            assert!(r.ratio >= 0.5 - 0.02 && r.ratio <= 1.0 + 0.02, "{r:?}");
            let r = rosenthal_classical_mc(dist, 5, 1.5, 1.5, 20_000, 4).unwrap();
            assert!((r.ratio - 0.5).abs() < 0.02, "{r:?}");
        }
    }

    #[test]
    fn gaussian_second_moment_and_determinism() {
        let n = 8;
        let r = rosenthal_classical_mc(Distribution::Gaussian, n, 2.0, 1.0, 50_000, 11).unwrap();
        let nf = n as f64;
        let exact = (nf + nf * (nf - 1.0) * 2.0 / std::f64::consts::PI).sqrt();
        assert!((r.lhs / exact - 1.0).abs() < 0.01);
        assert!(r.ci.0 <= r.ratio && r.ratio <= r.ci.1);
        let again = rosenthal_classical_mc(Distribution::Gaussian, n, 2.0, 1.0, 50_000, 11).unwrap();
        assert_eq!(r, again);
        assert!(rosenthal_classical_mc(Distribution::Gaussian, n, 1.0, 2.0, 50_000, 11).is_err());
        assert!(rosenthal_classical_mc(Distribution::Gaussian, n, 2.0, 1.0, 100, 11).is_err());
    }
}
