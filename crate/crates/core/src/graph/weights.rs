use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;

pub const WEIGHT_MIN: f64 = 20.0;
pub const WEIGHT_MAX: f64 = 100.0;

/// Exponent of the decaying density `x^-a` used by [`WeightDistribution::PowerLaw`].
pub const POWER_LAW_EXPONENT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDistribution {
    /// Integers drawn uniformly from `[20, 100]`.
    Uniform,
    /// Reals with density proportional to `x^-0.5`, truncated to `[20, 100]`.
    #[serde(rename = "power")]
    PowerLaw,
}

impl WeightDistribution {
    pub const ALL: [WeightDistribution; 2] =
        [WeightDistribution::Uniform, WeightDistribution::PowerLaw];

    pub fn name(self) -> &'static str {
        match self {
            WeightDistribution::Uniform => "uniform",
            WeightDistribution::PowerLaw => "power",
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            WeightDistribution::Uniform => {
                rng.gen_range(WEIGHT_MIN as u32..=WEIGHT_MAX as u32) as f64
            }
            WeightDistribution::PowerLaw => {
                power_law_quantile(rng.gen::<f64>()).clamp(WEIGHT_MIN, WEIGHT_MAX)
            }
        }
    }
}

/// Inverse CDF of the truncated density `∝ x^-a` on `[WEIGHT_MIN, WEIGHT_MAX]`.
fn power_law_quantile(u: f64) -> f64 {
    let e = 1.0 - POWER_LAW_EXPONENT;
    let lo = WEIGHT_MIN.powf(e);
    let hi = WEIGHT_MAX.powf(e);
    (lo + u * (hi - lo)).powf(1.0 / e)
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(WeightDistribution::Uniform),
            "power" | "powerlaw" | "power-law" => Ok(WeightDistribution::PowerLaw),
            other => Err(format!("unknown weight distribution `{other}`")),
        }
    }
}

/// Replaces every vertex weight with a fresh sample, in vertex-ID order.
pub fn assign_weights(graph: &Graph, dist: WeightDistribution, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..graph.order()).map(|_| dist.sample(&mut rng)).collect();
    graph
        .reweighted(weights)
        .expect("sampled weights are positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean of the truncated density by composite Simpson quadrature.
    fn power_law_mean_by_quadrature() -> f64 {
        let steps = 20_000;
        let h = (WEIGHT_MAX - WEIGHT_MIN) / steps as f64;
        let (mut mass, mut moment) = (0.0, 0.0);
        for i in 0..=steps {
            let x = WEIGHT_MIN + i as f64 * h;
            let c = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let density = x.powf(-POWER_LAW_EXPONENT);
            mass += c * density;
            moment += c * x * density;
        }
        moment / mass
    }

    #[test]
    fn quadrature_mean_matches_closed_form() {
        // (1/3)(100^1.5 - 20^1.5) / (100^0.5 - 20^0.5)
        let closed = (1000.0 - 20f64.powf(1.5)) / 3.0 / (10.0 - 20f64.sqrt());
        assert!((power_law_mean_by_quadrature() - closed).abs() < 1e-9);
        assert!((closed - 54.907).abs() < 1e-3);
    }

    #[test]
    fn power_law_empirical_mean() {
        let expected = power_law_mean_by_quadrature();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| WeightDistribution::PowerLaw.sample(&mut rng))
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean - expected).abs() / expected < 0.02,
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn quantile_endpoints() {
        assert!((power_law_quantile(0.0) - WEIGHT_MIN).abs() < 1e-9);
        assert!((power_law_quantile(1.0) - WEIGHT_MAX).abs() < 1e-9);
    }

    #[test]
    fn weights_in_range_and_reproducible() {
        let g = Graph::empty(10);
        for dist in WeightDistribution::ALL {
            let a = assign_weights(&g, dist, 1);
            let b = assign_weights(&g, dist, 1);
            assert_eq!(a, b);
            assert_eq!(a.weights().len(), 10);
            assert!(a
                .weights()
                .iter()
                .all(|w| (WEIGHT_MIN..=WEIGHT_MAX).contains(w)));
        }
        let uniform = assign_weights(&g, WeightDistribution::Uniform, 1);
        assert!(uniform.weights().iter().all(|w| w.fract() == 0.0));
    }

    #[test]
    fn k2_weights_in_range() {
        let k2 = Graph::from_edges(2, [(1, 2)]).unwrap();
        for seed in 0..50 {
            let g = assign_weights(&k2, WeightDistribution::Uniform, seed);
            assert!(g.weights().iter().all(|w| (20.0..=100.0).contains(w)));
            assert_eq!(g.edge_count(), 1);
        }
    }

    #[test]
    fn uniform_hits_both_endpoints() {
        let g = assign_weights(&Graph::empty(5000), WeightDistribution::Uniform, 4);
        assert!(g.weights().contains(&20.0));
        assert!(g.weights().contains(&100.0));
    }
}
