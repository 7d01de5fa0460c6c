use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{GraspConfiguration, CONFIG_DIM};

/// The preferred configuration region of one grasp type: an axis-aligned
/// ellipsoid in the 14-D configuration space (object frame), expressed as a
/// center and per-dimension radii.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TypeTarget {
    pub type_name: String,
    pub mean: Vec<f64>,
    pub radii: Vec<f64>,
}

impl TypeTarget {
    pub fn validate(&self) -> Result<(), String> {
        if self.mean.len() != CONFIG_DIM || self.radii.len() != CONFIG_DIM {
            return Err(format!("target for {:?} must be {CONFIG_DIM}-D", self.type_name));
        }
        if self.radii.iter().any(|r| *r <= 0.0) {
            return Err(format!("target radii for {:?} must be positive", self.type_name));
        }
        Ok(())
    }
}

/// The parametric success oracle standing in for physical grasp execution.
///
/// A grasp of type `g` succeeds with probability `sigma(beta * (1 - d))`
/// where `d` is the radius-weighted Euclidean distance from the target
/// region center; `beta = inf` makes labels deterministic (`d < 1`, with a
/// fair coin exactly on the boundary). The three orientation coordinates use
/// wrapped angular differences so targets near +/-pi behave.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OracleSpec {
    pub targets: Vec<TypeTarget>,
    /// Logistic temperature beta; infinity gives deterministic labels.
    pub temperature: f64,
}

impl OracleSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.targets.is_empty() {
            return Err("oracle needs at least one target".into());
        }
        for t in &self.targets {
            t.validate()?;
        }
        Ok(())
    }

    pub fn target_for(&self, type_name: &str) -> Option<&TypeTarget> {
        self.targets.iter().find(|t| t.type_name == type_name)
    }

    /// Radius-weighted distance of a configuration from a type's target.
    pub fn weighted_distance(&self, config: &GraspConfiguration, type_name: &str) -> Option<f64> {
        let target = self.target_for(type_name)?;
        let theta = config.to_vector();
        let mut sum = 0.0;
        for i in 0..CONFIG_DIM {
            let raw = theta[i] - target.mean[i];
            // Orientation dims wrap at +/-pi.
            let diff = if (3..6).contains(&i) {
                raw.sin().atan2(raw.cos())
            } else {
                raw
            };
            let scaled = diff / target.radii[i];
            sum += scaled * scaled;
        }
        Some(sum.sqrt())
    }

    /// Success probability of executing `config` as `type_name`.
    pub fn success_probability(&self, config: &GraspConfiguration, type_name: &str) -> Option<f64> {
        let d = self.weighted_distance(config, type_name)?;
        Some(if self.temperature.is_infinite() {
            match d.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => 1.0,
                Some(std::cmp::Ordering::Equal) => 0.5,
                _ => 0.0,
            }
        } else {
            let z = self.temperature * (1.0 - d);
            if z >= 0.0 {
                1.0 / (1.0 + (-z).exp())
            } else {
                let e = z.exp();
                e / (1.0 + e)
            }
        })
    }

    /// Sample a success/failure label.
    pub fn label(
        &self,
        config: &GraspConfiguration,
        type_name: &str,
        rng: &mut impl Rng,
    ) -> Option<bool> {
        let p = self.success_probability(config, type_name)?;
        Some(rng.random_range(0.0..1.0) < p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn oracle(temperature: f64) -> OracleSpec {
        OracleSpec {
            targets: vec![TypeTarget {
                type_name: "power".into(),
                mean: vec![0.0; CONFIG_DIM],
                radii: vec![1.0; CONFIG_DIM],
            }],
            temperature,
        }
    }

    #[test]
    fn target_mean_always_succeeds_at_infinite_temperature() {
        let oracle = oracle(f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let label = oracle
            .label(&GraspConfiguration::zeros(), "power", &mut rng)
            .unwrap();
        assert!(label);
    }

    #[test]
    fn boundary_distance_is_fifty_fifty() {
        let oracle = oracle(4.0);
        let mut config = GraspConfiguration::zeros();
        config.palm_position.x = 1.0; // d = 1 exactly
        let p = oracle.success_probability(&config, "power").unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empirical_rate_matches_probability() {
        let oracle = oracle(3.0);
        let mut config = GraspConfiguration::zeros();
        config.palm_position.x = 0.6;
        let expected = oracle.success_probability(&config, "power").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hits = (0..10_000)
            .filter(|_| oracle.label(&config, "power", &mut rng).unwrap())
            .count();
        let rate = hits as f64 / 10_000.0;
        assert!(
            (rate - expected).abs() <= 0.02,
            "rate {rate} vs expected {expected}"
        );
    }

    #[test]
    fn orientation_distance_wraps() {
        let mut target = TypeTarget {
            type_name: "power".into(),
            mean: vec![0.0; CONFIG_DIM],
            radii: vec![1.0; CONFIG_DIM],
        };
        target.mean[5] = std::f64::consts::PI - 0.05;
        let oracle = OracleSpec {
            targets: vec![target],
            temperature: f64::INFINITY,
        };
        let mut config = GraspConfiguration::zeros();
        config.palm_orientation.z = -std::f64::consts::PI + 0.05;
        // Unwrapped difference would be ~2 pi; wrapped it is 0.1.
        let d = oracle.weighted_distance(&config, "power").unwrap();
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_type_yields_none() {
        let oracle = oracle(1.0);
        assert!(oracle
            .success_probability(&GraspConfiguration::zeros(), "pinch")
            .is_none());
    }
}
