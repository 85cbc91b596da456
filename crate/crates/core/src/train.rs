//! Online training: every weighted sample either founds a new planet or is
//! absorbed by the same-class planet that pulls on it hardest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::{HybridSample, Planet, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainAction {
    Created,
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub action: TrainAction,
    pub planet_id: u64,
    /// Mass of the planet before the sample landed; zero for new planets.
    pub prior_mass: f64,
}

impl Universe {
    /// Absorb one sample. The first sample fixes the universe dimension.
    pub fn train_one(&mut self, sample: &HybridSample) -> Result<TrainOutcome> {
        sample.validate()?;
        if sample.position.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension.unwrap_or(1),
                found: 0,
            });
        }
        self.check_point(&sample.position)?;

        let metric = self.config.distance_metric;
        let mut target: Option<(u64, f64)> = None;
        for id in self.index.reach(&sample.position, metric) {
            let p = &self.planets[id as usize];
            if p.class_label != sample.class_label {
                continue;
            }
            // The sample's own mass is common to every candidate and is left out.
            let dist = metric.eval(&p.position, &sample.position);
            let force = if dist == 0.0 {
                f64::INFINITY
            } else {
                p.mass / (dist * dist)
            };
            // Candidates arrive in ascending id order, so ties keep the smaller id.
            if target.is_none_or(|(_, best)| force > best) {
                target = Some((id, force));
            }
        }

        match target {
            None => {
                let id = self.planets.len() as u64;
                let planet = Planet {
                    id,
                    class_label: sample.class_label,
                    mass: sample.mass,
                    radius: self.config.initial_radius,
                    position: sample.position.clone(),
                };
                self.index.insert(&planet)?;
                self.planets.push(planet);
                self.dimension = Some(sample.position.len());
                Ok(TrainOutcome {
                    action: TrainAction::Created,
                    planet_id: id,
                    prior_mass: 0.0,
                })
            }
            Some((id, _)) => {
                let p = &mut self.planets[id as usize];
                let prior_mass = p.mass;
                let mass = p.mass + sample.mass;
                p.radius = mass * (p.radius / p.mass);
                let (w_old, w_new) = (prior_mass / mass, sample.mass / mass);
                for (x, &h) in p.position.iter_mut().zip(&sample.position) {
                    *x = w_old * *x + w_new * h;
                }
                p.mass = mass;
                self.index.update_planet(p)?;
                Ok(TrainOutcome {
                    action: TrainAction::Merged,
                    planet_id: id,
                    prior_mass,
                })
            }
        }
    }

    /// Train on `samples` in order. Stops at the first invalid sample; the
    /// samples before it stay trained.
    pub fn train_batch<'a, I>(&mut self, samples: I) -> Result<Vec<TrainOutcome>>
    where
        I: IntoIterator<Item = &'a HybridSample>,
    {
        samples
            .into_iter()
            .enumerate()
            .map(|(index, s)| {
                self.train_one(s).map_err(|e| Error::Sample {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }
}
