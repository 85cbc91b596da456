//! Force-trace prediction. A unit test mass is dropped at the query point,
//! pushed through the planets' combined field in fixed-length steps, and
//! classified by whichever planets capture it at the end.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::Universe;

/// How a trace settled on its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Capture {
    /// The final position lies inside one or more planets; majority class wins.
    InsidePlanetsMode,
    /// No planet reaches the final position; the nearest planet decides.
    NearestFallback,
    /// The net force vanished before the step budget ran out.
    EquilibriumStop,
}

impl Capture {
    pub fn as_str(self) -> &'static str {
        match self {
            Capture::InsidePlanetsMode => "inside-planets-mode",
            Capture::NearestFallback => "nearest-fallback",
            Capture::EquilibriumStop => "equilibrium-stop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub predicted_class: u32,
    pub final_position: Vec<f64>,
    pub steps_taken: u32,
    pub capture: Capture,
}

impl Universe {
    /// Net pull on a unit mass at `pos`: the sum over all planets of
    /// `mass * (center - pos) / max(D, eps)^2`.
    pub fn net_force(&self, pos: &[f64]) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        self.check_point(pos)?;
        let mut force = vec![0.0; pos.len()];
        self.accumulate_force(pos, &mut force);
        Ok(force)
    }

    fn accumulate_force(&self, pos: &[f64], force: &mut [f64]) {
        let metric = self.config.distance_metric;
        let eps = self.config.epsilon_distance;
        force.fill(0.0);
        for p in &self.planets {
            let dist = metric.eval(&p.position, pos).max(eps);
            let scale = p.mass / (dist * dist);
            for ((f, &c), &x) in force.iter_mut().zip(&p.position).zip(pos) {
                *f += scale * (c - x);
            }
        }
    }

    /// Majority class among the planets with the given ids. Ties go to the
    /// class with the larger summed mass, then to the smaller label.
    fn mode_class(&self, ids: &[u64]) -> u32 {
        let mut tally: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
        for &id in ids {
            let p = &self.planets[id as usize];
            let e = tally.entry(p.class_label).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += p.mass;
        }
        let mut best: Option<(u32, usize, f64)> = None;
        for (label, (count, mass)) in tally {
            let better = match best {
                None => true,
                Some((_, bc, bm)) => count > bc || (count == bc && mass > bm),
            };
            if better {
                best = Some((label, count, mass));
            }
        }
        best.map(|(label, _, _)| label).expect("mode of an empty planet set")
    }

    /// Trace a test mass from `query` and report the class it lands on.
    pub fn predict_sim(&self, query: &[f64]) -> Result<TraceResult> {
        if self.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        self.check_point(query)?;
        let cfg = &self.config;
        let metric = cfg.distance_metric;

        let mut pos = query.to_vec();
        let mut force = vec![0.0; pos.len()];
        let mut steps = 0;
        let mut equilibrium = false;
        for _ in 0..cfg.iteration_count {
            self.accumulate_force(&pos, &mut force);
            let norm = force.iter().map(|f| f * f).sum::<f64>().sqrt();
            if norm <= cfg.epsilon_distance {
                equilibrium = true;
                break;
            }
            let scale = cfg.step_fraction / norm;
            for (x, f) in pos.iter_mut().zip(&force) {
                *x += scale * f;
            }
            steps += 1;
            if cfg.early_stop_on_collision {
                let hits = self.index.reach(&pos, metric);
                if !hits.is_empty() {
                    return Ok(TraceResult {
                        predicted_class: self.mode_class(&hits),
                        final_position: pos,
                        steps_taken: steps,
                        capture: Capture::InsidePlanetsMode,
                    });
                }
            }
        }

        let hits = self.index.reach(&pos, metric);
        let (predicted_class, capture) = if hits.is_empty() {
            let nearest = self.index.nearest(&pos, metric).ok_or(Error::EmptyIndex)?;
            (self.planets[nearest as usize].class_label, Capture::NearestFallback)
        } else {
            (self.mode_class(&hits), Capture::InsidePlanetsMode)
        };
        Ok(TraceResult {
            predicted_class,
            final_position: pos,
            steps_taken: steps,
            capture: if equilibrium { Capture::EquilibriumStop } else { capture },
        })
    }
}
