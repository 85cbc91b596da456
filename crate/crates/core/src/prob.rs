//! Non-simulating prediction. Each planet is treated as a Gaussian centered
//! on its position with spread `sigma(radius)`; a class scores the mean of its
//! planets' mass-weighted log-density exponents and the best score wins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::Universe;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class_label: u32,
    /// Log-domain score; never positive.
    pub score: f64,
    pub planet_count: usize,
}

impl Universe {
    /// One score per class present, best first. Equal scores are ordered by
    /// ascending label.
    ///
    /// A class's score is `sum(-D^2 / max(mass * 2 * sigma^2, eps)) / n` over
    /// its `n` planets, i.e. the log of the product of unnormalized Gaussian
    /// densities divided by the class planet count.
    pub fn class_scores(&self, query: &[f64]) -> Result<Vec<ClassScore>> {
        if self.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        self.check_point(query)?;
        let cfg = &self.config;

        let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for p in &self.planets {
            let dist = cfg.distance_metric.eval(&p.position, query);
            let sigma = cfg.sigma.apply(p.radius);
            let denom = (p.mass * 2.0 * sigma * sigma).max(cfg.epsilon_distance);
            let e = sums.entry(p.class_label).or_insert((0.0, 0));
            e.0 -= dist * dist / denom;
            e.1 += 1;
        }

        let mut scores: Vec<ClassScore> = sums
            .into_iter()
            .map(|(class_label, (sum, n))| ClassScore {
                class_label,
                score: sum / n as f64,
                planet_count: n,
            })
            .collect();
        // Stable sort keeps ascending labels among equal scores.
        scores.sort_by(|a, b| b.score.total_cmp(&a.score));
        Ok(scores)
    }

    pub fn predict_prob(&self, query: &[f64]) -> Result<u32> {
        Ok(self.class_scores(query)?[0].class_label)
    }
}
