//! One randomized comparison of the indexed implementation against the
//! linear-scan references in the parent module.

use gravclass::{Metric, Planet, Universe};

use super::{
    below, point, random_case, ref_nearest, ref_planets, ref_prob_argmax, ref_prob_naive, ref_reach, ref_readout, ref_sim,
    ref_train, rel_close, uniform, vec_close, TestRng,
};

const TOL: f64 = 1e-9;
const QUERIES: usize = 4;

/// Returns the planet count on success so callers can report coverage.
pub fn check(rng: &mut TestRng) -> Result<usize, String> {
    let case = random_case(rng, 500);
    let mut u = Universe::new(case.config.clone()).unwrap();
    u.train_batch(&case.samples).unwrap();

    let expected = ref_train(&case.config, &case.samples);
    let got = ref_planets(&u);
    if got.len() != expected.len() {
        return Err(format!("trainer built {} planets, reference {}", got.len(), expected.len()));
    }
    for (g, e) in got.iter().zip(&expected) {
        let same = g.id == e.id
            && g.class == e.class
            && rel_close(g.mass, e.mass, TOL)
            && rel_close(g.radius, e.radius, TOL)
            && vec_close(&g.pos, &e.pos, TOL);
        if !same {
            return Err(format!("planet mismatch: {g:?} vs {e:?}"));
        }
    }

    for _ in 0..QUERIES {
        let q = point(rng, case.dim, 1.5);
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            let reach = u.index().planets_in_reach(&q, metric).unwrap();
            if reach != ref_reach(&got, &q, metric) {
                return Err(format!("reach set differs under {metric}"));
            }
            let nearest = u.index().nearest_planet(&q, metric).unwrap();
            if nearest != ref_nearest(&got, &q, metric) {
                return Err(format!("nearest differs under {metric}"));
            }
        }

        // Trajectories are compared to tolerance. The class is compared
        // exactly against the reference readout at the same final position,
        // since a 1e-16 drift can cross a nearest-planet tie.
        let t = u.predict_sim(&q).unwrap();
        let r = ref_sim(&got, &case.config, &q);
        if t.steps_taken != r.steps || !vec_close(&t.final_position, &r.pos, TOL) {
            return Err(format!("sim trajectory differs: steps {} vs {}", t.steps_taken, r.steps));
        }
        let class = ref_readout(&got, &t.final_position, case.config.distance_metric);
        if t.predicted_class != class {
            return Err(format!("sim class {} vs reference {class}", t.predicted_class));
        }
    }

    check_prob(rng, &u)?;
    Ok(u.len())
}

/// The product form underflows for the tiny radii training produces, so the
/// prob comparison runs on a copy of the planets with radii large enough that
/// every class product stays above `exp(-600)`.
fn check_prob(rng: &mut TestRng, u: &Universe) -> Result<(), String> {
    let d = u.dimension().unwrap();
    let metric = u.config().distance_metric;
    let reach = match metric {
        Metric::Euclidean => 2.5 * (d as f64).sqrt(),
        Metric::Manhattan => 2.5 * d as f64,
    };
    let n = u.len() as f64;
    let planets: Vec<Planet> = u
        .planets()
        .iter()
        .map(|p| {
            let floor = (reach * reach * n / (1200.0 * p.mass)).powf(0.25);
            Planet {
                radius: floor * uniform(rng, 1.0, 2.0),
                ..p.clone()
            }
        })
        .collect();
    let v = Universe::from_parts(u.config().clone(), Some(d), planets).unwrap();
    let planets = ref_planets(&v);

    for _ in 0..QUERIES {
        let q = if below(rng, 4) == 0 {
            planets[below(rng, planets.len() as u64) as usize].pos.clone()
        } else {
            point(rng, d, 1.5)
        };
        let naive = ref_prob_naive(&planets, v.config(), &q);
        let scores = v.class_scores(&q).unwrap();
        for (class, score) in &naive {
            let got = scores.iter().find(|s| s.class_label == *class).unwrap().score;
            if (got - score).abs() > TOL * score.abs().max(1.0) {
                return Err(format!("class {class} score {got} vs naive {score}"));
            }
        }
        let mut sorted = naive.clone();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
        let clear = sorted.len() < 2 || sorted[0].1 - sorted[1].1 > 1e-9 * sorted[0].1.abs().max(1.0);
        if clear && v.predict_prob(&q).unwrap() != ref_prob_argmax(&naive) {
            return Err("prob prediction differs from naive argmax".into());
        }
    }
    Ok(())
}
