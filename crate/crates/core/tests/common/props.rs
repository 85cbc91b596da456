//! Property checks driven by a seeded generator. Each check builds one random
//! case and returns a description of the first violation it finds.

use gravclass::{
    kfold, read_universe, split, write_universe, Dataset, HybridSample, Planet, SplitMode, SplitSpec,
    TrainAction, Universe, UniverseConfig,
};

use rand_core::Rng;

use super::{below, point, random_case, rel_close, train, uniform, vec_close, TestRng};

pub type Check = fn(&mut TestRng) -> Result<(), String>;

/// Every property, by name.
pub const ALL: &[(&str, Check)] = &[
    ("mass conservation", mass_conservation),
    ("convex-combination merge", convex_merge),
    ("radius/mass ratio preservation", ratio_preservation),
    ("step length equals alpha", step_length),
    ("translation equivariance", translation_equivariance),
    ("single-class totality", single_class_totality),
    ("prob duplication invariance", duplication_invariance),
    ("prob scores non-positive and monotone", prob_monotone),
    ("split partition and stratification", split_partition),
    ("persistence round-trip", persistence_round_trip),
    ("sim determinism", sim_determinism),
];

/// Run `check` on `cases` consecutive seeds starting at `base`.
pub fn run(check: Check, base: u64, cases: u64) -> Result<(), String> {
    for k in 0..cases {
        let mut rng = super::rng(base.wrapping_add(k));
        check(&mut rng).map_err(|e| format!("case {k}: {e}"))?;
    }
    Ok(())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Planets on a dyadic grid so that integer translations are exact.
fn grid_universe(rng: &mut TestRng, classes: u32) -> Universe {
    let dim = 1 + below(rng, 6) as usize;
    let n = 1 + below(rng, 30) as usize;
    let planets = (0..n)
        .map(|id| Planet {
            id: id as u64,
            class_label: below(rng, classes as u64) as u32,
            mass: (1 + below(rng, 16)) as f64 / 4.0,
            radius: (1 + below(rng, 16)) as f64 / 8.0,
            position: (0..dim).map(|_| (below(rng, 129) as f64 - 64.0) / 8.0).collect(),
        })
        .collect();
    let config = UniverseConfig::new(1.0, uniform(rng, 0.01, 0.5), 1 + below(rng, 30) as u32);
    Universe::from_parts(config, Some(dim), planets).unwrap()
}

fn trained(rng: &mut TestRng) -> Universe {
    let case = random_case(rng, 200);
    train(&case)
}

pub fn mass_conservation(rng: &mut TestRng) -> Result<(), String> {
    let case = random_case(rng, 300);
    let u = train(&case);
    let expected: f64 = case.samples.iter().map(|s| s.mass).sum();
    ensure(rel_close(u.total_mass(), expected, 1e-9), || {
        format!("total mass {} != sample mass {}", u.total_mass(), expected)
    })
}

pub fn convex_merge(rng: &mut TestRng) -> Result<(), String> {
    let case = random_case(rng, 200);
    let mut u = Universe::new(case.config.clone()).unwrap();
    for h in &case.samples {
        let before = u.planets().to_vec();
        let out = u.train_one(h).unwrap();
        if out.action != TrainAction::Merged {
            ensure(out.prior_mass == 0.0, || "created planet with prior mass".into())?;
            continue;
        }
        let old = &before[out.planet_id as usize];
        let new = u.planet(out.planet_id).unwrap();
        ensure(new.class_label == h.class_label, || "merge across classes".into())?;
        ensure(out.prior_mass == old.mass, || "prior mass mismatch".into())?;
        let t = h.mass / new.mass;
        for i in 0..case.dim {
            let (a, b) = (old.position[i], h.position[i]);
            let x = new.position[i];
            let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
            ensure(x >= a.min(b) - tol && x <= a.max(b) + tol, || {
                format!("coordinate {i}: {x} outside [{a}, {b}]")
            })?;
            ensure((x - (a + t * (b - a))).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0), || {
                format!("coordinate {i}: {x} off the segment")
            })?;
        }
    }
    Ok(())
}

pub fn ratio_preservation(rng: &mut TestRng) -> Result<(), String> {
    let case = random_case(rng, 200);
    let mut u = Universe::new(case.config.clone()).unwrap();
    let mut ratio = Vec::new();
    let mut classes = Vec::new();
    for h in &case.samples {
        let count = u.len();
        let out = u.train_one(h).unwrap();
        ensure(u.len() <= count + 1, || "more than one planet per sample".into())?;
        if out.action == TrainAction::Created {
            ratio.push(case.config.initial_radius / h.mass);
            classes.push(h.class_label);
        }
    }
    for p in u.planets() {
        let r = ratio[p.id as usize];
        ensure(rel_close(p.radius / p.mass, r, 1e-12), || {
            format!("planet {} ratio {} drifted from {}", p.id, p.radius / p.mass, r)
        })?;
        ensure(p.class_label == classes[p.id as usize], || format!("planet {} changed class", p.id))?;
    }
    Ok(())
}

pub fn step_length(rng: &mut TestRng) -> Result<(), String> {
    let mut u = trained(rng);
    let d = u.dimension().unwrap();
    let alpha = u.config().step_fraction;
    let query = point(rng, d, 1.5);
    u.config_mut().early_stop_on_collision = false;
    let mut prev = query.clone();
    for k in 1..=6 {
        u.config_mut().iteration_count = k;
        let t = u.predict_sim(&query).unwrap();
        if t.steps_taken < k {
            break;
        }
        let step: f64 = t
            .final_position
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        ensure(rel_close(step, alpha, 1e-9) && (step - alpha).abs() <= 1e-9 * alpha, || {
            format!("step {k} moved {step}, alpha {alpha}")
        })?;
        prev = t.final_position;
    }
    Ok(())
}

pub fn translation_equivariance(rng: &mut TestRng) -> Result<(), String> {
    let u = grid_universe(rng, 4);
    let d = u.dimension().unwrap();
    let shift: Vec<f64> = (0..d).map(|_| below(rng, 201) as f64 - 100.0).collect();
    let moved: Vec<Planet> = u
        .planets()
        .iter()
        .map(|p| Planet {
            position: p.position.iter().zip(&shift).map(|(x, s)| x + s).collect(),
            ..p.clone()
        })
        .collect();
    let v = Universe::from_parts(u.config().clone(), Some(d), moved).unwrap();
    let query: Vec<f64> = (0..d).map(|_| (below(rng, 161) as f64 - 80.0) / 8.0 + 1.0 / 16.0).collect();
    let shifted: Vec<f64> = query.iter().zip(&shift).map(|(x, s)| x + s).collect();

    let (a, b) = (u.predict_sim(&query).unwrap(), v.predict_sim(&shifted).unwrap());
    ensure(a.predicted_class == b.predicted_class, || "sim class changed under translation".into())?;
    let back: Vec<f64> = b.final_position.iter().zip(&shift).map(|(x, s)| x - s).collect();
    ensure(
        back.iter().zip(&a.final_position).all(|(x, y)| (x - y).abs() <= 1e-9 * 128.0),
        || format!("trajectory end {:?} vs {:?}", back, a.final_position),
    )?;
    ensure(
        u.predict_prob(&query).unwrap() == v.predict_prob(&shifted).unwrap(),
        || "prob class changed under translation".into(),
    )
}

pub fn single_class_totality(rng: &mut TestRng) -> Result<(), String> {
    let mut case = random_case(rng, 150);
    let class = below(rng, 10) as u32;
    for s in &mut case.samples {
        s.class_label = class;
    }
    let u = train(&case);
    for _ in 0..5 {
        let q = point(rng, case.dim, 3.0);
        ensure(u.predict_sim(&q).unwrap().predicted_class == class, || "sim left the only class".into())?;
        ensure(u.predict_prob(&q).unwrap() == class, || "prob left the only class".into())?;
    }
    Ok(())
}

pub fn duplication_invariance(rng: &mut TestRng) -> Result<(), String> {
    let u = trained(rng);
    let d = u.dimension().unwrap();
    let classes = u.class_labels();
    let target = classes[below(rng, classes.len() as u64) as usize];
    let mut planets = u.planets().to_vec();
    let copies: Vec<Planet> = u.planets().iter().filter(|p| p.class_label == target).cloned().collect();
    for mut p in copies {
        p.id = planets.len() as u64;
        planets.push(p);
    }
    let v = Universe::from_parts(u.config().clone(), Some(d), planets).unwrap();
    for _ in 0..5 {
        let q = point(rng, d, 1.5);
        let score = |w: &Universe| {
            w.class_scores(&q)
                .unwrap()
                .into_iter()
                .find(|s| s.class_label == target)
                .unwrap()
                .score
        };
        let (a, b) = (score(&u), score(&v));
        ensure(rel_close(a, b, 1e-9), || format!("class {target} score {a} became {b}"))?;
        let (pa, pb) = (u.class_scores(&q).unwrap(), v.class_scores(&q).unwrap());
        // Only compare winners when the margin clears rounding noise.
        let margin = if pa.len() > 1 { pa[0].score - pa[1].score } else { f64::INFINITY };
        if margin > 1e-9 * pa[0].score.abs().max(1.0) {
            ensure(pa[0].class_label == pb[0].class_label, || "prediction changed after duplication".into())?;
        }
    }
    Ok(())
}

pub fn prob_monotone(rng: &mut TestRng) -> Result<(), String> {
    let u = grid_universe(rng, 3);
    let d = u.dimension().unwrap();
    let q = point(rng, d, 8.0);
    for s in u.class_scores(&q).unwrap() {
        ensure(s.score <= 0.0 && s.score.is_finite(), || format!("score {} for class {}", s.score, s.class_label))?;
    }
    // Push one planet further from the query along the query->planet ray.
    let k = below(rng, u.len() as u64) as usize;
    let p = &u.planets()[k];
    let mut planets = u.planets().to_vec();
    let scale = 1.0 + uniform(rng, 0.0, 3.0);
    planets[k].position = q.iter().zip(&p.position).map(|(a, b)| a + scale * (b - a)).collect();
    let v = Universe::from_parts(u.config().clone(), Some(d), planets).unwrap();
    let score = |w: &Universe| {
        w.class_scores(&q)
            .unwrap()
            .into_iter()
            .find(|s| s.class_label == p.class_label)
            .unwrap()
            .score
    };
    let (before, after) = (score(&u), score(&v));
    ensure(after <= before + 1e-12 * before.abs(), || {
        format!("moving planet {k} away raised its class score {before} -> {after}")
    })
}

pub fn split_partition(rng: &mut TestRng) -> Result<(), String> {
    let classes = 1 + below(rng, 5) as u32;
    let n = 10 + below(rng, 200) as usize;
    let samples = (0..n)
        .map(|i| HybridSample::unit(vec![i as f64], below(rng, classes as u64) as u32))
        .collect();
    let ds = Dataset::from_samples("synthetic", samples).unwrap();
    let seed = rng.next_u64();
    let fraction = uniform(rng, 0.05, 0.95);

    let check_partition = |train: &Dataset, test: &Dataset| -> Result<(), String> {
        let mut rows: Vec<usize> = train.source_rows.iter().chain(&test.source_rows).copied().collect();
        rows.sort_unstable();
        ensure(rows == (0..n).collect::<Vec<_>>(), || "split is not a partition".into())
    };

    match split(&ds, &SplitSpec::new(SplitMode::Fraction(fraction), seed)) {
        Ok((train, test)) => {
            check_partition(&train, &test)?;
            for &c in &ds.class_labels {
                let n_c = ds.samples.iter().filter(|s| s.class_label == c).count();
                let t_c = test.samples.iter().filter(|s| s.class_label == c).count();
                let ideal = n_c as f64 * fraction;
                ensure((t_c as f64 - ideal).abs() <= 1.0, || {
                    format!("class {c}: {t_c} of {n_c} in test, fraction {fraction}")
                })?;
            }
        }
        // Tiny classes can floor to an empty test set; that is the only
        // acceptable failure.
        Err(e) => ensure(e.to_string().contains("empty"), || format!("unexpected split error {e}"))?,
    }

    if let Ok((train, test)) = split(&ds, &SplitSpec::new(SplitMode::OnePerClass, seed)) {
        check_partition(&train, &test)?;
        ensure(train.len() == ds.class_labels.len(), || "one-per-class train size".into())?;
    }
    let k = 2 + below(rng, 5) as usize;
    let folds = kfold(&ds, k, seed).map_err(|e| e.to_string())?;
    let mut seen = vec![0; n];
    for (train, test) in &folds {
        check_partition(train, test)?;
        for &r in &test.source_rows {
            seen[r] += 1;
        }
    }
    ensure(seen.iter().all(|&c| c == 1), || "k-fold test sets overlap or miss rows".into())
}

pub fn persistence_round_trip(rng: &mut TestRng) -> Result<(), String> {
    let mut case = random_case(rng, 150);
    case.config.early_stop_on_collision = false;
    let u = train(&case);
    let mut buf = Vec::new();
    write_universe(&u, &mut buf).map_err(|e| e.to_string())?;
    let v = read_universe(buf.as_slice()).map_err(|e| e.to_string())?;
    ensure(u == v, || "universe changed across save/load".into())?;
    for _ in 0..5 {
        let q = point(rng, case.dim, 1.5);
        ensure(u.predict_sim(&q).unwrap() == v.predict_sim(&q).unwrap(), || "sim changed after load".into())?;
        ensure(u.class_scores(&q).unwrap() == v.class_scores(&q).unwrap(), || "prob changed after load".into())?;
    }
    Ok(())
}

pub fn sim_determinism(rng: &mut TestRng) -> Result<(), String> {
    let u = trained(rng);
    let q = point(rng, u.dimension().unwrap(), 1.5);
    let a = u.predict_sim(&q).unwrap();
    let b = u.clone().predict_sim(&q).unwrap();
    ensure(a == b && vec_close(&a.final_position, &b.final_position, 0.0), || "trace not deterministic".into())?;
    ensure(a.steps_taken <= u.config().iteration_count, || "too many steps".into())
}

