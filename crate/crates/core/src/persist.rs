//! Line-oriented universe files.
//!
//! ```text
//! gravclass-universe v1
//! r_init=50.0 alpha=0.01 beta=100 metric=euclidean eps=1e-9
//! dim=2 planets=1
//! id=0 class=3 mass=2.0 radius=100.0 pos=1.5,-0.25
//! ```
//!
//! Floats use Rust's shortest round-trip representation, so a load after a
//! save reproduces every field bit for bit. Prediction-only settings
//! (early stop on collision, sigma function) are not stored and come back as
//! their defaults.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::universe::{Planet, Universe, UniverseConfig};

const MAGIC: &str = "gravclass-universe";
const VERSION: &str = "v1";

pub fn write_universe<W: Write>(u: &Universe, mut out: W) -> Result<()> {
    let c = u.config();
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(
        out,
        "r_init={:?} alpha={:?} beta={} metric={} eps={:?}",
        c.initial_radius, c.step_fraction, c.iteration_count, c.distance_metric, c.epsilon_distance
    )?;
    writeln!(out, "dim={} planets={}", u.dimension().unwrap_or(0), u.len())?;
    for p in u.planets() {
        write!(
            out,
            "id={} class={} mass={:?} radius={:?} pos=",
            p.id, p.class_label, p.mass, p.radius
        )?;
        for (i, x) in p.position.iter().enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{x:?}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_universe(u: &Universe, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_universe(u, BufWriter::new(file))
}

pub fn load_universe(path: impl AsRef<Path>) -> Result<Universe> {
    let file = fs::File::open(path)?;
    read_universe(BufReader::new(file))
}

fn corrupt(line: usize, message: impl Into<String>) -> Error {
    Error::Corrupt {
        line,
        message: message.into(),
    }
}

/// Split `key=value` tokens, requiring exactly `keys` in order.
fn fields<'a>(line: &'a str, lineno: usize, keys: &[&str]) -> Result<Vec<&'a str>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != keys.len() {
        return Err(corrupt(
            lineno,
            format!("expected {} fields, found {}", keys.len(), tokens.len()),
        ));
    }
    tokens
        .iter()
        .zip(keys)
        .map(|(tok, key)| match tok.split_once('=') {
            Some((k, v)) if k == *key => Ok(v),
            _ => Err(corrupt(lineno, format!("expected `{key}=...`, found `{tok}`"))),
        })
        .collect()
}

fn num<T: std::str::FromStr>(value: &str, lineno: usize, what: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| corrupt(lineno, format!("bad {what} `{value}`")))
}

pub fn read_universe<R: BufRead>(input: R) -> Result<Universe> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, line)) => Ok((n, line?)),
            None => Err(corrupt(0, format!("file ends before {what}"))),
        }
    };

    let (n, header) = next("header")?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| corrupt(n, "not a universe file"))?;
    if version.trim() != VERSION {
        return Err(Error::Version(version.trim().to_string()));
    }

    let (n, line) = next("config line")?;
    let f = fields(&line, n, &["r_init", "alpha", "beta", "metric", "eps"])?;
    let config = UniverseConfig {
        initial_radius: num(f[0], n, "r_init")?,
        step_fraction: num(f[1], n, "alpha")?,
        iteration_count: num(f[2], n, "beta")?,
        distance_metric: f[3].parse().map_err(|_| corrupt(n, format!("bad metric `{}`", f[3])))?,
        epsilon_distance: num(f[4], n, "eps")?,
        ..Default::default()
    };

    let (n, line) = next("dimension line")?;
    let f = fields(&line, n, &["dim", "planets"])?;
    let dim: usize = num(f[0], n, "dim")?;
    let count: usize = num(f[1], n, "planet count")?;

    let mut planets = Vec::with_capacity(count.min(1 << 20));
    for k in 0..count {
        let (n, line) = next(&format!("planet {k} of {count}"))?;
        let f = fields(&line, n, &["id", "class", "mass", "radius", "pos"])?;
        let position = f[4]
            .split(',')
            .map(|x| num::<f64>(x, n, "coordinate"))
            .collect::<Result<Vec<f64>>>()?;
        if position.len() != dim {
            return Err(corrupt(n, format!("expected {dim} coordinates, found {}", position.len())));
        }
        planets.push(Planet {
            id: num(f[0], n, "id")?,
            class_label: num(f[1], n, "class")?,
            mass: num(f[2], n, "mass")?,
            radius: num(f[3], n, "radius")?,
            position,
        });
    }
    for (n, line) in lines {
        if !line?.trim().is_empty() {
            return Err(corrupt(n, "unexpected content after the last planet"));
        }
    }

    let dimension = (dim > 0).then_some(dim);
    if dimension.is_none() && count > 0 {
        return Err(corrupt(3, "planets present with dim=0"));
    }
    Universe::from_parts(config, dimension, planets).map_err(|e| corrupt(0, e.to_string()))
}
