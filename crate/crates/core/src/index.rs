//! KD-tree over planet centers answering the two geometric queries used by
//! training and prediction: which planets reach a point, and which planet is
//! closest to it.
//!
//! Planets carry individual radii, so containment cannot be pruned with a
//! single query radius per planet. The tree prunes with the largest radius
//! currently indexed and then filters every candidate exactly.
//!
//! Moving a planet tombstones its node and appends a fresh one. The tree is
//! rebuilt, balanced on the axis of widest spread, whenever the node count
//! doubles relative to the last rebuild.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::universe::{check_finite, Metric, Planet};

const NIL: u32 = u32::MAX;
const MIN_REBUILD: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    radius: f64,
    axis: u32,
    left: u32,
    right: u32,
    live: bool,
}

#[derive(Debug)]
pub struct PlanetIndex {
    dimension: Option<usize>,
    nodes: Vec<Node>,
    coords: Vec<f64>,
    root: u32,
    handles: HashMap<u64, u32>,
    max_radius: f64,
    rebuild_at: usize,
    visits: AtomicU64,
}

impl Clone for PlanetIndex {
    fn clone(&self) -> Self {
        PlanetIndex {
            dimension: self.dimension,
            nodes: self.nodes.clone(),
            coords: self.coords.clone(),
            root: self.root,
            handles: self.handles.clone(),
            max_radius: self.max_radius,
            rebuild_at: self.rebuild_at,
            visits: AtomicU64::new(self.visits.load(Ordering::Relaxed)),
        }
    }
}

impl Default for PlanetIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl PlanetIndex {
    pub fn new() -> Self {
        PlanetIndex {
            dimension: None,
            nodes: Vec::new(),
            coords: Vec::new(),
            root: NIL,
            handles: HashMap::new(),
            max_radius: 0.0,
            rebuild_at: MIN_REBUILD,
            visits: AtomicU64::new(0),
        }
    }

    /// Balanced index over an existing planet set.
    pub fn build(dimension: Option<usize>, planets: &[Planet]) -> Self {
        let mut idx = PlanetIndex::new();
        idx.dimension = dimension;
        for p in planets {
            let node = idx.push_node(p);
            idx.handles.insert(p.id, node);
            idx.max_radius = idx.max_radius.max(p.radius);
        }
        idx.rebuild();
        idx
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    /// Number of indexed planets.
    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    /// Tree nodes visited by queries since the last reset.
    pub fn visits(&self) -> u64 {
        self.visits.load(Ordering::Relaxed)
    }

    pub fn reset_visits(&self) {
        self.visits.store(0, Ordering::Relaxed);
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        match self.dimension {
            Some(d) if d != v.len() => Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            }),
            _ => check_finite(v),
        }
    }

    pub fn insert(&mut self, planet: &Planet) -> Result<()> {
        if self.handles.contains_key(&planet.id) {
            return Err(Error::DuplicateId(planet.id));
        }
        self.check_dim(&planet.position)?;
        if self.dimension.is_none() {
            self.dimension = Some(planet.position.len());
        }
        self.attach(planet);
        Ok(())
    }

    /// Move (and resize) an already indexed planet.
    pub fn update_planet(&mut self, planet: &Planet) -> Result<()> {
        let old = *self
            .handles
            .get(&planet.id)
            .ok_or(Error::UnknownId(planet.id))?;
        self.check_dim(&planet.position)?;
        self.nodes[old as usize].live = false;
        self.attach(planet);
        Ok(())
    }

    /// Ids of the planets whose radius reaches `point`, ascending.
    pub fn planets_in_reach(&self, point: &[f64], metric: Metric) -> Result<Vec<u64>> {
        self.check_dim(point)?;
        Ok(self.reach(point, metric))
    }

    /// Id of the planet closest to `point`; ties go to the smallest id.
    pub fn nearest_planet(&self, point: &[f64], metric: Metric) -> Result<u64> {
        self.check_dim(point)?;
        self.nearest(point, metric).ok_or(Error::EmptyIndex)
    }

    fn point(&self, node: u32) -> &[f64] {
        let d = self.dimension.unwrap_or(0);
        let start = node as usize * d;
        &self.coords[start..start + d]
    }

    fn push_node(&mut self, planet: &Planet) -> u32 {
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node {
            id: planet.id,
            radius: planet.radius,
            axis: 0,
            left: NIL,
            right: NIL,
            live: true,
        });
        self.coords.extend_from_slice(&planet.position);
        idx
    }

    fn attach(&mut self, planet: &Planet) {
        let d = self.dimension.unwrap_or(1).max(1);
        let new = self.push_node(planet);
        self.handles.insert(planet.id, new);
        self.max_radius = self.max_radius.max(planet.radius);

        if self.root == NIL {
            self.root = new;
        } else {
            let mut cur = self.root;
            loop {
                let axis = self.nodes[cur as usize].axis as usize;
                let go_left = planet.position[axis] < self.point(cur)[axis];
                let node = &self.nodes[cur as usize];
                let next = if go_left { node.left } else { node.right };
                if next == NIL {
                    self.nodes[new as usize].axis = ((axis + 1) % d) as u32;
                    let node = &mut self.nodes[cur as usize];
                    if go_left {
                        node.left = new;
                    } else {
                        node.right = new;
                    }
                    break;
                }
                cur = next;
            }
        }

        if self.nodes.len() >= self.rebuild_at {
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        let old_nodes = std::mem::take(&mut self.nodes);
        let old_coords = std::mem::take(&mut self.coords);
        let d = self.dimension.unwrap_or(0);

        let mut live: Vec<u32> = (0..old_nodes.len() as u32)
            .filter(|&i| old_nodes[i as usize].live)
            .collect();
        live.sort_unstable_by_key(|&i| old_nodes[i as usize].id);

        self.handles.clear();
        self.max_radius = live
            .iter()
            .map(|&i| old_nodes[i as usize].radius)
            .fold(0.0, f64::max);
        self.nodes.reserve(live.len());
        self.coords.reserve(live.len() * d);

        let old = OldTree {
            nodes: &old_nodes,
            coords: &old_coords,
            d,
        };
        self.root = self.build_range(&mut live, &old);
        self.rebuild_at = (2 * self.nodes.len()).max(MIN_REBUILD);
    }

    fn build_range(&mut self, items: &mut [u32], old: &OldTree<'_>) -> u32 {
        if items.is_empty() {
            return NIL;
        }
        let axis = widest_axis(items, old);
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |&a, &b| {
            old.coord(a, axis)
                .total_cmp(&old.coord(b, axis))
                .then(old.nodes[a as usize].id.cmp(&old.nodes[b as usize].id))
        });
        let pick = items[mid];
        let src = &old.nodes[pick as usize];
        let node = self.nodes.len() as u32;
        self.nodes.push(Node {
            id: src.id,
            radius: src.radius,
            axis: axis as u32,
            left: NIL,
            right: NIL,
            live: true,
        });
        self.coords.extend_from_slice(old.point(pick));
        self.handles.insert(src.id, node);

        let (lo, rest) = items.split_at_mut(mid);
        let left = self.build_range(lo, old);
        let right = self.build_range(&mut rest[1..], old);
        let n = &mut self.nodes[node as usize];
        n.left = left;
        n.right = right;
        node
    }

    pub(crate) fn reach(&self, point: &[f64], metric: Metric) -> Vec<u64> {
        let mut found = Vec::new();
        if self.root == NIL {
            return found;
        }
        let bound = self.max_radius;
        let mut visited = 0u64;
        let mut stack = vec![self.root];
        while let Some(cur) = stack.pop() {
            visited += 1;
            let node = &self.nodes[cur as usize];
            let center = self.point(cur);
            if node.live && metric.eval(center, point) <= node.radius {
                found.push(node.id);
            }
            let axis = node.axis as usize;
            let diff = point[axis] - center[axis];
            let (near, far) = if diff < 0.0 {
                (node.left, node.right)
            } else {
                (node.right, node.left)
            };
            if near != NIL {
                stack.push(near);
            }
            if far != NIL && diff.abs() <= bound {
                stack.push(far);
            }
        }
        self.visits.fetch_add(visited, Ordering::Relaxed);
        found.sort_unstable();
        found
    }

    pub(crate) fn nearest(&self, point: &[f64], metric: Metric) -> Option<u64> {
        if self.root == NIL {
            return None;
        }
        let mut best: Option<(f64, u64)> = None;
        let mut visited = 0u64;
        // (node, lower bound on the distance of anything in its subtree)
        let mut stack = vec![(self.root, 0.0f64)];
        while let Some((cur, lower)) = stack.pop() {
            if let Some((best_d, _)) = best {
                if lower > best_d {
                    continue;
                }
            }
            visited += 1;
            let node = &self.nodes[cur as usize];
            let center = self.point(cur);
            if node.live {
                let dist = metric.eval(center, point);
                let better = match best {
                    None => true,
                    Some((bd, bid)) => dist < bd || (dist == bd && node.id < bid),
                };
                if better {
                    best = Some((dist, node.id));
                }
            }
            let axis = node.axis as usize;
            let diff = point[axis] - center[axis];
            let (near, far) = if diff < 0.0 {
                (node.left, node.right)
            } else {
                (node.right, node.left)
            };
            if far != NIL {
                stack.push((far, lower.max(diff.abs())));
            }
            if near != NIL {
                stack.push((near, lower));
            }
        }
        self.visits.fetch_add(visited, Ordering::Relaxed);
        best.map(|(_, id)| id)
    }
}

struct OldTree<'a> {
    nodes: &'a [Node],
    coords: &'a [f64],
    d: usize,
}

impl OldTree<'_> {
    fn point(&self, node: u32) -> &[f64] {
        let start = node as usize * self.d;
        &self.coords[start..start + self.d]
    }

    fn coord(&self, node: u32, axis: usize) -> f64 {
        self.coords[node as usize * self.d + axis]
    }
}

fn widest_axis(items: &[u32], old: &OldTree<'_>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for axis in 0..old.d {
        let (lo, hi) = items.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            let c = old.coord(i, axis);
            (lo.min(c), hi.max(c))
        });
        if hi - lo > best.1 {
            best = (axis, hi - lo);
        }
    }
    best.0
}
