//! Shared helpers for the integration suites: a seeded random-tree
//! generator and brute-force oracles the real implementations are checked
//! against. Everything here favours obviousness over speed — these are the
//! referees, not the players.

#![allow(dead_code)] // each test binary uses its own subset

use std::collections::BTreeMap;

use rand::Rng;
use rand::rngs::StdRng;

use mdload::container::{AttributeValue, ContainerNode, Dtype};
use mdload::loader::MdEvent;

/// Name alphabet for random nodes. Includes `.` (sorts below `/`) on
/// purpose: it exercises the prefix-range edge where a sibling like
/// `exp1.x` sits between `exp1` and `exp1/...` in byte order.
const NAME_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_.";

/// A few class names for random groups; some collide with real schema
/// classes, some do not.
const CLASSES: &[&str] = &["NXentry", "NXlog", "NXdata", "NXgroup", "alpha", "z.z"];

pub fn random_name(rng: &mut StdRng) -> String {
    let len = rng.random_range(1..=8);
    (0..len)
        .map(|_| NAME_CHARS[rng.random_range(0..NAME_CHARS.len())] as char)
        .collect()
}

fn random_attr_value(rng: &mut StdRng) -> AttributeValue {
    match rng.random_range(0..3) {
        0 => AttributeValue::from(random_name(rng).as_str()),
        1 => AttributeValue::from(rng.random_range(-1_000_000i64..1_000_000)),
        _ => AttributeValue::from(rng.random_range(-1e6..1e6)),
    }
}

fn random_dataset(rng: &mut StdRng, name: &str) -> ContainerNode {
    let dtype = match rng.random_range(0..6) {
        0 => Dtype::F32,
        1 => Dtype::F64,
        2 => Dtype::I32,
        3 => Dtype::I64,
        4 => Dtype::U32,
        _ => Dtype::Bytes,
    };
    let ndim = rng.random_range(0..=2);
    let dims: Vec<u64> = (0..ndim).map(|_| rng.random_range(0..4)).collect();
    let len = dtype.element_size() * dims.iter().product::<u64>();
    let payload: Vec<u8> = (0..len).map(|_| rng.random()).collect();
    ContainerNode::dataset(name, dtype, dims, payload).expect("sized payload")
}

fn populate(rng: &mut StdRng, group: &mut ContainerNode, depth: usize) {
    for _ in 0..rng.random_range(0..3usize) {
        let name = random_name(rng);
        let _ = group.set_attr(&name, random_attr_value(rng));
    }
    let n_children = rng.random_range(0..=4usize);
    for _ in 0..n_children {
        let name = random_name(rng);
        if group.child(&name).is_some() {
            continue; // sibling names must be unique; skipping keeps the draw simple
        }
        let make_group = depth > 0 && rng.random_bool(0.6);
        if make_group {
            let mut child = ContainerNode::group(&name);
            if rng.random_bool(0.5) {
                // Mostly proper text classes, occasionally a wrong-typed one
                // so the fallback classification path gets exercised too.
                let class = if rng.random_bool(0.1) {
                    AttributeValue::from(rng.random_range(0i64..10))
                } else {
                    AttributeValue::from(CLASSES[rng.random_range(0..CLASSES.len())])
                };
                child.set_attr("NX_class", class).unwrap();
            }
            populate(rng, &mut child, depth - 1);
            group.add_child(child).unwrap();
        } else {
            group.add_child(random_dataset(rng, &name)).unwrap();
        }
    }
}

/// A random tree: groups and datasets down to `max_depth`, with random
/// attributes, some groups class-tagged and some not.
pub fn random_tree(rng: &mut StdRng, max_depth: usize) -> ContainerNode {
    let mut root = ContainerNode::root();
    populate(rng, &mut root, max_depth);
    root
}

/// Brute-force index oracle: walk everything, collect `(class, path)` for
/// every non-root node, bucket, sort.
pub fn oracle_index(root: &ContainerNode) -> BTreeMap<String, Vec<String>> {
    fn class_of(node: &ContainerNode) -> String {
        if node.is_dataset() {
            return "SDS".to_owned();
        }
        match node.attr("NX_class") {
            Some(AttributeValue::Text(class)) => class.clone(),
            _ => "NXgroup".to_owned(),
        }
    }
    fn walk(node: &ContainerNode, path: &str, out: &mut BTreeMap<String, Vec<String>>) {
        for child in node.children() {
            let child_path = format!("{path}/{}", child.name());
            out.entry(class_of(child))
                .or_default()
                .push(child_path.clone());
            walk(child, &child_path, out);
        }
    }
    let mut out = BTreeMap::new();
    walk(root, "", &mut out);
    for paths in out.values_mut() {
        paths.sort();
    }
    out
}

/// Brute-force entry counter: every non-root node plus every attribute
/// (root attributes included).
pub fn oracle_entry_count(root: &ContainerNode) -> u64 {
    fn walk(node: &ContainerNode, is_root: bool) -> u64 {
        let own = if is_root { 0 } else { 1 };
        own + node.attrs().len() as u64
            + node.children().iter().map(|c| walk(c, false)).sum::<u64>()
    }
    walk(root, true)
}

/// Prefix-filter oracle: what `lookup_prefix` must return, computed the slow
/// way from the full class listing.
pub fn oracle_prefix_filter(class_paths: &[String], prefix: &str) -> Vec<String> {
    let below = format!("{prefix}/");
    class_paths
        .iter()
        .filter(|p| p.as_str() == prefix || p.starts_with(&below))
        .cloned()
        .collect()
}

/// Brute-force slice oracle: one pass per bin over all events, membership
/// decided by interval comparison on the scaled coordinate (the
/// implementation uses floor; `ix <= u < ix+1` is the same set).
pub fn oracle_slice(
    events: &[MdEvent],
    dim_x: usize,
    dim_y: usize,
    (nx, ny): (usize, usize),
    ((x_lo, x_hi), (y_lo, y_hi)): ((f64, f64), (f64, f64)),
) -> Vec<f64> {
    let in_bin = |value: f64, lo: f64, hi: f64, bin: usize, n: usize| -> bool {
        if value < lo || value > hi {
            return false;
        }
        let u = (value - lo) / (hi - lo) * n as f64;
        let lower_ok = bin as f64 <= u;
        if bin == n - 1 {
            lower_ok // top bin keeps everything up to and including hi
        } else {
            lower_ok && u < (bin + 1) as f64
        }
    };
    let mut grid = vec![0.0f64; nx * ny];
    for (iy, row) in grid.chunks_exact_mut(nx).enumerate() {
        for (ix, cell) in row.iter_mut().enumerate() {
            for e in events {
                let x = f64::from(e.coords[dim_x]);
                let y = f64::from(e.coords[dim_y]);
                if in_bin(x, x_lo, x_hi, ix, nx) && in_bin(y, y_lo, y_hi, iy, ny) {
                    *cell += f64::from(e.signal);
                }
            }
        }
    }
    grid
}

/// Random events for slice testing, coordinates spread a little beyond the
/// typical query ranges so out-of-range paths are exercised.
pub fn random_events(rng: &mut StdRng, count: usize) -> Vec<MdEvent> {
    (0..count)
        .map(|_| MdEvent {
            signal: rng.random_range(0.001f32..10.0),
            error_sq: rng.random_range(0.001f32..10.0),
            run_index: 0,
            detector_id: rng.random_range(0..1000),
            coords: [
                rng.random_range(-12.0f32..12.0),
                rng.random_range(-12.0f32..12.0),
                rng.random_range(-12.0f32..12.0),
                rng.random_range(-25.0f32..85.0),
            ],
        })
        .collect()
}
