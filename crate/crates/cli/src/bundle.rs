//! Plain-text graph and label files written and read by the CLI.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use aca_core::graph::load_edge_list;
use aca_core::Graph;
use anyhow::{anyhow, bail, Context, Result};

pub const EDGES_FILE: &str = "graph.edges";
pub const LABELS_FILE: &str = "labels.csv";
pub const ATTRS_FILE: &str = "attrs.bin";
pub const META_FILE: &str = "meta.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Edge list over dense ids with a `# nodes N edges M` header line.
pub fn write_edges(path: &Path, g: &Graph) -> Result<()> {
    let mut out = Vec::with_capacity(16 * g.edge_count());
    writeln!(out, "# nodes {} edges {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Read an edge list written by [`write_edges`], keeping its node ids.
pub fn read_dense_edges(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let declared = text.lines().find_map(|l| {
        let rest = l.trim().strip_prefix("# nodes ")?;
        rest.split_whitespace().next()?.parse::<usize>().ok()
    });
    let loaded =
        load_edge_list(text.as_bytes()).with_context(|| format!("parsing {}", path.display()))?;
    let ids = loaded
        .names
        .iter()
        .map(|name| {
            name.parse::<usize>().map_err(|_| {
                anyhow!(
                    "{}: node {name:?} is not a dense integer id",
                    path.display()
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = declared.unwrap_or_else(|| ids.iter().max().map_or(0, |m| m + 1));
    if let Some(&bad) = ids.iter().find(|&&id| id >= n) {
        bail!(
            "{}: node {bad} exceeds the declared {n} nodes",
            path.display()
        );
    }
    Ok(Graph::from_edges(
        n,
        loaded.graph.edges().map(|(u, v)| (ids[u], ids[v])),
    ))
}

pub fn write_labels<L: std::fmt::Display>(path: &Path, labels: &[L]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["node", "label"])?;
    for (v, l) in labels.iter().enumerate() {
        w.write_record([v.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-node class strings from a `node,label` CSV (with header) or a
/// whitespace-separated `node label` listing. `index` maps node tokens to
/// ids; tokens not in it are ignored so that labels of dropped nodes do
/// not matter.
pub fn read_labels(
    path: &Path,
    index: &HashMap<&str, usize>,
    node_count: usize,
) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_csv = path.extension().is_some_and(|e| e == "csv");
    let mut pairs = Vec::new();
    if is_csv {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.with_context(|| format!("{} record {}", path.display(), i + 1))?;
            match (rec.get(0), rec.get(1)) {
                (Some(node), Some(label)) => {
                    pairs.push((node.trim().to_string(), label.trim().to_string()))
                }
                _ => bail!("{}: record {} needs node and label", path.display(), i + 1),
            }
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            match (tok.next(), tok.next()) {
                (Some(node), Some(label)) => pairs.push((node.to_string(), label.to_string())),
                _ => bail!("{}: line {} needs node and label", path.display(), i + 1),
            }
        }
    }
    let mut out: Vec<Option<String>> = vec![None; node_count];
    for (node, label) in pairs {
        if let Some(&v) = index.get(node.as_str()) {
            out[v] = Some(label);
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or_else(|| anyhow!("{}: node {v} has no label", path.display())))
        .collect()
}

/// Dense class indices, numbered by sorted class name.
pub fn class_indices(classes: &[String]) -> Vec<usize> {
    let mut names: Vec<&str> = classes.iter().map(String::as_str).collect();
    names.sort_unstable();
    names.dedup();
    classes
        .iter()
        .map(|c| names.binary_search(&c.as_str()).expect("present"))
        .collect()
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))
}
