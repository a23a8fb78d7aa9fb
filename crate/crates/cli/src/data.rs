//! Named datasets under `ACA_DATA_DIR`, graph files and bundles, and the
//! synthetic pipeline shared by `generate` and `game --model`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use aca_core::graph::{
    largest_connected_component, load_edge_list, load_gml, LoadReport, LoadedGraph,
};
use aca_core::seed;
use aca_core::synth::{
    generate, laplacian_bisection, reduce_homophily, HomophilyRun, Model, ModelParams, StopReason,
    SynthConfig,
};
use aca_core::triage::{delta_homophily, heterophilicity};
use aca_core::{Graph, LabelMap};
use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::args::SynthTuning;
use crate::bundle::{class_indices, read_dense_edges, read_labels, EDGES_FILE, LABELS_FILE};
use crate::failure::{Classify, Failure, Outcome};

pub const DATA_DIR_VAR: &str = "ACA_DATA_DIR";

struct Entry {
    name: &'static str,
    aliases: &'static [&'static str],
    graph: &'static str,
    /// Separate label file; GML graphs carry labels in their `value` fields.
    labels: Option<&'static str>,
}

const REGISTRY: [Entry; 7] = [
    Entry {
        name: "football",
        aliases: &[],
        graph: "football.gml",
        labels: None,
    },
    Entry {
        name: "netsci",
        aliases: &["netscience"],
        graph: "netscience.gml",
        labels: None,
    },
    Entry {
        name: "email",
        aliases: &["email-eu-core"],
        graph: "email-Eu-core.txt",
        labels: Some("email-Eu-core-department-labels.txt"),
    },
    Entry {
        name: "grid",
        aliases: &["power"],
        graph: "power.gml",
        labels: None,
    },
    Entry {
        name: "asg",
        aliases: &[],
        graph: "asg.edges",
        labels: None,
    },
    Entry {
        name: "cora",
        aliases: &[],
        graph: "cora.edges",
        labels: Some("cora.labels.csv"),
    },
    Entry {
        name: "citeseer",
        aliases: &[],
        graph: "citeseer.edges",
        labels: Some("citeseer.labels.csv"),
    },
];

pub fn registry_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.name).collect()
}

/// Where a dataset came from, as recorded in run manifests.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Registry {
        name: String,
        path: PathBuf,
    },
    File {
        path: PathBuf,
        labels: Option<PathBuf>,
    },
    Bundle {
        dir: PathBuf,
    },
    Synthetic {
        config: SynthConfig,
        labels: LabelInfo,
    },
}

/// A graph restricted to its largest component, with optional classes.
#[derive(Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub labels: Option<Vec<usize>>,
    /// Original identifier of every node.
    pub names: Vec<String>,
    pub source: Source,
    pub load: Option<LoadReport>,
    pub raw_node_count: usize,
    pub raw_edge_count: usize,
}

fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_VAR).map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

/// Resolve `--data`: an existing path first, then a registry name.
pub fn load_dataset(spec: &str) -> Outcome<Dataset> {
    let path = Path::new(spec);
    if path.is_dir() {
        return load_bundle(path);
    }
    if path.is_file() {
        let name = path
            .file_stem()
            .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
        let labels = sibling_labels(path);
        let mut ds = load_graph_file(&name, path, labels.as_deref())?;
        ds.source = Source::File {
            path: path.to_path_buf(),
            labels,
        };
        return Ok(ds);
    }
    let lower = spec.to_ascii_lowercase();
    let entry = REGISTRY
        .iter()
        .find(|e| e.name == lower || e.aliases.contains(&lower.as_str()))
        .ok_or_else(|| {
            Failure::usage(format!(
                "{spec:?} is neither a file nor a known dataset (known: {})",
                registry_names().join(", ")
            ))
        })?;
    let root = data_dir();
    let graph_path = root.join(entry.graph);
    if !graph_path.is_file() {
        return Err(Failure::data(format!(
            "dataset {} not found at {} (set {DATA_DIR_VAR} or run scripts/fetch_datasets.py)",
            entry.name,
            graph_path.display()
        )));
    }
    let labels = entry.labels.map(|l| root.join(l));
    let mut ds = load_graph_file(entry.name, &graph_path, labels.as_deref())?;
    ds.source = Source::Registry {
        name: entry.name.to_string(),
        path: graph_path,
    };
    Ok(ds)
}

fn sibling_labels(path: &Path) -> Option<PathBuf> {
    let stem = path.file_stem()?.to_string_lossy();
    let candidate = path.with_file_name(format!("{stem}.labels.csv"));
    candidate.is_file().then_some(candidate)
}

fn load_graph_file(name: &str, path: &Path, labels: Option<&Path>) -> Outcome<Dataset> {
    let is_gml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gml"));
    let loaded: LoadedGraph = if is_gml {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .data_err()?;
        load_gml(&text)
            .with_context(|| format!("parsing {}", path.display()))
            .data_err()?
    } else {
        let file = fs::File::open(path)
            .with_context(|| format!("reading {}", path.display()))
            .data_err()?;
        load_edge_list(std::io::BufReader::new(file))
            .with_context(|| format!("parsing {}", path.display()))
            .data_err()?
    };
    let classes = match labels {
        Some(lp) => {
            let index: HashMap<&str, usize> = loaded
                .names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.as_str(), i))
                .collect();
            Some(read_labels(lp, &index, loaded.graph.node_count()).data_err()?)
        }
        None => loaded.classes.clone(),
    };
    let lcc = largest_connected_component(&loaded.graph).data_err()?;
    Ok(Dataset {
        name: name.to_string(),
        labels: classes.map(|c| {
            let kept: Vec<String> = lcc.original.iter().map(|&v| c[v].clone()).collect();
            class_indices(&kept)
        }),
        names: lcc
            .original
            .iter()
            .map(|&v| loaded.names[v].clone())
            .collect(),
        raw_node_count: loaded.graph.node_count(),
        raw_edge_count: loaded.graph.edge_count(),
        graph: lcc.graph,
        source: Source::File {
            path: path.to_path_buf(),
            labels: labels.map(Path::to_path_buf),
        },
        load: Some(loaded.report),
    })
}

/// A directory holding `graph.edges` and optionally `labels.csv`.
fn load_bundle(dir: &Path) -> Outcome<Dataset> {
    let edges = dir.join(EDGES_FILE);
    if !edges.is_file() {
        return Err(Failure::data(format!(
            "{} has no {EDGES_FILE}",
            dir.display()
        )));
    }
    let raw = read_dense_edges(&edges).data_err()?;
    let names: Vec<String> = (0..raw.node_count()).map(|v| v.to_string()).collect();
    let label_path = dir.join(LABELS_FILE);
    let classes = if label_path.is_file() {
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        Some(read_labels(&label_path, &index, raw.node_count()).data_err()?)
    } else {
        None
    };
    let lcc = largest_connected_component(&raw).data_err()?;
    let name = dir.file_name().map_or_else(
        || "bundle".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    Ok(Dataset {
        name,
        labels: classes.map(|c| {
            let kept: Vec<String> = lcc.original.iter().map(|&v| c[v].clone()).collect();
            class_indices(&kept)
        }),
        names: lcc.original.iter().map(|&v| names[v].clone()).collect(),
        raw_node_count: raw.node_count(),
        raw_edge_count: raw.edge_count(),
        graph: lcc.graph,
        source: Source::Bundle {
            dir: dir.to_path_buf(),
        },
        load: None,
    })
}

/// Label statistics of a synthetic graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabelInfo {
    pub class_sizes: [usize; 2],
    pub initial_delta: i64,
    pub achieved_delta: i64,
    pub heterophilicity: f64,
    pub swaps: usize,
    pub stop: Option<StopReason>,
}

#[derive(Debug)]
pub struct Synthesized {
    pub config: SynthConfig,
    pub graph: Graph,
    pub labels: LabelMap,
    pub info: LabelInfo,
    pub raw_node_count: usize,
    pub raw_edge_count: usize,
}

pub fn synth_config(
    model: Model,
    n: usize,
    tuning: &SynthTuning,
    seed: u64,
) -> Outcome<SynthConfig> {
    let mut config = SynthConfig::new(model, n, tuning.avg_degree, seed);
    let misplaced =
        |flag: &str| Failure::usage(format!("--{flag} does not apply to model {model}"));
    match &mut config.params {
        ModelParams::Ws { k, beta } => {
            if let Some(b) = tuning.beta {
                *beta = b;
            }
            if let Some(v) = tuning.ws_k {
                *k = v;
            }
        }
        ModelParams::Lfr { mu, .. } => {
            if let Some(m) = tuning.mu {
                *mu = m;
            }
        }
        ModelParams::Ba { m } => {
            if let Some(v) = tuning.ba_m {
                *m = v;
            }
        }
        _ => {}
    }
    let model = config.model();
    if tuning.beta.is_some() && model != Model::Ws {
        return Err(misplaced("beta"));
    }
    if tuning.ws_k.is_some() && model != Model::Ws {
        return Err(misplaced("ws-k"));
    }
    if tuning.mu.is_some() && model != Model::Lfr {
        return Err(misplaced("mu"));
    }
    if tuning.ba_m.is_some() && model != Model::Ba {
        return Err(misplaced("ba-m"));
    }
    config.validate().usage_err()?;
    Ok(config)
}

/// Generate the graph, split it by the Laplacian sign pattern and, if asked,
/// swap labels down to the target within-minus-cross count.
pub fn synthesize(config: SynthConfig, tuning: &SynthTuning) -> Outcome<Synthesized> {
    let synth = generate(&config).runtime_err()?;
    let g = synth.graph;
    let split = laplacian_bisection(&g).runtime_err()?;
    let run = match tuning.target_delta {
        Some(target) => {
            let mut rng = seed::rng_for(config.seed, "homophily", &[]);
            reduce_homophily(&g, &split, target, tuning.max_swaps, &mut rng).runtime_err()?
        }
        None => {
            let d = delta_homophily(&g, &split);
            HomophilyRun {
                labels: split,
                initial_delta: d,
                achieved_delta: d,
                swaps: Vec::new(),
                stop: StopReason::TargetReached,
            }
        }
    };
    let (c0, c1) = run.labels.class_sizes();
    let info = LabelInfo {
        class_sizes: [c0, c1],
        initial_delta: run.initial_delta,
        achieved_delta: run.achieved_delta,
        heterophilicity: heterophilicity(&g, &run.labels).runtime_err()?,
        swaps: run.swaps.len(),
        stop: tuning.target_delta.map(|_| run.stop),
    };
    Ok(Synthesized {
        config,
        raw_node_count: synth.raw_node_count,
        raw_edge_count: synth.raw_edge_count,
        graph: g,
        labels: run.labels,
        info,
    })
}

impl Dataset {
    pub fn from_synthetic(s: Synthesized) -> Self {
        let n = s.graph.node_count();
        Dataset {
            name: format!("{}-n{}-s{}", s.config.model(), s.config.n, s.config.seed),
            labels: Some(s.labels.as_slice().iter().map(|&l| l as usize).collect()),
            names: (0..n).map(|v| v.to_string()).collect(),
            raw_node_count: s.raw_node_count,
            raw_edge_count: s.raw_edge_count,
            graph: s.graph,
            source: Source::Synthetic {
                config: s.config,
                labels: s.info,
            },
            load: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuning() -> SynthTuning {
        SynthTuning {
            avg_degree: 6.0,
            beta: None,
            mu: None,
            ws_k: None,
            ba_m: None,
            target_delta: None,
            max_swaps: 1000,
        }
    }

    #[test]
    fn model_flags_must_match_the_model() {
        let mut t = tuning();
        t.beta = Some(0.0);
        assert!(synth_config(Model::Ws, 50, &t, 1).is_ok());
        let err = synth_config(Model::Er, 50, &t, 1).unwrap_err();
        assert_eq!(err.kind, crate::failure::Kind::Usage);
    }

    #[test]
    fn gml_values_become_classes_on_the_largest_component() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.gml");
        let text = "graph [\n node [ id 10 value 1 ]\n node [ id 11 value 0 ]\n node [ id 12 value 1 ]\n \
                    node [ id 13 value 5 ]\n node [ id 14 value 5 ]\n \
                    edge [ source 10 target 11 ]\n edge [ source 11 target 12 ]\n edge [ source 13 target 14 ]\n]\n";
        fs::write(&path, text).unwrap();
        let ds = load_dataset(path.to_str().unwrap()).unwrap();
        assert_eq!(ds.graph.node_count(), 3);
        assert_eq!(ds.raw_node_count, 5);
        assert_eq!(ds.labels, Some(vec![1, 0, 1]));
        assert_eq!(ds.names, vec!["10", "11", "12"]);
    }

    #[test]
    fn unknown_name_is_a_usage_error() {
        let err = load_dataset("no-such-dataset-anywhere").unwrap_err();
        assert_eq!(err.kind, crate::failure::Kind::Usage);
    }

    #[test]
    fn swaps_reach_the_requested_delta() {
        let mut t = tuning();
        t.target_delta = Some(0);
        let config = synth_config(Model::Er, 80, &t, 3).unwrap();
        let s = synthesize(config, &t).unwrap();
        assert!(s.info.achieved_delta <= 0);
        assert_eq!(s.info.achieved_delta, delta_homophily(&s.graph, &s.labels));
        assert_eq!(s.info.stop, Some(StopReason::TargetReached));
    }
}
