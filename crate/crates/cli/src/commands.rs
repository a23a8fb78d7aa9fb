use std::fs;
use std::path::Path;

use aca_core::attack::Strategy;
use aca_core::detect::DetectorSpec;
use aca_core::game::{
    assign_temperatures, default_budget, defender_select, replay_record, select_targets,
    GameConfig, TargetSetup,
};
use aca_core::graph::LoadReport;
use aca_core::seed;
use aca_core::synth::{build_attribute_profile, generate_attributes, AttributeCurve, SynthConfig};
use aca_core::Temperature;
use anyhow::Context;
use serde::Serialize;

use crate::args::{Capability, Command, GameArgs, GenerateArgs, ReplayArgs};
use crate::bundle::{
    read_dense_edges, read_json, write_edges, write_json, write_labels, ATTRS_FILE, EDGES_FILE,
    LABELS_FILE, MANIFEST_FILE, META_FILE,
};
use crate::data::{load_dataset, synth_config, synthesize, Dataset, LabelInfo, Source};
use crate::failure::{Classify, Failure, Outcome};
use crate::manifest::{ManifestBuilder, RunManifest};
use crate::output::{
    curves_csv, nodes_csv, summary_csv, tradeoff_csv, RecordFile, CURVES_FILE, NODES_FILE,
    RECORD_FILE, RECORD_FORMAT, SUMMARY_FILE, TRADEOFF_FILE,
};

pub fn run(command: Command) -> Outcome<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Game(a) => game(*a),
        Command::Replay(a) => replay(a),
    }
}

fn create_dir(dir: &Path) -> Outcome<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .runtime_err()
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Outcome<()> {
    let path = dir.join(name);
    fs::write(&path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .runtime_err()
}

fn to_value<T: Serialize>(value: &T) -> Outcome<serde_json::Value> {
    serde_json::to_value(value).runtime_err()
}

#[derive(Serialize)]
struct AttributeInfo {
    target_accuracy: f64,
    glrt_accuracy: Option<f64>,
    shift: usize,
    rows: usize,
    cols: usize,
}

#[derive(Serialize)]
struct BundleMeta<'a> {
    format: &'static str,
    manifest: &'static str,
    config: &'a SynthConfig,
    node_count: usize,
    edge_count: usize,
    mean_degree: f64,
    raw_node_count: usize,
    raw_edge_count: usize,
    raw_mean_degree: f64,
    labels: &'a LabelInfo,
    attributes: AttributeInfo,
}

#[derive(Serialize)]
struct GenerateSnapshot<'a> {
    synth: &'a SynthConfig,
    accuracy: f64,
    target_delta: Option<i64>,
    max_swaps: usize,
}

fn generate(args: GenerateArgs) -> Outcome<()> {
    let started = ManifestBuilder::start("generate", args.seed);
    if !(0.5..=1.0).contains(&args.accuracy) {
        return Err(Failure::usage(format!(
            "--accuracy {} must lie in [0.5, 1]",
            args.accuracy
        )));
    }
    let config = synth_config(args.model, args.n, &args.tuning, args.seed)?;
    let s = synthesize(config, &args.tuning)?;
    let profile = build_attribute_profile(
        args.accuracy,
        AttributeCurve::default(),
        seed::sub_seed(args.seed, "attribute-profile", &[]),
    )
    .runtime_err()?;
    let attrs = generate_attributes(
        &s.labels,
        &profile,
        &mut seed::rng_for(args.seed, "attributes", &[]),
    );

    let dir = &args.out_dir;
    create_dir(dir)?;
    write_edges(&dir.join(EDGES_FILE), &s.graph).runtime_err()?;
    write_labels(&dir.join(LABELS_FILE), s.labels.as_slice()).runtime_err()?;
    write_file(dir, ATTRS_FILE, &attrs.to_bytes())?;
    let n = s.graph.node_count();
    let meta = BundleMeta {
        format: "aca-bundle v1",
        manifest: MANIFEST_FILE,
        config: &s.config,
        node_count: n,
        edge_count: s.graph.edge_count(),
        mean_degree: 2.0 * s.graph.edge_count() as f64 / n as f64,
        raw_node_count: s.raw_node_count,
        raw_edge_count: s.raw_edge_count,
        raw_mean_degree: 2.0 * s.raw_edge_count as f64 / s.raw_node_count as f64,
        labels: &s.info,
        attributes: AttributeInfo {
            target_accuracy: args.accuracy,
            glrt_accuracy: profile.measured_accuracy,
            shift: profile.shift,
            rows: attrs.rows(),
            cols: attrs.cols(),
        },
    };
    write_json(&dir.join(META_FILE), &meta).runtime_err()?;
    let snapshot = GenerateSnapshot {
        synth: &s.config,
        accuracy: args.accuracy,
        target_delta: args.tuning.target_delta,
        max_swaps: args.tuning.max_swaps,
    };
    let outputs = [EDGES_FILE, LABELS_FILE, ATTRS_FILE, META_FILE]
        .map(String::from)
        .to_vec();
    let manifest = started.finish(to_value(&snapshot)?, outputs);
    write_json(&dir.join(MANIFEST_FILE), &manifest).runtime_err()?;

    println!(
        "{} nodes, {} edges, mean degree {:.3}",
        n, meta.edge_count, meta.mean_degree
    );
    println!(
        "delta {} (from {}), heterophilicity {:.4}, GLRT accuracy {:.4}",
        s.info.achieved_delta,
        s.info.initial_delta,
        s.info.heterophilicity,
        profile.measured_accuracy.unwrap_or(f64::NAN)
    );
    println!("bundle written to {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct GameSnapshot<'a> {
    dataset: &'a str,
    source: &'a Source,
    node_count: usize,
    edge_count: usize,
    raw_node_count: usize,
    raw_edge_count: usize,
    load: Option<&'a LoadReport>,
    requested_targets: usize,
    force_target_hot: bool,
    game: &'a GameConfig,
}

fn strategies(args: &GameArgs) -> Outcome<Vec<Strategy>> {
    let mut out: Vec<Strategy> = Vec::new();
    for &s in &args.attacks {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    let linking = args.capability.contains(&Capability::SsNbr);
    if out.iter().any(|s| s.links_neighbors()) && !linking {
        return Err(Failure::usage(
            "attack ss-nbr adds edges away from the target and needs --capability ss-nbr",
        ));
    }
    if linking && !out.contains(&Strategy::SsNbr) {
        out.push(Strategy::SsNbr);
    }
    Ok(out)
}

fn detectors(args: &GameArgs) -> Vec<DetectorSpec> {
    args.detectors
        .iter()
        .map(|&kind| {
            let mut spec = DetectorSpec::new(kind);
            if let Some(k) = args.cp_k {
                spec.params.clique_size = k;
            }
            if args.hlc_threshold.is_some() {
                spec.params.hlc_threshold = args.hlc_threshold;
            }
            if let Some(o) = args.umst_overlap {
                spec.params.umst_merge_overlap = o;
            }
            if args.bp_dim.is_some() {
                spec.params.bp_dimension = args.bp_dim;
            }
            spec
        })
        .collect()
}

fn game(args: GameArgs) -> Outcome<()> {
    let started = ManifestBuilder::start("game", args.seed);
    let strategies = strategies(&args)?;
    let specs = detectors(&args);
    if args.targets == 0 {
        return Err(Failure::usage("--targets must be at least 1"));
    }
    let dataset = match (&args.data, args.model) {
        (Some(spec), _) => load_dataset(spec)?,
        (None, Some(model)) => {
            let n = args.n.ok_or_else(|| Failure::usage("--model needs --n"))?;
            let config = synth_config(model, n, &args.tuning, args.seed)?;
            Dataset::from_synthetic(synthesize(config, &args.tuning)?)
        }
        (None, None) => return Err(Failure::usage("give --data or --model")),
    };
    let g = &dataset.graph;

    let selection =
        select_targets(g, dataset.labels.as_deref(), args.targets, args.seed).runtime_err()?;
    let mut config = GameConfig::new(specs, strategies, selection.targets.clone(), args.seed);
    config.budget = args
        .budget
        .unwrap_or_else(|| default_budget(&config.strategies));
    config.attack_probabilities = args.attack_prob_grid.clone();
    if let Some(t) = args.stable_trials {
        config.attack.stable_trials = t;
    }
    if let Some(d) = args.embedding_dim {
        config.attack.embedding_dim = d;
    }
    if let Some(p) = args.epa_population {
        config.attack.epa.population = p;
    }
    if let Some(gens) = args.epa_generations {
        config.attack.epa.generations = gens;
    }
    if config.budget == 0 {
        return Err(Failure::usage("--budget must be at least 1"));
    }
    config.validate().usage_err()?;

    let setups = selection
        .targets
        .iter()
        .map(|&t| {
            let mut temperatures = assign_temperatures(&selection.labels, t, args.seed)?;
            if args.force_target_hot {
                temperatures.set(t, Temperature::Hot);
            }
            Ok(TargetSetup {
                target: t,
                temperatures,
            })
        })
        .collect::<aca_core::Result<Vec<_>>>()
        .runtime_err()?;
    let record = defender_select(g, &dataset.name, &setups, &config).runtime_err()?;

    let dir = &args.out_dir;
    create_dir(dir)?;
    write_edges(&dir.join(EDGES_FILE), g).runtime_err()?;
    write_file(dir, NODES_FILE, &nodes_csv(&dataset.names).runtime_err()?)?;
    let file = RecordFile {
        format: RECORD_FORMAT.to_string(),
        manifest: MANIFEST_FILE.to_string(),
        record,
    };
    write_json(&dir.join(RECORD_FILE), &file).runtime_err()?;
    let record = &file.record;
    write_file(
        dir,
        CURVES_FILE,
        &curves_csv(record, MANIFEST_FILE).runtime_err()?,
    )?;
    write_file(
        dir,
        SUMMARY_FILE,
        &summary_csv(record, MANIFEST_FILE).runtime_err()?,
    )?;
    let mut outputs = vec![
        EDGES_FILE,
        NODES_FILE,
        RECORD_FILE,
        CURVES_FILE,
        SUMMARY_FILE,
    ];
    if !record.mixed.is_empty() {
        write_file(
            dir,
            TRADEOFF_FILE,
            &tradeoff_csv(record, MANIFEST_FILE).runtime_err()?,
        )?;
        outputs.push(TRADEOFF_FILE);
    }
    let snapshot = GameSnapshot {
        dataset: &dataset.name,
        source: &dataset.source,
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        raw_node_count: dataset.raw_node_count,
        raw_edge_count: dataset.raw_edge_count,
        load: dataset.load.as_ref(),
        requested_targets: args.targets,
        force_target_hot: args.force_target_hot,
        game: &config,
    };
    let manifest = started.finish(
        to_value(&snapshot)?,
        outputs.into_iter().map(String::from).collect(),
    );
    write_json(&dir.join(MANIFEST_FILE), &manifest).runtime_err()?;

    print_game(record);
    let violations = record.consistency_violations();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("inconsistent record: {v}");
        }
        return Err(Failure::runtime(format!(
            "{} consistency violations",
            violations.len()
        )));
    }
    println!("results written to {}", dir.display());
    Ok(())
}

fn print_game(record: &aca_core::game::GameRecord) {
    println!(
        "{}: {} nodes, {} edges, {} targets, budget {}",
        record.dataset,
        record.node_count,
        record.edge_count,
        record.config.targets.len(),
        record.config.budget
    );
    for (i, d) in record.detectors.iter().enumerate() {
        let mark = if i == record.chosen_detector {
            "  <- analyst"
        } else {
            ""
        };
        println!(
            "  {:<11} best-response rank {:>9.2} ± {:<7.2} (unattacked {:.2}){mark}",
            d.detector.kind().name(),
            d.mean_rank,
            d.std_error,
            d.baseline_rank_sum as f64 / d.targets.len() as f64
        );
    }
    for point in &record.mixed {
        println!(
            "  p_attack {:<6} -> {}",
            point.probability,
            record.detectors[point.chosen].detector.kind().name()
        );
    }
}

fn replay(args: ReplayArgs) -> Outcome<()> {
    let manifest: RunManifest = read_json(&args.manifest).data_err()?;
    if manifest.command != "game" {
        return Err(Failure::data(format!(
            "{} was written by `{}`, not `game`",
            args.manifest.display(),
            manifest.command
        )));
    }
    let dir = args.manifest.parent().unwrap_or(Path::new("."));
    let file: RecordFile = read_json(&dir.join(RECORD_FILE)).data_err()?;
    let g = read_dense_edges(&dir.join(EDGES_FILE)).data_err()?;
    let record = &file.record;

    let mut mismatches = Vec::new();
    let mut checks = 0;
    match replay_record(&g, record) {
        Ok(report) => {
            checks += report.checks;
            mismatches.extend(report.mismatches);
        }
        Err(e) => {
            checks += 1;
            mismatches.push(format!("graph: {e}"));
        }
    }
    checks += 1;
    mismatches.extend(record.consistency_violations());

    type Table = fn(&aca_core::game::GameRecord, &str) -> anyhow::Result<Vec<u8>>;
    let tables: [(&str, Table); 3] = [
        (CURVES_FILE, curves_csv),
        (SUMMARY_FILE, summary_csv),
        (TRADEOFF_FILE, tradeoff_csv),
    ];
    for (name, render) in tables {
        if !manifest.outputs.iter().any(|o| o == name) {
            continue;
        }
        checks += 1;
        let expected = render(record, &file.manifest).runtime_err()?;
        match fs::read(dir.join(name)) {
            Ok(found) if found == expected => {}
            Ok(_) => mismatches.push(format!("{name} differs from the record")),
            Err(e) => mismatches.push(format!("{name}: {e}")),
        }
    }

    if mismatches.is_empty() {
        println!("all {checks} checks passed");
        Ok(())
    } else {
        for m in &mismatches {
            println!("mismatch: {m}");
        }
        Err(Failure::runtime(format!(
            "{} of {checks} checks failed",
            mismatches.len()
        )))
    }
}
