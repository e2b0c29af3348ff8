use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use formkit::alignment::{align_entities, entity_prf_from, relationship_prf_from, EntityScores, MatchConfig, Prf};
use formkit::cleanup::{collapse_repeats, CleanupConfig, Repairer};
use formkit::form_tree::{parse_json, ParseTree, TableOrientation};
use formkit::ganted::{ganted, nted_parse};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::EvalArgs;
use crate::clean::ganted_config;
use crate::error::{read_text, write_text, CliError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
struct ConfigSnapshot {
    window: usize,
    passes: usize,
    max_orientation_combos: usize,
    threshold: f64,
    per_class: bool,
    collapse: bool,
    repair: bool,
    lenient_tables: bool,
}

#[derive(Debug, Serialize)]
struct CleanupSummary {
    collapsed: bool,
    repaired: bool,
    repair_entries: usize,
    repair_rules: Vec<String>,
}

#[derive(Debug, Serialize)]
struct DocRecord {
    doc: String,
    nted: f64,
    /// GAnTED after each pass.
    ganted: Vec<f64>,
    pred_orientations: Vec<TableOrientation>,
    gt_orientations: Vec<TableOrientation>,
    orientation_combos: usize,
    orientations_capped: bool,
    entities: EntityScores,
    relationships: Prf,
    cleanup: CleanupSummary,
}

#[derive(Debug, Serialize, Default)]
struct Means {
    nted: f64,
    ganted: Vec<f64>,
    entity_f: f64,
    relationship_f: f64,
}

#[derive(Debug, Serialize)]
struct Skipped {
    missing_gt: Vec<String>,
    missing_pred: Vec<String>,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    schema_version: u32,
    config: ConfigSnapshot,
    documents: Vec<DocRecord>,
    means: Means,
    skipped: Skipped,
}

/// Maps document stems to files. `a.gt.json`, `a.pred.json` and `a.json` all
/// have stem `a`; layout files and manifests are ignored.
fn list_docs(dir: &Path) -> Result<BTreeMap<String, PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(stem) = name.strip_suffix(".json") else {
            continue;
        };
        if stem == "manifest" || stem.ends_with(".layout") {
            continue;
        }
        let stem = stem
            .strip_suffix(".gt")
            .or_else(|| stem.strip_suffix(".pred"))
            .unwrap_or(stem);
        out.insert(stem.to_string(), path);
    }
    Ok(out)
}

fn score_doc(
    stem: &str,
    pred_path: &Path,
    gt_path: &Path,
    a: &EvalArgs,
) -> Result<DocRecord, CliError> {
    let lenient = a.score.lenient_tables;
    let gt_text = read_text(gt_path)?;
    let gt: ParseTree = parse_json(&gt_text, lenient).map_err(|e| CliError::parse(gt_path, e))?;
    let mut text = read_text(pred_path)?;
    let mut summary = CleanupSummary {
        collapsed: false,
        repaired: false,
        repair_entries: 0,
        repair_rules: Vec::new(),
    };
    if a.collapse {
        let c = collapse_repeats(&text, &CleanupConfig::default());
        summary.collapsed = c != text;
        text = c;
    }
    let pred = match parse_json(&text, lenient) {
        Ok(t) => t,
        Err(e) if !a.repair => return Err(CliError::parse(pred_path, e)),
        Err(_) => {
            let (fixed, log) = Repairer::default().lenient_tables(lenient).repair(&text);
            summary.repaired = true;
            summary.repair_entries = log.len();
            let mut rules: Vec<String> = log.rules().map(str::to_string).collect();
            rules.sort();
            rules.dedup();
            summary.repair_rules = rules;
            parse_json(&fixed, lenient).map_err(|e| CliError::parse(pred_path, e))?
        }
    };

    let cfg = ganted_config(&a.score);
    let nted = nted_parse(&pred, &gt, &cfg.costs);
    let (_, report) = ganted(&pred, &gt, &cfg);
    let mcfg = MatchConfig {
        text_threshold: a.threshold,
        per_class: a.per_class,
    };
    let matching = align_entities(&pred, &gt, &mcfg);
    Ok(DocRecord {
        doc: stem.to_string(),
        nted: 100.0 * nted,
        ganted: report.per_pass.iter().map(|s| 100.0 * s).collect(),
        pred_orientations: report.pred_orientations,
        gt_orientations: report.gt_orientations,
        orientation_combos: report.combos_evaluated,
        orientations_capped: report.capped,
        entities: entity_prf_from(&matching, &mcfg),
        relationships: relationship_prf_from(&matching, &mcfg),
        cleanup: summary,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn means(docs: &[DocRecord], passes: usize) -> Means {
    Means {
        nted: mean(docs.iter().map(|d| d.nted)),
        ganted: (0..passes).map(|k| mean(docs.iter().map(|d| d.ganted[k]))).collect(),
        entity_f: mean(docs.iter().map(|d| d.entities.micro.f_measure)),
        relationship_f: mean(docs.iter().map(|d| d.relationships.f_measure)),
    }
}

pub fn run(a: &EvalArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Usage(format!("--threshold {} is outside [0, 1]", a.threshold)));
    }
    let preds = list_docs(&a.pred_dir)?;
    let gts = list_docs(&a.gt_dir)?;
    let missing_gt: Vec<String> = preds.keys().filter(|k| !gts.contains_key(*k)).cloned().collect();
    let missing_pred: Vec<String> = gts.keys().filter(|k| !preds.contains_key(*k)).cloned().collect();
    for stem in &missing_gt {
        eprintln!("warning: no ground truth for {stem}, skipped");
    }
    for stem in &missing_pred {
        eprintln!("warning: no prediction for {stem}, skipped");
    }
    let pairs: Vec<(&String, &PathBuf, &PathBuf)> = preds
        .iter()
        .filter_map(|(stem, p)| gts.get(stem).map(|g| (stem, p, g)))
        .collect();
    let results: Vec<Result<DocRecord, CliError>> = pairs
        .par_iter()
        .map(|(stem, p, g)| score_doc(stem, p, g, a))
        .collect();
    let documents = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let passes = a.score.passes as usize;
    let report = EvalReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigSnapshot {
            window: a.score.window,
            passes,
            max_orientation_combos: a.score.max_combos,
            threshold: a.threshold,
            per_class: a.per_class,
            collapse: a.collapse,
            repair: a.repair,
            lenient_tables: a.score.lenient_tables,
        },
        means: means(&documents, passes),
        documents,
        skipped: Skipped {
            missing_gt,
            missing_pred,
        },
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(&a.out, &(json + "\n"))?;
    print_summary(&report);
    Ok(())
}

fn print_summary(r: &EvalReport) {
    let mut header = format!("{:<24} {:>8}", "doc", "nTED");
    for k in 1..=r.config.passes {
        header.push_str(&format!(" {:>9}", format!("GAnTED{k}")));
    }
    header.push_str(&format!(" {:>7} {:>7}", "ent F", "rel F"));
    println!("{header}");
    let row = |name: &str, nted: f64, g: &[f64], ef: f64, rf: f64| {
        let mut line = format!("{name:<24} {nted:>8.2}");
        for v in g {
            line.push_str(&format!(" {v:>9.2}"));
        }
        line.push_str(&format!(" {ef:>7.3} {rf:>7.3}"));
        line
    };
    for d in &r.documents {
        println!(
            "{}",
            row(&d.doc, d.nted, &d.ganted, d.entities.micro.f_measure, d.relationships.f_measure)
        );
    }
    let m = &r.means;
    println!("{}", row("mean", m.nted, &m.ganted, m.entity_f, m.relationship_f));
}
