use std::path::{Path, PathBuf};

use formkit::synth::{gen_page, load_pools, page_seed, render_svg, ContentPools, PageConfig};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::GenArgs;
use crate::error::{write_text, CliError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
struct GenConfig {
    seed: u64,
    count: u64,
    width: f64,
    height: f64,
    margin: f64,
    table_probability: f64,
    svg: bool,
    /// Digest of the pool contents, so custom pools change the hash.
    pools_sha256: String,
}

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    schema_version: u32,
    config: GenConfig,
    config_sha256: String,
    files: Vec<FileEntry>,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn pools_digest(p: &ContentPools) -> String {
    let mut h = Sha256::new();
    let mut feed = |tag: &str, items: &mut dyn Iterator<Item = String>| {
        h.update(tag.as_bytes());
        for s in items {
            h.update(s.as_bytes());
            h.update([0u8]);
        }
    };
    feed("labels", &mut p.labels.iter().cloned());
    feed("pairs", &mut p.label_value_pairs.iter().map(|(l, v)| format!("{l}\t{v}")));
    feed("titles", &mut p.titles.iter().cloned());
    feed("words", &mut p.words.iter().cloned());
    feed("stop", &mut p.stop_words.iter().cloned());
    feed("cap", &mut std::iter::once(p.numeric_label_cap.to_string()));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn page_files(out: &Path, i: u64, cfg: &PageConfig, pools: &ContentPools, svg: bool) -> Vec<(PathBuf, String)> {
    let page = gen_page(cfg, pools);
    let base = format!("page_{i:05}");
    let mut files = vec![
        (out.join(format!("{base}.gt.json")), page.gt_json() + "\n"),
        (out.join(format!("{base}.layout.json")), page.layout_json() + "\n"),
    ];
    if svg {
        files.push((out.join(format!("{base}.svg")), render_svg(&page)));
    }
    files
}

pub fn run(a: &GenArgs) -> Result<(), CliError> {
    let base = PageConfig {
        width: a.width,
        height: a.height,
        table_probability: a.table_probability,
        ..PageConfig::default()
    };
    base.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let pools = match &a.pools {
        Some(dir) => load_pools(dir).map_err(|e| match e {
            formkit::synth::PoolError::Io { path, source } => CliError::Io { path, source },
            formkit::synth::PoolError::Format { path, line, reason } => {
                CliError::parse(&path, format!("line {line}: {reason}"))
            }
        })?,
        None => ContentPools::builtin(),
    };
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;

    let pages: Vec<Vec<(PathBuf, String)>> = (0..a.count)
        .into_par_iter()
        .map(|i| {
            let cfg = PageConfig {
                seed: page_seed(a.seed, i),
                ..base.clone()
            };
            page_files(&a.out, i, &cfg, &pools, a.svg)
        })
        .collect();

    let mut files = Vec::new();
    for (path, text) in pages.iter().flatten() {
        write_text(path, text)?;
        files.push(FileEntry {
            name: path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string(),
            bytes: text.len(),
            sha256: hex_digest(text.as_bytes()),
        });
    }
    let config = GenConfig {
        seed: a.seed,
        count: a.count,
        width: base.width,
        height: base.height,
        margin: base.margin,
        table_probability: base.table_probability,
        svg: a.svg,
        pools_sha256: pools_digest(&pools),
    };
    let config_sha256 = hex_digest(serde_json::to_string(&config).expect("config serializes").as_bytes());
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config,
        config_sha256,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&a.out.join("manifest.json"), &(json + "\n"))?;
    println!("wrote {} pages to {}", a.count, a.out.display());
    Ok(())
}
