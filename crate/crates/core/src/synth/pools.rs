//! Text pools the generator draws from.
//!
//! A pool directory may hold `labels.txt`, `label_values.tsv` (label, tab,
//! value), `titles.txt`, `words.txt` and `stop_words.txt`. Missing files are
//! treated as empty.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use super::rng::SplitMix64;

pub const SEED_LABELS: [&str; 3] = ["Name:", "Location:", "Details:"];
pub const DATE_LABEL: &str = "Date:";
pub const DATE_PAIRS: usize = 60;
pub const DEFAULT_NUMERIC_LABEL_CAP: f64 = 0.002;

const DATE_SEED: u64 = 0x0DA7_E5EE_D000_0001;
const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

#[derive(Debug, thiserror::Error)]
pub enum PoolError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentPools {
    pub labels: Vec<String>,
    pub label_value_pairs: Vec<(String, String)>,
    pub titles: Vec<String>,
    pub words: Vec<String>,
    pub stop_words: BTreeSet<String>,
    pub numeric_label_cap: f64,
    content_words: Vec<String>,
}

/// Renders a date in one of the six supported formats.
pub fn format_date(format: usize, year: i64, month: usize, day: i64) -> String {
    let name = MONTHS[month - 1];
    let short = &name[..3];
    match format % 6 {
        0 => format!("{day} {short} {year}"),
        1 => format!("{month:02}/{day:02}/{year}"),
        2 => format!("{year}-{month:02}-{day:02}"),
        3 => format!("{name} {day}, {year}"),
        4 => format!("{day:02}/{month:02}/{:02}", year % 100),
        _ => format!("{short} {day} {year}"),
    }
}

/// The 60 seeded "Date:" pairs, ten per format.
pub fn date_pairs() -> Vec<(String, String)> {
    let mut rng = SplitMix64::new(DATE_SEED);
    let mut out = Vec::with_capacity(DATE_PAIRS);
    for i in 0..DATE_PAIRS {
        let year = rng.int_in(1950, 2020);
        let month = rng.int_in(1, 12) as usize;
        let day = rng.int_in(1, 28);
        out.push((DATE_LABEL.to_string(), format_date(i % 6, year, month, day)));
    }
    out
}

fn has_digit(s: &str) -> bool {
    s.chars().any(char::is_numeric)
}

fn dedupe<T: Clone + Eq + std::hash::Hash>(items: Vec<T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

/// Keeps an evenly spread subset of the numeric items so that they make up
/// at most `cap` of the result.
fn cap_numeric<T>(items: Vec<T>, cap: f64, is_numeric: impl Fn(&T) -> bool) -> Vec<T> {
    let numeric = items.iter().filter(|x| is_numeric(x)).count();
    let plain = items.len() - numeric;
    let allowed = if cap >= 1.0 {
        numeric
    } else {
        ((cap * plain as f64) / (1.0 - cap)).floor() as usize
    };
    if numeric <= allowed {
        return items;
    }
    let keep: HashSet<usize> = (0..allowed).map(|j| j * numeric / allowed.max(1)).collect();
    let mut k = 0;
    items
        .into_iter()
        .filter(|x| {
            if !is_numeric(x) {
                return true;
            }
            let kept = keep.contains(&k);
            k += 1;
            kept
        })
        .collect()
}

impl ContentPools {
    /// Builds pools from raw lists: removes duplicates, adds missing seed
    /// entries and down-samples labels containing digits.
    pub fn from_parts(
        labels: Vec<String>,
        label_value_pairs: Vec<(String, String)>,
        titles: Vec<String>,
        words: Vec<String>,
        stop_words: impl IntoIterator<Item = String>,
        numeric_label_cap: f64,
    ) -> ContentPools {
        let mut all_labels: Vec<String> = SEED_LABELS.iter().map(|s| s.to_string()).collect();
        all_labels.extend(labels);
        let mut all_pairs = date_pairs();
        all_pairs.extend(label_value_pairs);

        let labels = cap_numeric(dedupe(all_labels), numeric_label_cap, |l| has_digit(l));
        let label_value_pairs =
            cap_numeric(dedupe(all_pairs), numeric_label_cap, |(l, _)| has_digit(l));
        let stop_words: BTreeSet<String> = stop_words.into_iter().map(|w| w.to_lowercase()).collect();
        let words = dedupe(words);
        let content_words = words
            .iter()
            .filter(|w| !stop_words.contains(&w.to_lowercase()))
            .cloned()
            .collect();
        ContentPools {
            labels,
            label_value_pairs,
            titles: dedupe(titles),
            words,
            stop_words,
            numeric_label_cap,
            content_words,
        }
    }

    /// The small pool set bundled with the library.
    pub fn builtin() -> ContentPools {
        let lines = |s: &str| -> Vec<String> {
            s.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect()
        };
        let pairs = include_str!("../../data/label_values.tsv")
            .lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
            .collect();
        ContentPools::from_parts(
            lines(include_str!("../../data/labels.txt")),
            pairs,
            lines(include_str!("../../data/titles.txt")),
            lines(include_str!("../../data/words.txt")),
            lines(include_str!("../../data/stop_words.txt")),
            DEFAULT_NUMERIC_LABEL_CAP,
        )
    }

    /// Words that are not stop words.
    pub fn content_words(&self) -> &[String] {
        &self.content_words
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty() && self.label_value_pairs.is_empty()
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, PoolError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(PoolError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let mut out = Vec::new();
    for (i, raw) in bytes.split(|b| *b == b'\n').enumerate() {
        let text = std::str::from_utf8(raw).map_err(|_| PoolError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            reason: "invalid UTF-8".into(),
        })?;
        let text = text.trim();
        if !text.is_empty() {
            out.push((i + 1, text.to_string()));
        }
    }
    Ok(out)
}

fn plain_list(path: &Path) -> Result<Vec<String>, PoolError> {
    read_lines(path)?
        .into_iter()
        .map(|(line, text)| {
            if text.contains('\t') {
                Err(PoolError::Format {
                    path: path.to_path_buf(),
                    line,
                    reason: "unexpected tab in a one-column file".into(),
                })
            } else {
                Ok(text)
            }
        })
        .collect()
}

/// Loads pools from a directory with the default numeric-label cap.
pub fn load_pools(dir: &Path) -> Result<ContentPools, PoolError> {
    load_pools_with_cap(dir, DEFAULT_NUMERIC_LABEL_CAP)
}

pub fn load_pools_with_cap(dir: &Path, numeric_label_cap: f64) -> Result<ContentPools, PoolError> {
    if !dir.is_dir() {
        return Err(PoolError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    let tsv = dir.join("label_values.tsv");
    let pairs = read_lines(&tsv)?
        .into_iter()
        .map(|(line, text)| match text.split_once('\t') {
            Some((l, v)) if !l.trim().is_empty() => Ok((l.trim().to_string(), v.trim().to_string())),
            Some(_) => Err(PoolError::Format {
                path: tsv.clone(),
                line,
                reason: "empty label".into(),
            }),
            None => Err(PoolError::Format {
                path: tsv.clone(),
                line,
                reason: "expected label<TAB>value".into(),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ContentPools::from_parts(
        plain_list(&dir.join("labels.txt"))?,
        pairs,
        plain_list(&dir.join("titles.txt"))?,
        plain_list(&dir.join("words.txt"))?,
        plain_list(&dir.join("stop_words.txt"))?,
        numeric_label_cap,
    ))
}
