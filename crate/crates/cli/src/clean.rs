use formkit::cleanup::{collapse_repeats, CleanupConfig, Repairer};
use formkit::form_tree::{parse_json, to_label_tree, ParseTree, TableOrientation};
use formkit::ganted::{ganted, GantedConfig};
use formkit::edit_metrics::{nted, ted, TedCosts};

use crate::args::{CleanArgs, ScoreArgs, TedArgs};
use crate::error::{read_text, write_text, CliError};

pub fn run_clean(a: &CleanArgs) -> Result<(), CliError> {
    let cfg = CleanupConfig {
        min_period: a.min_period,
        min_reps: a.min_reps,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let input = read_text(&a.input)?;
    let mut text = input.clone();
    if !a.no_collapse {
        let collapsed = collapse_repeats(&text, &cfg);
        if collapsed != text {
            eprintln!(
                "collapse: {} -> {} chars",
                text.chars().count(),
                collapsed.chars().count()
            );
            text = collapsed;
        }
    }
    if !a.no_repair {
        let (repaired, log) = Repairer::default().lenient_tables(a.lenient_tables).repair(&text);
        for e in &log.entries {
            eprintln!("repair: {} at {}: {}", e.rule, e.offset, e.description);
        }
        text = repaired;
    } else if let Err(e) = parse_json(&text, a.lenient_tables) {
        return Err(CliError::parse(&a.input, e));
    }
    match &a.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn ganted_config(s: &ScoreArgs) -> GantedConfig {
    GantedConfig {
        window: s.window,
        passes: s.passes as usize,
        max_orientation_combos: s.max_combos.max(1),
        costs: TedCosts::default(),
    }
}

fn row_major(tree: &ParseTree) -> formkit::form_tree::LabelTree {
    to_label_tree(tree, &vec![TableOrientation::RowMajor; tree.table_count()])
        .expect("one orientation per table")
}

pub fn run_ted(a: &TedArgs) -> Result<(), CliError> {
    let load = |path| -> Result<ParseTree, CliError> {
        parse_json(&read_text(path)?, a.score.lenient_tables).map_err(|e| CliError::parse(path, e))
    };
    let pred = load(&a.pred)?;
    let gt = load(&a.gt)?;
    let cfg = ganted_config(&a.score);
    let (p, g) = (row_major(&pred), row_major(&gt));
    let distance = ted(&p, &g, &cfg.costs);
    let normalized = nted(&p, &g, &cfg.costs);
    let (score, report) = ganted(&pred, &gt, &cfg);
    println!("TED     {}", fmt_num(distance));
    println!("nTED    {}", fmt_num(100.0 * normalized));
    println!("GAnTED  {}", fmt_num(100.0 * score));
    if report.capped {
        eprintln!("warning: orientation combinations capped at {}", cfg.max_orientation_combos);
    }
    Ok(())
}

/// Shortest form that still shows two decimals for fractional values.
pub fn fmt_num(v: f64) -> String {
    if v == v.trunc() {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}
