//! Evaluation and synthetic-data toolkit for structured form parsing.
//!
//! * [`form_tree`]: the hierarchical JSON parse format and its label-tree view.
//! * [`edit_metrics`]: normalized Levenshtein, tree edit distance, nTED.
//! * [`ganted`]: greedily-aligned nTED with table-orientation search.
//! * [`cleanup`]: repeat collapsing and JSON repair for raw model output.
//! * [`alignment`]: entity/relationship F-measure and word alignment.
//! * [`reading_order`]: read order of top-level layout elements.
//! * [`synth`]: seeded synthetic form pages with ground truth.

pub mod alignment;
pub mod cleanup;
pub mod edit_metrics;
pub mod form_tree;
pub mod ganted;
pub mod reading_order;
pub mod synth;

pub use alignment::{
    align_entities, align_word_sequences, entity_prf, relationship_prf, EntityScores, MatchConfig, Prf,
};
pub use cleanup::{collapse_repeats, repair_json, CleanupConfig, RepairLog, Repairer};
pub use edit_metrics::{levenshtein_norm, nted, ted, ted_bruteforce, TedCosts};
pub use form_tree::{
    parse_json, serialize_json, to_label_tree, EntityClass, LabelTree, ParseNode, ParseTree,
    Table, TableOrientation,
};
pub use ganted::{ganted, greedy_align_pass, GantedConfig};
pub use reading_order::{order_elements, BBox, LayoutElement, ReadOrderConfig};
pub use synth::{gen_page, render_svg, ContentPools, FormPage, PageConfig};
