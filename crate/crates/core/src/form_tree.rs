//! Hierarchical form-parse model and its JSON codec.
//!
//! A document is a list of root nodes written in read order. Each entity is a
//! single-key object `{"text": "class"}`; headers carry linked entities under
//! `"contents"`, questions carry their answers as a list of strings under
//! `"answers"`. Tables are objects with `"row headers"`, `"column headers"` and
//! a row-major `"cells"` matrix:
//!
//! ```text
//! [{"Title Text": "header", "contents":[{"Q1": "question"}, {"Q2": "question"}]},
//!  {"Question text": "question", "answers":["A1", "A2"]},
//!  {"row headers":["R1", "R2"], "column headers":["C1", "C2"], "cells":[["r1 c1", "r1 c2"], ["r2 c1", "r2 c2"]]}]
//! ```
//!
//! A titled table is written as a header entity whose only content is the
//! table object; the parser folds that shape back into a titled [`Table`].

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub(crate) const CONTENTS: &str = "contents";
pub(crate) const ANSWERS: &str = "answers";
pub(crate) const ROW_HEADERS: &str = "row headers";
pub(crate) const COL_HEADERS: &str = "column headers";
pub(crate) const CELLS: &str = "cells";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormTreeError {
    #[error("invalid JSON: {0}")]
    InvalidJson(String),
    #[error("malformed parse at {path}: {reason}")]
    MalformedParse { path: String, reason: String },
    #[error("no orientation given for table {0}")]
    MissingOrientation(usize),
}

fn malformed(path: &str, reason: impl Into<String>) -> FormTreeError {
    FormTreeError::MalformedParse {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Semantic role of a piece of form text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityClass {
    Header,
    Question,
    Answer,
    Other,
}

impl EntityClass {
    pub const ALL: [EntityClass; 4] = [
        EntityClass::Header,
        EntityClass::Question,
        EntityClass::Answer,
        EntityClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityClass::Header => "header",
            EntityClass::Question => "question",
            EntityClass::Answer => "answer",
            EntityClass::Other => "other",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "header" => Some(EntityClass::Header),
            "question" => Some(EntityClass::Question),
            "answer" => Some(EntityClass::Answer),
            "other" => Some(EntityClass::Other),
            _ => None,
        }
    }
}

impl fmt::Display for EntityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub text: String,
    pub class: EntityClass,
    /// Linked entities of a header (`contents`).
    pub children: Vec<ParseNode>,
    /// Answer strings of a question.
    pub answers: Vec<String>,
}

impl Entity {
    pub fn new(text: impl Into<String>, class: EntityClass) -> Self {
        Entity {
            text: text.into(),
            class,
            children: Vec::new(),
            answers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub title: Option<String>,
    pub row_headers: Vec<String>,
    pub col_headers: Vec<String>,
    /// Row-major; `None` when the cell transcriptions are unavailable.
    pub cells: Option<Vec<Vec<String>>>,
}

impl Table {
    /// Swaps rows and columns.
    pub fn transposed(&self) -> Table {
        let cells = self.cells.as_ref().map(|rows| {
            (0..self.col_headers.len())
                .map(|c| rows.iter().map(|row| row[c].clone()).collect())
                .collect()
        });
        Table {
            title: self.title.clone(),
            row_headers: self.col_headers.clone(),
            col_headers: self.row_headers.clone(),
            cells,
        }
    }

    fn is_rectangular(&self) -> bool {
        match &self.cells {
            None => true,
            Some(rows) => {
                rows.len() == self.row_headers.len()
                    && rows.iter().all(|r| r.len() == self.col_headers.len())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseNode {
    Entity(Entity),
    Table(Table),
}

impl ParseNode {
    pub fn entity(text: impl Into<String>, class: EntityClass) -> Self {
        ParseNode::Entity(Entity::new(text, class))
    }

    pub fn header(text: impl Into<String>, contents: Vec<ParseNode>) -> Self {
        let mut e = Entity::new(text, EntityClass::Header);
        e.children = contents;
        ParseNode::Entity(e)
    }

    pub fn question<S: Into<String>>(text: impl Into<String>, answers: Vec<S>) -> Self {
        let mut e = Entity::new(text, EntityClass::Question);
        e.answers = answers.into_iter().map(Into::into).collect();
        ParseNode::Entity(e)
    }
}

/// A parsed document: root nodes in read order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseTree {
    pub roots: Vec<ParseNode>,
}

impl ParseTree {
    pub fn new(roots: Vec<ParseNode>) -> Self {
        ParseTree { roots }
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Tables in pre-order, the indexing used by orientation maps.
    pub fn tables(&self) -> Vec<&Table> {
        fn walk<'a>(nodes: &'a [ParseNode], out: &mut Vec<&'a Table>) {
            for node in nodes {
                match node {
                    ParseNode::Table(t) => out.push(t),
                    ParseNode::Entity(e) => walk(&e.children, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.roots, &mut out);
        out
    }

    pub fn table_count(&self) -> usize {
        self.tables().len()
    }

    /// Checks the structural invariants of every node.
    pub fn validate(&self) -> Result<(), FormTreeError> {
        fn walk(nodes: &[ParseNode], path: &str) -> Result<(), FormTreeError> {
            for (i, node) in nodes.iter().enumerate() {
                let here = format!("{path}[{i}]");
                match node {
                    ParseNode::Table(t) => {
                        if !t.is_rectangular() {
                            return Err(malformed(&here, "ragged cell matrix"));
                        }
                    }
                    ParseNode::Entity(e) => {
                        if !e.answers.is_empty() && e.class != EntityClass::Question {
                            return Err(malformed(&here, "answers on a non-question entity"));
                        }
                        if !e.children.is_empty() && e.class != EntityClass::Header {
                            return Err(malformed(&here, "contents on a non-header entity"));
                        }
                        walk(&e.children, &format!("{here}.contents"))?;
                    }
                }
            }
            Ok(())
        }
        walk(&self.roots, "$")
    }
}

/// Plain ordered labeled tree, the input of the edit distances.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LabelTree {
    pub label: String,
    pub children: Vec<LabelTree>,
}

impl LabelTree {
    pub fn leaf(label: impl Into<String>) -> Self {
        LabelTree {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<LabelTree>) -> Self {
        LabelTree {
            label: label.into(),
            children,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(LabelTree::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(LabelTree::depth).max().unwrap_or(0)
    }
}

impl fmt::Display for LabelTree {
    /// Bracket notation, e.g. `{root{a}{b{c}}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}", self.label)?;
        for c in &self.children {
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableOrientation {
    RowMajor,
    ColMajor,
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses the form JSON format. With `lenient_tables` a table object may omit
/// `"cells"`.
pub fn parse_json(input: &str, lenient_tables: bool) -> Result<ParseTree, FormTreeError> {
    let value: Value =
        serde_json::from_str(input).map_err(|e| FormTreeError::InvalidJson(e.to_string()))?;
    parse_value(&value, lenient_tables)
}

/// Same as [`parse_json`] for an already decoded value.
pub fn parse_value(value: &Value, lenient_tables: bool) -> Result<ParseTree, FormTreeError> {
    let roots = match value {
        Value::Array(items) => parse_list(items, "$", lenient_tables)?,
        Value::Object(obj) => vec![parse_object(obj, "$", lenient_tables)?],
        _ => return Err(malformed("$", "top level must be an array or an object")),
    };
    Ok(ParseTree { roots })
}

fn parse_list(items: &[Value], path: &str, lenient: bool) -> Result<Vec<ParseNode>, FormTreeError> {
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let here = format!("{path}[{i}]");
            match item {
                Value::Object(obj) => parse_object(obj, &here, lenient),
                _ => Err(malformed(&here, "expected an object")),
            }
        })
        .collect()
}

fn string_list(value: &Value, path: &str) -> Result<Vec<String>, FormTreeError> {
    let items = value
        .as_array()
        .ok_or_else(|| malformed(path, "expected a list of strings"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| malformed(&format!("{path}[{i}]"), "expected a string"))
        })
        .collect()
}

fn is_table_object(obj: &Map<String, Value>) -> bool {
    matches!(obj.get(ROW_HEADERS), Some(Value::Array(_)))
        && matches!(obj.get(COL_HEADERS), Some(Value::Array(_)))
}

fn parse_table(
    obj: &Map<String, Value>,
    path: &str,
    lenient: bool,
) -> Result<Table, FormTreeError> {
    for key in obj.keys() {
        if key != ROW_HEADERS && key != COL_HEADERS && key != CELLS {
            return Err(malformed(path, format!("unexpected key {key:?} in table")));
        }
    }
    let row_headers = string_list(&obj[ROW_HEADERS], &format!("{path}.row headers"))?;
    let col_headers = string_list(&obj[COL_HEADERS], &format!("{path}.column headers"))?;
    let cells = match obj.get(CELLS) {
        None if lenient => None,
        None => return Err(malformed(path, "table without cells")),
        Some(v) => {
            let cpath = format!("{path}.cells");
            let rows = v
                .as_array()
                .ok_or_else(|| malformed(&cpath, "expected a list of rows"))?;
            let rows = rows
                .iter()
                .enumerate()
                .map(|(i, r)| string_list(r, &format!("{cpath}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if rows.len() != row_headers.len() {
                return Err(malformed(
                    &cpath,
                    format!(
                        "ragged cell matrix: {} rows for {} row headers",
                        rows.len(),
                        row_headers.len()
                    ),
                ));
            }
            if let Some((i, r)) = rows
                .iter()
                .enumerate()
                .find(|(_, r)| r.len() != col_headers.len())
            {
                return Err(malformed(
                    &format!("{cpath}[{i}]"),
                    format!(
                        "ragged cell matrix: {} cells for {} column headers",
                        r.len(),
                        col_headers.len()
                    ),
                ));
            }
            Some(rows)
        }
    };
    Ok(Table {
        title: None,
        row_headers,
        col_headers,
        cells,
    })
}

fn parse_object(
    obj: &Map<String, Value>,
    path: &str,
    lenient: bool,
) -> Result<ParseNode, FormTreeError> {
    if is_table_object(obj) {
        return parse_table(obj, path, lenient).map(ParseNode::Table);
    }

    let mut entity: Option<(String, EntityClass)> = None;
    let mut contents: Option<&Vec<Value>> = None;
    let mut answers: Option<&Value> = None;
    for (key, value) in obj {
        match (key.as_str(), value) {
            (CONTENTS, Value::Array(items)) => contents = Some(items),
            (ANSWERS, Value::Array(_)) => answers = Some(value),
            (_, Value::String(class)) => {
                if entity.is_some() {
                    return Err(malformed(path, format!("second entity key {key:?}")));
                }
                let class = EntityClass::from_name(class).ok_or_else(|| {
                    malformed(path, format!("unknown class {class:?} for {key:?}"))
                })?;
                entity = Some((key.clone(), class));
            }
            _ => {
                return Err(malformed(
                    path,
                    format!("unexpected key {key:?} (class value must be text)"),
                ))
            }
        }
    }
    let (text, class) = entity.ok_or_else(|| malformed(path, "object has no entity key"))?;
    let mut e = Entity::new(text, class);
    if let Some(items) = contents {
        if class != EntityClass::Header && !items.is_empty() {
            return Err(malformed(path, "contents on a non-header entity"));
        }
        e.children = parse_list(items, &format!("{path}.contents"), lenient)?;
    }
    if let Some(list) = answers {
        let list = string_list(list, &format!("{path}.answers"))?;
        if class != EntityClass::Question && !list.is_empty() {
            return Err(malformed(path, "answers on a non-question entity"));
        }
        e.answers = list;
    }

    // A header holding exactly one untitled table is how a titled table is written.
    if e.class == EntityClass::Header && e.answers.is_empty() && e.children.len() == 1 {
        if let ParseNode::Table(t) = &e.children[0] {
            if t.title.is_none() {
                let mut t = t.clone();
                t.title = Some(e.text);
                return Ok(ParseNode::Table(t));
            }
        }
    }
    Ok(ParseNode::Entity(e))
}

// ---------------------------------------------------------------------------
// Serialization

fn push_str_lit(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serialization cannot fail"));
}

fn push_str_list(out: &mut String, items: &[String]) {
    out.push('[');
    for (i, s) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_str_lit(out, s);
    }
    out.push(']');
}

fn write_table_object(out: &mut String, t: &Table) {
    out.push('{');
    push_str_lit(out, ROW_HEADERS);
    out.push(':');
    push_str_list(out, &t.row_headers);
    out.push_str(", ");
    push_str_lit(out, COL_HEADERS);
    out.push(':');
    push_str_list(out, &t.col_headers);
    if let Some(rows) = &t.cells {
        out.push_str(", ");
        push_str_lit(out, CELLS);
        out.push_str(":[");
        for (i, row) in rows.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            push_str_list(out, row);
        }
        out.push(']');
    }
    out.push('}');
}

fn write_node(out: &mut String, node: &ParseNode) {
    match node {
        ParseNode::Table(t) => match &t.title {
            None => write_table_object(out, t),
            Some(title) => {
                out.push('{');
                push_str_lit(out, title);
                out.push_str(": \"header\", \"contents\":[");
                write_table_object(out, t);
                out.push_str("]}");
            }
        },
        ParseNode::Entity(e) => {
            out.push('{');
            push_str_lit(out, &e.text);
            out.push_str(": ");
            push_str_lit(out, e.class.as_str());
            if !e.children.is_empty() {
                out.push_str(", \"contents\":[");
                for (i, c) in e.children.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_node(out, c);
                }
                out.push(']');
            }
            if !e.answers.is_empty() {
                out.push_str(", \"answers\":");
                push_str_list(out, &e.answers);
            }
            out.push('}');
        }
    }
}

/// Serializes one node as a JSON object.
pub fn serialize_node(node: &ParseNode) -> String {
    let mut out = String::new();
    write_node(&mut out, node);
    out
}

/// Serializes a document as a JSON array of root objects.
pub fn serialize_json(tree: &ParseTree) -> String {
    let mut out = String::from("[");
    for (i, node) in tree.roots.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_node(&mut out, node);
    }
    out.push(']');
    out
}

// ---------------------------------------------------------------------------
// Label trees

/// Converts a parse into a label tree under an empty-label super-root.
///
/// `orientations[i]` picks the conversion of the i-th table in pre-order.
/// Classes are dropped; answers become leaves under their question.
pub fn to_label_tree(
    tree: &ParseTree,
    orientations: &[TableOrientation],
) -> Result<LabelTree, FormTreeError> {
    let mut next_table = 0;
    let children = convert_nodes(&tree.roots, orientations, &mut next_table)?;
    Ok(LabelTree::node("", children))
}

fn convert_nodes(
    nodes: &[ParseNode],
    orientations: &[TableOrientation],
    next_table: &mut usize,
) -> Result<Vec<LabelTree>, FormTreeError> {
    let mut out = Vec::with_capacity(nodes.len());
    for node in nodes {
        match node {
            ParseNode::Entity(e) => {
                let mut children = convert_nodes(&e.children, orientations, next_table)?;
                children.extend(e.answers.iter().map(LabelTree::leaf));
                out.push(LabelTree::node(e.text.clone(), children));
            }
            ParseNode::Table(t) => {
                let idx = *next_table;
                *next_table += 1;
                let orientation = *orientations
                    .get(idx)
                    .ok_or(FormTreeError::MissingOrientation(idx))?;
                out.push(table_to_label_tree(t, orientation));
            }
        }
    }
    Ok(out)
}

fn table_to_label_tree(t: &Table, orientation: TableOrientation) -> LabelTree {
    let (major, minor) = match orientation {
        TableOrientation::RowMajor => (&t.row_headers, &t.col_headers),
        TableOrientation::ColMajor => (&t.col_headers, &t.row_headers),
    };
    let mut children = Vec::with_capacity(1 + major.len() + minor.len());
    if let Some(title) = &t.title {
        children.push(LabelTree::leaf(title.clone()));
    }
    for (i, h) in major.iter().enumerate() {
        let cells = match &t.cells {
            None => Vec::new(),
            Some(rows) => match orientation {
                TableOrientation::RowMajor => rows[i].iter().map(LabelTree::leaf).collect(),
                TableOrientation::ColMajor => rows.iter().map(|r| LabelTree::leaf(&r[i])).collect(),
            },
        };
        children.push(LabelTree::node(h.clone(), cells));
    }
    children.extend(minor.iter().map(LabelTree::leaf));
    LabelTree::node("", children)
}

// ---------------------------------------------------------------------------
// Stats

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub header: usize,
    pub question: usize,
    pub answer: usize,
    pub other: usize,
    pub tables: usize,
    /// Answer strings listed under questions.
    pub answers: usize,
}

pub fn tree_stats(tree: &ParseTree) -> TreeStats {
    fn walk(nodes: &[ParseNode], s: &mut TreeStats) {
        for node in nodes {
            match node {
                ParseNode::Table(_) => s.tables += 1,
                ParseNode::Entity(e) => {
                    match e.class {
                        EntityClass::Header => s.header += 1,
                        EntityClass::Question => s.question += 1,
                        EntityClass::Answer => s.answer += 1,
                        EntityClass::Other => s.other += 1,
                    }
                    s.answers += e.answers.len();
                    walk(&e.children, s);
                }
            }
        }
    }
    let mut s = TreeStats::default();
    walk(&tree.roots, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER_EX: &str =
        r#"{"Title Text": "header", "contents":[{"Q1": "question"}, {"Q2": "question"}]}"#;
    const ANSWERS_EX: &str = r#"{"Question text": "question", "answers":["A1", "A2"]}"#;
    const TABLE_EX: &str = r#"{"row headers":["R1", "R2"], "column headers":["C1", "C2"], "cells":[["r1 c1", "r1 c2"], ["r2 c1", "r2 c2"]]}"#;

    fn lt(label: &str, children: Vec<LabelTree>) -> LabelTree {
        LabelTree::node(label, children)
    }

    fn leaf(label: &str) -> LabelTree {
        LabelTree::leaf(label)
    }

    #[test]
    fn parses_header_contents() {
        let t = parse_json(HEADER_EX, false).unwrap();
        assert_eq!(
            t.roots,
            vec![ParseNode::header(
                "Title Text",
                vec![
                    ParseNode::entity("Q1", EntityClass::Question),
                    ParseNode::entity("Q2", EntityClass::Question)
                ]
            )]
        );
    }

    #[test]
    fn parses_answers() {
        let t = parse_json(ANSWERS_EX, false).unwrap();
        assert_eq!(
            t.roots,
            vec![ParseNode::question("Question text", vec!["A1", "A2"])]
        );
    }

    #[test]
    fn parses_table() {
        let t = parse_json(TABLE_EX, false).unwrap();
        let ParseNode::Table(table) = &t.roots[0] else {
            panic!("expected a table")
        };
        assert_eq!(table.cells.as_ref().unwrap()[1][0], "r2 c1");
        assert_eq!(table.row_headers, vec!["R1", "R2"]);
    }

    #[test]
    fn empty_document() {
        assert!(parse_json("[]", false).unwrap().is_empty());
        assert_eq!(serialize_json(&ParseTree::default()), "[]");
    }

    #[test]
    fn table_without_cells_needs_lenient_mode() {
        let naf = r#"[{"row headers":["R1"], "column headers":["C1", "C2"]}]"#;
        assert!(matches!(
            parse_json(naf, false),
            Err(FormTreeError::MalformedParse { .. })
        ));
        let t = parse_json(naf, true).unwrap();
        let ParseNode::Table(table) = &t.roots[0] else {
            panic!()
        };
        assert!(table.cells.is_none());
        assert_eq!(serialize_json(&t), naf);
    }

    #[test]
    fn malformed_inputs_report_path() {
        let ragged = r#"[{"A": "other"}, {"row headers":["R1"], "column headers":["C1", "C2"], "cells":[["x"]]}]"#;
        match parse_json(ragged, false) {
            Err(FormTreeError::MalformedParse { path, reason }) => {
                assert_eq!(path, "$[1].cells[0]");
                assert!(reason.contains("ragged"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let numeric_class = r#"[{"A": 3}]"#;
        assert!(matches!(
            parse_json(numeric_class, false),
            Err(FormTreeError::MalformedParse { .. })
        ));
        let unknown_class = r#"[{"A": "label"}]"#;
        assert!(parse_json(unknown_class, false).is_err());
        let question_contents = r#"[{"A": "question", "contents":[{"B": "answer"}]}]"#;
        match parse_json(question_contents, false) {
            Err(FormTreeError::MalformedParse { path, .. }) => assert_eq!(path, "$[0]"),
            other => panic!("unexpected {other:?}"),
        }
        let header_answers = r#"[{"A": "header", "answers":["x"]}]"#;
        assert!(parse_json(header_answers, false).is_err());
        assert!(parse_json(r#"[{"contents": []}]"#, false).is_err());
        assert!(parse_json(r#""text""#, false).is_err());
        assert!(matches!(
            parse_json("[{", false),
            Err(FormTreeError::InvalidJson(_))
        ));
    }

    #[test]
    fn keys_named_like_fields_can_be_entity_text() {
        let t = parse_json(r#"[{"answers": "question", "answers":["x"]}]"#, false);
        // Duplicate keys collapse to the last one, leaving no entity key.
        assert!(t.is_err());
        let t = parse_json(r#"[{"contents": "other"}]"#, false).unwrap();
        assert_eq!(t.roots, vec![ParseNode::entity("contents", EntityClass::Other)]);
    }

    #[test]
    fn serializes_question_exactly() {
        let node = ParseNode::question("Date:", vec!["23 Mar 1999"]);
        assert_eq!(
            serialize_node(&node),
            r#"{"Date:": "question", "answers":["23 Mar 1999"]}"#
        );
    }

    #[test]
    fn serializes_reference_examples_verbatim() {
        for ex in [HEADER_EX, ANSWERS_EX, TABLE_EX] {
            let t = parse_json(ex, false).unwrap();
            assert_eq!(serialize_node(&t.roots[0]), ex);
        }
    }

    #[test]
    fn other_class_and_escaping_round_trip() {
        let t = ParseTree::new(vec![
            ParseNode::entity("say \"hi\"\n", EntityClass::Other),
            ParseNode::entity("ünïcödé ✓", EntityClass::Answer),
        ]);
        let s = serialize_json(&t);
        assert!(s.starts_with(r#"[{"say \"hi\"\n": "other"}"#));
        assert_eq!(parse_json(&s, false).unwrap(), t);
    }

    #[test]
    fn titled_table_round_trips_through_header_embedding() {
        let table = Table {
            title: Some("Totals".into()),
            row_headers: vec!["R1".into()],
            col_headers: vec!["C1".into()],
            cells: Some(vec![vec!["".into()]]),
        };
        let t = ParseTree::new(vec![ParseNode::Table(table)]);
        let s = serialize_json(&t);
        assert_eq!(
            s,
            r#"[{"Totals": "header", "contents":[{"row headers":["R1"], "column headers":["C1"], "cells":[[""]]}]}]"#
        );
        assert_eq!(parse_json(&s, false).unwrap(), t);
    }

    #[test]
    fn row_major_conversion() {
        let t = parse_json(TABLE_EX, false).unwrap();
        let lt_tree = to_label_tree(&t, &[TableOrientation::RowMajor]).unwrap();
        let expected = lt(
            "",
            vec![lt(
                "",
                vec![
                    lt("R1", vec![leaf("r1 c1"), leaf("r1 c2")]),
                    lt("R2", vec![leaf("r2 c1"), leaf("r2 c2")]),
                    leaf("C1"),
                    leaf("C2"),
                ],
            )],
        );
        assert_eq!(lt_tree, expected);
    }

    #[test]
    fn col_major_conversion() {
        let t = parse_json(TABLE_EX, false).unwrap();
        let lt_tree = to_label_tree(&t, &[TableOrientation::ColMajor]).unwrap();
        let expected = lt(
            "",
            vec![lt(
                "",
                vec![
                    lt("C1", vec![leaf("r1 c1"), leaf("r2 c1")]),
                    lt("C2", vec![leaf("r1 c2"), leaf("r2 c2")]),
                    leaf("R1"),
                    leaf("R2"),
                ],
            )],
        );
        assert_eq!(lt_tree, expected);
    }

    #[test]
    fn cell_less_table_has_childless_headers_and_title_first() {
        let t = ParseTree::new(vec![ParseNode::Table(Table {
            title: Some("T".into()),
            row_headers: vec!["R".into()],
            col_headers: vec!["C".into()],
            cells: None,
        })]);
        let got = to_label_tree(&t, &[TableOrientation::RowMajor]).unwrap();
        assert_eq!(
            got,
            lt("", vec![lt("", vec![leaf("T"), leaf("R"), leaf("C")])])
        );
    }

    #[test]
    fn entity_conversion_and_missing_orientation() {
        let t = parse_json(&format!("[{HEADER_EX}, {ANSWERS_EX}]"), false).unwrap();
        let got = to_label_tree(&t, &[]).unwrap();
        assert_eq!(
            got,
            lt(
                "",
                vec![
                    lt("Title Text", vec![leaf("Q1"), leaf("Q2")]),
                    lt("Question text", vec![leaf("A1"), leaf("A2")]),
                ]
            )
        );
        let with_table = parse_json(&format!("[{TABLE_EX}]"), false).unwrap();
        assert_eq!(
            to_label_tree(&with_table, &[]),
            Err(FormTreeError::MissingOrientation(0))
        );
    }

    #[test]
    fn stats_by_hand() {
        let t = parse_json(HEADER_EX, false).unwrap();
        let s = tree_stats(&t);
        assert_eq!((s.header, s.question, s.answer, s.tables), (1, 2, 0, 0));
        assert_eq!(tree_stats(&ParseTree::default()), TreeStats::default());
        let s = tree_stats(&parse_json(TABLE_EX, false).unwrap());
        assert_eq!(s.tables, 1);
        assert_eq!(s.header + s.question + s.answer + s.other, 0);
        let s = tree_stats(&parse_json(ANSWERS_EX, false).unwrap());
        assert_eq!((s.question, s.answers), (1, 2));
    }

    #[test]
    fn bracket_display() {
        let t = lt("a", vec![leaf("b"), lt("c", vec![leaf("d")])]);
        assert_eq!(t.to_string(), "{a{b}{c{d}}}");
        assert_eq!(t.size(), 4);
        assert_eq!(t.depth(), 3);
    }
}
