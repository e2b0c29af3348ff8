//! Post-processing for raw model output: degenerate repeat collapse and
//! repair of broken form JSON.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::form_tree::{
    parse_json, serialize_json, Entity, EntityClass, ParseNode, ParseTree, Table, ANSWERS, CELLS,
    COL_HEADERS, CONTENTS, ROW_HEADERS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanupConfig {
    /// Shortest repeated unit, in characters.
    pub min_period: usize,
    /// Fewest consecutive copies that count as degenerate.
    pub min_reps: usize,
}

impl Default for CleanupConfig {
    fn default() -> Self {
        CleanupConfig {
            min_period: 8,
            min_reps: 5,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CleanupError {
    #[error("invalid cleanup config: {0}")]
    InvalidConfig(String),
}

impl CleanupConfig {
    pub fn validate(&self) -> Result<(), CleanupError> {
        if self.min_period < 1 {
            return Err(CleanupError::InvalidConfig("min_period must be at least 1".into()));
        }
        if self.min_reps < 2 {
            return Err(CleanupError::InvalidConfig("min_reps must be at least 2".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Repeat collapse

/// Removes all but the first copy of every run of at least `min_reps`
/// consecutive copies of a unit of at least `min_period` characters, until no
/// such run is left. At each offset the shortest qualifying unit wins.
pub fn collapse_repeats(input: &str, cfg: &CleanupConfig) -> String {
    let min_period = cfg.min_period.max(1);
    let min_reps = cfg.min_reps.max(2);
    let mut chars: Vec<char> = input.chars().collect();
    let mut changed = false;
    while let Some(next) = collapse_pass(&chars, min_period, min_reps) {
        chars = next;
        changed = true;
    }
    if changed {
        chars.into_iter().collect()
    } else {
        input.to_string()
    }
}

fn collapse_pass(chars: &[char], min_period: usize, min_reps: usize) -> Option<Vec<char>> {
    let n = chars.len();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut changed = false;
    while i < n {
        match run_at(chars, i, min_period, min_reps) {
            Some((period, reps)) => {
                out.extend_from_slice(&chars[i..i + period]);
                i += period * reps;
                changed = true;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    changed.then_some(out)
}

/// Smallest qualifying period starting at `i` and its maximal repeat count.
fn run_at(chars: &[char], i: usize, min_period: usize, min_reps: usize) -> Option<(usize, usize)> {
    let rest = chars.len() - i;
    let max_period = rest / min_reps;
    for p in min_period..=max_period {
        if chars[i] != chars[i + p] {
            continue;
        }
        let unit = &chars[i..i + p];
        let mut reps = 1;
        while i + (reps + 1) * p <= chars.len() && &chars[i + reps * p..i + (reps + 1) * p] == unit
        {
            reps += 1;
        }
        if reps >= min_reps {
            return Some((p, reps));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Repair log

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairEntry {
    pub rule: String,
    /// Byte offset into the text the rule was applied to.
    pub offset: usize,
    pub description: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairLog {
    pub entries: Vec<RepairEntry>,
}

impl RepairLog {
    pub fn push(&mut self, rule: &str, offset: usize, description: impl Into<String>) {
        self.entries.push(RepairEntry {
            rule: rule.to_string(),
            offset,
            description: description.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn rules(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.rule.as_str())
    }
}

// ---------------------------------------------------------------------------
// Repair pipeline

/// One step of the repair pipeline. A stage receives the current text and
/// returns a replacement, or `None` to leave it alone.
pub trait RepairStage: Send + Sync {
    fn name(&self) -> &str;
    fn apply(&self, text: &str, lenient_tables: bool, log: &mut RepairLog) -> Option<String>;
}

/// Runs stages in order and stops as soon as the text parses as a form.
pub struct Repairer {
    stages: Vec<Box<dyn RepairStage>>,
    lenient_tables: bool,
}

impl Default for Repairer {
    fn default() -> Self {
        Repairer {
            stages: vec![Box::new(SyntaxRepair), Box::new(StructureSalvage)],
            lenient_tables: false,
        }
    }
}

impl Repairer {
    pub fn empty() -> Self {
        Repairer {
            stages: Vec::new(),
            lenient_tables: false,
        }
    }

    pub fn with_stage(mut self, stage: Box<dyn RepairStage>) -> Self {
        self.stages.push(stage);
        self
    }

    pub fn lenient_tables(mut self, lenient: bool) -> Self {
        self.lenient_tables = lenient;
        self
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.name()).collect()
    }

    pub fn repair(&self, input: &str) -> (String, RepairLog) {
        let mut log = RepairLog::default();
        if parse_json(input, self.lenient_tables).is_ok() {
            return (input.to_string(), log);
        }
        let mut text = input.to_string();
        let mut done = false;
        for stage in &self.stages {
            if let Some(next) = stage.apply(&text, self.lenient_tables, &mut log) {
                text = next;
            }
            if parse_json(&text, self.lenient_tables).is_ok() {
                done = true;
                break;
            }
        }
        if !done {
            log.push("empty_fallback", 0, "nothing salvageable, emitting an empty form");
            text = "[]".to_string();
        }
        for e in &mut log.entries {
            e.offset = e.offset.min(input.len());
        }
        (text, log)
    }
}

/// Repairs `input` into text that parses as a form, logging every rule
/// applied. Text that already parses is returned unchanged with an empty log.
pub fn repair_json(input: &str) -> (String, RepairLog) {
    Repairer::default().repair(input)
}

// ---------------------------------------------------------------------------
// Syntax repair

/// Token-level repair into well-formed JSON: trims surrounding text, closes
/// quotes, inserts commas and colons, quotes bare words, closes brackets and
/// drops dangling object members.
pub struct SyntaxRepair;

impl RepairStage for SyntaxRepair {
    fn name(&self) -> &str {
        "syntax"
    }

    fn apply(&self, text: &str, _lenient_tables: bool, log: &mut RepairLog) -> Option<String> {
        Some(Syntax::new(text, log).run())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ObjState {
    KeyOrEnd,
    Key,
    Colon,
    Value,
    CommaOrEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArrState {
    ValueOrEnd,
    Value,
    CommaOrEnd,
}

#[derive(Debug, Clone, Copy)]
enum Frame {
    Obj {
        state: ObjState,
        /// Output position right after the opening brace.
        open_end: usize,
        /// Output position where the current member starts (its comma included).
        member_start: usize,
        comma_at: usize,
    },
    Arr {
        state: ArrState,
        comma_at: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Key,
    ObjValue,
    ArrItem,
}

impl Role {
    fn plausible_follower(self, next: Option<char>) -> bool {
        match self {
            Role::Key => next == Some(':'),
            Role::ObjValue => matches!(next, None | Some(',' | '}' | ']' | '"')),
            Role::ArrItem => matches!(next, None | Some(',' | ']' | '}' | '"' | ':')),
        }
    }

    fn terminators(self) -> &'static [char] {
        match self {
            Role::Key => &[':', ',', '{', '}', '[', ']', '\n'],
            _ => &[',', '{', '}', '[', ']', '\n'],
        }
    }
}

struct Syntax<'a> {
    src_len: usize,
    chars: Vec<(usize, char)>,
    i: usize,
    out: String,
    stack: Vec<Frame>,
    log: &'a mut RepairLog,
}

fn is_ws(c: char) -> bool {
    c.is_whitespace()
}

/// Quotes raw string content, keeping valid escapes and escaping the rest.
fn string_literal(raw: &[char]) -> String {
    let mut s = String::with_capacity(raw.len() + 2);
    s.push('"');
    let mut k = 0;
    while k < raw.len() {
        let c = raw[k];
        match c {
            '\\' => {
                let next = raw.get(k + 1).copied();
                let valid = match next {
                    Some('"' | '\\' | '/' | 'b' | 'f' | 'n' | 'r' | 't') => true,
                    Some('u') => {
                        raw.len() >= k + 6 && raw[k + 2..k + 6].iter().all(|h| h.is_ascii_hexdigit())
                    }
                    _ => false,
                };
                if valid {
                    s.push('\\');
                    s.push(next.unwrap());
                    k += 2;
                    continue;
                }
                s.push_str("\\\\");
            }
            '"' => s.push_str("\\\""),
            c if (c as u32) < 0x20 => s.push_str(&format!("\\u{:04x}", c as u32)),
            c => s.push(c),
        }
        k += 1;
    }
    s.push('"');
    s
}

fn is_literal(word: &str) -> bool {
    !word.contains(char::is_whitespace)
        && matches!(
            serde_json::from_str::<Value>(word),
            Ok(Value::Number(_) | Value::Bool(_) | Value::Null)
        )
}

impl<'a> Syntax<'a> {
    fn new(src: &str, log: &'a mut RepairLog) -> Self {
        Syntax {
            src_len: src.len(),
            chars: src.char_indices().collect(),
            i: 0,
            out: String::with_capacity(src.len() + 16),
            stack: Vec::new(),
            log,
        }
    }

    fn offset(&self, idx: usize) -> usize {
        self.chars.get(idx).map_or(self.src_len, |c| c.0)
    }

    fn note(&mut self, rule: &str, idx: usize, description: impl Into<String>) {
        let off = self.offset(idx);
        self.log.push(rule, off, description);
    }

    fn next_non_ws(&self, from: usize) -> Option<(usize, char)> {
        (from..self.chars.len())
            .map(|k| (k, self.chars[k].1))
            .find(|(_, c)| !is_ws(*c))
    }

    /// Inserts `text` right after the last non-whitespace output character.
    fn insert_after_content(&mut self, text: &str) -> usize {
        let at = self.out.trim_end().len();
        self.out.insert_str(at, text);
        at
    }

    fn run(mut self) -> String {
        let Some(start) = self.chars.iter().position(|&(_, c)| c == '{' || c == '[') else {
            self.note("trim", 0, "no object or array found");
            return "[]".to_string();
        };
        if start > 0 {
            self.note("trim_leading", 0, format!("dropped {start} leading characters"));
        }
        self.i = start;
        let mut root_is_object = self.chars[start].1 == '{';
        self.open(self.chars[start].1);

        loop {
            if self.stack.is_empty() {
                match self.next_non_ws(self.i) {
                    None => break,
                    Some((j, c)) if root_is_object && (c == ',' || c == '{') => {
                        self.note("wrap_array", j, "several top-level objects wrapped in a list");
                        self.out.insert(0, '[');
                        self.stack.push(Frame::Arr {
                            state: ArrState::CommaOrEnd,
                            comma_at: 0,
                        });
                        root_is_object = false;
                        continue;
                    }
                    Some((j, _)) => {
                        let dropped = self.chars.len() - j;
                        self.note("trim_trailing", j, format!("dropped {dropped} trailing characters"));
                        break;
                    }
                }
            }
            let Some(&(_, c)) = self.chars.get(self.i) else {
                self.close_all();
                continue;
            };
            if is_ws(c) {
                self.out.push(c);
                self.i += 1;
                continue;
            }
            match *self.stack.last().unwrap() {
                Frame::Obj { state, .. } => self.step_obj(state, c),
                Frame::Arr { state, .. } => self.step_arr(state, c),
            }
        }
        self.out
    }

    fn open(&mut self, c: char) {
        self.out.push(c);
        self.i += 1;
        let end = self.out.len();
        self.stack.push(if c == '{' {
            Frame::Obj {
                state: ObjState::KeyOrEnd,
                open_end: end,
                member_start: end,
                comma_at: 0,
            }
        } else {
            Frame::Arr {
                state: ArrState::ValueOrEnd,
                comma_at: 0,
            }
        });
    }

    fn set_obj_state(&mut self, s: ObjState) {
        if let Some(Frame::Obj { state, .. }) = self.stack.last_mut() {
            *state = s;
        }
    }

    fn value_done(&mut self) {
        match self.stack.last_mut() {
            Some(Frame::Obj { state, .. }) => *state = ObjState::CommaOrEnd,
            Some(Frame::Arr { state, .. }) => *state = ArrState::CommaOrEnd,
            None => {}
        }
    }

    fn drop_char(&mut self, rule: &str, what: &str) {
        self.note(rule, self.i, format!("dropped {what}"));
        self.i += 1;
    }

    fn step_obj(&mut self, state: ObjState, c: char) {
        use ObjState::*;
        match (state, c) {
            (_, '}') => self.close_obj(true),
            (_, ']') => self.mismatched(c),
            (KeyOrEnd | Key, ',') => self.drop_char("drop_comma", "extra comma"),
            (_, ':') if state != Colon => self.drop_char("drop_token", "stray colon"),
            (KeyOrEnd | Key | CommaOrEnd, '{' | '[') => {
                self.note("close_frame", self.i, "object closed before a nested value");
                self.close_obj(false);
            }
            (KeyOrEnd | Key, _) => {
                let lit = self.read_scalar(Role::Key);
                self.out.push_str(&lit);
                self.set_obj_state(Colon);
            }
            (Colon, ':') => {
                self.out.push(':');
                self.i += 1;
                self.set_obj_state(Value);
            }
            (Colon | Value, ',') => self.truncate_member(),
            (Colon, _) => {
                self.note("insert_colon", self.i, "missing colon after key");
                self.insert_after_content(":");
                self.set_obj_state(Value);
            }
            (Value, _) => self.read_value(Role::ObjValue),
            (CommaOrEnd, ',') => {
                let at = self.out.len();
                self.out.push(',');
                self.i += 1;
                if let Some(Frame::Obj {
                    state,
                    member_start,
                    comma_at,
                    ..
                }) = self.stack.last_mut()
                {
                    *state = Key;
                    *member_start = at;
                    *comma_at = at;
                }
            }
            (CommaOrEnd, _) => {
                self.note("insert_comma", self.i, "missing comma between members");
                let at = self.insert_after_content(",");
                if let Some(Frame::Obj {
                    state,
                    member_start,
                    comma_at,
                    ..
                }) = self.stack.last_mut()
                {
                    *state = Key;
                    *member_start = at;
                    *comma_at = at;
                }
            }
        }
    }

    fn step_arr(&mut self, state: ArrState, c: char) {
        use ArrState::*;
        match (state, c) {
            (_, ']') => self.close_arr(true),
            (_, '}') => self.mismatched(c),
            (_, ':') => self.drop_char("drop_token", "stray colon"),
            (ValueOrEnd | Value, ',') => self.drop_char("drop_comma", "extra comma"),
            (ValueOrEnd | Value, _) => self.read_value(Role::ArrItem),
            (CommaOrEnd, ',') => {
                let at = self.out.len();
                self.out.push(',');
                self.i += 1;
                if let Some(Frame::Arr { state, comma_at }) = self.stack.last_mut() {
                    *state = Value;
                    *comma_at = at;
                }
            }
            (CommaOrEnd, _) => {
                self.note("insert_comma", self.i, "missing comma between items");
                let at = self.insert_after_content(",");
                if let Some(Frame::Arr { state, comma_at }) = self.stack.last_mut() {
                    *state = Value;
                    *comma_at = at;
                }
            }
        }
    }

    /// Drops a key whose value never arrived, back to the last complete member.
    fn truncate_member(&mut self) {
        if let Some(Frame::Obj {
            state,
            open_end,
            member_start,
            ..
        }) = self.stack.last_mut()
        {
            let (open_end, member_start) = (*open_end, *member_start);
            *state = if member_start <= open_end {
                ObjState::KeyOrEnd
            } else {
                ObjState::CommaOrEnd
            };
            let off = self.offset(self.i);
            self.log
                .push("truncate_member", off, "dropped an incomplete object member");
            self.out.truncate(member_start);
        }
    }

    fn close_obj(&mut self, consume: bool) {
        let Some(Frame::Obj {
            state, comma_at, ..
        }) = self.stack.last().copied()
        else {
            return;
        };
        match state {
            ObjState::Colon | ObjState::Value => self.truncate_member(),
            ObjState::Key => {
                self.note("drop_comma", self.i, "trailing comma before closing brace");
                let tail = self.out.split_off(comma_at);
                self.out.push('}');
                self.out.push_str(&tail[1..]);
                return self.finish_close(consume);
            }
            _ => {}
        }
        self.out.push('}');
        self.finish_close(consume);
    }

    fn finish_close(&mut self, consume: bool) {
        if consume {
            self.i += 1;
        }
        self.stack.pop();
        self.value_done();
    }

    fn close_arr(&mut self, consume: bool) {
        let Some(Frame::Arr { state, comma_at }) = self.stack.last().copied() else {
            return;
        };
        if state == ArrState::Value {
            self.note("drop_comma", self.i, "trailing comma before closing bracket");
            let tail = self.out.split_off(comma_at);
            self.out.push(']');
            self.out.push_str(&tail[1..]);
        } else {
            self.out.push(']');
        }
        self.finish_close(consume);
    }

    fn mismatched(&mut self, closer: char) {
        let wants_obj = closer == '}';
        let open_below = self.stack[..self.stack.len() - 1]
            .iter()
            .any(|f| matches!(f, Frame::Obj { .. }) == wants_obj);
        if !open_below {
            self.drop_char("drop_token", &format!("unmatched {closer:?}"));
            return;
        }
        self.note("close_frame", self.i, format!("closed an unterminated frame before {closer:?}"));
        match self.stack.last() {
            Some(Frame::Obj { .. }) => self.close_obj(false),
            _ => self.close_arr(false),
        }
    }

    fn close_all(&mut self) {
        while let Some(top) = self.stack.last().copied() {
            match top {
                Frame::Obj { .. } => {
                    self.note("append_closer", self.i, "appended '}'");
                    self.close_obj(false);
                }
                Frame::Arr { .. } => {
                    self.note("append_closer", self.i, "appended ']'");
                    self.close_arr(false);
                }
            }
        }
    }

    fn read_value(&mut self, role: Role) {
        let c = self.chars[self.i].1;
        if c == '{' || c == '[' {
            self.open(c);
            return;
        }
        let lit = self.read_scalar(role);
        let follower = self.next_non_ws(self.i).map(|(_, c)| c);
        if role == Role::ArrItem && follower == Some(':') {
            self.note("open_object", self.i, "missing opening brace before a key");
            self.out.push('{');
            let end = self.out.len();
            self.out.push_str(&lit);
            self.stack.push(Frame::Obj {
                state: ObjState::Colon,
                open_end: end,
                member_start: end,
                comma_at: 0,
            });
            return;
        }
        self.out.push_str(&lit);
        self.value_done();
    }

    /// Reads a quoted or bare scalar and returns its JSON text.
    fn read_scalar(&mut self, role: Role) -> String {
        if self.chars[self.i].1 == '"' {
            self.read_string(role)
        } else {
            self.read_bare(role)
        }
    }

    fn read_string(&mut self, role: Role) -> String {
        let open = self.i;
        let n = self.chars.len();
        let mut j = open + 1;
        let mut close = None;
        while j < n {
            match self.chars[j].1 {
                '\\' => j += 2,
                '"' => {
                    close = Some(j);
                    break;
                }
                _ => j += 1,
            }
        }
        if let Some(q) = close {
            if role.plausible_follower(self.next_non_ws(q + 1).map(|(_, c)| c)) {
                let raw: Vec<char> = self.chars[open + 1..q].iter().map(|c| c.1).collect();
                self.i = q + 1;
                return string_literal(&raw);
            }
        }
        let stops = role.terminators();
        let end = (open + 1..n)
            .find(|&k| stops.contains(&self.chars[k].1))
            .unwrap_or(n);
        let mut raw: Vec<char> = self.chars[open + 1..end].iter().map(|c| c.1).collect();
        while raw.last().is_some_and(|c| is_ws(*c)) {
            raw.pop();
        }
        self.note("close_quote", open, "unbalanced quote closed at the next structural character");
        self.i = end;
        string_literal(&raw)
    }

    fn read_bare(&mut self, role: Role) -> String {
        let start = self.i;
        let n = self.chars.len();
        let mut j = start;
        while j < n && !matches!(self.chars[j].1, '"' | ',' | '{' | '}' | '[' | ']' | '\n' | '\r') {
            j += 1;
        }
        let absorbed = j < n
            && self.chars[j].1 == '"'
            && role.plausible_follower(self.next_non_ws(j + 1).map(|(_, c)| c));
        let mut end = j;
        if !absorbed && role != Role::ObjValue {
            if let Some(k) = (start..j).find(|&k| self.chars[k].1 == ':') {
                end = k;
            }
        }
        let mut raw: Vec<char> = self.chars[start..end].iter().map(|c| c.1).collect();
        while raw.last().is_some_and(|c| is_ws(*c)) {
            raw.pop();
        }
        self.i = if absorbed { j + 1 } else { end };
        let word: String = raw.iter().collect();
        if absorbed {
            self.note("absorb_quote", start, "missing opening quote");
        } else if role != Role::Key && is_literal(&word) {
            return word;
        } else {
            self.note("quote_bare", start, format!("quoted bare word {word:?}"));
        }
        string_literal(&raw)
    }
}

// ---------------------------------------------------------------------------
// Structural salvage

/// Maps well-formed JSON that is not a valid form onto the closest valid form.
/// Misplaced contents and answers are lifted to siblings, unknown classes
/// become `other`, scalars are stringified and tables are made rectangular.
pub struct StructureSalvage;

impl RepairStage for StructureSalvage {
    fn name(&self) -> &str {
        "structure"
    }

    fn apply(&self, text: &str, lenient_tables: bool, log: &mut RepairLog) -> Option<String> {
        let value: Value = serde_json::from_str(text).ok()?;
        let mut s = Salvage {
            log,
            lenient: lenient_tables,
        };
        let roots = s.item(&value);
        Some(serialize_json(&ParseTree::new(roots)))
    }
}

struct Salvage<'a> {
    log: &'a mut RepairLog,
    lenient: bool,
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

impl Salvage<'_> {
    fn note(&mut self, description: impl Into<String>) {
        self.log.push("salvage", 0, description);
    }

    fn item(&mut self, v: &Value) -> Vec<ParseNode> {
        match v {
            Value::Object(obj) => self.object(obj),
            Value::Array(items) => items.iter().flat_map(|x| self.item(x)).collect(),
            Value::Null => {
                self.note("dropped null");
                Vec::new()
            }
            other => {
                let text = scalar_text(other).unwrap_or_default();
                self.note(format!("bare value {text:?} kept as other"));
                vec![ParseNode::entity(text, EntityClass::Other)]
            }
        }
    }

    fn strings(&mut self, v: &Value, lifted: &mut Vec<ParseNode>) -> Vec<String> {
        match v {
            Value::Array(items) => items.iter().flat_map(|x| self.strings(x, lifted)).collect(),
            Value::Object(obj) => {
                self.note("object inside a text list lifted out");
                lifted.extend(self.object(obj));
                Vec::new()
            }
            Value::Null => Vec::new(),
            other => vec![scalar_text(other).unwrap_or_default()],
        }
    }

    fn table(&mut self, obj: &Map<String, Value>) -> Vec<ParseNode> {
        let mut lifted = Vec::new();
        let row_headers = self.strings(&obj[ROW_HEADERS], &mut lifted);
        let col_headers = self.strings(&obj[COL_HEADERS], &mut lifted);
        let (r, c) = (row_headers.len(), col_headers.len());
        let cells = match obj.get(CELLS) {
            Some(Value::Array(rows)) => {
                let mut grid: Vec<Vec<String>> = rows
                    .iter()
                    .map(|row| match row {
                        Value::Array(_) => self.strings(row, &mut lifted),
                        other => self.strings(other, &mut lifted),
                    })
                    .collect();
                if grid.len() != r || grid.iter().any(|row| row.len() != c) {
                    self.note("ragged cell matrix padded or cut to the header sizes");
                    grid.resize(r, Vec::new());
                    for row in &mut grid {
                        row.resize(c, String::new());
                    }
                }
                Some(grid)
            }
            None if self.lenient => None,
            _ => {
                self.note("missing cells filled with blanks");
                Some(vec![vec![String::new(); c]; r])
            }
        };
        if obj.keys().any(|k| k != ROW_HEADERS && k != COL_HEADERS && k != CELLS) {
            self.note("extra table keys dropped");
        }
        let mut out = vec![ParseNode::Table(Table {
            title: None,
            row_headers,
            col_headers,
            cells,
        })];
        out.extend(lifted);
        out
    }

    fn object(&mut self, obj: &Map<String, Value>) -> Vec<ParseNode> {
        if obj.contains_key(ROW_HEADERS) && obj.contains_key(COL_HEADERS) {
            return self.table(obj);
        }
        let known = obj.iter().find_map(|(k, v)| match v {
            Value::String(s) => EntityClass::from_name(s).map(|c| (k.clone(), c)),
            _ => None,
        });
        let entity_key = known.or_else(|| {
            obj.iter()
                .find(|(k, v)| v.is_string() && *k != CONTENTS && *k != ANSWERS)
                .map(|(k, v)| {
                    let class = v.as_str().unwrap_or_default();
                    (k.clone(), class)
                })
                .map(|(k, class)| {
                    self.note(format!("unknown class {class:?} for {k:?} replaced by other"));
                    (k, EntityClass::Other)
                })
        });

        let mut children = Vec::new();
        let mut answers = Vec::new();
        let mut lifted = Vec::new();
        for (k, v) in obj {
            if entity_key.as_ref().is_some_and(|(ek, _)| ek == k) {
                continue;
            }
            match (k.as_str(), v) {
                (CONTENTS, Value::Array(items)) => {
                    children.extend(items.iter().flat_map(|x| self.item(x)));
                }
                (ANSWERS, Value::Array(_)) => {
                    let list = self.strings(v, &mut lifted);
                    answers.extend(list);
                }
                (_, Value::String(s)) => {
                    let class = EntityClass::from_name(s).unwrap_or(EntityClass::Other);
                    self.note(format!("second entity key {k:?} lifted to a sibling"));
                    lifted.push(ParseNode::entity(k.clone(), class));
                }
                (ANSWERS, other) => {
                    let list = self.strings(other, &mut lifted);
                    answers.extend(list);
                }
                (_, Value::Array(items)) => {
                    self.note(format!("list under {k:?} lifted to siblings"));
                    lifted.extend(items.iter().flat_map(|x| self.item(x)));
                }
                (_, Value::Object(inner)) => {
                    self.note(format!("object under {k:?} lifted to a sibling"));
                    lifted.extend(self.object(inner));
                }
                (_, other) => {
                    let text = scalar_text(other).unwrap_or_default();
                    self.note(format!("scalar member {k:?} kept as other"));
                    lifted.push(ParseNode::entity(format!("{k} {text}").trim().to_string(), EntityClass::Other));
                }
            }
        }

        let Some((text, class)) = entity_key else {
            self.note("object without an entity key flattened");
            let mut out = children;
            out.extend(answers.into_iter().map(|a| ParseNode::entity(a, EntityClass::Answer)));
            out.extend(lifted);
            return out;
        };
        let mut e = Entity::new(text, class);
        let mut out = Vec::new();
        if class == EntityClass::Header {
            e.children = children;
        } else if !children.is_empty() {
            self.note("contents of a non-header lifted to siblings");
            lifted.splice(0..0, children);
        }
        if class == EntityClass::Question {
            e.answers = answers;
        } else if !answers.is_empty() {
            self.note("answers of a non-question lifted to siblings");
            let n = answers.len();
            lifted.splice(0..0, answers.into_iter().map(|a| ParseNode::entity(a, EntityClass::Answer)));
            debug_assert!(lifted.len() >= n);
        }
        out.push(ParseNode::Entity(e));
        out.extend(lifted);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> CleanupConfig {
        CleanupConfig::default()
    }

    // Independent check: is there any offset and period with enough copies?
    fn has_qualifying_run(s: &str, cfg: &CleanupConfig) -> bool {
        let c: Vec<char> = s.chars().collect();
        let n = c.len();
        for i in 0..n {
            for p in cfg.min_period..=n {
                if i + p * cfg.min_reps > n {
                    break;
                }
                let unit: String = c[i..i + p].iter().collect();
                let want = unit.repeat(cfg.min_reps);
                let got: String = c[i..i + p * cfg.min_reps].iter().collect();
                if want == got {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_repeats(&"abcdefgh".repeat(5), &cfg()), "abcdefgh");
        let short = "abcdefg".repeat(9);
        assert_eq!(collapse_repeats(&short, &cfg()), short);
        let few = format!("X{}Y", "12345678".repeat(4));
        assert_eq!(collapse_repeats(&few, &cfg()), few);
    }

    #[test]
    fn collapse_keeps_surrounding_text() {
        let s = format!("start {} end", "la la la ".repeat(7));
        assert_eq!(collapse_repeats(&s, &cfg()), "start la la la  end");
    }

    #[test]
    fn collapse_prefers_smallest_period() {
        // Period 8 and period 16 both qualify at offset 0.
        let s = "abcdefgh".repeat(12);
        assert_eq!(collapse_repeats(&s, &cfg()), "abcdefgh");
    }

    #[test]
    fn collapse_handles_multibyte_text() {
        let s = format!("{}!", "日本語のテキスト".repeat(6));
        assert_eq!(collapse_repeats(&s, &cfg()), "日本語のテキスト!");
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(CleanupConfig { min_period: 0, min_reps: 5 }.validate().is_err());
        assert!(CleanupConfig { min_period: 8, min_reps: 1 }.validate().is_err());
    }

    #[test]
    fn repair_appends_closers() {
        let (out, log) = repair_json(r#"{"A": "question", "answers":["x""#);
        assert_eq!(out, r#"{"A": "question", "answers":["x"]}"#);
        assert_eq!(log.rules().filter(|r| *r == "append_closer").count(), 2);
    }

    #[test]
    fn repair_leaves_valid_input_alone() {
        let s = r#"[{"A": "header", "contents":[{"B": "question", "answers":["c"]}]}]"#;
        let (out, log) = repair_json(s);
        assert_eq!(out, s);
        assert!(log.is_empty());
    }

    #[test]
    fn repair_trims_surrounding_text() {
        let (out, log) = repair_json(r#"garbage [{"A": "other"}] trailing"#);
        assert_eq!(out, r#"[{"A": "other"}]"#);
        let rules: Vec<_> = log.rules().collect();
        assert_eq!(rules, vec!["trim_leading", "trim_trailing"]);
    }

    #[test]
    fn repair_handles_missing_quotes() {
        let cases = [
            (r#"[{"A: "question", "answers":["x"]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
            (r#"[{A": "question", "answers":["x"]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
            (r#"[{"A": question", "answers":["x"]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
            (r#"[{"A": "question, "answers":["x"]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
            (r#"[{"A": "question", "answers":["x]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
            (r#"[{"A": "question", "answers":[x"]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
        ];
        for (input, want) in cases {
            let (out, log) = repair_json(input);
            assert_eq!(out, want, "input {input}");
            assert!(!log.is_empty());
        }
    }

    #[test]
    fn repair_handles_missing_commas_and_closers() {
        let cases = [
            (r#"[{"A": "other"} {"B": "other"}]"#, r#"[{"A": "other"}, {"B": "other"}]"#),
            (r#"[{"A": "question" "answers":["x"]}]"#, r#"[{"A": "question", "answers":["x"]}]"#),
            (r#"[{"A": "question", "answers":["x" "y"]}]"#, r#"[{"A": "question", "answers":["x", "y"]}]"#),
            (
                r#"[{"H": "header", "contents":[{"B": "other"}}, {"C": "other"}]"#,
                r#"[{"H": "header", "contents":[{"B": "other"}]}, {"C": "other"}]"#,
            ),
            (
                r#"[{"A": "question", "answers":["x"], {"B": "other"}]"#,
                r#"[{"A": "question", "answers":["x"]}, {"B": "other"}]"#,
            ),
            (r#"[{"A": "other"},]"#, r#"[{"A": "other"}]"#),
        ];
        for (input, want) in cases {
            let (out, _) = repair_json(input);
            assert_eq!(out, want, "input {input}");
        }
    }

    #[test]
    fn repair_wraps_multiple_top_level_objects() {
        let (out, log) = repair_json(r#"{"A": "other"}, {"B": "other"}]"#);
        assert_eq!(out, r#"[{"A": "other"}, {"B": "other"}]"#);
        assert!(log.rules().any(|r| r == "wrap_array"));
    }

    #[test]
    fn repair_truncates_dangling_member() {
        let (out, log) = repair_json(r#"[{"A": "question", "answers""#);
        assert_eq!(out, r#"[{"A": "question"}]"#);
        assert!(log.rules().any(|r| r == "truncate_member"));
    }

    #[test]
    fn repair_opens_missing_brace() {
        let (out, _) = repair_json(r#"[{"A": "other"}, "B": "other"}]"#);
        assert_eq!(out, r#"[{"A": "other"}, {"B": "other"}]"#);
    }

    #[test]
    fn salvage_fixes_form_level_errors() {
        let (out, log) = repair_json(
            r#"[{"A": "label", "answers":["x", 3]}, {"B": "other", "contents":[{"C": "answer"}]}]"#,
        );
        let tree = parse_json(&out, false).unwrap();
        // A (unknown class), its two answers, B, then C lifted out of B.
        assert_eq!(tree.roots.len(), 5);
        assert!(log.rules().all(|r| r == "salvage"));
        let (again, log2) = repair_json(&out);
        assert_eq!(again, out);
        assert!(log2.is_empty());
    }

    #[test]
    fn salvage_rectangularizes_tables() {
        let (out, _) = repair_json(
            r#"[{"row headers":["r1", "r2"], "column headers":["c1", "c2"], "cells":[["a"], ["b", "c", "d"]]}]"#,
        );
        let tree = parse_json(&out, false).unwrap();
        let t = tree.tables()[0];
        assert_eq!(
            t.cells.as_ref().unwrap(),
            &vec![vec!["a".to_string(), String::new()], vec!["b".into(), "c".into()]]
        );
    }

    #[test]
    fn no_json_at_all_gives_empty_form() {
        let (out, log) = repair_json("the model said nothing useful");
        assert_eq!(out, "[]");
        assert!(!log.is_empty());
    }

    #[test]
    fn custom_stages_run_in_order() {
        struct Upper;
        impl RepairStage for Upper {
            fn name(&self) -> &str {
                "upper"
            }
            fn apply(&self, _: &str, _: bool, log: &mut RepairLog) -> Option<String> {
                log.push("replace", 0, "replaced everything");
                Some(r#"[{"X": "other"}]"#.to_string())
            }
        }
        let r = Repairer::empty().with_stage(Box::new(Upper));
        assert_eq!(r.stage_names(), vec!["upper"]);
        let (out, log) = r.repair("{{{");
        assert_eq!(out, r#"[{"X": "other"}]"#);
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn every_single_deletion_of_a_delimiter_repairs() {
        let doc = r#"[{"Name:": "question", "answers":["Ann Lee"]}, {"Items": "header", "contents":[{"Date:": "question", "answers":["23 Mar 1999", "x"]}, {"row headers":["a", "b"], "column headers":["c"], "cells":[["1"], [""]]}]}, {"note": "other"}]"#;
        for (pos, ch) in doc.char_indices() {
            if !matches!(ch, '"' | ',' | '}' | ']') {
                continue;
            }
            let mut broken = doc.to_string();
            broken.remove(pos);
            let (out, _) = repair_json(&broken);
            assert!(parse_json(&out, false).is_ok(), "deleting {ch:?} at {pos}: {out}");
        }
    }

    proptest! {
        #[test]
        fn collapse_is_idempotent_and_never_grows(s in "[ab ]{0,30}(xyzw[ab]{4}){0,8}[ab]{0,10}") {
            let once = collapse_repeats(&s, &cfg());
            prop_assert!(once.chars().count() <= s.chars().count());
            prop_assert_eq!(collapse_repeats(&once, &cfg()), once.clone());
            prop_assert!(!has_qualifying_run(&once, &cfg()));
        }

        #[test]
        fn collapse_changes_only_inputs_with_a_run(s in "[abc]{0,60}") {
            let small = CleanupConfig { min_period: 2, min_reps: 3 };
            let out = collapse_repeats(&s, &small);
            if !has_qualifying_run(&s, &small) {
                prop_assert_eq!(out, s);
            } else {
                prop_assert!(out.len() < s.len());
            }
        }

        #[test]
        fn repair_output_always_parses_and_is_stable(s in r#"[\[\]{}",: a-z0-9]{0,60}"#) {
            let (out, _) = repair_json(&s);
            prop_assert!(parse_json(&out, false).is_ok(), "{:?} -> {:?}", s, out);
            let (again, log) = repair_json(&out);
            prop_assert_eq!(again, out);
            prop_assert!(log.is_empty());
        }

        #[test]
        fn repair_log_offsets_in_bounds(s in r#"[\[\]{}",: a-zé]{0,40}"#) {
            let (_, log) = repair_json(&s);
            for e in &log.entries {
                prop_assert!(e.offset <= s.len());
            }
        }
    }
}
