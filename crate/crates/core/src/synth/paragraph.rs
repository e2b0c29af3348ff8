//! Greedy word wrapping in paragraph style.

use serde::Serialize;

use super::rng::SplitMix64;
use super::{TextMeasurer, TextRun};

pub const PARAGRAPH_TEXT_HEIGHT: (f64, f64) = (8.0, 32.0);
pub const EM_PER_HEIGHT: f64 = 1.6;
pub const WORD_SPACE_EM: (f64, f64) = (0.2, 0.5);
pub const INDENT_EM: (f64, f64) = (0.3, 6.0);
/// Weights of Indented, NoIndent and InverseIndent.
pub const MODE_WEIGHTS: [f64; 3] = [80.0, 18.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndentMode {
    /// First line indented.
    Indented,
    /// No indent; extra vertical space before the paragraph.
    NoIndent,
    /// Every line but the first indented.
    InverseIndent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParagraphStyle {
    pub column_width: f64,
    pub text_height: f64,
    pub em: f64,
    pub word_space: f64,
    pub newline_space: f64,
    pub mode: IndentMode,
    pub indent: f64,
    pub font: u32,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LayoutError {
    #[error("word {word:?} is {width:.1}px wide, column is {column_width:.1}px")]
    WordTooWide {
        word: String,
        width: f64,
        column_width: f64,
    },
}

impl ParagraphStyle {
    /// Draws a style for a page `page_width` pixels wide.
    pub fn sample(rng: &mut SplitMix64, page_width: f64) -> ParagraphStyle {
        let column_width = rng.uniform(page_width / 5.0, page_width);
        let text_height = rng.uniform(PARAGRAPH_TEXT_HEIGHT.0, PARAGRAPH_TEXT_HEIGHT.1);
        let mut style = ParagraphStyle::for_text(rng, column_width, text_height, 0);
        style.mode = match rng.weighted(&MODE_WEIGHTS) {
            0 => IndentMode::Indented,
            1 => IndentMode::NoIndent,
            _ => IndentMode::InverseIndent,
        };
        style.indent = rng.uniform(INDENT_EM.0, INDENT_EM.1) * style.em;
        style
    }

    /// Plain wrapping style for a given width and text height: spacing is
    /// drawn, no indent.
    pub fn for_text(rng: &mut SplitMix64, column_width: f64, text_height: f64, font: u32) -> ParagraphStyle {
        let em = EM_PER_HEIGHT * text_height;
        ParagraphStyle {
            column_width,
            text_height,
            em,
            word_space: rng.uniform(WORD_SPACE_EM.0, WORD_SPACE_EM.1) * em,
            newline_space: rng.uniform(1.0, text_height.max(1.0)),
            mode: IndentMode::Indented,
            indent: 0.0,
            font,
        }
    }

    /// True when every field lies in its sampling range.
    pub fn in_range(&self, page_width: f64) -> bool {
        let em_ok = (self.em - EM_PER_HEIGHT * self.text_height).abs() < 1e-9;
        em_ok
            && (page_width / 5.0..=page_width).contains(&self.column_width)
            && (PARAGRAPH_TEXT_HEIGHT.0..=PARAGRAPH_TEXT_HEIGHT.1).contains(&self.text_height)
            && (WORD_SPACE_EM.0 * self.em..=WORD_SPACE_EM.1 * self.em).contains(&self.word_space)
            && (1.0..=self.text_height).contains(&self.newline_space)
            && (INDENT_EM.0 * self.em..=INDENT_EM.1 * self.em).contains(&self.indent)
    }
}

/// Places `words` left to right from `origin`, wrapping at the column width.
/// Each new line after the first starts with a random offset of up to one
/// word space.
pub fn layout_paragraph<S: AsRef<str>>(
    words: &[S],
    style: &ParagraphStyle,
    origin: (f64, f64),
    measurer: &dyn TextMeasurer,
    rng: &mut SplitMix64,
) -> Result<Vec<TextRun>, LayoutError> {
    let (ox, oy) = origin;
    let right = ox + style.column_width;
    let h = style.text_height;
    let mut y = oy;
    if style.mode == IndentMode::NoIndent {
        y += rng.uniform(0.0, style.newline_space);
    }
    let line_start = |line: usize, rng: &mut SplitMix64| {
        let indent = match (style.mode, line) {
            (IndentMode::Indented, 0) => style.indent,
            (IndentMode::InverseIndent, l) if l > 0 => style.indent,
            _ => 0.0,
        };
        let jitter = if line > 0 {
            rng.uniform(0.0, style.word_space)
        } else {
            0.0
        };
        ox + indent + jitter
    };

    let mut runs = Vec::with_capacity(words.len());
    let mut line = 0;
    let mut x = line_start(0, rng);
    let mut line_used = false;
    for w in words {
        let word = w.as_ref();
        let width = measurer.width(word, h);
        if width > style.column_width {
            return Err(LayoutError::WordTooWide {
                word: word.to_string(),
                width,
                column_width: style.column_width,
            });
        }
        let end = if line_used { x + style.word_space + width } else { x + width };
        if end > right {
            if line_used {
                line += 1;
                y += h + style.newline_space;
                x = line_start(line, rng);
                line_used = false;
            }
            if x + width > right {
                x = ox;
            }
        }
        if line_used {
            x += style.word_space;
        }
        runs.push(TextRun {
            text: word.to_string(),
            x,
            y,
            width,
            height: h,
            font: style.font,
        });
        x += width;
        line_used = true;
    }
    Ok(runs)
}
