use serde::Serialize;

use super::LanguageError;

/// A region of source text. Lines and columns are 1-based and count
/// characters; the end position is inclusive of the last character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceSpan {
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
    #[serde(skip)]
    pub start_byte: usize,
    #[serde(skip)]
    pub end_byte: usize,
}

impl SourceSpan {
    pub fn merge(self, other: SourceSpan) -> SourceSpan {
        let (first, last) = if self.start_byte <= other.start_byte { (self, other) } else { (other, self) };
        let end = if last.end_byte >= first.end_byte { last } else { first };
        SourceSpan {
            start_line: first.start_line,
            start_col: first.start_col,
            start_byte: first.start_byte,
            end_line: end.end_line,
            end_col: end.end_col,
            end_byte: end.end_byte,
        }
    }

    pub fn contains_line(&self, line: usize) -> bool {
        self.start_line <= line && line <= self.end_line
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// `[A-Za-z0-9_']+`
    Word(String),
    /// Any other non-space character, or the two-character `⁻¹`.
    Symbol(String),
    /// One of `. : , ( ) [ ] { }`.
    Punct(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

impl Token {
    pub fn text(&self) -> &str {
        match &self.kind {
            TokenKind::Word(w) => w,
            TokenKind::Symbol(s) => s,
            TokenKind::Punct(c) => match c {
                '.' => ".",
                ':' => ":",
                ',' => ",",
                '(' => "(",
                ')' => ")",
                '[' => "[",
                ']' => "]",
                '{' => "{",
                _ => "}",
            },
        }
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(&self.kind, TokenKind::Word(x) if x == w)
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct(c)
    }

    pub fn word(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Word(w) => Some(w),
            _ => None,
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn is_punct(c: char) -> bool {
    ".:,()[]{}".contains(c)
}

/// Splits text into tokens. `%` starts a comment running to the end of the line.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut iter = text.char_indices().peekable();
    while let Some((start, c)) = iter.next() {
        let (start_line, start_col) = (line, col);
        let advance = |ch: char, line: &mut usize, col: &mut usize| {
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        advance(c, &mut line, &mut col);
        if c.is_whitespace() {
            continue;
        }
        if c == '%' {
            while let Some(&(_, n)) = iter.peek() {
                if n == '\n' {
                    break;
                }
                advance(n, &mut line, &mut col);
                iter.next();
            }
            continue;
        }
        let mut end = start + c.len_utf8();
        let mut last_col = start_col;
        let kind = if is_word_char(c) {
            let mut word = c.to_string();
            while let Some(&(i, n)) = iter.peek() {
                if !is_word_char(n) {
                    break;
                }
                word.push(n);
                last_col = col;
                advance(n, &mut line, &mut col);
                end = i + n.len_utf8();
                iter.next();
            }
            TokenKind::Word(word)
        } else if is_punct(c) {
            TokenKind::Punct(c)
        } else if c == '⁻' && matches!(iter.peek(), Some(&(_, '¹'))) {
            let (i, n) = iter.next().unwrap();
            last_col = col;
            advance(n, &mut line, &mut col);
            end = i + n.len_utf8();
            TokenKind::Symbol("⁻¹".into())
        } else {
            TokenKind::Symbol(c.to_string())
        };
        tokens.push(Token {
            kind,
            span: SourceSpan { start_line, start_col, end_line: start_line, end_col: last_col, start_byte: start, end_byte: end },
        });
    }
    tokens
}

/// Like [`tokenize`] but starts from raw bytes, rejecting invalid UTF-8.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<Token>, LanguageError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => Ok(tokenize(text)),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let text = std::str::from_utf8(valid).unwrap_or_default();
            let line = text.matches('\n').count() + 1;
            let col = text.rsplit('\n').next().map(|l| l.chars().count() + 1).unwrap_or(1);
            let span = SourceSpan {
                start_line: line,
                start_col: col,
                end_line: line,
                end_col: col,
                start_byte: e.valid_up_to(),
                end_byte: e.valid_up_to() + 1,
            };
            Err(LanguageError::new("invalid UTF-8 in input", Some(span)))
        }
    }
}
