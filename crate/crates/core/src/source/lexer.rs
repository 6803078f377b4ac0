//! Tokenizer for the Python subset found in MBPP/APPS programs.
//!
//! Whitespace between tokens is kept as leading trivia on each token so the
//! comment-stripped source can be rebuilt exactly. Comments are dropped.

use serde::{Deserialize, Serialize};

use super::SourceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Keyword,
    Identifier,
    LiteralNumber,
    LiteralString,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub lexeme: String,
    pub class: TokenClass,
    /// Whitespace (including line breaks) between the previous token and this one.
    pub leading: String,
    /// Byte offset of the lexeme in the original text.
    pub start: usize,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.start + self.lexeme.len()
    }

    pub fn is(&self, lexeme: &str) -> bool {
        self.lexeme == lexeme
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.class == TokenClass::Keyword && self.lexeme == kw
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    /// Whitespace after the last token.
    pub trailing: String,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lexemes(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lexeme.as_str())
    }

    /// Rebuilds the source text with comments removed.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for tok in &self.tokens {
            out.push_str(&tok.leading);
            out.push_str(&tok.lexeme);
        }
        out.push_str(&self.trailing);
        out
    }
}

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "==", "!=", "<=", ">=", "**", "//", "<<",
    ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "<>", "+", "-", "*", "/", "%",
    "@", "&", "|", "^", "~", "<", ">", "=",
];

const PUNCTUATION: &[char] = &['(', ')', '[', ']', '{', '}', ',', ':', ';', '.'];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Removes `#` comments, keeping everything else (including line breaks) intact.
pub fn strip_comments(text: &str) -> Result<String, SourceError> {
    Ok(tokenize_str(text)?.to_source())
}

pub fn tokenize_str(text: &str) -> Result<TokenStream, SourceError> {
    Lexer::new(text).run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
    pending: String,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0, line: 1, line_start: 0, pending: String::new(), tokens: Vec::new() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn advance(&mut self, n: usize) -> &'a str {
        let s = &self.src[self.pos..self.pos + n];
        for (i, c) in s.char_indices() {
            if c == '\n' {
                self.line += 1;
                self.line_start = self.pos + i + 1;
            }
        }
        self.pos += n;
        s
    }

    fn push(&mut self, start: usize, line: usize, column: usize, class: TokenClass) {
        let lexeme = self.src[start..self.pos].to_string();
        self.tokens.push(Token {
            lexeme,
            class,
            leading: std::mem::take(&mut self.pending),
            start,
            line,
            column,
        });
    }

    fn run(mut self) -> Result<TokenStream, SourceError> {
        while let Some(c) = self.peek() {
            if c == '#' {
                let len = self.rest().find('\n').unwrap_or(self.rest().len());
                self.advance(len);
                continue;
            }
            if c.is_whitespace() || c == '\\' && self.is_line_continuation() {
                let len = c.len_utf8();
                let s = self.advance(len);
                self.pending.push_str(s);
                continue;
            }
            let start = self.pos;
            let line = self.line;
            let column = start - self.line_start;
            if let Some(len) = self.string_prefix_len() {
                self.lex_string(len, line, column)?;
                self.push(start, line, column, TokenClass::LiteralString);
            } else if c.is_ascii_digit() || (c == '.' && self.next_is_digit()) {
                self.lex_number();
                self.push(start, line, column, TokenClass::LiteralNumber);
            } else if c == '_' || c.is_alphabetic() {
                let len = self
                    .rest()
                    .char_indices()
                    .find(|(_, ch)| !(ch.is_alphanumeric() || *ch == '_'))
                    .map(|(i, _)| i)
                    .unwrap_or(self.rest().len());
                let word = self.advance(len);
                let class = if is_keyword(word) { TokenClass::Keyword } else { TokenClass::Identifier };
                self.push(start, line, column, class);
            } else if let Some(op) = OPERATORS.iter().find(|op| self.rest().starts_with(**op)) {
                self.advance(op.len());
                self.push(start, line, column, TokenClass::Operator);
            } else if PUNCTUATION.contains(&c) {
                self.advance(1);
                self.push(start, line, column, TokenClass::Punctuation);
            } else {
                // Stray characters (`$`, `?`, `!`, backticks) are kept as operators so the
                // stream stays lossless; the parser rejects them.
                self.advance(c.len_utf8());
                self.push(start, line, column, TokenClass::Operator);
            }
        }
        Ok(TokenStream { tokens: self.tokens, trailing: self.pending })
    }

    fn is_line_continuation(&self) -> bool {
        let r = self.rest();
        r.starts_with("\\\n") || r.starts_with("\\\r\n")
    }

    fn next_is_digit(&self) -> bool {
        self.rest().chars().nth(1).is_some_and(|c| c.is_ascii_digit())
    }

    /// Length of a string prefix (`r`, `b`, `f`, `rb`, ...) followed by a quote, if any.
    fn string_prefix_len(&self) -> Option<usize> {
        let r = self.rest();
        let prefix_len = r.chars().take_while(|c| "rRbBuUfF".contains(*c)).count().min(2);
        for n in (0..=prefix_len).rev() {
            if r[n..].starts_with('"') || r[n..].starts_with('\'') {
                let prefix = r[..n].to_ascii_lowercase();
                let ok = matches!(prefix.as_str(), "" | "r" | "b" | "u" | "f" | "rb" | "br" | "fr" | "rf");
                if ok {
                    return Some(n);
                }
            }
        }
        None
    }

    fn lex_string(&mut self, prefix_len: usize, line: usize, column: usize) -> Result<(), SourceError> {
        self.advance(prefix_len);
        let r = self.rest();
        let quote = &r[..1];
        let triple: String = quote.repeat(3);
        let (delim, multiline) = if r.starts_with(&triple) { (triple, true) } else { (quote.to_string(), false) };
        self.advance(delim.len());
        loop {
            let r = self.rest();
            let Some(c) = r.chars().next() else {
                return Err(SourceError::Lex { line, column, message: "unterminated string literal".into() });
            };
            if c == '\\' {
                // A backslash always consumes the next char for delimiter purposes, raw or not.
                let next_len = r[1..].chars().next().map(|n| n.len_utf8()).unwrap_or(0);
                self.advance(1 + next_len);
                continue;
            }
            if r.starts_with(delim.as_str()) {
                self.advance(delim.len());
                return Ok(());
            }
            if c == '\n' && !multiline {
                return Err(SourceError::Lex { line, column, message: "unterminated string literal".into() });
            }
            self.advance(c.len_utf8());
        }
    }

    fn lex_number(&mut self) {
        let r = self.rest().as_bytes();
        let mut i = 0;
        if r.len() > 1 && r[0] == b'0' && matches!(r[1], b'x' | b'X' | b'o' | b'O' | b'b' | b'B') {
            i = 2;
            while i < r.len() && (r[i].is_ascii_hexdigit() || r[i] == b'_') {
                i += 1;
            }
        } else {
            while i < r.len() && (r[i].is_ascii_digit() || r[i] == b'_') {
                i += 1;
            }
            if i < r.len() && r[i] == b'.' {
                i += 1;
                while i < r.len() && (r[i].is_ascii_digit() || r[i] == b'_') {
                    i += 1;
                }
            }
            if i < r.len() && matches!(r[i], b'e' | b'E') {
                let mut j = i + 1;
                if j < r.len() && matches!(r[j], b'+' | b'-') {
                    j += 1;
                }
                if j < r.len() && r[j].is_ascii_digit() {
                    i = j;
                    while i < r.len() && r[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            if i < r.len() && matches!(r[i], b'j' | b'J' | b'l' | b'L') {
                i += 1;
            }
        }
        self.advance(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(src: &str) -> Vec<(String, TokenClass)> {
        tokenize_str(src).unwrap().tokens.into_iter().map(|t| (t.lexeme, t.class)).collect()
    }

    #[test]
    fn return_float_literal() {
        assert_eq!(
            classes("return 3.14"),
            vec![("return".into(), TokenClass::Keyword), ("3.14".into(), TokenClass::LiteralNumber)]
        );
    }

    #[test]
    fn string_case_is_kept() {
        let a = classes("\"fizzbuzz\"");
        let b = classes("\"FizzBuzz\"");
        assert_eq!(a[0].1, TokenClass::LiteralString);
        assert_ne!(a[0].0, b[0].0);
    }

    #[test]
    fn comments_are_dropped_and_rebuild_is_exact() {
        let src = "x = 1  # set x\n# full line\ny = 'a#b'\n";
        let ts = tokenize_str(src).unwrap();
        assert_eq!(ts.to_source(), "x = 1  \n\ny = 'a#b'\n");
        assert!(ts.tokens.iter().all(|t| !t.lexeme.starts_with('#')));
    }

    #[test]
    fn unterminated_string_is_an_error() {
        let err = tokenize_str("x = 'abc\n").unwrap_err();
        assert!(matches!(err, SourceError::Lex { line: 1, .. }));
        assert!(tokenize_str("s = \"\"\"abc").is_err());
    }

    #[test]
    fn operators_use_longest_match() {
        let lex: Vec<_> = classes("a **= b // c != d").into_iter().map(|t| t.0).collect();
        assert_eq!(lex, ["a", "**=", "b", "//", "c", "!=", "d"]);
    }

    #[test]
    fn numbers_and_prefixed_strings() {
        let toks = classes("0x1F 1e-3 2.5j 1_000 .5 rb'\\d' f\"{x}\"");
        let kinds: Vec<_> = toks.iter().map(|t| t.1).collect();
        assert_eq!(
            kinds,
            [
                TokenClass::LiteralNumber,
                TokenClass::LiteralNumber,
                TokenClass::LiteralNumber,
                TokenClass::LiteralNumber,
                TokenClass::LiteralNumber,
                TokenClass::LiteralString,
                TokenClass::LiteralString
            ]
        );
    }

    #[test]
    fn triple_quoted_strings_span_lines() {
        let ts = tokenize_str("def f():\n    \"\"\"doc\n    more\"\"\"\n    return 1\n").unwrap();
        assert!(ts.tokens.iter().any(|t| t.class == TokenClass::LiteralString && t.lexeme.contains("more")));
        assert_eq!(ts.tokens.last().unwrap().line, 4);
    }
}
