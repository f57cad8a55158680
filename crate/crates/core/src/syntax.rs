//! Character cursor and error type shared by the two hand-written parsers.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub(crate) struct Cursor<'a> {
    src: &'a str,
    offset: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, offset: 0 }
    }

    pub(crate) fn pos(&self) -> Pos {
        let before = &self.src[..self.offset];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Pos { line, col }
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let Pos { line, col } = self.pos();
        Err(SyntaxError {
            line,
            col,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    pub(crate) fn skip_ws(&mut self) {
        let rest = self.rest();
        self.offset += rest.len() - rest.trim_start().len();
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    pub(crate) fn peek_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub(crate) fn looking_at(&mut self, token: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(token)
    }

    /// Consumes `token` if it is next.
    pub(crate) fn eat(&mut self, token: &str) -> bool {
        if self.looking_at(token) {
            self.offset += token.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<(), SyntaxError> {
        if self.eat(token) {
            Ok(())
        } else {
            let found = self.describe_next();
            self.error(format!("expected `{token}`, found {found}"))
        }
    }

    pub(crate) fn describe_next(&mut self) -> String {
        match self.peek_char() {
            None => "end of input".to_string(),
            Some(c) => format!("`{c}`"),
        }
    }

    /// Identifier `[A-Za-z][A-Za-z0-9_']*`, optionally followed by one of the
    /// `suffixes` characters (used for polarity marks such as `s+`).
    pub(crate) fn peek_ident(&mut self, suffixes: &[char]) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() => {}
            _ => return None,
        }
        let mut end = rest.len();
        for (i, c) in chars {
            if !(c.is_ascii_alphanumeric() || c == '_' || c == '\'') {
                end = i;
                break;
            }
        }
        if let Some(c) = rest[end..].chars().next() {
            if suffixes.contains(&c) {
                end += 1;
            }
        }
        Some(&rest[..end])
    }

    pub(crate) fn advance(&mut self, n: usize) {
        self.offset += n;
    }

    pub(crate) fn nat(&mut self) -> Option<usize> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len());
        if end == 0 {
            return None;
        }
        let value = rest[..end].parse().ok()?;
        self.offset += end;
        Some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        let mut c = Cursor::new("a\n  b");
        assert_eq!(c.pos(), Pos { line: 1, col: 1 });
        c.advance(1);
        c.skip_ws();
        assert_eq!(c.pos(), Pos { line: 2, col: 3 });
    }

    #[test]
    fn ident_suffixes() {
        let mut c = Cursor::new("s+ t");
        assert_eq!(c.peek_ident(&['+', '-']), Some("s+"));
        let mut c = Cursor::new("s-o t");
        assert_eq!(c.peek_ident(&[]), Some("s"));
        let mut c = Cursor::new("x' y");
        assert_eq!(c.peek_ident(&[]), Some("x'"));
    }
}
