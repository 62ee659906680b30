//! Tokenizer shared by the MiniC parser and the annotation parser.

use super::ast::Location;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `\name`, e.g. `\result`, `\old`, `\true`.
    Backslash(String),
    Int(u128),
    Punct(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Backslash(s) => format!("`\\{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub loc: Location,
    /// Byte offset of the token start.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub loc: Location,
    pub offset: usize,
    pub message: String,
}

// Longest match first.
const PUNCTS: &[&str] = &[
    "==>", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "+", "-", "*", "/", "%", "!", "=", "(",
    ")", "{", "}", ",", ";", ":", "?", "[", "]",
];

/// Tokenize `src`. When `skip_directives` is set, lines whose first
/// non-blank character is `#` are dropped (preprocessor lines).
pub fn tokenize(src: &str, skip_directives: bool) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            if bytes[i] == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' || c == b' ' || c == b'\t' || c == b'\r' {
            bump!();
            continue;
        }
        if skip_directives && c == b'#' && src[..i].rsplit('\n').next().unwrap_or("").trim().is_empty() {
            while i < bytes.len() && bytes[i] != b'\n' {
                bump!();
            }
            continue;
        }
        let loc = Location { line, column: col };
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                bump!();
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            bump!();
            bump!();
            loop {
                if i >= bytes.len() {
                    return Err(LexError {
                        loc,
                        offset: i,
                        message: "unterminated comment".into(),
                    });
                }
                if bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                bump!();
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(LexError {
                    loc,
                    offset: start,
                    message: "malformed integer literal".into(),
                });
            }
            let text = &src[start..i];
            let v: u128 = text.parse().map_err(|_| LexError {
                loc,
                offset: start,
                message: format!("integer literal `{text}` too large"),
            })?;
            out.push(Token {
                tok: Tok::Int(v),
                loc,
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                loc,
                offset: start,
            });
            continue;
        }
        if c == b'\\' {
            bump!();
            let s = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                bump!();
            }
            if s == i {
                return Err(LexError {
                    loc,
                    offset: start,
                    message: "stray `\\`".into(),
                });
            }
            out.push(Token {
                tok: Tok::Backslash(src[s..i].to_string()),
                loc,
                offset: start,
            });
            continue;
        }
        let rest = &src[i..];
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.len() {
                    bump!();
                }
                out.push(Token {
                    tok: Tok::Punct(p),
                    loc,
                    offset: start,
                });
            }
            None => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(LexError {
                    loc,
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        loc: Location { line, column: col },
        offset: bytes.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_directives() {
        let toks = tokenize("#include <limits.h>\nint /* c */ x; // tail\n", true).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("int".into()),
                Tok::Ident("x".into()),
                Tok::Punct(";"),
                Tok::Eof
            ]
        );
        assert_eq!(toks[0].loc, Location { line: 2, column: 1 });
    }

    #[test]
    fn implication_is_one_token() {
        let toks = tokenize("a ==> b == c", false).unwrap();
        assert_eq!(toks[1].tok, Tok::Punct("==>"));
        assert_eq!(toks[3].tok, Tok::Punct("=="));
    }

    #[test]
    fn backslash_words() {
        let toks = tokenize("\\result == \\old(x)", false).unwrap();
        assert_eq!(toks[0].tok, Tok::Backslash("result".into()));
        assert_eq!(toks[2].tok, Tok::Backslash("old".into()));
    }
}
