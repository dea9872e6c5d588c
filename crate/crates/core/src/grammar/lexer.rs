//! Tokenizer for intent sentences. Offsets are character offsets into the
//! original text.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Word(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Character offset of the first character.
    pub start: usize,
    /// Character offset one past the last character.
    pub end: usize,
}

impl Token {
    pub fn word(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_word(&self, expected: &str) -> bool {
        self.word().is_some_and(|w| w.eq_ignore_ascii_case(expected))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub position: usize,
    pub message: &'static str,
}

/// Splits a sentence into words, quoted strings and the punctuation the
/// grammar uses. A single trailing period is dropped.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            ',' => {
                i += 1;
                TokenKind::Comma
            }
            '"' => {
                let close = chars[i + 1..].iter().position(|&ch| ch == '"');
                match close {
                    Some(len) => {
                        let s: String = chars[i + 1..i + 1 + len].iter().collect();
                        i += len + 2;
                        TokenKind::Quoted(s)
                    }
                    None => {
                        return Err(LexError {
                            position: start,
                            message: "unterminated quoted name",
                        })
                    }
                }
            }
            _ => {
                while i < chars.len() && !is_break(chars[i]) {
                    i += 1;
                }
                TokenKind::Word(chars[start..i].iter().collect())
            }
        };
        tokens.push(Token {
            kind,
            start,
            end: i,
        });
    }
    strip_final_period(&mut tokens);
    Ok(tokens)
}

fn is_break(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"')
}

fn strip_final_period(tokens: &mut Vec<Token>) {
    let Some(last) = tokens.last_mut() else {
        return;
    };
    if let TokenKind::Word(w) = &mut last.kind {
        if w == "." {
            tokens.pop();
        } else if w.len() > 1 && w.ends_with('.') {
            w.pop();
            last.end -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(text: &str) -> Vec<String> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| match t.kind {
                TokenKind::Word(w) => w,
                TokenKind::Quoted(q) => alloc::format!("\"{q}\""),
                TokenKind::LParen => "(".into(),
                TokenKind::RParen => ")".into(),
                TokenKind::Comma => ",".into(),
            })
            .collect()
    }

    #[test]
    fn splits_roles_and_commas() {
        assert_eq!(
            words("SITE1 (core), SITE2 and SITE3"),
            ["SITE1", "(", "core", ")", ",", "SITE2", "and", "SITE3"]
        );
    }

    #[test]
    fn offsets_are_characters() {
        let toks = tokenize("é SITE1").unwrap();
        assert_eq!(toks[1].start, 2);
        assert_eq!(toks[1].end, 7);
    }

    #[test]
    fn quoted_and_trailing_period() {
        assert_eq!(
            words("SITE1 in \"St. Louis\" and SITE2."),
            ["SITE1", "in", "\"St. Louis\"", "and", "SITE2"]
        );
        assert_eq!(words("SITE2 (edge) ."), ["SITE2", "(", "edge", ")"]);
        assert_eq!(words("is $1500000."), ["is", "$1500000"]);
    }

    #[test]
    fn unterminated_quote() {
        assert_eq!(tokenize("in \"Paris").unwrap_err().position, 3);
    }
}
