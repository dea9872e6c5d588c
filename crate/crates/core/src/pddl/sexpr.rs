use alloc::string::String;
use alloc::vec::Vec;

use super::PddlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom { text: String, line: usize },
    List { items: Vec<Sexpr>, line: usize },
}

impl Sexpr {
    pub fn line(&self) -> usize {
        match self {
            Sexpr::Atom { line, .. } | Sexpr::List { line, .. } => *line,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            Sexpr::List { .. } => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            Sexpr::Atom { .. } => None,
        }
    }

    /// Head symbol of a list, if it starts with an atom.
    pub fn head(&self) -> Option<&str> {
        self.list()?.first()?.atom()
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.atom().is_some_and(|a| a.eq_ignore_ascii_case(kw))
    }
}

/// Reads exactly one top-level expression. `;` starts a line comment.
pub fn parse(source: &str) -> Result<Sexpr, PddlError> {
    let mut stack: Vec<(Vec<Sexpr>, usize)> = Vec::new();
    let mut done: Option<Sexpr> = None;
    let mut line = 1;
    let mut chars = source.chars().peekable();
    let mut word = String::new();

    fn flush(word: &mut String, line: usize, stack: &mut [(Vec<Sexpr>, usize)], done: &Option<Sexpr>) -> Result<(), PddlError> {
        if word.is_empty() {
            return Ok(());
        }
        let text = core::mem::take(word);
        match stack.last_mut() {
            Some((items, _)) => {
                items.push(Sexpr::Atom { text, line });
                Ok(())
            }
            None => Err(PddlError::syntax(
                line,
                if done.is_some() {
                    "trailing input after the definition"
                } else {
                    "expected \"(\""
                },
            )),
        }
    }

    while let Some(c) = chars.next() {
        match c {
            ';' => {
                flush(&mut word, line, &mut stack, &done)?;
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => {
                flush(&mut word, line, &mut stack, &done)?;
                if done.is_some() {
                    return Err(PddlError::syntax(line, "trailing input after the definition"));
                }
                stack.push((Vec::new(), line));
            }
            ')' => {
                flush(&mut word, line, &mut stack, &done)?;
                let (items, open_line) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(line, "unbalanced \")\""))?;
                let expr = Sexpr::List {
                    items,
                    line: open_line,
                };
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => done = Some(expr),
                }
            }
            c if c.is_whitespace() => {
                flush(&mut word, line, &mut stack, &done)?;
                if c == '\n' {
                    line += 1;
                }
            }
            c => word.push(c),
        }
    }
    flush(&mut word, line, &mut stack, &done)?;
    if let Some((_, open_line)) = stack.last() {
        return Err(PddlError::syntax(*open_line, "unclosed \"(\""));
    }
    done.ok_or_else(|| PddlError::syntax(line, "empty input"))
}
