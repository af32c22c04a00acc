//! Parser for the automaton description language.
//!
//! A description is UTF-8 text; `#` starts a comment running to the end of
//! the line. The first non-empty line declares the alphabet, each following
//! line one state:
//!
//! ```text
//! alphabet 0 1
//! state a -> (b, a) perm [1,0]   # a = (b, a)σ
//! state b -> (b, a)              # b = (b, a)
//! ```
//!
//! The section list pairs with the alphabet by position and must have
//! exactly one entry per symbol. `perm` lists the images of each alphabet
//! position; when omitted the state is non-active (identity output). States
//! may reference states declared later.

use thiserror::Error;

use crate::automaton::{Alphabet, MealyAutomaton, Permutation, StateDef};
use crate::error::Result;

/// A parse failure with its source position (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    text: String,
    col: usize,
}

/// Splits one line into tokens. Punctuation `( ) [ ] ,` separates tokens by
/// itself; everything else splits on whitespace.
fn tokenize(line: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, c) in line.chars().enumerate() {
        if c == '#' {
            break;
        }
        if c.is_whitespace() || "()[],".contains(c) {
            if !current.is_empty() {
                tokens.push(Token {
                    text: std::mem::take(&mut current),
                    col: start + 1,
                });
            }
            if !c.is_whitespace() {
                tokens.push(Token {
                    text: c.to_string(),
                    col: i + 1,
                });
            }
        } else {
            if current.is_empty() {
                start = i;
            }
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(Token {
            text: current,
            col: start + 1,
        });
    }
    tokens
}

struct LineParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_col(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.col + t.text.chars().count())
    }

    fn expect(&mut self, what: &str) -> std::result::Result<&Token, ParseError> {
        let (line, col) = (self.line, self.end_col());
        self.next()
            .ok_or_else(|| ParseError::new(line, col, format!("expected {what}")))
    }

    fn expect_exact(&mut self, text: &str) -> std::result::Result<(), ParseError> {
        let line = self.line;
        let tok = self.expect(&format!("`{text}`"))?;
        if tok.text != text {
            return Err(ParseError::new(
                line,
                tok.col,
                format!("expected `{text}`, found `{}`", tok.text),
            ));
        }
        Ok(())
    }

    fn done(&mut self) -> std::result::Result<(), ParseError> {
        if let Some(tok) = self.peek() {
            return Err(ParseError::new(
                self.line,
                tok.col,
                format!("unexpected `{}`", tok.text),
            ));
        }
        Ok(())
    }
}

struct StateDecl {
    name: String,
    name_col: usize,
    sections: Vec<Token>,
    perm: Option<(Vec<usize>, usize)>,
    line: usize,
}

/// Parses an automaton description. See the module docs for the grammar.
pub fn parse_automaton(text: &str) -> Result<MealyAutomaton> {
    let mut alphabet: Option<Alphabet> = None;
    let mut decls: Vec<StateDecl> = Vec::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let mut p = LineParser {
            tokens: &tokens,
            pos: 0,
            line: line_no,
        };
        if alphabet.is_none() {
            p.expect_exact("alphabet")?;
            let mut symbols = Vec::new();
            while let Some(tok) = p.next() {
                if "()[],".contains(&tok.text) {
                    return Err(ParseError::new(
                        line_no,
                        tok.col,
                        format!("`{}` cannot be an alphabet symbol", tok.text),
                    )
                    .into());
                }
                symbols.push(tok.text.clone());
            }
            if symbols.len() < 2 {
                return Err(
                    ParseError::new(line_no, p.end_col(), "alphabet needs at least 2 symbols")
                        .into(),
                );
            }
            for (i, s) in symbols.iter().enumerate() {
                if symbols[..i].contains(s) {
                    return Err(ParseError::new(
                        line_no,
                        1,
                        format!("duplicate alphabet symbol `{s}`"),
                    )
                    .into());
                }
            }
            alphabet = Some(Alphabet::new(symbols)?);
            continue;
        }

        let d = alphabet.as_ref().unwrap().arity();
        p.expect_exact("state")?;
        let name_tok = p.expect("a state name")?;
        let (name, name_col) = (name_tok.text.clone(), name_tok.col);
        if "()[],->".contains(&name) || name == "state" {
            return Err(
                ParseError::new(line_no, name_col, format!("`{name}` cannot be a state name"))
                    .into(),
            );
        }
        p.expect_exact("->")?;
        p.expect_exact("(")?;
        let mut sections = Vec::new();
        loop {
            let tok = p.expect("a section state name")?.clone();
            sections.push(tok);
            let sep = p.expect("`,` or `)`")?;
            match sep.text.as_str() {
                "," => continue,
                ")" => break,
                other => {
                    return Err(ParseError::new(
                        line_no,
                        sep.col,
                        format!("expected `,` or `)`, found `{other}`"),
                    )
                    .into())
                }
            }
        }
        if sections.len() != d {
            return Err(ParseError::new(
                line_no,
                sections.first().map_or(1, |t| t.col),
                format!("state `{name}` lists {} sections, expected {d}", sections.len()),
            )
            .into());
        }
        let mut perm = None;
        if let Some(tok) = p.peek() {
            if tok.text == "perm" {
                p.next();
                let perm_col = p.peek().map_or(p.end_col(), |t| t.col);
                p.expect_exact("[")?;
                let mut images = Vec::new();
                loop {
                    let tok = p.expect("an image index")?;
                    let (col, text) = (tok.col, tok.text.clone());
                    let img: usize = text.parse().map_err(|_| {
                        ParseError::new(line_no, col, format!("`{text}` is not an index"))
                    })?;
                    if img >= d {
                        return Err(ParseError::new(
                            line_no,
                            col,
                            format!("image {img} out of range for arity {d}"),
                        )
                        .into());
                    }
                    images.push(img);
                    let sep = p.expect("`,` or `]`")?;
                    match sep.text.as_str() {
                        "," => continue,
                        "]" => break,
                        other => {
                            return Err(ParseError::new(
                                line_no,
                                sep.col,
                                format!("expected `,` or `]`, found `{other}`"),
                            )
                            .into())
                        }
                    }
                }
                if images.len() != d {
                    return Err(ParseError::new(
                        line_no,
                        perm_col,
                        format!("permutation lists {} images, expected {d}", images.len()),
                    )
                    .into());
                }
                if Permutation::new(images.clone()).is_err() {
                    return Err(ParseError::new(
                        line_no,
                        perm_col,
                        format!("{images:?} is not a bijective permutation"),
                    )
                    .into());
                }
                perm = Some((images, perm_col));
            }
        }
        p.done()?;
        if decls.iter().any(|s| s.name == name) {
            return Err(
                ParseError::new(line_no, name_col, format!("duplicate state `{name}`")).into(),
            );
        }
        decls.push(StateDecl {
            name,
            name_col,
            sections,
            perm,
            line: line_no,
        });
    }

    let alphabet = alphabet
        .ok_or_else(|| ParseError::new(1, 1, "missing `alphabet` declaration"))?;
    let d = alphabet.arity();

    // second pass: resolve state names (forward references are allowed)
    let find =
        |name: &str| -> Option<usize> { decls.iter().position(|s| s.name == name) };
    let mut states = Vec::with_capacity(decls.len());
    for decl in &decls {
        let mut sections = Vec::with_capacity(d);
        for tok in &decl.sections {
            let target = find(&tok.text).ok_or_else(|| {
                ParseError::new(decl.line, tok.col, format!("unknown state `{}`", tok.text))
            })?;
            sections.push(target);
        }
        let output = match &decl.perm {
            Some((images, _)) => Permutation::new(images.clone()).expect("validated above"),
            None => Permutation::identity(d),
        };
        let _ = decl.name_col;
        states.push(StateDef {
            name: decl.name.clone(),
            sections,
            output,
        });
    }
    MealyAutomaton::new(alphabet, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::GroupWord;
    use crate::error::Error;

    const LAMPLIGHTER: &str = "alphabet 0 1\nstate a -> (b, a) perm [1,0]\nstate b -> (b, a)\n";

    #[test]
    fn parses_lamplighter() {
        let aut = parse_automaton(LAMPLIGHTER).unwrap();
        assert_eq!(aut.state_count(), 2);
        assert_eq!(aut.state_name(0), "a");
        assert_eq!(aut.output(0).images(), &[1, 0]);
        assert!(aut.output(1).is_identity());
        assert_eq!(aut.transition(0, 0), 1);
        assert_eq!(aut.transition(0, 1), 0);
    }

    #[test]
    fn parses_identity_automaton() {
        let aut = parse_automaton("alphabet 0 1\nstate e -> (e, e)").unwrap();
        let v = aut.alphabet().parse_word("0110").unwrap();
        assert_eq!(aut.act(&GroupWord::state(0), &v), v);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let src = "# the lamplighter automaton\n\nalphabet 0 1  # binary\nstate a -> (b, a) perm [1,0]\nstate b -> (b, a)  # inactive\n";
        assert_eq!(parse_automaton(src).unwrap().state_count(), 2);
    }

    fn err(src: &str) -> ParseError {
        match parse_automaton(src).unwrap_err() {
            Error::Parse(e) => e,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn rejects_non_bijective_permutation() {
        let e = err("alphabet 0 1\nstate a -> (b, a) perm [1,1]\nstate b -> (b, a)");
        assert_eq!(e.line, 2);
        assert!(e.message.contains("not a bijective permutation"));
    }

    #[test]
    fn rejects_unknown_state() {
        let e = err("alphabet 0 1\nstate a -> (b, c) perm [1,0]\nstate b -> (b, a)");
        assert_eq!((e.line, e.col), (2, 16));
        assert!(e.message.contains("unknown state `c`"));
    }

    #[test]
    fn rejects_wrong_section_count() {
        let e = err("alphabet 0 1 2\nstate a -> (a, a)");
        assert_eq!(e.line, 2);
        assert!(e.message.contains("expected 3"));
    }

    #[test]
    fn rejects_syntax_errors_with_position() {
        let e = err("alphabet 0 1\nstate a (b, a)");
        assert_eq!(e.line, 2);
        assert!(e.message.contains("expected `->`"));
        let e = err("alphabet 0 1\nstate a -> (b, a) perm [1,0] junk");
        assert!(e.message.contains("unexpected `junk`"));
        let e = err("state a -> (a, a)");
        assert!(e.message.contains("expected `alphabet`"));
    }

    #[test]
    fn rejects_duplicates() {
        assert!(parse_automaton("alphabet 0 0").is_err());
        assert!(parse_automaton("alphabet 0 1\nstate a -> (a, a)\nstate a -> (a, a)").is_err());
    }

    #[test]
    fn perm_image_out_of_range() {
        let e = err("alphabet 0 1\nstate a -> (a, a) perm [2,0]");
        assert!(e.message.contains("out of range"));
    }

    #[test]
    fn forward_references_resolve() {
        let aut = parse_automaton("alphabet 0 1\nstate a -> (z, a) perm [1,0]\nstate z -> (z, z)")
            .unwrap();
        assert_eq!(aut.transition(0, 0), 1);
    }
}
