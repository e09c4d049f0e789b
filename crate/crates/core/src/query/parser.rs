//! Query expression parser.
//!
//! ```text
//! expr := term (OR term)*
//! term := atom (AND atom)*
//! atom := IDENT | '(' expr ')'
//! ```
//!
//! AND binds tighter than OR; both fold left. Keywords are case-insensitive.

use crate::error::{Error, Result};
use crate::query::QueryTree;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    And,
    Or,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        match b {
            b'(' => {
                self.pos += 1;
                Ok((start, Tok::LParen))
            }
            b')' => {
                self.pos += 1;
                Ok((start, Tok::RParen))
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric()
                        || matches!(bytes[self.pos], b'_' | b'.' | b'-'))
                {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                let tok = if word.eq_ignore_ascii_case("and") {
                    Tok::And
                } else if word.eq_ignore_ascii_case("or") {
                    Tok::Or
                } else {
                    Tok::Ident(word.to_string())
                };
                Ok((start, tok))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{ch}`"),
                })
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer { src, pos: 0 };
        let peeked = lexer.next()?;
        Ok(Self { lexer, peeked })
    }

    fn bump(&mut self) -> Result<(usize, Tok)> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn expr(&mut self) -> Result<QueryTree> {
        let mut lhs = self.term()?;
        while self.peeked.1 == Tok::Or {
            self.bump()?;
            let rhs = self.term()?;
            lhs = QueryTree::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<QueryTree> {
        let mut lhs = self.atom()?;
        while self.peeked.1 == Tok::And {
            self.bump()?;
            let rhs = self.atom()?;
            lhs = QueryTree::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<QueryTree> {
        match self.bump()? {
            (_, Tok::Ident(id)) => Ok(QueryTree::Leaf(id)),
            (_, Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump()? {
                    (_, Tok::RParen) => Ok(inner),
                    (pos, tok) => Err(Error::Syntax {
                        position: pos,
                        message: format!("expected `)`, found {}", describe(&tok)),
                    }),
                }
            }
            (pos, tok) => Err(Error::Syntax {
                position: pos,
                message: format!("expected atomic id or `(`, found {}", describe(&tok)),
            }),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::And => "AND".into(),
        Tok::Or => "OR".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses an expression without resolving ids.
pub fn parse_expression(text: &str) -> Result<QueryTree> {
    let mut p = Parser::new(text)?;
    let tree = p.expr()?;
    match &p.peeked {
        (_, Tok::End) => Ok(tree),
        (pos, tok) => Err(Error::Syntax {
            position: *pos,
            message: format!("unexpected {}", describe(tok)),
        }),
    }
}

/// Parses an expression and checks that every leaf is a declared atomic.
pub fn parse_query<S: AsRef<str>>(text: &str, atomics: &[S]) -> Result<QueryTree> {
    let tree = parse_expression(text)?;
    for id in tree.leaves() {
        if !atomics.iter().any(|a| a.as_ref() == id) {
            return Err(Error::UnknownAtomic(id.to_string()));
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::QueryTree as T;

    const IDS: [&str; 4] = ["Q1", "Q2", "Q3", "Q4"];

    #[test]
    fn single_atom() {
        assert_eq!(parse_query("Q1", &IDS).unwrap(), T::leaf("Q1"));
    }

    #[test]
    fn parenthesized() {
        let t = parse_query("Q1 AND (Q2 OR Q3)", &IDS).unwrap();
        assert_eq!(t, T::and(T::leaf("Q1"), T::or(T::leaf("Q2"), T::leaf("Q3"))));
    }

    #[test]
    fn and_binds_tighter() {
        let t = parse_query("Q1 OR Q2 AND Q3", &IDS).unwrap();
        assert_eq!(t, T::or(T::leaf("Q1"), T::and(T::leaf("Q2"), T::leaf("Q3"))));
    }

    #[test]
    fn left_associative() {
        let t = parse_query("Q1 and Q2 and Q3", &IDS).unwrap();
        assert_eq!(t, T::and(T::and(T::leaf("Q1"), T::leaf("Q2")), T::leaf("Q3")));
    }

    #[test]
    fn errors_carry_position() {
        match parse_query("Q1 AND", &IDS) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        match parse_query("(Q1 OR Q2", &IDS) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 9),
            other => panic!("{other:?}"),
        }
        match parse_query("Q1 # Q2", &IDS) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_query("Q1 Q2", &IDS), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(parse_query("Q1 OR Q7", &IDS), Err(Error::UnknownAtomic(id)) if id == "Q7"));
    }
}
