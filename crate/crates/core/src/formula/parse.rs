//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! iff   := imp ("<->" imp)*
//! imp   := or ("->" imp)?
//! or    := and ("|" and)*
//! and   := unary ("&" unary)*
//! unary := "~" unary | "<>" unary | "[]" unary | atom
//! atom  := "true" | "false" | ident | "(" iff ")"
//! ```

use super::Formula;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    True,
    False,
    Ident(String),
    Not,
    Dia,
    Box,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Not => "`~`".into(),
            Tok::Dia => "`<>`".into(),
            Tok::Box => "`[]`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Imp => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn error(&self, pos: Pos, found: String, expected: &[&str]) -> Error {
        Error::Syntax {
            line: pos.line,
            column: pos.column,
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect_char(&mut self, pos: Pos, want: char, token: &str) -> Result<()> {
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => Err(self.error(pos, format!("`{c}`"), &[token])),
            None => Err(self.error(pos, "end of input".into(), &[token])),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>> {
        let mut out = Vec::new();
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            let pos = Pos {
                line: self.line,
                column: self.column,
            };
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let tok = match c {
                '~' => {
                    self.bump();
                    Tok::Not
                }
                '&' => {
                    self.bump();
                    Tok::And
                }
                '|' => {
                    self.bump();
                    Tok::Or
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '[' => {
                    self.bump();
                    self.expect_char(pos, ']', "`[]`")?;
                    Tok::Box
                }
                '-' => {
                    self.bump();
                    self.expect_char(pos, '>', "`->`")?;
                    Tok::Imp
                }
                '<' => {
                    self.bump();
                    match self.bump() {
                        Some('>') => Tok::Dia,
                        Some('-') => {
                            self.expect_char(pos, '>', "`<->`")?;
                            Tok::Iff
                        }
                        Some(c) => return Err(self.error(pos, format!("`<{c}`"), &["`<>`", "`<->`"])),
                        None => return Err(self.error(pos, "end of input".into(), &["`<>`", "`<->`"])),
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = self.chars.peek().map(|&(i, _)| i).unwrap_or(0);
                    let mut end = start;
                    while let Some(&(i, c)) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            end = i + c.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match &self.src[start..end] {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        s => Tok::Ident(s.to_string()),
                    }
                }
                other => {
                    return Err(self.error(
                        pos,
                        format!("`{other}`"),
                        &["`true`", "`false`", "identifier", "`~`", "`<>`", "`[]`", "`(`"],
                    ))
                }
            };
            out.push((tok, pos));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const START: &[&str] = &["`true`", "`false`", "identifier", "`~`", "`<>`", "`[]`", "`(`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail(&self, expected: &[&str]) -> Error {
        let pos = self.pos();
        Error::Syntax {
            line: pos.line,
            column: pos.column,
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.advance();
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Imp {
            self.advance();
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Dia => {
                self.advance();
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::Box => {
                self.advance();
                Ok(Formula::boxed(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::False => {
                self.advance();
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(Formula::Var(name))
            }
            Tok::LParen => {
                self.advance();
                let f = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.fail(&["`&`", "`|`", "`->`", "`<->`", "`)`"]));
                }
                self.advance();
                Ok(f)
            }
            _ => Err(self.fail(START)),
        }
    }
}

/// Parses a formula; derived connectives are expanded on the fly.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, at: 0 };
    let f = p.iff()?;
    if *p.peek() != Tok::Eof {
        return Err(p.fail(&["`&`", "`|`", "`->`", "`<->`", "end of input"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Formula {
        Formula::var(s)
    }

    #[test]
    fn precedence() {
        // ~ binds tighter than &, & than |, | than ->, -> than <->
        assert_eq!(parse("~a & b").unwrap(), Formula::and(Formula::not(v("a")), v("b")));
        assert_eq!(
            parse("a & b | c").unwrap(),
            Formula::or(Formula::and(v("a"), v("b")), v("c"))
        );
        assert_eq!(
            parse("a | b -> c").unwrap(),
            Formula::implies(Formula::or(v("a"), v("b")), v("c"))
        );
        assert_eq!(
            parse("a -> b <-> c").unwrap(),
            Formula::iff(Formula::implies(v("a"), v("b")), v("c"))
        );
    }

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(v("a"), Formula::implies(v("b"), v("c")))
        );
    }

    #[test]
    fn whitespace_and_newlines_are_ignored() {
        assert_eq!(parse(" <>\n\t( p_1 &q)").unwrap(), parse("<>(p_1&q)").unwrap());
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        match parse("p &\n  & q") {
            Err(Error::Syntax { line, column, found, expected }) => {
                assert_eq!((line, column), (2, 3));
                assert_eq!(found, "`&`");
                assert!(expected.contains(&"identifier".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(p"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p q"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p <- q"), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p $"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("[p"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn keywords_are_not_identifiers() {
        assert_eq!(parse("true_x").unwrap(), v("true_x"));
        assert_eq!(parse("false").unwrap(), Formula::False);
    }
}
