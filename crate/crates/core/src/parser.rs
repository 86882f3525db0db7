//! Reader for programs, queries and specification files.
//!
//! Grammar (no operator table; the comparison built-ins are the only infix
//! forms and only at atom level):
//!
//! ```text
//! program   ::= { clause | directive }
//! directive ::= ":-" atom "."
//! clause    ::= atom [ ":-" atom { "," atom } ] "."
//! atom      ::= term [ cmp term ]        cmp ::= =< | > | < | >= | =:= | =\=
//! term      ::= VAR | INT | name [ "(" term { "," term } ")" ] | list
//! list      ::= "[" "]" | "[" term { "," term } [ "|" term ] "]"
//! ```
//!
//! `%` starts a line comment. Names are `[a-z][A-Za-z0-9_]*` or single-quoted.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::program::Program;
use crate::term::{Atom, PredKey, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: Option<&'static str>,
    },
    BuiltinRedefinition {
        pred: PredKey,
        line: usize,
        column: usize,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::BuiltinRedefinition { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                line,
                column,
                message,
                expected,
            } => {
                write!(f, "syntax error at {line}:{column}: {message}")?;
                if let Some(e) = expected {
                    write!(f, " (expected {e})")?;
                }
                Ok(())
            }
            ParseError::BuiltinRedefinition { pred, line, column } => {
                write!(f, "{line}:{column}: cannot redefine built-in {pred}")
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(String),
    Name(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Comma,
    End,
    Neck,
    Cmp(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable {v}"),
            Tok::Name(n) => format!("name {n}"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::LParen => "'('".to_owned(),
            Tok::RParen => "')'".to_owned(),
            Tok::LBracket => "'['".to_owned(),
            Tok::RBracket => "']'".to_owned(),
            Tok::Bar => "'|'".to_owned(),
            Tok::Comma => "','".to_owned(),
            Tok::End => "end of clause '.'".to_owned(),
            Tok::Neck => "':-'".to_owned(),
            Tok::Cmp(op) => format!("'{op}'"),
            Tok::Eof => "end of input".to_owned(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: String) -> ParseError {
        ParseError::Syntax {
            line,
            column,
            message,
            expected: None,
        }
    }

    fn skip_layout(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_layout();
            let (line, column) = (self.line, self.column);
            let Some(c) = self.bump() else {
                out.push(Spanned {
                    tok: Tok::Eof,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '|' => Tok::Bar,
                ',' => Tok::Comma,
                '.' => match self.chars.peek() {
                    None => Tok::End,
                    Some(&n) if n.is_whitespace() || n == '%' => Tok::End,
                    Some(&n) => return Err(self.error(line, column, format!("unexpected '.' before '{n}'"))),
                },
                ':' => {
                    if self.chars.peek() == Some(&'-') {
                        self.bump();
                        Tok::Neck
                    } else {
                        return Err(self.error(line, column, "unexpected ':'".to_owned()));
                    }
                }
                '>' => {
                    if self.chars.peek() == Some(&'=') {
                        self.bump();
                        Tok::Cmp(">=")
                    } else {
                        Tok::Cmp(">")
                    }
                }
                '<' => Tok::Cmp("<"),
                '=' => match self.chars.peek() {
                    Some('<') => {
                        self.bump();
                        Tok::Cmp("=<")
                    }
                    Some(':') => {
                        self.bump();
                        self.expect_char('=', line, column)?;
                        Tok::Cmp("=:=")
                    }
                    Some('\\') => {
                        self.bump();
                        self.expect_char('=', line, column)?;
                        Tok::Cmp("=\\=")
                    }
                    _ => return Err(self.error(line, column, "unexpected '=' (no such operator)".to_owned())),
                },
                '-' => match self.chars.peek() {
                    Some(d) if d.is_ascii_digit() => Tok::Int(self.integer(true, line, column)?),
                    _ => return Err(self.error(line, column, "unexpected '-'".to_owned())),
                },
                '\'' => Tok::Name(self.quoted(line, column)?),
                c if c.is_ascii_digit() => {
                    let mut digits = String::new();
                    digits.push(c);
                    self.digits_into(&mut digits);
                    Tok::Int(parse_int(&digits).ok_or_else(|| self.error(line, column, "integer out of range".to_owned()))?)
                }
                c if c.is_ascii_uppercase() || c == '_' => Tok::Var(self.word(c)),
                c if c.is_ascii_lowercase() => Tok::Name(self.word(c)),
                other => return Err(self.error(line, column, format!("unexpected character '{other}'"))),
            };
            out.push(Spanned { tok, line, column });
        }
    }

    fn expect_char(&mut self, want: char, line: usize, column: usize) -> Result<(), ParseError> {
        if self.chars.peek() == Some(&want) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(line, column, "malformed comparison operator".to_owned()))
        }
    }

    fn digits_into(&mut self, s: &mut String) {
        while let Some(&d) = self.chars.peek() {
            if d.is_ascii_digit() {
                s.push(d);
                self.bump();
            } else {
                break;
            }
        }
    }

    fn integer(&mut self, negative: bool, line: usize, column: usize) -> Result<i64, ParseError> {
        let mut digits = String::new();
        if negative {
            digits.push('-');
        }
        self.digits_into(&mut digits);
        parse_int(&digits).ok_or_else(|| self.error(line, column, "integer out of range".to_owned()))
    }

    fn word(&mut self, first: char) -> String {
        let mut s = String::new();
        s.push(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn quoted(&mut self, line: usize, column: usize) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(line, column, "unterminated quoted name".to_owned())),
                Some('\'') => {
                    if self.chars.peek() == Some(&'\'') {
                        self.bump();
                        s.push('\'');
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some(c @ ('\\' | '\'')) => s.push(c),
                    _ => return Err(self.error(line, column, "bad escape in quoted name".to_owned())),
                },
                Some(c) => s.push(c),
            }
        }
    }
}

fn parse_int(s: &str) -> Option<i64> {
    s.parse().ok()
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Variables of the clause being read.
    scope: Vec<(String, Var)>,
    next_serial: u32,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: Lexer::new(text).tokenize()?,
            pos: 0,
            scope: Vec::new(),
            next_serial: 0,
        })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, at: &Spanned, message: String, expected: &'static str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: at.line,
            column: at.column,
            message,
            expected: Some(expected),
        })
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            self.fail(&t, format!("unexpected {}", t.tok.describe()), expected)
        }
    }

    fn reset_scope(&mut self) {
        self.scope.clear();
        self.next_serial = 0;
    }

    fn variable(&mut self, name: String) -> Term {
        if name == "_" {
            let v = Var::fresh(self.next_serial);
            self.next_serial += 1;
            return Term::Var(v);
        }
        if let Some((_, v)) = self.scope.iter().find(|(n, _)| *n == name) {
            return Term::Var(v.clone());
        }
        let v = Var::named(self.next_serial, &name);
        self.next_serial += 1;
        self.scope.push((name, v.clone()));
        Term::Var(v)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Var(name) => Ok(self.variable(name)),
            Tok::Int(i) => Ok(Term::Int(i)),
            Tok::Name(name) => {
                if self.peek().tok == Tok::LParen {
                    self.next();
                    let args = self.arguments()?;
                    Ok(Term::app(&name, args))
                } else {
                    Ok(Term::constant(&name))
                }
            }
            Tok::LBracket => self.list_rest(),
            other => self.fail(&t, format!("unexpected {}", other.describe()), "a term"),
        }
    }

    /// Arguments after the opening parenthesis.
    fn arguments(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = alloc::vec![self.term()?];
        loop {
            let t = self.next();
            match t.tok.clone() {
                Tok::Comma => args.push(self.term()?),
                Tok::RParen => return Ok(args),
                other => return self.fail(&t, format!("unexpected {}", other.describe()), "',' or ')'"),
            }
        }
    }

    fn list_rest(&mut self) -> Result<Term, ParseError> {
        if self.peek().tok == Tok::RBracket {
            self.next();
            return Ok(Term::nil());
        }
        let mut items = alloc::vec![self.term()?];
        loop {
            let t = self.next();
            match t.tok.clone() {
                Tok::Comma => items.push(self.term()?),
                Tok::Bar => {
                    let tail = self.term()?;
                    self.expect(Tok::RBracket, "']'")?;
                    return Ok(Term::list(items, Some(tail)));
                }
                Tok::RBracket => return Ok(Term::list(items, None)),
                other => return self.fail(&t, format!("unexpected {}", other.describe()), "',', '|' or ']'"),
            }
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let start = self.peek().clone();
        let lhs = self.term()?;
        if let Tok::Cmp(op) = self.peek().tok {
            self.next();
            let rhs = self.term()?;
            return Ok(Atom::new(op, alloc::vec![lhs, rhs]));
        }
        let callable = matches!(start.tok, Tok::Name(_));
        match (callable, Atom::from_term(&lhs)) {
            (true, Some(a)) => Ok(a),
            _ => self.fail(&start, format!("{lhs} is not an atom"), "a predicate call"),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut program = Program::new();
        while self.peek().tok != Tok::Eof {
            self.reset_scope();
            let start = self.peek().clone();
            if start.tok == Tok::Neck {
                self.next();
                let atom = self.atom()?;
                self.expect(Tok::End, "'.'")?;
                program.directives.push(crate::program::Directive {
                    atom,
                    line: start.line,
                    column: start.column,
                });
                continue;
            }
            let head = self.atom()?;
            if head.is_builtin() {
                return Err(ParseError::BuiltinRedefinition {
                    pred: head.key(),
                    line: start.line,
                    column: start.column,
                });
            }
            let mut body = Vec::new();
            let t = self.next();
            match t.tok.clone() {
                Tok::End => {}
                Tok::Neck => {
                    body.push(self.atom()?);
                    loop {
                        let t = self.next();
                        match t.tok.clone() {
                            Tok::Comma => body.push(self.atom()?),
                            Tok::End => break,
                            other => return self.fail(&t, format!("unexpected {}", other.describe()), "',' or '.'"),
                        }
                    }
                }
                other => return self.fail(&t, format!("unexpected {}", other.describe()), "':-' or '.'"),
            }
            program.push(head, body, start.line, start.column);
        }
        Ok(program)
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::End {
            self.next();
        }
        let t = self.next();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            self.fail(&t, format!("unexpected {}", t.tok.describe()), "end of input")
        }
    }
}

/// Parses a whole program text.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.program()
}

/// Parses a single query atom; a trailing `.` is optional.
pub fn parse_query(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let atom = p.atom()?;
    p.finish()?;
    Ok(atom)
}

/// Parses comma-separated atoms sharing one variable scope.
pub fn parse_atoms(text: &str) -> Result<Vec<Atom>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut atoms = Vec::new();
    if p.peek().tok == Tok::Eof {
        return Ok(atoms);
    }
    atoms.push(p.atom()?);
    while p.peek().tok == Tok::Comma {
        p.next();
        atoms.push(p.atom()?);
    }
    p.finish()?;
    Ok(atoms)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}
