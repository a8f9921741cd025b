//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' power)?
//! power  := ['-'] number | '(' ['-'] number ')'
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Whitespace is insignificant and input must be ASCII. Identifiers that are
//! not coordinates (`t x y z r`), function names or `pi` become parameters.
//! Error columns are 0-based character offsets.

use super::{Coord, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn syntax(column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { column, message: message.into() }
}

impl Lexer {
    fn new(text: &str) -> Result<Self> {
        if let Some(pos) = text.chars().position(|c| !c.is_ascii()) {
            return Err(syntax(pos, "non-ASCII character"));
        }
        let b = text.as_bytes();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < b.len() {
            let c = b[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut j = i + 1;
                    if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                        j += 1;
                    }
                    if j < b.len() && b[j].is_ascii_digit() {
                        i = j;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{s}`")))?;
                toks.push((Tok::Num(v), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            } else if "+-*/^()".contains(c) {
                toks.push((Tok::Sym(c), i));
                i += 1;
            } else {
                return Err(syntax(i, format!("unexpected character `{c}`")));
            }
        }
        toks.push((Tok::End, b.len()));
        Ok(Self { toks })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.column(), format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc * self.factor()?;
            } else if self.eat('/') {
                acc = acc / self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if self.eat('^') {
            let col = self.column();
            let exponent = self.power()?;
            return base.pow(exponent).map_err(|e| match e {
                Error::Syntax { message, .. } => syntax(col, message),
                other => other,
            });
        }
        Ok(base)
    }

    fn power(&mut self) -> Result<f64> {
        let paren = self.eat('(');
        let sign = if self.eat('-') { -1.0 } else { 1.0 };
        let col = self.column();
        let v = match self.bump() {
            Tok::Num(v) => v,
            other => return Err(syntax(col, format!("expected numeric exponent, found {}", describe(&other)))),
        };
        if paren {
            self.expect(')')?;
        }
        Ok(sign * v)
    }

    fn base(&mut self) -> Result<Expr> {
        let col = self.column();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Sym('(') {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| syntax(col, format!("unknown function `{name}`")))?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::call(func, arg))
                } else if let Some(c) = Coord::from_name(&name) {
                    Ok(Expr::var(c))
                } else if name == "pi" {
                    Ok(Expr::constant(std::f64::consts::PI))
                } else if Func::from_name(&name).is_some() {
                    Err(syntax(self.column(), format!("expected `(` after `{name}`")))
                } else {
                    Ok(Expr::param(name))
                }
            }
            other => Err(syntax(col, format!("expected operand, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

/// Parses an expression.
pub fn parse(text: &str) -> Result<Expr> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let lexer = Lexer::new(text)?;
    let mut p = Parser { toks: lexer.toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.column(), format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;

    fn column_of(text: &str) -> usize {
        match parse(text) {
            Err(Error::Syntax { column, .. }) => column,
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unbalanced_paren_points_past_input() {
        assert_eq!(column_of("sqrt("), 5);
        assert_eq!(column_of("(x + 1"), 6);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(column_of("x $ y"), 2);
        assert_eq!(column_of("x y"), 2);
        assert_eq!(column_of("foo(x)"), 0);
        assert_eq!(column_of("2 * "), 4);
        assert_eq!(column_of(""), 0);
        assert!(parse("x^y").is_err());
        assert!(parse("x²").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let p = Params::new();
        let at = [0.0, 2.0, 3.0, 0.0];
        let v = |s: &str| parse(s).unwrap().value(&at, &p).unwrap();
        assert_eq!(v("1 - 2 - 3"), -4.0);
        assert_eq!(v("8 / 2 / 2"), 2.0);
        assert_eq!(v("-x^2"), -4.0);
        assert_eq!(v("x*y^2"), 18.0);
        assert_eq!(v("x^-1"), 0.5);
        assert_eq!(v("x^(-2)"), 0.25);
        assert_eq!(v("2e-1 * 10"), 2.0);
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "1 - 2 - 3",
            "a - (b - c)",
            "-x^2 + (-3)*y",
            "(1 - mu/(2*r))/(1 + mu/(2*r))",
            "sqrt(x^2 + 1)^(-1.5) * exp(-t)",
            "1e-7 * x / (y / z)",
        ] {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            let again = parse(&printed).unwrap();
            assert_eq!(again.to_string(), printed, "from {s}");
        }
    }
}
