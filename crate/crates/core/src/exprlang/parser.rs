use super::{Expr, Func, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, at) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(self.syntax(start, format!("unexpected character `{ch}`")))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let mut integer = true;
        let digits = |lx: &mut Lexer| {
            let s = lx.pos;
            while lx.pos < bytes.len() && bytes[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if bytes.get(self.pos) == Some(&b'.') {
            integer = false;
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(self.syntax(start, "malformed number"));
        }
        if matches!(bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(bytes.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            } else {
                integer = false;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text
            .parse()
            .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.syntax(start, format!("number `{text}` overflows")));
        }
        Ok((Tok::Num { value, integer }, start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    arity: usize,
}

/// Parse `source` as an expression over variables `x1..x{arity}`.
pub fn parse(source: &str, arity: usize) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = Lexer::tokens(source)?;
    let mut p = Parser { toks, idx: 0, arity };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.syntax(format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num { value, .. } => format!("number {value}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if t != Tok::End {
            self.idx += 1;
        }
        t
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected {}, found {}", describe(&want), describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    /// Integer exponent, folded; right-associative chains like `2^3^2`.
    fn exponent(&mut self) -> Result<i32, ParseError> {
        let at = self.offset();
        let not_integer = ParseError::NonIntegerExponent { offset: at };
        let base: i64 = match self.bump() {
            Tok::LParen => {
                let v = self.exponent()?;
                self.expect(Tok::RParen)?;
                i64::from(v)
            }
            Tok::Minus => match self.bump() {
                Tok::Num { value, integer: true } => -(value as i64),
                Tok::LParen => {
                    let v = self.exponent()?;
                    self.expect(Tok::RParen)?;
                    -i64::from(v)
                }
                Tok::Num { .. } => return Err(not_integer),
                _ => return Err(not_integer),
            },
            Tok::Num { value, integer: true } => value as i64,
            _ => return Err(not_integer),
        };
        let value = if *self.peek() == Tok::Caret {
            self.bump();
            let e = self.exponent()?;
            if e < 0 {
                // base^(negative) is only integral for base = ±1
                match base {
                    1 => 1,
                    -1 => {
                        if e % 2 == 0 {
                            1
                        } else {
                            -1
                        }
                    }
                    _ => return Err(not_integer),
                }
            } else {
                let e = u32::try_from(e).map_err(|_| not_integer.clone())?;
                base.checked_pow(e).ok_or_else(|| not_integer.clone())?
            }
        } else {
            base
        };
        i32::try_from(value).map_err(|_| not_integer)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num { value, .. } => Ok(Expr::Const(value)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, at),
            t => Err(ParseError::Syntax {
                offset: at,
                message: format!("expected an operand, found {}", describe(&t)),
            }),
        }
    }

    fn identifier(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(&name) {
            self.expect(Tok::LParen)?;
            let arg = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "pi" {
            return Ok(Expr::Const(std::f64::consts::PI));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && !digits.starts_with('0') {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index > self.arity {
                    return Err(ParseError::VariableOutOfRange {
                        index,
                        arity: self.arity,
                        offset: at,
                    });
                }
                return Ok(Expr::Var(index - 1));
            }
        }
        Err(ParseError::UnknownIdentifier { name, offset: at })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn sum_and_product() {
        let e = parse("x1 + 2*x2", 2).unwrap();
        assert_eq!(
            e,
            Expr::Add(b(Expr::Var(0)), b(Expr::Mul(b(Expr::Const(2.0)), b(Expr::Var(1)))))
        );
    }

    #[test]
    fn example_component() {
        let e = parse("(x1 - x2)^2 / 2 - x3^2", 4).unwrap();
        let diff = Expr::Sub(b(Expr::Var(0)), b(Expr::Var(1)));
        let expected = Expr::Sub(
            b(Expr::Div(b(Expr::Pow(b(diff), 2)), b(Expr::Const(2.0)))),
            b(Expr::Pow(b(Expr::Var(2)), 2)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("sin(q)", 2).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                name: "q".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn variable_beyond_arity() {
        assert!(matches!(
            parse("x1 + x3", 2),
            Err(ParseError::VariableOutOfRange {
                index: 3,
                arity: 2,
                offset: 5
            })
        ));
        assert!(matches!(parse("x0", 2), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        // unary minus binds looser than ^
        assert_eq!(parse("-x1^2", 1).unwrap(), Expr::Neg(b(Expr::Pow(b(Expr::Var(0)), 2))));
        // left-associative subtraction
        assert_eq!(
            parse("x1 - x2 - x3", 3).unwrap(),
            Expr::Sub(b(Expr::Sub(b(Expr::Var(0)), b(Expr::Var(1)))), b(Expr::Var(2)))
        );
        // right-associative, folded exponent
        assert_eq!(parse("x1^2^3", 1).unwrap(), Expr::Pow(b(Expr::Var(0)), 8));
        assert_eq!(parse("x1^-2", 1).unwrap(), Expr::Pow(b(Expr::Var(0)), -2));
    }

    #[test]
    fn rejects_non_integer_exponent() {
        assert!(matches!(
            parse("x1^0.5", 1),
            Err(ParseError::NonIntegerExponent { offset: 3 })
        ));
        assert!(matches!(parse("x1^x1", 1), Err(ParseError::NonIntegerExponent { .. })));
        assert!(matches!(
            parse("x1^2^-1", 1),
            Err(ParseError::NonIntegerExponent { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(parse("x1 + ", 1), Err(ParseError::Syntax { offset: 5, .. })));
        assert!(matches!(parse("(x1", 1), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(parse("x1 $ 2", 1), Err(ParseError::Syntax { offset: 3, .. })));
        assert_eq!(parse("   ", 1), Err(ParseError::Empty));
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse("sqrt( 2 )*x1", 1).unwrap(), parse("sqrt(2) * x1", 1).unwrap());
    }

    #[test]
    fn pi_constant() {
        assert_eq!(parse("pi", 0).unwrap(), Expr::Const(std::f64::consts::PI));
    }
}
