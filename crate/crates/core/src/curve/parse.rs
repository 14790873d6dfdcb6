//! Recursive-descent parser for the curve expression language.
//!
//! ```text
//! curve   := '(' expr ',' expr ',' expr ')'
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' '-'? integer)?
//! atom    := number | 't' | 'pi' | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
//! ```

use super::expr::Expr;
use super::CurveError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Token, usize)>, CurveError> {
        let mut lexer = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lexer.next_token()?;
            let end = tok == Token::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next_token(&mut self) -> Result<(Token, usize), CurveError> {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((Token::End, start));
        };
        let simple = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            ',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = self.src[start..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(self.src.len() - start);
            self.pos = start + len;
            return Ok((Token::Ident(self.src[start..self.pos].to_string()), start));
        }
        Err(CurveError::Syntax {
            position: start,
            message: format!("unexpected character '{c}'"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Token, usize), CurveError> {
        let bytes = self.src.as_bytes();
        let mut i = start;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        // optional exponent: e or E followed by an optionally signed integer
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        self.pos = i;
        text.parse::<f64>()
            .map(|v| (Token::Num(v), start))
            .map_err(|_| CurveError::Syntax {
                position: start,
                message: format!("malformed number '{text}'"),
            })
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    index: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, CurveError> {
        Ok(Parser {
            tokens: Lexer::tokenize(src)?,
            index: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.index].0
    }

    fn position(&self) -> usize {
        self.tokens[self.index].1
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.index].0.clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        tok
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, CurveError> {
        Err(CurveError::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn expect(&mut self, expected: Token, what: &str) -> Result<(), CurveError> {
        if *self.peek() == expected {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn curve(&mut self) -> Result<[Expr; 3], CurveError> {
        self.expect(Token::LParen, "'('")?;
        let x = self.expr()?;
        self.expect(Token::Comma, "','")?;
        let y = self.expr()?;
        self.expect(Token::Comma, "','")?;
        let z = self.expr()?;
        self.expect(Token::RParen, "')'")?;
        self.expect(Token::End, "end of input")?;
        Ok([x, y, z])
    }

    fn expr(&mut self) -> Result<Expr, CurveError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.advance();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Token::Minus => {
                    self.advance();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, CurveError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.advance();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Token::Slash => {
                    self.advance();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, CurveError> {
        match self.peek() {
            Token::Minus => {
                self.advance();
                Ok(Expr::neg(self.unary()?))
            }
            Token::Plus => {
                self.advance();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, CurveError> {
        let base = self.atom()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.advance();
        let negative = if *self.peek() == Token::Minus {
            self.advance();
            true
        } else {
            false
        };
        let at = self.position();
        match self.advance() {
            Token::Num(v) if v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX) => {
                let n = v as i32;
                Ok(Expr::pow(base, if negative { -n } else { n }))
            }
            other => Err(CurveError::Syntax {
                position: at,
                message: format!("exponent must be an integer literal, found {}", describe(&other)),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, CurveError> {
        let at = self.position();
        match self.advance() {
            Token::Num(v) => Ok(Expr::Const(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "sin" | "cos" => {
                    self.expect(Token::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "')'")?;
                    Ok(if name == "sin" {
                        Expr::sin(arg)
                    } else {
                        Expr::cos(arg)
                    })
                }
                _ => Err(CurveError::UnknownIdentifier { name, position: at }),
            },
            other => Err(CurveError::Syntax {
                position: at,
                message: format!("expected a value, found {}", describe(&other)),
            }),
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Num(v) => format!("number {v}"),
        Token::Ident(s) => format!("'{s}'"),
        Token::Plus => "'+'".into(),
        Token::Minus => "'-'".into(),
        Token::Star => "'*'".into(),
        Token::Slash => "'/'".into(),
        Token::Caret => "'^'".into(),
        Token::LParen => "'('".into(),
        Token::RParen => "')'".into(),
        Token::Comma => "','".into(),
        Token::End => "end of input".into(),
    }
}

/// Parses a single expression in `t`.
pub fn parse_expr(src: &str) -> Result<Expr, CurveError> {
    let mut parser = Parser::new(src)?;
    let e = parser.expr()?;
    parser.expect(Token::End, "end of input")?;
    Ok(e)
}

/// Parses a curve triple `(x, y, z)` without validating it.
pub fn parse_components(src: &str) -> Result<[Expr; 3], CurveError> {
    Parser::new(src)?.curve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("1 + 2*3^2").unwrap();
        assert_eq!(e, Expr::Const(19.0));
        let e = parse_expr("-t^2").unwrap();
        assert_eq!(e.eval(3.0), -9.0);
        let e = parse_expr("(-t)^2").unwrap();
        assert_eq!(e.eval(3.0), 9.0);
        let e = parse_expr("2*-t").unwrap();
        assert_eq!(e.eval(3.0), -6.0);
        let e = parse_expr("t - t - 1").unwrap();
        assert_eq!(e.eval(5.0), -1.0);
        let e = parse_expr("8/t/2").unwrap();
        assert_eq!(e.eval(2.0), 2.0);
    }

    #[test]
    fn scientific_notation_and_pi() {
        assert_eq!(parse_expr("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expr("2E2").unwrap(), Expr::Const(200.0));
        assert_eq!(parse_expr("pi").unwrap(), Expr::Const(std::f64::consts::PI));
    }

    #[test]
    fn negative_integer_exponent() {
        let e = parse_expr("t^-2").unwrap();
        assert_eq!(e.eval(2.0), 0.25);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_components("(sin(t), cos(t) +, 0)") {
            Err(CurveError::Syntax { position, .. }) => assert_eq!(position, 17),
            other => panic!("unexpected {other:?}"),
        }
        match parse_expr("sin t") {
            Err(CurveError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        match parse_components("(x, 0, 0)") {
            Err(CurveError::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "x");
                assert_eq!(position, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_expr("tan(t)"),
            Err(CurveError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(matches!(parse_expr("t^1.5"), Err(CurveError::Syntax { .. })));
    }

    #[test]
    fn trailing_input_rejected() {
        assert!(parse_components("(t, t, t) t").is_err());
        assert!(parse_components("(t, t)").is_err());
    }
}
