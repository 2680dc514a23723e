//! Recursive-descent parser for the supported XMILE expression subset.
//!
//! Precedence, loosest first: `and`/`or`, prefix `not`, comparisons,
//! `+ -`, `* /`, unary minus, `^`. Binary tiers are left-associative.

use super::expr::{BinaryOp, Builtin, Expr, UnaryOp};
use super::{canonicalize_name, ModelError};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Quoted(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> ModelError {
    ModelError::SyntaxError {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ModelError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let ch = src[i..].chars().next().unwrap();
        if ch.is_whitespace() {
            i += ch.len_utf8();
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || (ch == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let value: f64 = src[start..i]
                .parse()
                .map_err(|_| syntax(start, "malformed number"))?;
            if !value.is_finite() {
                return Err(syntax(start, "number out of range"));
            }
            out.push(Token {
                tok: Tok::Num(value),
                offset: start,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            while i < src.len() {
                let c = src[i..].chars().next().unwrap();
                if c.is_alphanumeric() || c == '_' {
                    i += c.len_utf8();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        if ch == '"' {
            i += 1;
            let mut text = String::new();
            loop {
                let Some(c) = src[i..].chars().next() else {
                    return Err(syntax(start, "unterminated quoted name"));
                };
                i += c.len_utf8();
                match c {
                    '"' => break,
                    '\\' => {
                        let Some(esc) = src[i..].chars().next() else {
                            return Err(syntax(start, "unterminated quoted name"));
                        };
                        i += esc.len_utf8();
                        text.push(esc);
                    }
                    _ => text.push(c),
                }
            }
            out.push(Token {
                tok: Tok::Quoted(text),
                offset: start,
            });
            continue;
        }
        let two = src.get(i..i + 2).unwrap_or("");
        let sym: &'static str = match two {
            "<=" => "<=",
            ">=" => ">=",
            "<>" => "<>",
            "!=" => "<>",
            "==" => "=",
            _ => match ch {
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '(' => "(",
                ')' => ")",
                ',' => ",",
                '<' => "<",
                '>' => ">",
                '=' => "=",
                _ => return Err(syntax(start, format!("unexpected character '{ch}'"))),
            },
        };
        i += if sym.len() == 2 || two == "!=" || two == "==" { 2 } else { 1 };
        out.push(Token {
            tok: Tok::Sym(sym),
            offset: start,
        });
    }
    Ok(out)
}

pub(crate) const KEYWORDS: [&str; 6] = ["and", "or", "not", "if", "then", "else"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x.eq_ignore_ascii_case(kw))
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ModelError> {
        if self.at_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected '{s}'")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ModelError> {
        if self.at_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected '{}'", kw.to_ascii_uppercase())))
        }
    }

    fn enter(&mut self) -> Result<(), ModelError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.offset(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn logical(&mut self) -> Result<Expr, ModelError> {
        self.enter()?;
        let mut lhs = self.not()?;
        loop {
            let op = if self.at_keyword("and") {
                BinaryOp::And
            } else if self.at_keyword("or") {
                BinaryOp::Or
            } else {
                break;
            };
            self.pos += 1;
            let rhs = self.not()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, ModelError> {
        if self.at_keyword("not") {
            self.pos += 1;
            self.enter()?;
            let child = self.not()?;
            self.depth -= 1;
            return Ok(Expr::unary(UnaryOp::Not, child));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("<")) => BinaryOp::Lt,
                Some(Tok::Sym("<=")) => BinaryOp::Le,
                Some(Tok::Sym(">")) => BinaryOp::Gt,
                Some(Tok::Sym(">=")) => BinaryOp::Ge,
                Some(Tok::Sym("=")) => BinaryOp::Eq,
                Some(Tok::Sym("<>")) => BinaryOp::Ne,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => BinaryOp::Add,
                Some(Tok::Sym("-")) => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("*")) => BinaryOp::Mul,
                Some(Tok::Sym("/")) => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        if self.at_sym("-") || self.at_sym("+") {
            let negate = self.at_sym("-");
            self.pos += 1;
            self.enter()?;
            let child = self.unary()?;
            self.depth -= 1;
            return Ok(if negate { Expr::unary(UnaryOp::Negate, child) } else { child });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.atom()?;
        while self.at_sym("^") {
            self.pos += 1;
            let rhs = self.exponent()?;
            lhs = Expr::binary(BinaryOp::Pow, lhs, rhs);
        }
        Ok(lhs)
    }

    // An exponent may carry its own sign: `2 ^ -1`.
    fn exponent(&mut self) -> Result<Expr, ModelError> {
        if self.at_sym("-") || self.at_sym("+") {
            let negate = self.at_sym("-");
            self.pos += 1;
            self.enter()?;
            let child = self.exponent()?;
            self.depth -= 1;
            return Ok(if negate { Expr::unary(UnaryOp::Negate, child) } else { child });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ModelError> {
        let offset = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(syntax(offset, "unexpected end of expression"));
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Number(v))
            }
            Tok::Quoted(name) => {
                self.pos += 1;
                let name = canonicalize_name(&name).map_err(|_| syntax(offset, "empty quoted name"))?;
                Ok(Expr::Identifier(name))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let inner = self.logical()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            Tok::Sym(s) => Err(syntax(offset, format!("unexpected '{s}'"))),
            Tok::Ident(word) => {
                if word.eq_ignore_ascii_case("if") {
                    self.pos += 1;
                    let cond = self.logical()?;
                    self.expect_keyword("then")?;
                    let yes = self.logical()?;
                    self.expect_keyword("else")?;
                    let no = self.logical()?;
                    return Ok(Expr::Call {
                        function: Builtin::IfThenElse,
                        args: vec![cond, yes, no],
                    });
                }
                if KEYWORDS.iter().any(|k| word.eq_ignore_ascii_case(k)) {
                    return Err(syntax(offset, format!("unexpected keyword '{word}'")));
                }
                self.pos += 1;
                if self.at_sym("(") {
                    let function = Builtin::from_name(&word).ok_or_else(|| ModelError::UnknownFunction(word.clone()))?;
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.at_sym(")") {
                        loop {
                            args.push(self.logical()?);
                            if self.at_sym(",") {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    return Expr::call(function, args);
                }
                Ok(Expr::Identifier(canonicalize_name(&word)?))
            }
        }
    }
}

/// Parses an equation into an [`Expr`], canonicalizing identifiers.
pub fn parse_equation(src: &str) -> Result<Expr, ModelError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: src.len(),
        depth: 0,
    };
    let expr = parser.logical()?;
    if parser.pos != parser.toks.len() {
        return Err(syntax(parser.offset(), "unexpected trailing input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> Expr {
        Expr::ident(s)
    }

    fn num(v: f64) -> Expr {
        Expr::Number(v)
    }

    #[test]
    fn product_of_identifiers() {
        assert_eq!(
            parse_equation("births * birth_rate").unwrap(),
            Expr::binary(BinaryOp::Mul, id("births"), id("birth_rate"))
        );
    }

    #[test]
    fn multiplication_binds_tighter_than_addition() {
        assert_eq!(
            parse_equation("3 + 4 * 2").unwrap(),
            Expr::binary(BinaryOp::Add, num(3.0), Expr::binary(BinaryOp::Mul, num(4.0), num(2.0)))
        );
    }

    #[test]
    fn call_with_canonicalized_identifiers() {
        assert_eq!(
            parse_equation("MAX(0, Population/lifetime)").unwrap(),
            Expr::Call {
                function: Builtin::Max,
                args: vec![num(0.0), Expr::binary(BinaryOp::Div, id("population"), id("lifetime"))],
            }
        );
    }

    #[test]
    fn precedence_tiers() {
        // Unary minus is looser than ^.
        assert_eq!(
            parse_equation("-2^2").unwrap(),
            Expr::unary(UnaryOp::Negate, Expr::binary(BinaryOp::Pow, num(2.0), num(2.0)))
        );
        // ^ is left-associative like every other tier.
        assert_eq!(
            parse_equation("2^3^2").unwrap(),
            Expr::binary(BinaryOp::Pow, Expr::binary(BinaryOp::Pow, num(2.0), num(3.0)), num(2.0))
        );
        assert_eq!(
            parse_equation("a - b - c").unwrap(),
            Expr::binary(BinaryOp::Sub, Expr::binary(BinaryOp::Sub, id("a"), id("b")), id("c"))
        );
        assert_eq!(
            parse_equation("a < b and c >= d").unwrap(),
            Expr::binary(
                BinaryOp::And,
                Expr::binary(BinaryOp::Lt, id("a"), id("b")),
                Expr::binary(BinaryOp::Ge, id("c"), id("d"))
            )
        );
        assert_eq!(
            parse_equation("(3 + 4) * 2").unwrap(),
            Expr::binary(BinaryOp::Mul, Expr::binary(BinaryOp::Add, num(3.0), num(4.0)), num(2.0))
        );
        assert_eq!(
            parse_equation("not a = b").unwrap(),
            Expr::unary(UnaryOp::Not, Expr::binary(BinaryOp::Eq, id("a"), id("b")))
        );
    }

    #[test]
    fn signed_exponent() {
        assert_eq!(
            parse_equation("2 ^ -1").unwrap(),
            Expr::binary(BinaryOp::Pow, num(2.0), Expr::unary(UnaryOp::Negate, num(1.0)))
        );
    }

    #[test]
    fn if_then_else_keyword_form() {
        let keyword = parse_equation("IF x > 0 THEN y ELSE -y").unwrap();
        let call = parse_equation("IF_THEN_ELSE(x > 0, y, -y)").unwrap();
        assert_eq!(keyword, call);
    }

    #[test]
    fn quoted_names_and_numbers() {
        assert_eq!(parse_equation("\"Birth Rate\"").unwrap(), id("birth_rate"));
        assert_eq!(parse_equation("Birth__Rate").unwrap(), id("birth_rate"));
        assert_eq!(parse_equation(".5").unwrap(), num(0.5));
        assert_eq!(parse_equation("1.5e-3").unwrap(), num(1.5e-3));
        assert_eq!(parse_equation("1e").err().map(|e| matches!(e, ModelError::SyntaxError { .. })), Some(true));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_equation(""), Err(ModelError::SyntaxError { offset: 0, .. })));
        assert!(matches!(parse_equation("3 +"), Err(ModelError::SyntaxError { offset: 3, .. })));
        assert!(matches!(parse_equation("a b"), Err(ModelError::SyntaxError { offset: 2, .. })));
        assert!(matches!(parse_equation("(a"), Err(ModelError::SyntaxError { .. })));
        assert!(matches!(parse_equation("a # b"), Err(ModelError::SyntaxError { offset: 2, .. })));
        assert_eq!(parse_equation("DELAY1(a, 3)"), Err(ModelError::UnknownFunction("DELAY1".into())));
        assert!(matches!(parse_equation("SQRT(1, 2)"), Err(ModelError::BadArity { .. })));
        assert!(matches!(parse_equation("and"), Err(ModelError::SyntaxError { .. })));
        assert!(matches!(parse_equation("1e999"), Err(ModelError::SyntaxError { .. })));
        let deep = "(".repeat(500) + "1" + &")".repeat(500);
        assert!(matches!(parse_equation(&deep), Err(ModelError::SyntaxError { .. })));
    }
}
