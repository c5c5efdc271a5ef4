use thiserror::Error;

use super::ast::*;
use super::lexer::{Keyword, Token, TokenKind};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub pos: Position,
    pub expected: Vec<String>,
    pub found: String,
}

pub fn parse(tokens: &[Token]) -> Result<Script, ParseError> {
    let mut p = Parser { tokens, at: 0 };
    p.script()
}

struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> &TokenKind {
        &self.peek_token().kind
    }

    fn peek_token(&self) -> &Token {
        // tokenize always terminates the stream with Eof
        &self.tokens[self.at.min(self.tokens.len() - 1)]
    }

    fn peek_nth(&self, n: usize) -> &TokenKind {
        &self.tokens[(self.at + n).min(self.tokens.len() - 1)].kind
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.at.min(self.tokens.len() - 1)];
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        tok
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let tok = self.peek_token();
        Err(ParseError {
            pos: tok.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.kind.to_string(),
        })
    }

    fn at_symbol(&self, sym: &str) -> bool {
        matches!(self.peek(), TokenKind::Symbol(s) if *s == sym)
    }

    fn at_keyword(&self, kw: Keyword) -> bool {
        matches!(self.peek(), TokenKind::Keyword(k) if *k == kw)
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if self.at_symbol(sym) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, sym: &str) -> PResult<()> {
        if self.eat_symbol(sym) {
            Ok(())
        } else {
            self.error(&[&format!("`{sym}`")])
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(&[&format!("`{}`", kw.as_str())])
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn script(&mut self) -> PResult<Script> {
        let mut script = Script::default();
        while !matches!(self.peek(), TokenKind::Eof) {
            script.positions.push(self.peek_token().pos);
            script.statements.push(self.statement()?);
            if !self.eat_symbol(";") {
                if matches!(self.peek(), TokenKind::Eof) {
                    break;
                }
                return self.error(&["`;`", "end of input"]);
            }
        }
        Ok(script)
    }

    fn statement(&mut self) -> PResult<Stmt> {
        if let TokenKind::Ident(name) = self.peek().clone() {
            let next = self.peek_nth(1);
            if matches!(next, TokenKind::Symbol("=")) {
                self.advance();
                self.advance();
                let value = self.expr()?;
                return Ok(Stmt::Assign {
                    name,
                    ttl: None,
                    value,
                });
            }
            if matches!(next, TokenKind::Symbol("{")) {
                self.advance();
                self.advance();
                let ttl = match *self.peek() {
                    TokenKind::Int(i) => i as f64,
                    TokenKind::Float(f) => f,
                    _ => return self.error(&["number of seconds"]),
                };
                self.advance();
                self.expect_symbol("}")?;
                self.expect_symbol("=")?;
                let value = self.expr()?;
                return Ok(Stmt::Assign {
                    name,
                    ttl: Some(ttl),
                    value,
                });
            }
        }
        Ok(Stmt::Expr(self.expr()?))
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat_keyword(Keyword::Or) {
            let rhs = self.and()?;
            lhs = binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while self.eat_keyword(Keyword::And) {
            let rhs = self.not()?;
            lhs = binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.eat_keyword(Keyword::Not) {
            let inner = self.not()?;
            return Ok(Expr::Unary {
                op: UnOp::Not,
                expr: Box::new(inner),
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            TokenKind::Symbol("==") => BinOp::Eq,
            TokenKind::Symbol("!=") => BinOp::Ne,
            TokenKind::Symbol("<") => BinOp::Lt,
            TokenKind::Symbol("<=") => BinOp::Le,
            TokenKind::Symbol(">") => BinOp::Gt,
            TokenKind::Symbol(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.sum()?;
        Ok(binary(op, lhs, rhs))
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                TokenKind::Symbol("+") => BinOp::Add,
                TokenKind::Symbol("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.product()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                TokenKind::Symbol("*") => BinOp::Mul,
                TokenKind::Symbol("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_symbol("-") {
            let inner = self.unary()?;
            return Ok(Expr::Unary {
                op: UnOp::Neg,
                expr: Box::new(inner),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            TokenKind::Int(i) => {
                self.advance();
                Ok(Expr::Literal(Value::Int(i)))
            }
            TokenKind::Float(f) => {
                self.advance();
                Ok(Expr::Literal(Value::Float(f)))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::Literal(Value::Str(s)))
            }
            TokenKind::Keyword(Keyword::True) => {
                self.advance();
                Ok(Expr::Literal(Value::Bool(true)))
            }
            TokenKind::Keyword(Keyword::False) => {
                self.advance();
                Ok(Expr::Literal(Value::Bool(false)))
            }
            TokenKind::Keyword(Keyword::None) => {
                self.advance();
                Ok(Expr::Literal(Value::None))
            }
            TokenKind::Keyword(Keyword::This) => {
                self.advance();
                Ok(Expr::This(None))
            }
            TokenKind::Keyword(Keyword::Select) => Ok(Expr::Query(Box::new(self.query()?))),
            TokenKind::Keyword(Keyword::If) => self.if_expr(),
            TokenKind::Symbol("[") => {
                self.advance();
                let items = if self.at_symbol("]") {
                    Vec::new()
                } else {
                    self.arglist()?
                };
                self.expect_symbol("]")?;
                Ok(Expr::List(items))
            }
            TokenKind::Symbol("(") => {
                self.advance();
                let inner = self.expr()?;
                self.expect_symbol(")")?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.advance();
                if self.eat_symbol("(") {
                    let args = if self.at_symbol(")") {
                        Vec::new()
                    } else {
                        self.arglist()?
                    };
                    self.expect_symbol(")")?;
                    Ok(Expr::Call { name, args })
                } else if self.at_symbol(".") {
                    self.advance();
                    self.expect_keyword(Keyword::This)?;
                    Ok(Expr::This(Some(name)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => self.error(&["expression"]),
        }
    }

    fn arglist(&mut self) -> PResult<Vec<Expr>> {
        let mut items = vec![self.expr()?];
        while self.eat_symbol(",") {
            items.push(self.expr()?);
        }
        Ok(items)
    }

    fn if_expr(&mut self) -> PResult<Expr> {
        self.expect_keyword(Keyword::If)?;
        self.expect_symbol("(")?;
        let cond = self.expr()?;
        self.expect_symbol(";")?;
        let then = self.arglist()?;
        let otherwise = if self.eat_symbol(";") {
            Some(self.arglist()?)
        } else {
            None
        };
        self.expect_symbol(")")?;
        Ok(Expr::If {
            cond: Box::new(cond),
            then,
            otherwise,
        })
    }

    fn query(&mut self) -> PResult<Query> {
        self.expect_keyword(Keyword::Select)?;
        let select = self.arglist()?;
        self.expect_keyword(Keyword::From)?;
        let mut from = vec![self.from_item()?];
        while self.eat_symbol(",") {
            from.push(self.from_item()?);
        }
        let filter = if self.eat_keyword(Keyword::Where) {
            Some(self.expr()?)
        } else {
            None
        };
        let group_by = if self.eat_keyword(Keyword::Group) {
            self.expect_keyword(Keyword::By)?;
            self.arglist()?
        } else {
            Vec::new()
        };
        let order_by = if self.eat_keyword(Keyword::Order) {
            self.expect_keyword(Keyword::By)?;
            self.order_list()?
        } else {
            Vec::new()
        };
        let hierarchy = if self.at_keyword(Keyword::Start) {
            Some(self.hierarchy()?)
        } else {
            None
        };
        let format = if self.eat_keyword(Keyword::As) {
            let name = self.expect_ident()?;
            let args = if self.eat_symbol("(") {
                let args = if self.at_symbol(")") {
                    Vec::new()
                } else {
                    self.arglist()?
                };
                self.expect_symbol(")")?;
                Some(args)
            } else {
                None
            };
            Some(FormatSpec { name, args })
        } else {
            None
        };
        Ok(Query {
            select,
            from,
            filter,
            group_by,
            order_by,
            hierarchy,
            format,
        })
    }

    fn from_item(&mut self) -> PResult<FromItem> {
        if let (TokenKind::Ident(name), TokenKind::Symbol("=")) = (self.peek(), self.peek_nth(1)) {
            let name = name.clone();
            self.advance();
            self.advance();
            return Ok(FromItem {
                name: Some(name),
                source: self.expr()?,
            });
        }
        Ok(FromItem {
            name: None,
            source: self.expr()?,
        })
    }

    fn order_list(&mut self) -> PResult<Vec<OrderItem>> {
        let mut items = Vec::new();
        loop {
            let expr = self.expr()?;
            let descending = match self.peek() {
                TokenKind::Ident(w) if w.eq_ignore_ascii_case("desc") => {
                    self.advance();
                    true
                }
                TokenKind::Ident(w) if w.eq_ignore_ascii_case("asc") => {
                    self.advance();
                    false
                }
                _ => false,
            };
            items.push(OrderItem { expr, descending });
            if !self.eat_symbol(",") {
                return Ok(items);
            }
        }
    }

    fn hierarchy(&mut self) -> PResult<Hierarchy> {
        self.expect_keyword(Keyword::Start)?;
        self.expect_keyword(Keyword::With)?;
        let start = self.bind_list()?;
        self.expect_keyword(Keyword::Connect)?;
        self.expect_keyword(Keyword::By)?;
        let mut strategies = Vec::new();
        loop {
            let pos = self.peek_token().pos;
            let strategy = match self.peek() {
                TokenKind::Keyword(Keyword::No) => {
                    self.advance();
                    self.expect_keyword(Keyword::Cycle)?;
                    Strategy::NoCycle
                }
                TokenKind::Keyword(Keyword::Unique) => {
                    self.advance();
                    Strategy::Unique
                }
                TokenKind::Keyword(Keyword::Memorize) => {
                    self.advance();
                    Strategy::Memorize(self.positive_int()?)
                }
                TokenKind::Keyword(Keyword::Maximum) => {
                    self.advance();
                    Strategy::Maximum(self.positive_int()?)
                }
                _ => break,
            };
            let is_mode = |s: &Strategy| !matches!(s, Strategy::Maximum(_));
            let clash = strategies.iter().any(|s: &Strategy| {
                if is_mode(&strategy) {
                    is_mode(s)
                } else {
                    !is_mode(s)
                }
            });
            if clash {
                return Err(ParseError {
                    pos,
                    expected: vec!["at most one of NO CYCLE, UNIQUE, MEMORIZE and one MAXIMUM".into()],
                    found: format!("repeated strategy {strategy:?}"),
                });
            }
            strategies.push(strategy);
        }
        let connect = self.bind_list()?;
        self.expect_keyword(Keyword::Stop)?;
        self.expect_keyword(Keyword::With)?;
        let stop = self.expr()?;
        Ok(Hierarchy {
            start,
            strategies,
            connect,
            stop,
        })
    }

    fn positive_int(&mut self) -> PResult<u64> {
        match *self.peek() {
            TokenKind::Int(i) if i >= 1 => {
                self.advance();
                Ok(i as u64)
            }
            _ => self.error(&["positive integer"]),
        }
    }

    fn bind_list(&mut self) -> PResult<Vec<Binding>> {
        let mut items = Vec::new();
        loop {
            let name = self.expect_ident()?;
            self.expect_symbol("=")?;
            let value = self.expr()?;
            items.push(Binding { name, value });
            if !self.eat_symbol(",") {
                return Ok(items);
            }
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}
