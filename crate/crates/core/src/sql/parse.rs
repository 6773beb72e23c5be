//! Parser for the SQL this crate renders. Operators and functions are
//! recognized by matching the catalog templates, so a catalog change needs no
//! parser change. Used by the mock dialect to read statements back.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::feature::{Catalog, Category, SqlType, TemplatePart};

use super::ast::{
    ColumnDef, ColumnRef, Expr, FromClause, Join, JoinKind, Projection, Select, Statement, Value,
};
use super::render::{exists_keyword, join_keyword, type_keyword};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at token {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
}

impl Token {
    fn is_kw(&self, kw: &str) -> bool {
        matches!(self, Token::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn same_as(&self, other: &Token) -> bool {
        match (self, other) {
            (Token::Ident(a), Token::Ident(b)) => a.eq_ignore_ascii_case(b),
            _ => self == other,
        }
    }
}

const SYMBOLS: [&str; 24] = [
    "<=>", "<=", ">=", "<>", "!=", "==", "||", "<<", ">>", "(", ")", ",", ".", ";", "=", "<", ">",
    "+", "-", "*", "/", "%", "~", "&",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, message: String| ParseError { pos, message };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token::Ident(text[start..i].to_string()));
        } else if c.is_ascii_digit()
            || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v: i128 = text[start..i]
                .parse()
                .map_err(|_| err(out.len(), "bad number".into()))?;
            let v = i64::try_from(v).map_err(|_| {
                err(
                    out.len(),
                    format!("integer {} out of range", &text[start..i]),
                )
            })?;
            out.push(Token::Int(v));
        } else if c == b'\'' {
            let mut s = String::new();
            i += 1;
            loop {
                match text[i..].find('\'') {
                    None => return Err(err(out.len(), "unterminated string".into())),
                    Some(off) => {
                        s.push_str(&text[i..i + off]);
                        i += off + 1;
                        if bytes.get(i) == Some(&b'\'') {
                            s.push('\'');
                            i += 1;
                        } else {
                            break;
                        }
                    }
                }
            }
            out.push(Token::Str(s));
        } else if c == b'|' && bytes.get(i + 1) != Some(&b'|') {
            out.push(Token::Sym("|"));
            i += 1;
        } else {
            let sym = SYMBOLS
                .iter()
                .find(|s| text[i..].starts_with(**s))
                .ok_or_else(|| err(out.len(), format!("unexpected character `{}`", c as char)))?;
            out.push(Token::Sym(sym));
            i += sym.len();
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Pat {
    Lit(Token),
    Slot,
}

#[derive(Clone, Debug)]
struct Form {
    feature: usize,
    pats: Vec<Pat>,
}

/// Template-derived recognizers for one catalog.
#[derive(Clone, Debug)]
pub struct Grammar {
    operators: Vec<Form>,
    functions: HashMap<String, Vec<Form>>,
    joins: Vec<(JoinKind, Vec<Token>)>,
    types: Vec<(SqlType, Vec<Token>)>,
    exists: Vec<Token>,
}

fn template_pats(catalog: &Catalog, feature: usize) -> Vec<Pat> {
    let mut pats = Vec::new();
    for part in &catalog.template(feature).expect("template").parts {
        match part {
            TemplatePart::Slot(_) => pats.push(Pat::Slot),
            TemplatePart::Text(t) => pats.extend(
                tokenize(t)
                    .expect("catalog template text tokenizes")
                    .into_iter()
                    .map(Pat::Lit),
            ),
        }
    }
    pats
}

impl Grammar {
    pub fn new(catalog: &Catalog) -> Grammar {
        let mut operators = Vec::new();
        let mut functions: HashMap<String, Vec<Form>> = HashMap::new();
        for idx in catalog.expression_features() {
            let form = Form {
                feature: idx,
                pats: template_pats(catalog, idx),
            };
            match catalog.category(idx) {
                Category::Operator => operators.push(form),
                _ => {
                    if let Some(Pat::Lit(Token::Ident(name))) = form.pats.first() {
                        functions
                            .entry(name.to_ascii_uppercase())
                            .or_default()
                            .push(form);
                    }
                }
            }
        }
        let literals = |f: &Form| f.pats.iter().filter(|p| matches!(p, Pat::Lit(_))).count();
        // Most specific first: `x IS NOT NULL` must not read as `x IS NOT <NULL>`.
        operators.sort_by(|a, b| {
            literals(b)
                .cmp(&literals(a))
                .then(a.feature.cmp(&b.feature))
        });
        for forms in functions.values_mut() {
            forms.sort_by(|a, b| {
                literals(b)
                    .cmp(&literals(a))
                    .then(a.feature.cmp(&b.feature))
            });
        }
        let mut joins: Vec<(JoinKind, Vec<Token>)> = JoinKind::ALL
            .into_iter()
            .map(|k| {
                (
                    k,
                    tokenize(&join_keyword(catalog, k)).expect("join keyword tokenizes"),
                )
            })
            .collect();
        joins.sort_by_key(|(_, toks)| std::cmp::Reverse(toks.len()));
        let types = SqlType::ALL
            .into_iter()
            .map(|t| {
                (
                    t,
                    tokenize(&type_keyword(catalog, t)).expect("type keyword tokenizes"),
                )
            })
            .collect();
        Grammar {
            operators,
            functions,
            joins,
            types,
            exists: tokenize(&exists_keyword(catalog)).expect("keyword"),
        }
    }

    /// Operator slots where a bare `NULL`, `TRUE` or `FALSE` would make the
    /// rendered text read as a different operator, e.g. `x IS NULL` for `IS`.
    pub fn keyword_conflicts(&self) -> HashSet<(usize, usize, Value)> {
        let mut out = HashSet::new();
        let column = [
            Token::Ident("t0".into()),
            Token::Sym("."),
            Token::Ident("c0".into()),
        ];
        for form in &self.operators {
            let slots = form.pats.iter().filter(|p| matches!(p, Pat::Slot)).count();
            for slot in 0..slots {
                for kw in [Value::Null, Value::Bool(true), Value::Bool(false)] {
                    let mut toks = vec![Token::Sym("(")];
                    let mut seen = 0;
                    for pat in &form.pats {
                        match pat {
                            Pat::Lit(t) => toks.push(t.clone()),
                            Pat::Slot if seen == slot => {
                                toks.push(Token::Ident(kw.to_string()));
                                seen += 1;
                            }
                            Pat::Slot => {
                                toks.extend(column.iter().cloned());
                                seen += 1;
                            }
                        }
                    }
                    toks.push(Token::Sym(")"));
                    let mut p = Parser {
                        g: self,
                        toks: &toks,
                        pos: 0,
                        memo: HashMap::new(),
                    };
                    let same = matches!(p.primary(), Ok(Expr::Call { feature, .. }) if feature == form.feature)
                        && p.pos == toks.len();
                    if !same {
                        out.insert((form.feature, slot, kw));
                    }
                }
            }
        }
        out
    }

    pub fn parse_statement(&self, sql: &str) -> Result<Statement, ParseError> {
        let tokens = tokenize(sql)?;
        let mut p = Parser {
            g: self,
            toks: &tokens,
            pos: 0,
            memo: HashMap::new(),
        };
        let stmt = p.statement()?;
        if p.peek_sym(";") {
            p.pos += 1;
        }
        if p.pos != tokens.len() {
            return Err(p.err("trailing tokens"));
        }
        Ok(stmt)
    }

    pub fn parse_expr(&self, sql: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(sql)?;
        let mut p = Parser {
            g: self,
            toks: &tokens,
            pos: 0,
            memo: HashMap::new(),
        };
        let e = p.primary()?;
        if p.pos != tokens.len() {
            return Err(p.err("trailing tokens"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    g: &'a Grammar,
    toks: &'a [Token],
    pos: usize,
    memo: HashMap<usize, Option<(Expr, usize)>>,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + off)
    }

    fn peek_kw(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(kw))
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Token::Sym(x)) if *x == s)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek_kw(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {kw}")))
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.peek_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn eat_seq(&mut self, seq: &[Token]) -> bool {
        if seq
            .iter()
            .enumerate()
            .all(|(i, t)| self.peek_at(i).is_some_and(|x| x.same_as(t)))
        {
            self.pos += seq.len();
            true
        } else {
            false
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect_sym("(")?;
        let mut out = vec![self.ident()?];
        while self.peek_sym(",") {
            self.pos += 1;
            out.push(self.ident()?);
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if self.peek_kw("CREATE") {
            self.pos += 1;
            if self.peek_kw("TABLE") {
                self.pos += 1;
                let name = self.ident()?;
                self.expect_sym("(")?;
                let mut columns = Vec::new();
                loop {
                    let col = self.ident()?;
                    let dtype = self.sql_type()?;
                    columns.push(ColumnDef { name: col, dtype });
                    if self.peek_sym(",") {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect_sym(")")?;
                return Ok(Statement::CreateTable { name, columns });
            }
            let unique = self.peek_kw("UNIQUE");
            if unique {
                self.pos += 1;
            }
            if self.peek_kw("INDEX") {
                self.pos += 1;
                let name = self.ident()?;
                self.expect_kw("ON")?;
                let table = self.ident()?;
                let columns = self.ident_list()?;
                return Ok(Statement::CreateIndex {
                    name,
                    table,
                    columns,
                    unique,
                });
            }
            if !unique && self.peek_kw("VIEW") {
                self.pos += 1;
                let name = self.ident()?;
                let columns = self.ident_list()?;
                self.expect_kw("AS")?;
                let select = self.select()?;
                return Ok(Statement::CreateView {
                    name,
                    columns,
                    select,
                });
            }
            return Err(self.err("unsupported CREATE form"));
        }
        if self.peek_kw("INSERT") {
            self.pos += 1;
            self.expect_kw("INTO")?;
            let table = self.ident()?;
            let columns = self.ident_list()?;
            self.expect_kw("VALUES")?;
            let mut rows = Vec::new();
            loop {
                self.expect_sym("(")?;
                let mut row = vec![self.primary()?];
                while self.peek_sym(",") {
                    self.pos += 1;
                    row.push(self.primary()?);
                }
                self.expect_sym(")")?;
                rows.push(row);
                if self.peek_sym(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            return Ok(Statement::Insert {
                table,
                columns,
                rows,
            });
        }
        if self.peek_kw("ANALYZE") {
            self.pos += 1;
            return Ok(Statement::Analyze);
        }
        if self.peek_kw("SELECT") {
            return Ok(Statement::Select(self.select()?));
        }
        Err(self.err("unknown statement"))
    }

    fn sql_type(&mut self) -> Result<SqlType, ParseError> {
        for (ty, toks) in &self.g.types {
            if self.eat_seq(toks) {
                return Ok(*ty);
            }
        }
        Err(self.err("unknown data type"))
    }

    fn select(&mut self) -> Result<Select, ParseError> {
        self.expect_kw("SELECT")?;
        let distinct = self.peek_kw("DISTINCT");
        if distinct {
            self.pos += 1;
        }
        let projection = if self.peek_sym("*") {
            self.pos += 1;
            Projection::Star
        } else {
            let mut items = vec![self.primary()?];
            while self.peek_sym(",") {
                self.pos += 1;
                items.push(self.primary()?);
            }
            Projection::Exprs(items)
        };
        self.expect_kw("FROM")?;
        let first = self.ident()?;
        let mut joins = Vec::new();
        'joins: loop {
            for (kind, toks) in &self.g.joins {
                if self.eat_seq(toks) {
                    let table = self.ident()?;
                    let on = if self.peek_kw("ON") {
                        self.pos += 1;
                        Some(self.primary()?)
                    } else {
                        None
                    };
                    if kind.has_condition() != on.is_some() {
                        return Err(self.err("join condition mismatch"));
                    }
                    joins.push(Join {
                        kind: *kind,
                        table,
                        on,
                    });
                    continue 'joins;
                }
            }
            break;
        }
        let filter = if self.peek_kw("WHERE") {
            self.pos += 1;
            Some(self.primary()?)
        } else {
            None
        };
        Ok(Select {
            distinct,
            projection,
            from: FromClause { first, joins },
            filter,
        })
    }

    /// One self-delimiting expression: literal, column, function call, or a
    /// parenthesized operator application.
    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        if let Some(hit) = self.memo.get(&start) {
            return match hit {
                Some((e, end)) => {
                    self.pos = *end;
                    Ok(e.clone())
                }
                None => Err(self.err("expected expression")),
            };
        }
        let result = self.primary_uncached();
        let entry = match &result {
            Ok(e) => Some((e.clone(), self.pos)),
            Err(_) => {
                self.pos = start;
                None
            }
        };
        self.memo.insert(start, entry);
        result
    }

    fn primary_uncached(&mut self) -> Result<Expr, ParseError> {
        let tok = self
            .peek()
            .ok_or_else(|| self.err("unexpected end of input"))?;
        match tok {
            Token::Int(v) => {
                self.pos += 1;
                Ok(Expr::constant(Value::Int(*v), SqlType::Int))
            }
            Token::Str(s) => {
                self.pos += 1;
                Ok(Expr::constant(Value::Text(s.clone()), SqlType::Str))
            }
            Token::Ident(name) => {
                if matches!(self.peek_at(1), Some(Token::Sym("."))) {
                    let table = name.clone();
                    self.pos += 2;
                    let column = self.ident()?;
                    return Ok(Expr::Column {
                        col: ColumnRef { table, column },
                        dtype: None,
                    });
                }
                if matches!(self.peek_at(1), Some(Token::Sym("("))) {
                    let forms = self
                        .g
                        .functions
                        .get(&name.to_ascii_uppercase())
                        .ok_or_else(|| self.err("unknown function"))?;
                    return self.match_forms(forms);
                }
                let value = if name.eq_ignore_ascii_case("NULL") {
                    Value::Null
                } else if name.eq_ignore_ascii_case("TRUE") {
                    Value::Bool(true)
                } else if name.eq_ignore_ascii_case("FALSE") {
                    Value::Bool(false)
                } else {
                    return Err(self.err("unexpected identifier"));
                };
                self.pos += 1;
                let dtype = value.sql_type();
                Ok(Expr::Constant { value, dtype })
            }
            Token::Sym("(") => {
                let start = self.pos;
                self.pos += 1;
                if self.eat_seq(&self.g.exists) && self.peek_sym("(") {
                    self.pos += 1;
                    let sel = self.select()?;
                    self.expect_sym(")")?;
                    self.expect_sym(")")?;
                    return Ok(Expr::Exists(Box::new(sel)));
                }
                self.pos = start + 1;
                for form in &self.g.operators {
                    self.pos = start + 1;
                    if let Some(args) = self.match_pats(&form.pats) {
                        if self.peek_sym(")") {
                            self.pos += 1;
                            return Ok(Expr::Call {
                                feature: form.feature,
                                args,
                                dtype: None,
                            });
                        }
                    }
                }
                self.pos = start;
                Err(self.err("no operator matches"))
            }
            Token::Sym(_) => Err(self.err("unexpected symbol")),
        }
    }

    fn match_forms(&mut self, forms: &[Form]) -> Result<Expr, ParseError> {
        let start = self.pos;
        for form in forms {
            self.pos = start;
            if let Some(args) = self.match_pats(&form.pats) {
                return Ok(Expr::Call {
                    feature: form.feature,
                    args,
                    dtype: None,
                });
            }
        }
        self.pos = start;
        Err(self.err("no function form matches"))
    }

    fn match_pats(&mut self, pats: &[Pat]) -> Option<Vec<Expr>> {
        let mut args = Vec::new();
        for pat in pats {
            match pat {
                Pat::Lit(t) => {
                    if self.peek().is_some_and(|x| x.same_as(t)) {
                        self.pos += 1;
                    } else {
                        return None;
                    }
                }
                Pat::Slot => args.push(self.primary().ok()?),
            }
        }
        Some(args)
    }
}
