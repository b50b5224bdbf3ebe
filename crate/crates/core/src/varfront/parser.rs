//! Recursive-descent parser for the supported C subset.
//!
//! Produces unresolved events: each names an identifier token and the
//! function it occurs in. Name resolution happens once every unit's
//! declarations are known.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::varfront::preprocess::{parse_int, Preprocessed, TokKind, Token};
use crate::varfront::EntityKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum EventKind {
    Declare(EntityKind),
    Label { declare: bool },
    Assign { null: bool },
    Use { call: bool },
    Destruct,
}

#[derive(Debug, Clone)]
pub(crate) struct Event {
    pub kind: EventKind,
    pub name: String,
    /// Enclosing function; `None` at file level.
    pub func: Option<String>,
    pub pc: usize,
    pub line: u32,
    /// Source-order key.
    pub order: u64,
}

#[derive(Debug, Default)]
pub(crate) struct RawUnit {
    pub events: Vec<Event>,
    pub global_vars: HashSet<String>,
    pub global_funcs: HashSet<String>,
    /// Parameters and locals per function, across all branches.
    pub locals: HashMap<String, HashSet<String>>,
}

pub(crate) fn parse(path: &str, pre: &Preprocessed, destructors: &[String]) -> Result<RawUnit> {
    let mut p = Parser {
        path,
        toks: &pre.tokens,
        pos: 0,
        typedefs: HashSet::new(),
        destructors,
        func: None,
        out: RawUnit::default(),
    };
    for d in &pre.defines {
        let kind = if d.function_like {
            p.out.global_funcs.insert(d.name.clone());
            EntityKind::Function
        } else {
            p.out.global_vars.insert(d.name.clone());
            EntityKind::Variable
        };
        p.out.events.push(Event {
            kind: EventKind::Declare(kind),
            name: d.name.clone(),
            func: None,
            pc: d.pc,
            line: d.line,
            order: d.at as u64 * 2,
        });
    }
    while p.pos < p.toks.len() {
        p.external()?;
    }
    Ok(p.out)
}

const STORAGE: &[&str] = &[
    "static", "extern", "register", "auto", "const", "volatile", "inline", "__inline",
    "__inline__", "restrict", "__restrict", "__extension__", "_Thread_local",
];

const BUILTIN_TYPES: &[&str] = &[
    "void", "char", "int", "float", "double", "_Bool", "bool", "signed", "unsigned", "short",
    "long",
];

const COMMON_TYPES: &[&str] = &[
    "size_t", "ssize_t", "ptrdiff_t", "intptr_t", "uintptr_t", "int8_t", "int16_t", "int32_t",
    "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t", "off_t", "pid_t", "uid_t", "gid_t",
    "mode_t", "time_t", "FILE", "va_list", "wchar_t",
];

const STATEMENT_KEYWORDS: &[&str] = &[
    "return", "goto", "case", "default", "if", "else", "while", "do", "for", "switch", "break",
    "continue", "sizeof",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

#[derive(Debug)]
enum Expr {
    Ident(usize),
    Null,
    Lit(Option<i64>),
    Unary(Box<Expr>),
    IncDec(Box<Expr>),
    Binary(Box<Expr>, Box<Expr>),
    Assign {
        compound: bool,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call(Box<Expr>, Vec<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Cast(Box<Expr>),
    List(Vec<Expr>),
}

impl Expr {
    fn strip_casts(&self) -> &Expr {
        match self {
            Expr::Cast(e) => e.strip_casts(),
            other => other,
        }
    }

    fn is_null(&self, pointer: bool) -> bool {
        match self {
            Expr::Null => true,
            Expr::Lit(Some(0)) => pointer,
            Expr::Cast(e) => e.is_null(true),
            _ => false,
        }
    }
}

struct Declarator {
    name: Option<usize>,
    pointer: bool,
    params: Option<Vec<usize>>,
    nested: bool,
}

struct Specs {
    typedef: bool,
}

struct Parser<'a> {
    path: &'a str,
    toks: &'a [Token],
    pos: usize,
    typedefs: HashSet<String>,
    destructors: &'a [String],
    func: Option<String>,
    out: RawUnit,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        let line = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |t| t.line);
        Error::parse(self.path, line, msg)
    }

    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.toks.get(i)
    }

    fn at(&self, text: &str) -> bool {
        self.tok(self.pos).is_some_and(|t| t.is(text))
    }

    fn at_offset(&self, k: usize, text: &str) -> bool {
        self.tok(self.pos + k).is_some_and(|t| t.is(text))
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> Result<()> {
        if self.eat(text) {
            return Ok(());
        }
        Err(match self.tok(self.pos) {
            Some(t) => self.err(format!("expected `{text}`, found `{}`", t.text)),
            None => self.err(format!("expected `{text}` before end of file")),
        })
    }

    fn ident_at(&self, i: usize) -> Option<&'a str> {
        self.tok(i)
            .filter(|t| t.kind == TokKind::Ident)
            .map(|t| t.text.as_str())
    }

    fn is_known_type(&self, name: &str) -> bool {
        BUILTIN_TYPES.contains(&name)
            || COMMON_TYPES.contains(&name)
            || self.typedefs.contains(name)
            || matches!(name, "struct" | "union" | "enum")
    }

    fn is_plain_ident(&self, i: usize) -> bool {
        self.ident_at(i).is_some_and(|n| {
            !STATEMENT_KEYWORDS.contains(&n)
                && !STORAGE.contains(&n)
                && !BUILTIN_TYPES.contains(&n)
                && n != "typedef"
        })
    }

    /// An unknown identifier at `i` used as a type: followed by a declarator
    /// name, or by pointer stars and then a name or `)`.
    fn looks_like_type(&self, i: usize) -> bool {
        if !self.is_plain_ident(i) {
            return false;
        }
        let mut j = i + 1;
        if self.is_plain_ident(j) {
            return true;
        }
        let mut stars = 0;
        while self.tok(j).is_some_and(|t| t.is("*")) {
            stars += 1;
            j += 1;
        }
        stars > 0 && (self.is_plain_ident(j) || self.tok(j).is_some_and(|t| t.is(")")))
    }

    fn starts_declaration(&self, i: usize) -> bool {
        let Some(name) = self.ident_at(i) else {
            return false;
        };
        if STATEMENT_KEYWORDS.contains(&name) {
            return false;
        }
        STORAGE.contains(&name)
            || name == "typedef"
            || name == "__attribute__"
            || self.is_known_type(name)
            || self.looks_like_type(i)
    }

    fn starts_type_name(&self, i: usize) -> bool {
        match self.ident_at(i) {
            Some("const" | "volatile") => true,
            Some(n) if self.is_known_type(n) => true,
            // `(name *)` is a cast; `(a * b)` is not
            Some(_) if self.is_plain_ident(i) => {
                let mut j = i + 1;
                while self.tok(j).is_some_and(|t| t.is("*")) {
                    j += 1;
                }
                j > i + 1 && self.tok(j).is_some_and(|t| t.is(")"))
            }
            _ => false,
        }
    }

    fn emit(&mut self, kind: EventKind, i: usize) {
        let t = &self.toks[i];
        self.out.events.push(Event {
            kind,
            name: t.text.clone(),
            func: self.func.clone(),
            pc: t.pc,
            line: t.line,
            order: i as u64 * 2 + 1,
        });
    }

    fn declare_variable(&mut self, i: usize) {
        let name = self.toks[i].text.clone();
        match &self.func {
            Some(f) => {
                self.out.locals.entry(f.clone()).or_default().insert(name);
            }
            None => {
                self.out.global_vars.insert(name);
            }
        }
        self.emit(EventKind::Declare(EntityKind::Variable), i);
    }

    fn declare_params(&mut self, func: &str, params: &[usize]) {
        let saved = self.func.replace(func.to_string());
        for &p in params {
            self.declare_variable(p);
        }
        self.func = saved;
    }

    fn declare_function(&mut self, i: usize) {
        self.out.global_funcs.insert(self.toks[i].text.clone());
        let saved = self.func.take();
        self.emit(EventKind::Declare(EntityKind::Function), i);
        self.func = saved;
    }

    fn external(&mut self) -> Result<()> {
        if self.eat(";") {
            return Ok(());
        }
        if self.starts_declaration(self.pos) {
            return self.declaration();
        }
        if self.is_plain_ident(self.pos) && self.at_offset(1, "(") {
            if let Some(close) = self.matching(self.pos + 1) {
                if self.tok(close + 1).is_some_and(|t| t.is("{")) {
                    return self.declaration();
                }
            }
        }
        self.statement()
    }

    /// Index of the bracket closing the one at `open`.
    fn matching(&self, open: usize) -> Option<usize> {
        let (l, r) = match self.tok(open)?.text.as_str() {
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            "{" => ("{", "}"),
            _ => return None,
        };
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            if t.is(l) {
                depth += 1;
            } else if t.is(r) {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
        }
        None
    }

    fn skip_balanced(&mut self) -> Result<()> {
        let close = self
            .matching(self.pos)
            .ok_or_else(|| self.err("unbalanced brackets"))?;
        self.pos = close + 1;
        Ok(())
    }

    fn skip_attributes(&mut self) -> Result<()> {
        while self.ident_at(self.pos).is_some_and(|n| {
            matches!(n, "__attribute__" | "__declspec" | "asm" | "__asm__")
        }) {
            self.pos += 1;
            if self.at("(") {
                self.skip_balanced()?;
            }
        }
        Ok(())
    }

    fn decl_specifiers(&mut self) -> Result<Specs> {
        let mut specs = Specs { typedef: false };
        let mut base = false;
        loop {
            self.skip_attributes()?;
            let Some(name) = self.ident_at(self.pos) else {
                break;
            };
            if name == "typedef" {
                specs.typedef = true;
                self.pos += 1;
            } else if STORAGE.contains(&name) || BUILTIN_TYPES.contains(&name) {
                base |= BUILTIN_TYPES.contains(&name);
                self.pos += 1;
            } else if matches!(name, "struct" | "union" | "enum") {
                base = true;
                self.pos += 1;
                self.skip_attributes()?;
                if self.is_plain_ident(self.pos) {
                    self.pos += 1;
                }
                if self.at("{") {
                    if name == "enum" {
                        self.enum_body()?;
                    } else {
                        self.skip_balanced()?;
                    }
                }
            } else if !base
                && (self.typedefs.contains(name)
                    || COMMON_TYPES.contains(&name)
                    || self.looks_like_type(self.pos))
            {
                base = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(specs)
    }

    fn enum_body(&mut self) -> Result<()> {
        self.expect("{")?;
        while !self.eat("}") {
            if !self.is_plain_ident(self.pos) {
                return Err(self.err("expected enumerator"));
            }
            self.declare_variable(self.pos);
            self.pos += 1;
            if self.eat("=") {
                let e = self.expr_bp(3)?;
                self.walk(&e);
            }
            if !self.eat(",") {
                self.expect("}")?;
                break;
            }
        }
        Ok(())
    }

    fn declarator(&mut self, abstract_ok: bool) -> Result<Declarator> {
        let mut pointer = false;
        loop {
            self.skip_attributes()?;
            if self.eat("*") {
                pointer = true;
            } else if self
                .ident_at(self.pos)
                .is_some_and(|n| matches!(n, "const" | "volatile" | "restrict" | "__restrict"))
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        let named = self.is_plain_ident(self.pos)
            && !self.typedefs.contains(self.ident_at(self.pos).unwrap_or_default());
        let mut d = if named {
            self.pos += 1;
            Declarator {
                name: Some(self.pos - 1),
                pointer,
                params: None,
                nested: false,
            }
        } else if self.at("(") && (self.at_offset(1, "*") || self.at_offset(1, "(")) {
            self.pos += 1;
            let mut inner = self.declarator(abstract_ok)?;
            self.expect(")")?;
            inner.nested = true;
            inner.pointer |= pointer;
            inner
        } else if abstract_ok {
            Declarator {
                name: None,
                pointer,
                params: None,
                nested: false,
            }
        } else {
            return Err(self.err(match self.tok(self.pos) {
                Some(t) => format!("expected a declarator, found `{}`", t.text),
                None => "expected a declarator".to_string(),
            }));
        };
        loop {
            if self.eat("[") {
                d.pointer = true;
                if !self.at("]") {
                    let e = self.full_expr()?;
                    self.walk(&e);
                }
                self.expect("]")?;
            } else if self.at("(") {
                let params = self.params()?;
                if d.params.is_none() && !d.nested {
                    d.params = Some(params);
                }
            } else {
                break;
            }
        }
        self.skip_attributes()?;
        Ok(d)
    }

    /// Parses a parameter list and returns the parameter name tokens.
    fn params(&mut self) -> Result<Vec<usize>> {
        self.expect("(")?;
        let mut names = Vec::new();
        if self.eat(")") {
            return Ok(names);
        }
        if self.at("void") && self.at_offset(1, ")") {
            self.pos += 2;
            return Ok(names);
        }
        loop {
            if !self.eat("...") {
                let start = self.pos;
                self.decl_specifiers()?;
                if self.pos == start && self.is_plain_ident(self.pos) {
                    // a lone unknown name is an unnamed parameter's type
                    self.pos += 1;
                }
                let d = self.declarator(true)?;
                names.extend(d.name);
            }
            if self.eat(",") {
                continue;
            }
            self.expect(")")?;
            return Ok(names);
        }
    }

    fn declaration(&mut self) -> Result<()> {
        let specs = self.decl_specifiers()?;
        if self.eat(";") {
            return Ok(());
        }
        loop {
            let d = self.declarator(false)?;
            let name = d.name.ok_or_else(|| self.err("declarator without a name"))?;
            if specs.typedef {
                self.typedefs.insert(self.toks[name].text.clone());
            } else if let Some(params) = &d.params {
                let fname = self.toks[name].text.clone();
                self.declare_function(name);
                self.declare_params(&fname, params);
                if self.at("{") {
                    if self.func.is_some() {
                        return Err(self.err("nested function definition"));
                    }
                    self.func = Some(fname);
                    let body = self.compound();
                    self.func = None;
                    return body;
                }
            } else {
                self.declare_variable(name);
                if self.eat("=") {
                    let init = self.initializer()?;
                    self.emit(
                        EventKind::Assign {
                            null: init.is_null(d.pointer),
                        },
                        name,
                    );
                    self.walk(&init);
                }
            }
            if self.eat(",") {
                continue;
            }
            return self.expect(";");
        }
    }

    fn initializer(&mut self) -> Result<Expr> {
        if !self.eat("{") {
            return self.expr_bp(2);
        }
        let mut items = Vec::new();
        while !self.eat("}") {
            // designators: `.field =` and `[index] =`
            if self.at(".") && self.ident_at(self.pos + 1).is_some() {
                self.pos += 2;
                self.expect("=")?;
            } else if self.at("[") {
                self.pos += 1;
                items.push(self.full_expr()?);
                self.expect("]")?;
                self.expect("=")?;
            }
            items.push(self.initializer()?);
            if !self.eat(",") {
                self.expect("}")?;
                break;
            }
        }
        Ok(Expr::List(items))
    }

    fn compound(&mut self) -> Result<()> {
        self.expect("{")?;
        while !self.eat("}") {
            if self.pos >= self.toks.len() {
                return Err(self.err("unterminated block"));
            }
            self.statement()?;
        }
        Ok(())
    }

    fn paren_expr(&mut self) -> Result<()> {
        self.expect("(")?;
        let e = self.full_expr()?;
        self.walk(&e);
        self.expect(")")
    }

    fn statement(&mut self) -> Result<()> {
        let Some(tok) = self.tok(self.pos) else {
            return Err(self.err("expected a statement"));
        };
        let word = if tok.kind == TokKind::Ident || tok.kind == TokKind::Punct {
            tok.text.as_str()
        } else {
            ""
        };
        match word {
            "{" => self.compound(),
            ";" => {
                self.pos += 1;
                Ok(())
            }
            "if" => {
                self.pos += 1;
                self.paren_expr()?;
                self.statement()?;
                if self.eat("else") {
                    self.statement()?;
                }
                Ok(())
            }
            "while" | "switch" => {
                self.pos += 1;
                self.paren_expr()?;
                self.statement()
            }
            "do" => {
                self.pos += 1;
                self.statement()?;
                self.expect("while")?;
                self.paren_expr()?;
                self.expect(";")
            }
            "for" => {
                self.pos += 1;
                self.expect("(")?;
                if !self.eat(";") {
                    if self.starts_declaration(self.pos) {
                        self.declaration()?;
                    } else {
                        let e = self.full_expr()?;
                        self.walk(&e);
                        self.expect(";")?;
                    }
                }
                for end in [";", ")"] {
                    if !self.at(end) {
                        let e = self.full_expr()?;
                        self.walk(&e);
                    }
                    self.expect(end)?;
                }
                self.statement()
            }
            "case" => {
                self.pos += 1;
                let e = self.expr_bp(3)?;
                self.walk(&e);
                self.expect(":")
            }
            "default" if self.at_offset(1, ":") => {
                self.pos += 2;
                Ok(())
            }
            "return" => {
                self.pos += 1;
                if !self.at(";") {
                    let e = self.full_expr()?;
                    self.walk(&e);
                }
                self.expect(";")
            }
            "break" | "continue" => {
                self.pos += 1;
                self.expect(";")
            }
            "goto" => {
                self.pos += 1;
                if !self.is_plain_ident(self.pos) {
                    return Err(self.err("expected a label after `goto`"));
                }
                self.emit(EventKind::Label { declare: false }, self.pos);
                self.pos += 1;
                self.expect(";")
            }
            _ if self.is_plain_ident(self.pos) && self.at_offset(1, ":") => {
                self.emit(EventKind::Label { declare: true }, self.pos);
                self.pos += 2;
                Ok(())
            }
            _ if self.starts_declaration(self.pos) => self.declaration(),
            _ => {
                let e = self.full_expr()?;
                self.walk(&e);
                self.expect(";")
            }
        }
    }

    fn full_expr(&mut self) -> Result<Expr> {
        self.expr_bp(1)
    }

    fn binary_power(op: &str) -> Option<u8> {
        Some(match op {
            "," => 1,
            "||" => 4,
            "&&" => 5,
            "|" => 6,
            "^" => 7,
            "&" => 8,
            "==" | "!=" => 9,
            "<" | ">" | "<=" | ">=" => 10,
            "<<" | ">>" => 11,
            "+" | "-" => 12,
            "*" | "/" | "%" => 13,
            _ => return None,
        })
    }

    fn expr_bp(&mut self, min: u8) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.tok(self.pos).filter(|t| t.kind == TokKind::Punct) {
            let op = tok.text.as_str();
            if ASSIGN_OPS.contains(&op) {
                if min > 2 {
                    break;
                }
                self.pos += 1;
                let rhs = self.expr_bp(2)?;
                lhs = Expr::Assign {
                    compound: op != "=",
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                };
            } else if op == "?" {
                if min > 3 {
                    break;
                }
                self.pos += 1;
                let a = self.full_expr()?;
                self.expect(":")?;
                let b = self.expr_bp(3)?;
                lhs = Expr::Cond(Box::new(lhs), Box::new(a), Box::new(b));
            } else if let Some(power) = Self::binary_power(op) {
                if power < min {
                    break;
                }
                self.pos += 1;
                let rhs = self.expr_bp(power + 1)?;
                lhs = Expr::Binary(Box::new(lhs), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn type_name(&mut self) -> Result<()> {
        self.decl_specifiers()?;
        self.declarator(true)?;
        Ok(())
    }

    fn unary(&mut self) -> Result<Expr> {
        let Some(tok) = self.tok(self.pos) else {
            return Err(self.err("expected an expression"));
        };
        if tok.kind == TokKind::Punct {
            match tok.text.as_str() {
                "++" | "--" => {
                    self.pos += 1;
                    return Ok(Expr::IncDec(Box::new(self.unary()?)));
                }
                "&" | "*" | "-" | "+" | "!" | "~" => {
                    self.pos += 1;
                    return Ok(Expr::Unary(Box::new(self.unary()?)));
                }
                "(" if self.starts_type_name(self.pos + 1) => {
                    self.pos += 1;
                    self.type_name()?;
                    self.expect(")")?;
                    if self.at("{") {
                        let list = self.initializer()?;
                        return self.postfix(list);
                    }
                    return Ok(Expr::Cast(Box::new(self.unary()?)));
                }
                _ => {}
            }
        }
        if tok.is("sizeof") {
            self.pos += 1;
            if self.at("(") && self.starts_type_name(self.pos + 1) {
                self.pos += 1;
                self.type_name()?;
                self.expect(")")?;
                return Ok(Expr::Lit(None));
            }
            return Ok(Expr::Unary(Box::new(self.unary()?)));
        }
        let primary = self.primary()?;
        self.postfix(primary)
    }

    fn primary(&mut self) -> Result<Expr> {
        let i = self.pos;
        let Some(tok) = self.tok(i) else {
            return Err(self.err("expected an expression"));
        };
        self.pos += 1;
        Ok(match tok.kind {
            TokKind::Ident if tok.text == "NULL" => Expr::Null,
            TokKind::Ident if self.is_plain_ident(i) => Expr::Ident(i),
            TokKind::Number => Expr::Lit(parse_int(&tok.text)),
            TokKind::Char => Expr::Lit(None),
            TokKind::Str => {
                while self.tok(self.pos).is_some_and(|t| t.kind == TokKind::Str) {
                    self.pos += 1;
                }
                Expr::Lit(None)
            }
            _ if tok.is("(") => {
                let e = self.full_expr()?;
                self.expect(")")?;
                e
            }
            _ => {
                self.pos = i;
                return Err(self.err(format!("unexpected `{}` in expression", tok.text)));
            }
        })
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr> {
        loop {
            if self.eat("(") {
                let mut args = Vec::new();
                if !self.eat(")") {
                    loop {
                        args.push(self.expr_bp(2)?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect(")")?;
                }
                e = Expr::Call(Box::new(e), args);
            } else if self.eat("[") {
                let index = self.full_expr()?;
                self.expect("]")?;
                e = Expr::Binary(Box::new(e), Box::new(index));
            } else if self.at(".") || self.at("->") {
                self.pos += 1;
                if self.ident_at(self.pos).is_none() {
                    return Err(self.err("expected a member name"));
                }
                self.pos += 1;
                e = Expr::Unary(Box::new(e));
            } else if self.at("++") || self.at("--") {
                self.pos += 1;
                e = Expr::IncDec(Box::new(e));
            } else {
                return Ok(e);
            }
        }
    }

    fn walk(&mut self, e: &Expr) {
        match e {
            Expr::Ident(i) => self.emit(EventKind::Use { call: false }, *i),
            Expr::Null | Expr::Lit(_) => {}
            Expr::Unary(x) | Expr::Cast(x) => self.walk(x),
            Expr::IncDec(x) => match **x {
                Expr::Ident(i) => {
                    self.emit(EventKind::Use { call: false }, i);
                    self.emit(EventKind::Assign { null: false }, i);
                }
                ref other => self.walk(other),
            },
            Expr::Binary(a, b) => {
                self.walk(a);
                self.walk(b);
            }
            Expr::Assign { compound, lhs, rhs } => {
                match **lhs {
                    Expr::Ident(i) => {
                        if *compound {
                            self.emit(EventKind::Use { call: false }, i);
                        }
                        let null = !*compound && rhs.is_null(false);
                        self.emit(EventKind::Assign { null }, i);
                    }
                    ref other => self.walk(other),
                }
                self.walk(rhs);
            }
            Expr::Call(callee, args) => {
                if let Expr::Ident(i) = **callee {
                    self.emit(EventKind::Use { call: true }, i);
                    let name = &self.toks[i].text;
                    if args.len() == 1 && self.destructors.iter().any(|d| d == name) {
                        if let Expr::Ident(arg) = args[0].strip_casts() {
                            self.emit(EventKind::Destruct, *arg);
                            return;
                        }
                    }
                } else {
                    self.walk(callee);
                }
                for a in args {
                    self.walk(a);
                }
            }
            Expr::Cond(c, a, b) => {
                self.walk(c);
                self.walk(a);
                self.walk(b);
            }
            Expr::List(items) => items.iter().for_each(|x| self.walk(x)),
        }
    }
}
