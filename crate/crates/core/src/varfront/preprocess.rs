//! Comment removal, directive evaluation into presence conditions, and
//! tokenization of the remaining code lines.

use std::collections::{BTreeSet, HashMap};

use crate::conditions::Formula;
use crate::error::{Error, Result};
use crate::varfront::SourceUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokKind,
    pub text: String,
    pub line: u32,
    pub pc: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.kind != TokKind::Str && self.kind != TokKind::Char && self.text == text
    }
}

/// A `#define` seen in the unit; `at` is the number of code tokens before it.
#[derive(Debug, Clone)]
pub(crate) struct Define {
    pub name: String,
    pub function_like: bool,
    pub line: u32,
    pub pc: usize,
    pub at: usize,
}

#[derive(Debug, Default)]
pub(crate) struct Preprocessed {
    pub tokens: Vec<Token>,
    /// Interned presence conditions; index 0 is `true`.
    pub pcs: Vec<Formula>,
    pub atoms: BTreeSet<String>,
    pub defines: Vec<Define>,
}

/// Removes `prefix` from the front of an option name, if present.
pub fn strip_prefix<'a>(name: &'a str, prefix: &str) -> &'a str {
    if prefix.is_empty() {
        return name;
    }
    name.strip_prefix(prefix)
        .filter(|rest| !rest.is_empty())
        .unwrap_or(name)
}

struct Frame {
    /// Conditions of the earlier branches in this `#if` chain.
    earlier: Vec<Formula>,
    current: Formula,
    in_else: bool,
    line: u32,
}

impl Frame {
    fn effective(&self) -> Formula {
        Formula::all(
            self.earlier
                .iter()
                .map(|f| Formula::not(f.clone()))
                .chain(std::iter::once(self.current.clone())),
        )
    }
}

pub(crate) fn preprocess(src: &SourceUnit, prefix: &str) -> Result<Preprocessed> {
    let path = src.path.as_str();
    let text = strip_comments(&src.text);
    let mut out = Preprocessed {
        pcs: vec![Formula::TRUE],
        ..Default::default()
    };
    let mut interned: HashMap<Formula, usize> = HashMap::from([(Formula::TRUE, 0)]);
    let mut stack: Vec<Frame> = Vec::new();
    let mut pc = 0usize;

    for (line_no, line) in logical_lines(&text) {
        let trimmed = line.trim_start();
        let Some(directive) = trimmed.strip_prefix('#') else {
            lex_into(path, line_no, &line, pc, &mut out.tokens)?;
            continue;
        };
        let directive = directive.trim_start();
        let name_len = directive
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(directive.len());
        let (name, rest) = directive.split_at(name_len);
        let err = |msg: String| Error::parse(path, line_no, msg);

        let mut changed = true;
        match name {
            "ifdef" | "ifndef" => {
                let atom = first_ident(rest)
                    .ok_or_else(|| err(format!("#{name} without a macro name")))?;
                let atom = strip_prefix(atom, prefix).to_string();
                out.atoms.insert(atom.clone());
                let f = Formula::Atom(atom);
                stack.push(Frame {
                    earlier: Vec::new(),
                    current: if name == "ifdef" { f } else { Formula::not(f) },
                    in_else: false,
                    line: line_no,
                });
            }
            "if" => {
                let f = condition(path, line_no, rest, prefix, &mut out.atoms)?;
                stack.push(Frame {
                    earlier: Vec::new(),
                    current: f,
                    in_else: false,
                    line: line_no,
                });
            }
            "elif" => {
                let f = condition(path, line_no, rest, prefix, &mut out.atoms)?;
                let frame = stack
                    .last_mut()
                    .ok_or_else(|| err("#elif without #if".into()))?;
                if frame.in_else {
                    return Err(err("#elif after #else".into()));
                }
                let prev = std::mem::replace(&mut frame.current, f);
                frame.earlier.push(prev);
            }
            "else" => {
                let frame = stack
                    .last_mut()
                    .ok_or_else(|| err("#else without #if".into()))?;
                if frame.in_else {
                    return Err(err("duplicate #else".into()));
                }
                let prev = std::mem::replace(&mut frame.current, Formula::TRUE);
                frame.earlier.push(prev);
                frame.in_else = true;
            }
            "endif" => {
                stack.pop().ok_or_else(|| err("#endif without #if".into()))?;
            }
            "define" => {
                changed = false;
                let rest = rest.trim_start();
                let name = first_ident(rest).ok_or_else(|| err("#define without a name".into()))?;
                out.defines.push(Define {
                    name: name.to_string(),
                    function_like: rest[name.len()..].starts_with('('),
                    line: line_no,
                    pc,
                    at: out.tokens.len(),
                });
            }
            _ => changed = false,
        }
        if changed {
            let f = Formula::all(stack.iter().map(Frame::effective));
            let next = interned.len();
            pc = *interned.entry(f.clone()).or_insert_with(|| {
                out.pcs.push(f);
                next
            });
        }
    }
    if let Some(open) = stack.last() {
        return Err(Error::parse(path, open.line, "unterminated conditional directive"));
    }
    Ok(out)
}

fn first_ident(s: &str) -> Option<&str> {
    let s = s.trim_start();
    let end = s
        .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .unwrap_or(s.len());
    let ident = &s[..end];
    (!ident.is_empty() && !ident.starts_with(|c: char| c.is_ascii_digit())).then_some(ident)
}

/// Replaces comments with spaces, keeping newlines so line numbers survive.
fn strip_comments(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if next == Some('*') => {
                out.push(' ');
                i += 2;
                while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                    if chars[i] == '\n' {
                        out.push('\n');
                    }
                    i += 1;
                }
                i += 2;
            }
            '"' | '\'' => {
                out.push(c);
                i += 1;
                while i < chars.len() && chars[i] != c && chars[i] != '\n' {
                    if chars[i] == '\\' && i + 1 < chars.len() {
                        out.push(chars[i]);
                        i += 1;
                    }
                    out.push(chars[i]);
                    i += 1;
                }
                if i < chars.len() && chars[i] == c {
                    out.push(c);
                    i += 1;
                }
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Physical lines joined on trailing backslashes, tagged with the 1-based
/// number of their first line.
fn logical_lines(text: &str) -> Vec<(u32, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(u32, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u32 + 1;
        let (start, mut acc) = pending.take().unwrap_or((line_no, String::new()));
        match raw.strip_suffix('\\') {
            Some(head) => {
                acc.push_str(head);
                acc.push(' ');
                pending = Some((start, acc));
            }
            None => {
                acc.push_str(raw);
                out.push((start, acc));
            }
        }
    }
    out.extend(pending);
    out
}

const PUNCTS: [&str; 25] = [
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "##", "::", "<:",
];

pub(crate) fn lex_into(
    path: &str,
    line_no: u32,
    line: &str,
    pc: usize,
    out: &mut Vec<Token>,
) -> Result<()> {
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = if c.is_ascii_whitespace() {
            i += 1;
            continue;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Ident
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.' || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Number
        } else if c == b'"' || c == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != c {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(Error::parse(path, line_no, "unterminated literal"));
            }
            i += 1;
            if c == b'"' {
                TokKind::Str
            } else {
                TokKind::Char
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| line[i..].starts_with(*p)) {
            i += p.len();
            TokKind::Punct
        } else if b"{}()[];,.:?~!+-*/%<>=&|^#".contains(&c) {
            i += 1;
            TokKind::Punct
        } else {
            return Err(Error::parse(
                path,
                line_no,
                format!("unexpected character `{}`", line[i..].chars().next().unwrap_or('?')),
            ));
        };
        out.push(Token {
            kind,
            text: line[start..i].to_string(),
            line: line_no,
            pc,
        });
    }
    Ok(())
}

/// Converts a `#if`/`#elif` expression into a formula. Boolean structure
/// over `defined` tests, bare macro names and integer constants is kept;
/// any other subexpression becomes an opaque atom named by its text.
fn condition(
    path: &str,
    line: u32,
    text: &str,
    prefix: &str,
    atoms: &mut BTreeSet<String>,
) -> Result<Formula> {
    let mut tokens = Vec::new();
    lex_into(path, line, text, 0, &mut tokens)?;
    if tokens.is_empty() {
        return Err(Error::parse(path, line, "#if without a condition"));
    }
    let mut p = CondParser {
        tokens: &tokens,
        pos: 0,
        path,
        line,
    };
    let expr = p.expr(0)?;
    if p.pos != tokens.len() {
        return Err(Error::parse(
            path,
            line,
            format!("unexpected `{}` in condition", tokens[p.pos].text),
        ));
    }
    let f = expr.to_formula(prefix);
    for a in f.atoms() {
        atoms.insert(a.to_string());
    }
    Ok(f)
}

#[derive(Debug)]
enum CondExpr {
    Defined(String),
    Name(String),
    Number(String),
    Not(Box<CondExpr>),
    Unary(String, Box<CondExpr>),
    Binary(String, Box<CondExpr>, Box<CondExpr>),
    Ternary(Box<CondExpr>, Box<CondExpr>, Box<CondExpr>),
    Call(String, Vec<CondExpr>),
    Paren(Box<CondExpr>),
}

impl CondExpr {
    fn to_formula(&self, prefix: &str) -> Formula {
        match self {
            CondExpr::Defined(n) | CondExpr::Name(n) => {
                Formula::Atom(strip_prefix(n, prefix).to_string())
            }
            CondExpr::Number(n) => match parse_int(n) {
                Some(v) => Formula::Const(v != 0),
                None => self.opaque(prefix),
            },
            CondExpr::Not(e) => Formula::not(e.to_formula(prefix)),
            CondExpr::Paren(e) => e.to_formula(prefix),
            CondExpr::Binary(op, l, r) if op == "&&" => {
                Formula::and(l.to_formula(prefix), r.to_formula(prefix))
            }
            CondExpr::Binary(op, l, r) if op == "||" => {
                Formula::or(l.to_formula(prefix), r.to_formula(prefix))
            }
            _ => self.opaque(prefix),
        }
    }

    fn opaque(&self, prefix: &str) -> Formula {
        Formula::Atom(format!("[{}]", self.render(prefix)))
    }

    fn render(&self, prefix: &str) -> String {
        match self {
            CondExpr::Defined(n) => format!("defined({})", strip_prefix(n, prefix)),
            CondExpr::Name(n) => strip_prefix(n, prefix).to_string(),
            CondExpr::Number(n) => n.clone(),
            CondExpr::Not(e) => format!("!{}", e.render(prefix)),
            CondExpr::Unary(op, e) => format!("{op}{}", e.render(prefix)),
            CondExpr::Binary(op, l, r) => {
                format!("{} {op} {}", l.render(prefix), r.render(prefix))
            }
            CondExpr::Ternary(c, a, b) => format!(
                "{} ? {} : {}",
                c.render(prefix),
                a.render(prefix),
                b.render(prefix)
            ),
            CondExpr::Call(n, args) => {
                let args: Vec<String> = args.iter().map(|a| a.render(prefix)).collect();
                format!("{}({})", strip_prefix(n, prefix), args.join(", "))
            }
            CondExpr::Paren(e) => format!("({})", e.render(prefix)),
        }
    }
}

pub(crate) fn parse_int(text: &str) -> Option<i64> {
    let t = text.trim_end_matches(['u', 'U', 'l', 'L']);
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()
    } else if t.len() > 1 && t.starts_with('0') {
        i64::from_str_radix(&t[1..], 8).ok()
    } else {
        t.parse().ok()
    }
}

fn binary_power(op: &str) -> Option<u8> {
    Some(match op {
        "?" => 1,
        "||" => 2,
        "&&" => 3,
        "|" => 4,
        "^" => 5,
        "&" => 6,
        "==" | "!=" => 7,
        "<" | ">" | "<=" | ">=" => 8,
        "<<" | ">>" => 9,
        "+" | "-" => 10,
        "*" | "/" | "%" => 11,
        _ => return None,
    })
}

struct CondParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    path: &'a str,
    line: u32,
}

impl CondParser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path, self.line, msg)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expect(&mut self, text: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t.is(text) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{text}`, found `{}`", t.text))),
            None => Err(self.err(format!("expected `{text}`"))),
        }
    }

    fn expr(&mut self, min: u8) -> Result<CondExpr> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek() {
            if tok.kind != TokKind::Punct {
                break;
            }
            let Some(power) = binary_power(&tok.text) else {
                break;
            };
            if power < min {
                break;
            }
            let op = tok.text.clone();
            self.pos += 1;
            if op == "?" {
                let a = self.expr(0)?;
                self.expect(":")?;
                let b = self.expr(power)?;
                lhs = CondExpr::Ternary(Box::new(lhs), Box::new(a), Box::new(b));
            } else {
                let rhs = self.expr(power + 1)?;
                lhs = CondExpr::Binary(op, Box::new(lhs), Box::new(rhs));
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<CondExpr> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err("unexpected end of condition"))?;
        self.pos += 1;
        match tok.kind {
            TokKind::Punct => match tok.text.as_str() {
                "!" => Ok(CondExpr::Not(Box::new(self.unary()?))),
                "-" | "+" | "~" => Ok(CondExpr::Unary(tok.text, Box::new(self.unary()?))),
                "(" => {
                    let e = self.expr(0)?;
                    self.expect(")")?;
                    Ok(CondExpr::Paren(Box::new(e)))
                }
                _ => Err(self.err(format!("unexpected `{}` in condition", tok.text))),
            },
            TokKind::Number | TokKind::Char => Ok(CondExpr::Number(tok.text)),
            TokKind::Str => Err(self.err("string literal in condition")),
            TokKind::Ident if tok.text == "defined" => {
                let paren = self.peek().is_some_and(|t| t.is("("));
                if paren {
                    self.pos += 1;
                }
                let name = match self.peek() {
                    Some(t) if t.kind == TokKind::Ident => t.text.clone(),
                    _ => return Err(self.err("`defined` without a macro name")),
                };
                self.pos += 1;
                if paren {
                    self.expect(")")?;
                }
                Ok(CondExpr::Defined(name))
            }
            TokKind::Ident => {
                if self.peek().is_some_and(|t| t.is("(")) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.peek().is_some_and(|t| t.is(")")) {
                        loop {
                            args.push(self.expr(0)?);
                            if self.peek().is_some_and(|t| t.is(",")) {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    Ok(CondExpr::Call(tok.text, args))
                } else {
                    Ok(CondExpr::Name(tok.text))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pre(text: &str) -> Preprocessed {
        preprocess(&SourceUnit::new("t.c", text), "CONFIG_").unwrap()
    }

    fn pc_of(p: &Preprocessed, ident: &str) -> String {
        let t = p.tokens.iter().find(|t| t.text == ident).unwrap();
        p.pcs[t.pc].to_string()
    }

    #[test]
    fn nesting_and_else_chains() {
        let p = pre("#ifdef CONFIG_A\na;\n#ifndef B\nb;\n#endif\n#elif defined(C)\nc;\n#else\nd;\n#endif\ne;\n");
        assert_eq!(pc_of(&p, "a"), "A");
        assert_eq!(pc_of(&p, "b"), "A && !B");
        assert_eq!(pc_of(&p, "c"), "!A && C");
        assert_eq!(pc_of(&p, "d"), "!A && !C");
        assert_eq!(pc_of(&p, "e"), "true");
        let atoms: Vec<&str> = p.atoms.iter().map(String::as_str).collect();
        assert_eq!(atoms, ["A", "B", "C"]);
    }

    #[test]
    fn opaque_and_constant_conditions() {
        let p = pre("#if CONFIG_NR > 1 && defined X\nx;\n#endif\n#if 0\ny;\n#endif\n");
        assert_eq!(pc_of(&p, "x"), "[NR > 1] && X");
        assert_eq!(pc_of(&p, "y"), "false");
    }

    #[test]
    fn unbalanced_directives_fail() {
        for text in ["#ifdef A\n", "#endif\n", "#else\n", "#ifdef A\n#else\n#else\n#endif\n"] {
            let r = preprocess(&SourceUnit::new("t.c", text), "");
            assert!(matches!(r, Err(Error::Parse { .. })), "{text:?}");
        }
    }

    #[test]
    fn comments_and_continuations() {
        let p = pre("/* a\n b */ x; // y\n#if defined(A) \\\n || defined(B)\nz;\n#endif\n");
        let x = p.tokens.iter().find(|t| t.text == "x").unwrap();
        assert_eq!(x.line, 2);
        assert!(p.tokens.iter().all(|t| t.text != "y" && t.text != "b"));
        assert_eq!(pc_of(&p, "z"), "A || B");
        assert_eq!(p.tokens.iter().find(|t| t.text == "z").unwrap().line, 5);
    }

    #[test]
    fn defines_are_recorded() {
        let p = pre("#ifdef A\n#define X 2\n#define F(a) a\n#endif\n");
        assert_eq!(p.defines.len(), 2);
        assert!(!p.defines[0].function_like);
        assert!(p.defines[1].function_like);
        assert_eq!(p.pcs[p.defines[0].pc].to_string(), "A");
    }

    #[test]
    fn prefix_stripping() {
        assert_eq!(strip_prefix("CONFIG_SPARC", "CONFIG_"), "SPARC");
        assert_eq!(strip_prefix("SPARC", "CONFIG_"), "SPARC");
        assert_eq!(strip_prefix("CONFIG_", "CONFIG_"), "CONFIG_");
        assert_eq!(strip_prefix("CONFIG_X", ""), "CONFIG_X");
    }
}
