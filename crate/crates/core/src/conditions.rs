//! Boolean formulas over option atoms: construction, evaluation and decision
//! procedures, plus the feature model.
//!
//! Satisfiability is decided by Shannon expansion over the formula's own
//! atoms with constant folding after every split. It is complete, and the
//! atom count is bounded so the worst case stays at desk scale.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::config::{Configuration, Literal, OptionSet};
use crate::error::{Error, Result};

/// Default bound on atoms per formula and options per enumeration.
pub const DEFAULT_BOUND: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Const(bool),
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub const TRUE: Formula = Formula::Const(true);
    pub const FALSE: Formula = Formula::Const(false);

    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn literal(lit: &Literal) -> Self {
        let a = Formula::atom(lit.option.clone());
        if lit.value {
            a
        } else {
            Formula::not(a)
        }
    }

    /// Negation with double-negation and constant removal.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::Const(b) => Formula::Const(!b),
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction; flattens nested conjunctions and drops `true`.
    pub fn all<I: IntoIterator<Item = Formula>>(parts: I) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Const(true) => {}
                Formula::Const(false) => return Formula::FALSE,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::TRUE,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction; flattens nested disjunctions and drops `false`.
    pub fn any<I: IntoIterator<Item = Formula>>(parts: I) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Const(false) => {}
                Formula::Const(true) => return Formula::TRUE,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::FALSE,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::all([a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::any([a, b])
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::or(
            Formula::and(a.clone(), b.clone()),
            Formula::and(Formula::not(a), Formula::not(b)),
        )
    }

    pub fn is_const(&self) -> Option<bool> {
        match self {
            Formula::Const(b) => Some(*b),
            _ => None,
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(a) => {
                out.insert(a);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(a) => env(a),
            Formula::Not(f) => !f.eval(env),
            Formula::And(fs) => fs.iter().all(|f| f.eval(env)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(env)),
        }
    }

    pub fn eval_config(&self, c: &Configuration) -> bool {
        self.eval(&|a| c.value(a).unwrap_or(false))
    }

    /// Substitutes `value` for `atom` and folds constants.
    pub fn restrict(&self, atom: &str, value: bool) -> Formula {
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom(a) if a == atom => Formula::Const(value),
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::Not(f) => Formula::not(f.restrict(atom, value)),
            Formula::And(fs) => Formula::all(fs.iter().map(|f| f.restrict(atom, value))),
            Formula::Or(fs) => Formula::any(fs.iter().map(|f| f.restrict(atom, value))),
        }
    }

    /// Constant folding and flattening, bottom up.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::Const(_) | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.simplify()),
            Formula::And(fs) => Formula::all(fs.iter().map(Formula::simplify)),
            Formula::Or(fs) => Formula::any(fs.iter().map(Formula::simplify)),
        }
    }

    /// Negation normal form (De Morgan pushed to the atoms).
    pub fn to_nnf(&self) -> Formula {
        self.nnf(false)
    }

    fn nnf(&self, negate: bool) -> Formula {
        match (self, negate) {
            (Formula::Const(b), n) => Formula::Const(*b != n),
            (Formula::Atom(_), false) => self.clone(),
            (Formula::Atom(_), true) => Formula::Not(Box::new(self.clone())),
            (Formula::Not(f), n) => f.nnf(!n),
            (Formula::And(fs), false) => Formula::all(fs.iter().map(|f| f.nnf(false))),
            (Formula::And(fs), true) => Formula::any(fs.iter().map(|f| f.nnf(true))),
            (Formula::Or(fs), false) => Formula::any(fs.iter().map(|f| f.nnf(false))),
            (Formula::Or(fs), true) => Formula::all(fs.iter().map(|f| f.nnf(true))),
        }
    }

    /// Parses the canonical infix syntax: `!`, `&&`, `||`, `->`, `<->`,
    /// parentheses, `true`/`false`/`1`/`0`, identifiers and `[opaque]` atoms.
    pub fn parse(text: &str) -> Result<Formula> {
        let tokens = lex_formula(text)?;
        let mut p = FormulaParser { tokens, pos: 0 };
        let f = p.iff()?;
        if p.pos != p.tokens.len() {
            return Err(Error::format(
                "formula",
                0,
                format!("unexpected `{}` in `{text}`", p.tokens[p.pos]),
            ));
        }
        Ok(f)
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            _ => 3,
        }
    }

    fn fmt_child(&self, child: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() <= self.precedence() && child.precedence() < 3 {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(true) => f.write_str("true"),
            Formula::Const(false) => f.write_str("false"),
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(inner) => {
                f.write_str("!")?;
                self.fmt_child(inner, f)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " && "
                } else {
                    " || "
                };
                for (i, child) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.fmt_child(child, f)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FTok {
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Name(String),
}

impl fmt::Display for FTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FTok::Not => f.write_str("!"),
            FTok::And => f.write_str("&&"),
            FTok::Or => f.write_str("||"),
            FTok::Imp => f.write_str("->"),
            FTok::Iff => f.write_str("<->"),
            FTok::LParen => f.write_str("("),
            FTok::RParen => f.write_str(")"),
            FTok::Name(n) => f.write_str(n),
        }
    }
}

fn lex_formula(text: &str) -> Result<Vec<FTok>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |msg: String| Error::format("formula", 0, msg);
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'!' => {
                out.push(FTok::Not);
                i += 1;
            }
            b'(' => {
                out.push(FTok::LParen);
                i += 1;
            }
            b')' => {
                out.push(FTok::RParen);
                i += 1;
            }
            b'&' if bytes.get(i + 1) == Some(&b'&') => {
                out.push(FTok::And);
                i += 2;
            }
            b'|' if bytes.get(i + 1) == Some(&b'|') => {
                out.push(FTok::Or);
                i += 2;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push(FTok::Imp);
                i += 2;
            }
            b'<' if text[i..].starts_with("<->") => {
                out.push(FTok::Iff);
                i += 3;
            }
            b'[' => {
                let end = text[i..]
                    .find(']')
                    .ok_or_else(|| err(format!("unterminated `[` in `{text}`")))?;
                out.push(FTok::Name(text[i..=i + end].to_string()));
                i += end + 1;
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(FTok::Name(text[start..i].to_string()));
            }
            _ => return Err(err(format!("unexpected character `{}` in `{text}`", c as char))),
        }
    }
    Ok(out)
}

struct FormulaParser {
    tokens: Vec<FTok>,
    pos: usize,
}

impl FormulaParser {
    fn peek(&self) -> Option<&FTok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, t: &FTok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.imp()?;
        while self.eat(&FTok::Iff) {
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&FTok::Imp) {
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.eat(&FTok::Or) {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat(&FTok::And) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(FTok::Not) => Ok(Formula::Not(Box::new(self.unary()?))),
            Some(FTok::LParen) => {
                let f = self.iff()?;
                if !self.eat(&FTok::RParen) {
                    return Err(Error::format("formula", 0, "expected `)`"));
                }
                Ok(f)
            }
            Some(FTok::Name(n)) => Ok(match n.as_str() {
                "true" | "1" => Formula::TRUE,
                "false" | "0" => Formula::FALSE,
                _ => Formula::Atom(n),
            }),
            Some(other) => Err(Error::format("formula", 0, format!("unexpected `{other}`"))),
            None => Err(Error::format("formula", 0, "unexpected end of formula")),
        }
    }
}

fn check_bound(f: &Formula, bound: usize) -> Result<()> {
    let n = f.atoms().len();
    if n > bound {
        return Err(Error::TooManyAtoms { found: n, bound });
    }
    Ok(())
}

fn shannon_sat(f: Formula) -> bool {
    match f {
        Formula::Const(b) => b,
        f => {
            let atom = f
                .atoms()
                .into_iter()
                .next()
                .expect("non-constant formula has an atom")
                .to_string();
            shannon_sat(f.restrict(&atom, true)) || shannon_sat(f.restrict(&atom, false))
        }
    }
}

/// True iff some total assignment of the formula's atoms satisfies it.
pub fn is_satisfiable(f: &Formula) -> Result<bool> {
    is_satisfiable_within(f, DEFAULT_BOUND)
}

pub fn is_satisfiable_within(f: &Formula, bound: usize) -> Result<bool> {
    check_bound(f, bound)?;
    Ok(shannon_sat(f.simplify()))
}

/// True iff every assignment satisfies `f`.
pub fn is_valid(f: &Formula) -> Result<bool> {
    Ok(!is_satisfiable(&Formula::not(f.clone()))?)
}

/// True iff `f` is satisfiable and every satisfying assignment sets
/// `option = value`.
pub fn entails_literal(f: &Formula, option: &str, value: bool) -> Result<bool> {
    if !is_satisfiable(f)? {
        return Ok(false);
    }
    let opposite = Formula::literal(&Literal::new(option, !value));
    Ok(!is_satisfiable(&Formula::and(f.clone(), opposite))?)
}

/// True iff setting `option = value` can switch `f` on and never switches it
/// off: `f[o:=v']` implies `f[o:=v]`, strictly.
///
/// For conjunctions of literals this coincides with [`entails_literal`]; for
/// disjunctive conditions such as `A || B` it selects `A=T` and `B=T`, where
/// entailment selects nothing.
pub fn enables_literal(f: &Formula, option: &str, value: bool) -> Result<bool> {
    check_bound(f, DEFAULT_BOUND)?;
    let on = f.restrict(option, value);
    let off = f.restrict(option, !value);
    let never_disables = !is_satisfiable(&Formula::and(off.clone(), Formula::not(on.clone())))?;
    Ok(never_disables && is_satisfiable(&Formula::and(on, Formula::not(off)))?)
}

/// Options plus the constraints that define the valid configurations.
#[derive(Debug, Clone)]
pub struct FeatureModel {
    options: Arc<OptionSet>,
    constraints: Vec<Formula>,
    bound: usize,
}

impl FeatureModel {
    pub fn new(options: Arc<OptionSet>, constraints: Vec<Formula>) -> Self {
        FeatureModel {
            options,
            constraints,
            bound: DEFAULT_BOUND,
        }
    }

    pub fn unconstrained(options: Arc<OptionSet>) -> Self {
        Self::new(options, Vec::new())
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn options(&self) -> &Arc<OptionSet> {
        &self.options
    }

    pub fn constraints(&self) -> &[Formula] {
        &self.constraints
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Fails with `UnknownOption` if a constraint mentions an undeclared atom.
    pub fn check_atoms(&self) -> Result<()> {
        for c in &self.constraints {
            if let Some(a) = c.atoms().into_iter().find(|a| !self.options.contains(a)) {
                return Err(Error::UnknownOption(a.to_string()));
            }
        }
        Ok(())
    }

    pub fn admits(&self, c: &Configuration) -> bool {
        self.constraints.iter().all(|f| f.eval_config(c))
    }
}

/// Every total assignment (T before F, declared option order) that satisfies
/// all constraints.
pub fn valid_configurations(fm: &FeatureModel) -> Result<Vec<Configuration>> {
    fm.check_atoms()?;
    let n = fm.options.len();
    if n > fm.bound {
        return Err(Error::TooManyOptions {
            found: n,
            bound: fm.bound,
        });
    }
    let mut out = Vec::new();
    for code in 0u64..(1u64 << n) {
        // bit set means F, so the all-T row comes first
        let values = (0..n).map(|i| code & (1 << (n - 1 - i)) == 0).collect();
        let c = Configuration::new(out.len(), fm.options.clone(), values);
        if fm.admits(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    fn truth_table(f: &Formula, atoms: &[&str]) -> Vec<bool> {
        (0..1u32 << atoms.len())
            .map(|bits| {
                f.eval(&|a| {
                    let i = atoms.iter().position(|x| *x == a).unwrap();
                    bits & (1 << i) != 0
                })
            })
            .collect()
    }

    #[test]
    fn satisfiability_examples() {
        assert!(is_satisfiable(&p("A")).unwrap());
        assert!(!is_satisfiable(&p("A && !A")).unwrap());
        assert!(!is_satisfiable(&p("(A || B) && !A && !B")).unwrap());
    }

    #[test]
    fn entailment_examples() {
        assert!(entails_literal(&p("A && B"), "A", true).unwrap());
        assert!(!entails_literal(&p("A || B"), "A", true).unwrap());
        assert!(!entails_literal(&Formula::FALSE, "A", true).unwrap());
    }

    #[test]
    fn enabling_examples() {
        assert!(enables_literal(&p("A && B"), "A", true).unwrap());
        assert!(!enables_literal(&p("A && B"), "A", false).unwrap());
        assert!(enables_literal(&p("A || B"), "A", true).unwrap());
        assert!(!enables_literal(&p("A || B"), "A", false).unwrap());
        assert!(enables_literal(&p("!S"), "S", false).unwrap());
        assert!(!enables_literal(&Formula::TRUE, "A", true).unwrap());
        assert!(!enables_literal(&p("B"), "A", true).unwrap());
        // xor is controlled by A, but neither value only switches it on
        assert!(!enables_literal(&p("(A && !B) || (!A && B)"), "A", true).unwrap());
    }

    #[test]
    fn too_many_atoms() {
        let names: Vec<String> = (0..25).map(|i| format!("X{i}")).collect();
        let f = Formula::all(names.iter().map(Formula::atom));
        assert_eq!(
            is_satisfiable(&f),
            Err(Error::TooManyAtoms {
                found: 25,
                bound: 24
            })
        );
    }

    #[test]
    fn tautology_is_valid() {
        assert!(is_valid(&p("A || !A")).unwrap());
        assert!(!is_valid(&p("A")).unwrap());
    }

    #[test]
    fn display_round_trip() {
        for s in ["A && (B || !C)", "!(A && B)", "[X>10] || Y", "true", "!A && !B"] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s}");
        }
        assert_eq!(p("(A || B) && C").to_string(), "(A || B) && C");
        assert_eq!(p("A || B && C").to_string(), "A || B && C");
    }

    fn opts(names: &[&str]) -> Arc<OptionSet> {
        Arc::new(OptionSet::new(names.iter().copied()))
    }

    fn rows(cs: &[Configuration]) -> Vec<String> {
        cs.iter().map(|c| c.to_string().replace(' ', "")).collect()
    }

    #[test]
    fn valid_configurations_examples() {
        let fm = FeatureModel::unconstrained(opts(&["A", "B"]));
        assert_eq!(rows(&valid_configurations(&fm).unwrap()), ["TT", "TF", "FT", "FF"]);

        let fm = FeatureModel::new(opts(&["A", "B"]), vec![p("A -> B")]);
        assert_eq!(rows(&valid_configurations(&fm).unwrap()), ["TT", "FT", "FF"]);

        let fm = FeatureModel::new(opts(&["A"]), vec![p("A && !A")]);
        assert!(valid_configurations(&fm).unwrap().is_empty());
    }

    #[test]
    fn valid_configurations_bound() {
        let names: Vec<String> = (0..5).map(|i| format!("O{i}")).collect();
        let fm = FeatureModel::unconstrained(Arc::new(OptionSet::new(names))).with_bound(4);
        assert_eq!(
            valid_configurations(&fm),
            Err(Error::TooManyOptions { found: 5, bound: 4 })
        );
    }

    #[test]
    fn iff_sugar() {
        let f = p("A <-> B");
        assert_eq!(truth_table(&f, &["A", "B"]), [true, false, false, true]);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::TRUE),
            Just(Formula::FALSE),
            prop::sample::select(vec!["A", "B", "C", "D"]).prop_map(Formula::atom),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
                prop::collection::vec(inner, 2..4).prop_map(Formula::Or),
            ]
        })
    }

    const ATOMS: [&str; 4] = ["A", "B", "C", "D"];

    proptest! {
        #[test]
        fn sat_matches_truth_table(f in arb_formula()) {
            let brute = truth_table(&f, &ATOMS).into_iter().any(|b| b);
            prop_assert_eq!(is_satisfiable(&f).unwrap(), brute);
        }

        #[test]
        fn entailment_is_sound(f in arb_formula(), i in 0usize..4, v: bool) {
            let o = ATOMS[i];
            if entails_literal(&f, o, v).unwrap() {
                for bits in 0..16u32 {
                    let env = |a: &str| bits & (1 << ATOMS.iter().position(|x| *x == a).unwrap()) != 0;
                    if f.eval(&env) {
                        prop_assert_eq!(env(o), v);
                    }
                }
            }
        }

        #[test]
        fn rewrites_preserve_meaning(f in arb_formula()) {
            let t = truth_table(&f, &ATOMS);
            prop_assert_eq!(truth_table(&f.simplify(), &ATOMS), t.clone());
            prop_assert_eq!(truth_table(&f.to_nnf(), &ATOMS), t.clone());
            let twice = Formula::Not(Box::new(Formula::Not(Box::new(f.clone()))));
            prop_assert_eq!(truth_table(&twice, &ATOMS), t.clone());
            prop_assert_eq!(truth_table(&Formula::parse(&f.to_string()).unwrap(), &ATOMS), t);
        }

        #[test]
        fn entailment_implies_enabling(f in arb_formula(), i in 0usize..4, v: bool) {
            let o = ATOMS[i];
            // entailment needs o to matter; a constant-in-o formula entails nothing useful
            if entails_literal(&f, o, v).unwrap() {
                prop_assert!(enables_literal(&f, o, v).unwrap());
            }
        }

        #[test]
        fn valid_configurations_satisfy_constraints(cs in prop::collection::vec(arb_formula(), 0..3)) {
            let fm = FeatureModel::new(opts(&ATOMS), cs.clone());
            let valid = valid_configurations(&fm).unwrap();
            let mut seen = std::collections::HashSet::new();
            for c in &valid {
                prop_assert!(seen.insert(c.values().to_vec()));
                prop_assert!(cs.iter().all(|f| f.eval_config(c)));
                prop_assert!(c.validate(&fm).unwrap());
            }
            let total = (0..16u32).filter(|bits| {
                cs.iter().all(|f| f.eval(&|a| bits & (1 << ATOMS.iter().position(|x| *x == a).unwrap()) != 0))
            }).count();
            prop_assert_eq!(valid.len(), total);
        }
    }
}
