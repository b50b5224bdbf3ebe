//! Configurations, partial assignments and the option sets they range over.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::conditions::FeatureModel;
use crate::error::{Error, Result};

/// An ordered set of configuration option names.
///
/// The order is the declared order and drives every enumeration and
/// tie-break downstream.
#[derive(Debug, Clone, Default)]
pub struct OptionSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl OptionSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = OptionSet::default();
        for name in names {
            set.insert(name.into());
        }
        set
    }

    /// Adds `name` at the end unless already present.
    pub fn insert(&mut self, name: String) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.clone(), i);
        self.names.push(name);
        i
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl PartialEq for OptionSet {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for OptionSet {}

/// `option = value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub option: String,
    pub value: bool,
}

impl Literal {
    pub fn new(option: impl Into<String>, value: bool) -> Self {
        Literal {
            option: option.into(),
            value,
        }
    }

    pub fn flipped(&self) -> Self {
        Literal {
            option: self.option.clone(),
            value: !self.value,
        }
    }
}

pub(crate) fn tf(value: bool) -> char {
    if value {
        'T'
    } else {
        'F'
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.option, tf(self.value))
    }
}

/// A consistent set of literals. Never contains both `o=T` and `o=F`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialAssignment {
    literals: BTreeMap<String, bool>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_literals<I: IntoIterator<Item = Literal>>(lits: I) -> Result<Self> {
        let mut p = PartialAssignment::new();
        for lit in lits {
            p.insert(lit)?;
        }
        Ok(p)
    }

    pub fn insert(&mut self, lit: Literal) -> Result<()> {
        match self.literals.get(&lit.option) {
            Some(&v) if v != lit.value => Err(Error::Inconsistent(lit.option)),
            _ => {
                self.literals.insert(lit.option, lit.value);
                Ok(())
            }
        }
    }

    pub fn get(&self, option: &str) -> Option<bool> {
        self.literals.get(option).copied()
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.literals
            .iter()
            .map(|(o, &v)| Literal::new(o.clone(), v))
    }

    pub fn options(&self) -> impl Iterator<Item = &str> {
        self.literals.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// True when every literal of `self` also appears in `other`.
    pub fn is_subset_of(&self, other: &PartialAssignment) -> bool {
        self.literals
            .iter()
            .all(|(o, v)| other.literals.get(o) == Some(v))
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lit) in self.literals().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

/// A total assignment over an option set.
#[derive(Debug, Clone)]
pub struct Configuration {
    /// Stable position in the batch the configuration came from.
    pub id: usize,
    options: Arc<OptionSet>,
    values: Vec<bool>,
}

impl Configuration {
    pub fn new(id: usize, options: Arc<OptionSet>, values: Vec<bool>) -> Self {
        assert_eq!(
            options.len(),
            values.len(),
            "configuration must assign every option"
        );
        Configuration {
            id,
            options,
            values,
        }
    }

    pub fn options(&self) -> &Arc<OptionSet> {
        &self.options
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn value(&self, option: &str) -> Option<bool> {
        self.options.index_of(option).map(|i| self.values[i])
    }

    pub fn enabled_count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn hamming(&self, other: &Configuration) -> usize {
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Whether this configuration assigns every literal of `p` as stated.
    pub fn contains(&self, p: &PartialAssignment) -> Result<bool> {
        let mut all = true;
        for (option, &v) in &p.literals {
            match self.value(option) {
                None => return Err(Error::UnknownOption(option.clone())),
                Some(actual) => all &= actual == v,
            }
        }
        Ok(all)
    }

    /// Whether the configuration satisfies every constraint of `fm`.
    pub fn validate(&self, fm: &FeatureModel) -> Result<bool> {
        for c in fm.constraints() {
            for atom in c.atoms() {
                if !self.options.contains(atom) {
                    return Err(Error::UnknownOption(atom.to_string()));
                }
            }
            if !c.eval(&|a| self.value(a).unwrap_or(false)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }
}

/// Configurations compare by their assignment only; the id is bookkeeping.
impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.options == other.options && self.values == other.values
    }
}

impl Eq for Configuration {}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", tf(*v))?;
        }
        Ok(())
    }
}

/// Builds configurations over `options` from rows of booleans, numbering them
/// in input order.
pub fn configurations_from_rows(
    options: Arc<OptionSet>,
    rows: impl IntoIterator<Item = Vec<bool>>,
) -> Vec<Configuration> {
    rows.into_iter()
        .enumerate()
        .map(|(i, values)| Configuration::new(i, options.clone(), values))
        .collect()
}
