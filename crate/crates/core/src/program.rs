//! Ground normal logic programs: atoms, rules, and the `.gasp` text format.
//!
//! A program is a list of rules over an interned atom table. Atom id 0 is
//! reserved for the falsity atom, which never appears in the table's user
//! range and is never printed; a rule without a head is a constraint.
//!
//! The text format is one rule per statement:
//!
//! ```text
//! % comment
//! a.
//! b :- a, not c.
//! :- sel(1), sel(2).
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Dense atom identifier. `AtomId::BOTTOM` is the falsity atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub const BOTTOM: AtomId = AtomId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_bottom(self) -> bool {
        self == Self::BOTTOM
    }
}

/// Dense rule identifier, equal to the rule's position in the program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u32);

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Text reserved for the falsity atom.
pub const BOTTOM_TEXT: &str = "bot";

/// Bijection between atom ids and their ground term text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTable {
    texts: Vec<String>,
    ids: HashMap<String, AtomId>,
}

impl Default for AtomTable {
    fn default() -> Self {
        AtomTable {
            texts: vec![BOTTOM_TEXT.to_owned()],
            ids: HashMap::new(),
        }
    }
}

impl AtomTable {
    fn intern(&mut self, text: &str) -> AtomId {
        if let Some(&id) = self.ids.get(text) {
            return id;
        }
        let id = AtomId(self.texts.len() as u32);
        self.texts.push(text.to_owned());
        self.ids.insert(text.to_owned(), id);
        id
    }

    pub fn get(&self, text: &str) -> Option<AtomId> {
        self.ids.get(text).copied()
    }

    pub fn text(&self, id: AtomId) -> &str {
        &self.texts[id.index()]
    }

    /// Number of user atoms (the falsity atom is not counted).
    pub fn len(&self) -> usize {
        self.texts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// User atom ids in increasing order.
    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        (1..self.texts.len() as u32).map(AtomId)
    }
}

/// A ground normal rule `head :- body_pos, not body_neg`.
///
/// Body literals are kept in first-occurrence order with duplicates removed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Option<AtomId>,
    pub body_pos: Vec<AtomId>,
    pub body_neg: Vec<AtomId>,
}

impl Rule {
    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body_pos.is_empty() && self.body_neg.is_empty()
    }

    pub fn is_definite(&self) -> bool {
        self.body_neg.is_empty()
    }
}

/// An immutable ground program. Cloning is cheap; the atom table is shared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundProgram {
    rules: Vec<Rule>,
    atoms: Arc<AtomTable>,
}

impl Default for GroundProgram {
    fn default() -> Self {
        GroundProgram {
            rules: Vec::new(),
            atoms: Arc::new(AtomTable::default()),
        }
    }
}

impl GroundProgram {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = RuleId> {
        (0..self.rules.len() as u32).map(RuleId)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn atom_table(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn atom_text(&self, id: AtomId) -> &str {
        self.atoms.text(id)
    }

    /// Builds a program over the same atom table with a different rule list.
    /// Every atom referenced by `rules` must come from this program's table.
    pub fn with_rules(&self, rules: Vec<Rule>) -> GroundProgram {
        GroundProgram {
            rules,
            atoms: Arc::clone(&self.atoms),
        }
    }

    /// The atoms occurring in any head or body, excluding the falsity atom.
    pub fn atoms_of(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        for rule in &self.rules {
            out.extend(rule.head);
            out.extend(rule.body_pos.iter().copied());
            out.extend(rule.body_neg.iter().copied());
        }
        out.remove(&AtomId::BOTTOM);
        out
    }

    pub fn parse(text: &str) -> Result<GroundProgram, ParseError> {
        parse_program(text)
    }

    /// Renders the program in `.gasp` syntax, one rule per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            self.write_rule(&mut out, rule);
            out.push('\n');
        }
        out
    }

    pub fn display_rule(&self, id: RuleId) -> String {
        let mut out = String::new();
        self.write_rule(&mut out, self.rule(id));
        out
    }

    fn write_rule(&self, out: &mut String, rule: &Rule) {
        if let Some(h) = rule.head {
            out.push_str(self.atom_text(h));
        }
        if !rule.body_pos.is_empty() || !rule.body_neg.is_empty() {
            if rule.head.is_some() {
                out.push(' ');
            }
            out.push_str(":- ");
            let lits = rule
                .body_pos
                .iter()
                .map(|&a| self.atom_text(a).to_owned())
                .chain(rule.body_neg.iter().map(|&a| format!("not {}", self.atom_text(a))));
            let lits: Vec<String> = lits.collect();
            out.push_str(&lits.join(", "));
        } else if rule.head.is_none() {
            // empty constraint; never produced by the parser
            out.push_str(":-");
        }
        out.push('.');
    }
}

/// Incremental program construction for generators and tests.
///
/// Atoms are interned in the same order the parser would intern them
/// (head, positive body, negative body), so a built program round-trips
/// through [`GroundProgram::serialize`] unchanged.
#[derive(Default)]
pub struct ProgramBuilder {
    rules: Vec<Rule>,
    atoms: AtomTable,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a rule. Duplicate body literals are removed.
    ///
    /// Panics if any atom text is the reserved falsity token.
    pub fn rule(&mut self, head: Option<&str>, pos: &[&str], neg: &[&str]) -> RuleId {
        let intern = |atoms: &mut AtomTable, t: &str| {
            assert!(t != BOTTOM_TEXT, "`{BOTTOM_TEXT}` is reserved");
            atoms.intern(t)
        };
        let head = head.map(|h| intern(&mut self.atoms, h));
        let mut body_pos = Vec::with_capacity(pos.len());
        for t in pos {
            let a = intern(&mut self.atoms, t);
            if !body_pos.contains(&a) {
                body_pos.push(a);
            }
        }
        let mut body_neg = Vec::with_capacity(neg.len());
        for t in neg {
            let a = intern(&mut self.atoms, t);
            if !body_neg.contains(&a) {
                body_neg.push(a);
            }
        }
        let id = RuleId(self.rules.len() as u32);
        self.rules.push(Rule {
            head,
            body_pos,
            body_neg,
        });
        id
    }

    pub fn build(self) -> GroundProgram {
        GroundProgram {
            rules: self.rules,
            atoms: Arc::new(self.atoms),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("`{BOTTOM_TEXT}` is reserved and cannot be used as an atom")]
    ReservedAtom,
    #[error("empty rule body after `:-`")]
    EmptyBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// Parses `.gasp` text into a program. Rule order follows the source.
pub fn parse_program(text: &str) -> Result<GroundProgram, ParseError> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut builder = ProgramBuilder::new();
    loop {
        parser.skip_trivia();
        if parser.peek().is_none() {
            break;
        }
        let (head, pos, neg) = parser.statement()?;
        let pos: Vec<&str> = pos.iter().map(String::as_str).collect();
        let neg: Vec<&str> = neg.iter().map(String::as_str).collect();
        builder.rule(head.as_deref(), &pos, &neg);
    }
    Ok(builder.build())
}

type Statement = (Option<String>, Vec<String>, Vec<String>);

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            kind,
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
            None => self.error(ParseErrorKind::UnexpectedEof),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        self.skip_trivia();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else if self.peek().is_none() {
            Err(self.error(ParseErrorKind::UnexpectedEof))
        } else {
            Err(self.error(ParseErrorKind::Expected(what)))
        }
    }

    fn at_neck(&self) -> bool {
        self.peek() == Some(':') && self.peek_at(1) == Some('-')
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let head = if self.at_neck() { None } else { Some(self.atom()?) };
        self.skip_trivia();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        if self.at_neck() {
            self.bump();
            self.bump();
            self.skip_trivia();
            if self.peek() == Some('.') {
                return Err(self.error(ParseErrorKind::EmptyBody));
            }
            loop {
                self.skip_trivia();
                let (negative, atom) = self.literal()?;
                if negative {
                    neg.push(atom);
                } else {
                    pos.push(atom);
                }
                self.skip_trivia();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    Some('.') => break,
                    None => return Err(self.error(ParseErrorKind::UnexpectedEof)),
                    Some(_) => return Err(self.error(ParseErrorKind::Expected("`,` or `.`"))),
                }
            }
        } else if head.is_some() && self.peek() != Some('.') {
            return Err(match self.peek() {
                None => self.error(ParseErrorKind::UnexpectedEof),
                Some(_) => self.error(ParseErrorKind::Expected("`:-` or `.`")),
            });
        }
        self.expect('.', "`.`")?;
        Ok((head, pos, neg))
    }

    fn literal(&mut self) -> Result<(bool, String), ParseError> {
        // `not` followed by whitespace marks a negative literal; `not(1)` or
        // `nota` are ordinary atoms.
        let is_not = self.peek() == Some('n')
            && self.peek_at(1) == Some('o')
            && self.peek_at(2) == Some('t')
            && self.peek_at(3).is_some_and(char::is_whitespace);
        if is_not {
            for _ in 0..3 {
                self.bump();
            }
            self.skip_trivia();
            Ok((true, self.atom()?))
        } else {
            Ok((false, self.atom()?))
        }
    }

    fn atom(&mut self) -> Result<String, ParseError> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let name = self.identifier()?;
        if name == BOTTOM_TEXT {
            return Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::ReservedAtom,
            });
        }
        let mut text = name;
        self.skip_trivia();
        if self.peek() == Some('(') {
            self.bump();
            text.push('(');
            loop {
                self.skip_trivia();
                let arg = self.term()?;
                text.push_str(&arg);
                self.skip_trivia();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                        text.push(',');
                    }
                    Some(')') => {
                        self.bump();
                        text.push(')');
                        break;
                    }
                    None => return Err(self.error(ParseErrorKind::UnexpectedEof)),
                    Some(_) => return Err(self.error(ParseErrorKind::Expected("`,` or `)`"))),
                }
            }
        }
        Ok(text)
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() || c == '_' => {}
            _ => return Err(self.unexpected()),
        }
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let mut out = String::new();
                if c == '-' {
                    out.push('-');
                    self.bump();
                }
                let start = out.len();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        out.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if out.len() == start {
                    return Err(self.unexpected());
                }
                Ok(out)
            }
            _ => self.identifier(),
        }
    }
}
