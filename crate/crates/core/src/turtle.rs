//! Turtle reading and writing.
//!
//! The reader covers the subset generated ontologies use: `@prefix`/`PREFIX`,
//! `@base`/`BASE`, the `a` keyword, prefixed names, absolute and relative
//! IRIs, string/typed/language literals, numeric and boolean shorthands,
//! object lists, predicate-object lists, blank-node property lists,
//! collections and comments. Markdown code fences around the document are
//! ignored while preserving line numbers.
//!
//! The writer emits one statement per triple, sorted, with blank nodes
//! relabelled canonically, so equal graphs serialize to identical bytes.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::model::{
    blank_tree_signature, escape_literal, is_absolute_iri, Literal, LiteralKind, OntologyGraph,
    PrefixMap, Term, Triple,
};
use crate::vocab;

/// Base used to absolutise relative IRIs when neither the document nor the
/// caller supplies one.
pub const DEFAULT_BASE: &str = "http://example.org/ontology/";

/// First syntax failure found in a document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxIssue {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
    /// The offending source line.
    pub excerpt: String,
}

impl fmt::Display for SyntaxIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}\n    {}",
            self.line, self.column, self.message, self.excerpt
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions<'a> {
    /// Bindings usable without being declared; a document may override them.
    pub inherited_prefixes: Option<&'a PrefixMap>,
    /// Base for relative IRIs when the document declares none.
    pub base: Option<&'a str>,
}

pub fn parse_turtle(text: &str) -> Result<OntologyGraph, SyntaxIssue> {
    parse_turtle_with(text, &ParseOptions::default())
}

/// Parse with inherited prefixes and/or a base. The returned graph's prefix
/// map holds only the bindings the document itself declared.
pub fn parse_turtle_with(text: &str, options: &ParseOptions) -> Result<OntologyGraph, SyntaxIssue> {
    let source = unwrap_code_fences(text);
    let mut parser = Parser::new(&source, options);
    parser.document()?;
    Ok(parser.graph)
}

/// Blank out everything outside Markdown code fences, keeping line numbers.
/// Text without fences is returned unchanged.
pub fn unwrap_code_fences(text: &str) -> String {
    let is_fence = |line: &str| line.trim_start().starts_with("```");
    if !text.lines().any(is_fence) {
        return text.to_string();
    }
    let mut inside = false;
    let mut out = String::with_capacity(text.len());
    for line in text.split('\n') {
        if is_fence(line) {
            inside = !inside;
        } else if inside {
            out.push_str(line);
        }
        out.push('\n');
    }
    out.pop();
    out
}

struct DeclaredPrefix {
    line: usize,
    column: usize,
    used: bool,
}

struct Parser<'a> {
    chars: Vec<char>,
    lines: Vec<&'a str>,
    pos: usize,
    line: usize,
    col: usize,
    inherited: Option<&'a PrefixMap>,
    declared: HashMap<String, DeclaredPrefix>,
    base: String,
    blank_labels: HashMap<String, Term>,
    graph: OntologyGraph,
}

type PResult<T> = Result<T, SyntaxIssue>;

impl<'a> Parser<'a> {
    fn new(source: &'a str, options: &ParseOptions<'a>) -> Self {
        Parser {
            chars: source.chars().collect(),
            lines: source.split('\n').collect(),
            pos: 0,
            line: 1,
            col: 1,
            inherited: options.inherited_prefixes,
            declared: HashMap::new(),
            base: options
                .base
                .map(str::to_string)
                .or_else(|| {
                    options
                        .inherited_prefixes
                        .and_then(|p| p.base().map(str::to_string))
                })
                .unwrap_or_else(|| DEFAULT_BASE.to_string()),
            blank_labels: HashMap::new(),
            graph: OntologyGraph::new(),
        }
    }

    // ---- error helpers ----

    fn issue_at(&self, line: usize, column: usize, message: impl Into<String>) -> SyntaxIssue {
        SyntaxIssue {
            line,
            column,
            message: message.into(),
            excerpt: self
                .lines
                .get(line - 1)
                .map(|l| l.trim_end_matches('\r').to_string())
                .unwrap_or_default(),
        }
    }

    fn issue(&self, message: impl Into<String>) -> SyntaxIssue {
        if self.pos >= self.chars.len() {
            return self.eof_issue(message);
        }
        self.issue_at(self.line, self.col, message)
    }

    /// EOF is reported at the last non-whitespace character, so the location
    /// always lies inside the text.
    fn eof_issue(&self, message: impl Into<String>) -> SyntaxIssue {
        let message = format!("{} (reached end of input)", message.into());
        let mut line = 1;
        let mut col = 1;
        let (mut last_line, mut last_col) = (1, 1);
        for &ch in &self.chars {
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                if !ch.is_whitespace() {
                    last_line = line;
                    last_col = col;
                }
                col += 1;
            }
        }
        self.issue_at(last_line, last_col, message)
    }

    // ---- cursor ----

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.pos += 1;
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(ch)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn starts_with_keyword_ci(&self, kw: &str) -> bool {
        let matches = kw
            .chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i).map(|x| x.eq_ignore_ascii_case(&c)) == Some(true));
        matches
            && self
                .peek_at(kw.len())
                .is_none_or(|c| c.is_whitespace() || c == '<' || c == ':')
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() {
                self.bump();
            } else if ch == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, ch: char, what: &str) -> PResult<()> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == ch => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.issue(format!("expected {what}, found `{c}`"))),
            None => Err(self.eof_issue(format!("expected {what}"))),
        }
    }

    // ---- grammar ----

    fn document(&mut self) -> PResult<()> {
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(());
            }
            if self.starts_with("@prefix") {
                self.advance(7);
                self.prefix_directive(true)?;
            } else if self.starts_with("@base") {
                self.advance(5);
                self.base_directive(true)?;
            } else if self.starts_with_keyword_ci("prefix") {
                self.advance(6);
                self.prefix_directive(false)?;
            } else if self.starts_with_keyword_ci("base") {
                self.advance(4);
                self.base_directive(false)?;
            } else if self.peek() == Some('@') {
                return Err(self.issue("unknown directive"));
            } else {
                self.triples()?;
                self.expect('.', "`.` to end the statement")?;
            }
        }
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn prefix_directive(&mut self, turtle_style: bool) -> PResult<()> {
        self.skip_ws();
        let (line, column) = (self.line, self.col);
        let label = self.pn_prefix()?;
        if self.peek() != Some(':') {
            return Err(self.issue("expected `:` after prefix label"));
        }
        self.bump();
        self.skip_ws();
        let namespace = self.iri_ref()?;
        if let Some(existing) = self.graph.prefixes().get(&label) {
            if existing != namespace {
                return Err(self.issue_at(
                    line,
                    column,
                    format!("prefix `{label}:` rebound from <{existing}> to <{namespace}>"),
                ));
            }
        }
        let _ = self.graph.prefixes_mut().bind(&label, &namespace);
        self.declared.entry(label).or_insert(DeclaredPrefix {
            line,
            column,
            used: false,
        });
        if turtle_style {
            self.expect('.', "`.` after @prefix directive")?;
        }
        Ok(())
    }

    fn base_directive(&mut self, turtle_style: bool) -> PResult<()> {
        self.skip_ws();
        let base = self.iri_ref()?;
        self.base = base.clone();
        self.graph.prefixes_mut().set_base(Some(base));
        if turtle_style {
            self.expect('.', "`.` after @base directive")?;
        }
        Ok(())
    }

    fn triples(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_node_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> PResult<Term> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some('(') => self.collection(),
            Some('"') | Some('\'') => Err(self.issue("a literal cannot be a subject")),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => {
                Err(self.issue("a literal cannot be a subject"))
            }
            Some(_) => {
                let start = (self.line, self.col);
                match self.name()? {
                    Name::Iri(iri) => Ok(Term::Iri(iri)),
                    Name::Bare(word) => Err(self.issue_at(
                        start.0,
                        start.1,
                        format!("unexpected `{word}` where a subject was expected"),
                    )),
                }
            }
            None => Err(self.eof_issue("expected a subject")),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> PResult<()> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> PResult<Term> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('a')
                if self.peek_at(1).is_none_or(|c| {
                    c.is_whitespace() || c == '<' || c == '[' || c == '"' || c == '('
                }) =>
            {
                self.bump();
                Ok(Term::Iri(vocab::RDF_TYPE.to_string()))
            }
            Some(c) if c == '"' || c == '\'' || c.is_ascii_digit() => {
                Err(self.issue("expected a predicate IRI, found a literal"))
            }
            Some('[') | Some('_') | Some('(') => Err(self.issue("expected a predicate IRI")),
            Some('.') | Some(',') | Some(';') | Some(']') => Err(self.issue(format!(
                "expected a predicate, found `{}`",
                self.peek().unwrap()
            ))),
            Some(_) => match self.name()? {
                Name::Iri(iri) => Ok(Term::Iri(iri)),
                Name::Bare(word) => Err(self.issue_at(
                    line,
                    col,
                    format!("unexpected `{word}` where a predicate was expected"),
                )),
            },
            None => Err(self.eof_issue("expected a predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> PResult<()> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object)?;
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some('.') | Some(';') | Some(']') => return Ok(()),
                Some(c) => {
                    return Err(self.issue(format!(
                        "expected `.`, `;` or `,` after object, found `{c}`"
                    )))
                }
                None => return Err(self.eof_issue("expected `.` to end the statement")),
            }
        }
    }

    fn object(&mut self) -> PResult<Term> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some('[') => self.blank_node_property_list(),
            Some('(') => self.collection(),
            Some('"') | Some('\'') => self.rdf_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.numeric_literal(),
            Some('.') if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.numeric_literal()
            }
            Some(c) if c == '.' || c == ';' || c == ',' || c == ']' => {
                Err(self.issue(format!("expected an object, found `{c}`")))
            }
            Some(_) => match self.name()? {
                Name::Iri(iri) => Ok(Term::Iri(iri)),
                Name::Bare(word) if word == "true" || word == "false" => {
                    Ok(Term::Literal(Literal::typed(word, vocab::XSD_BOOLEAN)))
                }
                Name::Bare(word) => Err(self.issue_at(
                    line,
                    col,
                    format!("unexpected `{word}` where an object was expected"),
                )),
            },
            None => Err(self.eof_issue("expected an object")),
        }
    }

    fn blank_node_property_list(&mut self) -> PResult<Term> {
        self.expect('[', "`[`")?;
        let node = self.graph.fresh_blank();
        self.skip_ws();
        if self.peek() == Some(']') {
            self.bump();
            return Ok(node);
        }
        self.predicate_object_list(&node)?;
        self.expect(']', "`]` to close the blank node")?;
        Ok(node)
    }

    fn collection(&mut self) -> PResult<Term> {
        self.expect('(', "`(`")?;
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                None => return Err(self.eof_issue("expected `)` to close the collection")),
                _ => items.push(self.object()?),
            }
        }
        let nil = Term::Iri(vocab::RDF_NIL.to_string());
        if items.is_empty() {
            return Ok(nil);
        }
        let nodes: Vec<Term> = items.iter().map(|_| self.graph.fresh_blank()).collect();
        let first = Term::Iri(vocab::RDF_FIRST.to_string());
        let rest = Term::Iri(vocab::RDF_REST.to_string());
        for (i, item) in items.into_iter().enumerate() {
            self.emit(nodes[i].clone(), first.clone(), item)?;
            let next = nodes.get(i + 1).cloned().unwrap_or_else(|| nil.clone());
            self.emit(nodes[i].clone(), rest.clone(), next)?;
        }
        Ok(nodes[0].clone())
    }

    fn emit(&mut self, subject: Term, predicate: Term, object: Term) -> PResult<()> {
        let triple = Triple {
            subject,
            predicate,
            object,
        };
        self.graph
            .insert(triple)
            .map_err(|e| self.issue(e.to_string()))?;
        Ok(())
    }

    // ---- terminals ----

    fn iri_ref(&mut self) -> PResult<String> {
        if self.peek() != Some('<') {
            return match self.peek() {
                Some(c) => Err(self.issue(format!("expected an IRI in `<...>`, found `{c}`"))),
                None => Err(self.eof_issue("expected an IRI in `<...>`")),
            };
        }
        let (line, col) = (self.line, self.col);
        self.bump();
        let mut iri = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    iri.push(self.unicode_escape()?);
                }
                Some(c)
                    if c.is_whitespace()
                        || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') =>
                {
                    return Err(self.issue(format!(
                        "character `{}` is not allowed in an IRI",
                        c.escape_default()
                    )));
                }
                Some(c) => {
                    self.bump();
                    iri.push(c);
                }
                None => return Err(self.issue_at(line, col, "unterminated IRI")),
            }
        }
        if is_absolute_iri(&iri) {
            Ok(iri)
        } else {
            Ok(resolve_relative(&self.base, &iri))
        }
    }

    fn unicode_escape(&mut self) -> PResult<char> {
        let width = match self.peek() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.issue("invalid escape in IRI")),
        };
        self.bump();
        self.hex_char(width)
    }

    fn hex_char(&mut self, width: usize) -> PResult<char> {
        let mut code = 0u32;
        for _ in 0..width {
            let digit = self
                .peek()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.issue("invalid hex digit in escape"))?;
            self.bump();
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or_else(|| self.issue("escape is not a valid code point"))
    }

    fn blank_label(&mut self) -> PResult<Term> {
        self.bump();
        self.bump();
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        while label.ends_with('.') {
            label.pop();
            self.pos -= 1;
            self.col -= 1;
        }
        if label.is_empty() {
            return Err(self.issue("empty blank node label"));
        }
        if let Some(term) = self.blank_labels.get(&label) {
            return Ok(term.clone());
        }
        let term = self.graph.fresh_blank();
        self.blank_labels.insert(label, term.clone());
        Ok(term)
    }

    fn pn_prefix(&mut self) -> PResult<String> {
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(label)
    }

    /// A prefixed name or a bare word (`true`, `false`, stray tokens).
    fn name(&mut self) -> PResult<Name> {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        let first = self.peek().unwrap();
        if !(first.is_alphanumeric() || first == '_' || first == ':') {
            return Err(self.issue(format!("unexpected character `{}`", first.escape_default())));
        }
        let label = self.pn_prefix()?;
        if self.peek() != Some(':') {
            if label.is_empty() {
                return Err(self.issue("unexpected character"));
            }
            let mut word = label;
            while word.ends_with('.') {
                word.pop();
                self.pos -= 1;
                self.col -= 1;
            }
            let _ = start;
            return Ok(Name::Bare(word));
        }
        self.bump();
        let local = self.pn_local()?;
        let namespace = self.lookup_prefix(&label, line, col)?;
        Ok(Name::Iri(format!("{namespace}{local}")))
    }

    fn pn_local(&mut self) -> PResult<String> {
        let mut local = String::new();
        loop {
            match self.peek() {
                Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':') => {
                    local.push(c);
                    self.bump();
                }
                Some('%') => {
                    local.push('%');
                    self.bump();
                    for _ in 0..2 {
                        match self.peek() {
                            Some(h) if h.is_ascii_hexdigit() => {
                                local.push(h);
                                self.bump();
                            }
                            _ => return Err(self.issue("invalid percent escape in local name")),
                        }
                    }
                }
                Some('\\') => {
                    self.bump();
                    match self.peek() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => {
                            local.push(c);
                            self.bump();
                        }
                        _ => return Err(self.issue("invalid escape in local name")),
                    }
                }
                _ => break,
            }
        }
        while local.ends_with('.') {
            local.pop();
            self.pos -= 1;
            self.col -= 1;
        }
        Ok(local)
    }

    fn lookup_prefix(&mut self, label: &str, line: usize, col: usize) -> PResult<String> {
        if let Some(ns) = self.graph.prefixes().get(label) {
            let ns = ns.to_string();
            if let Some(decl) = self.declared.get_mut(label) {
                decl.used = true;
            }
            return Ok(ns);
        }
        if let Some(ns) = self.inherited.and_then(|p| p.get(label)) {
            return Ok(ns.to_string());
        }
        // A declared-but-never-used label one edit away is most likely a
        // misspelt declaration; point at it rather than at the use.
        let suspect = self
            .declared
            .iter()
            .filter(|(name, decl)| !decl.used && edit_distance_at_most_one(name, label))
            .min_by_key(|(_, decl)| (decl.line, decl.column));
        if let Some((name, decl)) = suspect {
            return Err(self.issue_at(
                decl.line,
                decl.column,
                format!(
                    "prefix `{label}:` is used at line {line} but not declared; \
                     the declaration of `{name}:` here is never used"
                ),
            ));
        }
        Err(self.issue_at(line, col, format!("unbound prefix `{label}:`")))
    }

    fn rdf_literal(&mut self) -> PResult<Term> {
        let lexical = self.string()?;
        match self.peek() {
            Some('@') => {
                self.bump();
                let mut tag = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        tag.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(self.issue("invalid language tag"));
                }
                Ok(Term::Literal(Literal::lang(lexical, tag)))
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.bump();
                self.bump();
                let (line, col) = (self.line, self.col);
                let datatype = match self.peek() {
                    Some('<') => self.iri_ref()?,
                    Some(_) => match self.name()? {
                        Name::Iri(iri) => iri,
                        Name::Bare(word) => {
                            return Err(self.issue_at(
                                line,
                                col,
                                format!("invalid datatype `{word}`"),
                            ))
                        }
                    },
                    None => return Err(self.eof_issue("expected a datatype IRI")),
                };
                Ok(Term::Literal(Literal::typed(lexical, datatype)))
            }
            _ => Ok(Term::Literal(Literal::plain(lexical))),
        }
    }

    fn string(&mut self) -> PResult<String> {
        let (line, col) = (self.line, self.col);
        let quote = self.bump().unwrap();
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return Err(self.issue_at(line, col, "unterminated string literal")),
                Some(c) if c == quote => {
                    if !long {
                        self.bump();
                        return Ok(value);
                    }
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        // Quotes directly before the closing triple belong to the value.
                        while self.peek_at(3) == Some(quote) {
                            value.push(quote);
                            self.bump();
                        }
                        self.advance(3);
                        return Ok(value);
                    }
                    value.push(c);
                    self.bump();
                }
                Some('\n') | Some('\r') if !long => {
                    return Err(self.issue("line break inside a single-quoted string"));
                }
                Some('\\') => {
                    self.bump();
                    let escaped = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            value.push(self.unicode_escape()?);
                            continue;
                        }
                        _ => return Err(self.issue("invalid escape sequence in string")),
                    };
                    self.bump();
                    value.push(escaped);
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    fn numeric_literal(&mut self) -> PResult<Term> {
        let mut text = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            text.push(sign);
            self.bump();
        }
        let digits = |p: &mut Self, out: &mut String| {
            let mut n = 0;
            while let Some(c) = p.peek() {
                if c.is_ascii_digit() {
                    out.push(c);
                    p.bump();
                    n += 1;
                } else {
                    break;
                }
            }
            n
        };
        let int_digits = digits(self, &mut text);
        let mut datatype = vocab::XSD_INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            digits(self, &mut text);
            datatype = vocab::XSD_DECIMAL;
        } else if int_digits == 0 {
            return Err(self.issue("malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            text.push(e);
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                text.push(sign);
                self.bump();
            }
            if digits(self, &mut text) == 0 {
                return Err(self.issue("malformed exponent"));
            }
            datatype = vocab::XSD_DOUBLE;
        }
        if self
            .peek()
            .is_some_and(|c| c.is_alphabetic() || c == '_' || c == ':')
        {
            return Err(self.issue("unexpected character after number"));
        }
        Ok(Term::Literal(Literal::typed(text, datatype)))
    }
}

enum Name {
    Iri(String),
    Bare(String),
}

fn edit_distance_at_most_one(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > 1 {
        return false;
    }
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    a.len().max(b.len()) - prefix - suffix <= 1
}

fn resolve_relative(base: &str, relative: &str) -> String {
    match url::Url::parse(base).and_then(|b| b.join(relative)) {
        Ok(url) => url.to_string(),
        Err(_) => format!("{base}{relative}"),
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Deterministic Turtle: `@base` (if set), prefixes sorted by label, then one
/// statement per triple sorted by the N-Triples form of (subject, predicate,
/// object). Ends with a single newline; an empty graph without prefixes
/// serializes to the empty string.
pub fn serialize(graph: &OntologyGraph) -> String {
    let canonical = canonical_blank_labels(graph);
    let relabel = |t: &Term| match t {
        Term::Blank(label) => Term::Blank(canonical[label].clone()),
        other => other.clone(),
    };
    let mut triples: Vec<Triple> = graph
        .iter()
        .map(|t| Triple {
            subject: relabel(&t.subject),
            predicate: t.predicate.clone(),
            object: relabel(&t.object),
        })
        .collect();
    triples.sort_by_cached_key(Triple::sort_key);

    let prefixes = graph.prefixes();
    let mut out = String::new();
    if let Some(base) = prefixes.base() {
        out.push_str(&format!("@base <{}> .\n", escape_iri(base)));
    }
    for (label, ns) in prefixes.iter() {
        out.push_str(&format!("@prefix {label}: <{}> .\n", escape_iri(ns)));
    }
    if !out.is_empty() && !triples.is_empty() {
        out.push('\n');
    }
    for t in &triples {
        let predicate = if t.predicate_iri() == vocab::RDF_TYPE {
            "a".to_string()
        } else {
            write_term(&t.predicate, prefixes)
        };
        out.push_str(&format!(
            "{} {} {} .\n",
            write_term(&t.subject, prefixes),
            predicate,
            write_term(&t.object, prefixes)
        ));
    }
    out
}

fn canonical_blank_labels(graph: &OntologyGraph) -> HashMap<String, String> {
    let mut keys: HashMap<String, String> = HashMap::new();
    let mut keyed: Vec<(String, String)> = graph
        .blank_nodes()
        .into_iter()
        .map(|label| (blank_key(graph, &label, &mut keys, &mut Vec::new()), label))
        .collect();
    keyed.sort();
    keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, label))| (label, format!("b{i}")))
        .collect()
}

/// Label-independent key for a blank node: its tree signature plus the
/// chain of references leading to it.
fn blank_key(
    graph: &OntologyGraph,
    label: &str,
    memo: &mut HashMap<String, String>,
    visiting: &mut Vec<String>,
) -> String {
    if let Some(key) = memo.get(label) {
        return key.clone();
    }
    if visiting.iter().any(|v| v == label) {
        return "~".to_string();
    }
    visiting.push(label.to_string());
    let sig =
        blank_tree_signature(graph, label, &mut Vec::new()).unwrap_or_else(|| format!("~{label}"));
    let node = Term::Blank(label.to_string());
    let mut incoming: Vec<String> = graph
        .iter()
        .filter(|t| t.object == node)
        .map(|t| {
            let subject = match &t.subject {
                Term::Blank(parent) => format!("[{}]", blank_key(graph, parent, memo, visiting)),
                other => other.to_ntriples(),
            };
            format!("{subject} {}", t.predicate.to_ntriples())
        })
        .collect();
    incoming.sort();
    visiting.pop();
    let key = format!("{}|{sig}", incoming.join(","));
    memo.insert(label.to_string(), key.clone());
    key
}

fn write_term(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Iri(iri) => prefixes
            .compact(iri)
            .unwrap_or_else(|| format!("<{}>", escape_iri(iri))),
        Term::Blank(label) => format!("_:{label}"),
        Term::Literal(lit) => {
            let body = format!("\"{}\"", escape_literal(&lit.lexical));
            match &lit.kind {
                LiteralKind::Plain => body,
                LiteralKind::Lang(tag) => format!("{body}@{tag}"),
                LiteralKind::Typed(dt) => {
                    let dt = prefixes
                        .compact(dt)
                        .unwrap_or_else(|| format!("<{}>", escape_iri(dt)));
                    format!("{body}^^{dt}")
                }
            }
        }
    }
}

fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for ch in iri.chars() {
        if ch.is_whitespace()
            || ch.is_control()
            || matches!(ch, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        {
            out.push_str(&format!("\\u{:04X}", ch as u32));
        } else {
            out.push(ch);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Fragments
// ---------------------------------------------------------------------------

/// Triples within `radius` hops of any focus IRI.
///
/// Radius 0 selects the triples that mention a focus IRI in any position.
/// Each further hop adds the subjects and objects of the triples selected so
/// far. Standard-vocabulary IRIs (such as `owl:Class`) never propagate hops,
/// and blank-node descriptions reachable from a selected triple are always
/// included whole.
pub fn fragment_graph(
    graph: &OntologyGraph,
    focus: &BTreeSet<String>,
    radius: usize,
) -> OntologyGraph {
    let mut result = OntologyGraph::with_prefixes(graph.prefixes().clone());
    if focus.is_empty() {
        return result;
    }
    let mut nodes: HashSet<Term> = focus.iter().map(|iri| Term::Iri(iri.clone())).collect();
    let mut frontier: VecDeque<(Term, usize)> = nodes.iter().map(|n| (n.clone(), 0)).collect();
    while let Some((node, depth)) = frontier.pop_front() {
        if depth == radius {
            continue;
        }
        for t in graph.iter() {
            let neighbour = if t.subject == node {
                &t.object
            } else if t.object == node {
                &t.subject
            } else {
                continue;
            };
            let propagates = match neighbour {
                Term::Iri(iri) => !vocab::is_builtin(iri),
                Term::Blank(_) => true,
                Term::Literal(_) => false,
            };
            if propagates && nodes.insert(neighbour.clone()) {
                frontier.push_back((neighbour.clone(), depth + 1));
            }
        }
    }
    let mut selected: Vec<Triple> = graph
        .iter()
        .filter(|t| {
            nodes.contains(&t.subject)
                || nodes.contains(&t.object)
                || t.predicate.as_iri().is_some_and(|p| focus.contains(p))
        })
        .cloned()
        .collect();
    // Close over blank nodes so the fragment carries whole descriptions.
    let mut blanks: Vec<Term> = selected
        .iter()
        .flat_map(|t| [&t.subject, &t.object])
        .filter(|t| t.is_blank())
        .cloned()
        .collect();
    let mut seen: HashSet<Term> = blanks.iter().cloned().collect();
    while let Some(blank) = blanks.pop() {
        let below: Vec<Triple> = graph.outgoing(&blank).cloned().collect();
        for t in below {
            if t.object.is_blank() && seen.insert(t.object.clone()) {
                blanks.push(t.object.clone());
            }
            selected.push(t);
        }
    }
    for t in selected {
        let _ = result.insert(t);
    }
    result
}

/// Turtle text of [`fragment_graph`]; empty when no triple is selected.
pub fn extract_fragment(graph: &OntologyGraph, focus: &BTreeSet<String>, radius: usize) -> String {
    let fragment = fragment_graph(graph, focus, radius);
    if fragment.is_empty() {
        String::new()
    } else {
        serialize(&fragment)
    }
}
