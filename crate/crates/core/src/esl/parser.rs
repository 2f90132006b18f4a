//! Recursive-descent parser for spec files and rule expressions.
//!
//! Precedence, loosest first: `=>`, `or`, `and`, `not`. Inside atom arguments the usual
//! arithmetic precedence applies (`+ -` below `* /`, unary minus binds tightest).

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use super::error::{Location, Section, SpecError, SymbolKind};
use super::lexer::{is_ident_continue, is_ident_start, tokenize, LexError, Tok, Token};
use super::normal::{normalize_to_denf, Formula, DEFAULT_CLAUSE_LIMIT};
use super::term::{parse_decimal_literal, Builtin, Constant, TermNode};
use super::{Atom, EslRule, EslSpec, PredLiteral, PredicateDecl};

/// Nesting bound for parentheses, negations and unary minus.
const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Convert rules that are not already `DNF => CNF` instead of rejecting them.
    pub normalize: bool,
    pub clause_limit: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            normalize: false,
            clause_limit: DEFAULT_CLAUSE_LIMIT,
        }
    }
}

pub fn parse_spec(source: &str) -> Result<EslSpec, SpecError> {
    parse_spec_with(source, &ParseOptions::default())
}

pub fn parse_spec_bytes(source: &[u8]) -> Result<EslSpec, SpecError> {
    let text = std::str::from_utf8(source).map_err(|e| SpecError::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    parse_spec(text)
}

pub fn parse_spec_with(source: &str, opts: &ParseOptions) -> Result<EslSpec, SpecError> {
    let root: Value = serde_json::from_str(source).map_err(|e| SpecError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| SpecError::Schema {
        path: "$".into(),
        message: "top level must be a JSON object".into(),
    })?;
    let strings = |key: &str| -> Result<Vec<String>, SpecError> {
        let arr = obj
            .get(key)
            .ok_or_else(|| SpecError::Schema {
                path: "$".into(),
                message: format!("missing \"{key}\" key"),
            })?
            .as_array()
            .ok_or_else(|| SpecError::Schema {
                path: format!("$.{key}"),
                message: "expected an array of strings".into(),
            })?;
        arr.iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| SpecError::Schema {
                        path: format!("$.{key}[{i}]"),
                        message: "expected a string".into(),
                    })
            })
            .collect()
    };
    let variables = strings("Variables")?;
    let predicates = strings("Predicates")?;
    let rules = strings("Rules")?;

    build_spec(&variables, &predicates, &rules, opts).map_err(|mut err| {
        if let Some(loc) = err.location_mut() {
            let entries = match loc.section {
                Section::Variables => &variables,
                Section::Predicates => &predicates,
                Section::Rules => &rules,
            };
            loc.file_position = locate_in_source(source, loc, entries);
        }
        err
    })
}

fn build_spec(
    variables: &[String],
    predicates: &[String],
    rules: &[String],
    opts: &ParseOptions,
) -> Result<EslSpec, SpecError> {
    let mut spec = EslSpec::default();
    for (index, v) in variables.iter().enumerate() {
        if !is_identifier(v) {
            return Err(SpecError::Syntax {
                location: loc(Section::Variables, index, 0),
                expected: "an identifier".into(),
                found: format!("{v:?}"),
            });
        }
        spec.variables.insert(v.clone());
    }
    for (index, text) in predicates.iter().enumerate() {
        let decl = parse_predicate_decl(text, index)?;
        if spec.predicate(&decl.name).is_some() {
            return Err(SpecError::Duplicate {
                location: loc(Section::Predicates, index, 0),
                what: "predicate",
                name: decl.name,
            });
        }
        spec.predicates.push(decl);
    }
    for (index, text) in rules.iter().enumerate() {
        let rule = parse_rule_at(&spec, text, index, opts)?;
        spec.rules.push(rule);
    }
    Ok(spec)
}

/// Parses a single rule against the variables and predicates of `spec`.
pub fn parse_rule(spec: &EslSpec, text: &str, opts: &ParseOptions) -> Result<EslRule, SpecError> {
    parse_rule_at(spec, text, spec.rules.len(), opts)
}

fn parse_rule_at(
    spec: &EslSpec,
    text: &str,
    index: usize,
    opts: &ParseOptions,
) -> Result<EslRule, SpecError> {
    let tokens = tokenize(text).map_err(|e| lex_error(Section::Rules, index, e))?;
    let arities: BTreeMap<&str, usize> = spec
        .predicates
        .iter()
        .map(|p| (p.name.as_str(), p.arity()))
        .collect();
    let mut parser = RuleParser {
        tokens,
        pos: 0,
        depth: 0,
        index,
        variables: &spec.variables,
        arities,
    };
    let expr = parser.implication()?;
    parser.expect_eof()?;
    let shape = RuleShape { text, index };
    if opts.normalize {
        shape.normalized(&expr, opts.clause_limit)
    } else {
        shape.strict(&expr)
    }
}

fn parse_predicate_decl(text: &str, index: usize) -> Result<PredicateDecl, SpecError> {
    let Some((head, description)) = text.split_once(":=") else {
        return Err(SpecError::Syntax {
            location: loc(Section::Predicates, index, text.chars().count()),
            expected: "`Name(params) := description`".into(),
            found: "no `:=`".into(),
        });
    };
    let description = description.trim();
    if description.is_empty() {
        return Err(SpecError::Syntax {
            location: loc(Section::Predicates, index, text.chars().count()),
            expected: "a description after `:=`".into(),
            found: "end of input".into(),
        });
    }
    let tokens = tokenize(head).map_err(|e| lex_error(Section::Predicates, index, e))?;
    let err = |t: &Token, expected: &str| SpecError::Syntax {
        location: loc(Section::Predicates, index, t.start),
        expected: expected.into(),
        found: t.tok.to_string(),
    };
    let mut it = tokens.iter();
    let first = it.next().expect("eof token");
    let Tok::Ident(name) = &first.tok else {
        return Err(err(first, "a predicate name"));
    };
    let mut params = Vec::new();
    let mut next = it.next().expect("eof token");
    if next.tok == Tok::LParen {
        next = it.next().expect("eof token");
        if next.tok != Tok::RParen {
            loop {
                let Tok::Ident(p) = &next.tok else {
                    return Err(err(next, "a parameter name"));
                };
                if params.contains(p) {
                    return Err(SpecError::Duplicate {
                        location: loc(Section::Predicates, index, next.start),
                        what: "parameter",
                        name: p.clone(),
                    });
                }
                params.push(p.clone());
                next = it.next().expect("eof token");
                match next.tok {
                    Tok::Comma => next = it.next().expect("eof token"),
                    Tok::RParen => break,
                    _ => return Err(err(next, "`,` or `)`")),
                }
            }
        }
        next = it.next().expect("eof token");
    }
    if next.tok != Tok::Eof {
        return Err(err(next, "`:=`"));
    }
    Ok(PredicateDecl {
        name: name.clone(),
        params,
        description: description.to_string(),
    })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start)
        && chars.all(is_ident_continue)
        && !matches!(s, "not" | "and" | "or")
}

fn loc(section: Section, index: usize, offset: usize) -> Location {
    Location {
        section,
        index,
        column: offset + 1,
        file_position: None,
    }
}

fn lex_error(section: Section, index: usize, e: LexError) -> SpecError {
    SpecError::Syntax {
        location: loc(section, index, e.offset),
        expected: e.expected,
        found: e.found,
    }
}

/// Best-effort mapping of an entry-relative column to a line/column in the file: finds
/// the JSON-encoded entry in the source and offsets into it. Gives up (returns `None`)
/// when the entry was written with escapes the encoder would not produce.
fn locate_in_source(source: &str, loc: &Location, entries: &[String]) -> Option<(usize, usize)> {
    let key = format!("\"{}\"", loc.section);
    let mut cursor = source.find(&key)? + key.len();
    let mut start = None;
    for (i, entry) in entries.iter().enumerate().take(loc.index + 1) {
        let encoded = serde_json::to_string(entry).ok()?;
        let found = source[cursor..].find(&encoded)? + cursor;
        if i == loc.index {
            start = Some(found);
        }
        cursor = found + encoded.len();
    }
    let entry = &entries[loc.index];
    let prefix: String = entry.chars().take(loc.column.saturating_sub(1)).collect();
    let encoded_prefix = serde_json::to_string(&prefix).ok()?;
    let offset = start? + encoded_prefix.len() - 1;
    let before = source.get(..offset)?;
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |p| p + 1);
    Some((line, before[line_start..].chars().count() + 1))
}

#[derive(Debug, Clone)]
struct Expr {
    kind: ExprKind,
    start: usize,
    end: usize,
}

#[derive(Debug, Clone)]
enum ExprKind {
    Atom(Atom),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

struct RuleParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    index: usize,
    variables: &'a BTreeSet<String>,
    arities: BTreeMap<&'a str, usize>,
}

impl RuleParser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn loc(&self, offset: usize) -> Location {
        loc(Section::Rules, self.index, offset)
    }

    fn unexpected(&self, expected: &str) -> SpecError {
        let t = self.peek();
        SpecError::Syntax {
            location: self.loc(t.start),
            expected: expected.into(),
            found: t.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, SpecError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expect_eof(&mut self) -> Result<(), SpecError> {
        self.expect(Tok::Eof, "end of rule").map(|_| ())
    }

    fn enter(&mut self) -> Result<(), SpecError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.peek();
            return Err(SpecError::Syntax {
                location: self.loc(t.start),
                expected: format!("at most {MAX_DEPTH} levels of nesting"),
                found: "deeper nesting".into(),
            });
        }
        Ok(())
    }

    fn implication(&mut self) -> Result<Expr, SpecError> {
        let lhs = self.disjunction()?;
        if self.peek().tok == Tok::Implies {
            self.bump();
            self.enter()?;
            let rhs = self.implication()?;
            self.depth -= 1;
            let (start, end) = (lhs.start, rhs.end);
            return Ok(Expr {
                kind: ExprKind::Implies(Box::new(lhs), Box::new(rhs)),
                start,
                end,
            });
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, SpecError> {
        let first = self.conjunction()?;
        if self.peek().tok != Tok::Or {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek().tok == Tok::Or {
            self.bump();
            items.push(self.conjunction()?);
        }
        let (start, end) = (items[0].start, items[items.len() - 1].end);
        Ok(Expr {
            kind: ExprKind::Or(items),
            start,
            end,
        })
    }

    fn conjunction(&mut self) -> Result<Expr, SpecError> {
        let first = self.unary()?;
        if self.peek().tok != Tok::And {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek().tok == Tok::And {
            self.bump();
            items.push(self.unary()?);
        }
        let (start, end) = (items[0].start, items[items.len() - 1].end);
        Ok(Expr {
            kind: ExprKind::And(items),
            start,
            end,
        })
    }

    fn unary(&mut self) -> Result<Expr, SpecError> {
        self.enter()?;
        let out = match self.peek().tok {
            Tok::Not => {
                let start = self.bump().start;
                let inner = self.unary()?;
                let end = inner.end;
                Expr {
                    kind: ExprKind::Not(Box::new(inner)),
                    start,
                    end,
                }
            }
            Tok::LParen => {
                let start = self.bump().start;
                let mut inner = self.implication()?;
                let end = self.expect(Tok::RParen, "`)`")?.end;
                inner.start = start;
                inner.end = end;
                inner
            }
            Tok::Ident(_) => self.atom()?,
            _ => return Err(self.unexpected("a predicate, `not` or `(`")),
        };
        self.depth -= 1;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr, SpecError> {
        let name_tok = self.bump();
        let Tok::Ident(name) = name_tok.tok else {
            unreachable!("atom() is only entered on an identifier")
        };
        let mut args = Vec::new();
        let mut end = name_tok.end;
        if self.peek().tok == Tok::LParen {
            self.bump();
            if self.peek().tok != Tok::RParen {
                loop {
                    args.push(self.term()?);
                    if self.peek().tok == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            end = self.expect(Tok::RParen, "`,` or `)`")?.end;
        }
        let Some(&arity) = self.arities.get(name.as_str()) else {
            return Err(SpecError::UndeclaredSymbol {
                location: self.loc(name_tok.start),
                kind: SymbolKind::Predicate,
                name,
            });
        };
        if arity != args.len() {
            return Err(SpecError::Arity {
                location: self.loc(name_tok.start),
                name,
                expected: arity,
                found: args.len(),
            });
        }
        Ok(Expr {
            kind: ExprKind::Atom(Atom {
                predicate: name,
                args,
            }),
            start: name_tok.start,
            end,
        })
    }

    fn term(&mut self) -> Result<TermNode, SpecError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => "+",
                Tok::Minus => "-",
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = TermNode::app(op, vec![lhs, rhs]);
        }
    }

    fn product(&mut self) -> Result<TermNode, SpecError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => "*",
                Tok::Slash => "/",
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = TermNode::app(op, vec![lhs, rhs]);
        }
    }

    fn factor(&mut self) -> Result<TermNode, SpecError> {
        self.enter()?;
        let t = self.bump();
        let out = match t.tok {
            Tok::Minus => match self.factor()? {
                TermNode::Constant(Constant::Number(n)) => TermNode::Constant(Constant::number(-n)),
                other => TermNode::app("-", vec![TermNode::num("0"), other]),
            },
            Tok::Number(text) => {
                let value = parse_decimal_literal(&text).expect("lexer produces decimal literals");
                TermNode::Constant(Constant::number(value))
            }
            Tok::Str(s) => TermNode::Constant(Constant::Text(s)),
            Tok::LParen => {
                let inner = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                inner
            }
            Tok::Ident(name) if self.peek().tok == Tok::LParen => {
                self.bump();
                let mut args = Vec::new();
                if self.peek().tok != Tok::RParen {
                    loop {
                        args.push(self.term()?);
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, "`,` or `)`")?;
                let builtin = Builtin::lookup(&name)
                    .filter(|b| !b.is_infix())
                    .ok_or_else(|| SpecError::UndeclaredSymbol {
                        location: self.loc(t.start),
                        kind: SymbolKind::Function,
                        name: name.clone(),
                    })?;
                if builtin.arity() != args.len() {
                    return Err(SpecError::Arity {
                        location: self.loc(t.start),
                        name,
                        expected: builtin.arity(),
                        found: args.len(),
                    });
                }
                TermNode::FuncApp { name, args }
            }
            Tok::Ident(name) => {
                if !self.variables.contains(&name) {
                    return Err(SpecError::UndeclaredSymbol {
                        location: self.loc(t.start),
                        kind: SymbolKind::Variable,
                        name,
                    });
                }
                TermNode::Variable(name)
            }
            other => {
                return Err(SpecError::Syntax {
                    location: self.loc(t.start),
                    expected: "a term".into(),
                    found: other.to_string(),
                })
            }
        };
        self.depth -= 1;
        Ok(out)
    }
}

struct RuleShape<'a> {
    text: &'a str,
    index: usize,
}

impl RuleShape<'_> {
    fn fragment(&self, e: &Expr) -> String {
        self.text
            .chars()
            .skip(e.start)
            .take(e.end - e.start)
            .collect()
    }

    fn not_denf(&self, e: &Expr, reason: &str) -> SpecError {
        SpecError::NotDeNF {
            location: loc(Section::Rules, self.index, e.start),
            reason: reason.into(),
            fragment: self.fragment(e),
        }
    }

    fn split<'e>(&self, e: &'e Expr) -> Result<(&'e Expr, &'e Expr), SpecError> {
        match &e.kind {
            ExprKind::Implies(l, r) => Ok((l, r)),
            _ => Err(self.not_denf(e, "a rule must be an implication `lhs => rhs`")),
        }
    }

    fn strict(&self, e: &Expr) -> Result<EslRule, SpecError> {
        let (l, r) = self.split(e)?;
        Ok(EslRule {
            lhs: self.normal_form(l, true)?,
            rhs: self.normal_form(r, false)?,
        })
    }

    /// Reads `e` as DNF (`dnf = true`) or CNF, flattening nested groups of the same
    /// connective.
    fn normal_form(&self, e: &Expr, dnf: bool) -> Result<Vec<Vec<PredLiteral>>, SpecError> {
        let reason = if dnf {
            "left-hand side is not in disjunctive normal form"
        } else {
            "right-hand side is not in conjunctive normal form"
        };
        let mut outer = Vec::new();
        flatten(e, !dnf, &mut outer);
        outer
            .into_iter()
            .map(|group| {
                let mut inner = Vec::new();
                flatten(group, dnf, &mut inner);
                inner
                    .into_iter()
                    .map(|item| self.literal(item, reason))
                    .collect()
            })
            .collect()
    }

    fn literal(&self, e: &Expr, reason: &str) -> Result<PredLiteral, SpecError> {
        match &e.kind {
            ExprKind::Atom(a) => Ok(PredLiteral::pos(a.clone())),
            ExprKind::Not(inner) => match &inner.kind {
                ExprKind::Atom(a) => Ok(PredLiteral::neg(a.clone())),
                _ => Err(self.not_denf(e, reason)),
            },
            ExprKind::Implies(..) => Err(self.not_denf(e, "nested implication")),
            _ => Err(self.not_denf(e, reason)),
        }
    }

    fn normalized(&self, e: &Expr, limit: usize) -> Result<EslRule, SpecError> {
        let (l, r) = self.split(e)?;
        normalize_to_denf(&to_formula(l), &to_formula(r), limit).map_err(|x| {
            SpecError::BlowupLimit {
                index: self.index,
                limit: x.limit,
            }
        })
    }
}

/// Collects the operands of nested `and` (when `conj`) or `or` nodes.
fn flatten<'e>(e: &'e Expr, conj: bool, out: &mut Vec<&'e Expr>) {
    match (&e.kind, conj) {
        (ExprKind::And(items), true) | (ExprKind::Or(items), false) => {
            for i in items {
                flatten(i, conj, out);
            }
        }
        _ => out.push(e),
    }
}

fn to_formula(e: &Expr) -> Formula<Atom> {
    match &e.kind {
        ExprKind::Atom(a) => Formula::Atom(a.clone()),
        ExprKind::Not(i) => Formula::negate(to_formula(i)),
        ExprKind::And(items) => Formula::And(items.iter().map(to_formula).collect()),
        ExprKind::Or(items) => Formula::Or(items.iter().map(to_formula).collect()),
        ExprKind::Implies(l, r) => Formula::implies(to_formula(l), to_formula(r)),
    }
}
