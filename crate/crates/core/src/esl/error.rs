use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Variables,
    Predicates,
    Rules,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Variables => "Variables",
            Section::Predicates => "Predicates",
            Section::Rules => "Rules",
        })
    }
}

/// Where an error was found: an entry of one of the spec arrays, a 1-based character
/// column inside that entry's string, and, when the entry could be located in the file,
/// the 1-based line and column in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub section: Section,
    pub index: usize,
    pub column: usize,
    pub file_position: Option<(usize, usize)>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((line, col)) = self.file_position {
            write!(f, "line {line}, column {col} (")?;
        }
        write!(
            f,
            "{}[{}], column {}",
            self.section, self.index, self.column
        )?;
        if self.file_position.is_some() {
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Variable,
    Predicate,
    Function,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Variable => "variable",
            SymbolKind::Predicate => "predicate",
            SymbolKind::Function => "function",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("invalid UTF-8 at byte {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    /// `path` points into the JSON document, e.g. `$.Rules[2]`.
    #[error("invalid spec structure at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("syntax error at {location}: expected {expected}, found {found}")]
    Syntax {
        location: Location,
        expected: String,
        found: String,
    },
    #[error("arity error at {location}: `{name}` expects {expected} argument(s), found {found}")]
    Arity {
        location: Location,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("undeclared {kind} `{name}` at {location}")]
    UndeclaredSymbol {
        location: Location,
        kind: SymbolKind,
        name: String,
    },
    #[error("duplicate {what} `{name}` at {location}")]
    Duplicate {
        location: Location,
        what: &'static str,
        name: String,
    },
    #[error("rule is not in DNF => CNF form at {location}: {reason}: `{fragment}`")]
    NotDeNF {
        location: Location,
        reason: String,
        fragment: String,
    },
    #[error("normalization of rule {index} exceeds {limit} clauses")]
    BlowupLimit { index: usize, limit: usize },
}

impl SpecError {
    pub fn location(&self) -> Option<&Location> {
        match self {
            SpecError::Syntax { location, .. }
            | SpecError::Arity { location, .. }
            | SpecError::UndeclaredSymbol { location, .. }
            | SpecError::Duplicate { location, .. }
            | SpecError::NotDeNF { location, .. } => Some(location),
            _ => None,
        }
    }

    /// Where the error was found, in whatever terms apply to its kind.
    pub fn position(&self) -> String {
        match self {
            SpecError::InvalidUtf8 { offset } => format!("byte {offset}"),
            SpecError::Json { line, column, .. } => format!("line {line}, column {column}"),
            SpecError::Schema { path, .. } => path.clone(),
            SpecError::BlowupLimit { index, .. } => format!("Rules[{index}]"),
            other => other
                .location()
                .map(ToString::to_string)
                .unwrap_or_default(),
        }
    }

    pub(crate) fn location_mut(&mut self) -> Option<&mut Location> {
        match self {
            SpecError::Syntax { location, .. }
            | SpecError::Arity { location, .. }
            | SpecError::UndeclaredSymbol { location, .. }
            | SpecError::Duplicate { location, .. }
            | SpecError::NotDeNF { location, .. } => Some(location),
            _ => None,
        }
    }
}
