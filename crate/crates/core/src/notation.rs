//! Classmark grammar, canonical rendering and the digit-string algebra
//! behind hierarchically expressive notation.
//!
//! Dots in decimal notation are presentational: `539.125.46` and
//! `53912546` denote the same class. The one exception is a dot that does
//! not fall on a three-digit boundary (`539.12.000.1`), which opens an
//! opaque local segment. Such segments are kept in [`Digits`] as a literal
//! `.` so they survive a format/parse round trip.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Label used wherever the hierarchy root has to be rendered as text.
pub const ROOT_LABEL: &str = "(root)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty notation")]
    Empty,
    #[error("empty operand")]
    EmptyOperand,
    #[error("unbalanced delimiter {0:?}")]
    Unbalanced(char),
    #[error("unknown facet delimiter {0:?}")]
    UnknownDelimiter(char),
    #[error("non-digit character {0:?}")]
    NonDigit(char),
    #[error("misplaced dot")]
    MisplacedDot,
    #[error("empty auxiliary payload")]
    EmptyPayload,
    #[error("malformed span: {0}")]
    MalformedSpan(&'static str),
}

/// A parse failure and the byte offset in the input where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(offset: usize, kind: ParseErrorKind) -> Self {
        Self { offset, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotationError {
    #[error("{operation} is not defined for {variant} notation `{notation}`")]
    UnsupportedVariant {
        operation: &'static str,
        variant: &'static str,
        notation: String,
    },
    #[error("invalid digit string {0:?}")]
    InvalidDigits(String),
    #[error("duplicate facet delimiter {0:?}")]
    DuplicateDelimiter(char),
    #[error("reserved character {0:?} cannot be a facet delimiter")]
    ReservedDelimiter(char),
}

/// Non-empty decimal digit string; `.` separates opaque local segments.
///
/// Every segment except the last has a length that is not a multiple of
/// three, otherwise the segment boundary would be indistinguishable from a
/// presentational dot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digits(String);

impl Digits {
    pub fn new(raw: impl Into<String>) -> Result<Self, NotationError> {
        let raw = raw.into();
        let segments: Vec<&str> = raw.split('.').collect();
        let valid = !raw.is_empty()
            && segments
                .iter()
                .all(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
            && segments[..segments.len() - 1].iter().all(|s| s.len() % 3 != 0);
        if valid {
            Ok(Self(raw))
        } else {
            Err(NotationError::InvalidDigits(raw))
        }
    }

    /// Parses dotted display text; `base` is the offset of `text` in the
    /// caller's input, used for error reporting.
    pub fn parse_dotted(text: &str, base: usize) -> Result<Self, ParseError> {
        if text.is_empty() {
            return Err(ParseError::new(base, ParseErrorKind::Empty));
        }
        let mut out = String::with_capacity(text.len());
        let mut segment_len = 0usize;
        let mut prev_dot = true;
        for (i, c) in text.char_indices() {
            match c {
                '0'..='9' => {
                    out.push(c);
                    segment_len += 1;
                    prev_dot = false;
                }
                '.' => {
                    if prev_dot || i + 1 == text.len() {
                        return Err(ParseError::new(base + i, ParseErrorKind::MisplacedDot));
                    }
                    if !segment_len.is_multiple_of(3) {
                        out.push('.');
                        segment_len = 0;
                    }
                    prev_dot = true;
                }
                other => return Err(ParseError::new(base + i, ParseErrorKind::NonDigit(other))),
            }
        }
        Ok(Self(out))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_local_segment(&self) -> bool {
        self.0.contains('.')
    }

    /// Proper-prefix test in the digit-string sense.
    pub fn is_proper_prefix_of(&self, other: &Digits) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }

    /// Drops the last digit; `None` once nothing is left.
    pub fn broaden(&self) -> Option<Digits> {
        let mut s = self.0.clone();
        s.pop();
        if s.ends_with('.') {
            s.pop();
        }
        if s.is_empty() {
            None
        } else {
            Some(Digits(s))
        }
    }

    /// Appends digits to the last segment.
    pub fn extend(&self, tail: &str) -> Result<Digits, NotationError> {
        Digits::new(format!("{}{}", self.0, tail))
    }

    /// Canonical display form: dot after every third digit of each segment.
    pub fn to_dotted(&self) -> String {
        self.0.split('.').map(group_by_three).collect::<Vec<_>>().join(".")
    }
}

impl fmt::Display for Digits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dotted())
    }
}

fn group_by_three(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && i % 3 == 0 {
            out.push('.');
        }
        out.push(c);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relator {
    /// `+` juxtaposition.
    Plus,
    /// `:` simple relation.
    Colon,
}

impl Relator {
    pub fn symbol(self) -> char {
        match self {
            Relator::Plus => '+',
            Relator::Colon => ':',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Relator::Plus),
            ':' => Some(Relator::Colon),
            _ => None,
        }
    }
}

/// Auxiliary (facet) component attached to, or standing in for, a main number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Auxiliary {
    pub facet: String,
    pub open: char,
    pub close: Option<char>,
    pub digits: Digits,
}

impl fmt::Display for Auxiliary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.open, self.digits)?;
        if let Some(close) = self.close {
            write!(f, "{close}")?;
        }
        Ok(())
    }
}

/// Parsed classmark.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NotationExpr {
    Simple(Digits),
    Span {
        left: Digits,
        right: Digits,
    },
    /// A bare auxiliary such as `(469)` or `=821.221`.
    Aux(Auxiliary),
    Compound {
        main: Box<NotationExpr>,
        auxiliaries: Vec<Auxiliary>,
    },
    Relation {
        op: Relator,
        operands: Vec<NotationExpr>,
    },
    /// Ordinal notation (`QD241-441`, `PIJ BK`) with no digit algebra.
    Opaque(String),
}

impl NotationExpr {
    pub fn simple(digits: &str) -> Result<Self, NotationError> {
        Ok(NotationExpr::Simple(Digits::new(digits)?))
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            NotationExpr::Simple(_) => "simple",
            NotationExpr::Span { .. } => "span",
            NotationExpr::Aux(_) => "auxiliary",
            NotationExpr::Compound { .. } => "compound",
            NotationExpr::Relation { .. } => "relation",
            NotationExpr::Opaque(_) => "opaque",
        }
    }

    pub fn as_simple(&self) -> Option<&Digits> {
        match self {
            NotationExpr::Simple(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_span(&self) -> bool {
        matches!(self, NotationExpr::Span { .. })
    }

    pub fn canonical(&self) -> String {
        format(self)
    }

    fn order_key(&self) -> (u8, String, u8, String) {
        match self {
            NotationExpr::Simple(d) => (0, d.0.clone(), 1, String::new()),
            NotationExpr::Span { left, right } => (0, left.0.clone(), 0, right.0.clone()),
            NotationExpr::Compound { main, .. } => {
                let (group, primary, _, _) = main.order_key();
                (group, primary, 2, String::new())
            }
            NotationExpr::Relation { operands, .. } => {
                let (group, primary, _, _) = operands[0].order_key();
                (group, primary, 3, String::new())
            }
            NotationExpr::Aux(aux) => (1, format!("{}{}", aux.open, aux.digits.0), 0, String::new()),
            NotationExpr::Opaque(text) => (2, text.clone(), 0, String::new()),
        }
    }
}

/// Digit-string order; a span sorts before the simple class sharing its
/// left endpoint, compounds sort right after their main number.
impl Ord for NotationExpr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key()
            .cmp(&other.order_key())
            .then_with(|| self.canonical().cmp(&other.canonical()))
    }
}

impl PartialOrd for NotationExpr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NotationExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotationExpr::Simple(d) => write!(f, "{d}"),
            NotationExpr::Span { left, right } => f.write_str(&format_span(left, right)),
            NotationExpr::Aux(aux) => write!(f, "{aux}"),
            NotationExpr::Compound { main, auxiliaries } => {
                write!(f, "{main}")?;
                for aux in auxiliaries {
                    write!(f, "{aux}")?;
                }
                Ok(())
            }
            NotationExpr::Relation { op, operands } => {
                for (i, operand) in operands.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{}", op.symbol())?;
                    }
                    write!(f, "{operand}")?;
                }
                Ok(())
            }
            NotationExpr::Opaque(text) => f.write_str(text),
        }
    }
}

impl Serialize for Digits {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_dotted())
    }
}

impl Serialize for NotationExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn format_span(left: &Digits, right: &Digits) -> String {
    let (l, r) = (left.as_str(), right.as_str());
    let mut shared_groups = 0;
    while (shared_groups + 1) * 3 < l.len() && l[..(shared_groups + 1) * 3] == r[..(shared_groups + 1) * 3] {
        shared_groups += 1;
    }
    if shared_groups == 0 {
        format!("{left}/{right}")
    } else {
        format!("{left}/.{}", group_by_three(&r[shared_groups * 3..]))
    }
}

/// Renders the canonical text of an expression.
pub fn format(expr: &NotationExpr) -> String {
    expr.to_string()
}

/// Delimiters registered for one auxiliary facet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetDelimiter {
    pub facet_id: String,
    pub open: char,
    /// `None` for prefix-style facets such as `=`.
    pub close: Option<char>,
}

impl FacetDelimiter {
    pub fn new(facet_id: impl Into<String>, open: char, close: Option<char>) -> Self {
        Self {
            facet_id: facet_id.into(),
            open,
            close,
        }
    }
}

const RESERVED: &[char] = &['.', '/', '+', ':'];

/// The facet delimiters and opaque-notation policy a parser works under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotationSyntax {
    facets: Vec<FacetDelimiter>,
    allow_opaque: bool,
}

impl Default for NotationSyntax {
    fn default() -> Self {
        Self::udc()
    }
}

impl NotationSyntax {
    pub fn new(facets: Vec<FacetDelimiter>, allow_opaque: bool) -> Result<Self, NotationError> {
        let mut seen: Vec<char> = Vec::new();
        for facet in &facets {
            for c in std::iter::once(facet.open).chain(facet.close) {
                if c.is_ascii_alphanumeric() || RESERVED.contains(&c) || c.is_whitespace() {
                    return Err(NotationError::ReservedDelimiter(c));
                }
                if seen.contains(&c) {
                    return Err(NotationError::DuplicateDelimiter(c));
                }
                seen.push(c);
            }
        }
        Ok(Self { facets, allow_opaque })
    }

    /// Place `( )`, language `=` and special `-` auxiliaries.
    pub fn udc() -> Self {
        Self {
            facets: vec![
                FacetDelimiter::new("place", '(', Some(')')),
                FacetDelimiter::new("language", '=', None),
                FacetDelimiter::new("special", '-', None),
            ],
            allow_opaque: false,
        }
    }

    pub fn facets(&self) -> &[FacetDelimiter] {
        &self.facets
    }

    pub fn allows_opaque(&self) -> bool {
        self.allow_opaque
    }

    pub fn with_opaque(mut self, allow: bool) -> Self {
        self.allow_opaque = allow;
        self
    }

    pub fn facet(&self, facet_id: &str) -> Option<&FacetDelimiter> {
        self.facets.iter().find(|f| f.facet_id == facet_id)
    }

    fn facet_by_open(&self, c: char) -> Option<&FacetDelimiter> {
        self.facets.iter().find(|f| f.open == c)
    }

    fn is_close(&self, c: char) -> bool {
        self.facets.iter().any(|f| f.close == Some(c))
    }

    pub fn parse(&self, text: &str) -> Result<NotationExpr, ParseError> {
        let lead = text.len() - text.trim_start().len();
        let body = text.trim();
        if body.is_empty() {
            return Err(ParseError::new(0, ParseErrorKind::Empty));
        }
        match self.parse_expression(body, lead) {
            Ok(expr) => Ok(expr),
            Err(_) if self.allow_opaque && body.chars().any(char::is_alphabetic) => Ok(NotationExpr::Opaque(
                body.split_whitespace().collect::<Vec<_>>().join(" "),
            )),
            Err(err) => Err(err),
        }
    }

    fn parse_expression(&self, body: &str, base: usize) -> Result<NotationExpr, ParseError> {
        // Split on top-level relators; bracketed auxiliaries may not contain them.
        let mut pieces: Vec<(Option<Relator>, usize, usize)> = Vec::new();
        let mut open_at: Option<(usize, char)> = None;
        let mut start = 0;
        let mut pending_op = None;
        for (i, c) in body.char_indices() {
            if let Some((_, close)) = open_at {
                if c == close {
                    open_at = None;
                }
                continue;
            }
            if let Some(op) = Relator::from_symbol(c) {
                pieces.push((pending_op, start, i));
                pending_op = Some(op);
                start = i + 1;
            } else if let Some(close) = self.facet_by_open(c).and_then(|f| f.close) {
                open_at = Some((i, close));
            }
        }
        if let Some((at, _)) = open_at {
            let open = body[at..].chars().next().unwrap_or('(');
            return Err(ParseError::new(base + at, ParseErrorKind::Unbalanced(open)));
        }
        pieces.push((pending_op, start, body.len()));

        let mut acc: Option<NotationExpr> = None;
        for (op, from, to) in pieces {
            if from == to {
                return Err(ParseError::new(base + from, ParseErrorKind::EmptyOperand));
            }
            let operand = self.parse_operand(&body[from..to], base + from)?;
            acc = Some(match (acc, op) {
                (None, _) => operand,
                (Some(left), Some(op)) => join_relation(op, left, operand),
                (Some(_), None) => unreachable!("every piece after the first follows a relator"),
            });
        }
        Ok(acc.expect("at least one operand"))
    }

    fn parse_operand(&self, s: &str, base: usize) -> Result<NotationExpr, ParseError> {
        let main_end = s
            .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '/'))
            .unwrap_or(s.len());
        let main = if main_end == 0 {
            None
        } else {
            Some(parse_main(&s[..main_end], base)?)
        };

        let mut auxiliaries = Vec::new();
        let mut i = main_end;
        while i < s.len() {
            let c = s[i..].chars().next().expect("in bounds");
            if let Some(facet) = self.facet_by_open(c) {
                let payload_start = i + c.len_utf8();
                let (payload_end, next) = match facet.close {
                    Some(close) => {
                        let end = s[payload_start..]
                            .find(close)
                            .map(|p| payload_start + p)
                            .ok_or(ParseError::new(base + i, ParseErrorKind::Unbalanced(c)))?;
                        (end, end + close.len_utf8())
                    }
                    None => {
                        let end = s[payload_start..]
                            .find(|ch: char| !(ch.is_ascii_digit() || ch == '.'))
                            .map(|p| payload_start + p)
                            .unwrap_or(s.len());
                        (end, end)
                    }
                };
                if payload_start == payload_end {
                    return Err(ParseError::new(base + i, ParseErrorKind::EmptyPayload));
                }
                let digits = Digits::parse_dotted(&s[payload_start..payload_end], base + payload_start)?;
                auxiliaries.push(Auxiliary {
                    facet: facet.facet_id.clone(),
                    open: facet.open,
                    close: facet.close,
                    digits,
                });
                i = next;
            } else if self.is_close(c) {
                return Err(ParseError::new(base + i, ParseErrorKind::Unbalanced(c)));
            } else if c.is_alphanumeric() {
                return Err(ParseError::new(base + i, ParseErrorKind::NonDigit(c)));
            } else {
                return Err(ParseError::new(base + i, ParseErrorKind::UnknownDelimiter(c)));
            }
        }

        Ok(match (main, auxiliaries.len()) {
            (Some(main), 0) => main,
            (Some(main), _) => NotationExpr::Compound {
                main: Box::new(main),
                auxiliaries,
            },
            (None, 1) => NotationExpr::Aux(auxiliaries.remove(0)),
            (None, _) => {
                let first = auxiliaries.remove(0);
                NotationExpr::Compound {
                    main: Box::new(NotationExpr::Aux(first)),
                    auxiliaries,
                }
            }
        })
    }
}

fn parse_main(text: &str, base: usize) -> Result<NotationExpr, ParseError> {
    let Some(slash) = text.find('/') else {
        return Ok(NotationExpr::Simple(Digits::parse_dotted(text, base)?));
    };
    let (left_text, right_text) = (&text[..slash], &text[slash + 1..]);
    let right_base = base + slash + 1;
    if right_text.contains('/') {
        return Err(ParseError::new(
            right_base + right_text.find('/').unwrap_or(0),
            ParseErrorKind::MalformedSpan("more than one `/`"),
        ));
    }
    let left = Digits::parse_dotted(left_text, base)?;
    let right = if let Some(suffix) = right_text.strip_prefix('.') {
        let suffix = Digits::parse_dotted(suffix, right_base + 1)?;
        if suffix.len() >= left.len() {
            return Err(ParseError::new(
                right_base,
                ParseErrorKind::MalformedSpan("suffix longer than left endpoint"),
            ));
        }
        Digits(format!("{}{}", &left.0[..left.len() - suffix.len()], suffix.0))
    } else {
        Digits::parse_dotted(right_text, right_base)?
    };
    if left.has_local_segment() || right.has_local_segment() {
        return Err(ParseError::new(
            base,
            ParseErrorKind::MalformedSpan("local segment in span endpoint"),
        ));
    }
    if left.len() != right.len() {
        return Err(ParseError::new(
            right_base,
            ParseErrorKind::MalformedSpan("endpoints differ in length"),
        ));
    }
    if left >= right {
        return Err(ParseError::new(
            right_base,
            ParseErrorKind::MalformedSpan("left endpoint not below right"),
        ));
    }
    Ok(NotationExpr::Span { left, right })
}

pub(crate) fn join_relation(op: Relator, left: NotationExpr, right: NotationExpr) -> NotationExpr {
    let mut operands = match left {
        NotationExpr::Relation { op: left_op, operands } if left_op == op => operands,
        other => vec![other],
    };
    match right {
        NotationExpr::Relation {
            op: right_op,
            operands: more,
        } if right_op == op => operands.extend(more),
        other => operands.push(other),
    }
    NotationExpr::Relation { op, operands }
}

/// Parses with the default UDC-style syntax.
pub fn parse(text: &str) -> Result<NotationExpr, ParseError> {
    NotationSyntax::udc().parse(text)
}

/// Shortens a simple number by one digit; `Ok(None)` is the root.
pub fn broaden(expr: &NotationExpr) -> Result<Option<NotationExpr>, NotationError> {
    match expr {
        NotationExpr::Simple(d) => Ok(d.broaden().map(NotationExpr::Simple)),
        other => Err(NotationError::UnsupportedVariant {
            operation: "broaden",
            variant: other.variant_name(),
            notation: other.canonical(),
        }),
    }
}

/// One step up the notational hierarchy for any variant: simple numbers
/// lose a digit, auxiliaries lose a digit within their facet, compounds
/// lose their last auxiliary, spans collapse to their shared prefix.
pub fn generalize(expr: &NotationExpr) -> Option<NotationExpr> {
    match expr {
        NotationExpr::Simple(d) => d.broaden().map(NotationExpr::Simple),
        NotationExpr::Aux(aux) => aux
            .digits
            .broaden()
            .map(|digits| NotationExpr::Aux(Auxiliary { digits, ..aux.clone() })),
        NotationExpr::Compound { main, auxiliaries } => {
            let mut rest = auxiliaries.clone();
            rest.pop();
            if rest.is_empty() {
                Some((**main).clone())
            } else {
                Some(NotationExpr::Compound {
                    main: main.clone(),
                    auxiliaries: rest,
                })
            }
        }
        NotationExpr::Span { left, right } => {
            let shared = left
                .as_str()
                .bytes()
                .zip(right.as_str().bytes())
                .take_while(|(a, b)| a == b)
                .count();
            (shared > 0).then(|| NotationExpr::Simple(Digits(left.0[..shared].to_string())))
        }
        NotationExpr::Relation { .. } | NotationExpr::Opaque(_) => None,
    }
}

/// True iff `ancestor`'s digits are a proper prefix of `candidate`'s.
/// Both must be simple numbers; any other variant yields `false`.
pub fn is_descendant(ancestor: &NotationExpr, candidate: &NotationExpr) -> bool {
    match (ancestor, candidate) {
        (NotationExpr::Simple(a), NotationExpr::Simple(c)) => a.is_proper_prefix_of(c),
        _ => false,
    }
}

/// True iff the candidate, truncated to the endpoints' length, lies in the
/// inclusive range of the span.
pub fn span_covers(span: &NotationExpr, candidate: &NotationExpr) -> bool {
    match (span, candidate) {
        (NotationExpr::Span { left, right }, NotationExpr::Simple(c)) => digits_in_range(left, right, c),
        _ => false,
    }
}

fn digits_in_range(left: &Digits, right: &Digits, candidate: &Digits) -> bool {
    let width = left.len();
    if candidate.len() < width {
        return false;
    }
    let head = &candidate.as_str()[..width];
    left.as_str() <= head && head <= right.as_str()
}

/// Notational containment: `candidate` lies strictly below `ancestor` by
/// digit prefix, span coverage, or prefix within the same auxiliary facet.
pub fn contains(ancestor: &NotationExpr, candidate: &NotationExpr) -> bool {
    use NotationExpr::*;
    match (ancestor, candidate) {
        (Simple(a), Simple(c)) => a.is_proper_prefix_of(c),
        (Span { left, right }, Simple(c)) => digits_in_range(left, right, c),
        (Simple(a), Span { left, right }) => (a.is_proper_prefix_of(left) || a == left) && a.is_proper_prefix_of(right),
        (Span { left: al, right: ar }, Span { left: cl, right: cr }) => {
            (cl.len() > al.len() || (cl.len() == al.len() && (al, ar) != (cl, cr)))
                && digits_in_range(al, ar, cl)
                && digits_in_range(al, ar, cr)
        }
        (Aux(a), Aux(c)) => a.facet == c.facet && a.digits.is_proper_prefix_of(&c.digits),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Main,
    Auxiliary(String),
}

impl ComponentKind {
    pub fn label(&self) -> &str {
        match self {
            ComponentKind::Main => "main",
            ComponentKind::Auxiliary(facet) => facet,
        }
    }
}

/// One retrievable part of a classmark.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pub kind: ComponentKind,
    /// The component as a standalone notation: simple, span or opaque for
    /// mains, a bare auxiliary otherwise.
    pub key: NotationExpr,
}

impl Component {
    pub fn digits(&self) -> Option<&Digits> {
        match &self.key {
            NotationExpr::Simple(d) => Some(d),
            NotationExpr::Aux(aux) => Some(&aux.digits),
            _ => None,
        }
    }
}

impl Serialize for Component {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Component", 3)?;
        s.serialize_field("kind", self.kind.label())?;
        s.serialize_field("notation", &self.key)?;
        s.serialize_field("digits", &self.digits().map(Digits::as_str))?;
        s.end()
    }
}

/// Flattens an expression into its mains and auxiliaries, in order.
pub fn decompose(expr: &NotationExpr) -> Vec<Component> {
    let mut out = Vec::new();
    decompose_into(expr, &mut out);
    out
}

fn decompose_into(expr: &NotationExpr, out: &mut Vec<Component>) {
    match expr {
        NotationExpr::Simple(_) | NotationExpr::Span { .. } | NotationExpr::Opaque(_) => out.push(Component {
            kind: ComponentKind::Main,
            key: expr.clone(),
        }),
        NotationExpr::Aux(aux) => out.push(Component {
            kind: ComponentKind::Auxiliary(aux.facet.clone()),
            key: expr.clone(),
        }),
        NotationExpr::Compound { main, auxiliaries } => {
            decompose_into(main, out);
            for aux in auxiliaries {
                out.push(Component {
                    kind: ComponentKind::Auxiliary(aux.facet.clone()),
                    key: NotationExpr::Aux(aux.clone()),
                });
            }
        }
        NotationExpr::Relation { operands, .. } => {
            for operand in operands {
                decompose_into(operand, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NotationExpr {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    fn simple(d: &str) -> NotationExpr {
        NotationExpr::simple(d).unwrap()
    }

    #[test]
    fn parses_simple_and_strips_dots() {
        assert_eq!(p("539.125.46"), simple("53912546"));
        assert_eq!(p("53912546"), simple("53912546"));
        assert_eq!(format(&simple("53912546")), "539.125.46");
    }

    #[test]
    fn parses_span_suffix_form() {
        let span = p("539.123/.124");
        assert_eq!(
            span,
            NotationExpr::Span {
                left: Digits::new("539123").unwrap(),
                right: Digits::new("539124").unwrap()
            }
        );
        assert_eq!(format(&span), "539.123/.124");
        assert_eq!(format(&p("539.123/539.124")), "539.123/.124");
        assert_eq!(format(&p("53/59")), "53/59");
    }

    #[test]
    fn parses_place_auxiliary() {
        let expr = p("338.48(469)");
        let NotationExpr::Compound { main, auxiliaries } = &expr else {
            panic!("expected compound, got {expr:?}");
        };
        assert_eq!(**main, simple("33848"));
        assert_eq!(auxiliaries.len(), 1);
        assert_eq!(auxiliaries[0].facet, "place");
        assert_eq!(auxiliaries[0].digits.as_str(), "469");
        assert_eq!(format(&expr), "338.48(469)");
    }

    #[test]
    fn parses_relators() {
        assert_eq!(
            p("73:75"),
            NotationExpr::Relation {
                op: Relator::Colon,
                operands: vec![simple("73"), simple("75")]
            }
        );
        assert_eq!(
            p("73+75"),
            NotationExpr::Relation {
                op: Relator::Plus,
                operands: vec![simple("73"), simple("75")]
            }
        );
        // Same-operator chains flatten; mixed operators nest left to right.
        assert_eq!(
            p("73:75:76"),
            NotationExpr::Relation {
                op: Relator::Colon,
                operands: vec![simple("73"), simple("75"), simple("76")]
            }
        );
        assert_eq!(
            p("73:75+76"),
            NotationExpr::Relation {
                op: Relator::Plus,
                operands: vec![
                    NotationExpr::Relation {
                        op: Relator::Colon,
                        operands: vec![simple("73"), simple("75")]
                    },
                    simple("76")
                ]
            }
        );
    }

    #[test]
    fn auxiliaries_bind_tighter_than_relators() {
        let expr = p("94(469):338.48(469)");
        let NotationExpr::Relation { operands, .. } = &expr else {
            panic!()
        };
        assert!(matches!(operands[0], NotationExpr::Compound { .. }));
        assert_eq!(format(&expr), "94(469):338.48(469)");
    }

    #[test]
    fn bare_and_prefix_auxiliaries() {
        let lang = p("=821.221");
        assert!(matches!(&lang, NotationExpr::Aux(a) if a.facet == "language" && a.digits.as_str() == "821221"));
        assert_eq!(format(&lang), "=821.221");
        assert_eq!(format(&p("2-447")), "2-447");
        assert_eq!(format(&p("(469)")), "(469)");
    }

    #[test]
    fn local_segment_survives_round_trip() {
        let expr = p("539.12.000.1");
        assert_eq!(expr.as_simple().unwrap().as_str(), "53912.0001");
        assert_eq!(format(&expr), "539.12.000.1");
        assert_eq!(format(&p("539.12.000.11")), "539.12.000.11");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = |s: &str| parse(s).unwrap_err();
        assert_eq!(err("").kind, ParseErrorKind::Empty);
        assert_eq!(err("   ").kind, ParseErrorKind::Empty);
        assert_eq!(err("338.48(469"), ParseError::new(6, ParseErrorKind::Unbalanced('(')));
        assert_eq!(err("338.48)"), ParseError::new(6, ParseErrorKind::Unbalanced(')')));
        assert_eq!(err("338#1"), ParseError::new(3, ParseErrorKind::UnknownDelimiter('#')));
        assert_eq!(err("33a"), ParseError::new(2, ParseErrorKind::NonDigit('a')));
        assert_eq!(err("(46a)"), ParseError::new(3, ParseErrorKind::NonDigit('a')));
        assert_eq!(err("73:"), ParseError::new(3, ParseErrorKind::EmptyOperand));
        assert_eq!(err("5..3"), ParseError::new(2, ParseErrorKind::MisplacedDot));
        assert!(matches!(err("539.124/.123").kind, ParseErrorKind::MalformedSpan(_)));
        assert!(matches!(err("539.12/.1234").kind, ParseErrorKind::MalformedSpan(_)));
        assert!(matches!(err("53/591").kind, ParseErrorKind::MalformedSpan(_)));
        assert_eq!(err("()").kind, ParseErrorKind::EmptyPayload);
    }

    #[test]
    fn opaque_notations_need_opaque_syntax() {
        assert!(parse("QD241-441").is_err());
        let lenient = NotationSyntax::udc().with_opaque(true);
        assert_eq!(
            lenient.parse("QD241-441").unwrap(),
            NotationExpr::Opaque("QD241-441".into())
        );
        assert_eq!(
            lenient.parse(" PIJ   BK ").unwrap(),
            NotationExpr::Opaque("PIJ BK".into())
        );
        assert_eq!(lenient.parse("536").unwrap(), simple("536"));
    }

    #[test]
    fn broaden_drops_one_digit() {
        assert_eq!(broaden(&p("539.125.46")).unwrap(), Some(p("539.125.4")));
        assert_eq!(broaden(&p("539.1")).unwrap(), Some(p("539")));
        assert_eq!(broaden(&p("5")).unwrap(), None);
        assert_eq!(broaden(&p("539.12.000.1")).unwrap(), Some(p("539.12.000")));
        assert_eq!(broaden(&p("539.12.0")).unwrap(), Some(p("539.12")));
        assert!(matches!(
            broaden(&p("338.48(469)")),
            Err(NotationError::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn generalize_handles_every_variant() {
        assert_eq!(generalize(&p("338.48(469)")), Some(p("338.48")));
        assert_eq!(generalize(&p("=821.221")), Some(p("=821.22")));
        assert_eq!(generalize(&p("(4)")), None);
        assert_eq!(generalize(&p("539.125/.126")), Some(p("539.12")));
        assert_eq!(generalize(&p("73:75")), None);
    }

    #[test]
    fn descendant_and_span_examples() {
        assert!(is_descendant(&p("539.12"), &p("539.125.46")));
        assert!(!is_descendant(&p("539.125"), &p("539.126.3")));
        assert!(!is_descendant(&p("539.125"), &p("539.125")));
        let leptons = p("539.123/.124");
        assert!(span_covers(&leptons, &p("539.123.6")));
        assert!(!span_covers(&leptons, &p("539.125")));
        assert!(span_covers(&leptons, &p("539.124.6")));
        assert!(span_covers(&leptons, &p("539.124")));
        assert!(!span_covers(&leptons, &p("539.12")));
    }

    #[test]
    fn containment_covers_spans_and_facets() {
        assert!(contains(&p("539.12"), &p("539.125/.126")));
        assert!(contains(&p("539.125/.126"), &p("539.126.3")));
        assert!(contains(&p("(4)"), &p("(469)")));
        assert!(!contains(&p("(4)"), &p("=469")));
        assert!(!contains(&p("539.125/.126"), &p("539.125/.126")));
    }

    #[test]
    fn decompose_examples() {
        let parts = decompose(&p("338.48(469)"));
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].kind, ComponentKind::Main);
        assert_eq!(parts[0].digits().unwrap().as_str(), "33848");
        assert_eq!(parts[1].kind, ComponentKind::Auxiliary("place".into()));
        assert_eq!(parts[1].digits().unwrap().as_str(), "469");

        let parts = decompose(&p("73:75"));
        assert_eq!(
            parts
                .iter()
                .map(|c| (c.kind.clone(), c.key.canonical()))
                .collect::<Vec<_>>(),
            vec![(ComponentKind::Main, "73".into()), (ComponentKind::Main, "75".into())]
        );
        assert_eq!(decompose(&p("536")).len(), 1);
    }

    #[test]
    fn ordering_follows_digit_strings() {
        let mut v = [
            p("539.125"),
            p("539.125/.126"),
            p("539.12"),
            p("539.126.3"),
            p("539.125.56"),
        ];
        v.sort();
        let text: Vec<String> = v.iter().map(format).collect();
        assert_eq!(text, ["539.12", "539.125/.126", "539.125", "539.125.56", "539.126.3"]);
    }

    #[test]
    fn syntax_rejects_bad_delimiters() {
        assert_eq!(
            NotationSyntax::new(
                vec![
                    FacetDelimiter::new("a", '(', Some(')')),
                    FacetDelimiter::new("b", '(', None)
                ],
                false
            ),
            Err(NotationError::DuplicateDelimiter('('))
        );
        assert_eq!(
            NotationSyntax::new(vec![FacetDelimiter::new("a", ':', None)], false),
            Err(NotationError::ReservedDelimiter(':'))
        );
    }
}
