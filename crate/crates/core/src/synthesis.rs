//! Number building: common auxiliaries, phase relators, parallel-division
//! add instructions, and facet formulas cited in a fixed order.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::notation::{self, Auxiliary, Digits, NotationError, NotationExpr, Relator};
use crate::scheme::Scheme;

/// Appends an auxiliary from one of the scheme's facet tables to a main
/// number (or to a compound that does not yet carry that facet). `aux` is
/// either the delimited auxiliary (`(469)`) or its bare digits (`469`).
pub fn apply_auxiliary(scheme: &Scheme, main: &NotationExpr, facet_id: &str, aux: &str) -> Result<NotationExpr> {
    let facet = scheme
        .facet(facet_id)
        .ok_or_else(|| Error::not_found("facet", facet_id))?;
    let aux = aux.trim();
    let digits = if aux.starts_with(facet.open) {
        match scheme.parse(aux)? {
            NotationExpr::Aux(parsed) if parsed.facet == facet.facet_id => parsed.digits,
            other => {
                return Err(Error::Synthesis(format!(
                    "{other} is not an auxiliary of facet {facet_id}"
                )))
            }
        }
    } else {
        Digits::parse_dotted(aux, 0)?
    };
    let auxiliary = Auxiliary {
        facet: facet.facet_id.clone(),
        open: facet.open,
        close: facet.close,
        digits,
    };
    let aux_expr = NotationExpr::Aux(auxiliary.clone());
    if scheme.get(&aux_expr).is_none() {
        return Err(Error::not_found("auxiliary", aux_expr.canonical()));
    }

    let (base, mut auxiliaries) = match main {
        NotationExpr::Compound { main, auxiliaries } => ((**main).clone(), auxiliaries.clone()),
        NotationExpr::Simple(_) | NotationExpr::Span { .. } => (main.clone(), Vec::new()),
        other => {
            return Err(NotationError::UnsupportedVariant {
                operation: "apply_auxiliary",
                variant: other.variant_name(),
                notation: other.canonical(),
            }
            .into())
        }
    };
    if scheme.get(&base).is_none() {
        return Err(Error::not_found("class", base.canonical()));
    }
    if auxiliaries.iter().any(|a| a.facet == auxiliary.facet) {
        return Err(Error::Synthesis(format!(
            "{} already carries a {} auxiliary",
            main.canonical(),
            auxiliary.facet
        )));
    }
    auxiliaries.push(auxiliary);
    Ok(NotationExpr::Compound {
        main: Box::new(base),
        auxiliaries,
    })
}

/// Joins subjects with a phase relator, flattening same-operator chains.
pub fn relate(op: Relator, operands: Vec<NotationExpr>) -> Result<NotationExpr> {
    if operands.len() < 2 {
        return Err(Error::Synthesis(format!(
            "`{}` needs at least two operands, got {}",
            op.symbol(),
            operands.len()
        )));
    }
    let mut iter = operands.into_iter();
    let first = iter.next().expect("checked length");
    Ok(iter.fold(first, |acc, next| notation::join_relation(op, acc, next)))
}

/// "Add to base number B the numbers following S in L-R".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AddInstruction {
    pub base: Digits,
    pub source_left: Digits,
    pub source_right: Digits,
    pub strip_prefix: Digits,
}

impl AddInstruction {
    pub fn new(base: Digits, source_left: Digits, source_right: Digits, strip_prefix: Digits) -> Result<Self> {
        let plain = [&base, &source_left, &source_right, &strip_prefix]
            .iter()
            .all(|d| !d.has_local_segment());
        if !plain {
            return Err(Error::Synthesis(
                "add instruction numbers cannot carry local segments".into(),
            ));
        }
        if source_left.len() != source_right.len() || source_left >= source_right {
            return Err(Error::Synthesis(format!(
                "source range {source_left}-{source_right} is not increasing"
            )));
        }
        if !strip_prefix.is_proper_prefix_of(&source_left) || !strip_prefix.is_proper_prefix_of(&source_right) {
            return Err(Error::Synthesis(format!(
                "strip prefix {strip_prefix} must prefix both {source_left} and {source_right}"
            )));
        }
        Ok(Self {
            base,
            source_left,
            source_right,
            strip_prefix,
        })
    }

    pub fn source_span(&self) -> NotationExpr {
        NotationExpr::Span {
            left: self.source_left.clone(),
            right: self.source_right.clone(),
        }
    }

    pub fn covers(&self, source: &NotationExpr) -> bool {
        notation::span_covers(&self.source_span(), source)
    }

    /// Base number followed by the source digits after the strip prefix.
    pub fn expand(&self, source: &NotationExpr) -> Result<NotationExpr> {
        let digits = source.as_simple().ok_or_else(|| NotationError::UnsupportedVariant {
            operation: "expand_add",
            variant: source.variant_name(),
            notation: source.canonical(),
        })?;
        if !self.covers(source) {
            return Err(Error::OutOfSpan {
                notation: source.canonical(),
                left: self.source_left.to_dotted(),
                right: self.source_right.to_dotted(),
            });
        }
        let rest = digits
            .as_str()
            .strip_prefix(self.strip_prefix.as_str())
            .ok_or_else(|| Error::MalformedSource {
                notation: source.canonical(),
                prefix: self.strip_prefix.to_dotted(),
            })?;
        Ok(NotationExpr::Simple(self.base.extend(rest)?))
    }
}

pub fn expand_add(instruction: &AddInstruction, source: &NotationExpr) -> Result<NotationExpr> {
    instruction.expand(source)
}

/// Character class that introduces and continues one facet's token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marker {
    /// `A`, `PIJ`
    UppercaseLetters,
    /// `-1`; the digits after the dash are 1-9 so a following zero-led
    /// token stays separable.
    DashDigits,
    /// `aa`, `ac`
    LowercaseLetters,
    /// `031`
    ZeroLedDigits,
}

impl Marker {
    pub const ALL: [Marker; 4] = [
        Marker::UppercaseLetters,
        Marker::DashDigits,
        Marker::LowercaseLetters,
        Marker::ZeroLedDigits,
    ];

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == text)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Marker::UppercaseLetters => "uppercase-letters",
            Marker::DashDigits => "dash-digits",
            Marker::LowercaseLetters => "lowercase-letters",
            Marker::ZeroLedDigits => "zero-led-digits",
        }
    }

    fn starts(self, c: char) -> bool {
        match self {
            Marker::UppercaseLetters => c.is_ascii_uppercase(),
            Marker::DashDigits => c == '-',
            Marker::LowercaseLetters => c.is_ascii_lowercase(),
            Marker::ZeroLedDigits => c == '0',
        }
    }

    fn continues(self, c: char) -> bool {
        match self {
            Marker::UppercaseLetters => c.is_ascii_uppercase(),
            Marker::DashDigits => matches!(c, '1'..='9'),
            Marker::LowercaseLetters => c.is_ascii_lowercase(),
            Marker::ZeroLedDigits => c.is_ascii_digit(),
        }
    }

    fn min_len(self) -> usize {
        match self {
            Marker::DashDigits => 2,
            _ => 1,
        }
    }

    pub fn matches(self, token: &str) -> bool {
        let mut chars = token.chars();
        match chars.next() {
            Some(first) if self.starts(first) => {
                chars.all(|c| self.continues(c)) && token.chars().count() >= self.min_len()
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetSlot {
    pub name: String,
    pub marker: Marker,
}

/// Facet slots in citation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetFormula {
    slots: Vec<FacetSlot>,
}

impl FacetFormula {
    /// Rejects formulas whose tokens could run into each other when any
    /// subset of slots is omitted.
    pub fn new(slots: Vec<FacetSlot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Formula("a formula needs at least one slot".into()));
        }
        for (i, earlier) in slots.iter().enumerate() {
            for later in &slots[i + 1..] {
                if earlier.name == later.name {
                    return Err(Error::Formula(format!("slot {:?} appears twice", earlier.name)));
                }
                let clash = (' '..='~')
                    .any(|c| later.marker.starts(c) && (earlier.marker.starts(c) || earlier.marker.continues(c)));
                if clash {
                    return Err(Error::Formula(format!(
                        "slots {:?} and {:?} cannot be told apart",
                        earlier.name, later.name
                    )));
                }
            }
        }
        Ok(Self { slots })
    }

    pub fn slots(&self) -> &[FacetSlot] {
        &self.slots
    }

    /// Concatenates the supplied tokens in slot order; omitted slots add nothing.
    pub fn synthesize(&self, components: &BTreeMap<String, String>) -> Result<String> {
        if let Some(unknown) = components.keys().find(|k| !self.slots.iter().any(|s| &s.name == *k)) {
            return Err(Error::Formula(format!("unknown slot {unknown:?}")));
        }
        if components.is_empty() {
            return Err(Error::Formula("no components supplied".into()));
        }
        let mut out = String::new();
        for slot in &self.slots {
            if let Some(token) = components.get(&slot.name) {
                if !slot.marker.matches(token) {
                    return Err(Error::Formula(format!(
                        "token {token:?} does not match {} for slot {:?}",
                        slot.marker.as_str(),
                        slot.name
                    )));
                }
                out.push_str(token);
            }
        }
        Ok(out)
    }

    /// Splits a classmark back into its slots by marker character class.
    pub fn parse(&self, text: &str) -> Result<BTreeMap<String, String>> {
        if text.is_empty() {
            return Err(Error::Formula("empty classmark".into()));
        }
        let chars: Vec<char> = text.chars().collect();
        let mut cursor = 0;
        let mut out = BTreeMap::new();
        for slot in &self.slots {
            if cursor >= chars.len() || !slot.marker.starts(chars[cursor]) {
                continue;
            }
            let start = cursor;
            cursor += 1;
            while cursor < chars.len() && slot.marker.continues(chars[cursor]) {
                cursor += 1;
            }
            let token: String = chars[start..cursor].iter().collect();
            if token.chars().count() < slot.marker.min_len() {
                return Err(Error::Formula(format!(
                    "truncated {} token at offset {start}",
                    slot.marker.as_str()
                )));
            }
            out.insert(slot.name.clone(), token);
        }
        if cursor < chars.len() {
            return Err(Error::Formula(format!(
                "{text:?} cannot be segmented in citation order at offset {cursor}"
            )));
        }
        Ok(out)
    }
}

pub fn synthesize_faceted(formula: &FacetFormula, components: &BTreeMap<String, String>) -> Result<String> {
    formula.synthesize(components)
}

pub fn parse_faceted(formula: &FacetFormula, text: &str) -> Result<BTreeMap<String, String>> {
    formula.parse(text)
}
