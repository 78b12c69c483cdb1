//! Event-code arithmetic over the internal four-hex-digit scheme.
//!
//! CAMEO verb categories are translated into signed integers whose
//! non-negative values read as four base-16 digit positions `d3 d2 d1 d0`:
//! `d3` is a communicative-act class (Say, Appeal, Intend, ...), `d2` the
//! reduce/yield class, `d1` an action class (Meet, Aid, Fight, ...) and `d0`
//! a specifier (Leadership, Econ, Military, ...). Codes whose nonzero digit
//! positions do not overlap compose by plain addition, which is what lets
//! "intend" (`0x3000`) and "help" (`0x0040`) form "intend to help"
//! (`0x3040`).
//!
//! Refusals have no digit position of their own: a refusal is stored as the
//! cooperative value minus `0xFFFF`, so it is always negative and the
//! cooperative value is recovered by adding `0xFFFF` back.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use thiserror::Error;

/// Subtracted from a cooperative code to embed a refusal.
pub const REFUSAL_OFFSET: i32 = 0xFFFF;

/// A verb code in the internal hex scheme. Non-negative values are four hex
/// digits; negative values are refusal embeddings (`cooperative - 0xFFFF`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InternalCode(i32);

impl InternalCode {
    pub fn new(value: i32) -> Result<Self, CodeError> {
        if (-REFUSAL_OFFSET..0x10000).contains(&value) {
            Ok(InternalCode(value))
        } else {
            Err(CodeError::OutOfRange(value))
        }
    }

    pub const fn value(self) -> i32 {
        self.0
    }

    pub const fn is_refusal(self) -> bool {
        self.0 < 0
    }

    /// The cooperative counterpart of a refusal embedding.
    pub fn cooperative(self) -> Option<InternalCode> {
        self.is_refusal()
            .then(|| InternalCode(self.0 + REFUSAL_OFFSET))
    }

    /// Bitmask over the four digit positions, one bit per nonzero hex digit.
    fn digit_mask(self) -> u8 {
        debug_assert!(self.0 >= 0);
        let v = self.0 as u32;
        let mut mask = 0u8;
        for pos in 0..4 {
            if v >> (pos * 4) & 0xF != 0 {
                mask |= 1 << pos;
            }
        }
        mask
    }
}

impl fmt::Display for InternalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 < 0 {
            write!(f, "-{:04X}", -self.0)
        } else {
            write!(f, "{:04X}", self.0)
        }
    }
}

impl fmt::Debug for InternalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InternalCode({self})")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("unknown CAMEO code `{0}`")]
    UnknownCameo(String),
    #[error("internal code {0} has no CAMEO equivalent")]
    Unmappable(InternalCode),
    #[error("codes {0} and {1} occupy a common digit position; their combination is undefined")]
    Collision(InternalCode, InternalCode),
    #[error("code {0} is already a refusal embedding")]
    AlreadyNegated(InternalCode),
    #[error("value {0} is outside the internal code range")]
    OutOfRange(i32),
    #[error("code mapping line {line}: {reason}")]
    MappingSyntax { line: usize, reason: String },
}

/// Composes two codes by digit-wise addition.
///
/// Both non-negative: their nonzero digit positions must be disjoint and the
/// result is the plain sum. Exactly one refusal: the cooperative parts are
/// combined and the refusal embedding is applied again, so negation
/// distributes over composition. Overlapping digits never carry; they are a
/// [`CodeError::Collision`].
pub fn combine(a: InternalCode, b: InternalCode) -> Result<InternalCode, CodeError> {
    match (a.is_refusal(), b.is_refusal()) {
        (false, false) => add_disjoint(a, b),
        (true, false) => {
            let coop = add_disjoint(a.cooperative().unwrap(), b)?;
            Ok(InternalCode(coop.0 - REFUSAL_OFFSET))
        }
        (false, true) => {
            let coop = add_disjoint(a, b.cooperative().unwrap())?;
            Ok(InternalCode(coop.0 - REFUSAL_OFFSET))
        }
        // Two refusal embeddings cannot merge into one.
        (true, true) => Err(CodeError::Collision(a, b)),
    }
}

fn add_disjoint(a: InternalCode, b: InternalCode) -> Result<InternalCode, CodeError> {
    if a.digit_mask() & b.digit_mask() != 0 {
        return Err(CodeError::Collision(a, b));
    }
    Ok(InternalCode(a.0 + b.0))
}

/// Embeds a cooperative code as its refusal: `code - 0xFFFF`.
///
/// There is no positive `FFFF` code, so the result is always negative.
pub fn negate(code: InternalCode) -> Result<InternalCode, CodeError> {
    if code.is_refusal() {
        return Err(CodeError::AlreadyNegated(code));
    }
    Ok(InternalCode(code.0 - REFUSAL_OFFSET))
}

/// The bidirectional CAMEO <-> internal table, loaded from a data file of
/// `CAMEO<TAB>HEX4` lines. The file only ever lists non-negative values;
/// refusal codes are derived by rule.
#[derive(Debug, Clone)]
pub struct CameoMapping {
    by_cameo: BTreeMap<String, InternalCode>,
    by_value: BTreeMap<i32, String>,
}

impl CameoMapping {
    pub fn parse(text: &str) -> Result<Self, CodeError> {
        let mut by_cameo = BTreeMap::new();
        let mut by_value = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (cameo, hex) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(h), None) => (c, h),
                _ => {
                    return Err(CodeError::MappingSyntax {
                        line: line_no,
                        reason: "expected `CAMEO<TAB>HEX4`".to_string(),
                    })
                }
            };
            if cameo.is_empty() || cameo.len() > 4 {
                return Err(CodeError::MappingSyntax {
                    line: line_no,
                    reason: format!("bad CAMEO code `{cameo}`"),
                });
            }
            let value = i32::from_str_radix(hex, 16)
                .ok()
                .filter(|v| (0..0x10000).contains(v));
            let value = match value {
                Some(v) => v,
                None => {
                    return Err(CodeError::MappingSyntax {
                        line: line_no,
                        reason: format!("bad hex value `{hex}`"),
                    })
                }
            };
            if by_cameo
                .insert(cameo.to_string(), InternalCode(value))
                .is_some()
            {
                return Err(CodeError::MappingSyntax {
                    line: line_no,
                    reason: format!("CAMEO code `{cameo}` mapped twice"),
                });
            }
            if by_value.insert(value, cameo.to_string()).is_some() {
                return Err(CodeError::MappingSyntax {
                    line: line_no,
                    reason: format!("internal value `{hex}` mapped twice"),
                });
            }
        }
        Ok(CameoMapping { by_cameo, by_value })
    }

    /// CAMEO -> internal.
    pub fn internal(&self, cameo: &str) -> Result<InternalCode, CodeError> {
        self.by_cameo
            .get(cameo)
            .copied()
            .ok_or_else(|| CodeError::UnknownCameo(cameo.to_string()))
    }

    /// Internal -> CAMEO, for writing events back out.
    ///
    /// Exact hits return their file entry. Unlisted combinations degrade to
    /// the nearest listed ancestor by zeroing the specifier digit and then
    /// the action digit. Refusal embeddings map into the 120 class: the
    /// cooperative counterpart picks the refusal subcode by its action digit,
    /// and anything unrecognized lands on plain `120`.
    pub fn cameo(&self, code: InternalCode) -> Result<String, CodeError> {
        if code.is_refusal() {
            let coop = code.cooperative().unwrap();
            return Ok(refusal_cameo(coop).to_string());
        }
        let v = code.value();
        for candidate in [v, v & !0xF, v & !0xFF] {
            if let Some(cameo) = self.by_value.get(&candidate) {
                return Ok(cameo.clone());
            }
        }
        Err(CodeError::Unmappable(code))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, InternalCode)> {
        self.by_cameo.iter().map(|(c, v)| (c.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.by_cameo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_cameo.is_empty()
    }
}

/// Refusal subcode for a cooperative counterpart: refusing aid is `122`,
/// material cooperation `121`, meeting `125`, mediation `126`, settling
/// `127`, yielding `124`; everything else is the bare `120` class.
fn refusal_cameo(coop: InternalCode) -> &'static str {
    let d1 = coop.value() >> 4 & 0xF;
    let d2 = coop.value() >> 8 & 0xF;
    match d1 {
        0x4 => "122",
        0x7 => "121",
        0x1 => "125",
        0x2 => "127",
        0x3 => "126",
        _ if d2 == 0x2 => "124",
        _ => "120",
    }
}
