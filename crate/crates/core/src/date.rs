//! Story dates in compact `YYYYMMDD` form.
//!
//! Dictionary entries carry optional date spans, so all the coder ever needs
//! is ordering and containment; a packed integer covers both without pulling
//! in a calendar library.

use core::fmt;

/// A calendar date packed as `YYYYMMDD`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Date(u32);

impl Date {
    /// Builds a date from a packed `YYYYMMDD` value, rejecting impossible
    /// months and days. Day-of-month is only range-checked (1..=31).
    pub fn new(ymd: u32) -> Option<Self> {
        let year = ymd / 10_000;
        let month = ymd / 100 % 100;
        let day = ymd % 100;
        if year == 0 || year > 9999 || !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return None;
        }
        Some(Date(ymd))
    }

    /// Parses an eight-digit `YYYYMMDD` string.
    pub fn parse(text: &str) -> Option<Self> {
        if text.len() != 8 || !text.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut value: u32 = 0;
        for b in text.bytes() {
            value = value * 10 + u32::from(b - b'0');
        }
        Date::new(value)
    }

    pub const fn as_u32(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_plausible_dates() {
        assert_eq!(Date::parse("20040605").map(Date::as_u32), Some(20040605));
        assert_eq!(Date::parse("19911231").map(Date::as_u32), Some(19911231));
    }

    #[test]
    fn rejects_malformed_dates() {
        assert_eq!(Date::parse("2004065"), None);
        assert_eq!(Date::parse("20041305"), None);
        assert_eq!(Date::parse("20040632"), None);
        assert_eq!(Date::parse("2004-6-5"), None);
    }

    #[test]
    fn ordering_follows_the_calendar() {
        let early = Date::parse("19950601").unwrap();
        let late = Date::parse("20050601").unwrap();
        assert!(early < late);
    }
}
