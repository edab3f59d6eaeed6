//! Calendar-day parsing shared by the CSV reader, the universe file and the CLI.
//!
//! ISO-8601 (`2022-02-24`) is canonical and is the only format ever written.
//! US-style `02/24/2022` is accepted on input.

use chrono::NaiveDate;

pub use chrono::NaiveDate as Date;

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m/%d/%Y"))
        .ok()
}

pub fn format_date(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_and_us_forms_agree() {
        let iso = parse_date("2022-02-24").unwrap();
        let us = parse_date("02/24/2022").unwrap();
        assert_eq!(iso, us);
        assert_eq!(format_date(us), "2022-02-24");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_date("24.02.2022").is_none());
        assert!(parse_date("2022-02-30").is_none());
        assert!(parse_date("").is_none());
    }
}
