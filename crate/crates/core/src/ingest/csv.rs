use std::io::Read;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{IngestError, PricePoint, PriceSeries};
use crate::dates::{format_date, parse_date};

enum Layout {
    Named { date: usize, close: usize },
    Positional { close: Option<usize> },
}

/// Parse daily closes from CSV text.
///
/// A header is recognised either by a `close` column (case-insensitive, with
/// `date` located the same way, falling back to column 0) or by the first row
/// having no numeric column at all. Without names, column 0 is the date and
/// the last numeric column of the first data row is the close. Rows are
/// sorted by date; non-positive closes are errors, never skipped.
pub fn parse_price_csv<R: Read>(text: R, symbol: &str) -> Result<PriceSeries, IngestError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(text);

    let mut layout: Option<Layout> = None;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let layout = match &mut layout {
            Some(l) => l,
            None => {
                let (l, is_header) = detect_layout(&record);
                layout = Some(l);
                if is_header {
                    continue;
                }
                layout.as_mut().unwrap()
            }
        };
        let (date_idx, close_idx) = match layout {
            Layout::Named { date, close } => (*date, *close),
            Layout::Positional { close } => {
                let idx = match close {
                    Some(c) => *c,
                    None => {
                        let c = last_numeric(&record).ok_or_else(|| IngestError::MalformedRow {
                            line,
                            reason: "no numeric close column".into(),
                        })?;
                        *close = Some(c);
                        c
                    }
                };
                (0, idx)
            }
        };
        points.push(parse_row(&record, line, date_idx, close_idx)?);
    }

    if points.is_empty() {
        return Err(IngestError::EmptySeries);
    }
    points.sort_by_key(|p| p.date);
    if let Some(w) = points.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(IngestError::DuplicateDate(w[0].date));
    }
    PriceSeries::new(symbol, points)
}

fn detect_layout(first: &StringRecord) -> (Layout, bool) {
    let find = |name: &str| first.iter().position(|f| f.eq_ignore_ascii_case(name));
    if let Some(close) = find("close") {
        let date = find("date").unwrap_or(0);
        return (Layout::Named { date, close }, true);
    }
    match last_numeric(first) {
        Some(c) => (Layout::Positional { close: Some(c) }, false),
        None => (Layout::Positional { close: None }, true),
    }
}

fn last_numeric(record: &StringRecord) -> Option<usize> {
    record
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, f)| f.parse::<f64>().is_ok())
        .map(|(i, _)| i)
        .last()
}

fn parse_row(record: &StringRecord, line: u64, date_idx: usize, close_idx: usize) -> Result<PricePoint, IngestError> {
    let malformed = |reason: String| IngestError::MalformedRow { line, reason };
    let date_field = record
        .get(date_idx)
        .ok_or_else(|| malformed("missing date column".into()))?;
    let date = parse_date(date_field).ok_or_else(|| malformed(format!("unparseable date {date_field:?}")))?;
    let close_field = record
        .get(close_idx)
        .ok_or_else(|| malformed("missing close column".into()))?;
    let close: f64 = close_field
        .parse()
        .map_err(|_| malformed(format!("unparseable close {close_field:?}")))?;
    if !close.is_finite() || close <= 0.0 {
        return Err(malformed(format!(
            "close must be positive and finite, got {close_field}"
        )));
    }
    Ok(PricePoint { date, close })
}

/// Canonical `Date,Close` serialization; `parse_price_csv` reads it back exactly.
pub fn to_csv(series: &PriceSeries) -> String {
    let mut out = String::from("Date,Close\n");
    for p in series.points() {
        out.push_str(&format_date(p.date));
        out.push(',');
        out.push_str(&p.close.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<PriceSeries, IngestError> {
        parse_price_csv(s.as_bytes(), "TST")
    }

    #[test]
    fn minimal_two_rows() {
        let s = parse("Date,Close\n2022-01-03,100.0\n2022-01-04,105.0").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.symbol(), "TST");
        assert_eq!(s.closes().collect::<Vec<_>>(), vec![100.0, 105.0]);
    }

    #[test]
    fn reverse_order_is_normalized() {
        let a = parse("Date,Close\n2022-01-03,100.0\n2022-01-04,105.0").unwrap();
        let b = parse("Date,Close\n2022-01-04,105.0\n2022-01-03,100.0").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_close_reports_its_line() {
        let mut text = String::from("Date,Close\n");
        let days = ["03", "04", "05", "06", "07", "10", "11", "12", "13", "14"];
        for (i, day) in days.iter().enumerate() {
            if *day == "05" {
                text.push_str("2022-01-05,-3\n");
            } else {
                text.push_str(&format!("2022-01-{day},{}\n", 100 + i));
            }
        }
        // header is line 1, so the third data row sits on line 4
        match parse(&text) {
            Err(IngestError::MalformedRow { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected MalformedRow, got {other:?}"),
        }
    }

    #[test]
    fn zero_and_garbage_closes_rejected() {
        assert!(matches!(
            parse("Date,Close\n2022-01-03,0\n"),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse("Date,Close\n2022-01-03,abc\n"),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse("Date,Close\n2022-13-03,1\n"),
            Err(IngestError::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_and_empty() {
        assert!(matches!(
            parse("Date,Close\n2022-01-03,1\n2022-01-03,2\n"),
            Err(IngestError::DuplicateDate(_))
        ));
        assert!(matches!(parse("Date,Close\n"), Err(IngestError::EmptySeries)));
        assert!(matches!(parse(""), Err(IngestError::EmptySeries)));
    }

    #[test]
    fn named_columns_any_case_extra_columns_ignored() {
        let text = "Open,High,Low,CLOSE,Volume,date\n1,2,0.5,1.5,1000,2022-01-03\n1,2,0.5,1.7,900,2022-01-04\n";
        let s = parse(text).unwrap();
        assert_eq!(s.closes().collect::<Vec<_>>(), vec![1.5, 1.7]);
    }

    #[test]
    fn headerless_positional_fallback() {
        let s = parse("2022-01-03,9,10.5\n02/04/2022,9,11\n").unwrap();
        assert_eq!(s.closes().collect::<Vec<_>>(), vec![10.5, 11.0]);
        assert_eq!(s.last_date(), parse_date("2022-02-04").unwrap());
    }

    #[test]
    fn unnamed_header_skipped() {
        let s = parse("Data,Zamkniecie\n2022-01-03,10\n2022-01-04,11\n").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn us_dates_accepted() {
        let s = parse("Date,Close\n02/24/2022,10\n02/23/2022,11\n").unwrap();
        assert_eq!(s.first_date(), parse_date("2022-02-23").unwrap());
    }

    fn arb_series() -> impl Strategy<Value = PriceSeries> {
        proptest::collection::vec((1u32..5, 1e-6f64..1e6), 1..60).prop_map(|steps| {
            let mut date = parse_date("2000-01-03").unwrap();
            let pts = steps
                .into_iter()
                .map(|(gap, close)| {
                    date += chrono::Duration::days(gap as i64);
                    PricePoint { date, close }
                })
                .collect();
            PriceSeries::new("RT", pts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(s in arb_series()) {
            let back = parse_price_csv(to_csv(&s).as_bytes(), "RT").unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn slice_is_idempotent(s in arb_series(), a in 0i64..200, len in 0i64..200) {
            let start = parse_date("2000-01-03").unwrap() + chrono::Duration::days(a);
            let end = start + chrono::Duration::days(len);
            if let Ok(once) = s.slice_by_dates(start, end) {
                prop_assert_eq!(once.slice_by_dates(start, end).unwrap(), once.clone());
                prop_assert!(once.points().iter().all(|p| p.date >= start && p.date <= end));
            }
        }
    }
}
