use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::dates::format_date;
use crate::event_study::{ComparisonRow, ComparisonTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(format!("unknown table format {other:?}")),
        }
    }
}

const CSV_HEADER: &str =
    "symbol,name,group,std_before,std_after,std_pct_diff,entropy_before,entropy_after,entropy_pct_diff,flags";

fn fmt3(v: Option<f64>) -> Option<String> {
    v.map(|x| format!("{x:.3}"))
}

struct Cells {
    symbol: String,
    name: String,
    group: String,
    values: [Option<f64>; 6],
    flags: String,
}

impl Cells {
    fn of(row: &ComparisonRow) -> Self {
        Self {
            symbol: row.symbol.clone(),
            name: row.full_name.clone(),
            group: row.group.map_or("index", |g| g.as_str()).to_string(),
            values: [
                row.before.as_ref().map(|m| m.std),
                row.after.as_ref().map(|m| m.std),
                row.std_pct_diff,
                row.before.as_ref().map(|m| m.entropy.value),
                row.after.as_ref().map(|m| m.entropy.value),
                row.entropy_pct_diff,
            ],
            flags: row.flags.join(";"),
        }
    }
}

const VALUE_KEYS: [&str; 6] = [
    "std_before",
    "std_after",
    "std_pct_diff",
    "entropy_before",
    "entropy_after",
    "entropy_pct_diff",
];

fn all_rows(table: &ComparisonTable) -> impl Iterator<Item = &ComparisonRow> {
    table.index_row.iter().chain(table.rows.iter())
}

/// Render a comparison table. Displayed numbers have three decimals; JSON
/// carries each value at full precision next to its display string.
pub fn render_table(table: &ComparisonTable, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => render_csv(table),
        TableFormat::Text => render_text(table),
        TableFormat::Json => render_json(table),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(table: &ComparisonTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in all_rows(table) {
        let c = Cells::of(row);
        let mut fields = vec![csv_field(&c.symbol), csv_field(&c.name), c.group];
        fields.extend(c.values.iter().map(|v| fmt3(*v).unwrap_or_default()));
        fields.push(csv_field(&c.flags));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn render_text(table: &ComparisonTable) -> String {
    let p = &table.params;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Event {} | span {} | M = {} bins | entropy in {} | {} returns",
        format_date(p.event_date),
        p.span,
        p.bins,
        p.base.unit(),
        p.return_mode
    );
    let headers = [
        "Symbol",
        "Name",
        "Group",
        "Std before",
        "Std after",
        "Std %diff",
        "H before",
        "H after",
        "H %diff",
        "Flags",
    ];
    let mut lines: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
    for row in all_rows(table) {
        let c = Cells::of(row);
        let mut line = vec![c.symbol, c.name, c.group];
        line.extend(c.values.iter().map(|v| fmt3(*v).unwrap_or_else(|| "-".into())));
        line.push(c.flags);
        lines.push(line);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|i| lines.iter().map(|l| l[i].chars().count()).max().unwrap_or(0))
        .collect();
    for (n, line) in lines.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, &w))| {
                let pad = w - cell.chars().count();
                if (3..9).contains(&i) {
                    format!("{}{cell}", " ".repeat(pad))
                } else {
                    format!("{cell}{}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if n == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
    }
    out
}

fn row_json(row: &ComparisonRow) -> Value {
    let c = Cells::of(row);
    let mut obj = Map::new();
    obj.insert("symbol".into(), json!(c.symbol));
    obj.insert("name".into(), json!(c.name));
    obj.insert("group".into(), json!(c.group));
    for (key, v) in VALUE_KEYS.iter().zip(c.values) {
        let cell = match v {
            Some(x) => json!({ "value": x, "display": format!("{x:.3}") }),
            None => Value::Null,
        };
        obj.insert((*key).into(), cell);
    }
    obj.insert("n_before".into(), json!(row.before.as_ref().map(|m| m.n)));
    obj.insert("n_after".into(), json!(row.after.as_ref().map(|m| m.n)));
    obj.insert("flags".into(), json!(row.flags));
    Value::Object(obj)
}

fn render_json(table: &ComparisonTable) -> String {
    let p = &table.params;
    let doc = json!({
        "event_date": format_date(p.event_date),
        "span": p.span.to_string(),
        "bins": p.bins,
        "base": p.base.as_str(),
        "unit": p.base.unit(),
        "entropy_max": p.base.log(p.bins as f64),
        "return_mode": p.return_mode.to_string(),
        "index_row": table.index_row.as_ref().map(row_json),
        "rows": table.rows.iter().map(row_json).collect::<Vec<_>>(),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dates::parse_date;
    use crate::event_study::StudyParams;
    use crate::ingest::Group;
    use crate::measures::{pct_difference, EntropyValue, LogBase, MeasureSet};

    fn ms(std: f64, h: f64) -> MeasureSet {
        MeasureSet {
            std,
            entropy: EntropyValue {
                value: h,
                base: LogBase::E,
            },
            entropy_max: 20f64.ln(),
            n: 251,
            m: 20,
        }
    }

    fn table(rows: Vec<ComparisonRow>) -> ComparisonTable {
        ComparisonTable {
            params: StudyParams::new(parse_date("2022-02-24").unwrap()),
            index_row: None,
            rows,
        }
    }

    fn row(symbol: &str, before: MeasureSet, after: MeasureSet) -> ComparisonRow {
        ComparisonRow {
            symbol: symbol.into(),
            full_name: symbol.into(),
            group: Some(Group::Removed),
            std_pct_diff: pct_difference(before.std, after.std).ok(),
            entropy_pct_diff: pct_difference(before.entropy.value, after.entropy.value).ok(),
            before: Some(before),
            after: Some(after),
            flags: vec![],
        }
    }

    #[test]
    fn empty_table_is_header_only_csv() {
        assert_eq!(
            render_table(&table(vec![]), TableFormat::Csv),
            format!("{CSV_HEADER}\n")
        );
    }

    #[test]
    fn mercator_like_row_prints_8_889() {
        let t = table(vec![row("MRC", ms(0.047, 1.894), ms(0.043, 1.785))]);
        let csv = render_table(&t, TableFormat::Csv);
        let line = csv.lines().nth(1).unwrap();
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[5], "8.889");
        assert_eq!(cells[8], "5.926");
        assert!(render_table(&t, TableFormat::Text).contains("8.889"));
    }

    #[test]
    fn displayed_pct_matches_recomputed() {
        let t = table(vec![row("SYN", ms(0.0123456, 2.2222), ms(0.0234567, 2.4444))]);
        let csv = render_table(&t, TableFormat::Csv);
        let cells: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[3], "0.012");
        assert_eq!(
            cells[5],
            format!("{:.3}", pct_difference(0.0123456, 0.0234567).unwrap())
        );
        assert_eq!(cells[8], format!("{:.3}", pct_difference(2.2222, 2.4444).unwrap()));
    }

    #[test]
    fn json_has_full_precision_and_display() {
        let t = table(vec![row("SYN", ms(0.0123456, 2.2222), ms(0.0234567, 2.4444))]);
        let v: Value = serde_json::from_str(&render_table(&t, TableFormat::Json)).unwrap();
        let cell = &v["rows"][0]["std_before"];
        assert_eq!(cell["value"].as_f64().unwrap(), 0.0123456);
        assert_eq!(cell["display"], "0.012");
        assert_eq!(v["unit"], "nats");
        assert!(v["index_row"].is_null());
    }

    #[test]
    fn absent_side_renders_blank() {
        let mut r = row("PCO", ms(0.01, 2.0), ms(0.02, 2.1));
        r.before = None;
        r.std_pct_diff = None;
        r.entropy_pct_diff = None;
        r.flags = vec!["missing_before".into()];
        let csv = render_table(&table(vec![r]), TableFormat::Csv);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "PCO,PCO,removed,,0.020,,,2.100,,missing_before"
        );
    }
}
