use std::fmt::Write;

use super::{AgreementTable, ConfusionMatrix, CurvePoint, GridCell};

/// Left-align the first `left` columns, right-align the rest.
fn render_rows(rows: &[Vec<String>], left: usize) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c < left {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn render_grid(cells: &[GridCell]) -> String {
    let mut rows = vec![["Labeling", "Training", "Algorithm", "Precision", "Recall", "F1", "AUC"]
        .map(String::from)
        .to_vec()];
    for cell in cells {
        let r = &cell.report;
        rows.push(vec![
            cell.scheme.to_string(),
            cell.variant.to_string(),
            cell.algorithm.to_string(),
            format!("{:.3}", r.precision),
            format!("{:.3}", r.recall),
            format!("{:.3}", r.f1),
            format!("{:.3}", r.auc),
        ]);
    }
    render_rows(&rows, 3)
}

/// Gold categories as rows, predictions as columns.
pub fn render_confusion(matrix: &ConfusionMatrix) -> String {
    let mut header = vec!["gold \\ predicted".to_string()];
    header.extend(matrix.predicted_labels.iter().cloned());
    let mut rows = vec![header];
    for (label, counts) in matrix.gold_labels.iter().zip(&matrix.counts) {
        let mut row = vec![label.clone()];
        row.extend(counts.iter().map(usize::to_string));
        rows.push(row);
    }
    render_rows(&rows, 1)
}

/// 2x2 table with `row_name` systems on rows and `col_name` on columns.
pub fn render_agreement_table(table: &AgreementTable, row_name: &str, col_name: &str) -> String {
    let label = ["Other", "Negative"];
    let mut rows = vec![vec![
        format!("{row_name} \\ {col_name}"),
        label[0].to_string(),
        label[1].to_string(),
    ]];
    for (i, counts) in table.iter().enumerate() {
        rows.push(vec![label[i].to_string(), counts[0].to_string(), counts[1].to_string()]);
    }
    render_rows(&rows, 1)
}

/// CSV with header `x,precision,recall,f1`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("x,precision,recall,f1\n");
    for p in points {
        writeln!(out, "{},{},{},{}", p.x, p.precision, p.recall, p.f1).expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let csv = curve_csv(&[CurvePoint { x: 0.5, precision: 1.0, recall: 0.25, f1: 0.4, auc: None }]);
        assert_eq!(csv, "x,precision,recall,f1\n0.5,1,0.25,0.4\n");
    }

    #[test]
    fn tables_are_aligned() {
        let mut m = ConfusionMatrix::new(&["Negative", "Other"], &["Negative", "Other"]);
        m.add("Negative", "Other").unwrap();
        let text = render_confusion(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("Negative"));
        assert!(lines[1].ends_with('1'));
        let t = render_agreement_table(&[[3, 1], [0, 2]], "Lexicon", "SVM");
        assert!(t.lines().nth(2).unwrap().starts_with("Negative"));
    }
}
