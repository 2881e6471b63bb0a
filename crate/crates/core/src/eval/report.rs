use std::fmt::Write as _;

use super::{Counts, ErrorDecomposition, EvalReport};

/// `100 * num / den` to two decimals, rounded half away from zero using
/// integer arithmetic only. A zero denominator prints `0.00`.
pub fn percent(num: usize, den: usize) -> String {
    if den == 0 {
        return "0.00".to_owned();
    }
    let (num, den) = (num as u128, den as u128);
    let hundredths = (num * 20_000 + den) / (2 * den);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

fn prf(c: &Counts) -> [String; 3] {
    [
        percent(c.correct, c.predicted()),
        percent(c.correct, c.gold()),
        percent(2 * c.correct, 2 * c.correct + c.excess + c.missed),
    ]
}

fn row(out: &mut String, name: &str, c: &Counts) {
    let [p, r, f] = prf(c);
    writeln!(
        out,
        "{name:>12} {:>8} {:>8} {:>8} {p:>8} {r:>8} {f:>8}",
        c.correct, c.excess, c.missed
    )
    .unwrap();
}

/// Human-readable table in the layout of the CoNLL-2005 scorer.
pub fn format_table(report: &EvalReport, decomposition: Option<&ErrorDecomposition>) -> String {
    let mut out = String::new();
    let rule = "-".repeat(66);
    writeln!(out, "Number of Propositions   : {:>8}", report.instances).unwrap();
    writeln!(
        out,
        "Percentage of perfect props : {:>6}",
        percent(report.perfect, report.instances)
    )
    .unwrap();
    if report.unlabeled {
        writeln!(out, "Matching                 : boundaries only").unwrap();
    }
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:>12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "", "corr.", "excess", "missed", "prec.", "rec.", "F1"
    )
    .unwrap();
    writeln!(out, "{rule}").unwrap();
    row(&mut out, "Overall", &report.overall);
    let verb = report.per_label.get("V");
    let labels: Vec<_> = report.per_label.iter().filter(|(l, _)| *l != "V").collect();
    if !labels.is_empty() {
        writeln!(out, "----------").unwrap();
        for (label, counts) in labels {
            row(&mut out, label, counts);
        }
    }
    writeln!(out, "{rule}").unwrap();
    if let Some(v) = verb {
        row(&mut out, "V", v);
        writeln!(out, "{rule}").unwrap();
    }
    if let Some(d) = decomposition {
        writeln!(out).unwrap();
        writeln!(out, "Total error (1 - F1)           : {:.4}", d.total_error).unwrap();
        writeln!(out, "  argument identification      : {:.4}", d.arg_id_error).unwrap();
        writeln!(out, "  argument classification      : {:.4}", d.arg_class_error).unwrap();
    }
    out
}

/// One `key=value` per line; percentages use [`percent`].
pub fn format_key_values(report: &EvalReport, decomposition: Option<&ErrorDecomposition>) -> String {
    let mut out = String::new();
    let mut put = |prefix: &str, c: &Counts| {
        let [p, r, f] = prf(c);
        writeln!(out, "{prefix}.correct={}", c.correct).unwrap();
        writeln!(out, "{prefix}.excess={}", c.excess).unwrap();
        writeln!(out, "{prefix}.missed={}", c.missed).unwrap();
        writeln!(out, "{prefix}.precision={p}").unwrap();
        writeln!(out, "{prefix}.recall={r}").unwrap();
        writeln!(out, "{prefix}.f1={f}").unwrap();
    };
    put("overall", &report.overall);
    for (label, c) in &report.per_label {
        put(&format!("label.{label}"), c);
    }
    writeln!(out, "instances={}", report.instances).unwrap();
    writeln!(out, "perfect={}", report.perfect).unwrap();
    writeln!(out, "unlabeled={}", report.unlabeled).unwrap();
    if let Some(d) = report.delta_f1 {
        writeln!(out, "delta_f1={d}").unwrap();
    }
    if let Some(d) = decomposition {
        writeln!(out, "decomposition.total_error={}", d.total_error).unwrap();
        writeln!(out, "decomposition.arg_id_error={}", d.arg_id_error).unwrap();
        writeln!(out, "decomposition.arg_class_error={}", d.arg_class_error).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_rounding() {
        assert_eq!(percent(1, 1), "100.00");
        assert_eq!(percent(0, 0), "0.00");
        assert_eq!(percent(1, 3), "33.33");
        assert_eq!(percent(2, 3), "66.67");
        // 1/8 = 12.5% exactly; 1/16 = 6.25%; 1/32 = 3.125% rounds up
        assert_eq!(percent(1, 8), "12.50");
        assert_eq!(percent(1, 32), "3.13");
        assert_eq!(percent(5, 80000), "0.01");
        assert_eq!(percent(3, 80000), "0.00");
    }

    #[test]
    fn table_layout() {
        let mut report = EvalReport {
            instances: 2,
            perfect: 1,
            overall: Counts { correct: 1, excess: 1, missed: 1 },
            ..Default::default()
        };
        report.per_label.insert("A0".into(), Counts { correct: 1, excess: 0, missed: 0 });
        report.per_label.insert("V".into(), Counts { correct: 2, excess: 0, missed: 0 });
        let t = format_table(&report, None);
        assert!(t.contains("Number of Propositions   :        2"));
        assert!(t.contains("     Overall        1        1        1    50.00    50.00    50.00"));
        let v_line = t.lines().position(|l| l.trim_start().starts_with("V ")).unwrap();
        let a0_line = t.lines().position(|l| l.trim_start().starts_with("A0")).unwrap();
        assert!(a0_line < v_line);

        let kv = format_key_values(&report, Some(&ErrorDecomposition::default()));
        assert!(kv.contains("overall.f1=50.00\n"));
        assert!(kv.contains("label.V.correct=2\n"));
        assert!(kv.contains("decomposition.total_error=0\n"));
    }
}
