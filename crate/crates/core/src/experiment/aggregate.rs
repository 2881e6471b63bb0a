use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Baseline, RunRecord, Scenario, Split};
use crate::eval::Counts;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregateOptions {
    pub baseline: Option<Baseline>,
    /// Score pooled counts instead of averaging per-fold metrics.
    pub pooled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Means {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestFold {
    pub fold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub model: String,
    pub scenario: Scenario,
    pub test: Option<Means>,
    pub out_of_domain: Option<Means>,
    /// Fold whose model scored highest on its own test split.
    pub best: Option<BestFold>,
    pub delta_test: Option<f64>,
    pub delta_out_of_domain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub rows: Vec<AggregateRow>,
    pub pooled: bool,
}

fn summarize(reports: &[&Counts], pooled: bool) -> Option<Means> {
    if reports.is_empty() {
        return None;
    }
    let runs = reports.len();
    if pooled {
        let total: Counts = reports.iter().copied().copied().sum();
        return Some(Means {
            precision: total.precision(),
            recall: total.recall(),
            f1: total.f1(),
            runs,
        });
    }
    let mean = |f: fn(&Counts) -> f64| reports.iter().map(|c| f(c)).sum::<f64>() / runs as f64;
    Some(Means {
        precision: mean(Counts::precision),
        recall: mean(Counts::recall),
        f1: mean(Counts::f1),
        runs,
    })
}

/// Cross-fold averages per (model, scenario). The result does not depend on
/// the order of `records`.
pub fn aggregate(records: &[RunRecord], options: &AggregateOptions) -> AggregateTable {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.model, a.scenario, a.split).cmp(&(&b.model, b.scenario, b.split)));

    let mut groups: BTreeMap<(&str, Scenario), Vec<&RunRecord>> = BTreeMap::new();
    for r in sorted {
        groups.entry((r.model.as_str(), r.scenario)).or_default().push(r);
    }

    let mut rows: Vec<AggregateRow> = groups
        .iter()
        .map(|((model, scenario), runs)| {
            let test: Vec<&Counts> = runs
                .iter()
                .filter(|r| r.split.is_test())
                .map(|r| &r.report.overall)
                .collect();
            let ood: Vec<&Counts> = runs
                .iter()
                .filter(|r| !r.split.is_test())
                .map(|r| &r.report.overall)
                .collect();
            let mut best: Option<BestFold> = None;
            for r in runs {
                if let Split::Test(fold) = r.split {
                    let c = &r.report.overall;
                    if best.is_none_or(|b| c.f1() > b.f1) {
                        best = Some(BestFold {
                            fold,
                            precision: c.precision(),
                            recall: c.recall(),
                            f1: c.f1(),
                        });
                    }
                }
            }
            AggregateRow {
                model: model.to_string(),
                scenario: *scenario,
                test: summarize(&test, options.pooled),
                out_of_domain: summarize(&ood, options.pooled),
                best,
                delta_test: None,
                delta_out_of_domain: None,
            }
        })
        .collect();

    if let Some(base) = &options.baseline {
        let lookup: BTreeMap<(String, Scenario), (Option<f64>, Option<f64>)> = rows
            .iter()
            .map(|r| {
                (
                    (r.model.clone(), r.scenario),
                    (r.test.map(|m| m.f1), r.out_of_domain.map(|m| m.f1)),
                )
            })
            .collect();
        for row in &mut rows {
            let reference = base.model.clone().unwrap_or_else(|| row.model.clone());
            if reference == row.model && base.scenario == row.scenario {
                continue;
            }
            if let Some((t, o)) = lookup.get(&(reference, base.scenario)) {
                row.delta_test = row.test.zip(*t).map(|(m, b)| m.f1 - b);
                row.delta_out_of_domain = row.out_of_domain.zip(*o).map(|(m, b)| m.f1 - b);
            }
        }
    }

    AggregateTable {
        rows,
        pooled: options.pooled,
    }
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{:.2}", 100.0 * x)).unwrap_or_else(|| "-".into())
}

impl AggregateTable {
    /// Aligned text table: test-fold block, out-of-domain block, best fold.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let head = if self.pooled { "Pooled" } else { "Average of" };
        writeln!(
            out,
            "{:<24} {:<10} | {:^35} | {:^35} | {:^31}",
            "Model",
            "Scenario",
            format!("{head} Test Folds"),
            format!("{head} Out-of-Domain"),
            "Best Fold"
        )
        .unwrap();
        writeln!(
            out,
            "{:<24} {:<10} | {:>7} {:>7} {:>7} {:>7} {:>3} | {:>7} {:>7} {:>7} {:>7} {:>3} | {:>4} {:>7} {:>7} {:>7}",
            "", "", "p", "r", "F1", "dF1", "n", "p", "r", "F1", "dF1", "n", "fold", "p", "r", "F1"
        )
        .unwrap();
        writeln!(out, "{}", "-".repeat(155)).unwrap();
        for r in &self.rows {
            let t = r.test;
            let o = r.out_of_domain;
            writeln!(
                out,
                "{:<24} {:<10} | {:>7} {:>7} {:>7} {:>7} {:>3} | {:>7} {:>7} {:>7} {:>7} {:>3} | {:>4} {:>7} {:>7} {:>7}",
                r.model,
                r.scenario.as_str(),
                pct(t.map(|m| m.precision)),
                pct(t.map(|m| m.recall)),
                pct(t.map(|m| m.f1)),
                pct(r.delta_test),
                t.map_or(0, |m| m.runs),
                pct(o.map(|m| m.precision)),
                pct(o.map(|m| m.recall)),
                pct(o.map(|m| m.f1)),
                pct(r.delta_out_of_domain),
                o.map_or(0, |m| m.runs),
                r.best.map(|b| b.fold.to_string()).unwrap_or_else(|| "-".into()),
                pct(r.best.map(|b| b.precision)),
                pct(r.best.map(|b| b.recall)),
                pct(r.best.map(|b| b.f1)),
            )
            .unwrap();
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "model\tscenario\ttest_p\ttest_r\ttest_f1\ttest_delta_f1\ttest_runs\tood_p\tood_r\tood_f1\tood_delta_f1\tood_runs\tbest_fold\tbest_p\tbest_r\tbest_f1\n",
        );
        for r in &self.rows {
            let t = r.test;
            let o = r.out_of_domain;
            let cells = [
                r.model.clone(),
                r.scenario.to_string(),
                pct(t.map(|m| m.precision)),
                pct(t.map(|m| m.recall)),
                pct(t.map(|m| m.f1)),
                pct(r.delta_test),
                t.map_or(0, |m| m.runs).to_string(),
                pct(o.map(|m| m.precision)),
                pct(o.map(|m| m.recall)),
                pct(o.map(|m| m.f1)),
                pct(r.delta_out_of_domain),
                o.map_or(0, |m| m.runs).to_string(),
                r.best.map(|b| b.fold.to_string()).unwrap_or_else(|| "-".into()),
                pct(r.best.map(|b| b.precision)),
                pct(r.best.map(|b| b.recall)),
                pct(r.best.map(|b| b.f1)),
            ];
            writeln!(out, "{}", cells.join("\t")).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvalReport;

    /// A record whose overall F1 equals `correct / 10`: excess = missed = 10 - correct.
    fn rec(model: &str, scenario: Scenario, split: Split, correct: usize) -> RunRecord {
        let counts = Counts {
            correct,
            excess: 10 - correct,
            missed: 10 - correct,
        };
        let report = EvalReport {
            instances: 1,
            overall: counts,
            ..Default::default()
        };
        let unlabeled = EvalReport {
            overall: counts,
            unlabeled: true,
            ..report.clone()
        };
        RunRecord::new(model, scenario, split, report, unlabeled)
    }

    #[test]
    fn single_fold_equals_fold() {
        let t = aggregate(&[rec("m", Scenario::PtOnly, Split::Test(0), 7)], &Default::default());
        let m = t.rows[0].test.unwrap();
        assert_eq!((m.f1, m.precision, m.recall, m.runs), (0.7, 0.7, 0.7, 1));
        assert_eq!(t.rows[0].best.unwrap().fold, 0);
        assert!(t.rows[0].out_of_domain.is_none());
    }

    #[test]
    fn mean_of_fold_scores() {
        let records = [
            rec("m", Scenario::PtOnly, Split::Test(0), 7),
            rec("m", Scenario::PtOnly, Split::Test(1), 8),
            rec("m", Scenario::PtOnly, Split::OutOfDomain(Some(0)), 5),
            rec("m", Scenario::PtOnly, Split::OutOfDomain(Some(1)), 6),
        ];
        let t = aggregate(&records, &Default::default());
        assert!((t.rows[0].test.unwrap().f1 - 0.75).abs() < 1e-15);
        assert!((t.rows[0].out_of_domain.unwrap().f1 - 0.55).abs() < 1e-15);
        assert_eq!(t.rows[0].best.unwrap().fold, 1);
    }

    #[test]
    fn pooled_differs_from_mean() {
        let mut a = rec("m", Scenario::PtOnly, Split::Test(0), 10);
        a.report.overall = Counts { correct: 1, excess: 0, missed: 0 };
        let b = rec("m", Scenario::PtOnly, Split::Test(1), 0);
        let mean = aggregate(&[a.clone(), b.clone()], &Default::default()).rows[0].test.unwrap();
        let pooled = aggregate(
            &[a, b],
            &AggregateOptions {
                pooled: true,
                ..Default::default()
            },
        )
        .rows[0]
            .test
            .unwrap();
        assert_eq!(mean.f1, 0.5);
        assert!((pooled.f1 - 2.0 / 22.0).abs() < 1e-15);
    }

    #[test]
    fn deltas_against_same_model_baseline_scenario() {
        let records = [
            rec("x", Scenario::PtOnly, Split::Test(0), 7),
            rec("x", Scenario::PlusEn, Split::Test(0), 8),
            rec("y", Scenario::PlusEn, Split::Test(0), 9),
        ];
        let opts = AggregateOptions {
            baseline: Some(Baseline {
                model: None,
                scenario: Scenario::PtOnly,
            }),
            pooled: false,
        };
        let t = aggregate(&records, &opts);
        let row = |m: &str, s| t.rows.iter().find(|r| r.model == m && r.scenario == s).unwrap();
        assert!(row("x", Scenario::PtOnly).delta_test.is_none());
        assert!((row("x", Scenario::PlusEn).delta_test.unwrap() - 0.1).abs() < 1e-12);
        assert!(row("y", Scenario::PlusEn).delta_test.is_none());

        let fixed = AggregateOptions {
            baseline: Some(Baseline {
                model: Some("x".into()),
                scenario: Scenario::PtOnly,
            }),
            pooled: false,
        };
        let t = aggregate(&records, &fixed);
        let y = t.rows.iter().find(|r| r.model == "y").unwrap();
        assert!((y.delta_test.unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn renders() {
        let t = aggregate(&[rec("m", Scenario::PtOnly, Split::Test(0), 7)], &Default::default());
        let tsv = t.to_tsv();
        assert_eq!(tsv.lines().nth(1).unwrap(), "m\tpt-only\t70.00\t70.00\t70.00\t-\t1\t-\t-\t-\t-\t0\t0\t70.00\t70.00\t70.00");
        assert!(t.to_table().contains("Average of Test Folds"));
    }
}
