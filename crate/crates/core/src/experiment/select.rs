//! Model choice by intended data and roles of interest:
//! clean text ranks by test-fold F1, unclean text by out-of-domain F1, and a
//! role subset ranks by F1 pooled over just those roles.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use super::{ExperimentError, RunRecord, Scenario};

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Clean,
    Unclean,
}

impl FromStr for DataKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clean" => Ok(DataKind::Clean),
            "unclean" => Ok(DataKind::Unclean),
            other => Err(format!("data kind must be clean or unclean, not {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoleFilter {
    All,
    Only(BTreeSet<String>),
}

impl RoleFilter {
    pub fn parse_list(list: &str) -> Self {
        let roles: BTreeSet<String> = list
            .split(',')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(str::to_owned)
            .collect();
        if roles.is_empty() || list.trim() == "all" {
            RoleFilter::All
        } else {
            RoleFilter::Only(roles)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelChoice {
    pub model: String,
    pub scenario: Scenario,
    /// Mean F1 the decision was based on.
    pub score: f64,
    /// Every candidate with its score, best first.
    pub ranking: Vec<(String, Scenario, f64)>,
}

pub fn select_model(
    records: &[RunRecord],
    data: DataKind,
    roles: &RoleFilter,
) -> Result<ModelChoice, ExperimentError> {
    if let RoleFilter::Only(wanted) = roles {
        for role in wanted {
            let seen = records
                .iter()
                .any(|r| !r.report.label(role).is_empty());
            if !seen {
                return Err(ExperimentError::UnknownRole(role.clone()));
            }
        }
    }
    let want_test = data == DataKind::Clean;
    let mut sums: BTreeMap<(&str, Scenario), (f64, usize)> = BTreeMap::new();
    let mut sorted: Vec<&RunRecord> = records.iter().filter(|r| r.split.is_test() == want_test).collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    for r in sorted {
        let f1 = match roles {
            RoleFilter::All => r.report.f1(),
            RoleFilter::Only(set) => r.report.restricted(set).f1(),
        };
        let slot = sums.entry((r.model.as_str(), r.scenario)).or_insert((0.0, 0));
        slot.0 += f1;
        slot.1 += 1;
    }
    if sums.is_empty() {
        let what = match data {
            DataKind::Clean => "test folds",
            DataKind::Unclean => "the out-of-domain set",
        };
        return Err(ExperimentError::NoRecords(what.into()));
    }
    let mut ranking: Vec<(String, Scenario, f64)> = sums
        .into_iter()
        .map(|((m, s), (sum, n))| (m.to_owned(), s, sum / n as f64))
        .collect();
    // highest score first; ties fall back to model name, then scenario
    ranking.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then_with(|| a.0.cmp(&b.0))
            .then_with(|| a.1.cmp(&b.1))
    });
    // means that differ only by summation order count as ties
    let top = ranking[0].2;
    let winner = (0..ranking.len())
        .filter(|&i| top - ranking[i].2 <= TIE_TOLERANCE)
        .min_by(|&a, &b| (&ranking[a].0, ranking[a].1).cmp(&(&ranking[b].0, ranking[b].1)))
        .expect("ranking is not empty");
    let chosen = ranking.remove(winner);
    ranking.insert(0, chosen.clone());
    let (model, scenario, score) = chosen;
    Ok(ModelChoice {
        model,
        scenario,
        score,
        ranking,
    })
}
