//! Exact-match evaluation and reporting.
//!
//! A prediction counts only when sentence, type and both span boundaries
//! equal a gold mention. Zero denominators give 0 for the affected metric.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::EntityMention;

/// Which stages of the pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    Full,
    /// Each relation list holds only its predefined relation.
    NoRelationList,
    /// Screening is skipped and every grounded pair is aggregated.
    NoEstimate,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] = [AblationMode::Full, AblationMode::NoRelationList, AblationMode::NoEstimate];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::NoRelationList => "no_relation_list",
            AblationMode::NoEstimate => "no_estimate",
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s.replace('-', "_"))
            .ok_or_else(|| format!("unknown mode {s:?}; expected full, no_relation_list or no_estimate"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_match: usize,
    pub n_pred: usize,
    pub n_gold: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub overall: Counts,
    pub per_type: BTreeMap<String, Counts>,
}

type Key = (String, String, usize, usize);

fn keys(mentions: &[EntityMention]) -> BTreeSet<Key> {
    mentions
        .iter()
        .map(|m| (m.sentence_id.clone(), m.etype.as_str().to_string(), m.start, m.end))
        .collect()
}

/// Counts exact matches. Duplicate mentions collapse.
pub fn exact_match_counts(gold: &[EntityMention], pred: &[EntityMention]) -> EvalCounts {
    let gold = keys(gold);
    let pred = keys(pred);
    let mut out = EvalCounts {
        overall: Counts {
            n_match: gold.intersection(&pred).count(),
            n_pred: pred.len(),
            n_gold: gold.len(),
        },
        per_type: BTreeMap::new(),
    };
    for k in &gold {
        let c = out.per_type.entry(k.1.clone()).or_default();
        c.n_gold += 1;
        if pred.contains(k) {
            c.n_match += 1;
        }
    }
    for k in &pred {
        out.per_type.entry(k.1.clone()).or_default().n_pred += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn metrics(c: Counts) -> Metrics {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(c.n_match, c.n_pred);
    let recall = ratio(c.n_match, c.n_gold);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Metrics { precision, recall, f1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    #[serde(flatten)]
    pub metrics: Metrics,
    #[serde(flatten)]
    pub counts: Counts,
}

impl From<Counts> for Scored {
    fn from(counts: Counts) -> Self {
        Self {
            metrics: metrics(counts),
            counts,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_hash: Option<String>,
    pub mode: Option<AblationMode>,
    pub profile: Option<String>,
    /// Size of the demonstration pool, when one was used.
    pub k: Option<usize>,
    /// Hash of every (request key, response) pair the run consumed.
    pub cache_state_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Scored,
    pub per_type: BTreeMap<String, Scored>,
    pub metadata: ReportMetadata,
}

impl EvalReport {
    pub fn new(counts: &EvalCounts, metadata: ReportMetadata) -> Self {
        Self {
            overall: counts.overall.into(),
            per_type: counts.per_type.iter().map(|(k, &c)| (k.clone(), c.into())).collect(),
            metadata,
        }
    }

    pub fn evaluate(gold: &[EntityMention], pred: &[EntityMention], metadata: ReportMetadata) -> Self {
        Self::new(&exact_match_counts(gold, pred), metadata)
    }

    /// Aligned plain-text table, one row per type plus the overall row.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(&str, &Scored)> = self.per_type.iter().map(|(k, v)| (k.as_str(), v)).collect();
        rows.push(("overall", &self.overall));
        let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0).max(4);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>7}  {:>7}  {:>6}  {:>6}  {:>6}",
            "type", "P", "R", "F1", "match", "pred", "gold"
        );
        for (name, s) in rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.2}  {:>7.2}  {:>7.2}  {:>6}  {:>6}  {:>6}",
                name,
                s.metrics.precision * 100.0,
                s.metrics.recall * 100.0,
                s.metrics.f1 * 100.0,
                s.counts.n_match,
                s.counts.n_pred,
                s.counts.n_gold
            );
        }
        out
    }
}

/// One row of an ablation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub mode: AblationMode,
    pub k: Option<usize>,
    pub report: EvalReport,
}

/// F1 per mode (rows) and K (columns), in percent.
pub fn ablation_table(rows: &[AblationRow]) -> String {
    let ks: BTreeSet<Option<usize>> = rows.iter().map(|r| r.k).collect();
    let label = |k: &Option<usize>| k.map_or_else(|| "F1 (all)".to_string(), |k| format!("K={k}"));
    let mut out = format!("{:<18}", "mode");
    for k in &ks {
        let _ = write!(out, "  {:>8}", label(k));
    }
    out.push('\n');
    for mode in AblationMode::ALL {
        if !rows.iter().any(|r| r.mode == mode) {
            continue;
        }
        let _ = write!(out, "{:<18}", mode.as_str());
        for k in &ks {
            match rows.iter().find(|r| r.mode == mode && r.k == *k) {
                Some(r) => {
                    let _ = write!(out, "  {:>8.2}", r.report.overall.metrics.f1 * 100.0);
                }
                None => {
                    let _ = write!(out, "  {:>8}", "");
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntityType;
    use proptest::prelude::*;

    fn m(sid: &str, t: &str, start: usize, end: usize) -> EntityMention {
        EntityMention {
            sentence_id: sid.into(),
            start,
            end,
            etype: EntityType::new(t).unwrap(),
            surface: String::new(),
        }
    }

    #[test]
    fn boundary_mismatch_rejected() {
        let gold = [m("s", "NAME", 0, 2), m("s", "ORG", 5, 8)];
        let pred = [m("s", "NAME", 0, 2), m("s", "ORG", 5, 7)];
        let c = exact_match_counts(&gold, &pred).overall;
        assert_eq!((c.n_match, c.n_pred, c.n_gold), (1, 2, 2));
    }

    #[test]
    fn identity() {
        let gold = [m("s", "NAME", 0, 2), m("t", "ORG", 5, 8)];
        let c = exact_match_counts(&gold, &gold).overall;
        assert_eq!((c.n_match, c.n_pred, c.n_gold), (2, 2, 2));
        assert_eq!(metrics(c), Metrics { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    #[test]
    fn metric_substitution() {
        let r = metrics(Counts {
            n_match: 2,
            n_pred: 4,
            n_gold: 5,
        });
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.4);
        assert!((r.f1 - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn zero_denominators() {
        let zero = Metrics::default();
        assert_eq!(metrics(Counts { n_match: 0, n_pred: 0, n_gold: 3 }), zero);
        assert_eq!(metrics(Counts { n_match: 0, n_pred: 3, n_gold: 0 }), zero);
        assert_eq!(metrics(Counts::default()), zero);
    }

    #[test]
    fn per_type_split() {
        let gold = [m("s", "A", 0, 1), m("s", "B", 2, 3)];
        let pred = [m("s", "A", 0, 1), m("s", "A", 2, 3)];
        let c = exact_match_counts(&gold, &pred);
        assert_eq!(c.per_type["A"], Counts { n_match: 1, n_pred: 2, n_gold: 1 });
        assert_eq!(c.per_type["B"], Counts { n_match: 0, n_pred: 0, n_gold: 1 });
    }

    #[test]
    fn report_round_trip() {
        let gold = [m("s", "A", 0, 1), m("s", "B", 2, 3)];
        let pred = [m("s", "A", 0, 1)];
        let report = EvalReport::evaluate(
            &gold,
            &pred,
            ReportMetadata {
                config_hash: Some("abc".into()),
                mode: Some(AblationMode::NoEstimate),
                profile: Some("resume".into()),
                k: Some(250),
                cache_state_hash: None,
            },
        );
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"no_estimate\""));
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(report.to_table().lines().last().unwrap().starts_with("overall"));
    }

    #[test]
    fn mode_parsing() {
        for mode in AblationMode::ALL {
            assert_eq!(mode.as_str().parse::<AblationMode>().unwrap(), mode);
        }
        assert_eq!("no-estimate".parse::<AblationMode>().unwrap(), AblationMode::NoEstimate);
        assert!("none".parse::<AblationMode>().is_err());
    }

    #[test]
    fn ablation_table_shape() {
        let report = EvalReport::evaluate(&[], &[], ReportMetadata::default());
        let rows: Vec<AblationRow> = [(AblationMode::Full, 1), (AblationMode::NoEstimate, 1), (AblationMode::Full, 2)]
            .into_iter()
            .map(|(mode, k)| AblationRow {
                mode,
                k: Some(k),
                report: report.clone(),
            })
            .collect();
        let table = ablation_table(&rows);
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().next().unwrap().contains("K=2"));
    }

    proptest! {
        #[test]
        fn harmonic_bounds_and_permutation(
            gold in proptest::collection::vec((0usize..3, 0usize..2, 0usize..6), 0..30),
            pred in proptest::collection::vec((0usize..3, 0usize..2, 0usize..6), 0..30),
        ) {
            let build = |v: &[(usize, usize, usize)]| -> Vec<EntityMention> {
                v.iter().map(|&(s, t, a)| m(&format!("s{s}"), ["A", "B"][t], a, a + 1)).collect()
            };
            let (g, p) = (build(&gold), build(&pred));
            let c = exact_match_counts(&g, &p);
            let r = metrics(c.overall);
            if r.precision + r.recall > 0.0 {
                prop_assert!(r.f1 >= r.precision.min(r.recall) - 1e-12);
                prop_assert!(r.f1 <= r.precision.max(r.recall) + 1e-12);
            }
            let (mut g2, mut p2) = (g.clone(), p.clone());
            g2.reverse();
            p2.reverse();
            prop_assert_eq!(exact_match_counts(&g2, &p2), c);
        }
    }
}
