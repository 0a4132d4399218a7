//! Machine-readable solve reports.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::diagram::Fronts;
use crate::opg::{classify_entrance, Classification, OpgError};
use crate::orders::{DomainElement, ResultSet};

/// How a solve was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Solve atoms, compose shortcut games.
    Compositional,
    /// Flatten the diagram and solve the composite directly.
    Monolithic,
    /// Enumerate positional strategies of both players.
    Oracle,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Compositional, Mode::Monolithic, Mode::Oracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Compositional => "compositional",
            Mode::Monolithic => "monolithic",
            Mode::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compositional" => Ok(Mode::Compositional),
            "monolithic" => Ok(Mode::Monolithic),
            "oracle" => Ok(Mode::Oracle),
            other => Err(format!(
                "unknown mode `{other}` (expected compositional, monolithic, or oracle)"
            )),
        }
    }
}

/// Front and classification of one entrance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntranceReport {
    pub id: String,
    pub class: Classification,
    pub front: Vec<ResultSet>,
}

/// Timing and work counters for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub queries: u64,
    pub cache_hits: u64,
    pub parse_ms: u64,
    pub solve_ms: u64,
}

/// The outcome of solving one diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub diagram: String,
    pub mode: Mode,
    pub entrances: Vec<EntranceReport>,
    pub stats: RunStats,
}

impl SolveReport {
    /// Classifies every entrance of `fronts`. Fails only if a front mixes a
    /// closed outcome with exit results, which no solver output does.
    pub fn from_fronts(
        diagram: impl Into<String>,
        mode: Mode,
        fronts: &Fronts,
        stats: RunStats,
    ) -> Result<Self, OpgError> {
        let mut entrances = Vec::new();
        for (entrance, front) in fronts {
            entrances.push(EntranceReport {
                id: entrance.to_string(),
                class: classify_entrance(front)?,
                front: front.results().to_vec(),
            });
        }
        Ok(SolveReport {
            diagram: diagram.into(),
            mode,
            entrances,
            stats,
        })
    }

    pub fn to_json_value(&self) -> Value {
        let entrances: Vec<Value> = self
            .entrances
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "class": e.class.to_string(),
                    "front": e.front.iter().map(result_set_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "diagram": self.diagram,
            "mode": self.mode.to_string(),
            "entrances": entrances,
            "stats": {
                "queries": self.stats.queries,
                "cache_hits": self.stats.cache_hits,
                "parse_ms": self.stats.parse_ms,
                "solve_ms": self.stats.solve_ms,
            },
        })
    }

    /// Pretty JSON with keys in a fixed order, so equal reports render to
    /// equal bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report values serialize")
    }
}

fn result_set_json(r: &ResultSet) -> Value {
    Value::Array(r.iter().map(element_json).collect())
}

fn element_json(d: &DomainElement) -> Value {
    match d {
        DomainElement::Top => json!({"top": true}),
        DomainElement::Bot => json!({"bot": true}),
        DomainElement::ExitAt(exit, p) => json!({"exit": exit.to_string(), "priority": p}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opg::{EntranceRef, ParetoFront};
    use crate::orders::ExitRef;
    use std::collections::BTreeMap;

    fn sample_fronts() -> Fronts {
        let mut fronts = BTreeMap::new();
        let entrance = EntranceRef::right(1);
        let front = ParetoFront::new(
            entrance,
            vec![
                ResultSet::new(vec![DomainElement::ExitAt(ExitRef::right(1), 3)]).unwrap(),
                ResultSet::new(vec![
                    DomainElement::ExitAt(ExitRef::right(2), 0),
                    DomainElement::ExitAt(ExitRef::left(1), 2),
                ])
                .unwrap(),
            ],
        )
        .unwrap();
        fronts.insert(entrance, front);
        fronts
    }

    #[test]
    fn report_json_shape() {
        let report = SolveReport::from_fronts(
            "d",
            Mode::Compositional,
            &sample_fronts(),
            RunStats {
                queries: 36,
                cache_hits: 2,
                parse_ms: 1,
                solve_ms: 5,
            },
        )
        .unwrap();
        let v = report.to_json_value();
        assert_eq!(v["diagram"], "d");
        assert_eq!(v["mode"], "compositional");
        assert_eq!(v["entrances"][0]["id"], "in.r1");
        assert_eq!(v["entrances"][0]["class"], "pending");
        assert_eq!(v["entrances"][0]["front"][0][0]["exit"], "out.r1");
        assert_eq!(v["entrances"][0]["front"][0][0]["priority"], 3);
        assert_eq!(v["entrances"][0]["front"][1][1]["exit"], "out.l1");
        assert_eq!(v["stats"]["queries"], 36);
        assert_eq!(v["stats"]["cache_hits"], 2);
    }

    #[test]
    fn closed_outcomes_use_flag_objects() {
        let mut fronts = BTreeMap::new();
        let entrance = EntranceRef::left(1);
        fronts.insert(
            entrance,
            ParetoFront::new(entrance, vec![ResultSet::top()]).unwrap(),
        );
        let report =
            SolveReport::from_fronts("w", Mode::Oracle, &fronts, RunStats::default()).unwrap();
        let v = report.to_json_value();
        assert_eq!(v["entrances"][0]["id"], "in.l1");
        assert_eq!(v["entrances"][0]["class"], "winning");
        assert_eq!(v["entrances"][0]["front"][0][0]["top"], true);
    }

    #[test]
    fn json_rendering_is_deterministic() {
        let report =
            SolveReport::from_fronts("d", Mode::Monolithic, &sample_fronts(), RunStats::default())
                .unwrap();
        assert_eq!(report.to_json(), report.to_json());
        assert!(report.to_json().contains("\"mode\": \"monolithic\""));
    }

    #[test]
    fn mode_parsing_roundtrips() {
        for mode in Mode::ALL {
            assert_eq!(mode.as_str().parse::<Mode>().unwrap(), mode);
        }
        assert!("fast".parse::<Mode>().is_err());
    }
}
