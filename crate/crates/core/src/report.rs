//! Machine-readable check reports and their CSV summary.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Outcome of one property check.
///
/// `worst_margin` is the smallest `tolerance − residual` seen over all trials, so a
/// negative value means at least one trial failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Map<String, Value>,
    pub trials: usize,
    pub failures: Vec<Value>,
    #[serde(with = "margin_json")]
    pub worst_margin: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Failures beyond this many are counted but not stored.
pub const MAX_STORED_FAILURES: usize = 20;

impl CheckReport {
    pub fn new(check: impl Into<String>) -> Self {
        CheckReport {
            check: check.into(),
            params: Map::new(),
            trials: 0,
            failures: Vec::new(),
            worst_margin: f64::INFINITY,
            passed: true,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn set_param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    /// Records one trial; a negative margin is a failure and `detail` is kept.
    pub fn record(&mut self, margin: f64, detail: impl FnOnce() -> Value) {
        self.trials += 1;
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        self.worst_margin = self.worst_margin.min(margin);
        if margin < 0.0 {
            self.passed = false;
            if self.failures.len() < MAX_STORED_FAILURES {
                self.failures.push(detail());
            }
        }
    }

    /// Records a trial that failed outright (e.g. an unexpected error).
    pub fn record_failure(&mut self, detail: Value) {
        self.trials += 1;
        self.worst_margin = f64::NEG_INFINITY;
        self.passed = false;
        if self.failures.len() < MAX_STORED_FAILURES {
            self.failures.push(detail);
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn failure_count(&self) -> usize {
        self.failures.len()
    }

    /// Folds another report into this one as a sub-check.
    pub fn absorb(&mut self, other: &CheckReport) {
        self.trials += other.trials;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.passed &= other.passed;
        for f in &other.failures {
            if self.failures.len() < MAX_STORED_FAILURES {
                let mut f = f.clone();
                if let Value::Object(m) = &mut f {
                    m.entry("subcheck").or_insert(Value::String(other.check.clone()));
                }
                self.failures.push(f);
            }
        }
        for n in &other.notes {
            self.notes.push(format!("{}: {n}", other.check));
        }
    }
}

/// JSON has no infinities: ±∞ margins are written as the strings "inf"/"-inf".
mod margin_json {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad margin {t:?}"))),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per report: `check,params,trials,failures,worst_margin,passed`.
pub fn summary_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("check,params,trials,failures,worst_margin,passed\n");
    for r in reports {
        let params: Vec<String> = r
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{:e},{}\n",
            csv_field(&r.check),
            csv_field(&params.join(";")),
            r.trials,
            r.failures.len(),
            r.worst_margin,
            r.passed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn margins_and_failures() {
        let mut r = CheckReport::new("demo").param("eps", 0.5);
        r.record(0.3, || json!({}));
        assert!(r.passed);
        r.record(-1e-3, || json!({"trial": 1}));
        assert!(!r.passed);
        assert_eq!(r.trials, 2);
        assert_eq!(r.worst_margin, -1e-3);
        assert_eq!(r.failures, vec![json!({"trial": 1})]);
    }

    #[test]
    fn nan_margin_fails() {
        let mut r = CheckReport::new("nan");
        r.record(f64::NAN, || json!(null));
        assert!(!r.passed);
    }

    #[test]
    fn csv_quotes_params() {
        let r = CheckReport::new("a").param("x", 1).param("y", "p,q");
        let csv = summary_csv(&[r]);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("a,\"x=1;y=\"\"p,q\"\"\",0,0,"));
    }

    #[test]
    fn json_round_trip() {
        let mut r = CheckReport::new("rt").param("n", 3);
        r.record(0.1, || json!({}));
        r.note("hello");
        let s = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let empty = CheckReport::new("empty");
        let back: CheckReport = serde_json::from_str(&serde_json::to_string(&empty).unwrap()).unwrap();
        assert_eq!(back.worst_margin, f64::INFINITY);
    }
}
