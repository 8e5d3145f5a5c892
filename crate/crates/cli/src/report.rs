use std::io::Write;

use serde::Serialize;
use serde_json::Value;

/// One measured quantity of a check. `limit` is the bound it was held to, if any.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub item: String,
    pub name: String,
    pub value: f64,
    pub limit: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn new(name: &str) -> CheckOutcome {
        CheckOutcome { name: name.to_string(), pass: true, metrics: Vec::new(), details: None, error: None }
    }

    pub fn failed(name: &str, error: String) -> CheckOutcome {
        CheckOutcome { name: name.to_string(), pass: false, metrics: Vec::new(), details: None, error: Some(error) }
    }

    /// Records `value ≤ limit`.
    pub fn at_most(&mut self, item: impl Into<String>, name: &str, value: f64, limit: f64) {
        let pass = value <= limit;
        self.push(item.into(), name, value, Some(limit), pass);
    }

    /// Records `value ≥ limit`.
    pub fn at_least(&mut self, item: impl Into<String>, name: &str, value: f64, limit: f64) {
        let pass = value >= limit;
        self.push(item.into(), name, value, Some(limit), pass);
    }

    pub fn require(&mut self, item: impl Into<String>, name: &str, value: f64, pass: bool) {
        self.push(item.into(), name, value, None, pass);
    }

    /// Informational value, never fails.
    pub fn log(&mut self, item: impl Into<String>, name: &str, value: f64) {
        self.push(item.into(), name, value, None, true);
    }

    fn push(&mut self, item: String, name: &str, value: f64, limit: Option<f64>, pass: bool) {
        // NaN compares false everywhere, so it can only fail here
        self.pass &= pass;
        self.metrics.push(Metric { item, name: name.to_string(), value, limit, pass });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Metric> {
        self.metrics.iter().filter(|m| !m.pass)
    }

    /// One line: name, verdict and the worst failing metric if any.
    pub fn summary(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("{verdict} {} ({} metrics)", self.name, self.metrics.len());
        if let Some(e) = &self.error {
            s.push_str(&format!(": {e}"));
        } else if let Some(m) = self.failures().next() {
            s.push_str(&format!(": {} {} = {}", m.item, m.name, m.value));
            if let Some(l) = m.limit {
                s.push_str(&format!(" (limit {l})"));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    /// Sorted by check name so assembly order never depends on scheduling.
    pub fn new(command: &str, seed: u64, mut checks: Vec<CheckOutcome>) -> Report {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = checks.iter().all(|c| c.pass);
        Report { command: command.to_string(), seed, pass, checks }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are serializable");
        s.push('\n');
        s
    }

    /// Flat `check,item,metric,value,limit,pass` rows; details are dropped.
    pub fn to_csv(&self) -> std::io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "item", "metric", "value", "limit", "pass"])?;
        for c in &self.checks {
            if let Some(e) = &c.error {
                w.write_record([c.name.as_str(), "", "error", e.as_str(), "", "false"])?;
            }
            for m in &c.metrics {
                let limit = m.limit.map(|l| l.to_string()).unwrap_or_default();
                w.write_record([&c.name, &m.item, &m.name, &m.value.to_string(), &limit, &m.pass.to_string()])?;
            }
        }
        w.flush()?;
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> std::io::Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write_to(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        out.write_all(self.render(format)?.as_bytes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_both_directions() {
        let mut c = CheckOutcome::new("x");
        c.at_most("a", "v", f64::NAN, 1.0);
        assert!(!c.pass);
        let mut c = CheckOutcome::new("y");
        c.at_least("a", "v", f64::NAN, 1.0);
        assert!(!c.pass);
    }

    #[test]
    fn report_sorts_and_flattens() {
        let mut a = CheckOutcome::new("b-check");
        a.at_most("i", "err", 0.5, 1.0);
        let z = CheckOutcome::failed("a-check", "broken".into());
        let r = Report::new("suite", 3, vec![a, z]);
        assert!(!r.pass);
        assert_eq!(r.checks[0].name, "a-check");
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("b-check,i,err,0.5,1,true"));
        assert!(r.to_json().contains("\"error\": \"broken\""));
    }
}
