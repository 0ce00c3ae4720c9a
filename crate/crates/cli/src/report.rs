use std::fmt::Write as _;

use nested_h2::sysmodel::TwoPlayerPlant;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct PlantDigest {
    pub n: [usize; 2],
    pub m: [usize; 2],
    pub k: [usize; 2],
    pub disturbances: usize,
    pub regulated: usize,
}

impl PlantDigest {
    pub fn of(p: &TwoPlayerPlant) -> Self {
        let part = &p.partition;
        PlantDigest {
            n: part.n,
            m: part.m,
            k: part.k,
            disturbances: p.disturbances(),
            regulated: p.regulated(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub plant: Option<PlantDigest>,
    pub status: &'static str,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<Row>,
    /// Kept in insertion order; names are unique.
    pub results: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        RunReport {
            command,
            plant: None,
            status: "pass",
            exit_code: 0,
            error: None,
            checks: Vec::new(),
            results: Vec::new(),
            notes: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) -> bool {
        let pass = value <= limit;
        self.checks.push(Row {
            name: name.into(),
            pass,
            value: Some(value),
            limit: Some(limit),
            detail: None,
        });
        pass
    }

    pub fn holds(&mut self, name: impl Into<String>, pass: bool, detail: Option<String>) -> bool {
        self.checks.push(Row {
            name: name.into(),
            pass,
            value: None,
            limit: None,
            detail,
        });
        pass
    }

    pub fn result(&mut self, name: impl Into<String>, value: f64) {
        self.results.push((name.into(), value));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn fail(&mut self, code: u8, error: Option<String>) {
        self.status = "fail";
        self.exit_code = code;
        self.error = error;
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let results: serde_json::Map<String, serde_json::Value> = self
            .results
            .iter()
            .map(|(k, x)| (k.clone(), serde_json::json!(x)))
            .collect();
        v["results"] = serde_json::Value::Object(results);
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command  {}", self.command);
        if let Some(p) = &self.plant {
            let _ = writeln!(
                s,
                "plant    n = {:?}, m = {:?}, k = {:?}, {} disturbances, {} regulated outputs",
                p.n, p.m, p.k, p.disturbances, p.regulated
            );
        }
        if !self.checks.is_empty() {
            let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            let _ = writeln!(s, "\nchecks");
            for c in &self.checks {
                let mark = if c.pass { "ok  " } else { "FAIL" };
                let _ = write!(s, "  {mark} {:<width$}", c.name);
                if let (Some(v), Some(l)) = (c.value, c.limit) {
                    let _ = write!(s, "  {v:.3e} <= {l:.1e}");
                }
                if let Some(d) = &c.detail {
                    let _ = write!(s, "  {d}");
                }
                s.push('\n');
            }
        }
        if !self.results.is_empty() {
            let width = self.results.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            let _ = writeln!(s, "\nresults");
            for (k, v) in &self.results {
                let _ = writeln!(s, "  {k:<width$}  {v:.10e}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "\nnote: {n}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "\nerror: {e}");
        }
        let _ = writeln!(s, "\nstatus   {} (exit {})", self.status, self.exit_code);
        let _ = writeln!(s, "wall time {:.3} s", self.wall_time_s);
        s
    }
}
