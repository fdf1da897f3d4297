use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{ProblemConfig, SCHEMA_VERSION};
use crate::error::Result;
use crate::nonlinear_solver::EnergyLedger;
use crate::scalar::fmt17;

#[derive(Clone, Debug, Serialize)]
pub struct Invariant {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub relation: &'static str,
}

impl Invariant {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Invariant {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            relation: "<=",
        }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Invariant {
            name: name.into(),
            passed: value > threshold,
            value,
            threshold,
            relation: ">",
        }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Invariant {
            name: name.into(),
            passed: ok,
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            relation: "==",
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    command: &'a str,
    system: &'a str,
    config_sha256: &'a str,
    passed: bool,
    invariants: &'a [Invariant],
    metrics: &'a BTreeMap<String, f64>,
}

/// Collected tables, metrics and invariants; written once at the end of a command.
pub struct Report {
    command: &'static str,
    system: &'static str,
    config_hash: String,
    pub invariants: Vec<Invariant>,
    metrics: BTreeMap<String, f64>,
    files: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str, system: &'static str, cfg: &ProblemConfig) -> Self {
        Report {
            command,
            system,
            config_hash: cfg.hash(),
            invariants: Vec::new(),
            metrics: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn check(&mut self, inv: Invariant) {
        self.invariants.push(inv);
    }

    pub fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }

    pub fn add_raw(&mut self, name: &str, content: String) {
        self.files.push((name.into(), content));
    }

    /// CSV with a dimensionless-unit header and 17 significant digits per value.
    pub fn add_table(&mut self, name: &str, header: &[String], rows: impl Iterator<Item = Vec<f64>>) {
        let mut s = header.iter().map(|h| format!("{h}[-]")).collect::<Vec<_>>().join(",");
        s.push('\n');
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| fmt17(*v)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        self.files.push((name.into(), s));
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for i in &self.invariants {
            let _ = writeln!(
                s,
                "{} {}: {} {} {}",
                if i.passed { "PASS" } else { "FAIL" },
                i.name,
                fmt17(i.value),
                i.relation,
                fmt17(i.threshold)
            );
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
        }
        let summary = Summary {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            system: self.system,
            config_sha256: &self.config_hash,
            passed: self.passed(),
            invariants: &self.invariants,
            metrics: &self.metrics,
        };
        let mut json = serde_json::to_string_pretty(&summary).map_err(|e| crate::Error::Parse(e.to_string()))?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)?;
        Ok(())
    }
}

pub fn nonlinear_ledger(rep: &mut Report, led: &EnergyLedger<f64>) {
    let cols: Vec<String> = [
        "t",
        "energy",
        "mech_dissipation",
        "diff_dissipation",
        "boundary_work",
        "loading_power",
        "rate_sq",
        "linf_c",
        "llogl",
        "h1_u",
        "lp_d2u",
        "mass",
        "min_F",
        "min_c",
        "mech_residual",
        "diff_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = (0..led.len()).map(|k| {
        vec![
            led.times[k],
            led.energy[k],
            led.mech_dissipation[k],
            led.diff_dissipation[k],
            led.boundary_work[k],
            led.loading_power[k],
            led.rate_sq[k],
            led.linf_c[k],
            led.llogl[k],
            led.h1_u[k],
            led.lp_d2u[k],
            led.mass[k],
            led.min_f[k],
            led.min_c[k],
            led.mech_residual[k],
            led.diff_residual[k],
        ]
    });
    rep.add_table("ledger.csv", &cols, rows);
}
