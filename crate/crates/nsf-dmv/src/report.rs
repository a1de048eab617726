//! Serializable check records (`report.json`, `rei.json`) and the text, JSON and CSV
//! renderings of a [`SuiteReport`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use nsf_dmv_core::dmv::{CheckOutcome, ConcentrationBound, EnergyReport};
use nsf_dmv_core::relenergy::{GronwallReport, HypothesisCheck, ReiReport};

use crate::harness::SuiteReport;

/// JSON has no infinities or NaN; such values are written as the strings `"inf"`,
/// `"-inf"` and `"nan"`.
pub mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        #[derive(Deserialize)]
        struct Item(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            #[derive(serde::Serialize)]
            struct Val(#[serde(serialize_with = "super::serialize")] f64);
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&Val(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Item>::deserialize(d)?.into_iter().map(|i| i.0).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub test_id: String,
    pub tau: f64,
    #[serde(with = "float")]
    pub value: f64,
}

/// One entry of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub residuals: Vec<ResidualRecord>,
    pub pass: bool,
    pub tolerance: f64,
}

impl CheckRecord {
    pub fn from_outcome(o: &CheckOutcome) -> Self {
        CheckRecord {
            name: o.name.to_string(),
            residuals: o
                .residuals
                .iter()
                .map(|r| ResidualRecord { test_id: r.test_id.clone(), tau: r.tau, value: r.value })
                .collect(),
            pass: o.pass,
            tolerance: o.tolerance,
        }
    }

    /// `D(τ)` as residuals with test id `D`.
    pub fn from_energy(e: &EnergyReport) -> Self {
        CheckRecord {
            name: "energy".into(),
            residuals: e
                .d_series
                .iter()
                .map(|(tau, &value)| ResidualRecord { test_id: "D".into(), tau, value })
                .collect(),
            pass: e.pass,
            tolerance: e.tolerance,
        }
    }

    /// `TV(ν_C)(τ) - C D(τ)` with the fitted `C`; infinite where no constant exists.
    pub fn from_concentration(b: &ConcentrationBound, times: &[f64]) -> Self {
        let residuals = times
            .iter()
            .zip(b.tv.iter().zip(&b.d))
            .map(|(&tau, (&tv, &d))| {
                let value = match b.c {
                    Some(c) => tv - c * d,
                    None if tv > 0.0 && b.violation.is_some() => f64::INFINITY,
                    None => 0.0,
                };
                ResidualRecord { test_id: "tv_minus_cd".into(), tau, value }
            })
            .collect();
        CheckRecord { name: "concentration_bound".into(), residuals, pass: b.pass, tolerance: 0.0 }
    }

    /// Largest `|value|`, NaN if any value is NaN.
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().map(|r| r.value.abs()).fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn min(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub t_index: usize,
    pub cell: usize,
    pub atom: usize,
    #[serde(with = "float")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
}

impl From<&HypothesisCheck> for HypothesisRecord {
    fn from(h: &HypothesisCheck) -> Self {
        HypothesisRecord {
            name: h.name.to_string(),
            pass: h.pass,
            witness: h.witness.map(|w| WitnessRecord { t_index: w.t_index, cell: w.cell, atom: w.atom, value: w.value }),
        }
    }
}

/// Contents of `rei.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReiRecord {
    pub theorem: String,
    pub tau: Vec<f64>,
    #[serde(rename = "H", with = "float::vec")]
    pub h: Vec<f64>,
    #[serde(with = "float::vec")]
    pub lhs: Vec<f64>,
    #[serde(with = "float::vec")]
    pub rhs: Vec<f64>,
    #[serde(with = "float")]
    pub slack_min: f64,
    #[serde(rename = "gronwall_C", with = "float")]
    pub gronwall_c: f64,
    pub hypotheses_pass: bool,
    pub bound_pass: bool,
    pub pass: bool,
    pub hypotheses: Vec<HypothesisRecord>,
}

impl ReiRecord {
    pub fn new(rei: &ReiReport, g: &GronwallReport) -> Self {
        ReiRecord {
            theorem: g.theorem.name().into(),
            tau: rei.times().to_vec(),
            h: g.h_series.values().to_vec(),
            lhs: rei.lhs.clone(),
            rhs: rei.rhs.clone(),
            slack_min: rei.slack_min,
            gronwall_c: g.c_fit,
            hypotheses_pass: g.hypotheses_pass,
            bound_pass: g.bound_pass,
            pass: g.pass,
            hypotheses: g.hypotheses.iter().map(HypothesisRecord::from).collect(),
        }
    }
}

pub const CSV_HEADER: &str = "kind,name,level,value,tolerance,pass,mandatory";
pub const H_CSV_HEADER: &str = "tau,H";

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt_bool(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

/// One row per check, order fit, constant and hypothesis, under [`CSV_HEADER`].
pub fn render_csv(r: &SuiteReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let level = |l: Option<usize>| l.map(|v| v.to_string()).unwrap_or_default();
    for c in &r.checks {
        let _ = writeln!(
            out,
            "check,{},{},{},{},{},{}",
            c.name,
            c.level,
            num(c.value),
            num(c.tolerance),
            c.pass,
            c.mandatory
        );
    }
    for o in &r.orders {
        let _ = writeln!(out, "order,{},,{},{},{},{}", o.name, num(o.order), num(o.threshold), o.pass, o.mandatory);
    }
    for c in &r.constants {
        let _ = writeln!(out, "constant,{},{},{},,,false", c.name, level(c.level), num(c.value));
    }
    for h in &r.hypotheses {
        let v = h.witness.map(|w| num(w.value)).unwrap_or_default();
        let _ = writeln!(out, "hypothesis,{},{},{},,{},true", h.name, h.level, v, opt_bool(Some(h.pass)));
    }
    out
}

/// `tau,H` for the finest level.
pub fn render_h_csv(r: &SuiteReport) -> String {
    let mut out = String::from(H_CSV_HEADER);
    out.push('\n');
    for p in &r.h_series {
        let _ = writeln!(out, "{},{}", num(p.tau), num(p.h));
    }
    out
}

pub fn render_json(r: &SuiteReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

pub fn render_text(r: &SuiteReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} [{}] theorem {}", r.name, r.scenario, r.theorem);
    for c in &r.checks {
        let tag = if c.pass { "ok  " } else if c.mandatory { "FAIL" } else { "warn" };
        let _ = writeln!(out, "  {tag} {:<24} n={:<4} value {:>11.3e}  tol {:.1e}", c.name, c.level, c.value, c.tolerance);
    }
    for o in &r.orders {
        let tag = if o.pass { "ok  " } else if o.mandatory { "FAIL" } else { "warn" };
        let _ = writeln!(out, "  {tag} order {:<18} {:>6.3}  min {:.2}", o.name, o.order, o.threshold);
    }
    for h in r.hypotheses.iter().filter(|h| !h.pass) {
        let _ = write!(out, "  FAIL hypothesis {} (n={})", h.name, h.level);
        if let Some(w) = h.witness {
            let _ = write!(out, " at t_index {} cell {} atom {} value {:.6e}", w.t_index, w.cell, w.atom, w.value);
        }
        out.push('\n');
    }
    for c in &r.constants {
        let _ = writeln!(out, "  {:<30} {:.6e}", c.name, c.value);
    }
    let failed = r.failures();
    if failed.is_empty() {
        let _ = writeln!(out, "PASS");
    } else {
        let _ = writeln!(out, "FAIL: {}", failed.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{CheckSummary, HPoint};

    #[test]
    fn empty_report_gives_header_only_csv() {
        let r = SuiteReport::empty("x");
        assert_eq!(render_csv(&r), format!("{CSV_HEADER}\n"));
        assert_eq!(render_h_csv(&r), format!("{H_CSV_HEADER}\n"));
        assert!(r.pass);
    }

    #[test]
    fn h_series_is_two_columns() {
        let mut r = SuiteReport::empty("x");
        r.h_series = vec![HPoint { tau: 0.0, h: 0.0 }, HPoint { tau: 0.5, h: 2.5e-3 }];
        let text = render_h_csv(&r);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<(f64, f64)> = rd.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows, vec![(0.0, 0.0), (0.5, 2.5e-3)]);
    }

    #[test]
    fn mandatory_failure_fails_the_rollup() {
        let mut r = SuiteReport::empty("x");
        r.checks.push(CheckSummary {
            name: "gronwall".into(),
            level: 8,
            value: 1.0,
            tolerance: 0.0,
            pass: false,
            mandatory: false,
        });
        r.finish();
        assert!(r.pass);
        r.checks[0].mandatory = true;
        r.finish();
        assert!(!r.pass);
        assert_eq!(r.failures(), vec!["gronwall".to_string()]);
        assert!(render_text(&r).contains("FAIL: gronwall"));
        let csv = render_csv(&r);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("check,gronwall,8,"));
    }
}
