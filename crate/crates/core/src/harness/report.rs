//! JSON report documents.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::{CompareReport, SimReport, SimStep, StepOutput};
use crate::collection::{Collection, TokenDoc};
use crate::error::{Error, Result};
use crate::generators::Distribution;
use crate::oracle::DominanceVerdict;
use crate::procedures::{Setting, TableDoc};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    #[serde(default)]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub a: String,
    pub b: String,
    pub verdict: DominanceVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassDoc {
    pub token: TokenDoc,
    pub mass: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputDoc {
    Token(TokenDoc),
    Distribution(Vec<MassDoc>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimStepDoc {
    pub t: usize,
    pub input: TokenDoc,
    pub size: u64,
    pub output: OutputDoc,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linf: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReportDoc {
    pub setting: Setting,
    pub generator: String,
    /// 1-based.
    pub target: usize,
    pub noise_level: u32,
    pub horizon: usize,
    pub first_stable: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    pub script_ok: bool,
    pub linf_ok: bool,
    pub passed: bool,
    pub steps: Vec<SimStepDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableDoc>,
    #[serde(default)]
    pub sim_reports: Vec<SimReportDoc>,
    #[serde(default)]
    pub verdicts: Vec<VerdictDoc>,
    #[serde(default)]
    pub invariant_results: Vec<InvariantResult>,
}

pub fn ratio_text(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(text: &str) -> Result<Rational64> {
    let bad = || Error::Parameter(format!("bad rational `{text}`"));
    match text.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i64, i64) = (
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            );
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(p, q))
        }
        None => Ok(Rational64::from_integer(
            text.trim().parse().map_err(|_| bad())?,
        )),
    }
}

fn output_doc(o: &StepOutput, c: &Collection) -> OutputDoc {
    match o {
        StepOutput::Token(t) => OutputDoc::Token(TokenDoc::from_token(t, &c.registry)),
        StepOutput::Distribution(d) => OutputDoc::Distribution(
            d.masses()
                .iter()
                .map(|(t, m)| MassDoc {
                    token: TokenDoc::from_token(t, &c.registry),
                    mass: ratio_text(*m),
                })
                .collect(),
        ),
    }
}

impl SimReport {
    pub fn to_doc(&self, c: &Collection) -> SimReportDoc {
        SimReportDoc {
            setting: self.setting,
            generator: self.generator.clone(),
            target: self.target + 1,
            noise_level: self.noise_level,
            horizon: self.horizon,
            first_stable: self.first_stable,
            bound: self.bound,
            script_ok: self.script_ok,
            linf_ok: self.linf_ok,
            passed: self.passed,
            steps: self
                .steps
                .iter()
                .enumerate()
                .map(|(k, s)| SimStepDoc {
                    t: k + 1,
                    input: TokenDoc::from_token(&s.input, &c.registry),
                    size: s.size,
                    output: output_doc(&s.output, c),
                    valid: s.valid,
                    linf: s.linf.map(ratio_text),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &SimReportDoc, c: &Collection) -> Result<Self> {
        let steps = doc
            .steps
            .iter()
            .map(|s| {
                let output = match &s.output {
                    OutputDoc::Token(t) => StepOutput::Token(t.to_token(&c.registry)?),
                    OutputDoc::Distribution(ms) => {
                        let mut d = Distribution::default();
                        for m in ms {
                            d.add(m.token.to_token(&c.registry)?, parse_ratio(&m.mass)?);
                        }
                        StepOutput::Distribution(d)
                    }
                };
                Ok(SimStep {
                    input: s.input.to_token(&c.registry)?,
                    size: s.size,
                    output,
                    valid: s.valid,
                    linf: s.linf.as_deref().map(parse_ratio).transpose()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SimReport {
            setting: doc.setting,
            generator: doc.generator.clone(),
            target: doc
                .target
                .checked_sub(1)
                .ok_or_else(|| Error::Schema("report target is 1-based".into()))?,
            noise_level: doc.noise_level,
            horizon: doc.horizon,
            steps,
            first_stable: doc.first_stable,
            bound: doc.bound,
            script_ok: doc.script_ok,
            linf_ok: doc.linf_ok,
            passed: doc.passed,
        })
    }
}

impl CompareReport {
    pub fn verdict_docs(&self) -> Vec<VerdictDoc> {
        self.verdicts
            .iter()
            .map(|(a, b, v)| VerdictDoc {
                a: a.clone(),
                b: b.clone(),
                verdict: *v,
            })
            .collect()
    }
}

impl ReportDoc {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
