use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const SOURCE_SLOT: &str = "{{source}}";

const BASELINE_V1: &str = include_str!("../../templates/baseline.v1.txt");
const CDD_V1: &str = include_str!("../../templates/cdd.v1.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Baseline,
    Cdd,
}

impl Arm {
    pub const ALL: [Arm; 2] = [Arm::Baseline, Arm::Cdd];

    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Cdd => "cdd",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Arm::Baseline),
            "cdd" => Ok(Arm::Cdd),
            other => Err(format!("unknown arm `{other}` (expected baseline or cdd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub arm: Arm,
    pub version: String,
    pub text: String,
}

impl PromptTemplate {
    /// Parses a template file. `;;` lines are metadata; `;; version: x` sets the version tag.
    pub fn parse(arm: Arm, raw: &str) -> Result<Self, String> {
        let mut version = None;
        let mut text = String::new();
        for line in raw.lines() {
            match line.strip_prefix(";;") {
                Some(meta) => {
                    if let Some(v) = meta.trim().strip_prefix("version:") {
                        version = Some(v.trim().to_string());
                    }
                }
                None => {
                    text.push_str(line);
                    text.push('\n');
                }
            }
        }
        let slots = text.matches(SOURCE_SLOT).count();
        if slots != 1 {
            return Err(format!("template must contain exactly one {SOURCE_SLOT} slot, found {slots}"));
        }
        Ok(PromptTemplate { arm, version: version.unwrap_or_else(|| "unversioned".into()), text })
    }

    pub fn builtin(arm: Arm) -> Self {
        let raw = match arm {
            Arm::Baseline => BASELINE_V1,
            Arm::Cdd => CDD_V1,
        };
        Self::parse(arm, raw).expect("shipped templates are well-formed")
    }

    /// Inserts the source verbatim. The source itself is never scanned for slots.
    pub fn render(&self, source: &str) -> String {
        let (head, tail) = self.text.split_once(SOURCE_SLOT).expect("slot checked at parse time");
        let source = source.strip_suffix('\n').unwrap_or(source);
        format!("{head}{source}{tail}")
    }
}

pub fn build_prompt(arm: Arm, source: &str) -> String {
    PromptTemplate::builtin(arm).render(source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_has_no_icp_rules() {
        let t = PromptTemplate::builtin(Arm::Baseline);
        assert!(!t.text.contains("ICP"));
        assert_eq!(t.version, "v1");
        assert!(!t.text.contains(";;"));
    }

    #[test]
    fn source_is_inserted_once_and_verbatim() {
        let src = "def f():\n    return \"{{source}}\"\n";
        let p = build_prompt(Arm::Cdd, src);
        assert_eq!(p.matches("return \"{{source}}\"").count(), 1);
        assert!(p.contains("```python\ndef f():\n    return \"{{source}}\"\n```"));
    }

    #[test]
    fn templates_need_exactly_one_slot() {
        assert!(PromptTemplate::parse(Arm::Cdd, "no slot").is_err());
        assert!(PromptTemplate::parse(Arm::Cdd, "{{source}} {{source}}").is_err());
    }

    #[test]
    fn arm_round_trips() {
        for arm in Arm::ALL {
            assert_eq!(arm.to_string().parse::<Arm>(), Ok(arm));
        }
        assert!("nope".parse::<Arm>().is_err());
    }
}
