use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::features::EmbeddingVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Target,
    Nontarget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub enroll: String,
    pub test: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrialList {
    pub entries: Vec<Trial>,
}

impl TrialList {
    /// One `<enroll-id> <test-id> <target|nontarget>` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let [enroll, test, label] = fields[..] else {
                return Err(Error::format(format!("trial line {}: expected 3 fields", no + 1)));
            };
            let label = match label {
                "target" => Label::Target,
                "nontarget" => Label::Nontarget,
                other => {
                    return Err(Error::format(format!("trial line {}: unknown label `{other}`", no + 1)));
                }
            };
            entries.push(Trial {
                enroll: enroll.to_string(),
                test: test.to_string(),
                label,
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.entries {
            let label = match t.label {
                Label::Target => "target",
                Label::Nontarget => "nontarget",
            };
            writeln!(out, "{} {} {label}", t.enroll, t.test).unwrap();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Scores split by trial label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScoreSet {
    targets: Vec<f64>,
    nontargets: Vec<f64>,
}

impl TrialScoreSet {
    pub fn new(targets: Vec<f64>, nontargets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() || nontargets.is_empty() {
            return Err(Error::Precondition(
                "detection metrics need at least one target and one nontarget trial".into(),
            ));
        }
        if targets.iter().chain(&nontargets).any(|s| !s.is_finite()) {
            return Err(Error::Precondition("trial scores must be finite".into()));
        }
        Ok(Self { targets, nontargets })
    }

    /// Attach labels from `trials` to scores given in the same or any order.
    pub fn from_scores(trials: &TrialList, scores: &[ScoreLine]) -> Result<Self> {
        let lookup: HashMap<(&str, &str), f64> = scores
            .iter()
            .map(|s| ((s.enroll.as_str(), s.test.as_str()), s.score))
            .collect();
        let (mut targets, mut nontargets) = (Vec::new(), Vec::new());
        for t in &trials.entries {
            let s = *lookup
                .get(&(t.enroll.as_str(), t.test.as_str()))
                .ok_or_else(|| Error::MissingId(format!("{} {}", t.enroll, t.test)))?;
            match t.label {
                Label::Target => targets.push(s),
                Label::Nontarget => nontargets.push(s),
            }
        }
        Self::new(targets, nontargets)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn nontargets(&self) -> &[f64] {
        &self.nontargets
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.targets.iter().map(|&s| f(s)).collect(),
            self.nontargets.iter().map(|&s| f(s)).collect(),
        )
    }

    pub fn swapped(&self) -> Self {
        Self {
            targets: self.nontargets.clone(),
            nontargets: self.targets.clone(),
        }
    }
}

pub fn cosine_score(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!("embedding dimensions differ: {} vs {}", a.dim(), b.dim())));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values().iter().zip(b.values()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::degenerate("cosine score of a zero embedding"));
    }
    Ok(dot / (na * nb).sqrt())
}

/// Cosine score of every trial, in list order.
pub fn cosine_scores(trials: &TrialList, embeddings: &BTreeMap<String, EmbeddingVector>) -> Result<Vec<f64>> {
    let get = |id: &str| embeddings.get(id).ok_or_else(|| Error::MissingId(id.to_string()));
    trials
        .entries
        .iter()
        .map(|t| cosine_score(get(&t.enroll)?, get(&t.test)?))
        .collect()
}

pub fn score_trials(trials: &TrialList, embeddings: &BTreeMap<String, EmbeddingVector>) -> Result<TrialScoreSet> {
    let scores = cosine_scores(trials, embeddings)?;
    let (mut targets, mut nontargets) = (Vec::new(), Vec::new());
    for (t, s) in trials.entries.iter().zip(scores) {
        match t.label {
            Label::Target => targets.push(s),
            Label::Nontarget => nontargets.push(s),
        }
    }
    TrialScoreSet::new(targets, nontargets)
}

/// One line of a score file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLine {
    pub enroll: String,
    pub test: String,
    pub score: f64,
}

/// One `<enroll-id> <test-id> <score>` per line.
pub fn parse_scores(text: &str) -> Result<Vec<ScoreLine>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [enroll, test, score] = fields[..] else {
            return Err(Error::format(format!("score line {}: expected 3 fields", no + 1)));
        };
        let score: f64 = score
            .parse()
            .map_err(|e| Error::format(format!("score line {}: {e}", no + 1)))?;
        out.push(ScoreLine {
            enroll: enroll.to_string(),
            test: test.to_string(),
            score,
        });
    }
    Ok(out)
}

pub fn write_scores(lines: &[ScoreLine]) -> String {
    let mut out = String::new();
    for l in lines {
        writeln!(out, "{} {} {:?}", l.enroll, l.test, l.score).unwrap();
    }
    out
}
