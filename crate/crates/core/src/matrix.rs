//! The revocation/delegation comparison matrix: 19 schemes scored on 19
//! criteria, the published combination rows, and a calculus that predicts
//! combination rows from their members.
//!
//! Calculus: a fused row (currently only short-lived proxy certificates,
//! `p+s`) replaces its members whenever all of them are present; then each
//! benefit criterion (categories A–C) takes the best level among members and
//! each cost criterion (categories D–F) takes the worst.
//!
//! The data ships as `data/schemes.json` in canonical encoding. It is
//! compiled in, and [`Matrix::from_data`] accepts an extended file with
//! additional schemes or combinations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::encoding;
use crate::Error;

pub const DATA_FILE: &str = include_str!("../data/schemes.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BenefitLevel {
    No,
    Partial,
    Yes,
}

impl BenefitLevel {
    pub fn glyph(self) -> char {
        match self {
            BenefitLevel::No => 'N',
            BenefitLevel::Partial => 'P',
            BenefitLevel::Yes => 'Y',
        }
    }

    pub fn from_glyph(c: char) -> Option<Self> {
        match c {
            'N' => Some(BenefitLevel::No),
            'P' => Some(BenefitLevel::Partial),
            'Y' => Some(BenefitLevel::Yes),
            _ => None,
        }
    }
}

impl fmt::Display for BenefitLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenefitLevel::No => "No",
            BenefitLevel::Partial => "Partial",
            BenefitLevel::Yes => "Yes",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Category {
    /// Whether combining takes the maximum (benefit categories) or the
    /// minimum (cost categories).
    pub fn takes_max(self) -> bool {
        matches!(self, Category::A | Category::B | Category::C)
    }
}

pub const CRITERIA_COUNT: usize = 19;

const CRITERIA: [(&str, Category, &str); CRITERIA_COUNT] = [
    ("A1", Category::A, "supports CA revocation"),
    ("A2", Category::A, "supports damage-free CA revocation"),
    ("A3", Category::A, "supports leaf revocation"),
    ("A4", Category::A, "supports autonomous revocation"),
    ("B1", Category::B, "supports delegation"),
    ("B2", Category::B, "delegation without key sharing"),
    ("C1", Category::C, "supports domain-based policies"),
    ("C2", Category::C, "no trust-on-first-use required"),
    ("C3", Category::C, "preserves user privacy"),
    ("D1", Category::D, "does not increase page-load delay"),
    ("D2", Category::D, "low burden on CAs"),
    ("D3", Category::D, "reasonable logging overhead"),
    ("E1", Category::E, "non-proprietary"),
    ("E2", Category::E, "no special hardware required"),
    ("E3", Category::E, "no extra CA involvement"),
    ("E4", Category::E, "no browser-vendor involvement"),
    ("E5", Category::E, "server compatible"),
    ("E6", Category::E, "browser compatible"),
    ("F1", Category::F, "no out-of-band communication"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Criterion(usize);

impl Criterion {
    /// Autonomous revocation: requirement R1.
    pub const A4: Criterion = Criterion(3);
    /// Delegation without key sharing: requirement R2.
    pub const B2: Criterion = Criterion(5);
    pub const C1: Criterion = Criterion(6);

    pub fn all() -> impl Iterator<Item = Criterion> {
        (0..CRITERIA_COUNT).map(Criterion)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn id(self) -> &'static str {
        CRITERIA[self.0].0
    }

    pub fn category(self) -> Category {
        CRITERIA[self.0].1
    }

    pub fn name(self) -> &'static str {
        CRITERIA[self.0].2
    }
}

impl FromStr for Criterion {
    type Err = MatrixError;

    /// Accepts an id (`A3`, case-insensitive) or a full criterion name.
    fn from_str(s: &str) -> Result<Self, MatrixError> {
        Criterion::all()
            .find(|c| c.id().eq_ignore_ascii_case(s) || c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| MatrixError::UnknownCriterion(s.to_owned()))
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.id(), self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("unknown combination {0:?}")]
    UnknownCombination(String),
    #[error("cannot combine an empty set of schemes")]
    EmptyCombination,
    #[error("matrix data: {0}")]
    Data(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchemeProfile {
    pub key: String,
    pub levels: [BenefitLevel; CRITERIA_COUNT],
}

impl SchemeProfile {
    pub fn level(&self, c: Criterion) -> BenefitLevel {
        self.levels[c.index()]
    }

    pub fn satisfies_r1(&self) -> bool {
        self.level(Criterion::A4) == BenefitLevel::Yes
    }

    pub fn satisfies_r2(&self) -> bool {
        self.level(Criterion::B2) == BenefitLevel::Yes
    }

    pub fn glyphs(&self) -> String {
        self.levels.iter().map(|l| l.glyph()).collect()
    }

    /// One `<id>\t<level>\t<name>` line per criterion.
    pub fn report(&self) -> String {
        Criterion::all()
            .map(|c| format!("{}\t{}\t{}\n", c.id(), self.level(c), c.name()))
            .collect()
    }
}

fn parse_levels(key: &str, glyphs: &str) -> Result<[BenefitLevel; CRITERIA_COUNT], MatrixError> {
    let levels: Vec<BenefitLevel> = glyphs
        .chars()
        .map(BenefitLevel::from_glyph)
        .collect::<Option<_>>()
        .ok_or_else(|| MatrixError::Data(format!("row {key}: bad level glyph in {glyphs:?}")))?;
    levels
        .try_into()
        .map_err(|v: Vec<_>| MatrixError::Data(format!("row {key}: {} levels, expected {CRITERIA_COUNT}", v.len())))
}

/// On-disk form of the matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixData {
    pub version: u32,
    pub criteria: Vec<String>,
    pub schemes: Vec<SchemeRow>,
    pub combinations: Vec<CombinationRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub key: String,
    pub name: String,
    /// One of `N`, `P`, `Y` per criterion, in criterion order.
    pub levels: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinationRow {
    pub label: String,
    /// Member scheme keys; alternatives with identical rows (`e` or `f`)
    /// are listed under the first.
    pub members: Vec<String>,
    /// Fused rows replace their members during combination.
    pub fused: bool,
    pub levels: String,
}

/// Base rows as scored in the published comparison, `N`/`P`/`Y` per
/// criterion A1..F1.
pub const TRANSCRIPTION: [(&str, &str, &str); 19] = [
    ("a", "Regular CRL", "PNYNNNNYNNNYYYNYYPN"),
    ("b", "Hard-fail OCSP", "PNYNNNNYNNNYYYNYYPN"),
    ("c", "OCSP stapling", "PNYNNNNYYYNYYYNYPPY"),
    ("d", "PKISN", "YYYNNNNYYYYYYYPPNNY"),
    ("e", "CRLSets", "YNPNNNNYYYYYNYYNYPY"),
    ("f", "OneCRL", "YNPNNNNYYYYYNYYNYPY"),
    ("g", "CRLite", "YNYNNNNYYYYYYYYNYNY"),
    ("h", "RevCast", "YNYNNNNYYYYYYNNYYNY"),
    ("i", "RITM", "YNYNNNNYYYYYYPNYYNY"),
    ("j", "SSL splitting", "NNNNYYNYYNYYYYYYNYY"),
    ("k", "Keyless SSL", "NNNNYYNYYNYYYYYYNYY"),
    ("l", "Key sharing", "NNNNYNNYYYYYYYYYYYY"),
    ("m", "DANE-based delegation", "NNNNYYNYYNYYYYYYYNY"),
    ("n", "Delegated credentials", "NNYYYYPYYYYYYYPYNNY"),
    ("o", "Self-signed certificates", "NNNNYYYPYYYYYYYYYPP"),
    ("p", "Short-lived certificates", "NNYNNNNYYYNNYYNYYYY"),
    ("q", "Name-constrained certificates", "NNNNYYYYYYYNYYNYYPY"),
    ("r", "Cruise-liner certificates", "NNNNYNNYYYYYYYNYYYY"),
    ("s", "Proxy certificates", "NNPPYYYYYYYYYYYYPNY"),
];

/// Published combination rows: label, members, fused, levels.
pub const COMBINATIONS: [(&str, &[&str], bool, &str); 7] = [
    ("n+d", &["n", "d"], false, "YYYYYYNYYYYYYYPPNNY"),
    ("n+(e|f)", &["n", "e"], false, "YNYYYYNYYYYYNYPNNNY"),
    ("n+g", &["n", "g"], false, "YNYYYYNYYYYYYYPNNNY"),
    ("p+s", &["p", "s"], true, "NNYYYYYYYYYYYYYYPNY"),
    ("p+s+d", &["p", "s", "d"], false, "YYYYYYYYYYYYYYPPNNY"),
    ("p+s+(e|f)", &["p", "s", "e"], false, "YNYYYYYYYYYYNYYNPNY"),
    ("p+s+g", &["p", "s", "g"], false, "YNYYYYYYYYYYYYYNPNY"),
];

impl MatrixData {
    pub fn transcription() -> MatrixData {
        MatrixData {
            version: 1,
            criteria: CRITERIA.iter().map(|(id, _, _)| id.to_string()).collect(),
            schemes: TRANSCRIPTION
                .iter()
                .map(|(key, name, levels)| SchemeRow { key: key.to_string(), name: name.to_string(), levels: levels.to_string() })
                .collect(),
            combinations: COMBINATIONS
                .iter()
                .map(|(label, members, fused, levels)| CombinationRow {
                    label: label.to_string(),
                    members: members.iter().map(|m| m.to_string()).collect(),
                    fused: *fused,
                    levels: levels.to_string(),
                })
                .collect(),
        }
    }

    /// The canonical data-file text (with trailing newline).
    pub fn to_text(&self) -> String {
        let mut s = encoding::canonical_string(self);
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug)]
pub struct Scheme {
    pub key: String,
    pub name: String,
    pub profile: SchemeProfile,
}

#[derive(Clone, Debug)]
pub struct Combination {
    pub label: String,
    pub members: BTreeSet<String>,
    pub fused: bool,
    pub profile: SchemeProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub criterion: Criterion,
    pub predicted: BenefitLevel,
    pub table: BenefitLevel,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    /// The data file is byte-identical to the canonical encoding of the
    /// compiled-in transcription.
    pub data_matches_transcription: bool,
    pub cells_total: usize,
    pub cells_matched: usize,
    pub deviations: Vec<(String, Deviation)>,
}

impl CheckReport {
    /// Every deviation is on C1 for a combination containing `n`.
    pub fn deviations_explained(&self) -> bool {
        self.deviations
            .iter()
            .all(|(label, d)| d.criterion == Criterion::C1 && label.split('+').any(|m| m == "n"))
    }

    pub fn passed(&self) -> bool {
        self.data_matches_transcription && self.cells_matched + 3 >= self.cells_total && self.deviations_explained()
    }

    pub fn report(&self) -> String {
        let mut out = format!(
            "data-file\t{}\ncombination-cells\t{}/{}\n",
            if self.data_matches_transcription { "match" } else { "MISMATCH" },
            self.cells_matched,
            self.cells_total
        );
        for (label, d) in &self.deviations {
            out.push_str(&format!("deviation\t{label}\t{}\tpredicted={}\ttable={}\n", d.criterion.id(), d.predicted, d.table));
        }
        out.push_str(if self.passed() { "CHECK PASS\n" } else { "CHECK FAIL\n" });
        out
    }
}

#[derive(Clone, Debug)]
pub struct Matrix {
    source: String,
    schemes: Vec<Scheme>,
    combinations: Vec<Combination>,
}

impl Matrix {
    /// The shipped matrix.
    pub fn builtin() -> &'static Matrix {
        static TABLE: OnceLock<Matrix> = OnceLock::new();
        TABLE.get_or_init(|| Matrix::from_data(DATA_FILE).expect("shipped matrix data is valid"))
    }

    pub fn from_data(text: &str) -> Result<Matrix, MatrixError> {
        let data: MatrixData =
            encoding::decode_canonical(text.trim_end().as_bytes()).map_err(|e: Error| MatrixError::Data(e.to_string()))?;
        let expected: Vec<&str> = CRITERIA.iter().map(|c| c.0).collect();
        if data.criteria != expected {
            return Err(MatrixError::Data("criteria list differs from A1..F1".into()));
        }
        let mut schemes = Vec::new();
        for row in &data.schemes {
            if schemes.iter().any(|s: &Scheme| s.key == row.key) {
                return Err(MatrixError::Data(format!("duplicate scheme {}", row.key)));
            }
            let levels = parse_levels(&row.key, &row.levels)?;
            schemes.push(Scheme {
                key: row.key.clone(),
                name: row.name.clone(),
                profile: SchemeProfile { key: row.key.clone(), levels },
            });
        }
        let mut matrix = Matrix { source: text.to_owned(), schemes, combinations: Vec::new() };
        for row in &data.combinations {
            for m in &row.members {
                matrix.scheme(m)?;
            }
            let levels = parse_levels(&row.label, &row.levels)?;
            matrix.combinations.push(Combination {
                label: row.label.clone(),
                members: row.members.iter().cloned().collect(),
                fused: row.fused,
                profile: SchemeProfile { key: row.label.clone(), levels },
            });
        }
        Ok(matrix)
    }

    pub fn schemes(&self) -> &[Scheme] {
        &self.schemes
    }

    pub fn combinations(&self) -> &[Combination] {
        &self.combinations
    }

    pub fn scheme(&self, key: &str) -> Result<&Scheme, MatrixError> {
        self.schemes
            .iter()
            .find(|s| s.key == key)
            .ok_or_else(|| MatrixError::UnknownScheme(key.to_owned()))
    }

    pub fn combination(&self, label: &str) -> Result<&Combination, MatrixError> {
        self.combinations
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| MatrixError::UnknownCombination(label.to_owned()))
    }

    pub fn lookup(&self, scheme: &str, criterion: &str) -> Result<BenefitLevel, MatrixError> {
        let criterion: Criterion = criterion.parse()?;
        Ok(self.scheme(scheme)?.profile.level(criterion))
    }

    /// Predicts the profile of deploying all `schemes` together.
    pub fn combine<S: AsRef<str>>(&self, schemes: &[S]) -> Result<SchemeProfile, MatrixError> {
        let mut remaining: BTreeSet<String> = BTreeSet::new();
        for s in schemes {
            remaining.insert(self.scheme(s.as_ref())?.key.clone());
        }
        if remaining.is_empty() {
            return Err(MatrixError::EmptyCombination);
        }
        let key = remaining.iter().cloned().collect::<Vec<_>>().join("+");
        let mut profiles: Vec<&SchemeProfile> = Vec::new();
        for fused in self.combinations.iter().filter(|c| c.fused) {
            if fused.members.is_subset(&remaining) {
                remaining.retain(|m| !fused.members.contains(m));
                profiles.push(&fused.profile);
            }
        }
        for key in &remaining {
            profiles.push(&self.scheme(key)?.profile);
        }
        let mut levels = [BenefitLevel::No; CRITERIA_COUNT];
        for c in Criterion::all() {
            let it = profiles.iter().map(|p| p.level(c));
            levels[c.index()] = if c.category().takes_max() { it.max() } else { it.min() }.expect("non-empty");
        }
        Ok(SchemeProfile { key, levels })
    }

    /// Cells where the calculus disagrees with the stored combination row.
    pub fn diff_against_table(&self, label: &str) -> Result<Vec<Deviation>, MatrixError> {
        let combination = self.combination(label)?;
        let members: Vec<&String> = combination.members.iter().collect();
        let predicted = self.combine(&members)?;
        Ok(Criterion::all()
            .filter(|&c| predicted.level(c) != combination.profile.level(c))
            .map(|c| Deviation { criterion: c, predicted: predicted.level(c), table: combination.profile.level(c) })
            .collect())
    }

    pub fn check(&self) -> CheckReport {
        let mut deviations = Vec::new();
        for c in &self.combinations {
            for d in self.diff_against_table(&c.label).expect("stored combination") {
                deviations.push((c.label.clone(), d));
            }
        }
        let cells_total = self.combinations.len() * CRITERIA_COUNT;
        CheckReport {
            data_matches_transcription: self.source == MatrixData::transcription().to_text(),
            cells_total,
            cells_matched: cells_total - deviations.len(),
            deviations,
        }
    }
}
