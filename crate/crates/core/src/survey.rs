//! Visitor survey data model, CSV ingestion and descriptive shares.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! labelled_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                let s = s.trim();
                $(
                    if s.eq_ignore_ascii_case($label) {
                        return Ok($name::$variant);
                    }
                )+
                Err(format!("unknown {} `{}`", stringify!($name), s))
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

labelled_enum!(VisitorKind { Local => "local", Foreign => "foreign" });

labelled_enum!(
    /// The seven administrative divisions used as travel zones.
    Division {
        Barisal => "Barisal",
        Chittagong => "Chittagong",
        Dhaka => "Dhaka",
        Khulna => "Khulna",
        Rajshahi => "Rajshahi",
        Rangpur => "Rangpur",
        Sylhet => "Sylhet",
    }
);

labelled_enum!(TravelMode { Bus => "bus", Boat => "boat", AirCombined => "air_combined" });

labelled_enum!(Purpose {
    Recreation => "recreation",
    Spiritual => "spiritual",
    Study => "study",
    Business => "business",
});

labelled_enum!(Sex { Female => "female", Male => "male" });

labelled_enum!(AgeBand { Youth => "youth", Middle => "middle", Old => "old" });

labelled_enum!(EducationBand {
    BelowPrimary => "below_primary",
    Primary => "primary",
    Secondary => "secondary",
    Graduate => "graduate",
});

labelled_enum!(MaritalStatus {
    Unmarried => "unmarried",
    Married => "married",
    Divorced => "divorced",
    Widowed => "widowed",
});

labelled_enum!(Occupation {
    Agriculture => "agriculture",
    Business => "business",
    Housewife => "housewife",
    Journalist => "journalist",
    Researcher => "researcher",
    Student => "student",
    Teacher => "teacher",
    Technical => "technical",
    Other => "other",
});

/// Where a respondent travelled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OriginZone {
    Domestic(Division),
    Foreign,
}

impl OriginZone {
    pub fn division(self) -> Option<Division> {
        match self {
            OriginZone::Domestic(d) => Some(d),
            OriginZone::Foreign => None,
        }
    }
}

impl fmt::Display for OriginZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OriginZone::Domestic(d) => d.fmt(f),
            OriginZone::Foreign => f.write_str("foreign"),
        }
    }
}

impl FromStr for OriginZone {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("foreign") {
            Ok(OriginZone::Foreign)
        } else {
            s.parse().map(OriginZone::Domestic)
        }
    }
}

/// One interviewed visitor. Demographic answers may be missing; the
/// fields that drive zoning and regression are mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub respondent_id: String,
    pub visitor_kind: VisitorKind,
    pub origin_zone: OriginZone,
    pub travel_cost: f64,
    pub travel_mode: TravelMode,
    pub alone: bool,
    pub package_tour: bool,
    pub purpose: Purpose,
    pub sex: Option<Sex>,
    pub age_band: Option<AgeBand>,
    pub education_band: Option<EducationBand>,
    pub marital_status: Option<MaritalStatus>,
    pub occupation: Option<Occupation>,
    pub household_size: Option<u32>,
    pub monthly_income: Option<f64>,
    pub repeat_visitor: Option<bool>,
}

impl SurveyRecord {
    /// Checks the record-level invariants, returning the first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.respondent_id.trim().is_empty() {
            return Err("respondent_id is empty".into());
        }
        if !(self.travel_cost >= 0.0) || !self.travel_cost.is_finite() {
            return Err("travel_cost < 0".into());
        }
        if let Some(income) = self.monthly_income {
            if !(income >= 0.0) || !income.is_finite() {
                return Err("monthly_income < 0".into());
            }
        }
        if self.household_size == Some(0) {
            return Err("household_size < 1".into());
        }
        let foreign_zone = self.origin_zone == OriginZone::Foreign;
        let foreign_kind = self.visitor_kind == VisitorKind::Foreign;
        if foreign_zone != foreign_kind {
            return Err(format!(
                "visitor_kind {} inconsistent with origin_zone {}",
                self.visitor_kind, self.origin_zone
            ));
        }
        Ok(())
    }

    pub fn is_local(&self) -> bool {
        self.visitor_kind == VisitorKind::Local
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub source: PathBuf,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<SurveyRecord>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset from in-memory records, enforcing unique respondent ids.
    pub fn from_records(records: Vec<SurveyRecord>, source: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            if !seen.insert(r.respondent_id.as_str()) {
                return Err(Error::DuplicateRespondent {
                    id: r.respondent_id.clone(),
                    line: i as u64 + 2,
                });
            }
        }
        let rows = records.len();
        Ok(Self {
            records,
            provenance: Provenance {
                source: source.into(),
                rows,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn locals(&self) -> impl Iterator<Item = &SurveyRecord> {
        self.records.iter().filter(|r| r.is_local())
    }
}

/// Column names for each survey field. Field order in the file is free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveySchema {
    pub respondent_id: String,
    pub visitor_kind: String,
    pub origin_zone: String,
    pub travel_cost: String,
    pub travel_mode: String,
    pub alone: String,
    pub package_tour: String,
    pub purpose: String,
    pub sex: String,
    pub age_band: String,
    pub education_band: String,
    pub marital_status: String,
    pub occupation: String,
    pub household_size: String,
    pub monthly_income: String,
    pub repeat_visitor: String,
}

impl Default for SurveySchema {
    fn default() -> Self {
        Self {
            respondent_id: "respondent_id".into(),
            visitor_kind: "visitor_kind".into(),
            origin_zone: "origin_zone".into(),
            travel_cost: "travel_cost_bdt".into(),
            travel_mode: "travel_mode".into(),
            alone: "alone".into(),
            package_tour: "package_tour".into(),
            purpose: "purpose".into(),
            sex: "sex".into(),
            age_band: "age_band".into(),
            education_band: "education_band".into(),
            marital_status: "marital_status".into(),
            occupation: "occupation".into(),
            household_size: "household_size".into(),
            monthly_income: "monthly_income_bdt".into(),
            repeat_visitor: "repeat_visitor".into(),
        }
    }
}

impl SurveySchema {
    fn columns(&self) -> [&str; 16] {
        [
            &self.respondent_id,
            &self.visitor_kind,
            &self.origin_zone,
            &self.travel_cost,
            &self.travel_mode,
            &self.alone,
            &self.package_tour,
            &self.purpose,
            &self.sex,
            &self.age_band,
            &self.education_band,
            &self.marital_status,
            &self.occupation,
            &self.household_size,
            &self.monthly_income,
            &self.repeat_visitor,
        ]
    }
}

/// A data row that failed validation. Line numbers are 1-based and count the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowReject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SurveyLoad {
    pub dataset: Dataset,
    pub rejects: Vec<RowReject>,
}

pub fn parse_survey_csv(path: &Path, schema: &SurveySchema) -> Result<SurveyLoad> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_survey_reader(file, path, schema)
}

pub fn parse_survey_reader<R: Read>(
    reader: R,
    source: &Path,
    schema: &SurveySchema,
) -> Result<SurveyLoad> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: source.to_path_buf(),
        source: e,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        index.insert(h.to_string(), i);
    }
    let mut cols = [0usize; 16];
    for (slot, name) in cols.iter_mut().zip(schema.columns()) {
        *slot = *index.get(name).ok_or_else(|| Error::MissingColumn {
            path: source.to_path_buf(),
            column: name.to_string(),
        })?;
    }

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut rows = 0usize;
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        rows += 1;
        let line = row.position().map_or(rows as u64 + 1, |p| p.line());
        let field = |i: usize| row.get(cols[i]).unwrap_or("");
        match record_from_fields(field) {
            Ok(rec) => {
                if seen.insert(rec.respondent_id.clone(), line).is_some() {
                    return Err(Error::DuplicateRespondent {
                        id: rec.respondent_id,
                        line,
                    });
                }
                records.push(rec);
            }
            Err(reason) => rejects.push(RowReject { line, reason }),
        }
    }

    Ok(SurveyLoad {
        dataset: Dataset {
            records,
            provenance: Provenance {
                source: source.to_path_buf(),
                rows,
            },
        },
        rejects,
    })
}

fn required<'a>(value: &'a str, name: &str) -> std::result::Result<&'a str, String> {
    if value.is_empty() {
        Err(format!("missing {name}"))
    } else {
        Ok(value)
    }
}

fn parse_required<T: FromStr>(value: &str, name: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    required(value, name)?
        .parse()
        .map_err(|e| format!("bad {name}: {e}"))
}

fn parse_optional<T: FromStr>(value: &str, name: &str) -> std::result::Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    if value.is_empty() {
        Ok(None)
    } else {
        value.parse().map(Some).map_err(|e| format!("bad {name}: {e}"))
    }
}

fn parse_flag(value: &str, name: &str) -> std::result::Result<bool, String> {
    match value {
        "0" => Ok(false),
        "1" => Ok(true),
        "" => Err(format!("missing {name}")),
        other => Err(format!("bad {name}: expected 0/1, got `{other}`")),
    }
}

fn record_from_fields<'a>(field: impl Fn(usize) -> &'a str) -> std::result::Result<SurveyRecord, String> {
    let repeat_visitor = match field(15) {
        "" => None,
        v => Some(parse_flag(v, "repeat_visitor")?),
    };
    let household_size: Option<i64> = parse_optional(field(13), "household_size")?;
    let household_size = match household_size {
        Some(n) if n < 1 => return Err("household_size < 1".into()),
        Some(n) => Some(u32::try_from(n).map_err(|_| "household_size out of range".to_string())?),
        None => None,
    };
    let rec = SurveyRecord {
        respondent_id: required(field(0), "respondent_id")?.to_string(),
        visitor_kind: parse_required(field(1), "visitor_kind")?,
        origin_zone: parse_required(field(2), "origin_zone")?,
        travel_cost: parse_required(field(3), "travel_cost")?,
        travel_mode: parse_required(field(4), "travel_mode")?,
        alone: parse_flag(field(5), "alone")?,
        package_tour: parse_flag(field(6), "package_tour")?,
        purpose: parse_required(field(7), "purpose")?,
        sex: parse_optional(field(8), "sex")?,
        age_band: parse_optional(field(9), "age_band")?,
        education_band: parse_optional(field(10), "education_band")?,
        marital_status: parse_optional(field(11), "marital_status")?,
        occupation: parse_optional(field(12), "occupation")?,
        household_size,
        monthly_income: parse_optional(field(14), "monthly_income")?,
        repeat_visitor,
    };
    rec.validate()?;
    Ok(rec)
}

/// Writes records in the schema's column order. Re-parsing the output yields
/// the same records.
pub fn write_survey_csv<W: Write>(dataset: &Dataset, writer: W, schema: &SurveySchema) -> Result<()> {
    let to_err = |e: csv::Error| Error::Csv {
        path: dataset.provenance.source.clone(),
        source: e,
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(schema.columns()).map_err(to_err)?;
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    for r in &dataset.records {
        w.write_record([
            r.respondent_id.clone(),
            r.visitor_kind.to_string(),
            r.origin_zone.to_string(),
            r.travel_cost.to_string(),
            r.travel_mode.to_string(),
            flag(r.alone),
            flag(r.package_tour),
            r.purpose.to_string(),
            opt(r.sex),
            opt(r.age_band),
            opt(r.education_band),
            opt(r.marital_status),
            opt(r.occupation),
            opt(r.household_size),
            opt(r.monthly_income),
            opt(r.repeat_visitor.map(flag)),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: dataset.provenance.source.clone(),
        source,
    })
}

/// Which visit purposes count as tourism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PurposeFilter {
    pub excluded: Vec<Purpose>,
}

impl Default for PurposeFilter {
    fn default() -> Self {
        Self {
            excluded: vec![Purpose::Spiritual],
        }
    }
}

/// Drops pilgrims (and any other excluded purposes) using the default filter.
pub fn filter_tourists(d: &Dataset) -> Dataset {
    filter_by_purpose(d, &PurposeFilter::default())
}

pub fn filter_by_purpose(d: &Dataset, filter: &PurposeFilter) -> Dataset {
    Dataset {
        records: d
            .records
            .iter()
            .filter(|r| !filter.excluded.contains(&r.purpose))
            .cloned()
            .collect(),
        provenance: d.provenance.clone(),
    }
}

/// Fraction of local respondents coming from each division.
pub fn zonal_shares(d: &Dataset) -> Result<BTreeMap<Division, f64>> {
    let mut counts: BTreeMap<Division, usize> = BTreeMap::new();
    for r in d.locals() {
        if let Some(div) = r.origin_zone.division() {
            *counts.entry(div).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyLocalSubset);
    }
    Ok(counts
        .into_iter()
        .map(|(z, c)| (z, c as f64 / total as f64))
        .collect())
}

/// `(local respondents, all respondents)`.
pub fn local_count(d: &Dataset) -> (usize, usize) {
    (d.locals().count(), d.len())
}
