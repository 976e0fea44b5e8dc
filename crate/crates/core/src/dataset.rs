//! WSN-DS-schema dataset handling: CSV loading and writing, label parsing,
//! stratified train/test splitting, and z-score standardization.
//!
//! A record carries exactly [`FEATURE_COUNT`] numeric features. Ten of them
//! are named (the well-known WSN-DS attributes); the remaining thirteen are
//! kept positionally in `extra_features`, preserving the input column order.
//! Columns are recognised by a header alias table so the loader accepts both
//! the simulator's output and WSN-DS-style spellings (`"ADV_S"`,
//! `"Consumed Energy"`, ...).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Total number of numeric feature columns in the schema.
pub const FEATURE_COUNT: usize = 23;
/// Number of named features (the rest are positional extras).
pub const NAMED_FEATURE_COUNT: usize = 10;
/// Number of positional extra features.
pub const EXTRA_FEATURE_COUNT: usize = FEATURE_COUNT - NAMED_FEATURE_COUNT;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("class {0} has no records")]
    EmptyClass(String),
    #[error("dataset is empty")]
    EmptyDataset,
}

/// Traffic class. `Normal` is index 0; the four jammer classes follow in a
/// fixed order so confusion matrices and probability vectors line up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Normal,
    ConstantJamming,
    RandomJamming,
    DeceptiveJamming,
    ReactiveJamming,
}

impl Label {
    pub const ALL: [Label; 5] = [
        Label::Normal,
        Label::ConstantJamming,
        Label::RandomJamming,
        Label::DeceptiveJamming,
        Label::ReactiveJamming,
    ];

    pub fn index(self) -> usize {
        match self {
            Label::Normal => 0,
            Label::ConstantJamming => 1,
            Label::RandomJamming => 2,
            Label::DeceptiveJamming => 3,
            Label::ReactiveJamming => 4,
        }
    }

    pub fn from_index(idx: usize) -> Option<Label> {
        Label::ALL.get(idx).copied()
    }

    /// Binary collapse: every non-normal class is an attack.
    pub fn is_attack(self) -> bool {
        self != Label::Normal
    }

    /// Parses a label string case-insensitively. Built-in aliases cover the
    /// WSN-DS spellings; `extra_map` (raw string -> canonical label string)
    /// is consulted first so callers can remap dataset-specific class names.
    pub fn parse(raw: &str, extra_map: Option<&HashMap<String, String>>) -> Option<Label> {
        let trimmed = raw.trim();
        let key = trimmed.to_lowercase();
        if let Some(map) = extra_map {
            if let Some(target) = map
                .iter()
                .find(|(k, _)| k.trim().to_lowercase() == key)
                .map(|(_, v)| v)
            {
                return Label::parse(target, None);
            }
        }
        match normalize(trimmed).as_str() {
            "normal" => Some(Label::Normal),
            "constantjamming" | "constant" => Some(Label::ConstantJamming),
            "randomjamming" | "random" => Some(Label::RandomJamming),
            "deceptivejamming" | "deceptive" => Some(Label::DeceptiveJamming),
            "reactivejamming" | "reactive" => Some(Label::ReactiveJamming),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Label::Normal => "Normal",
            Label::ConstantJamming => "Constant jamming",
            Label::RandomJamming => "Random jamming",
            Label::DeceptiveJamming => "Deceptive jamming",
            Label::ReactiveJamming => "Reactive jamming",
        };
        f.write_str(name)
    }
}

/// One node-round observation: ten named features, thirteen positional
/// extras, and the class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    /// Energy consumed in the previous round, joules.
    pub energy_consumed: f64,
    /// 1 if the node served as cluster head this round, else 0.
    pub is_ch: f64,
    /// ADV_CH broadcast messages sent.
    pub adv_ch_sent: f64,
    /// TDMA schedule broadcast messages sent.
    pub adv_sch_sent: f64,
    /// Data packets transmitted to the base station.
    pub data_sent_to_bs: f64,
    /// Distance from the cluster head to the base station.
    pub dist_ch_to_bs: f64,
    /// Data packets received from cluster members.
    pub data_received: f64,
    /// ADV_CH messages received.
    pub adv_ch_received: f64,
    /// Join request messages received.
    pub join_req_received: f64,
    /// Simulation time, seconds.
    pub time: f64,
    /// The remaining schema columns, in input column order.
    pub extra_features: Vec<f64>,
    pub label: Label,
}

impl FeatureRecord {
    /// Canonical feature vector: the ten named features in schema order
    /// followed by the extras. Length is always [`FEATURE_COUNT`].
    pub fn features(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(FEATURE_COUNT);
        v.push(self.energy_consumed);
        v.push(self.is_ch);
        v.push(self.adv_ch_sent);
        v.push(self.adv_sch_sent);
        v.push(self.data_sent_to_bs);
        v.push(self.dist_ch_to_bs);
        v.push(self.data_received);
        v.push(self.adv_ch_received);
        v.push(self.join_req_received);
        v.push(self.time);
        v.extend_from_slice(&self.extra_features);
        v
    }

    /// Builds a record from a canonical 23-feature vector.
    pub fn from_features(values: &[f64], label: Label) -> Result<FeatureRecord, DatasetError> {
        if values.len() != FEATURE_COUNT {
            return Err(DatasetError::Schema(format!(
                "expected {FEATURE_COUNT} features, got {}",
                values.len()
            )));
        }
        let rec = FeatureRecord {
            energy_consumed: values[0],
            is_ch: values[1],
            adv_ch_sent: values[2],
            adv_sch_sent: values[3],
            data_sent_to_bs: values[4],
            dist_ch_to_bs: values[5],
            data_received: values[6],
            adv_ch_received: values[7],
            join_req_received: values[8],
            time: values[9],
            extra_features: values[10..].to_vec(),
            label,
        };
        Ok(rec)
    }

    /// Checks the per-record invariants. Returns the violated constraint.
    pub fn validate(&self) -> Result<(), String> {
        if self.extra_features.len() != EXTRA_FEATURE_COUNT {
            return Err(format!(
                "expected {EXTRA_FEATURE_COUNT} extra features, got {}",
                self.extra_features.len()
            ));
        }
        if self.is_ch != 0.0 && self.is_ch != 1.0 {
            return Err(format!("is_ch must be 0 or 1, got {}", self.is_ch));
        }
        for (name, value) in [
            ("adv_ch_sent", self.adv_ch_sent),
            ("adv_sch_sent", self.adv_sch_sent),
            ("data_sent_to_bs", self.data_sent_to_bs),
            ("data_received", self.data_received),
            ("adv_ch_received", self.adv_ch_received),
            ("join_req_received", self.join_req_received),
            ("dist_ch_to_bs", self.dist_ch_to_bs),
        ] {
            if value < 0.0 {
                return Err(format!("{name} must be >= 0, got {value}"));
            }
        }
        Ok(())
    }
}

/// A labeled dataset with its column binding.
///
/// Columns are normalised at load time: the ten named features come first
/// (in schema order, keeping their original header spelling), the extras
/// follow in input order. `write_csv` emits this normalised layout, so a
/// written file reloads to an equal `Dataset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<FeatureRecord>,
    pub column_names: Vec<String>,
    pub label_column: String,
    class_counts: [usize; 5],
}

impl Dataset {
    pub fn new(records: Vec<FeatureRecord>, column_names: Vec<String>, label_column: String) -> Dataset {
        let mut counts = [0usize; 5];
        for rec in &records {
            counts[rec.label.index()] += 1;
        }
        Dataset {
            records,
            column_names,
            label_column,
            class_counts: counts,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.class_counts[label.index()]
    }

    pub fn class_counts(&self) -> [usize; 5] {
        self.class_counts
    }

    /// Canonical feature matrix, one row per record.
    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.features()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// SHA-256 over the canonical CSV serialization; stable across runs for
    /// equal datasets, used as training provenance.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("in-memory write");
        let digest = Sha256::digest(&buf);
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Per-class stratified split. Each class contributes
    /// `round(ratio * count)` records to the train side (round half up);
    /// membership is shuffled deterministically by `seed`, record order is
    /// preserved within both halves.
    pub fn stratified_split(
        &self,
        train_ratio: f64,
        seed: u64,
    ) -> Result<(Dataset, Dataset), DatasetError> {
        if !(train_ratio > 0.0 && train_ratio < 1.0) {
            return Err(DatasetError::Schema(format!(
                "train ratio must be in (0, 1), got {train_ratio}"
            )));
        }
        if self.records.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        let mut train_mask = vec![false; self.records.len()];
        for label in Label::ALL {
            let mut indices: Vec<usize> = self
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.label == label)
                .map(|(i, _)| i)
                .collect();
            if indices.is_empty() {
                continue;
            }
            let take = (train_ratio * indices.len() as f64 + 0.5).floor() as usize;
            let take = take.min(indices.len());
            let mut rng =
                ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &format!("split-{}", label.index())));
            indices.shuffle(&mut rng);
            for &i in indices.iter().take(take) {
                train_mask[i] = true;
            }
        }
        let mut train_records = Vec::new();
        let mut test_records = Vec::new();
        for (i, rec) in self.records.iter().enumerate() {
            if train_mask[i] {
                train_records.push(rec.clone());
            } else {
                test_records.push(rec.clone());
            }
        }
        Ok((
            Dataset::new(train_records, self.column_names.clone(), self.label_column.clone()),
            Dataset::new(test_records, self.column_names.clone(), self.label_column.clone()),
        ))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn write_csv_to(&self, out: &mut Vec<u8>) -> Result<(), DatasetError> {
        for (i, name) in self.column_names.iter().enumerate() {
            if i > 0 {
                out.push(b',');
            }
            out.extend_from_slice(name.as_bytes());
        }
        out.push(b',');
        out.extend_from_slice(self.label_column.as_bytes());
        out.push(b'\n');
        for rec in &self.records {
            let features = rec.features();
            for (i, value) in features.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write!(out, "{value}")?;
            }
            write!(out, ",{}", rec.label)?;
            out.push(b'\n');
        }
        Ok(())
    }
}

/// Options for [`load_csv_with`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Exact (normalised) header of the label column; overrides the built-in
    /// alias list.
    pub label_column: Option<String>,
    /// Raw label string -> canonical class name, applied before the built-in
    /// label aliases.
    pub label_map: Option<HashMap<String, String>>,
    /// Accept files without a label column (all records get `Normal` as a
    /// placeholder). Used by classification of unlabeled traffic.
    pub allow_unlabeled: bool,
}

/// Named-feature header aliases, normalised spelling (lowercase, alphanumeric
/// only). First entry per row is the canonical schema slot.
const NAMED_ALIASES: [(&str, &[&str]); NAMED_FEATURE_COUNT] = [
    ("energy_consumed", &["consumedenergy", "energyconsumed", "energyconsumption"]),
    ("is_ch", &["isch"]),
    ("adv_ch_sent", &["advs", "advchsend", "advchsent"]),
    ("adv_sch_sent", &["schs", "advschsend", "advschsent"]),
    ("data_sent_to_bs", &["datasenttobs"]),
    ("dist_ch_to_bs", &["distchtobs", "distancechtobs"]),
    ("data_received", &["datar", "datareceived"]),
    ("adv_ch_received", &["advr", "advchreceives", "advchreceived"]),
    ("join_req_received", &["joinr", "joinreqreceive", "joinreqreceived"]),
    ("time", &["time"]),
];

const LABEL_ALIASES: &[&str] = &["attacktype", "class", "label", "attack"];

fn normalize(header: &str) -> String {
    header
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_lowercase()
}

pub fn load_csv(path: &Path) -> Result<Dataset, DatasetError> {
    load_csv_with(path, &LoadOptions::default())
}

/// Loads a CSV with a header row, 23 numeric feature columns, and (unless
/// `allow_unlabeled`) one label column. Named features are bound by the
/// header alias table; the remaining columns fill `extra_features` in input
/// order.
pub fn load_csv_with(path: &Path, opts: &LoadOptions) -> Result<Dataset, DatasetError> {
    let bytes = fs::read(path)?;
    load_csv_bytes(&bytes, opts)
}

pub fn load_csv_bytes(bytes: &[u8], opts: &LoadOptions) -> Result<Dataset, DatasetError> {
    if bytes.is_empty() {
        if opts.allow_unlabeled {
            return Ok(Dataset::new(Vec::new(), default_column_names(), "Attack_Type".into()));
        }
        return Err(DatasetError::Schema("file is empty, no header row".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();

    let label_idx = find_label_column(&headers, opts)?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != label_idx).collect();
    if feature_cols.len() != FEATURE_COUNT {
        return Err(DatasetError::Schema(format!(
            "expected {FEATURE_COUNT} feature columns, found {}",
            feature_cols.len()
        )));
    }

    // slot -> input column index, named slots first, extras in input order.
    let mut slot_for_named: [Option<usize>; NAMED_FEATURE_COUNT] = [None; NAMED_FEATURE_COUNT];
    let mut extras: Vec<usize> = Vec::new();
    for &col in &feature_cols {
        let norm = normalize(&headers[col]);
        let named = NAMED_ALIASES
            .iter()
            .position(|(canon, aliases)| normalize(canon) == norm || aliases.contains(&norm.as_str()));
        match named {
            Some(slot) => {
                if slot_for_named[slot].is_some() {
                    return Err(DatasetError::Schema(format!(
                        "duplicate column for named feature '{}'",
                        NAMED_ALIASES[slot].0
                    )));
                }
                slot_for_named[slot] = Some(col);
            }
            None => extras.push(col),
        }
    }
    for (slot, binding) in slot_for_named.iter().enumerate() {
        if binding.is_none() {
            return Err(DatasetError::Schema(format!(
                "missing named feature column '{}'",
                NAMED_ALIASES[slot].0
            )));
        }
    }
    let ordered_cols: Vec<usize> = slot_for_named
        .iter()
        .map(|c| c.expect("checked above"))
        .chain(extras.iter().copied())
        .collect();
    let column_names: Vec<String> = ordered_cols.iter().map(|&c| headers[c].clone()).collect();
    let label_column = label_idx
        .map(|i| headers[i].clone())
        .unwrap_or_else(|| "Attack_Type".to_string());

    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row?;
        let data_row = row_idx + 2; // 1-based, after the header
        if row.len() != headers.len() {
            return Err(DatasetError::Parse {
                row: data_row,
                column: "-".into(),
                message: format!("expected {} cells, got {}", headers.len(), row.len()),
            });
        }
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for &col in &ordered_cols {
            let cell = row.get(col).unwrap_or("");
            let parsed: f64 = cell.parse().map_err(|_| DatasetError::Parse {
                row: data_row,
                column: headers[col].clone(),
                message: format!("non-numeric cell '{cell}'"),
            })?;
            values.push(parsed);
        }
        let label = match label_idx {
            Some(col) => {
                let raw = row.get(col).unwrap_or("");
                Label::parse(raw, opts.label_map.as_ref()).ok_or_else(|| DatasetError::Parse {
                    row: data_row,
                    column: headers[col].clone(),
                    message: format!("unknown class label '{raw}'"),
                })?
            }
            None => Label::Normal,
        };
        let rec = FeatureRecord::from_features(&values, label)?;
        if let Err(violation) = rec.validate() {
            return Err(DatasetError::Parse {
                row: data_row,
                column: "-".into(),
                message: violation,
            });
        }
        records.push(rec);
    }
    Ok(Dataset::new(records, column_names, label_column))
}

fn find_label_column(headers: &[String], opts: &LoadOptions) -> Result<Option<usize>, DatasetError> {
    if let Some(wanted) = &opts.label_column {
        let norm = normalize(wanted);
        let found = headers.iter().position(|h| normalize(h) == norm);
        return match found {
            Some(i) => Ok(Some(i)),
            None => Err(DatasetError::Schema(format!(
                "label column '{wanted}' not found in header"
            ))),
        };
    }
    let found = headers
        .iter()
        .position(|h| LABEL_ALIASES.contains(&normalize(h).as_str()));
    match found {
        Some(i) => Ok(Some(i)),
        None if opts.allow_unlabeled => Ok(None),
        None => Err(DatasetError::Schema(
            "no label column found (expected one of: Attack type, class, label)".into(),
        )),
    }
}

/// Canonical column names used by the simulator's output.
pub fn default_column_names() -> Vec<String> {
    [
        "Consumed_Energy",
        "Is_CH",
        "ADV_S",
        "SCH_S",
        "Data_Sent_To_BS",
        "Dist_CH_To_BS",
        "DATA_R",
        "ADV_R",
        "JOIN_R",
        "Time",
        "Node_Id",
        "Who_CH",
        "Dist_To_CH",
        "JOIN_S",
        "SCH_R",
        "Rank",
        "DATA_S",
        "Busy_Fraction",
        "RSSI_Var",
        "RSSI_Mean",
        "Retransmissions",
        "Noise_A",
        "Noise_B",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Per-column z-score scaler. Columns with zero variance transform to 0.
///
/// Standard deviation is the population estimate (divide by n), so a fitted
/// column transforms exactly onto mean 0, std 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub fitted_on: usize,
}

impl Scaler {
    pub fn fit(ds: &Dataset) -> Result<Scaler, DatasetError> {
        Scaler::fit_matrix(&ds.feature_matrix())
    }

    pub fn fit_matrix(rows: &[Vec<f64>]) -> Result<Scaler, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; dim];
        for row in rows {
            for ((var, v), m) in vars.iter_mut().zip(row).zip(&means) {
                let d = v - m;
                *var += d * d;
            }
        }
        let stds: Vec<f64> = vars.iter().map(|v| (v / n).sqrt()).collect();
        Ok(Scaler {
            means,
            stds,
            fitted_on: rows.len(),
        })
    }

    pub fn transform_vec(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, rec: &FeatureRecord) -> Vec<f64> {
        self.transform_vec(&rec.features())
    }

    pub fn transform_matrix(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_vec(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny_csv(labels: &[&str]) -> Vec<u8> {
        let names = default_column_names();
        let mut out = names.join(",");
        out.push_str(",Attack_Type\n");
        for (i, label) in labels.iter().enumerate() {
            let cells: Vec<String> = (0..FEATURE_COUNT).map(|c| format!("{}", (i + c) as f64)).collect();
            // keep is_ch (slot 1) in {0,1}
            let mut cells = cells;
            cells[1] = if i % 2 == 0 { "0".into() } else { "1".into() };
            out.push_str(&cells.join(","));
            out.push(',');
            out.push_str(label);
            out.push('\n');
        }
        out.into_bytes()
    }

    fn synthetic_dataset(counts: &[(Label, usize)]) -> Dataset {
        let mut records = Vec::new();
        let mut i = 0.0;
        for &(label, n) in counts {
            for _ in 0..n {
                let mut values = vec![0.0; FEATURE_COUNT];
                values[0] = i;
                values[9] = i * 2.0;
                i += 1.0;
                records.push(FeatureRecord::from_features(&values, label).unwrap());
            }
        }
        Dataset::new(records, default_column_names(), "Attack_Type".into())
    }

    #[test]
    fn loads_two_row_csv() {
        let bytes = tiny_csv(&["Normal", "Constant jamming"]);
        let ds = load_csv_bytes(&bytes, &LoadOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.count(Label::Normal), 1);
        assert_eq!(ds.count(Label::ConstantJamming), 1);
        assert_eq!(ds.records[0].extra_features.len(), EXTRA_FEATURE_COUNT);
    }

    #[test]
    fn rejects_22_feature_columns() {
        let names = default_column_names();
        let mut out = names[..22].join(",");
        out.push_str(",Attack_Type\n");
        out.push_str(&vec!["0"; 22].join(","));
        out.push_str(",Normal\n");
        let err = load_csv_bytes(out.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::Schema(_)), "{err}");
    }

    #[test]
    fn rejects_non_numeric_cell_with_position() {
        let bytes = tiny_csv(&["Normal"]);
        let text = String::from_utf8(bytes).unwrap().replace("22,Normal", "oops,Normal");
        let err = load_csv_bytes(text.as_bytes(), &LoadOptions::default()).unwrap_err();
        match err {
            DatasetError::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn rejects_missing_label_column() {
        let names = default_column_names();
        let mut out = names.join(",");
        out.push_str(",Whatever\n");
        let err = load_csv_bytes(out.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::Schema(_)));
    }

    #[test]
    fn binds_named_features_by_alias() {
        // WSN-DS style spellings, named columns scattered among extras.
        let mut headers: Vec<String> = (0..13).map(|i| format!("aux{i}")).collect();
        headers.splice(
            0..0,
            [
                "Consumed Energy",
                "Is CH",
                "ADV CH send",
                "ADV SCH send",
                "Data sent to BS",
                "Distance CH to BS",
                "Data received",
                "ADV CH receives",
                "Join REQ receive",
                "TIME",
            ]
            .map(String::from),
        );
        let mut text = headers.join(",");
        text.push_str(",class\n");
        let mut cells: Vec<String> = (0..FEATURE_COUNT).map(|c| format!("{}", c as f64 + 0.5)).collect();
        cells[1] = "1".into();
        text.push_str(&cells.join(","));
        text.push_str(",reactive jamming\n");
        let ds = load_csv_bytes(text.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.records[0].energy_consumed, 0.5);
        assert_eq!(ds.records[0].is_ch, 1.0);
        assert_eq!(ds.records[0].label, Label::ReactiveJamming);
    }

    #[test]
    fn label_map_remaps_foreign_class_names() {
        let bytes = tiny_csv(&["Flooding"]);
        let mut map = HashMap::new();
        map.insert("Flooding".to_string(), "constant".to_string());
        let opts = LoadOptions {
            label_map: Some(map),
            ..LoadOptions::default()
        };
        let ds = load_csv_bytes(&bytes, &opts).unwrap();
        assert_eq!(ds.records[0].label, Label::ConstantJamming);
    }

    #[test]
    fn round_trip_preserves_dataset() {
        let bytes = tiny_csv(&["Normal", "Constant jamming", "Reactive jamming"]);
        let ds = load_csv_bytes(&bytes, &LoadOptions::default()).unwrap();
        let mut out = Vec::new();
        ds.write_csv_to(&mut out).unwrap();
        let reloaded = load_csv_bytes(&out, &LoadOptions::default()).unwrap();
        assert_eq!(ds, reloaded);
    }

    #[test]
    fn split_exact_ratio() {
        let ds = synthetic_dataset(&[(Label::Normal, 10), (Label::ConstantJamming, 10)]);
        let (train, test) = ds.stratified_split(0.7, 1).unwrap();
        assert_eq!(train.count(Label::Normal), 7);
        assert_eq!(train.count(Label::ConstantJamming), 7);
        assert_eq!(test.count(Label::Normal), 3);
        assert_eq!(test.count(Label::ConstantJamming), 3);
        assert_eq!(train.len() + test.len(), ds.len());
    }

    #[test]
    fn split_two_records_half() {
        let ds = synthetic_dataset(&[(Label::Normal, 2)]);
        let (train, test) = ds.stratified_split(0.5, 9).unwrap();
        assert_eq!(train.len(), 1);
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn split_empty_dataset_errors() {
        let ds = synthetic_dataset(&[]);
        assert!(matches!(
            ds.stratified_split(0.5, 0),
            Err(DatasetError::EmptyDataset)
        ));
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let ds = synthetic_dataset(&[(Label::Normal, 31), (Label::RandomJamming, 17)]);
        let (a_train, a_test) = ds.stratified_split(0.7, 42).unwrap();
        let (b_train, b_test) = ds.stratified_split(0.7, 42).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        let mut merged: Vec<f64> = a_train
            .records
            .iter()
            .chain(&a_test.records)
            .map(|r| r.energy_consumed)
            .collect();
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut original: Vec<f64> = ds.records.iter().map(|r| r.energy_consumed).collect();
        original.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(merged, original);
    }

    #[test]
    fn scaler_simple_column() {
        let rows = vec![vec![0.0], vec![2.0]];
        let scaler = Scaler::fit_matrix(&rows).unwrap();
        assert_eq!(scaler.means[0], 1.0);
        assert_eq!(scaler.stds[0], 1.0);
        assert_eq!(scaler.transform_vec(&[0.0]), vec![-1.0]);
        assert_eq!(scaler.transform_vec(&[2.0]), vec![1.0]);
    }

    #[test]
    fn scaler_constant_column_maps_to_zero() {
        let rows = vec![vec![5.0], vec![5.0], vec![5.0]];
        let scaler = Scaler::fit_matrix(&rows).unwrap();
        assert_eq!(scaler.transform_vec(&[5.0]), vec![0.0]);
        assert_eq!(scaler.transform_vec(&[123.0]), vec![0.0]);
    }

    #[test]
    fn scaler_maps_means_to_zero() {
        let rows = vec![vec![1.0, 4.0], vec![3.0, 8.0], vec![5.0, 0.0]];
        let scaler = Scaler::fit_matrix(&rows).unwrap();
        let transformed = scaler.transform_vec(&scaler.means.clone());
        assert!(transformed.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn scaler_standardizes_training_data() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![i as f64 * 0.37 + 2.0, (i as f64).sin() * 3.0, 7.0])
            .collect();
        let scaler = Scaler::fit_matrix(&rows).unwrap();
        let transformed = scaler.transform_matrix(&rows);
        for col in 0..2 {
            let n = rows.len() as f64;
            let mean: f64 = transformed.iter().map(|r| r[col]).sum::<f64>() / n;
            let var: f64 = transformed.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "col {col} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "col {col} std {}", var.sqrt());
        }
    }

    proptest! {
        #[test]
        fn split_counts_do_not_depend_on_seed(seed_a in 0u64..1000, seed_b in 0u64..1000, n1 in 1usize..40, n2 in 1usize..40, ratio in 0.1f64..0.9) {
            let ds = synthetic_dataset(&[(Label::Normal, n1), (Label::DeceptiveJamming, n2)]);
            let (ta, _) = ds.stratified_split(ratio, seed_a).unwrap();
            let (tb, _) = ds.stratified_split(ratio, seed_b).unwrap();
            prop_assert_eq!(ta.class_counts(), tb.class_counts());
            let expected = (ratio * n1 as f64 + 0.5).floor() as usize;
            prop_assert_eq!(ta.count(Label::Normal), expected);
        }
    }
}
