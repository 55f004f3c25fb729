//! Dataset, matrix and dendrogram files.
//!
//! Datasets come as long CSV (`id,value` with an optional `group` column,
//! rows of one sequence contiguous and in trace order) or as a JSON object
//! mapping each id to its array of values, with an optional `"groups"`
//! object mapping ids to group names. Decimal output uses 17 significant
//! digits so every `f64` survives a round trip.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::ccd::{CcdSequence, StepDensity};
use crate::distance::{DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};
use crate::hcluster::{Dendrogram, Linkage};

/// Key reserved for group labels in JSON datasets.
pub const GROUPS_KEY: &str = "groups";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// An ordered collection of traces with optional group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sequences: Vec<CcdSequence>,
    groups: Vec<Option<String>>,
}

impl Dataset {
    pub fn new(sequences: Vec<CcdSequence>, groups: Vec<Option<String>>) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::InvalidConfig("dataset has no sequences".into()));
        }
        if groups.len() != sequences.len() {
            return Err(Error::InvalidConfig(format!(
                "{} group labels for {} sequences",
                groups.len(),
                sequences.len()
            )));
        }
        let ids: Vec<String> = sequences.iter().map(|s| s.id().to_string()).collect();
        crate::distance::check_unique(&ids)?;
        Ok(Dataset { sequences, groups })
    }

    pub fn ungrouped(sequences: Vec<CcdSequence>) -> Result<Self> {
        let groups = vec![None; sequences.len()];
        Dataset::new(sequences, groups)
    }

    pub fn sequences(&self) -> &[CcdSequence] {
        &self.sequences
    }

    pub fn groups(&self) -> &[Option<String>] {
        &self.groups
    }

    pub fn ids(&self) -> Vec<String> {
        self.sequences.iter().map(|s| s.id().to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn has_groups(&self) -> bool {
        self.groups.iter().any(Option::is_some)
    }
}

/// Formats a float like C's `%.17g`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..17).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        let dot = if frac.is_empty() { "" } else { "." };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{}{dot}{frac}e{esign}{:02}", &digits[..1], exp.abs());
    }
    if exp >= 0 {
        let split = exp as usize + 1;
        let frac = digits[split..].trim_end_matches('0');
        let dot = if frac.is_empty() { "" } else { "." };
        format!("{sign}{}{dot}{frac}", &digits[..split])
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", digits.trim_end_matches('0'))
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let reader = open(path)?;
    match format {
        Format::Csv => parse_dataset_csv(reader, path),
        Format::Json => parse_dataset_json(reader, path),
    }
}

/// Parses a long-CSV dataset; `origin` is only used in error messages.
pub fn parse_dataset_csv(reader: impl Read, origin: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(origin, e.to_string()))?
        .clone();
    let has_group = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["id", "value"] => false,
        ["id", "value", "group"] => true,
        other => {
            return Err(Error::parse(
                origin,
                format!("expected header `id,value[,group]`, found `{}`", other.join(",")),
            ))
        }
    };

    struct Pending {
        id: String,
        group: Option<String>,
        values: Vec<f64>,
    }
    let mut done: Vec<Pending> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut current: Option<Pending> = None;

    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(origin, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = &record[0];
        let value: f64 = record[1].parse().map_err(|_| {
            Error::parse(
                origin,
                format!("line {line}: `{}` is not a number (sequence `{id}`)", &record[1]),
            )
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::parse(
                origin,
                format!("line {line}: sequence `{id}` has negative or non-finite value {value}"),
            ));
        }
        let group = if has_group && !record[2].is_empty() {
            Some(record[2].to_string())
        } else {
            None
        };

        match current.as_mut() {
            Some(p) if p.id == id => {
                if p.group != group {
                    return Err(Error::parse(
                        origin,
                        format!("line {line}: sequence `{id}` changes group"),
                    ));
                }
                p.values.push(value);
            }
            _ => {
                if seen.contains_key(id) {
                    return Err(Error::parse(
                        origin,
                        format!("line {line}: rows of sequence `{id}` are not contiguous"),
                    ));
                }
                if let Some(p) = current.take() {
                    done.push(p);
                }
                seen.insert(id.to_string(), done.len());
                current = Some(Pending {
                    id: id.to_string(),
                    group,
                    values: vec![value],
                });
            }
        }
    }
    done.extend(current);

    let mut sequences = Vec::with_capacity(done.len());
    let mut groups = Vec::with_capacity(done.len());
    for p in done {
        sequences.push(CcdSequence::new(p.id, p.values)?);
        groups.push(p.group);
    }
    Dataset::new(sequences, groups).map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::parse(origin, msg),
        other => other,
    })
}

/// Parses a JSON dataset; `origin` is only used in error messages.
pub fn parse_dataset_json(reader: impl Read, origin: &Path) -> Result<Dataset> {
    let root: Value =
        serde_json::from_reader(reader).map_err(|e| Error::parse(origin, e.to_string()))?;
    let Value::Object(obj) = root else {
        return Err(Error::parse(origin, "top level must be an object"));
    };

    let mut group_map: Map<String, Value> = Map::new();
    let mut sequences = Vec::new();
    for (id, value) in obj {
        if id == GROUPS_KEY {
            match value {
                Value::Object(m) => group_map = m,
                _ => return Err(Error::parse(origin, "`groups` must be an object")),
            }
            continue;
        }
        let Value::Array(items) = value else {
            return Err(Error::parse(origin, format!("sequence `{id}` is not an array")));
        };
        let values = items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_f64().ok_or_else(|| {
                    Error::parse(origin, format!("sequence `{id}`, item {i}: not a number"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        sequences.push(CcdSequence::new(id, values)?);
    }

    let mut groups = Vec::with_capacity(sequences.len());
    for s in &sequences {
        match group_map.remove(s.id()) {
            None => groups.push(None),
            Some(Value::String(g)) => groups.push(Some(g)),
            Some(_) => {
                return Err(Error::parse(
                    origin,
                    format!("group of `{}` must be a string", s.id()),
                ))
            }
        }
    }
    if let Some(id) = group_map.keys().next() {
        return Err(Error::parse(origin, format!("group given for unknown sequence `{id}`")));
    }
    Dataset::new(sequences, groups).map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::parse(origin, msg),
        other => other,
    })
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    match format {
        Format::Csv => {
            let with_groups = dataset.has_groups();
            {
                let mut cw = csv::Writer::from_writer(&mut w);
                let header: &[&str] = if with_groups {
                    &["id", "value", "group"]
                } else {
                    &["id", "value"]
                };
                let csv_err = |e: csv::Error| Error::parse(path, e.to_string());
                cw.write_record(header).map_err(csv_err)?;
                for (seq, group) in dataset.sequences.iter().zip(&dataset.groups) {
                    for &v in seq.values() {
                        let v = format_f64(v);
                        if with_groups {
                            let g = group.as_deref().unwrap_or("");
                            cw.write_record([seq.id(), v.as_str(), g]).map_err(csv_err)?;
                        } else {
                            cw.write_record([seq.id(), v.as_str()]).map_err(csv_err)?;
                        }
                    }
                }
                cw.flush().map_err(|e| Error::io(path, e))?;
            }
        }
        Format::Json => {
            let mut obj = Map::new();
            for seq in &dataset.sequences {
                obj.insert(seq.id().to_string(), json!(seq.values()));
            }
            if dataset.has_groups() {
                let groups: Map<String, Value> = dataset
                    .sequences
                    .iter()
                    .zip(&dataset.groups)
                    .filter_map(|(s, g)| Some((s.id().to_string(), Value::String(g.clone()?))))
                    .collect();
                obj.insert(GROUPS_KEY.to_string(), Value::Object(groups));
            }
            write_json(&mut w, &Value::Object(obj), path)?;
        }
    }
    finish(w, path)
}

fn write_json(w: &mut impl Write, value: &impl Serialize, path: &Path) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::parse(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))
}

/// Writes a distance matrix.
///
/// CSV: the top-left cell names the distance, the rest of the first row and
/// column are labels. JSON: `{labels, kind, entries}`.
pub fn write_matrix(dm: &DistanceMatrix, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    match format {
        Format::Csv => {
            let csv_err = |e: csv::Error| Error::parse(path, e.to_string());
            let mut cw = csv::Writer::from_writer(&mut w);
            let corner = dm.kind().map(|k| k.to_string()).unwrap_or_default();
            cw.write_record(std::iter::once(corner.as_str()).chain(dm.labels().iter().map(String::as_str)))
                .map_err(csv_err)?;
            for (label, row) in dm.labels().iter().zip(dm.entries()) {
                let cells = std::iter::once(label.clone()).chain(row.iter().map(|&v| format_f64(v)));
                cw.write_record(cells).map_err(csv_err)?;
            }
            cw.flush().map_err(|e| Error::io(path, e))?;
        }
        Format::Json => write_json(&mut w, dm, path)?,
    }
    finish(w, path)
}

#[derive(Deserialize)]
struct MatrixFile {
    labels: Vec<String>,
    kind: Option<DistanceKind>,
    entries: Vec<Vec<f64>>,
}

pub fn read_matrix(path: impl AsRef<Path>, format: Format) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let reader = open(path)?;
    let (labels, entries, kind) = match format {
        Format::Json => {
            let f: MatrixFile = serde_json::from_reader(reader)
                .map_err(|e| Error::parse(path, e.to_string()))?;
            (f.labels, f.entries, f.kind)
        }
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
            let mut rows = rdr.records();
            let header = rows
                .next()
                .ok_or_else(|| Error::parse(path, "empty matrix file"))?
                .map_err(|e| Error::parse(path, e.to_string()))?;
            let kind = match &header[0] {
                "" => None,
                s => Some(s.parse::<DistanceKind>().map_err(|e| Error::parse(path, e))?),
            };
            let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
            let mut entries = Vec::with_capacity(labels.len());
            for (i, row) in rows.enumerate() {
                let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
                if labels.get(i).map(String::as_str) != Some(&row[0]) {
                    return Err(Error::parse(
                        path,
                        format!("row {} label `{}` does not match the header", i + 1, &row[0]),
                    ));
                }
                let values = row
                    .iter()
                    .skip(1)
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|_| Error::parse(path, format!("`{c}` is not a number")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                entries.push(values);
            }
            (labels, entries, kind)
        }
    };
    DistanceMatrix::new(labels, entries, kind)
}

#[derive(Serialize, Deserialize)]
struct DendrogramFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<DistanceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linkage: Option<Linkage>,
    #[serde(flatten)]
    tree: Dendrogram,
}

/// Writes `{kind?, linkage?, labels, merges}`.
pub fn write_dendrogram_json(
    dend: &Dendrogram,
    kind: Option<DistanceKind>,
    linkage: Option<Linkage>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let file = DendrogramFile {
        kind,
        linkage,
        tree: dend.clone(),
    };
    write_json(&mut w, &file, path)?;
    finish(w, path)
}

pub fn read_dendrogram_json(path: impl AsRef<Path>) -> Result<Dendrogram> {
    let path = path.as_ref();
    let file: DendrogramFile =
        serde_json::from_reader(open(path)?).map_err(|e| Error::parse(path, e.to_string()))?;
    Dendrogram::new(file.tree.labels().to_vec(), file.tree.merges().to_vec())
}

/// Writes flat cluster assignments as CSV: `id,cluster` plus a `group`
/// column when any group is known. Clusters are numbered from 1.
pub fn write_clusters(
    labels: &[String],
    clusters: &[usize],
    groups: &[Option<String>],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    {
        let csv_err = |e: csv::Error| Error::parse(path, e.to_string());
        let with_groups = groups.iter().any(Option::is_some);
        let mut cw = csv::Writer::from_writer(&mut w);
        if with_groups {
            cw.write_record(["id", "cluster", "group"]).map_err(csv_err)?;
        } else {
            cw.write_record(["id", "cluster"]).map_err(csv_err)?;
        }
        for (i, (label, c)) in labels.iter().zip(clusters).enumerate() {
            let c = (c + 1).to_string();
            if with_groups {
                let g = groups.get(i).and_then(|g| g.as_deref()).unwrap_or("");
                cw.write_record([label.as_str(), c.as_str(), g]).map_err(csv_err)?;
            } else {
                cw.write_record([label.as_str(), c.as_str()]).map_err(csv_err)?;
            }
        }
        cw.flush().map_err(|e| Error::io(path, e))?;
    }
    finish(w, path)
}

/// Writes densities as a JSON array with their groups attached.
pub fn write_densities_json(
    densities: &[StepDensity],
    groups: &[Option<String>],
    path: impl AsRef<Path>,
) -> Result<()> {
    #[derive(Serialize)]
    struct Entry<'a> {
        #[serde(skip_serializing_if = "Option::is_none")]
        group: Option<&'a str>,
        #[serde(flatten)]
        density: &'a StepDensity,
    }
    let path = path.as_ref();
    let mut w = create(path)?;
    let entries: Vec<Entry<'_>> = densities
        .iter()
        .enumerate()
        .map(|(i, d)| Entry {
            group: groups.get(i).and_then(|g| g.as_deref()),
            density: d,
        })
        .collect();
    write_json(&mut w, &entries, path)?;
    finish(w, path)
}

/// Writes `text` to `path`, creating or truncating it.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("<test>")
    }

    #[test]
    fn percent_g17_style() {
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(1.0), "1");
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(100.0), "100");
        assert_eq!(format_f64(-2.25), "-2.25");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_f64(1e20), "1e+20");
        assert_eq!(format_f64(1.0 / (4.0 * std::f64::consts::PI)), "0.079577471545947673");
    }

    proptest! {
        #[test]
        fn formatted_floats_parse_back_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_f64(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_dataset() {
        let ds = parse_dataset_csv("id,value\na,1\na,1\nb,2\nb,2".as_bytes(), &origin()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.sequences()[0].values(), &[1.0, 1.0]);
        assert_eq!(ds.sequences()[1].id(), "b");
        assert!(!ds.has_groups());
    }

    #[test]
    fn csv_dataset_with_groups() {
        let text = "id,value,group\na,1,X\na,2,X\nb,3,\nb,4,\n";
        let ds = parse_dataset_csv(text.as_bytes(), &origin()).unwrap();
        assert_eq!(ds.groups(), &[Some("X".to_string()), None]);
    }

    #[test]
    fn csv_dataset_errors() {
        let err = parse_dataset_csv("id,value\na,1\na,-1\n".as_bytes(), &origin()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("`a`"), "{msg}");
        assert!(matches!(
            parse_dataset_csv("id,value\na,1\nb,2\nb,2\n".as_bytes(), &origin()),
            Err(Error::TooShort { .. })
        ));
        let err = parse_dataset_csv("id,value\na,1\na,1\nb,2\nb,2\na,3\n".as_bytes(), &origin())
            .unwrap_err();
        assert!(err.to_string().contains("not contiguous"));
        assert!(parse_dataset_csv("name,y\na,1\n".as_bytes(), &origin()).is_err());
        assert!(parse_dataset_csv("id,value\na,x\na,1\n".as_bytes(), &origin()).is_err());
    }

    #[test]
    fn json_dataset() {
        let ds = parse_dataset_json(r#"{"a":[1,1,1,1]}"#.as_bytes(), &origin()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.sequences()[0].values(), &[1.0; 4]);

        let ds = parse_dataset_json(
            r#"{"z":[1,2],"a":[3,4],"groups":{"z":"FRS"}}"#.as_bytes(),
            &origin(),
        )
        .unwrap();
        assert_eq!(ds.ids(), vec!["z", "a"]);
        assert_eq!(ds.groups(), &[Some("FRS".to_string()), None]);
    }

    #[test]
    fn json_dataset_errors() {
        assert!(parse_dataset_json(r#"{"a":[1]}"#.as_bytes(), &origin()).is_err());
        assert!(parse_dataset_json(r#"{"a":[1,-2]}"#.as_bytes(), &origin()).is_err());
        assert!(parse_dataset_json(r#"{"a":"x"}"#.as_bytes(), &origin()).is_err());
        assert!(parse_dataset_json(r#"[1,2]"#.as_bytes(), &origin()).is_err());
        assert!(
            parse_dataset_json(r#"{"a":[1,2],"groups":{"b":"X"}}"#.as_bytes(), &origin()).is_err()
        );
        assert!(parse_dataset_json(r#"{"a":[1,2"#.as_bytes(), &origin()).is_err());
    }

    #[test]
    fn matrix_csv_round_trip_with_awkward_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let labels = vec!["a,b".to_string(), "c\"d".to_string(), "e".to_string()];
        let third = 1.0 / 3.0;
        let entries = vec![
            vec![0.0, third, 0.1],
            vec![third, 0.0, 2.0],
            vec![0.1, 2.0, 0.0],
        ];
        let dm = DistanceMatrix::new(labels, entries, Some(DistanceKind::MomentEuclidean { order: 5 })).unwrap();
        write_matrix(&dm, &path, Format::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("moments(r=5),\"a,b\",\"c\"\"d\",e\n"), "{text}");
        assert_eq!(read_matrix(&path, Format::Csv).unwrap(), dm);

        let jpath = dir.path().join("m.json");
        write_matrix(&dm, &jpath, Format::Json).unwrap();
        assert_eq!(read_matrix(&jpath, Format::Json).unwrap(), dm);
    }

    #[test]
    fn zero_matrix_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.csv");
        let dm = DistanceMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            Some(DistanceKind::L1),
        )
        .unwrap();
        write_matrix(&dm, &path, Format::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "l1,a,b\na,0,0\nb,0,0\n");
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dm = DistanceMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            None,
        )
        .unwrap();
        let err = write_matrix(&dm, "/nonexistent-dir/x/m.csv", Format::Csv).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
