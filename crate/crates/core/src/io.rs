//! Comma-separated file formats and atomic writes.
//!
//! | file            | header                               |
//! |-----------------|--------------------------------------|
//! | edges           | `u,v,month`                          |
//! | users           | `user,reg_month,m,intrinsic`         |
//! | profiles        | `user,terms` (`;`-separated ids)     |
//! | records         | `j,h,V,C,S,N,R` (`R` empty if unset) |
//! | recommendations | `j,h,probability`                    |
//! | metrics         | `method,month,precision,avg_utility` |
//!
//! The `m` and `intrinsic` user columns are optional. Floats are written in
//! shortest round-trip form, so every write/read pair is lossless.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluation::{MetricsRow, MonthLabel};
use crate::features::{FeatureRecord, ValueConfig};
use crate::graph::{TemporalGraph, UserId};
use crate::inference::RecommendationList;
use crate::model::Theta;
use crate::proximity::ProfileStore;

/// Users file contents: registrations and optional per-user value overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserTable {
    pub users: Vec<(UserId, u32)>,
    pub m: HashMap<UserId, f64>,
    pub intrinsic: HashMap<UserId, f64>,
}

impl UserTable {
    /// Copies the per-user overrides into `cfg`.
    pub fn apply(&self, cfg: &mut ValueConfig) {
        cfg.m.extend(self.m.iter().map(|(k, v)| (*k, *v)));
        cfg.intrinsic
            .extend(self.intrinsic.iter().map(|(k, v)| (*k, *v)));
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Data rows tagged with their 1-based line number.
type NumberedRows = Vec<(u64, Vec<String>)>;

/// Rows of a headered CSV file with the 1-based line number of each row.
fn read_rows(
    path: &Path,
    required: &[&str],
    optional: &[&str],
) -> Result<(Vec<String>, NumberedRows)> {
    let file = display(path);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(&file, io),
            other => Error::Parse {
                file: file.clone(),
                line: 1,
                message: format!("{other:?}"),
            },
        })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(&file, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let n_req = required.len();
    let header_ok = header.len() >= n_req
        && header.len() <= n_req + optional.len()
        && header
            .iter()
            .zip(required.iter().chain(optional))
            .all(|(h, e)| h == e);
    if !header_ok {
        let mut expected = required.join(",");
        if !optional.is_empty() {
            let _ = write!(expected, "[,{}]", optional.join(","));
        }
        return Err(Error::Parse {
            file,
            line: 1,
            message: format!("expected header `{expected}`, found `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&file, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok((header, rows))
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(file, io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            file: file.to_string(),
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse {
            file: file.to_string(),
            line,
            message: format!("{other:?}"),
        },
    }
}

fn field<T: FromStr>(file: &str, line: u64, name: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| Error::Parse {
        file: file.to_string(),
        line,
        message: format!("bad {name} `{raw}`: {e}"),
    })
}

pub fn load_edges(path: &Path) -> Result<Vec<(UserId, UserId, u32)>> {
    let file = display(path);
    let (_, rows) = read_rows(path, &["u", "v", "month"], &[])?;
    rows.iter()
        .map(|(line, r)| {
            Ok((
                field(&file, *line, "u", &r[0])?,
                field(&file, *line, "v", &r[1])?,
                field(&file, *line, "month", &r[2])?,
            ))
        })
        .collect()
}

pub fn load_users(path: &Path) -> Result<UserTable> {
    let file = display(path);
    let (header, rows) = read_rows(path, &["user", "reg_month"], &["m", "intrinsic"])?;
    let mut table = UserTable::default();
    for (line, r) in &rows {
        let id: UserId = field(&file, *line, "user", &r[0])?;
        table
            .users
            .push((id, field(&file, *line, "reg_month", &r[1])?));
        if header.len() > 2 && !r[2].is_empty() {
            table.m.insert(id, field(&file, *line, "m", &r[2])?);
        }
        if header.len() > 3 && !r[3].is_empty() {
            table
                .intrinsic
                .insert(id, field(&file, *line, "intrinsic", &r[3])?);
        }
    }
    Ok(table)
}

/// Loads and validates the graph from an edges file and a users file.
pub fn load_graph(edges: &Path, users: &Path) -> Result<TemporalGraph> {
    let table = load_users(users)?;
    TemporalGraph::new(table.users, load_edges(edges)?)
}

pub fn load_profiles(path: &Path) -> Result<ProfileStore> {
    let file = display(path);
    let (_, rows) = read_rows(path, &["user", "terms"], &[])?;
    let mut store = ProfileStore::new();
    for (line, r) in &rows {
        let id: UserId = field(&file, *line, "user", &r[0])?;
        let terms = r[1]
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| field::<u32>(&file, *line, "term", t))
            .collect::<Result<Vec<u32>>>()?;
        if store.get(id).is_ok() {
            return Err(Error::Integrity(format!(
                "{file}: profile of user {id} repeated"
            )));
        }
        store.insert(id, terms);
    }
    Ok(store)
}

pub fn format_edges(graph: &TemporalGraph) -> String {
    let mut edges: Vec<(UserId, UserId, u32)> = graph
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (graph.user_id(e.a), graph.user_id(e.b));
            (a.min(b), a.max(b), e.month)
        })
        .collect();
    edges.sort_unstable_by_key(|&(u, v, m)| (u, m, v));
    let mut s = String::from("u,v,month\n");
    for (u, v, m) in edges {
        let _ = writeln!(s, "{u},{v},{m}");
    }
    s
}

pub fn format_users(graph: &TemporalGraph, table: Option<&UserTable>) -> String {
    let mut s = String::from("user,reg_month,m,intrinsic\n");
    for (id, reg) in graph.users() {
        let m = table
            .and_then(|t| t.m.get(&id))
            .map(f64::to_string)
            .unwrap_or_default();
        let iv = table
            .and_then(|t| t.intrinsic.get(&id))
            .map(f64::to_string)
            .unwrap_or_default();
        let _ = writeln!(s, "{id},{reg},{m},{iv}");
    }
    s
}

pub fn format_profiles(profiles: &ProfileStore) -> String {
    let mut s = String::from("user,terms\n");
    for id in profiles.users() {
        let terms = profiles.get(id).unwrap_or_default();
        let joined: Vec<String> = terms.iter().map(u32::to_string).collect();
        let _ = writeln!(s, "{id},{}", joined.join(";"));
    }
    s
}

pub fn format_records(records: &[FeatureRecord]) -> String {
    let mut s = String::from("j,h,V,C,S,N,R\n");
    for r in records {
        let label = r.label.map(|l| u8::from(l).to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.pair.0, r.pair.1, r.v, r.c, r.s, r.n, label
        );
    }
    s
}

pub fn load_records(path: &Path) -> Result<Vec<FeatureRecord>> {
    let file = display(path);
    let (_, rows) = read_rows(path, &["j", "h", "V", "C", "S", "N", "R"], &[])?;
    rows.iter()
        .map(|(line, r)| {
            let label = match r[6].as_str() {
                "" => None,
                "0" => Some(false),
                "1" => Some(true),
                other => {
                    return Err(Error::Parse {
                        file: file.clone(),
                        line: *line,
                        message: format!("label must be 0, 1 or empty, got `{other}`"),
                    })
                }
            };
            let rec = FeatureRecord {
                pair: (
                    field(&file, *line, "j", &r[0])?,
                    field(&file, *line, "h", &r[1])?,
                ),
                v: field(&file, *line, "V", &r[2])?,
                c: field(&file, *line, "C", &r[3])?,
                s: field(&file, *line, "S", &r[4])?,
                n: field(&file, *line, "N", &r[5])?,
                label,
            };
            rec.validate(*line as usize).map_err(|e| Error::Parse {
                file: file.clone(),
                line: *line,
                message: e.to_string(),
            })?;
            Ok(rec)
        })
        .collect()
}

pub fn format_recommendations(list: &RecommendationList) -> String {
    let mut s = String::from("j,h,probability\n");
    for ((j, h), p) in &list.items {
        let _ = writeln!(s, "{j},{h},{p}");
    }
    s
}

pub fn load_recommendations(path: &Path) -> Result<Vec<((UserId, UserId), f64)>> {
    let file = display(path);
    let (_, rows) = read_rows(path, &["j", "h", "probability"], &[])?;
    rows.iter()
        .map(|(line, r)| {
            Ok((
                (
                    field(&file, *line, "j", &r[0])?,
                    field(&file, *line, "h", &r[1])?,
                ),
                field(&file, *line, "probability", &r[2])?,
            ))
        })
        .collect()
}

pub fn format_metrics(rows: &[MetricsRow]) -> String {
    let mut s = String::from("method,month,precision,avg_utility\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.method, r.month, r.precision, r.avg_utility
        );
    }
    s
}

pub fn load_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let file = display(path);
    let (_, rows) = read_rows(path, &["method", "month", "precision", "avg_utility"], &[])?;
    rows.iter()
        .map(|(line, r)| {
            Ok(MetricsRow {
                method: r[0].clone(),
                month: field::<MonthLabel>(&file, *line, "month", &r[1])?,
                precision: field(&file, *line, "precision", &r[2])?,
                avg_utility: field(&file, *line, "avg_utility", &r[3])?,
            })
        })
        .collect()
}

pub fn load_theta(path: &Path) -> Result<Theta> {
    let file = display(path);
    let text = fs::read_to_string(path).map_err(|e| Error::io(&file, e))?;
    Theta::from_text(&text, &file)
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file = display(path);
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("output path `{file}` has no file name")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(display(&tmp), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(&file, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir() -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("linkrec-io-{}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn parse_error_reports_line() {
        let d = tmp_dir();
        let p = d.join("edges_bad.csv");
        fs::write(&p, "u,v,month\n1,2,1\n1,x,2\n").unwrap();
        match load_edges(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&p, "a,b,c\n").unwrap();
        assert!(matches!(load_edges(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn users_optional_columns() {
        let d = tmp_dir();
        let p = d.join("users.csv");
        fs::write(&p, "user,reg_month\n1,1\n2,3\n").unwrap();
        let t = load_users(&p).unwrap();
        assert_eq!(t.users, vec![(1, 1), (2, 3)]);
        fs::write(&p, "user,reg_month,m,intrinsic\n1,1,2.5,\n2,3,,4\n").unwrap();
        let t = load_users(&p).unwrap();
        assert_eq!(t.m[&1], 2.5);
        assert_eq!(t.intrinsic[&2], 4.0);
        assert!(!t.m.contains_key(&2));
    }

    #[test]
    fn records_reject_bad_label() {
        let d = tmp_dir();
        let p = d.join("records.csv");
        fs::write(&p, "j,h,V,C,S,N,R\n1,2,1,1,1,1,2\n").unwrap();
        assert!(matches!(
            load_records(&p),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
