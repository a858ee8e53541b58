//! CSV and JSON emission, and readers for both.
//!
//! A CSV file starts with `# key: value` header lines followed by an
//! ordinary header row and records. A JSON file is one object with
//! `header`, `summary` and `rows`.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Provenance recorded at the top of every output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub command: String,
    pub seed: u64,
    pub git_describe: String,
    pub config_sha256: String,
}

impl Header {
    fn lines(&self) -> [(&'static str, String); 4] {
        [
            ("command", self.command.clone()),
            ("seed", self.seed.to_string()),
            ("git_describe", self.git_describe.clone()),
            ("config_sha256", self.config_sha256.clone()),
        ]
    }

    fn from_lines<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Self, CliError> {
        let mut map = serde_json::Map::new();
        for line in lines {
            let (key, value) = line
                .trim_start_matches('#')
                .trim()
                .split_once(": ")
                .ok_or_else(|| CliError::Output(format!("bad header line {line:?}")))?;
            let value = match key {
                "seed" => Value::from(value.parse::<u64>().map_err(|e| CliError::Output(e.to_string()))?),
                _ => Value::from(value),
            };
            map.insert(key.to_string(), value);
        }
        Ok(serde_json::from_value(Value::Object(map))?)
    }
}

#[derive(Serialize)]
struct JsonDocument<'a, R> {
    header: &'a Header,
    summary: &'a Value,
    rows: &'a [R],
}

#[derive(Deserialize)]
struct OwnedDocument<R> {
    header: Header,
    #[serde(default)]
    summary: Value,
    rows: Vec<R>,
}

/// Renders rows with a header. `summary` only appears in JSON.
pub fn render<R: Serialize>(header: &Header, format: Format, rows: &[R], summary: &Value) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&JsonDocument { header, summary, rows })?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out = Vec::new();
            for (key, value) in header.lines() {
                writeln!(out, "# {key}: {value}").expect("writing to memory");
            }
            let mut writer = csv::Writer::from_writer(out);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.into_inner().map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

/// Writes to `path`, or to stdout when absent.
pub fn write(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// Parses CSV output written by [`render`].
pub fn parse_csv<R: DeserializeOwned>(text: &str) -> Result<(Header, Vec<R>), CliError> {
    let header = Header::from_lines(text.lines().take_while(|l| l.starts_with('#')))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = reader.deserialize().collect::<Result<Vec<R>, _>>()?;
    Ok((header, rows))
}

/// Parses JSON output written by [`render`].
pub fn parse_json<R: DeserializeOwned>(text: &str) -> Result<(Header, Value, Vec<R>), CliError> {
    let doc: OwnedDocument<R> = serde_json::from_str(text)?;
    Ok((doc.header, doc.summary, doc.rows))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<(Header, Vec<R>), CliError> {
    parse_csv(&fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}

pub fn read_json<R: DeserializeOwned>(path: &Path) -> Result<(Header, Value, Vec<R>), CliError> {
    parse_json(&fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}
