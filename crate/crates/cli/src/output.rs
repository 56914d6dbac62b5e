use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub fn csv_document(
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Document<'a, T> {
    command: &'a str,
    columns: &'a [&'a str],
    data: &'a T,
}

/// `{command, columns, data}`, pretty-printed with a trailing newline.
pub fn json_document<T: Serialize>(
    command: &str,
    columns: &[&str],
    data: &T,
) -> Result<String, CliError> {
    let doc = Document {
        command,
        columns,
        data,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn emit(body: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}
