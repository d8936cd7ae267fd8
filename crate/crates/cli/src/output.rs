use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Command name, its arguments and the resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance<'a, A: Serialize> {
    pub schema: u32,
    pub command: &'static str,
    pub arguments: &'a A,
    pub config: &'a RunConfig,
}

impl<A: Serialize> Provenance<'_, A> {
    pub fn compact(&self) -> String {
        serde_json::to_string(self).expect("provenance serializes")
    }

    /// Pretty JSON document with the provenance fields next to `result`.
    pub fn document(&self, result: impl Serialize) -> String {
        let mut doc = serde_json::to_value(self).expect("provenance serializes");
        doc["result"] = json!(result);
        let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
        text.push('\n');
        text
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

pub fn write_stdout(text: &str) -> Result<(), CliError> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("writing to stdout: {e}")))
}

pub fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

/// Places `metadata` in a CDATA block right after the opening `<svg>` tag.
pub fn svg_with_metadata(svg: &str, metadata: &str) -> String {
    let cut = svg.find('\n').map_or(svg.len(), |i| i + 1);
    let safe = metadata.replace("]]>", "]]]]><![CDATA[>");
    format!("{}<metadata><![CDATA[{safe}]]></metadata>\n{}", &svg[..cut], &svg[cut..])
}
