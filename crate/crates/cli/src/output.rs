use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

/// `# `-prefixed header lines for CSV outputs.
pub fn metadata(config: &impl Serialize) -> Vec<String> {
    vec![
        format!("nevorder {}", nevorder::VERSION),
        format!("config {}", serde_json::to_string(config).expect("config serialises")),
    ]
}

/// A JSON document with `version` and `config` fields ahead of `body`.
pub fn document(config: &impl Serialize, body: Value) -> String {
    let mut doc = json!({
        "version": nevorder::VERSION,
        "config": config,
    });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("document serialises");
    text.push('\n');
    text
}

pub fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
