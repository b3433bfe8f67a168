use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use endslab::GroupSpec;

/// Provenance block embedded in every report.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub group: Option<GroupSpec>,
    pub parameters: Value,
    pub tool_version: &'static str,
    pub budget: BudgetUsage,
    pub output_digest: String,
    /// Only recorded with `--timing`, so default reports stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
pub struct BudgetUsage {
    pub limit: usize,
    /// Elements materialized or visited, when the command tracks it.
    pub used: Option<usize>,
}

pub struct Run {
    pub command: &'static str,
    pub group: Option<GroupSpec>,
    pub parameters: Value,
    pub budget: usize,
    pub timing: bool,
    pub started: Instant,
}

impl Run {
    fn manifest(&self, used: Option<usize>, digest: String) -> Manifest {
        Manifest {
            command: self.command,
            group: self.group.clone(),
            parameters: self.parameters.clone(),
            tool_version: env!("CARGO_PKG_VERSION"),
            budget: BudgetUsage { limit: self.budget, used },
            output_digest: digest,
            wall_time_ms: self.timing.then(|| self.started.elapsed().as_millis()),
        }
    }

    /// `{"manifest": …, "report": …}`, digest taken over the compact report.
    pub fn json(&self, report: &impl Serialize, used: Option<usize>) -> String {
        let report = serde_json::to_value(report).expect("report serializes");
        let digest = sha256(serde_json::to_string(&report).unwrap().as_bytes());
        let doc = json!({ "manifest": self.manifest(used, digest), "report": report });
        let mut out = serde_json::to_string_pretty(&doc).unwrap();
        out.push('\n');
        out
    }

    /// CSV body preceded by a `# manifest:` comment line.
    pub fn csv(&self, body: &str, used: Option<usize>) -> String {
        let manifest = self.manifest(used, sha256(body.as_bytes()));
        format!("# manifest: {}\n{body}", serde_json::to_string(&manifest).unwrap())
    }
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}
