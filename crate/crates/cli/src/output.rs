use std::io::Write;
use std::path::Path;

use anyhow::Context;
use kinex::QuadElem;
use serde::Serialize;

use crate::config::Format;

/// One output file: a JSON document or a flat CSV table.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(stem: &str, doc: &T) -> anyhow::Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(doc)?;
        bytes.push(b'\n');
        Ok(Self {
            name: format!("{stem}.json"),
            bytes,
        })
    }

    pub fn csv<T: Serialize>(stem: &str, rows: &[T]) -> anyhow::Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        Ok(Self {
            name: format!("{stem}.csv"),
            bytes: w.into_inner().context("flushing csv")?,
        })
    }

    pub fn pick<T: Serialize, R: Serialize>(
        format: Format,
        stem: &str,
        doc: &T,
        rows: &[R],
    ) -> anyhow::Result<Self> {
        match format {
            Format::Json => Self::json(stem, doc),
            Format::Csv => Self::csv(stem, rows),
        }
    }
}

/// Writes each artifact next to its final name and renames it into place.
/// Without a directory only the first artifact is printed to stdout.
pub fn emit(out: Option<&Path>, artifacts: &[Artifact]) -> anyhow::Result<()> {
    let Some(dir) = out else {
        if let Some(first) = artifacts.first() {
            std::io::stdout().write_all(&first.bytes)?;
        }
        return Ok(());
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for art in artifacts {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&art.bytes)?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file()
                .set_permissions(std::fs::Permissions::from_mode(0o644))?;
        }
        tmp.as_file().sync_all()?;
        let dest = dir.join(&art.name);
        tmp.persist(&dest)
            .with_context(|| format!("renaming into {}", dest.display()))?;
    }
    Ok(())
}

/// Exact string form.
pub fn exact(x: &QuadElem) -> String {
    x.to_string()
}

/// Display-only decimal form.
pub fn decimal(x: &QuadElem) -> String {
    format!("{:.12e}", x.to_f64())
}
