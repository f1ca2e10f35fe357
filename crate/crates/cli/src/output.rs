//! Run manifest and file emission.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ioncavity::export::{Cell, Table};
use ioncavity::SystemParams;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cli::Format;
use crate::svg::Plot;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub hash: String,
    pub config_path: Option<PathBuf>,
    pub command: serde_json::Value,
    pub parameters: serde_json::Value,
    pub output_dir: Option<PathBuf>,
    pub version: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
}

/// sha256 over the command, the resolved parameters and the code version.
pub fn manifest_hash(command: &serde_json::Value, parameters: &serde_json::Value) -> String {
    let payload = serde_json::json!({
        "command": command,
        "parameters": parameters,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let digest = Sha256::digest(payload.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Sink {
    out: Option<PathBuf>,
    format: Format,
    plot: bool,
    started: Instant,
    manifest: RunManifest,
}

impl Sink {
    pub fn new(
        out: Option<PathBuf>,
        format: Format,
        plot: bool,
        config_path: Option<PathBuf>,
        command: serde_json::Value,
        parameters: serde_json::Value,
    ) -> Result<Self> {
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let hash = manifest_hash(&command, &parameters);
        Ok(Sink {
            manifest: RunManifest {
                hash,
                config_path,
                command,
                parameters,
                output_dir: out.clone(),
                version: env!("CARGO_PKG_VERSION").to_owned(),
                wall_time_s: 0.0,
                files: Vec::new(),
            },
            out,
            format,
            plot,
            started: Instant::now(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.manifest.hash
    }

    /// Sink writing into a subdirectory, sharing nothing but the settings.
    pub fn child(
        &self,
        name: &str,
        command: serde_json::Value,
        params: &SystemParams,
    ) -> Result<Sink> {
        let out = self.out.as_ref().map(|d| d.join(name));
        Sink::new(
            out,
            self.format,
            self.plot,
            None,
            command,
            serde_json::to_value(params)?,
        )
    }

    fn write(&mut self, file: &str, text: &str) -> Result<()> {
        match &self.out {
            Some(dir) => {
                let path = dir.join(file);
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
                self.manifest.files.push(file.to_owned());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    pub fn table(&mut self, name: &str, mut table: Table) -> Result<()> {
        table
            .comments
            .insert(0, format!("manifest sha256 {}", self.manifest.hash));
        match self.format {
            Format::Csv => self.write(&format!("{name}.csv"), &table.to_csv()),
            Format::Json => {
                let text = serde_json::to_string_pretty(&table_json(&table))? + "\n";
                self.write(&format!("{name}.json"), &text)
            }
        }
    }

    pub fn plot(&mut self, name: &str, plot: Plot) -> Result<()> {
        if !self.plot || self.out.is_none() {
            return Ok(());
        }
        let svg = plot.render(&format!("manifest sha256 {}", self.manifest.hash));
        self.write(&format!("{name}.svg"), &svg)
    }

    pub fn finish(mut self) -> Result<()> {
        let Some(dir) = self.out.clone() else {
            return Ok(());
        };
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        write_file(&dir.join("manifest.json"), &text)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cell_json(c: &Cell) -> serde_json::Value {
    match c {
        Cell::Float(v) => serde_json::Number::from_f64(*v)
            .map_or(serde_json::Value::Null, serde_json::Value::Number),
        Cell::Int(v) => (*v).into(),
        Cell::Text(s) => s.clone().into(),
        Cell::Bool(b) => (*b).into(),
        Cell::Empty => serde_json::Value::Null,
    }
}

fn table_json(t: &Table) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = t
        .rows
        .iter()
        .map(|r| {
            let obj: serde_json::Map<String, serde_json::Value> = t
                .columns
                .iter()
                .zip(r)
                .map(|(k, c)| (k.clone(), cell_json(c)))
                .collect();
            obj.into()
        })
        .collect();
    serde_json::json!({ "comments": t.comments, "columns": t.columns, "rows": rows })
}
