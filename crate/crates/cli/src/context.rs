use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::CliConfig;
use crate::errors::CliError;
use crate::manifest::ManifestBuilder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum LogLevel {
    Quiet,
    Info,
    Debug,
}

/// Shared command state: seed, resolved configuration, output directory,
/// and the manifest accumulator.
pub struct Context {
    pub seed: u64,
    pub config: CliConfig,
    pub out_dir: PathBuf,
    pub log_level: LogLevel,
    manifest: ManifestBuilder,
}

impl Context {
    pub fn new(
        seed: u64,
        config_path: Option<&Path>,
        out_dir: PathBuf,
        log_level: LogLevel,
    ) -> Result<Self, CliError> {
        let mut config = CliConfig::load(config_path)?;
        config.model.seed = seed;
        std::fs::create_dir_all(&out_dir)
            .map_err(|e| CliError::io(format!("{}: {e}", out_dir.display())))?;
        let mut ctx = Self {
            seed,
            config,
            out_dir,
            log_level,
            manifest: ManifestBuilder::new(),
        };
        if let Some(path) = config_path {
            ctx.manifest.record_input(path);
        }
        Ok(ctx)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Resolve a path against the output directory unless it is absolute.
    pub fn out_path(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.out_dir.join(name)
        }
    }

    pub fn record_input(&mut self, path: &Path) {
        self.manifest.record_input(path);
    }

    pub fn record_output(&mut self, path: &Path) {
        self.manifest.record_output(path);
    }

    pub fn info(&self, message: impl AsRef<str>) {
        if self.log_level >= LogLevel::Info {
            println!("{}", message.as_ref());
        }
    }

    pub fn debug(&self, message: impl AsRef<str>) {
        if self.log_level >= LogLevel::Debug {
            eprintln!("{}", message.as_ref());
        }
    }

    pub fn write_manifest(self) -> Result<(), CliError> {
        let manifest_path = self.out_dir.join("manifest.json");
        let command: Vec<String> = std::env::args().collect();
        let config = serde_json::to_value(&self.config)
            .map_err(|e| CliError::data(e.to_string()))?;
        self.manifest
            .write(&manifest_path, command, self.seed, config)
    }
}
