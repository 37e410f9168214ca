use std::fs;
use std::path::{Path, PathBuf};

use blocklab_core::Scenario;

use crate::failure::Failure;
use crate::output::{InputFile, Output, RunManifest};

pub mod auction;
pub mod feemarket;
pub mod simulate;
pub mod solve;
pub mod tournament;

/// Global flags shared by every command.
pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub args: Vec<String>,
}

/// A command's loaded inputs, collected for the manifest.
pub struct Run {
    pub scenario: Scenario,
    scenario_path: Option<PathBuf>,
    inputs: Vec<InputFile>,
}

impl Context {
    /// Loads the scenario from `positional` or `--config`; defaults when
    /// neither is given.
    pub fn load(&self, positional: Option<&Path>) -> Result<Run, Failure> {
        let path = match (positional, &self.config) {
            (Some(_), Some(_)) => return Err(Failure::input("scenario given both as an argument and with --config")),
            (Some(p), None) => Some(p.to_path_buf()),
            (None, c) => c.clone(),
        };
        let mut run = Run {
            scenario: Scenario::default(),
            scenario_path: None,
            inputs: Vec::new(),
        };
        if let Some(p) = path {
            let text = run.read(&p)?;
            run.scenario = Scenario::from_toml(&text).map_err(|e| Failure::from(e).context(p.display()))?;
            run.scenario_path = Some(p);
        }
        Ok(run)
    }

    /// Writes the manifest and hands back the output sink.
    pub fn begin(&self, command: &str, run: &Run) -> Result<Output, Failure> {
        let out = Output::new(self.out.clone());
        out.begin(&RunManifest {
            command: command.into(),
            args: self.args.clone(),
            scenario: run.scenario_path.as_ref().map(|p| p.display().to_string()),
            seed: self.seed,
            out_dir: self.out.as_ref().map(|p| p.display().to_string()),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: run.scenario.config_hash(),
            inputs: run.inputs.clone(),
        })?;
        Ok(out)
    }
}

impl Run {
    /// Reads an input file and records its hash.
    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputFile::new(path, &bytes));
        String::from_utf8(bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

/// Fixed-point rendering used in every float column.
pub fn fixed(x: f64) -> String {
    format!("{x:.6}")
}
