//! Optional TOML configuration. Every field may also be given as a flag; flags
//! win. Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use irradiance_core::ingest::{Season, SeasonTable};
use irradiance_core::pv::PanelSpec;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const CONFIG_ENV: &str = "IRRADIANCE_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: Vec<PathBuf>,
    pub m_c: Option<f64>,
    pub tma_n: Option<usize>,
    pub tma_l: Option<usize>,
    pub cadence_min: Option<u32>,
    pub day_offset: Option<u32>,
    pub seasons: Option<Vec<Season>>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replicates: Option<u32>,
    pub model: Option<PathBuf>,
    pub panel: Option<PathBuf>,
    pub series: Option<u32>,
    pub ambient_c: Option<f64>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.input.iter_mut().for_each(resolve);
        for p in [&mut cfg.output_dir, &mut cfg.model, &mut cfg.panel].into_iter().flatten() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn season_table(&self) -> CliResult<SeasonTable> {
        match &self.seasons {
            None => Ok(SeasonTable::default()),
            Some(s) => SeasonTable::new(s.clone()).map_err(|e| CliError::Usage(format!("seasons: {e}"))),
        }
    }
}

/// Reads a panel datasheet in TOML with the field names of [`PanelSpec`].
pub fn load_panel(path: &Path) -> CliResult<PanelSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })
}
