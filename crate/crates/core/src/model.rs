//! Persisted model bundle: everything the simulator needs without raw data.
//!
//! The file is JSON with a top-level `format_version` (`"MAJOR.MINOR"`).
//! Readers accept any minor revision of [`FORMAT_MAJOR`] and reject other
//! majors before touching the remaining fields.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::daily_fit::DEFAULT_M_C;
use crate::error::{Error, Result};
use crate::ingest::SeasonTable;
use crate::residual_maps::{build_grid, build_maps_from_columns, MapSet, MstarGrid};
use crate::trends::TrendModel;

pub const FORMAT_MAJOR: u32 = 1;
pub const FORMAT_VERSION: &str = "1.0";

/// Rate bandwidth of the reference maps.
pub const REFERENCE_BANDWIDTH: f64 = 0.0364;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_at_unix: Option<u64>,
    #[serde(default)]
    pub days_fitted: usize,
    #[serde(default)]
    pub days_rejected: usize,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: String,
    pub m_c: f64,
    pub seasons: SeasonTable,
    pub trends: TrendModel,
    pub maps: MapSet,
    pub provenance: Provenance,
}

fn major_of(version: &str) -> Option<u32> {
    version.split('.').next()?.parse().ok()
}

impl ModelFile {
    pub fn new(m_c: f64, seasons: SeasonTable, trends: TrendModel, maps: MapSet, provenance: Provenance) -> Result<Self> {
        let m = Self { format_version: FORMAT_VERSION.to_string(), m_c, seasons, trends, maps, provenance };
        m.validate()?;
        Ok(m)
    }

    pub fn grid(&self) -> MstarGrid {
        self.maps.grid
    }

    /// Checks that the maps share the grid implied by `⟨B⟩` and `m_c` and
    /// cover exactly the seasons of the table.
    pub fn validate(&self) -> Result<()> {
        if !(self.m_c > 0.0) {
            return Err(Error::Model(format!("m_c = {}", self.m_c)));
        }
        let expected = build_grid(self.trends.mean_b, self.m_c)?;
        if expected != self.maps.grid {
            return Err(Error::Model(format!(
                "grid J = {} but mean B = {} and m_c = {} imply J = {}",
                self.maps.grid.j, self.trends.mean_b, self.m_c, expected.j
            )));
        }
        if !(self.maps.bandwidth > 0.0) || !(self.maps.envelope_bandwidth > 0.0) {
            return Err(Error::Model("non-positive bandwidth".into()));
        }
        let mut ids = self.seasons.ids();
        let mut map_ids: Vec<u8> = self.maps.seasons.iter().map(|s| s.season).collect();
        ids.sort_unstable();
        map_ids.sort_unstable();
        if ids != map_ids {
            return Err(Error::Model(format!("maps for seasons {map_ids:?}, table has {ids:?}")));
        }
        let n = self.maps.grid.len();
        for s in &self.maps.seasons {
            if s.rates.columns.len() != n || s.residual_columns.len() != n || s.discrete.mass.len() != n {
                return Err(Error::Model(format!("season {} columns do not match the grid", s.season)));
            }
            if s.rates.grid != self.maps.grid || s.discrete.grid != self.maps.grid {
                return Err(Error::Model(format!("season {} uses a different grid", s.season)));
            }
        }
        Ok(())
    }

    pub fn from_reader<R: Read>(mut src: R) -> Result<Self> {
        let mut text = String::new();
        src.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Model(format!("not a JSON document: {e}")))?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Model("missing format_version".into()))?;
        match major_of(version) {
            Some(FORMAT_MAJOR) => {}
            _ => {
                return Err(Error::UnsupportedVersion { found: version.to_string(), supported: FORMAT_MAJOR })
            }
        }
        let model: Self = serde_json::from_value(value).map_err(|e| Error::Model(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// Reference model: published trend coefficients and residual
    /// distributions, with synthetic symmetric rate maps whose spread peaks at
    /// noon, bandwidth 0.0364.
    pub fn reference() -> Self {
        let trends = TrendModel::reference();
        let seasons = SeasonTable::default();
        let grid = build_grid(trends.mean_b, DEFAULT_M_C).expect("reference grid");
        let (rates, nodes) = reference_columns(&grid);
        let per_season = seasons.ids().into_iter().map(|s| (s, rates.clone(), nodes.clone())).collect();
        let maps = build_maps_from_columns(&grid, per_season, Some(REFERENCE_BANDWIDTH), None)
            .expect("reference maps");
        Self::new(
            DEFAULT_M_C,
            seasons,
            trends,
            maps,
            Provenance { source: "reference".into(), ..Default::default() },
        )
        .expect("reference model is consistent")
    }
}

impl ModelFile {
    /// Replaces every season's maps with narrow symmetric rate columns
    /// (`±spread`, `±spread/2`, `0`) and node residuals of half that spread.
    pub fn with_concentrated_maps(mut self, spread: f64) -> Result<Self> {
        if !(spread > 0.0) {
            return Err(Error::Model(format!("spread {spread}")));
        }
        let grid = self.grid();
        let offsets = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let mut rates: Vec<Vec<f64>> = vec![offsets.iter().map(|z| z * spread).collect(); grid.len()];
        rates[0].clear();
        let nodes: Vec<Vec<f64>> = vec![offsets.iter().map(|z| z * 0.5 * spread).collect(); grid.len()];
        let per_season = self.seasons.ids().into_iter().map(|s| (s, rates.clone(), nodes.clone())).collect();
        self.maps = build_maps_from_columns(&grid, per_season, None, None)?;
        self.provenance.notes.push(format!("concentrated maps, spread {spread}"));
        self.validate()?;
        Ok(self)
    }
}

fn reference_columns(grid: &MstarGrid) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    const RATE_OFFSETS: [f64; 11] = [0.0, 0.0, 0.0, -0.5, 0.5, -1.0, 1.0, -1.5, 1.5, -2.0, 2.0];
    const NODE_OFFSETS: [f64; 5] = [0.0, -0.5, 0.5, -1.0, 1.0];
    let mut rates = Vec::with_capacity(grid.len());
    let mut nodes = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let m = grid.node(k);
        let taper = 1.0 - m * m;
        let sigma = 0.05 + 0.25 * taper;
        let rho = 0.02 + 0.15 * taper;
        rates.push(if k == 0 { Vec::new() } else { RATE_OFFSETS.iter().map(|z| z * sigma).collect() });
        nodes.push(NODE_OFFSETS.iter().map(|z| z * rho).collect());
    }
    (rates, nodes)
}
