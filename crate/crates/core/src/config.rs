use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DbhParams, RadiusParams};
use crate::skeleton::{FrequencyCorrection, SkeletonParams, TipMode};

/// Where a tree's DBH comes from when no measured value is supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbhSource {
    Measured,
    #[default]
    Estimated,
    Allometric,
}

/// Run configuration. Precedence: defaults, then a JSON file, then flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    pub alpha: f64,
    pub n_bins: usize,
    pub freq_threshold: u64,
    pub leaf_on: bool,
    /// kg/m^3; AGB is null without it.
    pub wood_density: Option<f64>,
    pub dbh_source: DbhSource,
    /// `(a, b)` in `dbh_cm = a * height_m^b`.
    pub dbh_allometry: Option<[f64; 2]>,
    pub min_tree_height: f64,
    pub min_tree_points: usize,
    pub merge_distance: f64,
    pub radial_segments: usize,
    pub seed: u64,
    pub correction: FrequencyCorrection,
    pub tip_mode: TipMode,
    pub section_width: Option<f64>,
    pub min_branch: Option<f64>,
    pub dbh: DbhParams,
    pub radius: RadiusParams,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 10,
            alpha: 20.0,
            n_bins: 100,
            freq_threshold: 0,
            leaf_on: false,
            wood_density: None,
            dbh_source: DbhSource::Estimated,
            dbh_allometry: None,
            min_tree_height: 3.0,
            min_tree_points: 1000,
            merge_distance: 0.5,
            radial_segments: 16,
            seed: 0,
            correction: FrequencyCorrection::Anomaly,
            tip_mode: TipMode::Section,
            section_width: None,
            min_branch: None,
            dbh: DbhParams::default(),
            radius: RadiusParams::default(),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn skeleton_params(&self) -> SkeletonParams {
        SkeletonParams {
            alpha: self.alpha,
            n_bins: self.n_bins,
            leaf_on: self.leaf_on,
            correction: self.correction,
            tip_mode: self.tip_mode,
            section_width: self.section_width,
            min_branch: self.min_branch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        self.skeleton_params().validate()?;
        if let Some(d) = self.wood_density {
            if !(d > 0.0) {
                return bad(format!("wood_density must be positive, got {d}"));
            }
        }
        if self.dbh_source == DbhSource::Allometric && self.dbh_allometry.is_none() {
            return bad("dbh_source allometric needs dbh_allometry coefficients".into());
        }
        if let Some([a, b]) = self.dbh_allometry {
            if !(a > 0.0) || !b.is_finite() {
                return bad(format!("invalid dbh_allometry ({a}, {b})"));
            }
        }
        if self.radial_segments < 3 {
            return bad(format!("radial_segments must be at least 3, got {}", self.radial_segments));
        }
        if !(self.merge_distance >= 0.0) || !(self.min_tree_height >= 0.0) {
            return bad("merge_distance and min_tree_height must be nonnegative".into());
        }
        let r = &self.radius;
        if !(r.gamma_single > 0.0 && r.gamma_multi > 0.0 && r.min_radius > 0.0) {
            return bad("radius exponents and floor must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"k": 12, "leaf_on": true}"#).unwrap();
        assert_eq!(c.k, 12);
        assert!(c.leaf_on);
        assert_eq!(c.n_bins, 100);
        assert_eq!(c.merge_distance, 0.5);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"kk": 1}"#).is_err());
    }

    #[test]
    fn allometric_needs_coefficients() {
        let c = RunConfig {
            dbh_source: DbhSource::Allometric,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
