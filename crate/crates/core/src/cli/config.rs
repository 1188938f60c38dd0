use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::curation::CurationConfig;
use crate::error::{Error, Result};
use crate::geometry::Intrinsics;
use crate::metrics::ThresholdConfig;
use crate::motion::{HumanParams, MotionKind};

/// Settings read from a TOML file; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub camera: CameraConfig,
    pub pipeline: PipelineSection,
    pub motion: MotionSection,
    pub curation: CurationConfig,
    pub metrics: ThresholdConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view in degrees.
    pub fov: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        // 70.528° over 256 px is 0.2755° per pixel.
        CameraConfig {
            width: 256,
            height: 256,
            fov: 70.528,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub frames: usize,
    pub queries: usize,
    pub l_thresh: f64,
    pub render_frames: bool,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            frames: 32,
            queries: 256,
            l_thresh: 20.0,
            render_frames: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionSection {
    pub kind: Option<MotionKind>,
    pub btf: bool,
    pub spin_noise: f64,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub human: HumanParams,
}

impl Default for MotionSection {
    fn default() -> Self {
        MotionSection {
            kind: None,
            btf: false,
            spin_noise: 0.25,
            theta_min: None,
            theta_max: None,
            human: HumanParams::default(),
        }
    }
}

impl Config {
    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Config = toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        cfg.validate().map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.camera;
        if !(c.fov > 0.0 && c.fov < 179.0) {
            return Err(Error::invalid(format!("camera fov {} outside (0, 179)", c.fov)));
        }
        if c.width < 16 || c.height < 16 {
            return Err(Error::invalid(format!("camera size {}x{} below 16", c.width, c.height)));
        }
        if self.pipeline.frames < 2 {
            return Err(Error::invalid("pipeline frames must be at least 2"));
        }
        self.curation.validate()?;
        self.metrics.validate()
    }

    pub fn intrinsics(&self) -> Result<Intrinsics> {
        Intrinsics::from_fov(self.camera.width, self.camera.height, self.camera.fov)
    }
}
