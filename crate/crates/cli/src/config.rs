//! Pipeline configuration: TOML-backed flat tables whose defaults pin the
//! reference operating point (VoD ranges and voxel sizes, r = 51, sigma = 7,
//! tau = 50, 4 heads, 4 sampling points, 5 image levels, 6x6x6 proposal
//! grid, scales x3 + x4).

use crate::error::{CliError, CliResult};
use radfuse_core::densify::{DensifyConfig, SamplerConfig};
use radfuse_core::metrics::{ClassSpec, DcaAxes, Protocol};
use radfuse_core::proposal_fusion::{declare_plfe_params, GridDims, PlfeConfig};
use radfuse_core::scene_fusion::{
    declare_deform_params, declare_downsample_params, hsfp_prefix, AnchorSet, DeformConfig,
};
use radfuse_core::tensor::ParamDecl;
use radfuse_core::voxel::{GridSpec, TavfeConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSection {
    /// Point schema: `vod7` (xyz + RCS, v_r, v_rc, t) or `tj4d8`
    /// (xyz + v_r, range, power, alpha, beta).
    pub schema: String,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            schema: "vod7".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    pub range_min: [f64; 3],
    pub range_max: [f64; 3],
    pub voxel: [f64; 3],
    pub max_points_per_voxel: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            range_min: [0.0, -25.6, -3.0],
            range_max: [51.2, 25.6, 2.0],
            voxel: [0.05, 0.05, 0.125],
            max_points_per_voxel: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerSection {
    pub radius_px: f64,
    pub sigma1_px: f64,
    pub sigma2_px: f64,
    pub tau: usize,
    pub seed: u64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            radius_px: 51.0,
            sigma1_px: 7.0,
            sigma2_px: 7.0,
            tau: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderSection {
    pub hidden: usize,
    pub out: usize,
    pub gate_sigmoid: bool,
}

impl Default for EncoderSection {
    fn default() -> Self {
        Self {
            hidden: 32,
            out: 32,
            gate_sigmoid: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionSection {
    pub heads: usize,
    pub sample_points: usize,
    pub image_levels: usize,
    pub image_channels: usize,
    pub strides: Vec<f64>,
    /// Selected voxel scales: x1 = 1x .. x4 = 8x downsampling.
    pub levels: Vec<String>,
    /// Common voxel feature width after the downsampler.
    pub width: usize,
    /// RoI grid resolution per axis.
    pub roi_grid: usize,
}

impl Default for FusionSection {
    fn default() -> Self {
        Self {
            heads: 4,
            sample_points: 4,
            image_levels: 5,
            image_channels: 32,
            strides: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            levels: vec!["x3".into(), "x4".into()],
            width: 32,
            roi_grid: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalSection {
    pub count: usize,
    pub bev_cell: f64,
    pub nms_iou: f64,
}

impl Default for ProposalSection {
    fn default() -> Self {
        Self {
            count: 16,
            bev_cell: 0.5,
            nms_iou: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlfeSection {
    pub grid: [usize; 3],
    pub cell_width: usize,
    pub grid_hidden: usize,
    pub token_width: usize,
    pub head_hidden: usize,
}

impl Default for PlfeSection {
    fn default() -> Self {
        Self {
            grid: [6, 6, 6],
            cell_width: 32,
            grid_hidden: 32,
            token_width: 64,
            head_hidden: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnchorSection {
    /// `(l, w, h)` per class, in class-id order.
    pub sizes: Vec<[f64; 3]>,
}

impl Default for AnchorSection {
    fn default() -> Self {
        Self {
            sizes: vec![
                [3.9, 1.6, 1.56],
                [0.8, 0.6, 1.73],
                [1.76, 0.6, 1.73],
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSection {
    pub protocol: String,
    pub dca_lateral_axis: usize,
    pub dca_forward_axis: usize,
    /// AP overlap measure: "bev" or "3d".
    pub iou_kind: String,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            protocol: "vod_eaa".into(),
            dca_lateral_axis: 0,
            dca_forward_axis: 2,
            iou_kind: "bev".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub dataset: DatasetSection,
    pub grid: GridSection,
    pub sampler: SamplerSection,
    pub encoder: EncoderSection,
    pub fusion: FusionSection,
    pub proposals: ProposalSection,
    pub plfe: PlfeSection,
    pub anchors: AnchorSection,
    pub eval: EvalSection,
    pub params_seed: u64,
}

/// (attribute width beyond xyz, class count, class names)
pub struct SchemaInfo {
    pub attr_len: usize,
    pub n_classes: usize,
    pub token: &'static str,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| CliError::format(format!("config: {e}")))?;
        cfg.apply_env_override();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// `RADFUSE_SEED` overrides the sampler seed.
    pub fn apply_env_override(&mut self) {
        if let Ok(s) = std::env::var("RADFUSE_SEED") {
            if let Ok(seed) = s.trim().parse::<u64>() {
                self.sampler.seed = seed;
            }
        }
    }

    /// TJ4D preset: 0.08 m voxels over the 69.12 x 79.36 m range, the
    /// four-class anchor table, and the range-filtered protocol.
    pub fn tj4d() -> Self {
        let mut cfg = Self::default();
        cfg.dataset.schema = "tj4d8".into();
        cfg.grid.range_min = [0.0, -39.68, -4.0];
        cfg.grid.range_max = [69.12, 39.68, 2.0];
        cfg.grid.voxel = [0.08, 0.08, 0.125];
        cfg.anchors.sizes = vec![
            [4.56, 1.84, 1.70],
            [0.8, 0.6, 1.69],
            [1.77, 0.78, 1.60],
            [10.76, 2.66, 3.47],
        ];
        cfg.eval.protocol = "tj4d".into();
        cfg
    }

    pub fn validate(&self) -> CliResult<()> {
        self.schema()?;
        self.protocol()?;
        if !self.sampler_config().valid() {
            return Err(CliError::format("sampler: radius, sigmas, tau must be positive"));
        }
        if self.fusion.strides.len() != self.fusion.image_levels {
            return Err(CliError::format(format!(
                "fusion: {} strides for {} image levels",
                self.fusion.strides.len(),
                self.fusion.image_levels
            )));
        }
        if self.fusion.width % self.fusion.heads != 0
            || self.plfe.token_width % self.fusion.heads != 0
            || self.plfe.cell_width % self.fusion.heads != 0
        {
            return Err(CliError::format("fusion widths must divide by head count"));
        }
        for level in &self.fusion.levels {
            scale_of(level).ok_or_else(|| {
                CliError::format(format!("fusion.levels: unknown level '{level}'"))
            })?;
        }
        if self.anchors.sizes.len() != self.schema()?.n_classes {
            return Err(CliError::format(format!(
                "anchors: {} sizes for {} classes",
                self.anchors.sizes.len(),
                self.schema()?.n_classes
            )));
        }
        Ok(())
    }

    pub fn schema(&self) -> CliResult<SchemaInfo> {
        match self.dataset.schema.as_str() {
            "vod7" => Ok(SchemaInfo {
                attr_len: 4,
                n_classes: 3,
                token: "vod7",
            }),
            "tj4d8" => Ok(SchemaInfo {
                attr_len: 5,
                n_classes: 4,
                token: "tj4d8",
            }),
            other => Err(CliError::format(format!("unknown schema '{other}'"))),
        }
    }

    pub fn protocol(&self) -> CliResult<Protocol> {
        match self.eval.protocol.as_str() {
            "vod_eaa" => Ok(Protocol::VodEaa),
            "vod_dca" => Ok(Protocol::VodDca),
            "tj4d" => Ok(Protocol::Tj4d),
            other => Err(CliError::format(format!("unknown protocol '{other}'"))),
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            min: self.grid.range_min,
            max: self.grid.range_max,
            voxel: self.grid.voxel,
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            radius_px: self.sampler.radius_px,
            sigma1_px: self.sampler.sigma1_px,
            sigma2_px: self.sampler.sigma2_px,
            tau: self.sampler.tau,
            seed: self.sampler.seed,
        }
    }

    pub fn densify_config(&self) -> CliResult<DensifyConfig> {
        let s = self.schema()?;
        Ok(DensifyConfig {
            sampler: self.sampler_config(),
            attr_len: s.attr_len,
            n_classes: s.n_classes,
        })
    }

    /// Hybrid feature width: 3 + attrs + class one-hot + 2 tag slots.
    pub fn hybrid_width(&self) -> CliResult<usize> {
        let s = self.schema()?;
        Ok(3 + s.attr_len + s.n_classes + 2)
    }

    pub fn tavfe_config(&self) -> TavfeConfig {
        TavfeConfig {
            n_p: self.grid.max_points_per_voxel,
            hidden: self.encoder.hidden,
            out: self.encoder.out,
            gate_sigmoid: self.encoder.gate_sigmoid,
        }
    }

    pub fn deform_config(&self) -> DeformConfig {
        DeformConfig {
            heads: self.fusion.heads,
            points: self.fusion.sample_points,
        }
    }

    pub fn plfe_config(&self) -> PlfeConfig {
        PlfeConfig {
            grid: GridDims { d: self.plfe.grid },
            cell_width: self.plfe.cell_width,
            grid_hidden: self.plfe.grid_hidden,
            token_width: self.plfe.token_width,
            heads: self.fusion.heads,
            head_hidden: self.plfe.head_hidden,
        }
    }

    /// Downsampling scales selected for scene fusion, ascending.
    pub fn selected_scales(&self) -> Vec<u32> {
        let mut scales: Vec<u32> = self
            .fusion
            .levels
            .iter()
            .filter_map(|l| scale_of(l))
            .collect();
        scales.sort_unstable();
        scales.dedup();
        scales
    }

    /// Width of one pooled scene-feature row.
    pub fn slp_width(&self) -> usize {
        let g = self.fusion.roi_grid;
        self.selected_scales().len() * g * g * g * self.fusion.width
    }

    pub fn anchor_set(&self) -> AnchorSet {
        AnchorSet {
            sizes: self.anchors.sizes.clone(),
        }
    }

    pub fn class_specs(&self) -> CliResult<Vec<ClassSpec>> {
        Ok(radfuse_core::metrics::default_classes(self.schema()?.n_classes))
    }

    pub fn dca_axes(&self) -> DcaAxes {
        DcaAxes {
            lateral: self.eval.dca_lateral_axis,
            forward: self.eval.dca_forward_axis,
        }
    }

    /// Declare every model parameter for this configuration.
    pub fn declare_params(&self) -> CliResult<ParamDecl> {
        let mut decl = ParamDecl::new();
        let map_err = |e: radfuse_core::error::TensorError| CliError::format(e.to_string());
        let width = self.hybrid_width()?;
        radfuse_core::voxel::declare_tavfe_params(&mut decl, &self.tavfe_config(), width)
            .map_err(map_err)?;
        declare_downsample_params(&mut decl, self.encoder.out, self.fusion.width)
            .map_err(map_err)?;
        let deform = self.deform_config();
        for scale in self.selected_scales() {
            declare_deform_params(
                &mut decl,
                &hsfp_prefix(scale),
                self.fusion.width,
                self.fusion.image_channels,
                &deform,
                self.fusion.image_levels,
                2 * self.fusion.width,
            )
            .map_err(map_err)?;
        }
        declare_plfe_params(
            &mut decl,
            &self.plfe_config(),
            &deform,
            self.fusion.image_levels,
            self.fusion.image_channels,
            self.slp_width(),
        )
        .map_err(map_err)?;
        Ok(decl)
    }
}

/// Map a level token (`x1` .. `x4`) onto its downsampling scale.
pub fn scale_of(level: &str) -> Option<u32> {
    match level {
        "x1" => Some(1),
        "x2" => Some(2),
        "x3" => Some(4),
        "x4" => Some(8),
        _ => None,
    }
}

/// Class names for a schema (`truck` only exists in the 4-class table).
pub fn class_name(id: usize) -> Option<&'static str> {
    ["car", "pedestrian", "cyclist", "truck"].get(id).copied()
}

pub fn class_id(name: &str) -> Option<usize> {
    ["car", "pedestrian", "cyclist", "truck"]
        .iter()
        .position(|&n| n == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn defaults_pin_the_reference_operating_point() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.grid.range_min, [0.0, -25.6, -3.0]);
        assert_eq!(cfg.grid.range_max, [51.2, 25.6, 2.0]);
        assert_eq!(cfg.grid.voxel, [0.05, 0.05, 0.125]);
        assert_eq!(cfg.sampler.radius_px, 51.0);
        assert_eq!(cfg.sampler.sigma1_px, 7.0);
        assert_eq!(cfg.sampler.sigma2_px, 7.0);
        assert_eq!(cfg.sampler.tau, 50);
        assert_eq!(cfg.fusion.heads, 4);
        assert_eq!(cfg.fusion.sample_points, 4);
        assert_eq!(cfg.fusion.image_levels, 5);
        assert_eq!(cfg.fusion.levels, vec!["x3", "x4"]);
        assert_eq!(cfg.plfe.grid, [6, 6, 6]);
        assert_eq!(
            cfg.anchors.sizes,
            vec![[3.9, 1.6, 1.56], [0.8, 0.6, 1.73], [1.76, 0.6, 1.73]]
        );
        assert_eq!(cfg.selected_scales(), vec![4, 8]);
        cfg.validate().unwrap();
    }

    #[test]
    fn tj4d_preset_matches_its_table() {
        let cfg = PipelineConfig::tj4d();
        assert_eq!(cfg.grid.range_max, [69.12, 39.68, 2.0]);
        assert_eq!(cfg.grid.voxel, [0.08, 0.08, 0.125]);
        assert_eq!(cfg.anchors.sizes.len(), 4);
        assert_eq!(cfg.anchors.sizes[3], [10.76, 2.66, 3.47]);
        assert_eq!(cfg.schema().unwrap().attr_len, 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_schema_and_levels_are_format_errors() {
        let mut cfg = PipelineConfig::default();
        cfg.dataset.schema = "nope".into();
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.fusion.levels = vec!["x9".into()];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn declared_params_cover_the_model() {
        let cfg = PipelineConfig::default();
        let decl = cfg.declare_params().unwrap();
        assert!(decl.len() > 30);
    }
}
