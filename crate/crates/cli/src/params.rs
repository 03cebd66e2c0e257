//! Shared pipeline flags; every tunable that affects output is a flag with
//! its standing default and is recorded in the run manifest.

use bmc_core::colortransforms::HsgParams;
use bmc_core::localization::RadiusRule;
use bmc_core::pipeline::PipelineParams;
use bmc_core::segmentation::SegmentationParams;
use clap::Args;

#[derive(Debug, Args, Clone)]
pub struct PipelineFlags {
    /// Hue weight of the enhancement transform.
    #[arg(long, default_value_t = 0.4)]
    pub w1: f64,
    /// Saturation weight of the enhancement transform.
    #[arg(long, default_value_t = 0.6)]
    pub w2: f64,
    /// Green weight of the enhancement transform.
    #[arg(long, default_value_t = 1.0)]
    pub w3: f64,
    /// Output scale of the enhancement transform before clamping.
    #[arg(long, default_value_t = 100.0)]
    pub hsg_scale: f64,
    /// Weight of the combined nucleus thresholds.
    #[arg(long, default_value_t = 0.5)]
    pub gamma_thresh: f64,
    /// Lower circularity threshold of the search-radius rule.
    #[arg(long, default_value_t = 0.46)]
    pub t1: f64,
    /// Upper circularity threshold of the search-radius rule.
    #[arg(long, default_value_t = 0.85)]
    pub t2: f64,
    /// Blend weight of the weakening transform: `auto`, or a fixed value in [0,1].
    #[arg(long, default_value = "auto")]
    pub lambda: String,
    /// Minimum nucleus region area in px^2.
    #[arg(long, default_value_t = 30)]
    pub min_nucleus_area: usize,
    /// Minimum area of a uniform-texture region in px^2.
    #[arg(long, default_value_t = 200)]
    pub nwig_min_area: usize,
    /// Minimum cytoplasmic particle area in px^2.
    #[arg(long, default_value_t = 4)]
    pub particle_min_area: usize,
    /// Particle count from which colors count as inconsistent.
    #[arg(long, default_value_t = 5)]
    pub consistency_count: usize,
    /// Gray tolerance of seeded region growing.
    #[arg(long, default_value_t = 12.0)]
    pub grow_tolerance: f64,
    /// Seed points sampled on the nucleus circumcircle.
    #[arg(long, default_value_t = 64)]
    pub circumcircle_seeds: usize,
}

impl PipelineFlags {
    pub fn to_params(&self) -> Result<PipelineParams, String> {
        let lambda_override = match self.lambda.as_str() {
            "auto" => None,
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| format!("bad --lambda value `{other}`"))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("--lambda {v} outside [0, 1]"));
                }
                Some(v)
            }
        };
        let hsg = HsgParams {
            w1: self.w1,
            w2: self.w2,
            w3: self.w3,
            scale: self.hsg_scale,
        };
        Ok(PipelineParams {
            hsg,
            radius_rule: RadiusRule {
                t1: self.t1,
                t2: self.t2,
            },
            min_nucleus_area: self.min_nucleus_area,
            segmentation: SegmentationParams {
                hsg,
                gamma: self.gamma_thresh,
                min_nucleus_area: self.min_nucleus_area,
                nwig_min_area: self.nwig_min_area,
                particle_min_area: self.particle_min_area,
                consistency_count: self.consistency_count,
                grow_tolerance: self.grow_tolerance,
                circumcircle_seeds: self.circumcircle_seeds,
                lambda_override,
            },
        })
    }

    /// Key/value listing for the run manifest.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        vec![
            ("w1".into(), self.w1.to_string()),
            ("w2".into(), self.w2.to_string()),
            ("w3".into(), self.w3.to_string()),
            ("hsg_scale".into(), self.hsg_scale.to_string()),
            ("gamma_thresh".into(), self.gamma_thresh.to_string()),
            ("t1".into(), self.t1.to_string()),
            ("t2".into(), self.t2.to_string()),
            ("lambda".into(), self.lambda.clone()),
            ("min_nucleus_area".into(), self.min_nucleus_area.to_string()),
            ("nwig_min_area".into(), self.nwig_min_area.to_string()),
            (
                "particle_min_area".into(),
                self.particle_min_area.to_string(),
            ),
            (
                "consistency_count".into(),
                self.consistency_count.to_string(),
            ),
            ("grow_tolerance".into(), self.grow_tolerance.to_string()),
            (
                "circumcircle_seeds".into(),
                self.circumcircle_seeds.to_string(),
            ),
        ]
    }
}
