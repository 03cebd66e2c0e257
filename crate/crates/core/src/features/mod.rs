//! The 39-entry feature vector computed for one segmented cell, and the
//! feature CSV interchange format.

mod glcm;
mod profile;
mod shape;

pub use glcm::glcm_features;
pub use profile::{
    erosion_profile, fractal_dimension, optical_density, skeleton_features, ErosionProfile,
};
pub use shape::{concavity_count, eccentricity_of, hu_moments_compressed};

use crate::colortransforms::{channels, hsv_s_component, y_component};
use crate::imgcore::{
    connected_components, contour_metrics, fill_holes, trace_outer_contour, Connectivity,
    GrayImage, Mask, RgbImage, Roi,
};

/// The five target classes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum CellClass {
    /// Neutrophilic split granulocyte.
    Nstg,
    /// Neutrophilic stab granulocyte.
    Nsbg,
    /// Metarubricyte.
    Mbe,
    /// Mature lymphocyte.
    Mls,
    /// Other cells.
    Ocs,
}

impl CellClass {
    pub const ALL: [CellClass; 5] = [
        CellClass::Nstg,
        CellClass::Nsbg,
        CellClass::Mbe,
        CellClass::Mls,
        CellClass::Ocs,
    ];

    pub fn mnemonic(&self) -> &'static str {
        match self {
            CellClass::Nstg => "NSTG",
            CellClass::Nsbg => "NSBG",
            CellClass::Mbe => "MBE",
            CellClass::Mls => "MLS",
            CellClass::Ocs => "OCS",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<CellClass> {
        match s {
            "NSTG" => Some(CellClass::Nstg),
            "NSBG" => Some(CellClass::Nsbg),
            "MBE" => Some(CellClass::Mbe),
            "MLS" => Some(CellClass::Mls),
            "OCS" => Some(CellClass::Ocs),
            _ => None,
        }
    }

    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|c| c == self).unwrap()
    }
}

impl std::fmt::Display for CellClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.mnemonic())
    }
}

pub const FEATURE_COUNT: usize = 39;

/// Canonical feature order; the CSV header uses exactly these names.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    // size
    "n_area",
    "n_perimeter",
    "n_kextr",
    "n_rectr",
    "nc_area_ratio",
    "nb_perimeter_ratio",
    "b_perimeter",
    "c_area",
    "ycr",
    "ctrv",
    // color
    "yag",
    "bnag",
    "bcnag",
    // texture
    "sfdi",
    "rn_glcm_contrast",
    "rn_glcm_energy",
    "rn_glcm_homogeneity",
    "yc_glcm_contrast",
    "yc_glcm_energy",
    "yc_glcm_homogeneity",
    // morphology
    "niv",
    "hu1",
    "hu2",
    "hu3",
    "n_circularity",
    "b_circularity",
    "nd1",
    "nd2",
    "nd3",
    "cd1",
    "cd2",
    "cd3",
    "connected_region_count",
    "eccentricity",
    // customized
    "er_two",
    "kad",
    "sanv",
    "lk",
    "rl",
];

/// One cell's 39 features. `quality_flagged` is set when a degenerate region
/// forced a guarded denominator or a sentinel value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
    pub quality_flagged: bool,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> f64 {
        let i = FEATURE_NAMES
            .iter()
            .position(|&n| n == name)
            .expect("unknown feature name");
        self.values[i]
    }
}

/// One detected cell.
#[derive(Debug, Clone)]
pub struct CellInstance {
    pub id: usize,
    pub combined_roi: Roi,
    pub nucleus_mask: Mask,
    pub cell_mask: Mask,
    pub features: FeatureVector,
    pub label: Option<CellClass>,
}

fn mask_mean(img: &GrayImage, mask: &Mask) -> f64 {
    let (mut sum, mut n) = (0.0f64, 0.0f64);
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.is_set(x, y) {
                sum += img.get(x, y) as f64;
                n += 1.0;
            }
        }
    }
    if n == 0.0 {
        0.0
    } else {
        sum / n
    }
}

fn mask_bbox(mask: &Mask) -> Option<Roi> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0usize, 0usize);
    let mut any = false;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_set(x, y) {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    any.then(|| Roi::new(x0, y0, x1, y1))
}

struct MaskGeometry {
    area: f64,
    perimeter: f64,
    filled_area: f64,
    component_count: usize,
}

fn mask_geometry(mask: &Mask) -> MaskGeometry {
    let cc = connected_components(mask, Connectivity::Eight);
    let mut perimeter = 0.0;
    let mut metric_area = 0.0;
    for region in &cc.regions {
        let m = contour_metrics(&trace_outer_contour(mask, region));
        perimeter += m.perimeter;
        metric_area += m.area;
    }
    MaskGeometry {
        area: mask.count() as f64,
        perimeter,
        filled_area: metric_area,
        component_count: cc.regions.len(),
    }
}

/// Color means and the nonzero-Y ratio.
pub fn color_features(
    patch: &RgbImage,
    nucleus: &Mask,
    cytoplasm: &Mask,
    cell: &Mask,
) -> (f64, f64, f64, f64) {
    let (_, _, b_plane) = channels(patch);
    let y_plane = y_component(patch);
    let yag = mask_mean(&y_plane, cell);
    let bnag = mask_mean(&b_plane, nucleus);
    let bcnag = mask_mean(&b_plane, cytoplasm) - bnag;
    let c_area = cytoplasm.count();
    let mut nonzero_y = 0usize;
    for y in 0..patch.height() {
        for x in 0..patch.width() {
            if cytoplasm.is_set(x, y) && y_plane.get(x, y) > 0 {
                nonzero_y += 1;
            }
        }
    }
    let ycr = nonzero_y as f64 / c_area.max(1) as f64;
    (yag, bnag, bcnag, ycr)
}

/// Compute all 39 features for one segmented cell. The cytoplasm is
/// `cell - nucleus`; when it is empty the affected ratios use a guarded
/// denominator of 1 and the quality flag is raised.
pub fn extract_features(patch: &RgbImage, nucleus: &Mask, cell: &Mask) -> FeatureVector {
    assert!(!nucleus.is_empty(), "nucleus must be nonempty");
    let cytoplasm = cell.subtract(nucleus);
    let mut flagged = false;

    let n_geo = mask_geometry(nucleus);
    let b_geo = mask_geometry(cell);
    let c_area = cytoplasm.count() as f64;
    if c_area == 0.0 {
        flagged = true;
    }

    let n_bbox = mask_bbox(nucleus).expect("nonempty nucleus");
    let (bw, bh) = (n_bbox.width() as f64, n_bbox.height() as f64);
    let n_kextr = bw.min(bh) / bw.max(bh);
    let n_rectr = n_geo.area / (bw * bh);

    let nc_area_ratio = n_geo.area / c_area.max(1.0);
    let nb_perimeter_ratio = n_geo.perimeter / b_geo.perimeter.max(1.0);

    let filled_nucleus = fill_holes(nucleus);
    let hole_area = filled_nucleus.count() as f64 - n_geo.area;
    let ctrv = hole_area / filled_nucleus.count().max(1) as f64;

    let (yag, bnag, bcnag, ycr) = color_features(patch, nucleus, &cytoplasm, cell);

    let (r_plane, _, _) = channels(patch);
    let y_plane = y_component(patch);
    let s_plane = hsv_s_component(patch);

    let (sfdi, sfdi_ok) = fractal_dimension(&s_plane, cell);
    if !sfdi_ok {
        flagged = true;
    }
    let (rn_contrast, rn_energy, rn_homog, rn_ok) = glcm_features(&r_plane, nucleus);
    let (yc_contrast, yc_energy, yc_homog, yc_ok) = glcm_features(&y_plane, &cytoplasm);
    if !rn_ok || !yc_ok {
        flagged = true;
    }

    let hu = hu_moments_compressed(nucleus);
    let circ = |geo: &MaskGeometry| {
        if geo.perimeter > 0.0 {
            4.0 * std::f64::consts::PI * geo.filled_area / (geo.perimeter * geo.perimeter)
        } else {
            0.0
        }
    };
    let n_circularity = circ(&n_geo);
    let b_circularity = circ(&b_geo);

    let (nd1, nd2, nd3) = optical_density(&r_plane, nucleus);
    let (cd1, cd2, cd3) = optical_density(&y_plane, &cytoplasm);

    let ecc = eccentricity_of(cell);
    let prof = erosion_profile(nucleus);
    let sanv = concavity_count(nucleus);
    let (lk, rl) = skeleton_features(nucleus);

    let values = [
        n_geo.area,
        n_geo.perimeter,
        n_kextr,
        n_rectr,
        nc_area_ratio,
        nb_perimeter_ratio,
        b_geo.perimeter,
        c_area,
        ycr,
        ctrv,
        yag,
        bnag,
        bcnag,
        sfdi,
        rn_contrast,
        rn_energy,
        rn_homog,
        yc_contrast,
        yc_energy,
        yc_homog,
        prof.max_components as f64,
        hu[0],
        hu[1],
        hu[2],
        n_circularity,
        b_circularity,
        nd1,
        nd2,
        nd3,
        cd1,
        cd2,
        cd3,
        n_geo.component_count as f64,
        ecc,
        prof.first_split_step as f64,
        prof.adhesion_degree,
        sanv as f64,
        lk,
        rl,
    ];
    FeatureVector {
        values,
        quality_flagged: flagged,
    }
}

/// Serialize labeled feature rows: a header with the 39 canonical names plus
/// `label`, then one row per cell with 6 fractional digits; unlabeled rows
/// write `?`.
pub fn write_features_csv(rows: &[(FeatureVector, Option<CellClass>)]) -> String {
    let mut out = String::new();
    out.push_str(&FEATURE_NAMES.join(","));
    out.push_str(",label\n");
    for (fv, label) in rows {
        let mut fields: Vec<String> = fv.values.iter().map(|v| format!("{v:.6}")).collect();
        fields.push(label.map_or("?".to_string(), |c| c.mnemonic().to_string()));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CsvError {
    #[error("bad CSV header: expected the 39 canonical feature names plus `label`")]
    BadHeader,
    #[error("row {row}: expected {expected} fields, found {found}")]
    BadRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: unparsable value in column {column}")]
    BadValue { row: usize, column: usize },
    #[error("row {row}: unknown class mnemonic `{label}`")]
    BadLabel { row: usize, label: String },
}

/// Parse a feature CSV produced by [`write_features_csv`].
pub fn read_features_csv(
    text: &str,
) -> Result<Vec<([f64; FEATURE_COUNT], Option<CellClass>)>, CsvError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(CsvError::BadHeader)?;
    let expected_header = FEATURE_NAMES
        .iter()
        .cloned()
        .chain(std::iter::once("label"))
        .collect::<Vec<_>>()
        .join(",");
    if header.trim() != expected_header {
        return Err(CsvError::BadHeader);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FEATURE_COUNT + 1 {
            return Err(CsvError::BadRow {
                row: i + 2,
                expected: FEATURE_COUNT + 1,
                found: fields.len(),
            });
        }
        let mut values = [0.0f64; FEATURE_COUNT];
        for (c, field) in fields[..FEATURE_COUNT].iter().enumerate() {
            values[c] = field
                .trim()
                .parse::<f64>()
                .map_err(|_| CsvError::BadValue {
                    row: i + 2,
                    column: c + 1,
                })?;
        }
        let label = match fields[FEATURE_COUNT].trim() {
            "?" => None,
            s => Some(
                CellClass::from_mnemonic(s).ok_or_else(|| CsvError::BadLabel {
                    row: i + 2,
                    label: s.to_string(),
                })?,
            ),
        };
        rows.push((values, label));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
