//! Deterministic synthetic bone-marrow scenes with exact ground truth: the
//! desk-scale stand-in for clinical data and the oracle for end-to-end tests.

mod dataset;
mod render;
mod rng;

pub use dataset::{generate_dataset, DatasetOptions, DatasetResult};
pub use rng::SplitMix64;

use crate::features::CellClass;
use crate::imgcore::{Mask, RgbImage, Roi};
use render::{in_band, in_disk, in_ellipse, near_segment, paint};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("scene spec: {0}")]
    Spec(String),
    #[error("class constraint violated: {0}")]
    Constraint(String),
}

/// Versioned palette; Wright-stain-like, not a claim about real dyes.
pub mod palette {
    pub const BACKGROUND: (u8, u8, u8) = (246, 240, 244);
    pub const RBC: (u8, u8, u8) = (234, 182, 172);
    pub const IMPURITY: (u8, u8, u8) = (122, 112, 126);
    pub const NUCLEUS: (u8, u8, u8) = (88, 42, 128);
    pub const CYTO_MBE: (u8, u8, u8) = (228, 162, 186);
    pub const CYTO_MLS: (u8, u8, u8) = (198, 208, 238);
    pub const CYTO_NSBG: (u8, u8, u8) = (236, 186, 212);
    pub const CYTO_NSTG: (u8, u8, u8) = (234, 184, 210);
    pub const CYTO_OCS: (u8, u8, u8) = (225, 195, 210);
    pub const PARTICLE_PURPLE: (u8, u8, u8) = (128, 74, 152);
    pub const PARTICLE_NEUTRAL: (u8, u8, u8) = (170, 120, 160);
    pub const PARTICLE_GOLDEN: (u8, u8, u8) = (226, 184, 118);
}

/// Nucleus geometry, one variant per morphological family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NucleusGeometry {
    /// Round or oval nucleus at an offset from the body center.
    Oval {
        semi: (i64, i64),
        offset: (i64, i64),
    },
    /// Band ("S"/"U"/"C") nucleus: annulus with an opening on one side.
    Band {
        mid_radius: i64,
        half_width: i64,
        opening: u8,
    },
    /// 2-3 lobes joined by thin filaments.
    Lobes {
        lobe_radius: i64,
        offsets: Vec<(i64, i64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSpec {
    pub class: CellClass,
    pub center: (i64, i64),
    pub body_semi: (i64, i64),
    pub nucleus: NucleusGeometry,
    pub nucleus_color: (u8, u8, u8),
    pub cytoplasm_color: (u8, u8, u8),
    pub particle_color: (u8, u8, u8),
    pub particle_count: usize,
    pub particle_radius: i64,
}

impl CellSpec {
    /// Largest body semi-axis, used for spacing checks.
    pub fn reach(&self) -> i64 {
        self.body_semi.0.max(self.body_semi.1)
    }

    /// Sample class-consistent geometry at a fixed 10 px/um render scale.
    pub fn sample(class: CellClass, center: (i64, i64), rng: &mut SplitMix64) -> CellSpec {
        // One brightness delta for all three channels: per-cell variation
        // must not disturb the channel differences the transforms rely on.
        let jitter = |rng: &mut SplitMix64, c: (u8, u8, u8)| {
            let d = rng.range_i64(-8, 8);
            let j = |v: u8| (v as i64 + d).clamp(0, 255) as u8;
            (j(c.0), j(c.1), j(c.2))
        };
        let oval = |rng: &mut SplitMix64, lo: i64, hi: i64| {
            let a = rng.range_i64(lo, hi);
            let b = a * rng.range_i64(87, 100) / 100;
            if rng.chance(1, 2) {
                (a, b)
            } else {
                (b, a)
            }
        };
        match class {
            CellClass::Mbe => {
                // Near-round body; the nucleus radius keeps its area under
                // half the body while staying large enough that the search
                // radius rule covers the whole cell.
                let a = rng.range_i64(35, 50);
                let body = (a, a * rng.range_i64(96, 100) / 100);
                let min = body.0.min(body.1);
                let r = min * rng.range_i64(62, 68) / 100;
                CellSpec {
                    class,
                    center,
                    body_semi: body,
                    nucleus: NucleusGeometry::Oval {
                        semi: (r, r),
                        offset: (rng.range_i64(-3, 3), rng.range_i64(-3, 3)),
                    },
                    nucleus_color: jitter(rng, palette::NUCLEUS),
                    cytoplasm_color: jitter(rng, palette::CYTO_MBE),
                    particle_color: palette::PARTICLE_PURPLE,
                    particle_count: 0,
                    particle_radius: 1,
                }
            }
            CellClass::Mls => {
                let a = rng.range_i64(60, 75);
                let body = (a, a * rng.range_i64(92, 100) / 100);
                let min = body.0.min(body.1);
                let r = min * rng.range_i64(64, 72) / 100;
                let shift = min * 12 / 100;
                let dir = [(shift, 0), (-shift, 0), (0, shift), (0, -shift)][rng.range_usize(0, 3)];
                CellSpec {
                    class,
                    center,
                    body_semi: body,
                    nucleus: NucleusGeometry::Oval {
                        semi: (r, r * rng.range_i64(90, 100) / 100),
                        offset: dir,
                    },
                    nucleus_color: jitter(rng, palette::NUCLEUS),
                    cytoplasm_color: jitter(rng, palette::CYTO_MLS),
                    particle_color: palette::PARTICLE_PURPLE,
                    particle_count: rng.range_usize(2, 4),
                    particle_radius: 1,
                }
            }
            CellClass::Nsbg => {
                let body = oval(rng, 50, 75);
                let min = body.0.min(body.1);
                CellSpec {
                    class,
                    center,
                    body_semi: body,
                    nucleus: NucleusGeometry::Band {
                        mid_radius: min * 42 / 100,
                        half_width: (min * 15 / 100).max(4),
                        opening: rng.range_usize(0, 3) as u8,
                    },
                    nucleus_color: jitter(rng, palette::NUCLEUS),
                    cytoplasm_color: jitter(rng, palette::CYTO_NSBG),
                    particle_color: palette::PARTICLE_PURPLE,
                    particle_count: rng.range_usize(12, 20),
                    particle_radius: 1,
                }
            }
            CellClass::Nstg => {
                let body = oval(rng, 50, 65);
                let min = body.0.min(body.1);
                let d = min * 36 / 100;
                let offsets = if rng.chance(1, 2) {
                    vec![(-d, 0), (d, 0)]
                } else {
                    vec![(0, -d), (-d, d * 3 / 4), (d, d * 3 / 4)]
                };
                CellSpec {
                    class,
                    center,
                    body_semi: body,
                    nucleus: NucleusGeometry::Lobes {
                        lobe_radius: min * 26 / 100,
                        offsets,
                    },
                    nucleus_color: jitter(rng, palette::NUCLEUS),
                    cytoplasm_color: jitter(rng, palette::CYTO_NSTG),
                    particle_color: palette::PARTICLE_NEUTRAL,
                    particle_count: rng.range_usize(10, 16),
                    particle_radius: 1,
                }
            }
            CellClass::Ocs => {
                // Monocyte-like: rod-shaped (2.2:1) nucleus whose lower
                // circularity selects the wider search radius.
                let a = rng.range_i64(50, 80);
                let body = (a, a * rng.range_i64(92, 100) / 100);
                let min = body.0.min(body.1);
                let long = min * 72 / 100;
                let short = min * 33 / 100;
                let semi = if rng.chance(1, 2) {
                    (long, short)
                } else {
                    (short, long)
                };
                CellSpec {
                    class,
                    center,
                    body_semi: body,
                    nucleus: NucleusGeometry::Oval {
                        semi,
                        offset: (rng.range_i64(-4, 4), rng.range_i64(-4, 4)),
                    },
                    nucleus_color: jitter(rng, palette::NUCLEUS),
                    cytoplasm_color: jitter(rng, palette::CYTO_OCS),
                    particle_color: palette::PARTICLE_GOLDEN,
                    particle_count: rng.range_usize(8, 14),
                    particle_radius: 2,
                }
            }
        }
    }

    fn in_nucleus(&self, x: i64, y: i64) -> bool {
        let (cx, cy) = self.center;
        match &self.nucleus {
            NucleusGeometry::Oval { semi, offset } => {
                in_ellipse(x, y, cx + offset.0, cy + offset.1, semi.0, semi.1)
            }
            NucleusGeometry::Band {
                mid_radius,
                half_width,
                opening,
            } => in_band(x, y, cx, cy, *mid_radius, *half_width, *opening),
            NucleusGeometry::Lobes {
                lobe_radius,
                offsets,
            } => {
                for o in offsets {
                    if in_disk(x, y, cx + o.0, cy + o.1, *lobe_radius) {
                        return true;
                    }
                }
                for w in 0..offsets.len().saturating_sub(1) {
                    let a = offsets[w];
                    let b = offsets[w + 1];
                    if near_segment(x, y, cx + a.0, cy + a.1, cx + b.0, cy + b.1, 1) {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn in_body(&self, x: i64, y: i64) -> bool {
        in_ellipse(
            x,
            y,
            self.center.0,
            self.center.1,
            self.body_semi.0,
            self.body_semi.1,
        )
    }
}

/// Full description of one synthetic field of view.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<CellSpec>,
    pub rbc_count: usize,
    pub impurity_count: usize,
    pub background_color: (u8, u8, u8),
    pub noise_sigma: u8,
    /// Fixtures construct intentional adhesion; ordinary scenes must keep
    /// cells separated.
    pub allow_contact: bool,
}

impl SceneSpec {
    pub fn new(seed: u64, width: usize, height: usize) -> SceneSpec {
        SceneSpec {
            seed,
            width,
            height,
            cells: Vec::new(),
            rbc_count: 0,
            impurity_count: 0,
            background_color: palette::BACKGROUND,
            noise_sigma: 2,
            allow_contact: false,
        }
    }
}

/// Exact per-cell truth for one scene.
#[derive(Debug, Clone)]
pub struct CellTruth {
    pub class: CellClass,
    pub nucleus_mask: Mask,
    pub cell_mask: Mask,
    pub bbox: Roi,
}

#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    pub cells: Vec<CellTruth>,
}

/// Serializable ground-truth manifest; masks are referenced by file name.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GroundTruthManifest {
    pub cells: Vec<CellTruthEntry>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CellTruthEntry {
    pub class: String,
    pub nucleus_mask: String,
    pub cell_mask: String,
    pub bbox: Roi,
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

fn apply_noise(img: &mut RgbImage, sigma: u8, rng: &mut SplitMix64) {
    if sigma == 0 {
        return;
    }
    let s = sigma as i64;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (r, g, b) = img.get(x, y);
            let mut n = |v: u8| (v as i64 + rng.range_i64(-s, s)).clamp(0, 255) as u8;
            let px = (n(r), n(g), n(b));
            img.set(x, y, px);
        }
    }
}

/// Render a scene. Identical specs produce identical bytes.
pub fn generate_scene(spec: &SceneSpec) -> Result<(RgbImage, GroundTruth), SynthError> {
    let (w, h) = (spec.width as i64, spec.height as i64);
    for cell in &spec.cells {
        let reach = cell.reach() + 4;
        if cell.center.0 - reach < 0
            || cell.center.1 - reach < 0
            || cell.center.0 + reach >= w
            || cell.center.1 + reach >= h
        {
            return Err(SynthError::Spec(format!(
                "cell at {:?} with reach {} does not fit the {}x{} frame",
                cell.center, reach, spec.width, spec.height
            )));
        }
    }
    if !spec.allow_contact {
        for i in 0..spec.cells.len() {
            for j in i + 1..spec.cells.len() {
                let a = &spec.cells[i];
                let b = &spec.cells[j];
                let dx = a.center.0 - b.center.0;
                let dy = a.center.1 - b.center.1;
                let min_sep = a.reach() + b.reach() + 6;
                if dx * dx + dy * dy < min_sep * min_sep {
                    return Err(SynthError::Spec(format!(
                        "cells {i} and {j} overlap beyond allowed adhesion"
                    )));
                }
            }
        }
    }

    let mut img = RgbImage::new(spec.width, spec.height);
    paint(&mut img, None, spec.background_color, |_, _| true);

    // Mature red blood cells: uniform pale disks kept clear of the cells.
    let mut rbc_rng = SplitMix64::new(spec.seed).fork(0xBBC);
    let mut obstacles: Vec<(i64, i64, i64)> = spec
        .cells
        .iter()
        .map(|c| (c.center.0, c.center.1, c.reach()))
        .collect();
    for _ in 0..spec.rbc_count {
        let r = rbc_rng.range_i64(30, 40);
        if let Some((cx, cy)) = place_disk(&mut rbc_rng, w, h, r, &obstacles, 8) {
            paint(&mut img, None, palette::RBC, |x, y| {
                in_disk(x, y, cx, cy, r)
            });
            obstacles.push((cx, cy, r));
        }
    }
    let mut imp_rng = SplitMix64::new(spec.seed).fork(0x1117);
    for _ in 0..spec.impurity_count {
        let r = imp_rng.range_i64(1, 2);
        if let Some((cx, cy)) = place_disk(&mut imp_rng, w, h, r, &obstacles, 8) {
            paint(&mut img, None, palette::IMPURITY, |x, y| {
                in_disk(x, y, cx, cy, r)
            });
            obstacles.push((cx, cy, r));
        }
    }

    let mut truth = GroundTruth::default();
    let mut cell_rng = SplitMix64::new(spec.seed).fork(0xCE11);
    for cell in &spec.cells {
        let mut cell_mask = Mask::new(spec.width, spec.height);
        let mut nucleus_mask = Mask::new(spec.width, spec.height);
        paint(
            &mut img,
            Some(&mut cell_mask),
            cell.cytoplasm_color,
            |x, y| cell.in_body(x, y),
        );
        paint(
            &mut img,
            Some(&mut nucleus_mask),
            cell.nucleus_color,
            |x, y| cell.in_nucleus(x, y),
        );

        // Cytoplasmic particles: small dots kept off the nucleus.
        let margin = 3 + cell.particle_radius;
        for _ in 0..cell.particle_count {
            for _attempt in 0..50 {
                let px = cell_rng.range_i64(
                    cell.center.0 - cell.body_semi.0 + margin,
                    cell.center.0 + cell.body_semi.0 - margin,
                );
                let py = cell_rng.range_i64(
                    cell.center.1 - cell.body_semi.1 + margin,
                    cell.center.1 + cell.body_semi.1 - margin,
                );
                let pr = cell.particle_radius;
                let clear = |x: i64, y: i64| cell.in_body(x, y) && !cell.in_nucleus(x, y);
                if clear(px - pr - 2, py - pr - 2)
                    && clear(px + pr + 2, py + pr + 2)
                    && clear(px - pr - 2, py + pr + 2)
                    && clear(px + pr + 2, py - pr - 2)
                {
                    paint(&mut img, None, cell.particle_color, |x, y| {
                        in_disk(x, y, px, py, pr)
                    });
                    break;
                }
            }
        }

        let nucleus_area = nucleus_mask.count();
        let body_area = cell_mask.count();
        if cell.class == CellClass::Mbe && nucleus_area * 2 >= body_area {
            return Err(SynthError::Constraint(format!(
                "metarubricyte nucleus area {nucleus_area} is not below half of body {body_area}"
            )));
        }
        let bbox = mask_bbox(&cell_mask)
            .ok_or_else(|| SynthError::Constraint("empty cell body".into()))?;
        truth.cells.push(CellTruth {
            class: cell.class,
            nucleus_mask,
            cell_mask,
            bbox,
        });
    }

    let mut noise_rng = SplitMix64::new(spec.seed).fork(0x7015E);
    apply_noise(&mut img, spec.noise_sigma, &mut noise_rng);
    Ok((img, truth))
}

fn place_disk(
    rng: &mut SplitMix64,
    w: i64,
    h: i64,
    r: i64,
    obstacles: &[(i64, i64, i64)],
    clearance: i64,
) -> Option<(i64, i64)> {
    'outer: for _ in 0..200 {
        let cx = rng.range_i64(r + 1, w - r - 2);
        let cy = rng.range_i64(r + 1, h - r - 2);
        for &(ox, oy, or) in obstacles {
            let dx = cx - ox;
            let dy = cy - oy;
            let sep = r + or + clearance;
            if dx * dx + dy * dy < sep * sep {
                continue 'outer;
            }
        }
        return Some((cx, cy));
    }
    None
}

/// Canonical adhesion scenes with exact per-object masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    TwoDisks,
    ThreeChain,
    CellRbc,
}

impl FixtureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FixtureKind::TwoDisks => "two_disks",
            FixtureKind::ThreeChain => "three_chain",
            FixtureKind::CellRbc => "cell_rbc",
        }
    }

    pub fn from_name(s: &str) -> Option<FixtureKind> {
        match s {
            "two_disks" => Some(FixtureKind::TwoDisks),
            "three_chain" => Some(FixtureKind::ThreeChain),
            "cell_rbc" => Some(FixtureKind::CellRbc),
            _ => None,
        }
    }
}

const LOBE_SEMI: (i64, i64) = (24, 36);
const LOBE_NUCLEUS_SEMI: (i64, i64) = (11, 22);
const NECK_HALF: i64 = 3; // designed neck width 6 px

fn fixture_lobe_centers(kind: FixtureKind) -> Vec<(i64, i64)> {
    match kind {
        FixtureKind::TwoDisks => vec![(52, 60), (148, 60)],
        FixtureKind::ThreeChain => vec![(52, 60), (148, 60), (244, 60)],
        FixtureKind::CellRbc => vec![(52, 60)],
    }
}

/// Build one adhesion fixture: oval cell bodies joined by 6 px bridges (plus
/// one fused red blood cell for `CellRbc`), with exact per-object masks. The
/// bridge is split at its midpoint between the two adjacent objects.
pub fn adhesion_fixture(kind: FixtureKind) -> (RgbImage, GroundTruth) {
    let width = match kind {
        FixtureKind::TwoDisks => 200,
        FixtureKind::ThreeChain => 296,
        FixtureKind::CellRbc => 200,
    };
    let height = 120usize;
    let mut img = RgbImage::new(width, height);
    paint(&mut img, None, palette::BACKGROUND, |_, _| true);

    let centers = fixture_lobe_centers(kind);
    let rbc_center: Option<(i64, i64)> = match kind {
        FixtureKind::CellRbc => Some((132, 60)),
        _ => None,
    };
    let rbc_radius = 30i64;

    // Bridges between consecutive objects, 6 px tall, overlapping each
    // neighbor by 2 px.
    let mut bridges: Vec<(i64, i64, i64)> = Vec::new(); // (x0, x1, midpoint)
    for w in 0..centers.len().saturating_sub(1) {
        let a = centers[w];
        let b = centers[w + 1];
        bridges.push((
            a.0 + LOBE_SEMI.0 - 2,
            b.0 - LOBE_SEMI.0 + 2,
            (a.0 + b.0) / 2,
        ));
    }
    if let Some(rc) = rbc_center {
        let a = centers[0];
        bridges.push((
            a.0 + LOBE_SEMI.0 - 2,
            rc.0 - rbc_radius + 2,
            (a.0 + rc.0) / 2,
        ));
    }

    if let Some(rc) = rbc_center {
        paint(&mut img, None, palette::RBC, |x, y| {
            in_disk(x, y, rc.0, rc.1, rbc_radius)
        });
    }

    let in_bridge = |x: i64, y: i64, bridge: &(i64, i64, i64)| {
        x >= bridge.0 && x <= bridge.1 && (y - 60) >= -NECK_HALF && (y - 60) < NECK_HALF
    };

    let mut truth = GroundTruth::default();
    for (k, &(cx, cy)) in centers.iter().enumerate() {
        let mut cell_mask = Mask::new(width, height);
        let body = |x: i64, y: i64| in_ellipse(x, y, cx, cy, LOBE_SEMI.0, LOBE_SEMI.1);
        // The half of each adjacent bridge facing this lobe belongs to it.
        let left_bridge = if k > 0 { bridges.get(k - 1) } else { None };
        let right_bridge = bridges.get(k).filter(|b| {
            // For CellRbc the bridge belongs half to the cell, half to the RBC.
            b.0 >= cx
        });
        let owned = |x: i64, y: i64| {
            if body(x, y) {
                return true;
            }
            if let Some(b) = left_bridge {
                if in_bridge(x, y, b) && x > b.2 {
                    return true;
                }
            }
            if let Some(b) = right_bridge {
                if in_bridge(x, y, b) && x <= b.2 {
                    return true;
                }
            }
            false
        };
        paint(&mut img, Some(&mut cell_mask), palette::CYTO_MBE, owned);
        let mut nucleus_mask = Mask::new(width, height);
        paint(
            &mut img,
            Some(&mut nucleus_mask),
            palette::NUCLEUS,
            |x, y| in_ellipse(x, y, cx, cy, LOBE_NUCLEUS_SEMI.0, LOBE_NUCLEUS_SEMI.1),
        );
        let bbox = mask_bbox(&cell_mask).expect("fixture lobe is nonempty");
        truth.cells.push(CellTruth {
            class: CellClass::Mbe,
            nucleus_mask,
            cell_mask,
            bbox,
        });
    }

    // Paint the far half of bridges whose owner loop did not cover them
    // (between-lobe halves are both painted above; the RBC-side half is not).
    if let (Some(rc), Some(bridge)) = (rbc_center, bridges.last()) {
        paint(&mut img, None, palette::CYTO_MBE, |x, y| {
            in_bridge(x, y, bridge) && x > bridge.2 && !in_disk(x, y, rc.0, rc.1, rbc_radius)
        });
    }

    let mut noise_rng = SplitMix64::new(0xF1C7).fork(kind as u64);
    apply_noise(&mut img, 2, &mut noise_rng);
    (img, truth)
}
