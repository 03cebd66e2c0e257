//! Stage artifact formats shared by the stagewise commands and the
//! monolithic `detect`, so piping the stages reproduces its intermediate
//! state bit-exactly.

use bmc_core::imgcore::{read_pgm, write_pgm, Mask, Roi};
use bmc_core::localization::Candidate;
use bmc_core::pipeline::Detection;
use std::fs;
use std::path::Path;

/// ROI list: one `x0,y0,x1,y1,kind` line per rectangle.
pub fn roi_csv(candidates: &[Candidate]) -> String {
    let mut out = String::new();
    for c in candidates {
        for (roi, kind) in [
            (c.nucleus_roi, "nucleus"),
            (c.cytoplasm_roi, "cytoplasm"),
            (c.combined_roi, "combined"),
        ] {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                roi.x0, roi.y0, roi.x1, roi.y1, kind
            ));
        }
    }
    out
}

pub fn parse_roi_csv(text: &str) -> Result<Vec<(Roi, String)>, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format!("roi csv line {}: expected 5 fields", i + 1));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("roi csv line {}: bad number `{s}`", i + 1))
        };
        let roi = Roi::new(
            num(fields[0])?,
            num(fields[1])?,
            num(fields[2])?,
            num(fields[3])?,
        );
        let kind = fields[4].trim().to_string();
        if !matches!(kind.as_str(), "nucleus" | "cytoplasm" | "combined") {
            return Err(format!("roi csv line {}: unknown kind `{kind}`", i + 1));
        }
        rows.push((roi, kind));
    }
    Ok(rows)
}

/// Write per-cell masks (`<id>.nucleus.pgm`, `<id>.cell.pgm`), the cell
/// index csv, and optionally the remaining per-stage planes.
pub fn write_segment_dir(dir: &Path, detection: &Detection, debug: bool) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = String::from("id,x0,y0,x1,y1\n");
    for cell in &detection.cells {
        let id = cell.instance.id;
        let roi = cell.instance.combined_roi;
        index.push_str(&format!(
            "{},{},{},{},{}\n",
            id, roi.x0, roi.y0, roi.x1, roi.y1
        ));
        fs::write(
            dir.join(format!("{id}.nucleus.pgm")),
            cell.instance.nucleus_mask.write_pgm(),
        )?;
        fs::write(
            dir.join(format!("{id}.cell.pgm")),
            cell.instance.cell_mask.write_pgm(),
        )?;
        if debug {
            let ctx = &cell.context;
            let planes = [
                ("hsg", write_pgm(&ctx.hsg)),
                ("hsgm", write_pgm(&ctx.hsg_m)),
                ("bsg", write_pgm(&ctx.bsg)),
                ("teig", write_pgm(&ctx.teig)),
                ("nwig", ctx.nwig.write_pgm()),
                ("cwpig", ctx.cwpig.write_pgm()),
                ("kmimg", write_pgm(&ctx.kmimg)),
                ("pdg", ctx.pdg_mask.write_pgm()),
                ("markers", write_pgm(&ctx.markers.to_gray())),
            ];
            for (stage, bytes) in planes {
                fs::write(dir.join(format!("{id}.{stage}.pgm")), bytes)?;
            }
        }
    }
    fs::write(dir.join("cells.csv"), index)?;
    Ok(())
}

pub struct SegmentedEntry {
    pub id: usize,
    pub roi: Roi,
    pub nucleus: Mask,
    pub cell: Mask,
}

pub fn read_segment_dir(dir: &Path) -> Result<Vec<SegmentedEntry>, String> {
    let index = fs::read_to_string(dir.join("cells.csv"))
        .map_err(|e| format!("cannot read {}: {e}", dir.join("cells.csv").display()))?;
    let mut out = Vec::new();
    for (i, line) in index.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format!("cells.csv line {}: expected 5 fields", i + 1));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("cells.csv line {}: bad number", i + 1))
        };
        let id = num(fields[0])?;
        let roi = Roi::new(
            num(fields[1])?,
            num(fields[2])?,
            num(fields[3])?,
            num(fields[4])?,
        );
        let load = |suffix: &str| -> Result<Mask, String> {
            let path = dir.join(format!("{id}.{suffix}.pgm"));
            let bytes =
                fs::read(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let img = read_pgm(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Mask::from_vec(
                img.width(),
                img.height(),
                img.data().to_vec(),
            ))
        };
        let nucleus = load("nucleus")?;
        let cell = load("cell")?;
        if nucleus.width() != roi.width() || nucleus.height() != roi.height() {
            return Err(format!(
                "cell {id}: mask dimensions do not match its rectangle"
            ));
        }
        out.push(SegmentedEntry {
            id,
            roi,
            nucleus,
            cell,
        });
    }
    Ok(out)
}
