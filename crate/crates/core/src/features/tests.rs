use super::*;

fn synthetic_cell(offset: (usize, usize)) -> (RgbImage, Mask, Mask) {
    // 70x70 patch: nucleus disk r=8, body disk r=16, translated by `offset`.
    let (ox, oy) = offset;
    let mut patch = RgbImage::new(70, 70);
    let mut nucleus = Mask::new(70, 70);
    let mut cell = Mask::new(70, 70);
    let (cx, cy) = (25 + ox, 25 + oy);
    for y in 0..70 {
        for x in 0..70 {
            let d2 = (x as i64 - cx as i64).pow(2) + (y as i64 - cy as i64).pow(2);
            let rgb = if d2 <= 64 {
                (90, 40, 130)
            } else if d2 <= 256 {
                (225, 160, 185)
            } else {
                (245, 240, 245)
            };
            patch.set(x, y, rgb);
            if d2 <= 64 {
                nucleus.set(x, y, true);
            }
            if d2 <= 256 {
                cell.set(x, y, true);
            }
        }
    }
    (patch, nucleus, cell)
}

#[test]
fn all_features_translation_invariant() {
    let (p0, n0, c0) = synthetic_cell((0, 0));
    let (p1, n1, c1) = synthetic_cell((5, 7));
    let f0 = extract_features(&p0, &n0, &c0);
    let f1 = extract_features(&p1, &n1, &c1);
    for k in 0..FEATURE_COUNT {
        assert_eq!(
            f0.values[k], f1.values[k],
            "feature {} changed under translation",
            FEATURE_NAMES[k]
        );
    }
}

#[test]
fn degenerate_cytoplasm_is_flagged_but_finite() {
    let (patch, nucleus, _) = synthetic_cell((0, 0));
    let fv = extract_features(&patch, &nucleus, &nucleus);
    assert!(fv.quality_flagged);
    for (k, v) in fv.values.iter().enumerate() {
        assert!(v.is_finite(), "feature {} is not finite", FEATURE_NAMES[k]);
    }
    assert_eq!(fv.get("c_area"), 0.0);
}

#[test]
fn small_round_nucleus_thin_cytoplasm_ratio() {
    // Nucleus almost as large as the body: area ratio above 1.
    let mut patch = RgbImage::new(50, 50);
    let mut nucleus = Mask::new(50, 50);
    let mut cell = Mask::new(50, 50);
    for y in 0..50 {
        for x in 0..50 {
            let d2 = (x as i64 - 25).pow(2) + (y as i64 - 25).pow(2);
            patch.set(
                x,
                y,
                if d2 <= 144 {
                    (90, 40, 130)
                } else {
                    (225, 160, 185)
                },
            );
            if d2 <= 144 {
                nucleus.set(x, y, true);
            }
            if d2 <= 196 {
                cell.set(x, y, true);
            }
        }
    }
    let fv = extract_features(&patch, &nucleus, &cell);
    assert!(fv.get("nc_area_ratio") > 1.0);
}

#[test]
fn square_nucleus_fills_its_box() {
    let mut patch = RgbImage::new(40, 40);
    let mut nucleus = Mask::new(40, 40);
    let mut cell = Mask::new(40, 40);
    for y in 0..40 {
        for x in 0..40 {
            patch.set(x, y, (150, 120, 180));
            if (10..20).contains(&x) && (12..22).contains(&y) {
                nucleus.set(x, y, true);
            }
            if (6..30).contains(&x) && (6..30).contains(&y) {
                cell.set(x, y, true);
            }
        }
    }
    let fv = extract_features(&patch, &nucleus, &cell);
    assert_eq!(fv.get("n_rectr"), 1.0);
    assert_eq!(fv.get("n_kextr"), 1.0);
}

#[test]
fn hole_ratio_counts_inner_area() {
    let mut patch = RgbImage::new(40, 40);
    for y in 0..40 {
        for x in 0..40 {
            patch.set(x, y, (150, 120, 180));
        }
    }
    // 20x10 filled nucleus (area 200), with a 5x4 hole (area 20).
    let mut nucleus = Mask::new(40, 40);
    for y in 10..20 {
        for x in 8..30 {
            nucleus.set(x, y, true);
        }
    }
    let mut hole_area = 0;
    for y in 13..17 {
        for x in 12..17 {
            nucleus.set(x, y, false);
            hole_area += 1;
        }
    }
    let filled = 10 * 22;
    let mut cell = Mask::new(40, 40);
    for y in 5..25 {
        for x in 4..35 {
            cell.set(x, y, true);
        }
    }
    let fv = extract_features(&patch, &nucleus, &cell);
    assert!((fv.get("ctrv") - hole_area as f64 / filled as f64).abs() < 1e-12);
}

#[test]
fn uniform_color_bcnag_zero() {
    let mut patch = RgbImage::new(30, 30);
    for y in 0..30 {
        for x in 0..30 {
            patch.set(x, y, (100, 90, 140));
        }
    }
    let mut nucleus = Mask::new(30, 30);
    let mut cell = Mask::new(30, 30);
    for y in 10..20 {
        for x in 10..20 {
            nucleus.set(x, y, true);
        }
    }
    for y in 5..25 {
        for x in 5..25 {
            cell.set(x, y, true);
        }
    }
    let fv = extract_features(&patch, &nucleus, &cell);
    assert_eq!(fv.get("bcnag"), 0.0);
}

#[test]
fn constructed_bcnag_difference() {
    let mut patch = RgbImage::new(30, 30);
    let mut nucleus = Mask::new(30, 30);
    let mut cell = Mask::new(30, 30);
    for y in 5..25 {
        for x in 5..25 {
            cell.set(x, y, true);
            patch.set(x, y, (10, 10, 120));
        }
    }
    for y in 10..20 {
        for x in 10..20 {
            nucleus.set(x, y, true);
            patch.set(x, y, (10, 10, 50));
        }
    }
    let fv = extract_features(&patch, &nucleus, &cell);
    assert_eq!(fv.get("bcnag"), 70.0);
    assert_eq!(fv.get("bnag"), 50.0);
}

#[test]
fn csv_round_trip() {
    let (patch, nucleus, cell) = synthetic_cell((0, 0));
    let fv = extract_features(&patch, &nucleus, &cell);
    let rows = vec![(fv.clone(), Some(CellClass::Mbe)), (fv, None)];
    let text = write_features_csv(&rows);
    let parsed = read_features_csv(&text).unwrap();
    assert_eq!(parsed.len(), 2);
    assert_eq!(parsed[0].1, Some(CellClass::Mbe));
    assert_eq!(parsed[1].1, None);
    for k in 0..FEATURE_COUNT {
        assert!((parsed[0].0[k] - rows_value(&text, k)).abs() < 1e-9);
    }
    // Header mismatch errors.
    assert_eq!(read_features_csv("a,b\n").unwrap_err(), CsvError::BadHeader);
}

fn rows_value(csv: &str, column: usize) -> f64 {
    csv.lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(column)
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn ratios_recompute_from_published_metrics() {
    let (patch, nucleus, cell) = synthetic_cell((0, 0));
    let fv = extract_features(&patch, &nucleus, &cell);
    assert_eq!(fv.get("nc_area_ratio"), fv.get("n_area") / fv.get("c_area"));
    assert_eq!(
        fv.get("nb_perimeter_ratio"),
        fv.get("n_perimeter") / fv.get("b_perimeter")
    );
}

#[test]
fn deterministic_extraction() {
    let (patch, nucleus, cell) = synthetic_cell((2, 3));
    let a = extract_features(&patch, &nucleus, &cell);
    let b = extract_features(&patch, &nucleus, &cell);
    assert_eq!(a, b);
}

#[test]
fn class_mnemonics_round_trip() {
    for c in CellClass::ALL {
        assert_eq!(CellClass::from_mnemonic(c.mnemonic()), Some(c));
    }
    assert_eq!(CellClass::from_mnemonic("XYZ"), None);
}
