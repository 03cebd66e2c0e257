//! Acceptance suite: one test per criterion, each printing a pass line
//! (`cargo test -p bmc-core --test acceptance -- --nocapture` to see them).

use bmc_core::classification::{
    evaluate, load_model, save_model, svm_predict, svm_train, BinarySmo, SvmParams,
};
use bmc_core::colortransforms::{
    bsg_pixel, hsg_pixel, particle_report, texture_image, BsgParams, HsgParams,
};
use bmc_core::features::{extract_features, CellClass, FEATURE_COUNT, FEATURE_NAMES};
use bmc_core::imgcore::{
    connected_components, skeletonize, Connectivity, GrayImage, Mask, RgbImage,
};
use bmc_core::pipeline::{detect_cells, PipelineParams};
use bmc_core::synthgen::{
    adhesion_fixture, generate_dataset, generate_scene, CellSpec, DatasetOptions, FixtureKind,
    SceneSpec, SplitMix64,
};
use bmc_core::thresholding::{otsu_from_histogram, sam_levels};
use std::time::Instant;

// ---------------------------------------------------------------------------
// 1. Otsu oracle equivalence
// ---------------------------------------------------------------------------

/// Exhaustive 255-cut brute force with the same exact-integer argmax rule.
fn otsu_brute_force(hist: &[u64; 256]) -> Option<u8> {
    let n: i128 = hist.iter().map(|&c| c as i128).sum();
    let total: i128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as i128 * c as i128)
        .sum();
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..255usize {
        let mut w0: i128 = 0;
        let mut s0: i128 = 0;
        for v in 0..=t {
            w0 += hist[v] as i128;
            s0 += v as i128 * hist[v] as i128;
        }
        let w1 = n - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let a = s0 * n - total * w0;
        let num = (a * a) as u128;
        let den = (w0 * w1) as u128;
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    best.map(|(t, _, _)| t)
}

#[test]
fn acceptance_1_otsu_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x015);
    let mut checked = 0usize;
    for _ in 0..1000 {
        let mut hist = [0u64; 256];
        let bins = rng.range_usize(2, 40);
        for _ in 0..bins {
            let v = rng.range_usize(0, 255);
            hist[v] += rng.range_i64(1, 5000) as u64;
        }
        if hist.iter().filter(|&&c| c > 0).count() < 2 {
            hist[0] += 1;
            hist[255] += 1;
        }
        let got = otsu_from_histogram(&hist).expect("two occupied bins");
        let want = otsu_brute_force(&hist).expect("two occupied bins");
        assert_eq!(got, want, "histogram mismatch");
        checked += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("acceptance 1 (otsu oracle equivalence): PASS ({checked} histograms in {elapsed:?})");
}

// ---------------------------------------------------------------------------
// 2. SAM recovery on four-mode images
// ---------------------------------------------------------------------------

#[test]
fn acceptance_2_sam_recovers_four_modes() {
    let modes = [20i64, 90, 160, 230];
    for seed in 0..100u64 {
        let mut rng = SplitMix64::new(seed);
        let mut data = Vec::with_capacity(200 * 200);
        for _ in 0..200 * 200 {
            let pick = rng.range_i64(0, 99);
            let mode = if pick < 60 {
                modes[0]
            } else if pick < 80 {
                modes[1]
            } else if pick < 92 {
                modes[2]
            } else {
                modes[3]
            };
            // Uniform noise in [-8, 8]: sigma ~ 4.9 <= 5.
            data.push((mode + rng.range_i64(-8, 8)).clamp(0, 255) as u8);
        }
        let img = GrayImage::from_vec(200, 200, data);
        let levels = sam_levels(&img, false).expect("four strata").final_levels;
        let got = [
            levels.background,
            levels.rbc,
            levels.cytoplasm,
            levels.nucleus,
        ];
        for (g, m) in got.iter().zip(&modes) {
            assert!(
                (g - *m as f64).abs() <= 10.0,
                "seed {seed}: level {g:.2} not within 10 of mode {m}"
            );
        }
        assert!(
            got[0] < got[1] && got[1] < got[2] && got[2] < got[3],
            "seed {seed}: levels not ascending: {got:?}"
        );
    }
    println!("acceptance 2 (stepwise-averaging mode recovery): PASS (100 seeds, all levels within \u{b1}10)");
}

// ---------------------------------------------------------------------------
// 3. Transform unit suite against direct-evaluation oracles
// ---------------------------------------------------------------------------

fn oracle_hsi(r: u8, g: u8, b: u8) -> (f64, f64) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let sum = rf + gf + bf;
    if sum == 0.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - 3.0 * rf.min(gf).min(bf) / sum;
    let s8 = (255.0 * s + 0.5).floor().clamp(0.0, 255.0);
    if s8 == 0.0 {
        return (0.0, 0.0);
    }
    let num = 0.5 * ((rf - gf) + (rf - bf));
    let den = ((rf - gf) * (rf - gf) + (rf - bf) * (gf - bf)).sqrt();
    let h_deg = if den == 0.0 {
        0.0
    } else {
        let theta = (num / den).clamp(-1.0, 1.0).acos().to_degrees();
        if bf <= gf {
            theta
        } else {
            360.0 - theta
        }
    };
    ((h_deg / 360.0 * 255.0 + 0.5).floor().clamp(0.0, 255.0), s8)
}

#[test]
fn acceptance_3_transform_oracles() {
    let mut rng = SplitMix64::new(0x3333);

    // Eq-style enhancement: 10k random pixels, exact integer match.
    let hp = HsgParams::default();
    for _ in 0..10_000 {
        let (r, g, b) = (
            rng.range_i64(0, 255) as u8,
            rng.range_i64(0, 255) as u8,
            rng.range_i64(0, 255) as u8,
        );
        let got = hsg_pixel(r, g, b, &hp);
        let want = if g == 0 {
            255u8
        } else {
            // Documented evaluation order: scale * ((w1*H + w2*S) / (w3*G)).
            let (h8, s8) = oracle_hsi(r, g, b);
            let raw = hp.scale * ((hp.w1 * h8 + hp.w2 * s8) / (hp.w3 * g as f64));
            (raw + 0.5).floor().clamp(0.0, 255.0) as u8
        };
        assert_eq!(got, want, "enhancement mismatch at ({r},{g},{b})");
    }

    // Weakening transform, both blend weights.
    for _ in 0..10_000 {
        let (g, b) = (rng.range_i64(0, 255) as u8, rng.range_i64(0, 255) as u8);
        for lambda in [1.0, 0.5] {
            let got = bsg_pixel(g, b, &BsgParams { lambda });
            let v = lambda * (b as f64 - g as f64) + (1.0 - lambda) * (255.0 - g as f64);
            let want = if v > 0.0 {
                (v + 0.5).floor().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            assert_eq!(got, want, "weakening mismatch at ({g},{b},{lambda})");
        }
    }

    // Texture image: population variance of the full 3x3 window with edge
    // replication, on 100 random 12x9 images (10.8k pixels).
    for _ in 0..100 {
        let mut img = GrayImage::new(12, 9);
        for y in 0..9 {
            for x in 0..12 {
                img.set(x, y, rng.range_i64(0, 255) as u8);
            }
        }
        let got = texture_image(&img);
        for y in 0..9i64 {
            for x in 0..12i64 {
                let mut vals = Vec::with_capacity(9);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let cx = (x + dx).clamp(0, 11) as usize;
                        let cy = (y + dy).clamp(0, 8) as usize;
                        vals.push(img.get(cx, cy) as f64);
                    }
                }
                let mean = vals.iter().sum::<f64>() / 9.0;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 9.0;
                let want = (var + 0.5).floor().clamp(0.0, 255.0) as u8;
                assert_eq!(
                    got.get(x as usize, y as usize),
                    want,
                    "variance mismatch at ({x},{y})"
                );
            }
        }
    }

    // Particle counting: brute-force recount of the zero-level components
    // applying the intersection/area predicate, on 60 random 20x20 fixtures.
    for _ in 0..60 {
        let mut bsg = GrayImage::new(20, 20);
        let mut nwig = Mask::new(20, 20);
        for y in 0..20 {
            for x in 0..20 {
                bsg.set(
                    x,
                    y,
                    if rng.chance(3, 10) {
                        0
                    } else {
                        rng.range_i64(1, 255) as u8
                    },
                );
                nwig.set(x, y, rng.chance(1, 6));
            }
        }
        let t_s = rng.range_usize(1, 6);
        let limit = rng.range_usize(1, 6);
        let report = particle_report(&bsg, &nwig, t_s, limit);

        let zero = Mask::from_vec(
            20,
            20,
            bsg.data()
                .iter()
                .map(|&v| if v == 0 { 255 } else { 0 })
                .collect(),
        );
        let cc = connected_components(&zero, Connectivity::Eight);
        let mut want = 0usize;
        for region in &cc.regions {
            if region.pixel_count <= t_s {
                continue;
            }
            let mut touches = false;
            for y in 0..20 {
                for x in 0..20 {
                    if cc.label(x, y) == region.id && nwig.is_set(x, y) {
                        touches = true;
                    }
                }
            }
            if !touches {
                want += 1;
            }
        }
        assert_eq!(report.particle_count, want);
        assert_eq!(report.colors_consistent, want < limit);
        let mask_count = report.particle_mask.count();
        let recount: usize = cc
            .regions
            .iter()
            .filter(|r| {
                r.pixel_count > t_s
                    && !(0..20)
                        .any(|y| (0..20).any(|x| cc.label(x, y) == r.id && nwig.is_set(x, y)))
            })
            .map(|r| r.pixel_count)
            .sum();
        assert_eq!(mask_count, recount);
    }

    println!(
        "acceptance 3 (transform oracles): PASS (enhancement, weakening, variance, particles)"
    );
}

// ---------------------------------------------------------------------------
// 4. Segmentation fixtures and single-cell scenes
// ---------------------------------------------------------------------------

fn match_cell<'a>(
    detection: &'a bmc_core::pipeline::Detection,
    gt: &bmc_core::synthgen::CellTruth,
) -> Option<&'a bmc_core::pipeline::DetectedCell> {
    let cx = (gt.bbox.x0 + gt.bbox.x1) / 2;
    let cy = (gt.bbox.y0 + gt.bbox.y1) / 2;
    detection
        .cells
        .iter()
        .find(|c| c.instance.combined_roi.contains(cx, cy))
}

#[test]
fn acceptance_4_segmentation_fixtures() {
    let params = PipelineParams::default();

    let (img, truth) = adhesion_fixture(FixtureKind::TwoDisks);
    let detection = detect_cells(&img, &params).expect("pipeline");
    assert_eq!(
        detection.cells.len(),
        2,
        "two_disks must split into exactly 2 objects"
    );
    for gt in &truth.cells {
        let cell = match_cell(&detection, gt).expect("matching object");
        let dice = cell
            .instance
            .cell_mask
            .dice(&gt.cell_mask.crop(cell.instance.combined_roi));
        assert!(dice >= 0.85, "two_disks object dice {dice:.3}");
    }

    let (img, _) = adhesion_fixture(FixtureKind::ThreeChain);
    let detection = detect_cells(&img, &params).expect("pipeline");
    assert_eq!(
        detection.cells.len(),
        3,
        "three_chain must yield exactly 3 objects"
    );

    // 50 single-cell scenes (10 per class): average Dice.
    let mut nucleus_sum = 0.0;
    let mut body_sum = 0.0;
    let mut count = 0usize;
    for class in CellClass::ALL {
        for seed in 0..10u64 {
            let stream = seed * 131 + class.index() as u64;
            let mut rng = SplitMix64::new(stream);
            let mut spec = SceneSpec::new(stream.wrapping_add(0xACC4), 384, 384);
            spec.cells
                .push(CellSpec::sample(class, (192, 192), &mut rng));
            spec.rbc_count = 4;
            spec.impurity_count = 3;
            let (img, truth) = generate_scene(&spec).expect("scene");
            let detection = detect_cells(&img, &params).expect("pipeline");
            let gt = &truth.cells[0];
            let cell = match_cell(&detection, gt)
                .unwrap_or_else(|| panic!("{class} seed {seed}: cell not detected"));
            let roi = cell.instance.combined_roi;
            nucleus_sum += cell.instance.nucleus_mask.dice(&gt.nucleus_mask.crop(roi));
            body_sum += cell.instance.cell_mask.dice(&gt.cell_mask.crop(roi));
            count += 1;
        }
    }
    let nucleus_avg = nucleus_sum / count as f64;
    let body_avg = body_sum / count as f64;
    assert!(nucleus_avg >= 0.90, "nucleus dice average {nucleus_avg:.3}");
    assert!(body_avg >= 0.85, "body dice average {body_avg:.3}");
    println!(
        "acceptance 4 (segmentation fixtures): PASS (2+3 objects; nucleus dice {nucleus_avg:.3}, body dice {body_avg:.3} over {count} scenes)"
    );
}

// ---------------------------------------------------------------------------
// 5. Feature invariances and profile oracles
// ---------------------------------------------------------------------------

fn lobed_cell(offset: (usize, usize), bridge: bool) -> (RgbImage, Mask, Mask) {
    let mut patch = RgbImage::new(90, 90);
    let mut nucleus = Mask::new(90, 90);
    let mut cell = Mask::new(90, 90);
    let (ox, oy) = (offset.0 as i64, offset.1 as i64);
    for y in 0..90i64 {
        for x in 0..90i64 {
            patch.set(x as usize, y as usize, (240, 200, 215));
            let body = (x - 40 - ox).pow(2) + (y - 40 - oy).pow(2) <= 33 * 33;
            let lobe_a = (x - 30 - ox).pow(2) + (y - 40 - oy).pow(2) <= 100;
            let lobe_b = (x - 52 - ox).pow(2) + (y - 40 - oy).pow(2) <= 100;
            let fil = bridge && (30 + ox..=52 + ox).contains(&x) && (y - 40 - oy).abs() <= 1;
            if body {
                cell.set(x as usize, y as usize, true);
                patch.set(x as usize, y as usize, (228, 170, 190));
            }
            if lobe_a || lobe_b || fil {
                nucleus.set(x as usize, y as usize, true);
                patch.set(x as usize, y as usize, (90, 42, 128));
            }
        }
    }
    (patch, nucleus, cell)
}

// Independent 3x3 erosion for the profile oracle.
fn oracle_erode(mask: &Mask) -> Mask {
    let mut out = Mask::new(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let mut all = true;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if !mask.is_set_i(x as i64 + dx, y as i64 + dy) {
                        all = false;
                    }
                }
            }
            out.set(x, y, all && mask.is_set(x, y));
        }
    }
    out
}

// Independent 8-connected component count via flood fill.
fn oracle_components(mask: &Mask) -> usize {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut count = 0usize;
    for sy in 0..h {
        for sx in 0..w {
            if !mask.is_set(sx, sy) || seen[sy * w + sx] {
                continue;
            }
            count += 1;
            let mut stack = vec![(sx, sy)];
            seen[sy * w + sx] = true;
            while let Some((x, y)) = stack.pop() {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if mask.is_set_i(nx, ny) && !seen[ny as usize * w + nx as usize] {
                            seen[ny as usize * w + nx as usize] = true;
                            stack.push((nx as usize, ny as usize));
                        }
                    }
                }
            }
        }
    }
    count
}

#[test]
fn acceptance_5_feature_invariances() {
    // Translation invariance: all 39 exactly equal.
    let (p0, n0, c0) = lobed_cell((0, 0), true);
    let (p1, n1, c1) = lobed_cell((5, 7), true);
    let f0 = extract_features(&p0, &n0, &c0);
    let f1 = extract_features(&p1, &n1, &c1);
    for k in 0..FEATURE_COUNT {
        assert_eq!(
            f0.values[k], f1.values[k],
            "{} not translation invariant",
            FEATURE_NAMES[k]
        );
    }

    // Hu stability under 90-degree rotation, within 0.05 compressed units.
    let (_, n, _) = lobed_cell((0, 0), true);
    let mut rot = Mask::new(90, 90);
    for y in 0..90 {
        for x in 0..90 {
            if n.is_set(x, y) {
                rot.set(89 - y, x, true);
            }
        }
    }
    let hu_a = bmc_core::features::hu_moments_compressed(&n);
    let hu_b = bmc_core::features::hu_moments_compressed(&rot);
    for k in 0..3 {
        assert!(
            (hu_a[k] - hu_b[k]).abs() <= 0.05,
            "hu{} drift {}",
            k + 1,
            (hu_a[k] - hu_b[k]).abs()
        );
    }

    // Co-occurrence sanity on a constant region: energy exactly 1, contrast 0.
    let flat = GrayImage::from_vec(16, 16, vec![97; 256]);
    let full = Mask::from_vec(16, 16, vec![255; 256]);
    let (contrast, energy, _, ok) = bmc_core::features::glcm_features(&flat, &full);
    assert!(ok);
    assert_eq!(energy, 1.0);
    assert_eq!(contrast, 0.0);

    // Erosion-profile and skeleton features vs independent oracles on 20
    // fixtures.
    let mut rng = SplitMix64::new(0x555);
    for fixture in 0..20usize {
        let mut mask = Mask::new(48, 48);
        let blobs = rng.range_usize(1, 3);
        for _ in 0..blobs {
            let cx = rng.range_i64(12, 36);
            let cy = rng.range_i64(12, 36);
            let r = rng.range_i64(4, 9);
            for y in 0..48i64 {
                for x in 0..48i64 {
                    if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                        mask.set(x as usize, y as usize, true);
                    }
                }
            }
        }
        if fixture % 3 == 0 {
            // A thin bridge forces an early split.
            for x in 10..38 {
                mask.set(x, 24, true);
            }
        }

        let profile = bmc_core::features::erosion_profile(&mask);
        // Oracle: independent erosion + flood-fill component counting.
        let mut cur = mask.clone();
        let mut step = 0usize;
        let mut first_split = 0usize;
        let mut max_c = 0usize;
        loop {
            let c = oracle_components(&cur);
            max_c = max_c.max(c);
            if c >= 2 && first_split == 0 {
                first_split = step;
            }
            if c == 0 {
                break;
            }
            cur = oracle_erode(&cur);
            step += 1;
        }
        assert_eq!(profile.first_split_step, first_split, "fixture {fixture}");
        assert_eq!(profile.empty_step, step, "fixture {fixture}");
        assert_eq!(profile.max_components, max_c, "fixture {fixture}");
        let want_kad = if first_split == 0 {
            0.0
        } else {
            first_split as f64 / step as f64
        };
        assert_eq!(profile.adhesion_degree, want_kad, "fixture {fixture}");

        // Skeleton features: ratio recomputes, skeleton is a thin subset and
        // preserves the component count on these hole-free fixtures.
        let (lk, rl) = bmc_core::features::skeleton_features(&mask);
        let skel = skeletonize(&mask);
        assert_eq!(lk, skel.count() as f64);
        assert_eq!(rl, lk / mask.count() as f64);
        assert!((0.0..=1.0).contains(&rl));
        for y in 0..48 {
            for x in 0..48 {
                assert!(!skel.is_set(x, y) || mask.is_set(x, y));
            }
        }
        for y in 1..47i64 {
            for x in 1..47i64 {
                let all =
                    (-1..=1).all(|dy: i64| (-1..=1).all(|dx: i64| skel.is_set_i(x + dx, y + dy)));
                assert!(
                    !all,
                    "skeleton not 1-px wide at ({x},{y}) in fixture {fixture}"
                );
            }
        }
        assert!(
            oracle_components(&skel) <= oracle_components(&mask),
            "fixture {fixture}"
        );
    }
    println!("acceptance 5 (feature invariances): PASS (translation exact, hu<=0.05, co-occurrence exact, 20 profile fixtures)");
}

// ---------------------------------------------------------------------------
// 6. Classifier correctness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_6_classifier_correctness() {
    // KKT within 1e-3 and duals inside the box on every training run.
    let datasets: Vec<(Vec<Vec<f64>>, Vec<f64>, f64, f64)> = vec![
        // Separable clusters.
        (
            (0..10)
                .map(|i| vec![if i % 2 == 0 { -2.0 } else { 2.0 } + i as f64 * 0.01, 0.3])
                .collect(),
            (0..10)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
            10.0,
            0.09,
        ),
        // XOR at the published defaults.
        (
            vec![
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
            ],
            vec![1.0, 1.0, -1.0, -1.0],
            10.0,
            0.09,
        ),
        // Heavily overlapping line.
        (
            (0..16)
                .map(|i| vec![i as f64 / 8.0, 0.2 * i as f64 / 8.0])
                .collect(),
            (0..16)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
            2.0,
            0.5,
        ),
    ];
    for (k, (xs, ys, c, gamma)) in datasets.iter().enumerate() {
        let mut smo = BinarySmo::new(xs, ys, *c, *gamma, 1e-3);
        let result = smo.solve(1000);
        assert_eq!(smo.kkt_violations(1e-3), 0, "dataset {k}: KKT violated");
        for &a in &result.alpha {
            assert!(
                (-1e-9..=c + 1e-9).contains(&a),
                "dataset {k}: alpha {a} outside box"
            );
        }
    }

    // 100% training accuracy on separable and XOR fixtures through the
    // one-vs-one model.
    let mut rows = Vec::new();
    for i in 0..6 {
        let mut a = [0.0; FEATURE_COUNT];
        a[0] = -3.0 + i as f64 * 0.05;
        rows.push((a, CellClass::Mbe));
        let mut b = [0.0; FEATURE_COUNT];
        b[0] = 3.0 + i as f64 * 0.05;
        rows.push((b, CellClass::Mls));
    }
    let model = svm_train(&rows, &SvmParams::default(), "acc6-separable").unwrap();
    for (f, l) in &rows {
        assert_eq!(
            svm_predict(&model, f).class,
            *l,
            "separable training accuracy"
        );
    }

    let mut xor_rows = Vec::new();
    for (x0, x1, class) in [
        (0.0, 0.0, CellClass::Nstg),
        (1.0, 1.0, CellClass::Nstg),
        (0.2, 0.2, CellClass::Nstg),
        (0.0, 1.0, CellClass::Ocs),
        (1.0, 0.0, CellClass::Ocs),
        (0.8, 0.2, CellClass::Ocs),
    ] {
        let mut f = [0.0; FEATURE_COUNT];
        f[0] = x0;
        f[1] = x1;
        xor_rows.push((f, class));
    }
    let model = svm_train(&xor_rows, &SvmParams::default(), "acc6-xor").unwrap();
    for (f, l) in &xor_rows {
        assert_eq!(svm_predict(&model, f).class, *l, "xor training accuracy");
    }
    // Dual coefficients stay inside the box in the persisted model too.
    for sv in &model.support_vectors {
        for &coef in &sv.pair_coefs {
            assert!(coef.abs() <= model.manifest.params.c + 1e-9);
        }
    }

    // Save/load round trip: identical predictions on 100 random vectors.
    let mut rng = SplitMix64::new(0x606);
    let mut rows = Vec::new();
    for (ci, class) in CellClass::ALL.iter().enumerate() {
        for j in 0..6 {
            let mut f = [0.0; FEATURE_COUNT];
            f[0] = ci as f64 * 5.0 + j as f64 * 0.1;
            f[1] = (ci as f64 * 1.7).sin() * 4.0;
            f[2] = j as f64 * 0.3;
            rows.push((f, *class));
        }
    }
    let model = svm_train(&rows, &SvmParams::default(), "acc6-roundtrip").unwrap();
    let loaded = load_model(&save_model(&model)).unwrap();
    for _ in 0..100 {
        let mut probe = [0.0; FEATURE_COUNT];
        for v in probe.iter_mut() {
            *v = rng.range_i64(-100, 400) as f64 / 10.0;
        }
        assert_eq!(svm_predict(&model, &probe), svm_predict(&loaded, &probe));
    }
    println!("acceptance 6 (classifier correctness): PASS (KKT, box, separable+xor accuracy, round trip)");
}

// ---------------------------------------------------------------------------
// 7. End-to-end synthetic benchmark
// ---------------------------------------------------------------------------

#[test]
fn acceptance_7_end_to_end_benchmark() {
    let started = Instant::now();
    let opts = DatasetOptions::new(200, 20260808);
    let data = generate_dataset(&opts, &PipelineParams::default());
    assert!(
        data.skipped.len() <= data.scenes / 20,
        "too many skipped scenes: {} of {}",
        data.skipped.len(),
        data.scenes
    );
    let model = svm_train(&data.train, &SvmParams::default(), "acceptance-benchmark").unwrap();
    let report = evaluate(&model, &data.test);
    let elapsed = started.elapsed();

    println!(
        "synthetic benchmark, held-out 20% ({} rows):",
        data.test.len()
    );
    for (name, recall) in report.classes.iter().zip(&report.per_class_recall) {
        match recall {
            Some(r) => println!("  {name}: recall {:.4}", r),
            None => println!("  {name}: absent"),
        }
    }
    println!("  average recognition rate: {:.4}", report.arr);
    println!(
        "  reference (previously published SVM row, proprietary clinical dataset; NOT comparable \
         with this synthetic benchmark): NSTG 87.43% NSBG 87.06% MBE 81.24% MLS 82.52% OCS 99.22% ARR 87.49%"
    );

    for (name, recall) in report.classes.iter().zip(&report.per_class_recall) {
        let r = recall.unwrap_or(0.0);
        assert!(r >= 0.80, "{name} recall {r:.3} below 0.80");
    }
    assert!(
        report.arr >= 0.90,
        "average recognition rate {:.4} below 0.90",
        report.arr
    );
    assert!(elapsed.as_secs() < 600, "benchmark took {elapsed:?}");
    println!(
        "acceptance 7 (end-to-end benchmark): PASS (arr {:.4}, {} scenes in {elapsed:?})",
        report.arr, data.scenes
    );
}

// ---------------------------------------------------------------------------
// 8. Determinism
// ---------------------------------------------------------------------------

#[test]
fn acceptance_8_byte_determinism() {
    let run = || {
        let mut rng = SplitMix64::new(88);
        let mut spec = SceneSpec::new(0xD37, 384, 384);
        spec.cells
            .push(CellSpec::sample(CellClass::Nsbg, (190, 190), &mut rng));
        spec.rbc_count = 5;
        spec.impurity_count = 2;
        let (img, _) = generate_scene(&spec).unwrap();
        let scene_bytes = bmc_core::imgcore::write_ppm(&img);

        let detection = detect_cells(&img, &PipelineParams::default()).unwrap();
        let rows: Vec<_> = detection
            .cells
            .iter()
            .map(|c| (c.instance.features.clone(), Some(CellClass::Nsbg)))
            .collect();
        let csv = bmc_core::features::write_features_csv(&rows);

        let opts = DatasetOptions::new(3, 99);
        let data = generate_dataset(&opts, &PipelineParams::default());
        let model = svm_train(&data.train, &SvmParams::default(), "determinism").unwrap();
        let model_text = save_model(&model);
        let report = evaluate(&model, &data.test);
        let report_json = serde_json::to_string_pretty(&report).unwrap();
        (scene_bytes, csv, model_text, report_json)
    };
    let a = run();
    let b = run();
    assert_eq!(a.0, b.0, "scene bytes differ");
    assert_eq!(a.1, b.1, "feature csv differs");
    assert_eq!(a.2, b.2, "model file differs");
    assert_eq!(a.3, b.3, "evaluation report differs");
    println!("acceptance 8 (determinism): PASS (scene, csv, model, report byte-identical)");
}
