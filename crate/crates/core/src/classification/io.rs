//! Versioned text serialization of trained models (`bmcsvm-v1`).
//!
//! Header lines are `key value` pairs (params, class list, per-feature
//! scaling), followed by one `sv` line per support vector carrying its class,
//! the dual coefficient for every class pair, and the scaled features.

use super::{ClassifierError, ScalingRecord, SupportVector, SvmModel, SvmParams, TrainManifest};
use crate::features::CellClass;

const VERSION: &str = "bmcsvm-v1";

pub fn save_model(model: &SvmModel) -> String {
    let mut out = String::new();
    out.push_str(VERSION);
    out.push('\n');
    let p = &model.manifest.params;
    out.push_str("kernel rbf\n");
    out.push_str(&format!("c {}\n", p.c));
    out.push_str(&format!("gamma {}\n", p.gamma));
    out.push_str(&format!("degree {}\n", p.degree));
    out.push_str(&format!("coef0 {}\n", p.coef0));
    out.push_str(&format!("nu {}\n", p.nu));
    out.push_str(&format!("p {}\n", p.p));
    out.push_str(&format!("max_iter {}\n", p.max_iter));
    out.push_str(&format!("tolerance {}\n", p.tolerance));
    out.push_str(&format!("seed {}\n", model.manifest.seed));
    out.push_str(&format!(
        "dataset_digest {}\n",
        model.manifest.dataset_digest
    ));
    let class_names: Vec<&str> = model.classes.iter().map(|c| c.mnemonic()).collect();
    out.push_str(&format!("classes {}\n", class_names.join(" ")));
    out.push_str(&format!("features {}\n", model.scaling.min.len()));
    for k in 0..model.scaling.min.len() {
        out.push_str(&format!(
            "scale {} {} {}\n",
            k, model.scaling.min[k], model.scaling.max[k]
        ));
    }
    out.push_str(&format!("pairs {}\n", model.pair_bias.len()));
    for (p_idx, bias) in model.pair_bias.iter().enumerate() {
        out.push_str(&format!("bias {} {}\n", p_idx, bias));
    }
    out.push_str(&format!("sv_count {}\n", model.support_vectors.len()));
    for sv in &model.support_vectors {
        let coefs: Vec<String> = sv.pair_coefs.iter().map(|c| c.to_string()).collect();
        let feats: Vec<String> = sv.features.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!(
            "sv {} {} {}\n",
            sv.class_index,
            coefs.join(","),
            feats.join(",")
        ));
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str), ClassifierError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| ClassifierError::ModelFormat("unexpected end of file".into()))
    }

    fn expect_kv(&mut self, key: &str) -> Result<String, ClassifierError> {
        let (n, line) = self.next_line()?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| {
                ClassifierError::ModelFormat(format!("line {n}: expected `{key} ...`"))
            })?;
        Ok(rest.to_string())
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, ClassifierError> {
    s.trim()
        .parse()
        .map_err(|_| ClassifierError::ModelFormat(format!("bad {what}: `{s}`")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize, ClassifierError> {
    s.trim()
        .parse()
        .map_err(|_| ClassifierError::ModelFormat(format!("bad {what}: `{s}`")))
}

pub fn load_model(text: &str) -> Result<SvmModel, ClassifierError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, version) = lines.next_line()?;
    if version.trim() != VERSION {
        return Err(ClassifierError::VersionMismatch(version.trim().to_string()));
    }
    let kernel = lines.expect_kv("kernel")?;
    if kernel != "rbf" {
        return Err(ClassifierError::ModelFormat(format!(
            "unsupported kernel `{kernel}`"
        )));
    }
    let params = SvmParams {
        c: parse_f64(&lines.expect_kv("c")?, "c")?,
        gamma: parse_f64(&lines.expect_kv("gamma")?, "gamma")?,
        degree: parse_f64(&lines.expect_kv("degree")?, "degree")?,
        coef0: parse_f64(&lines.expect_kv("coef0")?, "coef0")?,
        nu: parse_f64(&lines.expect_kv("nu")?, "nu")?,
        p: parse_f64(&lines.expect_kv("p")?, "p")?,
        max_iter: parse_usize(&lines.expect_kv("max_iter")?, "max_iter")?,
        tolerance: parse_f64(&lines.expect_kv("tolerance")?, "tolerance")?,
    };
    let seed = parse_usize(&lines.expect_kv("seed")?, "seed")? as u64;
    let dataset_digest = lines.expect_kv("dataset_digest")?;
    let classes: Vec<CellClass> = lines
        .expect_kv("classes")?
        .split_whitespace()
        .map(|m| {
            CellClass::from_mnemonic(m)
                .ok_or_else(|| ClassifierError::ModelFormat(format!("unknown class `{m}`")))
        })
        .collect::<Result<_, _>>()?;
    if classes.len() < 2 {
        return Err(ClassifierError::ModelFormat(
            "fewer than two classes".into(),
        ));
    }
    let n_features = parse_usize(&lines.expect_kv("features")?, "features")?;
    let mut scaling = ScalingRecord {
        min: vec![0.0; n_features],
        max: vec![0.0; n_features],
    };
    for k in 0..n_features {
        let row = lines.expect_kv("scale")?;
        let parts: Vec<&str> = row.split_whitespace().collect();
        if parts.len() != 3 || parse_usize(parts[0], "scale index")? != k {
            return Err(ClassifierError::ModelFormat(format!(
                "bad scale row `{row}`"
            )));
        }
        scaling.min[k] = parse_f64(parts[1], "scale min")?;
        scaling.max[k] = parse_f64(parts[2], "scale max")?;
    }
    let n_pairs = parse_usize(&lines.expect_kv("pairs")?, "pairs")?;
    let expected_pairs = classes.len() * (classes.len() - 1) / 2;
    if n_pairs != expected_pairs {
        return Err(ClassifierError::ModelFormat(format!(
            "pair count {n_pairs} does not match {} classes",
            classes.len()
        )));
    }
    let mut pair_bias = vec![0.0f64; n_pairs];
    for p_idx in 0..n_pairs {
        let row = lines.expect_kv("bias")?;
        let parts: Vec<&str> = row.split_whitespace().collect();
        if parts.len() != 2 || parse_usize(parts[0], "bias index")? != p_idx {
            return Err(ClassifierError::ModelFormat(format!(
                "bad bias row `{row}`"
            )));
        }
        pair_bias[p_idx] = parse_f64(parts[1], "bias")?;
    }
    let sv_count = parse_usize(&lines.expect_kv("sv_count")?, "sv_count")?;
    let mut support_vectors = Vec::with_capacity(sv_count);
    for _ in 0..sv_count {
        let row = lines.expect_kv("sv")?;
        let parts: Vec<&str> = row.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(ClassifierError::ModelFormat(format!(
                "truncated sv row `{row}`"
            )));
        }
        let class_index = parse_usize(parts[0], "sv class")?;
        if class_index >= classes.len() {
            return Err(ClassifierError::ModelFormat(format!(
                "sv class {class_index} out of range"
            )));
        }
        let pair_coefs: Vec<f64> = parts[1]
            .split(',')
            .map(|s| parse_f64(s, "sv coefficient"))
            .collect::<Result<_, _>>()?;
        let features: Vec<f64> = parts[2]
            .split(',')
            .map(|s| parse_f64(s, "sv feature"))
            .collect::<Result<_, _>>()?;
        if pair_coefs.len() != n_pairs || features.len() != n_features {
            return Err(ClassifierError::ModelFormat("truncated sv row".into()));
        }
        support_vectors.push(SupportVector {
            class_index,
            pair_coefs,
            features,
        });
    }
    let (n, end) = lines.next_line()?;
    if end.trim() != "end" {
        return Err(ClassifierError::ModelFormat(format!(
            "line {n}: expected `end`"
        )));
    }
    Ok(SvmModel {
        classes,
        scaling,
        support_vectors,
        pair_bias,
        manifest: TrainManifest {
            params,
            seed,
            dataset_digest,
        },
    })
}
