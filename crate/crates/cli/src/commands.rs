use std::collections::HashMap;
use std::path::Path;

use morigeo_core::config::Config;
use morigeo_core::eval::{accumulate, evaluate_image, EvalImage, EvalParams};
use morigeo_core::gradcheck::{check_loss, GradCheckConfig};
use morigeo_core::io::{mgf, pgm};
use morigeo_core::split::split as run_split;
use morigeo_core::synth::{generate_scene, SynthConfig};
use morigeo_core::targets::{gen_targets as make_targets, Targets};
use morigeo_core::{Error, InstanceGrid, Result, ScalarField};
use rayon::prelude::*;
use serde_json::Value;

use crate::files::{create_dir, named, read_id_map, stems, write_json};
use crate::{parse_loss, ConfigArgs, EvalArgs, GenTargetsArgs, GradCheckArgs, SplitArgs, SynthArgs};

fn usage(msg: &str) -> Error {
    Error::InvalidInput(msg.to_string())
}

fn load_config(args: &ConfigArgs) -> Result<Config> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field {
                cfg.$field = v;
            })*
        };
    }
    set!(
        alpha,
        epsilon,
        band_width,
        se_shape,
        connectivity,
        seed_threshold,
        min_seed_area,
        min_instance_area,
        boundary_suppression,
        opening_radius
    );
    cfg.validate()?;
    Ok(cfg)
}

fn targets_for(path: &Path, cfg: &Config) -> Result<Targets> {
    let inst = pgm::read_instances(path)?;
    make_targets(&inst, &cfg.distance(), &cfg.boundary())
}

pub fn gen_targets(args: GenTargetsArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    if let Some(input) = &args.input {
        let (dist, bnd) = (args.out_dist.as_ref().unwrap(), args.out_bnd.as_ref().unwrap());
        let t = targets_for(input, &cfg)?;
        mgf::write_scalar(dist, &t.distance)?;
        return mgf::write_scalar(bnd, &t.boundary);
    }
    let (Some(in_dir), Some(out_dir)) = (&args.in_dir, &args.out_dir) else {
        return Err(usage(
            "gen-targets needs --in with --out-dist/--out-bnd, or --in-dir with --out-dir",
        ));
    };
    let names = stems(in_dir, "gt_", ".pgm")?;
    let results: Vec<Result<Targets>> = names
        .par_iter()
        .map(|s| targets_for(&named(in_dir, "gt_", s, ".pgm"), &cfg))
        .collect();
    create_dir(out_dir)?;
    for (stem, t) in names.iter().zip(results) {
        let t = t?;
        mgf::write_scalar(&named(out_dir, "dist_", stem, ".mgf"), &t.distance)?;
        mgf::write_scalar(&named(out_dir, "bnd_", stem, ".mgf"), &t.boundary)?;
    }
    Ok(())
}

fn split_one(args: &SplitArgs, cfg: &Config, sem: &Path, fields: Option<(&Path, &Path)>) -> Result<InstanceGrid> {
    let mask = pgm::read_labels(sem)?;
    let fields = match fields {
        Some((d, b)) => Some((mgf::read_scalar(d)?, mgf::read_scalar(b)?)),
        None => None,
    };
    let refs: Option<(&ScalarField, &ScalarField)> = fields.as_ref().map(|(d, b)| (d, b));
    run_split(args.method, &mask, args.class_id, refs, &cfg.split())
}

pub fn split(args: SplitArgs) -> Result<()> {
    let cfg = load_config(&args.config)?;
    if let Some(input) = &args.input {
        let fields = args.dist.as_deref().zip(args.bnd.as_deref());
        let out = split_one(&args, &cfg, input, fields)?;
        return pgm::write_instances(args.out.as_ref().unwrap(), &out);
    }
    let (Some(in_dir), Some(out_dir)) = (&args.in_dir, &args.out_dir) else {
        return Err(usage("split needs --in with --out, or --in-dir with --out-dir"));
    };
    let names = stems(in_dir, "sem_", ".pgm")?;
    let results: Vec<Result<InstanceGrid>> = names
        .par_iter()
        .map(|s| {
            let paths = args
                .fields_dir
                .as_ref()
                .map(|d| (named(d, "dist_", s, ".mgf"), named(d, "bnd_", s, ".mgf")));
            let fields = paths.as_ref().map(|(d, b)| (d.as_path(), b.as_path()));
            split_one(&args, &cfg, &named(in_dir, "sem_", s, ".pgm"), fields)
        })
        .collect();
    create_dir(out_dir)?;
    for (stem, inst) in names.iter().zip(results) {
        let inst = inst?;
        pgm::write_instances(&named(out_dir, "pred_", stem, ".pgm"), &inst)?;
        let scores: serde_json::Map<String, Value> = (1..=inst.num_instances())
            .map(|id| (id.to_string(), Value::from(1.0)))
            .collect();
        write_json(&named(out_dir, "pred_", stem, ".scores.json"), &scores)?;
    }
    Ok(())
}

/// Optional `{"id": value}` sidecar; an absent file yields an empty map.
fn sidecar<T>(path: &Path, convert: impl Fn(&Value) -> Option<T>) -> Result<HashMap<u16, T>> {
    if !path.exists() {
        return Ok(HashMap::new());
    }
    Ok(read_id_map(path, convert)?.into_iter().collect())
}

fn as_class(v: &Value) -> Option<u16> {
    v.as_u64().and_then(|c| u16::try_from(c).ok())
}

fn load_eval_image(args: &EvalArgs, stem: &str, default_class: u16) -> Result<EvalImage> {
    let pred_path = named(&args.pred, "pred_", stem, ".pgm");
    let pred = pgm::read_instances(&pred_path)?;
    let gt = pgm::read_instances(&named(&args.gt, "gt_", stem, ".pgm"))?;
    let scores = sidecar(&named(&args.pred, "pred_", stem, ".scores.json"), Value::as_f64)?;
    let pred_classes = sidecar(&named(&args.pred, "pred_", stem, ".classes.json"), as_class)?;
    let gt_classes = sidecar(&named(&args.gt, "gt_", stem, ".classes.json"), as_class)?;
    EvalImage::from_grids(&pred, &scores, &pred_classes, &gt, &gt_classes, default_class).map_err(|e| match e {
        Error::ShapeMismatch { .. } => Error::Format {
            path: pred_path.clone(),
            reason: e.to_string(),
        },
        other => other,
    })
}

pub fn eval(args: EvalArgs) -> Result<()> {
    if args.max_dets == 0 {
        return Err(usage("--max-dets must be at least 1"));
    }
    let mut classes: Vec<(u16, String)> = match &args.classes {
        Some(path) => read_id_map(path, |v| v.as_str().map(str::to_string))?,
        None => vec![(1, "foreground".to_string())],
    };
    classes.sort();
    let Some(default_class) = classes.first().map(|c| c.0) else {
        return Err(usage("the class list is empty"));
    };
    let params = EvalParams {
        max_dets: args.max_dets,
        ..Default::default()
    };
    let mut names = stems(&args.gt, "gt_", ".pgm")?;
    for s in stems(&args.pred, "pred_", ".pgm")? {
        if !names.contains(&s) {
            names.push(s);
        }
    }
    names.sort();
    let ids: Vec<u16> = classes.iter().map(|c| c.0).collect();
    let results = names
        .par_iter()
        .map(|s| load_eval_image(&args, s, default_class).and_then(|img| evaluate_image(&img, &ids, &params)))
        .collect::<Result<Vec<_>>>()?;
    let report = accumulate(&results, &classes, &params);
    match &args.out {
        Some(path) => write_json(path, &report),
        None => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
    }
}

pub fn grad_check(args: GradCheckArgs) -> Result<()> {
    let cfg = GradCheckConfig {
        trials: args.seeds,
        max_size: args.size,
        max_dim: args.dim,
        step: args.step,
        rel_tol: args.tolerance,
        seed: args.seed,
        ..Default::default()
    };
    let kinds = parse_loss(&args.loss)?;
    let reports = kinds
        .par_iter()
        .map(|&k| check_loss(k, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut failed = Vec::new();
    for r in &reports {
        println!(
            "{}: max_rel_error={:.3e} max_abs_error={:.3e} trials={} coordinates={} {}",
            r.loss.name(),
            r.max_rel_error,
            r.max_abs_error,
            r.trials,
            r.coordinates,
            if r.passed { "PASS" } else { "FAIL" }
        );
        if !r.passed {
            failed.push(r.loss.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(usage(&format!(
            "gradient check above tolerance for {}",
            failed.join(", ")
        )))
    }
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        num_scenes: args.num_scenes,
        height: args.height,
        width: args.width,
        shapes: args.shapes,
        min_instances: args.min_instances,
        max_instances: args.max_instances,
        touch_probability: args.touch_probability,
        rng_seed: args.seed,
        ..Default::default()
    };
    cfg.validate()?;
    let scenes = (0..cfg.num_scenes)
        .into_par_iter()
        .map(|i| generate_scene(&cfg, i))
        .collect::<Result<Vec<_>>>()?;
    create_dir(&args.out)?;
    let digits = cfg.num_scenes.saturating_sub(1).to_string().len().max(4);
    for (i, scene) in scenes.iter().enumerate() {
        let stem = format!("{i:0digits$}");
        pgm::write_labels(&named(&args.out, "sem_", &stem, ".pgm"), &scene.semantic)?;
        pgm::write_instances(&named(&args.out, "gt_", &stem, ".pgm"), &scene.instances)?;
    }
    Ok(())
}
