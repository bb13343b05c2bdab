use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;
use textgeom::anchors::{generate_anchor_grid, AnchorConfig};
use textgeom::datasets::{
    gt_to_instances, load_gt_dir, read_detections_file, write_detections, write_detections_file, write_icdar15_gt,
    GtFormat, ImageRecord,
};
use textgeom::eval::{evaluate_corpus, EvalConfig, EvalMode, EvalResult};
use textgeom::geom::{rasterize_quad, rotated_rect_to_quad, Point, Quad, RotatedRect};
use textgeom::nms::{postprocess, suppress, Detection, NmsConfig, NmsMode, VoteConfig};
use textgeom::synth::{generate, SceneSpec, SplitMix64};

use crate::{ppm, BenchOp};

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("{}: cannot create", path.display()))?;
    Ok(BufWriter::new(file))
}

fn load_instances(dir: &Path, format: GtFormat) -> anyhow::Result<Vec<ImageRecord<f64>>> {
    let records = load_gt_dir::<f64>(dir, format)?;
    log::info!("{}: {} annotation files", dir.display(), records.len());
    let records = records.into_par_iter().map(gt_to_instances).collect::<Result<Vec<_>, _>>()?;
    Ok(records)
}

pub fn rasterize(format: GtFormat, input: &Path, out: &Path, dump_masks: Option<&Path>) -> anyhow::Result<()> {
    let records = load_instances(input, format)?;
    let mut dets = Vec::new();
    for r in &records {
        for inst in &r.instances {
            match &inst.mask {
                Some(m) if !m.is_empty() => {
                    dets.push(Detection::new(r.image_id.clone(), 1.0, m.clone())?.with_quad(Some(inst.quad)));
                }
                _ => log::debug!("{}: skipping instance with an empty mask", r.image_id),
            }
        }
    }
    write_detections_file(out, &dets)?;
    log::info!("wrote {} instances to {}", dets.len(), out.display());

    if let Some(dir) = dump_masks {
        fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
        records.par_iter().try_for_each(|r| -> anyhow::Result<()> {
            let path = dir.join(format!("{}.ppm", r.image_id));
            let masks: Vec<_> = r.instances.iter().filter_map(|i| i.mask.as_ref()).collect();
            ppm::write_masks(create(&path)?, r.width, r.height, &masks)
                .with_context(|| format!("{}: write failed", path.display()))
        })?;
    }
    Ok(())
}

fn group_by_image(dets: Vec<Detection<f64>>) -> BTreeMap<String, Vec<Detection<f64>>> {
    let mut groups: BTreeMap<String, Vec<Detection<f64>>> = BTreeMap::new();
    for d in dets {
        groups.entry(d.image_id.clone()).or_default().push(d);
    }
    groups
}

pub fn nms(cfg: &NmsConfig<f64>, vote: Option<&VoteConfig<f64>>, input: &Path, out: &Path) -> anyhow::Result<()> {
    let dets = read_detections_file::<f64>(input)?;
    let total = dets.len();
    let groups: Vec<_> = group_by_image(dets).into_iter().collect();
    let kept: Vec<Vec<Detection<f64>>> = groups.par_iter().map(|(_, d)| postprocess(d, cfg, vote)).collect();
    let kept: Vec<Detection<f64>> = kept.into_iter().flatten().collect();
    log::info!("kept {} of {} detections over {} images", kept.len(), total, groups.len());
    write_detections_file(out, &kept)?;
    Ok(())
}

#[derive(Serialize)]
struct ImageReport<'a> {
    image_id: &'a str,
    #[serde(flatten)]
    result: EvalResult,
}

#[derive(Serialize)]
struct Report<'a> {
    mode: EvalMode,
    iou_threshold: f64,
    corpus: EvalResult,
    images: Vec<ImageReport<'a>>,
}

pub fn eval(
    cfg: &EvalConfig<f64>,
    gt: &Path,
    format: GtFormat,
    det: &Path,
    report: &Path,
    per_image_csv: Option<&Path>,
    pretty: bool,
) -> anyhow::Result<()> {
    let records = load_instances(gt, format)?;
    let dets = read_detections_file::<f64>(det)?;
    let (per_image, corpus) = evaluate_corpus(&records, &dets, cfg);

    let doc = Report {
        mode: cfg.mode,
        iou_threshold: cfg.iou_threshold,
        corpus,
        images: per_image.iter().map(|(id, r)| ImageReport { image_id: id, result: *r }).collect(),
    };
    let mut w = create(report)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;

    if let Some(path) = per_image_csv {
        let mut w = create(path)?;
        writeln!(w, "image_id,true_pos,num_det,num_gt,precision,recall,hmean")?;
        for (id, r) in &per_image {
            writeln!(w, "{id},{},{},{},{},{},{}", r.true_pos, r.num_det, r.num_gt, r.precision, r.recall, r.hmean)?;
        }
        w.flush()?;
    }

    if pretty {
        println!(
            "{:<24} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}",
            "image", "tp", "det", "gt", "precision", "recall", "hmean"
        );
        for (id, r) in per_image.iter().chain(std::iter::once(&("TOTAL".to_string(), corpus))) {
            println!(
                "{:<24} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
                id, r.true_pos, r.num_det, r.num_gt, r.precision, r.recall, r.hmean
            );
        }
    } else {
        println!("{}", serde_json::to_string(&corpus)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct AnchorLine {
    row: u32,
    col: u32,
    k: usize,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

pub fn anchors(width: u32, height: u32, cfg: &AnchorConfig<f64>, out: Option<&Path>) -> anyhow::Result<()> {
    let grid = generate_anchor_grid(width, height, cfg)?;
    let per = cfg.per_location();
    let cols = width.div_ceil(cfg.stride) as usize;
    let mut w: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    for (i, b) in grid.iter().enumerate() {
        let loc = i / per;
        let line = AnchorLine {
            row: (loc / cols) as u32,
            col: (loc % cols) as u32,
            k: i % per,
            x_min: b.x_min,
            y_min: b.y_min,
            x_max: b.x_max,
            y_max: b.y_max,
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    w.flush()?;
    log::info!("{} anchors ({} per location)", grid.len(), per);
    Ok(())
}

pub fn synth(specs: &[SceneSpec], out: &Path) -> anyhow::Result<()> {
    let scenes = specs.par_iter().map(generate).collect::<Result<Vec<_>, _>>()?;
    let gt_dir = out.join("gt");
    fs::create_dir_all(&gt_dir).with_context(|| format!("{}: cannot create directory", gt_dir.display()))?;
    for s in &scenes {
        let path = gt_dir.join(GtFormat::Icdar15.file_name(&s.record.image_id));
        fs::write(&path, write_icdar15_gt(&s.record)).with_context(|| format!("{}: write failed", path.display()))?;
    }
    let det_path = out.join("dets.jsonl");
    let mut w = create(&det_path)?;
    for s in &scenes {
        write_detections(&mut w, &s.detections)?;
    }
    w.flush()?;
    log::info!("wrote {} scenes to {}", scenes.len(), out.display());
    Ok(())
}

fn random_quads(n: usize, seed: u64) -> anyhow::Result<Vec<Quad<f64>>> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let c = Point::new(rng.uniform(0.0, 2048.0), rng.uniform(0.0, 2048.0));
            let long = rng.uniform(20.0, 120.0);
            let r = RotatedRect::new(c, long, long / rng.uniform(1.5, 6.0), rng.uniform(-1.0, 1.0))?;
            Ok(rotated_rect_to_quad(&r))
        })
        .collect()
}

pub fn bench(op: BenchOp, n: usize, iters: usize, seed: u64) -> anyhow::Result<()> {
    let quads = random_quads(n, seed)?;
    let (name, elapsed, ops) = match op {
        BenchOp::Rasterize => {
            let start = Instant::now();
            for _ in 0..iters {
                for q in &quads {
                    std::hint::black_box(rasterize_quad(q, None)?);
                }
            }
            ("rasterize", start.elapsed(), n * iters)
        }
        BenchOp::Nms | BenchOp::MaskNms => {
            let mut rng = SplitMix64::new(seed ^ 0x5eed);
            let dets = quads
                .iter()
                .map(|q| Ok(Detection::new("bench", rng.uniform(0.05, 1.0), rasterize_quad(q, None)?)?))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let (name, mode) = match op {
                BenchOp::Nms => ("nms", NmsMode::Standard),
                _ => ("mask_nms", NmsMode::Mask),
            };
            let cfg = NmsConfig::new(mode, 0.5, 0.0)?;
            let start = Instant::now();
            for _ in 0..iters {
                std::hint::black_box(suppress(&dets, &cfg));
            }
            (name, start.elapsed(), iters)
        }
    };
    let secs = elapsed.as_secs_f64().max(1e-9);
    println!(
        "{}",
        serde_json::json!({
            "op": name,
            "n": n,
            "iters": iters,
            "mean_ms": secs * 1e3 / iters as f64,
            "ops_per_sec": ops as f64 / secs,
        })
    );
    Ok(())
}
