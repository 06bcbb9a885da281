use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use twomapper::clustering::{check_cluster_cover_good, cluster_cover_with, knn_radius};
use twomapper::cover::{check_good_tower_with, Tower, TowerLevel};
use twomapper::export::{self, Metadata};
use twomapper::multiscale::build_multiscale_with;
use twomapper::pointcloud::diameter_with;
use twomapper::*;

use crate::config::{Config, CoverChoice, Eps, Input, Radius};
use crate::{CliError, GenerateArgs};

const SHAPES: &[&str] = &["torus", "klein"];

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Pipeline(Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn out_dir(out: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    Ok(out.to_path_buf())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

pub fn generate(args: &GenerateArgs, out: &Path) -> Result<(), CliError> {
    let cloud = match args.shape.as_str() {
        "torus" => generate_torus(args.n.unwrap_or(5000), args.major, args.minor, args.seed)?,
        "klein" => generate_klein_bottle(args.n.unwrap_or(10000), args.major, args.minor, args.seed)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown shape {other:?}; valid shapes: {}",
                SHAPES.join(", ")
            )))
        }
    };
    let path = out_dir(out)?.join(&args.output);
    let comments = vec![
        format!("generator={}", args.shape),
        format!("n={}", cloud.len()),
        format!("R={}", args.major),
        format!("r={}", args.minor),
        format!("seed={}", args.seed),
    ];
    cloud
        .write_csv(create(&path)?, &comments)
        .map_err(|e| io_err(&path, e))?;
    let bbox = bounding_box(&cloud)?;
    println!("wrote {} points to {}", cloud.len(), path.display());
    println!("bounding box min {:?} max {:?}", bbox.mins, bbox.maxs);
    Ok(())
}

struct Timings(Vec<(String, Duration)>);

impl Timings {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let started = Instant::now();
        let v = f();
        self.0.push((name.to_string(), started.elapsed()));
        v
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut s = String::new();
        for (name, d) in &self.0 {
            let _ = writeln!(s, "{name} {:.3} ms", d.as_secs_f64() * 1e3);
        }
        write_text(path, &s)
    }
}

struct Prepared {
    cloud: PointCloud,
    image: LensImage,
    radius: f64,
    params: DbscanParams,
    exec: Execution,
    metadata: Metadata,
    timings: Timings,
}

fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            // Fails only if a pool already exists, which is then reused.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::Parallel),
    }
}

fn prepare(cfg: &Config) -> Result<Prepared, CliError> {
    let exec = execution(cfg.threads)?;
    let mut timings = Timings(Vec::new());
    let cloud = timings.time("load", || match &cfg.input {
        Input::File(path) => load_csv(path, cfg.header),
        Input::Torus { n, major, minor, seed } => generate_torus(*n, *major, *minor, *seed),
        Input::Klein { n, major, minor, seed } => generate_klein_bottle(*n, *major, *minor, *seed),
    })?;
    let image = timings.time("lens", || apply_lens(&cloud, &cfg.lens))?;
    let radius = match cfg.radius {
        Radius::Fixed(r) => r,
        Radius::Knn => timings.time("knn_radius", || knn_radius(&cloud, exec))?,
    };
    if cfg.min_pts != 2 {
        warn(&format!(
            "min_pts = {}: border points reachable from two clusters are assigned by id, not uniquely",
            cfg.min_pts
        ));
    }
    let params = DbscanParams::new(radius, cfg.min_pts)?;
    Ok(Prepared {
        metadata: cfg.metadata(radius),
        cloud,
        image,
        radius,
        params,
        exec,
        timings,
    })
}

fn epsilon_tower(cfg: &Config, p: &Prepared, base_g: f64, values: &[Eps]) -> Result<Tower, CliError> {
    let bbox = bounding_box(&p.image)?;
    let spec = CubicalCoverSpec::new(cfg.k, base_g, bbox.dim())?;
    let s = build_cubical_cover(&bbox, &spec)?.into_level(0.0).resolution();
    let needs_diameter = values.iter().any(|e| matches!(e, Eps::Diameter(_)));
    let d = if needs_diameter {
        diameter_with(&p.image, p.exec)?.value
    } else {
        0.0
    };
    let eps: Vec<f64> = values
        .iter()
        .map(|e| match *e {
            Eps::Absolute(x) => x,
            Eps::Resolution(m) => m * s,
            Eps::Diameter(m) => m * d,
        })
        .collect();
    Ok(build_tower(&bbox, &spec, &Schedule::Epsilon(eps))?)
}

fn tower_for(cfg: &Config, p: &Prepared, single: Option<&[Eps]>) -> Result<Tower, CliError> {
    let tower = match &cfg.cover {
        CoverChoice::Overlap(gs) => {
            let bbox = bounding_box(&p.image)?;
            let spec = CubicalCoverSpec::new(cfg.k, gs[0], bbox.dim())?;
            build_tower(&bbox, &spec, &Schedule::Overlap(gs.clone()))?
        }
        CoverChoice::Epsilon(es) => epsilon_tower(cfg, p, cfg.base_g, es)?,
        CoverChoice::Single(g) => match single {
            Some(es) => epsilon_tower(cfg, p, *g, es)?,
            None => return Err(CliError::Usage("a schedule of at least two scales is required".into())),
        },
    };
    for w in &tower.warnings {
        warn(w);
    }
    Ok(tower)
}

fn single_level(cfg: &Config, p: &Prepared) -> Result<TowerLevel, CliError> {
    let CoverChoice::Single(g) = cfg.cover else {
        return Err(CliError::Usage("mapper takes a single g, not a schedule".into()));
    };
    let bbox = bounding_box(&p.image)?;
    let cover = build_cubical_cover(&bbox, &CubicalCoverSpec::new(cfg.k, g, bbox.dim())?)?;
    for w in cover.warnings() {
        warn(&w);
    }
    Ok(cover.into_level(g))
}

fn betti_text(metadata: &Metadata, betti: &[usize]) -> String {
    let mut s = String::new();
    for (k, v) in metadata {
        let _ = writeln!(s, "# {k}={v}");
    }
    for (p, b) in betti.iter().enumerate() {
        let _ = writeln!(s, "beta{p} = {b}");
    }
    s
}

pub fn mapper(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut p = prepare(cfg)?;
    let level = single_level(cfg, &p)?;
    let cc = p
        .timings
        .time("cluster_cover", || cluster_cover_with(&p.cloud, &p.image, &level, &p.params, p.exec))?;
    let (complex, betti) = p.timings.time("nerve", || {
        let full = nerve::build_two_mapper_with(&cc.nodes, cfg.include_noise, p.exec);
        let complex = if cfg.skeleton == 1 { one_skeleton(&full) } else { full };
        let b = betti(&complex, cfg.betti_dims);
        (complex, b)
    });

    let dir = out_dir(out)?;
    export::write_json(&dir.join("complex.json"), &export::complex_json(&complex, &betti, &p.metadata))?;
    write_text(&dir.join("betti.txt"), &betti_text(&p.metadata, &betti))?;
    let run = json!({
        "metadata": p.metadata,
        "radius": p.radius,
        "clusters": cc.clusters().count(),
        "noise_nodes": cc.nodes.iter().filter(|n| n.is_noise).count(),
        "vertices": complex.vertices.len(),
        "edges": complex.edges.len(),
        "triangles": complex.triangles.len(),
        "betti": betti,
    });
    export::write_json(&dir.join("run.json"), &run)?;
    p.timings.write(&dir.join("timings.txt"))?;
    println!("radius {}", p.radius);
    println!(
        "vertices {} edges {} triangles {}",
        complex.vertices.len(),
        complex.edges.len(),
        complex.triangles.len()
    );
    println!("betti {betti:?}");
    Ok(())
}

fn selection_text(metadata: &Metadata, barcode: &Barcode, scales: &[f64], mode: TowerMode, dims: usize) -> String {
    let label = match mode {
        TowerMode::Overlap => "g",
        TowerMode::Epsilon => "eps",
    };
    let mut s = String::new();
    for (k, v) in metadata {
        let _ = writeln!(s, "# {k}={v}");
    }
    for dim in 0..=dims {
        let curve = barcode.betti_curve(dim, scales);
        let samples: Vec<String> = curve.samples.iter().map(|(t, b)| format!("{t}:{b}")).collect();
        let _ = writeln!(s, "beta{dim} curve {}", samples.join(" "));
        for (value, r) in curve.selection() {
            let _ = writeln!(
                s,
                "beta{dim} = {value}: {label} in [{}, {}] ({} scales)",
                r.from, r.to, r.samples
            );
        }
    }
    s
}

pub fn multiscale(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let scales = match &cfg.cover {
        CoverChoice::Overlap(v) => v.len(),
        CoverChoice::Epsilon(v) => v.len(),
        CoverChoice::Single(_) => 1,
    };
    if scales < 2 {
        return Err(CliError::Usage("multiscale needs a schedule of at least two scales".into()));
    }
    let mut p = prepare(cfg)?;
    let tower = tower_for(cfg, &p, None)?;
    let result = p
        .timings
        .time("multiscale", || build_multiscale_with(&p.cloud, &p.image, &tower, &p.params, p.exec))?;
    for (i, d) in result.stage_times.iter().enumerate() {
        p.timings.0.push((format!("stage {i}"), *d));
    }
    let barcode = p.timings.time("persistence", || reduce(&result.filtered))?;

    let dir = out_dir(out)?;
    export::write_json(&dir.join("filtration.json"), &export::filtration_json(&result.filtered, &p.metadata))?;
    export::write_json(&dir.join("multiscale.json"), &export::multiscale_json(&result, &p.metadata))?;
    let csv = dir.join("barcode.csv");
    export::write_barcode_csv(create(&csv)?, &barcode, &p.metadata).map_err(|e| io_err(&csv, e))?;
    write_text(&dir.join("barcode.svg"), &export::barcode_svg(&barcode, &result.scales, &p.metadata))?;
    let selection = selection_text(&p.metadata, &barcode, &result.scales, result.mode, cfg.betti_dims);
    write_text(&dir.join("selection.txt"), &selection)?;

    let mut probe = serde_json::to_value(complexity_probe(&result)).map_err(Error::from)?;
    // Wall time lives in timings.txt so that run.json is reproducible.
    if let Value::Object(m) = &mut probe {
        m.remove("wall_time_ms");
    }
    let run = json!({
        "metadata": p.metadata,
        "radius": p.radius,
        "scales": result.scales,
        "simplices": result.filtered.len(),
        "complexity": probe,
        "carried": result.alignments.iter().map(|a| a.carried).collect::<Vec<_>>(),
    });
    export::write_json(&dir.join("run.json"), &run)?;
    p.timings.write(&dir.join("timings.txt"))?;
    println!("radius {}", p.radius);
    println!("stages {} simplices {}", result.stages.len(), result.filtered.len());
    print!("{}", selection.lines().filter(|l| !l.starts_with('#')).fold(String::new(), |s, l| s + l + "\n"));
    Ok(())
}

fn trials_line(name: &str, t: &cover::SubsetTrials) -> String {
    format!(
        "{name}: {} (evaluated {}, passed {}, failed {}, skipped {}, no candidate {})",
        if t.ok() { "pass" } else { "FAIL" },
        t.evaluated,
        t.passed,
        t.failed,
        t.skipped,
        t.no_candidate
    )
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn check(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut p = prepare(cfg)?;
    let default_schedule = [Eps::Resolution(1.0), Eps::Resolution(2.0), Eps::Diameter(4.0)];
    let tower = tower_for(cfg, &p, Some(&default_schedule))?;
    let cubical = p.timings.time("check_good_tower", || {
        check_good_tower_with(&tower, &p.image, 3.0, cfg.trials, cfg.seed, p.exec)
    })?;
    let covers = p.timings.time("cluster_covers", || {
        tower
            .levels
            .iter()
            .map(|l| cluster_cover_with(&p.cloud, &p.image, l, &p.params, p.exec))
            .collect::<Result<Vec<_>>>()
    })?;
    let cluster = p.timings.time("check_cluster_cover_good", || {
        check_cluster_cover_good(&covers, &p.image, cfg.trials, cfg.seed, p.exec)
    })?;

    let dir = out_dir(out)?;
    let report = json!({
        "metadata": p.metadata,
        "scales": tower.levels.iter().map(|l| l.scale).collect::<Vec<_>>(),
        "cubical": cubical,
        "cubical_passed": cubical.passed(),
        "cluster": cluster,
        "cluster_passed": cluster.passed(),
    });
    export::write_json(&dir.join("check.json"), &report)?;
    p.timings.write(&dir.join("timings.txt"))?;

    println!("cubical tower (c = {}):", cubical.c);
    println!("  condition i (s <= diam): {}", flag(cubical.condition_i));
    println!("  condition ii (set diameters): {}", flag(cubical.condition_ii));
    if let Some(d) = &cubical.condition_ii_detail {
        println!("    {d}");
    }
    println!("  {}", trials_line("condition iii (containment)", &cubical.condition_iii));
    println!("cluster covers (c = {}):", cluster.c);
    println!("  condition i (s' <= s <= diam): {}", flag(cluster.condition_i));
    println!("  condition ii (cluster diameters): {}", flag(cluster.condition_ii));
    if let Some(d) = &cluster.condition_ii_detail {
        println!("    {d}");
    }
    println!("  {}", trials_line("condition iii (containment)", &cluster.condition_iii));
    if cubical.passed() && cluster.passed() {
        Ok(())
    } else {
        Err(CliError::Falsified)
    }
}
