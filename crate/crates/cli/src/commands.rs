//! One function per subcommand. Each writes its artifacts into the output
//! directory and reports what it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use leafdens_core::io::{
    read_dataset, read_matrix, write_clusters, write_dataset, write_densities_json,
    write_dendrogram_json, write_matrix, write_text,
};
use leafdens_core::synth::{generate, SynthConfig};
use leafdens_core::viz::{plot_dendrogram, plot_densities, plot_leaves, render_raw_traces};
use leafdens_core::{
    adjusted_rand_index, agglomerate, cut, distance_matrix, leaf_outline, normalize_leaf,
    to_newick, Dataset, DistanceKind, DistanceMatrix, Format, StepDensity,
};

use crate::config::RunConfig;
use crate::error::{CliError, Stage, StageExt};

/// Files written by a command, plus cluster agreement scores when both a cut
/// and ground-truth groups are available.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    pub written: Vec<PathBuf>,
    /// `(distance tag, adjusted Rand index against the dataset groups)`.
    pub agreement: Vec<(String, f64)>,
}

impl Report {
    fn merge(&mut self, other: Report) {
        self.written.extend(other.written);
        self.agreement.extend(other.agreement);
    }
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let ds = read_dataset(&cfg.input, cfg.format).stage(Stage::Read)?;
    if ds.len() < 2 {
        return Err(CliError::Input {
            stage: Stage::Read,
            message: format!("{}: need at least 2 leaves, found {}", cfg.input.display(), ds.len()),
        });
    }
    if let Some(k) = cfg.cut {
        if k > ds.len() {
            return Err(CliError::config(format!(
                "cut {k} is out of range for {} leaves",
                ds.len()
            )));
        }
    }
    Ok(ds)
}

fn outdir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.outdir)
        .map_err(|e| CliError::new(Stage::Write, leafdens_core::Error::Io { path: cfg.outdir.clone(), source: e }))?;
    Ok(&cfg.outdir)
}

fn normalized(ds: &Dataset) -> Vec<StepDensity> {
    ds.sequences().iter().map(normalize_leaf).collect()
}

/// `densities.json`: normalized densities with rotation and isotropy flags.
pub fn densify(cfg: &RunConfig) -> Result<Report, CliError> {
    let ds = load_dataset(cfg)?;
    densify_dataset(cfg, &ds, &normalized(&ds))
}

fn densify_dataset(cfg: &RunConfig, ds: &Dataset, dens: &[StepDensity]) -> Result<Report, CliError> {
    let path = outdir(cfg)?.join("densities.json");
    write_densities_json(dens, ds.groups(), &path).stage(Stage::Write)?;
    Ok(Report {
        written: vec![path],
        ..Report::default()
    })
}

/// `matrix_{tag}.csv` and `matrix_{tag}.json` per configured distance.
pub fn distmat(cfg: &RunConfig) -> Result<Report, CliError> {
    let ds = load_dataset(cfg)?;
    let (report, _) = distmat_dataset(cfg, &ds, &normalized(&ds))?;
    Ok(report)
}

fn distmat_dataset(
    cfg: &RunConfig,
    ds: &Dataset,
    dens: &[StepDensity],
) -> Result<(Report, Vec<DistanceMatrix>), CliError> {
    let dir = outdir(cfg)?;
    let mut report = Report::default();
    let mut matrices = Vec::new();
    for &kind in &cfg.distances {
        let dm = distance_matrix(dens, &ds.ids(), kind).stage(Stage::Distance)?;
        for fmt in [Format::Csv, Format::Json] {
            let path = dir.join(format!("matrix_{}.{}", kind.tag(), fmt.extension()));
            write_matrix(&dm, &path, fmt).stage(Stage::Write)?;
            report.written.push(path);
        }
        matrices.push(dm);
    }
    Ok((report, matrices))
}

/// Clusters a matrix file (`cfg.input`) into `dendrogram_{tag}.*` and,
/// with a cut, `clusters_{tag}.csv`.
pub fn cluster(cfg: &RunConfig) -> Result<Report, CliError> {
    let dm = read_matrix(&cfg.input, cfg.format).stage(Stage::Read)?;
    if let Some(k) = cfg.cut {
        if k > dm.len() {
            return Err(CliError::config(format!("cut {k} is out of range for {} leaves", dm.len())));
        }
    }
    let tag = match dm.kind() {
        Some(kind) => kind.tag().to_string(),
        None => cfg
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "matrix".into()),
    };
    let groups = vec![None; dm.len()];
    cluster_matrix(cfg, &dm, &tag, &groups)
}

fn cluster_matrix(
    cfg: &RunConfig,
    dm: &DistanceMatrix,
    tag: &str,
    groups: &[Option<String>],
) -> Result<Report, CliError> {
    let dir = outdir(cfg)?;
    let dend = agglomerate(dm, cfg.linkage).stage(Stage::Cluster)?;
    let mut report = Report::default();

    let nwk = dir.join(format!("dendrogram_{tag}.nwk"));
    write_text(&nwk, &(to_newick(&dend) + "\n")).stage(Stage::Write)?;
    let json = dir.join(format!("dendrogram_{tag}.json"));
    write_dendrogram_json(&dend, dm.kind(), Some(cfg.linkage), &json).stage(Stage::Write)?;
    report.written.extend([nwk, json]);

    if cfg.plots {
        let title = match dm.kind() {
            Some(kind) => format!("{} linkage, {kind}", cfg.linkage),
            None => format!("{} linkage", cfg.linkage),
        };
        let svg = dir.join(format!("dendrogram_{tag}.svg"));
        plot_dendrogram(&dend, &title, &svg).stage(Stage::Write)?;
        report.written.push(svg);
    }

    if let Some(k) = cfg.cut {
        let assignment = cut(&dend, k).stage(Stage::Cluster)?;
        let path = dir.join(format!("clusters_{tag}.csv"));
        write_clusters(dm.labels(), &assignment, groups, &path).stage(Stage::Write)?;
        report.written.push(path);
        if groups.iter().all(Option::is_some) {
            let truth: Vec<&str> = groups.iter().map(|g| g.as_deref().unwrap()).collect();
            report
                .agreement
                .push((tag.to_string(), adjusted_rand_index(&assignment, &truth)));
        }
    }
    Ok(report)
}

/// Density and leaf-outline figures before and after normalization.
pub fn plot(cfg: &RunConfig) -> Result<Report, CliError> {
    let ds = load_dataset(cfg)?;
    plot_dataset(cfg, &ds, &normalized(&ds))
}

fn plot_dataset(cfg: &RunConfig, ds: &Dataset, dens: &[StepDensity]) -> Result<Report, CliError> {
    let dir = outdir(cfg)?;
    let groups = ds.groups();
    let mut report = Report::default();

    let raw = dir.join("densities_raw.svg");
    write_text(&raw, &render_raw_traces(ds.sequences(), groups, "Raw traces"))
        .stage(Stage::Write)?;
    let norm = dir.join("densities_normalized.svg");
    plot_densities(dens, groups, "Normalized densities", &norm).stage(Stage::Write)?;
    report.written.extend([raw, norm]);

    for (rotated, name, title) in [
        (false, "leaves_raw.svg", "Leaf outlines"),
        (true, "leaves_normalized.svg", "Leaf outlines, rotated to mean direction"),
    ] {
        let outlines: Vec<_> = ds.sequences().iter().map(|s| leaf_outline(s, rotated)).collect();
        let path = dir.join(name);
        plot_leaves(&outlines, 0, title, &path).stage(Stage::Write)?;
        report.written.push(path);
    }
    Ok(report)
}

/// Everything: densities, matrices, dendrograms, cuts and figures.
pub fn pipeline(cfg: &RunConfig) -> Result<Report, CliError> {
    let ds = load_dataset(cfg)?;
    let dens = normalized(&ds);
    let mut report = densify_dataset(cfg, &ds, &dens)?;
    let (mats, matrices) = distmat_dataset(cfg, &ds, &dens)?;
    report.merge(mats);
    for dm in &matrices {
        let kind: DistanceKind = dm.kind().expect("computed matrices carry their kind");
        report.merge(cluster_matrix(cfg, dm, kind.tag(), ds.groups())?);
    }
    if cfg.plots {
        report.merge(plot_dataset(cfg, &ds, &dens)?);
    }
    Ok(report)
}

/// Writes a synthetic dataset with ground-truth groups.
pub fn synth(cfg: &SynthConfig, output: &Path, format: Format) -> Result<Report, CliError> {
    let ds = generate(cfg).stage(Stage::Synth)?;
    if let Some(dir) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| {
            CliError::new(Stage::Write, leafdens_core::Error::Io { path: dir.into(), source: e })
        })?;
    }
    write_dataset(&ds, output, format).stage(Stage::Write)?;
    Ok(Report {
        written: vec![output.to_path_buf()],
        ..Report::default()
    })
}
