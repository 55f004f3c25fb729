//! Run configuration: command-line flags over an optional `key = value`
//! file over built-in defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use leafdens_core::synth::SynthConfig;
use leafdens_core::{DistanceKind, Format, Linkage, DEFAULT_MOMENT_ORDER};

use crate::error::{CliError, Stage};

/// Settings parsed from a config file. Unknown keys are rejected.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

pub const KNOWN_KEYS: [&str; 16] = [
    "input", "format", "distance", "r", "linkage", "cut", "outdir", "plots", "seed", "groups",
    "per_group", "min_len", "max_len", "noise", "rotate", "output",
];

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "{}:{}: expected `key = value`",
                    origin.display(),
                    n + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(format!(
                    "{}:{}: unknown key `{key}`",
                    origin.display(),
                    n + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(Stage::Config, leafdens_core::Error::Io { path: path.into(), source: e })
        })?;
        ConfigFile::parse(&text, path)
    }

    /// Typed lookup.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("config key `{key}`: invalid value `{v}`"))),
        }
    }
}

/// Which distances to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceChoice {
    One(&'static str),
    All,
}

impl FromStr for DistanceChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(DistanceChoice::All);
        }
        DistanceKind::ALL_TAGS
            .iter()
            .find(|t| **t == s)
            .map(|t| DistanceChoice::One(t))
            .ok_or_else(|| format!("unknown distance `{s}` (expected l1, sup, hellinger, moments or all)"))
    }
}

impl DistanceChoice {
    pub fn kinds(&self, order: usize) -> Vec<DistanceKind> {
        match self {
            DistanceChoice::All => DistanceKind::all(order).to_vec(),
            DistanceChoice::One(tag) => vec![DistanceKind::from_tag(tag, order).expect("known tag")],
        }
    }
}

/// Fully resolved settings for the analysis subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: Format,
    pub distances: Vec<DistanceKind>,
    pub moment_order: usize,
    pub linkage: Linkage,
    pub cut: Option<usize>,
    pub outdir: PathBuf,
    pub plots: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, outdir: impl Into<PathBuf>) -> Self {
        let input = input.into();
        let format = Format::from_path(&input).unwrap_or_default();
        RunConfig {
            input,
            format,
            distances: vec![DistanceKind::L1],
            moment_order: DEFAULT_MOMENT_ORDER,
            linkage: Linkage::Complete,
            cut: None,
            outdir: outdir.into(),
            plots: true,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.moment_order == 0 {
            return Err(CliError::config("moment order r must be at least 1".into()));
        }
        if self.cut == Some(0) {
            return Err(CliError::config("cut must be at least 1".into()));
        }
        Ok(())
    }
}

/// Flag values as given on the command line; `None` means not given.
#[derive(Debug, Default, Clone)]
pub struct RunOverrides {
    pub input: Option<PathBuf>,
    pub format: Option<Format>,
    pub distance: Option<DistanceChoice>,
    pub r: Option<usize>,
    pub linkage: Option<Linkage>,
    pub cut: Option<usize>,
    pub outdir: Option<PathBuf>,
    pub no_plots: bool,
}

pub fn resolve_run(flags: &RunOverrides, file: &ConfigFile) -> Result<RunConfig, CliError> {
    let input: PathBuf = match flags.input.clone() {
        Some(p) => p,
        None => file
            .get::<PathBuf>("input")?
            .ok_or_else(|| CliError::config("no input given (use --input)".into()))?,
    };
    let format = match flags.format.or(file.get("format")?) {
        Some(f) => f,
        None => Format::from_path(&input).unwrap_or_default(),
    };
    let moment_order = flags.r.or(file.get("r")?).unwrap_or(DEFAULT_MOMENT_ORDER);
    let distance = flags
        .distance
        .or(file.get("distance")?)
        .unwrap_or(DistanceChoice::One("l1"));
    let plots = if flags.no_plots {
        false
    } else {
        file.get("plots")?.unwrap_or(true)
    };
    let config = RunConfig {
        input,
        format,
        distances: distance.kinds(moment_order),
        moment_order,
        linkage: flags.linkage.or(file.get("linkage")?).unwrap_or_default(),
        cut: flags.cut.or(file.get("cut")?),
        outdir: flags
            .outdir
            .clone()
            .or(file.get("outdir")?)
            .unwrap_or_else(|| PathBuf::from("leafdens-out")),
        plots,
    };
    config.validate()?;
    Ok(config)
}

/// Flag values for `synth`.
#[derive(Debug, Default, Clone)]
pub struct SynthOverrides {
    pub groups: Option<usize>,
    pub per_group: Option<usize>,
    pub min_len: Option<usize>,
    pub max_len: Option<usize>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub no_rotate: bool,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn resolve_synth(
    flags: &SynthOverrides,
    file: &ConfigFile,
) -> Result<(SynthConfig, PathBuf, Format), CliError> {
    let d = SynthConfig::default();
    let rotate = if flags.no_rotate {
        false
    } else {
        file.get("rotate")?.unwrap_or(d.rotate)
    };
    let config = SynthConfig {
        groups: flags.groups.or(file.get("groups")?).unwrap_or(d.groups),
        per_group: flags.per_group.or(file.get("per_group")?).unwrap_or(d.per_group),
        min_len: flags.min_len.or(file.get("min_len")?).unwrap_or(d.min_len),
        max_len: flags.max_len.or(file.get("max_len")?).unwrap_or(d.max_len),
        noise: flags.noise.or(file.get("noise")?).unwrap_or(d.noise),
        rotate,
        seed: flags.seed.or(file.get("seed")?).unwrap_or(d.seed),
    };
    let output = flags
        .output
        .clone()
        .or(file.get("output")?)
        .unwrap_or_else(|| PathBuf::from("synthetic.json"));
    let format = match flags.format.or(file.get("format")?) {
        Some(f) => f,
        None => Format::from_path(&output).unwrap_or(Format::Json),
    };
    Ok((config, output, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file = ConfigFile::parse(
            "# comment\ninput = data.json\nr = 7\nlinkage = single\ndistance = all\nplots = false\n",
            Path::new("cfg"),
        )
        .unwrap();
        let flags = RunOverrides {
            linkage: Some(Linkage::Average),
            ..RunOverrides::default()
        };
        let cfg = resolve_run(&flags, &file).unwrap();
        assert_eq!(cfg.input, PathBuf::from("data.json"));
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.moment_order, 7);
        assert_eq!(cfg.linkage, Linkage::Average);
        assert_eq!(cfg.distances.len(), 4);
        assert_eq!(cfg.distances[3], DistanceKind::MomentEuclidean { order: 7 });
        assert!(!cfg.plots);
        assert_eq!(cfg.cut, None);
    }

    #[test]
    fn defaults() {
        let flags = RunOverrides {
            input: Some("x.csv".into()),
            ..RunOverrides::default()
        };
        let cfg = resolve_run(&flags, &ConfigFile::default()).unwrap();
        assert_eq!(cfg, RunConfig::new("x.csv", "leafdens-out"));
        assert_eq!(cfg.linkage, Linkage::Complete);
        assert_eq!(cfg.moment_order, 5);
    }

    #[test]
    fn bad_config_values() {
        assert!(ConfigFile::parse("colour = red", Path::new("c")).is_err());
        assert!(ConfigFile::parse("just words", Path::new("c")).is_err());
        let file = ConfigFile::parse("r = many\ninput = a.csv", Path::new("c")).unwrap();
        assert!(resolve_run(&RunOverrides::default(), &file).is_err());
        let file = ConfigFile::parse("r = 0\ninput = a.csv", Path::new("c")).unwrap();
        assert!(resolve_run(&RunOverrides::default(), &file).is_err());
        assert!(resolve_run(&RunOverrides::default(), &ConfigFile::default()).is_err());
    }

    #[test]
    fn synth_resolution() {
        let file = ConfigFile::parse("groups = 2\nnoise = 0\nseed = 9", Path::new("c")).unwrap();
        let flags = SynthOverrides {
            seed: Some(3),
            output: Some("out.csv".into()),
            ..SynthOverrides::default()
        };
        let (cfg, out, fmt) = resolve_synth(&flags, &file).unwrap();
        assert_eq!((cfg.groups, cfg.noise, cfg.seed), (2, 0.0, 3));
        assert_eq!(out, PathBuf::from("out.csv"));
        assert_eq!(fmt, Format::Csv);
    }
}
