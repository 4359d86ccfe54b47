//! Dataset assembly: merge curated per-language streams into the two dataset
//! manifests with deduplication, an optional leakage check, per-language
//! shards, and content digests.

mod dedup;
mod leakage;
mod training;

pub use dedup::{dedup, dedup_key, jaccard, normalize_text, shingle_set, DedupReport, NEAR_DUP_THRESHOLD, SHINGLE_SIZE};
pub use leakage::{check_leakage, Collision, LeakageReport, MatchKind};
pub use training::{
    emit_training_configs, stage1_config, stage2_config, AdapterKind, LrSchedule, TrainingStage,
    TrainingStageConfig,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::types::{read_samples_from_path, serialize_sample, DataSample, LanguageTag};
use crate::util::{manifest_timestamp, sha256_hex, write_atomic};

/// The two emitted datasets: general knowledge QA and MC-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetName {
    MmedIft,
    MmedIftMc,
}

impl DatasetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetName::MmedIft => "mmed_ift",
            DatasetName::MmedIftMc => "mmed_ift_mc",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmed_ift" => Ok(DatasetName::MmedIft),
            "mmed_ift_mc" => Ok(DatasetName::MmedIftMc),
            other => Err(Error::config(format!("unknown dataset name {other:?}"))),
        }
    }
}

/// One written shard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardFile {
    /// File name relative to the output directory.
    pub path: String,
    pub samples: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: DatasetName,
    pub per_language_counts: BTreeMap<LanguageTag, u64>,
    pub files: Vec<ShardFile>,
    pub dedup_report: DedupReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage_report: Option<LeakageReport>,
    pub created_at: String,
    pub config_digest: String,
}

/// Declarative input for `assemble`: which files feed which dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblySpec {
    pub datasets: Vec<DatasetInputs>,
    /// Held-out MC test split checked for leakage alongside the MC train set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_test: Option<PathBuf>,
    #[serde(default = "default_probes_per_language")]
    pub probes_per_language: u32,
}

fn default_probes_per_language() -> u32 {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInputs {
    pub name: DatasetName,
    pub inputs: Vec<InputFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub lang: LanguageTag,
}

impl AssemblySpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = crate::util::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::config(format!("bad assembly spec: {e}")))
    }
}

/// Guard creating `<out>/.mifc.lock`; concurrent assemblies into the same
/// directory fail fast instead of interleaving shards.
struct DirLock {
    path: PathBuf,
}

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let path = dir.join(".mifc.lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(DirLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::config(format!(
                "output directory is locked by another assembly ({} exists)",
                path.display()
            ))),
            Err(e) => Err(Error::io(path.display().to_string(), e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Assemble datasets into `out_dir`: per-language shards
/// (`<name>.<LANG>.jsonl`), one manifest per dataset
/// (`<name>.manifest.json`), and a leakage check when both datasets are
/// present. Any unparseable input aborts the whole assembly.
pub fn assemble(
    spec: &AssemblySpec,
    cfg: &PipelineConfig,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<DatasetManifest>> {
    let out_dir = out_dir.as_ref();
    let _lock = DirLock::acquire(out_dir)?;

    let mut datasets: BTreeMap<DatasetName, Vec<DataSample>> = BTreeMap::new();
    let mut dedup_reports: BTreeMap<DatasetName, DedupReport> = BTreeMap::new();
    for dataset in &spec.datasets {
        let mut samples = Vec::new();
        for input in &dataset.inputs {
            let loaded = read_samples_from_path(&input.path)?;
            for sample in &loaded {
                if sample.lang != input.lang {
                    return Err(Error::validation(format!(
                        "{}: sample {} is {} but the file is declared {}",
                        input.path.display(),
                        sample.id,
                        sample.lang,
                        input.lang
                    )));
                }
            }
            samples.extend(loaded);
        }
        let (unique, report) = dedup(samples);
        let entry = datasets.entry(dataset.name).or_default();
        if !entry.is_empty() {
            return Err(Error::config(format!(
                "dataset {} is listed twice in the assembly spec",
                dataset.name
            )));
        }
        *entry = unique;
        dedup_reports.insert(dataset.name, report);
    }

    // Leakage check when both datasets take part.
    let leakage = match (datasets.get(&DatasetName::MmedIft), datasets.get(&DatasetName::MmedIftMc)) {
        (Some(ift), Some(mc_train)) => {
            let mc_test = match &spec.mc_test {
                Some(path) => read_samples_from_path(path)?,
                None => Vec::new(),
            };
            Some(check_leakage(ift, mc_train, &mc_test, spec.probes_per_language, cfg.seed)?)
        }
        _ => None,
    };

    let created_at = manifest_timestamp();
    let config_digest = cfg.digest();
    let mut manifests = Vec::new();
    for (name, samples) in &datasets {
        let mut per_language_counts = BTreeMap::new();
        let mut by_language: BTreeMap<LanguageTag, Vec<&DataSample>> = BTreeMap::new();
        for sample in samples {
            *per_language_counts.entry(sample.lang).or_insert(0u64) += 1;
            by_language.entry(sample.lang).or_default().push(sample);
        }
        let mut files = Vec::new();
        for (lang, shard) in &by_language {
            let file_name = format!("{name}.{lang}.jsonl");
            let mut content = String::new();
            for sample in shard {
                content.push_str(&serialize_sample(sample));
                content.push('\n');
            }
            write_atomic(out_dir.join(&file_name), content.as_bytes())?;
            files.push(ShardFile {
                path: file_name,
                samples: shard.len() as u64,
                sha256: sha256_hex(content.as_bytes()),
            });
        }
        let manifest = DatasetManifest {
            name: *name,
            per_language_counts,
            files,
            dedup_report: dedup_reports[name],
            leakage_report: if *name == DatasetName::MmedIft { leakage.clone() } else { None },
            created_at: created_at.clone(),
            config_digest: config_digest.clone(),
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
        json.push('\n');
        write_atomic(out_dir.join(format!("{name}.manifest.json")), json.as_bytes())?;
        manifests.push(manifest);
    }
    Ok(manifests)
}
