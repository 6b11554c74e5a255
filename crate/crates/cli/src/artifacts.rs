//! On-disk artifact formats.
//!
//! Every run directory gets `runlog.csv` (the evaluation stream),
//! `pareto.csv` / `pareto.json` (the final archive), and `meta.json` (the
//! fully resolved config plus run stats). Compare experiments additionally
//! write one `hv_curves.csv` at the top level, and sweeps write
//! `sweep.csv`. CSV cells use Rust's shortest-round-trip float formatting,
//! so identical runs produce byte-identical files and every file re-parses
//! to exactly the values that were written.

use std::path::Path;

use serde::Serialize;

use crossbow_core::eval::sweep::SweepRow;
use crossbow_core::objective::{externalize, Sense};
use crossbow_core::pareto::ParetoArchive;
use crossbow_core::space::{DesignPoint, DesignSpace};

use crate::config::sense_suffix;
use crate::CliError;

/// One `runlog.csv` row: a single evaluator query. Initialization rows
/// carry iteration 0; optimization rows count from 1.
pub struct RunlogRow<'a> {
    pub iteration: usize,
    pub point: &'a DesignPoint,
    /// Objective values exactly as the evaluator reported them.
    pub objectives: &'a [f64],
    /// Archive hypervolume after this row's insertion.
    pub hypervolume: f64,
    /// Evaluator query counter after this row.
    pub queries: u64,
}

pub fn write_runlog(
    path: &Path,
    space: &DesignSpace,
    names: &[String],
    senses: &[Sense],
    rows: &[RunlogRow<'_>],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["iteration".to_string()];
    header.extend(space.slots().iter().map(|s| s.name.clone()));
    header.extend(annotated(names, senses));
    header.push("hv".to_string());
    header.push("queries".to_string());
    writer.write_record(&header)?;

    for row in rows {
        let mut record = vec![row.iteration.to_string()];
        record.extend(row.point.indices().iter().map(|i| i.to_string()));
        record.extend(row.objectives.iter().map(|v| v.to_string()));
        record.push(row.hypervolume.to_string());
        record.push(row.queries.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

fn annotated(names: &[String], senses: &[Sense]) -> Vec<String> {
    names
        .iter()
        .zip(senses)
        .map(|(n, &s)| format!("{n}{}", sense_suffix(s)))
        .collect()
}

/// A Pareto-front file: design level indices, then raw objective values
/// with sense-annotated column names.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontFile {
    pub slot_names: Vec<String>,
    pub objective_names: Vec<String>,
    pub senses: Vec<Sense>,
    pub rows: Vec<FrontRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontRow {
    pub indices: Vec<usize>,
    pub objectives: Vec<f64>,
}

impl FrontFile {
    pub fn from_archive(
        space: &DesignSpace,
        archive: &ParetoArchive,
        names: &[String],
        senses: &[Sense],
    ) -> Result<Self, CliError> {
        let rows = archive
            .entries()
            .iter()
            .map(|entry| {
                let raw = externalize(&entry.costs, senses)?;
                Ok(FrontRow {
                    indices: entry.point.indices().to_vec(),
                    objectives: raw.values().to_vec(),
                })
            })
            .collect::<Result<_, crossbow_core::Error>>()?;
        Ok(FrontFile {
            slot_names: space.slots().iter().map(|s| s.name.clone()).collect(),
            objective_names: names.to_vec(),
            senses: senses.to_vec(),
            rows,
        })
    }

    /// Internal (minimization) cost vectors of every row.
    pub fn costs(&self) -> Result<Vec<Vec<f64>>, CliError> {
        self.rows
            .iter()
            .map(|row| {
                let vector = crossbow_core::ObjectiveVector::new(row.objectives.clone())?;
                Ok(crossbow_core::internalize(&vector, &self.senses)?)
            })
            .collect()
    }
}

pub fn emit_front(path: &Path, front: &FrontFile) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = front.slot_names.clone();
    header.extend(annotated(&front.objective_names, &front.senses));
    writer.write_record(&header)?;
    for row in &front.rows {
        let mut record: Vec<String> = row.indices.iter().map(|i| i.to_string()).collect();
        record.extend(row.objectives.iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn parse_front(path: &Path) -> Result<FrontFile, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::runtime(format!("cannot read front file: {e}")))?;
    let headers = reader.headers()?.clone();

    let mut slot_names = Vec::new();
    let mut objective_names = Vec::new();
    let mut senses = Vec::new();
    let mut objective_columns = Vec::new();
    for (col, name) in headers.iter().enumerate() {
        if let Some(stripped) = name.strip_suffix(":min") {
            objective_names.push(stripped.to_string());
            senses.push(Sense::Minimize);
            objective_columns.push(col);
        } else if let Some(stripped) = name.strip_suffix(":max") {
            objective_names.push(stripped.to_string());
            senses.push(Sense::Maximize);
            objective_columns.push(col);
        } else {
            if !objective_columns.is_empty() {
                return Err(CliError::runtime(format!(
                    "front file column '{name}' follows objective columns but has no :min/:max suffix"
                )));
            }
            slot_names.push(name.to_string());
        }
    }
    if objective_names.is_empty() {
        return Err(CliError::runtime(
            "front file declares no objective columns (suffix :min or :max)",
        ));
    }

    let slots = slot_names.len();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(CliError::runtime(format!(
                "front file row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        let parse = |field: &str, what: &str| -> Result<f64, CliError> {
            field.parse::<f64>().map_err(|_| {
                CliError::runtime(format!(
                    "front file row {}: cannot parse {what} '{field}'",
                    line + 2
                ))
            })
        };
        let mut indices = Vec::with_capacity(slots);
        for field in record.iter().take(slots) {
            indices.push(field.parse::<usize>().map_err(|_| {
                CliError::runtime(format!(
                    "front file row {}: cannot parse design index '{field}'",
                    line + 2
                ))
            })?);
        }
        let mut objectives = Vec::with_capacity(objective_columns.len());
        for &col in &objective_columns {
            objectives.push(parse(&record[col], "objective value")?);
        }
        rows.push(FrontRow {
            indices,
            objectives,
        });
    }
    Ok(FrontFile {
        slot_names,
        objective_names,
        senses,
        rows,
    })
}

#[derive(Serialize)]
struct ParetoJson<'a> {
    reference: &'a [f64],
    hypervolume: f64,
    objectives: Vec<ObjectiveJson<'a>>,
    entries: Vec<EntryJson>,
}

#[derive(Serialize)]
struct ObjectiveJson<'a> {
    name: &'a str,
    sense: Sense,
}

#[derive(Serialize)]
struct EntryJson {
    indices: Vec<usize>,
    objectives: Vec<f64>,
}

pub fn write_pareto_json(
    path: &Path,
    archive: &ParetoArchive,
    names: &[String],
    senses: &[Sense],
) -> Result<(), CliError> {
    let entries = archive
        .entries()
        .iter()
        .map(|entry| {
            let raw = externalize(&entry.costs, senses)?;
            Ok(EntryJson {
                indices: entry.point.indices().to_vec(),
                objectives: raw.values().to_vec(),
            })
        })
        .collect::<Result<_, crossbow_core::Error>>()?;
    let json = ParetoJson {
        reference: archive.reference(),
        hypervolume: archive.hypervolume(),
        objectives: names
            .iter()
            .zip(senses)
            .map(|(n, &s)| ObjectiveJson { name: n, sense: s })
            .collect(),
        entries,
    };
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &json)?;
    Ok(())
}

/// Run metadata: resolved config, run stats, and tool version.
#[derive(Serialize)]
pub struct MetaFile<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: String,
    pub seed: Option<u64>,
    pub queries: u64,
    pub reference: Option<Vec<f64>>,
    pub hypervolume: Option<f64>,
    pub wall_seconds: f64,
    pub config: &'a crate::config::ExperimentConfig,
}

pub fn write_meta(path: &Path, meta: &MetaFile<'_>) -> Result<(), CliError> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), meta)?;
    Ok(())
}

pub fn write_sweep(
    path: &Path,
    space: &DesignSpace,
    names: &[String],
    senses: &[Sense],
    rows: &[SweepRow],
) -> Result<(), CliError> {
    // One value column per parameter: sweep designs are uniform, so every
    // slot of a parameter shares one level value.
    let param_slots: Vec<usize> = (0..space.params().len())
        .map(|p| {
            space
                .slots()
                .iter()
                .position(|s| s.param == p)
                .expect("every parameter owns at least one slot")
        })
        .collect();

    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["label".to_string()];
    header.extend(space.params().iter().map(|p| p.name.clone()));
    header.extend(annotated(names, senses));
    writer.write_record(&header)?;

    for row in rows {
        let mut record = vec![row.label.clone()];
        for (&slot, param) in param_slots.iter().zip(space.params()) {
            let level = row.point.indices()[slot];
            record.push(param.levels[level].to_string());
        }
        record.extend(row.objectives.values().iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Aligned per-seed hypervolume curves with mean and sample standard
/// deviation columns for each method. All curves must share one length:
/// the common query budget.
pub fn write_hv_curves(
    path: &Path,
    seeds: &[u64],
    bo: &[Vec<f64>],
    baseline: &[Vec<f64>],
) -> Result<(), CliError> {
    if bo.len() != seeds.len() || baseline.len() != seeds.len() {
        return Err(CliError::runtime("one curve per seed per method required"));
    }
    let budget = bo
        .first()
        .map(Vec::len)
        .ok_or_else(|| CliError::runtime("no curves to write"))?;
    if bo
        .iter()
        .chain(baseline.iter())
        .any(|curve| curve.len() != budget)
    {
        return Err(CliError::runtime(
            "hypervolume curves must share one query budget",
        ));
    }

    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["queries".to_string()];
    header.extend(seeds.iter().map(|s| format!("bo_seed_{s}")));
    header.extend(seeds.iter().map(|s| format!("baseline_seed_{s}")));
    header.extend(
        ["bo_mean", "bo_std", "baseline_mean", "baseline_std"]
            .iter()
            .map(|s| s.to_string()),
    );
    writer.write_record(&header)?;

    for q in 0..budget {
        let bo_row: Vec<f64> = bo.iter().map(|c| c[q]).collect();
        let baseline_row: Vec<f64> = baseline.iter().map(|c| c[q]).collect();
        let mut record = vec![(q + 1).to_string()];
        record.extend(bo_row.iter().map(|v| v.to_string()));
        record.extend(baseline_row.iter().map(|v| v.to_string()));
        let (bm, bs) = mean_and_std(&bo_row);
        let (nm, ns) = mean_and_std(&baseline_row);
        record.push(bm.to_string());
        record.push(bs.to_string());
        record.push(nm.to_string());
        record.push(ns.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single
/// sample).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_front() -> FrontFile {
        FrontFile {
            slot_names: vec!["wbp.l0".to_string(), "abp".to_string()],
            objective_names: vec!["accuracy_pct".to_string(), "area_mm2".to_string()],
            senses: vec![Sense::Maximize, Sense::Minimize],
            rows: vec![
                FrontRow {
                    indices: vec![0, 1],
                    objectives: vec![92.5478515625, 0.0256],
                },
                FrontRow {
                    indices: vec![2, 0],
                    objectives: vec![88.0, 0.011],
                },
            ],
        }
    }

    #[test]
    fn front_files_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.csv");
        let front = sample_front();
        emit_front(&path, &front).unwrap();
        let parsed = parse_front(&path).unwrap();
        assert_eq!(parsed, front);
    }

    #[test]
    fn parse_rejects_malformed_fronts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.csv");

        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(parse_front(&path)
            .unwrap_err()
            .to_string()
            .contains("no objective"));

        std::fs::write(&path, "f:min,slot\n1,2\n").unwrap();
        assert!(parse_front(&path)
            .unwrap_err()
            .to_string()
            .contains("follows objective columns"));

        std::fs::write(&path, "slot,f:min\nx,2\n").unwrap();
        assert!(parse_front(&path)
            .unwrap_err()
            .to_string()
            .contains("design index"));
    }

    #[test]
    fn curves_carry_mean_and_sample_std() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hv_curves.csv");
        write_hv_curves(
            &path,
            &[0, 1],
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[vec![0.5, 0.5], vec![1.5, 2.5]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "queries,bo_seed_0,bo_seed_1,baseline_seed_0,baseline_seed_1,bo_mean,bo_std,baseline_mean,baseline_std"
        );
        // mean(1,3) = 2, sample std = sqrt(2); mean(0.5,1.5) = 1, std = sqrt(0.5).
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "1");
        assert_eq!(row[5], "2");
        assert_eq!(row[6].parse::<f64>().unwrap(), 2.0f64.sqrt());
        assert_eq!(row[7], "1");
        assert_eq!(row[8].parse::<f64>().unwrap(), 0.5f64.sqrt());
    }

    #[test]
    fn curve_lengths_must_agree() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hv_curves.csv");
        let err = write_hv_curves(&path, &[0], &[vec![1.0, 2.0]], &[vec![0.5]]).unwrap_err();
        assert!(err.to_string().contains("share one query budget"));
    }

    #[test]
    fn mean_and_std_handle_single_samples() {
        assert_eq!(mean_and_std(&[5.0]), (5.0, 0.0));
        let (m, s) = mean_and_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
    }
}
