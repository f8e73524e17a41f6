//! Manifest-driven batch runner for the verification checks.
//!
//! A manifest names a list of (claim, instance) pairs. Every referenced spec
//! file is read and parsed before any computation starts; construction or
//! check errors after that point are recorded in the affected check's report
//! and do not abort the rest of the suite.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use absnorm::bm::LinearMap;
use absnorm::norm2::AbsoluteNorm;
use absnorm::space::FiniteSpace;
use absnorm::specfile::{NormSpec, SpaceSpec};
use absnorm::verify::{
    check_asq_impossible, check_lemma_infty, check_loh2, check_loh3, check_prop_loh,
    check_s_isometry_invariance, check_sum_lasq_transfer, Verdict, VerificationReport,
};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::report::{digest_file, write_atomic, Envelope, InputDigest};

#[derive(Deserialize)]
pub struct RunManifest {
    pub output_dir: PathBuf,
    /// Default grid resolution for commands that do not pin their own.
    #[serde(default)]
    pub resolution: Option<usize>,
    pub commands: Vec<CheckCommand>,
}

#[derive(Deserialize)]
pub struct CheckCommand {
    pub name: String,
    #[serde(flatten)]
    pub spec: CheckSpec,
}

#[derive(Deserialize)]
#[serde(tag = "claim")]
pub enum CheckSpec {
    #[serde(rename = "corner-value-pins-max-norm")]
    CornerValue {
        norm: String,
        resolution: Option<usize>,
    },
    #[serde(rename = "doubling-forces-corner")]
    Doubling {
        norm: String,
        samples: Option<usize>,
    },
    #[serde(rename = "modulus-region-replay")]
    RegionReplay {
        norm: String,
        eps: f64,
        resolution: Option<usize>,
    },
    #[serde(rename = "sum-pushout")]
    SumPushout {
        left: String,
        right: String,
        norm: String,
        eps: f64,
        resolution: Option<usize>,
    },
    #[serde(rename = "sum-defect-transfer")]
    DefectTransfer {
        left: String,
        right: String,
        norm: String,
        mu: f64,
        resolution: Option<usize>,
    },
    #[serde(rename = "sum-never-square")]
    NeverSquare {
        left: String,
        right: String,
        norm: String,
        resolution: Option<usize>,
    },
    #[serde(rename = "modulus-isometry-invariance")]
    IsometryInvariance {
        space: String,
        map: Vec<Vec<f64>>,
        resolution: Option<usize>,
    },
}

impl CheckSpec {
    fn claim(&self) -> &'static str {
        match self {
            CheckSpec::CornerValue { .. } => "corner-value-pins-max-norm",
            CheckSpec::Doubling { .. } => "doubling-forces-corner",
            CheckSpec::RegionReplay { .. } => "modulus-region-replay",
            CheckSpec::SumPushout { .. } => "sum-pushout",
            CheckSpec::DefectTransfer { .. } => "sum-defect-transfer",
            CheckSpec::NeverSquare { .. } => "sum-never-square",
            CheckSpec::IsometryInvariance { .. } => "modulus-isometry-invariance",
        }
    }

    /// Referenced spec files, with the role each plays.
    fn references(&self) -> Vec<(&str, Role)> {
        match self {
            CheckSpec::CornerValue { norm, .. }
            | CheckSpec::Doubling { norm, .. }
            | CheckSpec::RegionReplay { norm, .. } => vec![(norm, Role::Norm)],
            CheckSpec::SumPushout {
                left, right, norm, ..
            }
            | CheckSpec::DefectTransfer {
                left, right, norm, ..
            }
            | CheckSpec::NeverSquare {
                left, right, norm, ..
            } => vec![
                (left, Role::Space),
                (right, Role::Space),
                (norm, Role::Norm),
            ],
            CheckSpec::IsometryInvariance { space, .. } => vec![(space, Role::Space)],
        }
    }

    fn parameters(&self, default_res: Option<usize>) -> Map<String, Value> {
        let mut p = Map::new();
        p.insert("claim".into(), self.claim().into());
        match self {
            CheckSpec::CornerValue { resolution, .. } => {
                p.insert("resolution".into(), (*resolution).or(default_res).into());
            }
            CheckSpec::Doubling { samples, .. } => {
                p.insert("samples".into(), (*samples).or(default_res).into());
            }
            CheckSpec::RegionReplay {
                eps, resolution, ..
            } => {
                p.insert("eps".into(), json!(eps));
                p.insert("resolution".into(), (*resolution).or(default_res).into());
            }
            CheckSpec::SumPushout {
                eps, resolution, ..
            } => {
                p.insert("eps".into(), json!(eps));
                p.insert("resolution".into(), (*resolution).or(default_res).into());
            }
            CheckSpec::DefectTransfer { mu, resolution, .. } => {
                p.insert("mu".into(), json!(mu));
                p.insert("resolution".into(), (*resolution).or(default_res).into());
            }
            CheckSpec::NeverSquare { resolution, .. } => {
                p.insert("resolution".into(), (*resolution).or(default_res).into());
            }
            CheckSpec::IsometryInvariance {
                map, resolution, ..
            } => {
                p.insert("map".into(), json!(map));
                p.insert("resolution".into(), (*resolution).or(default_res).into());
            }
        }
        p
    }
}

enum Role {
    Norm,
    Space,
}

/// Spec file parsed during the fail-fast pass. Construction (which can fail
/// on semantically bad data, e.g. a dented polygon chain) happens per check.
enum ParsedSpec {
    Norm(NormSpec),
    Space(SpaceSpec),
}

impl ParsedSpec {
    fn norm(&self) -> Result<AbsoluteNorm> {
        match self {
            ParsedSpec::Norm(s) => Ok(s.to_norm()?),
            ParsedSpec::Space(_) => bail!("expected a norm spec, found a space spec"),
        }
    }

    fn space(&self) -> Result<FiniteSpace> {
        match self {
            ParsedSpec::Space(s) => Ok(s.to_space()?),
            ParsedSpec::Norm(_) => bail!("expected a space spec, found a norm spec"),
        }
    }
}

#[derive(Serialize)]
struct CheckBody {
    name: String,
    claim: String,
    /// "pass", "vacuous", "fail", or "error". Vacuous counts as a pass for
    /// the exit status; the report's notes say what was missing.
    status: &'static str,
    report: Option<VerificationReport>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SummaryLine {
    name: String,
    claim: String,
    status: &'static str,
    worst_margin: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SummaryBody {
    checks: Vec<SummaryLine>,
    passed: usize,
    vacuous: usize,
    failed: usize,
    errored: usize,
}

fn status_of(outcome: &Result<VerificationReport, String>) -> &'static str {
    match outcome {
        Ok(r) => match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Vacuous => "vacuous",
            Verdict::Fail => "fail",
        },
        Err(_) => "error",
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

pub fn run_suite(manifest_path: &Path, out_override: Option<&Path>) -> Result<ExitCode> {
    let manifest_text = fs::read_to_string(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&manifest_text)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    // Fail fast: every command name must be a legal file stem and unique, and
    // every referenced spec file must read and parse, before anything runs.
    let mut specs: BTreeMap<String, (ParsedSpec, InputDigest)> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for cmd in &manifest.commands {
        if !valid_name(&cmd.name) {
            bail!(
                "check name {:?} is not a valid file stem (letters, digits, '-', '_')",
                cmd.name
            );
        }
        if !seen.insert(cmd.name.clone()) {
            bail!("duplicate check name {:?}", cmd.name);
        }
        for (rel, role) in cmd.spec.references() {
            if specs.contains_key(rel) {
                continue;
            }
            let path = base.join(rel);
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let parsed = match role {
                Role::Norm => ParsedSpec::Norm(
                    serde_json::from_str(&text)
                        .with_context(|| format!("parsing {}", path.display()))?,
                ),
                Role::Space => ParsedSpec::Space(
                    serde_json::from_str(&text)
                        .with_context(|| format!("parsing {}", path.display()))?,
                ),
            };
            let mut digest = digest_file(&path)?;
            // Record the manifest-relative path so reports are location free.
            digest.path = rel.to_string();
            specs.insert(rel.to_string(), (parsed, digest));
        }
    }

    let default_res = manifest.resolution;
    let outcomes: Vec<Result<VerificationReport, String>> = manifest
        .commands
        .par_iter()
        .map(|cmd| run_check(&cmd.spec, &specs, default_res).map_err(|e| format!("{e:#}")))
        .collect();

    let out_dir = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.output_dir.clone());
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut lines = Vec::new();
    let mut tallies = [0usize; 4];
    for (cmd, outcome) in manifest.commands.iter().zip(&outcomes) {
        let status = status_of(outcome);
        let idx = match status {
            "pass" => 0,
            "vacuous" => 1,
            "fail" => 2,
            _ => 3,
        };
        tallies[idx] += 1;
        let (report, error) = match outcome {
            Ok(r) => (Some(r.clone()), None),
            Err(e) => (None, Some(e.clone())),
        };
        let inputs = cmd
            .spec
            .references()
            .iter()
            .map(|(rel, _)| specs[*rel].1.clone())
            .collect();
        let body = CheckBody {
            name: cmd.name.clone(),
            claim: cmd.spec.claim().into(),
            status,
            report,
            error: error.clone(),
        };
        let envelope = Envelope::new(inputs, cmd.spec.parameters(default_res), body);
        write_atomic(&out_dir.join(format!("{}.json", cmd.name)), &envelope.to_json())?;
        println!("{}: {status}", cmd.name);
        lines.push(SummaryLine {
            name: cmd.name.clone(),
            claim: cmd.spec.claim().into(),
            status,
            worst_margin: outcome.as_ref().ok().map(|r| r.worst_margin),
            error,
        });
    }

    let [passed, vacuous, failed, errored] = tallies;
    let mut params = Map::new();
    params.insert("commands".into(), json!(manifest.commands.len()));
    params.insert("resolution".into(), default_res.into());
    let mut manifest_digest = digest_file(manifest_path)?;
    manifest_digest.path = manifest_path.display().to_string();
    let summary = Envelope::new(
        vec![manifest_digest],
        params,
        SummaryBody {
            checks: lines,
            passed,
            vacuous,
            failed,
            errored,
        },
    );
    write_atomic(&out_dir.join("summary.json"), &summary.to_json())?;
    println!(
        "suite: {passed} passed, {vacuous} vacuous, {failed} failed, {errored} errored"
    );

    Ok(if failed + errored == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_check(
    spec: &CheckSpec,
    specs: &BTreeMap<String, (ParsedSpec, InputDigest)>,
    default_res: Option<usize>,
) -> Result<VerificationReport> {
    let norm_of = |rel: &str| specs[rel].0.norm();
    let space_of = |rel: &str| specs[rel].0.space();
    let res = |r: &Option<usize>, fallback: usize| (*r).or(default_res).unwrap_or(fallback);
    match spec {
        CheckSpec::CornerValue { norm, resolution } => {
            Ok(check_lemma_infty(&norm_of(norm)?, res(resolution, 256)))
        }
        CheckSpec::Doubling { norm, samples } => {
            Ok(check_loh2(&norm_of(norm)?, res(samples, 2000)))
        }
        CheckSpec::RegionReplay {
            norm,
            eps,
            resolution,
        } => Ok(check_loh3(&norm_of(norm)?, *eps, res(resolution, 512))?),
        CheckSpec::SumPushout {
            left,
            right,
            norm,
            eps,
            resolution,
        } => Ok(check_prop_loh(
            &space_of(left)?,
            &space_of(right)?,
            &norm_of(norm)?,
            *eps,
            res(resolution, 1_800_000),
        )?),
        CheckSpec::DefectTransfer {
            left,
            right,
            norm,
            mu,
            resolution,
        } => Ok(check_sum_lasq_transfer(
            &space_of(left)?,
            &space_of(right)?,
            &norm_of(norm)?,
            *mu,
            res(resolution, 40_000),
        )?),
        CheckSpec::NeverSquare {
            left,
            right,
            norm,
            resolution,
        } => Ok(check_asq_impossible(
            &space_of(left)?,
            &space_of(right)?,
            &norm_of(norm)?,
            res(resolution, 20_000),
        )?),
        CheckSpec::IsometryInvariance {
            space,
            map,
            resolution,
        } => {
            let map = LinearMap::new(map.clone())?;
            Ok(check_s_isometry_invariance(
                &space_of(space)?,
                &map,
                res(resolution, 2048),
            )?)
        }
    }
}
