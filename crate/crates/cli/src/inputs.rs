//! Reading user-supplied files.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use sphereforge::records::{artifact_kind, Artifact};
use sphereforge::WeightedDesign;

use crate::artifacts::{self, DesignFile, InstanceFile, WeightSolutionFile};
use crate::CliError;
use sphereforge::design::WeightOutcome;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(CliError::usage)
}

/// Points as text, one per line, coordinates separated by commas or
/// whitespace; blank lines and lines starting with `#` are skipped. A
/// design record is also accepted, in which case its points are used.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        return Ok(read_design_text(&text, path)?.points().to_vec());
    }
    parse_points(&text)
        .with_context(|| format!("malformed point file {}", path.display()))
        .map_err(CliError::usage)
}

fn parse_points(text: &str) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| anyhow!("line {}: {s:?}: {e}", no + 1)))
            .collect::<anyhow::Result<Vec<f64>>>()?;
        if let Some(first) = points.first() {
            if first.len() != row.len() {
                bail!("line {}: {} coordinates, expected {}", no + 1, row.len(), first.len());
            }
        }
        points.push(row);
    }
    if points.is_empty() {
        bail!("no points");
    }
    Ok(points)
}

/// A design from a `design` record or a feasible `weight-solution` record.
pub fn read_design(path: &Path) -> Result<WeightedDesign, CliError> {
    let text = read_text(path)?;
    read_design_text(&text, path)
}

fn read_design_text(text: &str, path: &Path) -> Result<WeightedDesign, CliError> {
    let ctx = || format!("malformed design file {}", path.display());
    let kind = artifact_kind(text).with_context(ctx).map_err(CliError::usage)?;
    match kind.as_str() {
        artifacts::DESIGN => Ok(Artifact::<DesignFile>::from_json(text, &kind)
            .with_context(ctx)
            .map_err(CliError::usage)?
            .payload
            .design),
        artifacts::WEIGHT_SOLUTION => {
            let sol = Artifact::<WeightSolutionFile>::from_json(text, &kind)
                .with_context(ctx)
                .map_err(CliError::usage)?
                .payload;
            match sol.outcome {
                WeightOutcome::Feasible { design, .. } => Ok(design),
                WeightOutcome::Infeasible { .. } => Err(CliError::usage(anyhow!(
                    "{} holds an infeasibility certificate, not a design",
                    path.display()
                ))),
            }
        }
        other => Err(CliError::usage(anyhow!("{} is a {other} record, not a design", path.display()))),
    }
}

/// An instance record, with its invariants re-checked.
pub fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let text = read_text(path)?;
    let file = Artifact::<InstanceFile>::from_json(&text, artifacts::INSTANCE)
        .with_context(|| format!("malformed instance file {}", path.display()))
        .map_err(CliError::usage)?
        .payload;
    file.instance
        .validate(1e-10)
        .with_context(|| format!("instance {} fails its invariants", path.display()))
        .map_err(CliError::usage)?;
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_text_formats() {
        let p = parse_points("# two points\n1, 0\n\n-1 0\n").unwrap();
        assert_eq!(p, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert!(parse_points("1,0\n1,0,0\n").is_err());
        assert!(parse_points("1,x\n").is_err());
        assert!(parse_points("# nothing\n").is_err());
    }
}
