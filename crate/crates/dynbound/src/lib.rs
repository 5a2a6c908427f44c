//! Std companion to `dynbound-core`: system files, CSV/JSON/SVG output and
//! the `dynbound` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod output;
pub mod report;
pub mod svg;

use std::path::Path;

use dynbound_core::{Direction, PolyField, SectionPlane};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Missing files, unparsable systems or bad arguments (exit code 1).
    #[error("{0}")]
    Input(String),
    /// The integrator or a derived computation failed (exit code 2).
    #[error("{0}")]
    Integration(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Integration(_) => 2,
        }
    }
}

pub fn load_system(path: &Path) -> Result<PolyField, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    dynbound_core::polyfield::parse_system(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| match p.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("`{}` is not a finite number", p.trim())),
        })
        .collect()
}

/// `px,py,pz/nx,ny,nz/dir` with `dir` one of `positive`, `negative`, `both`
/// (or `+`, `-`, `pos`, `neg`).
pub fn parse_plane(s: &str) -> Result<SectionPlane, String> {
    let parts: Vec<&str> = s.split('/').collect();
    let [p, n, d] = parts.as_slice() else {
        return Err(format!("plane `{s}` is not of the form px,py,pz/nx,ny,nz/dir"));
    };
    let three = |v: Vec<f64>| -> Result<[f64; 3], String> {
        v.try_into().map_err(|_| "plane point and normal need three components".to_string())
    };
    let point = three(parse_vector(p)?)?;
    let normal = three(parse_vector(n)?)?;
    let direction = match d.trim() {
        "positive" | "pos" | "+" => Direction::Positive,
        "negative" | "neg" | "-" => Direction::Negative,
        "both" => Direction::Both,
        other => return Err(format!("unknown crossing direction `{other}`")),
    };
    SectionPlane::new(point, normal, direction).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("1, -2.5,3e2").unwrap(), vec![1.0, -2.5, 300.0]);
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("1,inf").is_err());
    }

    #[test]
    fn planes() {
        let p = parse_plane("0,0,27/0,0,2/positive").unwrap();
        assert_eq!(p.normal(), [0.0, 0.0, 1.0]);
        assert_eq!(p.direction(), Direction::Positive);
        assert_eq!(parse_plane("0,0,0/0,1,0/-").unwrap().direction(), Direction::Negative);
        assert!(parse_plane("0,0,0/0,0,0/both").is_err());
        assert!(parse_plane("0,0/0,0,1/both").is_err());
        assert!(parse_plane("0,0,0/0,0,1/up").is_err());
        assert!(parse_plane("0,0,0/0,0,1").is_err());
    }
}
