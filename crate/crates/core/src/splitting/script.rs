use serde::{Deserialize, Serialize};

use crate::complex::BranchedSurfaceComplex;
use crate::io::serialize;

use super::moves::{apply_split_move, SplitMove};
use super::region::{is_safe_region, Region};
use super::SplitError;

/// One move per line; blank lines and `#` comments are skipped.
pub fn parse_split_script(text: &str) -> Result<Vec<SplitMove>, SplitError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let m = line.parse().map_err(|message| SplitError::Parse { line: i + 1, message })?;
        out.push(m);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub complex: BranchedSurfaceComplex,
    pub region: Region,
}

impl Snapshot {
    /// The complex in file format, headed by a comment naming the region.
    pub fn to_text(&self) -> String {
        let ids: Vec<String> = self.region.iter().map(ToString::to_string).collect();
        format!("# safe_region = {}\n{}", ids.join(" "), serialize(&self.complex))
    }
}

/// Replays `moves`, growing the region after each one. The trace starts
/// with the input and gains one snapshot per move. Move indices in errors
/// count from 1.
pub fn run_split_script(
    b: &BranchedSurfaceComplex,
    region: &Region,
    moves: &[SplitMove],
) -> Result<Vec<Snapshot>, SplitError> {
    let report = is_safe_region(b, region)?;
    if !report.is_safe() {
        return Err(SplitError::NotSafe(report.violators()));
    }
    let mut trace = vec![Snapshot { complex: b.clone(), region: region.clone() }];
    for (i, m) in moves.iter().enumerate() {
        let last = trace.last().expect("non-empty trace");
        let step = apply_split_move(&last.complex, &last.region, m)
            .map_err(|error| SplitError::Abort { index: i + 1, error: Box::new(error) })?;
        trace.push(Snapshot { complex: step.complex, region: step.region });
    }
    Ok(trace)
}
