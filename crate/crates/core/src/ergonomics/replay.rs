//! Keypoint replay files: CSV with one row per tick for offline scoring.
//!
//! Column order is fixed: `t_s`, then `x,y,z` for each keypoint in the
//! order shoulder_r, shoulder_l, elbow_r, elbow_l, wrist_r, wrist_l, neck,
//! thorax, pelvis, knee.

use super::{AngleTracker, ErgonomicScore, ErgonomicThresholds, Side, SkeletonKeypoints};
use crate::math::Vec3;
use std::io::{BufRead, Write};

/// Keypoint names in file order.
pub const KEYPOINT_ORDER: [&str; 10] = [
    "shoulder_r",
    "shoulder_l",
    "elbow_r",
    "elbow_l",
    "wrist_r",
    "wrist_l",
    "neck",
    "thorax",
    "pelvis",
    "knee",
];

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header mismatch: expected {expected} columns, found {found}")]
    Header { expected: usize, found: usize },
}

fn header() -> String {
    let mut cols = vec!["t_s".to_string()];
    for name in KEYPOINT_ORDER {
        for ax in ["x", "y", "z"] {
            cols.push(format!("{name}_{ax}_m"));
        }
    }
    cols.join(",")
}

/// Write keypoint rows with the canonical header.
pub fn write_keypoint_csv<W: Write>(
    mut out: W,
    rows: &[(f64, SkeletonKeypoints)],
) -> Result<(), ReplayError> {
    writeln!(out, "{}", header())?;
    for (t, kp) in rows {
        let pts = [
            kp.shoulder_r,
            kp.shoulder_l,
            kp.elbow_r,
            kp.elbow_l,
            kp.wrist_r,
            kp.wrist_l,
            kp.neck,
            kp.thorax,
            kp.pelvis,
            kp.knee,
        ];
        let mut line = format!("{t}");
        for p in pts {
            line.push_str(&format!(",{},{},{}", p.x, p.y, p.z));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Read keypoint rows written by [`write_keypoint_csv`]. The tracked side
/// is a scoring parameter, not part of the file.
pub fn read_keypoint_csv<R: BufRead>(
    input: R,
    side: Side,
) -> Result<Vec<(f64, SkeletonKeypoints)>, ReplayError> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(ReplayError::Header {
        expected: 31,
        found: 0,
    })?;
    let first = first?;
    let found = first.split(',').count();
    if found != 31 {
        return Err(ReplayError::Header {
            expected: 31,
            found,
        });
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 31 {
            return Err(ReplayError::Parse {
                line: idx + 1,
                msg: format!("expected 31 fields, found {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 31];
        for (i, f) in fields.iter().enumerate() {
            vals[i] = f.trim().parse().map_err(|e| ReplayError::Parse {
                line: idx + 1,
                msg: format!("field {i} ({f:?}): {e}"),
            })?;
        }
        let p = |k: usize| Vec3::new(vals[1 + 3 * k], vals[2 + 3 * k], vals[3 + 3 * k]);
        rows.push((
            vals[0],
            SkeletonKeypoints {
                shoulder_r: p(0),
                shoulder_l: p(1),
                elbow_r: p(2),
                elbow_l: p(3),
                wrist_r: p(4),
                wrist_l: p(5),
                neck: p(6),
                thorax: p(7),
                pelvis: p(8),
                knee: p(9),
                side,
            },
        ));
    }
    Ok(rows)
}

/// Score a replayed keypoint sequence with a fresh tracker.
pub fn score_rows(
    rows: &[(f64, SkeletonKeypoints)],
    thresholds: &ErgonomicThresholds,
) -> Vec<(f64, ErgonomicScore)> {
    let mut tracker = AngleTracker::new();
    rows.iter()
        .map(|(t, kp)| {
            let (angles, _) = tracker.update(kp);
            (*t, super::compute_score(&angles, thresholds))
        })
        .collect()
}
