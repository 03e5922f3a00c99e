//! Labeled trajectory collections and their CSV form.

use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::numfmt;

/// Significant digits used for every exported number.
pub const EXPORT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("trajectory set is empty")]
    Empty,
    #[error("trajectory '{name}' does not match the shape of the first one")]
    ShapeMismatch { name: String },
}

/// Named trajectories sharing one length and one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    entries: Vec<(String, Trajectory)>,
}

impl TrajectorySet {
    pub fn new(entries: Vec<(String, Trajectory)>) -> Result<Self, ExportError> {
        let Some((_, first)) = entries.first() else {
            return Err(ExportError::Empty);
        };
        let (steps, dim) = (first.steps(), first.dim());
        if let Some((name, _)) = entries
            .iter()
            .find(|(_, t)| t.steps() != steps || t.dim() != dim)
        {
            return Err(ExportError::ShapeMismatch { name: name.clone() });
        }
        Ok(TrajectorySet { entries })
    }

    pub fn entries(&self) -> &[(String, Trajectory)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.entries[0].1.steps()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].1.dim()
    }
}

/// `k,name,dim0,…` rows, steps ascending and trajectories in set order,
/// LF line endings.
pub fn write_trajectory_csv(ts: &TrajectorySet) -> String {
    let mut out = String::from("k,name");
    for d in 0..ts.dim() {
        out.push_str(&format!(",dim{d}"));
    }
    out.push('\n');
    for k in 0..=ts.steps() {
        for (name, traj) in ts.entries() {
            out.push_str(&k.to_string());
            out.push(',');
            out.push_str(name);
            for x in traj.state(k).iter() {
                out.push(',');
                out.push_str(&numfmt::significant(*x, EXPORT_DIGITS));
            }
            out.push('\n');
        }
    }
    out
}
