//! Trajectory directories: one OBJ per snapshot plus `index.json`.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::flow::evolve::{FlowScheme, FlowTrajectory, StepMeta, StopReason};
use crate::geometry::io::{write_atomic, write_obj};

#[derive(Serialize)]
struct Index<'a> {
    times: Vec<f64>,
    files: Vec<String>,
    scheme: FlowScheme,
    params: Params,
    stopped: Option<StopReason>,
    interpolated: bool,
    steps: &'a [StepMeta],
}

#[derive(Serialize)]
struct Params {
    dt: f64,
    n_snapshots: usize,
}

pub fn write_trajectory(dir: &Path, traj: &FlowTrajectory) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:05}.obj");
        write_obj(&dir.join(&name), &s.surface)?;
        files.push(name);
    }
    let index = Index {
        times: traj.times(),
        files,
        scheme: traj.scheme,
        params: Params {
            dt: traj.dt,
            n_snapshots: traj.snapshots.len(),
        },
        stopped: traj.stopped,
        interpolated: traj.interpolated,
        steps: &traj.steps,
    };
    write_atomic(&dir.join("index.json"), serde_json::to_string_pretty(&index)?.as_bytes())
}
