// SPDX-License-Identifier: Apache-2.0
//! CSV emitters for trajectories and sampled paths. Reals are written with
//! 17 significant digits so they parse back to the same `f64`.

use std::io::{self, Write};

use crate::ctmc::Trajectory;
use crate::path::SampledPath;

/// 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn class_columns(prefix: &str, islands: usize, strains: usize) -> impl Iterator<Item = String> + '_ {
    (0..islands).flat_map(move |i| (0..strains).map(move |k| format!("{prefix}_{i}_{k}")))
}

fn join_counts(counts: &[u32]) -> String {
    counts.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// `time,island,strain,event,Y_<i>_<k>...`. The first row is the initial
/// state at time 0 with event `initial` and empty island/strain fields.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    let header: Vec<String> = ["time", "island", "strain", "event"]
        .into_iter()
        .map(String::from)
        .chain(class_columns("Y", traj.islands(), traj.strains()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    writeln!(w, "{},,,initial,{}", fmt17(0.0), join_counts(traj.initial.as_slice()))?;
    for n in 0..traj.len() {
        let e = traj.events[n];
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt17(traj.times[n]),
            e.island(),
            e.strain(),
            e.name(),
            join_counts(traj.state_after(n))
        )?;
    }
    Ok(())
}

/// `t,<prefix>_<i>_<k>...`, one row per sample.
pub fn write_sampled_csv<W: Write>(
    mut w: W,
    path: &SampledPath,
    strains: usize,
    prefix: &str,
) -> io::Result<()> {
    let islands = path.width.checked_div(strains).unwrap_or(0);
    let header: Vec<String> = std::iter::once("t".to_string()).chain(class_columns(prefix, islands, strains)).collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, row) in path.rows() {
        let cells: Vec<String> = std::iter::once(fmt17(t)).chain(row.iter().map(|&v| fmt17(v))).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}
