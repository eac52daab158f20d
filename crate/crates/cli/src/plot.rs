//! Plain gnuplot scripts for the CSV outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{Command, RunConfig};

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// `(table, x column, y columns, x label)` per command, 1-based columns.
fn layout(cmd: Command) -> Option<(&'static str, usize, &'static [usize], &'static str)> {
    match cmd {
        Command::Eta => Some(("eta", 2, &[3], "alpha")),
        Command::BoundState => Some(("bound_state", 2, &[5, 6], "alpha")),
        Command::CriticalAlpha => Some(("critical_alpha", 1, &[2], "delta")),
        Command::GroundEnergy => Some(("ground_energy", 1, &[4, 6], "alpha")),
        Command::Dynamics => Some(("dynamics", 1, &[7, 4], "t")),
        Command::PhaseDiagram => Some(("boundaries", 1, &[2, 3], "delta")),
        Command::Derivative | Command::Verify => None,
    }
}

pub fn write_script(cfg: &RunConfig, files: &[(PathBuf, String)]) -> std::io::Result<()> {
    let Some(out) = &cfg.out else { return Ok(()) };
    let Some((table, x, ys, xlabel)) = layout(cfg.command) else {
        return Ok(());
    };
    let Some((data, _)) = files.iter().find(|(_, name)| name == table) else {
        return Ok(());
    };
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    if cfg.command == Command::PhaseDiagram {
        let _ = writeln!(s, "set ylabel 'alpha'");
    }
    let n = ys.len();
    let _ = writeln!(s, "set multiplot layout {n},1");
    for y in ys {
        let _ = writeln!(s, "plot '{}' using {x}:{y} with lines", file_name(data));
    }
    let _ = writeln!(s, "unset multiplot");
    let mut script = out.clone().into_os_string();
    script.push(".gp");
    std::fs::write(PathBuf::from(script), s)
}
