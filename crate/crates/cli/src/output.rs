//! CSV and JSON artifacts. Floats use the shortest round-trip decimal, so
//! repeated runs give byte-identical files.

use std::fmt::Write as _;

use dissipact::diagnostics::DissipationReport;
use dissipact::integrators::Trajectory;
use dissipact::linalg::format_float;

fn push_row(out: &mut String, cells: impl IntoIterator<Item = f64>) {
    let row: Vec<String> = cells.into_iter().map(format_float).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// `t, z1[i]…, z2[i]…, z3[i]…, H` per grid point.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.dims;
    let mut out = String::from("t");
    for (block, len) in [("z1", d.n1), ("z2", d.n2), ("z3", d.n3)] {
        for i in 0..len {
            let _ = write!(out, ",{block}[{i}]");
        }
    }
    out.push_str(",H\n");
    for ((t, z), h) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        push_row(&mut out, std::iter::once(*t).chain(z.iter().copied()).chain(std::iter::once(*h)));
    }
    out
}

/// `t_mid, y[i]…, dH, supply, dissipation, balance_residual` per step.
pub fn energy_csv(traj: &Trajectory, report: &DissipationReport) -> String {
    let mut out = String::from("t_mid");
    for i in 0..traj.dims.m {
        let _ = write!(out, ",y[{i}]");
    }
    out.push_str(",dH,supply,dissipation,balance_residual\n");
    for (y, s) in traj.outputs.iter().zip(&report.per_step) {
        let tail = [s.delta_h, s.supply, s.dissipation, s.balance_residual];
        push_row(&mut out, std::iter::once(s.t_mid).chain(y.iter().copied()).chain(tail));
    }
    out
}
