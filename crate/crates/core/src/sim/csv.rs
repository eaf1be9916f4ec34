use std::io::{self, Write};

use super::trajectory::Trajectory;
use super::waveforms::ElementWaveforms;
use crate::netlist::Formulation;

fn coordinate_units(form: Formulation) -> [&'static str; 3] {
    match form {
        Formulation::Loop => ["C*s", "C", "A"],
        Formulation::Node => ["Wb*s", "Wb", "V"],
    }
}

fn write_rows(out: &mut dyn Write, columns: &[(String, &[f64])], rows: usize) -> io::Result<()> {
    let header: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for k in 0..rows {
        line.clear();
        for (j, (_, series)) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", series[k]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn element_columns<'a>(waveforms: &'a ElementWaveforms, columns: &mut Vec<(String, &'a [f64])>, units: &mut Vec<String>) {
    let mut seen = std::collections::BTreeSet::new();
    for e in &waveforms.elements {
        for (q, series) in e.columns() {
            columns.push((format!("{}.{}", e.name, q.symbol()), series));
            if seen.insert(q.symbol()) {
                units.push(format!("{}[{}]", q.symbol(), q.unit()));
            }
        }
    }
}

/// Writes `t`, coordinates, their first and second derivatives and every
/// element waveform, one row per grid point.
pub fn write_trajectory_csv(out: &mut dyn Write, traj: &Trajectory, waveforms: &ElementWaveforms) -> io::Result<()> {
    let sym = traj.formulation.coordinate_symbol();
    let n = traj.n();
    let owned: Vec<(String, Vec<f64>)> = (0..n)
        .map(|i| (format!("{sym}{}", i + 1), traj.coord(i)))
        .chain((0..n).map(|i| (format!("{sym}{}_dot", i + 1), traj.velocity(i))))
        .chain((0..n).map(|i| (format!("{sym}{}_ddot", i + 1), traj.acceleration(i))))
        .collect();
    let mut columns: Vec<(String, &[f64])> = vec![("t".to_string(), &traj.t)];
    columns.extend(owned.iter().map(|(n, s)| (n.clone(), s.as_slice())));
    let [u0, u1, u2] = coordinate_units(traj.formulation);
    let mut units = vec![
        "t[s]".to_string(),
        format!("{sym}[{u0}]"),
        format!("{sym}_dot[{u1}]"),
        format!("{sym}_ddot[{u2}]"),
    ];
    element_columns(waveforms, &mut columns, &mut units);
    writeln!(out, "# units: {}", units.join(", "))?;
    write_rows(out, &columns, traj.len())
}

/// Writes `t` and every element waveform.
pub fn write_waveforms_csv(out: &mut dyn Write, waveforms: &ElementWaveforms) -> io::Result<()> {
    let mut columns: Vec<(String, &[f64])> = vec![("t".to_string(), &waveforms.t)];
    let mut units = vec!["t[s]".to_string()];
    element_columns(waveforms, &mut columns, &mut units);
    writeln!(out, "# units: {}", units.join(", "))?;
    write_rows(out, &columns, waveforms.t.len())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lagrangian::{build_system, to_first_order};
    use crate::netlist::parse;
    use crate::sim::{branch_waveforms, simulate, Method};

    #[test]
    fn trajectory_csv_layout() {
        let c = parse(
            "circuit \"lc\" formulation loop coords 1
element L1 L value=1 coords +1
element C1 C value=1 coords +1
",
        )
        .unwrap();
        let fo = to_first_order(Arc::new(build_system(&c).unwrap())).unwrap();
        let traj = simulate(&fo, &[1.0], &[0.0], (0.0, 0.01), Method::Rk4 { h: 1e-3 }).unwrap();
        let w = branch_waveforms(&c, &traj).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj, &w).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let units = lines.next().unwrap();
        assert!(units.starts_with("# units: t[s], sigma[C*s], sigma_dot[C], sigma_ddot[A]"));
        assert_eq!(
            lines.next().unwrap(),
            "t,sigma1,sigma1_dot,sigma1_ddot,L1.q,L1.I,L1.phi,L1.V,L1.sigma,L1.rho,C1.q,C1.I,C1.phi,C1.V,C1.sigma"
        );
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert_eq!(first[1], 1.0);
        assert_eq!(lines.count(), traj.len() - 1);
        assert!(text.contains("1.0000000000000000e0"));
    }
}
