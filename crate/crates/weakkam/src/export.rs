//! CSV and JSON export helpers.
//!
//! All numeric output uses 12 significant digits; CSV column orders are
//! fixed so that identical runs produce byte-identical bodies.

use crate::dynamics::Orbit;
use crate::sets::PhasePointSet;
use std::fmt::Write as _;

/// Format a number with 12 significant digits.
pub fn num(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    if x == f64::INFINITY {
        return "inf".to_string();
    }
    format!("{x:.11e}")
}

/// Orbit CSV: t, x_1..x_d (lifted), v_1..v_d, E.
pub fn orbit_csv(orbit: &Orbit) -> String {
    let d = orbit.positions[0].len();
    let mut out = String::new();
    out.push('t');
    for k in 0..d {
        let _ = write!(out, ",x_{}", k + 1);
    }
    for k in 0..d {
        let _ = write!(out, ",v_{}", k + 1);
    }
    out.push_str(",E\n");
    for i in 0..orbit.len() {
        let _ = write!(out, "{}", num(orbit.times[i]));
        for k in 0..d {
            let _ = write!(out, ",{}", num(orbit.positions[i][k]));
        }
        for k in 0..d {
            let _ = write!(out, ",{}", num(orbit.velocities[i][k]));
        }
        let _ = writeln!(out, ",{}", num(orbit.energy_trace[i]));
    }
    out
}

/// Phase-set CSV: x components, v components, E, label, c.
pub fn set_csv(set: &PhasePointSet) -> String {
    let d = set.c.len();
    let mut out = String::new();
    for k in 0..d {
        let _ = write!(out, "x_{},", k + 1);
    }
    for k in 0..d {
        let _ = write!(out, "v_{},", k + 1);
    }
    out.push_str("E,label,c\n");
    let c_str = set.c.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";");
    for p in &set.points {
        for k in 0..d {
            let _ = write!(out, "{},", num(p.x.coords()[k]));
        }
        for k in 0..d {
            let _ = write!(out, "{},", num(p.v[k]));
        }
        let _ = writeln!(out, "{},{},{}", num(p.energy), set.label.name(), c_str);
    }
    out
}

/// Generic table CSV from a header and rows of numbers.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| num(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(num(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn table_csv_shape() {
        let csv = table_csv(&["a", "b"], &[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "a,b");
    }
}
