//! CSV writers. Every float is written with 17 significant digits so that
//! files round-trip exactly; non-finite values are spelled `inf`/`nan`.

use std::io::{self, Write};

use translab::dynamics::EnergyTrace;
use translab::fem::StateVector;
use translab::spectral::ResolventTable;
use translab::{Complex, Discretization};

pub fn num(v: f64) -> String {
    if v == 0.0 {
        // no negative zero in output files
        format!("{:.16e}", 0.0)
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `t,E,dissipation,F`.
pub fn write_energy<W: Write>(out: &mut W, trace: &EnergyTrace) -> io::Result<()> {
    writeln!(out, "t,E,dissipation,F")?;
    for k in 0..trace.len() {
        writeln!(
            out,
            "{},{},{},{}",
            num(trace.times[k]),
            num(trace.energy[k]),
            num(trace.dissipation[k]),
            num(trace.cross[k])
        )?;
    }
    Ok(())
}

/// `t,x,displacement,velocity` on `points` equally spaced positions over
/// the whole structure, for every snapshot.
pub fn write_snapshots<W: Write>(
    out: &mut W,
    disc: &Discretization,
    snapshots: &[(f64, StateVector)],
    points: usize,
) -> Result<(), crate::CliError> {
    writeln!(out, "t,x,displacement,velocity").map_err(crate::CliError::from_io)?;
    let (a, b) = (disc.mesh.start(), disc.mesh.end());
    let xs: Vec<f64> = (0..points)
        .map(|i| {
            if i + 1 == points {
                b
            } else {
                a + (b - a) * i as f64 / (points.max(2) - 1) as f64
            }
        })
        .collect();
    for (t, y) in snapshots {
        for &x in &xs {
            let (u, v) = disc.evaluate(y, x)?;
            writeln!(out, "{},{},{},{}", num(*t), num(x), num(u), num(v))
                .map_err(crate::CliError::from_io)?;
        }
    }
    Ok(())
}

/// `re,im`, one row per eigenvalue.
pub fn write_spectrum<W: Write>(out: &mut W, eigenvalues: &[Complex<f64>]) -> io::Result<()> {
    writeln!(out, "re,im")?;
    for mu in eigenvalues {
        writeln!(out, "{},{}", num(mu.re), num(mu.im))?;
    }
    Ok(())
}

/// `lambda,norm`.
pub fn write_resolvent<W: Write>(out: &mut W, table: &ResolventTable) -> io::Result<()> {
    writeln!(out, "lambda,norm")?;
    for (l, n) in table.lambdas.iter().zip(&table.norms) {
        writeln!(out, "{},{}", num(*l), num(*n))?;
    }
    Ok(())
}
