//! Plain CSV tables for trajectories, entropy series and Jacobi fields.
//!
//! Every table starts with one comment line `# infogeo <kind> v<version>`
//! followed by a header row. Floats use the shortest representation that
//! parses back to the same bits.

use std::io::{self, Write};

use crate::entropy::IgeResult;
use crate::geodesic::GeodesicState;
use crate::jacobi::JacobiSample;
use crate::models::Model;

pub const CSV_SCHEMA_VERSION: u32 = 1;

fn preamble<W: Write>(w: &mut W, kind: &str, columns: &[&str]) -> io::Result<()> {
    writeln!(w, "# infogeo {kind} v{CSV_SCHEMA_VERSION}")?;
    writeln!(w, "{}", columns.join(","))
}

fn row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b",")?;
        }
        first = false;
        write!(w, "{v:?}")?;
    }
    w.write_all(b"\n")
}

pub fn trajectory_columns(model: Model) -> &'static [&'static str] {
    match model {
        Model::ThreeD => &[
            "tau", "mu_x", "sigma_x", "sigma_y", "dmu_x", "dsigma_x", "dsigma_y",
        ],
        Model::TwoD => &["tau", "mu_x", "sigma", "dmu_x", "dsigma"],
    }
}

pub fn write_trajectory_csv<W: Write>(
    w: &mut W,
    model: Model,
    samples: &[(f64, GeodesicState)],
) -> io::Result<()> {
    preamble(
        w,
        &format!("geodesic-{}", model.name()),
        trajectory_columns(model),
    )?;
    for (tau, s) in samples {
        let mut v = vec![*tau];
        v.extend_from_slice(s.theta());
        v.extend_from_slice(s.velocity());
        row(w, &v)?;
    }
    Ok(())
}

pub const IGE_COLUMNS: [&str; 5] = ["tau", "vol", "avg_vol", "S", "S_paper_closed_form"];

/// Rows of `result` after `tau = 0`, where the average is undefined.
pub fn write_ige_csv<W: Write>(w: &mut W, result: &IgeResult) -> io::Result<()> {
    preamble(w, "ige", &IGE_COLUMNS)?;
    for i in 0..result.tau.len() {
        if result.tau[i] == 0.0 {
            continue;
        }
        row(
            w,
            &[
                result.tau[i],
                result.ln_vol[i].exp(),
                result.s[i].exp(),
                result.s[i],
                result.s_closed_form[i],
            ],
        )?;
    }
    Ok(())
}

pub fn jacobi_columns(model: Model) -> &'static [&'static str] {
    match model {
        Model::ThreeD => &["tau", "J1", "J2", "J3", "intensity", "log_intensity"],
        Model::TwoD => &["tau", "J1", "J2", "intensity", "log_intensity"],
    }
}

pub fn write_jacobi_csv<W: Write>(
    w: &mut W,
    model: Model,
    samples: &[JacobiSample],
) -> io::Result<()> {
    preamble(
        w,
        &format!("jacobi-{}", model.name()),
        jacobi_columns(model),
    )?;
    for s in samples {
        let mut v = vec![s.tau];
        v.extend_from_slice(s.jacobi.j());
        v.push(s.intensity);
        v.push(s.intensity.ln());
        row(w, &v)?;
    }
    Ok(())
}

/// Generic numeric table with the same preamble.
pub fn write_table_csv<W: Write>(
    w: &mut W,
    kind: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> io::Result<()> {
    preamble(w, kind, columns)?;
    for r in rows {
        debug_assert_eq!(r.len(), columns.len());
        row(w, r)?;
    }
    Ok(())
}
