use infogeo::entropy::{ige, IgeConfig};
use infogeo::export::{
    write_ige_csv, write_jacobi_csv, write_trajectory_csv, CSV_SCHEMA_VERSION, IGE_COLUMNS,
};
use infogeo::geodesic::{integrate_geodesic, uniform_grid, GeodesicSpec, GeodesicSpec3D};
use infogeo::jacobi::{integrate_jlc, JacobiState};
use infogeo::models::Model;

fn parse(text: &str) -> (String, Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (comment, header, rows)
}

fn spec() -> GeodesicSpec {
    GeodesicSpec3D::new(0.0, 1.0, 1.0, 1.0, 1.0).unwrap().into()
}

#[test]
fn trajectory_table_reads_back_bit_exact() {
    let traj = integrate_geodesic(&spec(), 5.0, 1e-10).unwrap();
    let samples = traj.resample(&uniform_grid(0.0, 5.0, 50));
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, Model::ThreeD, &samples).unwrap();
    let (comment, header, rows) = parse(std::str::from_utf8(&buf).unwrap());
    assert_eq!(
        comment,
        format!("# infogeo geodesic-3d v{CSV_SCHEMA_VERSION}")
    );
    assert_eq!(header.len(), 7);
    assert_eq!(rows.len(), 51);
    for (r, (tau, s)) in rows.iter().zip(&samples) {
        assert_eq!(r[0].to_bits(), tau.to_bits());
        assert_eq!(r[2].to_bits(), s.theta[1].to_bits());
        assert_eq!(r[6].to_bits(), s.velocity[2].to_bits());
    }
}

#[test]
fn ige_table_has_the_documented_columns() {
    let r = ige(&spec(), &IgeConfig::new((2.0, 5.0), 8).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_ige_csv(&mut buf, &r).unwrap();
    let (_, header, rows) = parse(std::str::from_utf8(&buf).unwrap());
    assert_eq!(header, IGE_COLUMNS);
    assert_eq!(rows.len(), r.tau.len() - 1);
    for row in &rows {
        assert!(row[1] > 0.0 && row[2] > 0.0);
        assert!((row[3] - row[2].ln()).abs() < 1e-12 * row[3].abs().max(1.0));
    }
}

#[test]
fn jacobi_table_has_log_intensity() {
    let traj = integrate_jlc(
        &spec(),
        &JacobiState::default_initial(Model::ThreeD),
        4.0,
        1e-9,
    )
    .unwrap();
    let samples = traj.sample(&uniform_grid(0.0, 4.0, 40));
    let mut buf = Vec::new();
    write_jacobi_csv(&mut buf, Model::ThreeD, &samples).unwrap();
    let (_, header, rows) = parse(std::str::from_utf8(&buf).unwrap());
    assert_eq!(
        header,
        ["tau", "J1", "J2", "J3", "intensity", "log_intensity"]
    );
    for row in rows {
        assert!((row[5] - row[4].ln()).abs() < 1e-15 * row[5].abs().max(1.0));
    }
}
