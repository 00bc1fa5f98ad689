//! Reference-grid export for external plotting.

use std::io::Write;

use serde::Serialize;
use taylorcheck_core::numeric::GridSolution;

use crate::report::SchemeJson;

/// Long-format CSV with header `t,<space>,field,value`.
pub fn write_csv<W: Write>(grid: &GridSolution, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", grid.space.as_str(), "field", "value"])?;
    for (ti, t) in grid.times.iter().enumerate() {
        for (fi, f) in grid.fields.iter().enumerate() {
            for (pi, x) in grid.points.iter().enumerate() {
                w.write_record([t.to_string(), x.to_string(), f.to_string(), grid.value(ti, fi, pi).to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GridJson<'a> {
    kind: &'static str,
    space: &'a str,
    fields: Vec<&'a str>,
    scheme: SchemeJson,
    points: &'a [f64],
    times: &'a [f64],
    /// `values[time][field][point]`.
    values: Vec<Vec<&'a [f64]>>,
}

pub fn to_json(grid: &GridSolution) -> String {
    let np = grid.points.len();
    let doc = GridJson {
        kind: grid.kind.as_str(),
        space: grid.space.as_str(),
        fields: grid.fields.iter().map(|f| f.as_str()).collect(),
        scheme: SchemeJson::new(grid),
        points: &grid.points,
        times: &grid.times,
        values: grid.values.iter().map(|row| row.chunks(np).collect()).collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("grids serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use taylorcheck_core::numeric::{dde_integrate, LatticeOptions};
    use taylorcheck_core::parse::parse_problem;
    use taylorcheck_core::Bindings;

    fn grid() -> GridSolution {
        let spec = parse_problem("[problem]\nkind = dde\nfields = u\n[equations]\ndt(u) = shift(u, 1) - u\n[initial]\nu = 1\n").unwrap();
        let opts = LatticeOptions { window: 8, t_end: 0.002, dt: 0.001, record_every: 1 };
        dde_integrate(&spec, &Bindings::new(), &opts).unwrap()
    }

    #[test]
    fn csv_has_one_row_per_value() {
        let g = grid();
        let mut buf = Vec::new();
        write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,n,field,value");
        assert_eq!(lines.len(), 1 + 3 * 17);
        assert_eq!(lines[1], "0,-8,u,1");
    }

    #[test]
    fn json_nests_values_by_field() {
        let g = grid();
        let v: serde_json::Value = serde_json::from_str(&to_json(&g)).unwrap();
        assert_eq!(v["times"].as_array().unwrap().len(), 3);
        assert_eq!(v["values"][2][0].as_array().unwrap().len(), 17);
        assert_eq!(v["scheme"]["dt"], 0.001);
    }
}
