//! JSON reading and canonical writing of triangulation files.

use serde::Deserialize;

use super::curves::{NormalCurve, Step};
use super::{validate, Peripheral, Tetrahedron, Triangulation, IDENTITY};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: String,
    tets: Vec<RawTet>,
    #[serde(default)]
    peripheral: Vec<RawPeripheral>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTet {
    gluings: [Option<(usize, [u8; 4])>; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPeripheral {
    meridian: Vec<[i64; 4]>,
    longitude: Vec<[i64; 4]>,
}

fn to_curve(cusp: usize, raw: &[[i64; 4]], what: &str) -> Result<NormalCurve> {
    let mut steps = Vec::with_capacity(raw.len());
    for s in raw {
        if s[0] < 0 || !(0..4).contains(&s[1]) || !(0..4).contains(&s[2]) || s[3].abs() != 1 {
            return Err(Error::Parse { line: 0, msg: format!("cusp {cusp} {what}: bad step {s:?}") });
        }
        steps.push(Step { tet: s[0] as usize, vertex: s[1] as u8, corner: s[2] as u8, eps: s[3] as i8 });
    }
    Ok(NormalCurve { cusp, steps })
}

/// Read a triangulation file and check its invariants.
pub fn parse(text: &str) -> Result<Triangulation> {
    let raw: RawFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    // A null gluing leaves the face unmatched, which validation reports.
    let tets = raw
        .tets
        .into_iter()
        .map(|t| Tetrahedron { gluings: t.gluings.map(|g| g.unwrap_or((usize::MAX, IDENTITY))) })
        .collect();
    let mut tri = Triangulation::new(raw.name, tets);
    for (cusp, p) in raw.peripheral.iter().enumerate() {
        tri.peripheral.push(Peripheral {
            meridian: to_curve(cusp, &p.meridian, "meridian")?,
            longitude: to_curve(cusp, &p.longitude, "longitude")?,
        });
    }
    let mut problems = validate(&tri);
    if problems.is_empty() {
        for (cusp, p) in tri.peripheral.iter().enumerate() {
            for (what, c) in [("meridian", &p.meridian), ("longitude", &p.longitude)] {
                if let Err(msg) = c.check(&tri) {
                    problems.push(format!("cusp {cusp} {what}: {msg}"));
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    Ok(tri)
}

fn steps_json(c: &NormalCurve) -> String {
    let parts: Vec<String> = c
        .steps
        .iter()
        .map(|s| format!("[{}, {}, {}, {}]", s.tet, s.vertex, s.corner, s.eps))
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Canonical text form: one tetrahedron per line, curves one per line.
pub fn serialize(t: &Triangulation) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"name\": {},\n", serde_json::to_string(&t.name).unwrap()));
    out.push_str("  \"tets\": [\n");
    for (i, tet) in t.tets.iter().enumerate() {
        let g: Vec<String> = tet
            .gluings
            .iter()
            .map(|(n, p)| format!("[{}, [{}, {}, {}, {}]]", n, p[0], p[1], p[2], p[3]))
            .collect();
        let sep = if i + 1 < t.tets.len() { "," } else { "" };
        out.push_str(&format!("    {{\"gluings\": [{}]}}{}\n", g.join(", "), sep));
    }
    if t.peripheral.is_empty() {
        out.push_str("  ]\n");
    } else {
        out.push_str("  ],\n  \"peripheral\": [\n");
        for (i, p) in t.peripheral.iter().enumerate() {
            out.push_str("    {\n");
            out.push_str(&format!("      \"meridian\": {},\n", steps_json(&p.meridian)));
            out.push_str(&format!("      \"longitude\": {}\n", steps_json(&p.longitude)));
            out.push_str(if i + 1 < t.peripheral.len() { "    },\n" } else { "    }\n" });
        }
        out.push_str("  ]\n");
    }
    out.push_str("}\n");
    out
}
