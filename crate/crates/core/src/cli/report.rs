//! Analysis reports for a single tree, as JSON or plain text.

use std::fmt::Write as _;

use serde::Serialize;

use crate::models::Site;
use crate::singular::{
    euler_check, permutation_module, rotation_table, singular_profile, ComponentKind, RotationData,
};
use crate::tree::{canonical_encode, validate_tree, EquivariantTree, Violation};

use super::doc::TreeDoc;

#[derive(Serialize)]
pub struct Report {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub flags: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    pub tree: TreeDoc,
}

#[derive(Serialize)]
pub struct Analysis {
    pub rank: u64,
    pub module: ModuleSection,
    pub profile: Vec<SubgroupSection>,
    pub rotations: Vec<RotationRow>,
    pub euler_check: Vec<EulerSection>,
    pub encoding: String,
}

#[derive(Serialize)]
pub struct ModuleSection {
    pub notation: String,
    pub summands: Vec<Summand>,
}

/// `stab` is the stabilizer order; `notation` names the summand by the
/// quotient group `C_{m/stab}`.
#[derive(Serialize)]
pub struct Summand {
    pub stab: u64,
    pub mult: u64,
    pub notation: String,
}

#[derive(Serialize)]
pub struct SubgroupSection {
    pub d: u64,
    pub summary: String,
    pub points: u64,
    pub spheres: u64,
    pub euler: i64,
    pub components: Vec<ComponentRow>,
}

#[derive(Serialize)]
pub struct ComponentRow {
    pub kind: ComponentKind,
    pub isotropy: u64,
    pub count: u64,
    pub rotation: String,
    pub anchor: String,
    pub provenance: Vec<u32>,
}

#[derive(Serialize)]
pub struct RotationRow {
    pub node: u32,
    pub site: String,
    pub kind: ComponentKind,
    pub isotropy: u64,
    pub count: u64,
    pub rotation: String,
    pub isolated: bool,
}

#[derive(Serialize)]
pub struct EulerSection {
    pub d: u64,
    pub points: u64,
    pub spheres: u64,
    pub euler: i64,
    pub lefschetz: i64,
    /// Trace of the generator of `C_d` on each summand; fixed cosets only.
    pub trace_terms: Vec<TraceTerm>,
    pub agrees: bool,
}

#[derive(Serialize)]
pub struct TraceTerm {
    pub stab: u64,
    pub mult: u64,
    pub trace: u64,
}

/// Residue in `(-n/2, n/2]`.
fn signed(x: u64, n: u64) -> i64 {
    if n > 1 && x > n / 2 {
        x as i64 - n as i64
    } else {
        x as i64
    }
}

fn rotation_text(r: &RotationData) -> String {
    match r {
        RotationData::Point(rot) => {
            let n = rot.modulus().get();
            format!("({},{};{n})", signed(rot.a(), n), signed(rot.b(), n))
        }
        RotationData::Sphere { order, normal } => format!("±{normal} mod {order}"),
    }
}

fn plural(n: u64, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn anchor(a: (u32, Site)) -> String {
    format!("{}:{}", a.0, a.1)
}

pub fn analyze(t: &EquivariantTree) -> Report {
    let tree = TreeDoc::from_tree(t);
    let v = match validate_tree(t) {
        Ok(v) => v,
        Err(violations) => return Report { valid: false, violations, flags: Vec::new(), analysis: None, tree },
    };
    let m = v.m().get();
    let mut flags = Vec::new();
    if v.is_bare_s4() {
        flags.push("bare_s4");
    }
    let module = permutation_module(&v);
    let summands = module
        .entries()
        .iter()
        .map(|&(d, k)| Summand {
            stab: d,
            mult: k,
            notation: if d == m { "Z".into() } else { format!("Z[C{}]", m / d) },
        })
        .collect();
    let profile = singular_profile(&v);
    let subgroups = profile
        .subgroups
        .iter()
        .map(|s| SubgroupSection {
            d: s.d,
            summary: format!(
                "{}, {}, χ = {}",
                plural(s.points(), "point", "points"),
                plural(s.spheres(), "sphere", "spheres"),
                s.euler()
            ),
            points: s.points(),
            spheres: s.spheres(),
            euler: s.euler(),
            components: s
                .components
                .iter()
                .map(|c| ComponentRow {
                    kind: c.kind,
                    isotropy: c.isotropy,
                    count: c.count,
                    rotation: rotation_text(&c.rotation),
                    anchor: anchor(c.anchor),
                    provenance: c.provenance.clone(),
                })
                .collect(),
        })
        .collect();
    let rotations = rotation_table(&v)
        .into_iter()
        .map(|r| RotationRow {
            node: r.node,
            site: r.site.to_string(),
            kind: r.kind,
            isotropy: r.isotropy,
            count: r.count,
            rotation: rotation_text(&r.rotation),
            isolated: r.isolated,
        })
        .collect();
    let euler = euler_check(&v, &profile)
        .into_iter()
        .map(|row| EulerSection {
            d: row.d,
            points: row.points,
            spheres: row.spheres,
            euler: row.euler,
            lefschetz: row.lefschetz,
            trace_terms: module
                .entries()
                .iter()
                .map(|&(e, k)| TraceTerm { stab: e, mult: k, trace: if e % row.d == 0 { k * (m / e) } else { 0 } })
                .collect(),
            agrees: row.agrees(),
        })
        .collect();
    let encoding = String::from_utf8(canonical_encode(&v)).expect("encoding is ASCII");
    Report {
        valid: true,
        violations: Vec::new(),
        flags,
        analysis: Some(Analysis {
            rank: v.rank(),
            module: ModuleSection { notation: module.notation(), summands },
            profile: subgroups,
            rotations,
            euler_check: euler,
            encoding,
        }),
        tree,
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let t = &self.tree;
        let _ = writeln!(s, "tree over C{}, type {}, {} vertices", t.m, t.tree_type, t.nodes.len());
        if !self.valid {
            let _ = writeln!(s, "verdict: invalid");
            for v in &self.violations {
                let _ = writeln!(s, "  {v}");
            }
            return s;
        }
        let _ = writeln!(s, "verdict: valid");
        for f in &self.flags {
            let _ = writeln!(s, "flag: {f}");
        }
        let Some(a) = &self.analysis else { return s };
        let _ = writeln!(s, "rank: {}", a.rank);
        let _ = writeln!(s, "module: {}", a.module.notation);
        for x in &a.module.summands {
            let _ = writeln!(s, "  stabilizer {:>6}  multiplicity {:>4}  {}", x.stab, x.mult, x.notation);
        }
        let _ = writeln!(s, "singular sets:");
        for p in &a.profile {
            let _ = writeln!(s, "  d = {}: {}", p.d, p.summary);
            for c in &p.components {
                let kind = match c.kind {
                    ComponentKind::Point => "point",
                    ComponentKind::Sphere => "sphere",
                };
                let _ = writeln!(
                    s,
                    "    {:<6} x{:<5} isotropy {:<6} {:<16} at {} from {:?}",
                    kind, c.count, c.isotropy, c.rotation, c.anchor, c.provenance
                );
            }
        }
        let _ = writeln!(s, "rotation data:");
        for r in &a.rotations {
            let iso = if r.isolated { " isolated" } else { "" };
            let _ = writeln!(s, "  node {:>3} {:<4} isotropy {:<6} x{:<5} {}{}", r.node, r.site, r.isotropy, r.count, r.rotation, iso);
        }
        let _ = writeln!(s, "euler check:");
        for e in &a.euler_check {
            let terms: Vec<String> = e.trace_terms.iter().filter(|x| x.trace > 0).map(|x| x.trace.to_string()).collect();
            let trace = if terms.is_empty() { "2".to_string() } else { format!("2 + {}", terms.join(" + ")) };
            let mark = if e.agrees { "ok" } else { "MISMATCH" };
            let _ = writeln!(
                s,
                "  d = {}: {} + 2*{} = {}, trace {} = {}  {}",
                e.d, e.points, e.spheres, e.euler, trace, e.lefschetz, mark
            );
        }
        let _ = writeln!(s, "encoding: {}", a.encoding);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::doc::{emit_tree, parse_tree};
    use crate::tree::tests::star;

    #[test]
    fn star_report() {
        let r = analyze(&star());
        assert!(r.valid);
        let a = r.analysis.as_ref().unwrap();
        assert_eq!(a.module.notation, "Z ⊕ Z[C15] ⊕ Z[C21] ⊕ Z[C35]");
        let d7 = a.profile.iter().find(|p| p.d == 7).unwrap();
        assert_eq!(d7.summary, "16 points, 1 sphere, χ = 18");
        let e7 = a.euler_check.iter().find(|e| e.d == 7).unwrap();
        let traces: Vec<u64> = e7.trace_terms.iter().map(|t| t.trace).collect();
        assert_eq!(traces, vec![1, 15, 0, 0]);
        assert!(a.rotations.iter().any(|r| r.node == 0 && r.rotation == "(-10,-7;105)"));
        assert!(a.euler_check.iter().all(|e| e.agrees));
    }

    #[test]
    fn embedded_tree_regenerates() {
        let json = analyze(&star()).to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let embedded = parse_tree(&value["tree"].to_string()).unwrap();
        assert_eq!(analyze(&embedded).to_json(), json);
        assert_eq!(parse_tree(&emit_tree(&embedded)).unwrap(), star());
    }

    #[test]
    fn invalid_report() {
        let mut t = star();
        t.nodes[1].stab = 4;
        let r = analyze(&t);
        assert!(!r.valid);
        assert!(r.analysis.is_none());
        assert!(r.to_text().contains("NonDivisorStabilizer"));
    }
}
