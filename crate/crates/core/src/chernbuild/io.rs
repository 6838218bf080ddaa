//! Files written by a build: one `cNN.gdata.json` per class and `certificate.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{realize_chern_poly, verify_gradable, verify_support, ChernClassSet, ChernEntry};
use crate::caot::{integral_generator, parse_gdata, GData};
use crate::chernalg::log_components;
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, is_p_integral, parse_rational, Prime};
use crate::fgl::MoravaLaw;
use crate::polyring::Ring;

pub const CERTIFICATE_FILE: &str = "certificate.json";
const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema_version: u32,
    pub p: u64,
    pub n: u32,
    pub a_seq: Vec<String>,
    pub degree: u32,
    pub base_only: bool,
    pub classes: Vec<ClassRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRecord {
    pub i: u32,
    pub file: String,
    pub p_i: String,
    pub nu: String,
    pub mu: u32,
    pub alpha: String,
    pub beta: String,
    pub integral: bool,
    pub unit_content: bool,
    pub support: bool,
    pub gradable: bool,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.classes
            .iter()
            .all(|c| c.integral && c.unit_content && c.support && c.gradable)
    }
}

fn class_file(i: u32) -> String {
    format!("c{i:02}.gdata.json")
}

/// File names and contents for a built set, in a fixed order (certificate last).
pub fn render_class_set(cset: &ChernClassSet) -> Vec<(String, String)> {
    let support = verify_support(cset);
    let gradable = verify_gradable(cset);
    let p = cset.p();
    let mut files = Vec::new();
    let mut classes = Vec::new();
    for (k, e) in cset.entries().iter().enumerate() {
        let file = class_file(e.i);
        files.push((file.clone(), e.c.to_json_string()));
        classes.push(ClassRecord {
            i: e.i,
            file,
            p_i: e.component.p_i.pretty(),
            nu: e.component.nu.to_string(),
            mu: e.component.mu,
            alpha: format_rational(&e.alpha),
            beta: format_rational(&e.beta),
            integral: e.c.polys().iter().all(|g| g.terms().all(|(_, c)| is_p_integral(c, p))),
            unit_content: e.c.has_unit_content(),
            support: support.checks[k].pass,
            gradable: gradable.checks[k].pass,
        });
    }
    let cert = Certificate {
        schema_version: SCHEMA_VERSION,
        p: p.get(),
        n: cset.law().n(),
        a_seq: cset.law().a_seq().iter().map(format_rational).collect(),
        degree: cset.degree(),
        base_only: cset.base_only(),
        classes,
    };
    let mut text = serde_json::to_string_pretty(&cert).expect("serializable");
    text.push('\n');
    files.push((CERTIFICATE_FILE.to_string(), text));
    files
}

/// Reads a build directory. The law and the generators phi_i are recomputed from the
/// certificate; the classes c_i are taken from their files as written.
pub fn load_class_set(dir: &Path) -> Result<ChernClassSet> {
    let text = std::fs::read_to_string(dir.join(CERTIFICATE_FILE))?;
    let cert: Certificate = serde_json::from_str(&text)?;
    if cert.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {}",
            cert.schema_version
        )));
    }
    let p = Prime::new(cert.p)?;
    let a_seq = cert
        .a_seq
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>>>()?;
    if cert.degree == 0 || cert.classes.len() != cert.degree as usize {
        return Err(Error::Parse("certificate lists the wrong number of classes".into()));
    }
    let law = MoravaLaw::new(p, cert.n, &a_seq, cert.degree)?;
    let comps = log_components(law.fgl().log(), p, cert.degree)?;
    let mut entries: Vec<ChernEntry> = Vec::new();
    for (rec, comp) in cert.classes.iter().zip(comps) {
        if rec.i != comp.i || rec.file != class_file(rec.i) {
            return Err(Error::Parse(format!("unexpected class record {}", rec.i)));
        }
        let c: GData = parse_gdata(&std::fs::read_to_string(dir.join(&rec.file))?)?;
        if c.p() != p || c.n() != cert.n || c.m() != rec.i || c.ring() != Ring::ZpLocal(p) {
            return Err(Error::Parse(format!("{} does not match the certificate", rec.file)));
        }
        let phi = integral_generator(law.fgl(), cert.n, rec.i)?;
        let realized = if (rec.i as u64) < law.pn() {
            GData::zero(p, cert.n, rec.i, Ring::Q)
        } else {
            let classes: Vec<GData> = entries.iter().map(|e| e.c.clone()).collect();
            realize_chern_poly(&comp.p_i, &classes)?
        };
        entries.push(ChernEntry {
            i: rec.i,
            component: comp,
            phi,
            alpha: parse_rational(&rec.alpha)?,
            beta: parse_rational(&rec.beta)?,
            realized,
            c,
        });
    }
    Ok(ChernClassSet::from_entries(law, cert.degree, entries))
}
