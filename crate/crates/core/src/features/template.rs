use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const BOS: &str = "_BOS_";
pub const EOS: &str = "_EOS_";

/// A conjunction of feature values read at relative positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Template {
    pub id: String,
    pub offsets: Vec<i32>,
}

impl Template {
    pub fn new(id: impl Into<String>, offsets: Vec<i32>) -> Result<Template> {
        let id = id.into();
        if offsets.is_empty() || offsets.len() > 3 {
            return Err(Error::Config(format!(
                "template {id}: arity must be 1 to 3, got {}",
                offsets.len()
            )));
        }
        if let Some(o) = offsets.iter().find(|o| !(-2..=2).contains(*o)) {
            return Err(Error::Config(format!("template {id}: offset {o} outside -2..=2")));
        }
        if id.is_empty() || id.contains(['=', ';', ':', '|', '\t']) {
            return Err(Error::Config(format!("bad template id {id:?}")));
        }
        Ok(Template { id, offsets })
    }

    pub fn arity(&self) -> usize {
        self.offsets.len()
    }
}

/// `id=o1,o2`
impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let offs: Vec<String> = self.offsets.iter().map(i32::to_string).collect();
        write!(f, "{}={}", self.id, offs.join(","))
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Template> {
        let (id, offs) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("template {s:?} lacks '='")))?;
        let offsets = offs
            .split(',')
            .map(|o| {
                o.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::Config(format!("template {id}: bad offset {o:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Template::new(id.trim(), offsets)
    }
}

/// The fourteen-template window topology.
pub fn default_templates() -> Vec<Template> {
    const OFFSETS: [&[i32]; 14] = [
        &[0],
        &[-1],
        &[-2],
        &[1],
        &[2],
        &[-2, -1],
        &[-1, 0],
        &[0, 1],
        &[-1, 0, 1],
        &[0, 1, 2],
        &[1, 2],
        &[-2, -1, 0],
        &[-1, 1],
        &[-2, 2],
    ];
    OFFSETS
        .iter()
        .enumerate()
        .map(|(i, o)| Template {
            id: format!("T{i:02}"),
            offsets: o.to_vec(),
        })
        .collect()
}

pub fn format_templates(templates: &[Template]) -> String {
    templates.iter().map(Template::to_string).collect::<Vec<_>>().join(";")
}

pub fn parse_templates(s: &str) -> Result<Vec<Template>> {
    let templates = s
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Template>>>()?;
    let mut ids: Vec<&str> = templates.iter().map(|t| t.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("duplicate template id {}", w[0])));
    }
    Ok(templates)
}

/// Expands one sequence's feature rows. `unigram` names feed single-offset
/// templates, `conjunction` names the rest; both index into each row.
pub fn expand_rows(
    rows: &[Vec<String>],
    templates: &[Template],
    names: &[String],
    unigram: &[usize],
    conjunction: &[usize],
) -> Vec<Vec<String>> {
    let n = rows.len() as i64;
    let value = |pos: i64, col: usize| -> &str {
        if pos < 0 {
            BOS
        } else if pos >= n {
            EOS
        } else {
            &rows[pos as usize][col]
        }
    };
    (0..n)
        .map(|p| {
            let mut out = Vec::new();
            for t in templates {
                let cols = if t.arity() == 1 { unigram } else { conjunction };
                for &c in cols {
                    let mut s = format!("{}:", t.id);
                    for (k, &o) in t.offsets.iter().enumerate() {
                        if k > 0 {
                            s.push('|');
                        }
                        s.push_str(&format!("{}[{}]={}", names[c], o, value(p + o as i64, c)));
                    }
                    out.push(s);
                }
            }
            out
        })
        .collect()
}
