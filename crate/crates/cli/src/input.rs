use std::path::Path;

use gj_facets::catalog::{self, LiftedFunction};
use gj_facets::pwl::PwlFunction;
use gj_facets::{Error, Result};

pub enum Loaded {
    Pwl(PwlFunction),
    /// `kzh_lifted`, which is not piecewise linear.
    Lifted(Box<LiftedFunction>),
}

impl Loaded {
    pub fn pwl(self) -> Result<PwlFunction> {
        match self {
            Loaded::Pwl(p) => Ok(p),
            Loaded::Lifted(_) => Err(Error::NotPiecewiseLinear),
        }
    }
}

/// A catalog name, or a path to a function in the text format or as JSON
/// (`.json`).
pub fn load(spec: &str) -> Result<Loaded> {
    if spec == "kzh_lifted" {
        return Ok(Loaded::Lifted(Box::new(LiftedFunction::new())));
    }
    if catalog::CATALOG_NAMES.contains(&spec) {
        return catalog::by_name(spec).map(Loaded::Pwl);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Other(format!(
            "{spec:?} is neither a catalog name ({}) nor a file",
            catalog::CATALOG_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Other(format!("cannot read {spec}: {e}")))?;
    let pi = if path.extension().is_some_and(|e| e == "json") {
        let raw: PwlFunction = serde_json::from_str(&text).map_err(|e| Error::Parse {
            pos: e.column(),
            msg: e.to_string(),
        })?;
        // re-validate through the constructor
        PwlFunction::from_rows(raw.name, raw.rows, raw.f, raw.special_intervals)?
    } else {
        PwlFunction::from_text(&text)?
    };
    Ok(Loaded::Pwl(pi))
}
