//! JSON manifests describing a constrained problem or a consensus problem.
//!
//! Constrained: `{"A": path, "b": path, "g": {"family", "params"},
//! "h": {"family", "params", "beta"}?, "fstar": number?}`.
//! Consensus: `{"graph": path, "g_i": [g, ...]}`.
//!
//! Paths are relative to the manifest's directory. Vector parameters may be
//! a number (broadcast), an array of numbers or a path to a vector file.

use std::fs;
use std::path::{Path, PathBuf};

use pdhg_core::distributed::ConsensusProblem;
use pdhg_core::{io, ConstrainedProblem, ProxFunction, SmoothTerm};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub enum Manifest {
    Constrained(Box<ConstrainedProblem>),
    Consensus(ConsensusProblem),
}

/// Reads either kind of manifest; a `graph` key selects the consensus form.
pub fn parse_manifest(path: &Path) -> Result<Manifest> {
    let doc = Doc::load(path)?;
    if doc.root.get("graph").is_some() {
        doc.consensus().map(Manifest::Consensus)
    } else {
        doc.constrained().map(|p| Manifest::Constrained(Box::new(p)))
    }
}

pub fn load_problem(path: &Path) -> Result<ConstrainedProblem> {
    Doc::load(path)?.constrained()
}

pub fn load_consensus(path: &Path) -> Result<ConsensusProblem> {
    Doc::load(path)?.consensus()
}

struct Doc {
    file: PathBuf,
    dir: PathBuf,
    root: Map<String, Value>,
}

impl Doc {
    fn load(path: &Path) -> Result<Doc> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            file: path.to_path_buf(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
            file: path.to_path_buf(),
            source,
        })?;
        let Value::Object(root) = value else {
            return Err(CliError::Manifest {
                file: path.to_path_buf(),
                field: "$".into(),
                message: "manifest must be a JSON object".into(),
            });
        };
        Ok(Doc {
            file: path.to_path_buf(),
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            root,
        })
    }

    fn err(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::Manifest {
            file: self.file.clone(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn field<'a>(&self, obj: &'a Map<String, Value>, name: &str, at: &str) -> Result<&'a Value> {
        obj.get(name).ok_or_else(|| self.err(at, "missing"))
    }

    fn object<'a>(&self, v: &'a Value, at: &str) -> Result<&'a Map<String, Value>> {
        v.as_object().ok_or_else(|| self.err(at, "expected an object"))
    }

    fn number(&self, v: &Value, at: &str) -> Result<f64> {
        v.as_f64().ok_or_else(|| self.err(at, "expected a number"))
    }

    fn string<'a>(&self, v: &'a Value, at: &str) -> Result<&'a str> {
        v.as_str().ok_or_else(|| self.err(at, "expected a string"))
    }

    fn path(&self, v: &Value, at: &str) -> Result<PathBuf> {
        Ok(self.dir.join(self.string(v, at)?))
    }

    fn vector(&self, v: &Value, dim: usize, at: &str) -> Result<Vec<f64>> {
        let out = match v {
            Value::Number(_) => vec![self.number(v, at)?; dim],
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, x)| self.number(x, &format!("{at}[{i}]")))
                .collect::<Result<_>>()?,
            Value::String(_) => io::read_vector(&self.path(v, at)?).map_err(|e| self.err(at, e.to_string()))?,
            _ => return Err(self.err(at, "expected a number, an array or a path")),
        };
        if out.len() != dim {
            return Err(self.err(at, format!("expected length {dim}, found {}", out.len())));
        }
        Ok(out)
    }

    fn constrained(&self) -> Result<ConstrainedProblem> {
        let a_path = self.path(self.field(&self.root, "A", "A")?, "A")?;
        let a = io::read_matrix(&a_path).map_err(|e| self.err("A", e.to_string()))?;
        let b_path = self.path(self.field(&self.root, "b", "b")?, "b")?;
        let b = io::read_vector(&b_path).map_err(|e| self.err("b", e.to_string()))?;
        if b.len() != a.rows() {
            return Err(self.err("b", format!("length {} does not match the {} rows of A", b.len(), a.rows())));
        }
        let g = self.prox(self.field(&self.root, "g", "g")?, a.cols(), "g")?;
        let mut p = ConstrainedProblem::new(a, b, g).map_err(|e| self.err("g", e.to_string()))?;
        if let Some(h) = self.root.get("h") {
            let h = self.smooth(h, p.dim(), "h")?;
            p = p.with_smooth(h).map_err(|e| self.err("h", e.to_string()))?;
        }
        if let Some(v) = self.root.get("fstar") {
            let fstar = self.number(v, "fstar")?;
            if !(fstar >= 0.0) {
                return Err(self.err("fstar", "must be a nonnegative number"));
            }
            p = p.with_fstar(fstar);
        }
        Ok(p)
    }

    fn consensus(&self) -> Result<ConsensusProblem> {
        let graph_path = self.path(self.field(&self.root, "graph", "graph")?, "graph")?;
        let graph = io::read_edge_list(&graph_path).map_err(|e| self.err("graph", e.to_string()))?;
        let Value::Array(specs) = self.field(&self.root, "g_i", "g_i")? else {
            return Err(self.err("g_i", "expected an array with one entry per node"));
        };
        if specs.len() != graph.nodes() {
            return Err(self.err("g_i", format!("{} entries for {} nodes", specs.len(), graph.nodes())));
        }
        let local = specs
            .iter()
            .enumerate()
            .map(|(i, s)| self.prox(s, graph.dim(), &format!("g_i[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        ConsensusProblem::new(graph, local).map_err(|e| self.err("g_i", e.to_string()))
    }

    /// `{"family": name, "params": {...}}` for a function on ℝ^dim.
    fn prox(&self, v: &Value, dim: usize, at: &str) -> Result<ProxFunction> {
        let obj = self.object(v, at)?;
        let family = self.string(self.field(obj, "family", &format!("{at}.family"))?, &format!("{at}.family"))?;
        let empty = Map::new();
        let params = match obj.get("params") {
            Some(p) => self.object(p, &format!("{at}.params"))?,
            None => &empty,
        };
        let param = |name: &str| -> Result<(&Value, String)> {
            let here = format!("{at}.params.{name}");
            Ok((self.field(params, name, &here)?, here))
        };
        let core = |r: pdhg_core::Result<ProxFunction>| r.map_err(|e| self.err(at, e.to_string()));
        match family {
            "zero" => Ok(ProxFunction::Zero { dim }),
            "nonnegative" => Ok(ProxFunction::NonNegative { dim }),
            "linear" => {
                let (c, here) = param("c")?;
                Ok(ProxFunction::Linear { c: self.vector(c, dim, &here)? })
            }
            "quadratic" => {
                let (rho, h1) = param("rho")?;
                let center = match params.get("center") {
                    Some(c) => self.vector(c, dim, &format!("{at}.params.center"))?,
                    None => vec![0.0; dim],
                };
                core(ProxFunction::quadratic(self.number(rho, &h1)?, center))
            }
            "l1" => {
                let weight = match params.get("weight") {
                    Some(w) => self.number(w, &format!("{at}.params.weight"))?,
                    None => 1.0,
                };
                core(ProxFunction::l1(weight, dim))
            }
            "box" => {
                let (lo, h1) = param("lo")?;
                let (hi, h2) = param("hi")?;
                core(ProxFunction::boxed(self.vector(lo, dim, &h1)?, self.vector(hi, dim, &h2)?))
            }
            "point" => {
                let (a, here) = param("a")?;
                Ok(ProxFunction::Point { a: self.vector(a, dim, &here)? })
            }
            "separable" => {
                let (blocks, here) = param("blocks")?;
                let Value::Array(items) = blocks else {
                    return Err(self.err(&here, "expected an array of blocks"));
                };
                let mut parts = Vec::new();
                let mut total = 0;
                for (i, item) in items.iter().enumerate() {
                    let bat = format!("{here}[{i}]");
                    let bobj = self.object(item, &bat)?;
                    let bdim = self.field(bobj, "dim", &format!("{bat}.dim"))?;
                    let bdim = bdim
                        .as_u64()
                        .ok_or_else(|| self.err(&format!("{bat}.dim"), "expected a nonnegative integer"))?
                        as usize;
                    total += bdim;
                    parts.push(self.prox(item, bdim, &bat)?);
                }
                if total != dim {
                    return Err(self.err(&here, format!("block dimensions sum to {total}, expected {dim}")));
                }
                Ok(ProxFunction::Separable(parts))
            }
            "strongly_convex" => {
                let (inner, h1) = param("inner")?;
                let (rho, h2) = param("rho")?;
                let inner = self.prox(inner, dim, &h1)?;
                core(ProxFunction::strongly_convexified(inner, self.number(rho, &h2)?))
            }
            other => Err(self.err(&format!("{at}.family"), format!("unknown family '{other}'"))),
        }
    }

    /// `{"family": linear|quadratic|least_squares, "params": {...}, "beta"?}`.
    fn smooth(&self, v: &Value, dim: usize, at: &str) -> Result<SmoothTerm> {
        let obj = self.object(v, at)?;
        let family = self.string(self.field(obj, "family", &format!("{at}.family"))?, &format!("{at}.family"))?;
        let params = self.object(self.field(obj, "params", &format!("{at}.params"))?, &format!("{at}.params"))?;
        let beta = obj.get("beta").map(|b| self.number(b, &format!("{at}.beta"))).transpose()?;
        let param = |name: &str| -> Result<(&Value, String)> {
            let here = format!("{at}.params.{name}");
            Ok((self.field(params, name, &here)?, here))
        };
        match family {
            "linear" => {
                let (c, here) = param("c")?;
                Ok(SmoothTerm::Linear { c: self.vector(c, dim, &here)? })
            }
            "quadratic" => {
                let (rho, h1) = param("rho")?;
                let rho = self.number(rho, &h1)?;
                if !(rho >= 0.0) {
                    return Err(self.err(&h1, "must be nonnegative"));
                }
                let center = match params.get("center") {
                    Some(c) => self.vector(c, dim, &format!("{at}.params.center"))?,
                    None => vec![0.0; dim],
                };
                Ok(SmoothTerm::Quadratic { rho, center })
            }
            "least_squares" => {
                let (m, h1) = param("M")?;
                let (d, h2) = param("d")?;
                let map = io::read_matrix(&self.path(m, &h1)?).map_err(|e| self.err(&h1, e.to_string()))?;
                if map.cols() != dim {
                    return Err(self.err(&h1, format!("has {} columns, expected {dim}", map.cols())));
                }
                let target = self.vector(d, map.rows(), &h2)?;
                SmoothTerm::least_squares(map, target, beta).map_err(|e| self.err(at, e.to_string()))
            }
            other => Err(self.err(&format!("{at}.family"), format!("unknown family '{other}'"))),
        }
    }
}
