//! Site types: named local Hilbert spaces with operators and basis states.
//!
//! An index is interpreted through its tags. `op("Sz", s)` looks at every
//! tag of `s`, and exactly one registered type among them must define
//! `"Sz"`. Spin QNs count half-quanta, so `Up` is `QN("Sz", 1)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64 as C64;
use tnkit_core::{Arrow, ITensor, Index, TagSet, QN};

use crate::error::{MpsError, Result};

/// Definition of a local Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteDef {
    pub tag: String,
    pub dim: usize,
    /// QN subspaces in basis order; their sizes sum to `dim`.
    pub qns: Option<Vec<(QN, usize)>>,
    /// Row-major `dim x dim` matrices; entry `[r * dim + c]` maps basis
    /// state `c` to `r`.
    pub ops: BTreeMap<String, Vec<C64>>,
    /// 1-based basis ordinals.
    pub states: BTreeMap<String, usize>,
}

impl SiteDef {
    pub fn new(tag: &str, dim: usize) -> Self {
        SiteDef {
            tag: tag.to_string(),
            dim,
            qns: None,
            ops: BTreeMap::new(),
            states: BTreeMap::new(),
        }
    }

    pub fn with_qns(mut self, qns: Vec<(QN, usize)>) -> Self {
        self.qns = Some(qns);
        self
    }

    /// Adds a real operator given as rows.
    pub fn op(self, name: &str, rows: &[&[f64]]) -> Self {
        let m = rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect();
        self.op_complex(name, m)
    }

    pub fn op_complex(mut self, name: &str, m: Vec<C64>) -> Self {
        self.ops.insert(name.to_string(), m);
        self
    }

    pub fn state(mut self, name: &str, ordinal: usize) -> Self {
        self.states.insert(name.to_string(), ordinal);
        self
    }

    /// Adds `"Id"` if absent.
    pub fn with_identity(mut self) -> Self {
        let d = self.dim;
        let id = (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        self.ops.entry("Id".into()).or_insert(id);
        self
    }

    fn check(&self) -> Result<()> {
        let bad = |reason: String| MpsError::BadSiteDef {
            tag: self.tag.clone(),
            reason,
        };
        TagSet::parse(&self.tag).map_err(|e| bad(e.to_string()))?;
        if self.tag.contains(',') {
            return Err(bad("tag must be a single tag".into()));
        }
        if self.dim == 0 {
            return Err(bad("dimension must be positive".into()));
        }
        if let Some(q) = &self.qns {
            let total: usize = q.iter().map(|(_, d)| d).sum();
            if total != self.dim || q.iter().any(|(_, d)| *d == 0) {
                return Err(bad(format!(
                    "QN subspaces cover {total} states, dimension is {}",
                    self.dim
                )));
            }
        }
        for (name, m) in &self.ops {
            if m.len() != self.dim * self.dim {
                return Err(bad(format!(
                    "operator `{name}` has {} entries, expected {}",
                    m.len(),
                    self.dim * self.dim
                )));
            }
        }
        for (name, &v) in &self.states {
            if v == 0 || v > self.dim {
                return Err(bad(format!("state `{name}` has ordinal {v} outside 1..={}", self.dim)));
            }
        }
        Ok(())
    }
}

type Registry = RwLock<HashMap<String, Arc<SiteDef>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| {
        let mut m = HashMap::new();
        for d in builtins() {
            m.insert(d.tag.clone(), Arc::new(d));
        }
        RwLock::new(m)
    })
}

fn sz(v: i32) -> QN {
    QN::one("Sz", v).expect("valid QN")
}

fn builtins() -> Vec<SiteDef> {
    let r3 = 3f64.sqrt();
    let half = SiteDef::new("S=1/2", 2)
        .with_qns(vec![(sz(1), 1), (sz(-1), 1)])
        .state("Up", 1)
        .state("Dn", 2)
        .op("Sz", &[&[0.5, 0.0], &[0.0, -0.5]])
        .op("S+", &[&[0.0, 1.0], &[0.0, 0.0]])
        .op("S-", &[&[0.0, 0.0], &[1.0, 0.0]])
        .op("Sx", &[&[0.0, 0.5], &[0.5, 0.0]])
        .op_complex(
            "Sy",
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, -0.5),
                C64::new(0.0, 0.5),
                C64::new(0.0, 0.0),
            ],
        )
        .with_identity();
    let three_half = SiteDef::new("S=3/2", 4)
        .with_qns(vec![(sz(3), 1), (sz(1), 1), (sz(-1), 1), (sz(-3), 1)])
        .state("3/2", 1)
        .state("1/2", 2)
        .state("-1/2", 3)
        .state("-3/2", 4)
        .op(
            "Sz",
            &[
                &[1.5, 0.0, 0.0, 0.0],
                &[0.0, 0.5, 0.0, 0.0],
                &[0.0, 0.0, -0.5, 0.0],
                &[0.0, 0.0, 0.0, -1.5],
            ],
        )
        .op(
            "S+",
            &[
                &[0.0, r3, 0.0, 0.0],
                &[0.0, 0.0, 2.0, 0.0],
                &[0.0, 0.0, 0.0, r3],
                &[0.0, 0.0, 0.0, 0.0],
            ],
        )
        .op(
            "S-",
            &[
                &[0.0, 0.0, 0.0, 0.0],
                &[r3, 0.0, 0.0, 0.0],
                &[0.0, 2.0, 0.0, 0.0],
                &[0.0, 0.0, r3, 0.0],
            ],
        )
        .op(
            "Sx",
            &[
                &[0.0, r3 / 2.0, 0.0, 0.0],
                &[r3 / 2.0, 0.0, 1.0, 0.0],
                &[0.0, 1.0, 0.0, r3 / 2.0],
                &[0.0, 0.0, r3 / 2.0, 0.0],
            ],
        )
        .with_identity();
    let n = |v| QN::one("N", v).expect("valid QN");
    let boson = SiteDef::new("Boson", 2)
        .with_qns(vec![(n(0), 1), (n(1), 1)])
        .state("0", 1)
        .state("1", 2)
        .op("a", &[&[0.0, 1.0], &[0.0, 0.0]])
        .op("adag", &[&[0.0, 0.0], &[1.0, 0.0]])
        .op("n", &[&[0.0, 0.0], &[0.0, 1.0]])
        .with_identity();
    vec![half, three_half, boson]
}

/// Registers a site type. An existing tag is replaced only with `overwrite`.
pub fn register_sitetype(def: SiteDef, overwrite: bool) -> Result<()> {
    def.check()?;
    let mut reg = registry().write().expect("site registry poisoned");
    if !overwrite && reg.contains_key(&def.tag) {
        return Err(MpsError::AlreadyRegistered(def.tag));
    }
    reg.insert(def.tag.clone(), Arc::new(def));
    Ok(())
}

pub fn sitetype(tag: &str) -> Result<Arc<SiteDef>> {
    registry()
        .read()
        .expect("site registry poisoned")
        .get(tag)
        .cloned()
        .ok_or_else(|| MpsError::UnknownSiteType(tag.to_string()))
}

/// `n` fresh site indices tagged `"<tag>,Site,n=<j>"`. QN indices point out.
pub fn siteinds(tag: &str, n: usize, conserve_qns: bool) -> Result<Vec<Index>> {
    let def = sitetype(tag)?;
    (1..=n)
        .map(|j| {
            let tags = format!("{tag},Site,n={j}");
            let i = if conserve_qns {
                let q = def.qns.clone().ok_or_else(|| MpsError::NoQns(tag.to_string()))?;
                Index::with_qns(q, &tags, Arrow::Out)?
            } else {
                Index::new(def.dim, &tags)?
            };
            Ok(i)
        })
        .collect()
}

/// The unique registered type on `s` for which `has` holds.
fn resolve(s: &Index, name: &str, has: impl Fn(&SiteDef) -> bool) -> Result<Option<Arc<SiteDef>>> {
    let reg = registry().read().expect("site registry poisoned");
    let registered: Vec<&Arc<SiteDef>> = s.tags().iter().filter_map(|t| reg.get(t)).collect();
    if registered.is_empty() {
        return Err(MpsError::NoSiteType(s.to_string()));
    }
    let found: Vec<&Arc<SiteDef>> = registered.into_iter().filter(|d| has(d)).collect();
    match found.as_slice() {
        [] => Ok(None),
        [d] => {
            if d.dim != s.dim() {
                return Err(MpsError::BadSiteDef {
                    tag: d.tag.clone(),
                    reason: format!("index {s} has dimension {}, type has {}", s.dim(), d.dim),
                });
            }
            Ok(Some(Arc::clone(d)))
        }
        many => Err(MpsError::Ambiguous {
            name: name.to_string(),
            tags: many.iter().map(|d| d.tag.clone()).collect(),
        }),
    }
}

/// The matrix of operator `name` on `s`, row-major over `(s', s)`.
pub fn op_matrix(name: &str, s: &Index) -> Result<Vec<C64>> {
    let def = resolve(s, name, |d| d.ops.contains_key(name))?.ok_or_else(|| MpsError::UnknownOp {
        name: name.to_string(),
        index: s.to_string(),
    })?;
    Ok(def.ops[name].clone())
}

/// Builds an operator tensor over `(s', dag(s))` from a row-major matrix.
pub fn op_from_matrix(m: &[C64], s: &Index) -> Result<ITensor> {
    let d = s.dim();
    let (sp, sd) = (s.prime(), s.dag());
    let mut t = ITensor::new(&[sp.clone(), sd.clone()])?;
    for r in 0..d {
        for c in 0..d {
            let v = m[r * d + c];
            if v != C64::new(0.0, 0.0) {
                t.set(&[sp.at(r + 1), sd.at(c + 1)], v)?;
            }
        }
    }
    Ok(t)
}

/// Operator `name` acting on `s`, with indices `(s', dag(s))`.
pub fn op(name: &str, s: &Index) -> Result<ITensor> {
    op_from_matrix(&op_matrix(name, s)?, s)
}

/// Unit basis vector `name` on `s`.
pub fn state(name: &str, s: &Index) -> Result<ITensor> {
    let def = resolve(s, name, |d| d.states.contains_key(name))?.ok_or_else(|| MpsError::UnknownState {
        name: name.to_string(),
        index: s.to_string(),
    })?;
    let mut t = ITensor::new(std::slice::from_ref(s))?;
    t.set(&[s.at(def.states[name])], 1.0)?;
    Ok(t)
}

/// 1-based ordinal of state `name` on `s`.
pub fn state_ordinal(name: &str, s: &Index) -> Result<usize> {
    let def = resolve(s, name, |d| d.states.contains_key(name))?.ok_or_else(|| MpsError::UnknownState {
        name: name.to_string(),
        index: s.to_string(),
    })?;
    Ok(def.states[name])
}
