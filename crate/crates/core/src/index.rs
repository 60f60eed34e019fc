//! Intelligent tensor indices.
//!
//! An [`Index`] is a tensor leg carrying a unique id, a dimension, up to four
//! tags and a prime level. Two indices are equal when id, tags and prime level
//! agree; the arrow direction of a QN index is not part of equality.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use arrayvec::ArrayVec;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Result, TensorError};
use crate::name::ShortName;
use crate::qn::QN;

pub const MAX_TAGS: usize = 4;

/// Sorted, deduplicated set of at most four short tags.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagSet {
    tags: ArrayVec<ShortName, MAX_TAGS>,
}

impl TagSet {
    /// Parses a comma-separated list such as `"Site,n=3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut set = TagSet::default();
        for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            set.insert(ShortName::new(t)?)?;
        }
        Ok(set)
    }

    fn insert(&mut self, tag: ShortName) -> Result<()> {
        match self.tags.binary_search(&tag) {
            Ok(_) => Ok(()),
            Err(pos) => {
                if self.tags.is_full() {
                    return Err(TensorError::TooManyTags);
                }
                self.tags.insert(pos, tag);
                Ok(())
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(|t| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t.as_str() == tag)
    }

    /// True if every tag of `other` is present here.
    pub fn contains_all(&self, other: &TagSet) -> bool {
        other.tags.iter().all(|t| self.tags.contains(t))
    }

    pub fn union(&self, other: &TagSet) -> Result<TagSet> {
        let mut out = self.clone();
        for t in &other.tags {
            out.insert(*t)?;
        }
        Ok(out)
    }

    pub fn difference(&self, other: &TagSet) -> TagSet {
        let mut out = self.clone();
        out.tags.retain(|t| !other.tags.contains(t));
        out
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.iter().collect();
        f.write_str(&parts.join(","))
    }
}

impl fmt::Debug for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

/// Direction of a QN index. Non-QN indices always carry `Neither`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arrow {
    In,
    Out,
    Neither,
}

impl Arrow {
    pub fn flip(self) -> Arrow {
        match self {
            Arrow::In => Arrow::Out,
            Arrow::Out => Arrow::In,
            Arrow::Neither => Arrow::Neither,
        }
    }

    /// Sign with which a subspace QN enters a block flux.
    pub fn sign(self) -> i32 {
        match self {
            Arrow::Out => 1,
            Arrow::In => -1,
            Arrow::Neither => 0,
        }
    }
}

/// Ordered list of `(QN, dimension)` subspaces of a QN index.
pub type Space = Arc<[(QN, usize)]>;

fn id_rng() -> &'static Mutex<StdRng> {
    static RNG: OnceLock<Mutex<StdRng>> = OnceLock::new();
    RNG.get_or_init(|| Mutex::new(StdRng::from_os_rng()))
}

fn fresh_id() -> u64 {
    id_rng().lock().unwrap_or_else(|p| p.into_inner()).random()
}

/// Reseeds the process-wide id generator, making index ids reproducible.
pub fn seed_index_ids(seed: u64) {
    *id_rng().lock().unwrap_or_else(|p| p.into_inner()) = StdRng::seed_from_u64(seed);
}

#[derive(Clone)]
pub struct Index {
    id: u64,
    dim: usize,
    tags: TagSet,
    plev: u32,
    space: Option<Space>,
    dir: Arrow,
}

impl Index {
    pub fn new(dim: usize, tags: &str) -> Result<Self> {
        if dim == 0 {
            return Err(TensorError::ZeroDim);
        }
        Ok(Index {
            id: fresh_id(),
            dim,
            tags: TagSet::parse(tags)?,
            plev: 0,
            space: None,
            dir: Arrow::Neither,
        })
    }

    /// A QN index; subspace order is kept exactly as given.
    pub fn with_qns(subspaces: Vec<(QN, usize)>, tags: &str, dir: Arrow) -> Result<Self> {
        if subspaces.is_empty() {
            return Err(TensorError::NoSubspaces);
        }
        if subspaces.iter().any(|(_, d)| *d == 0) {
            return Err(TensorError::ZeroDim);
        }
        let dim = subspaces.iter().map(|(_, d)| d).sum();
        let dir = if dir == Arrow::Neither { Arrow::Out } else { dir };
        Ok(Index {
            id: fresh_id(),
            dim,
            tags: TagSet::parse(tags)?,
            plev: 0,
            space: Some(subspaces.into()),
            dir,
        })
    }

    /// Reassembles an index from stored fields (used when deserializing).
    pub fn from_parts(
        id: u64,
        tags: TagSet,
        plev: u32,
        dim: usize,
        space: Option<Vec<(QN, usize)>>,
        dir: Arrow,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(TensorError::ZeroDim);
        }
        let dir = match (&space, dir) {
            (None, _) => Arrow::Neither,
            (Some(_), Arrow::Neither) => return Err(TensorError::NotQn),
            (Some(_), d) => d,
        };
        if let Some(sp) = &space {
            if sp.is_empty() {
                return Err(TensorError::NoSubspaces);
            }
            if sp.iter().map(|(_, d)| d).sum::<usize>() != dim || sp.iter().any(|(_, d)| *d == 0) {
                return Err(TensorError::Shape("subspace dimensions do not sum to dim".into()));
            }
        }
        Ok(Index {
            id,
            dim,
            tags,
            plev,
            space: space.map(Into::into),
            dir,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tags(&self) -> &TagSet {
        &self.tags
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    pub fn plev(&self) -> u32 {
        self.plev
    }

    pub fn dir(&self) -> Arrow {
        self.dir
    }

    pub fn space(&self) -> Option<&[(QN, usize)]> {
        self.space.as_deref()
    }

    pub fn has_qns(&self) -> bool {
        self.space.is_some()
    }

    /// Number of subspaces (1 for a non-QN index).
    pub fn nblocks(&self) -> usize {
        self.space.as_ref().map_or(1, |s| s.len())
    }

    pub fn blockdim(&self, block: usize) -> usize {
        self.space.as_ref().map_or(self.dim, |s| s[block].1)
    }

    pub fn blockdims(&self) -> Vec<usize> {
        (0..self.nblocks()).map(|b| self.blockdim(b)).collect()
    }

    /// QN of a subspace (empty for non-QN indices).
    pub fn block_qn(&self, block: usize) -> QN {
        self.space.as_ref().map_or(QN::empty(), |s| s[block].0.clone())
    }

    /// Subspace number and offset within it for a zero-based position.
    pub fn locate(&self, pos: usize) -> (usize, usize) {
        match &self.space {
            None => (0, pos),
            Some(sp) => {
                let mut off = pos;
                for (b, (_, d)) in sp.iter().enumerate() {
                    if off < *d {
                        return (b, off);
                    }
                    off -= d;
                }
                panic!("position {pos} beyond index dimension {}", self.dim)
            }
        }
    }

    pub fn prime(&self) -> Index {
        self.prime_by(1).expect("priming up never fails")
    }

    pub fn prime_by(&self, inc: i32) -> Result<Index> {
        let p = self.plev as i64 + inc as i64;
        if p < 0 {
            return Err(TensorError::NegativePrimeLevel);
        }
        Ok(self.with_plev(p as u32))
    }

    pub fn with_plev(&self, plev: u32) -> Index {
        Index { plev, ..self.clone() }
    }

    pub fn noprime(&self) -> Index {
        self.with_plev(0)
    }

    pub fn add_tags(&self, tags: &str) -> Result<Index> {
        let tags = self.tags.union(&TagSet::parse(tags)?)?;
        Ok(Index { tags, ..self.clone() })
    }

    pub fn remove_tags(&self, tags: &str) -> Result<Index> {
        let tags = self.tags.difference(&TagSet::parse(tags)?);
        Ok(Index { tags, ..self.clone() })
    }

    pub fn replace_tags(&self, old: &str, new: &str) -> Result<Index> {
        let tags = self.tags.difference(&TagSet::parse(old)?).union(&TagSet::parse(new)?)?;
        Ok(Index { tags, ..self.clone() })
    }

    pub fn set_tags(&self, tags: &str) -> Result<Index> {
        Ok(Index {
            tags: TagSet::parse(tags)?,
            ..self.clone()
        })
    }

    /// Reverses the arrow; non-QN indices are unchanged.
    pub fn dag(&self) -> Index {
        Index {
            dir: self.dir.flip(),
            ..self.clone()
        }
    }

    pub fn with_dir(&self, dir: Arrow) -> Index {
        if self.space.is_none() {
            return self.clone();
        }
        Index { dir, ..self.clone() }
    }

    /// Same space, tags and prime level, but a fresh id.
    pub fn sim(&self) -> Index {
        Index {
            id: fresh_id(),
            ..self.clone()
        }
    }

    /// Equal dimension and identical subspace structure (arrows ignored).
    pub(crate) fn same_space(&self, other: &Index) -> bool {
        self.dim == other.dim
            && match (&self.space, &other.space) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.1 == y.1 && x.0 == y.0)
                }
                _ => false,
            }
    }

    /// Addresses element `val` (1-based) along this index.
    pub fn at(&self, val: usize) -> IndexVal<'_> {
        IndexVal { index: self, val }
    }
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.plev == other.plev && self.tags == other.tags
    }
}

impl Eq for Index {}

impl Hash for Index {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
        self.plev.hash(state);
        self.tags.hash(state);
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(dim={}|id={}", self.dim, self.id % 1000)?;
        if !self.tags.is_empty() {
            write!(f, "|\"{}\"", self.tags)?;
        }
        f.write_str(")")?;
        for _ in 0..self.plev.min(3) {
            f.write_str("'")?;
        }
        if self.plev > 3 {
            write!(f, "{}", self.plev)?;
        }
        if self.dir != Arrow::Neither {
            write!(f, " <{:?}>", self.dir)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An index paired with a 1-based value, addressing one tensor slice.
#[derive(Clone, Copy, Debug)]
pub struct IndexVal<'a> {
    pub index: &'a Index,
    pub val: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fresh_indices_differ() {
        let i = Index::new(3, "").unwrap();
        let j = Index::new(3, "").unwrap();
        assert_ne!(i, j);
        assert_eq!(i, i.clone());
    }

    #[test]
    fn tags_parse() {
        let s = Index::new(3, "s,Site").unwrap();
        assert_eq!(s.dim(), 3);
        assert!(s.has_tag("s") && s.has_tag("Site"));
        assert_eq!(s.tags().len(), 2);
        assert!(matches!(Index::new(0, ""), Err(TensorError::ZeroDim)));
        assert!(matches!(Index::new(2, "a,b,c,d,e"), Err(TensorError::TooManyTags)));
        assert!(matches!(
            Index::new(2, "waytoolongtag"),
            Err(TensorError::NameTooLong(_))
        ));
    }

    #[test]
    fn qn_index_dims() {
        let n = |v| QN::one("N", v).unwrap();
        let i = Index::with_qns(vec![(n(0), 1), (n(1), 3), (n(2), 2)], "i", Arrow::Out).unwrap();
        assert_eq!(i.dim(), 6);
        assert_eq!(i.nblocks(), 3);
        assert_eq!(i.locate(4), (2, 0));
        assert_eq!(i.locate(1), (1, 0));
        let j = Index::with_qns(vec![(QN::scalar(0), 2), (QN::scalar(1), 3)], "", Arrow::Out).unwrap();
        assert_eq!(j.dim(), 5);
        let k = Index::with_qns(vec![(QN::empty(), 4)], "", Arrow::Out).unwrap();
        assert_eq!((k.dim(), k.nblocks()), (4, 1));
        assert!(Index::with_qns(vec![], "", Arrow::Out).is_err());
        assert!(Index::with_qns(vec![(n(0), 0)], "", Arrow::Out).is_err());
    }

    #[test]
    fn priming() {
        let i = Index::new(2, "i").unwrap();
        let ip = i.prime();
        assert_eq!(ip.plev(), 1);
        assert_ne!(i, ip);
        assert_ne!(i, ip.prime());
        assert_eq!(i.prime().prime().noprime(), i);
        assert_eq!(ip.id(), i.id());
        assert!(matches!(i.prime_by(-1), Err(TensorError::NegativePrimeLevel)));
    }

    #[test]
    fn tag_edits() {
        let l = Index::new(2, "l").unwrap();
        let l2 = l.add_tags("Left").unwrap();
        assert_eq!(l2.tags().to_string(), "Left,l");
        assert_ne!(l, l2);
        assert_eq!(l2.id(), l.id());
        assert_eq!(l.remove_tags("absent").unwrap(), l);
        let full = Index::new(2, "a,b,c,d").unwrap();
        assert!(matches!(full.add_tags("e"), Err(TensorError::TooManyTags)));
        assert_eq!(l.replace_tags("l", "r").unwrap().tags().to_string(), "r");
    }

    #[test]
    fn dag_semantics() {
        let s = Index::with_qns(
            vec![(QN::one("N", 0).unwrap(), 1), (QN::one("N", 1).unwrap(), 1)],
            "Boson",
            Arrow::Out,
        )
        .unwrap();
        let sd = s.dag();
        assert_eq!(sd.dir(), Arrow::In);
        assert_eq!(sd, s);
        assert_eq!(sd.dag().dir(), Arrow::Out);
        let d = Index::new(2, "").unwrap();
        assert_eq!(d.dag().dir(), Arrow::Neither);
        assert_eq!(d.dag(), d);
    }

    #[test]
    fn display_format() {
        let i = Index::new(3, "").unwrap();
        let shown = i.to_string();
        assert!(shown.starts_with("(dim=3|id="), "{shown}");
        assert!(shown.ends_with(')'));
        assert!(i.prime().to_string().ends_with(")'"));
    }

    #[test]
    fn sim_keeps_everything_but_id() {
        let a = Index::new(2, "x").unwrap().prime();
        let b = a.sim();
        assert_ne!(a.id(), b.id());
        assert_eq!((b.dim(), b.plev(), b.tags()), (2, 1, a.tags()));
    }

    #[test]
    fn ids_do_not_collide() {
        let ids: HashSet<u64> = (0..1_000_000).map(|_| fresh_id()).collect();
        assert_eq!(ids.len(), 1_000_000);
    }
}
