//! Named abelian quantum numbers.
//!
//! A [`QN`] is a small sorted collection of named integer charges. Each charge
//! adds either as a plain integer (modulus 1) or modulo `N` (modulus `N > 1`).
//! Names that are absent behave as value 0 with modulus 1, so `QN("Sz",0)`
//! and `QN()` compare equal.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};

use arrayvec::ArrayVec;

use crate::error::{Result, TensorError};
use crate::name::ShortName;

pub const MAX_QN_ENTRIES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QnEntry {
    name: ShortName,
    val: i32,
    modulus: i32,
}

impl QnEntry {
    pub fn name(&self) -> &str {
        self.name.as_str()
    }

    pub fn val(&self) -> i32 {
        self.val
    }

    pub fn modulus(&self) -> i32 {
        self.modulus
    }

    fn is_trivial(&self) -> bool {
        self.val == 0 && self.modulus == 1
    }
}

fn reduce(val: i64, modulus: i32) -> i32 {
    if modulus > 1 {
        val.rem_euclid(modulus as i64) as i32
    } else {
        val as i32
    }
}

/// A set of named charges, sorted by name.
#[derive(Clone, Default)]
pub struct QN {
    entries: ArrayVec<QnEntry, MAX_QN_ENTRIES>,
}

impl QN {
    /// The neutral element `QN()`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// A single integer charge, e.g. `QN("Sz",1)`.
    pub fn one(name: &str, val: i32) -> Result<Self> {
        Self::from_entries([(name, val, 1)])
    }

    /// A single charge obeying Z_N addition, e.g. `QN("P",1,2)`.
    pub fn modular(name: &str, val: i32, modulus: i32) -> Result<Self> {
        Self::from_entries([(name, val, modulus)])
    }

    /// An unnamed charge, `QN(2)`.
    pub fn scalar(val: i32) -> Self {
        Self::one("", val).expect("empty name is always valid")
    }

    /// Builds a QN from `(name, value, modulus)` triples given in any order.
    pub fn from_entries<'a, I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, i32, i32)>,
    {
        let mut list: Vec<QnEntry> = Vec::new();
        for (name, val, modulus) in entries {
            if modulus < 1 {
                return Err(TensorError::BadModulus(modulus as i64));
            }
            let name = ShortName::new(name)?;
            if list.iter().any(|e| e.name == name) {
                return Err(TensorError::DuplicateQnName(name.to_string()));
            }
            list.push(QnEntry {
                name,
                val: reduce(val as i64, modulus),
                modulus,
            });
        }
        Self::from_sorted_list(list)
    }

    fn from_sorted_list(mut list: Vec<QnEntry>) -> Result<Self> {
        list.sort_by_key(|a| a.name);
        list.retain(|e| !e.is_trivial());
        if list.len() > MAX_QN_ENTRIES {
            return Err(TensorError::QnCapacity);
        }
        Ok(QN {
            entries: list.into_iter().collect(),
        })
    }

    pub fn entries(&self) -> &[QnEntry] {
        &self.entries
    }

    /// Value of the named charge (0 if absent).
    pub fn val(&self, name: &str) -> i32 {
        self.entries
            .iter()
            .find(|e| e.name.as_str() == name)
            .map_or(0, |e| e.val)
    }

    /// True when every charge is zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.val == 0)
    }

    pub fn try_add(&self, other: &QN) -> Result<QN> {
        let mut out: Vec<QnEntry> = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.name.cmp(&y.name),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let (x, y) = (a[i], b[j]);
                    if x.modulus != y.modulus {
                        return Err(TensorError::ModulusConflict {
                            name: x.name.to_string(),
                            a: x.modulus,
                            b: y.modulus,
                        });
                    }
                    out.push(QnEntry {
                        name: x.name,
                        val: reduce(x.val as i64 + y.val as i64, x.modulus),
                        modulus: x.modulus,
                    });
                    i += 1;
                    j += 1;
                }
            }
        }
        Self::from_sorted_list(out)
    }

    pub fn try_sub(&self, other: &QN) -> Result<QN> {
        self.try_add(&-other.clone())
    }

    /// Charges paired by name union, absent names reading as 0.
    fn union_values<'a>(&'a self, other: &'a QN) -> impl Iterator<Item = (i32, i32)> + 'a {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        std::iter::from_fn(move || {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.name.cmp(&y.name),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => return None,
            };
            Some(match ord {
                Ordering::Less => {
                    i += 1;
                    (a[i - 1].val, 0)
                }
                Ordering::Greater => {
                    j += 1;
                    (0, b[j - 1].val)
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1].val, b[j - 1].val)
                }
            })
        })
    }
}

impl Neg for QN {
    type Output = QN;

    fn neg(mut self) -> QN {
        for e in self.entries.iter_mut() {
            e.val = reduce(-(e.val as i64), e.modulus);
        }
        self
    }
}

/// Panics on conflicting moduli or capacity overflow; see [`QN::try_add`].
impl Add for QN {
    type Output = QN;

    fn add(self, rhs: QN) -> QN {
        self.try_add(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for QN {
    type Output = QN;

    fn sub(self, rhs: QN) -> QN {
        self.try_sub(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &QN {
    type Output = QN;

    fn neg(self) -> QN {
        -self.clone()
    }
}

impl Add for &QN {
    type Output = QN;

    fn add(self, rhs: &QN) -> QN {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &QN {
    type Output = QN;

    fn sub(self, rhs: &QN) -> QN {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl PartialEq for QN {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QN {}

impl Ord for QN {
    fn cmp(&self, other: &Self) -> Ordering {
        for (x, y) in self.union_values(other) {
            match x.cmp(&y) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for QN {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for QN {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for e in self.entries.iter().filter(|e| e.val != 0) {
            e.name.hash(state);
            e.val.hash(state);
        }
    }
}

impl fmt::Display for QN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = |e: &QnEntry| {
            if e.modulus > 1 {
                format!("\"{}\",{},{}", e.name, e.val, e.modulus)
            } else {
                format!("\"{}\",{}", e.name, e.val)
            }
        };
        match self.entries.len() {
            0 => write!(f, "QN()"),
            1 => write!(f, "QN({})", one(&self.entries[0])),
            _ => {
                let parts: Vec<String> = self.entries.iter().map(|e| format!("({})", one(e))).collect();
                write!(f, "QN({})", parts.join(","))
            }
        }
    }
}

impl fmt::Debug for QN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
