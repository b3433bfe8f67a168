//! Exact element algebra for the built-in group families.
//!
//! Every element is stored in a canonical form, so structural equality of
//! [`Element`] values coincides with equality in the group and
//! [`GroupOracle::canonical_key`] can serve as a visited-set key.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum nesting depth of `product` specs.
pub const MAX_PRODUCT_DEPTH: usize = 3;

/// A built-in finitely generated group family.
///
/// Serializes as `{"family":"z_pow","k":2}`,
/// `{"family":"product","left":{..},"right":{..}}`, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupSpec {
    Trivial,
    CyclicFinite { m: u64 },
    Z,
    ZPow { k: usize },
    Free { k: usize },
    DihedralInf,
    ZCrossCyclic { m: u64 },
    Lamplighter { m: u64 },
    Product { left: Box<GroupSpec>, right: Box<GroupSpec> },
}

impl GroupSpec {
    pub fn product(left: GroupSpec, right: GroupSpec) -> Self {
        GroupSpec::Product { left: Box::new(left), right: Box::new(right) }
    }

    /// Nesting depth of `product` constructors (0 for a plain family).
    pub fn depth(&self) -> usize {
        match self {
            GroupSpec::Product { left, right } => 1 + left.depth().max(right.depth()),
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth() > MAX_PRODUCT_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "product nesting depth {} exceeds {MAX_PRODUCT_DEPTH}",
                self.depth()
            )));
        }
        self.validate_params()
    }

    fn validate_params(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        match *self {
            GroupSpec::CyclicFinite { m } if m < 2 => bad("cyclic_finite requires m >= 2"),
            GroupSpec::ZCrossCyclic { m } if m < 2 => bad("z_cross_cyclic requires m >= 2"),
            GroupSpec::Lamplighter { m } if m < 2 => bad("lamplighter requires m >= 2"),
            GroupSpec::ZPow { k } if k < 1 => bad("z_pow requires k >= 1"),
            GroupSpec::Free { k } if k < 1 => bad("free requires k >= 1"),
            GroupSpec::Product { ref left, ref right } => {
                left.validate_params()?;
                right.validate_params()
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Trivial => write!(f, "trivial"),
            GroupSpec::CyclicFinite { m } => write!(f, "cyclic_finite({m})"),
            GroupSpec::Z => write!(f, "z"),
            GroupSpec::ZPow { k } => write!(f, "z_pow({k})"),
            GroupSpec::Free { k } => write!(f, "free({k})"),
            GroupSpec::DihedralInf => write!(f, "dihedral_inf"),
            GroupSpec::ZCrossCyclic { m } => write!(f, "z_cross_cyclic({m})"),
            GroupSpec::Lamplighter { m } => write!(f, "lamplighter({m})"),
            GroupSpec::Product { left, right } => write!(f, "product({left}, {right})"),
        }
    }
}

/// A group element in canonical form.
///
/// - `Vector`: ℤ and ℤᵏ, one coordinate per basis vector.
/// - `Word`: freely reduced word; letter `i` is `x_i`, letter `-i` is `x_i⁻¹`.
/// - `Dihedral`: `(st)^rotation`, followed by `s` when `reflection` is set.
/// - `Lamplighter`: lamp configuration sorted by position with no zero values,
///   plus the cursor position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Identity,
    Residue(u64),
    Vector(Vec<i64>),
    Word(Vec<i32>),
    Dihedral { rotation: i64, reflection: bool },
    Lamplighter { lamps: Vec<(i64, u64)>, cursor: i64 },
    Pair(Box<Element>, Box<Element>),
}

impl Element {
    pub fn pair(left: Element, right: Element) -> Self {
        Element::Pair(Box::new(left), Box::new(right))
    }

    fn write_key(&self, out: &mut Vec<u8>) {
        match self {
            Element::Identity => out.push(0),
            Element::Residue(r) => {
                out.push(1);
                out.extend_from_slice(&r.to_le_bytes());
            }
            Element::Vector(v) => {
                out.push(2);
                out.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            Element::Word(w) => {
                out.push(3);
                out.extend_from_slice(&(w.len() as u32).to_le_bytes());
                for x in w {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            Element::Dihedral { rotation, reflection } => {
                out.push(4);
                out.extend_from_slice(&rotation.to_le_bytes());
                out.push(*reflection as u8);
            }
            Element::Lamplighter { lamps, cursor } => {
                out.push(5);
                out.extend_from_slice(&cursor.to_le_bytes());
                out.extend_from_slice(&(lamps.len() as u32).to_le_bytes());
                for (pos, val) in lamps {
                    out.extend_from_slice(&pos.to_le_bytes());
                    out.extend_from_slice(&val.to_le_bytes());
                }
            }
            Element::Pair(l, r) => {
                out.push(6);
                let start = out.len();
                out.extend_from_slice(&[0; 4]);
                l.write_key(out);
                let len = (out.len() - start - 4) as u32;
                out[start..start + 4].copy_from_slice(&len.to_le_bytes());
                r.write_key(out);
            }
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Identity => write!(f, "e"),
            Element::Residue(r) => write!(f, "{r}"),
            Element::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Word(w) if w.is_empty() => write!(f, "e"),
            Element::Word(w) => {
                for (i, &x) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    if x > 0 {
                        write!(f, "x{x}")?;
                    } else {
                        write!(f, "x{}^-1", -x)?;
                    }
                }
                Ok(())
            }
            Element::Dihedral { rotation, reflection } => match (rotation, reflection) {
                (0, false) => write!(f, "e"),
                (0, true) => write!(f, "s"),
                (p, false) => write!(f, "(st)^{p}"),
                (p, true) => write!(f, "(st)^{p} s"),
            },
            Element::Lamplighter { lamps, cursor } => {
                write!(f, "{{")?;
                for (i, (p, v)) in lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}:{v}")?;
                }
                write!(f, "}}@{cursor}")
            }
            Element::Pair(l, r) => write!(f, "<{l}, {r}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Algebra {
    Trivial,
    Cyclic(u64),
    Lattice(usize),
    Free(usize),
    Dihedral,
    Lamplighter(u64),
    Product(Box<Algebra>, Box<Algebra>),
}

impl Algebra {
    fn from_spec(spec: &GroupSpec) -> Self {
        match spec {
            GroupSpec::Trivial => Algebra::Trivial,
            GroupSpec::CyclicFinite { m } => Algebra::Cyclic(*m),
            GroupSpec::Z => Algebra::Lattice(1),
            GroupSpec::ZPow { k } => Algebra::Lattice(*k),
            GroupSpec::Free { k } => Algebra::Free(*k),
            GroupSpec::DihedralInf => Algebra::Dihedral,
            GroupSpec::ZCrossCyclic { m } => {
                Algebra::Product(Box::new(Algebra::Lattice(1)), Box::new(Algebra::Cyclic(*m)))
            }
            GroupSpec::Lamplighter { m } => Algebra::Lamplighter(*m),
            GroupSpec::Product { left, right } => {
                Algebra::Product(Box::new(Algebra::from_spec(left)), Box::new(Algebra::from_spec(right)))
            }
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Algebra::Trivial | Algebra::Cyclic(_) => true,
            Algebra::Product(l, r) => l.is_finite() && r.is_finite(),
            _ => false,
        }
    }

    fn identity(&self) -> Element {
        match self {
            Algebra::Trivial => Element::Identity,
            Algebra::Cyclic(_) => Element::Residue(0),
            Algebra::Lattice(k) => Element::Vector(vec![0; *k]),
            Algebra::Free(_) => Element::Word(Vec::new()),
            Algebra::Dihedral => Element::Dihedral { rotation: 0, reflection: false },
            Algebra::Lamplighter(_) => Element::Lamplighter { lamps: Vec::new(), cursor: 0 },
            Algebra::Product(l, r) => Element::pair(l.identity(), r.identity()),
        }
    }

    fn contains(&self, g: &Element) -> bool {
        match (self, g) {
            (Algebra::Trivial, Element::Identity) => true,
            (Algebra::Cyclic(m), Element::Residue(r)) => r < m,
            (Algebra::Lattice(k), Element::Vector(v)) => v.len() == *k,
            (Algebra::Free(k), Element::Word(w)) => {
                let k = *k as i64;
                w.iter().all(|&x| x != 0 && (x as i64).abs() <= k) && w.windows(2).all(|p| p[0] != -p[1])
            }
            (Algebra::Dihedral, Element::Dihedral { .. }) => true,
            (Algebra::Lamplighter(m), Element::Lamplighter { lamps, .. }) => {
                lamps.iter().all(|&(_, v)| v != 0 && v < *m) && lamps.windows(2).all(|p| p[0].0 < p[1].0)
            }
            (Algebra::Product(l, r), Element::Pair(a, b)) => l.contains(a) && r.contains(b),
            _ => false,
        }
    }

    fn multiply(&self, g: &Element, h: &Element) -> Element {
        match (self, g, h) {
            (Algebra::Trivial, _, _) => Element::Identity,
            (Algebra::Cyclic(m), Element::Residue(a), Element::Residue(b)) => {
                Element::Residue(((*a as u128 + *b as u128) % *m as u128) as u64)
            }
            (Algebra::Lattice(_), Element::Vector(a), Element::Vector(b)) => {
                Element::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Algebra::Free(_), Element::Word(a), Element::Word(b)) => {
                let mut out = a.clone();
                for &x in b {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                Element::Word(out)
            }
            (
                Algebra::Dihedral,
                Element::Dihedral { rotation: p, reflection: a },
                Element::Dihedral { rotation: q, reflection: b },
            ) => {
                // s (st)^q s = (st)^-q
                let q = if *a { -q } else { *q };
                Element::Dihedral { rotation: p + q, reflection: a ^ b }
            }
            (
                Algebra::Lamplighter(m),
                Element::Lamplighter { lamps: f1, cursor: k1 },
                Element::Lamplighter { lamps: f2, cursor: k2 },
            ) => {
                let shifted = f2.iter().map(|&(p, v)| (p + k1, v));
                Element::Lamplighter { lamps: merge_lamps(f1.iter().copied(), shifted, *m), cursor: k1 + k2 }
            }
            (Algebra::Product(l, r), Element::Pair(a1, b1), Element::Pair(a2, b2)) => {
                Element::pair(l.multiply(a1, a2), r.multiply(b1, b2))
            }
            _ => panic!("multiply: elements {g} and {h} do not belong to this group"),
        }
    }

    fn invert(&self, g: &Element) -> Element {
        match (self, g) {
            (Algebra::Trivial, _) => Element::Identity,
            (Algebra::Cyclic(m), Element::Residue(a)) => Element::Residue((m - a) % m),
            (Algebra::Lattice(_), Element::Vector(a)) => Element::Vector(a.iter().map(|x| -x).collect()),
            (Algebra::Free(_), Element::Word(a)) => Element::Word(a.iter().rev().map(|x| -x).collect()),
            (Algebra::Dihedral, Element::Dihedral { rotation, reflection }) => {
                if *reflection {
                    g.clone()
                } else {
                    Element::Dihedral { rotation: -rotation, reflection: false }
                }
            }
            (Algebra::Lamplighter(m), Element::Lamplighter { lamps, cursor }) => {
                // (f, k)^-1 = (-f(. + k), -k)
                let lamps = lamps.iter().map(|&(p, v)| (p - cursor, m - v)).collect();
                Element::Lamplighter { lamps, cursor: -cursor }
            }
            (Algebra::Product(l, r), Element::Pair(a, b)) => Element::pair(l.invert(a), r.invert(b)),
            _ => panic!("invert: element {g} does not belong to this group"),
        }
    }

    fn generators(&self) -> Vec<(String, Element)> {
        let mut gens = match self {
            Algebra::Trivial => Vec::new(),
            Algebra::Cyclic(m) => {
                vec![("a".to_string(), Element::Residue(1)), ("a^-1".to_string(), Element::Residue(m - 1))]
            }
            Algebra::Lattice(k) => {
                let mut gens = Vec::with_capacity(2 * k);
                for i in 0..*k {
                    let mut plus = vec![0; *k];
                    plus[i] = 1;
                    let mut minus = vec![0; *k];
                    minus[i] = -1;
                    gens.push((format!("e{}", i + 1), Element::Vector(plus)));
                    gens.push((format!("-e{}", i + 1), Element::Vector(minus)));
                }
                gens
            }
            Algebra::Free(k) => (1..=*k as i32)
                .flat_map(|i| {
                    [(format!("x{i}"), Element::Word(vec![i])), (format!("x{i}^-1"), Element::Word(vec![-i]))]
                })
                .collect(),
            Algebra::Dihedral => vec![
                ("s".to_string(), Element::Dihedral { rotation: 0, reflection: true }),
                ("t".to_string(), Element::Dihedral { rotation: -1, reflection: true }),
            ],
            Algebra::Lamplighter(m) => vec![
                ("t".to_string(), Element::Lamplighter { lamps: Vec::new(), cursor: 1 }),
                ("t^-1".to_string(), Element::Lamplighter { lamps: Vec::new(), cursor: -1 }),
                ("a".to_string(), Element::Lamplighter { lamps: vec![(0, 1)], cursor: 0 }),
                ("a^-1".to_string(), Element::Lamplighter { lamps: vec![(0, m - 1)], cursor: 0 }),
            ],
            Algebra::Product(l, r) => {
                let (le, re) = (l.identity(), r.identity());
                let left = l.generators().into_iter().map(|(n, g)| (format!("L.{n}"), Element::pair(g, re.clone())));
                let right = r.generators().into_iter().map(|(n, g)| (format!("R.{n}"), Element::pair(le.clone(), g)));
                left.chain(right).collect()
            }
        };
        let mut seen = std::collections::HashSet::new();
        gens.retain(|(_, g)| seen.insert(g.clone()));
        gens
    }

    /// Designated axis word, as indices into `generators()`.
    fn axis_word(&self) -> Option<Vec<usize>> {
        match self {
            Algebra::Trivial | Algebra::Cyclic(_) => None,
            Algebra::Lattice(_) | Algebra::Free(_) | Algebra::Lamplighter(_) => Some(vec![0]),
            Algebra::Dihedral => Some(vec![0, 1]),
            Algebra::Product(l, r) => l.axis_word().or_else(|| {
                let offset = l.generators().len();
                r.axis_word().map(|w| w.into_iter().map(|i| i + offset).collect())
            }),
        }
    }
}

fn merge_lamps(a: impl Iterator<Item = (i64, u64)>, b: impl Iterator<Item = (i64, u64)>, m: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    let mut a = a.peekable();
    let mut b = b.peekable();
    loop {
        let next = match (a.peek(), b.peek()) {
            (Some(&(pa, va)), Some(&(pb, vb))) => {
                if pa < pb {
                    a.next();
                    (pa, va)
                } else if pb < pa {
                    b.next();
                    (pb, vb)
                } else {
                    a.next();
                    b.next();
                    (pa, (va + vb) % m)
                }
            }
            (Some(_), None) => a.next().unwrap(),
            (None, Some(_)) => b.next().unwrap(),
            (None, None) => break,
        };
        if next.1 != 0 {
            out.push(next);
        }
    }
    out
}

/// Element algebra plus a symmetric generating set for one group.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct GroupOracle {
    spec: GroupSpec,
    algebra: Algebra,
    generators: Vec<Element>,
    generator_names: Vec<String>,
    axis_word: Option<Vec<usize>>,
}

impl GroupOracle {
    /// Builds the oracle with the family's default generating set.
    pub fn new(spec: GroupSpec) -> Result<Self> {
        spec.validate()?;
        let algebra = Algebra::from_spec(&spec);
        let (generator_names, generators) = algebra.generators().into_iter().unzip();
        let axis_word = algebra.axis_word();
        Ok(GroupOracle { spec, algebra, generators, generator_names, axis_word })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generator_names
    }

    /// Axis word as generator indices; `None` for finite groups.
    pub fn axis_word(&self) -> Option<&[usize]> {
        self.axis_word.as_deref()
    }

    /// The single axis letter, when the axis word has length one.
    pub fn axis_letter(&self) -> Option<&Element> {
        match self.axis_word.as_deref() {
            Some([i]) => Some(&self.generators[*i]),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.algebra.is_finite()
    }

    pub fn identity(&self) -> Element {
        self.algebra.identity()
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Element {
        self.algebra.multiply(g, h)
    }

    pub fn invert(&self, g: &Element) -> Element {
        self.algebra.invert(g)
    }

    /// True when `g` is a canonical element of this group.
    pub fn contains(&self, g: &Element) -> bool {
        self.algebra.contains(g)
    }

    /// Injective byte encoding of a canonical element.
    pub fn canonical_key(&self, g: &Element) -> Vec<u8> {
        let mut out = Vec::with_capacity(16);
        g.write_key(&mut out);
        out
    }

    /// Product of a sequence of generators given by index.
    pub fn evaluate_word(&self, word: &[usize]) -> Element {
        word.iter().fold(self.identity(), |acc, &i| self.multiply(&acc, &self.generators[i]))
    }

    /// Index of the generator inverse to generator `i`.
    pub fn inverse_generator(&self, i: usize) -> usize {
        let inv = self.invert(&self.generators[i]);
        self.generators.iter().position(|g| *g == inv).expect("generating set is closed under inversion")
    }
}

/// Alias of [`GroupOracle::new`].
pub fn make_group(spec: GroupSpec) -> Result<GroupOracle> {
    GroupOracle::new(spec)
}
