//! Names and the dynamic equality partition.
//!
//! Six kinds of names exist: four static kinds declared in a model source
//! (free `a`, binder `?x`, restriction `^A`, private `$a`) and two dynamic
//! kinds minted by the clock during execution (fresh outputs `n!`, fresh
//! inputs `n?`). The partition [`Partition`] records which names have been
//! made equal by match and synchronization steps; only free, fresh-input
//! and fresh-output names can ever be equated.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::clocks::Clock;

/// A name. Variant order is the canonical kind-major ordering used for
/// deterministic serialization, so the derived `Ord` is load-bearing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    /// Free (public, global) name, e.g. `c`.
    Free(String),
    /// Binder name `?x`: an input placeholder local to an iterator.
    Binder(String),
    /// Restriction `^A`: a globally private name, never reset.
    Restriction(String),
    /// Private `$a`: an iterator-local private name, reset at each loop.
    Private(String),
    /// Fresh output `n!` (index >= 1), minted on bound outputs.
    FreshOut(u64),
    /// Fresh input `n?` (index >= 1), minted on inputs from the environment.
    FreshIn(u64),
}

/// Kind tag for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NameKind {
    Free,
    Binder,
    Restriction,
    Private,
    FreshOut,
    FreshIn,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NameKind::Free => "free",
            NameKind::Binder => "binder",
            NameKind::Restriction => "restriction",
            NameKind::Private => "private",
            NameKind::FreshOut => "fresh output",
            NameKind::FreshIn => "fresh input",
        };
        f.write_str(s)
    }
}

impl Name {
    pub fn free(s: &str) -> Name {
        Name::Free(s.to_string())
    }

    pub fn binder(s: &str) -> Name {
        Name::Binder(s.to_string())
    }

    pub fn restriction(s: &str) -> Name {
        Name::Restriction(s.to_string())
    }

    pub fn private(s: &str) -> Name {
        Name::Private(s.to_string())
    }

    pub fn fresh_out(n: u64) -> Name {
        debug_assert!(n >= 1, "fresh output index must be >= 1");
        Name::FreshOut(n)
    }

    pub fn fresh_in(n: u64) -> Name {
        debug_assert!(n >= 1, "fresh input index must be >= 1");
        Name::FreshIn(n)
    }

    pub fn kind(&self) -> NameKind {
        match self {
            Name::Free(_) => NameKind::Free,
            Name::Binder(_) => NameKind::Binder,
            Name::Restriction(_) => NameKind::Restriction,
            Name::Private(_) => NameKind::Private,
            Name::FreshOut(_) => NameKind::FreshOut,
            Name::FreshIn(_) => NameKind::FreshIn,
        }
    }

    /// Restrictions and privates form the `Priv` set.
    pub fn is_private(&self) -> bool {
        matches!(self, Name::Restriction(_) | Name::Private(_))
    }

    pub fn is_public(&self) -> bool {
        !self.is_private()
    }

    /// Everything except fresh outputs/inputs is static.
    pub fn is_static(&self) -> bool {
        !matches!(self, Name::FreshOut(_) | Name::FreshIn(_))
    }

    /// True for names that may appear in the partition: free, fresh input,
    /// fresh output. Binders, restrictions and privates never enter gamma.
    pub fn in_partition_carrier(&self) -> bool {
        matches!(self, Name::Free(_) | Name::FreshIn(_) | Name::FreshOut(_))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Free(s) => write!(f, "{s}"),
            Name::Binder(s) => write!(f, "?{s}"),
            Name::Restriction(s) => write!(f, "^{s}"),
            Name::Private(s) => write!(f, "${s}"),
            Name::FreshOut(n) => write!(f, "{n}!"),
            Name::FreshIn(n) => write!(f, "{n}?"),
        }
    }
}

/// Errors raised by partition operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    /// A binder, restriction or private name was handed to a partition
    /// operation. Those kinds are never members of gamma, so this always
    /// indicates a rule-engine bug rather than a user error.
    #[error("{kind} name `{name}` cannot appear in the name partition")]
    NotPartitionKind { name: Name, kind: NameKind },
    /// `refine` was called on a pair that is not compatible.
    #[error("names `{left}` and `{right}` are not compatible, refusing to refine")]
    Incompatible { left: Name, right: Name },
}

/// The candidate-equality relation on names under a clock: the smallest
/// reflexive and symmetric relation that relates any two names that are
/// free or fresh inputs, and relates a fresh output `n!` with a fresh
/// input `m?` whenever `n!` precedes `m?` on the clock. Total on all names.
pub fn may_equal(clock: &Clock, a: &Name, b: &Name) -> bool {
    if a == b {
        return true;
    }
    let free_or_in = |n: &Name| matches!(n, Name::Free(_) | Name::FreshIn(_));
    if free_or_in(a) && free_or_in(b) {
        return true;
    }
    match (a, b) {
        (Name::FreshOut(n), Name::FreshIn(m)) => clock.precedes(*n, *m),
        (Name::FreshIn(m), Name::FreshOut(n)) => clock.precedes(*n, *m),
        _ => false,
    }
}

/// The dynamic partition gamma over free, fresh-input and fresh-output
/// names. Singleton classes are implicit: only classes of size >= 2 are
/// stored, so the empty partition represents "all names distinct".
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    classes: BTreeSet<BTreeSet<Name>>,
}

impl Partition {
    pub fn new() -> Partition {
        Partition::default()
    }

    /// Builds a partition from explicit classes. Intended for tests; panics
    /// on classes that violate the representation invariants.
    pub fn from_classes<I, C>(classes: I) -> Partition
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = Name>,
    {
        let mut stored = BTreeSet::new();
        let mut seen: BTreeSet<Name> = BTreeSet::new();
        for class in classes {
            let class: BTreeSet<Name> = class.into_iter().collect();
            assert!(class.len() >= 2, "stored classes must have size >= 2");
            for n in &class {
                assert!(n.in_partition_carrier(), "name `{n}` cannot enter gamma");
                assert!(seen.insert(n.clone()), "classes must be disjoint");
            }
            stored.insert(class);
        }
        Partition { classes: stored }
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Stored (non-singleton) classes, in canonical order.
    pub fn classes(&self) -> impl Iterator<Item = &BTreeSet<Name>> {
        self.classes.iter()
    }

    /// The class of `n`: the stored class containing it, or the implicit
    /// singleton `{n}`.
    pub fn class_of(&self, n: &Name) -> Result<BTreeSet<Name>, PartitionError> {
        if !n.in_partition_carrier() {
            return Err(PartitionError::NotPartitionKind {
                name: n.clone(),
                kind: n.kind(),
            });
        }
        for class in &self.classes {
            if class.contains(n) {
                return Ok(class.clone());
            }
        }
        Ok(BTreeSet::from([n.clone()]))
    }

    /// Compatibility of `a` and `b`: every member of the class of `a` must
    /// be a candidate equal of every member of the class of `b`.
    pub fn compatible(&self, clock: &Clock, a: &Name, b: &Name) -> Result<bool, PartitionError> {
        let ca = self.class_of(a)?;
        let cb = self.class_of(b)?;
        for n in &ca {
            for m in &cb {
                if !may_equal(clock, n, m) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Refines the partition with the equality `a = b`: the two classes are
    /// replaced by their union. Requires compatibility.
    pub fn refine(&self, clock: &Clock, a: &Name, b: &Name) -> Result<Partition, PartitionError> {
        if !self.compatible(clock, a, b)? {
            return Err(PartitionError::Incompatible {
                left: a.clone(),
                right: b.clone(),
            });
        }
        let ca = self.class_of(a)?;
        let cb = self.class_of(b)?;
        if ca == cb {
            return Ok(self.clone());
        }
        let mut classes = self.classes.clone();
        classes.remove(&ca);
        classes.remove(&cb);
        let union: BTreeSet<Name> = ca.union(&cb).cloned().collect();
        debug_assert!(union.len() >= 2);
        classes.insert(union);
        Ok(Partition { classes })
    }

    /// Checks that any class containing a fresh output has exactly one and
    /// all of its other members of fresh-input kind. Holds for every
    /// partition reachable through `refine`.
    pub fn output_classes_ok(&self) -> bool {
        self.classes.iter().all(|class| {
            let outs = class
                .iter()
                .filter(|n| matches!(n, Name::FreshOut(_)))
                .count();
            outs == 0
                || (outs == 1
                    && class
                        .iter()
                        .all(|n| matches!(n, Name::FreshOut(_) | Name::FreshIn(_))))
        })
    }

    /// Representation invariants: pairwise-disjoint stored classes, no
    /// stored singletons, carrier kinds only.
    pub fn well_formed(&self) -> bool {
        let mut seen: BTreeSet<&Name> = BTreeSet::new();
        for class in &self.classes {
            if class.len() < 2 {
                return false;
            }
            for n in class {
                if !n.in_partition_carrier() || !seen.insert(n) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    /// `{}` when empty, otherwise the stored classes in canonical order:
    /// `{1!,2?}` or `{1!,2?},{a,b}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.classes.is_empty() {
            return f.write_str("{}");
        }
        let mut first_class = true;
        for class in &self.classes {
            if !first_class {
                f.write_str(",")?;
            }
            first_class = false;
            f.write_str("{")?;
            let mut first = true;
            for n in class {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{n}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}
