//! Clock models.
//!
//! A clock generates the identities of fresh names and answers the
//! read-write precedence queries used when matching names. Two models are
//! provided:
//!
//! * **logical** clocks: a plain counter. Fresh indices grow without bound,
//!   so iterative behaviors produce infinite state spaces.
//! * **causal** clocks: a table mapping each live fresh output (and the
//!   bottom entry) to the set of fresh inputs created after it. Indices are
//!   reused once garbage-collected, which is what makes state spaces finite.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::names::Name;

/// Which clock model a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockModel {
    Logical,
    Causal,
}

impl fmt::Display for ClockModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClockModel::Logical => f.write_str("logical"),
            ClockModel::Causal => f.write_str("causal"),
        }
    }
}

impl FromStr for ClockModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logical" => Ok(ClockModel::Logical),
            "causal" => Ok(ClockModel::Causal),
            other => Err(format!(
                "unknown clock model `{other}` (expected logical|causal)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClockError {
    #[error("the {0} clock model does not define a name set")]
    NoNames(ClockModel),
}

/// Table entry key of a causal clock: `None` is the bottom entry, `Some(n)`
/// stands for the fresh output `n!`. `None` sorts first, which keeps the
/// canonical order stable.
type CausalKey = Option<u64>;

/// A causal clock: a partial map from `{bottom} + fresh outputs` to sets of
/// fresh-input indices. `table[n!]` holds the inputs created after `n!` was
/// minted; `table[bottom]` holds every input created so far.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CausalClock {
    table: BTreeMap<CausalKey, BTreeSet<u64>>,
}

impl CausalClock {
    pub fn init() -> CausalClock {
        CausalClock {
            table: BTreeMap::from([(None, BTreeSet::new())]),
        }
    }

    /// Smallest positive index whose output is absent from the domain.
    pub fn next_o(&self) -> u64 {
        let used: BTreeSet<u64> = self.table.keys().filter_map(|k| *k).collect();
        (1..).find(|n| !used.contains(n)).unwrap()
    }

    /// Smallest positive index whose input is absent from the codomain.
    pub fn next_i(&self) -> u64 {
        let used: BTreeSet<u64> = self.table.values().flatten().copied().collect();
        (1..).find(|n| !used.contains(n)).unwrap()
    }

    /// Adds a fresh empty entry for the next output index.
    pub fn tick_out(&self) -> CausalClock {
        let mut table = self.table.clone();
        table.insert(Some(self.next_o()), BTreeSet::new());
        CausalClock { table }
    }

    /// Adds the next input index to every entry, including bottom.
    pub fn tick_in(&self) -> CausalClock {
        let fresh = self.next_i();
        let table = self
            .table
            .iter()
            .map(|(k, ins)| {
                let mut ins = ins.clone();
                ins.insert(fresh);
                (*k, ins)
            })
            .collect();
        CausalClock { table }
    }

    /// `n!` precedes `m?` iff `n!` is in the domain and `m?` in its set.
    pub fn precedes(&self, n_out: u64, m_in: u64) -> bool {
        self.table
            .get(&Some(n_out))
            .is_some_and(|ins| ins.contains(&m_in))
    }

    /// The names referenced by the clock: its domain (without bottom) as
    /// fresh outputs plus its codomain as fresh inputs.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self
            .table
            .keys()
            .filter_map(|k| k.map(Name::fresh_out))
            .collect();
        out.extend(self.table.values().flatten().map(|m| Name::fresh_in(*m)));
        out
    }

    pub fn domain(&self) -> impl Iterator<Item = Option<u64>> + '_ {
        self.table.keys().copied()
    }

    pub fn entry(&self, key: Option<u64>) -> Option<&BTreeSet<u64>> {
        self.table.get(&key)
    }

    /// Rebuilds the table keeping only `keep`-approved keys, with each kept
    /// set filtered by `keep_in`. Garbage collection lives in the engine
    /// because it needs the instantiation function; this is the primitive
    /// it drives.
    pub(crate) fn retain(
        &self,
        keep: impl Fn(Option<u64>) -> bool,
        keep_in: impl Fn(u64) -> bool,
    ) -> CausalClock {
        let table = self
            .table
            .iter()
            .filter(|(k, _)| keep(**k))
            .map(|(k, ins)| (*k, ins.iter().copied().filter(|m| keep_in(*m)).collect()))
            .collect();
        CausalClock { table }
    }
}

impl fmt::Display for CausalClock {
    /// Deterministic textual form, e.g. `{⊥:{1?},1!:{1?}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (k, ins) in &self.table {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            match k {
                None => f.write_str("\u{22a5}")?,
                Some(n) => write!(f, "{n}!")?,
            }
            f.write_str(":{")?;
            let mut first_in = true;
            for m in ins {
                if !first_in {
                    f.write_str(",")?;
                }
                first_in = false;
                write!(f, "{m}?")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// A clock value under one of the two models. Ticks return new clocks;
/// values are immutable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clock {
    Logical(u64),
    Causal(CausalClock),
}

impl Clock {
    pub fn init(model: ClockModel) -> Clock {
        match model {
            ClockModel::Logical => Clock::Logical(0),
            ClockModel::Causal => Clock::Causal(CausalClock::init()),
        }
    }

    pub fn model(&self) -> ClockModel {
        match self {
            Clock::Logical(_) => ClockModel::Logical,
            Clock::Causal(_) => ClockModel::Causal,
        }
    }

    pub fn next_o(&self) -> u64 {
        match self {
            Clock::Logical(v) => v + 1,
            Clock::Causal(c) => c.next_o(),
        }
    }

    pub fn next_i(&self) -> u64 {
        match self {
            Clock::Logical(v) => v + 1,
            Clock::Causal(c) => c.next_i(),
        }
    }

    pub fn tick_out(&self) -> Clock {
        match self {
            Clock::Logical(v) => Clock::Logical(v + 1),
            Clock::Causal(c) => Clock::Causal(c.tick_out()),
        }
    }

    pub fn tick_in(&self) -> Clock {
        match self {
            Clock::Logical(v) => Clock::Logical(v + 1),
            Clock::Causal(c) => Clock::Causal(c.tick_in()),
        }
    }

    /// The read-write precedence `n! before m?`. Logical clocks compare the
    /// indices; causal clocks look the pair up in the table.
    pub fn precedes(&self, n_out: u64, m_in: u64) -> bool {
        match self {
            Clock::Logical(_) => n_out < m_in,
            Clock::Causal(c) => c.precedes(n_out, m_in),
        }
    }

    /// Name set of a causal clock. Undefined for logical clocks.
    pub fn names_of(&self) -> Result<BTreeSet<Name>, ClockError> {
        match self {
            Clock::Logical(_) => Err(ClockError::NoNames(ClockModel::Logical)),
            Clock::Causal(c) => Ok(c.names()),
        }
    }

    pub fn as_causal(&self) -> Option<&CausalClock> {
        match self {
            Clock::Causal(c) => Some(c),
            Clock::Logical(_) => None,
        }
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clock::Logical(v) => write!(f, "{v}"),
            Clock::Causal(c) => write!(f, "{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logical_next_and_ticks_increment() {
        let k = Clock::Logical(3);
        assert_eq!(k.next_o(), 4);
        assert_eq!(k.next_i(), 4);
        assert_eq!(k.tick_out(), Clock::Logical(4));
        assert_eq!(Clock::Logical(0).tick_in(), Clock::Logical(1));
    }

    #[test]
    fn causal_init_out_in_chain() {
        let init = CausalClock::init();
        assert_eq!(init.next_o(), 1);
        assert_eq!(init.next_i(), 1);
        assert!(!init.precedes(1, 1));

        // out(init) = {bot -> {}, 1! -> {}}
        let k = init.tick_out();
        assert_eq!(k.entry(None), Some(&BTreeSet::new()));
        assert_eq!(k.entry(Some(1)), Some(&BTreeSet::new()));
        assert_eq!(k.domain().count(), 2);

        // in(k) = {bot -> {1?}, 1! -> {1?}}: 1? causally depends on 1!
        let k2 = k.tick_in();
        assert_eq!(k2.entry(None), Some(&BTreeSet::from([1])));
        assert_eq!(k2.entry(Some(1)), Some(&BTreeSet::from([1])));
        assert!(k2.precedes(1, 1));
        assert_eq!(
            k2.names(),
            BTreeSet::from([Name::fresh_out(1), Name::fresh_in(1)])
        );
    }

    #[test]
    fn causal_next_skips_used_indices() {
        // domain indices {1,3} leave 2 as the smallest free output index
        let k = CausalClock::init().tick_out().tick_out().tick_out();
        assert_eq!(k.next_o(), 4);
        let trimmed = k.retain(|key| key != Some(2), |_| true);
        assert_eq!(trimmed.next_o(), 2);
    }

    #[test]
    fn causal_tick_in_extends_every_entry() {
        let k = CausalClock::init().tick_out().tick_in().tick_out();
        let k2 = k.tick_in();
        let fresh = k.next_i();
        for key in k2.domain() {
            assert!(k2.entry(key).unwrap().contains(&fresh));
        }
        // and tick_out never modifies existing entries
        let k3 = k2.tick_out();
        for key in k2.domain() {
            assert_eq!(k3.entry(key), k2.entry(key));
        }
    }

    #[test]
    fn names_of_rejects_logical() {
        assert!(Clock::Logical(0).names_of().is_err());
        assert_eq!(
            Clock::Causal(CausalClock::init().tick_out().tick_out())
                .names_of()
                .unwrap(),
            BTreeSet::from([Name::fresh_out(1), Name::fresh_out(2)])
        );
        assert_eq!(
            Clock::init(ClockModel::Causal).names_of().unwrap(),
            BTreeSet::new()
        );
    }

    #[test]
    fn precedence_examples() {
        let causal = Clock::Causal(CausalClock::init().tick_out().tick_in());
        assert!(causal.precedes(1, 1));
        let logical = Clock::Logical(7);
        assert!(!logical.precedes(2, 1));
        assert!(logical.precedes(1, 2));
    }

    #[test]
    fn logical_value_strictly_increases() {
        let mut k = Clock::init(ClockModel::Logical);
        for round in 0..10 {
            let next = if round % 2 == 0 {
                k.tick_out()
            } else {
                k.tick_in()
            };
            assert!(matches!((&k, &next), (Clock::Logical(a), Clock::Logical(b)) if b > a));
            k = next;
        }
    }
}
