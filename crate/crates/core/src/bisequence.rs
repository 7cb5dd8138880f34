//! Finite-horizon bi-sequence space.
//!
//! A state is a pair of bit vectors `(a_0..a_n, b_0..b_n)` with `a_0 = b_0`,
//! packed into an integer: bit 0 holds the shared first digit, bits `1..=n`
//! hold `a_1..a_n` and bits `n+1..=2n` hold `b_1..b_n`.
//!
//! Agent 1 observes every `a_k` with `k ≥ 1`, and observes `b_{k-1}` whenever
//! `a_k = 1`. Agent 2 is the mirror image. Each agent's belief at a state is
//! the uniform distribution over its information class.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::exactnum::Rational;
use crate::formula::{AgentId, ProbIndex};
use crate::models::{FiniteTypeSpace, ModelError, SharedRow};

pub type BiSeqEvent = FixedBitSet;

pub const MAX_HORIZON: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BiSeqError {
    #[error("horizon {0} outside 1..={MAX_HORIZON}")]
    HorizonOutOfRange(usize),
    #[error("agent {0} does not exist in the bi-sequence space")]
    UnknownAgent(AgentId),
    #[error("list of length {len} exceeds horizon bound {max}")]
    ListTooLong { len: usize, max: usize },
    #[error("list must contain at least one entry")]
    EmptyList,
    #[error("coordinate {k} outside 0..={n}")]
    CoordinateOutOfRange { k: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn id(self) -> AgentId {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl TryFrom<AgentId> for Player {
    type Error = BiSeqError;

    fn try_from(agent: AgentId) -> Result<Self, Self::Error> {
        match agent {
            1 => Ok(Player::One),
            2 => Ok(Player::Two),
            other => Err(BiSeqError::UnknownAgent(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sequence {
    A,
    B,
}

#[derive(Debug, Clone)]
pub struct TruncatedBiSeqSpace {
    n: usize,
}

impl TruncatedBiSeqSpace {
    pub fn new(n: usize) -> Result<Self, BiSeqError> {
        if !(1..=MAX_HORIZON).contains(&n) {
            return Err(BiSeqError::HorizonOutOfRange(n));
        }
        Ok(TruncatedBiSeqSpace { n })
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn num_states(&self) -> usize {
        1 << (2 * self.n + 1)
    }

    fn a_bit(&self, k: usize) -> u32 {
        if k == 0 { 1 } else { 1 << k }
    }

    fn b_bit(&self, k: usize) -> u32 {
        if k == 0 { 1 } else { 1 << (self.n + k) }
    }

    fn bit(&self, seq: Sequence, k: usize) -> u32 {
        match seq {
            Sequence::A => self.a_bit(k),
            Sequence::B => self.b_bit(k),
        }
    }

    /// Packs explicit sequences into a state index; returns `None` when the
    /// lengths differ from `n + 1` or the first digits disagree.
    pub fn state(&self, a: &[bool], b: &[bool]) -> Option<usize> {
        if a.len() != self.n + 1 || b.len() != self.n + 1 || a[0] != b[0] {
            return None;
        }
        let mut w = 0u32;
        for k in 0..=self.n {
            if a[k] {
                w |= self.a_bit(k);
            }
            if b[k] {
                w |= self.b_bit(k);
            }
        }
        Some(w as usize)
    }

    pub fn digit(&self, w: usize, seq: Sequence, k: usize) -> bool {
        w as u32 & self.bit(seq, k) != 0
    }

    pub fn sequences(&self, w: usize) -> (Vec<bool>, Vec<bool>) {
        let a = (0..=self.n).map(|k| self.digit(w, Sequence::A, k)).collect();
        let b = (0..=self.n).map(|k| self.digit(w, Sequence::B, k)).collect();
        (a, b)
    }

    fn observed_mask(&self, player: Player, w: u32) -> u32 {
        let (own, other) = match player {
            Player::One => (Sequence::A, Sequence::B),
            Player::Two => (Sequence::B, Sequence::A),
        };
        let mut mask = 0u32;
        for k in 1..=self.n {
            let own_bit = self.bit(own, k);
            mask |= own_bit;
            if w & own_bit != 0 {
                mask |= self.bit(other, k - 1);
            }
        }
        mask
    }

    fn class_key(&self, player: Player, w: u32) -> u32 {
        w & self.observed_mask(player, w)
    }

    fn free_bits(&self, player: Player, w: u32) -> u32 {
        !self.observed_mask(player, w) & (self.num_states() as u32 - 1)
    }

    /// Size of `player`'s information class at `w`.
    pub fn class_size(&self, player: Player, w: usize) -> usize {
        1 << self.free_bits(player, w as u32).count_ones()
    }

    /// Members of `player`'s information class at `w`, in increasing order.
    pub fn class_members(&self, player: Player, w: usize) -> Vec<usize> {
        let key = self.class_key(player, w as u32);
        let free = self.free_bits(player, w as u32);
        let mut out = Vec::with_capacity(1 << free.count_ones());
        let mut sub = 0u32;
        loop {
            out.push((key | sub) as usize);
            sub = sub.wrapping_sub(free) & free;
            if sub == 0 {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    pub fn class_of(&self, player: Player, w: usize) -> BiSeqEvent {
        self.event_from(self.class_members(player, w))
    }

    fn event_from(&self, states: impl IntoIterator<Item = usize>) -> BiSeqEvent {
        let mut e = FixedBitSet::with_capacity(self.num_states());
        e.extend(states);
        e
    }

    pub fn empty(&self) -> BiSeqEvent {
        FixedBitSet::with_capacity(self.num_states())
    }

    pub fn full(&self) -> BiSeqEvent {
        let mut e = self.empty();
        e.insert_range(..);
        e
    }

    /// The event `[seq_k = value]`.
    pub fn coordinate(&self, seq: Sequence, k: usize, value: bool) -> Result<BiSeqEvent, BiSeqError> {
        if k > self.n {
            return Err(BiSeqError::CoordinateOutOfRange { k, n: self.n });
        }
        let bit = self.bit(seq, k);
        Ok(self.event_from((0..self.num_states()).filter(|&w| (w as u32 & bit != 0) == value)))
    }

    /// The base event `X = [a_0 = 1]`.
    pub fn x(&self) -> BiSeqEvent {
        self.event_from((0..self.num_states()).filter(|w| w & 1 == 1))
    }

    pub fn kernel_prob(&self, player: Player, w: usize, e: &BiSeqEvent) -> Rational {
        let members = self.class_members(player, w);
        let hits = members.iter().filter(|&&s| e.contains(s)).count();
        Rational::new(hits.into(), members.len().into())
    }

    fn class_hits(&self, player: Player, e: &BiSeqEvent) -> HashMap<u32, usize> {
        let mut hits: HashMap<u32, usize> = HashMap::new();
        for w in e.ones() {
            *hits.entry(self.class_key(player, w as u32)).or_default() += 1;
        }
        hits
    }

    /// `B^{≥r} E`: states whose class gives `E` probability at least `r`.
    pub fn belief_event(&self, player: Player, r: &ProbIndex, e: &BiSeqEvent) -> BiSeqEvent {
        let hits = self.class_hits(player, e);
        let (num, den) = (r.value().numer().clone(), r.value().denom().clone());
        let mut decided: HashMap<u32, bool> = HashMap::new();
        let mut out = self.empty();
        for w in 0..self.num_states() {
            let key = self.class_key(player, w as u32);
            let holds = *decided.entry(key).or_insert_with(|| {
                let h = hits.get(&key).copied().unwrap_or(0);
                let size = self.class_size(player, w);
                if r.value().is_zero() {
                    return true;
                }
                BigInt::from(h) * &den >= BigInt::from(size) * &num
            });
            if holds {
                out.insert(w);
            }
        }
        out
    }

    /// `J^r E = B^{≥r} E ∪ B^{≥r} ¬E`.
    pub fn j_event(&self, player: Player, r: &ProbIndex, e: &BiSeqEvent) -> BiSeqEvent {
        let mut not_e = e.clone();
        not_e.toggle_range(..);
        let mut out = self.belief_event(player, r, e);
        out.union_with(&self.belief_event(player, r, &not_e));
        out
    }

    /// The alternating chain `C_0 = X`, `C_k = J_{p_k} C_{k-1}` where `p_k` is
    /// agent 1 for odd `k` when `first` is [`Player::One`].
    fn chain(&self, first: Player, r: &ProbIndex, len: usize) -> Vec<BiSeqEvent> {
        let mut out = Vec::with_capacity(len);
        let mut current = self.x();
        let mut player = first;
        out.push(current.clone());
        for _ in 1..len {
            current = self.j_event(player, r, &current);
            out.push(current.clone());
            player = player.other();
        }
        out
    }

    pub fn verify_coordinate_lemma(&self, r: &ProbIndex) -> CoordinateReport {
        let mut checks = Vec::with_capacity(2 * self.n);
        for (seq, innermost) in [(Sequence::A, Player::One), (Sequence::B, Player::Two)] {
            for k in 1..=self.n {
                let first = if k % 2 == 1 { innermost } else { innermost.other() };
                let chain = self.chain(first, r, k + 1);
                let target = self.coordinate(seq, k, true).expect("k within horizon");
                checks.push(CoordinateCheck { seq, k, holds: chain[k] == target });
            }
        }
        CoordinateReport { horizon: self.n, r: r.clone(), checks }
    }

    /// Intersection of a J-list's events. `signs[0]` selects `X` or `¬X`;
    /// `signs[k]` selects `C_k` or its complement, where `C_k` applies agent
    /// 1's operator at odd depths and agent 2's at even depths.
    pub fn jlist_event(&self, signs: &[bool], r: &ProbIndex) -> Result<BiSeqEvent, BiSeqError> {
        self.check_list_len(signs.len())?;
        Ok(self.intersect_signed(&self.chain(Player::One, r, signs.len()), signs))
    }

    fn intersect_signed(&self, chain: &[BiSeqEvent], signs: &[bool]) -> BiSeqEvent {
        let mut out = self.full();
        for (event, &positive) in chain.iter().zip(signs) {
            if positive {
                out.intersect_with(event);
            } else {
                let mut c = event.clone();
                c.toggle_range(..);
                out.intersect_with(&c);
            }
        }
        out
    }

    fn check_list_len(&self, len: usize) -> Result<(), BiSeqError> {
        if len == 0 {
            return Err(BiSeqError::EmptyList);
        }
        if len > self.n + 1 {
            return Err(BiSeqError::ListTooLong { len, max: self.n + 1 });
        }
        Ok(())
    }

    pub fn count_consistent_jlists(&self, m: usize, r: &ProbIndex) -> Result<u64, BiSeqError> {
        self.check_list_len(m)?;
        let chain = self.chain(Player::One, r, m);
        Ok((0u64..1 << m)
            .into_par_iter()
            .filter(|bits| {
                let signs: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
                !self.intersect_signed(&chain, &signs).is_clear()
            })
            .count() as u64)
    }

    /// Exports the space with both agents' kernels and `p1 ↦ X`.
    pub fn to_type_space(&self) -> Result<FiniteTypeSpace, ModelError> {
        let kernels = [Player::One, Player::Two]
            .iter()
            .map(|&player| {
                let mut rows: HashMap<u32, SharedRow> = HashMap::new();
                (0..self.num_states())
                    .map(|w| {
                        let key = self.class_key(player, w as u32);
                        rows.entry(key)
                            .or_insert_with(|| {
                                let members = self.class_members(player, w);
                                let p = Rational::new(1.into(), members.len().into());
                                members.into_iter().map(|s| (s, p.clone())).collect::<Vec<_>>().into()
                            })
                            .clone()
                    })
                    .collect::<Vec<Arc<[(usize, Rational)]>>>()
            })
            .collect();
        FiniteTypeSpace::from_shared_rows(self.num_states(), kernels, BTreeMap::from([(1, self.x())]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateCheck {
    pub seq: Sequence,
    pub k: usize,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct CoordinateReport {
    pub horizon: usize,
    pub r: ProbIndex,
    pub checks: Vec<CoordinateCheck>,
}

impl CoordinateReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn broken(&self) -> impl Iterator<Item = &CoordinateCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn state_counts() {
        for (n, count) in [(1, 8), (2, 32), (3, 128)] {
            assert_eq!(TruncatedBiSeqSpace::new(n).unwrap().num_states(), count);
        }
        assert_eq!(TruncatedBiSeqSpace::new(0).unwrap_err(), BiSeqError::HorizonOutOfRange(0));
        assert!(TruncatedBiSeqSpace::new(11).is_err());
    }

    #[test]
    fn class_sizes_follow_zero_count() {
        let s = TruncatedBiSeqSpace::new(2).unwrap();
        let w = s.state(&bits("101"), &bits("111")).unwrap();
        let class = s.class_members(Player::One, w);
        assert_eq!(class.len(), 4);
        for &v in &class {
            let (a, b) = s.sequences(v);
            assert_eq!(&a[1..], &[false, true]);
            assert!(b[1]);
        }
        let all_ones = s.state(&bits("111"), &bits("101")).unwrap();
        assert_eq!(s.class_size(Player::One, all_ones), 2);
        let zeros = s.state(&bits("000"), &bits("011")).unwrap();
        assert_eq!(s.class_size(Player::One, zeros), 8);
    }

    #[test]
    fn classes_partition_the_space() {
        let s = TruncatedBiSeqSpace::new(3).unwrap();
        for player in [Player::One, Player::Two] {
            let mut covered = s.empty();
            for w in 0..s.num_states() {
                let class = s.class_of(player, w);
                assert!(class.contains(w));
                for v in class.ones() {
                    assert_eq!(s.class_of(player, v), class);
                }
                covered.union_with(&class);
            }
            assert_eq!(covered, s.full());
        }
    }

    #[test]
    fn kernel_probability_cases() {
        let s = TruncatedBiSeqSpace::new(3).unwrap();
        let mut e = s.coordinate(Sequence::B, 1, false).unwrap();
        e.intersect_with(&s.coordinate(Sequence::A, 1, true).unwrap());
        let w = s.state(&bits("1110"), &bits("1000")).unwrap();
        assert_eq!(s.kernel_prob(Player::One, w, &e), rat(1, 1));
        let w = s.state(&bits("1100"), &bits("1000")).unwrap();
        assert_eq!(s.kernel_prob(Player::One, w, &e), rat(1, 2));
        let w = s.state(&bits("1000"), &bits("1000")).unwrap();
        assert_eq!(s.kernel_prob(Player::One, w, &e), rat(0, 1));
    }

    #[test]
    fn half_saturates_and_complement_symmetry() {
        let s = TruncatedBiSeqSpace::new(3).unwrap();
        let e = s.coordinate(Sequence::B, 2, true).unwrap();
        let half = ProbIndex::of(1, 2);
        assert_eq!(s.j_event(Player::One, &half, &e), s.full());
        let r = ProbIndex::of(3, 4);
        let mut c = e.clone();
        c.toggle_range(..);
        assert_eq!(s.j_event(Player::Two, &r, &e), s.j_event(Player::Two, &r, &c));
    }

    #[test]
    fn first_coordinate_from_x() {
        let s = TruncatedBiSeqSpace::new(3).unwrap();
        let b0 = s.coordinate(Sequence::B, 0, true).unwrap();
        assert_eq!(s.j_event(Player::One, &ProbIndex::one(), &b0), s.coordinate(Sequence::A, 1, true).unwrap());
    }

    #[test]
    fn coordinate_lemma() {
        let s = TruncatedBiSeqSpace::new(4).unwrap();
        for r in [ProbIndex::one(), ProbIndex::of(3, 4)] {
            let report = s.verify_coordinate_lemma(&r);
            assert_eq!(report.checks.len(), 8);
            assert!(report.all_hold(), "{r}: {:?}", report.broken().collect::<Vec<_>>());
        }
        let report = s.verify_coordinate_lemma(&ProbIndex::of(1, 2));
        assert!(!report.all_hold());
    }

    #[test]
    fn example_list() {
        let s = TruncatedBiSeqSpace::new(3).unwrap();
        let e = s.jlist_event(&[true, true, false], &ProbIndex::one()).unwrap();
        let mut expected = s.x();
        expected.intersect_with(&s.coordinate(Sequence::A, 1, true).unwrap());
        expected.intersect_with(&s.coordinate(Sequence::B, 2, false).unwrap());
        assert_eq!(e, expected);
        assert!(!e.is_clear());
        assert!(!s.jlist_event(&[false; 4], &ProbIndex::one()).unwrap().is_clear());
        assert!(s.jlist_event(&[true, false], &ProbIndex::of(1, 2)).unwrap().is_clear());
        assert_eq!(
            s.jlist_event(&[true; 5], &ProbIndex::one()).unwrap_err(),
            BiSeqError::ListTooLong { len: 5, max: 4 }
        );
    }

    #[test]
    fn list_counts() {
        let s = TruncatedBiSeqSpace::new(5).unwrap();
        assert_eq!(s.count_consistent_jlists(3, &ProbIndex::one()).unwrap(), 8);
        assert_eq!(s.count_consistent_jlists(6, &ProbIndex::one()).unwrap(), 64);
        assert_eq!(s.count_consistent_jlists(2, &ProbIndex::of(1, 2)).unwrap(), 2);
        assert!(s.count_consistent_jlists(7, &ProbIndex::one()).is_err());
    }

    #[test]
    fn export_is_harsanyi() {
        let s = TruncatedBiSeqSpace::new(3).unwrap();
        let m = s.to_type_space().unwrap();
        assert_eq!(m.num_states(), 128);
        assert!(m.is_harsanyi(1).unwrap());
        assert!(m.is_harsanyi(2).unwrap());
        let e = s.coordinate(Sequence::A, 2, true).unwrap();
        let r = ProbIndex::of(3, 4);
        assert_eq!(m.belief_event(1, &r, &e).unwrap(), s.belief_event(Player::One, &r, &e));
    }
}
