//! Run counting and pathwise waiting times on concrete 0/1 sequences.
//!
//! Two independent implementations live here: [`count_runs`] works from the
//! maximal-run decomposition, while [`OnlineCounter`] is a left-to-right
//! automaton. [`waiting_time`] is driven by the automaton.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A finite sequence of binary trials, `true` meaning success.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BinarySeq {
    bits: Vec<bool>,
}

impl BinarySeq {
    pub fn new(bits: Vec<bool>) -> Self {
        BinarySeq { bits }
    }

    /// Builds the length-`n` sequence whose trial `i + 1` is bit `i` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        BinarySeq { bits: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn ones(n: usize) -> Self {
        BinarySeq { bits: vec![true; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of failures among the first `j` trials, for `j = 0..=len`.
    pub fn failure_prefix(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.bits.len() + 1);
        let mut f = 0;
        out.push(0);
        for &b in &self.bits {
            if !b {
                f += 1;
            }
            out.push(f);
        }
        out
    }

    /// Lengths of the maximal runs of ones, in order.
    pub fn maximal_runs(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut m = 0;
        for &b in &self.bits {
            if b {
                m += 1;
            } else if m > 0 {
                runs.push(m);
                m = 0;
            }
        }
        if m > 0 {
            runs.push(m);
        }
        runs
    }
}

impl FromStr for BinarySeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in binary sequence"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BinarySeq::new)
    }
}

impl fmt::Display for BinarySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// How runs of k successes are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum Scheme {
    /// Non-overlapping: the counter restarts after each completed run.
    #[serde(rename = "type1")]
    TypeI,
    /// One occurrence per maximal run of length at least k.
    #[serde(rename = "type2")]
    TypeII,
    /// Overlapping: a run of length m contributes m - k + 1.
    #[serde(rename = "type3")]
    TypeIII,
    /// One occurrence per maximal run of length exactly k.
    #[serde(rename = "type4")]
    TypeIV,
    /// Counted runs may share at most `ell` trials.
    #[serde(rename = "loverlap")]
    LOverlap { ell: usize },
}

impl Scheme {
    pub fn validate(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if let Scheme::LOverlap { ell } = *self {
            if ell >= k {
                return Err(invalid(format!("ell must be below k (ell={ell}, k={k})")));
            }
        }
        Ok(())
    }

    /// Occurrences contributed by one maximal run of length `m`.
    pub fn run_contribution(&self, m: usize, k: usize) -> usize {
        match *self {
            Scheme::TypeI => m / k,
            Scheme::TypeII => usize::from(m >= k),
            Scheme::TypeIII => (m + 1).saturating_sub(k),
            Scheme::TypeIV => usize::from(m == k),
            Scheme::LOverlap { ell } => {
                if m >= k {
                    (m - ell) / (k - ell)
                } else {
                    0
                }
            }
        }
    }

    /// True when the online count can only grow with the prefix length.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, Scheme::TypeIV)
    }

    /// Parses `type1`..`type4` or `loverlap`; `ell` is required for the
    /// latter and rejected otherwise.
    pub fn from_name(name: &str, ell: Option<usize>) -> Result<Scheme> {
        let scheme = match (name.to_ascii_lowercase().as_str(), ell) {
            ("type1", None) => Scheme::TypeI,
            ("type2", None) => Scheme::TypeII,
            ("type3", None) => Scheme::TypeIII,
            ("type4", None) => Scheme::TypeIV,
            ("loverlap", Some(ell)) => Scheme::LOverlap { ell },
            ("loverlap", None) => return Err(invalid("scheme loverlap needs ell")),
            ("type1" | "type2" | "type3" | "type4", Some(_)) => {
                return Err(invalid(format!("scheme {name} takes no ell")))
            }
            _ => return Err(Error::Parse(format!("unknown scheme {name:?}"))),
        };
        Ok(scheme)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::TypeI => "type1",
            Scheme::TypeII => "type2",
            Scheme::TypeIII => "type3",
            Scheme::TypeIV => "type4",
            Scheme::LOverlap { .. } => "loverlap",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::LOverlap { ell } => write!(f, "loverlap(ell={ell})"),
            s => f.write_str(s.name()),
        }
    }
}

/// Number of occurrences in `seq`, via maximal runs.
pub fn count_runs(seq: &BinarySeq, k: usize, scheme: Scheme) -> Result<usize> {
    scheme.validate(k)?;
    Ok(seq.maximal_runs().into_iter().map(|m| scheme.run_contribution(m, k)).sum())
}

/// Left-to-right automaton tracking the occurrence count of a prefix.
#[derive(Debug, Clone)]
pub struct OnlineCounter {
    k: usize,
    scheme: Scheme,
    // Current run length (type II/III/IV) or ones since the last counted run
    // (type I / ell-overlapping).
    run: usize,
    counted: usize,
}

impl OnlineCounter {
    pub fn new(k: usize, scheme: Scheme) -> Result<Self> {
        scheme.validate(k)?;
        Ok(OnlineCounter { k, scheme, run: 0, counted: 0 })
    }

    pub fn reset(&mut self) {
        self.run = 0;
        self.counted = 0;
    }

    /// Feeds one trial and returns the count over the prefix so far.
    pub fn push(&mut self, success: bool) -> usize {
        let k = self.k;
        if !success {
            if self.scheme == Scheme::TypeIV && self.run == k {
                self.counted += 1;
            }
            self.run = 0;
            return self.count();
        }
        self.run += 1;
        match self.scheme {
            Scheme::TypeI => {
                if self.run == k {
                    self.counted += 1;
                    self.run = 0;
                }
            }
            Scheme::LOverlap { ell } => {
                if self.run == k {
                    self.counted += 1;
                    self.run = ell;
                }
            }
            Scheme::TypeII => {
                if self.run == k {
                    self.counted += 1;
                }
            }
            Scheme::TypeIII => {
                if self.run >= k {
                    self.counted += 1;
                }
            }
            Scheme::TypeIV => {}
        }
        self.count()
    }

    /// Count over the prefix seen so far.
    pub fn count(&self) -> usize {
        match self.scheme {
            Scheme::TypeIV => self.counted + usize::from(self.run == self.k),
            _ => self.counted,
        }
    }
}

/// First prefix length at which the online count equals `r`, or `None` when
/// no prefix of `seq` gets there.
pub fn waiting_time(seq: &BinarySeq, k: usize, r: usize, scheme: Scheme) -> Result<Option<usize>> {
    if r == 0 {
        return Err(invalid("r must be at least 1"));
    }
    let mut counter = OnlineCounter::new(k, scheme)?;
    for (i, &b) in seq.bits().iter().enumerate() {
        if counter.push(b) == r {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &str) -> BinarySeq {
        s.parse().unwrap()
    }

    fn automaton_count(s: &BinarySeq, k: usize, scheme: Scheme) -> usize {
        let mut c = OnlineCounter::new(k, scheme).unwrap();
        let mut last = 0;
        for &b in s.bits() {
            last = c.push(b);
        }
        last
    }

    #[test]
    fn worked_counts() {
        let s = seq("011111000111");
        assert_eq!(count_runs(&s, 2, Scheme::TypeI).unwrap(), 3);
        assert_eq!(count_runs(&s, 2, Scheme::TypeII).unwrap(), 2);
        assert_eq!(count_runs(&s, 2, Scheme::TypeIII).unwrap(), 6);
        assert_eq!(count_runs(&s, 5, Scheme::TypeIV).unwrap(), 1);
        let t = seq("111111011110111");
        assert_eq!(count_runs(&t, 4, Scheme::LOverlap { ell: 2 }).unwrap(), 3);
        assert_eq!(count_runs(&t, 4, Scheme::LOverlap { ell: 3 }).unwrap(), 4);
        for scheme in [Scheme::TypeI, Scheme::TypeII, Scheme::TypeIII, Scheme::TypeIV] {
            assert_eq!(count_runs(&BinarySeq::default(), 3, scheme).unwrap(), 0);
        }
    }

    #[test]
    fn worked_waiting_times() {
        let s = seq("011111000111");
        assert_eq!(waiting_time(&s, 2, 2, Scheme::TypeI).unwrap(), Some(5));
        assert_eq!(waiting_time(&s, 2, 2, Scheme::TypeII).unwrap(), Some(11));
        assert_eq!(waiting_time(&s, 2, 2, Scheme::TypeIII).unwrap(), Some(4));
        assert_eq!(waiting_time(&s, 3, 2, Scheme::TypeIV).unwrap(), None);
        let ones = BinarySeq::ones(20);
        assert_eq!(waiting_time(&ones, 3, 2, Scheme::LOverlap { ell: 1 }).unwrap(), Some(5));
    }

    #[test]
    fn type4_count_dips() {
        let mut c = OnlineCounter::new(2, Scheme::TypeIV).unwrap();
        let counts: Vec<usize> = seq("0110111").bits().iter().map(|&b| c.push(b)).collect();
        assert_eq!(counts, vec![0, 0, 1, 1, 1, 2, 1]);
        // First passage of the non-monotone count.
        assert_eq!(waiting_time(&seq("0110111"), 2, 2, Scheme::TypeIV).unwrap(), Some(6));
        assert_eq!(waiting_time(&seq("0111011"), 2, 1, Scheme::TypeIV).unwrap(), Some(3));
    }

    #[test]
    fn validation() {
        assert!(count_runs(&seq("11"), 0, Scheme::TypeI).is_err());
        assert!(count_runs(&seq("11"), 3, Scheme::LOverlap { ell: 3 }).is_err());
        assert!(waiting_time(&seq("11"), 1, 0, Scheme::TypeI).is_err());
        assert!("0121".parse::<BinarySeq>().is_err());
    }

    #[test]
    fn failure_prefix_and_display() {
        let s = seq("0110");
        assert_eq!(s.failure_prefix(), vec![0, 1, 1, 1, 2]);
        assert_eq!(s.to_string(), "0110");
        assert_eq!(BinarySeq::from_mask(0b0110, 4), s);
    }

    #[test]
    fn formula_matches_automaton_exhaustively() {
        for n in 0..=12 {
            for mask in 0..(1u64 << n) {
                let s = BinarySeq::from_mask(mask, n);
                for k in 1..=4 {
                    let mut schemes = vec![Scheme::TypeI, Scheme::TypeII, Scheme::TypeIII, Scheme::TypeIV];
                    schemes.extend((0..k).map(|ell| Scheme::LOverlap { ell }));
                    for scheme in schemes {
                        assert_eq!(
                            count_runs(&s, k, scheme).unwrap(),
                            automaton_count(&s, k, scheme),
                            "{s} k={k} {scheme}"
                        );
                    }
                }
            }
        }
    }

    fn arb_seq() -> impl Strategy<Value = BinarySeq> {
        proptest::collection::vec(any::<bool>(), 0..40).prop_map(BinarySeq::new)
    }

    proptest! {
        #[test]
        fn scheme_coincidences(s in arb_seq(), k in 1usize..6) {
            let c = |sc| count_runs(&s, k, sc).unwrap();
            prop_assert_eq!(c(Scheme::LOverlap { ell: 0 }), c(Scheme::TypeI));
            prop_assert_eq!(c(Scheme::LOverlap { ell: k - 1 }), c(Scheme::TypeIII));
            prop_assert!(c(Scheme::TypeII) <= c(Scheme::TypeI));
            prop_assert!(c(Scheme::TypeI) <= c(Scheme::TypeIII));
            prop_assert!(c(Scheme::TypeIV) <= c(Scheme::TypeII));
        }

        #[test]
        fn waiting_time_ordering(s in arb_seq(), k in 1usize..5, r in 1usize..4) {
            let w = |sc| waiting_time(&s, k, r, sc).unwrap();
            if let (Some(a), Some(b)) = (w(Scheme::TypeIII), w(Scheme::TypeI)) {
                prop_assert!(a <= b);
            }
            if let (Some(a), Some(b)) = (w(Scheme::TypeI), w(Scheme::TypeII)) {
                prop_assert!(a <= b);
            }
            // A defined later waiting time forces the earlier ones to be defined.
            if w(Scheme::TypeII).is_some() {
                prop_assert!(w(Scheme::TypeI).is_some());
            }
            if w(Scheme::TypeI).is_some() {
                prop_assert!(w(Scheme::TypeIII).is_some());
            }
        }

        #[test]
        fn waiting_time_consistent(s in arb_seq(), k in 1usize..5, r in 1usize..4, ell in 0usize..4) {
            let mut schemes = vec![Scheme::TypeI, Scheme::TypeII, Scheme::TypeIII];
            if ell < k {
                schemes.push(Scheme::LOverlap { ell });
            }
            for sc in schemes {
                let total = count_runs(&s, k, sc).unwrap();
                match waiting_time(&s, k, r, sc).unwrap() {
                    Some(n) => {
                        let bits = s.bits();
                        let at = count_runs(&BinarySeq::new(bits[..n].to_vec()), k, sc).unwrap();
                        let before = count_runs(&BinarySeq::new(bits[..n - 1].to_vec()), k, sc).unwrap();
                        prop_assert_eq!(automaton_count(&BinarySeq::new(bits[..n].to_vec()), k, sc), r);
                        prop_assert_eq!(automaton_count(&BinarySeq::new(bits[..n - 1].to_vec()), k, sc), r - 1);
                        prop_assert_eq!(at, r);
                        prop_assert_eq!(before, r - 1);
                        prop_assert!(total >= r);
                    }
                    None => prop_assert!(total < r),
                }
            }
        }
    }
}
