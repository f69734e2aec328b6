//! Ultimately affine ω-words over ℕ.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleEntry {
    pub base: u64,
    pub drifting: bool,
}

impl CycleEntry {
    pub fn fixed(base: u64) -> Self {
        CycleEntry {
            base,
            drifting: false,
        }
    }

    pub fn drifting(base: u64) -> Self {
        CycleEntry {
            base,
            drifting: true,
        }
    }
}

/// `prefix · cycle^ω` where the `t`-th occurrence of a drifting cycle entry
/// denotes `base + t * drift`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineLassoWord {
    pub prefix: Vec<u64>,
    pub cycle: Vec<CycleEntry>,
    pub drift: u64,
}

impl AffineLassoWord {
    pub fn new(prefix: Vec<u64>, cycle: Vec<CycleEntry>, drift: u64) -> Self {
        assert!(!cycle.is_empty(), "cycle must be nonempty");
        let mut w = AffineLassoWord {
            prefix,
            cycle,
            drift,
        };
        if w.drift == 0 || w.cycle.iter().all(|e| !e.drifting) {
            w.drift = 0;
            for e in &mut w.cycle {
                e.drifting = false;
            }
        }
        w
    }

    /// The eventually periodic word `prefix · cycle^ω`.
    pub fn periodic(prefix: Vec<u64>, cycle: Vec<u64>) -> Self {
        AffineLassoWord::new(
            prefix,
            cycle.into_iter().map(CycleEntry::fixed).collect(),
            0,
        )
    }

    pub fn constant(n: u64) -> Self {
        AffineLassoWord::periodic(vec![], vec![n])
    }

    pub fn is_eventually_periodic(&self) -> bool {
        self.drift == 0
    }

    pub fn denote(&self, n: u64) -> u64 {
        let n = n as usize;
        if n < self.prefix.len() {
            return self.prefix[n];
        }
        let k = n - self.prefix.len();
        let t = (k / self.cycle.len()) as u64;
        let e = self.cycle[k % self.cycle.len()];
        if e.drifting {
            e.base + t * self.drift
        } else {
            e.base
        }
    }

    pub fn take(&self, len: usize) -> Vec<u64> {
        (0..len as u64).map(|n| self.denote(n)).collect()
    }

    /// Phase within the cycle at position `n`, if past the prefix.
    pub fn phase(&self, n: u64) -> Option<usize> {
        let n = n as usize;
        (n >= self.prefix.len()).then(|| (n - self.prefix.len()) % self.cycle.len())
    }
}

impl std::fmt::Display for AffineLassoWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let prefix: Vec<String> = self.prefix.iter().map(u64::to_string).collect();
        let cycle: Vec<String> = self
            .cycle
            .iter()
            .map(|e| {
                if e.drifting {
                    format!("{}+{}t", e.base, self.drift)
                } else {
                    e.base.to_string()
                }
            })
            .collect();
        for x in &prefix {
            write!(f, "{x} ")?;
        }
        write!(f, "({})^ω", cycle.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denote_examples() {
        let nat = AffineLassoWord::new(vec![], vec![CycleEntry::drifting(0)], 1);
        assert_eq!(nat.denote(7), 7);
        let w = AffineLassoWord::new(vec![9], vec![CycleEntry::fixed(4)], 0);
        assert_eq!(w.denote(3), 4);
        let w = AffineLassoWord::new(
            vec![],
            vec![CycleEntry::fixed(1), CycleEntry::drifting(2)],
            3,
        );
        assert_eq!(w.take(6), vec![1, 2, 1, 5, 1, 8]);
    }

    #[test]
    fn json_roundtrip() {
        let w = AffineLassoWord::new(vec![3], vec![CycleEntry::drifting(0)], 2);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<AffineLassoWord>(&s).unwrap(), w);
    }
}
