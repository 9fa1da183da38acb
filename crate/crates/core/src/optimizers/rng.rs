use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How stochastic methods pick a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    WithReplacement,
    /// A fresh random permutation every pass over the components.
    WithoutReplacement,
}

/// Random stream owned by one run. Seeded only by the run seed, so the
/// draws of a run do not depend on which worker executes it.
#[derive(Debug, Clone)]
pub struct StreamRng {
    rng: ChaCha8Rng,
    perm: Vec<usize>,
    pos: usize,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        StreamRng {
            rng: ChaCha8Rng::seed_from_u64(seed),
            perm: Vec::new(),
            pos: 0,
        }
    }

    /// Uniform index in `0..n`.
    pub fn uniform(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn component(&mut self, n: usize, sampling: Sampling) -> usize {
        match sampling {
            Sampling::WithReplacement => self.uniform(n),
            Sampling::WithoutReplacement => {
                if self.perm.len() != n || self.pos == n {
                    self.perm = (0..n).collect();
                    self.perm.shuffle(&mut self.rng);
                    self.pos = 0;
                }
                self.pos += 1;
                self.perm[self.pos - 1]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn without_replacement_covers_each_pass() {
        let mut r = StreamRng::new(7);
        for _ in 0..5 {
            let mut pass: Vec<usize> = (0..6)
                .map(|_| r.component(6, Sampling::WithoutReplacement))
                .collect();
            pass.sort();
            assert_eq!(pass, (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<usize> = {
            let mut r = StreamRng::new(3);
            (0..20).map(|_| r.uniform(10)).collect()
        };
        let mut r = StreamRng::new(3);
        assert_eq!(a, (0..20).map(|_| r.uniform(10)).collect::<Vec<_>>());
    }
}
