use rand::Rng;
use serde::{Deserialize, Serialize};

/// Draw-without-replacement over `n` surface indices, refilled on exhaustion.
///
/// The first draw after a refill never repeats the final draw of the previous
/// cycle (when there are at least two surfaces), so consecutive draws always
/// differ while every cycle stays an exact permutation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleBag {
    remaining: Vec<usize>,
    last_drawn: Option<usize>,
}

impl ShuffleBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    pub fn last_drawn(&self) -> Option<usize> {
        self.last_drawn
    }

    /// Draws the next surface index in `0..n`. Panics if `n == 0`.
    pub fn draw<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> usize {
        assert!(n > 0, "shuffle bag over an empty surface set");
        // surfaces may shrink after a content reload
        self.remaining.retain(|&i| i < n);
        if self.last_drawn.is_some_and(|i| i >= n) {
            self.last_drawn = None;
        }
        let refilled = self.remaining.is_empty();
        if refilled {
            self.remaining = (0..n).collect();
        }
        let pos = match self.last_drawn {
            Some(last) if refilled && n >= 2 => {
                let candidates: Vec<usize> = (0..self.remaining.len())
                    .filter(|&p| self.remaining[p] != last)
                    .collect();
                candidates[rng.random_range(0..candidates.len())]
            }
            _ => rng.random_range(0..self.remaining.len()),
        };
        let drawn = self.remaining.swap_remove(pos);
        self.last_drawn = Some(drawn);
        drawn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_draws_are_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut bag = ShuffleBag::new();
        let mut seen: Vec<usize> = (0..3).map(|_| bag.draw(3, &mut rng)).collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn six_draws_hit_each_twice() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut bag = ShuffleBag::new();
        let mut counts = [0; 3];
        for _ in 0..6 {
            counts[bag.draw(3, &mut rng)] += 1;
        }
        assert_eq!(counts, [2, 2, 2]);
    }

    #[test]
    fn single_surface_always_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut bag = ShuffleBag::new();
        assert!((0..5).all(|_| bag.draw(1, &mut rng) == 0));
    }

    #[test]
    fn shrinking_surface_set_keeps_indices_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut bag = ShuffleBag::new();
        bag.draw(5, &mut rng);
        for _ in 0..10 {
            assert!(bag.draw(2, &mut rng) < 2);
        }
    }
}
