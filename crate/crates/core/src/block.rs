//! Weight tables over the `(author, topic)` block of one token and the
//! categorical draw from them.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum TopicChoice {
    Existing(usize),
    /// A topic not yet in use (HDP only).
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Cell {
    pub author: usize,
    pub topic: TopicChoice,
    pub weight: f64,
}

/// Unnormalized weights for every admissible `(author, topic)` pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockWeights {
    pub cells: Vec<Cell>,
}

impl BlockWeights {
    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    pub fn get(&self, author: usize, topic: TopicChoice) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.author == author && c.topic == topic)
            .map(|c| c.weight)
    }

    /// Normalized probabilities in cell order.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total();
        self.cells.iter().map(|c| c.weight / total).collect()
    }

    /// Draws one cell with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Cell {
        let total = self.total();
        debug_assert!(total > 0.0 && total.is_finite(), "degenerate block weights");
        let mut u = rng.random::<f64>() * total;
        for cell in &self.cells {
            if u < cell.weight {
                return *cell;
            }
            u -= cell.weight;
        }
        // rounding left u just above the last cumulative weight
        *self
            .cells
            .iter()
            .rev()
            .find(|c| c.weight > 0.0)
            .expect("at least one positive weight")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn sample_frequencies_follow_weights() {
        let w = BlockWeights {
            cells: vec![
                Cell { author: 0, topic: TopicChoice::Existing(0), weight: 1.0 },
                Cell { author: 0, topic: TopicChoice::Existing(1), weight: 0.0 },
                Cell { author: 1, topic: TopicChoice::New, weight: 3.0 },
            ],
        };
        let mut rng = seeded(17);
        let n = 40_000;
        let mut hits = [0usize; 3];
        for _ in 0..n {
            let c = w.sample(&mut rng);
            let idx = w.cells.iter().position(|x| x == &c).unwrap();
            hits[idx] += 1;
        }
        assert_eq!(hits[1], 0);
        let p0 = hits[0] as f64 / n as f64;
        assert!((p0 - 0.25).abs() < 0.01, "p0 = {p0}");
    }
}
