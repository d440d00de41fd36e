//! Tabular action-value function keyed by exact feature-vector bits.

use std::collections::HashMap;

/// Q-table mapping a state (hashed by the bit patterns of its features) to
/// one value per action. Unseen states read as all-zero rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TabularQ {
    num_actions: usize,
    table: HashMap<Vec<u64>, Vec<f64>>,
}

fn key(state: &[f64]) -> Vec<u64> {
    state.iter().map(|x| x.to_bits()).collect()
}

impl TabularQ {
    pub fn new(num_actions: usize) -> Self {
        assert!(num_actions > 0);
        TabularQ {
            num_actions,
            table: HashMap::new(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        self.table
            .get(&key(state))
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.num_actions])
    }

    /// `Q(s, a) += lr * (target - Q(s, a))`; creates the row on first touch.
    pub fn nudge(&mut self, state: &[f64], action: usize, target: f64, lr: f64) {
        assert!(action < self.num_actions);
        let row = self
            .table
            .entry(key(state))
            .or_insert_with(|| vec![0.0; self.num_actions]);
        row[action] += lr * (target - row[action]);
    }

    /// Entries sorted by state key, for byte-stable serialization.
    pub fn sorted_entries(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut keys: Vec<&Vec<u64>> = self.table.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|k| {
                (
                    k.iter().map(|&b| f64::from_bits(b)).collect(),
                    self.table[k].clone(),
                )
            })
            .collect()
    }

    pub fn insert_row(&mut self, state: &[f64], row: Vec<f64>) {
        assert_eq!(row.len(), self.num_actions);
        self.table.insert(key(state), row);
    }

    /// Feature dimension of stored keys, if any state has been seen.
    pub fn feature_dim(&self) -> Option<usize> {
        self.table.keys().next().map(|k| k.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unseen_state_reads_zero_row() {
        let q = TabularQ::new(3);
        assert_eq!(q.q_values(&[1.0, 2.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn nudge_moves_halfway_at_half_learning_rate() {
        let mut q = TabularQ::new(2);
        q.nudge(&[0.0], 1, 10.0, 0.5);
        assert_eq!(q.q_values(&[0.0]), vec![0.0, 5.0]);
    }

    #[test]
    fn distinct_feature_bits_are_distinct_states() {
        let mut q = TabularQ::new(1);
        q.nudge(&[0.5], 0, 1.0, 1.0);
        assert_eq!(q.q_values(&[0.5]), vec![1.0]);
        assert_eq!(q.q_values(&[0.25]), vec![0.0]);
    }

    #[test]
    fn sorted_entries_round_trip() {
        let mut q = TabularQ::new(2);
        q.nudge(&[2.0], 0, 1.0, 1.0);
        q.nudge(&[1.0], 1, -3.0, 1.0);
        let entries = q.sorted_entries();
        let mut q2 = TabularQ::new(2);
        for (state, row) in entries {
            q2.insert_row(&state, row);
        }
        assert_eq!(q, q2);
    }
}
