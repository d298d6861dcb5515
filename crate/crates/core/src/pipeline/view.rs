use crate::error::{check_dim, Error, Result};

/// The controller's possibly stale copy `z_t` of every node's measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredView {
    n_nodes: usize,
    dim: usize,
    values: Vec<f64>,
    /// Steps since the node last transmitted; `None` before its first send.
    age: Vec<Option<usize>>,
}

impl StoredView {
    pub fn new(n_nodes: usize, dim: usize) -> Self {
        Self {
            n_nodes,
            dim,
            values: vec![0.0; n_nodes * dim],
            age: vec![None; n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies one node's decision for the current step. Call once per node
    /// per step.
    pub fn observe(&mut self, node: usize, transmitted: bool, x: &[f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        if transmitted {
            self.values[node * self.dim..(node + 1) * self.dim].copy_from_slice(x);
            self.age[node] = Some(0);
        } else {
            match &mut self.age[node] {
                Some(a) => *a += 1,
                None => {
                    return Err(Error::invalid(format!(
                        "node {node} stayed silent before its first transmission"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    /// Row-major `N × d` values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn age(&self, node: usize) -> Option<usize> {
        self.age[node]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_age_and_value() {
        let mut v = StoredView::new(2, 1);
        v.observe(0, true, &[0.3]).unwrap();
        v.observe(1, true, &[0.5]).unwrap();
        v.observe(0, false, &[0.9]).unwrap();
        v.observe(1, true, &[0.6]).unwrap();
        assert_eq!(v.row(0), &[0.3]);
        assert_eq!(v.age(0), Some(1));
        assert_eq!(v.row(1), &[0.6]);
        assert_eq!(v.age(1), Some(0));
    }

    #[test]
    fn silence_before_first_send_is_rejected() {
        let mut v = StoredView::new(1, 2);
        assert!(v.observe(0, false, &[0.1, 0.2]).is_err());
        assert!(v.observe(0, true, &[0.1]).is_err());
    }
}
