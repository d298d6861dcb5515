//! Per-node transmit/stay-silent decisions under a long-run frequency budget.
//!
//! Each node keeps a virtual queue `Q` that grows by `1 - B` on every
//! transmission and shrinks by `B` on every silent step. At step `t` the node
//! compares the staleness penalty it would incur by staying silent, weighted
//! by `V_t = V_0 (t + 1)^γ`, against the queue pressure, and transmits iff
//! `Q < V_t · F(0)`.

use crate::error::{check_dim, Error, Result};

/// Budget and controller constants for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterParams {
    /// Long-run fraction of steps the node may transmit, in `(0, 1]`.
    pub budget: f64,
    pub v0: f64,
    pub gamma: f64,
    /// Clamp the queue at zero after each update. Off by default.
    pub project_queue: bool,
}

impl Default for TransmitterParams {
    fn default() -> Self {
        Self {
            budget: 0.3,
            v0: 1e-12,
            gamma: 0.65,
            project_queue: false,
        }
    }
}

impl TransmitterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0 && self.budget <= 1.0) {
            return Err(Error::invalid(format!(
                "budget must lie in (0,1], got {}",
                self.budget
            )));
        }
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return Err(Error::invalid(format!("v0 must be positive, got {}", self.v0)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid(format!(
                "gamma must lie in (0,1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Outcome of [`TransmitterState::decide`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionDecision {
    pub transmit: bool,
    /// `F(0)`: mean squared gap between the held value and the current one.
    pub penalty_if_silent: f64,
    pub v_t: f64,
}

/// One node's agent state. Owned by exactly one agent; `Send` so agents can
/// be stepped on worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterState {
    params: TransmitterParams,
    dim: usize,
    queue: f64,
    last_sent: Option<Vec<f64>>,
    last_sent_step: Option<usize>,
    sent_count: usize,
    elapsed: usize,
}

impl TransmitterState {
    pub fn new(params: TransmitterParams, dim: usize) -> Result<Self> {
        params.validate()?;
        if dim == 0 {
            return Err(Error::invalid("measurement dimension must be positive"));
        }
        Ok(Self {
            params,
            dim,
            queue: 0.0,
            last_sent: None,
            last_sent_step: None,
            sent_count: 0,
            elapsed: 0,
        })
    }

    pub fn params(&self) -> &TransmitterParams {
        &self.params
    }

    pub fn queue(&self) -> f64 {
        self.queue
    }

    /// The value the controller currently holds for this node.
    pub fn last_sent(&self) -> Option<&[f64]> {
        self.last_sent.as_deref()
    }

    pub fn last_sent_step(&self) -> Option<usize> {
        self.last_sent_step
    }

    pub fn sent_count(&self) -> usize {
        self.sent_count
    }

    pub fn elapsed(&self) -> usize {
        self.elapsed
    }

    /// `sent_count / elapsed`, or 0 before the first step.
    pub fn frequency(&self) -> f64 {
        if self.elapsed == 0 {
            0.0
        } else {
            self.sent_count as f64 / self.elapsed as f64
        }
    }

    /// Chooses β for step `t` (1-based) without mutating state.
    ///
    /// The very first decision is always a transmission: nothing is held
    /// at the controller yet.
    pub fn decide(&self, x: &[f64], t: usize) -> Result<TransmissionDecision> {
        check_dim(self.dim, x.len())?;
        let v_t = v_schedule(self.params.v0, self.params.gamma, t)?;
        let Some(held) = self.last_sent.as_deref() else {
            return Ok(TransmissionDecision {
                transmit: true,
                penalty_if_silent: 0.0,
                v_t,
            });
        };
        let f0 = penalty(held, x)?;
        Ok(TransmissionDecision {
            transmit: transmit_rule(self.queue, v_t, f0),
            penalty_if_silent: f0,
            v_t,
        })
    }

    /// Applies β: advances the virtual queue by `β - B` and, when
    /// transmitting, records `x` as the held value.
    pub fn update_queue(&mut self, transmit: bool, x: &[f64], t: usize) -> Result<()> {
        check_dim(self.dim, x.len())?;
        let beta = if transmit { 1.0 } else { 0.0 };
        self.queue += beta - self.params.budget;
        if self.params.project_queue {
            self.queue = self.queue.max(0.0);
        }
        if transmit {
            self.sent_count += 1;
            self.last_sent_step = Some(t);
            match &mut self.last_sent {
                Some(held) => held.copy_from_slice(x),
                None => self.last_sent = Some(x.to_vec()),
            }
        }
        self.elapsed += 1;
        Ok(())
    }

    /// [`decide`](Self::decide) followed by [`update_queue`](Self::update_queue).
    pub fn step(&mut self, x: &[f64], t: usize) -> Result<TransmissionDecision> {
        let decision = self.decide(x, t)?;
        self.update_queue(decision.transmit, x, t)?;
        Ok(decision)
    }

    /// Records an externally scheduled transmission choice (uniform baseline)
    /// while keeping the queue bookkeeping.
    pub fn force(&mut self, transmit: bool, x: &[f64], t: usize) -> Result<()> {
        self.update_queue(transmit, x, t)
    }
}

/// `F(0) = ‖held − x‖² / d`.
pub fn penalty(held: &[f64], x: &[f64]) -> Result<f64> {
    check_dim(held.len(), x.len())?;
    if x.is_empty() {
        return Err(Error::invalid("empty measurement"));
    }
    let sq: f64 = held.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sq / x.len() as f64)
}

/// `V_t = V_0 · (t + 1)^γ`.
pub fn v_schedule(v0: f64, gamma: f64, t: usize) -> Result<f64> {
    if !(v0.is_finite() && v0 > 0.0) {
        return Err(Error::invalid(format!("v0 must be positive, got {v0}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0,1), got {gamma}")));
    }
    if t == 0 {
        return Err(Error::invalid("time steps start at 1"));
    }
    Ok(v0 * ((t + 1) as f64).powf(gamma))
}

/// Closed form of the two-branch minimization; ties stay silent.
#[inline]
pub fn transmit_rule(queue: f64, v_t: f64, penalty_if_silent: f64) -> bool {
    queue < v_t * penalty_if_silent
}

/// Evaluates both branches of `V_t·F(β) + Q·(β − B)` and returns whether
/// β = 1 is the strict minimizer.
pub fn transmit_by_objective(queue: f64, v_t: f64, penalty_if_silent: f64, budget: f64) -> bool {
    let silent = v_t * penalty_if_silent + queue * (0.0 - budget);
    let send = queue * (1.0 - budget);
    send < silent
}

/// Fixed-interval baseline: transmit iff `⌊tB⌋ > ⌊(t−1)B⌋`, so exactly
/// `⌊TB⌋` of the first `T` steps transmit.
pub fn uniform_schedule(budget: f64, t: usize) -> bool {
    if t == 0 {
        return false;
    }
    (t as f64 * budget).floor() > ((t - 1) as f64 * budget).floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn state_with(queue: f64, held: &[f64], budget: f64) -> TransmitterState {
        let mut s = TransmitterState::new(
            TransmitterParams {
                budget,
                ..TransmitterParams::default()
            },
            held.len(),
        )
        .unwrap();
        s.last_sent = Some(held.to_vec());
        s.queue = queue;
        s
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_relative_eq!(penalty(&[0.2], &[0.5]).unwrap(), 0.09, epsilon = 1e-15);
        assert_relative_eq!(
            penalty(&[0.1, 0.9], &[0.4, 0.5]).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        assert!(matches!(
            penalty(&[0.1], &[0.1, 0.2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn v_schedule_examples() {
        // 2^0.65 = exp(0.65 ln 2)
        let expected = 1e-12 * (0.65f64 * std::f64::consts::LN_2).exp();
        assert_relative_eq!(v_schedule(1e-12, 0.65, 1).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(v_schedule(1e-12, 0.65, 1).unwrap(), 1.5692e-12, max_relative = 1e-4);
        assert_eq!(v_schedule(1.0, 0.5, 3).unwrap(), 2.0);
        assert!(v_schedule(0.0, 0.5, 3).is_err());
        assert!(v_schedule(1.0, 1.0, 3).is_err());
        assert!(v_schedule(1.0, 0.5, 0).is_err());
    }

    #[test]
    fn v_schedule_is_strictly_increasing() {
        let mut prev = 0.0;
        for t in 1..1000 {
            let v = v_schedule(1e-12, 0.65, t).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn decision_examples() {
        // Q=1.5, V_t=2, F(0)=1 -> transmit
        assert!(transmit_rule(1.5, 2.0, 1.0));
        assert!(transmit_by_objective(1.5, 2.0, 1.0, 0.3));
        // tie at zero stays silent
        assert!(!transmit_rule(0.0, 2.0, 0.0));
        assert!(!transmit_by_objective(0.0, 2.0, 0.0, 0.3));
        // Q=5, V_t=2, F(0)=1, B=0.3: silent objective 2 - 1.5 = 0.5 vs send 3.5
        assert!(!transmit_rule(5.0, 2.0, 1.0));
        assert!(!transmit_by_objective(5.0, 2.0, 1.0, 0.3));
    }

    #[test]
    fn first_step_always_transmits() {
        let s = TransmitterState::new(TransmitterParams::default(), 2).unwrap();
        let d = s.decide(&[0.1, 0.2], 1).unwrap();
        assert!(d.transmit);
    }

    #[test]
    fn decide_uses_held_value() {
        let s = state_with(0.0, &[0.2], 0.3);
        let d = s.decide(&[0.5], 4).unwrap();
        assert_relative_eq!(d.penalty_if_silent, 0.09, epsilon = 1e-15);
        assert!(d.transmit);
        let s = state_with(0.0, &[0.5], 0.3);
        assert!(!s.decide(&[0.5], 4).unwrap().transmit);
        assert!(s.decide(&[0.5, 0.1], 4).is_err());
    }

    #[test]
    fn queue_update_examples() {
        let mut s = state_with(0.0, &[0.0], 0.3);
        s.update_queue(true, &[0.4], 1).unwrap();
        assert_relative_eq!(s.queue(), 0.7, epsilon = 1e-15);
        assert_eq!(s.last_sent(), Some(&[0.4][..]));
        assert_eq!(s.last_sent_step(), Some(1));
        s.update_queue(false, &[0.9], 2).unwrap();
        assert_relative_eq!(s.queue(), 0.4, epsilon = 1e-15);
        assert_eq!(s.last_sent(), Some(&[0.4][..]));
        assert_eq!(s.sent_count(), 1);

        let mut s = state_with(0.0, &[0.0], 0.3);
        for t in 1..=10 {
            s.update_queue(false, &[0.0], t).unwrap();
        }
        assert_relative_eq!(s.queue(), -3.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_keeps_queue_nonnegative() {
        let mut s = TransmitterState::new(
            TransmitterParams {
                project_queue: true,
                ..TransmitterParams::default()
            },
            1,
        )
        .unwrap();
        for t in 1..=5 {
            s.update_queue(false, &[0.0], t).unwrap();
        }
        assert_eq!(s.queue(), 0.0);
    }

    #[test]
    fn uniform_schedule_examples() {
        assert!((1..100).all(|t| uniform_schedule(1.0, t)));
        let half: Vec<bool> = (1..=6).map(|t| uniform_schedule(0.5, t)).collect();
        assert_eq!(half, vec![false, true, false, true, false, true]);
        assert_eq!((1..=10).filter(|&t| uniform_schedule(0.3, t)).count(), 3);
    }

    #[test]
    fn rising_queue_eventually_silences() {
        let s = state_with(0.0, &[0.0], 0.3);
        let x = [0.8];
        let v_t = v_schedule(1.0, 0.5, 10).unwrap();
        let f0 = penalty(s.last_sent().unwrap(), &x).unwrap();
        let mut q = -1.0;
        let mut flipped = false;
        while q < 10.0 {
            if !transmit_rule(q, v_t, f0) {
                flipped = true;
                break;
            }
            q += 0.1;
        }
        assert!(flipped);
    }

    #[test]
    fn rejects_bad_params() {
        for budget in [0.0, -0.1, 1.5] {
            let p = TransmitterParams {
                budget,
                ..TransmitterParams::default()
            };
            assert!(TransmitterState::new(p, 1).is_err());
        }
    }
}
