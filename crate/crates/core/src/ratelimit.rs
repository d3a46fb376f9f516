//! Replenishing rate limiter shared by the standards that throttle flows.
//!
//! Capacity refills linearly: a limiter with limit `L` and window `W` regains
//! `L·Δt/W` units (floor division) over `Δt` idle ticks, capped at `L`.
//! Queries are pure; state is written back only when capacity is actually
//! consumed or the limiter is reconfigured, so repeated queries never drift
//! the floor-division remainder.

use serde::{Deserialize, Serialize};

use crate::chain::{Amount, Tick};
use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateLimitState {
    /// Maximum capacity; also the amount replenished per full window.
    limit: Amount,
    /// Capacity as of `last_update`.
    capacity: Amount,
    /// Ticks for a full refill from zero. Always at least 1.
    window: Tick,
    last_update: Tick,
}

impl RateLimitState {
    /// Fresh limiter starting at full capacity.
    pub fn new(limit: Amount, window: Tick, now: Tick) -> SimResult<Self> {
        if window == 0 {
            return Err(SimError::Config(
                "rate limit window must be at least 1 tick".into(),
            ));
        }
        Ok(Self {
            limit,
            capacity: limit,
            window,
            last_update: now,
        })
    }

    pub fn limit(&self) -> Amount {
        self.limit
    }

    pub fn window(&self) -> Tick {
        self.window
    }

    /// Replenished capacity as of `now`. Pure.
    pub fn current(&self, now: Tick) -> Amount {
        let dt = now.saturating_sub(self.last_update) as u128;
        // limit·dt can exceed u128 only when the true replenishment already
        // covers a full window, so saturation collapses into the cap.
        let replenished = match self.limit.checked_mul(dt) {
            Some(product) => product / self.window as u128,
            None => self.limit,
        };
        self.capacity.saturating_add(replenished).min(self.limit)
    }

    /// Consume `amount` of capacity, or fail with the exact capacity that was
    /// available. State is untouched on failure.
    pub fn try_consume(&mut self, now: Tick, amount: Amount) -> SimResult<()> {
        let available = self.current(now);
        if amount > available {
            return Err(SimError::RateLimited {
                capacity: available,
                requested: amount,
            });
        }
        self.capacity = available - amount;
        self.last_update = now;
        Ok(())
    }

    /// Replace limit and window. Replenishment is settled first, then the
    /// carried capacity is clamped to the new limit; raising the limit does
    /// not grant instant capacity.
    pub fn reconfigure(&mut self, limit: Amount, window: Tick, now: Tick) -> SimResult<()> {
        if window == 0 {
            return Err(SimError::Config(
                "rate limit window must be at least 1 tick".into(),
            ));
        }
        let settled = self.current(now);
        self.limit = limit;
        self.window = window;
        self.capacity = settled.min(limit);
        self.last_update = now;
        Ok(())
    }
}

/// Upper bound on total consumption over an interval of `interval` ticks for
/// a limiter that never changes configuration: the full starting capacity
/// plus everything that can replenish during the interval.
pub fn consumption_bound(limit: Amount, window: Tick, interval: Tick) -> Amount {
    let replenished = match limit.checked_mul(interval as u128) {
        Some(product) => product / window.max(1) as u128,
        None => return Amount::MAX,
    };
    limit.saturating_add(replenished)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn starts_full_and_exhausts_exactly() {
        let mut rl = RateLimitState::new(100, 100, 0).unwrap();
        assert_eq!(rl.current(0), 100);
        rl.try_consume(0, 60).unwrap();
        rl.try_consume(0, 40).unwrap();
        assert_eq!(rl.current(0), 0);
        assert_eq!(
            rl.try_consume(0, 1),
            Err(SimError::RateLimited {
                capacity: 0,
                requested: 1
            })
        );
    }

    #[test]
    fn linear_replenishment_half_window() {
        let mut rl = RateLimitState::new(100, 100, 0).unwrap();
        rl.try_consume(0, 100).unwrap();
        assert_eq!(rl.current(50), 50);
        rl.try_consume(50, 50).unwrap();
        assert_eq!(rl.current(50), 0);
    }

    #[test]
    fn full_window_fully_refills() {
        let mut rl = RateLimitState::new(77, 100, 0).unwrap();
        rl.try_consume(0, 77).unwrap();
        assert_eq!(rl.current(99), 77 * 99 / 100);
        assert_eq!(rl.current(100), 77);
        assert_eq!(rl.current(100_000), 77);
    }

    #[test]
    fn queries_do_not_drift_remainders() {
        let mut rl = RateLimitState::new(10, 3, 0).unwrap();
        rl.try_consume(0, 10).unwrap();
        // Querying every tick must agree with one query after the fact.
        let step_by_step: Vec<_> = (1..=3).map(|t| rl.current(t)).collect();
        assert_eq!(step_by_step, vec![10 / 3, 20 / 3, 10]);
    }

    #[test]
    fn failed_consume_leaves_state_untouched() {
        let mut rl = RateLimitState::new(100, 100, 0).unwrap();
        rl.try_consume(0, 30).unwrap();
        let before = rl;
        assert!(rl.try_consume(10, 1000).is_err());
        assert_eq!(rl, before);
    }

    #[test]
    fn lowering_limit_clamps_carried_capacity() {
        let mut rl = RateLimitState::new(100, 100, 0).unwrap();
        rl.try_consume(0, 20).unwrap();
        rl.reconfigure(50, 100, 0).unwrap();
        assert_eq!(rl.current(0), 50);
        rl.reconfigure(200, 100, 0).unwrap();
        assert_eq!(rl.current(0), 50);
    }

    #[test]
    fn zero_window_rejected() {
        assert!(RateLimitState::new(1, 0, 0).is_err());
        let mut rl = RateLimitState::new(1, 1, 0).unwrap();
        assert!(rl.reconfigure(1, 0, 0).is_err());
    }

    proptest! {
        // Capacity never exceeds the limit, no matter the query tick.
        #[test]
        fn capacity_bounded_by_limit(
            limit in 0u128..=u128::MAX / 2,
            window in 1u64..=1_000_000,
            spend_frac in 0u8..=100,
            dt in 0u64..=2_000_000,
        ) {
            let mut rl = RateLimitState::new(limit, window, 0).unwrap();
            let spend = limit / 100 * spend_frac as u128;
            rl.try_consume(0, spend).unwrap();
            prop_assert!(rl.current(dt) <= limit);
        }

        // Replenishment matches the closed-form oracle exactly.
        #[test]
        fn replenishment_matches_oracle(
            limit in 1u128..=1u128 << 100,
            window in 1u64..=100_000,
            dt in 0u64..=200_000,
        ) {
            let mut rl = RateLimitState::new(limit, window, 0).unwrap();
            rl.try_consume(0, limit).unwrap();
            let oracle = (limit.saturating_mul(dt as u128) / window as u128).min(limit);
            prop_assert_eq!(rl.current(dt), oracle);
        }
    }
}
