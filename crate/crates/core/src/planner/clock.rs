/*
Copyright 2026 The tcbirrt Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
use core::cell::Cell;

/// Time source for planner deadlines.
///
/// The planner reports the work it performs through [`Clock::charge`];
/// wall clocks ignore it, deterministic clocks advance on it.
pub trait Clock {
    /// Seconds since planning started.
    fn elapsed(&self) -> f64;

    fn charge(&self, _ik_iterations: usize, _collision_checks: usize) {}
}

/// Deterministic clock that converts counted work into nominal seconds.
#[derive(Debug)]
pub struct WorkClock {
    ik_iteration_cost: f64,
    collision_check_cost: f64,
    spent: Cell<f64>,
}

impl WorkClock {
    pub fn new(ik_iteration_cost: f64, collision_check_cost: f64) -> Self {
        Self {
            ik_iteration_cost,
            collision_check_cost,
            spent: Cell::new(0.0),
        }
    }
}

impl Default for WorkClock {
    /// Costs roughly matching an optimized build on a desktop core.
    fn default() -> Self {
        Self::new(1.0e-5, 2.0e-6)
    }
}

impl Clock for WorkClock {
    fn elapsed(&self) -> f64 {
        self.spent.get()
    }

    fn charge(&self, ik_iterations: usize, collision_checks: usize) {
        let dt = ik_iterations as f64 * self.ik_iteration_cost
            + collision_checks as f64 * self.collision_check_cost;
        self.spent.set(self.spent.get() + dt);
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn elapsed(&self) -> f64 {
        (**self).elapsed()
    }

    fn charge(&self, ik_iterations: usize, collision_checks: usize) {
        (**self).charge(ik_iterations, collision_checks)
    }
}

/// Monotonic wall clock started at construction.
#[cfg(feature = "std")]
#[derive(Debug)]
pub struct WallClock(std::time::Instant);

#[cfg(feature = "std")]
impl WallClock {
    pub fn start() -> Self {
        Self(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
