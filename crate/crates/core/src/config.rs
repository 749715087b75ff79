//! Simulation parameters.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::Seconds;

/// When an order counts as completed for the timeout objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompletionSemantics {
    /// Arrival of the vehicle at the stop that delivers the order's last item.
    Arrival,
    /// The order's last item finishes unloading.
    #[default]
    UnloadDone,
}

/// Where per-item load/unload times come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ServiceTimes {
    /// `omega * demand` per item.
    #[default]
    Omega,
    /// The order table's `load_time`/`unload_time`, spread over items by demand.
    OrderTable,
}

/// Work-shift window, in seconds since midnight. `start < end <= 86400`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftWindow {
    pub start: Seconds,
    pub end: Seconds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub epoch_length: Seconds,
    pub epochs_per_day: u32,
    pub dock_approach_time: Seconds,
    /// Seconds per standard pallet for loading and unloading.
    pub omega: Seconds,
    pub lambda: f64,
    /// An order left unassigned longer than this aborts the run.
    pub dispatch_deadline: Seconds,
    /// Wall-clock seconds an algorithm may spend on one round.
    pub algorithm_time_limit: u64,
    pub rng_seed: u64,
    pub completion: CompletionSemantics,
    pub service_times: ServiceTimes,
    /// Unix timestamp of simulation time 0, used at the file boundary.
    pub horizon_start_unix: i64,
    /// Hard stop for runs that never finish.
    pub max_epochs: u32,
    /// Dock work shifts shared by all factories; `None` means always open.
    pub work_shifts: Option<Vec<ShiftWindow>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            epoch_length: 600,
            epochs_per_day: 144,
            dock_approach_time: 1800,
            omega: 180,
            lambda: 10_000.0,
            dispatch_deadline: 14_400,
            algorithm_time_limit: 600,
            rng_seed: 0,
            completion: CompletionSemantics::UnloadDone,
            service_times: ServiceTimes::Omega,
            // 2021-06-01T00:00:00Z
            horizon_start_unix: 1_622_505_600,
            max_epochs: 144 * 7,
            work_shifts: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("work shift window {0}..{1} is not inside one day")]
    BadShift(Seconds, Seconds),
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("epoch_length", self.epoch_length),
            ("dock_approach_time", self.dock_approach_time),
            ("omega", self.omega),
            ("dispatch_deadline", self.dispatch_deadline),
        ];
        for (name, v) in positive {
            if v <= 0 {
                return Err(ConfigError::NonPositive(name));
            }
        }
        if self.epochs_per_day == 0 {
            return Err(ConfigError::NonPositive("epochs_per_day"));
        }
        if self.max_epochs == 0 {
            return Err(ConfigError::NonPositive("max_epochs"));
        }
        if self.algorithm_time_limit == 0 {
            return Err(ConfigError::NonPositive("algorithm_time_limit"));
        }
        if !(self.lambda > 0.0) {
            return Err(ConfigError::NonPositive("lambda"));
        }
        if let Some(shifts) = &self.work_shifts {
            if shifts.is_empty() {
                return Err(ConfigError::NonPositive("work_shifts"));
            }
            for w in shifts {
                if !(0 <= w.start && w.start < w.end && w.end <= 86_400) {
                    return Err(ConfigError::BadShift(w.start, w.end));
                }
            }
        }
        Ok(())
    }

    pub fn to_unix(&self, t: Seconds) -> i64 {
        self.horizon_start_unix + t
    }

    pub fn from_unix(&self, unix: i64) -> Seconds {
        unix - self.horizon_start_unix
    }

    /// Earliest time `>= t` at which docks are open.
    pub fn next_shift_open(&self, t: Seconds) -> Seconds {
        let Some(shifts) = &self.work_shifts else {
            return t;
        };
        let day = t.div_euclid(86_400);
        let tod = t.rem_euclid(86_400);
        let mut best: Option<Seconds> = None;
        for w in shifts {
            let candidate = if tod < w.start {
                day * 86_400 + w.start
            } else if tod < w.end {
                t
            } else {
                (day + 1) * 86_400 + w.start
            };
            best = Some(best.map_or(candidate, |b| b.min(candidate)));
        }
        best.unwrap_or(t)
    }
}
