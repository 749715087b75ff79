use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FactoryId;
use crate::Seconds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factory {
    pub id: FactoryId,
    pub longitude: f64,
    pub latitude: f64,
    /// Number of loading/unloading docks (`port_num`).
    pub dock_count: u32,
}

/// One row of the route map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteEdge {
    pub route_code: String,
    pub from: FactoryId,
    pub to: FactoryId,
    /// Kilometres.
    pub distance: f64,
    pub travel_time: Seconds,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("no factories")]
    Empty,
    #[error("duplicate factory {0}")]
    DuplicateFactory(String),
    #[error("factory {0} has no docks")]
    NoDocks(String),
    #[error("route references unknown factory {0}")]
    UnknownFactory(String),
    #[error("duplicate route {0} -> {1}")]
    DuplicateRoute(String, String),
    #[error("negative distance or time on route {0} -> {1}")]
    NegativeRoute(String, String),
    #[error("incomplete graph: no route {0} -> {1}")]
    Incomplete(String, String),
}

/// Complete directed graph over the factories with a distance and a travel
/// time on every ordered pair. Self-pairs are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadNetwork {
    factories: Vec<Factory>,
    index: BTreeMap<FactoryId, usize>,
    distance: Vec<f64>,
    travel_time: Vec<Seconds>,
    route_code: Vec<String>,
}

impl RoadNetwork {
    pub fn new(factories: Vec<Factory>, edges: Vec<RouteEdge>) -> Result<Self, NetworkError> {
        if factories.is_empty() {
            return Err(NetworkError::Empty);
        }
        let mut index = BTreeMap::new();
        for (k, f) in factories.iter().enumerate() {
            if f.dock_count == 0 {
                return Err(NetworkError::NoDocks(f.id.0.clone()));
            }
            if index.insert(f.id.clone(), k).is_some() {
                return Err(NetworkError::DuplicateFactory(f.id.0.clone()));
            }
        }
        let n = factories.len();
        let mut distance = vec![0.0; n * n];
        let mut travel_time = vec![0; n * n];
        let mut route_code = vec![String::new(); n * n];
        let mut present = vec![false; n * n];
        for e in edges {
            let a = *index.get(&e.from).ok_or_else(|| NetworkError::UnknownFactory(e.from.0.clone()))?;
            let b = *index.get(&e.to).ok_or_else(|| NetworkError::UnknownFactory(e.to.0.clone()))?;
            if !(e.distance >= 0.0) || e.travel_time < 0 {
                return Err(NetworkError::NegativeRoute(e.from.0, e.to.0));
            }
            if a == b {
                continue;
            }
            let k = a * n + b;
            if present[k] {
                return Err(NetworkError::DuplicateRoute(e.from.0, e.to.0));
            }
            present[k] = true;
            distance[k] = e.distance;
            travel_time[k] = e.travel_time;
            route_code[k] = e.route_code;
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && !present[a * n + b] {
                    return Err(NetworkError::Incomplete(factories[a].id.0.clone(), factories[b].id.0.clone()));
                }
            }
        }
        Ok(Self { factories, index, distance, travel_time, route_code })
    }

    pub fn factories(&self) -> &[Factory] {
        &self.factories
    }

    pub fn len(&self) -> usize {
        self.factories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factories.is_empty()
    }

    pub fn index_of(&self, id: &FactoryId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &FactoryId) -> bool {
        self.index.contains_key(id)
    }

    pub fn factory(&self, idx: usize) -> &Factory {
        &self.factories[idx]
    }

    pub fn factory_by_id(&self, id: &FactoryId) -> Option<&Factory> {
        self.index_of(id).map(|k| &self.factories[k])
    }

    pub fn distance_idx(&self, a: usize, b: usize) -> f64 {
        self.distance[a * self.factories.len() + b]
    }

    pub fn travel_time_idx(&self, a: usize, b: usize) -> Seconds {
        self.travel_time[a * self.factories.len() + b]
    }

    pub fn distance(&self, a: &FactoryId, b: &FactoryId) -> Option<f64> {
        Some(self.distance_idx(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn travel_time(&self, a: &FactoryId, b: &FactoryId) -> Option<Seconds> {
        Some(self.travel_time_idx(self.index_of(a)?, self.index_of(b)?))
    }

    /// All off-diagonal edges, ordered by (from, to) factory position.
    pub fn edges(&self) -> impl Iterator<Item = RouteEdge> + '_ {
        let n = self.factories.len();
        (0..n).flat_map(move |a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).map(move |(a, b)| {
            let k = a * n + b;
            RouteEdge {
                route_code: self.route_code[k].clone(),
                from: self.factories[a].id.clone(),
                to: self.factories[b].id.clone(),
                distance: self.distance[k],
                travel_time: self.travel_time[k],
            }
        })
    }

    pub fn max_travel_time(&self) -> Seconds {
        self.travel_time.iter().copied().max().unwrap_or(0)
    }
}
