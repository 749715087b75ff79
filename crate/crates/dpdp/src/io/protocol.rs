//! JSON documents exchanged with an external dispatching algorithm.
//!
//! Each round the simulator writes `vehicle_info.json`,
//! `unallocated_order_items.json` and `ongoing_order_items.json`; the
//! algorithm answers with `output_destination.json` (vehicle id to stop or
//! null) and `output_route.json` (vehicle id to list of stops). All times
//! are Unix timestamps.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use dpdp_core::{
    DispatchPlan, FactoryId, ItemId, ItemInfo, ItemStatus, OrderId, PalletType, Quarters, RoadNetwork, SimConfig,
    Snapshot, Stop, VehicleId, VehiclePlan, VehicleView,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VEHICLE_INFO: &str = "vehicle_info.json";
pub const UNALLOCATED_ITEMS: &str = "unallocated_order_items.json";
pub const ONGOING_ITEMS: &str = "ongoing_order_items.json";
pub const OUTPUT_DESTINATION: &str = "output_destination.json";
pub const OUTPUT_ROUTE: &str = "output_route.json";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("{0} is missing")]
    MissingFile(String),
    #[error("{file}: {message}")]
    Io { file: String, message: String },
    #[error("{file} is malformed: {message}")]
    Malformed { file: String, message: String },
    #[error("unknown vehicle {0}")]
    UnknownVehicle(String),
    #[error("unknown factory {0}")]
    UnknownFactory(String),
    #[error("unknown item {0}")]
    UnknownItem(String),
    #[error("item {item}: unknown pallet type {value}")]
    BadPalletType { item: String, value: String },
    #[error("item {item}: demand {value} is not a multiple of a quarter pallet")]
    BadDemand { item: String, value: f64 },
    #[error("item {item}: invalid delivery_state {value}")]
    BadStatus { item: String, value: u8 },
}

/// A stop object, used for destinations and route entries alike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopDoc {
    pub factory_id: String,
    pub lng: f64,
    pub lat: f64,
    pub delivery_item_list: Vec<String>,
    pub pickup_item_list: Vec<String>,
    pub arrive_time: i64,
    pub leave_time: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleDoc {
    pub id: String,
    pub operation_time: u32,
    pub capacity: u32,
    pub update_time: i64,
    /// Empty while in transit.
    pub cur_factory_id: String,
    pub arrive_time_at_current_factory: i64,
    pub leave_time_at_current_factory: i64,
    /// In loading order.
    pub carrying_items: Vec<String>,
    pub destination: Option<StopDoc>,
    /// Accepted stops after the destination. Not part of the original
    /// schema; readers that do not know it ignore it.
    #[serde(default)]
    pub route: Vec<StopDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub pallet_type: String,
    pub order_id: String,
    pub demand: f64,
    pub pickup_factory_id: String,
    pub delivery_factory_id: String,
    pub creation_time: i64,
    pub committed_completion_time: i64,
    pub load_time: i64,
    pub unload_time: i64,
    pub delivery_state: u8,
}

/// The three input documents of one round.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotDocs {
    pub vehicles: Vec<VehicleDoc>,
    pub unallocated: Vec<ItemDoc>,
    pub ongoing: Vec<ItemDoc>,
}

/// The two output documents of one round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DispatchDocs {
    pub destination: BTreeMap<String, Option<StopDoc>>,
    pub route: BTreeMap<String, Vec<StopDoc>>,
}

fn strings<T: ToString>(ids: &[T]) -> Vec<String> {
    ids.iter().map(ToString::to_string).collect()
}

pub fn stop_doc(stop: &Stop, network: &RoadNetwork, config: &SimConfig) -> StopDoc {
    let (lng, lat) = network.factory_by_id(&stop.factory_id).map_or((0.0, 0.0), |f| (f.longitude, f.latitude));
    StopDoc {
        factory_id: stop.factory_id.0.clone(),
        lng,
        lat,
        delivery_item_list: strings(&stop.delivery_items),
        pickup_item_list: strings(&stop.pickup_items),
        arrive_time: config.to_unix(stop.arrive_time),
        leave_time: config.to_unix(stop.leave_time),
    }
}

fn item_doc(item: &ItemInfo, config: &SimConfig) -> ItemDoc {
    ItemDoc {
        id: item.id.0.clone(),
        pallet_type: item.pallet_type.as_str().to_owned(),
        order_id: item.order_id.0.clone(),
        demand: item.demand.as_pallets(),
        pickup_factory_id: item.pickup_factory_id.0.clone(),
        delivery_factory_id: item.delivery_factory_id.0.clone(),
        creation_time: config.to_unix(item.creation_time),
        committed_completion_time: config.to_unix(item.committed_completion_time),
        load_time: item.load_time,
        unload_time: item.unload_time,
        delivery_state: item.status.code(),
    }
}

impl SnapshotDocs {
    pub fn from_snapshot(snapshot: &Snapshot, network: &RoadNetwork, config: &SimConfig) -> Self {
        let vehicles = snapshot
            .vehicles
            .iter()
            .map(|v| VehicleDoc {
                id: v.id.0.clone(),
                operation_time: v.operation_time,
                capacity: v.capacity,
                update_time: config.to_unix(v.update_time),
                cur_factory_id: v.cur_factory_id.as_ref().map_or_else(String::new, |f| f.0.clone()),
                arrive_time_at_current_factory: config.to_unix(v.arrive_time),
                leave_time_at_current_factory: config.to_unix(v.leave_time),
                carrying_items: strings(&v.carrying_items),
                destination: v.destination.as_ref().map(|s| stop_doc(s, network, config)),
                route: v.route.iter().map(|s| stop_doc(s, network, config)).collect(),
            })
            .collect();
        SnapshotDocs {
            vehicles,
            unallocated: snapshot.unallocated_items.iter().map(|i| item_doc(i, config)).collect(),
            ongoing: snapshot.ongoing_items.iter().map(|i| item_doc(i, config)).collect(),
        }
    }

    /// Rebuilds the snapshot. The clock is taken from the vehicles' update
    /// time.
    pub fn to_snapshot(&self, network: &RoadNetwork, config: &SimConfig) -> Result<Snapshot, ProtocolError> {
        let stop = |d: &StopDoc| parse_stop(d, network, config);
        let mut vehicles = Vec::with_capacity(self.vehicles.len());
        for v in &self.vehicles {
            let cur_factory_id = if v.cur_factory_id.is_empty() {
                None
            } else {
                Some(known_factory(&v.cur_factory_id, network)?)
            };
            vehicles.push(VehicleView {
                id: VehicleId::new(v.id.as_str()),
                operation_time: v.operation_time,
                capacity: v.capacity,
                update_time: config.from_unix(v.update_time),
                cur_factory_id,
                arrive_time: config.from_unix(v.arrive_time_at_current_factory),
                leave_time: config.from_unix(v.leave_time_at_current_factory),
                carrying_items: v.carrying_items.iter().map(|i| ItemId::new(i.as_str())).collect(),
                destination: v.destination.as_ref().map(stop).transpose()?,
                route: v.route.iter().map(stop).collect::<Result<_, _>>()?,
            });
        }
        let items = |docs: &[ItemDoc]| docs.iter().map(|d| parse_item(d, network, config)).collect::<Result<Vec<_>, _>>();
        let now = vehicles.iter().map(|v| v.update_time).max().unwrap_or(0);
        Ok(Snapshot { now, vehicles, unallocated_items: items(&self.unallocated)?, ongoing_items: items(&self.ongoing)? })
    }

    pub fn write(&self, dir: &Path) -> Result<(), ProtocolError> {
        write_json(dir, VEHICLE_INFO, &self.vehicles)?;
        write_json(dir, UNALLOCATED_ITEMS, &self.unallocated)?;
        write_json(dir, ONGOING_ITEMS, &self.ongoing)
    }

    pub fn read(dir: &Path) -> Result<Self, ProtocolError> {
        Ok(SnapshotDocs {
            vehicles: read_json(dir, VEHICLE_INFO)?,
            unallocated: read_json(dir, UNALLOCATED_ITEMS)?,
            ongoing: read_json(dir, ONGOING_ITEMS)?,
        })
    }
}

impl DispatchDocs {
    pub fn from_plan(plan: &DispatchPlan, network: &RoadNetwork, config: &SimConfig) -> Self {
        let mut docs = DispatchDocs::default();
        for (id, p) in &plan.vehicles {
            docs.destination.insert(id.0.clone(), p.destination.as_ref().map(|s| stop_doc(s, network, config)));
            docs.route.insert(id.0.clone(), p.route.iter().map(|s| stop_doc(s, network, config)).collect());
        }
        docs
    }

    /// Resolves every id against the snapshot and network. A vehicle named
    /// in only one document gets an empty value for the other.
    pub fn to_plan(&self, snapshot: &Snapshot, network: &RoadNetwork, config: &SimConfig) -> Result<DispatchPlan, ProtocolError> {
        let known_items: BTreeSet<&str> = snapshot
            .items()
            .map(|i| i.id.as_str())
            .chain(snapshot.vehicles.iter().flat_map(|v| v.carrying_items.iter().map(ItemId::as_str)))
            // A stop being served still lists items already unloaded this visit.
            .chain(snapshot.vehicles.iter().flat_map(|v| {
                v.destination.iter().flat_map(|s| s.pickup_items.iter().chain(&s.delivery_items)).map(ItemId::as_str)
            }))
            .collect();
        let stop = |d: &StopDoc| -> Result<Stop, ProtocolError> {
            for item in d.pickup_item_list.iter().chain(&d.delivery_item_list) {
                if !known_items.contains(item.as_str()) {
                    return Err(ProtocolError::UnknownItem(item.clone()));
                }
            }
            parse_stop(d, network, config)
        };
        let mut plan = DispatchPlan::default();
        for id in self.destination.keys().chain(self.route.keys()) {
            let vid = VehicleId::new(id.as_str());
            if snapshot.vehicle(&vid).is_none() {
                return Err(ProtocolError::UnknownVehicle(id.clone()));
            }
            if plan.vehicles.contains_key(&vid) {
                continue;
            }
            let destination = self.destination.get(id).and_then(Option::as_ref).map(stop).transpose()?;
            let route = self.route.get(id).map_or(Ok(Vec::new()), |r| r.iter().map(stop).collect())?;
            plan.vehicles.insert(vid, VehiclePlan { destination, route });
        }
        Ok(plan)
    }

    pub fn write(&self, dir: &Path) -> Result<(), ProtocolError> {
        write_json(dir, OUTPUT_DESTINATION, &self.destination)?;
        write_json(dir, OUTPUT_ROUTE, &self.route)
    }

    pub fn read(dir: &Path) -> Result<Self, ProtocolError> {
        Ok(DispatchDocs { destination: read_json(dir, OUTPUT_DESTINATION)?, route: read_json(dir, OUTPUT_ROUTE)? })
    }

    /// Deletes output documents left over from an earlier round.
    pub fn clear(dir: &Path) -> Result<(), ProtocolError> {
        for file in [OUTPUT_DESTINATION, OUTPUT_ROUTE] {
            match fs::remove_file(dir.join(file)) {
                Err(e) if e.kind() != std::io::ErrorKind::NotFound => {
                    return Err(ProtocolError::Io { file: file.into(), message: e.to_string() })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn known_factory(id: &str, network: &RoadNetwork) -> Result<FactoryId, ProtocolError> {
    let f = FactoryId::new(id);
    if network.contains(&f) {
        Ok(f)
    } else {
        Err(ProtocolError::UnknownFactory(id.to_owned()))
    }
}

fn parse_stop(d: &StopDoc, network: &RoadNetwork, config: &SimConfig) -> Result<Stop, ProtocolError> {
    Ok(Stop {
        factory_id: known_factory(&d.factory_id, network)?,
        pickup_items: d.pickup_item_list.iter().map(|i| ItemId::new(i.as_str())).collect(),
        delivery_items: d.delivery_item_list.iter().map(|i| ItemId::new(i.as_str())).collect(),
        arrive_time: config.from_unix(d.arrive_time),
        leave_time: config.from_unix(d.leave_time),
    })
}

fn parse_item(d: &ItemDoc, network: &RoadNetwork, config: &SimConfig) -> Result<ItemInfo, ProtocolError> {
    let pallet_type = match d.pallet_type.as_str() {
        "STANDARD" => PalletType::Standard,
        "SMALL" => PalletType::Small,
        "BOX" => PalletType::Box,
        other => return Err(ProtocolError::BadPalletType { item: d.id.clone(), value: other.to_owned() }),
    };
    let demand =
        Quarters::try_from_pallets(d.demand).ok_or(ProtocolError::BadDemand { item: d.id.clone(), value: d.demand })?;
    let status = ItemStatus::try_from(d.delivery_state)
        .map_err(|_| ProtocolError::BadStatus { item: d.id.clone(), value: d.delivery_state })?;
    Ok(ItemInfo {
        id: ItemId::new(d.id.as_str()),
        pallet_type,
        order_id: OrderId::new(d.order_id.as_str()),
        demand,
        pickup_factory_id: known_factory(&d.pickup_factory_id, network)?,
        delivery_factory_id: known_factory(&d.delivery_factory_id, network)?,
        creation_time: config.from_unix(d.creation_time),
        committed_completion_time: config.from_unix(d.committed_completion_time),
        load_time: d.load_time,
        unload_time: d.unload_time,
        status,
    })
}

fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<(), ProtocolError> {
    let body = serde_json::to_vec_pretty(value).map_err(|e| ProtocolError::Malformed { file: file.into(), message: e.to_string() })?;
    fs::write(dir.join(file), body).map_err(|e| ProtocolError::Io { file: file.into(), message: e.to_string() })
}

fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, file: &str) -> Result<T, ProtocolError> {
    let body = match fs::read(dir.join(file)) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ProtocolError::MissingFile(file.into())),
        Err(e) => return Err(ProtocolError::Io { file: file.into(), message: e.to_string() }),
    };
    serde_json::from_slice(&body).map_err(|e| ProtocolError::Malformed { file: file.into(), message: e.to_string() })
}

// Field schema checks on raw JSON, independent of the serde types above.

#[derive(Clone, Copy)]
enum Kind {
    Str,
    Int,
    Double,
    StrList,
    StopOrNull,
}

const STOP_FIELDS: [(&str, Kind); 7] = [
    ("factory_id", Kind::Str),
    ("lng", Kind::Double),
    ("lat", Kind::Double),
    ("delivery_item_list", Kind::StrList),
    ("pickup_item_list", Kind::StrList),
    ("arrive_time", Kind::Int),
    ("leave_time", Kind::Int),
];

const VEHICLE_FIELDS: [(&str, Kind); 9] = [
    ("id", Kind::Str),
    ("operation_time", Kind::Int),
    ("capacity", Kind::Int),
    ("update_time", Kind::Int),
    ("cur_factory_id", Kind::Str),
    ("arrive_time_at_current_factory", Kind::Int),
    ("leave_time_at_current_factory", Kind::Int),
    ("carrying_items", Kind::StrList),
    ("destination", Kind::StopOrNull),
];

const ITEM_FIELDS: [(&str, Kind); 11] = [
    ("id", Kind::Str),
    ("type", Kind::Str),
    ("order_id", Kind::Str),
    ("demand", Kind::Double),
    ("pickup_factory_id", Kind::Str),
    ("delivery_factory_id", Kind::Str),
    ("creation_time", Kind::Int),
    ("committed_completion_time", Kind::Int),
    ("load_time", Kind::Int),
    ("unload_time", Kind::Int),
    ("delivery_state", Kind::Int),
];

fn check_fields(v: &Value, fields: &[(&str, Kind)], at: &str) -> Result<(), String> {
    let obj = v.as_object().ok_or_else(|| format!("{at}: not an object"))?;
    for (name, kind) in fields {
        let field = obj.get(*name).ok_or_else(|| format!("{at}: missing field {name}"))?;
        let ok = match kind {
            Kind::Str => field.is_string(),
            Kind::Int => field.is_i64() || field.is_u64(),
            Kind::Double => field.is_number(),
            Kind::StrList => field.as_array().is_some_and(|a| a.iter().all(Value::is_string)),
            Kind::StopOrNull => {
                if field.is_null() {
                    true
                } else {
                    check_fields(field, &STOP_FIELDS, &format!("{at}.{name}"))?;
                    true
                }
            }
        };
        if !ok {
            return Err(format!("{at}: field {name} has the wrong type"));
        }
    }
    Ok(())
}

fn check_list(v: &Value, fields: &[(&str, Kind)], file: &str) -> Result<(), String> {
    let list = v.as_array().ok_or_else(|| format!("{file}: not an array"))?;
    for (k, entry) in list.iter().enumerate() {
        check_fields(entry, fields, &format!("{file}[{k}]"))?;
    }
    Ok(())
}

/// Checks one interaction document, identified by file name, against the
/// published field list.
pub fn check_schema(file: &str, v: &Value) -> Result<(), String> {
    match file {
        VEHICLE_INFO => check_list(v, &VEHICLE_FIELDS, file),
        UNALLOCATED_ITEMS | ONGOING_ITEMS => check_list(v, &ITEM_FIELDS, file),
        OUTPUT_DESTINATION => {
            let map = v.as_object().ok_or_else(|| format!("{file}: not an object"))?;
            for (id, stop) in map {
                if !stop.is_null() {
                    check_fields(stop, &STOP_FIELDS, &format!("{file}.{id}"))?;
                }
            }
            Ok(())
        }
        OUTPUT_ROUTE => {
            let map = v.as_object().ok_or_else(|| format!("{file}: not an object"))?;
            for (id, route) in map {
                check_list(route, &STOP_FIELDS, &format!("{file}.{id}"))?;
            }
            Ok(())
        }
        other => Err(format!("unknown document {other}")),
    }
}

/// Re-reads the three input documents in `dir` and checks their schema.
pub fn check_input_schema(dir: &Path) -> Result<(), String> {
    for file in [VEHICLE_INFO, UNALLOCATED_ITEMS, ONGOING_ITEMS] {
        let v: Value = read_json(dir, file).map_err(|e| e.to_string())?;
        check_schema(file, &v)?;
    }
    Ok(())
}
