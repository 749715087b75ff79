//! The four instance tables (orders, vehicles, route map, factories) as CSV
//! files with a header row.

use std::fs::File;
use std::path::{Path, PathBuf};

use dpdp_core::{
    Factory, FactoryId, Instance, InstanceError, Order, OrderId, PalletQuantity, RoadNetwork, RouteEdge,
    Seconds, SimConfig, Vehicle, VehicleId,
};
use dpdp_core::domain::NetworkError;
use serde::{Deserialize, Serialize};

pub const ORDERS_FILE: &str = "orders.csv";
pub const VEHICLES_FILE: &str = "vehicles.csv";
pub const ROUTE_FILE: &str = "route_map.csv";
pub const FACTORY_FILE: &str = "factory_info.csv";

const DAY: Seconds = 86_400;

const ORDER_COLUMNS: [&str; 11] = [
    "order_id",
    "q_standard",
    "q_small",
    "q_box",
    "demand",
    "creation_time",
    "committed_completion_time",
    "load_time",
    "unload_time",
    "pickup_id",
    "delivery_id",
];
const VEHICLE_COLUMNS: [&str; 4] = ["car_num", "capacity", "operation_time", "gps_id"];
const ROUTE_COLUMNS: [&str; 5] = ["route_code", "start_factory_id", "end_factory_id", "distance", "time"];
const FACTORY_COLUMNS: [&str; 4] = ["factory_id", "longitude", "latitude", "port_num"];

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: missing column {column}")]
    MissingColumn { file: &'static str, column: &'static str },
    #[error("{file} line {line}: {message}")]
    Row { file: &'static str, line: u64, message: String },
    #[error("{file} line {line}: unknown factory {factory}")]
    UnknownFactory { file: &'static str, line: u64, factory: String },
    #[error("route map: {0}")]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("order {order} cannot be written as clock times: {message}")]
    Unrepresentable { order: String, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct OrderRow {
    order_id: String,
    q_standard: i64,
    q_small: i64,
    q_box: i64,
    demand: f64,
    creation_time: String,
    committed_completion_time: String,
    load_time: i64,
    unload_time: i64,
    pickup_id: String,
    delivery_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct VehicleRow {
    car_num: String,
    capacity: i64,
    operation_time: i64,
    gps_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RouteRow {
    route_code: String,
    start_factory_id: String,
    end_factory_id: String,
    distance: f64,
    time: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FactoryRow {
    factory_id: String,
    longitude: f64,
    latitude: f64,
    port_num: i64,
}

/// `%H:%M:%S` to seconds since midnight.
pub fn parse_clock(s: &str) -> Option<Seconds> {
    let mut parts = s.trim().split(':');
    let h: Seconds = parts.next()?.parse().ok()?;
    let m: Seconds = parts.next()?.parse().ok()?;
    let sec: Seconds = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !(0..24).contains(&h) || !(0..60).contains(&m) || !(0..60).contains(&sec) {
        return None;
    }
    Some(h * 3600 + m * 60 + sec)
}

/// Seconds since midnight (wrapped into one day) as `%H:%M:%S`.
pub fn format_clock(t: Seconds) -> String {
    let t = t.rem_euclid(DAY);
    format!("{:02}:{:02}:{:02}", t / 3600, t / 60 % 60, t % 60)
}

fn non_negative(file: &'static str, line: u64, name: &str, v: i64) -> Result<u32, TableError> {
    u32::try_from(v).map_err(|_| TableError::Row { file, line, message: format!("negative or oversized {name} {v}") })
}

fn reader(dir: &Path, file: &'static str, columns: &[&'static str]) -> Result<csv::Reader<File>, TableError> {
    let path = dir.join(file);
    let f = File::open(&path).map_err(|source| TableError::Io { path: path.clone(), source })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f);
    let headers = rdr.headers().map_err(|e| TableError::Row { file, line: 1, message: e.to_string() })?.clone();
    for column in columns {
        if !headers.iter().any(|h| h == *column) {
            return Err(TableError::MissingColumn { file, column });
        }
    }
    Ok(rdr)
}

fn rows<T: for<'de> Deserialize<'de>>(
    dir: &Path,
    file: &'static str,
    columns: &[&'static str],
) -> Result<Vec<(u64, T)>, TableError> {
    let mut rdr = reader(dir, file, columns)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<T>() {
        match rec {
            Ok(row) => out.push((0, row)),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(TableError::Row { file, line, message: e.to_string() });
            }
        }
    }
    // Data rows start on line 2, one record per line.
    for (k, row) in out.iter_mut().enumerate() {
        row.0 = k as u64 + 2;
    }
    Ok(out)
}

/// Reads the factory and route tables.
pub fn read_network(dir: &Path) -> Result<RoadNetwork, TableError> {
    let mut factories = Vec::new();
    for (line, r) in rows::<FactoryRow>(dir, FACTORY_FILE, &FACTORY_COLUMNS)? {
        factories.push(Factory {
            id: FactoryId::new(r.factory_id),
            longitude: r.longitude,
            latitude: r.latitude,
            dock_count: non_negative(FACTORY_FILE, line, "port_num", r.port_num)?,
        });
    }
    let known: std::collections::BTreeSet<&str> = factories.iter().map(|f| f.id.as_str()).collect();
    let mut edges = Vec::new();
    for (line, r) in rows::<RouteRow>(dir, ROUTE_FILE, &ROUTE_COLUMNS)? {
        for f in [&r.start_factory_id, &r.end_factory_id] {
            if !known.contains(f.as_str()) {
                return Err(TableError::UnknownFactory { file: ROUTE_FILE, line, factory: f.clone() });
            }
        }
        if !(r.distance >= 0.0) || r.time < 0 {
            return Err(TableError::Row { file: ROUTE_FILE, line, message: "negative distance or time".into() });
        }
        edges.push(RouteEdge {
            route_code: r.route_code,
            from: FactoryId::new(r.start_factory_id),
            to: FactoryId::new(r.end_factory_id),
            distance: r.distance,
            travel_time: r.time,
        });
    }
    Ok(RoadNetwork::new(factories, edges)?)
}

/// Reads all four tables from `dir`.
///
/// Clock times become seconds since the start of the horizon; a committed
/// time that is clock-earlier than its creation time is taken to fall on the
/// next day. The `demand` column is informational and is recomputed from
/// the quantity columns.
pub fn read_instance(dir: &Path, config: SimConfig) -> Result<Instance, TableError> {
    let network = read_network(dir)?;

    let mut fleet = Vec::new();
    for (line, r) in rows::<VehicleRow>(dir, VEHICLES_FILE, &VEHICLE_COLUMNS)? {
        fleet.push(Vehicle {
            id: VehicleId::new(r.car_num),
            capacity: non_negative(VEHICLES_FILE, line, "capacity", r.capacity)?,
            operation_time: non_negative(VEHICLES_FILE, line, "operation_time", r.operation_time)?,
            gps_id: r.gps_id,
        });
    }

    let mut orders = Vec::new();
    for (line, r) in rows::<OrderRow>(dir, ORDERS_FILE, &ORDER_COLUMNS)? {
        let bad = |message: String| TableError::Row { file: ORDERS_FILE, line, message };
        for f in [&r.pickup_id, &r.delivery_id] {
            if !network.contains(&FactoryId::new(f.as_str())) {
                return Err(TableError::UnknownFactory { file: ORDERS_FILE, line, factory: f.clone() });
            }
        }
        let quantity = PalletQuantity {
            standard: non_negative(ORDERS_FILE, line, "q_standard", r.q_standard)?,
            small: non_negative(ORDERS_FILE, line, "q_small", r.q_small)?,
            boxes: non_negative(ORDERS_FILE, line, "q_box", r.q_box)?,
        };
        let creation = parse_clock(&r.creation_time).ok_or_else(|| bad(format!("bad clock time {:?}", r.creation_time)))?;
        let mut committed = parse_clock(&r.committed_completion_time)
            .ok_or_else(|| bad(format!("bad clock time {:?}", r.committed_completion_time)))?;
        if committed < creation {
            committed += DAY;
        }
        if r.load_time < 0 || r.unload_time < 0 {
            return Err(bad("negative load or unload time".into()));
        }
        orders.push(Order {
            id: OrderId::new(r.order_id),
            pickup: FactoryId::new(r.pickup_id),
            delivery: FactoryId::new(r.delivery_id),
            quantity,
            creation_time: creation,
            committed_completion_time: committed,
            load_time: r.load_time,
            unload_time: r.unload_time,
        });
    }
    Ok(Instance::new(network, fleet, orders, config)?)
}

fn writer(dir: &Path, file: &str) -> Result<csv::Writer<File>, TableError> {
    let path = dir.join(file);
    let f = File::create(&path).map_err(|source| TableError::Io { path, source })?;
    Ok(csv::Writer::from_writer(f))
}

fn io_err(dir: &Path, file: &str) -> impl Fn(csv::Error) -> TableError {
    let path = dir.join(file);
    move |e| TableError::Io { path: path.clone(), source: std::io::Error::other(e) }
}

fn write_rows<T: Serialize>(dir: &Path, file: &str, rows: impl IntoIterator<Item = T>) -> Result<(), TableError> {
    let mut w = writer(dir, file)?;
    for row in rows {
        w.serialize(row).map_err(io_err(dir, file))?;
    }
    w.flush().map_err(|source| TableError::Io { path: dir.join(file), source })
}

/// Writes the four tables into `dir`, which must exist.
///
/// Fails for orders whose times cannot be expressed as clock times: creation
/// must fall on the first day and the committed time within 24 hours after it.
pub fn write_instance(dir: &Path, instance: &Instance) -> Result<(), TableError> {
    let mut order_rows = Vec::with_capacity(instance.orders.len());
    for o in &instance.orders {
        let lead = o.committed_completion_time - o.creation_time;
        if !(0..DAY).contains(&o.creation_time) || !(1..DAY).contains(&lead) {
            return Err(TableError::Unrepresentable {
                order: o.id.0.clone(),
                message: format!("creation {} s, committed {} s", o.creation_time, o.committed_completion_time),
            });
        }
        order_rows.push(OrderRow {
            order_id: o.id.0.clone(),
            q_standard: o.quantity.standard.into(),
            q_small: o.quantity.small.into(),
            q_box: o.quantity.boxes.into(),
            demand: o.demand().as_pallets(),
            creation_time: format_clock(o.creation_time),
            committed_completion_time: format_clock(o.committed_completion_time),
            load_time: o.load_time,
            unload_time: o.unload_time,
            pickup_id: o.pickup.0.clone(),
            delivery_id: o.delivery.0.clone(),
        });
    }
    write_rows(dir, ORDERS_FILE, order_rows)?;
    write_rows(
        dir,
        VEHICLES_FILE,
        instance.fleet.iter().map(|v| VehicleRow {
            car_num: v.id.0.clone(),
            capacity: v.capacity.into(),
            operation_time: v.operation_time.into(),
            gps_id: v.gps_id.clone(),
        }),
    )?;
    write_rows(
        dir,
        ROUTE_FILE,
        instance.network.edges().map(|e| RouteRow {
            route_code: e.route_code,
            start_factory_id: e.from.0,
            end_factory_id: e.to.0,
            distance: e.distance,
            time: e.travel_time,
        }),
    )?;
    write_rows(
        dir,
        FACTORY_FILE,
        instance.network.factories().iter().map(|f| FactoryRow {
            factory_id: f.id.0.clone(),
            longitude: f.longitude,
            latitude: f.latitude,
            port_num: f.dock_count.into(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use dpdp_core::{generate_instance, GeneratorParams};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn clock_times() {
        assert_eq!(parse_clock("00:03:48"), Some(228));
        assert_eq!(parse_clock("04:03:48"), Some(14_628));
        assert_eq!(parse_clock("24:00:00"), None);
        assert_eq!(parse_clock("1:2"), None);
        assert_eq!(format_clock(14_628), "04:03:48");
        assert_eq!(format_clock(86_400 + 5), "00:00:05");
    }

    #[test]
    fn round_trip_generated() {
        let inst = generate_instance(&GeneratorParams { seed: 3, orders: 40, ..Default::default() }, SimConfig::default()).unwrap();
        let dir = tmp();
        write_instance(dir.path(), &inst).unwrap();
        let back = read_instance(dir.path(), SimConfig::default()).unwrap();
        assert_eq!(back, inst);
    }

    fn write(dir: &Path, file: &str, body: &str) {
        std::fs::write(dir.join(file), body).unwrap();
    }

    fn tiny(dir: &Path) {
        write(dir, FACTORY_FILE, "factory_id,longitude,latitude,port_num\na,116.6259,40.2204,6\nb,116.0,40.0,2\n");
        write(
            dir,
            ROUTE_FILE,
            "route_code,start_factory_id,end_factory_id,distance,time\nr1,a,b,76.0,10140\nr2,b,a,76.0,10140\n",
        );
        write(dir, VEHICLES_FILE, "car_num,capacity,operation_time,gps_id\nV_1,15,24,G_1\n");
        write(
            dir,
            ORDERS_FILE,
            "order_id,q_standard,q_small,q_box,demand,creation_time,committed_completion_time,load_time,unload_time,pickup_id,delivery_id\n\
             0003480001,1,2,1,1.75,00:03:48,04:03:48,120,120,a,b\n\
             0003480002,1,0,0,1,22:00:00,02:00:00,120,120,b,a\n",
        );
    }

    #[test]
    fn parses_example_rows() {
        let dir = tmp();
        tiny(dir.path());
        let inst = read_instance(dir.path(), SimConfig::default()).unwrap();
        let o = &inst.orders[0];
        assert_eq!(o.id.as_str(), "0003480001");
        assert_eq!((o.creation_time, o.committed_completion_time), (228, 14_628));
        assert_eq!(inst.orders[1].committed_completion_time, 86_400 + 7200);
        let (a, b) = (FactoryId::from("a"), FactoryId::from("b"));
        assert_eq!(inst.network.distance(&a, &b), Some(76.0));
        assert_eq!(inst.network.travel_time(&a, &b), Some(10_140));
    }

    #[test]
    fn rejects_bad_tables() {
        let dir = tmp();
        tiny(dir.path());
        write(dir.path(), ROUTE_FILE, "route_code,start_factory_id,end_factory_id,distance,time\nr1,a,b,76.0,10140\n");
        let err = read_instance(dir.path(), SimConfig::default()).unwrap_err();
        assert!(err.to_string().contains("incomplete graph"), "{err}");

        tiny(dir.path());
        write(dir.path(), VEHICLES_FILE, "car_num,capacity,gps_id\nV_1,15,G_1\n");
        assert!(matches!(
            read_instance(dir.path(), SimConfig::default()),
            Err(TableError::MissingColumn { column: "operation_time", .. })
        ));

        tiny(dir.path());
        write(
            dir.path(),
            ORDERS_FILE,
            "order_id,q_standard,q_small,q_box,demand,creation_time,committed_completion_time,load_time,unload_time,pickup_id,delivery_id\n\
             1,1,0,0,1,00:00:00,04:00:00,1,1,a,b\n\
             2,-1,0,0,1,00:00:00,04:00:00,1,1,a,b\n",
        );
        match read_instance(dir.path(), SimConfig::default()) {
            Err(TableError::Row { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("negative"));
            }
            other => panic!("{other:?}"),
        }

        tiny(dir.path());
        write(
            dir.path(),
            ORDERS_FILE,
            "order_id,q_standard,q_small,q_box,demand,creation_time,committed_completion_time,load_time,unload_time,pickup_id,delivery_id\n\
             1,1,0,0,1,00:00:00,04:00:00,1,1,a,zz\n",
        );
        assert!(matches!(read_instance(dir.path(), SimConfig::default()), Err(TableError::UnknownFactory { line: 2, .. })));
    }

    #[test]
    fn refuses_unrepresentable_times() {
        let mut inst = generate_instance(&GeneratorParams { seed: 1, orders: 5, ..Default::default() }, SimConfig::default()).unwrap();
        inst.orders[0].committed_completion_time = inst.orders[0].creation_time + DAY;
        assert!(matches!(write_instance(tmp().path(), &inst), Err(TableError::Unrepresentable { .. })));
    }
}
