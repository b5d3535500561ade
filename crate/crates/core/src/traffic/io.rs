//! CSV and JSON forms of a packet sequence. Both use the row schema
//! `index,time_n,time_d,size_n,size_d,flow` with 1-based indices.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{FlowId, Packet, PacketSequence, TrafficError};
use crate::q::Q;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketRow {
    pub index: usize,
    pub time_n: i128,
    pub time_d: i128,
    pub size_n: i128,
    pub size_d: i128,
    pub flow: u32,
}

impl PacketRow {
    fn of(index: usize, p: &Packet) -> PacketRow {
        PacketRow {
            index,
            time_n: p.time.numer(),
            time_d: p.time.denom(),
            size_n: p.size.numer(),
            size_d: p.size.denom(),
            flow: p.flow.0,
        }
    }
}

fn rational(row: usize, n: i128, d: i128) -> Result<Q, TrafficError> {
    if d <= 0 {
        return Err(TrafficError::BadRational {
            row,
            source: crate::q::ParseQError::ZeroDenominator(format!("{n}/{d}")),
        });
    }
    Ok(Q::new(n, d))
}

fn from_rows(rows: Vec<PacketRow>) -> Result<PacketSequence, TrafficError> {
    let mut packets = Vec::with_capacity(rows.len());
    for (k, r) in rows.into_iter().enumerate() {
        if r.index != k + 1 {
            return Err(TrafficError::BadIndex { row: k + 1, expected: k + 1, found: r.index });
        }
        packets.push(Packet::new(
            rational(k + 1, r.time_n, r.time_d)?,
            rational(k + 1, r.size_n, r.size_d)?,
            FlowId(r.flow),
        ));
    }
    PacketSequence::new(packets)
}

fn rows(seq: &PacketSequence) -> Vec<PacketRow> {
    seq.packets().iter().enumerate().map(|(k, p)| PacketRow::of(k + 1, p)).collect()
}

pub fn write_csv<W: Write>(seq: &PacketSequence, w: W) -> Result<(), TrafficError> {
    let mut wr = csv::Writer::from_writer(w);
    if seq.is_empty() {
        wr.write_record(["index", "time_n", "time_d", "size_n", "size_d", "flow"])?;
    }
    for r in rows(seq) {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<PacketSequence, TrafficError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    let expected = ["index", "time_n", "time_d", "size_n", "size_d", "flow"];
    if header.iter().ne(expected.iter().copied()) {
        return Err(TrafficError::Csv(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("expected header {}", expected.join(",")),
        ))));
    }
    let rows: Vec<PacketRow> = rd.deserialize().collect::<Result<_, _>>()?;
    from_rows(rows)
}

pub fn write_json<W: Write>(seq: &PacketSequence, w: W) -> Result<(), TrafficError> {
    serde_json::to_writer_pretty(w, &rows(seq))?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<PacketSequence, TrafficError> {
    let rows: Vec<PacketRow> = serde_json::from_reader(r)?;
    from_rows(rows)
}

impl Serialize for PacketSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        rows(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PacketSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<PacketSequence, D::Error> {
        from_rows(Vec::<PacketRow>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
